//! Normalized entire cyclic chains over `Ω_T(X×T)`: words of monomials,
//! the differentials `D⊗` (tensor extension of `d + ι_{∂T}`), Hochschild
//! `b` and Connes `B`, the entire seminorm and restriction to constant loops.
//!
//! Signs follow the Koszul rule in the shifted grading: slot 0 has degree
//! `|θ₀|`, slot `i ≥ 1` has degree `|θᵢ| − 1`, and
//! `εᵢ = |θ₀| + Σ_{1≤j≤i}(|θⱼ| − 1)`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::forms::{EquivariantForm, Mono, TrigPolyForm};
use crate::scalar::{Coeff, GaussRational};

pub type Word = SmallVec<[Mono; 5]>;

fn parity_sign(k: i32) -> i64 {
    if k.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Degree of a word in the shifted grading.
pub fn word_degree(w: &[Mono]) -> i32 {
    w.iter().enumerate().map(|(i, m)| if i == 0 { m.degree() } else { m.degree() - 1 }).sum()
}

/// Slots `1..=N` must not hold the unit.
pub fn is_normalized(w: &[Mono]) -> bool {
    !w.is_empty() && w[1..].iter().all(|m| !m.is_unit())
}

/// Overall signs of the three pieces of `δ = s_D·D⊗ + s_b·b + s_B·B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChainSigns {
    pub dga: i8,
    pub hochschild: i8,
    pub connes: i8,
    /// Negative-control hook: flips the sign of the untwisted term of `B`.
    pub broken_connes: bool,
}

impl Default for ChainSigns {
    fn default() -> Self {
        ChainSigns { dga: 1, hochschild: 1, connes: 1, broken_connes: false }
    }
}

impl ChainSigns {
    pub fn with_broken_connes(mut self) -> Self {
        self.broken_connes = true;
        self
    }
}

/// A homogeneous basis element of the DGA, as seen by the word operators.
pub trait Letter: Copy {
    fn degree(&self) -> i32;
    fn is_unit(&self) -> bool;
    fn unit() -> Self;
    /// `None` when the product vanishes.
    fn product(&self, o: &Self) -> Option<(i64, Self)>;
    /// `(d + ι_{∂T})` of the letter as `(coefficient, letter)` pairs.
    fn dga_into<S: Coeff>(&self, n: usize, out: &mut impl FnMut(S, Self));
}

impl Letter for Mono {
    fn degree(&self) -> i32 {
        Mono::degree(self)
    }
    fn is_unit(&self) -> bool {
        Mono::is_unit(self)
    }
    fn unit() -> Self {
        Mono::UNIT
    }
    fn product(&self, o: &Self) -> Option<(i64, Self)> {
        Mono::product(self, o)
    }
    fn dga_into<S: Coeff>(&self, n: usize, out: &mut impl FnMut(S, Self)) {
        for (k, m) in self.dga::<S>(n) {
            out(k, m);
        }
    }
}

type Buf<L> = SmallVec<[L; 8]>;

/// `D⊗` on one word: `(d+ι)` in slot 0 with sign `+`, in slot `i ≥ 1` with
/// sign `−(−1)^{ε_{i−1}}`.
pub fn dga_word<L: Letter, S: Coeff>(w: &[L], n: usize, coeff: &S, sink: &mut impl FnMut(&[L], S)) {
    let mut buf: Buf<L> = SmallVec::from_slice(w);
    let mut eps = 0i32;
    for i in 0..w.len() {
        let sign = if i == 0 { 1 } else { -parity_sign(eps) };
        w[i].dga_into::<S>(n, &mut |k, m| {
            if i >= 1 && m.is_unit() {
                return;
            }
            buf[i] = m;
            sink(&buf, (coeff.clone() * k).scale_int(sign));
        });
        buf[i] = w[i];
        eps += if i == 0 { w[0].degree() } else { w[i].degree() - 1 };
    }
}

/// Hochschild `b`: adjacent products `θᵢθᵢ₊₁` with sign `(−1)^{εᵢ}` and the
/// wrap term `(θ_N θ₀)⊗θ₁⊗…⊗θ_{N−1}`.
pub fn hochschild_word<L: Letter, S: Coeff>(w: &[L], coeff: &S, sink: &mut impl FnMut(&[L], S)) {
    let len = w.len();
    if len < 2 {
        return;
    }
    let mut buf: Buf<L> = SmallVec::new();
    let mut eps = w[0].degree();
    for i in 0..len - 1 {
        if let Some((s, m)) = w[i].product(&w[i + 1]) {
            if !(i >= 1 && m.is_unit()) {
                buf.clear();
                buf.extend_from_slice(&w[..i]);
                buf.push(m);
                buf.extend_from_slice(&w[i + 2..]);
                sink(&buf, coeff.scale_int(s * parity_sign(eps)));
            }
        }
        eps += w[i + 1].degree() - 1;
    }
    let last = len - 1;
    if let Some((s, m)) = w[last].product(&w[0]) {
        // ε_{N−1}
        let eps_prev = eps - (w[last].degree() - 1);
        let zn = w[last].degree();
        let sign = parity_sign((zn - 1) * (eps_prev - 1) + zn);
        buf.clear();
        buf.push(m);
        buf.extend_from_slice(&w[1..last]);
        sink(&buf, coeff.scale_int(s * sign));
    }
}

/// Connes `B`: `Σᵢ ± 1⊗θᵢ⊗…⊗θ_N⊗θ₀⊗…⊗θᵢ₋₁`, the Koszul sign of the cyclic
/// rotation of all slots in shifted degree.
pub fn connes_word<L: Letter, S: Coeff>(w: &[L], broken: bool, coeff: &S, sink: &mut impl FnMut(&[L], S)) {
    if w[0].is_unit() {
        return;
    }
    let total: i32 = w.iter().map(|m| m.degree() - 1).sum();
    let mut buf: Buf<L> = SmallVec::new();
    let mut before = 0i32;
    for i in 0..w.len() {
        let after = total - before;
        let mut sign = parity_sign(after * before);
        if broken && i == 0 {
            sign = -sign;
        }
        buf.clear();
        buf.push(L::unit());
        buf.extend_from_slice(&w[i..]);
        buf.extend_from_slice(&w[..i]);
        sink(&buf, coeff.scale_int(sign));
        before += w[i].degree() - 1;
    }
}

/// Finite linear combination of normalized words.
#[derive(Clone, PartialEq)]
pub struct Chain<S> {
    n: usize,
    terms: BTreeMap<Word, S>,
}

impl<S: Coeff> Chain<S> {
    pub fn zero(n: usize) -> Self {
        Chain { n, terms: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// A single word; non-normalized words give the zero chain.
    pub fn word(n: usize, w: &[Mono], coeff: S) -> Self {
        let mut c = Self::zero(n);
        c.add_word(w, coeff);
        c
    }

    /// Tensor word `θ₀⊗…⊗θ_N` expanded in the monomial basis.
    pub fn from_forms(forms: &[EquivariantForm<S>]) -> Result<Self> {
        let first = forms.first().ok_or_else(|| Error::InvalidInput("a word needs at least one slot".into()))?;
        let n = first.dim();
        if forms.iter().any(|f| f.dim() != n) {
            return Err(Error::Dimension("word slots on different tori".into()));
        }
        let mut partial: Vec<(Word, S)> = vec![(Word::new(), S::one())];
        for f in forms {
            let monos = f.monomials();
            let mut next = Vec::with_capacity(partial.len() * monos.len());
            for (w, c) in &partial {
                for (k, m) in &monos {
                    let mut nw = w.clone();
                    nw.push(*m);
                    next.push((nw, c.clone() * k.clone()));
                }
            }
            partial = next;
        }
        let mut out = Self::zero(n);
        for (w, c) in partial {
            out.add_word(&w, c);
        }
        Ok(out)
    }

    pub fn add_word(&mut self, w: &[Mono], coeff: S) {
        if coeff.is_zero() || !is_normalized(w) {
            return;
        }
        let key: Word = w.iter().copied().collect();
        let remove = match self.terms.get_mut(&key) {
            Some(v) => {
                *v += coeff;
                v.is_zero()
            }
            None => {
                self.terms.insert(key.clone(), coeff);
                false
            }
        };
        if remove {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &S)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, w: &[Mono]) -> S {
        let key: Word = w.iter().copied().collect();
        self.terms.get(&key).cloned().unwrap_or_else(S::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_length(&self) -> usize {
        self.terms.keys().map(|w| w.len() - 1).max().unwrap_or(0)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &o.terms {
            out.add_word(w, c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&(-S::one())))
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut out = Self::zero(self.n);
        for (w, c) in &self.terms {
            out.add_word(w, c.clone() * s.clone());
        }
        out
    }

    /// Degree if every word has the same shifted degree.
    pub fn degree(&self) -> Option<i32> {
        let mut it = self.terms.keys().map(|w| word_degree(w));
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    /// Part of the chain of the given degree parity.
    pub fn parity_part(&self, odd: bool) -> Self {
        let mut out = Self::zero(self.n);
        for (w, c) in &self.terms {
            if (word_degree(w).rem_euclid(2) == 1) == odd {
                out.add_word(w, c.clone());
            }
        }
        out
    }

    fn apply(&self, mut f: impl FnMut(&[Mono], &S, &mut dyn FnMut(&[Mono], S))) -> Self {
        let mut out = Self::zero(self.n);
        for (w, c) in &self.terms {
            f(w, c, &mut |nw, k| out.add_word(nw, k));
        }
        out
    }

    pub fn dga_tensor(&self) -> Self {
        let n = self.n;
        self.apply(|w, c, sink| dga_word(w, n, c, &mut |a, b| sink(a, b)))
    }

    pub fn hochschild_b(&self) -> Self {
        self.apply(|w, c, sink| hochschild_word(w, c, &mut |a, b| sink(a, b)))
    }

    pub fn connes_b(&self) -> Self {
        self.connes_b_with(false)
    }

    pub fn connes_b_with(&self, broken: bool) -> Self {
        self.apply(|w, c, sink| connes_word(w, broken, c, &mut |a, b| sink(a, b)))
    }

    pub fn total_differential(&self, signs: &ChainSigns) -> Self {
        let n = self.n;
        let (sd, sb, sbb) = (signs.dga as i64, signs.hochschild as i64, signs.connes as i64);
        let broken = signs.broken_connes;
        self.apply(|w, c, sink| {
            dga_word(w, n, c, &mut |a, b: S| sink(a, b.scale_int(sd)));
            hochschild_word(w, c, &mut |a, b: S| sink(a, b.scale_int(sb)));
            connes_word(w, broken, c, &mut |a, b: S| sink(a, b.scale_int(sbb)));
        })
    }

    /// `Σ_N π_N(c_N)/⌊N/2⌋!` with slot weight `(1+|m|)^k` per monomial.
    pub fn entire_norm(&self, k: f64) -> f64 {
        self.terms
            .iter()
            .map(|(w, c)| {
                let nn = w.len() - 1;
                let fact: f64 = (1..=nn / 2).map(|j| j as f64).product();
                c.abs() * w.iter().map(|m| m.weight(k)).product::<f64>() / fact
            })
            .sum()
    }

    /// `Σ_words coeff · (1/N!) θ₀' ∧ (−θ₁'') ∧ … ∧ (−θ_N'')`.
    pub fn restrict_to_constants(&self) -> TrigPolyForm<S> {
        let mut out = TrigPolyForm::zero(self.n);
        for (w, c) in &self.terms {
            if let Some((s, m)) = restrict_word(w) {
                out.add_basis(m.mode, m.idx, c.scale_int(s));
            }
        }
        out
    }

    pub fn pullback(&self, o: &[Vec<i64>]) -> Result<Self> {
        let mut out = Self::zero(self.n);
        for (w, c) in &self.terms {
            let forms: Vec<EquivariantForm<S>> = w
                .iter()
                .map(|m| EquivariantForm::from_monomials(self.n, [(S::one(), *m)]).pullback(o))
                .collect::<Result<_>>()?;
            out = out.add(&Self::from_forms(&forms)?.scale(c));
        }
        Ok(out)
    }

    pub fn map_coeffs<T: Coeff>(&self, f: impl Fn(&Word, &S) -> T) -> Chain<T> {
        let mut out = Chain::zero(self.n);
        for (w, c) in &self.terms {
            out.add_word(w, f(w, c));
        }
        out
    }
}

/// Sign and monomial of `θ₀'∧(−θ₁'')∧…` for a monomial word, without the
/// `1/N!` factor (returned separately by [`restriction_factor`]).
fn restrict_word_raw(w: &[Mono]) -> Option<(i64, Mono)> {
    if w[0].dbl || w[1..].iter().any(|m| !m.dbl) {
        return None;
    }
    let mut acc = Mono::prime(w[0].mode, w[0].idx);
    let mut sign = 1i64;
    for m in &w[1..] {
        let (s, nm) = acc.product(&Mono::prime(m.mode, m.idx))?;
        sign *= -s;
        acc = nm;
    }
    Some((sign, acc))
}

fn restrict_word(w: &[Mono]) -> Option<(i64, Mono)> {
    restrict_word_raw(w)
}

pub fn restriction_factor(len_minus_one: usize) -> f64 {
    1.0 / (1..=len_minus_one).map(|j| j as f64).product::<f64>()
}

impl Chain<Complex64> {
    /// Restriction including the `1/N!` simplex volume.
    pub fn restrict_to_constants_scaled(&self) -> TrigPolyForm<Complex64> {
        let mut out = TrigPolyForm::zero(self.n);
        for (w, c) in &self.terms {
            if let Some((s, m)) = restrict_word(w) {
                out.add_basis(m.mode, m.idx, c * (s as f64 * restriction_factor(w.len() - 1)));
            }
        }
        out
    }
}

/// Exact chains live in angular coordinates `y = 2πx`; the float chain of
/// the same object multiplies each coefficient by `(2π)^{|I|}` per slot.
pub fn exact_to_float<S: Coeff>(c: &Chain<S>) -> Chain<Complex64> {
    c.map_coeffs(|w, k| {
        let deg: u32 = w.iter().map(|m| m.idx.degree()).sum();
        k.to_c64() * std::f64::consts::TAU.powi(deg as i32)
    })
}

pub fn gauss_to_rational(c: &Chain<crate::scalar::GaussInt>) -> Chain<GaussRational> {
    c.map_coeffs(|_, k| GaussRational::from(*k))
}

impl<S: Coeff> fmt::Debug for Chain<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(w, c)| {
                let slots: Vec<String> = w.iter().map(|m| format!("{m:?}")).collect();
                format!("({c:?})[{}]", slots.join(" ⊗ "))
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// First word with a nonzero coefficient, for diagnostics.
pub fn first_nonzero<S: Coeff>(c: &Chain<S>) -> Option<(Word, S)> {
    c.terms().next().map(|(w, k)| (w.clone(), k.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{IndexSet, Mode};
    use crate::scalar::GaussInt;

    type Q = GaussRational;

    fn mono(m: [i64; 2], idx: u8, dbl: bool) -> Mono {
        Mono { mode: Mode::from_slice(&m).unwrap(), idx: IndexSet(idx), dbl }
    }

    fn sample_words() -> Vec<Word> {
        let pool = [
            mono([0, 0], 0, false),
            mono([1, 0], 0b01, false),
            mono([0, -1], 0b10, true),
            mono([1, 1], 0b11, false),
            mono([-1, 0], 0, true),
            mono([0, 1], 0b01, true),
            mono([0, 0], 0b11, true),
            mono([1, -1], 0, false),
        ];
        let mut out = Vec::new();
        for a in 0..pool.len() {
            out.push(SmallVec::from_slice(&[pool[a]]));
            for b in 1..pool.len() {
                out.push(SmallVec::from_slice(&[pool[a], pool[b]]));
                for c in 1..pool.len() {
                    if (a + b + c) % 3 == 0 {
                        out.push(SmallVec::from_slice(&[pool[a], pool[b], pool[c]]));
                    }
                }
            }
        }
        out
    }

    #[test]
    fn identities_on_sample_words() {
        for w in sample_words() {
            let c = Chain::<GaussInt>::word(2, &w, GaussInt::one());
            let d = c.dga_tensor();
            let b = c.hochschild_b();
            let bb = c.connes_b();
            assert!(d.dga_tensor().is_zero(), "D² on {w:?}");
            assert!(b.hochschild_b().is_zero(), "b² on {w:?}: {:?}", b.hochschild_b());
            assert!(bb.connes_b().is_zero(), "B² on {w:?}");
            assert!(b.connes_b().add(&bb.hochschild_b()).is_zero(), "bB+Bb on {w:?}");
            assert!(d.hochschild_b().add(&b.dga_tensor()).is_zero(), "Db+bD on {w:?}");
            assert!(d.connes_b().add(&bb.dga_tensor()).is_zero(), "DB+BD on {w:?}");
            assert!(c.total_differential(&ChainSigns::default()).total_differential(&ChainSigns::default()).is_zero());
        }
    }

    #[test]
    fn broken_connes_is_detected() {
        let signs = ChainSigns::default().with_broken_connes();
        let failing = sample_words().into_iter().any(|w| {
            let c = Chain::<GaussInt>::word(2, &w, GaussInt::one());
            !c.total_differential(&signs).total_differential(&signs).is_zero()
        });
        assert!(failing);
    }

    #[test]
    fn normalization_and_trivial_cases() {
        let one = mono([0, 0], 0, false);
        let x = mono([1, 0], 0b01, false);
        assert!(Chain::<Q>::word(2, &[x, one], Q::one()).is_zero());
        assert!(Chain::<Q>::word(2, &[x], Q::one()).hochschild_b().is_zero());
        assert!(Chain::<Q>::word(2, &[one, x], Q::one()).connes_b().is_zero());
        // δ(1) = B(1) = 1⊗1 = 0
        assert!(Chain::<Q>::word(2, &[one], Q::one()).total_differential(&ChainSigns::default()).is_zero());
        // length zero: δ = D + B
        let w = Chain::<Q>::word(2, &[x], Q::one());
        assert_eq!(w.total_differential(&ChainSigns::default()), w.dga_tensor().add(&w.connes_b()));
    }

    #[test]
    fn differentials_shift_degree() {
        for w in sample_words() {
            let c = Chain::<GaussInt>::word(2, &w, GaussInt::one());
            let deg = word_degree(&w);
            for (img, expect) in [(c.dga_tensor(), deg + 1), (c.hochschild_b(), deg + 1), (c.connes_b(), deg - 1)] {
                if let Some(d) = img.degree() {
                    assert_eq!(d, expect);
                }
            }
        }
    }

    #[test]
    fn entire_norm_examples() {
        let x = mono([0, 0], 0b01, false);
        let w = [x, x, x, x, x];
        let c = Chain::<Q>::word(2, &w, Q::one());
        assert!((c.entire_norm(1.0) - 0.5).abs() < 1e-15);
        assert_eq!(Chain::<Q>::zero(2).entire_norm(1.0), 0.0);
        let s = c.scale(&Q::from_int(-3));
        assert!((s.entire_norm(1.0) - 1.5).abs() < 1e-15);
        let y = mono([1, 0], 0b01, false);
        let c2 = Chain::<Q>::word(2, &[y, x], Q::one());
        assert!(c2.entire_norm(2.0) >= c2.entire_norm(1.0));
        assert!(c.add(&c2).entire_norm(1.0) <= c.entire_norm(1.0) + c2.entire_norm(1.0) + 1e-15);
    }

    #[test]
    fn restriction_examples() {
        let one = mono([0, 0], 0, false);
        let vol = mono([0, 0], 0b11, false);
        let c = Chain::<Complex64>::word(2, &[vol], Complex64::new(1.0, 0.0));
        assert_eq!(c.restrict_to_constants_scaled().integrate_top(), Complex64::new(1.0, 0.0));
        let h = mono([0, 0], 0b11, true);
        let c = Chain::<Complex64>::word(2, &[one, h], Complex64::new(1.0, 0.0));
        assert_eq!(c.restrict_to_constants_scaled().integrate_top(), Complex64::new(-1.0, 0.0));
        let p = mono([0, 0], 0b01, false);
        assert!(Chain::<Complex64>::word(2, &[one, p], Complex64::new(1.0, 0.0)).restrict_to_constants().is_zero());
        // 1⊗ϑdx¹⊗ϑdx² → (1/2)(−dx¹)∧(−dx²)
        let a = mono([0, 0], 0b01, true);
        let b = mono([0, 0], 0b10, true);
        let c = Chain::<Complex64>::word(2, &[one, a, b], Complex64::new(1.0, 0.0));
        assert_eq!(c.restrict_to_constants_scaled().integrate_top(), Complex64::new(0.5, 0.0));
    }

    #[test]
    fn from_forms_expands_tensor_products() {
        let n = 2;
        let mut f = TrigPolyForm::<Q>::zero(n);
        f.add_term(&[1, 0], &[], Q::one()).unwrap();
        f.add_term(&[0, 0], &[], Q::from_int(2)).unwrap();
        let mut h = TrigPolyForm::<Q>::zero(n);
        h.add_term(&[0, 1], &[0], Q::one()).unwrap();
        let w = Chain::from_forms(&[EquivariantForm::from_prime(f.clone()), EquivariantForm::from_prime(f)]).unwrap();
        // unit in slot 1 is dropped: 2 surviving words
        assert_eq!(w.len(), 2);
        let w2 = Chain::from_forms(&[EquivariantForm::unit(n), EquivariantForm::from_dblprime(h)]).unwrap();
        assert_eq!(w2.len(), 1);
    }

    #[test]
    fn conversion_commutes_with_differential() {
        for w in sample_words().into_iter().take(40) {
            let c = Chain::<Q>::word(2, &w, Q::one());
            let lhs = exact_to_float(&c.total_differential(&ChainSigns::default()));
            let rhs = exact_to_float(&c).total_differential(&ChainSigns::default());
            let diff = lhs.sub(&rhs);
            assert!(diff.terms().all(|(_, k)| k.norm() < 1e-9), "{w:?}");
        }
    }
}
