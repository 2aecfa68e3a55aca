//! Trigonometric-polynomial differential forms on the torus and
//! T-invariant forms `θ = θ' + ϑ_T ∧ θ''` on `X × T`.
//!
//! A form term `c · e^{2πi⟨m,x⟩} dx^{i₁}∧…∧dx^{i_k}` is keyed by its
//! Fourier mode `m` and its index set. [`Mono`] is the corresponding basis
//! element of the equivariant algebra; chains are built from monomials.

use std::collections::BTreeMap;
use std::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::scalar::Coeff;

pub const MAX_DIM: usize = 8;

/// Strictly increasing index tuple stored as a bit mask (bit `i` ↔ `dx^{i+1}`).
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct IndexSet(pub u8);

impl IndexSet {
    pub const EMPTY: IndexSet = IndexSet(0);

    pub fn full(n: usize) -> IndexSet {
        IndexSet(((1u16 << n) - 1) as u8)
    }

    pub fn single(i: usize) -> IndexSet {
        IndexSet(1 << i)
    }

    /// Builds the set from zero-based indices, returning the permutation
    /// sign needed to sort them, or `None` on a repeated index.
    pub fn from_indices(idx: &[usize]) -> Option<(i64, IndexSet)> {
        let mut sign = 1i64;
        let mut mask = 0u8;
        for (p, &i) in idx.iter().enumerate() {
            if i >= MAX_DIM || mask & (1 << i) != 0 {
                return None;
            }
            mask |= 1 << i;
            // count earlier entries greater than i
            let inversions = idx[..p].iter().filter(|&&j| j > i).count();
            if inversions % 2 == 1 {
                sign = -sign;
            }
        }
        Some((sign, IndexSet(mask)))
    }

    pub fn degree(self) -> u32 {
        self.0.count_ones()
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn indices(self) -> impl Iterator<Item = usize> {
        (0..MAX_DIM).filter(move |&i| self.0 & (1 << i) != 0)
    }

    /// Sign and result of `dx^I ∧ dx^J`, or `None` if they share an index.
    pub fn wedge(self, other: IndexSet) -> Option<(i64, IndexSet)> {
        if self.0 & other.0 != 0 {
            return None;
        }
        let mut swaps = 0u32;
        for j in other.indices() {
            // entries of self greater than j must pass over dx^j
            swaps += (self.0 >> (j + 1)).count_ones();
        }
        let sign = if swaps % 2 == 0 { 1 } else { -1 };
        Some((sign, IndexSet(self.0 | other.0)))
    }

    /// `dx^k ∧ dx^I`.
    pub fn prepend(self, k: usize) -> Option<(i64, IndexSet)> {
        IndexSet::single(k).wedge(self)
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<usize> = self.indices().map(|i| i + 1).collect();
        write!(f, "{v:?}")
    }
}

/// Fourier mode `m ∈ Zⁿ` (unused trailing entries are zero).
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Mode(pub [i16; MAX_DIM]);

impl Mode {
    pub const ZERO: Mode = Mode([0; MAX_DIM]);

    pub fn from_slice(m: &[i64]) -> Result<Mode> {
        if m.len() > MAX_DIM {
            return Err(Error::Dimension(format!("mode of length {} exceeds {MAX_DIM}", m.len())));
        }
        let mut out = [0i16; MAX_DIM];
        for (o, &v) in out.iter_mut().zip(m) {
            *o = i16::try_from(v).map_err(|_| Error::InvalidInput(format!("mode entry {v} out of range")))?;
        }
        Ok(Mode(out))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0)
    }

    pub fn add(&self, o: &Mode) -> Mode {
        let mut out = [0i16; MAX_DIM];
        for i in 0..MAX_DIM {
            out[i] = self.0[i] + o.0[i];
        }
        Mode(out)
    }

    pub fn get(&self, i: usize) -> i64 {
        self.0[i] as i64
    }

    pub fn to_vec(&self, n: usize) -> Vec<i64> {
        self.0[..n].iter().map(|&v| v as i64).collect()
    }

    pub fn sup_norm(&self) -> i64 {
        self.0.iter().map(|&v| (v as i64).abs()).max().unwrap_or(0)
    }

    pub fn euclid_norm(&self) -> f64 {
        self.0.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>().sqrt()
    }
}

impl fmt::Debug for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let last = self.0.iter().rposition(|&v| v != 0).map_or(0, |p| p + 1).max(2);
        write!(f, "{:?}", &self.0[..last])
    }
}

/// Basis element of `Ω_T(X×T)`: `e^{2πi⟨m,x⟩} dx^I` (`dbl = false`) or
/// `ϑ_T ∧ e^{2πi⟨m,x⟩} dx^I` (`dbl = true`).
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mono {
    pub mode: Mode,
    pub idx: IndexSet,
    pub dbl: bool,
}

pub type Terms<S> = SmallVec<[(S, Mono); 8]>;

impl Mono {
    pub const UNIT: Mono = Mono { mode: Mode::ZERO, idx: IndexSet::EMPTY, dbl: false };

    pub fn prime(mode: Mode, idx: IndexSet) -> Mono {
        Mono { mode, idx, dbl: false }
    }

    pub fn dblprime(mode: Mode, idx: IndexSet) -> Mono {
        Mono { mode, idx, dbl: true }
    }

    /// Z-degree: `j` with `θ' ∈ Ωʲ`, `θ'' ∈ Ωʲ⁺¹`.
    pub fn degree(&self) -> i32 {
        self.idx.degree() as i32 - self.dbl as i32
    }

    /// Parity of the degree (`true` for odd).
    pub fn odd(&self) -> bool {
        self.degree().rem_euclid(2) == 1
    }

    pub fn is_unit(&self) -> bool {
        *self == Mono::UNIT
    }

    /// Graded product in `Ω_T(X×T)`.
    pub fn product(&self, o: &Mono) -> Option<(i64, Mono)> {
        if self.dbl && o.dbl {
            return None;
        }
        let (mut sign, idx) = self.idx.wedge(o.idx)?;
        if !self.dbl && o.dbl && self.idx.degree() % 2 == 1 {
            // ω ∧ ϑ = (-1)^{|ω|} ϑ ∧ ω
            sign = -sign;
        }
        Some((sign, Mono { mode: self.mode.add(&o.mode), idx, dbl: self.dbl || o.dbl }))
    }

    /// Exterior derivative on `X` of the `dx`-part (without the ϑ sign).
    fn d_terms<S: Coeff>(&self, n: usize, out: &mut Terms<S>, extra_sign: i64) {
        for k in 0..n {
            let mk = self.mode.get(k);
            if mk == 0 {
                continue;
            }
            if let Some((s, idx)) = self.idx.prepend(k) {
                let coeff = S::deriv_unit().scale_int(mk * s * extra_sign);
                out.push((coeff, Mono { mode: self.mode, idx, dbl: self.dbl }));
            }
        }
    }

    /// `(d + ι_{∂T})` applied to the monomial.
    pub fn dga<S: Coeff>(&self, n: usize) -> Terms<S> {
        let mut out = Terms::new();
        if self.dbl {
            // d(ϑ∧ω) = -ϑ∧dω, ι(ϑ∧ω) = ω
            self.d_terms(n, &mut out, -1);
            out.push((S::one(), Mono { dbl: false, ..*self }));
        } else {
            self.d_terms(n, &mut out, 1);
        }
        out
    }

    /// Seminorm weight `(1 + |m|)^k`.
    pub fn weight(&self, k: f64) -> f64 {
        (1.0 + self.mode.euclid_norm()).powf(k)
    }
}

impl fmt::Debug for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}e{:?}dx{:?}", if self.dbl { "ϑ∧" } else { "" }, self.mode, self.idx)
    }
}

/// Differential form on `Tⁿ` with finitely many Fourier modes.
#[derive(Clone, PartialEq)]
pub struct TrigPolyForm<S> {
    n: usize,
    terms: BTreeMap<(Mode, IndexSet), S>,
}

impl<S: Coeff> TrigPolyForm<S> {
    pub fn zero(n: usize) -> Self {
        TrigPolyForm { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: S) -> Self {
        let mut f = Self::zero(n);
        f.add_basis(Mode::ZERO, IndexSet::EMPTY, c);
        f
    }

    /// Coordinate volume form `dx¹∧…∧dxⁿ`.
    pub fn volume(n: usize) -> Self {
        let mut f = Self::zero(n);
        f.add_basis(Mode::ZERO, IndexSet::full(n), S::one());
        f
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Adds `c · e^{2πi⟨m,x⟩} dx^{i₁}∧…` with zero-based, possibly unsorted
    /// indices. Repeated indices give zero.
    pub fn add_term(&mut self, mode: &[i64], indices: &[usize], c: S) -> Result<()> {
        if mode.len() != self.n {
            return Err(Error::Dimension(format!("mode length {} for n = {}", mode.len(), self.n)));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.n) {
            return Err(Error::Dimension(format!("index {} out of range for n = {}", bad + 1, self.n)));
        }
        let m = Mode::from_slice(mode)?;
        if let Some((sign, idx)) = IndexSet::from_indices(indices) {
            self.add_basis(m, idx, c.scale_int(sign));
        }
        Ok(())
    }

    pub fn add_basis(&mut self, mode: Mode, idx: IndexSet, c: S) {
        if c.is_zero() {
            return;
        }
        let key = (mode, idx);
        let remove = match self.terms.get_mut(&key) {
            Some(v) => {
                *v += c;
                v.is_zero()
            }
            None => {
                self.terms.insert(key, c);
                false
            }
        };
        if remove {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mode, &IndexSet, &S)> {
        self.terms.iter().map(|((m, i), c)| (m, i, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, mode: Mode, idx: IndexSet) -> S {
        self.terms.get(&(mode, idx)).cloned().unwrap_or_else(S::zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for ((m, i), c) in &o.terms {
            out.add_basis(*m, *i, c.clone());
        }
        out
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut out = Self::zero(self.n);
        for ((m, i), c) in &self.terms {
            out.add_basis(*m, *i, c.clone() * s.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&(-S::one()))
    }

    fn check_dim(&self, o: &Self) -> Result<()> {
        if self.n != o.n {
            return Err(Error::Dimension(format!("forms on T^{} and T^{}", self.n, o.n)));
        }
        Ok(())
    }

    pub fn wedge(&self, o: &Self) -> Result<Self> {
        self.check_dim(o)?;
        let mut out = Self::zero(self.n);
        for ((ma, ia), ca) in &self.terms {
            for ((mb, ib), cb) in &o.terms {
                if let Some((s, idx)) = ia.wedge(*ib) {
                    out.add_basis(ma.add(mb), idx, (ca.clone() * cb.clone()).scale_int(s));
                }
            }
        }
        Ok(out)
    }

    pub fn exterior_d(&self) -> Self {
        let mut out = Self::zero(self.n);
        for ((m, i), c) in &self.terms {
            let mut buf: Terms<S> = Terms::new();
            Mono::prime(*m, *i).d_terms(self.n, &mut buf, 1);
            for (k, mono) in buf {
                out.add_basis(mono.mode, mono.idx, c.clone() * k);
            }
        }
        out
    }

    /// Homogeneous component of form degree `k`.
    pub fn component(&self, k: u32) -> Self {
        TrigPolyForm {
            n: self.n,
            terms: self.terms.iter().filter(|((_, i), _)| i.degree() == k).map(|(a, b)| (*a, b.clone())).collect(),
        }
    }

    /// Single form degree if homogeneous (zero counts as degree 0).
    pub fn degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(|(_, i)| i.degree());
        let first = it.next().unwrap_or(0);
        it.all(|d| d == first).then_some(first)
    }

    /// `∫_{Tⁿ}` in coordinate orientation over the unit cell: the mode-zero
    /// coefficient of `dx¹∧…∧dxⁿ`.
    pub fn integrate_top(&self) -> S {
        self.coefficient(Mode::ZERO, IndexSet::full(self.n))
    }

    /// Pullback along the linear torus map `x ↦ O x` (integer `O`).
    pub fn pullback(&self, o: &[Vec<i64>]) -> Result<Self> {
        let n = self.n;
        if o.len() != n || o.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("pullback matrix shape".into()));
        }
        let mut out = Self::zero(n);
        for ((m, idx), c) in &self.terms {
            // new mode Oᵀ m
            let mut nm = vec![0i64; n];
            for (j, v) in nm.iter_mut().enumerate() {
                *v = (0..n).map(|i| o[i][j] * m.get(i)).sum();
            }
            let nm = Mode::from_slice(&nm)?;
            let rows: Vec<usize> = idx.indices().collect();
            for jmask in 0..(1u16 << n) {
                let jset = IndexSet(jmask as u8);
                if jset.degree() as usize != rows.len() {
                    continue;
                }
                let cols: Vec<usize> = jset.indices().collect();
                let det = integer_minor(o, &rows, &cols);
                if det != 0 {
                    out.add_basis(nm, jset, c.scale_int(det));
                }
            }
        }
        Ok(out)
    }

    pub fn map_coeffs<T: Coeff>(&self, f: impl Fn(&Mode, &IndexSet, &S) -> T) -> TrigPolyForm<T> {
        let mut out = TrigPolyForm::zero(self.n);
        for ((m, i), c) in &self.terms {
            out.add_basis(*m, *i, f(m, i, c));
        }
        out
    }
}

impl<S: Coeff> fmt::Debug for TrigPolyForm<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> =
            self.terms.iter().map(|((m, i), c)| format!("({c:?})e{m:?}dx{i:?}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

fn integer_minor(o: &[Vec<i64>], rows: &[usize], cols: &[usize]) -> i64 {
    let k = rows.len();
    if k == 0 {
        return 1;
    }
    // Laplace expansion along the first row; k ≤ 8.
    let mut total = 0i64;
    for (p, &cj) in cols.iter().enumerate() {
        let a = o[rows[0]][cj];
        if a == 0 {
            continue;
        }
        let sub_cols: Vec<usize> = cols.iter().enumerate().filter(|&(q, _)| q != p).map(|(_, &c)| c).collect();
        let m = integer_minor(o, &rows[1..], &sub_cols);
        total += if p % 2 == 0 { a * m } else { -a * m };
    }
    total
}

/// `θ = θ' + ϑ_T ∧ θ''`.
#[derive(Clone, PartialEq)]
pub struct EquivariantForm<S> {
    pub prime: TrigPolyForm<S>,
    pub dblprime: TrigPolyForm<S>,
}

impl<S: Coeff> EquivariantForm<S> {
    pub fn new(prime: TrigPolyForm<S>, dblprime: TrigPolyForm<S>) -> Result<Self> {
        if prime.dim() != dblprime.dim() {
            return Err(Error::Dimension("θ' and θ'' live on different tori".into()));
        }
        Ok(EquivariantForm { prime, dblprime })
    }

    pub fn zero(n: usize) -> Self {
        EquivariantForm { prime: TrigPolyForm::zero(n), dblprime: TrigPolyForm::zero(n) }
    }

    pub fn from_prime(prime: TrigPolyForm<S>) -> Self {
        let n = prime.dim();
        EquivariantForm { prime, dblprime: TrigPolyForm::zero(n) }
    }

    pub fn from_dblprime(dblprime: TrigPolyForm<S>) -> Self {
        let n = dblprime.dim();
        EquivariantForm { prime: TrigPolyForm::zero(n), dblprime }
    }

    pub fn unit(n: usize) -> Self {
        Self::from_prime(TrigPolyForm::constant(n, S::one()))
    }

    pub fn dim(&self) -> usize {
        self.prime.dim()
    }

    pub fn is_zero(&self) -> bool {
        self.prime.is_zero() && self.dblprime.is_zero()
    }

    /// Z-degree if homogeneous.
    pub fn degree(&self) -> Option<i32> {
        let mut degs = self.monomials().into_iter().map(|(_, m)| m.degree());
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    /// `(d + ι_{∂T})θ = (dθ' + θ'', -dθ'')`.
    pub fn dga_differential(&self) -> Self {
        EquivariantForm {
            prime: self.prime.exterior_d().add(&self.dblprime),
            dblprime: self.dblprime.exterior_d().neg(),
        }
    }

    pub fn product(&self, o: &Self) -> Result<Self> {
        let mut out = Self::zero(self.dim());
        for (ca, ma) in self.monomials() {
            for (cb, mb) in o.monomials() {
                if let Some((s, m)) = ma.product(&mb) {
                    out.add_mono(m, (ca.clone() * cb.clone()).scale_int(s));
                }
            }
        }
        if self.dim() != o.dim() {
            return Err(Error::Dimension("product of forms on different tori".into()));
        }
        Ok(out)
    }

    pub fn add_mono(&mut self, m: Mono, c: S) {
        if m.dbl {
            self.dblprime.add_basis(m.mode, m.idx, c);
        } else {
            self.prime.add_basis(m.mode, m.idx, c);
        }
    }

    pub fn monomials(&self) -> Vec<(S, Mono)> {
        let mut out = Vec::with_capacity(self.prime.num_terms() + self.dblprime.num_terms());
        for (m, i, c) in self.prime.terms() {
            out.push((c.clone(), Mono::prime(*m, *i)));
        }
        for (m, i, c) in self.dblprime.terms() {
            out.push((c.clone(), Mono::dblprime(*m, *i)));
        }
        out
    }

    pub fn from_monomials(n: usize, terms: impl IntoIterator<Item = (S, Mono)>) -> Self {
        let mut out = Self::zero(n);
        for (c, m) in terms {
            out.add_mono(m, c);
        }
        out
    }

    pub fn pullback(&self, o: &[Vec<i64>]) -> Result<Self> {
        Ok(EquivariantForm { prime: self.prime.pullback(o)?, dblprime: self.dblprime.pullback(o)? })
    }
}

impl<S: Coeff> fmt::Debug for EquivariantForm<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨{:?} | {:?}⟩", self.prime, self.dblprime)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::GaussRational;
    use num_complex::Complex64;

    type Q = GaussRational;

    fn dx(n: usize, i: usize) -> TrigPolyForm<Q> {
        let mut f = TrigPolyForm::zero(n);
        f.add_term(&vec![0; n], &[i], Q::one()).unwrap();
        f
    }

    #[test]
    fn wedge_basics() {
        let a = dx(2, 0);
        assert!(a.wedge(&a).unwrap().is_zero());
        let b = dx(2, 1);
        let ba = b.wedge(&a).unwrap();
        assert_eq!(ba.coefficient(Mode::ZERO, IndexSet(0b11)), -Q::one());
    }

    #[test]
    fn wedge_adds_modes() {
        let mut a = TrigPolyForm::<Complex64>::zero(2);
        a.add_term(&[1, 0], &[0], Complex64::new(1.0, 0.0)).unwrap();
        let mut b = TrigPolyForm::<Complex64>::zero(2);
        b.add_term(&[-1, 0], &[1], Complex64::new(1.0, 0.0)).unwrap();
        let w = a.wedge(&b).unwrap();
        assert_eq!(w.num_terms(), 1);
        assert_eq!(w.integrate_top(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn exterior_derivative_of_plane_wave() {
        let mut f = TrigPolyForm::<Complex64>::zero(2);
        f.add_term(&[1, 0], &[], Complex64::new(1.0, 0.0)).unwrap();
        let df = f.exterior_d();
        let c = df.coefficient(Mode::from_slice(&[1, 0]).unwrap(), IndexSet::single(0));
        assert!((c - Complex64::new(0.0, std::f64::consts::TAU)).norm() < 1e-15);
        assert!(TrigPolyForm::<Complex64>::constant(2, Complex64::new(3.0, 0.0)).exterior_d().is_zero());
    }

    #[test]
    fn d_squared_vanishes_exactly() {
        let mut f = TrigPolyForm::<Q>::zero(3);
        f.add_term(&[1, -1, 2], &[], Q::one()).unwrap();
        f.add_term(&[0, 1, 1], &[2], Q::from_int(3)).unwrap();
        f.add_term(&[1, 1, 0], &[0, 2], Q::imag_unit()).unwrap();
        assert!(f.exterior_d().exterior_d().is_zero());
    }

    #[test]
    fn dga_differential_examples() {
        let n = 2;
        let mut h = TrigPolyForm::<Q>::zero(n);
        h.add_term(&[1, 0], &[1], Q::one()).unwrap();
        let theta = EquivariantForm::from_dblprime(h.clone());
        let d = theta.dga_differential();
        assert_eq!(d.prime, h);
        assert_eq!(d.dblprime, h.exterior_d().neg());
        assert!(d.dga_differential().is_zero());
        assert!(EquivariantForm::<Q>::unit(n).dga_differential().is_zero());
    }

    #[test]
    fn mono_product_matches_form_product() {
        let n = 2;
        let a = EquivariantForm::<Q>::new(dx(n, 0), dx(n, 1)).unwrap();
        let b = EquivariantForm::<Q>::new(dx(n, 1), TrigPolyForm::constant(n, Q::one())).unwrap();
        let p = a.product(&b).unwrap();
        // θ'₁θ'₂ = dx¹dx², θ''-part: (-1)^{1} dx¹∧1 + dx²∧dx² = -dx¹
        assert_eq!(p.prime.coefficient(Mode::ZERO, IndexSet(0b11)), Q::one());
        assert_eq!(p.dblprime.coefficient(Mode::ZERO, IndexSet(0b01)), -Q::one());
    }

    #[test]
    fn dga_is_a_derivation() {
        let n = 2;
        let mut f = TrigPolyForm::<Q>::zero(n);
        f.add_term(&[1, 1], &[0], Q::one()).unwrap();
        let mut g = TrigPolyForm::<Q>::zero(n);
        g.add_term(&[0, -1], &[], Q::from_int(2)).unwrap();
        let a = EquivariantForm::new(f.clone(), g.clone()).unwrap(); // mixed, use homogeneous parts
        let a = EquivariantForm::from_monomials(
            n,
            a.monomials().into_iter().filter(|(_, m)| m.degree() == 1),
        );
        let b = EquivariantForm::new(g, f.wedge(&dx(n, 1)).unwrap()).unwrap();
        let b = EquivariantForm::from_monomials(n, b.monomials().into_iter().filter(|(_, m)| m.degree() == 0));
        let lhs = a.product(&b).unwrap().dga_differential();
        let rhs1 = a.dga_differential().product(&b).unwrap();
        let rhs2 = a.product(&b.dga_differential()).unwrap();
        // |a| = 1 odd
        let mut rhs = rhs1;
        for (c, m) in rhs2.monomials() {
            rhs.add_mono(m, -c);
        }
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn pullback_of_volume_is_det() {
        let v = TrigPolyForm::<Q>::volume(2);
        let o = vec![vec![1, 1], vec![0, 1]];
        assert_eq!(v.pullback(&o).unwrap(), v);
        let mut f = TrigPolyForm::<Q>::zero(2);
        f.add_term(&[1, 0], &[], Q::one()).unwrap();
        let p = f.pullback(&o).unwrap();
        // e^{2πi x¹} ∘ (x ↦ Ox) = e^{2πi (x¹ + x²)}
        assert_eq!(p.coefficient(Mode::from_slice(&[1, 1]).unwrap(), IndexSet::EMPTY), Q::one());
    }

    #[test]
    fn integrate_top_picks_mode_zero() {
        let mut f = TrigPolyForm::<Q>::zero(2);
        f.add_term(&[1, 0], &[0, 1], Q::one()).unwrap();
        assert!(f.integrate_top().is_zero());
        assert!(TrigPolyForm::<Q>::constant(2, Q::one()).integrate_top().is_zero());
        assert_eq!(TrigPolyForm::<Q>::volume(2).integrate_top(), Q::one());
    }
}
