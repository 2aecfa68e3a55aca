//! Exact verification of the chain-complex identities on a finite basis of
//! words: `D⊗² = b² = B² = 0` and the three anticommutators, which together
//! give `δ² = 0` for any choice of overall signs.
//!
//! The identities are checked word by word with Gaussian-integer
//! coefficients, so every basis element is tested exactly.  On `T²` the
//! letters are packed into `u16` codes whose product and differential tables
//! are filled from [`Mono`], which keeps the full `N ≤ 3` enumeration cheap.

use std::cmp::Ordering;
use std::sync::OnceLock;

use serde::Serialize;
use smallvec::SmallVec;

use crate::chains::{connes_word, dga_word, hochschild_word, Letter};
use crate::error::{Error, Result};
use crate::forms::{IndexSet, Mode, Mono};
use crate::scalar::{Coeff, GaussInt};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Identity {
    DSquared,
    BSquaredHochschild,
    BSquaredConnes,
    BAnticommute,
    DbAnticommute,
    DBAnticommute,
}

impl Identity {
    pub const ALL: [Identity; 6] = [
        Identity::DSquared,
        Identity::BSquaredHochschild,
        Identity::BSquaredConnes,
        Identity::BAnticommute,
        Identity::DbAnticommute,
        Identity::DBAnticommute,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Identity::DSquared => "D^2 = 0",
            Identity::BSquaredHochschild => "b^2 = 0",
            Identity::BSquaredConnes => "B^2 = 0",
            Identity::BAnticommute => "bB + Bb = 0",
            Identity::DbAnticommute => "Db + bD = 0",
            Identity::DBAnticommute => "DB + BD = 0",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityRecord {
    pub identity: &'static str,
    pub violations: u64,
    /// First violating basis word in enumeration order, with one nonzero
    /// output term.
    pub first_violation: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AlgebraReport {
    pub n: usize,
    pub max_length: usize,
    pub mode_box: i64,
    pub words_checked: u64,
    pub packed: bool,
    pub identities: Vec<IdentityRecord>,
}

impl AlgebraReport {
    pub fn passed(&self) -> bool {
        self.identities.iter().all(|r| r.violations == 0)
    }
}

/// Monomial on `T²` packed as `((m₁+R)(2R+1) + (m₂+R))·8 + 2·idx + dbl`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PackedMono(u16);

const PACK_RANGE: i64 = 4;
const PACK_SIDE: i64 = 2 * PACK_RANGE + 1;
const PACK_CODES: usize = (PACK_SIDE * PACK_SIDE * 8) as usize;
const NO_PRODUCT: u32 = u32::MAX;

struct PackTables {
    monos: Vec<Mono>,
    degree: Vec<i32>,
    /// `sign·(code+1)` packed as `i32`, or [`NO_PRODUCT`] for zero.
    product: Vec<u32>,
    /// `(derivative multiple or ±1, is_derivative, code)`.
    dga: Vec<SmallVec<[(i64, bool, u16); 3]>>,
    unit: u16,
}

fn pack(m: &Mono) -> Option<u16> {
    let (a, b) = (m.mode.get(0), m.mode.get(1));
    if a.abs() > PACK_RANGE || b.abs() > PACK_RANGE || m.mode.0[2..].iter().any(|&x| x != 0) || m.idx.0 >= 4 {
        return None;
    }
    Some((((a + PACK_RANGE) * PACK_SIDE + (b + PACK_RANGE)) * 8 + 2 * m.idx.0 as i64 + m.dbl as i64) as u16)
}

fn tables() -> &'static PackTables {
    static TABLES: OnceLock<PackTables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut monos = Vec::with_capacity(PACK_CODES);
        for code in 0..PACK_CODES as i64 {
            let dbl = code % 2 == 1;
            let idx = ((code / 2) % 4) as u8;
            let mm = code / 8;
            let mode = Mode::from_slice(&[mm / PACK_SIDE - PACK_RANGE, mm % PACK_SIDE - PACK_RANGE]).expect("mode in range");
            monos.push(Mono { mode, idx: IndexSet(idx), dbl });
        }
        let degree = monos.iter().map(|m| m.degree()).collect();
        let mut product = vec![NO_PRODUCT; PACK_CODES * PACK_CODES];
        for (i, a) in monos.iter().enumerate() {
            for (j, b) in monos.iter().enumerate() {
                if let Some((s, m)) = a.product(b) {
                    if let Some(c) = pack(&m) {
                        product[i * PACK_CODES + j] = ((s as i32) * (c as i32 + 1)) as u32;
                    }
                }
            }
        }
        let dga = monos
            .iter()
            .map(|m| {
                m.dga::<GaussInt>(2)
                    .into_iter()
                    .map(|(k, dm)| {
                        let code = pack(&dm).expect("differential keeps the mode");
                        if k.im != 0 {
                            (k.im, true, code)
                        } else {
                            (k.re, false, code)
                        }
                    })
                    .collect()
            })
            .collect();
        let unit = pack(&Mono::UNIT).expect("unit packs");
        PackTables { monos, degree, product, dga, unit }
    })
}

impl PackedMono {
    pub fn new(m: &Mono) -> Option<PackedMono> {
        tables();
        pack(m).map(PackedMono)
    }

    pub fn mono(self) -> Mono {
        tables().monos[self.0 as usize]
    }
}

impl std::fmt::Debug for PackedMono {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}", self.mono())
    }
}

impl Letter for PackedMono {
    fn degree(&self) -> i32 {
        tables().degree[self.0 as usize]
    }

    fn is_unit(&self) -> bool {
        self.0 == tables().unit
    }

    fn unit() -> Self {
        PackedMono(tables().unit)
    }

    fn product(&self, o: &Self) -> Option<(i64, Self)> {
        let t = tables();
        let raw = t.product[self.0 as usize * PACK_CODES + o.0 as usize];
        if raw == NO_PRODUCT {
            // Either a genuine zero or a mode outside the packed range.
            let (a, b) = (t.monos[self.0 as usize], t.monos[o.0 as usize]);
            assert!(a.product(&b).is_none(), "packed product left the mode range");
            return None;
        }
        let v = raw as i32;
        Some((v.signum() as i64, PackedMono((v.abs() - 1) as u16)))
    }

    fn dga_into<S: Coeff>(&self, _n: usize, out: &mut impl FnMut(S, Self)) {
        for &(k, deriv, code) in &tables().dga[self.0 as usize] {
            let c = if deriv { S::deriv_unit().scale_int(k) } else { S::from_int(k) };
            out(c, PackedMono(code));
        }
    }
}

type PWord<L> = SmallVec<[L; 8]>;

/// Sort key of a word for merging equal terms.
pub trait Keyed: Letter + Ord + std::fmt::Debug {
    type Key: Ord + Clone;
    fn key(w: &[Self]) -> Self::Key;
}

impl Keyed for Mono {
    type Key = PWord<Mono>;
    fn key(w: &[Self]) -> Self::Key {
        SmallVec::from_slice(w)
    }
}

impl Keyed for PackedMono {
    type Key = u64;
    fn key(w: &[Self]) -> u64 {
        // 10 bits per letter, length in the top bits; at most 6 letters
        debug_assert!(w.len() <= 6);
        w.iter().fold(w.len() as u64, |acc, l| (acc << 10) | l.0 as u64)
    }
}

/// Sorted-merge accumulator for the images of one basis word.
struct Acc<L: Keyed> {
    terms: Vec<(L::Key, GaussInt)>,
}

impl<L: Keyed> Acc<L> {
    fn new() -> Self {
        Acc { terms: Vec::with_capacity(512) }
    }

    fn clear(&mut self) {
        self.terms.clear();
    }

    fn push(&mut self, w: &[L], c: GaussInt) {
        self.terms.push((L::key(w), c));
    }

    /// First surviving term after merging equal words, as a key.
    fn nonzero(&mut self) -> Option<(L::Key, GaussInt)> {
        self.terms.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let mut i = 0;
        while i < self.terms.len() {
            let mut j = i;
            let mut s = GaussInt::zero();
            while j < self.terms.len() && self.terms[j].0.cmp(&self.terms[i].0) == Ordering::Equal {
                s += self.terms[j].1;
                j += 1;
            }
            if !s.is_zero() {
                return Some((self.terms[i].0.clone(), s));
            }
            i = j;
        }
        None
    }
}

#[derive(Clone, Copy)]
enum Op {
    D,
    B,
    Bc,
}

fn apply<L: Letter>(op: Op, n: usize, broken: bool, w: &[L], c: &GaussInt, sink: &mut impl FnMut(&[L], GaussInt)) {
    match op {
        Op::D => dga_word(w, n, c, sink),
        Op::B => hochschild_word(w, c, sink),
        Op::Bc => connes_word(w, broken, c, sink),
    }
}

struct Checker<L: Keyed> {
    n: usize,
    broken: bool,
    images: [Vec<(PWord<L>, GaussInt)>; 3],
    acc: Acc<L>,
}

impl<L: Keyed> Checker<L> {
    fn new(n: usize, broken: bool) -> Self {
        Checker { n, broken, images: [Vec::new(), Vec::new(), Vec::new()], acc: Acc::new() }
    }

    fn check(&mut self, w: &[L], mut on_fail: impl FnMut(Identity, String)) {
        let one = GaussInt::one();
        let ops = [Op::D, Op::B, Op::Bc];
        for (k, op) in ops.iter().enumerate() {
            let img = &mut self.images[k];
            img.clear();
            apply(*op, self.n, self.broken, w, &one, &mut |u, c| img.push((SmallVec::from_slice(u), c)));
        }
        let pairs: [(Identity, usize, usize); 6] = [
            (Identity::DSquared, 0, 0),
            (Identity::BSquaredHochschild, 1, 1),
            (Identity::BSquaredConnes, 2, 2),
            (Identity::BAnticommute, 1, 2),
            (Identity::DbAnticommute, 0, 1),
            (Identity::DBAnticommute, 0, 2),
        ];
        for (id, a, b) in pairs {
            self.acc.clear();
            let acc = &mut self.acc;
            // a∘b + b∘a, or a∘a once when a = b
            let mut run = |outer: usize, inner: usize| {
                for (u, c) in &self.images[inner] {
                    apply(ops[outer], self.n, self.broken, u, c, &mut |v, k| acc.push(v, k));
                }
            };
            run(a, b);
            if a != b {
                run(b, a);
            }
            if let Some((key, k)) = self.acc.nonzero() {
                // recover a readable witness word for the report
                let mut witness = None;
                let mut find = |outer: usize, inner: usize| {
                    for (u, c) in &self.images[inner] {
                        apply(ops[outer], self.n, self.broken, u, c, &mut |v, _| {
                            if witness.is_none() && L::key(v) == key {
                                witness = Some(format!("{v:?}"));
                            }
                        });
                    }
                };
                find(a, b);
                find(b, a);
                on_fail(id, format!("{w:?} -> {k:?}·{}", witness.unwrap_or_default()));
            }
        }
    }
}

/// All letters with modes in `[−mode_box, mode_box]ⁿ`.
pub fn letters(n: usize, mode_box: i64) -> Result<Vec<Mono>> {
    if n == 0 || n > crate::forms::MAX_DIM {
        return Err(Error::Dimension(format!("torus dimension {n} unsupported")));
    }
    if mode_box < 0 {
        return Err(Error::InvalidInput("mode box must be nonnegative".into()));
    }
    let side = (2 * mode_box + 1) as usize;
    let mut out = Vec::new();
    let mut k = vec![0usize; n];
    loop {
        let m: Vec<i64> = k.iter().map(|&x| x as i64 - mode_box).collect();
        let mode = Mode::from_slice(&m)?;
        for idx in 0..(1u16 << n) {
            for dbl in [false, true] {
                out.push(Mono { mode, idx: IndexSet(idx as u8), dbl });
            }
        }
        let mut j = 0;
        while j < n {
            k[j] += 1;
            if k[j] < side {
                break;
            }
            k[j] = 0;
            j += 1;
        }
        if j == n {
            break;
        }
    }
    Ok(out)
}

/// Number of normalized words with up to `max_length + 1` slots.
pub fn basis_size(num_letters: u64, max_length: usize) -> u64 {
    let mut total = 0u64;
    let mut layer = num_letters;
    for _ in 0..=max_length {
        total = total.saturating_add(layer);
        layer = layer.saturating_mul(num_letters.saturating_sub(1));
    }
    total
}

/// Checks the six identities on every normalized word with `N ≤ max_length`
/// and slot modes in the box. `broken_connes` flips one term of `B`
/// (negative control).
pub fn verify_exhaustive(n: usize, max_length: usize, mode_box: i64, broken_connes: bool, budget: u64) -> Result<AlgebraReport> {
    let monos = letters(n, mode_box)?;
    let size = basis_size(monos.len() as u64, max_length);
    if size > budget {
        return Err(Error::Resource { what: "basis words".into(), needed: size, budget });
    }
    // Three merges at most inside one identity.
    let packed = n == 2 && mode_box * 3 <= PACK_RANGE;
    if packed {
        let letters: Vec<PackedMono> = monos.iter().map(|m| PackedMono::new(m).expect("in range")).collect();
        Ok(run_exhaustive(n, max_length, mode_box, broken_connes, &letters, true))
    } else {
        Ok(run_exhaustive(n, max_length, mode_box, broken_connes, &monos, false))
    }
}

fn empty_records() -> Vec<IdentityRecord> {
    Identity::ALL.iter().map(|id| IdentityRecord { identity: id.name(), violations: 0, first_violation: None }).collect()
}

fn record(records: &mut [IdentityRecord], id: Identity, msg: String) {
    let r = &mut records[Identity::ALL.iter().position(|x| *x == id).expect("known identity")];
    r.violations += 1;
    if r.first_violation.is_none() {
        r.first_violation = Some(msg);
    }
}

/// All words with the given first letter, lengths `1..=max_length+1`.
fn run_first_letter<L: Keyed>(n: usize, max_length: usize, broken: bool, first: L, non_unit: &[L]) -> (u64, Vec<IdentityRecord>) {
    let mut records = empty_records();
    let mut checker = Checker::new(n, broken);
    let mut words = 0u64;
    let mut w: PWord<L> = SmallVec::new();
    for len in 1..=max_length + 1 {
        let mut idx = vec![0usize; len - 1];
        loop {
            w.clear();
            w.push(first);
            w.extend(idx.iter().map(|&j| non_unit[j]));
            words += 1;
            checker.check(&w, |id, msg| record(&mut records, id, msg));
            // odometer, last slot fastest
            let mut pos = idx.len();
            let done = loop {
                if pos == 0 {
                    break true;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < non_unit.len() {
                    break false;
                }
                idx[pos] = 0;
            };
            if done {
                break;
            }
        }
    }
    (words, records)
}

fn run_exhaustive<L: Keyed + Send + Sync>(n: usize, max_length: usize, mode_box: i64, broken: bool, letters: &[L], packed: bool) -> AlgebraReport {
    use rayon::prelude::*;
    let non_unit: Vec<L> = letters.iter().copied().filter(|l| !l.is_unit()).collect();
    let parts: Vec<(u64, Vec<IdentityRecord>)> =
        letters.par_iter().map(|&first| run_first_letter(n, max_length, broken, first, &non_unit)).collect();
    let mut records = empty_records();
    let mut words = 0u64;
    // merge in enumeration order so the first violation is deterministic
    for (cnt, recs) in parts {
        words += cnt;
        for (acc, r) in records.iter_mut().zip(recs) {
            acc.violations += r.violations;
            if acc.first_violation.is_none() {
                acc.first_violation = r.first_violation;
            }
        }
    }
    AlgebraReport { n, max_length, mode_box, words_checked: words, packed, identities: records }
}

/// The same six identities on explicit words (generic letters), e.g. for
/// random chains outside the exhaustive truncation.
pub fn verify_words(n: usize, words: &[Vec<Mono>], broken_connes: bool) -> AlgebraReport {
    let mut records = empty_records();
    let mut checker = Checker::<Mono>::new(n, broken_connes);
    for w in words {
        checker.check(w, |id, msg| record(&mut records, id, msg));
    }
    let max_length = words.iter().map(|w| w.len().saturating_sub(1)).max().unwrap_or(0);
    let mode_box = words.iter().flatten().map(|m| m.mode.sup_norm()).max().unwrap_or(0);
    AlgebraReport { n, max_length, mode_box, words_checked: words.len() as u64, packed: false, identities: records }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_tables_agree_with_monomials() {
        let ls = letters(2, 2).unwrap();
        for a in &ls {
            let pa = PackedMono::new(a).unwrap();
            assert_eq!(pa.mono(), *a);
            assert_eq!(Letter::degree(&pa), a.degree());
            for b in &ls {
                let pb = PackedMono::new(b).unwrap();
                let lhs = Letter::product(&pa, &pb).map(|(s, m)| (s, m.mono()));
                assert_eq!(lhs, a.product(b));
            }
            let mut got = Vec::new();
            pa.dga_into::<GaussInt>(2, &mut |k, m| got.push((k, m.mono())));
            assert_eq!(got, a.dga::<GaussInt>(2).into_iter().collect::<Vec<_>>());
        }
    }

    #[test]
    fn letter_and_basis_counts() {
        assert_eq!(letters(2, 1).unwrap().len(), 72);
        assert_eq!(letters(3, 0).unwrap().len(), 16);
        assert_eq!(basis_size(72, 1), 72 + 72 * 71);
    }

    #[test]
    fn small_truncation_passes_and_control_fails() {
        let ok = verify_exhaustive(2, 2, 0, false, 1 << 30).unwrap();
        assert!(ok.passed(), "{ok:?}");
        assert_eq!(ok.words_checked, basis_size(8, 2));
        let bad = verify_exhaustive(2, 2, 0, true, 1 << 30).unwrap();
        assert!(!bad.passed());
        let rec = bad.identities.iter().find(|r| r.violations > 0).unwrap();
        assert!(rec.first_violation.is_some());
    }

    #[test]
    fn generic_path_matches_packed() {
        let a = verify_exhaustive(3, 1, 0, false, 1 << 30).unwrap();
        assert!(!a.packed && a.passed());
        let words: Vec<Vec<Mono>> = letters(2, 1).unwrap().into_iter().map(|m| vec![m]).collect();
        assert!(verify_words(2, &words, false).passed());
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(verify_exhaustive(2, 3, 1, false, 1000), Err(Error::Resource { .. })));
    }
}
