//! Exact kernel of the total differential on a truncated space of words.
//!
//! After rescaling each word by `i^{Σ|I|}` the differential has integer
//! entries (the only non-real coefficients come from `d`, which raises
//! `Σ|I|` by one), so the kernel is computed over big rationals.  The image
//! of every basis word is computed in full, wherever it lands, so the
//! returned chains are genuine cocycles and not truncation artifacts.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::algebra::letters;
use crate::chains::{is_normalized, word_degree, Chain, ChainSigns, Word};
use crate::error::{Error, Result};
use crate::forms::Mode;
use crate::scalar::{Coeff, GaussInt, GaussRational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Clone, Debug)]
pub struct CocycleOptions {
    pub n: usize,
    /// Largest `N` (words have `N + 1` slots).
    pub max_length: usize,
    pub mode_box: i64,
    pub parity: Parity,
    /// Restrict to words whose slot modes sum to zero; the current vanishes
    /// on the other sectors and `δ` preserves the total mode.
    pub total_mode_zero: bool,
    /// Cap on the number of basis words.
    pub budget: u64,
    pub signs: ChainSigns,
}

impl Default for CocycleOptions {
    fn default() -> Self {
        CocycleOptions {
            n: 2,
            max_length: 1,
            mode_box: 1,
            parity: Parity::Even,
            total_mode_zero: true,
            budget: 20_000,
            signs: ChainSigns::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CocycleBasis {
    pub chains: Vec<Chain<GaussRational>>,
    pub basis_words: usize,
    pub image_words: usize,
    pub rank: usize,
}

/// Words of the truncation, in `Word` order.
pub fn truncated_words(opts: &CocycleOptions) -> Result<Vec<Word>> {
    if opts.max_length > 4 || opts.mode_box > 1 {
        return Err(Error::InvalidInput(format!(
            "cocycle truncation N ≤ {}, box {} exceeds N ≤ 4, box ≤ 1",
            opts.max_length, opts.mode_box
        )));
    }
    let ls = letters(opts.n, opts.mode_box)?;
    let non_unit: Vec<_> = ls.iter().copied().filter(|m| !m.is_unit()).collect();
    let mut count = ls.len() as u64;
    let mut layer = ls.len() as u64;
    for _ in 0..opts.max_length {
        layer = layer.saturating_mul(non_unit.len() as u64);
        count = count.saturating_add(layer);
    }
    // sector filters cut the raw count by a bounded factor; refuse early when
    // even the filtered space is hopeless
    let filter_gain = if opts.total_mode_zero { (2 * opts.mode_box as u64 + 1).pow(opts.n as u32) } else { 1 } * 2;
    if count / filter_gain > opts.budget {
        return Err(Error::Resource { what: "truncated chain words".into(), needed: count / filter_gain, budget: opts.budget });
    }
    let want_odd = opts.parity == Parity::Odd;
    let mut out = Vec::new();
    let mut partial: Vec<Word> = ls.iter().map(|m| Word::from_slice(&[*m])).collect();
    for len in 0..=opts.max_length {
        for w in &partial {
            let total = w.iter().fold(Mode::ZERO, |a, m| a.add(&m.mode));
            if (opts.total_mode_zero && !total.is_zero()) || (word_degree(w).rem_euclid(2) == 1) != want_odd {
                continue;
            }
            debug_assert!(is_normalized(w));
            out.push(w.clone());
            if out.len() as u64 > opts.budget {
                return Err(Error::Resource { what: "truncated chain words".into(), needed: out.len() as u64, budget: opts.budget });
            }
        }
        if len < opts.max_length {
            partial = partial
                .iter()
                .flat_map(|w| {
                    non_unit.iter().map(move |m| {
                        let mut nw = w.clone();
                        nw.push(*m);
                        nw
                    })
                })
                .collect();
        }
    }
    out.sort();
    Ok(out)
}

fn dx_count(w: &Word) -> u32 {
    w.iter().map(|m| m.idx.degree()).sum()
}

/// `c · (−i)^k` for a Gaussian integer that must come out real.
fn untwist(c: GaussInt, k: u32) -> Result<i64> {
    let v = match k % 4 {
        0 => c,
        1 => GaussInt { re: c.im, im: -c.re },
        2 => GaussInt { re: -c.re, im: -c.im },
        _ => GaussInt { re: -c.im, im: c.re },
    };
    if v.im != 0 {
        return Err(Error::Contract(format!("twisted differential entry {c:?} is not real")));
    }
    Ok(v.re)
}

type SparseVec = BTreeMap<usize, BigRational>;

fn axpy(y: &mut SparseVec, a: &BigRational, x: &SparseVec) {
    for (k, v) in x {
        let e = y.entry(*k).or_insert_with(BigRational::zero);
        *e += a * v;
        if e.is_zero() {
            y.remove(k);
        }
    }
}

/// Basis of the kernel of `δ` on the truncated space.
pub fn solve_cocycles(opts: &CocycleOptions) -> Result<CocycleBasis> {
    let words = truncated_words(opts)?;
    let mut row_of: HashMap<Word, usize> = HashMap::new();
    let mut columns: Vec<SparseVec> = Vec::with_capacity(words.len());
    for w in &words {
        let img = Chain::<GaussInt>::word(opts.n, w, GaussInt::one()).total_differential(&opts.signs);
        let p = dx_count(w);
        let mut col = SparseVec::new();
        for (u, c) in img.terms() {
            let q = dx_count(u);
            let shift = q.checked_sub(p).ok_or_else(|| Error::Contract("differential lowered the dx count".into()))?;
            let v = untwist(*c, shift)?;
            let next = row_of.len();
            let r = *row_of.entry(u.clone()).or_insert(next);
            col.insert(r, BigRational::from_integer(BigInt::from(v)));
        }
        columns.push(col);
    }
    // column echelon form with combination tracking
    let mut pivots: HashMap<usize, (SparseVec, SparseVec)> = HashMap::new();
    let mut kernel: Vec<SparseVec> = Vec::new();
    for (j, col) in columns.into_iter().enumerate() {
        let mut v = col;
        let mut combo = SparseVec::new();
        combo.insert(j, BigRational::one());
        loop {
            let Some((&lead, lv)) = v.iter().next() else {
                kernel.push(combo);
                break;
            };
            match pivots.get(&lead) {
                Some((pv, pc)) => {
                    let f = -(lv / &pv[&lead]);
                    axpy(&mut v, &f, pv);
                    axpy(&mut combo, &f, pc);
                }
                None => {
                    pivots.insert(lead, (v, combo));
                    break;
                }
            }
        }
    }
    let rank = pivots.len();
    let mut chains = Vec::with_capacity(kernel.len());
    for k in kernel {
        let ints = integer_normalize(&k);
        let mut c = Chain::zero(opts.n);
        for (j, v) in ints {
            let v = v.to_i64().ok_or_else(|| Error::Resource { what: "cocycle coefficient size".into(), needed: u64::MAX, budget: i64::MAX as u64 })?;
            let w = &words[j];
            let tw = match dx_count(w) % 4 {
                0 => GaussRational::from_parts((v, 1), (0, 1)),
                1 => GaussRational::from_parts((0, 1), (v, 1)),
                2 => GaussRational::from_parts((-v, 1), (0, 1)),
                _ => GaussRational::from_parts((0, 1), (-v, 1)),
            };
            c.add_word(w, tw);
        }
        let d = c.total_differential(&opts.signs);
        if !d.is_zero() {
            return Err(Error::Contract(format!("kernel vector failed the exact recheck: {d:?}")));
        }
        chains.push(c);
    }
    Ok(CocycleBasis { chains, basis_words: words.len(), image_words: row_of.len(), rank })
}

/// Clears denominators, divides by the content and makes the first entry
/// positive.
fn integer_normalize(v: &SparseVec) -> Vec<(usize, BigInt)> {
    let lcm = v.values().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let mut ints: Vec<(usize, BigInt)> = v.iter().map(|(k, x)| (*k, (x * BigRational::from_integer(lcm.clone())).to_integer())).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, (_, x)| acc.gcd(x));
    let flip = ints.first().map(|(_, x)| x.is_negative()).unwrap_or(false);
    for (_, x) in ints.iter_mut() {
        *x = &*x / &g;
        if flip {
            *x = -&*x;
        }
    }
    ints
}
