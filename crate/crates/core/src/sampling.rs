//! Seeded random monomials, words and chains for the test suites.

use rand::Rng;

use crate::chains::{word_degree, Chain, Word};
use crate::forms::{IndexSet, Mode, Mono};
use crate::scalar::{Coeff, GaussRational};

/// Requirements on sampled words.
#[derive(Clone, Copy, Debug, Default)]
pub struct WordFilter {
    /// Modes of all slots sum to zero (only such words can have a nonzero trace).
    pub total_mode_zero: bool,
    /// `Some(true)` for odd degree, `Some(false)` for even degree.
    pub odd: Option<bool>,
}

pub fn random_mono<R: Rng>(rng: &mut R, n: usize, mode_box: i64) -> Mono {
    let mut m = vec![0i64; n];
    for v in m.iter_mut() {
        *v = rng.gen_range(-mode_box..=mode_box);
    }
    let idx = IndexSet(rng.gen_range(0..(1u16 << n)) as u8);
    Mono { mode: Mode::from_slice(&m).expect("small mode"), idx, dbl: rng.gen_bool(0.5) }
}

/// A normalized word with `len` slots after `θ₀`.
pub fn random_word<R: Rng>(rng: &mut R, n: usize, len: usize, mode_box: i64, filter: WordFilter) -> Word {
    loop {
        let mut w = Word::new();
        w.push(random_mono(rng, n, mode_box));
        while w.len() < len + 1 {
            let m = random_mono(rng, n, mode_box);
            if !m.is_unit() {
                w.push(m);
            }
        }
        if filter.total_mode_zero {
            // put the balancing mode into slot 0 when it fits the box
            let rest = w[1..].iter().fold(Mode::ZERO, |a, m| a.add(&m.mode));
            let need: Vec<i64> = (0..n).map(|i| -rest.get(i)).collect();
            if need.iter().any(|v| v.abs() > mode_box) {
                continue;
            }
            w[0].mode = Mode::from_slice(&need).expect("small mode");
        }
        if let Some(odd) = filter.odd {
            if (word_degree(&w).rem_euclid(2) == 1) != odd {
                continue;
            }
        }
        return w;
    }
}

/// Sum of `words` random words of length at most `max_len`, with small
/// Gaussian-integer coefficients.
pub fn random_chain<R: Rng>(rng: &mut R, n: usize, max_len: usize, words: usize, mode_box: i64, filter: WordFilter) -> Chain<GaussRational> {
    let mut c = Chain::zero(n);
    for _ in 0..words {
        let len = rng.gen_range(0..=max_len);
        let w = random_word(rng, n, len, mode_box, filter);
        let mut k = GaussRational::from_parts((rng.gen_range(-3..=3), 1), (rng.gen_range(-3..=3), 1));
        if k.is_zero() {
            k = GaussRational::one();
        }
        c.add_word(&w, k);
    }
    c
}
