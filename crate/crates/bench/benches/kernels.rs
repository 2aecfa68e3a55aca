use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use susy_core::algebra::verify_exhaustive;
use susy_core::chains::{exact_to_float, Chain, ChainSigns};
use susy_core::clifford::build_gammas;
use susy_core::current::{chern_brute_force, evaluate, simplex_heat_integral, EvalOptions, OracleOptions};
use susy_core::homotopy::{build_transport, lemma_bound_test};
use susy_core::linalg::RMatrix;
use susy_core::sampling::{random_word, WordFilter};
use susy_core::torus::TorusGeometry;
use susy_core::GaussRational;

fn words(len: usize, count: usize) -> Vec<Chain<GaussRational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(len as u64);
    let filter = WordFilter { total_mode_zero: true, odd: Some(false) };
    (0..count).map(|_| Chain::word(2, &random_word(&mut rng, 2, len, 1, filter), GaussRational::from_parts((1, 1), (0, 1)))).collect()
}

fn simplex(c: &mut Criterion) {
    c.bench_function("simplex_heat_integral M=2", |b| b.iter(|| simplex_heat_integral(black_box(&[0.3, 7.5, 7.5 + 1e-9])).unwrap()));
    c.bench_function("simplex_heat_integral M=4", |b| b.iter(|| simplex_heat_integral(black_box(&[0.3, 2.0, 11.0, 4.0, 30.0])).unwrap()));
}

fn current(c: &mut Criterion) {
    let gs = build_gammas(2).unwrap();
    let geom = TorusGeometry::antiperiodic(RMatrix::from_row_slice(2, 2, &[4.0, 0.6, 0.6, 1.0])).unwrap();
    let opts = EvalOptions::default();
    for len in 1..=3 {
        let ws: Vec<_> = words(len, 8).iter().map(exact_to_float).collect();
        c.bench_function(&format!("evaluate N={len} (8 words)"), |b| {
            b.iter(|| ws.iter().map(|w| evaluate(&geom, &gs, w, &opts).unwrap().value).sum::<num_complex::Complex64>())
        });
    }
    let w = exact_to_float(&words(2, 1)[0]);
    let oracle = OracleOptions::default();
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    g.bench_function("chern_brute_force N=2", |b| b.iter(|| chern_brute_force(&geom, &gs, &w, &oracle).unwrap()));
    g.finish();
}

fn chains(c: &mut Criterion) {
    let signs = ChainSigns::default();
    let ws = words(3, 16);
    c.bench_function("total_differential N=3 (16 words)", |b| b.iter(|| ws.iter().map(|w| w.total_differential(&signs).len()).sum::<usize>()));
    let mut g = c.benchmark_group("algebra");
    g.sample_size(10);
    g.bench_function("verify_exhaustive N≤2 box 1", |b| b.iter(|| verify_exhaustive(2, 2, 1, false, u64::MAX).unwrap().words_checked));
    g.finish();
}

fn homotopy(c: &mut Criterion) {
    let gs = build_gammas(2).unwrap();
    let g0 = RMatrix::identity(2, 2);
    let g1 = RMatrix::from_row_slice(2, 2, &[4.0, 0.6, 0.6, 1.0]);
    c.bench_function("build_transport", |b| b.iter(|| build_transport(&g0, black_box(&g1), &gs, None).unwrap()));
    c.bench_function("lemma 20 trials dims ≤ 32", |b| b.iter(|| lemma_bound_test(32, 32, 20, 1).unwrap().max_ratio));
}

criterion_group!(benches, simplex, current, chains, homotopy);
criterion_main!(benches);
