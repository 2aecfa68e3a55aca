use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use susy_core::algebra::{verify_exhaustive, verify_words, AlgebraReport};
use susy_core::chains::{exact_to_float, Chain, ChainSigns};
use susy_core::clifford::build_gammas;
use susy_core::cocycles::{solve_cocycles, CocycleOptions, Parity};
use susy_core::current::{chern_brute_force, localization_check, EvalOptions, Evaluator, OracleOptions};
use susy_core::dsl::{parse_chain_exact, parse_chain_float};
use susy_core::homotopy::{diffeo_invariance_check, h1_check, h2_check, lemma_bound_test, metric_independence_sweep, uniform_samples, H2Options};
use susy_core::sampling::{random_chain, WordFilter};
use susy_core::torus::TorusGeometry;
use susy_core::{IndexSet, Mode, Mono};

use crate::config::{Backend, RunConfig};
use crate::report::CheckRecord;
use crate::CliError;

pub struct Outcome {
    pub checks: Vec<(CheckRecord, Duration)>,
    pub localization_pinned: bool,
}

impl Outcome {
    fn new() -> Self {
        Outcome { checks: Vec::new(), localization_pinned: false }
    }

    fn push(&mut self, rec: CheckRecord, start: Instant) {
        self.checks.push((rec, start.elapsed()));
    }
}

fn c64(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn eval_options(cfg: &RunConfig) -> EvalOptions {
    EvalOptions { tol: cfg.tolerances.eval_tol, budget: cfg.budgets.trace_terms, ..Default::default() }
}

fn algebra_record(name: &str, inputs: &Value, rep: &AlgebraReport) -> CheckRecord {
    let mut rec = CheckRecord::new(name, inputs);
    rec.values = serde_json::to_value(rep).expect("serializable");
    rec.bounds = json!({"violations": 0});
    for id in &rep.identities {
        if id.violations > 0 {
            rec.fail(
                &format!("{}: first violation {}", id.identity, id.first_violation.clone().unwrap_or_default()),
                json!(id.violations),
                json!(0),
            );
        }
    }
    rec
}

pub fn verify_algebra(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if cfg.backend != Backend::Exact {
        return Err(CliError::Refused("verify-algebra needs exact arithmetic; the float backend is refused".into()));
    }
    let n = cfg.geometry.n;
    let a = &cfg.algebra;
    let mut out = Outcome::new();
    let docs = cfg.chain_docs()?;
    if a.exhaustive {
        let start = Instant::now();
        let inputs = json!({"n": n, "max_length": a.max_length, "mode_box": a.mode_box, "broken_connes": a.broken_connes});
        let rep = verify_exhaustive(n, a.max_length, a.mode_box, a.broken_connes, cfg.budgets.algebra_words)?;
        out.push(algebra_record("algebra.exhaustive", &inputs, &rep), start);
    }
    let mut words = Vec::new();
    for d in docs.iter().flatten() {
        let chain = parse_chain_exact(d)?;
        if chain.dim() != n {
            return Err(CliError::Config(format!("chain on T^{} with geometry n = {n}", chain.dim())));
        }
        words.extend(chain.terms().map(|(w, _)| w.to_vec()));
    }
    if !words.is_empty() {
        let start = Instant::now();
        let inputs = json!({"n": n, "chains": cfg.chains, "broken_connes": a.broken_connes});
        let rep = verify_words(n, &words, a.broken_connes);
        out.push(algebra_record("algebra.chain_words", &inputs, &rep), start);
    }
    if out.checks.is_empty() {
        let mut rec = CheckRecord::new("algebra.chain_words", &json!({"n": n}));
        rec.values = json!({"words_checked": 0});
        rec.warn("empty chain set and no exhaustive truncation: vacuous pass");
        out.push(rec, Instant::now());
    }
    Ok(out)
}

fn default_chains(n: usize) -> Vec<(String, Chain<Complex64>)> {
    let one = Chain::word(n, &[Mono::UNIT], Complex64::new(1.0, 0.0));
    let vol = Chain::word(n, &[Mono::prime(Mode::ZERO, IndexSet::full(n))], Complex64::new(1.0, 0.0));
    vec![("unit".into(), one), ("volume".into(), vol)]
}

pub fn evaluate(cfg: &RunConfig, oracle: bool) -> Result<Outcome, CliError> {
    let n = cfg.geometry.n;
    let geom = TorusGeometry::new(cfg.metric()?, cfg.spin_offsets())?;
    let gs = build_gammas(n)?;
    let opts = eval_options(cfg);
    let ev = Evaluator::new(&geom, &gs, opts.conventions)?;
    let chains: Vec<(String, Chain<Complex64>)> = match cfg.chain_docs()? {
        None => default_chains(n),
        Some(docs) => docs
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let c = match cfg.backend {
                    Backend::Exact => exact_to_float(&parse_chain_exact(d)?),
                    Backend::Float => parse_chain_float(d)?,
                };
                Ok((format!("chain[{i}]"), c))
            })
            .collect::<Result<_, CliError>>()?,
    };
    let mut out = Outcome::new();
    let oracle_opts = OracleOptions { mode_cutoff: cfg.oracle.mode_cutoff, quad_points: cfg.oracle.quad_points, ..Default::default() };
    for (label, chain) in &chains {
        let start = Instant::now();
        let inputs = json!({"metric": cfg.metric()?.as_slice(), "spin_offsets": cfg.spin_offsets(), "chain": label, "chains": cfg.chains, "eval_tol": opts.tol, "oracle": oracle});
        let mut rec = CheckRecord::new(&format!("evaluate.{label}"), &inputs);
        if chain.dim() != n {
            return Err(CliError::Config(format!("{label} lives on T^{} but geometry n = {n}", chain.dim())));
        }
        let e = ev.evaluate(chain, &opts)?;
        let mut values = json!({"value": c64(e.value), "tail_bound": e.tail_bound, "trace_terms": e.trace_terms, "words": chain.len()});
        let mut bounds = json!({"tail_bound": opts.tol});
        rec.at_most("certified tail", e.tail_bound, opts.tol);
        if !(e.value.re.is_finite() && e.value.im.is_finite()) {
            rec.fail("value is not finite", c64(e.value), Value::Null);
        }
        if oracle {
            let o = chern_brute_force(&geom, &gs, chain, &oracle_opts)?;
            let diff = (o - e.value).norm();
            let scale = o.norm().max(e.value.norm());
            // absolute floor for values that vanish up to rounding
            let allowed = cfg.tolerances.oracle_tol * scale + 1e-13;
            values["oracle"] = json!({"value": c64(o), "abs_diff": diff, "rel_diff": if scale > 0.0 { diff / scale } else { 0.0 }});
            bounds["oracle_abs_diff"] = json!(allowed);
            rec.at_most("oracle deviation", diff, allowed);
        }
        rec.values = values;
        rec.bounds = bounds;
        out.push(rec, start);
    }
    if chains.is_empty() {
        let mut rec = CheckRecord::new("evaluate", &json!({"chains": cfg.chains}));
        rec.warn("empty chain set: vacuous pass");
        out.push(rec, Instant::now());
    }
    Ok(out)
}

fn random_shear(rng: &mut ChaCha8Rng) -> Vec<Vec<i64>> {
    let mut k = 0;
    while k == 0 {
        k = rng.gen_range(-3..=3);
    }
    if rng.gen_bool(0.5) {
        vec![vec![1, k], vec![0, 1]]
    } else {
        vec![vec![1, 0], vec![k, 1]]
    }
}

pub fn invariance(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let seed = cfg.require_seed("invariance")?;
    let n = cfg.geometry.n;
    let gs = build_gammas(n)?;
    let fam = cfg.family()?;
    let eps = cfg.spin_offsets();
    let signs = ChainSigns::default();
    let opts = eval_options(cfg);
    let tol = &cfg.tolerances;
    let mut out = Outcome::new();
    let fam_inputs = json!({"g0": fam.g_of(0.0).as_slice(), "g1": fam.g_of(1.0).as_slice(), "interpolation": format!("{:?}", fam.interpolation()), "spin_offsets": eps});

    // cocycles
    let start = Instant::now();
    let mut cocycles = Vec::new();
    let mut rows = Vec::new();
    for t in &cfg.cocycles.truncations {
        let copts = CocycleOptions {
            n,
            max_length: t[0] as usize,
            mode_box: t[1],
            parity: Parity::Even,
            total_mode_zero: true,
            budget: cfg.budgets.cocycle_words,
            signs,
        };
        let basis = solve_cocycles(&copts)?;
        rows.push(json!({"max_length": t[0], "mode_box": t[1], "basis_words": basis.basis_words, "image_words": basis.image_words, "rank": basis.rank, "kernel_dimension": basis.chains.len()}));
        for c in basis.chains {
            if !cocycles.contains(&c) {
                cocycles.push(c);
            }
        }
    }
    let trunc = json!(cfg.cocycles.truncations);
    let mut rec = CheckRecord::new("invariance.cocycles", &json!({"n": n, "truncations": trunc}));
    rec.values = json!({"truncations": rows, "distinct_cocycles": cocycles.len()});
    if cocycles.is_empty() {
        rec.warn("no cocycles in the truncation");
    }
    out.push(rec, start);

    // localization at both ends
    for (label, t) in [("g0", 0.0), ("g1", 1.0)] {
        let start = Instant::now();
        let geom = TorusGeometry::new(fam.g_of(t), eps.clone())?;
        let mut rec = CheckRecord::new(&format!("invariance.localization.{label}"), &json!({"family": fam_inputs, "t": t, "cocycles": trunc}));
        let mut rows = Vec::new();
        let mut nonzero = 0;
        let mut max_abs = 0.0f64;
        for (k, cc) in cocycles.iter().enumerate() {
            let r = localization_check(&geom, &gs, cc, &signs, &opts)?;
            if r.rhs.norm() > tol.localization_floor {
                nonzero += 1;
                rec.at_most(&format!("cocycle {k}: |lhs − rhs| / |rhs|"), r.abs_diff / r.rhs.norm(), tol.localization_tol);
            } else {
                rec.at_most(&format!("cocycle {k}: |lhs − rhs| with |rhs| ≤ floor"), r.abs_diff, tol.localization_floor * tol.localization_tol);
            }
            max_abs = max_abs.max(r.abs_diff);
            rows.push(json!({"lhs": c64(r.lhs), "rhs": c64(r.rhs), "abs_diff": r.abs_diff, "tail_bound": r.tail_bound}));
        }
        if nonzero == 0 {
            rec.warn("no cocycle has |rhs| above the floor; the relative comparison is vacuous and only the absolute agreement is checked");
        } else if rec.passed {
            out.localization_pinned = true;
        }
        rec.values = json!({"cocycles": rows, "nonzero_rhs": nonzero, "max_abs_diff": max_abs});
        rec.bounds = json!({"relative": tol.localization_tol, "floor": tol.localization_floor});
        out.push(rec, start);
    }

    // metric independence
    let start = Instant::now();
    let samples = uniform_samples(cfg.sweep.samples);
    let control = Chain::word(n, &[Mono::prime(Mode::ZERO, IndexSet::full(n))], Complex64::new(1.0, 0.0));
    let sweep = metric_independence_sweep(&fam, &eps, &gs, &cocycles, &signs, Some(&control), &samples, tol.sweep_tol, &opts)?;
    let mut rec = CheckRecord::new("invariance.metric_independence", &json!({"family": fam_inputs, "samples": samples, "cocycles": trunc}));
    rec.at_most("max cocycle deviation", sweep.max_cocycle_deviation, tol.sweep_tol);
    let ctl = sweep.control.as_ref().expect("control requested");
    rec.above("control relative variation", ctl.max_rel_deviation, tol.control_min_variation);
    let max_value = sweep.cocycles.iter().flat_map(|r| r.values.iter()).map(|v| v.norm()).fold(0.0, f64::max);
    if max_value < 1e-12 {
        rec.warn("every cocycle value is below 1e-12 along the family; the deviation bound holds with all values near zero");
    }
    rec.values = json!({
        "max_cocycle_deviation": sweep.max_cocycle_deviation,
        "max_cocycle_value": max_value,
        "cocycle_deviations": sweep.cocycles.iter().map(|r| r.max_abs_deviation).collect::<Vec<_>>(),
        "control": {"values": ctl.values.iter().map(|v| c64(*v)).collect::<Vec<_>>(), "max_rel_deviation": ctl.max_rel_deviation},
    });
    rec.bounds = json!({"sweep_tol": tol.sweep_tol, "control_min_variation": tol.control_min_variation});
    out.push(rec, start);

    // diffeomorphism invariance
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let geom1 = TorusGeometry::new(fam.g_of(1.0), eps.clone())?;
    let mut maps: Vec<Vec<Vec<i64>>> = Vec::new();
    if n == 2 {
        maps.push(vec![vec![0, -1], vec![1, 0]]);
        maps.push(random_shear(&mut rng));
    } else {
        let mut o = vec![vec![0i64; n]; n];
        for (i, row) in o.iter_mut().enumerate() {
            row[i] = 1;
        }
        o[0][1] = 1;
        maps.push(o);
    }
    let filter = WordFilter { total_mode_zero: true, odd: Some(false) };
    let chains: Vec<Chain<Complex64>> = (0..cfg.diffeo.chains).map(|_| exact_to_float(&random_chain(&mut rng, n, cfg.diffeo.max_length, 4, 1, filter))).collect();
    let mut rec = CheckRecord::new("invariance.diffeomorphism", &json!({"metric": geom1.metric().as_slice(), "spin_offsets": eps, "seed": seed, "chains": cfg.diffeo.chains}));
    let mut rows = Vec::new();
    for o in &maps {
        let mut worst = 0.0f64;
        let mut offsets = Vec::new();
        let mut preserved = true;
        for (k, ch) in chains.iter().enumerate() {
            let r = diffeo_invariance_check(&geom1, &gs, o, ch, &opts)?;
            let rel = r.abs_diff / (1.0 + r.value_target.norm());
            rec.at_most(&format!("O = {o:?}, chain {k}: |J − J'| / (1 + |J|)"), rel, tol.diffeo_tol);
            worst = worst.max(rel);
            offsets = r.source_offsets.clone();
            preserved = r.preserves_spin_structure;
        }
        rows.push(json!({"o": o, "source_offsets": offsets, "preserves_spin_structure": preserved, "max_rel_diff": worst}));
    }
    rec.values = json!({"maps": rows});
    rec.bounds = json!({"diffeo_tol": tol.diffeo_tol});
    out.push(rec, start);

    // H1
    let start = Instant::now();
    let h1 = h1_check(&fam, &eps, &gs, &samples)?;
    let mut rec = CheckRecord::new("invariance.h1", &json!({"family": fam_inputs, "samples": samples}));
    rec.at_most("max relative gap between tr exp(−Q²) and the theta trace", h1.max_rel_gap_to_theta, 1e-10);
    if !h1.sup.is_finite() {
        rec.fail("sup of the heat trace", json!(h1.sup), json!("finite"));
    }
    rec.values = serde_json::to_value(&h1).expect("serializable");
    out.push(rec, start);

    // H2
    let start = Instant::now();
    let a = h2_check(&fam, &eps, &gs, &samples, &H2Options { cutoff: cfg.h2.cutoff, directions: cfg.h2.directions })?;
    let b = h2_check(&fam, &eps, &gs, &samples, &H2Options { cutoff: 2.0 * cfg.h2.cutoff, directions: cfg.h2.directions })?;
    let mut rec = CheckRecord::new("invariance.h2", &json!({"family": fam_inputs, "samples": samples, "cutoff": cfg.h2.cutoff, "directions": cfg.h2.directions}));
    let refine = if a.sup > 0.0 { (a.sup - b.sup).abs() / a.sup } else { (a.sup - b.sup).abs() };
    rec.at_most("relative change of the sup under cutoff doubling", refine, tol.h2_refinement_tol);
    rec.at_most("left/right norm gap", a.max_left_right_gap.max(b.max_left_right_gap), 1e-10);
    let fd = a.samples.iter().map(|s| s.derivative_residual).fold(0.0, f64::max);
    rec.at_most("finite-difference residual of Q̇", fd, 1e-6);
    if !a.sup.is_finite() {
        rec.fail("H2 sup", json!(a.sup), json!("finite"));
    }
    rec.values = json!({"sup": a.sup, "sup_doubled_cutoff": b.sup, "refinement_change": refine, "samples": a.samples});
    rec.bounds = json!({"refinement": tol.h2_refinement_tol, "left_right_gap": 1e-10});
    out.push(rec, start);
    Ok(out)
}

pub fn lemma(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let seed = cfg.require_seed("lemma")?;
    let l = &cfg.lemma;
    let start = Instant::now();
    let rep = lemma_bound_test(l.max_dim, l.max_dim, l.trials, seed)?;
    let mut rec = CheckRecord::new("lemma.bound", &json!({"trials": l.trials, "max_dim": l.max_dim, "seed": seed}));
    rec.at_most("max ratio", rep.max_ratio, 1.0 + 1e-12);
    if l.trials == 0 {
        rec.warn("zero trials: vacuous pass");
    }
    rec.values = serde_json::to_value(&rep).expect("serializable");
    rec.bounds = json!({"max_ratio": 1.0 + 1e-12});
    let mut out = Outcome::new();
    out.push(rec, start);
    Ok(out)
}

/// Used by the summary line of `evaluate`.
pub fn describe_value(v: &Value) -> String {
    match v.get("value").and_then(Value::as_array) {
        Some(a) if a.len() == 2 => format!("{:.6e}{:+.6e}i", a[0].as_f64().unwrap_or(f64::NAN), a[1].as_f64().unwrap_or(f64::NAN)),
        _ => String::new(),
    }
}
