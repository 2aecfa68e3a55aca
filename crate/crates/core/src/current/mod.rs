//! The current on chains: for a word `(θ₀, …, θ_N)`,
//! `Σ_M (−1)^M Σ_I ∫_{Δ_M} Str(c(θ₀') e^{−t₁D²} F(θ_{I₁}) ⋯ F(θ_{I_M}) e^{−(1−t_M)D²})`,
//! evaluated mode by mode with exact simplex integrals.

mod brute_force;
mod compositions;
mod operators;
mod simplex;

pub use brute_force::{chern_brute_force, OracleOptions};
pub use compositions::{enumerate_compositions, Composition};
pub use operators::{double_operator, f_operator, single_operator, ModeOperator, OpKind};
pub use simplex::simplex_heat_integral;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::chains::{exact_to_float, Chain, ChainSigns};
use crate::clifford::{CliffordModule, GammaSet};
use crate::error::{Error, Result};
use crate::forms::Mono;
use crate::linalg::{c, spectral_norm, CMatrix};
use crate::scalar::GaussRational;
use crate::torus::{LatticeMode, TorusGeometry};

/// Sign conventions of the current that are not fixed by its definition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Conventions {
    /// Coefficient of `c(θ'')` in `F(θ)`. With `ι_{∂T}(ϑ∧θ'') = θ''` and the
    /// Koszul signs of the chain complex, `+1` is the value for which the
    /// current vanishes on boundaries; `−1` matches the opposite orientation of `ϑ`.
    pub dblprime_sign: f64,
    /// Sign of the length-zero value `Str(c(θ₀')e^{−D²})`.
    pub n0_sign: f64,
}

impl Default for Conventions {
    fn default() -> Self {
        Conventions { dblprime_sign: 1.0, n0_sign: 1.0 }
    }
}

#[derive(Clone, Debug)]
pub struct EvalOptions {
    /// Certified bound on the total lattice truncation error.
    pub tol: f64,
    /// Cap on elementary trace terms.
    pub budget: u64,
    pub conventions: Conventions,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { tol: 1e-14, budget: 100_000_000, conventions: Conventions::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Evaluation {
    pub value: Complex64,
    pub tail_bound: f64,
    pub trace_terms: u64,
}

/// Precomputed Clifford data for one metric.
pub struct Evaluator<'a> {
    geom: &'a TorusGeometry,
    cm: CliffordModule,
    basis_norms: Vec<f64>,
    conv: Conventions,
}

struct BlockOp {
    op: ModeOperator,
}

struct WordPlan {
    coeff: Complex64,
    c0: CMatrix,
    /// Per composition: sign `(−1)^M` and the operators `F₁ … F_M`.
    comps: Vec<Vec<BlockOp>>,
    radius: f64,
    tail: f64,
    length_zero: bool,
}

impl<'a> Evaluator<'a> {
    pub fn new(geom: &'a TorusGeometry, gamma: &GammaSet, conv: Conventions) -> Result<Self> {
        let cm = geom.clifford(gamma)?;
        let basis_norms = (0..(1usize << geom.n())).map(|m| spectral_norm(cm.basis(crate::forms::IndexSet(m as u8)))).collect();
        Ok(Evaluator { geom, cm, basis_norms, conv })
    }

    pub fn clifford(&self) -> &CliffordModule {
        &self.cm
    }

    fn op_norm(&self, m: &CMatrix) -> f64 {
        spectral_norm(m)
    }

    /// Builds the operators for one word and its certified truncation radius.
    fn plan(&self, w: &[Mono], coeff: Complex64, tol: f64) -> Result<Option<WordPlan>> {
        let total = w.iter().fold(crate::forms::Mode::ZERO, |acc, m| acc.add(&m.mode));
        if !total.is_zero() || w[0].dbl {
            return Ok(None);
        }
        let d = self.cm.spinor_dim() as f64;
        let c0 = self.cm.basis(w[0].idx).clone();
        let c0_norm = self.basis_norms[w[0].idx.0 as usize];
        let nn = w.len() - 1;
        let abs_c = coeff.norm();
        if nn == 0 {
            let model = self.geom.tail_model(0.0, 0, d * c0_norm * abs_c, 1.0);
            let radius = model.radius_for(tol);
            return Ok(Some(WordPlan { coeff, c0, comps: Vec::new(), radius, tail: model.tail(radius), length_zero: true }));
        }
        let one = c(1.0, 0.0);
        let mut comps = Vec::new();
        let mut prefactor = 0.0;
        let mut degree = 0u32;
        for comp in enumerate_compositions(nn, Some(2))? {
            let mut ops = Vec::with_capacity(comp.len());
            let mut ok = true;
            let mut bound = d * c0_norm;
            let mut deg = 0u32;
            for block in comp.blocks() {
                let op = if block.len() == 1 {
                    single_operator(&self.cm, &w[block[0]], one, &self.conv)
                } else {
                    match double_operator(&self.cm, &w[block[0]], one, &w[block[1]], one) {
                        Some(op) => op,
                        None => {
                            ok = false;
                            break;
                        }
                    }
                };
                let (alpha, beta) = op.growth(|m| self.op_norm(m));
                if beta > 0.0 {
                    deg += 1;
                    bound *= alpha + 2.0 * beta;
                } else {
                    bound *= alpha;
                }
                ops.push(BlockOp { op });
            }
            if !ok || bound == 0.0 {
                continue;
            }
            let m = comp.len();
            prefactor += bound / (1..=m).map(|j| j as f64).product::<f64>();
            degree = degree.max(deg);
            comps.push(ops);
        }
        if comps.is_empty() {
            return Ok(None);
        }
        // largest excursion of the mode path
        let rho: f64 = w[1..].iter().map(|m| self.geom.shift_norm(&m.mode)).sum();
        let model = self.geom.tail_model(rho, degree, prefactor * abs_c, 1.0);
        let radius = model.radius_for(tol);
        Ok(Some(WordPlan { coeff, c0, comps, radius, tail: model.tail(radius), length_zero: false }))
    }

    fn contribution(&self, plan: &WordPlan, modes: &[LatticeMode]) -> (Complex64, u64) {
        let r2 = plan.radius * plan.radius;
        let mut total = c(0.0, 0.0);
        let mut terms = 0u64;
        let gamma = self.cm.gamma();
        if plan.length_zero {
            let st = gamma.supertrace_unchecked(&plan.c0);
            for m in modes.iter().take_while(|m| m.norm_sq <= r2) {
                total += st * (-m.norm_sq).exp();
                terms += 1;
            }
            return (total * plan.coeff * self.conv.n0_sign, terms);
        }
        let n = self.geom.n();
        let mut path: Vec<LatticeMode> = Vec::with_capacity(5);
        let mut expo: Vec<f64> = Vec::with_capacity(5);
        for ops in &plan.comps {
            let mm = ops.len();
            let sign = if mm % 2 == 0 { 1.0 } else { -1.0 };
            for base in modes.iter().take_while(|m| m.norm_sq <= r2) {
                // path[M] = ξ, path[a−1] = path[a] + shift of F_a
                path.clear();
                path.resize(mm + 1, *base);
                for a in (1..=mm).rev() {
                    path[a - 1] = self.geom.shifted(&path[a], &ops[a - 1].op.shift);
                }
                expo.clear();
                expo.extend(path.iter().map(|p| p.norm_sq));
                let weight = simplex::simplex_heat_integral_unchecked(&expo);
                terms += 1;
                if weight == 0.0 {
                    continue;
                }
                let mut prod = plan.c0.clone();
                for a in 1..=mm {
                    let blk = ops[a - 1].op.matrix_at(&self.cm, &path[a].xi[..n], &path[a - 1].xi[..n]);
                    prod = prod * blk;
                }
                total += gamma.supertrace_unchecked(&prod) * (sign * weight);
            }
        }
        (total * plan.coeff, terms)
    }

    pub fn evaluate(&self, chain: &Chain<Complex64>, opts: &EvalOptions) -> Result<Evaluation> {
        if !(opts.tol > 0.0) {
            return Err(Error::InvalidInput(format!("tolerance {} must be positive", opts.tol)));
        }
        if chain.dim() != self.geom.n() {
            return Err(Error::Dimension(format!("chain on T^{} evaluated on T^{}", chain.dim(), self.geom.n())));
        }
        let words: Vec<(&crate::chains::Word, &Complex64)> = chain.terms().collect();
        let per_word_tol = opts.tol / words.len().max(1) as f64;
        let plans: Vec<WordPlan> = words
            .iter()
            .map(|(w, k)| self.plan(w, **k, per_word_tol))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        let rmax = plans.iter().map(|p| p.radius).fold(0.0, f64::max);
        let modes = self.geom.modes_in_ball(rmax);
        let estimate: u64 = plans
            .iter()
            .map(|p| {
                let r2 = p.radius * p.radius;
                let k = modes.iter().take_while(|m| m.norm_sq <= r2).count() as u64;
                k * p.comps.len().max(1) as u64
            })
            .sum();
        if estimate > opts.budget {
            return Err(Error::Resource { what: "trace terms".into(), needed: estimate, budget: opts.budget });
        }
        let parts: Vec<(Complex64, u64)> = plans.par_iter().map(|p| self.contribution(p, &modes)).collect();
        let mut value = c(0.0, 0.0);
        let mut terms = 0;
        for (v, t) in parts {
            value += v;
            terms += t;
        }
        let tail_bound = plans.iter().map(|p| p.tail).sum();
        Ok(Evaluation { value, tail_bound, trace_terms: terms })
    }
}

pub fn evaluate(geom: &TorusGeometry, gamma: &GammaSet, chain: &Chain<Complex64>, opts: &EvalOptions) -> Result<Evaluation> {
    Evaluator::new(geom, gamma, opts.conventions)?.evaluate(chain, opts)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalizationRecord {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub abs_diff: f64,
    pub tail_bound: f64,
}

/// Compares the current on an exact cocycle with `∫_X α|_X`.
pub fn localization_check(
    geom: &TorusGeometry,
    gamma: &GammaSet,
    cocycle: &Chain<GaussRational>,
    signs: &ChainSigns,
    opts: &EvalOptions,
) -> Result<LocalizationRecord> {
    let img = cocycle.total_differential(signs);
    if let Some((w, k)) = crate::chains::first_nonzero(&img) {
        return Err(Error::Contract(format!("input is not a cocycle: δ has coefficient {k} on {w:?}")));
    }
    let float = exact_to_float(cocycle);
    let ev = evaluate(geom, gamma, &float, opts)?;
    let rhs = float.restrict_to_constants_scaled().integrate_top();
    Ok(LocalizationRecord { lhs: ev.value, rhs, abs_diff: (ev.value - rhs).norm(), tail_bound: ev.tail_bound })
}
