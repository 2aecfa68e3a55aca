//! Transport of spinors between flat metrics, the pulled-back Dirac family
//! `Q_t`, its two uniform bounds, the operator lemma as a randomized matrix
//! test, and sweeps of the current along a metric path.
//!
//! On a flat torus every ingredient is constant in `x`, so the transport is
//! one spinor matrix `β` and `Q_ξ(t) = β D_ξ(g_t) β⁻¹ = D_{Pξ}(g₀)` with
//! `P = (A^{1/2})ᵀ` acting on covectors.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chains::{exact_to_float, first_nonzero, Chain, ChainSigns};
use crate::clifford::{check_spd, CliffordModule, GammaSet, Vielbein};
use crate::current::{EvalOptions, Evaluator};
use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_eigen, hermitian_function, identity, max_abs, orthogonal_log, spd_function, spectral_norm, CMatrix, RMatrix};
use crate::scalar::GaussRational;
use crate::torus::{dirac_matrix, theta_trace, LatticeMode, TorusGeometry};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Interpolation {
    Linear,
    LogGeodesic,
}

/// A path `t ↦ g_t` of constant metrics between two endpoints.
#[derive(Clone, Debug)]
pub struct MetricFamily {
    g0: RMatrix,
    g1: RMatrix,
    interp: Interpolation,
    // log-geodesic data: g_t = s exp(tL) s with s = g₀^{1/2}
    s: RMatrix,
    l: RMatrix,
}

impl MetricFamily {
    pub fn new(g0: RMatrix, g1: RMatrix, interp: Interpolation) -> Result<Self> {
        check_spd(&g0)?;
        check_spd(&g1)?;
        if g0.nrows() != g1.nrows() {
            return Err(Error::Dimension(format!("endpoints of sizes {} and {}", g0.nrows(), g1.nrows())));
        }
        let s = spd_function(&g0, f64::sqrt);
        let si = spd_function(&g0, |x| 1.0 / x.sqrt());
        let l = spd_function(&(&si * &g1 * &si), f64::ln);
        Ok(MetricFamily { g0, g1, interp, s, l })
    }

    pub fn constant(g: RMatrix) -> Result<Self> {
        Self::new(g.clone(), g, Interpolation::Linear)
    }

    pub fn n(&self) -> usize {
        self.g0.nrows()
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interp
    }

    pub fn g_of(&self, t: f64) -> RMatrix {
        let g = match self.interp {
            Interpolation::Linear => &self.g0 * (1.0 - t) + &self.g1 * t,
            Interpolation::LogGeodesic => &self.s * spd_function(&self.l, |x| (t * x).exp()) * &self.s,
        };
        (&g + g.transpose()) * 0.5
    }

    /// Analytic derivative `ġ_t`.
    pub fn dg_of(&self, t: f64) -> RMatrix {
        match self.interp {
            Interpolation::Linear => &self.g1 - &self.g0,
            Interpolation::LogGeodesic => {
                // L and exp(tL) commute
                let e = spd_function(&self.l, |x| (t * x).exp());
                let d = &self.s * (&self.l * e) * &self.s;
                (&d + d.transpose()) * 0.5
            }
        }
    }

    /// Largest entry of `ġ_t − (g_{t+h} − g_{t−h})/2h` with `h = 1e−5`.
    pub fn derivative_residual(&self, t: f64) -> f64 {
        let h = 1e-5;
        let fd = (self.g_of(t + h) - self.g_of(t - h)) / (2.0 * h);
        (fd - self.dg_of(t)).amax()
    }
}

/// `t_k = k/(count−1)`.
pub fn uniform_samples(count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count).map(|k| k as f64 / (count - 1) as f64).collect(),
    }
}

/// Identification of the `g_t`-spinors with the `g₀`-spinors.
#[derive(Clone, Debug)]
pub struct Transport {
    /// `A = g_t⁻¹ g₀`, so that `g₀(u, v) = g_t(Au, v)`.
    pub a: RMatrix,
    pub a_sqrt: RMatrix,
    /// Isometry `(TX, g_t) → (TX, g₀)`.
    pub a_inv_sqrt: RMatrix,
    /// `(A^{1/2})ᵀ`, the induced isometry on covectors.
    pub a_prime_sqrt: RMatrix,
    /// Rotation between the two orthonormal coframes.
    pub frame_rotation: RMatrix,
    pub beta: CMatrix,
    /// `√(det g₀ / det g_t)`.
    pub rho: f64,
    /// On each Fourier mode the unitary acts as `u_scale · β`.
    pub u_scale: f64,
}

fn sym(m: &RMatrix) -> RMatrix {
    (m + m.transpose()) * 0.5
}

/// Spin lift of a rotation: `β γ(v) β⁻¹ = γ(Ov)` with `β = exp(−¼ Σ Ω_ab γᵃγᵇ)`
/// and `Ω = log O`.
pub fn spin_lift(gamma: &GammaSet, o: &RMatrix) -> Result<CMatrix> {
    let n = gamma.n();
    if o.nrows() != n {
        return Err(Error::Dimension(format!("rotation of size {} for n = {n}", o.nrows())));
    }
    let ev = o.clone().complex_eigenvalues();
    if ev.iter().any(|z| (z + 1.0).norm() < 1e-8) {
        return Err(Error::Contract("frame rotation has eigenvalue −1; sample the family more finely".into()));
    }
    let omega = orthogonal_log(o);
    let d = gamma.spinor_dim();
    let mut x = CMatrix::zeros(d, d);
    for a in 0..n {
        for b in 0..n {
            if omega[(a, b)] != 0.0 {
                x += gamma.gamma(a) * gamma.gamma(b) * c(-0.25 * omega[(a, b)], 0.0);
            }
        }
    }
    Ok(crate::linalg::expm(&x))
}

pub fn build_transport(g0: &RMatrix, gt: &RMatrix, gamma: &GammaSet, continuity_ref: Option<&Transport>) -> Result<Transport> {
    let v0 = Vielbein::new(g0)?;
    let vt = Vielbein::new(gt)?;
    let n = g0.nrows();
    if gt.nrows() != n || gamma.n() != n {
        return Err(Error::Dimension("metrics and gammas must share the dimension".into()));
    }
    let s = spd_function(g0, f64::sqrt);
    let si = spd_function(g0, |x| 1.0 / x.sqrt());
    // A = s⁻¹ M s with M = s g_t⁻¹ s symmetric positive
    let m = sym(&(&s * vt.inverse_metric() * &s));
    let a = vt.inverse_metric() * g0;
    let a_sqrt = &si * spd_function(&m, f64::sqrt) * &s;
    let a_inv_sqrt = &si * spd_function(&m, |x| 1.0 / x.sqrt()) * &s;
    let p = a_sqrt.transpose();
    let et_inv_t = vt.matrix().clone().try_inverse().ok_or_else(|| Error::NotSpd("singular vielbein".into()))?.transpose();
    let o = v0.matrix().transpose() * &p * et_inv_t;
    let mut beta = spin_lift(gamma, &o)?;
    if let Some(r) = continuity_ref {
        let plus = spectral_norm(&(&beta - &r.beta));
        let minus = spectral_norm(&(&beta + &r.beta));
        if plus.min(minus) > std::f64::consts::SQRT_2 {
            return Err(Error::Contract(format!("spin lift is discontinuous: distances {plus:.3e} and {minus:.3e} to the reference")));
        }
        if minus < plus {
            beta = -beta;
        }
    }
    let rho = (g0.determinant() / gt.determinant()).sqrt();
    Ok(Transport { a, a_sqrt, a_inv_sqrt, a_prime_sqrt: p, frame_rotation: o, beta, rho, u_scale: rho.powf(-0.5) })
}

impl Transport {
    /// `max_i ‖β c_{g_t}(dxⁱ) β⁻¹ − c_{g₀}(A′^{1/2}dxⁱ)‖`.
    pub fn intertwining_residual(&self, cm0: &CliffordModule, cmt: &CliffordModule) -> f64 {
        let n = cm0.n();
        let bi = self.beta.adjoint();
        (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                let pe: Vec<f64> = (0..n).map(|k| self.a_prime_sqrt[(k, i)]).collect();
                let lhs = &self.beta * cmt.covector(&e) * &bi;
                max_abs(&(lhs - cm0.covector(&pe)))
            })
            .fold(0.0, f64::max)
    }

    /// `(A^{−1/2})ᵀ g₀ A^{−1/2} − g_t`.
    pub fn isometry_residual(&self, g0: &RMatrix, gt: &RMatrix) -> f64 {
        (self.a_inv_sqrt.transpose() * g0 * &self.a_inv_sqrt - gt).amax()
    }
}

/// `Q_ξ(t) = β D_ξ(g_t) β⁻¹`.
pub fn pulled_dirac_mode(tr: &Transport, geom_t: &TorusGeometry, gamma: &GammaSet, xi: &LatticeMode) -> Result<CMatrix> {
    let d = crate::torus::dirac_mode(geom_t, gamma, xi)?;
    Ok(&tr.beta * d * tr.beta.adjoint())
}

/// The modules along a sampled family; transports are built in sample order
/// so that each spin lift is anchored on its predecessor.
#[derive(Clone, Debug)]
pub struct ModuleFamily {
    pub samples: Vec<f64>,
    pub geoms: Vec<TorusGeometry>,
    pub transports: Vec<Transport>,
}

pub fn build_module_family(fam: &MetricFamily, spin_offsets: &[f64], gamma: &GammaSet, samples: &[f64]) -> Result<ModuleFamily> {
    let g0 = fam.g_of(0.0);
    let mut geoms = Vec::with_capacity(samples.len());
    let mut transports: Vec<Transport> = Vec::with_capacity(samples.len());
    // anchor at t = 0, where β = Id
    let mut prev = build_transport(&g0, &g0, gamma, None)?;
    let mut prev_t = 0.0;
    for &t in samples {
        let gt = fam.g_of(t);
        // walk from the previous sample in small steps so that the lift sign is followed
        let steps = ((t - prev_t).abs() / 0.05).ceil().max(1.0) as usize;
        for k in 1..=steps {
            let s = prev_t + (t - prev_t) * k as f64 / steps as f64;
            prev = build_transport(&g0, &fam.g_of(s), gamma, Some(&prev))?;
        }
        prev_t = t;
        geoms.push(TorusGeometry::new(gt, spin_offsets.to_vec())?);
        transports.push(prev.clone());
    }
    Ok(ModuleFamily { samples: samples.to_vec(), geoms, transports })
}

#[derive(Clone, Debug, Serialize)]
pub struct H1Sample {
    pub t: f64,
    /// `Σ_ξ tr exp(−Q_ξ(t)²)` from the pulled matrices.
    pub heat_trace: f64,
    /// `rank(Σ) · Σ_ξ e^{−|ξ|²_{g_t}}`.
    pub theta: f64,
    /// Scalar heat trace times the spinor rank, the domination bound.
    pub domination_bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct H1Report {
    pub samples: Vec<H1Sample>,
    pub sup: f64,
    pub max_rel_gap_to_theta: f64,
    pub max_adjacent_jump: f64,
    pub passed: bool,
}

pub fn h1_check(fam: &MetricFamily, spin_offsets: &[f64], gamma: &GammaSet, t_samples: &[f64]) -> Result<H1Report> {
    let mf = build_module_family(fam, spin_offsets, gamma, t_samples)?;
    let rank = gamma.spinor_dim() as f64;
    let mut samples = Vec::with_capacity(t_samples.len());
    for ((t, geom), tr) in mf.samples.iter().zip(&mf.geoms).zip(&mf.transports) {
        let theta = theta_trace(geom, 1.0)?;
        let model = geom.tail_model(0.0, 0, rank, 1.0);
        let r = model.radius_for(1e-16 * theta);
        let mut heat = 0.0;
        let mut scalar = 0.0;
        for m in geom.modes_in_ball(r) {
            let q = pulled_dirac_mode(tr, geom, gamma, &m)?;
            let h = hermitian_function(&(&q * &q), |x| (-x).exp());
            heat += h.trace().re;
            scalar += (-m.norm_sq).exp();
        }
        samples.push(H1Sample { t: *t, heat_trace: heat, theta, domination_bound: rank * scalar });
    }
    let sup = samples.iter().map(|s| s.heat_trace).fold(0.0, f64::max);
    let max_rel_gap_to_theta = samples.iter().map(|s| (s.heat_trace - s.theta).abs() / s.theta).fold(0.0, f64::max);
    let max_adjacent_jump = samples.windows(2).map(|w| (w[1].heat_trace - w[0].heat_trace).abs()).fold(0.0, f64::max);
    let dominated = samples.iter().all(|s| s.heat_trace <= s.domination_bound * (1.0 + 1e-10));
    let passed = sup.is_finite() && dominated && max_rel_gap_to_theta <= 1e-10;
    Ok(H1Report { samples, sup, max_rel_gap_to_theta, max_adjacent_jump, passed })
}

#[derive(Clone, Debug)]
pub struct H2Options {
    /// Interior modes have `|ξ|_{g_t} ≤ 2π · cutoff`.
    pub cutoff: f64,
    /// Number of directions on the unit sphere (a circle for `n = 2`).
    pub directions: usize,
}

impl Default for H2Options {
    fn default() -> Self {
        H2Options { cutoff: 4.0, directions: 720 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct H2Sample {
    pub t: f64,
    /// `max_ξ ‖Q̇_ξ (Q_ξ²+1)^{−1/2}‖` over the interior modes.
    pub interior_right: f64,
    pub interior_left: f64,
    /// Direction-grid value of `lim_{r→∞}` of the same quantity.
    pub symbol_grid: f64,
    /// Exact supremum of the symbol, the norm of `Ṗ` between the two coframe norms.
    pub symbol_exact: f64,
    /// Norm of the linear-in-ξ part of `Q̇`, per unit covector.
    pub sigma_norm: f64,
    /// Norm of the constant part of `Q̇`.
    pub tau_norm: f64,
    /// `max(interior, symbol)` for the right and left products, summed.
    pub sup: f64,
    pub max_left_right_gap: f64,
    /// `max_ξ ‖Q̇_ξ − (Q_ξ(t+h) − Q_ξ(t−h))/2h‖ / (1 + |ξ|)`.
    pub derivative_residual: f64,
    pub modes: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct H2Report {
    pub cutoff: f64,
    pub directions: usize,
    pub samples: Vec<H2Sample>,
    pub sup: f64,
    pub max_left_right_gap: f64,
    pub passed: bool,
}

/// `Ṗ` for `P_t = (A_t^{1/2})ᵀ`, through the derivative of the SPD square root.
fn dot_p(fam: &MetricFamily, t: f64) -> RMatrix {
    let g0 = fam.g_of(0.0);
    let gt = fam.g_of(t);
    let gti = gt.clone().try_inverse().expect("SPD");
    let s = spd_function(&g0, f64::sqrt);
    let si = spd_function(&g0, |x| 1.0 / x.sqrt());
    let m = sym(&(&s * &gti * &s));
    let dm = sym(&-(&s * &gti * fam.dg_of(t) * &gti * &s));
    let n = m.nrows();
    let eig = m.symmetric_eigen();
    let q = &eig.eigenvectors;
    let mut dq = q.transpose() * dm * q;
    for i in 0..n {
        for j in 0..n {
            dq[(i, j)] /= eig.eigenvalues[i].sqrt() + eig.eigenvalues[j].sqrt();
        }
    }
    let d_sqrt = q * dq * q.transpose();
    (&si * d_sqrt * &s).transpose()
}

fn unit_directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    if n == 2 {
        return (0..count)
            .map(|k| {
                let phi = std::f64::consts::PI * k as f64 / count as f64;
                vec![phi.cos(), phi.sin()]
            })
            .collect();
    }
    // deterministic pseudo-random points plus the coordinate axes
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut out: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            v
        })
        .collect();
    while out.len() < count {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > 1e-3 && r <= 1.0 {
            out.push(v.iter().map(|x| x / r).collect());
        }
    }
    out
}

pub fn h2_check(fam: &MetricFamily, spin_offsets: &[f64], gamma: &GammaSet, t_samples: &[f64], opts: &H2Options) -> Result<H2Report> {
    if !(opts.cutoff >= 4.0) {
        return Err(Error::InvalidInput(format!("H2 cutoff {} is below 4", opts.cutoff)));
    }
    let n = fam.n();
    let mf = build_module_family(fam, spin_offsets, gamma, t_samples)?;
    let cm0 = TorusGeometry::new(fam.g_of(0.0), spin_offsets.to_vec())?.clifford(gamma)?;
    let dirs = unit_directions(n, opts.directions.max(1));
    let h = 1e-5;
    let g0 = fam.g_of(0.0);
    let mut samples = Vec::with_capacity(t_samples.len());
    for ((&t, geom), tr) in mf.samples.iter().zip(&mf.geoms).zip(&mf.transports) {
        let pd = dot_p(fam, t);
        let qdot = |xi: &[f64]| -> CMatrix {
            let v: Vec<f64> = (0..n).map(|k| (0..n).map(|l| pd[(k, l)] * xi[l]).sum()).collect();
            dirac_matrix(&cm0, &v)
        };
        let tr_plus = build_transport(&g0, &fam.g_of(t + h), gamma, Some(tr))?;
        let tr_minus = build_transport(&g0, &fam.g_of(t - h), gamma, Some(tr))?;
        let geom_plus = geom.with_metric(fam.g_of(t + h))?;
        let geom_minus = geom.with_metric(fam.g_of(t - h))?;
        let radius = TAU * opts.cutoff;
        let modes = geom.modes_in_ball(radius);
        let mut right = 0.0f64;
        let mut left = 0.0f64;
        let mut gap = 0.0f64;
        let mut fd_res = 0.0f64;
        for m in &modes {
            let q = pulled_dirac_mode(tr, geom, gamma, m)?;
            let qd = qdot(&m.xi[..n]);
            let res = hermitian_function(&(&q * &q), |x| 1.0 / (x + 1.0).sqrt());
            let r = spectral_norm(&(&qd * &res));
            let l = spectral_norm(&(&res * &qd));
            right = right.max(r);
            left = left.max(l);
            gap = gap.max((r - l).abs());
            let mp = geom_plus.mode(&m.k[..n]);
            let mm = geom_minus.mode(&m.k[..n]);
            let fd = (pulled_dirac_mode(&tr_plus, &geom_plus, gamma, &mp)? - pulled_dirac_mode(&tr_minus, &geom_minus, gamma, &mm)?) / c(2.0 * h, 0.0);
            fd_res = fd_res.max(max_abs(&(fd - &qd)) / (1.0 + m.norm()));
        }
        // symbol: unit g_t-covectors θ = e_t^{−ᵀ} v
        let et_inv_t = geom.vielbein().matrix().clone().try_inverse().expect("vielbein").transpose();
        let mut symbol_grid = 0.0f64;
        for v in &dirs {
            let theta: Vec<f64> = (0..n).map(|k| (0..n).map(|l| et_inv_t[(k, l)] * v[l]).sum()).collect();
            symbol_grid = symbol_grid.max(spectral_norm(&qdot(&theta)));
        }
        let e0t = g0_vielbein_t(&cm0);
        let symbol_exact = (e0t * &pd * &et_inv_t).singular_values().iter().fold(0.0f64, |a, &s| a.max(s));
        let tau_norm = spectral_norm(&qdot(&vec![0.0; n]));
        let sup = right.max(symbol_grid) + left.max(symbol_grid);
        samples.push(H2Sample {
            t,
            interior_right: right,
            interior_left: left,
            symbol_grid,
            symbol_exact,
            sigma_norm: symbol_grid,
            tau_norm,
            sup,
            max_left_right_gap: gap,
            derivative_residual: fd_res,
            modes: modes.len(),
        });
    }
    let sup = samples.iter().map(|s| s.sup).fold(0.0, f64::max);
    let max_left_right_gap = samples.iter().map(|s| s.max_left_right_gap).fold(0.0, f64::max);
    let passed = sup.is_finite() && max_left_right_gap <= 1e-10 && samples.iter().all(|s| s.derivative_residual <= 1e-6 && s.tau_norm == 0.0);
    Ok(H2Report { cutoff: opts.cutoff, directions: dirs.len(), samples, sup, max_left_right_gap, passed })
}

fn g0_vielbein_t(cm0: &CliffordModule) -> RMatrix {
    cm0.vielbein().matrix().transpose()
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaReport {
    pub trials: usize,
    pub max_dim1: usize,
    pub max_dim2: usize,
    pub seed: u64,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    /// Ratios at the 50th, 90th and 99th percentile.
    pub quantiles: [f64; 3],
    pub passed: bool,
}

/// One trial: `‖S(S*S+T+1)^{−1/2}‖ / √(λ+1)` with `T` shifted so that
/// `S*S + T ⪰ 0` and `λ = max(0, −min spec T)`.
pub fn lemma_ratio(s: &CMatrix, t0: &CMatrix) -> f64 {
    let ss = s.adjoint() * s;
    let (ev, _) = hermitian_eigen(&(&ss + t0));
    let shift = (-ev[0]).max(0.0);
    let t = t0 + identity(t0.nrows()) * c(shift, 0.0);
    let (tev, _) = hermitian_eigen(&t);
    let lambda = (-tev[0]).max(0.0);
    let h = &ss + &t + identity(t.nrows());
    let r = hermitian_function(&h, |x| 1.0 / x.max(0.0).sqrt());
    spectral_norm(&(s * r)) / (lambda + 1.0).sqrt()
}

fn random_complex(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c(rng.gen_range(-1.0..1.0) * scale, rng.gen_range(-1.0..1.0) * scale))
}

/// Randomized check of the operator lemma; dimensions are drawn per trial
/// from `1..=max_dim1` (domain) and `1..=max_dim2` (target), and the scales of
/// `S` and `T₀` range over several orders of magnitude.
pub fn lemma_bound_test(max_dim1: usize, max_dim2: usize, trials: usize, seed: u64) -> Result<LemmaReport> {
    if max_dim1 == 0 || max_dim2 == 0 || max_dim1 > 64 || max_dim2 > 64 {
        return Err(Error::InvalidInput(format!("lemma dimensions {max_dim1}x{max_dim2} outside 1..=64")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ratios = Vec::with_capacity(trials);
    for _ in 0..trials {
        let d1 = rng.gen_range(1..=max_dim1);
        let d2 = rng.gen_range(1..=max_dim2);
        let s_scale = 10f64.powf(rng.gen_range(-2.0..3.0));
        let t_scale = 10f64.powf(rng.gen_range(-2.0..3.0));
        let s = random_complex(&mut rng, d2, d1, s_scale);
        let x = random_complex(&mut rng, d1, d1, t_scale);
        let t0 = (&x + x.adjoint()) * c(0.5, 0.0);
        ratios.push(lemma_ratio(&s, &t0));
    }
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let mean_ratio = if ratios.is_empty() { 0.0 } else { ratios.iter().sum::<f64>() / ratios.len() as f64 };
    let mut sorted = ratios.clone();
    sorted.sort_by(f64::total_cmp);
    let q = |p: f64| if sorted.is_empty() { 0.0 } else { sorted[((sorted.len() - 1) as f64 * p).round() as usize] };
    Ok(LemmaReport {
        trials,
        max_dim1,
        max_dim2,
        seed,
        max_ratio,
        mean_ratio,
        quantiles: [q(0.5), q(0.9), q(0.99)],
        passed: max_ratio <= 1.0 + 1e-12,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRecord {
    pub values: Vec<Complex64>,
    pub max_abs_deviation: f64,
    pub max_rel_deviation: f64,
    /// Largest certified truncation tail along the sweep.
    pub tail_bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub samples: Vec<f64>,
    pub tol: f64,
    pub cocycles: Vec<SweepRecord>,
    pub control: Option<SweepRecord>,
    pub max_cocycle_deviation: f64,
    pub passed: bool,
}

fn record(values: Vec<Complex64>, tails: &[f64]) -> SweepRecord {
    let v0 = values[0];
    let max_abs_deviation = values.iter().map(|v| (v - v0).norm()).fold(0.0, f64::max);
    let max_rel_deviation = if v0.norm() > 0.0 { max_abs_deviation / v0.norm() } else if max_abs_deviation > 0.0 { f64::INFINITY } else { 0.0 };
    SweepRecord { values, max_abs_deviation, max_rel_deviation, tail_bound: tails.iter().copied().fold(0.0, f64::max) }
}

/// Evaluates each cocycle and the control chain at every sample metric.
#[allow(clippy::too_many_arguments)]
pub fn metric_independence_sweep(
    fam: &MetricFamily,
    spin_offsets: &[f64],
    gamma: &GammaSet,
    cocycles: &[Chain<GaussRational>],
    signs: &ChainSigns,
    control: Option<&Chain<Complex64>>,
    t_samples: &[f64],
    tol: f64,
    eval: &EvalOptions,
) -> Result<SweepReport> {
    if t_samples.is_empty() {
        return Err(Error::InvalidInput("empty sample list".into()));
    }
    for (k, cc) in cocycles.iter().enumerate() {
        if let Some((w, v)) = first_nonzero(&cc.total_differential(signs)) {
            return Err(Error::Contract(format!("chain {k} is not a cocycle: δ has coefficient {v} on {w:?}")));
        }
    }
    let geoms: Vec<TorusGeometry> = t_samples.iter().map(|&t| TorusGeometry::new(fam.g_of(t), spin_offsets.to_vec())).collect::<Result<_>>()?;
    let mut chains: Vec<Chain<Complex64>> = cocycles.iter().map(exact_to_float).collect();
    if let Some(ctl) = control {
        chains.push(ctl.clone());
    }
    let jobs: Vec<(usize, usize)> = (0..chains.len()).flat_map(|i| (0..geoms.len()).map(move |j| (i, j))).collect();
    let results: Vec<(Complex64, f64)> = jobs
        .par_iter()
        .map(|&(i, j)| {
            let ev = Evaluator::new(&geoms[j], gamma, eval.conventions)?.evaluate(&chains[i], eval)?;
            Ok((ev.value, ev.tail_bound))
        })
        .collect::<Result<_>>()?;
    let per = geoms.len();
    let mut recs: Vec<SweepRecord> = results
        .chunks(per)
        .map(|row| {
            let (v, t): (Vec<Complex64>, Vec<f64>) = row.iter().copied().unzip();
            record(v, &t)
        })
        .collect();
    let control = if control.is_some() { recs.pop() } else { None };
    let max_cocycle_deviation = recs.iter().map(|r| r.max_abs_deviation).fold(0.0, f64::max);
    let control_ok = control.as_ref().map(|c| c.max_rel_deviation > 1e-3).unwrap_or(true);
    Ok(SweepReport { samples: t_samples.to_vec(), tol, cocycles: recs, control, max_cocycle_deviation, passed: max_cocycle_deviation <= tol && control_ok })
}

#[derive(Clone, Debug, Serialize)]
pub struct DiffeoRecord {
    pub o: Vec<Vec<i64>>,
    /// Spin offsets on the source torus, `Oᵀε mod 1`.
    pub source_offsets: Vec<f64>,
    /// Whether `Oᵀε ≡ ε`, i.e. `x ↦ Ox` preserves the spin structure itself.
    pub preserves_spin_structure: bool,
    pub value_target: Complex64,
    pub value_source: Complex64,
    pub abs_diff: f64,
    pub rel_diff: f64,
}

fn check_unimodular(o: &[Vec<i64>], n: usize) -> Result<()> {
    if o.len() != n || o.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension("coordinate change has the wrong shape".into()));
    }
    let m = RMatrix::from_fn(n, n, |i, j| o[i][j] as f64);
    let det = m.determinant().round() as i64;
    if det != 1 {
        return Err(Error::InvalidInput(format!("coordinate change has determinant {det}, expected 1")));
    }
    Ok(())
}

/// Compares the current of `(g, ε)` on `chain` with the current of
/// `(Oᵀ g O, Oᵀε)` on the pullback of `chain` along `x ↦ Ox`.
pub fn diffeo_invariance_check(geom: &TorusGeometry, gamma: &GammaSet, o: &[Vec<i64>], chain: &Chain<Complex64>, eval: &EvalOptions) -> Result<DiffeoRecord> {
    let n = geom.n();
    check_unimodular(o, n)?;
    let om = RMatrix::from_fn(n, n, |i, j| o[i][j] as f64);
    let h = om.transpose() * geom.metric() * &om;
    let eps = geom.spin_offsets();
    let source_offsets: Vec<f64> = (0..n)
        .map(|j| {
            let v: f64 = (0..n).map(|i| o[i][j] as f64 * eps[i]).sum();
            v.rem_euclid(1.0)
        })
        .collect();
    let preserves_spin_structure = source_offsets.iter().zip(eps).all(|(a, b)| (a - b).abs() < 1e-12);
    let source = TorusGeometry::new(sym(&h), source_offsets.clone())?;
    let pulled = chain.pullback(o)?;
    let a = evaluate_with(geom, gamma, chain, eval)?;
    let b = evaluate_with(&source, gamma, &pulled, eval)?;
    let abs_diff = (a - b).norm();
    let scale = a.norm().max(b.norm());
    Ok(DiffeoRecord {
        o: o.to_vec(),
        source_offsets,
        preserves_spin_structure,
        value_target: a,
        value_source: b,
        abs_diff,
        rel_diff: if scale > 0.0 { abs_diff / scale } else { 0.0 },
    })
}

fn evaluate_with(geom: &TorusGeometry, gamma: &GammaSet, chain: &Chain<Complex64>, eval: &EvalOptions) -> Result<Complex64> {
    Ok(Evaluator::new(geom, gamma, eval.conventions)?.evaluate(chain, eval)?.value)
}
