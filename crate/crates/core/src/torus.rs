//! Flat tori `Rⁿ/Zⁿ` with constant metric: Dirac modes, heat weights,
//! lattice truncation with certified tails, and the heat trace.

use std::f64::consts::{PI, TAU};

use crate::clifford::{build_gammas, CliffordModule, GammaSet, Vielbein};
use crate::error::{Error, Result};
use crate::forms::{Mode, MAX_DIM};
use crate::linalg::{c, CMatrix, RMatrix};
use crate::quadrature::gauss_legendre;

#[derive(Clone, Debug)]
pub struct TorusGeometry {
    n: usize,
    vielbein: Vielbein,
    spin_offsets: Vec<f64>,
}

/// A spinor Fourier mode: `ξ = 2π(k + ε)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeMode {
    pub k: [i32; MAX_DIM],
    pub xi: [f64; MAX_DIM],
    pub norm_sq: f64,
}

impl LatticeMode {
    pub fn norm(&self) -> f64 {
        self.norm_sq.sqrt()
    }
}

impl TorusGeometry {
    pub fn new(g: RMatrix, spin_offsets: Vec<f64>) -> Result<Self> {
        let n = g.nrows();
        if n == 0 || n > MAX_DIM || n % 2 != 0 {
            return Err(Error::Dimension(format!("torus dimension must be even and at most 8, got {n}")));
        }
        if spin_offsets.len() != n {
            return Err(Error::Dimension(format!("{} spin offsets for n = {n}", spin_offsets.len())));
        }
        if let Some(e) = spin_offsets.iter().find(|&&e| e != 0.0 && e != 0.5) {
            return Err(Error::InvalidInput(format!("spin offset {e} is not 0 or 1/2")));
        }
        let vielbein = Vielbein::new(&g)?;
        Ok(TorusGeometry { n, vielbein, spin_offsets })
    }

    /// Antiperiodic spin structure `ε = (½, …, ½)`.
    pub fn antiperiodic(g: RMatrix) -> Result<Self> {
        let n = g.nrows();
        Self::new(g, vec![0.5; n])
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        Self::antiperiodic(RMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(diag)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn metric(&self) -> &RMatrix {
        self.vielbein.metric()
    }

    pub fn vielbein(&self) -> &Vielbein {
        &self.vielbein
    }

    pub fn spin_offsets(&self) -> &[f64] {
        &self.spin_offsets
    }

    pub fn with_metric(&self, g: RMatrix) -> Result<Self> {
        Self::new(g, self.spin_offsets.clone())
    }

    pub fn clifford(&self, gamma: &GammaSet) -> Result<CliffordModule> {
        CliffordModule::new(gamma, &self.vielbein)
    }

    pub fn default_clifford(&self) -> Result<CliffordModule> {
        self.clifford(&build_gammas(self.n)?)
    }

    /// `ξᵀ g⁻¹ ξ`.
    pub fn norm_sq(&self, xi: &[f64]) -> f64 {
        let gi = self.vielbein.inverse_metric();
        let mut s = 0.0;
        for k in 0..self.n {
            for l in 0..self.n {
                s += xi[k] * gi[(k, l)] * xi[l];
            }
        }
        s.max(0.0)
    }

    pub fn mode(&self, k: &[i32]) -> LatticeMode {
        let mut kk = [0i32; MAX_DIM];
        let mut xi = [0.0; MAX_DIM];
        for i in 0..self.n {
            kk[i] = k[i];
            xi[i] = TAU * (k[i] as f64 + self.spin_offsets[i]);
        }
        let norm_sq = self.norm_sq(&xi[..self.n]);
        LatticeMode { k: kk, xi, norm_sq }
    }

    /// `ξ + 2πm`.
    pub fn shifted(&self, base: &LatticeMode, m: &Mode) -> LatticeMode {
        let mut k = base.k;
        for (i, kv) in k.iter_mut().enumerate().take(self.n) {
            *kv += m.get(i) as i32;
        }
        self.mode(&k)
    }

    /// `g`-norm of the covector `2πm`.
    pub fn shift_norm(&self, m: &Mode) -> f64 {
        let v: Vec<f64> = (0..self.n).map(|i| TAU * m.get(i) as f64).collect();
        self.norm_sq(&v).sqrt()
    }

    /// All modes with `|ξ|_g ≤ r`, sorted by norm then lexicographically.
    pub fn modes_in_ball(&self, r: f64) -> Vec<LatticeMode> {
        let g = self.metric();
        let mut ranges = Vec::with_capacity(self.n);
        for i in 0..self.n {
            // |ξ_i| ≤ |ξ|_g · sqrt(g_ii)
            let bound = r * g[(i, i)].sqrt() / TAU;
            let e = self.spin_offsets[i];
            let lo = (-bound - e).ceil() as i32;
            let hi = (bound - e).floor() as i32;
            ranges.push((lo, hi));
        }
        let mut out = Vec::new();
        if ranges.iter().any(|(lo, hi)| lo > hi) {
            return out;
        }
        let mut k: Vec<i32> = ranges.iter().map(|r| r.0).collect();
        let r2 = r * r;
        loop {
            let m = self.mode(&k);
            if m.norm_sq <= r2 {
                out.push(m);
            }
            let mut i = 0;
            loop {
                if i == self.n {
                    sort_modes(&mut out);
                    return out;
                }
                k[i] += 1;
                if k[i] <= ranges[i].1 {
                    break;
                }
                k[i] = ranges[i].0;
                i += 1;
            }
        }
    }

    /// Covolume of the mode lattice `2π(Zⁿ+ε)` in the `g⁻¹` norm and the
    /// diameter of its fundamental cell.
    fn cell_geometry(&self) -> (f64, f64) {
        let e = self.vielbein.matrix();
        let vol = TAU.powi(self.n as i32) * e.determinant().abs();
        let gi = self.vielbein.inverse_metric();
        let diam = TAU * (0..self.n).map(|k| gi[(k, k)].sqrt()).sum::<f64>();
        (vol, diam)
    }

    pub fn tail_model(&self, shift_radius: f64, degree: u32, prefactor: f64, heat_time: f64) -> TailModel {
        let (covolume, cell_diameter) = self.cell_geometry();
        TailModel { n: self.n, covolume, cell_diameter, shift_radius, degree, prefactor, heat_time }
    }
}

pub fn sort_modes(modes: &mut [LatticeMode]) {
    modes.sort_by(|a, b| a.norm_sq.total_cmp(&b.norm_sq).then_with(|| a.k.cmp(&b.k)));
}

/// Bound on `Σ_{|ξ|_g > R} f(|ξ|_g)` for
/// `f(r) = K (1 + r + ρ)^p exp(−t·max(r − ρ, 0)²)`: each excluded lattice
/// point is dominated by the integral of the decreasing envelope of `f` over
/// its fundamental cell.
#[derive(Clone, Debug)]
pub struct TailModel {
    pub n: usize,
    pub covolume: f64,
    pub cell_diameter: f64,
    pub shift_radius: f64,
    pub degree: u32,
    pub prefactor: f64,
    pub heat_time: f64,
}

impl TailModel {
    fn f(&self, r: f64) -> f64 {
        let d = (r - self.shift_radius).max(0.0);
        self.prefactor * (1.0 + r + self.shift_radius).powi(self.degree as i32) * (-self.heat_time * d * d).exp()
    }

    fn peak(&self) -> f64 {
        // p/(1+r+ρ) = 2t(r−ρ)
        let (p, t, rho) = (self.degree as f64, self.heat_time, self.shift_radius);
        if p == 0.0 {
            return rho;
        }
        let a = 2.0 * t;
        // a(r−ρ)(1+r+ρ) = p, solve for u = r−ρ: a u² + a(1+2ρ)u − p = 0
        let b = a * (1.0 + 2.0 * rho);
        let u = (-b + (b * b + 4.0 * a * p).sqrt()) / (2.0 * a);
        rho + u
    }

    fn envelope(&self, r: f64) -> f64 {
        self.f(r.max(self.peak()))
    }

    /// Certified bound for the sum over modes with `|ξ|_g > radius`.
    pub fn tail(&self, radius: f64) -> f64 {
        if self.prefactor == 0.0 {
            return 0.0;
        }
        let n = self.n as i32;
        // area of the unit sphere S^{n−1}, n even
        let half = self.n / 2;
        let gamma_half: f64 = (1..half).map(|k| k as f64).product();
        let sphere = 2.0 * PI.powi(half as i32) / gamma_half;
        let delta = self.cell_diameter;
        let lo = (radius - delta).max(0.0);
        let width = 0.25 / self.heat_time.sqrt();
        static RULE: std::sync::OnceLock<(Vec<f64>, Vec<f64>)> = std::sync::OnceLock::new();
        let (x, w) = RULE.get_or_init(|| gauss_legendre(12));
        let mut total = 0.0;
        let mut a = lo;
        loop {
            let b = a + width;
            let (h, mid) = (0.5 * width, a + 0.5 * width);
            let mut seg = 0.0;
            for (xi, wi) in x.iter().zip(w) {
                let r = mid + h * xi;
                seg += h * wi * self.envelope(r - delta) * r.powi(n - 1);
            }
            total += seg;
            if a > self.peak() + delta + 1.0 && seg < 1e-18 * total.max(1e-300) {
                break;
            }
            if seg == 0.0 && a > self.peak() + delta + 1.0 {
                break;
            }
            a = b;
        }
        // small safety factor for the quadrature of a smooth integrand
        1.01 * sphere * total / self.covolume
    }

    /// Smallest radius, up to a grid step, whose tail bound is at most `tol`.
    /// The bound decreases in the radius, so bracketing plus bisection works.
    pub fn radius_for(&self, tol: f64) -> f64 {
        let step = 0.125 / self.heat_time.sqrt();
        let mut lo = self.shift_radius;
        if self.tail(lo) <= tol {
            return lo;
        }
        let mut jump = step;
        let mut hi = lo + jump;
        while self.tail(hi) > tol {
            lo = hi;
            jump *= 2.0;
            hi += jump;
            if jump > 1e6 {
                return hi;
            }
        }
        while hi - lo > step {
            let mid = 0.5 * (lo + hi);
            if self.tail(mid) > tol {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

/// `D_ξ = i Σ_{a,k} γᵃ e_a^k ξ_k`.
pub fn dirac_mode(geom: &TorusGeometry, gamma: &GammaSet, xi: &LatticeMode) -> Result<CMatrix> {
    if gamma.n() != geom.n() {
        return Err(Error::Dimension(format!("gammas for n = {} on a torus of dimension {}", gamma.n(), geom.n())));
    }
    Ok(dirac_matrix(&geom.clifford(gamma)?, &xi.xi[..geom.n()]))
}

pub fn dirac_matrix(cm: &CliffordModule, xi: &[f64]) -> CMatrix {
    cm.covector(xi) * c(0.0, 1.0)
}

pub fn heat_weight(mode: &LatticeMode, t: f64) -> Result<f64> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::InvalidInput(format!("heat time {t} is negative")));
    }
    Ok((-t * mode.norm_sq).exp())
}

/// Modes kept for a Gaussian trace at unit heat time, with the certified
/// remainder. `shifts` are the Fourier modes that may displace a path.
pub fn truncate_lattice(geom: &TorusGeometry, shifts: &[Mode], tol: f64) -> Result<(Vec<LatticeMode>, f64)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance {tol} must be positive")));
    }
    let rho: f64 = shifts.iter().map(|m| geom.shift_norm(m)).sum();
    let model = geom.tail_model(rho, 0, 1.0, 1.0);
    if model.tail(0.0) <= tol {
        return Ok((Vec::new(), model.tail(0.0)));
    }
    let r = model.radius_for(tol);
    Ok((geom.modes_in_ball(r), model.tail(r)))
}

/// `2^{n/2} Σ_ξ e^{−t|ξ|²_g}` with relative tail at most `1e−12`.
pub fn theta_trace(geom: &TorusGeometry, t: f64) -> Result<f64> {
    theta_trace_with_tail(geom, t).map(|(v, _)| v)
}

pub fn theta_trace_with_tail(geom: &TorusGeometry, t: f64) -> Result<(f64, f64)> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Divergence(format!("heat trace at time {t}")));
    }
    let rank = (1u64 << (geom.n() / 2)) as f64;
    let model = geom.tail_model(0.0, 0, rank, t);
    let mut r = 2.0 / t.sqrt();
    loop {
        let modes = geom.modes_in_ball(r);
        // ascending order keeps the summation deterministic
        let sum: f64 = rank * modes.iter().map(|m| (-t * m.norm_sq).exp()).sum::<f64>();
        let tail = model.tail(r);
        if sum > 0.0 && tail <= 1e-12 * sum {
            return Ok((sum, tail));
        }
        r *= 1.25;
        if r > 1e6 {
            return Err(Error::Divergence("heat trace did not converge".into()));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigen, max_abs};

    #[test]
    fn dirac_mode_examples() {
        let gs = build_gammas(2).unwrap();
        let per = TorusGeometry::new(RMatrix::identity(2, 2), vec![0.0, 0.0]).unwrap();
        let zero = per.mode(&[0, 0]);
        assert_eq!(zero.norm_sq, 0.0);
        assert!(dirac_mode(&per, &gs, &zero).unwrap().iter().all(|z| z.norm() == 0.0));
        let m = per.mode(&[1, 0]);
        let d = dirac_mode(&per, &gs, &m).unwrap();
        assert!(max_abs(&(&d - gs.gamma(0) * c(0.0, TAU))) < 1e-15);
        let (ev, _) = hermitian_eigen(&d);
        assert!((ev[0] + TAU).abs() < 1e-12 && (ev[1] - TAU).abs() < 1e-12);
        let wrong = build_gammas(4).unwrap();
        assert!(dirac_mode(&per, &wrong, &m).is_err());
    }

    #[test]
    fn dirac_squares_to_norm() {
        let g = RMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let geom = TorusGeometry::antiperiodic(g).unwrap();
        let gs = build_gammas(2).unwrap();
        for k in [[0, 0], [1, -2], [-3, 1]] {
            let m = geom.mode(&k);
            let d = dirac_mode(&geom, &gs, &m).unwrap();
            let sq = &d * &d - CMatrix::identity(2, 2) * c(m.norm_sq, 0.0);
            assert!(max_abs(&sq) < 1e-12 * (1.0 + m.norm_sq));
            assert!(max_abs(&(&d - d.adjoint())) < 1e-14);
        }
    }

    #[test]
    fn heat_weight_examples() {
        let geom = TorusGeometry::new(RMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![4.0, 1.0])), vec![0.0, 0.0]).unwrap();
        let m = geom.mode(&[1, 0]);
        assert!((m.norm_sq - PI * PI).abs() < 1e-12);
        assert!((heat_weight(&m, 1.0).unwrap() - (-PI * PI).exp()).abs() < 1e-18);
        assert_eq!(heat_weight(&m, 0.0).unwrap(), 1.0);
        assert!(heat_weight(&m, -1.0).is_err());
    }

    #[test]
    fn theta_trace_leading_terms() {
        let geom = TorusGeometry::diagonal(&[1.0, 1.0]).unwrap();
        let v = theta_trace(&geom, 1.0).unwrap();
        let s: f64 = (-20..20).map(|k| (-(TAU * (k as f64 + 0.5)).powi(2)).exp()).sum();
        assert!((v - 2.0 * s * s).abs() < 1e-14 * v);
        // leading four modes: 2·(2e^{−π²})²
        let lead = 2.0 * (2.0 * (-PI * PI).exp()).powi(2);
        assert!((v - lead).abs() < 1e-6 * v);
        assert!((v - 2.14e-8).abs() < 0.01e-8);
        assert!(theta_trace(&geom, 0.0).is_err());
    }

    #[test]
    fn theta_trace_scaling() {
        let geom = TorusGeometry::diagonal(&[1.3, 0.7]).unwrap();
        let scaled = TorusGeometry::diagonal(&[2.6, 1.4]).unwrap();
        let a = theta_trace(&scaled, 0.8).unwrap();
        let b = theta_trace(&geom, 0.4).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
        assert!(theta_trace(&geom, 0.5).unwrap() > theta_trace(&geom, 0.6).unwrap());
    }

    #[test]
    fn truncation_tail_is_an_upper_bound() {
        for g in [[1.0, 0.0, 0.0, 1.0], [4.0, 0.3, 0.3, 1.0], [0.3, 0.1, 0.1, 0.2]] {
            let geom = TorusGeometry::antiperiodic(RMatrix::from_row_slice(2, 2, &g)).unwrap();
            let (modes, tail) = truncate_lattice(&geom, &[], 1e-30).unwrap();
            let kept: f64 = modes.iter().map(|m| (-m.norm_sq).exp()).sum();
            let r = modes.last().unwrap().norm() * 2.0 + 10.0;
            let all: f64 = geom.modes_in_ball(r).iter().map(|m| (-m.norm_sq).exp()).sum();
            assert!(all - kept <= tail + 1e-300, "g={g:?}");
            assert!(tail <= 1e-30);
        }
        let geom = TorusGeometry::diagonal(&[1.0, 1.0]).unwrap();
        let (modes, tail) = truncate_lattice(&geom, &[], 1e3).unwrap();
        assert!(modes.is_empty() && tail <= 1e3);
        assert!(truncate_lattice(&geom, &[], 0.0).is_err());
    }

    #[test]
    fn ball_enumeration_is_sorted_and_isotropic() {
        let geom = TorusGeometry::new(RMatrix::identity(2, 2), vec![0.0, 0.0]).unwrap();
        let modes = geom.modes_in_ball(TAU * 1.01);
        assert_eq!(modes.len(), 5);
        assert!(modes.windows(2).all(|w| w[0].norm_sq <= w[1].norm_sq));
    }
}
