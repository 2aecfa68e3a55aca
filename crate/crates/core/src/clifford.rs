//! Gamma matrices, vielbeins, Clifford quantization of forms and the
//! spinor supertrace.
//!
//! Convention: `γᵃγᵇ + γᵇγᵃ = −2δᵃᵇ`, so each `γᵃ` is anti-Hermitian and
//! `D_ξ = i ĉ(ξ)` squares to `|ξ|²_g`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::forms::{IndexSet, MAX_DIM};
use crate::linalg::{c, identity, CMatrix, RMatrix};

#[derive(Clone, Debug)]
pub struct GammaSet {
    n: usize,
    gammas: Vec<CMatrix>,
    chirality: CMatrix,
    chirality_sign: i8,
    /// Ordered products `γ^{a₁}⋯γ^{a_k}` indexed by the bit mask of `{aᵢ}`.
    products: Vec<CMatrix>,
}

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Builds the gamma matrices for even `n` in `2..=8` by iterated tensor
/// products of Pauli matrices.
pub fn build_gammas(n: usize) -> Result<GammaSet> {
    if n % 2 != 0 || !(2..=MAX_DIM).contains(&n) {
        return Err(Error::Dimension(format!("gamma matrices need even n in 2..=8, got {n}")));
    }
    let one = c(1.0, 0.0);
    let zero = c(0.0, 0.0);
    let sx = CMatrix::from_row_slice(2, 2, &[zero, one, one, zero]);
    let sy = CMatrix::from_row_slice(2, 2, &[zero, c(0.0, -1.0), c(0.0, 1.0), zero]);
    let sz = CMatrix::from_row_slice(2, 2, &[one, zero, zero, -one]);
    let id2 = identity(2);
    let m = n / 2;
    let mut gammas = Vec::with_capacity(n);
    for k in 0..m {
        for pauli in [&sx, &sy] {
            let mut acc = CMatrix::identity(1, 1);
            for j in 0..m {
                let f = match j.cmp(&k) {
                    std::cmp::Ordering::Less => &sz,
                    std::cmp::Ordering::Equal => pauli,
                    std::cmp::Ordering::Greater => &id2,
                };
                acc = kron(&acc, f);
            }
            // Hermitian generators squaring to +1; multiply by i
            gammas.push(acc * c(0.0, 1.0));
        }
    }
    let dim = 1usize << m;
    let mut products = Vec::with_capacity(1 << n);
    for mask in 0..(1usize << n) {
        let mut p = identity(dim);
        for (a, g) in gammas.iter().enumerate() {
            if mask & (1 << a) != 0 {
                p = &p * g;
            }
        }
        products.push(p);
    }
    let phase = c(0.0, 1.0).powu(m as u32);
    let chirality = &products[(1 << n) - 1] * phase;
    Ok(GammaSet { n, gammas, chirality, chirality_sign: 1, products })
}

impl GammaSet {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spinor_dim(&self) -> usize {
        1 << (self.n / 2)
    }

    pub fn gamma(&self, a: usize) -> &CMatrix {
        &self.gammas[a]
    }

    pub fn gammas(&self) -> &[CMatrix] {
        &self.gammas
    }

    pub fn chirality(&self) -> &CMatrix {
        &self.chirality
    }

    /// `+1` for `Γ = i^{n/2}γ¹⋯γⁿ`, `−1` after [`GammaSet::flip_chirality`].
    pub fn chirality_sign(&self) -> i8 {
        self.chirality_sign
    }

    pub fn flip_chirality(&mut self) {
        self.chirality = -&self.chirality;
        self.chirality_sign = -self.chirality_sign;
    }

    pub fn with_chirality_sign(mut self, sign: i8) -> Self {
        if sign < 0 {
            self.flip_chirality();
        }
        self
    }

    /// Ordered product `γ^{a₁}⋯γ^{a_k}` for the set `A = {a₁ < … < a_k}`.
    pub fn product(&self, a: IndexSet) -> &CMatrix {
        &self.products[a.0 as usize]
    }

    /// `tr(Γ m)`.
    pub fn supertrace(&self, m: &CMatrix) -> Result<Complex64> {
        let d = self.spinor_dim();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::Dimension(format!("{}x{} matrix for spinor dimension {d}", m.nrows(), m.ncols())));
        }
        Ok(self.supertrace_unchecked(m))
    }

    pub(crate) fn supertrace_unchecked(&self, m: &CMatrix) -> Complex64 {
        let d = m.nrows();
        let mut s = c(0.0, 0.0);
        for i in 0..d {
            for k in 0..d {
                s += self.chirality[(i, k)] * m[(k, i)];
            }
        }
        s
    }

    /// `κ_n = Str(γ¹⋯γⁿ)`; `−2i` for `n = 2` with the default chirality.
    pub fn kappa(&self) -> Complex64 {
        self.supertrace_unchecked(self.product(IndexSet::full(self.n)))
    }
}

/// Lower-triangular `e` with `e eᵀ = g⁻¹`; row `k` holds `e_a^k`.
#[derive(Clone, Debug)]
pub struct Vielbein {
    g: RMatrix,
    g_inv: RMatrix,
    e: RMatrix,
}

/// Checks symmetry and positive definiteness.
pub fn check_spd(g: &RMatrix) -> Result<()> {
    if g.nrows() != g.ncols() || g.nrows() == 0 {
        return Err(Error::Dimension(format!("metric of shape {}x{}", g.nrows(), g.ncols())));
    }
    if !g.iter().all(|v| v.is_finite()) {
        return Err(Error::NotSpd("non-finite entry".into()));
    }
    let scale = g.amax().max(1e-300);
    if (g - g.transpose()).amax() > 1e-12 * scale {
        return Err(Error::NotSpd("matrix is not symmetric".into()));
    }
    if g.clone().cholesky().is_none() {
        return Err(Error::NotSpd("Cholesky factorization failed".into()));
    }
    Ok(())
}

impl Vielbein {
    pub fn new(g: &RMatrix) -> Result<Vielbein> {
        check_spd(g)?;
        let g = (g + g.transpose()) * 0.5;
        let g_inv = g.clone().cholesky().expect("checked above").inverse();
        let g_inv = (&g_inv + g_inv.transpose()) * 0.5;
        let e = g_inv
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NotSpd("inverse metric is not positive definite".into()))?
            .l();
        Ok(Vielbein { g, g_inv, e })
    }

    pub fn n(&self) -> usize {
        self.g.nrows()
    }

    pub fn metric(&self) -> &RMatrix {
        &self.g
    }

    pub fn inverse_metric(&self) -> &RMatrix {
        &self.g_inv
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.e
    }

    /// Frame components `Σ_k ξ_k e_a^k` of a covector.
    pub fn frame_components(&self, xi: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n).map(|a| (0..n).map(|k| xi[k] * self.e[(k, a)]).sum()).collect()
    }
}

/// Determinant of the submatrix `m[rows, cols]` by Gaussian elimination.
pub fn real_minor(m: &RMatrix, rows: &[usize], cols: &[usize]) -> f64 {
    let k = rows.len();
    let mut a: Vec<f64> = Vec::with_capacity(k * k);
    for &r in rows {
        for &cc in cols {
            a.push(m[(r, cc)]);
        }
    }
    let mut det = 1.0;
    for p in 0..k {
        let piv = (p..k).max_by(|&x, &y| a[x * k + p].abs().total_cmp(&a[y * k + p].abs())).unwrap();
        if a[piv * k + p] == 0.0 {
            return 0.0;
        }
        if piv != p {
            for j in 0..k {
                a.swap(p * k + j, piv * k + j);
            }
            det = -det;
        }
        let d = a[p * k + p];
        det *= d;
        for r in p + 1..k {
            let f = a[r * k + p] / d;
            if f != 0.0 {
                for j in p..k {
                    a[r * k + j] -= f * a[p * k + j];
                }
            }
        }
    }
    det
}

/// Antisymmetric form coefficients at a point, stored per sorted index set.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointForm {
    pub n: usize,
    pub components: BTreeMap<IndexSet, Complex64>,
}

impl PointForm {
    pub fn new(n: usize) -> Self {
        PointForm { n, components: BTreeMap::new() }
    }

    pub fn scalar(n: usize, f: Complex64) -> Self {
        let mut p = Self::new(n);
        p.components.insert(IndexSet::EMPTY, f);
        p
    }

    /// From the full tensor `ω_{i₁…i_k}` (row-major, `n^k` entries), checking
    /// antisymmetry.
    pub fn from_tensor(n: usize, degree: usize, entries: &[Complex64]) -> Result<Self> {
        if degree > n {
            return Err(Error::InvalidInput(format!("degree {degree} exceeds n = {n}")));
        }
        if entries.len() != n.pow(degree as u32) {
            return Err(Error::Dimension(format!("{} entries for a rank-{degree} tensor on n = {n}", entries.len())));
        }
        let scale = entries.iter().fold(1.0f64, |a, z| a.max(z.norm()));
        let mut out = Self::new(n);
        let mut idx = vec![0usize; degree];
        for (flat, val) in entries.iter().enumerate() {
            let mut r = flat;
            for slot in idx.iter_mut().rev() {
                *slot = r % n;
                r /= n;
            }
            match IndexSet::from_indices(&idx) {
                None => {
                    if val.norm() > 1e-12 * scale {
                        return Err(Error::InvalidInput("coefficient tensor is not antisymmetric".into()));
                    }
                }
                Some((sign, set)) => {
                    let sorted: Vec<usize> = set.indices().collect();
                    let mut sflat = 0;
                    for &i in &sorted {
                        sflat = sflat * n + i;
                    }
                    let reference = entries[sflat] * sign as f64;
                    if (reference - val).norm() > 1e-12 * scale {
                        return Err(Error::InvalidInput("coefficient tensor is not antisymmetric".into()));
                    }
                    if idx == sorted && *val != c(0.0, 0.0) {
                        out.components.insert(set, *val);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Quantization tables for one metric: `c_g(dx^I)` for every index set.
#[derive(Clone, Debug)]
pub struct CliffordModule {
    gamma: GammaSet,
    vielbein: Vielbein,
    basis: Vec<CMatrix>,
}

impl CliffordModule {
    pub fn new(gamma: &GammaSet, vielbein: &Vielbein) -> Result<Self> {
        let n = gamma.n();
        if vielbein.n() != n {
            return Err(Error::Dimension(format!("vielbein for n = {} with gammas for n = {n}", vielbein.n())));
        }
        let d = gamma.spinor_dim();
        let e = vielbein.matrix();
        let mut basis = Vec::with_capacity(1 << n);
        for mask in 0..(1usize << n) {
            let iset = IndexSet(mask as u8);
            let rows: Vec<usize> = iset.indices().collect();
            let mut acc = CMatrix::zeros(d, d);
            for amask in 0..(1usize << n) {
                let aset = IndexSet(amask as u8);
                if aset.degree() != iset.degree() {
                    continue;
                }
                let cols: Vec<usize> = aset.indices().collect();
                let det = real_minor(e, &rows, &cols);
                if det != 0.0 {
                    acc += gamma.product(aset) * c(det, 0.0);
                }
            }
            basis.push(acc);
        }
        Ok(CliffordModule { gamma: gamma.clone(), vielbein: vielbein.clone(), basis })
    }

    pub fn gamma(&self) -> &GammaSet {
        &self.gamma
    }

    pub fn vielbein(&self) -> &Vielbein {
        &self.vielbein
    }

    pub fn n(&self) -> usize {
        self.gamma.n()
    }

    pub fn spinor_dim(&self) -> usize {
        self.gamma.spinor_dim()
    }

    /// `c_g(dx^I)`, the antisymmetrized product of `ĉ(dx^{i})`.
    pub fn basis(&self, i: IndexSet) -> &CMatrix {
        &self.basis[i.0 as usize]
    }

    /// `ĉ(ξ) = Σ_k ξ_k ĉ(dx^k)` for a real covector.
    pub fn covector(&self, xi: &[f64]) -> CMatrix {
        let d = self.spinor_dim();
        let mut acc = CMatrix::zeros(d, d);
        for (k, &x) in xi.iter().enumerate() {
            if x != 0.0 {
                acc += self.basis(IndexSet::single(k)) * c(x, 0.0);
            }
        }
        acc
    }

    pub fn quantize(&self, form: &PointForm) -> Result<CMatrix> {
        if form.n != self.n() {
            return Err(Error::Dimension(format!("form on n = {} for module with n = {}", form.n, self.n())));
        }
        let d = self.spinor_dim();
        let mut acc = CMatrix::zeros(d, d);
        for (set, v) in &form.components {
            if set.indices().any(|i| i >= self.n()) {
                return Err(Error::InvalidInput("index out of range".into()));
            }
            acc += self.basis(*set) * *v;
        }
        Ok(acc)
    }
}

/// Convenience wrapper around [`CliffordModule::quantize`].
pub fn quantize(gamma: &GammaSet, vb: &Vielbein, form: &PointForm) -> Result<CMatrix> {
    CliffordModule::new(gamma, vb)?.quantize(form)
}

pub fn supertrace(gamma: &GammaSet, m: &CMatrix) -> Result<Complex64> {
    gamma.supertrace(m)
}
