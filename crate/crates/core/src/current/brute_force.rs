//! Dense reference evaluation on a box of Fourier modes, with the simplex
//! integrals done by iterated Gauss–Legendre quadrature.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::chains::Chain;
use crate::clifford::GammaSet;
use crate::error::{Error, Result};
use crate::forms::{EquivariantForm, TrigPolyForm};
use crate::linalg::{c, hermitian_eigen, CMatrix};
use crate::quadrature::gauss_legendre_on;
use crate::torus::TorusGeometry;

use super::{enumerate_compositions, Conventions};

#[derive(Clone, Debug)]
pub struct OracleOptions {
    /// Box `|k_i + ε_i| ≤ mode_cutoff − ½`.
    pub mode_cutoff: i32,
    pub quad_points: usize,
    /// Largest admissible dense dimension.
    pub max_dim: usize,
    pub conventions: Conventions,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { mode_cutoff: 3, quad_points: 32, max_dim: 4096, conventions: Conventions::default() }
    }
}

struct DenseSpace {
    modes: Vec<Vec<i32>>,
    index: HashMap<Vec<i32>, usize>,
    spin: usize,
    /// `ĉ(dx^k)` built from the vielbein directly.
    chat: Vec<CMatrix>,
    dirac: CMatrix,
    /// Block-diagonal eigenvectors of the Dirac operator.
    u: CMatrix,
    /// Squared Dirac eigenvalues in the order of the columns of `u`.
    lam2: Vec<f64>,
    chirality: CMatrix,
}

impl DenseSpace {
    fn dim(&self) -> usize {
        self.modes.len() * self.spin
    }

    /// Antisymmetrized Clifford product over all orderings.
    fn clifford_of(&self, indices: &[usize]) -> CMatrix {
        let k = indices.len();
        let mut acc = CMatrix::zeros(self.spin, self.spin);
        let mut perm: Vec<usize> = (0..k).collect();
        let mut count = 0usize;
        permute(&mut perm, 0, &mut |p| {
            let mut m = CMatrix::identity(self.spin, self.spin);
            for &j in p {
                m = &m * &self.chat[indices[j]];
            }
            acc += m * c(perm_sign(p), 0.0);
            count += 1;
        });
        if count > 0 {
            acc /= c(count as f64, 0.0);
        }
        acc
    }

    /// Multiplication by a form (dense, Fourier × spinor).
    fn multiplication(&self, f: &TrigPolyForm<Complex64>) -> CMatrix {
        let dim = self.dim();
        let s = self.spin;
        let mut out = CMatrix::zeros(dim, dim);
        for (mode, idx, coeff) in f.terms() {
            let cl = self.clifford_of(&idx.indices().collect::<Vec<_>>()) * *coeff;
            for (col, k) in self.modes.iter().enumerate() {
                let target: Vec<i32> = k.iter().enumerate().map(|(i, v)| v + mode.get(i) as i32).collect();
                if let Some(&row) = self.index.get(&target) {
                    let mut blk = out.view_mut((row * s, col * s), (s, s));
                    blk += &cl;
                }
            }
        }
        out
    }

    /// Diagonal of `e^{−tD²}` in the eigenbasis.
    fn heat(&self, t: f64) -> Vec<f64> {
        self.lam2.iter().map(|l| (-t * l).exp()).collect()
    }

    /// `U* X U`.
    fn to_eigenbasis(&self, x: &CMatrix) -> CMatrix {
        self.u.adjoint() * x * &self.u
    }
}

fn permute(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, f);
        p.swap(k, i);
    }
}

fn perm_sign(p: &[usize]) -> f64 {
    let mut inv = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn build_space(geom: &TorusGeometry, gamma: &GammaSet, opts: &OracleOptions) -> Result<DenseSpace> {
    let n = geom.n();
    let eps = geom.spin_offsets();
    let mut per_axis = Vec::new();
    for e in eps {
        let bound = opts.mode_cutoff as f64 - 0.5;
        let ks: Vec<i32> = (-opts.mode_cutoff - 1..=opts.mode_cutoff + 1).filter(|&k| (k as f64 + e).abs() <= bound + 1e-12).collect();
        per_axis.push(ks);
    }
    let mut modes: Vec<Vec<i32>> = vec![Vec::new()];
    for ks in &per_axis {
        modes = modes.into_iter().flat_map(|m| ks.iter().map(move |&k| [m.clone(), vec![k]].concat())).collect();
    }
    let spin = gamma.spinor_dim();
    if modes.len() * spin > opts.max_dim {
        return Err(Error::Resource { what: "dense oracle dimension".into(), needed: (modes.len() * spin) as u64, budget: opts.max_dim as u64 });
    }
    let index = modes.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
    let e = geom.vielbein().matrix();
    let chat: Vec<CMatrix> = (0..n)
        .map(|k| {
            let mut m = CMatrix::zeros(spin, spin);
            for a in 0..n {
                m += gamma.gamma(a) * c(e[(k, a)], 0.0);
            }
            m
        })
        .collect();
    let xi: Vec<Vec<f64>> = modes.iter().map(|k| k.iter().zip(eps).map(|(&v, e)| std::f64::consts::TAU * (v as f64 + e)).collect()).collect();
    let dim = modes.len() * spin;
    let mut dirac = CMatrix::zeros(dim, dim);
    let mut u = CMatrix::zeros(dim, dim);
    let mut lam2 = vec![0.0; dim];
    for (j, x) in xi.iter().enumerate() {
        let mut blk = CMatrix::zeros(spin, spin);
        for k in 0..n {
            blk += &chat[k] * c(0.0, x[k]);
        }
        dirac.view_mut((j * spin, j * spin), (spin, spin)).copy_from(&blk);
        let (vals, vecs) = hermitian_eigen(&blk);
        u.view_mut((j * spin, j * spin), (spin, spin)).copy_from(&vecs);
        for (a, v) in vals.iter().enumerate() {
            lam2[j * spin + a] = v * v;
        }
    }
    let mut chirality = CMatrix::zeros(dim, dim);
    for j in 0..modes.len() {
        chirality.view_mut((j * spin, j * spin), (spin, spin)).copy_from(gamma.chirality());
    }
    Ok(DenseSpace { modes, index, spin, chat, dirac, u, lam2, chirality })
}

fn homogeneous_parts(f: &TrigPolyForm<Complex64>) -> Vec<(u32, TrigPolyForm<Complex64>)> {
    (0..=f.dim() as u32).map(|k| (k, f.component(k))).filter(|(_, p)| !p.is_zero()).collect()
}

/// Dense `F(θ)` with the super-commutator split by form parity.
fn dense_f1(sp: &DenseSpace, t: &EquivariantForm<Complex64>, conv: &Conventions) -> CMatrix {
    let dim = sp.dim();
    let mut out = sp.multiplication(&t.prime.exterior_d());
    for (k, part) in homogeneous_parts(&t.prime) {
        let m = sp.multiplication(&part);
        if k % 2 == 0 {
            out -= &sp.dirac * &m - &m * &sp.dirac;
        } else {
            out -= &sp.dirac * &m + &m * &sp.dirac;
        }
    }
    out += sp.multiplication(&t.dblprime) * c(conv.dblprime_sign, 0.0);
    debug_assert_eq!(out.nrows(), dim);
    out
}

fn dense_f2(sp: &DenseSpace, a: &EquivariantForm<Complex64>, b: &EquivariantForm<Complex64>) -> Result<CMatrix> {
    let dim = sp.dim();
    let mut out = CMatrix::zeros(dim, dim);
    let mb = sp.multiplication(&b.prime);
    for (k, part) in homogeneous_parts(&a.prime) {
        let prod = sp.multiplication(&part.wedge(&b.prime)?);
        let term = prod - sp.multiplication(&part) * &mb;
        if k % 2 == 0 {
            out += term;
        } else {
            out -= term;
        }
    }
    Ok(out)
}

fn form_of(n: usize, m: &crate::forms::Mono) -> EquivariantForm<Complex64> {
    EquivariantForm::from_monomials(n, [(c(1.0, 0.0), *m)])
}

/// Reference value of the current on a chain.
pub fn chern_brute_force(geom: &TorusGeometry, gamma: &GammaSet, chain: &Chain<Complex64>, opts: &OracleOptions) -> Result<Complex64> {
    if opts.mode_cutoff < 1 || opts.mode_cutoff > 3 {
        return Err(Error::InvalidInput(format!("mode cutoff {} outside 1..=3", opts.mode_cutoff)));
    }
    let sp = build_space(geom, gamma, opts)?;
    let n = geom.n();
    let (x1, w1) = gauss_legendre_on(opts.quad_points, 0.0, 1.0);
    let mut total = c(0.0, 0.0);
    for (word, coeff) in chain.terms() {
        let forms: Vec<EquivariantForm<Complex64>> = word.iter().map(|m| form_of(n, m)).collect();
        let c0 = sp.multiplication(&forms[0].prime);
        let g0 = sp.to_eigenbasis(&(&sp.chirality * &c0));
        let nn = forms.len() - 1;
        if nn == 0 {
            let heat = sp.heat(1.0);
            let v: Complex64 = (0..sp.dim()).map(|i| g0[(i, i)] * heat[i]).sum();
            total += v * coeff * opts.conventions.n0_sign;
            continue;
        }
        for comp in enumerate_compositions(nn, Some(2))? {
            let mut ops = Vec::new();
            for block in comp.blocks() {
                let op = if block.len() == 1 {
                    dense_f1(&sp, &forms[block[0]], &opts.conventions)
                } else {
                    dense_f2(&sp, &forms[block[0]], &forms[block[1]])?
                };
                ops.push(sp.to_eigenbasis(&op));
            }
            let sign = if ops.len() % 2 == 0 { 1.0 } else { -1.0 };
            let v = nested(&sp, &g0, &ops, 0.0, &x1, &w1);
            total += v * coeff * sign;
        }
    }
    Ok(total)
}

/// `∫_{t_prev ≤ t_a ≤ … ≤ 1} tr(L e^{−(t_a − t_prev)D²} F_a ⋯ e^{−(1−t_M)D²})`
/// in the eigenbasis, where every heat factor is diagonal.
fn nested(sp: &DenseSpace, left: &CMatrix, ops: &[CMatrix], t_prev: f64, x1: &[f64], w1: &[f64]) -> Complex64 {
    let h = 1.0 - t_prev;
    let dim = sp.dim();
    let mut acc = c(0.0, 0.0);
    if ops.len() == 1 {
        // tr(L E₁ F E₂) = Σ_{ij} L_ij F_ji e₁_j e₂_i
        let f = &ops[0];
        let p = CMatrix::from_fn(dim, dim, |i, j| left[(i, j)] * f[(j, i)]);
        for (r, wr) in x1.iter().zip(w1) {
            let t = t_prev + h * r;
            let e1 = sp.heat(t - t_prev);
            let e2 = sp.heat(1.0 - t);
            let mut s = c(0.0, 0.0);
            for (j, col) in p.column_iter().enumerate() {
                let mut acc_col = c(0.0, 0.0);
                for (pij, e) in col.iter().zip(&e2) {
                    acc_col += pij * e;
                }
                s += acc_col * e1[j];
            }
            acc += s * (wr * h);
        }
        return acc;
    }
    for (r, wr) in x1.iter().zip(w1) {
        let t = t_prev + h * r;
        let e1 = sp.heat(t - t_prev);
        let mut scaled = left.clone();
        for j in 0..dim {
            let mut col = scaled.column_mut(j);
            col *= c(e1[j], 0.0);
        }
        let next = scaled * &ops[0];
        acc += nested(sp, &next, &ops[1..], t, x1, w1) * (wr * h);
    }
    acc
}
