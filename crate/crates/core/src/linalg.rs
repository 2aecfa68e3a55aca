//! Small dense complex linear algebra used by the spinor and operator code.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn to_complex(m: &RMatrix) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0f64, |a, &s| a.max(s))
}

/// Eigen-decomposition of a Hermitian matrix (eigenvalues ascending).
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMatrix::from_fn(m.nrows(), m.ncols(), |r, k| eig.eigenvectors[(r, idx[k])]);
    (vals, vecs)
}

/// `f(H)` for Hermitian `H` through its spectral decomposition.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let d = DVector::from_iterator(vals.len(), vals.iter().map(|&v| Complex64::new(f(v), 0.0)));
    &vecs * CMatrix::from_diagonal(&d) * vecs.adjoint()
}

/// Real symmetric square root of an SPD matrix.
pub fn spd_sqrt(m: &RMatrix) -> RMatrix {
    spd_function(m, f64::sqrt)
}

pub fn spd_function(m: &RMatrix, f: impl Fn(f64) -> f64) -> RMatrix {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let d = eig.eigenvalues.map(f);
    &eig.eigenvectors * RMatrix::from_diagonal(&d) * eig.eigenvectors.transpose()
}

/// Matrix exponential by scaling and squaring with a Taylor kernel.
pub fn expm(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let norm = m.iter().map(|z| z.norm()).sum::<f64>().max(1e-300);
    let mut s = 0u32;
    while norm / 2f64.powi(s as i32) > 0.5 {
        s += 1;
    }
    let a = m / Complex64::new(2f64.powi(s as i32), 0.0);
    let mut term = identity(n);
    let mut sum = identity(n);
    for k in 1..40 {
        term = &term * &a / Complex64::new(k as f64, 0.0);
        sum += &term;
        if max_abs(&term) < 1e-18 * max_abs(&sum) {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// Real matrix logarithm of an orthogonal matrix close enough to the
/// identity (no eigenvalue `-1`): inverse scaling and squaring.
pub fn orthogonal_log(o: &RMatrix) -> RMatrix {
    let n = o.nrows();
    let id = RMatrix::identity(n, n);
    let mut x = o.clone();
    let mut k = 0;
    while (&x - &id).norm() > 0.25 && k < 40 {
        x = real_sqrtm(&x);
        k += 1;
    }
    // log(I + y) series
    let y = &x - &id;
    let mut term = y.clone();
    let mut sum = y.clone();
    for j in 2..80 {
        term = &term * &y;
        let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
        sum += &term * (sign / j as f64);
        if term.norm() < 1e-18 {
            break;
        }
    }
    let sum = sum * 2f64.powi(k);
    // project on the antisymmetric part
    (&sum - sum.transpose()) * 0.5
}

/// Principal square root by the Denman–Beavers iteration.
pub fn real_sqrtm(a: &RMatrix) -> RMatrix {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = RMatrix::identity(n, n);
    for _ in 0..100 {
        let yi = y.clone().try_inverse().expect("sqrtm: singular iterate");
        let zi = z.clone().try_inverse().expect("sqrtm: singular iterate");
        let y_next = (&y + &zi) * 0.5;
        let z_next = (&z + &yi) * 0.5;
        let delta = (&y_next - &y).norm();
        y = y_next;
        z = z_next;
        if delta < 1e-15 * y.norm() {
            break;
        }
    }
    y
}
