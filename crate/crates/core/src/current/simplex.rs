use crate::error::{Error, Result};

/// `∫_{0≤t₁≤…≤t_M≤1} exp(−t₁a₀ − (t₂−t₁)a₁ − … − (1−t_M)a_M) dt`.
///
/// Evaluated as the `(0, M)` entry of `exp(C)` with `C` upper bidiagonal,
/// diagonal `−aⱼ` and superdiagonal `1` (a divided difference of `e^{−x}`).
/// After the shift by `min aⱼ` the matrix is Metzler, so every Taylor
/// block and every squaring works with nonnegative entries.
pub fn simplex_heat_integral(a: &[f64]) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::InvalidInput("simplex integral needs at least one exponent".into()));
    }
    if let Some(bad) = a.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput(format!("exponent {bad} must be finite and nonnegative")));
    }
    Ok(simplex_heat_integral_unchecked(a))
}

pub(crate) fn simplex_heat_integral_unchecked(a: &[f64]) -> f64 {
    let m = a.len() - 1;
    let amin = a.iter().cloned().fold(f64::INFINITY, f64::min);
    if m == 0 {
        return (-a[0]).exp();
    }
    let scale_exp = (-amin).exp();
    if scale_exp == 0.0 {
        return 0.0;
    }
    let dim = m + 1;
    // C + amin·I
    let mut c = vec![0.0; dim * dim];
    for j in 0..dim {
        c[j * dim + j] = -(a[j] - amin);
        if j + 1 < dim {
            c[j * dim + j + 1] = 1.0;
        }
    }
    let norm = (0..dim).map(|j| (a[j] - amin) + 1.0).fold(0.0, f64::max);
    let mut s = 0i32;
    while norm / 2f64.powi(s) > 0.25 {
        s += 1;
    }
    let h = 2f64.powi(-s);
    for v in c.iter_mut() {
        *v *= h;
    }
    let mut sum = identity(dim);
    let mut term = identity(dim);
    for k in 1..30 {
        term = matmul(&term, &c, dim);
        let inv = 1.0 / k as f64;
        for v in term.iter_mut() {
            *v *= inv;
        }
        let mut small = true;
        for (x, t) in sum.iter_mut().zip(&term) {
            *x += t;
            if t.abs() > 1e-18 * x.abs() {
                small = false;
            }
        }
        if small {
            break;
        }
    }
    for _ in 0..s {
        sum = matmul(&sum, &sum, dim);
    }
    scale_exp * sum[m]
}

fn identity(d: usize) -> Vec<f64> {
    let mut v = vec![0.0; d * d];
    for j in 0..d {
        v[j * d + j] = 1.0;
    }
    v
}

fn matmul(a: &[f64], b: &[f64], d: usize) -> Vec<f64> {
    // upper triangular operands
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for k in i..d {
            let aik = a[i * d + k];
            if aik == 0.0 {
                continue;
            }
            for j in k..d {
                out[i * d + j] += aik * b[k * d + j];
            }
        }
    }
    out
}
