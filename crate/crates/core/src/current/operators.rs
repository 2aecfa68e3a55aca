use num_complex::Complex64;

use crate::clifford::CliffordModule;
use crate::error::{Error, Result};
use crate::forms::{EquivariantForm, Mode, Mono};
use crate::linalg::{c, CMatrix};
use crate::torus::dirac_matrix;

use super::Conventions;

/// How an operator acts on a single Fourier mode.
#[derive(Clone, Debug)]
pub enum OpKind {
    /// Constant spinor matrix.
    Multiplication(CMatrix),
    /// `K − (D_{ξ+s} C − p·C D_ξ)` with `p = (−1)^{|C|}`.
    FirstOrder { constant: CMatrix, c: CMatrix, parity: f64 },
}

/// Operator mapping the mode `ξ` to `ξ + 2π·shift`.
#[derive(Clone, Debug)]
pub struct ModeOperator {
    pub shift: Mode,
    pub kind: OpKind,
}

impl ModeOperator {
    /// Spinor block from mode `xi_in` to `xi_out = xi_in + 2π·shift`.
    pub fn matrix_at(&self, cm: &CliffordModule, xi_in: &[f64], xi_out: &[f64]) -> CMatrix {
        match &self.kind {
            OpKind::Multiplication(m) => m.clone(),
            OpKind::FirstOrder { constant, c: cc, parity } => {
                let d_out = dirac_matrix(cm, xi_out);
                let d_in = dirac_matrix(cm, xi_in);
                constant - (&d_out * cc - cc * &d_in * c(*parity, 0.0))
            }
        }
    }

    /// Bound `‖block‖ ≤ α + β(|ξ_in|_g + |ξ_out|_g)`.
    pub fn growth(&self, norm: impl Fn(&CMatrix) -> f64) -> (f64, f64) {
        match &self.kind {
            OpKind::Multiplication(m) => (norm(m), 0.0),
            OpKind::FirstOrder { constant, c: cc, .. } => (norm(constant), norm(cc)),
        }
    }
}

/// Clifford multiplication by a monomial `coeff · e^{2πi⟨m,x⟩} dx^I`.
pub fn quantize_mono(cm: &CliffordModule, mono: &Mono, coeff: Complex64) -> CMatrix {
    cm.basis(mono.idx) * coeff
}

/// `F(θ)` for a monomial slot.
pub fn single_operator(cm: &CliffordModule, mono: &Mono, coeff: Complex64, conv: &Conventions) -> ModeOperator {
    let n = cm.n();
    let d = cm.spinor_dim();
    if mono.dbl {
        let m = quantize_mono(cm, mono, coeff * conv.dblprime_sign);
        return ModeOperator { shift: mono.mode, kind: OpKind::Multiplication(m) };
    }
    let mut constant = CMatrix::zeros(d, d);
    for (k, dm) in mono.dga::<Complex64>(n) {
        constant += quantize_mono(cm, &dm, coeff * k);
    }
    let parity = if mono.idx.degree() % 2 == 0 { 1.0 } else { -1.0 };
    ModeOperator { shift: mono.mode, kind: OpKind::FirstOrder { constant, c: quantize_mono(cm, mono, coeff), parity } }
}

/// `F(θ₁, θ₂) = (−1)^{|θ₁'|}(c(θ₁'θ₂') − c(θ₁')c(θ₂'))`; zero unless both
/// slots are primed monomials.
pub fn double_operator(cm: &CliffordModule, a: &Mono, ca: Complex64, b: &Mono, cb: Complex64) -> Option<ModeOperator> {
    if a.dbl || b.dbl {
        return None;
    }
    let d = cm.spinor_dim();
    let mut m = CMatrix::zeros(d, d);
    if let Some((s, p)) = a.product(b) {
        m += quantize_mono(cm, &p, ca * cb * s as f64);
    }
    m -= quantize_mono(cm, a, ca) * quantize_mono(cm, b, cb);
    if a.idx.degree() % 2 == 1 {
        m = -m;
    }
    Some(ModeOperator { shift: a.mode.add(&b.mode), kind: OpKind::Multiplication(m) })
}

/// `F` of a block of one or two forms, as a sum of mode operators.
pub fn f_operator(
    cm: &CliffordModule,
    block: &[EquivariantForm<Complex64>],
    conv: &Conventions,
) -> Result<Vec<ModeOperator>> {
    match block {
        [t] => Ok(t.monomials().into_iter().map(|(k, m)| single_operator(cm, &m, k, conv)).collect()),
        [t1, t2] => {
            let mut out = Vec::new();
            for (k1, m1) in t1.monomials() {
                for (k2, m2) in t2.monomials() {
                    out.extend(double_operator(cm, &m1, k1, &m2, k2));
                }
            }
            Ok(out)
        }
        _ => Err(Error::Contract(format!("F is evaluated on blocks of length 1 or 2, got {}", block.len()))),
    }
}
