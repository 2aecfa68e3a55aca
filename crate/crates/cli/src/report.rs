//! Machine-readable verification report. The JSON is a pure function of
//! the configuration, the seed and the version; wall-clock times are only
//! printed to standard output.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use susy_core::clifford::build_gammas;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub what: String,
    pub value: Value,
    pub threshold: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub inputs_digest: String,
    pub passed: bool,
    pub values: Value,
    pub bounds: Value,
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
}

impl CheckRecord {
    pub fn new(name: &str, inputs: &Value) -> Self {
        CheckRecord {
            name: name.into(),
            inputs_digest: digest(inputs),
            passed: true,
            values: Value::Null,
            bounds: Value::Null,
            violations: Vec::new(),
            warnings: Vec::new(),
        }
    }

    /// Records `value ≤ threshold`; non-finite values fail.
    pub fn at_most(&mut self, what: &str, value: f64, threshold: f64) {
        if !(value <= threshold) {
            self.fail(what, value.into(), threshold.into());
        }
    }

    /// Records `value > threshold`.
    pub fn above(&mut self, what: &str, value: f64, threshold: f64) {
        if !(value > threshold) {
            self.fail(what, value.into(), threshold.into());
        }
    }

    pub fn fail(&mut self, what: &str, value: Value, threshold: Value) {
        self.passed = false;
        self.violations.push(Violation { what: what.into(), value, threshold });
    }

    pub fn warn(&mut self, w: impl Into<String>) {
        self.warnings.push(w.into());
    }
}

/// First 16 hex digits of the SHA-256 of the canonical JSON encoding.
pub fn digest(v: &Value) -> String {
    let bytes = serde_json::to_vec(v).expect("JSON values serialize");
    Sha256::digest(&bytes).iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Environment {
    pub version: &'static str,
    pub seed: Option<u64>,
    pub backend: String,
    pub budgets: Value,
    pub config_digest: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Calibration {
    pub n: usize,
    /// `κ_n = Str(γ¹⋯γⁿ)` as `[re, im]`.
    pub kappa_n: [f64; 2],
    pub gamma_sign: i8,
    /// True when a localization comparison with a nonzero right-hand side
    /// confirmed the sign in this run.
    pub gamma_sign_pinned: bool,
    pub dblprime_sign: f64,
    pub n0_sign: f64,
}

impl Calibration {
    pub fn for_dimension(n: usize) -> Self {
        let (kappa, sign) = match build_gammas(n) {
            Ok(g) => (g.kappa(), g.chirality_sign()),
            Err(_) => (num_complex::Complex64::new(f64::NAN, f64::NAN), 0),
        };
        let conv = susy_core::current::Conventions::default();
        Calibration {
            n,
            kappa_n: [kappa.re, kappa.im],
            gamma_sign: sign,
            gamma_sign_pinned: false,
            dblprime_sign: conv.dblprime_sign,
            n0_sign: conv.n0_sign,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub environment: Environment,
    pub calibration: Calibration,
    pub checks: Vec<CheckRecord>,
    pub passed: bool,
}

impl Report {
    pub fn finish(&mut self) {
        self.passed = self.checks.iter().all(|c| c.passed);
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
