//! Supersymmetric path-integral current on flat tori: Clifford modules,
//! Dirac heat semigroups, entire cyclic chains, and the current evaluated
//! on chains together with its analytic and algebraic checks.

pub mod algebra;
pub mod chains;
pub mod clifford;
pub mod cocycles;
pub mod current;
pub mod dsl;
pub mod error;
pub mod forms;
pub mod homotopy;
pub mod linalg;
pub mod quadrature;
pub mod sampling;
pub mod scalar;
pub mod torus;

pub use error::{Error, Result};
pub use forms::{EquivariantForm, IndexSet, Mode, Mono, TrigPolyForm};
pub use scalar::{Coeff, GaussRational};
