//! Floating-point oracles for oscillatory integrals `∫ a(x) e^{(i/ħ)S(x)} dx`, kept free of any
//! dependency on the exact pipeline so that they can check it.

mod fit;
mod poly;
mod quad;

pub use fit::{series_fit, FitSample, SlopeFit};
pub use poly::Polynomial;
pub use quad::{oscillatory_integral, Mode, QuadratureResult, QuadratureSpec, Ramp, RampKind, Window};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),
    #[error("quadrature did not converge: error estimate {error:e} against |I| = {magnitude:e}")]
    NonConvergent { error: f64, magnitude: f64 },
    #[error("need at least 4 samples spanning a decade in ħ, got {count} spanning a factor {span}")]
    InsufficientSamples { count: usize, span: f64 },
}
