//! Exact rational arithmetic: scalars, polynomials, symmetric tensors, quadratic forms
//! and truncated series in ħ.

mod linalg;
mod poly;
mod quadratic;
mod scalar;
mod series;
mod tensor;

pub use linalg::RMatrix;
pub use poly::{Exponent, PolyFunction};
pub use quadratic::{taylor_data, QuadAnalysis, QuadraticForm, TaylorData};
pub use scalar::{rational_serde, rational_vec_serde};
pub use scalar::{format_rational, int, parse_rational, rat, rat_to_f64, Rational, Scalar};
pub use series::HbarSeries;
pub use tensor::{factorial, SymTensor};


use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("quadratic form is degenerate")]
    DegenerateForm,
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("Hessian has non-real entries")]
    ComplexHessian,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}
