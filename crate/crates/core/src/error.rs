use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("matrix order {dim} exceeds the oracle limit of {max}")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix does not conform to the {class} class (deviation {deviation:e})")]
    ClassViolation { class: &'static str, deviation: f64 },

    #[error("operation requires a {expected} family")]
    ClassMismatch { expected: &'static str },

    #[error("finite-difference derivative along parameter {param} failed its convergence check (change {change:e})")]
    DerivativeFailure { param: usize, change: f64 },

    #[error("eigenvector direction is undetermined: both ratio forms vanish")]
    DegenerateDirection,

    #[error("|Re c| = {re_c:e} is below the near-intersection guard")]
    NearZeroRec { re_c: f64 },

    #[error("D = {d:e} < 0: no exceptional points exist")]
    NegativeD { d: f64 },

    #[error("D = {d:e} is numerically zero: exceptional points coincide")]
    DegenerateD { d: f64 },

    #[error("unfolding frame is singular (condition number {condition:e})")]
    SingularFrame { condition: f64 },

    #[error("the Im c = 0 locus is undefined")]
    DegenerateLine,

    #[error("perturbation is not real (imaginary part {imag:e})")]
    RealnessViolated { imag: f64 },

    #[error("exceptional ring has vanishing radius")]
    DegenerateRing,

    #[error("point is off the Im c = 0 plane (Im c = {im_c:e})")]
    OffPlane { im_c: f64 },

    #[error("dielectric constants must satisfy eta1 > eta2 > eta3, got {0:?}")]
    NotBiaxial([f64; 3]),

    #[error("{name} tensor is not symmetric (entry ({row}, {col}) deviates by {deviation:e})")]
    AsymmetricTensor {
        name: &'static str,
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("direction is not a unit vector (norm {norm})")]
    InvalidDirection { norm: f64 },

    #[error("{0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
