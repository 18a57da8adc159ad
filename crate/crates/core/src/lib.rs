pub mod crystal;
pub mod diabolic;
pub mod error;
pub mod frame;
pub mod linalg;
pub mod perturb;
pub mod surface;
pub mod unfold_hermitian;
pub mod unfold_symmetric;
pub mod validation;

pub use error::{Error, Result};
pub use num_complex::Complex64;
