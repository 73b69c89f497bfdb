//! Reconstruction of periodic bandlimited functions from nonuniform samples.

pub mod error;
pub mod error_analysis;
pub mod generic;
pub mod image;
pub mod linalg;
pub mod mci;
pub mod pgm;
pub mod recurrent;
pub mod signals;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{EvalGrid, SpectralSupport, TrigPolynomial};
