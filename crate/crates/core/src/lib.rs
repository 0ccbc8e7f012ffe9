//! Finite-dimensional multiple operator integrals and the trace-class
//! counterexample for functions of noncommuting triples.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod besov;
pub mod counterexample;
pub mod error;
pub mod experiment;
pub mod field;
pub mod hermitian;
pub mod integral;
pub mod matrix;
mod par;
pub mod perturbation;
pub mod random;
pub mod schatten;
pub mod spectral;
pub mod suites;

pub use error::{Error, Result};
pub use hermitian::{hermitian_eig, Eigen, HermitianMatrix};
pub use matrix::{CMatrix, C64};
pub use par::is_parallel;
pub use schatten::{schatten_norm, singular_values, trace_norm, SchattenExponent};
pub use spectral::{spectral_measure, SpectralMeasure};
