//! DPW loop-group construction of Lawson-type minimal surfaces in S³.

pub mod error;
pub mod geometry;
pub mod iwasawa;
pub mod linalg;
pub mod loop_algebra;
pub mod monodromy;
pub mod ode;
pub mod potential;
pub mod quadrature;
pub mod solver;

pub use error::{DpwError, Result};
pub use linalg::{Mat2, C64};
pub use loop_algebra::{MatrixLoop, Part, ScalarLoop};
