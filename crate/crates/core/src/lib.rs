//! Exact toolkit for the additive and multiplicative Deligne–Simpson
//! problem: Jordan normal form calculus, genericity, existence criteria,
//! tuple verification, extensions, deformations and Fuchsian gauge moves.

pub mod class;
pub mod criteria;
pub mod deform;
pub mod eigen;
pub mod error;
pub mod ext;
pub mod gauge;
pub mod genericity;
pub mod jnf;
pub mod matrix;
pub mod orbit;
pub mod par;
pub mod poly;
pub mod random;
pub mod rmf;
pub mod scalar;
pub mod solver;
pub mod tuple;

pub use error::{DspError, Result};
pub use jnf::{JordanNormalForm, Partition};
pub use matrix::{Matrix, Vector};
pub use scalar::Scalar;
