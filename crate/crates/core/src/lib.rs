//! Homogenization of high-order periodic elliptic operators
//! `A_eps = b(D)^* g(x/eps) b(D)`.
//!
//! The crate solves the periodic cell problem for the corrector `Lambda`,
//! forms the effective matrix `g0`, and measures resolvent approximation
//! errors fiber by fiber through the Bloch decomposition.

pub mod bloch;
pub mod cell;
pub mod error;
pub mod experiments;
pub mod field;
pub mod lattice;
pub mod linalg;
pub mod presets;
pub mod problem;
pub mod resolvent;
pub mod symbol;

pub use error::{Error, Result};
pub use field::{FieldBounds, MatrixSeries, PeriodicMatrixField};
pub use lattice::{FrequencyWindow, Lattice};
pub use problem::Problem;
pub use symbol::{DifferentialSymbol, MultiIndex};
