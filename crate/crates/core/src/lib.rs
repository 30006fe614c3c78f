//! Reidemeister and Farber–Turaev torsion of finite complexes with flat
//! bundles and Euler structures, in exact rational or floating arithmetic.

pub mod analytic;
pub mod bundle;
pub mod complex;
pub mod corpus;
pub mod error;
pub mod euler;
pub mod homology;
pub mod io;
pub mod matrix;
pub mod scalar;
pub mod snf;
pub mod subdivide;
pub mod suite;
pub mod torsion;

pub use complex::{CellId, Complex, ComplexDescription, EdgePath, Step};
pub use error::{Error, Result};
pub use matrix::{FMat, Mat, QMat};
pub use scalar::{Rational, Scalar};
