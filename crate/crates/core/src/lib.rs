//! Exact computations for rational quantum tori `C_Q`, their derivation Lie
//! algebras, the auxiliary Γ-graded algebra `G̃`, and the correspondence
//! between finite-dimensional graded `G̃`-modules and cuspidal modules with
//! an associative action of the center.
//!
//! All arithmetic happens in cyclotomic fields `Q(ζ_L)`; nothing in a
//! decision procedure uses floating point.

pub mod cache;
pub mod cuspidal;
pub mod cyclo;
pub mod error;
pub mod expr;
pub mod gtilde;
pub mod io;
pub mod lincomb;
pub mod liealg;
pub mod matrep;
pub mod matrix;
pub mod repn;
pub mod suites;
pub mod torus;

pub use cyclo::{CycloField, CycloNum, FieldRef, Rational};
pub use error::{Error, Result};
pub use matrix::ExactMatrix;
pub use torus::{ExpVec, TorusSpec};
