//! Exact computation with rational recursive (ratrec) and polynomial
//! recursive (polyrec) sequences.
//!
//! The crate is organised bottom-up:
//!
//! * [`algebra`]: coefficient fields, sparse polynomials, reduced rational
//!   functions, GCDs, Gröbner bases and an expression parser.
//! * [`circuit`]: arithmetic circuits and the fusion of extended systems.
//! * [`recsys`]: recursive systems, numeric and symbolic evaluation.
//! * [`flatten`]: field chains, transcendence degrees, subfield membership
//!   and the extraction of a single-sequence recursion.
//! * [`zeroness`]: zeroness and Skolem probes.
//! * [`qbf`]: the compiler from quantified Boolean formulas to polyrec
//!   systems.
//! * [`json`]: the file formats used by the command-line tool.

pub mod algebra;
pub mod circuit;
pub mod flatten;
pub mod json;
pub mod qbf;
pub mod recsys;
pub mod zeroness;

pub use algebra::{FieldTag, Polynomial, RationalFunction, Scalar};
