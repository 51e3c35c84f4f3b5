//! Exact machinery for sets of integers avoiding quadratic polynomial
//! differences: circle-method spectra over Z_N, weighted Weyl and Gauss sums,
//! intersective quadratics with their coherent auxiliary families, extremal
//! difference-free set solvers, and executable density-increment and
//! frequency blow-up iterations.
//!
//! Everything boundary-sensitive (arc membership, root systems, difference
//! checks, moment counts) runs in exact integer arithmetic; floating point
//! appears only where transforms and sums genuinely live in C.

pub mod arith;
pub mod fourier;
pub mod iterate;
pub mod numeric;
pub mod poly;
pub mod rng;
pub mod sets;
pub mod weyl;

pub use arith::{ReducedFraction, PrimeFactorization};
pub use fourier::{ArcClass, ArcDecomposition, ArcParams, Spectrum};
pub use iterate::{BlowUpReport, FrequencySet, IterationParams, OuterTrace};
pub use poly::{AuxiliaryFamily, Intersectivity, QuadraticPoly, RationalRootForm};
pub use sets::{IntegerSet, PolynomialImage};
pub use weyl::WeylSumContext;
