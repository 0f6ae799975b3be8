//! Exact-arithmetic workbench for first-order curved deformations of small
//! dg algebras.
//!
//! The crate computes Hochschild cohomology of finite-dimensional dg algebras
//! presented by structure constants, converts degree-2 cocycles to curved
//! `k[ε]`-algebras and back, decides equivalence of curved deformations
//! through the transfer map attached to a Morita bimodule, repairs
//! equivalence witnesses to graded-free cdg bimodules with a truncated bar
//! construction, and runs the filtered (`t`-adic) module checks that relate
//! such bimodules to equivalences of the associated filtered derived
//! categories.
//!
//! All arithmetic is exact: either arbitrary-precision rationals or a prime
//! field. Every computation lives inside a declared degree window, and
//! results that a finite window cannot certify are flagged rather than
//! silently truncated.

pub mod algebra;
pub mod bar;
pub mod complex;
pub mod deform;
pub mod error;
pub mod field;
pub mod fixtures;
pub mod graded;
pub mod hochschild;
pub mod matrix;
pub mod nder;
pub mod report;
pub mod rng;
pub mod textio;

pub use complex::{cohomology, cone, hom_complex, is_quasi_iso, ChainMap, Complex, QuasiIsoVerdict};
pub use error::{Error, Result};
pub use field::{FieldSpec, Scalar};
pub use graded::{tensor_map, tensor_space, GradedMap, GradedSpace, Window};
pub use matrix::{solve_linear, Matrix};
