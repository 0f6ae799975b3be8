//! Presentations of dg and curved dg algebras over `k`, `k[ε]` and
//! `k[t]/(t^{n+1})`, their modules and bimodules, and the arrow-category
//! construction realized as a triangular matrix algebra.
//!
//! Deformations are kept in "free frame": a `k`-fiber presented by structure
//! constants together with one array of `t^j`-components per structural map.
//! Reduction and cocycle extraction are then literal projections. Modules
//! over a deformed algebra are *not* assumed free over the base: they carry a
//! plain `k`-space with a nilpotent `t`-action.

mod arrow;
mod curved;
mod modules;

pub use arrow::{arrow_algebra, arrow_algebra_dg, corner_subalgebra, off_diagonal_corner, ArrowSide};
pub use curved::{check_cdg, check_dg, opposite, tensor_algebra, CurvedAlgebra, DgAlgebra, MultTable};
pub use modules::{
    check_cdg_bimodule, check_cdg_module, CdgBimodule, CdgModule, CurvedBimodule, CurvedModule,
    FreeWitness,
};

use serde::{Deserialize, Serialize};
use std::fmt;

/// Base ring of a deformation: `k` itself (order 0), the dual numbers
/// `k[ε]` (order 1), or `k[t]/(t^{n+1})` in general. The deformation
/// parameter sits in degree 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseRing {
    pub order: usize,
}

impl BaseRing {
    pub const FIELD: BaseRing = BaseRing { order: 0 };
    pub const DUAL_NUMBERS: BaseRing = BaseRing { order: 1 };

    pub fn truncated(order: usize) -> BaseRing {
        BaseRing { order }
    }

    pub fn components(&self) -> usize {
        self.order + 1
    }
}

impl fmt::Display for BaseRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.order {
            0 => write!(f, "k"),
            1 => write!(f, "k[ε]"),
            n => write!(f, "k[t]/(t^{})", n + 1),
        }
    }
}

/// One failed axiom instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Violation {
    pub axiom: String,
    pub at: String,
    pub detail: String,
}

/// Report produced by the structure checkers: all violated axiom instances,
/// plus the instances a finite window cannot decide.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub subject: String,
    pub violations: Vec<Violation>,
    pub unchecked: Vec<String>,
}

impl ValidationReport {
    pub fn new(subject: impl Into<String>) -> Self {
        ValidationReport {
            subject: subject.into(),
            violations: Vec::new(),
            unchecked: Vec::new(),
        }
    }

    pub fn violation(&mut self, axiom: &str, at: impl fmt::Display, detail: impl Into<String>) {
        self.violations.push(Violation {
            axiom: axiom.to_string(),
            at: at.to_string(),
            detail: detail.into(),
        });
    }

    pub fn unchecked(&mut self, what: impl Into<String>) {
        self.unchecked.push(what.into());
    }

    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> crate::error::Result<Self> {
        if self.is_valid() {
            Ok(self)
        } else {
            Err(crate::error::Error::Validation(self.to_string()))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            write!(f, "{}: valid", self.subject)?;
        } else {
            writeln!(f, "{}: {} violation(s)", self.subject, self.violations.len())?;
            for v in &self.violations {
                writeln!(f, "  [{}] at {}: {}", v.axiom, v.at, v.detail)?;
            }
        }
        if !self.unchecked.is_empty() {
            write!(f, "\n  unchecked (window): {}", self.unchecked.len())?;
        }
        Ok(())
    }
}
