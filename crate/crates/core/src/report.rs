//! Report data shared by the library and the command-line driver: verdicts,
//! dimension tables, class coordinates with their basis context, and the
//! convention strings recorded with every certificate.

use crate::field::Scalar;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Convention recorded with bar-construction certificates.
pub const BAR_CONVENTION: &str = "reduced bar over the chosen unit-complement splitting; \
right-module words z⊗(sĒ)^p⊗E; twist = canonical projection onto Ē; \
base-ring corrections linear in ε (ε² = 0); unit components of deformed \
products enter as slot-drop terms";

/// Convention recorded with Hochschild computations.
pub const HOCHSCHILD_CONVENTION: &str = "normalized cochains on suspended tuples; \
differential-first ordering: δf = ±d∘f + f∘b + outer absorptions with \
prefix Koszul signs over suspended degrees; b1(sx) = -s(dx), \
b2(sx,sy) = (-1)^{|x|} s π(xy)";

/// Convention for the opposite algebra.
pub const OPPOSITE_CONVENTION: &str =
    "opposite multiplication Koszul-signed; curvature negated (c^op = -c), forced by the \
right-module identity over A^op ⊗ B";

/// One named verdict line of a report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerdictLine {
    pub name: String,
    pub verdict: String,
    pub detail: String,
}

/// Machine-readable report emitted by every operation of the workbench.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Report {
    pub job: String,
    pub seed: Option<u64>,
    pub verdicts: Vec<VerdictLine>,
    /// named dimension tables (degree -> dimension)
    pub dimensions: BTreeMap<String, BTreeMap<i32, usize>>,
    /// named class coordinate vectors (printed through `Scalar`)
    pub classes: BTreeMap<String, Vec<String>>,
    pub basis_context: Option<String>,
    pub conventions: Vec<String>,
    pub unreliable_degrees: Vec<i32>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(job: impl Into<String>) -> Self {
        Report {
            job: job.into(),
            ..Default::default()
        }
    }

    pub fn verdict(&mut self, name: &str, verdict: impl fmt::Display, detail: impl Into<String>) {
        self.verdicts.push(VerdictLine {
            name: name.to_string(),
            verdict: verdict.to_string(),
            detail: detail.into(),
        });
    }

    pub fn class(&mut self, name: &str, coords: &[Scalar]) {
        self.classes
            .insert(name.to_string(), coords.iter().map(|c| c.to_string()).collect());
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "job: {}", self.job)?;
        if let Some(seed) = self.seed {
            writeln!(f, "seed: {seed}")?;
        }
        for v in &self.verdicts {
            if v.detail.is_empty() {
                writeln!(f, "{}: {}", v.name, v.verdict)?;
            } else {
                writeln!(f, "{}: {} ({})", v.name, v.verdict, v.detail)?;
            }
        }
        for (name, dims) in &self.dimensions {
            let row: Vec<String> = dims.iter().map(|(d, n)| format!("{d}:{n}")).collect();
            writeln!(f, "{name}: {}", row.join(" "))?;
        }
        for (name, coords) in &self.classes {
            writeln!(f, "{name}: [{}]", coords.join(", "))?;
        }
        if let Some(b) = &self.basis_context {
            writeln!(f, "basis: {b}")?;
        }
        if !self.unreliable_degrees.is_empty() {
            let list: Vec<String> =
                self.unreliable_degrees.iter().map(|d| d.to_string()).collect();
            writeln!(f, "unreliable degrees: {}", list.join(", "))?;
        }
        for c in &self.conventions {
            writeln!(f, "convention: {c}")?;
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        Ok(())
    }
}
