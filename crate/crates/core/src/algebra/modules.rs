//! Cdg modules and bimodules over curved algebras.
//!
//! Two presentations coexist. The general one ([`CdgModule`],
//! [`CdgBimodule`]) is a finite-dimensional `k`-space with a nilpotent
//! `t`-action; nothing is assumed free. The free-frame one ([`CurvedModule`],
//! [`CurvedBimodule`]) carries a `k`-fiber with `t^j`-component arrays, the
//! shape in which deformed arrow algebras and bar constructions produce their
//! output; `expand` converts it into the general presentation.

use super::curved::CurvedAlgebra;
use super::ValidationReport;
use crate::error::{Error, Result};
use crate::field::{FieldSpec, Scalar};
use crate::graded::{GradedMap, GradedSpace};
use crate::matrix::{sparse_add, sparse_normalize, sparse_scale, Matrix, SparseVec};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub type ActionTable = BTreeMap<(usize, usize), SparseVec>;

/// Right cdg module over a curved algebra: plain `k`-space, nilpotent
/// `t`-action commuting with everything, right action of the fiber, and a
/// degree `+1` derivation with `d²m = -mc`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CdgModule {
    pub over: CurvedAlgebra,
    pub space: GradedSpace,
    pub t_action: GradedMap,
    /// (module index, fiber index) -> module vector; `m · a`.
    pub action: ActionTable,
    pub diff: GradedMap,
}

impl CdgModule {
    pub fn new(
        over: CurvedAlgebra,
        space: GradedSpace,
        t_action: GradedMap,
        action: ActionTable,
        diff: GradedMap,
    ) -> Result<Self> {
        let m = CdgModule {
            over,
            space,
            t_action,
            action,
            diff,
        };
        m.validate_typing()?;
        Ok(m)
    }

    pub fn validate_typing(&self) -> Result<()> {
        if self.t_action.shift != 0
            || self.t_action.source != self.space
            || self.t_action.target != self.space
        {
            return Err(Error::ShapeMismatch("t-action must be a shift-0 endomap".into()));
        }
        if self.diff.shift != 1 || self.diff.source != self.space || self.diff.target != self.space
        {
            return Err(Error::ShapeMismatch("module differential must have shift +1".into()));
        }
        validate_action_table(
            &self.action,
            &self.space,
            &self.over.fiber,
            &self.space,
            ActionSide::ModuleFirst,
        )
    }

    pub fn field(&self) -> FieldSpec {
        self.space.field
    }

    /// `m · a` for basis indices; `None` when the product degree escapes.
    pub fn act_basis(&self, m: usize, a: usize) -> Option<SparseVec> {
        let deg = self.space.degree_of(m) + self.over.degree(a);
        if !self.space.window.contains(deg) {
            return None;
        }
        Some(self.action.get(&(m, a)).cloned().unwrap_or_default())
    }

    pub fn act_sparse(&self, v: &SparseVec, w: &SparseVec) -> Option<SparseVec> {
        let mut entries = Vec::new();
        for (m, cm) in v {
            for (a, ca) in w {
                let prod = self.act_basis(*m, *a)?;
                let c = cm.mul(ca);
                for (k, ck) in &prod {
                    entries.push((*k, ck.mul(&c)));
                }
            }
        }
        Some(sparse_normalize(entries))
    }

    pub fn t_apply(&self, v: &SparseVec) -> SparseVec {
        self.t_action.apply_sparse(v)
    }

    pub fn t_power(&self, v: &SparseVec, j: usize) -> SparseVec {
        let mut out = v.clone();
        for _ in 0..j {
            out = self.t_apply(&out);
        }
        out
    }

    pub fn diff_sparse(&self, v: &SparseVec) -> Option<SparseVec> {
        for (m, _) in v {
            if !self.space.window.contains(self.space.degree_of(*m) + 1) {
                return None;
            }
        }
        Some(self.diff.apply_sparse(v))
    }

    /// The underlying complex; errors when `d² != 0` (a genuinely curved
    /// module has no underlying complex).
    pub fn underlying_complex(&self) -> Result<crate::complex::Complex> {
        crate::complex::Complex::new(self.space.clone(), self.diff.clone())
    }
}

enum ActionSide {
    ModuleFirst,
    AlgebraFirst,
}

fn validate_action_table(
    table: &ActionTable,
    first: &GradedSpace,
    second: &GradedSpace,
    out: &GradedSpace,
    _side: ActionSide,
) -> Result<()> {
    for (&(i, j), v) in table {
        if i >= first.total_dim() || j >= second.total_dim() {
            return Err(Error::IndexOutOfRange("action table index".into()));
        }
        let deg = first.degree_of(i) + second.degree_of(j);
        if !out.window.contains(deg) {
            return Err(Error::IndexOutOfRange(
                "action entry escapes the module window".into(),
            ));
        }
        for (k, c) in v {
            if out.degree_of(*k) != deg {
                return Err(Error::ShapeMismatch("inhomogeneous action entry".into()));
            }
            if c.field() != out.field {
                return Err(Error::MixedFields(out.field, c.field()));
            }
        }
    }
    Ok(())
}

/// Validates the cdg module axioms, reporting every violated instance.
pub fn check_cdg_module(m: &CdgModule) -> ValidationReport {
    let mut rep = ValidationReport::new(format!(
        "cdg module over {} (dim {})",
        m.over.base,
        m.space.total_dim()
    ));
    if let Err(e) = m.validate_typing() {
        rep.violation("typing", "-", e.to_string());
        return rep;
    }
    let order = m.over.order();
    let field = m.field();

    // t^{n+1} = 0
    for d in m.space.degrees().collect::<Vec<_>>() {
        let mut pow = Matrix::identity(field, m.space.dim(d));
        for _ in 0..=order {
            pow = m.t_action.block(d).mul(&pow).expect("square blocks");
        }
        if !pow.is_zero() {
            rep.violation("t-nilpotence", format!("degree {d}"), "t^{n+1} != 0");
        }
    }
    // t commutes with d
    let td = m.t_action.compose(&m.diff);
    let dt = m.diff.compose(&m.t_action);
    if let (Ok(td), Ok(dt)) = (td, dt) {
        if td != dt {
            rep.violation("t-commutes-with-d", "-", "t∘d != d∘t");
        }
    }

    let mbasis: Vec<usize> = m.space.iter_flat().collect();
    let abasis: Vec<usize> = m.over.fiber.iter_flat().collect();

    // t commutes with the action
    for &mi in &mbasis {
        let tm = m.t_apply(&vec![(mi, field.one())]);
        for &ai in &abasis {
            let lhs = m.act_sparse(&tm, &vec![(ai, field.one())]);
            let rhs = m.act_basis(mi, ai).map(|v| m.t_apply(&v));
            match (lhs, rhs) {
                (Some(l), Some(r)) => {
                    if l != r {
                        rep.violation(
                            "t-commutes-with-action",
                            format!("({}, {})", m.space.label_of(mi), m.over.label(ai)),
                            "t(m)·a != t(m·a)",
                        );
                    }
                }
                _ => rep.unchecked(format!(
                    "t-action compatibility ({}, {})",
                    m.space.label_of(mi),
                    m.over.label(ai)
                )),
            }
        }
    }

    // unitality: m · (sum of units) = m
    for &mi in &mbasis {
        let mut acc: SparseVec = Vec::new();
        for &u in &m.over.units {
            if let Some(v) = m.act_basis(mi, u) {
                acc = sparse_add(&acc, &v);
            }
        }
        let expect = vec![(mi, field.one())];
        if acc != expect {
            rep.violation("unitality", m.space.label_of(mi), "m·1 != m");
        }
    }

    // associativity: (m·a)·b = sum_j t^j (m·mu_j(a,b))
    for &mi in &mbasis {
        let vm = vec![(mi, field.one())];
        for &ai in &abasis {
            for &bi in &abasis {
                if m.over.corner[ai].1 != m.over.corner[bi].0 {
                    continue;
                }
                let inner = m.act_basis(mi, ai);
                let lhs = inner
                    .as_ref()
                    .and_then(|v| m.act_sparse(v, &vec![(bi, field.one())]));
                let rhs = (0..=order).try_fold(Vec::new(), |acc, j| {
                    let ab = m.over.mul_basis(j, ai, bi)?;
                    let step = m.act_sparse(&vm, &ab)?;
                    Some(sparse_add(&acc, &m.t_power(&step, j)))
                });
                match (lhs, rhs) {
                    (Some(l), Some(r)) => {
                        if l != r {
                            rep.violation(
                                "associativity",
                                format!(
                                    "({}, {}, {})",
                                    m.space.label_of(mi),
                                    m.over.label(ai),
                                    m.over.label(bi)
                                ),
                                "(m·a)·b != m·(ab)",
                            );
                        }
                    }
                    _ => rep.unchecked(format!(
                        "associativity ({}, {}, {})",
                        m.space.label_of(mi),
                        m.over.label(ai),
                        m.over.label(bi)
                    )),
                }
            }
        }
    }

    // Leibniz: d(m·a) = d(m)·a + (-1)^{|m|} sum_j t^j (m·d_j(a))
    for &mi in &mbasis {
        let vm = vec![(mi, field.one())];
        let sign = Scalar::sign(field, m.space.degree_of(mi) as i64);
        for &ai in &abasis {
            let va = vec![(ai, field.one())];
            let lhs = m.act_basis(mi, ai).and_then(|v| m.diff_sparse(&v));
            let dm = m.diff_sparse(&vm);
            let dmb = dm.and_then(|v| m.act_sparse(&v, &va));
            let rest = (0..=order).try_fold(Vec::new(), |acc, j| {
                let da = m.over.diff_basis(j, ai)?;
                let step = m.act_sparse(&vm, &da)?;
                Some(sparse_add(&acc, &m.t_power(&step, j)))
            });
            match (lhs, dmb, rest) {
                (Some(l), Some(x), Some(y)) => {
                    let rhs = sparse_add(&x, &sparse_scale(&y, &sign));
                    if l != rhs {
                        rep.violation(
                            "Leibniz",
                            format!("({}, {})", m.space.label_of(mi), m.over.label(ai)),
                            "d(m·a) != d(m)·a + (-1)^{|m|} m·d(a)",
                        );
                    }
                }
                _ => rep.unchecked(format!(
                    "Leibniz ({}, {})",
                    m.space.label_of(mi),
                    m.over.label(ai)
                )),
            }
        }
    }

    // d²(m) = -sum_{j>=1} t^j (m · c_j)
    for &mi in &mbasis {
        let vm = vec![(mi, field.one())];
        let lhs = m.diff_sparse(&vm).and_then(|v| m.diff_sparse(&v));
        let rhs = (1..=order).try_fold(Vec::new(), |acc, j| {
            let step = m.act_sparse(&vm, m.over.curvature_component(j))?;
            Some(sparse_add(&acc, &m.t_power(&step, j)))
        });
        match (lhs, rhs) {
            (Some(l), Some(r)) => {
                let defect = sparse_add(&l, &r);
                if !defect.is_empty() {
                    rep.violation(
                        "d²=-mc",
                        m.space.label_of(mi),
                        format!("defect has {} term(s)", defect.len()),
                    );
                }
            }
            _ => rep.unchecked(format!("d²=-mc at {}", m.space.label_of(mi))),
        }
    }
    rep
}

/// Explicit graded-freeness witness: homogeneous module elements generating
/// a free module over the acting algebra.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeWitness {
    pub generators: Vec<SparseVec>,
}

/// Cdg bimodule between curved algebras over the same base.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CdgBimodule {
    pub left: CurvedAlgebra,
    pub right: CurvedAlgebra,
    pub space: GradedSpace,
    pub t_action: GradedMap,
    /// (left algebra index, module index) -> module vector; `a · m`.
    pub lact: ActionTable,
    /// (module index, right algebra index) -> module vector; `m · b`.
    pub ract: ActionTable,
    pub diff: GradedMap,
    /// (left-object, right-object) pair per module basis element; needed by
    /// the arrow construction when either side has several objects.
    pub corner: Vec<(usize, usize)>,
    pub free_left: Option<FreeWitness>,
    pub free_right: Option<FreeWitness>,
}

impl CdgBimodule {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        left: CurvedAlgebra,
        right: CurvedAlgebra,
        space: GradedSpace,
        t_action: GradedMap,
        lact: ActionTable,
        ract: ActionTable,
        diff: GradedMap,
        corner: Vec<(usize, usize)>,
    ) -> Result<Self> {
        let b = CdgBimodule {
            left,
            right,
            space,
            t_action,
            lact,
            ract,
            diff,
            corner,
            free_left: None,
            free_right: None,
        };
        b.validate_typing()?;
        Ok(b)
    }

    pub fn validate_typing(&self) -> Result<()> {
        if self.left.base != self.right.base {
            return Err(Error::ShapeMismatch("bimodule sides over different bases".into()));
        }
        if self.t_action.shift != 0 || self.diff.shift != 1 {
            return Err(Error::ShapeMismatch("bimodule structure map shifts".into()));
        }
        if self.corner.len() != self.space.total_dim() {
            return Err(Error::ShapeMismatch("bimodule corner table length".into()));
        }
        validate_action_table(
            &self.lact,
            &self.left.fiber,
            &self.space,
            &self.space,
            ActionSide::AlgebraFirst,
        )?;
        validate_action_table(
            &self.ract,
            &self.space,
            &self.right.fiber,
            &self.space,
            ActionSide::ModuleFirst,
        )
    }

    pub fn field(&self) -> FieldSpec {
        self.space.field
    }

    pub fn order(&self) -> usize {
        self.left.order()
    }

    pub fn lact_basis(&self, a: usize, m: usize) -> Option<SparseVec> {
        if self.left.corner[a].1 != self.corner[m].0 {
            return Some(Vec::new());
        }
        let deg = self.left.degree(a) + self.space.degree_of(m);
        if !self.space.window.contains(deg) {
            return None;
        }
        Some(self.lact.get(&(a, m)).cloned().unwrap_or_default())
    }

    pub fn ract_basis(&self, m: usize, b: usize) -> Option<SparseVec> {
        if self.corner[m].1 != self.right.corner[b].0 {
            return Some(Vec::new());
        }
        let deg = self.space.degree_of(m) + self.right.degree(b);
        if !self.space.window.contains(deg) {
            return None;
        }
        Some(self.ract.get(&(m, b)).cloned().unwrap_or_default())
    }

    pub fn lact_sparse(&self, v: &SparseVec, w: &SparseVec) -> Option<SparseVec> {
        let mut entries = Vec::new();
        for (a, ca) in v {
            for (m, cm) in w {
                let prod = self.lact_basis(*a, *m)?;
                let c = ca.mul(cm);
                for (k, ck) in &prod {
                    entries.push((*k, ck.mul(&c)));
                }
            }
        }
        Some(sparse_normalize(entries))
    }

    pub fn ract_sparse(&self, v: &SparseVec, w: &SparseVec) -> Option<SparseVec> {
        let mut entries = Vec::new();
        for (m, cm) in v {
            for (b, cb) in w {
                let prod = self.ract_basis(*m, *b)?;
                let c = cm.mul(cb);
                for (k, ck) in &prod {
                    entries.push((*k, ck.mul(&c)));
                }
            }
        }
        Some(sparse_normalize(entries))
    }

    pub fn t_apply(&self, v: &SparseVec) -> SparseVec {
        self.t_action.apply_sparse(v)
    }

    pub fn t_power(&self, v: &SparseVec, j: usize) -> SparseVec {
        let mut out = v.clone();
        for _ in 0..j {
            out = self.t_apply(&out);
        }
        out
    }

    pub fn diff_sparse(&self, v: &SparseVec) -> Option<SparseVec> {
        for (m, _) in v {
            if !self.space.window.contains(self.space.degree_of(*m) + 1) {
                return None;
            }
        }
        Some(self.diff.apply_sparse(v))
    }

    /// The regular bimodule `A` over itself, expanded over the base.
    pub fn regular(a: &CurvedAlgebra) -> Result<CdgBimodule> {
        CurvedBimodule::regular(a).expand()
    }

    /// Reduction `Z ⊗ k[t]/(t^{i+1})`: quotient by `t^{i+1} Z`.
    pub fn reduce(&self, i: usize) -> Result<CdgBimodule> {
        if i > self.order() {
            return Err(Error::OrderOutOfRange(i, self.order()));
        }
        let field = self.field();
        // quotient chart per degree
        let mut charts: BTreeMap<i32, (Vec<usize>, Matrix)> = BTreeMap::new();
        let mut labels: BTreeMap<i32, Vec<String>> = BTreeMap::new();
        for d in self.space.degrees().collect::<Vec<_>>() {
            let mut tpow = Matrix::identity(field, self.space.dim(d));
            for _ in 0..=i {
                tpow = self.t_action.block(d).mul(&tpow)?;
            }
            let img = tpow.image();
            let (complement, proj) = img.quotient_complement()?;
            let ls: Vec<String> = complement
                .iter()
                .map(|&k| self.space.labels(d)[k].clone())
                .collect();
            if !ls.is_empty() {
                labels.insert(d, ls);
            }
            charts.insert(d, (complement, proj));
        }
        let space = GradedSpace::new(field, self.space.window, labels)?;
        let project = |v: &SparseVec| -> SparseVec {
            let mut entries = Vec::new();
            for (idx, c) in v {
                let (d, off) = self.space.unflat(*idx);
                let (_, proj) = &charts[&d];
                if space.dim(d) == 0 {
                    continue;
                }
                for r in 0..proj.rows() {
                    let a = &proj[(r, off)];
                    if !a.is_zero() {
                        entries.push((space.flat(d, r), a.mul(c)));
                    }
                }
            }
            sparse_normalize(entries)
        };
        let lift = |idx: usize| -> SparseVec {
            let (d, off) = space.unflat(idx);
            let (complement, _) = &charts[&d];
            vec![(self.space.flat(d, complement[off]), field.one())]
        };
        let mut t_action = GradedMap::zero(&space, &space, 0);
        let mut diff = GradedMap::zero(&space, &space, 1);
        let mut corner = Vec::new();
        for idx in space.iter_flat() {
            let (d, off) = space.unflat(idx);
            let (complement, _) = &charts[&d];
            corner.push(self.corner[self.space.flat(d, complement[off])]);
        }
        for d in space.degrees().collect::<Vec<_>>() {
            let n = space.dim(d);
            let mut tm = Matrix::zeros(field, n, n);
            for colj in 0..n {
                let v = lift(space.flat(d, colj));
                let img = project(&self.t_apply(&v));
                for (k, c) in img {
                    let (dd, r) = space.unflat(k);
                    debug_assert_eq!(dd, d);
                    tm[(r, colj)] = c;
                }
            }
            t_action.set_block(d, tm)?;
            if space.window.contains(d + 1) && space.dim(d + 1) > 0 {
                let mut dm = Matrix::zeros(field, space.dim(d + 1), n);
                for colj in 0..n {
                    let v = lift(space.flat(d, colj));
                    let img = project(&self.diff.apply_sparse(&v));
                    for (k, c) in img {
                        let (_, r) = space.unflat(k);
                        dm[(r, colj)] = c;
                    }
                }
                diff.set_block(d, dm)?;
            }
        }
        let mut lact = ActionTable::new();
        let mut ract = ActionTable::new();
        for idx in space.iter_flat() {
            let v = lift(idx);
            for a in self.left.fiber.iter_flat() {
                if let Some(av) = self.lact_sparse(&vec![(a, field.one())], &v) {
                    let img = project(&av);
                    if !img.is_empty() {
                        lact.insert((a, idx), img);
                    }
                }
            }
            for b in self.right.fiber.iter_flat() {
                if let Some(vb) = self.ract_sparse(&v, &vec![(b, field.one())]) {
                    let img = project(&vb);
                    if !img.is_empty() {
                        ract.insert((idx, b), img);
                    }
                }
            }
        }
        CdgBimodule::new(
            self.left.reduce(i)?,
            self.right.reduce(i)?,
            space,
            t_action,
            lact,
            ract,
            diff,
            corner,
        )
    }
}

/// Validates cdg bimodule axioms (and the graded-freeness witnesses when
/// flags are set).
pub fn check_cdg_bimodule(z: &CdgBimodule) -> ValidationReport {
    let mut rep = ValidationReport::new(format!(
        "cdg bimodule over ({}, {}) (dim {})",
        z.left.base,
        z.right.base,
        z.space.total_dim()
    ));
    if let Err(e) = z.validate_typing() {
        rep.violation("typing", "-", e.to_string());
        return rep;
    }
    let order = z.order();
    let field = z.field();
    let mbasis: Vec<usize> = z.space.iter_flat().collect();
    let labasis: Vec<usize> = z.left.fiber.iter_flat().collect();
    let rbasis: Vec<usize> = z.right.fiber.iter_flat().collect();

    for d in z.space.degrees().collect::<Vec<_>>() {
        let mut pow = Matrix::identity(field, z.space.dim(d));
        for _ in 0..=order {
            pow = z.t_action.block(d).mul(&pow).expect("square blocks");
        }
        if !pow.is_zero() {
            rep.violation("t-nilpotence", format!("degree {d}"), "t^{n+1} != 0");
        }
    }
    if let (Ok(td), Ok(dt)) = (z.t_action.compose(&z.diff), z.diff.compose(&z.t_action)) {
        if td != dt {
            rep.violation("t-commutes-with-d", "-", "t∘d != d∘t");
        }
    }

    // unitality
    for &mi in &mbasis {
        let mut lacc: SparseVec = Vec::new();
        for &u in &z.left.units {
            if let Some(v) = z.lact_basis(u, mi) {
                lacc = sparse_add(&lacc, &v);
            }
        }
        let mut racc: SparseVec = Vec::new();
        for &u in &z.right.units {
            if let Some(v) = z.ract_basis(mi, u) {
                racc = sparse_add(&racc, &v);
            }
        }
        let expect = vec![(mi, field.one())];
        if lacc != expect {
            rep.violation("unitality", z.space.label_of(mi), "1·m != m");
        }
        if racc != expect {
            rep.violation("unitality", z.space.label_of(mi), "m·1 != m");
        }
    }

    // t commutes with both actions
    for &mi in &mbasis {
        let vm = vec![(mi, field.one())];
        let tm = z.t_apply(&vm);
        for &ai in &labasis {
            let va = vec![(ai, field.one())];
            match (z.lact_sparse(&va, &tm), z.lact_sparse(&va, &vm).map(|v| z.t_apply(&v))) {
                (Some(l), Some(r)) if l != r => {
                    rep.violation("t-commutes-with-lact", z.space.label_of(mi), "a·t(m) != t(a·m)");
                }
                (Some(_), Some(_)) => {}
                _ => rep.unchecked(format!("t/lact at {}", z.space.label_of(mi))),
            }
        }
        for &bi in &rbasis {
            let vb = vec![(bi, field.one())];
            match (z.ract_sparse(&tm, &vb), z.ract_sparse(&vm, &vb).map(|v| z.t_apply(&v))) {
                (Some(l), Some(r)) if l != r => {
                    rep.violation("t-commutes-with-ract", z.space.label_of(mi), "t(m)·b != t(m·b)");
                }
                (Some(_), Some(_)) => {}
                _ => rep.unchecked(format!("t/ract at {}", z.space.label_of(mi))),
            }
        }
    }

    // associativity: left, right, middle
    for &mi in &mbasis {
        let vm = vec![(mi, field.one())];
        for &a1 in &labasis {
            for &a2 in &labasis {
                if z.left.corner[a1].1 != z.left.corner[a2].0 {
                    continue;
                }
                let lhs = z
                    .lact_basis(a2, mi)
                    .and_then(|v| z.lact_sparse(&vec![(a1, field.one())], &v));
                let rhs = (0..=order).try_fold(Vec::new(), |acc, j| {
                    let aa = z.left.mul_basis(j, a1, a2)?;
                    let step = z.lact_sparse(&aa, &vm)?;
                    Some(sparse_add(&acc, &z.t_power(&step, j)))
                });
                match (lhs, rhs) {
                    (Some(l), Some(r)) if l != r => rep.violation(
                        "left-associativity",
                        format!("({}, {}, {})", z.left.label(a1), z.left.label(a2), z.space.label_of(mi)),
                        "a·(a'·m) != (aa')·m",
                    ),
                    (Some(_), Some(_)) => {}
                    _ => rep.unchecked(format!(
                        "left-associativity ({}, {}, {})",
                        z.left.label(a1),
                        z.left.label(a2),
                        z.space.label_of(mi)
                    )),
                }
            }
        }
        for &b1 in &rbasis {
            for &b2 in &rbasis {
                if z.right.corner[b1].1 != z.right.corner[b2].0 {
                    continue;
                }
                let lhs = z
                    .ract_basis(mi, b1)
                    .and_then(|v| z.ract_sparse(&v, &vec![(b2, field.one())]));
                let rhs = (0..=order).try_fold(Vec::new(), |acc, j| {
                    let bb = z.right.mul_basis(j, b1, b2)?;
                    let step = z.ract_sparse(&vm, &bb)?;
                    Some(sparse_add(&acc, &z.t_power(&step, j)))
                });
                match (lhs, rhs) {
                    (Some(l), Some(r)) if l != r => rep.violation(
                        "right-associativity",
                        format!("({}, {}, {})", z.space.label_of(mi), z.right.label(b1), z.right.label(b2)),
                        "(m·b)·b' != m·(bb')",
                    ),
                    (Some(_), Some(_)) => {}
                    _ => rep.unchecked(format!(
                        "right-associativity ({}, {}, {})",
                        z.space.label_of(mi),
                        z.right.label(b1),
                        z.right.label(b2)
                    )),
                }
            }
        }
        for &ai in &labasis {
            for &bi in &rbasis {
                let va = vec![(ai, field.one())];
                let vb = vec![(bi, field.one())];
                let lhs = z.lact_sparse(&va, &vm).and_then(|v| z.ract_sparse(&v, &vb));
                let rhs = z.ract_sparse(&vm, &vb).and_then(|v| z.lact_sparse(&va, &v));
                match (lhs, rhs) {
                    (Some(l), Some(r)) if l != r => rep.violation(
                        "middle-associativity",
                        format!("({}, {}, {})", z.left.label(ai), z.space.label_of(mi), z.right.label(bi)),
                        "(a·m)·b != a·(m·b)",
                    ),
                    (Some(_), Some(_)) => {}
                    _ => rep.unchecked(format!(
                        "middle-associativity ({}, {}, {})",
                        z.left.label(ai),
                        z.space.label_of(mi),
                        z.right.label(bi)
                    )),
                }
            }
        }
    }

    // Leibniz on both sides
    for &mi in &mbasis {
        let vm = vec![(mi, field.one())];
        let dm = z.diff_sparse(&vm);
        for &ai in &labasis {
            let va = vec![(ai, field.one())];
            let sign = Scalar::sign(field, z.left.degree(ai) as i64);
            let lhs = z.lact_sparse(&va, &vm).and_then(|v| z.diff_sparse(&v));
            let da_m = (0..=order).try_fold(Vec::new(), |acc, j| {
                let da = z.left.diff_basis(j, ai)?;
                let step = z.lact_sparse(&da, &vm)?;
                Some(sparse_add(&acc, &z.t_power(&step, j)))
            });
            let a_dm = dm.as_ref().and_then(|v| z.lact_sparse(&va, v));
            match (lhs, da_m, a_dm) {
                (Some(l), Some(x), Some(y)) => {
                    let rhs = sparse_add(&x, &sparse_scale(&y, &sign));
                    if l != rhs {
                        rep.violation(
                            "Leibniz-left",
                            format!("({}, {})", z.left.label(ai), z.space.label_of(mi)),
                            "d(a·m) != d(a)·m + (-1)^{|a|} a·d(m)",
                        );
                    }
                }
                _ => rep.unchecked(format!(
                    "Leibniz-left ({}, {})",
                    z.left.label(ai),
                    z.space.label_of(mi)
                )),
            }
        }
        let sign_m = Scalar::sign(field, z.space.degree_of(mi) as i64);
        for &bi in &rbasis {
            let vb = vec![(bi, field.one())];
            let lhs = z.ract_sparse(&vm, &vb).and_then(|v| z.diff_sparse(&v));
            let dm_b = dm.as_ref().and_then(|v| z.ract_sparse(v, &vb));
            let m_db = (0..=order).try_fold(Vec::new(), |acc, j| {
                let db = z.right.diff_basis(j, bi)?;
                let step = z.ract_sparse(&vm, &db)?;
                Some(sparse_add(&acc, &z.t_power(&step, j)))
            });
            match (lhs, dm_b, m_db) {
                (Some(l), Some(x), Some(y)) => {
                    let rhs = sparse_add(&x, &sparse_scale(&y, &sign_m));
                    if l != rhs {
                        rep.violation(
                            "Leibniz-right",
                            format!("({}, {})", z.space.label_of(mi), z.right.label(bi)),
                            "d(m·b) != d(m)·b + (-1)^{|m|} m·d(b)",
                        );
                    }
                }
                _ => rep.unchecked(format!(
                    "Leibniz-right ({}, {})",
                    z.space.label_of(mi),
                    z.right.label(bi)
                )),
            }
        }
    }

    // d²(m) = c_A·m - m·c_B
    for &mi in &mbasis {
        let vm = vec![(mi, field.one())];
        let lhs = z.diff_sparse(&vm).and_then(|v| z.diff_sparse(&v));
        let rhs = (1..=order).try_fold(Vec::new(), |acc, j| {
            let cm = z.lact_sparse(z.left.curvature_component(j), &vm)?;
            let mc = z.ract_sparse(&vm, z.right.curvature_component(j))?;
            let step = sparse_add(&cm, &sparse_scale(&mc, &field.one().neg()));
            Some(sparse_add(&acc, &z.t_power(&step, j)))
        });
        match (lhs, rhs) {
            (Some(l), Some(r)) => {
                let defect = sparse_add(&l, &sparse_scale(&r, &field.one().neg()));
                if !defect.is_empty() {
                    rep.violation(
                        "d²=c·m-m·c",
                        z.space.label_of(mi),
                        format!("defect has {} term(s)", defect.len()),
                    );
                }
            }
            _ => rep.unchecked(format!("d²=c·m-m·c at {}", z.space.label_of(mi))),
        }
    }

    // freeness witnesses
    if let Some(w) = &z.free_left {
        merge_freeness(&mut rep, verify_freeness(z, w, Side::Left), "graded-free-left");
    }
    if let Some(w) = &z.free_right {
        merge_freeness(&mut rep, verify_freeness(z, w, Side::Right), "graded-free-right");
    }
    rep
}

enum Side {
    Left,
    Right,
}

fn merge_freeness(rep: &mut ValidationReport, result: Result<Vec<String>>, tag: &str) {
    match result {
        Ok(unchecked) => {
            for u in unchecked {
                rep.unchecked(format!("{tag}: {u}"));
            }
        }
        Err(e) => rep.violation(tag, "-", e.to_string()),
    }
}

/// Verifies a graded-freeness witness degreewise: the map sending
/// (generator, algebra basis element, t-power) to its action value must be
/// bijective in every checkable degree. Returns the degrees the window makes
/// uncheckable.
fn verify_freeness(z: &CdgBimodule, w: &FreeWitness, side: Side) -> Result<Vec<String>> {
    let field = z.field();
    let alg = match side {
        Side::Left => &z.left,
        Side::Right => &z.right,
    };
    let order = z.order();
    let mut unchecked = Vec::new();
    // homogeneous generators
    let mut gen_degrees = Vec::new();
    for (gi, g) in w.generators.iter().enumerate() {
        let mut deg = None;
        for (idx, _) in g {
            let d = z.space.degree_of(*idx);
            if *deg.get_or_insert(d) != d {
                return Err(Error::ShapeMismatch(format!(
                    "witness generator {gi} is not homogeneous"
                )));
            }
        }
        gen_degrees.push(deg.ok_or_else(|| {
            Error::ShapeMismatch(format!("witness generator {gi} is zero"))
        })?);
    }
    for d in z.space.window.iter() {
        let mut cols: Vec<SparseVec> = Vec::new();
        let mut checkable = true;
        for (g, &gd) in w.generators.iter().zip(&gen_degrees) {
            let ad = d - gd;
            if !alg.fiber.window.contains(ad) {
                checkable = false;
                break;
            }
            for a in 0..alg.fiber.total_dim() {
                if alg.degree(a) != ad {
                    continue;
                }
                let va = vec![(a, field.one())];
                let acted = match side {
                    Side::Left => z.lact_sparse(&va, g),
                    Side::Right => z.ract_sparse(g, &va),
                };
                let Some(acted) = acted else {
                    checkable = false;
                    break;
                };
                for j in 0..=order {
                    cols.push(z.t_power(&acted, j));
                }
            }
            if !checkable {
                break;
            }
        }
        if !checkable {
            unchecked.push(format!("degree {d}"));
            continue;
        }
        let rows = z.space.dim(d);
        if rows == 0 && cols.is_empty() {
            continue;
        }
        let mut m = Matrix::zeros(field, rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            for (idx, c) in col {
                let (dd, r) = z.space.unflat(*idx);
                if dd != d {
                    return Err(Error::ShapeMismatch("freeness column degree".into()));
                }
                m[(r, j)] = c.clone();
            }
        }
        if m.rows() != m.cols() || m.inverse()?.is_none() {
            return Err(Error::Validation(format!(
                "freeness witness fails at degree {d}: map is {}x{} of rank {}",
                m.rows(),
                m.cols(),
                m.rank()
            )));
        }
    }
    Ok(unchecked)
}

/// Right module over a curved algebra in free frame: `k`-fiber with
/// `t^j`-component arrays for the action and the differential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvedModule {
    pub over: CurvedAlgebra,
    pub fiber: GradedSpace,
    /// `act[j]`: (module fiber index, algebra fiber index) -> module vector.
    pub act: Vec<ActionTable>,
    pub diff: Vec<GradedMap>,
}

impl CurvedModule {
    pub fn expand(&self) -> Result<CdgModule> {
        let order = self.over.order();
        let (space, embed) = expand_space(&self.fiber, order)?;
        let field = self.fiber.field;
        let t_action = expand_t_action(&self.fiber, &space, &embed, order);
        let mut action = ActionTable::new();
        for j in 0..=order {
            for (&(m, a), v) in &self.act[j] {
                for layer in 0..=order {
                    if layer + j > order {
                        continue;
                    }
                    let src = embed(layer, m);
                    let img: SparseVec = v.iter().map(|(k, c)| (embed(layer + j, *k), c.clone())).collect();
                    let entry = action.entry((src, a)).or_insert_with(Vec::new);
                    *entry = sparse_add(entry, &sparse_normalize(img));
                }
            }
        }
        action.retain(|_, v| !v.is_empty());
        let mut diff = GradedMap::zero(&space, &space, 1);
        expand_diff(&self.fiber, &space, &embed, &self.diff, order, &mut diff, field)?;
        CdgModule::new(self.over.clone(), space, t_action, action, diff)
    }
}

/// Bimodule in free frame between curved algebras over one base.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvedBimodule {
    pub left: CurvedAlgebra,
    pub right: CurvedAlgebra,
    pub fiber: GradedSpace,
    /// (left-object, right-object) per fiber basis element.
    pub corner: Vec<(usize, usize)>,
    pub lact: Vec<ActionTable>,
    pub ract: Vec<ActionTable>,
    pub diff: Vec<GradedMap>,
}

impl CurvedBimodule {
    pub fn order(&self) -> usize {
        self.left.order()
    }

    pub fn field(&self) -> FieldSpec {
        self.fiber.field
    }

    /// The regular bimodule: `A` over itself in free frame.
    pub fn regular(a: &CurvedAlgebra) -> CurvedBimodule {
        let order = a.order();
        let mut lact = Vec::with_capacity(order + 1);
        let mut ract = Vec::with_capacity(order + 1);
        for j in 0..=order {
            let mut l = ActionTable::new();
            let mut r = ActionTable::new();
            for (&(x, y), v) in &a.mult[j] {
                l.insert((x, y), v.clone());
                r.insert((x, y), v.clone());
            }
            lact.push(l);
            ract.push(r);
        }
        CurvedBimodule {
            left: a.clone(),
            right: a.clone(),
            fiber: a.fiber.clone(),
            corner: a.corner.clone(),
            lact,
            ract,
            diff: a.diff.clone(),
        }
    }

    /// A dg bimodule (order-0 sides) viewed in free frame.
    pub fn from_dg(x: &CdgBimodule) -> Result<CurvedBimodule> {
        if x.order() != 0 {
            return Err(Error::OrderOutOfRange(x.order(), 0));
        }
        let mut lact = ActionTable::new();
        for (&(a, m), v) in &x.lact {
            lact.insert((a, m), v.clone());
        }
        let mut ract = ActionTable::new();
        for (&(m, b), v) in &x.ract {
            ract.insert((m, b), v.clone());
        }
        Ok(CurvedBimodule {
            left: x.left.clone(),
            right: x.right.clone(),
            fiber: x.space.clone(),
            corner: x.corner.clone(),
            lact: vec![lact],
            ract: vec![ract],
            diff: vec![x.diff.clone()],
        })
    }

    /// Expansion to the general presentation, with the tensor basis recorded
    /// as graded-freeness witnesses on both sides when the corresponding
    /// action is free on it (always true for expanded regular bimodules and
    /// rectified bar output; verified by the checker, not assumed here).
    pub fn expand(&self) -> Result<CdgBimodule> {
        let order = self.order();
        let (space, embed) = expand_space(&self.fiber, order)?;
        let field = self.field();
        let t_action = expand_t_action(&self.fiber, &space, &embed, order);
        let mut lact = ActionTable::new();
        let mut ract = ActionTable::new();
        for j in 0..=order {
            for (&(a, m), v) in &self.lact[j] {
                for layer in 0..=order {
                    if layer + j > order {
                        continue;
                    }
                    let src = embed(layer, m);
                    let img: SparseVec = v.iter().map(|(k, c)| (embed(layer + j, *k), c.clone())).collect();
                    let entry = lact.entry((a, src)).or_insert_with(Vec::new);
                    *entry = sparse_add(entry, &sparse_normalize(img));
                }
            }
            for (&(m, b), v) in &self.ract[j] {
                for layer in 0..=order {
                    if layer + j > order {
                        continue;
                    }
                    let src = embed(layer, m);
                    let img: SparseVec = v.iter().map(|(k, c)| (embed(layer + j, *k), c.clone())).collect();
                    let entry = ract.entry((src, b)).or_insert_with(Vec::new);
                    *entry = sparse_add(entry, &sparse_normalize(img));
                }
            }
        }
        lact.retain(|_, v| !v.is_empty());
        ract.retain(|_, v| !v.is_empty());
        let mut diff = GradedMap::zero(&space, &space, 1);
        expand_diff(&self.fiber, &space, &embed, &self.diff, order, &mut diff, field)?;
        let mut corner = Vec::with_capacity(space.total_dim());
        for idx in space.iter_flat() {
            let (d, off) = space.unflat(idx);
            let per = self.fiber.dim(d);
            corner.push(self.corner[self.fiber.flat(d, off % per)]);
        }
        CdgBimodule::new(
            self.left.clone(),
            self.right.clone(),
            space,
            t_action,
            lact,
            ract,
            diff,
            corner,
        )
    }
}

/// Expanded space `fiber ⊗ k[t]/(t^{order+1})`: per degree, `order+1` copies
/// of the fiber ordered by t-power. Returns the space and the flat embedding
/// `(t-power, fiber index) -> expanded index`.
fn expand_space(
    fiber: &GradedSpace,
    order: usize,
) -> Result<(GradedSpace, impl Fn(usize, usize) -> usize + '_)> {
    let mut labels: BTreeMap<i32, Vec<String>> = BTreeMap::new();
    for d in fiber.degrees() {
        let mut l = Vec::new();
        for j in 0..=order {
            for name in fiber.labels(d) {
                l.push(match j {
                    0 => name.clone(),
                    1 => format!("t·{name}"),
                    _ => format!("t{j}·{name}"),
                });
            }
        }
        labels.insert(d, l);
    }
    let space = GradedSpace::new(fiber.field, fiber.window, labels)?;
    let sp = space.clone();
    let fib = fiber;
    let embed = move |j: usize, idx: usize| -> usize {
        let (d, off) = fib.unflat(idx);
        sp.flat(d, j * fib.dim(d) + off)
    };
    Ok((space, embed))
}

fn expand_t_action(
    fiber: &GradedSpace,
    space: &GradedSpace,
    embed: &impl Fn(usize, usize) -> usize,
    order: usize,
) -> GradedMap {
    let field = fiber.field;
    let mut t = GradedMap::zero(space, space, 0);
    for d in fiber.degrees().collect::<Vec<_>>() {
        let n = space.dim(d);
        let mut m = Matrix::zeros(field, n, n);
        for j in 0..order {
            for i in 0..fiber.dim(d) {
                let src = embed(j, fiber.flat(d, i));
                let dst = embed(j + 1, fiber.flat(d, i));
                let (_, c) = space.unflat(src);
                let (_, r) = space.unflat(dst);
                m[(r, c)] = field.one();
            }
        }
        if !m.is_zero() {
            t.set_block(d, m).expect("t block fits");
        }
    }
    t
}

#[allow(clippy::too_many_arguments)]
fn expand_diff(
    fiber: &GradedSpace,
    space: &GradedSpace,
    embed: &impl Fn(usize, usize) -> usize,
    diff: &[GradedMap],
    order: usize,
    out: &mut GradedMap,
    field: FieldSpec,
) -> Result<()> {
    for d in fiber.degrees().collect::<Vec<_>>() {
        if !space.window.contains(d + 1) || space.dim(d + 1) == 0 {
            continue;
        }
        let mut m = Matrix::zeros(field, space.dim(d + 1), space.dim(d));
        for j in 0..=order {
            let block = diff[j].block(d);
            for layer in 0..=order {
                if layer + j > order {
                    continue;
                }
                for c in 0..block.cols() {
                    for r in 0..block.rows() {
                        let v = &block[(r, c)];
                        if v.is_zero() {
                            continue;
                        }
                        let src = embed(layer, fiber.flat(d, c));
                        let dst = embed(layer + j, fiber.flat(d + 1, r));
                        let (_, ci) = space.unflat(src);
                        let (_, ri) = space.unflat(dst);
                        m[(ri, ci)] = m[(ri, ci)].add(v);
                    }
                }
            }
        }
        if !m.is_zero() {
            out.set_block(d, m)?;
        }
    }
    Ok(())
}
