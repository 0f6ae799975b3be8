//! Degree-windowed graded vector spaces and graded maps.
//!
//! Everything lives inside a user-declared degree window. A block of a graded
//! map that would land outside a window is simply absent; computations treat
//! absent blocks as zero while validity checkers report the affected
//! identities as unchecked instead of silently asserting them.

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Scalar};
use crate::matrix::{sparse_normalize, Matrix, SparseVec};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Inclusive degree interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub lo: i32,
    pub hi: i32,
}

impl Window {
    pub fn new(lo: i32, hi: i32) -> Result<Self> {
        if lo > hi {
            return Err(Error::BadWindow(lo, hi));
        }
        Ok(Window { lo, hi })
    }

    pub fn contains(&self, d: i32) -> bool {
        self.lo <= d && d <= self.hi
    }

    pub fn iter(&self) -> impl Iterator<Item = i32> {
        self.lo..=self.hi
    }

    pub fn width(&self) -> i32 {
        self.hi - self.lo
    }

    /// Distance of a degree from the nearest window boundary.
    pub fn boundary_distance(&self, d: i32) -> i32 {
        (d - self.lo).min(self.hi - d)
    }

    pub fn shift(&self, s: i32) -> Window {
        Window {
            lo: self.lo + s,
            hi: self.hi + s,
        }
    }

    pub fn sum(&self, other: &Window) -> Window {
        Window {
            lo: self.lo + other.lo,
            hi: self.hi + other.hi,
        }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Finite-dimensional graded vector space supported inside a window, with
/// per-degree basis labels. Basis enumeration is lexicographic on
/// (degree, index within degree).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedSpace {
    pub field: FieldSpec,
    pub window: Window,
    labels: BTreeMap<i32, Vec<String>>,
    offsets: BTreeMap<i32, usize>,
    total: usize,
}

impl GradedSpace {
    pub fn new(field: FieldSpec, window: Window, labels: BTreeMap<i32, Vec<String>>) -> Result<Self> {
        for (&d, ls) in &labels {
            if !window.contains(d) {
                return Err(Error::IndexOutOfRange(format!(
                    "basis in degree {d} outside window {window}"
                )));
            }
            if ls.is_empty() {
                return Err(Error::ShapeMismatch(format!("empty label list in degree {d}")));
            }
        }
        let mut offsets = BTreeMap::new();
        let mut total = 0usize;
        for (&d, ls) in &labels {
            offsets.insert(d, total);
            total += ls.len();
        }
        Ok(GradedSpace {
            field,
            window,
            labels,
            offsets,
            total,
        })
    }

    pub fn empty(field: FieldSpec, window: Window) -> Self {
        GradedSpace {
            field,
            window,
            labels: BTreeMap::new(),
            offsets: BTreeMap::new(),
            total: 0,
        }
    }

    /// Space concentrated in one degree.
    pub fn concentrated(field: FieldSpec, window: Window, degree: i32, labels: Vec<String>) -> Result<Self> {
        let mut m = BTreeMap::new();
        if !labels.is_empty() {
            m.insert(degree, labels);
        }
        Self::new(field, window, m)
    }

    pub fn dim(&self, d: i32) -> usize {
        self.labels.get(&d).map_or(0, Vec::len)
    }

    pub fn total_dim(&self) -> usize {
        self.total
    }

    pub fn degrees(&self) -> impl Iterator<Item = i32> + '_ {
        self.labels.keys().copied()
    }

    pub fn labels(&self, d: i32) -> &[String] {
        self.labels.get(&d).map_or(&[], Vec::as_slice)
    }

    /// Flat index of basis element `i` in degree `d`.
    pub fn flat(&self, d: i32, i: usize) -> usize {
        self.offsets[&d] + i
    }

    /// Inverse of [`flat`](Self::flat): degree and index within degree.
    pub fn unflat(&self, idx: usize) -> (i32, usize) {
        let (&d, &off) = self
            .offsets
            .iter()
            .rev()
            .find(|(_, &off)| off <= idx)
            .expect("index in range");
        (d, idx - off)
    }

    pub fn degree_of(&self, idx: usize) -> i32 {
        self.unflat(idx).0
    }

    pub fn label_of(&self, idx: usize) -> &str {
        let (d, i) = self.unflat(idx);
        &self.labels[&d][i]
    }

    /// All flat indices, in lexicographic (degree, index) order.
    pub fn iter_flat(&self) -> impl Iterator<Item = usize> {
        0..self.total
    }

    /// Degreewise dimensions as a map (for reports).
    pub fn dims(&self) -> BTreeMap<i32, usize> {
        self.labels.iter().map(|(&d, l)| (d, l.len())).collect()
    }

    /// Direct sum, labels prefixed to stay unique.
    pub fn direct_sum(&self, other: &GradedSpace, left_tag: &str, right_tag: &str) -> Result<GradedSpace> {
        if self.field != other.field {
            return Err(Error::MixedFields(self.field, other.field));
        }
        if self.window != other.window {
            return Err(Error::WindowMismatch(format!(
                "direct sum of {} and {}",
                self.window, other.window
            )));
        }
        let mut labels: BTreeMap<i32, Vec<String>> = BTreeMap::new();
        for d in self.degrees() {
            let e = labels.entry(d).or_default();
            for l in self.labels(d) {
                e.push(format!("{left_tag}{l}"));
            }
        }
        for d in other.degrees() {
            let e = labels.entry(d).or_default();
            for l in other.labels(d) {
                e.push(format!("{right_tag}{l}"));
            }
        }
        GradedSpace::new(self.field, self.window, labels)
    }

    /// Degree shift: `(V[s])_d = V_{d+s}`, window shifted accordingly.
    pub fn shifted(&self, s: i32) -> GradedSpace {
        let labels = self
            .labels
            .iter()
            .map(|(&d, l)| (d - s, l.clone()))
            .collect();
        GradedSpace {
            field: self.field,
            window: self.window.shift(-s),
            labels,
            offsets: self
                .offsets
                .iter()
                .map(|(&d, &o)| (d - s, o))
                .collect(),
            total: self.total,
        }
    }
}

/// Map of graded spaces of a fixed degree `shift`: blocks indexed by source
/// degree `d` map `V_d -> W_{d+shift}`. Blocks are stored only where both
/// sides have nonzero dimension and both degrees lie in the windows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradedMap {
    pub source: GradedSpace,
    pub target: GradedSpace,
    pub shift: i32,
    blocks: BTreeMap<i32, Matrix>,
}

impl GradedMap {
    pub fn zero(source: &GradedSpace, target: &GradedSpace, shift: i32) -> Self {
        GradedMap {
            source: source.clone(),
            target: target.clone(),
            shift,
            blocks: BTreeMap::new(),
        }
    }

    pub fn identity(space: &GradedSpace) -> Self {
        let mut m = Self::zero(space, space, 0);
        for d in space.degrees() {
            m.blocks
                .insert(d, Matrix::identity(space.field, space.dim(d)));
        }
        m
    }

    pub fn new(source: &GradedSpace, target: &GradedSpace, shift: i32, blocks: BTreeMap<i32, Matrix>) -> Result<Self> {
        let mut map = Self::zero(source, target, shift);
        for (d, m) in blocks {
            map.set_block(d, m)?;
        }
        Ok(map)
    }

    pub fn set_block(&mut self, d: i32, m: Matrix) -> Result<()> {
        let td = d + self.shift;
        if !self.source.window.contains(d) || !self.target.window.contains(td) {
            return Err(Error::IndexOutOfRange(format!(
                "block at degree {d} outside windows"
            )));
        }
        if m.rows() != self.target.dim(td) || m.cols() != self.source.dim(d) {
            return Err(Error::ShapeMismatch(format!(
                "block at degree {d}: got {}x{}, want {}x{}",
                m.rows(),
                m.cols(),
                self.target.dim(td),
                self.source.dim(d)
            )));
        }
        if m.field() != self.source.field {
            return Err(Error::MixedFields(self.source.field, m.field()));
        }
        if m.rows() == 0 || m.cols() == 0 || m.is_zero() {
            self.blocks.remove(&d);
        } else {
            self.blocks.insert(d, m);
        }
        Ok(())
    }

    /// The block at source degree `d`, materializing zeros when absent.
    pub fn block(&self, d: i32) -> Matrix {
        match self.blocks.get(&d) {
            Some(m) => m.clone(),
            None => Matrix::zeros(
                self.source.field,
                if self.target.window.contains(d + self.shift) {
                    self.target.dim(d + self.shift)
                } else {
                    0
                },
                if self.source.window.contains(d) {
                    self.source.dim(d)
                } else {
                    0
                },
            ),
        }
    }

    pub fn block_ref(&self, d: i32) -> Option<&Matrix> {
        self.blocks.get(&d)
    }

    pub fn nonzero_degrees(&self) -> impl Iterator<Item = i32> + '_ {
        self.blocks.keys().copied()
    }

    /// Whether the target degree of block `d` lies inside the target window,
    /// i.e. the image of `V_d` is actually recorded.
    pub fn degree_in_range(&self, d: i32) -> bool {
        self.source.window.contains(d) && self.target.window.contains(d + self.shift)
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn add(&self, rhs: &GradedMap) -> Result<GradedMap> {
        if self.shift != rhs.shift || self.source != rhs.source || self.target != rhs.target {
            return Err(Error::ShapeMismatch("graded map addition".into()));
        }
        let mut out = Self::zero(&self.source, &self.target, self.shift);
        let degrees: std::collections::BTreeSet<i32> = self
            .blocks
            .keys()
            .chain(rhs.blocks.keys())
            .copied()
            .collect();
        for d in degrees {
            out.set_block(d, self.block(d).add(&rhs.block(d))?)?;
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Scalar) -> GradedMap {
        let mut out = Self::zero(&self.source, &self.target, self.shift);
        for (&d, m) in &self.blocks {
            out.set_block(d, m.scale(c)).expect("same shape");
        }
        out
    }

    pub fn sub(&self, rhs: &GradedMap) -> Result<GradedMap> {
        self.add(&rhs.scale(&self.source.field.one().neg()))
    }

    /// Composition `self ∘ rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &GradedMap) -> Result<GradedMap> {
        if rhs.target != self.source {
            return Err(Error::ShapeMismatch("graded map composition".into()));
        }
        let mut out = Self::zero(&rhs.source, &self.target, self.shift + rhs.shift);
        for (&d, m) in &rhs.blocks {
            let mid = d + rhs.shift;
            if let Some(m2) = self.blocks.get(&mid) {
                if out.degree_in_range(d) {
                    out.set_block(d, m2.mul(m)?)?;
                }
            }
        }
        Ok(out)
    }

    /// Applies the map to a flat sparse vector of the source space.
    pub fn apply_sparse(&self, v: &SparseVec) -> SparseVec {
        let mut entries: Vec<(usize, Scalar)> = Vec::new();
        for (idx, c) in v {
            let (d, i) = self.source.unflat(*idx);
            if let Some(m) = self.blocks.get(&d) {
                let td = d + self.shift;
                for r in 0..m.rows() {
                    let a = &m[(r, i)];
                    if !a.is_zero() {
                        entries.push((self.target.flat(td, r), a.mul(c)));
                    }
                }
            }
        }
        sparse_normalize(entries)
    }

    /// Restricts source and target to new spaces that must have the same
    /// degreewise dimensions inside a smaller window; blocks outside are
    /// dropped.
    pub fn clipped(&self, source: &GradedSpace, target: &GradedSpace) -> GradedMap {
        let mut out = Self::zero(source, target, self.shift);
        for (&d, m) in &self.blocks {
            if source.window.contains(d)
                && target.window.contains(d + self.shift)
                && source.dim(d) == m.cols()
                && target.dim(d + self.shift) == m.rows()
            {
                out.set_block(d, m.clone()).expect("checked dims");
            }
        }
        out
    }
}

/// Tensor product of graded spaces. With `result: None` the natural window
/// (sum of the factors' windows) is used and nothing is clipped; declaring a
/// window clips degreewise.
pub fn tensor_space(v: &GradedSpace, w: &GradedSpace, result: Option<Window>) -> Result<GradedSpace> {
    if v.field != w.field {
        return Err(Error::MixedFields(v.field, w.field));
    }
    let window = match result {
        Some(win) => win,
        None => v.window.sum(&w.window),
    };
    let mut labels: BTreeMap<i32, Vec<String>> = BTreeMap::new();
    for a in v.degrees() {
        for b in w.degrees() {
            let d = a + b;
            if !window.contains(d) {
                continue;
            }
            let e = labels.entry(d).or_default();
            for la in v.labels(a) {
                for lb in w.labels(b) {
                    e.push(format!("{la}⊗{lb}"));
                }
            }
        }
    }
    // Re-sort each degree by (first factor degree, first index, second index):
    // the double loop above goes by (a, la, lb) for fixed d already in that
    // order because degrees iterate ascending. Nothing further to do.
    GradedSpace::new(v.field, window, labels)
}

/// Flat index bookkeeping for tensor products: enumerates basis pairs of
/// degree `d` in the same (a, i, j) order used by [`tensor_space`].
pub fn tensor_pairs(v: &GradedSpace, w: &GradedSpace, d: i32) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in v.degrees() {
        let b = d - a;
        if w.dim(b) == 0 {
            continue;
        }
        for i in 0..v.dim(a) {
            for j in 0..w.dim(b) {
                out.push((v.flat(a, i), w.flat(b, j)));
            }
        }
    }
    out
}

/// Tensor product of graded maps with the Koszul sign rule:
/// `(f ⊗ g)(x ⊗ y) = (-1)^{|g||x|} f(x) ⊗ g(y)`.
pub fn tensor_map(
    f: &GradedMap,
    g: &GradedMap,
    src_window: Option<Window>,
    tgt_window: Option<Window>,
) -> Result<GradedMap> {
    let source = tensor_space(&f.source, &g.source, src_window)?;
    let target = tensor_space(&f.target, &g.target, tgt_window)?;
    let shift = f.shift + g.shift;
    let field = source.field;
    let mut out = GradedMap::zero(&source, &target, shift);
    for d in source.degrees().collect::<Vec<_>>() {
        let td = d + shift;
        if !target.window.contains(td) {
            continue;
        }
        let pairs_src = tensor_pairs(&f.source, &g.source, d);
        let pairs_tgt = tensor_pairs(&f.target, &g.target, td);
        if pairs_src.is_empty() || pairs_tgt.is_empty() {
            continue;
        }
        let tgt_index: std::collections::HashMap<(usize, usize), usize> = pairs_tgt
            .iter()
            .enumerate()
            .map(|(k, &p)| (p, k))
            .collect();
        let mut m = Matrix::zeros(field, pairs_tgt.len(), pairs_src.len());
        for (col, &(xi, yj)) in pairs_src.iter().enumerate() {
            let (xd, xoff) = f.source.unflat(xi);
            let (yd, yoff) = g.source.unflat(yj);
            let sign = Scalar::sign(field, (g.shift as i64) * (xd as i64));
            let fb = match f.block_ref(xd) {
                Some(b) => b,
                None => continue,
            };
            let gb = match g.block_ref(yd) {
                Some(b) => b,
                None => continue,
            };
            for r1 in 0..fb.rows() {
                let c1 = &fb[(r1, xoff)];
                if c1.is_zero() {
                    continue;
                }
                for r2 in 0..gb.rows() {
                    let c2 = &gb[(r2, yoff)];
                    if c2.is_zero() {
                        continue;
                    }
                    let ti = f.target.flat(xd + f.shift, r1);
                    let tj = g.target.flat(yd + g.shift, r2);
                    if let Some(&row) = tgt_index.get(&(ti, tj)) {
                        let val = sign.mul(&c1.mul(c2));
                        m[(row, col)] = m[(row, col)].add(&val);
                    }
                }
            }
        }
        out.set_block(d, m)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(field: FieldSpec, window: Window, dims: &[(i32, usize)]) -> GradedSpace {
        let labels = dims
            .iter()
            .map(|&(d, n)| (d, (0..n).map(|i| format!("e{d}_{i}")).collect()))
            .collect();
        GradedSpace::new(field, window, labels).unwrap()
    }

    #[test]
    fn flat_roundtrip() {
        let f = FieldSpec::Prime(7);
        let v = space(f, Window::new(-1, 2).unwrap(), &[(-1, 2), (1, 3)]);
        assert_eq!(v.total_dim(), 5);
        for i in v.iter_flat() {
            let (d, k) = v.unflat(i);
            assert_eq!(v.flat(d, k), i);
        }
    }

    #[test]
    fn tensor_unit_object() {
        let f = FieldSpec::Prime(7);
        let w = Window::new(-2, 2).unwrap();
        let k = space(f, w, &[(0, 1)]);
        let v = space(f, w, &[(-1, 2), (1, 1)]);
        let t = tensor_space(&k, &v, Some(w)).unwrap();
        assert_eq!(t.dims(), v.dims());
    }

    #[test]
    fn tensor_degree_addition() {
        let f = FieldSpec::Rationals;
        let _w = Window::new(0, 2).unwrap();
        let v = space(f, Window::new(1, 1).unwrap(), &[(1, 1)]);
        let t = tensor_space(&v, &v, None).unwrap();
        assert_eq!(t.dim(2), 1);
        assert_eq!(t.total_dim(), 1);
    }

    #[test]
    fn koszul_interchange() {
        // (f⊗id)∘(id⊗g) = (-1)^{|f||g|} (id⊗g)∘(f⊗id) for odd-degree f, g
        let f = FieldSpec::Prime(32003);
        let w = Window::new(0, 4).unwrap();
        let v = space(f, w, &[(0, 2), (1, 2), (2, 2)]);
        let mk = |shift: i32, seed: u64| {
            let mut m = GradedMap::zero(&v, &v, shift);
            let mut s = seed;
            let mut next = || {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(99);
                ((s >> 40) % 11) as i64
            };
            for d in v.degrees().collect::<Vec<_>>() {
                if v.dim(d + shift) == 0 {
                    continue;
                }
                let rows: Vec<Vec<Scalar>> = (0..v.dim(d + shift))
                    .map(|_| (0..v.dim(d)).map(|_| f.from_i64(next())).collect())
                    .collect();
                m.set_block(d, Matrix::from_rows(f, rows).unwrap()).unwrap();
            }
            m
        };
        let fmap = mk(1, 5);
        let gmap = mk(1, 17);
        let id = GradedMap::identity(&v);
        let big = Window::new(0, 8).unwrap();
        let lhs = tensor_map(&fmap, &id, Some(big), Some(big))
            .unwrap()
            .compose(&tensor_map(&id, &gmap, Some(big), Some(big)).unwrap())
            .unwrap();
        let rhs = tensor_map(&id, &gmap, Some(big), Some(big))
            .unwrap()
            .compose(&tensor_map(&fmap, &id, Some(big), Some(big)).unwrap())
            .unwrap();
        // |f| = |g| = 1, so the interchange sign is -1
        assert_eq!(lhs, rhs.scale(&f.one().neg()));
        assert!(!lhs.is_zero());
    }
}
