//! The arrow category of a bimodule, realized as a triangular matrix
//! algebra on `A ⊕ X ⊕ B` with two families of distinguished idempotents.
//!
//! Multiplication is `(a, x, b)(a', x', b') = (aa', ax' + xb', bb')`;
//! composability is tracked through object corners, so the triangular shape
//! needs no special-casing. The inverse operations recover the diagonal
//! corner algebras and the off-diagonal bimodule from any algebra sharing
//! the layout, deformed or not.

use super::curved::{CurvedAlgebra, MultTable};
use super::modules::{ActionTable, CdgBimodule, CurvedBimodule};
use crate::error::{Error, Result};
use crate::graded::{GradedMap, GradedSpace};
use crate::matrix::{sparse_normalize, Matrix, SparseVec};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArrowSide {
    /// The left algebra of the bimodule (object block `0..left_objects`).
    Left,
    /// The right algebra (object block `left_objects..`).
    Right,
}

/// Builds the arrow algebra of a free-frame bimodule. All three windows must
/// agree. Returns the algebra; its first `x.left.objects` objects are the
/// left block.
pub fn arrow_algebra(x: &CurvedBimodule) -> Result<CurvedAlgebra> {
    let a = &x.left;
    let b = &x.right;
    if a.base != b.base {
        return Err(Error::ShapeMismatch("arrow algebra across bases".into()));
    }
    if a.window() != b.window() || a.window() != x.fiber.window {
        return Err(Error::WindowMismatch(
            "arrow algebra requires equal windows on A, X and B".into(),
        ));
    }
    let field = a.field();
    if field != b.field() || field != x.fiber.field {
        return Err(Error::MixedFields(field, b.field()));
    }
    let order = a.order();
    let left_objects = a.objects;
    let objects = a.objects + b.objects;

    // assemble the fiber: per degree A-part, X-part, B-part
    let mut labels: BTreeMap<i32, Vec<String>> = BTreeMap::new();
    for d in a.window().iter() {
        let mut l: Vec<String> = a.fiber.labels(d).iter().map(|s| format!("a:{s}")).collect();
        l.extend(x.fiber.labels(d).iter().map(|s| format!("x:{s}")));
        l.extend(b.fiber.labels(d).iter().map(|s| format!("b:{s}")));
        if !l.is_empty() {
            labels.insert(d, l);
        }
    }
    let fiber = GradedSpace::new(field, a.window(), labels)?;
    let map_a: Vec<usize> = a
        .fiber
        .iter_flat()
        .map(|i| {
            let (d, off) = a.fiber.unflat(i);
            fiber.flat(d, off)
        })
        .collect();
    let map_x: Vec<usize> = x
        .fiber
        .iter_flat()
        .map(|i| {
            let (d, off) = x.fiber.unflat(i);
            fiber.flat(d, a.fiber.dim(d) + off)
        })
        .collect();
    let map_b: Vec<usize> = b
        .fiber
        .iter_flat()
        .map(|i| {
            let (d, off) = b.fiber.unflat(i);
            fiber.flat(d, a.fiber.dim(d) + x.fiber.dim(d) + off)
        })
        .collect();

    let mut corner = vec![(0usize, 0usize); fiber.total_dim()];
    for (i, &t) in map_a.iter().enumerate() {
        corner[t] = a.corner[i];
    }
    for (i, &t) in map_x.iter().enumerate() {
        corner[t] = (x.corner[i].0, left_objects + x.corner[i].1);
    }
    for (i, &t) in map_b.iter().enumerate() {
        corner[t] = (left_objects + b.corner[i].0, left_objects + b.corner[i].1);
    }
    let mut units: Vec<usize> = a.units.iter().map(|&u| map_a[u]).collect();
    units.extend(b.units.iter().map(|&u| map_b[u]));

    let remap = |v: &SparseVec, map: &[usize]| -> SparseVec {
        sparse_normalize(v.iter().map(|(k, c)| (map[*k], c.clone())).collect())
    };

    let mut mult: Vec<MultTable> = vec![MultTable::new(); order + 1];
    for j in 0..=order {
        for (&(p, q), v) in &a.mult[j] {
            mult[j].insert((map_a[p], map_a[q]), remap(v, &map_a));
        }
        for (&(p, q), v) in &b.mult[j] {
            mult[j].insert((map_b[p], map_b[q]), remap(v, &map_b));
        }
        for (&(p, m), v) in &x.lact[j] {
            mult[j].insert((map_a[p], map_x[m]), remap(v, &map_x));
        }
        for (&(m, q), v) in &x.ract[j] {
            mult[j].insert((map_x[m], map_b[q]), remap(v, &map_x));
        }
    }

    let mut diff = Vec::with_capacity(order + 1);
    for j in 0..=order {
        let mut map = GradedMap::zero(&fiber, &fiber, 1);
        for d in fiber.degrees().collect::<Vec<_>>() {
            if !fiber.window.contains(d + 1) || fiber.dim(d + 1) == 0 {
                continue;
            }
            let mut m = Matrix::zeros(field, fiber.dim(d + 1), fiber.dim(d));
            let mut write = |block: &Matrix, src_map: &dyn Fn(usize) -> usize, tgt_map: &dyn Fn(usize) -> usize| {
                for c in 0..block.cols() {
                    for r in 0..block.rows() {
                        let v = &block[(r, c)];
                        if !v.is_zero() {
                            let (_, ci) = fiber.unflat(src_map(c));
                            let (_, ri) = fiber.unflat(tgt_map(r));
                            m[(ri, ci)] = v.clone();
                        }
                    }
                }
            };
            write(
                &a.diff[j].block(d),
                &|c| map_a[a.fiber.flat(d, c)],
                &|r| map_a[a.fiber.flat(d + 1, r)],
            );
            write(
                &x.diff[j].block(d),
                &|c| map_x[x.fiber.flat(d, c)],
                &|r| map_x[x.fiber.flat(d + 1, r)],
            );
            write(
                &b.diff[j].block(d),
                &|c| map_b[b.fiber.flat(d, c)],
                &|r| map_b[b.fiber.flat(d + 1, r)],
            );
            if !m.is_zero() {
                map.set_block(d, m)?;
            }
        }
        diff.push(map);
    }

    let mut curvature = Vec::with_capacity(order);
    for j in 1..=order {
        let mut v = remap(a.curvature_component(j), &map_a);
        v = crate::matrix::sparse_add(&v, &remap(b.curvature_component(j), &map_b));
        curvature.push(v);
    }

    let mut escapes = std::collections::BTreeSet::new();
    for &(p, q) in &a.escapes {
        escapes.insert((map_a[p], map_a[q]));
    }
    for &(p, q) in &b.escapes {
        escapes.insert((map_b[p], map_b[q]));
    }

    let alg = CurvedAlgebra {
        base: a.base,
        fiber,
        objects,
        corner,
        units,
        mult,
        diff,
        curvature,
        escapes,
    };
    alg.validate_typing()?;
    Ok(alg)
}

/// Arrow algebra of a dg bimodule (order-0 sides).
pub fn arrow_algebra_dg(x: &CdgBimodule) -> Result<CurvedAlgebra> {
    arrow_algebra(&CurvedBimodule::from_dg(x)?)
}

/// Extracts one diagonal corner of an algebra with a two-block object
/// layout: `Left` keeps objects `0..left_objects`, `Right` the rest.
pub fn corner_subalgebra(
    alg: &CurvedAlgebra,
    side: ArrowSide,
    left_objects: usize,
) -> Result<CurvedAlgebra> {
    let keep = |o: usize| match side {
        ArrowSide::Left => o < left_objects,
        ArrowSide::Right => o >= left_objects,
    };
    let shift = |o: usize| match side {
        ArrowSide::Left => o,
        ArrowSide::Right => o - left_objects,
    };
    let selected: Vec<usize> = alg
        .fiber
        .iter_flat()
        .filter(|&i| keep(alg.corner[i].0) && keep(alg.corner[i].1))
        .collect();
    let (fiber, old_of_new, new_of_old) = subspace(&alg.fiber, &selected)?;
    let order = alg.order();
    let mut mult = vec![MultTable::new(); order + 1];
    for j in 0..=order {
        for (&(p, q), v) in &alg.mult[j] {
            let (Some(&np), Some(&nq)) = (new_of_old.get(&p), new_of_old.get(&q)) else {
                continue;
            };
            let nv: SparseVec = v
                .iter()
                .filter_map(|(k, c)| new_of_old.get(k).map(|&nk| (nk, c.clone())))
                .collect();
            mult[j].insert((np, nq), sparse_normalize(nv));
        }
    }
    let mut diff = Vec::with_capacity(order + 1);
    for j in 0..=order {
        diff.push(restrict_map(&alg.diff[j], &fiber, &old_of_new, &new_of_old)?);
    }
    let mut curvature = Vec::with_capacity(order);
    for j in 1..=order {
        let nv: SparseVec = alg
            .curvature_component(j)
            .iter()
            .filter_map(|(k, c)| new_of_old.get(k).map(|&nk| (nk, c.clone())))
            .collect();
        curvature.push(sparse_normalize(nv));
    }
    let objects = match side {
        ArrowSide::Left => left_objects,
        ArrowSide::Right => alg.objects - left_objects,
    };
    let corner = selected
        .iter()
        .map(|&i| (shift(alg.corner[i].0), shift(alg.corner[i].1)))
        .collect();
    let units = alg
        .units
        .iter()
        .filter(|&&u| keep(alg.corner[u].0))
        .map(|&u| new_of_old[&u])
        .collect();
    let escapes = alg
        .escapes
        .iter()
        .filter_map(|&(p, q)| match (new_of_old.get(&p), new_of_old.get(&q)) {
            (Some(&np), Some(&nq)) => Some((np, nq)),
            _ => None,
        })
        .collect();
    let sub = CurvedAlgebra {
        base: alg.base,
        fiber,
        objects,
        corner,
        units,
        mult,
        diff,
        curvature,
        escapes,
    };
    sub.validate_typing()?;
    Ok(sub)
}

/// Extracts the off-diagonal corner (left block acting on the left, right
/// block acting on the right) as a free-frame bimodule.
pub fn off_diagonal_corner(alg: &CurvedAlgebra, left_objects: usize) -> Result<CurvedBimodule> {
    let left = corner_subalgebra(alg, ArrowSide::Left, left_objects)?;
    let right = corner_subalgebra(alg, ArrowSide::Right, left_objects)?;
    let selected: Vec<usize> = alg
        .fiber
        .iter_flat()
        .filter(|&i| alg.corner[i].0 < left_objects && alg.corner[i].1 >= left_objects)
        .collect();
    let (fiber, old_of_new, new_of_old) = subspace(&alg.fiber, &selected)?;
    // index maps into the corner algebras
    let left_sel: Vec<usize> = alg
        .fiber
        .iter_flat()
        .filter(|&i| alg.corner[i].0 < left_objects && alg.corner[i].1 < left_objects)
        .collect();
    let right_sel: Vec<usize> = alg
        .fiber
        .iter_flat()
        .filter(|&i| alg.corner[i].0 >= left_objects && alg.corner[i].1 >= left_objects)
        .collect();
    let left_new: BTreeMap<usize, usize> = left_sel.iter().enumerate().map(|(n, &o)| (o, n)).collect();
    let right_new: BTreeMap<usize, usize> = right_sel.iter().enumerate().map(|(n, &o)| (o, n)).collect();

    let order = alg.order();
    let mut lact = vec![ActionTable::new(); order + 1];
    let mut ract = vec![ActionTable::new(); order + 1];
    for j in 0..=order {
        for (&(p, q), v) in &alg.mult[j] {
            // a · x
            if let (Some(&ap), Some(&xq)) = (left_new.get(&p), new_of_old.get(&q)) {
                let nv: SparseVec = v
                    .iter()
                    .filter_map(|(k, c)| new_of_old.get(k).map(|&nk| (nk, c.clone())))
                    .collect();
                lact[j].insert((ap, xq), sparse_normalize(nv));
            }
            // x · b
            if let (Some(&xp), Some(&bq)) = (new_of_old.get(&p), right_new.get(&q)) {
                let nv: SparseVec = v
                    .iter()
                    .filter_map(|(k, c)| new_of_old.get(k).map(|&nk| (nk, c.clone())))
                    .collect();
                ract[j].insert((xp, bq), sparse_normalize(nv));
            }
        }
    }
    let mut diff = Vec::with_capacity(order + 1);
    for j in 0..=order {
        diff.push(restrict_map(&alg.diff[j], &fiber, &old_of_new, &new_of_old)?);
    }
    let corner = selected
        .iter()
        .map(|&i| (alg.corner[i].0, alg.corner[i].1 - left_objects))
        .collect();
    Ok(CurvedBimodule {
        left,
        right,
        fiber,
        corner,
        lact,
        ract,
        diff,
    })
}

/// Subspace spanned by selected flat indices: new space, new->old flat map,
/// old->new lookup.
fn subspace(
    space: &GradedSpace,
    selected: &[usize],
) -> Result<(GradedSpace, Vec<usize>, BTreeMap<usize, usize>)> {
    let mut labels: BTreeMap<i32, Vec<String>> = BTreeMap::new();
    for &i in selected {
        let (d, _) = space.unflat(i);
        labels
            .entry(d)
            .or_default()
            .push(space.label_of(i).to_string());
    }
    let sub = GradedSpace::new(space.field, space.window, labels)?;
    // selected is in flat (degree-major) order already since iter_flat is
    let old_of_new: Vec<usize> = selected.to_vec();
    let new_of_old: BTreeMap<usize, usize> =
        selected.iter().enumerate().map(|(n, &o)| (o, n)).collect();
    Ok((sub, old_of_new, new_of_old))
}

fn restrict_map(
    map: &GradedMap,
    sub: &GradedSpace,
    old_of_new: &[usize],
    new_of_old: &BTreeMap<usize, usize>,
) -> Result<GradedMap> {
    let field = sub.field;
    let mut out = GradedMap::zero(sub, sub, map.shift);
    for d in sub.degrees().collect::<Vec<_>>() {
        let td = d + map.shift;
        if !sub.window.contains(td) || sub.dim(td) == 0 {
            continue;
        }
        let mut m = Matrix::zeros(field, sub.dim(td), sub.dim(d));
        for c in 0..sub.dim(d) {
            let old = old_of_new[sub.flat(d, c)];
            let img = map.apply_sparse(&vec![(old, field.one())]);
            for (k, coeff) in img {
                if let Some(&nk) = new_of_old.get(&k) {
                    let (dd, r) = sub.unflat(nk);
                    if dd == td {
                        m[(r, c)] = coeff;
                    }
                }
            }
        }
        if !m.is_zero() {
            out.set_block(d, m)?;
        }
    }
    Ok(out)
}
