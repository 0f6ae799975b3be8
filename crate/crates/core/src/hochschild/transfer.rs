//! Restriction of Hochschild cochains along the idempotents of an arrow
//! algebra, the induced transfer of HH² classes across a Morita bimodule,
//! and exact cochain-level lifting of corner cocycle pairs.

use super::{delta_matrix, hh2, CochainSpace, HH2Basis, HochschildCochain};
use crate::algebra::{corner_subalgebra, ArrowSide, DgAlgebra};
use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::matrix::{sparse_normalize, Matrix};
use std::collections::BTreeMap;

/// Flat indices of one diagonal block of a two-block algebra.
fn corner_selection(alg: &DgAlgebra, side: ArrowSide, left_objects: usize) -> Vec<usize> {
    let keep = |o: usize| match side {
        ArrowSide::Left => o < left_objects,
        ArrowSide::Right => o >= left_objects,
    };
    alg.fiber
        .iter_flat()
        .filter(|&i| keep(alg.corner[i].0) && keep(alg.corner[i].1))
        .collect()
}

/// Validates that a cochain is supported on composable normalized tuples
/// with corner-consistent homogeneous values.
pub fn validate_cochain(a: &DgAlgebra, eta: &HochschildCochain) -> Result<()> {
    for (p, table) in eta.components.iter().enumerate() {
        for (tuple, value) in table {
            if tuple.len() != p {
                return Err(Error::ShapeMismatch("tuple arity mismatch".into()));
            }
            if tuple.iter().any(|&i| a.is_unit(i)) {
                return Err(Error::NotCornerCompatible(
                    "tuple contains an identity element".into(),
                ));
            }
            if !tuple
                .windows(2)
                .all(|w| a.corner[w[0]].1 == a.corner[w[1]].0)
            {
                return Err(Error::NotCornerCompatible("tuple is not composable".into()));
            }
            let out_degree: i32 = tuple.iter().map(|&x| a.degree(x)).sum::<i32>()
                + eta.total_degree
                - p as i32;
            for (k, _) in value {
                if a.degree(*k) != out_degree {
                    return Err(Error::ShapeMismatch("inhomogeneous cochain value".into()));
                }
                let want = if tuple.is_empty() {
                    let c = a.corner[*k];
                    if c.0 != c.1 {
                        return Err(Error::NotCornerCompatible(
                            "arity-0 value off the diagonal".into(),
                        ));
                    }
                    c
                } else {
                    (a.corner[tuple[0]].0, a.corner[*tuple.last().expect("nonempty")].1)
                };
                if a.corner[*k] != want {
                    return Err(Error::NotCornerCompatible(
                        "value corner does not match the tuple".into(),
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Restricts a cochain over a two-block algebra to one diagonal corner.
pub fn restrict_idempotent(
    arrow: &DgAlgebra,
    eta: &HochschildCochain,
    side: ArrowSide,
    left_objects: usize,
) -> Result<HochschildCochain> {
    validate_cochain(arrow, eta)?;
    let selection = corner_selection(arrow, side, left_objects);
    let new_of_old: BTreeMap<usize, usize> =
        selection.iter().enumerate().map(|(n, &o)| (o, n)).collect();
    let keep_obj = |o: usize| match side {
        ArrowSide::Left => o < left_objects,
        ArrowSide::Right => o >= left_objects,
    };
    let mut out = HochschildCochain::zero(eta.total_degree, eta.arity_cap);
    for table in eta.components.iter() {
        for (tuple, value) in table {
            if !tuple.iter().all(|i| new_of_old.contains_key(i)) {
                continue;
            }
            let new_tuple: Vec<usize> = tuple.iter().map(|i| new_of_old[i]).collect();
            let new_value = sparse_normalize(
                value
                    .iter()
                    .filter(|(k, _)| {
                        // arity-0 components may mix corners; keep the block
                        new_of_old.contains_key(k) && keep_obj(arrow.corner[*k].0)
                    })
                    .map(|(k, c)| (new_of_old[k], c.clone()))
                    .collect(),
            );
            if !new_value.is_empty() {
                out.add_to(new_tuple, &new_value);
            }
        }
    }
    Ok(out)
}

/// Inflates a corner cochain to the two-block algebra by zero extension.
pub fn inflate_cochain(
    arrow: &DgAlgebra,
    eta: &HochschildCochain,
    side: ArrowSide,
    left_objects: usize,
) -> HochschildCochain {
    let selection = corner_selection(arrow, side, left_objects);
    let mut out = HochschildCochain::zero(eta.total_degree, eta.arity_cap);
    for table in eta.components.iter() {
        for (tuple, value) in table {
            let new_tuple: Vec<usize> = tuple.iter().map(|&i| selection[i]).collect();
            let new_value = value.iter().map(|(k, c)| (selection[*k], c.clone())).collect();
            out.add_to(new_tuple, &sparse_normalize(new_value));
        }
    }
    out
}

/// The HH²-level transfer attached to a two-block (arrow) algebra: both
/// corner cohomologies, the arrow cohomology, and the matrices of the two
/// restriction maps on HH².
pub struct Transfer {
    pub arrow: DgAlgebra,
    pub left_objects: usize,
    pub left_algebra: DgAlgebra,
    pub right_algebra: DgAlgebra,
    pub hh2_arrow: HH2Basis,
    pub hh2_left: HH2Basis,
    pub hh2_right: HH2Basis,
    /// Matrix of the left restriction on HH²: `dim HH²(left) × dim HH²(arrow)`.
    pub left_matrix: Matrix,
    pub right_matrix: Matrix,
}

impl Transfer {
    pub fn new(arrow: &DgAlgebra, left_objects: usize, arity_cap: usize) -> Result<Transfer> {
        let left_algebra =
            DgAlgebra::from_curved(corner_subalgebra(arrow, ArrowSide::Left, left_objects)?)?;
        let right_algebra =
            DgAlgebra::from_curved(corner_subalgebra(arrow, ArrowSide::Right, left_objects)?)?;
        let hh2_arrow = hh2(arrow, arity_cap)?;
        let hh2_left = hh2(&left_algebra, arity_cap)?;
        let hh2_right = hh2(&right_algebra, arity_cap)?;
        let field = arrow.field();
        let mut left_matrix = Matrix::zeros(field, hh2_left.dim, hh2_arrow.dim);
        let mut right_matrix = Matrix::zeros(field, hh2_right.dim, hh2_arrow.dim);
        for (j, gamma) in hh2_arrow.representatives.iter().enumerate() {
            let l = restrict_idempotent(arrow, gamma, ArrowSide::Left, left_objects)?;
            let r = restrict_idempotent(arrow, gamma, ArrowSide::Right, left_objects)?;
            for (i, c) in hh2_left.class_of(&l)?.into_iter().enumerate() {
                left_matrix[(i, j)] = c;
            }
            for (i, c) in hh2_right.class_of(&r)?.into_iter().enumerate() {
                right_matrix[(i, j)] = c;
            }
        }
        Ok(Transfer {
            arrow: arrow.clone(),
            left_objects,
            left_algebra,
            right_algebra,
            hh2_arrow,
            hh2_left,
            hh2_right,
            left_matrix,
            right_matrix,
        })
    }

    fn invert_through(
        from: &Matrix,
        to: &Matrix,
        class: &[Scalar],
        from_name: &str,
    ) -> Result<Vec<Scalar>> {
        if from.rows() != from.cols() {
            return Err(Error::TransferNotInvertible(format!(
                "{from_name} restriction is {}x{} on HH2",
                from.rows(),
                from.cols()
            )));
        }
        let x = from.solve(class)?.ok_or_else(|| {
            Error::TransferNotInvertible(format!("{from_name} restriction does not hit the class"))
        })?;
        if from.rank() < from.rows() {
            return Err(Error::TransferNotInvertible(format!(
                "{from_name} restriction has rank {} < {}",
                from.rank(),
                from.rows()
            )));
        }
        to.apply(&x)
    }

    /// Transfers a class on the right corner to the left corner:
    /// restriction-to-left ∘ (restriction-to-right)⁻¹.
    pub fn phi_right_to_left(&self, class: &[Scalar]) -> Result<Vec<Scalar>> {
        Self::invert_through(&self.right_matrix, &self.left_matrix, class, "right")
    }

    /// Transfers a class on the left corner to the right corner.
    pub fn phi_left_to_right(&self, class: &[Scalar]) -> Result<Vec<Scalar>> {
        Self::invert_through(&self.left_matrix, &self.right_matrix, class, "left")
    }
}

/// Convenience: transfers an HH² class across an arrow algebra, producing
/// coordinates in the other corner's basis.
pub fn transfer_class(
    transfer: &Transfer,
    class: &[Scalar],
    from: ArrowSide,
) -> Result<Vec<Scalar>> {
    match from {
        ArrowSide::Right => transfer.phi_right_to_left(class),
        ArrowSide::Left => transfer.phi_left_to_right(class),
    }
}

/// Finds a 2-cocycle `γ` over the arrow algebra restricting exactly to the
/// given corner cocycles. Errors with a class mismatch when the linear
/// system is inconsistent.
pub fn lift_cocycle_pair(
    transfer: &Transfer,
    eta_left: &HochschildCochain,
    eta_right: &HochschildCochain,
) -> Result<HochschildCochain> {
    let arrow = &transfer.arrow;
    let field = arrow.field();
    let cap = transfer.hh2_arrow.arity_cap;
    let c2 = CochainSpace::new(arrow, 2, cap);
    let c3 = CochainSpace::new(arrow, 3, cap + 1);
    let (d2, _) = delta_matrix(arrow, &c2, &c3);
    let left_space = CochainSpace::new(&transfer.left_algebra, 2, cap);
    let right_space = CochainSpace::new(&transfer.right_algebra, 2, cap);
    // restriction matrices at the cochain level
    let mut rl = Matrix::zeros(field, left_space.dim(), c2.dim());
    let mut rr = Matrix::zeros(field, right_space.dim(), c2.dim());
    for (col, _) in c2.entries.iter().enumerate() {
        let mut coords = vec![field.zero(); c2.dim()];
        coords[col] = field.one();
        let e = c2.cochain_from(arrow, &coords);
        let l = restrict_idempotent(arrow, &e, ArrowSide::Left, transfer.left_objects)?;
        let r = restrict_idempotent(arrow, &e, ArrowSide::Right, transfer.left_objects)?;
        for (row, c) in left_space
            .coordinates(&transfer.left_algebra, &l)?
            .into_iter()
            .enumerate()
        {
            rl[(row, col)] = c;
        }
        for (row, c) in right_space
            .coordinates(&transfer.right_algebra, &r)?
            .into_iter()
            .enumerate()
        {
            rr[(row, col)] = c;
        }
    }
    let stacked = vstack(&[&d2, &rl, &rr])?;
    let mut rhs = vec![field.zero(); d2.rows()];
    rhs.extend(left_space.coordinates(&transfer.left_algebra, eta_left)?);
    rhs.extend(right_space.coordinates(&transfer.right_algebra, eta_right)?);
    let solution = stacked.solve(&rhs)?.ok_or_else(|| {
        Error::ClassMismatch(
            "no arrow cocycle restricts to the given pair; the classes do not correspond".into(),
        )
    })?;
    Ok(c2.cochain_from(arrow, &solution))
}

fn vstack(mats: &[&Matrix]) -> Result<Matrix> {
    let cols = mats[0].cols();
    let field = mats[0].field();
    let rows = mats.iter().map(|m| m.rows()).sum();
    let mut out = Matrix::zeros(field, rows, cols);
    let mut at = 0usize;
    for m in mats {
        if m.cols() != cols {
            return Err(Error::ShapeMismatch("vstack".into()));
        }
        for i in 0..m.rows() {
            for j in 0..cols {
                out[(at + i, j)] = m[(i, j)].clone();
            }
        }
        at += m.rows();
    }
    Ok(out)
}
