//! Curved first-order deformations and their classification: cocycle
//! extraction, the inverse construction for arity-bounded cocycles, the
//! class map into HH² of the reference algebra, equivalence decisions and
//! equivalence witnesses.
//!
//! A curved deformation of `A` is a free first-order curved algebra `B_ε`
//! together with a `B`-`A` bimodule identifying the reduction `B` with `A`
//! up to Morita equivalence. The attached class is the transfer of the
//! cocycle `(c₁, d₁, m₁)` read off the `ε`-components of `B_ε`.

use crate::algebra::{
    arrow_algebra_dg, check_cdg, off_diagonal_corner, ArrowSide, BaseRing, CdgBimodule,
    CurvedAlgebra, CurvedBimodule, DgAlgebra, MultTable,
};
use crate::bar::{curved_bar_rectify, verify_reduction, ReductionCertificate};
use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::graded::{GradedMap, Window};
use crate::hochschild::{
    hh2, hoch_differential, is_cocycle, lift_cocycle_pair, restrict_idempotent, HH2Basis,
    HochschildCochain, Transfer,
};
use crate::matrix::sparse_scale;
use serde::{Deserialize, Serialize};

/// Morita verification state of the structure bimodule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MoritaStatus {
    /// Established by `nder::morita_check`, with the deciding method.
    Verified(String),
    /// Taken on faith with an explicit override.
    Asserted,
    Refuted,
}

/// A curved Morita deformation of the reference algebra.
#[derive(Clone, Debug)]
pub struct CurvedDeformation {
    pub reference: DgAlgebra,
    pub b_eps: CurvedAlgebra,
    /// Bimodule between the reduction of `b_eps` (left) and the reference
    /// algebra (right).
    pub x: CdgBimodule,
    pub morita_status: MoritaStatus,
}

impl CurvedDeformation {
    /// Deformation whose structure bimodule is the regular one; requires the
    /// reduction of `b_eps` to be the reference algebra on the nose.
    pub fn identity(reference: &DgAlgebra, b_eps: CurvedAlgebra) -> Result<CurvedDeformation> {
        if b_eps.order() != 1 {
            return Err(Error::OrderOutOfRange(b_eps.order(), 1));
        }
        let reduction = b_eps.reduction();
        if reduction.as_curved() != reference.as_curved() {
            return Err(Error::Incomparable(
                "reduction of the deformation is not the reference algebra".into(),
            ));
        }
        let rep = check_cdg(&b_eps);
        if !rep.is_valid() {
            return Err(Error::Validation(rep.to_string()));
        }
        let x = CdgBimodule::regular(reference.as_curved())?;
        Ok(CurvedDeformation {
            reference: reference.clone(),
            b_eps,
            x,
            morita_status: MoritaStatus::Verified("regular bimodule".into()),
        })
    }

    /// General constructor; the caller supplies the Morita evidence.
    pub fn new(
        reference: &DgAlgebra,
        b_eps: CurvedAlgebra,
        x: CdgBimodule,
        morita_status: MoritaStatus,
    ) -> Result<CurvedDeformation> {
        if b_eps.order() != 1 {
            return Err(Error::OrderOutOfRange(b_eps.order(), 1));
        }
        let rep = check_cdg(&b_eps);
        if !rep.is_valid() {
            return Err(Error::Validation(rep.to_string()));
        }
        if x.order() != 0 {
            return Err(Error::ShapeMismatch(
                "structure bimodule must live over the reduction".into(),
            ));
        }
        Ok(CurvedDeformation {
            reference: reference.clone(),
            b_eps,
            x,
            morita_status,
        })
    }

    pub fn reduction(&self) -> DgAlgebra {
        self.b_eps.reduction()
    }
}

/// Conversion sign placing a plain bilinear component into the stored bar
/// form: `f₂(sx, sy) = (-1)^{|x|} m₁(x, y)`.
fn suspension_sign(a: &DgAlgebra, x: usize) -> Scalar {
    Scalar::sign(a.field(), a.degree(x) as i64)
}

/// Reads the degree-2 cocycle off a first-order curved algebra: arity 0 is
/// the `ε`-curvature, arity 1 the `ε`-predifferential, arity 2 the
/// `ε`-multiplication. Validity of the cdg axioms is equivalent to the
/// cocycle condition, which is asserted.
pub fn extract_cocycle(b_eps: &CurvedAlgebra) -> Result<HochschildCochain> {
    if b_eps.order() != 1 {
        return Err(Error::OrderOutOfRange(b_eps.order(), 1));
    }
    let b = b_eps.reduction();
    let mut eta = HochschildCochain::zero(2, 3);
    let c1 = b_eps.curvature_component(1);
    if !c1.is_empty() {
        eta.set(Vec::new(), c1.clone());
    }
    // arity 1: ε-component of the predifferential on normalized inputs
    for x in b.normalized_basis() {
        if let Some(dx) = b_eps.diff_basis(1, x) {
            if !dx.is_empty() {
                eta.set(vec![x], dx);
            }
        }
    }
    // arity 2: ε-component of multiplication, suspended
    for (&(x, y), v) in &b_eps.mult[1] {
        if b.is_unit(x) || b.is_unit(y) {
            // strict unitality of deformations puts these to zero; a nonzero
            // entry here fails check_cdg before extraction is attempted
            continue;
        }
        eta.add_to(vec![x, y], &sparse_scale(v, &suspension_sign(&b, x)));
    }
    let (ok, witness, _) = is_cocycle(&b, &eta);
    if !ok {
        return Err(Error::NotCocycle(format!(
            "extracted cochain of a valid cdg algebra must be closed: {}",
            witness.unwrap_or_default()
        )));
    }
    Ok(eta)
}

/// Builds the first-order deformation defined by an arity-bounded degree-2
/// cocycle: curvature from arity 0, predifferential shift from arity 1,
/// multiplication shift from arity 2. Rejects cocycles with components of
/// arity 3 and higher, whose deformations leave the cdg world.
pub fn deform_from_cocycle(a: &DgAlgebra, eta: &HochschildCochain) -> Result<CurvedAlgebra> {
    if eta.total_degree != 2 {
        return Err(Error::ShapeMismatch(
            "deforming cocycle must have total degree 2".into(),
        ));
    }
    if let Some(p) = eta.top_arity() {
        if p >= 3 {
            return Err(Error::ArityObstruction(
                "cocycle has components of tensor-arity 3 or higher; such deformations are \
                 beyond the cdg setting and out of scope"
                    .into(),
            ));
        }
    }
    let (ok, witness, _) = is_cocycle(a, eta);
    if !ok {
        return Err(Error::NotCocycle(witness.unwrap_or_default()));
    }
    let mut b_eps = a.as_curved().trivial_extension(BaseRing::DUAL_NUMBERS)?;
    // curvature
    if let Some(c) = eta.components[0].get(&Vec::new()) {
        b_eps.curvature = vec![c.clone()];
    }
    // predifferential: assemble blocks from the arity-1 component
    if eta.components.len() > 1 && !eta.components[1].is_empty() {
        let mut d1 = GradedMap::zero(&a.fiber, &a.fiber, 1);
        let mut blocks: std::collections::BTreeMap<i32, crate::matrix::Matrix> =
            std::collections::BTreeMap::new();
        for (tuple, v) in &eta.components[1] {
            let x = tuple[0];
            let (d, col) = a.fiber.unflat(x);
            let m = blocks.entry(d).or_insert_with(|| {
                crate::matrix::Matrix::zeros(a.field(), a.fiber.dim(d + 1), a.fiber.dim(d))
            });
            for (k, c) in v {
                let (_, row) = a.fiber.unflat(*k);
                m[(row, col)] = m[(row, col)].add(c);
            }
        }
        for (d, m) in blocks {
            d1.set_block(d, m)?;
        }
        b_eps.diff[1] = d1;
    }
    // multiplication: undo the suspension sign
    if eta.components.len() > 2 {
        let mut m1 = MultTable::new();
        for (tuple, v) in &eta.components[2] {
            let (x, y) = (tuple[0], tuple[1]);
            m1.insert((x, y), sparse_scale(v, &suspension_sign(a, x)));
        }
        b_eps.mult[1] = m1;
    }
    let rep = check_cdg(&b_eps);
    if !rep.is_valid() {
        return Err(Error::Validation(format!(
            "cocycle does not define a valid cdg structure (convention fault): {rep}"
        )));
    }
    Ok(b_eps)
}

/// The classification class of a deformation in the given HH² basis of the
/// reference algebra: the transfer through the structure bimodule applied to
/// the class of the extracted cocycle.
pub fn nu(d: &CurvedDeformation, hh2_reference: &HH2Basis) -> Result<Vec<Scalar>> {
    match d.morita_status {
        MoritaStatus::Verified(_) | MoritaStatus::Asserted => {}
        MoritaStatus::Refuted => {
            return Err(Error::MoritaUnverified(
                "structure bimodule is refuted; the class map is undefined".into(),
            ))
        }
    }
    let eta = extract_cocycle(&d.b_eps)?;
    let b = d.reduction();
    // fast path: regular structure bimodule over the reference algebra
    if b.as_curved() == d.reference.as_curved() && is_regular(&d.x, &b) {
        return hh2_reference.class_of(&eta);
    }
    let arrow = DgAlgebra::from_curved(arrow_algebra_dg(&d.x)?)?;
    let transfer = Transfer::new(&arrow, b.objects, hh2_reference.arity_cap)?;
    let class_b = transfer.hh2_left.class_of(&eta)?;
    let class_a = transfer.phi_left_to_right(&class_b)?;
    // express in the caller's basis: corner coordinates agree with the
    // reference algebra's flat indices by construction
    let mut rep = HochschildCochain::zero(2, hh2_reference.arity_cap);
    for (j, c) in class_a.iter().enumerate() {
        if !c.is_zero() {
            let r = transfer.hh2_right.representatives[j].scaled(c);
            rep = rep.plus(&r)?;
        }
    }
    hh2_reference.class_of(&rep)
}

fn is_regular(x: &CdgBimodule, b: &DgAlgebra) -> bool {
    match CdgBimodule::regular(b.as_curved()) {
        Ok(reg) => {
            x.space.dims() == reg.space.dims()
                && x.lact == reg.lact
                && x.ract == reg.ract
                && x.t_action == reg.t_action
                && x.diff == reg.diff
        }
        Err(_) => false,
    }
}

/// Equivalence verdict for two deformations of one reference algebra.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum EquivalenceVerdict {
    Equivalent,
    Inequivalent {
        /// coordinates of ν(D₁) − ν(D₂) in the shared basis
        class_difference: Vec<Scalar>,
        /// evidence that the difference is not a coboundary
        noncoboundary: String,
    },
}

/// Compares the classes of two deformations in one HH² basis. Equal classes
/// mean equivalent deformations; a nonzero difference comes with a
/// certificate that it is not a coboundary.
pub fn decide_equivalence(
    d1: &CurvedDeformation,
    d2: &CurvedDeformation,
    hh2_reference: &HH2Basis,
) -> Result<EquivalenceVerdict> {
    if d1.reference.as_curved() != d2.reference.as_curved() {
        return Err(Error::Incomparable("different reference algebras".into()));
    }
    let c1 = nu(d1, hh2_reference)?;
    let c2 = nu(d2, hh2_reference)?;
    let diff: Vec<Scalar> = c1.iter().zip(&c2).map(|(a, b)| a.sub(b)).collect();
    if diff.iter().all(Scalar::is_zero) {
        Ok(EquivalenceVerdict::Equivalent)
    } else {
        // basis representatives are independent modulo coboundaries, so a
        // nonzero coordinate vector is itself a non-coboundary certificate;
        // confirm by attempting to solve for a primitive
        let mut rep = HochschildCochain::zero(2, hh2_reference.arity_cap);
        for (j, c) in diff.iter().enumerate() {
            if !c.is_zero() {
                rep = rep.plus(&hh2_reference.representatives[j].scaled(c))?;
            }
        }
        let primitive = crate::hochschild::coboundary_solve(&d1.reference, &rep)?;
        let noncoboundary = match primitive {
            None => "coboundary solve on the class difference is inconsistent".to_string(),
            Some(_) => {
                return Err(Error::Other(
                    "class difference is a coboundary yet has nonzero coordinates; \
                     the HH² basis is corrupt"
                        .into(),
                ))
            }
        };
        Ok(EquivalenceVerdict::Inequivalent {
            class_difference: diff,
            noncoboundary,
        })
    }
}

/// Equivalence witness: the rectified graded-free cdg bimodule between the
/// two deformations together with the reduction certificate.
#[derive(Clone, Debug)]
pub struct EquivalenceWitness {
    pub z_eps: CdgBimodule,
    pub certificate: ReductionCertificate,
    /// convention string recorded with every witness
    pub convention: String,
}

/// Constructs an equivalence witness for deformations with equal classes:
/// lifts the two cocycles to one cocycle over the arrow algebra of `z`,
/// deforms the arrow algebra, extracts the off-diagonal corner and rectifies
/// it through the truncated curved bar construction to a bimodule that is
/// graded-free on both sides.
///
/// `z` is the Morita bimodule between the two reductions (the regular
/// bimodule when both deformations share one reduction).
pub fn build_equivalence_witness(
    d1: &CurvedDeformation,
    d2: &CurvedDeformation,
    z: &CdgBimodule,
    depth: usize,
    window: Window,
    margin: i32,
) -> Result<EquivalenceWitness> {
    let b = d1.reduction();
    let eta_b = extract_cocycle(&d1.b_eps)?;
    let eta_c = extract_cocycle(&d2.b_eps)?;
    let arrow = DgAlgebra::from_curved(arrow_algebra_dg(z)?)?;
    let cap = 3;
    let transfer = Transfer::new(&arrow, b.objects, cap)?;
    let gamma = lift_cocycle_pair(&transfer, &eta_b, &eta_c)?;
    if let Some(p) = gamma.top_arity() {
        if p >= 3 {
            return Err(Error::ArityObstruction(
                "lift requires tensor-arity 3 components; such witnesses are out of scope".into(),
            ));
        }
    }
    // deform the arrow algebra by the lifted cocycle
    let arrow_eps = deform_from_cocycle(&arrow, &gamma)?;
    // consistency: the corners of the deformed arrow are exactly the two
    // deformations (the restrictions of γ are the extracted cocycles)
    debug_assert_eq!(
        extract_cocycle(&crate::algebra::corner_subalgebra(
            &arrow_eps,
            ArrowSide::Left,
            b.objects
        )?)?,
        restrict_idempotent(&arrow, &gamma, ArrowSide::Left, b.objects)?
    );
    // off-diagonal corner: the curved bimodule between B_ε and C_ε
    let z_eps = off_diagonal_corner(&arrow_eps, b.objects)?;
    // rectify: bar-resolve over the envelope to reach graded freeness
    let rectified = curved_bar_rectify(&z_eps, depth, window)?;
    let z_red = z_eps_reduction_complex(&z_eps)?;
    let certificate = verify_reduction(&rectified, &z_red, margin)?;
    let expanded = rectified.expand_with_witnesses()?;
    Ok(EquivalenceWitness {
        z_eps: expanded,
        certificate,
        convention: crate::report::BAR_CONVENTION.to_string(),
    })
}

fn z_eps_reduction_complex(z: &CurvedBimodule) -> Result<crate::complex::Complex> {
    crate::complex::Complex::new(z.fiber.clone(), z.diff[0].clone())
}

/// Spanning set of degree-2 cocycles with tensor-arity at most 2: kernel of
/// the differential restricted to arities {0, 1, 2}, full condition.
pub fn arity_two_cocycles(a: &DgAlgebra, cap_out: usize) -> Result<Vec<HochschildCochain>> {
    let c2 = crate::hochschild::CochainSpace::new(a, 2, 2);
    let c3 = crate::hochschild::CochainSpace::new(a, 3, cap_out.max(3));
    let (d2, _) = crate::hochschild::delta_matrix(a, &c2, &c3);
    let kernel = d2.kernel();
    let mut out = Vec::new();
    for j in 0..kernel.cols() {
        out.push(c2.cochain_from(a, &kernel.column(j)));
    }
    Ok(out)
}

/// Convenience: HH² basis of the reference algebra at the default cap.
pub fn reference_basis(a: &DgAlgebra, arity_cap: usize) -> Result<HH2Basis> {
    hh2(a, arity_cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use crate::fixtures;

    const P3: FieldSpec = FieldSpec::Prime(3);
    const P: FieldSpec = FieldSpec::Prime(32003);

    #[test]
    fn extract_trivial_deformation() {
        for (_, a) in fixtures::all_algebras(P) {
            let d = fixtures::trivial_deformation(&a);
            let eta = extract_cocycle(&d).unwrap();
            assert!(eta.is_zero());
        }
    }

    #[test]
    fn extract_curved_laurent() {
        let alg = fixtures::curved_laurent(P);
        let eta = extract_cocycle(&alg).unwrap();
        let a = fixtures::laurent(P);
        let u = fixtures::flat_index(&a, "u1");
        assert_eq!(eta.components[0].get(&Vec::new()), Some(&vec![(u, P.one())]));
        assert!(eta.components[1].is_empty());
        assert!(eta.components[2].is_empty());
    }

    #[test]
    fn extract_deformed_dual_numbers() {
        let alg = fixtures::deformed_dual_numbers(P3);
        let eta = extract_cocycle(&alg).unwrap();
        let a = fixtures::dual_numbers(P3);
        let x = fixtures::flat_index(&a, "x");
        let one = fixtures::flat_index(&a, "1");
        assert_eq!(
            eta.components[2].get(&vec![x, x]),
            Some(&vec![(one, P3.one())])
        );
    }

    #[test]
    fn roundtrip_extract_deform() {
        // every arity-≤2 cocycle in the spanning set deforms to a valid cdg
        // algebra that extracts back to the same cochain
        for (name, a) in [
            ("dual", fixtures::dual_numbers(P3)),
            ("exterior", fixtures::exterior(P)),
            ("exterior2", fixtures::exterior_two(P)),
            ("endo", fixtures::endomorphism_cone(P)),
            ("m2", fixtures::matrix2(P)),
            ("a2path", fixtures::path_a2(P)),
        ] {
            let cocycles = arity_two_cocycles(&a, 3).unwrap();
            for eta in &cocycles {
                let b_eps =
                    deform_from_cocycle(&a, eta).unwrap_or_else(|e| panic!("{name}: {e}"));
                let back = extract_cocycle(&b_eps).unwrap();
                assert_eq!(&back, eta, "{name}: round trip");
            }
        }
    }

    #[test]
    fn deform_rejects_arity_three() {
        let a = fixtures::dual_numbers(P3);
        let mut eta = HochschildCochain::zero(2, 3);
        let x = fixtures::flat_index(&a, "x");
        eta.set(vec![x, x, x], fixtures::basis_vec(&a, "x"));
        assert!(matches!(
            deform_from_cocycle(&a, &eta),
            Err(Error::ArityObstruction(_))
        ));
    }

    #[test]
    fn nu_of_trivial_deformation_is_zero() {
        let a = fixtures::dual_numbers(P3);
        let basis = reference_basis(&a, 3).unwrap();
        let d = CurvedDeformation::identity(&a, fixtures::trivial_deformation(&a)).unwrap();
        assert_eq!(nu(&d, &basis).unwrap(), basis.zero_class());
    }

    #[test]
    fn nu_of_curved_laurent_is_nonzero() {
        let a = fixtures::laurent(P);
        let basis = reference_basis(&a, 3).unwrap();
        let d = CurvedDeformation::identity(&a, fixtures::curved_laurent(P)).unwrap();
        let class = nu(&d, &basis).unwrap();
        assert!(class.iter().any(|c| !c.is_zero()));
    }

    #[test]
    fn nu_is_coboundary_invariant() {
        let a = fixtures::dual_numbers(P3);
        let basis = reference_basis(&a, 3).unwrap();
        let mut rng = crate::rng::SeededRng::new(11);
        let cocycles = arity_two_cocycles(&a, 3).unwrap();
        let eta = &cocycles[0];
        let d = CurvedDeformation::identity(&a, deform_from_cocycle(&a, eta).unwrap()).unwrap();
        let base_class = nu(&d, &basis).unwrap();
        for _ in 0..5 {
            let c1 = crate::hochschild::CochainSpace::new(&a, 1, 1);
            let coords: Vec<Scalar> = (0..c1.dim()).map(|_| rng.scalar(P3)).collect();
            let beta = c1.cochain_from(&a, &coords);
            let shift = hoch_differential(&a, &beta).cochain;
            if shift.top_arity().map_or(0, |p| p) >= 3 {
                continue;
            }
            let shifted = eta.plus(&shift).unwrap();
            let d2 = CurvedDeformation::identity(&a, deform_from_cocycle(&a, &shifted).unwrap())
                .unwrap();
            assert_eq!(nu(&d2, &basis).unwrap(), base_class);
        }
    }

    #[test]
    fn equivalence_verdicts() {
        let a = fixtures::laurent(P);
        let basis = reference_basis(&a, 3).unwrap();
        let trivial = CurvedDeformation::identity(&a, fixtures::trivial_deformation(&a)).unwrap();
        let curved = CurvedDeformation::identity(&a, fixtures::curved_laurent(P)).unwrap();
        assert!(matches!(
            decide_equivalence(&trivial, &trivial, &basis).unwrap(),
            EquivalenceVerdict::Equivalent
        ));
        match decide_equivalence(&trivial, &curved, &basis).unwrap() {
            EquivalenceVerdict::Inequivalent {
                class_difference, ..
            } => {
                assert!(class_difference.iter().any(|c| !c.is_zero()));
            }
            _ => panic!("trivial vs curved must be inequivalent"),
        }
    }
}
