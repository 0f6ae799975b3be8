//! Cross-validation of the Hochschild machinery against the independent
//! dense bar-complex oracle on the ordinary (degree-0) fixtures, plus the
//! transfer fixtures across arrow algebras.

mod support;

use curvedef_core::algebra::{arrow_algebra_dg, check_cdg, ArrowSide, CdgBimodule, CurvedBimodule, DgAlgebra};
use curvedef_core::field::FieldSpec;
use curvedef_core::fixtures;
use curvedef_core::hochschild::{
    hh2, hoch_differential, inflate_cochain, lift_cocycle_pair, restrict_idempotent, Transfer,
};
use curvedef_core::rng::SeededRng;
use support::{oracle_a2, oracle_dual, oracle_k, oracle_m2, oracle_m2_dual, OrdinaryAlgebra};

const P3: FieldSpec = FieldSpec::Prime(3);
const P: FieldSpec = FieldSpec::Prime(32003);
const Q: FieldSpec = FieldSpec::Rationals;

fn assert_hh2_matches(name: &str, a: &DgAlgebra, oracle: &OrdinaryAlgebra) {
    let basis = hh2(a, 3).unwrap_or_else(|e| panic!("{name}: {e}"));
    assert_eq!(
        basis.dim,
        oracle.hh2_dim(),
        "{name}: HH² dimension disagrees with the oracle"
    );
    // also compare HH^1 (same complexes, one degree down)
    let c0 = curvedef_core::hochschild::CochainSpace::new(a, 0, 3);
    let c1 = curvedef_core::hochschild::CochainSpace::new(a, 1, 3);
    let c2 = curvedef_core::hochschild::CochainSpace::new(a, 2, 3);
    let (d0, _) = curvedef_core::hochschild::delta_matrix(a, &c0, &c1);
    let (d1, _) = curvedef_core::hochschild::delta_matrix(a, &c1, &c2);
    let hh1 = d1.nullity() - d0.rank();
    assert_eq!(hh1, oracle.hh_dim(1), "{name}: HH¹ disagrees with the oracle");
}

#[test]
fn hh2_matches_oracle_on_ordinary_fixtures() {
    for field in [P3, P, Q, FieldSpec::Prime(2)] {
        assert_hh2_matches("k", &fixtures::ground_field(field), &oracle_k(field));
        assert_hh2_matches("dual", &fixtures::dual_numbers(field), &oracle_dual(field));
        assert_hh2_matches("m2", &fixtures::matrix2(field), &oracle_m2(field));
        assert_hh2_matches("a2path", &fixtures::path_a2(field), &oracle_a2(field));
        assert_hh2_matches(
            "m2dual",
            &fixtures::matrix2_dual(field),
            &oracle_m2_dual(field),
        );
    }
}

#[test]
fn golden_hh2_of_dual_numbers_over_f3() {
    // frozen after oracle verification: dim HH²(k[x]/(x²), F_3) = 1
    assert_eq!(oracle_dual(P3).hh2_dim(), 1);
    assert_eq!(hh2(&fixtures::dual_numbers(P3), 3).unwrap().dim, 1);
}

#[test]
fn morita_invariance_of_hh2_via_oracle() {
    // dim HH²(A) = dim HH²(M₂(A)) for A = k[x]/(x²)
    for field in [P3, Q] {
        assert_eq!(oracle_dual(field).hh2_dim(), oracle_m2_dual(field).hh2_dim());
    }
}

fn regular_bimodule_dg(a: &DgAlgebra) -> CdgBimodule {
    CdgBimodule::regular(a.as_curved()).expect("regular bimodule")
}

#[test]
fn transfer_along_regular_bimodule_is_identity() {
    for (name, a) in [
        ("dual", fixtures::dual_numbers(P3)),
        ("m2", fixtures::matrix2(P3)),
    ] {
        let x = regular_bimodule_dg(&a);
        let arrow = DgAlgebra::from_curved(arrow_algebra_dg(&x).unwrap()).unwrap();
        let t = Transfer::new(&arrow, a.objects, 3).unwrap();
        assert_eq!(t.hh2_left.dim, t.hh2_right.dim, "{name}");
        // phi must be the identity in the shared corner basis: both corners
        // carry the same algebra, and the restriction matrices coincide
        for j in 0..t.hh2_right.dim {
            let mut class = vec![P3.zero(); t.hh2_right.dim];
            class[j] = P3.one();
            let phi = t.phi_right_to_left(&class).unwrap();
            // identify left/right corner bases through their identical
            // construction and compare coordinates
            assert_eq!(phi, class, "{name}: transfer along the regular bimodule");
        }
    }
}

#[test]
fn transfer_matrices_square_and_invertible_for_morita_pair() {
    // X = row module between A = k[x]/(x²) and B = M₂(A)
    let field = P3;
    let a = fixtures::dual_numbers(field);
    let b = fixtures::matrix2_dual(field);
    let x = row_bimodule(&a, &b);
    let arrow = DgAlgebra::from_curved(arrow_algebra_dg(&x).unwrap()).unwrap();
    let t = Transfer::new(&arrow, a.objects, 3).unwrap();
    assert_eq!(t.hh2_left.dim, 1);
    assert_eq!(t.hh2_right.dim, 1);
    let class = vec![field.one()];
    let phi = t.phi_right_to_left(&class).unwrap();
    assert_eq!(phi.len(), 1);
    assert!(!phi[0].is_zero(), "transfer of a generator is a generator");
}

/// The row module A² as an A-M₂(A) bimodule (A acts by scalars on the left,
/// M₂(A) by right matrix multiplication).
fn row_bimodule(a: &DgAlgebra, b: &DgAlgebra) -> CdgBimodule {
    use curvedef_core::graded::{GradedMap, GradedSpace, Window};
    use std::collections::BTreeMap;
    let field = a.field();
    // basis: v1, v2, xv1, xv2 in degree 0 (row vectors (1,0),(0,1) and x·those)
    let mut labels = BTreeMap::new();
    labels.insert(0, vec!["v1".into(), "v2".into(), "xv1".into(), "xv2".into()]);
    let space = GradedSpace::new(field, Window::new(-1, 2).unwrap(), labels).unwrap();
    let t_action = GradedMap::zero(&space, &space, 0);
    let diff = GradedMap::zero(&space, &space, 1);
    let mut lact = BTreeMap::new();
    let mut ract = BTreeMap::new();
    let one = field.one();
    let ai = |l: &str| fixtures::flat_index(a, l);
    let bi = |l: &str| fixtures::flat_index(b, l);
    // left action of A: 1·v = v, x·v = xv, x·xv = 0
    for (m, xm) in [(0usize, 2usize), (1usize, 3usize)] {
        lact.insert((ai("1"), m), vec![(m, one.clone())]);
        lact.insert((ai("1"), xm), vec![(xm, one.clone())]);
        lact.insert((ai("x"), m), vec![(xm, one.clone())]);
    }
    // right action of M₂(A): v_i · e_jk = δ_ij v_k, x moves to the x-layer
    let v = |i: usize, s: usize| i + 2 * s; // i = 0,1; s = x-power
    for i in 0..2usize {
        for j in 0..2usize {
            for k in 0..2usize {
                if i != j {
                    continue;
                }
                let e = bi(&format!("e{}{}", j + 1, k + 1));
                let xe = bi(&format!("xe{}{}", j + 1, k + 1));
                ract.insert((v(i, 0), e), vec![(v(k, 0), one.clone())]);
                ract.insert((v(i, 1), e), vec![(v(k, 1), one.clone())]);
                ract.insert((v(i, 0), xe), vec![(v(k, 1), one.clone())]);
                // xv · xe = 0
            }
        }
    }
    // bimodule corners: left single object, right object = row index? The
    // right algebra is two-object; v_i lives in Hom(right-object i, •).
    let corner = vec![(0, 0), (0, 1), (0, 0), (0, 1)];
    CdgBimodule::new(
        a.as_curved().clone(),
        b.as_curved().clone(),
        space,
        t_action,
        lact,
        ract,
        diff,
        corner,
    )
    .unwrap()
}

#[test]
fn row_bimodule_is_valid() {
    let a = fixtures::dual_numbers(P3);
    let b = fixtures::matrix2_dual(P3);
    let x = row_bimodule(&a, &b);
    let rep = curvedef_core::algebra::check_cdg_bimodule(&x);
    assert!(rep.is_valid(), "{rep}");
    let arrow = arrow_algebra_dg(&x).unwrap();
    let rep = check_cdg(&arrow);
    assert!(rep.is_valid(), "{rep}");
}

#[test]
fn restriction_commutes_with_differential() {
    let mut rng = SeededRng::new(5);
    let a = fixtures::dual_numbers(P);
    let x = regular_bimodule_dg(&a);
    let arrow = DgAlgebra::from_curved(arrow_algebra_dg(&x).unwrap()).unwrap();
    for _ in 0..20 {
        let space = curvedef_core::hochschild::CochainSpace::new(&arrow, 2, 2);
        let coords: Vec<_> = (0..space.dim()).map(|_| rng.scalar(P)).collect();
        let gamma = space.cochain_from(&arrow, &coords);
        for side in [ArrowSide::Left, ArrowSide::Right] {
            let restricted = restrict_idempotent(&arrow, &gamma, side, 1).unwrap();
            let d_restricted = hoch_differential(&a, &restricted).cochain;
            let restricted_d = restrict_idempotent(
                &arrow,
                &hoch_differential(&arrow, &gamma).cochain,
                side,
                1,
            )
            .unwrap();
            assert_eq!(d_restricted, restricted_d);
        }
    }
}

#[test]
fn inflation_is_a_section_of_restriction() {
    let a = fixtures::dual_numbers(P3);
    let x = regular_bimodule_dg(&a);
    let arrow = DgAlgebra::from_curved(arrow_algebra_dg(&x).unwrap()).unwrap();
    let basis = hh2(&a, 3).unwrap();
    for rep in &basis.representatives {
        let inflated = inflate_cochain(&arrow, rep, ArrowSide::Left, 1);
        let back = restrict_idempotent(&arrow, &inflated, ArrowSide::Left, 1).unwrap();
        assert_eq!(&back, rep);
        // concentrated on one corner: the other restriction is zero
        let other = restrict_idempotent(&arrow, &inflated, ArrowSide::Right, 1).unwrap();
        assert!(other.is_zero());
    }
}

#[test]
fn lift_cocycle_pair_restricts_exactly() {
    let field = P3;
    let a = fixtures::dual_numbers(field);
    let x = regular_bimodule_dg(&a);
    let arrow = DgAlgebra::from_curved(arrow_algebra_dg(&x).unwrap()).unwrap();
    let t = Transfer::new(&arrow, 1, 3).unwrap();
    let basis = &t.hh2_left;
    // eta on both corners: the same representative cocycle
    let eta = basis.representatives[0].clone();
    let gamma = lift_cocycle_pair(&t, &eta, &eta).unwrap();
    let (ok, witness, _) = curvedef_core::hochschild::is_cocycle(&arrow, &gamma);
    assert!(ok, "{witness:?}");
    let l = restrict_idempotent(&arrow, &gamma, ArrowSide::Left, 1).unwrap();
    let r = restrict_idempotent(&arrow, &gamma, ArrowSide::Right, 1).unwrap();
    assert_eq!(l, eta);
    assert_eq!(r, eta);
    // perturbing one side by a coboundary must still be liftable
    let mut rng = SeededRng::new(17);
    let c1 = curvedef_core::hochschild::CochainSpace::new(&a, 1, 2);
    let coords: Vec<_> = (0..c1.dim()).map(|_| rng.scalar(field)).collect();
    let beta = c1.cochain_from(&a, &coords);
    let shifted = eta
        .plus(&hoch_differential(&a, &beta).cochain)
        .unwrap();
    let gamma2 = lift_cocycle_pair(&t, &eta, &shifted).unwrap();
    let r2 = restrict_idempotent(&arrow, &gamma2, ArrowSide::Right, 1).unwrap();
    assert_eq!(r2, shifted);
}

#[test]
fn triangle_commutes_at_class_level() {
    // [restrict-left γ] = φ([restrict-right γ]) for random arrow cocycles
    let field = P3;
    let a = fixtures::dual_numbers(field);
    let x = regular_bimodule_dg(&a);
    let arrow = DgAlgebra::from_curved(arrow_algebra_dg(&x).unwrap()).unwrap();
    let t = Transfer::new(&arrow, 1, 3).unwrap();
    for j in 0..t.hh2_arrow.dim {
        let gamma = &t.hh2_arrow.representatives[j];
        let l = restrict_idempotent(&arrow, gamma, ArrowSide::Left, 1).unwrap();
        let r = restrict_idempotent(&arrow, gamma, ArrowSide::Right, 1).unwrap();
        let lhs = t.hh2_left.class_of(&l).unwrap();
        let rhs = t.phi_right_to_left(&t.hh2_right.class_of(&r).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }
}

/// Keeps the unused import warnings away while documenting intent: the
/// CurvedBimodule free frame is exercised in the algebra unit tests.
#[allow(dead_code)]
fn _touch(_: &CurvedBimodule) {}
