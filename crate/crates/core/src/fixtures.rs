//! Built-in fixture corpus: the algebras, deformations and modules every
//! test battery and the CLI `fixtures` subcommand share.

use crate::algebra::{BaseRing, CurvedAlgebra, DgAlgebra, MultTable};
use crate::error::Result;
use crate::field::FieldSpec;
use crate::graded::{GradedMap, GradedSpace, Window};
use crate::matrix::{sparse_normalize, Matrix, SparseVec};
use std::collections::BTreeMap;

/// Helper for assembling structure constants by label.
pub struct AlgebraBuilder {
    field: FieldSpec,
    window: Window,
    objects: usize,
    labels: Vec<(String, i32, usize, usize)>, // (label, degree, cod, dom)
    units: Vec<String>,
    mult: Vec<(String, String, String, i64)>,
    diff: Vec<(String, String, i64)>,
}

impl AlgebraBuilder {
    pub fn new(field: FieldSpec, window: Window) -> Self {
        AlgebraBuilder {
            field,
            window,
            objects: 1,
            labels: Vec::new(),
            units: Vec::new(),
            mult: Vec::new(),
            diff: Vec::new(),
        }
    }

    pub fn objects(mut self, n: usize) -> Self {
        self.objects = n;
        self
    }

    pub fn basis(mut self, label: &str, degree: i32) -> Self {
        self.labels.push((label.to_string(), degree, 0, 0));
        self
    }

    pub fn basis_at(mut self, label: &str, degree: i32, cod: usize, dom: usize) -> Self {
        self.labels.push((label.to_string(), degree, cod, dom));
        self
    }

    pub fn unit(mut self, label: &str) -> Self {
        self.units.push(label.to_string());
        self
    }

    pub fn mul(mut self, a: &str, b: &str, out: &str, coeff: i64) -> Self {
        self.mult.push((a.into(), b.into(), out.into(), coeff));
        self
    }

    pub fn d(mut self, a: &str, out: &str, coeff: i64) -> Self {
        self.diff.push((a.into(), out.into(), coeff));
        self
    }

    pub fn build(self) -> Result<DgAlgebra> {
        let mut by_degree: BTreeMap<i32, Vec<String>> = BTreeMap::new();
        for (l, d, _, _) in &self.labels {
            by_degree.entry(*d).or_default().push(l.clone());
        }
        let fiber = GradedSpace::new(self.field, self.window, by_degree)?;
        let index = |l: &str| -> usize {
            let (_, d, _, _) = self
                .labels
                .iter()
                .find(|(name, ..)| name == l)
                .unwrap_or_else(|| panic!("unknown label {l}"));
            let off = fiber.labels(*d).iter().position(|s| s == l).unwrap();
            fiber.flat(*d, off)
        };
        let mut corner = vec![(0usize, 0usize); fiber.total_dim()];
        for (l, _, c, d) in &self.labels {
            corner[index(l)] = (*c, *d);
        }
        let units: Vec<usize> = self.units.iter().map(|l| index(l)).collect();
        let mut mult = MultTable::new();
        for (a, b, out, c) in &self.mult {
            let entry = mult.entry((index(a), index(b))).or_insert_with(Vec::new);
            entry.push((index(out), self.field.from_i64(*c)));
        }
        for v in mult.values_mut() {
            *v = sparse_normalize(std::mem::take(v));
        }
        mult.retain(|_, v| !v.is_empty());
        let mut diff = GradedMap::zero(&fiber, &fiber, 1);
        let mut blocks: BTreeMap<i32, Matrix> = BTreeMap::new();
        for (a, out, c) in &self.diff {
            let (d, col) = fiber.unflat(index(a));
            let (dd, row) = fiber.unflat(index(out));
            if dd != d + 1 {
                return Err(crate::error::Error::ShapeMismatch(format!(
                    "d({a}) -> {out} does not raise degree by 1"
                )));
            }
            let m = blocks
                .entry(d)
                .or_insert_with(|| Matrix::zeros(self.field, fiber.dim(d + 1), fiber.dim(d)));
            m[(row, col)] = m[(row, col)].add(&self.field.from_i64(*c));
        }
        for (d, m) in blocks {
            diff.set_block(d, m)?;
        }
        DgAlgebra::new(fiber, self.objects, corner, units, mult, diff)
    }
}

/// The ground field `k` as a one-dimensional algebra.
pub fn ground_field(field: FieldSpec) -> DgAlgebra {
    AlgebraBuilder::new(field, Window::new(-1, 2).unwrap())
        .basis("1", 0)
        .unit("1")
        .mul("1", "1", "1", 1)
        .build()
        .expect("fixture")
}

/// `k[x]/(x²)` concentrated in degree 0.
pub fn dual_numbers(field: FieldSpec) -> DgAlgebra {
    AlgebraBuilder::new(field, Window::new(-1, 2).unwrap())
        .basis("1", 0)
        .basis("x", 0)
        .unit("1")
        .mul("1", "1", "1", 1)
        .mul("1", "x", "x", 1)
        .mul("x", "1", "x", 1)
        .build()
        .expect("fixture")
}

/// Exterior algebra on one generator of degree 1, zero differential.
pub fn exterior(field: FieldSpec) -> DgAlgebra {
    AlgebraBuilder::new(field, Window::new(-1, 2).unwrap())
        .basis("1", 0)
        .basis("x", 1)
        .unit("1")
        .mul("1", "1", "1", 1)
        .mul("1", "x", "x", 1)
        .mul("x", "1", "x", 1)
        .build()
        .expect("fixture")
}

/// Exterior algebra on two degree-1 generators: `xy = -yx`, `x² = y² = 0`.
pub fn exterior_two(field: FieldSpec) -> DgAlgebra {
    AlgebraBuilder::new(field, Window::new(-1, 4).unwrap())
        .basis("1", 0)
        .basis("x", 1)
        .basis("y", 1)
        .basis("xy", 2)
        .unit("1")
        .mul("1", "1", "1", 1)
        .mul("1", "x", "x", 1)
        .mul("x", "1", "x", 1)
        .mul("1", "y", "y", 1)
        .mul("y", "1", "y", 1)
        .mul("1", "xy", "xy", 1)
        .mul("xy", "1", "xy", 1)
        .mul("x", "y", "xy", 1)
        .mul("y", "x", "xy", -1)
        .build()
        .expect("fixture")
}

fn power_label(p: i32) -> String {
    format!("u{p}")
}

/// Graded Laurent algebra `k[u, u⁻¹]`, `|u| = 2`, windowed to the powers
/// `u^{-2}..u^2`. Products leaving the window are honest escapes.
pub fn laurent(field: FieldSpec) -> DgAlgebra {
    let mut b = AlgebraBuilder::new(field, Window::new(-4, 4).unwrap());
    for p in -2i32..=2 {
        b = b.basis(&power_label(p), 2 * p);
    }
    b = b.unit("u0");
    for p in -2i32..=2 {
        for q in -2i32..=2 {
            if (p + q).abs() <= 2 {
                b = b.mul(&power_label(p), &power_label(q), &power_label(p + q), 1);
            }
        }
    }
    b.build().expect("fixture")
}

/// `M₂(k)` presented as the category algebra on two objects.
pub fn matrix2(field: FieldSpec) -> DgAlgebra {
    let mut b = AlgebraBuilder::new(field, Window::new(-1, 2).unwrap()).objects(2);
    for i in 0..2usize {
        for j in 0..2usize {
            b = b.basis_at(&format!("e{}{}", i + 1, j + 1), 0, i, j);
        }
    }
    b = b.unit("e11").unit("e22");
    for i in 0..2usize {
        for j in 0..2usize {
            for l in 0..2usize {
                b = b.mul(
                    &format!("e{}{}", i + 1, j + 1),
                    &format!("e{}{}", j + 1, l + 1),
                    &format!("e{}{}", i + 1, l + 1),
                    1,
                );
            }
        }
    }
    b.build().expect("fixture")
}

/// `M₂(k[x]/(x²))`, the Morita partner of `k[x]/(x²)`.
pub fn matrix2_dual(field: FieldSpec) -> DgAlgebra {
    let mut b = AlgebraBuilder::new(field, Window::new(-1, 2).unwrap()).objects(2);
    for i in 0..2usize {
        for j in 0..2usize {
            b = b.basis_at(&format!("e{}{}", i + 1, j + 1), 0, i, j);
            b = b.basis_at(&format!("xe{}{}", i + 1, j + 1), 0, i, j);
        }
    }
    b = b.unit("e11").unit("e22");
    for i in 0..2usize {
        for j in 0..2usize {
            for l in 0..2usize {
                let a = format!("e{}{}", i + 1, j + 1);
                let m = format!("e{}{}", j + 1, l + 1);
                let out = format!("e{}{}", i + 1, l + 1);
                b = b.mul(&a, &m, &out, 1);
                b = b.mul(&format!("x{a}"), &m, &format!("x{out}"), 1);
                b = b.mul(&a, &format!("x{m}"), &format!("x{out}"), 1);
                // x²-terms vanish: no (xe, xe) entries
            }
        }
    }
    b.build().expect("fixture")
}

/// Endomorphism dg algebra of the contractible complex `k -> k`: basis
/// `1, p, h, f` with `|h| = -1`, `|f| = 1`, `d(h) = 1`, `d(p) = f`.
/// Noncommutative with a nonzero differential; acyclic in cohomology.
pub fn endomorphism_cone(field: FieldSpec) -> DgAlgebra {
    AlgebraBuilder::new(field, Window::new(-2, 2).unwrap())
        .basis("1", 0)
        .basis("p", 0)
        .basis("h", -1)
        .basis("f", 1)
        .unit("1")
        .mul("1", "1", "1", 1)
        .mul("1", "p", "p", 1)
        .mul("p", "1", "p", 1)
        .mul("1", "h", "h", 1)
        .mul("h", "1", "h", 1)
        .mul("1", "f", "f", 1)
        .mul("f", "1", "f", 1)
        .mul("p", "p", "p", 1)
        .mul("p", "h", "h", 1)
        .mul("f", "p", "f", 1)
        .mul("h", "f", "p", 1)
        .mul("f", "h", "1", 1)
        .mul("f", "h", "p", -1)
        .d("p", "f", 1)
        .d("h", "1", 1)
        .build()
        .expect("fixture")
}

/// Path algebra of the `A₂` quiver: two vertices and one arrow.
pub fn path_a2(field: FieldSpec) -> DgAlgebra {
    AlgebraBuilder::new(field, Window::new(-1, 2).unwrap())
        .objects(2)
        .basis_at("e1", 0, 0, 0)
        .basis_at("e2", 0, 1, 1)
        .basis_at("al", 0, 0, 1)
        .unit("e1")
        .unit("e2")
        .mul("e1", "e1", "e1", 1)
        .mul("e2", "e2", "e2", 1)
        .mul("e1", "al", "al", 1)
        .mul("al", "e2", "al", 1)
        .build()
        .expect("fixture")
}

/// The eight fixture algebras, with stable names.
pub fn all_algebras(field: FieldSpec) -> Vec<(&'static str, DgAlgebra)> {
    vec![
        ("k", ground_field(field)),
        ("dual", dual_numbers(field)),
        ("exterior", exterior(field)),
        ("exterior2", exterior_two(field)),
        ("laurent", laurent(field)),
        ("m2", matrix2(field)),
        ("m2dual", matrix2_dual(field)),
        ("a2path", path_a2(field)),
    ]
}

/// Trivial first-order deformation of a dg algebra.
pub fn trivial_deformation(a: &DgAlgebra) -> CurvedAlgebra {
    a.as_curved()
        .trivial_extension(BaseRing::DUAL_NUMBERS)
        .expect("order raise")
}

/// The intrinsically curved deformation of the Laurent algebra: `c = ε·u`.
pub fn curved_laurent(field: FieldSpec) -> CurvedAlgebra {
    let a = laurent(field);
    let mut alg = trivial_deformation(&a);
    let u = flat_index(&a, "u1");
    alg.curvature = vec![vec![(u, field.one())]];
    alg
}

/// `k[x]/(x²)` deformed by `x·x = ε`: multiplication gains a
/// `t`-component `(x, x) -> 1`.
pub fn deformed_dual_numbers(field: FieldSpec) -> CurvedAlgebra {
    let a = dual_numbers(field);
    let mut alg = trivial_deformation(&a);
    let x = flat_index(&a, "x");
    let one = flat_index(&a, "1");
    alg.mult[1].insert((x, x), vec![(one, field.one())]);
    alg
}

/// Flat index of a label in a fixture algebra.
pub fn flat_index(a: &DgAlgebra, label: &str) -> usize {
    a.fiber
        .iter_flat()
        .find(|&i| a.fiber.label_of(i) == label)
        .unwrap_or_else(|| panic!("label {label} not found"))
}

/// Sparse unit vector on one basis label.
pub fn basis_vec(a: &DgAlgebra, label: &str) -> SparseVec {
    vec![(flat_index(a, label), a.field().one())]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{check_cdg, check_dg};

    const P: FieldSpec = FieldSpec::Prime(32003);

    #[test]
    fn all_fixture_algebras_are_valid() {
        for (name, a) in all_algebras(P) {
            let rep = check_dg(&a);
            assert!(rep.is_valid(), "{name}: {rep}");
        }
        for (name, a) in all_algebras(FieldSpec::Rationals) {
            let rep = check_dg(&a);
            assert!(rep.is_valid(), "{name}: {rep}");
        }
    }

    #[test]
    fn trivial_deformations_are_valid() {
        for (name, a) in all_algebras(P) {
            let rep = check_cdg(&trivial_deformation(&a));
            assert!(rep.is_valid(), "{name}: {rep}");
        }
    }

    #[test]
    fn curved_laurent_is_valid() {
        let rep = check_cdg(&curved_laurent(P));
        assert!(rep.is_valid(), "{rep}");
        // window honesty: some instances escape
        assert!(!rep.unchecked.is_empty());
    }

    #[test]
    fn deformed_dual_numbers_is_valid() {
        let rep = check_cdg(&deformed_dual_numbers(P));
        assert!(rep.is_valid(), "{rep}");
        assert!(rep.unchecked.is_empty());
    }

    #[test]
    fn asymmetric_mult_perturbation_is_caught() {
        // a one-sided ε-entry on (u, u^-1) breaks the t-expanded axioms
        let a = laurent(P);
        let mut alg = curved_laurent(P);
        let u1 = flat_index(&a, "u1");
        let um1 = flat_index(&a, "u-1");
        alg.mult[1].insert((u1, um1), basis_vec(&a, "u0"));
        let rep = check_cdg(&alg);
        assert!(!rep.is_valid());
    }

    #[test]
    fn degree_violating_differential_is_rejected() {
        // d(x) = 1 with |x| = 0 is ill-typed: the builder refuses
        let r = AlgebraBuilder::new(P, Window::new(-1, 2).unwrap())
            .basis("1", 0)
            .basis("x", 0)
            .unit("1")
            .mul("1", "1", "1", 1)
            .mul("1", "x", "x", 1)
            .mul("x", "1", "x", 1)
            .d("x", "1", 1)
            .build();
        assert!(r.is_err());
    }

    #[test]
    fn reduce_recovers_the_fiber() {
        let alg = curved_laurent(P);
        let red = alg.reduction();
        let rep = check_dg(&red);
        assert!(rep.is_valid());
        assert!(red.as_curved().curvature.is_empty());
        assert_eq!(red.mult(), laurent(P).mult());
    }
}
