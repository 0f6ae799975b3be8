//! Independent dense bar-complex oracle for Hochschild cohomology of
//! ordinary (degree-0, zero-differential) algebras.
//!
//! This is a second implementation kept deliberately separate from the main
//! code path: the classical normalized complex with the textbook signs,
//! assembled as dense matrices and solved by rank computations. Golden
//! values in the acceptance suite are frozen against it.

use curvedef_core::field::{FieldSpec, Scalar};
use curvedef_core::matrix::Matrix;

/// Ordinary algebra presentation: basis 0..dim with a distinguished unit
/// index and dense-ish structure constants.
pub struct OrdinaryAlgebra {
    pub field: FieldSpec,
    pub dim: usize,
    pub unit: usize,
    /// mult[i][j] = coefficients of e_i * e_j in the basis
    pub mult: Vec<Vec<Vec<(usize, i64)>>>,
}

impl OrdinaryAlgebra {
    pub fn new(field: FieldSpec, dim: usize, unit: usize, entries: &[(usize, usize, usize, i64)]) -> Self {
        let mut mult = vec![vec![Vec::new(); dim]; dim];
        for &(i, j, k, c) in entries {
            mult[i][j].push((k, c));
        }
        OrdinaryAlgebra {
            field,
            dim,
            unit,
            mult,
        }
    }

    fn product(&self, i: usize, j: usize) -> Vec<Scalar> {
        let mut v = vec![self.field.zero(); self.dim];
        for (k, c) in &self.mult[i][j] {
            v[*k] = v[*k].add(&self.field.from_i64(*c));
        }
        v
    }

    /// Basis indices other than the unit.
    fn reduced(&self) -> Vec<usize> {
        (0..self.dim).filter(|&i| i != self.unit).collect()
    }

    /// Dimension of the normalized cochain space C^p.
    pub fn cochain_dim(&self, p: usize) -> usize {
        self.reduced().len().pow(p as u32) * self.dim
    }

    fn tuples(&self, p: usize) -> Vec<Vec<usize>> {
        let red = self.reduced();
        let mut out: Vec<Vec<usize>> = vec![Vec::new()];
        for _ in 0..p {
            let mut next = Vec::new();
            for t in &out {
                for &r in &red {
                    let mut s = t.clone();
                    s.push(r);
                    next.push(s);
                }
            }
            out = next;
        }
        out
    }

    /// Projection to the complement of the unit: expresses a product vector
    /// in the reduced basis, discarding the unit coefficient.
    fn reduce_vec(&self, v: &[Scalar]) -> Vec<(usize, Scalar)> {
        self.reduced()
            .iter()
            .filter(|&&k| !v[k].is_zero())
            .map(|&k| (k, v[k].clone()))
            .collect()
    }

    /// Dense matrix of the classical normalized Hochschild differential
    /// `C^p -> C^{p+1}`:
    /// `(δf)(a_0,..,a_p) = a_0 f(a_1..a_p) + Σ (-1)^{i+1} f(..a_i a_{i+1}..)
    ///  + (-1)^{p+1} f(a_0..a_{p-1}) a_p`.
    pub fn delta(&self, p: usize) -> Matrix {
        let field = self.field;
        let src_tuples = self.tuples(p);
        let tgt_tuples = self.tuples(p + 1);
        let red = self.reduced();
        let pos = |t: &[usize]| -> usize {
            let mut idx = 0usize;
            for &s in t {
                let r = red.iter().position(|&x| x == s).unwrap();
                idx = idx * red.len() + r;
            }
            idx
        };
        let mut m = Matrix::zeros(field, tgt_tuples.len() * self.dim, src_tuples.len() * self.dim);
        for tt in &tgt_tuples {
            let row_block = pos(tt) * self.dim;
            // a_0 · f(a_1..a_p)
            {
                let col_block = pos(&tt[1..]) * self.dim;
                for out in 0..self.dim {
                    let prod = self.product(tt[0], out);
                    for k in 0..self.dim {
                        if !prod[k].is_zero() {
                            let cur = m[(row_block + k, col_block + out)].clone();
                            m[(row_block + k, col_block + out)] = cur.add(&prod[k]);
                        }
                    }
                }
            }
            // inner face maps
            for i in 0..p {
                let sign = field.from_i64(if (i + 1) % 2 == 0 { 1 } else { -1 });
                let merged = self.product(tt[i], tt[i + 1]);
                for (k, c) in self.reduce_vec(&merged) {
                    let mut s = Vec::with_capacity(p);
                    s.extend_from_slice(&tt[..i]);
                    s.push(k);
                    s.extend_from_slice(&tt[i + 2..]);
                    let col_block = pos(&s) * self.dim;
                    for out in 0..self.dim {
                        let cur = m[(row_block + out, col_block + out)].clone();
                        m[(row_block + out, col_block + out)] = cur.add(&sign.mul(&c));
                    }
                }
            }
            // f(a_0..a_{p-1}) · a_p
            {
                let sign = field.from_i64(if (p + 1) % 2 == 0 { 1 } else { -1 });
                let col_block = pos(&tt[..p]) * self.dim;
                for out in 0..self.dim {
                    let prod = self.product(out, tt[p]);
                    for k in 0..self.dim {
                        if !prod[k].is_zero() {
                            let cur = m[(row_block + k, col_block + out)].clone();
                            m[(row_block + k, col_block + out)] = cur.add(&sign.mul(&prod[k]));
                        }
                    }
                }
            }
        }
        m
    }

    /// dim HH^2 computed by dense elimination on the arity-truncated
    /// normalized complex (exact for ordinary algebras).
    pub fn hh2_dim(&self) -> usize {
        let d1 = self.delta(1);
        let d2 = self.delta(2);
        let kernel = d2.nullity();
        let image = d1.rank();
        kernel - image
    }

    pub fn hh_dim(&self, n: usize) -> usize {
        assert!(n >= 1);
        let dn_prev = self.delta(n - 1);
        let dn = self.delta(n);
        dn.nullity() - dn_prev.rank()
    }
}

/// The ground field.
pub fn oracle_k(field: FieldSpec) -> OrdinaryAlgebra {
    OrdinaryAlgebra::new(field, 1, 0, &[(0, 0, 0, 1)])
}

/// k[x]/(x²) with basis {1, x}.
pub fn oracle_dual(field: FieldSpec) -> OrdinaryAlgebra {
    OrdinaryAlgebra::new(
        field,
        2,
        0,
        &[(0, 0, 0, 1), (0, 1, 1, 1), (1, 0, 1, 1)],
    )
}

/// M₂(k) with basis {1, e12, e21, e22}: e11 = 1 - e22.
pub fn oracle_m2(field: FieldSpec) -> OrdinaryAlgebra {
    // indices: 0 = 1, 1 = e12, 2 = e21, 3 = e22
    let e = &[
        (0usize, 0usize, 0usize, 1i64),
        (0, 1, 1, 1),
        (0, 2, 2, 1),
        (0, 3, 3, 1),
        (1, 0, 1, 1),
        (2, 0, 2, 1),
        (3, 0, 3, 1),
        // e12 e21 = e11 = 1 - e22
        (1, 2, 0, 1),
        (1, 2, 3, -1),
        // e21 e12 = e22
        (2, 1, 3, 1),
        // e12 e22 = e12
        (1, 3, 1, 1),
        // e22 e21 = e21
        (3, 2, 2, 1),
        // e22 e22 = e22
        (3, 3, 3, 1),
    ];
    OrdinaryAlgebra::new(field, 4, 0, e)
}

/// Path algebra of A₂ with basis {1, e2, al}: e1 = 1 - e2, al: 2 -> 1.
pub fn oracle_a2(field: FieldSpec) -> OrdinaryAlgebra {
    let e = &[
        (0usize, 0usize, 0usize, 1i64),
        (0, 1, 1, 1),
        (0, 2, 2, 1),
        (1, 0, 1, 1),
        (2, 0, 2, 1),
        (1, 1, 1, 1),
        // al · e2 = al ; e2 · al = 0 ; al·al = 0
        (2, 1, 2, 1),
    ];
    OrdinaryAlgebra::new(field, 3, 0, e)
}

/// M₂(k[x]/(x²)) with basis {1, e12, e21, e22, x, xe12, xe21, xe22}.
pub fn oracle_m2_dual(field: FieldSpec) -> OrdinaryAlgebra {
    let mut entries: Vec<(usize, usize, usize, i64)> = Vec::new();
    // block structure: index = r + 4*s where s = x-power, r as in oracle_m2
    let base = oracle_m2(field);
    for i in 0..4 {
        for j in 0..4 {
            for (k, c) in &base.mult[i][j] {
                for (si, sj) in [(0, 0), (0, 1), (1, 0)] {
                    let s = si + sj;
                    entries.push((i + 4 * si, j + 4 * sj, *k + 4 * s, *c));
                }
            }
        }
    }
    OrdinaryAlgebra::new(field, 8, 0, &entries)
}
