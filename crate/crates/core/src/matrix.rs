//! Dense matrices over an exact field, with deterministic Gauss-Jordan
//! elimination.
//!
//! Pivoting is leftmost-nonzero: columns are scanned left to right and the
//! topmost remaining row with a nonzero entry becomes the pivot row. All
//! derived bases (kernel, image, quotient complements) inherit this order, so
//! every computation in the crate is reproducible bit for bit.

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Scalar};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Sparse vector: strictly increasing indices, no explicit zeros.
pub type SparseVec = Vec<(usize, Scalar)>;

/// Normalizes an unsorted list of (index, coefficient) pairs into a
/// [`SparseVec`], combining duplicates and dropping zeros.
pub fn sparse_normalize(mut entries: Vec<(usize, Scalar)>) -> SparseVec {
    entries.sort_by_key(|e| e.0);
    let mut out: SparseVec = Vec::with_capacity(entries.len());
    for (i, c) in entries {
        match out.last_mut() {
            Some((j, acc)) if *j == i => *acc = acc.add(&c),
            _ => out.push((i, c)),
        }
    }
    out.retain(|(_, c)| !c.is_zero());
    out
}

pub fn sparse_add(a: &SparseVec, b: &SparseVec) -> SparseVec {
    let mut v = a.clone();
    v.extend_from_slice(b);
    sparse_normalize(v)
}

pub fn sparse_scale(a: &SparseVec, c: &Scalar) -> SparseVec {
    if c.is_zero() {
        return Vec::new();
    }
    a.iter().map(|(i, x)| (*i, x.mul(c))).collect()
}

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    field: FieldSpec,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn zeros(field: FieldSpec, rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            field,
            data: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: FieldSpec, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m[(i, i)] = field.one();
        }
        m
    }

    pub fn from_rows(field: FieldSpec, rows: Vec<Vec<Scalar>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in &rows {
            if row.len() != c {
                return Err(Error::ShapeMismatch("ragged rows".into()));
            }
            for e in row {
                if e.field() != field {
                    return Err(Error::MixedFields(field, e.field()));
                }
            }
            data.extend(row.iter().cloned());
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            field,
            data,
        })
    }

    /// Matrix whose entries are small integers mapped into `field`.
    pub fn from_i64(field: FieldSpec, rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            for &e in row.iter() {
                data.push(field.from_i64(e));
            }
        }
        Matrix {
            rows: r,
            cols: c,
            field,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    pub fn column(&self, j: usize) -> Vec<Scalar> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[Scalar]) {
        assert_eq!(col.len(), self.rows);
        for i in 0..self.rows {
            self[(i, j)] = col[i].clone();
        }
    }

    pub fn from_columns(field: FieldSpec, rows: usize, cols: &[Vec<Scalar>]) -> Self {
        let mut m = Self::zeros(field, rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            m.set_column(j, col);
        }
        m
    }

    pub fn transpose(&self) -> Matrix {
        let mut m = Matrix::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].clone();
            }
        }
        m
    }

    pub fn add(&self, rhs: &Matrix) -> Result<Matrix> {
        self.check_same_shape(rhs)?;
        let mut m = self.clone();
        for (a, b) in m.data.iter_mut().zip(rhs.data.iter()) {
            *a = a.add(b);
        }
        Ok(m)
    }

    pub fn sub(&self, rhs: &Matrix) -> Result<Matrix> {
        self.check_same_shape(rhs)?;
        let mut m = self.clone();
        for (a, b) in m.data.iter_mut().zip(rhs.data.iter()) {
            *a = a.sub(b);
        }
        Ok(m)
    }

    pub fn scale(&self, c: &Scalar) -> Matrix {
        let mut m = self.clone();
        for a in m.data.iter_mut() {
            *a = a.mul(c);
        }
        m
    }

    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        if self.field != rhs.field {
            return Err(Error::MixedFields(self.field, rhs.field));
        }
        let mut m = Matrix::zeros(self.field, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if b.is_zero() {
                        continue;
                    }
                    m[(i, j)] = m[(i, j)].add(&a.mul(b));
                }
            }
        }
        Ok(m)
    }

    pub fn apply(&self, v: &[Scalar]) -> Result<Vec<Scalar>> {
        if v.len() != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "matrix {}x{} applied to vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let mut out = vec![self.field.zero(); self.rows];
        for j in 0..self.cols {
            if v[j].is_zero() {
                continue;
            }
            for i in 0..self.rows {
                let a = &self[(i, j)];
                if !a.is_zero() {
                    out[i] = out[i].add(&a.mul(&v[j]));
                }
            }
        }
        Ok(out)
    }

    pub fn apply_sparse(&self, v: &SparseVec) -> SparseVec {
        let mut entries = Vec::new();
        for (j, c) in v {
            for i in 0..self.rows {
                let a = &self[(i, *j)];
                if !a.is_zero() {
                    entries.push((i, a.mul(c)));
                }
            }
        }
        sparse_normalize(entries)
    }

    pub fn hstack(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.rows != rhs.rows {
            return Err(Error::ShapeMismatch("hstack row mismatch".into()));
        }
        let mut m = Matrix::zeros(self.field, self.rows, self.cols + rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self[(i, j)].clone();
            }
            for j in 0..rhs.cols {
                m[(i, self.cols + j)] = rhs[(i, j)].clone();
            }
        }
        Ok(m)
    }

    fn check_same_shape(&self, rhs: &Matrix) -> Result<()> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        if self.field != rhs.field {
            return Err(Error::MixedFields(self.field, rhs.field));
        }
        Ok(())
    }

    /// Reduced row echelon form together with the pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0usize;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(pr) = (row..m.rows).find(|&r| !m[(r, col)].is_zero()) else {
                continue;
            };
            m.swap_rows(row, pr);
            let inv = m[(row, col)].inv().expect("pivot nonzero");
            for j in col..m.cols {
                m[(row, j)] = m[(row, j)].mul(&inv);
            }
            for r in 0..m.rows {
                if r != row && !m[(r, col)].is_zero() {
                    let factor = m[(r, col)].clone();
                    for j in col..m.cols {
                        let t = m[(row, j)].mul(&factor);
                        m[(r, j)] = m[(r, j)].sub(&t);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    pub fn nullity(&self) -> usize {
        self.cols - self.rank()
    }

    /// Kernel basis, one column per free variable, free variables in
    /// ascending column order and set to one.
    pub fn kernel(&self) -> Matrix {
        let (r, pivots) = self.rref();
        let is_pivot: Vec<bool> = {
            let mut v = vec![false; self.cols];
            for &p in &pivots {
                v[p] = true;
            }
            v
        };
        let free: Vec<usize> = (0..self.cols).filter(|j| !is_pivot[*j]).collect();
        let mut out = Matrix::zeros(self.field, self.cols, free.len());
        for (k, &fj) in free.iter().enumerate() {
            out[(fj, k)] = self.field.one();
            for (pi, &pj) in pivots.iter().enumerate() {
                let c = r[(pi, fj)].clone();
                if !c.is_zero() {
                    out[(pj, k)] = c.neg();
                }
            }
        }
        out
    }

    /// Image basis: the original columns at the pivot positions.
    pub fn image(&self) -> Matrix {
        let (_, pivots) = self.rref();
        let cols: Vec<Vec<Scalar>> = pivots.iter().map(|&j| self.column(j)).collect();
        Matrix::from_columns(self.field, self.rows, &cols)
    }

    /// First solution of `A x = b` in the reduced-echelon parameterization
    /// with all free variables set to zero, or `None` when inconsistent.
    pub fn solve(&self, b: &[Scalar]) -> Result<Option<Vec<Scalar>>> {
        if b.len() != self.rows {
            return Err(Error::ShapeMismatch(format!(
                "solve: {} rows vs rhs of length {}",
                self.rows,
                b.len()
            )));
        }
        for e in b {
            if e.field() != self.field {
                return Err(Error::MixedFields(self.field, e.field()));
            }
        }
        let bm = Matrix::from_columns(self.field, self.rows, &[b.to_vec()]);
        let aug = self.hstack(&bm)?;
        let (r, pivots) = aug.rref();
        if pivots.contains(&self.cols) {
            return Ok(None);
        }
        let mut x = vec![self.field.zero(); self.cols];
        for (pi, &pj) in pivots.iter().enumerate() {
            x[pj] = r[(pi, self.cols)].clone();
        }
        Ok(Some(x))
    }

    /// Solves `A X = B` column by column; `None` if any column is inconsistent.
    pub fn solve_matrix(&self, b: &Matrix) -> Result<Option<Matrix>> {
        if b.rows != self.rows {
            return Err(Error::ShapeMismatch("solve_matrix rhs rows".into()));
        }
        let mut cols = Vec::with_capacity(b.cols);
        for j in 0..b.cols {
            match self.solve(&b.column(j))? {
                Some(x) => cols.push(x),
                None => return Ok(None),
            }
        }
        Ok(Some(Matrix::from_columns(self.field, self.cols, &cols)))
    }

    pub fn inverse(&self) -> Result<Option<Matrix>> {
        if self.rows != self.cols {
            return Err(Error::ShapeMismatch("inverse of non-square".into()));
        }
        let id = Matrix::identity(self.field, self.rows);
        let aug = self.hstack(&id)?;
        let (r, pivots) = aug.rref();
        if pivots.len() < self.rows || pivots.iter().any(|&p| p >= self.cols) {
            return Ok(None);
        }
        let mut inv = Matrix::zeros(self.field, self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                inv[(i, j)] = r[(i, self.cols + j)].clone();
            }
        }
        Ok(Some(inv))
    }

    /// Given a spanning set `S` (columns of `self`), returns the indices of
    /// standard basis vectors completing `im S` to the full space, and the
    /// projection matrix expressing each standard basis vector's class in the
    /// chosen complement coordinates.
    ///
    /// The pair presents the quotient `k^rows / im S` on the nose: complement
    /// indices are chosen greedily in ascending order.
    pub fn quotient_complement(&self) -> Result<(Vec<usize>, Matrix)> {
        let id = Matrix::identity(self.field, self.rows);
        let aug = self.hstack(&id)?;
        let (_, pivots) = aug.rref();
        let complement: Vec<usize> = pivots
            .iter()
            .filter(|&&p| p >= self.cols)
            .map(|&p| p - self.cols)
            .collect();
        // Square change-of-basis [image basis | complement] and its inverse;
        // the complement block of the inverse is the projection.
        let img = self.image();
        let comp_cols: Vec<Vec<Scalar>> = complement.iter().map(|&i| id.column(i)).collect();
        let comp = Matrix::from_columns(self.field, self.rows, &comp_cols);
        let basis = img.hstack(&comp)?;
        let inv = basis
            .inverse()?
            .expect("image basis plus complement is invertible");
        let mut proj = Matrix::zeros(self.field, complement.len(), self.rows);
        for (k, _) in complement.iter().enumerate() {
            for j in 0..self.rows {
                proj[(k, j)] = inv[(img.cols() + k, j)].clone();
            }
        }
        Ok((complement, proj))
    }

    /// Text dump: row-major, entries as reduced integers mod p or `num/den`.
    pub fn dump(&self) -> String {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self[(i, j)].to_string()).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Scalar;
    fn index(&self, (i, j): (usize, usize)) -> &Scalar {
        assert!(i < self.rows && j < self.cols, "index out of range");
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Scalar {
        assert!(i < self.rows && j < self.cols, "index out of range");
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix({}x{} over {})\n{}", self.rows, self.cols, self.field, self.dump())
    }
}

/// Free-standing alias used throughout: solves `A x = b`.
pub fn solve_linear(a: &Matrix, b: &[Scalar]) -> Result<Option<Vec<Scalar>>> {
    a.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_echelon_immediate() {
        let f = FieldSpec::Prime(5);
        let a = Matrix::from_i64(f, &[&[1, 0], &[0, 0]]);
        let x = a.solve(&[f.from_i64(1), f.from_i64(0)]).unwrap().unwrap();
        assert_eq!(x, vec![f.from_i64(1), f.from_i64(0)]);
    }

    #[test]
    fn solve_inconsistent() {
        let f = FieldSpec::Rationals;
        let a = Matrix::from_i64(f, &[&[1], &[1]]);
        assert!(a
            .solve(&[f.from_i64(1), f.from_i64(2)])
            .unwrap()
            .is_none());
    }

    #[test]
    fn solve_random_consistent() {
        // random 6x6 over F_7 with known solution, rhs built by multiplication
        let f = FieldSpec::Prime(7);
        let mut seed = 11u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) % 7) as i64
        };
        for _ in 0..10 {
            let rows: Vec<Vec<Scalar>> = (0..6)
                .map(|_| (0..6).map(|_| f.from_i64(next())).collect())
                .collect();
            let a = Matrix::from_rows(f, rows).unwrap();
            let x0: Vec<Scalar> = (0..6).map(|_| f.from_i64(next())).collect();
            let b = a.apply(&x0).unwrap();
            let x = a.solve(&b).unwrap().expect("consistent by construction");
            assert_eq!(a.apply(&x).unwrap(), b);
        }
    }

    #[test]
    fn rank_nullity() {
        let f = FieldSpec::Prime(7);
        let a = Matrix::from_i64(f, &[&[1, 2, 3], &[2, 4, 6], &[0, 1, 1]]);
        assert_eq!(a.rank() + a.nullity(), a.cols());
        let k = a.kernel();
        assert_eq!(k.cols(), a.nullity());
        assert!(a.mul(&k).unwrap().is_zero());
    }

    #[test]
    fn image_and_quotient() {
        let f = FieldSpec::Rationals;
        let a = Matrix::from_i64(f, &[&[1, 1], &[0, 0], &[2, 2]]);
        let img = a.image();
        assert_eq!(img.cols(), 1);
        let (comp, proj) = a.quotient_complement().unwrap();
        assert_eq!(comp.len(), 2);
        assert_eq!(proj.rows(), 2);
        // image vectors project to zero
        let z = proj.mul(&img).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn inverse_roundtrip() {
        let f = FieldSpec::Prime(13);
        let a = Matrix::from_i64(f, &[&[2, 1], &[1, 1]]);
        let inv = a.inverse().unwrap().unwrap();
        assert_eq!(a.mul(&inv).unwrap(), Matrix::identity(f, 2));
        let sing = Matrix::from_i64(f, &[&[1, 1], &[2, 2]]);
        assert!(sing.inverse().unwrap().is_none());
    }
}
