//! Seeded randomness for fixture batteries and property tests. ChaCha keeps
//! streams identical across platforms, so a recorded seed reproduces a run
//! exactly.

use crate::field::{FieldSpec, Scalar};
use crate::graded::{GradedMap, GradedSpace};
use crate::matrix::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

pub struct SeededRng {
    inner: ChaCha12Rng,
    pub seed: u64,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng {
            inner: ChaCha12Rng::seed_from_u64(seed),
            seed,
        }
    }

    pub fn u64(&mut self, bound: u64) -> u64 {
        self.inner.gen_range(0..bound)
    }

    pub fn i64(&mut self, lo: i64, hi: i64) -> i64 {
        self.inner.gen_range(lo..=hi)
    }

    pub fn scalar(&mut self, field: FieldSpec) -> Scalar {
        field.from_i64(self.i64(-5, 5))
    }

    pub fn nonzero_scalar(&mut self, field: FieldSpec) -> Scalar {
        loop {
            let s = self.scalar(field);
            if !s.is_zero() {
                return s;
            }
        }
    }

    pub fn matrix(&mut self, field: FieldSpec, rows: usize, cols: usize) -> Matrix {
        let mut m = Matrix::zeros(field, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = self.scalar(field);
            }
        }
        m
    }

    /// Random invertible matrix (resampled until invertible).
    pub fn invertible(&mut self, field: FieldSpec, n: usize) -> Matrix {
        loop {
            let m = self.matrix(field, n, n);
            if m.inverse().expect("square").is_some() {
                return m;
            }
        }
    }

    /// Random graded map of the given shift between two spaces.
    pub fn graded_map(&mut self, src: &GradedSpace, tgt: &GradedSpace, shift: i32) -> GradedMap {
        let mut map = GradedMap::zero(src, tgt, shift);
        for d in src.degrees().collect::<Vec<_>>() {
            if !tgt.window.contains(d + shift) || tgt.dim(d + shift) == 0 {
                continue;
            }
            let m = self.matrix(src.field, tgt.dim(d + shift), src.dim(d));
            map.set_block(d, m).expect("shape");
        }
        map
    }

    /// Degreewise random change of basis of a space.
    pub fn basis_change(&mut self, space: &GradedSpace) -> GradedMap {
        let mut map = GradedMap::zero(space, space, 0);
        for d in space.degrees().collect::<Vec<_>>() {
            let m = self.invertible(space.field, space.dim(d));
            map.set_block(d, m).expect("shape");
        }
        map
    }
}
