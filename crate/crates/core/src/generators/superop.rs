//! Dense superoperators on column-stacked density matrices.
//!
//! `vec(ρ)[r + c·d] = ρ[r, c]`, which is nalgebra's native column-major
//! layout. Every superoperator identity in this crate assumes it.

use nalgebra::DVector;

use crate::operators::{ComplexMatrix, C64, I, ZERO};

#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: ComplexMatrix,
}

#[inline]
pub fn vec_index(row: usize, col: usize, dim: usize) -> usize {
    row + col * dim
}

pub fn vectorize(rho: &ComplexMatrix) -> DVector<C64> {
    DVector::from_column_slice(rho.as_slice())
}

pub fn unvectorize(v: &DVector<C64>, dim: usize) -> ComplexMatrix {
    ComplexMatrix::from_column_slice(dim, dim, v.as_slice())
}

impl Superoperator {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, matrix: ComplexMatrix::zeros(dim * dim, dim * dim) }
    }

    pub fn from_matrix(dim: usize, matrix: ComplexMatrix) -> Self {
        assert_eq!(matrix.shape(), (dim * dim, dim * dim), "superoperator shape mismatch");
        Self { dim, matrix }
    }

    /// `ρ ↦ −i[H, ρ]`.
    pub fn commutator(h: &ComplexMatrix) -> Self {
        let mut s = Self::zeros(h.nrows());
        s.add_left_right(&(h * -I), &(h * I));
        s
    }

    /// Hilbert-space dimension `d`; the matrix is `d² × d²`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub(crate) fn entry_mut(&mut self, out: usize, inp: usize) -> &mut C64 {
        &mut self.matrix[(out, inp)]
    }

    /// Adds `ρ ↦ left·ρ + ρ·right`.
    pub fn add_left_right(&mut self, left: &ComplexMatrix, right: &ComplexMatrix) {
        let d = self.dim;
        for k in 0..d {
            for i in 0..d {
                let out = vec_index(i, k, d);
                for n in 0..d {
                    let l = left[(i, n)];
                    if l != ZERO {
                        self.matrix[(out, vec_index(n, k, d))] += l;
                    }
                    let r = right[(n, k)];
                    if r != ZERO {
                        self.matrix[(out, vec_index(i, n, d))] += r;
                    }
                }
            }
        }
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        unvectorize(&(&self.matrix * vectorize(rho)), self.dim)
    }

    /// Heisenberg-picture action `L†(X)`.
    pub fn apply_adjoint(&self, x: &ComplexMatrix) -> ComplexMatrix {
        unvectorize(&(self.matrix.adjoint() * vectorize(x)), self.dim)
    }

    /// `max |L†(I)|`: zero for a trace-preserving generator.
    pub fn trace_preservation_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for col in 0..d * d {
            let s: C64 = (0..d).map(|i| self.matrix[(vec_index(i, i, d), col)]).sum();
            worst = worst.max(s.norm());
        }
        worst
    }

    pub fn frobenius_norm(&self) -> f64 {
        crate::operators::frobenius_norm(&self.matrix)
    }

    /// Max absolute row sum; bounds the spectral radius.
    pub fn inf_norm(&self) -> f64 {
        self.matrix.row_iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Superoperator) -> f64 {
        crate::operators::max_abs(&(&self.matrix - &other.matrix))
    }
}

impl std::ops::AddAssign<&Superoperator> for Superoperator {
    fn add_assign(&mut self, rhs: &Superoperator) {
        assert_eq!(self.dim, rhs.dim);
        self.matrix += &rhs.matrix;
    }
}
