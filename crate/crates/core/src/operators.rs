//! Dense complex operators on composite Hilbert spaces.
//!
//! Everything here is a pure function of its inputs. Matrices are stored
//! dense (`nalgebra::DMatrix<Complex64>`); the total dimension at the
//! operating point of interest is 18, so sparse storage buys nothing.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Subsystem layout of a tensor-product space. Slot 0 is the leftmost
/// (slowest varying) factor of the Kronecker product.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositeSpace {
    dims: Vec<usize>,
    labels: Vec<String>,
}

impl CompositeSpace {
    pub fn new<S: Into<String>>(dims: Vec<usize>, labels: Vec<S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if dims.is_empty() {
            return Err(Error::InvalidDimension("composite space needs at least one subsystem".into()));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidDimension(format!("subsystem dimension {d} < 2")));
        }
        if labels.len() != dims.len() {
            return Err(Error::Layout(format!("{} labels for {} subsystems", labels.len(), dims.len())));
        }
        for (k, l) in labels.iter().enumerate() {
            if labels[..k].contains(l) {
                return Err(Error::Layout(format!("duplicate subsystem label `{l}`")));
            }
        }
        Ok(Self { dims, labels })
    }

    /// The resonator–qubit–resonator layout `[n_res, 2, n_res]` labelled `L, q, R`.
    pub fn resonator_qubit_resonator(n_res_levels: usize) -> Result<Self> {
        Self::new(vec![n_res_levels, 2, n_res_levels], vec!["L", "q", "R"])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn slot(&self, label: &str) -> Result<usize> {
        self.labels.iter().position(|l| l == label).ok_or_else(|| Error::Layout(format!("no subsystem labelled `{label}`")))
    }
}

/// Bosonic ladder operator truncated to `n_levels`; for two levels this is σ₋.
pub fn annihilation(n_levels: usize) -> Result<ComplexMatrix> {
    if n_levels < 2 {
        return Err(Error::InvalidDimension(format!("annihilation operator needs at least 2 levels, got {n_levels}")));
    }
    let mut a = ComplexMatrix::zeros(n_levels, n_levels);
    for k in 1..n_levels {
        a[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
    }
    Ok(a)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// `I ⊗ … ⊗ op ⊗ … ⊗ I` with `op` acting on `slot`.
pub fn tensor_embed(op: &ComplexMatrix, slot: usize, space: &CompositeSpace) -> Result<ComplexMatrix> {
    let dims = space.dims();
    if slot >= dims.len() {
        return Err(Error::Layout(format!("slot {slot} out of range for {} subsystems", dims.len())));
    }
    if op.nrows() != dims[slot] || op.ncols() != dims[slot] {
        return Err(Error::Layout(format!("operator is {}x{} but slot {slot} has dimension {}", op.nrows(), op.ncols(), dims[slot])));
    }
    let left: usize = dims[..slot].iter().product();
    let right: usize = dims[slot + 1..].iter().product();
    Ok(identity(left).kronecker(op).kronecker(&identity(right)))
}

pub fn dagger(m: &ComplexMatrix) -> ComplexMatrix {
    m.adjoint()
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn frobenius_norm(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Largest entry of `|m − m†|`.
pub fn hermiticity_defect(m: &ComplexMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn is_square(m: &ComplexMatrix) -> bool {
    m.nrows() == m.ncols()
}

/// Eigen-decomposition of a Hermitian operator.
///
/// Columns of `vectors` are eigenvectors ordered by ascending energy. Each
/// eigenvector is phase-fixed so that its largest-magnitude component is
/// real and positive.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    pub energies: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl EigenBasis {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// `V† op V`: matrix elements `⟨ε_i|op|ε_j⟩`.
    pub fn to_eigenbasis(&self, op: &ComplexMatrix) -> ComplexMatrix {
        self.vectors.adjoint() * op * &self.vectors
    }

    /// `V op V†`: back to the computational basis.
    pub fn from_eigenbasis(&self, op: &ComplexMatrix) -> ComplexMatrix {
        &self.vectors * op * self.vectors.adjoint()
    }

    /// The Hamiltonian in its own eigenbasis, `diag(ε)`.
    pub fn diagonal_hamiltonian(&self) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(self.dim(), self.energies.iter().map(|&e| C64::new(e, 0.0))))
    }

    pub fn unitarity_defect(&self) -> f64 {
        max_abs(&(self.vectors.adjoint() * &self.vectors - identity(self.dim())))
    }

    /// `‖H V − V diag(ε)‖_F`.
    pub fn reconstruction_residual(&self, h: &ComplexMatrix) -> f64 {
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= C64::new(self.energies[j], 0.0);
        }
        frobenius_norm(&(h * &self.vectors - scaled))
    }
}

pub fn eigendecompose_hermitian(h: &ComplexMatrix) -> Result<EigenBasis> {
    if !is_square(h) {
        return Err(Error::InvalidDimension(format!("eigendecomposition of a {}x{} matrix", h.nrows(), h.ncols())));
    }
    let scale = frobenius_norm(h);
    let defect = hermiticity_defect(h);
    let allowed = 1e-12 * scale;
    if defect > allowed {
        return Err(Error::NotHermitian { defect, allowed });
    }
    // Feed the exactly Hermitian part so the solver's triangle choice is irrelevant.
    let herm = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let n = herm.nrows();
    let eig = herm.symmetric_eigen();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut vectors = ComplexMatrix::zeros(n, n);
    let mut energies = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        energies.push(eig.eigenvalues[src]);
        let col = eig.eigenvectors.column(src);
        let mut pivot = 0;
        for k in 1..n {
            if col[k].norm() > col[pivot].norm() {
                pivot = k;
            }
        }
        let phase = if col[pivot].norm() > 0.0 { col[pivot].conj() / col[pivot].norm() } else { ONE };
        for k in 0..n {
            vectors[(k, dst)] = col[k] * phase;
        }
        vectors[(pivot, dst)].im = 0.0;
    }
    Ok(EigenBasis { energies, vectors })
}

/// Eigenvalues only, ascending. The input is Hermitised first.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut v: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `½‖a − b‖₁` for Hermitian `a`, `b`.
pub fn trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    0.5 * hermitian_eigenvalues(&(a - b)).iter().map(|x| x.abs()).sum::<f64>()
}
