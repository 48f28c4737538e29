//! Stationary states of a Liouvillian, state diagnostics and a fixed-step
//! RK4 propagator used as an independent check.

use log::warn;
use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::generators::{unvectorize, vec_index, vectorize, Superoperator};
use crate::operators::{hermitian_eigenvalues, hermiticity_defect, trace, ComplexMatrix, C64, ONE, ZERO};

/// Relative singular-value threshold for counting kernel directions.
pub const KERNEL_REL_TOL: f64 = 1e-12;
/// Accepted `‖L v‖₂ / ‖L‖_F` for a steady state.
pub const RESIDUAL_REL_TOL: f64 = 1e-10;
pub const DEFAULT_POS_TOL: f64 = 1e-8;

const STATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::InvalidDimension(format!(
                "density matrix must be square and nonempty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { matrix })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(d, d) * C64::new(1.0 / d as f64, 0.0) }
    }

    /// `e^{−ε/T}/Z` as a diagonal matrix over the given energies, i.e. the
    /// Gibbs state written in the Hamiltonian's eigenbasis.
    pub fn gibbs_diagonal(energies: &[f64], temperature: f64) -> Result<Self> {
        if energies.is_empty() {
            return Err(Error::InvalidDimension("Gibbs state of an empty spectrum".into()));
        }
        if !(temperature > 0.0) {
            return Err(Error::Domain(format!("temperature must be positive, got {temperature}")));
        }
        let e0 = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let weights: Vec<f64> = energies.iter().map(|e| (-(e - e0) / temperature).exp()).collect();
        let z: f64 = weights.iter().sum();
        let diag = DVector::from_iterator(weights.len(), weights.iter().map(|w| C64::new(w / z, 0.0)));
        Ok(Self { matrix: ComplexMatrix::from_diagonal(&diag) })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        trace(&self.matrix)
    }

    pub fn populations(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.matrix)[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grade {
    Pass,
    /// Negative eigenvalue beyond the positivity tolerance.
    Warn,
    /// Trace or Hermiticity broken.
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDiagnostics {
    pub hermiticity_defect: f64,
    pub trace_defect: f64,
    pub min_eigenvalue: f64,
    pub grade: Grade,
}

pub fn validate_state(rho: &DensityMatrix, pos_tol: f64) -> StateDiagnostics {
    let herm = hermiticity_defect(rho.matrix());
    let trace_defect = (rho.trace() - ONE).norm();
    let min_eigenvalue = rho.min_eigenvalue();
    let grade = if herm > STATE_TOL || trace_defect > STATE_TOL || !min_eigenvalue.is_finite() {
        Grade::Fail
    } else if min_eigenvalue < -pos_tol {
        warn!("density matrix has eigenvalue {min_eigenvalue:.3e} below -{pos_tol:.1e}");
        Grade::Warn
    } else {
        Grade::Pass
    };
    StateDiagnostics { hermiticity_defect: herm, trace_defect, min_eigenvalue, grade }
}

/// Solution of `L ρ = 0, Tr ρ = 1`.
#[derive(Debug, Clone)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// `‖L vec(ρ)‖₂`.
    pub residual: f64,
    /// Size of the invariant block of `L` that holds the populations.
    pub block_size: usize,
}

impl SteadyState {
    pub fn relative_residual(&self, l: &Superoperator) -> f64 {
        self.residual / l.frobenius_norm()
    }
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Index sets of the blocks of `L` under simultaneous row/column
/// permutation, from its exact-zero pattern. Blocks are ordered by their
/// smallest index and each block is ascending.
fn invariant_blocks(m: &ComplexMatrix) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut sets = DisjointSet::new(n);
    for c in 0..n {
        for r in 0..n {
            if m[(r, c)] != ZERO && r != c {
                sets.union(r, c);
            }
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for k in 0..n {
        let root = sets.find(k);
        if slot[root] == usize::MAX {
            slot[root] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[slot[root]].push(k);
    }
    blocks
}

fn submatrix(m: &ComplexMatrix, idx: &[usize]) -> ComplexMatrix {
    ComplexMatrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])])
}

fn vector_norm(v: &DVector<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Number of singular values of `L` at most `KERNEL_REL_TOL · σ_max`.
pub fn kernel_dimension(l: &Superoperator) -> usize {
    let sv = l.matrix().clone().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return sv.len();
    }
    sv.iter().filter(|&&s| s <= KERNEL_REL_TOL * max).count()
}

fn degenerate(l: &Superoperator) -> Error {
    Error::DegenerateKernel { kernel_dim: kernel_dimension(l) }
}

/// The unique trace-one fixed point of a trace-preserving `L`.
///
/// `L` is split into the blocks of its sparsity pattern; all populations
/// must share one block, every other block must be nonsingular. On the
/// population block the equation of the population row with the smallest
/// `|L_kk|` is replaced by `Σ_i v[i + i·d] = 1`, solved by LU with
/// iterative refinement. The result is Hermitized and renormalized.
pub fn solve_steady_state(l: &Superoperator) -> Result<SteadyState> {
    let d = l.dim();
    let m = l.matrix();
    let norm = l.frobenius_norm();
    if norm == 0.0 {
        return Err(Error::DegenerateKernel { kernel_dim: d * d });
    }
    let populations: Vec<usize> = (0..d).map(|i| vec_index(i, i, d)).collect();
    let blocks = invariant_blocks(m);
    let home = blocks.iter().position(|b| b.binary_search(&populations[0]).is_ok()).expect("every index lies in a block");
    if populations.iter().any(|p| blocks[home].binary_search(p).is_err()) {
        return Err(degenerate(l));
    }

    for (k, block) in blocks.iter().enumerate() {
        if k == home {
            continue;
        }
        let lu = submatrix(m, block).lu();
        let u = lu.u();
        let min_pivot = u.diagonal().iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        if !(min_pivot > 1e-13 * norm) {
            return Err(degenerate(l));
        }
    }

    let block = &blocks[home];
    let mut a = submatrix(m, block);
    let pop_pos: Vec<usize> = populations.iter().map(|p| block.binary_search(p).unwrap()).collect();
    let replaced = *pop_pos.iter().min_by(|&&x, &&y| a[(x, x)].norm().total_cmp(&a[(y, y)].norm())).unwrap();
    a.row_mut(replaced).fill(ZERO);
    for &p in &pop_pos {
        a[(replaced, p)] = ONE;
    }
    let mut rhs = DVector::from_element(block.len(), ZERO);
    rhs[replaced] = ONE;

    let lu = a.clone().lu();
    let mut x = lu.solve(&rhs).ok_or_else(|| degenerate(l))?;
    for _ in 0..4 {
        let r = &rhs - &a * &x;
        let dx = match lu.solve(&r) {
            Some(dx) => dx,
            None => break,
        };
        x += &dx;
        if vector_norm(&dx) <= f64::EPSILON * vector_norm(&x) {
            break;
        }
    }
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(degenerate(l));
    }

    let mut v = DVector::from_element(d * d, ZERO);
    for (k, &idx) in block.iter().enumerate() {
        v[idx] = x[k];
    }
    let rho = unvectorize(&v, d);
    let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let tr = trace(&rho).re;
    let rho = rho / C64::new(tr, 0.0);
    let residual = vector_norm(&(m * vectorize(&rho)));
    if residual > RESIDUAL_REL_TOL * norm {
        let kernel_dim = kernel_dimension(l);
        if kernel_dim > 1 {
            return Err(Error::DegenerateKernel { kernel_dim });
        }
        return Err(Error::Solver(format!("residual {residual:.3e} exceeds {:.1e} of the generator norm {norm:.3e}", RESIDUAL_REL_TOL)));
    }
    Ok(SteadyState { rho: DensityMatrix::new(rho)?, residual, block_size: block.len() })
}

/// Compressed-row copy of a superoperator for repeated matrix-vector products.
struct SparseRows {
    row_start: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<C64>,
}

impl SparseRows {
    fn from_dense(m: &ComplexMatrix) -> Self {
        let mut row_start = Vec::with_capacity(m.nrows() + 1);
        let mut cols = Vec::new();
        let mut values = Vec::new();
        row_start.push(0);
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let z = m[(r, c)];
                if z != ZERO {
                    cols.push(c);
                    values.push(z);
                }
            }
            row_start.push(cols.len());
        }
        Self { row_start, cols, values }
    }

    fn mul_into(&self, x: &[C64], out: &mut [C64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in self.row_start[r]..self.row_start[r + 1] {
                acc += self.values[k] * x[self.cols[k]];
            }
            *o = acc;
        }
    }
}

/// Classic fixed-step RK4 for `vec(ρ̇) = L vec(ρ)` up to `t_final`.
///
/// The step is `t_final / ⌈t_final/dt⌉ ≤ dt`; `dt` must be below
/// `0.1/‖L‖_∞`, which bounds the spectral radius.
pub fn evolve_ode(l: &Superoperator, rho0: &DensityMatrix, t_final: f64, dt: f64) -> Result<DensityMatrix> {
    let d = l.dim();
    if rho0.dim() != d {
        return Err(Error::InvalidDimension(format!("state is {0}x{0} but the generator acts on {d}x{d}", rho0.dim())));
    }
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(Error::Domain(format!("final time must be finite and nonnegative, got {t_final}")));
    }
    let bound = 0.1 / l.inf_norm();
    if !(dt > 0.0) || !(dt < bound) {
        return Err(Error::Stability { dt, bound });
    }
    if t_final == 0.0 {
        return Ok(rho0.clone());
    }
    let steps = (t_final / dt).ceil() as usize;
    let h = t_final / steps as f64;
    let sparse = SparseRows::from_dense(l.matrix());
    let n = d * d;
    let mut y: Vec<C64> = rho0.matrix().as_slice().to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![ZERO; n], vec![ZERO; n], vec![ZERO; n], vec![ZERO; n]);
    let mut tmp = vec![ZERO; n];
    let (half, sixth) = (C64::new(0.5 * h, 0.0), C64::new(h / 6.0, 0.0));
    let full = C64::new(h, 0.0);
    let two = C64::new(2.0, 0.0);
    for _ in 0..steps {
        sparse.mul_into(&y, &mut k1);
        for i in 0..n {
            tmp[i] = y[i] + half * k1[i];
        }
        sparse.mul_into(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + half * k2[i];
        }
        sparse.mul_into(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + full * k3[i];
        }
        sparse.mul_into(&tmp, &mut k4);
        for i in 0..n {
            y[i] += sixth * (k1[i] + two * (k2[i] + k3[i]) + k4[i]);
        }
    }
    DensityMatrix::new(ComplexMatrix::from_column_slice(d, d, &y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{annihilation, trace_distance};

    fn decaying_qubit(gamma_down: f64, gamma_up: f64, omega: f64) -> Superoperator {
        let sm = annihilation(2).unwrap();
        let h = sm.adjoint() * &sm * C64::new(omega, 0.0);
        let mut l = Superoperator::commutator(&h);
        for (c, rate) in [(sm.clone(), gamma_down), (sm.adjoint(), gamma_up)] {
            let cdc = c.adjoint() * &c * C64::new(-0.5 * rate, 0.0);
            l.add_left_right(&cdc, &cdc);
            let sandwich = c.conjugate().kronecker(&c) * C64::new(rate, 0.0);
            l = Superoperator::from_matrix(2, l.matrix() + sandwich);
        }
        l
    }

    #[test]
    fn qubit_steady_state_is_detailed_balance() {
        let (down, up) = (0.3, 0.1);
        let l = decaying_qubit(down, up, 1.0);
        let s = solve_steady_state(&l).unwrap();
        let p_e = up / (up + down);
        assert!((s.rho.matrix()[(1, 1)].re - p_e).abs() < 1e-15);
        assert!(s.residual <= 1e-15);
        assert_eq!(s.block_size, 2);
    }

    #[test]
    fn pure_commutator_has_degenerate_kernel() {
        let sm = annihilation(3).unwrap();
        let h = sm.adjoint() * &sm;
        let l = Superoperator::commutator(&h);
        match solve_steady_state(&l) {
            Err(Error::DegenerateKernel { kernel_dim }) => assert_eq!(kernel_dim, 3),
            other => panic!("expected a degenerate kernel, got {other:?}"),
        }
        assert!(matches!(solve_steady_state(&Superoperator::zeros(2)), Err(Error::DegenerateKernel { .. })));
    }

    #[test]
    fn validate_state_grades() {
        let mixed = DensityMatrix::maximally_mixed(18);
        let d = validate_state(&mixed, DEFAULT_POS_TOL);
        assert!((d.min_eigenvalue - 1.0 / 18.0).abs() < 1e-15);
        assert_eq!(d.grade, Grade::Pass);

        let gibbs = DensityMatrix::gibbs_diagonal(&[0.0, 1.0, 2.5], 0.7).unwrap();
        let d = validate_state(&gibbs, DEFAULT_POS_TOL);
        assert_eq!(d.grade, Grade::Pass);
        assert!(d.min_eigenvalue > 0.0);

        let bad = ComplexMatrix::from_diagonal(&DVector::from_vec(vec![C64::new(1.0 + 1e-4, 0.0), C64::new(-1e-4, 0.0)]));
        let d = validate_state(&DensityMatrix::new(bad).unwrap(), DEFAULT_POS_TOL);
        assert_eq!(d.grade, Grade::Warn);
        assert!((d.min_eigenvalue + 1e-4).abs() < 1e-15);

        let skew = ComplexMatrix::from_row_slice(2, 2, &[C64::new(0.5, 0.0), C64::new(0.1, 0.0), ZERO, C64::new(0.5, 0.0)]);
        assert_eq!(validate_state(&DensityMatrix::new(skew).unwrap(), DEFAULT_POS_TOL).grade, Grade::Fail);
        let heavy = ComplexMatrix::identity(2, 2) * C64::new(0.6, 0.0);
        assert_eq!(validate_state(&DensityMatrix::new(heavy).unwrap(), DEFAULT_POS_TOL).grade, Grade::Fail);
    }

    #[test]
    fn ode_matches_closed_form_relaxation() {
        let (down, up, omega) = (0.3, 0.1, 1.0);
        let l = decaying_qubit(down, up, omega);
        let mut rho0 =
            ComplexMatrix::from_row_slice(2, 2, &[C64::new(0.2, 0.0), C64::new(0.3, 0.1), C64::new(0.3, -0.1), C64::new(0.8, 0.0)]);
        rho0 /= trace(&rho0);
        let t = 3.0;
        let out = evolve_ode(&l, &DensityMatrix::new(rho0.clone()).unwrap(), t, 1e-3).unwrap();
        let total = down + up;
        let p_inf = up / total;
        let p_e = p_inf + (rho0[(1, 1)].re - p_inf) * (-total * t).exp();
        assert!((out.matrix()[(1, 1)].re - p_e).abs() < 1e-12);
        // ρ_01 rotates at e^{iωt} and decays at half the total rate.
        let coherence = rho0[(0, 1)] * (C64::new(-0.5 * total * t, omega * t)).exp();
        assert!((out.matrix()[(0, 1)] - coherence).norm() < 1e-12);
        assert!((out.trace() - ONE).norm() < 1e-13);
    }

    #[test]
    fn ode_zero_time_and_stability_guard() {
        let l = decaying_qubit(0.3, 0.1, 1.0);
        let rho = DensityMatrix::maximally_mixed(2);
        assert_eq!(evolve_ode(&l, &rho, 0.0, 1e-3).unwrap(), rho);
        let bound = 0.1 / l.inf_norm();
        assert!(matches!(evolve_ode(&l, &rho, 1.0, 2.0 * bound), Err(Error::Stability { .. })));
        assert!(matches!(evolve_ode(&l, &rho, 1.0, 0.0), Err(Error::Stability { .. })));
    }

    #[test]
    fn long_time_evolution_reaches_the_steady_state() {
        let l = decaying_qubit(0.3, 0.1, 1.0);
        let tau = 1.0 / 0.3;
        let s = solve_steady_state(&l).unwrap();
        let out = evolve_ode(&l, &DensityMatrix::maximally_mixed(2), 20.0 * tau, 1e-2).unwrap();
        assert!(trace_distance(out.matrix(), s.rho.matrix()) <= 1e-6);
    }
}
