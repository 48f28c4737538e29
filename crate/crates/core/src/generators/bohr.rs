//! Eigenoperator decomposition `A = Σ_ω A(ω)` of a coupling operator.

use crate::error::{Error, Result};
use crate::operators::{frobenius_norm, hermiticity_defect, ComplexMatrix, EigenBasis, C64};

/// Matrix elements below this fraction of `‖A‖_F` are treated as exact zeros
/// (selection rules broken only by eigensolver round-off).
pub const ELEMENT_CUTOFF: f64 = 1e-14;

/// One nonzero eigenbasis element `⟨ε_i|A|ε_j⟩` with gap `ε_j − ε_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub row: usize,
    pub col: usize,
    pub value: C64,
}

/// `A(ω) = Σ_{ε_j − ε_i = ω} ⟨ε_i|A|ε_j⟩ |ε_i⟩⟨ε_j|`, in the energy eigenbasis.
#[derive(Debug, Clone)]
pub struct BohrTerm {
    pub omega: f64,
    pub op: ComplexMatrix,
    pub transitions: Vec<Transition>,
}

/// Groups sorted values into runs whose consecutive spacing is at most
/// `tol`, returning the run boundaries `[start, end)`.
fn chain_runs(sorted: &[f64], tol: f64, inclusive: bool) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = 0;
    for k in 1..=sorted.len() {
        let split = k == sorted.len() || {
            let gap = sorted[k] - sorted[k - 1];
            if inclusive {
                gap > tol
            } else {
                gap >= tol
            }
        };
        if split {
            runs.push((start, k));
            start = k;
        }
    }
    runs
}

/// Arithmetic means of runs of a sorted, sign-symmetric list, forced to be
/// exactly antisymmetric (`mean[k] = −mean[n−1−k]`, middle run exactly 0).
pub(crate) fn symmetric_run_means(sorted: &[f64], runs: &[(usize, usize)]) -> Vec<f64> {
    let mut means: Vec<f64> = runs.iter().map(|&(a, b)| sorted[a..b].iter().sum::<f64>() / (b - a) as f64).collect();
    let n = runs.len();
    let mirrored = (0..n).all(|k| {
        let (a, b) = runs[k];
        let (ma, mb) = runs[n - 1 - k];
        b - a == mb - ma && (0..b - a).all(|i| sorted[a + i] == -sorted[mb - 1 - i])
    });
    if mirrored {
        for k in 0..n / 2 {
            means[k] = -means[n - 1 - k];
        }
        if n % 2 == 1 {
            means[n / 2] = 0.0;
        }
    }
    means
}

pub(crate) fn group_sorted(sorted: &[f64], tol: f64, inclusive: bool) -> (Vec<(usize, usize)>, Vec<f64>) {
    let runs = chain_runs(sorted, tol, inclusive);
    let means = symmetric_run_means(sorted, &runs);
    (runs, means)
}

/// Decompose Hermitian `a` (computational basis) over the Bohr frequencies
/// of `basis`. Gaps within `tol_degeneracy` of each other (single linkage)
/// merge into one frequency, their mean. Terms are sorted by frequency and
/// zero operators are not emitted.
pub fn bohr_decompose(basis: &EigenBasis, a: &ComplexMatrix, tol_degeneracy: f64) -> Result<Vec<BohrTerm>> {
    let norm = frobenius_norm(a);
    let defect = hermiticity_defect(a);
    let allowed = 1e-12 * norm.max(f64::MIN_POSITIVE);
    if defect > allowed {
        return Err(Error::NotHermitian { defect, allowed });
    }
    if !(tol_degeneracy > 0.0) {
        return Err(Error::Domain(format!("degeneracy tolerance must be positive, got {tol_degeneracy}")));
    }
    let d = basis.dim();
    let a_eig = basis.to_eigenbasis(a);
    let a_eig = (&a_eig + a_eig.adjoint()) * C64::new(0.5, 0.0);
    let cutoff = ELEMENT_CUTOFF * norm;

    let mut elements: Vec<(f64, Transition)> = Vec::new();
    for j in 0..d {
        for i in 0..d {
            let value = a_eig[(i, j)];
            if value.norm() > cutoff {
                elements.push((basis.energies[j] - basis.energies[i], Transition { row: i, col: j, value }));
            }
        }
    }
    elements.sort_by(|x, y| x.0.total_cmp(&y.0));
    let gaps: Vec<f64> = elements.iter().map(|e| e.0).collect();
    let (runs, means) = group_sorted(&gaps, tol_degeneracy, true);

    Ok(runs
        .iter()
        .zip(means)
        .map(|(&(lo, hi), omega)| {
            let mut op = ComplexMatrix::zeros(d, d);
            let mut transitions: Vec<Transition> = elements[lo..hi].iter().map(|e| e.1).collect();
            transitions.sort_by_key(|t| (t.col, t.row));
            for t in &transitions {
                op[(t.row, t.col)] = t.value;
            }
            BohrTerm { omega, op, transitions }
        })
        .collect())
}
