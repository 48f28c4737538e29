//! Heat currents from a bath into the system and SI conversion.
//!
//! Sign convention: `P_b > 0` means energy flows from bath `b` into the
//! system.

use nalgebra::DMatrix;

use crate::circuit::Side;
use crate::error::{Error, Result};
use crate::generators::{unvectorize, vectorize, BathChannel, Superoperator};
use crate::operators::{frobenius_norm, trace, ComplexMatrix, EigenBasis};
use crate::steady_state::DensityMatrix;

/// Reduced Planck constant, J·s (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K (exact).
pub const K_B: f64 = 1.380_649e-23;

/// `ħΩ_L²·p`, watts for a heat current given in units of `ħΩ_L²`.
pub fn to_si_power(p_natural: f64, omega_l_si: f64) -> f64 {
    debug_assert!(omega_l_si > 0.0, "Omega_L must be positive");
    HBAR * omega_l_si * omega_l_si * p_natural
}

/// `ħΩ_L / k_B` in kelvin.
pub fn temperature_unit_kelvin(omega_l_si: f64) -> f64 {
    HBAR * omega_l_si / K_B
}

/// `k_B T / ħΩ_L` for `T` in kelvin.
pub fn natural_temperature(kelvin: f64, omega_l_si: f64) -> f64 {
    kelvin / temperature_unit_kelvin(omega_l_si)
}

/// `P_b = Tr[H · D_b(ρ)]`; every operand in the same basis.
pub fn heat_flow_trace(h: &ComplexMatrix, d_b: &Superoperator, rho: &DensityMatrix) -> Result<f64> {
    if h.nrows() != d_b.dim() || rho.dim() != d_b.dim() {
        return Err(Error::Consistency(format!(
            "H is {}x{}, state is {}x{}, dissipator acts on dimension {}",
            h.nrows(),
            h.ncols(),
            rho.dim(),
            rho.dim(),
            d_b.dim()
        )));
    }
    let d = d_b.dim();
    let drho = unvectorize(&(d_b.matrix() * vectorize(rho.matrix())), d);
    let p = trace(&(h * &drho));
    let scale = frobenius_norm(h) * frobenius_norm(&drho);
    if p.im.abs() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Consistency(format!("heat flow has imaginary part {:.3e} against scale {scale:.3e}", p.im)));
    }
    Ok(p.re)
}

/// Golden-rule transition rates of one bath between energy eigenstates.
#[derive(Debug, Clone)]
pub struct GoldenRuleRates {
    pub side: Side,
    pub temperature: f64,
    pub energies: Vec<f64>,
    /// `rates[(i, j)] = Γ_{i→j} = α² γ(ε_i − ε_j) |⟨ε_i|A|ε_j⟩|²`.
    pub rates: DMatrix<f64>,
}

impl GoldenRuleRates {
    /// Rates from the same Bohr frequencies and `γ` values that the
    /// full-secular generator of `channel` uses.
    pub fn from_channel(channel: &BathChannel, basis: &EigenBasis) -> Result<Self> {
        let d = basis.dim();
        let alpha_sq = channel.spec.alpha * channel.spec.alpha;
        let mut rates = DMatrix::zeros(d, d);
        for term in &channel.terms {
            let gamma = channel.response.get(term.omega)?.gamma;
            for t in &term.transitions {
                if t.row >= d || t.col >= d {
                    return Err(Error::Consistency(format!("transition ({}, {}) outside dimension {d}", t.row, t.col)));
                }
                // Element (r, c) at ω = ε_c − ε_r moves population c → r.
                rates[(t.col, t.row)] += alpha_sq * gamma * t.value.norm_sqr();
            }
        }
        Ok(Self { side: channel.spec.side, temperature: channel.spec.temperature, energies: basis.energies.clone(), rates })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// `E_ij = ε_i − ε_j`.
    pub fn gap(&self, i: usize, j: usize) -> f64 {
        self.energies[i] - self.energies[j]
    }

    /// Largest `|Γ_{i→j} e^{E_ij/T} / Γ_{j→i} − 1|` over pairs with `Γ_{j→i} > 0`.
    pub fn detailed_balance_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let back = self.rates[(j, i)];
                if i != j && back > 0.0 {
                    let ratio = self.rates[(i, j)] / back;
                    let expected = (-self.gap(j, i) / self.temperature).exp();
                    worst = worst.max((ratio / expected - 1.0).abs());
                }
            }
        }
        worst
    }
}

/// `P_b = Σ_{i,j} Γ_{j→i} ρ_jj (ε_i − ε_j)`: energy gained by the system in
/// every jump `j → i`, weighted by the occupation of `j`. Only the
/// populations of `ρ` (eigenbasis of the rates) enter.
pub fn heat_flow_golden_rule(rates: &GoldenRuleRates, rho: &DensityMatrix) -> Result<f64> {
    let d = rates.dim();
    if rho.dim() != d {
        return Err(Error::Consistency(format!("rates cover {d} levels but the state has {}", rho.dim())));
    }
    let pops = rho.populations();
    let mut p = 0.0;
    for (j, &pj) in pops.iter().enumerate() {
        for i in 0..d {
            if i != j {
                p += rates.rates[(j, i)] * pj * rates.gap(i, j);
            }
        }
    }
    Ok(p)
}

/// One flux point of a sweep. On failure the numeric fields are NaN and
/// `error` says why.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatFlowRecord {
    pub phi: f64,
    pub omega_q: f64,
    pub p_l: f64,
    pub p_r: f64,
    pub p_l_si: f64,
    pub p_r_si: f64,
    pub residual: f64,
    pub min_eig: f64,
    pub method: String,
    pub error: Option<String>,
}

impl HeatFlowRecord {
    pub fn failed(phi: f64, omega_q: f64, method: String, error: String) -> Self {
        Self {
            phi,
            omega_q,
            p_l: f64::NAN,
            p_r: f64::NAN,
            p_l_si: f64::NAN,
            p_r_si: f64::NAN,
            residual: f64::NAN,
            min_eig: f64::NAN,
            method,
            error: Some(error),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}
