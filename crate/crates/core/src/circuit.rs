//! Flux-tunable resonator–qubit–resonator Hamiltonian.
//!
//! Natural units throughout: ħ = 1 and all energies in units of the left
//! resonator frequency Ω_L.

use std::f64::consts::PI;
use std::fmt;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{annihilation, tensor_embed, ComplexMatrix, CompositeSpace, C64, I};

/// Which reservoir / resonator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    L,
    R,
}

impl Side {
    pub fn label(self) -> &'static str {
        match self {
            Side::L => "L",
            Side::R => "R",
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::L => Side::R,
            Side::R => Side::L,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Transmon parameters in units of Ω_L.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmonParams {
    pub e_c: f64,
    pub e_j0: f64,
    /// Junction asymmetry `d ∈ [0, 1]`.
    pub d_asym: f64,
}

impl TransmonParams {
    pub fn new(e_c: f64, e_j0: f64, d_asym: f64) -> Result<Self> {
        let p = Self { e_c, e_j0, d_asym };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e_c > 0.0) {
            return Err(Error::Domain(format!("E_C must be positive, got {}", self.e_c)));
        }
        if !(self.e_j0 > 0.0) {
            return Err(Error::Domain(format!("E_J0 must be positive, got {}", self.e_j0)));
        }
        if !(0.0..=1.0).contains(&self.d_asym) {
            return Err(Error::Domain(format!("asymmetry d must lie in [0, 1], got {}", self.d_asym)));
        }
        let ratio = self.e_j0 / self.e_c;
        if ratio <= 1.0 {
            return Err(Error::Domain(format!("E_J0/E_C = {ratio} is outside the transmon regime")));
        }
        if ratio < 10.0 {
            warn!("E_J0/E_C = {ratio:.3} is below 10; the transmon frequency formula is unreliable");
        }
        Ok(())
    }

    /// Josephson energy at reduced flux `phi` (flux over the flux quantum).
    ///
    /// Uses `E_J0·√(cos²(πφ) + d²sin²(πφ))`, which equals
    /// `E_J0·|cos(πφ)|·√(1 + d²tan²(πφ))` without the 0·∞ at half flux.
    /// The flux is first folded into `[0, ½]` so the period-1 and mirror
    /// symmetries hold bit-for-bit.
    pub fn josephson_energy(&self, phi: f64) -> f64 {
        let folded = (phi - phi.round()).abs();
        let (s, c) = (PI * folded).sin_cos();
        self.e_j0 * (c * c + self.d_asym * self.d_asym * s * s).sqrt()
    }
}

/// `ω_q(φ) = √(8 E_J(φ) E_C) − E_C`.
pub fn transmon_frequency(phi: f64, p: &TransmonParams) -> f64 {
    (8.0 * p.josephson_energy(phi) * p.e_c).sqrt() - p.e_c
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitParams {
    pub omega_l: f64,
    pub omega_r: f64,
    /// Qubit–resonator coupling, equal on both sides.
    pub g: f64,
    /// Direct resonator–resonator coupling; the sign is physical.
    pub g12: f64,
    pub transmon: TransmonParams,
    pub n_res_levels: usize,
}

impl CircuitParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_l > 0.0 && self.omega_r > 0.0) {
            return Err(Error::Domain(format!("resonator frequencies must be positive, got {} and {}", self.omega_l, self.omega_r)));
        }
        if self.n_res_levels < 2 {
            return Err(Error::InvalidDimension(format!("resonators need at least 2 levels, got {}", self.n_res_levels)));
        }
        if !self.g.is_finite() || !self.g12.is_finite() {
            return Err(Error::Domain("couplings must be finite".into()));
        }
        let min_omega = self.omega_l.min(self.omega_r);
        if self.g.abs() >= min_omega || self.g12.abs() >= min_omega {
            warn!("couplings g = {}, g12 = {} are not small against the resonator frequency {min_omega}", self.g, self.g12);
        }
        self.transmon.validate()
    }

    pub fn space(&self) -> Result<CompositeSpace> {
        CompositeSpace::resonator_qubit_resonator(self.n_res_levels)
    }

    pub fn qubit_frequency(&self, phi: f64) -> f64 {
        transmon_frequency(phi, &self.transmon)
    }
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// System Hamiltonian in the rotating-wave form
///
/// `Ω_L a_L†a_L + Ω_R a_R†a_R + ω_q σ₊σ₋ + g(a_Lσ₊ + a_L†σ₋ + a_Rσ₊ + a_R†σ₋) + g12(a_L a_R† + a_L† a_R)`
///
/// on the space `[n_res, 2, n_res]`.
pub fn build_system_hamiltonian(c: &CircuitParams, phi: f64) -> Result<ComplexMatrix> {
    let space = c.space()?;
    let a = annihilation(c.n_res_levels)?;
    let a_l = tensor_embed(&a, 0, &space)?;
    let a_r = tensor_embed(&a, 2, &space)?;
    let sm = tensor_embed(&annihilation(2)?, 1, &space)?;
    let sp = sm.adjoint();
    let a_l_dag = a_l.adjoint();
    let a_r_dag = a_r.adjoint();
    let omega_q = c.qubit_frequency(phi);

    let mut h = &a_l_dag * &a_l * real(c.omega_l);
    h += &a_r_dag * &a_r * real(c.omega_r);
    h += &sp * &sm * real(omega_q);
    h += (&a_l * &sp + &a_l_dag * &sm + &a_r * &sp + &a_r_dag * &sm) * real(c.g);
    h += (&a_l * &a_r_dag + &a_l_dag * &a_r) * real(c.g12);
    // Products of real embedded matrices are exactly Hermitian already;
    // symmetrise anyway so downstream checks see a defect of exactly zero.
    Ok((&h + h.adjoint()) * real(0.5))
}

/// Total excitation number `a_L†a_L + σ₊σ₋ + a_R†a_R`.
pub fn excitation_number(space: &CompositeSpace) -> Result<ComplexMatrix> {
    let mut n = ComplexMatrix::zeros(space.total_dim(), space.total_dim());
    for (slot, &d) in space.dims().iter().enumerate() {
        let a = annihilation(d)?;
        n += tensor_embed(&(a.adjoint() * &a), slot, space)?;
    }
    Ok(n)
}

/// Hermitian momentum quadrature `i(a† − a)` of the resonator on `side`.
pub fn bath_coupling_operator(side: Side, space: &CompositeSpace) -> Result<ComplexMatrix> {
    let slot = space.slot(side.label())?;
    let a = annihilation(space.dims()[slot])?;
    let quad = (a.adjoint() - &a) * I;
    tensor_embed(&quad, slot, space)
}
