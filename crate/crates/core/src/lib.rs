//! Open-system model of a resonator–qubit–resonator quantum heat valve.
//!
//! The pipeline, one flux point at a time: build `H_S` ([`circuit`]),
//! diagonalize it and split each bath coupling into Bohr components
//! ([`generators`]), assemble a Redfield, partial-secular, full-secular or
//! unified Liouvillian, solve for the steady state ([`steady_state`]) and
//! evaluate the heat currents ([`thermo`]). [`sweep`] runs that over a flux
//! grid and writes CSV.
//!
//! Units: `ħ = 1`, frequencies and energies in units of `Ω_L`, temperatures
//! as `k_B T / ħΩ_L`, heat currents in `ħΩ_L²`.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bath;
pub mod circuit;
pub mod error;
pub mod generators;
pub mod operators;
pub mod quadrature;
pub mod steady_state;
pub mod sweep;
pub mod thermo;

pub use error::{Error, Result};
