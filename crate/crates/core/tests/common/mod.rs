#![allow(dead_code)]

use heatvalve::bath::BathSpec;
use heatvalve::circuit::{bath_coupling_operator, build_system_hamiltonian, Side};
use heatvalve::generators::{ClusterWidth, GeneratorMethod, OpenSystem};
use heatvalve::operators::{trace, ComplexMatrix, C64};
use heatvalve::sweep::{self, SweepConfig};

pub fn fig2() -> SweepConfig {
    sweep::preset("fig2_psa").unwrap()
}

pub fn all_methods() -> [GeneratorMethod; 4] {
    [
        GeneratorMethod::Redfield,
        GeneratorMethod::PartialSecular { c_psa: 100.0 },
        GeneratorMethod::FullSecular,
        GeneratorMethod::Unified { delta_cluster: ClusterWidth::Auto },
    ]
}

pub fn with_baths(config: &SweepConfig, edit: impl Fn(&mut BathSpec)) -> SweepConfig {
    let mut c = config.clone();
    for b in &mut c.baths {
        edit(b);
    }
    c
}

/// `H_S` coupled to the left bath only.
pub fn single_bath_system(config: &SweepConfig, phi: f64) -> OpenSystem {
    let h = build_system_hamiltonian(&config.circuit, phi).unwrap();
    let space = config.circuit.space().unwrap();
    let spec = *config.bath(Side::L).unwrap();
    OpenSystem::new(&h, vec![(spec, bath_coupling_operator(Side::L, &space).unwrap())], &config.generator_options()).unwrap()
}

/// `e^{−H/T}/Z` by matrix exponential of `H` in the computational basis,
/// expressed in the eigenbasis of `system`.
pub fn gibbs_by_exponential(system: &OpenSystem, temperature: f64) -> ComplexMatrix {
    let h = system.hamiltonian();
    let ground = system.basis().energies[0];
    let shifted = h - ComplexMatrix::identity(h.nrows(), h.ncols()) * C64::new(ground, 0.0);
    let w = (shifted * C64::new(-1.0 / temperature, 0.0)).exp();
    let w = &w / trace(&w);
    system.basis().to_eigenbasis(&w)
}

pub fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
