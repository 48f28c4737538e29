mod common;

use common::*;
use heatvalve::generators::GeneratorMethod;
use heatvalve::operators::{max_abs, trace_distance};
use heatvalve::steady_state::{evolve_ode, kernel_dimension, solve_steady_state, DensityMatrix};
use heatvalve::Error;

#[test]
fn single_bath_relaxes_to_gibbs() {
    let config = fig2();
    let t_l = config.baths[0].temperature;
    for phi in [0.0, 0.3, 0.5] {
        let system = single_bath_system(&config, phi);
        let l = system.generator(&GeneratorMethod::FullSecular).unwrap();
        let s = solve_steady_state(&l.total).unwrap();
        let gibbs = gibbs_by_exponential(&system, t_l);
        let dist = trace_distance(s.rho.matrix(), &gibbs);
        assert!(dist <= 1e-8, "phi = {phi}: trace distance {dist:.3e}");
        let diag = DensityMatrix::gibbs_diagonal(&system.basis().energies, t_l).unwrap();
        assert!(trace_distance(diag.matrix(), &gibbs) <= 1e-12);
    }
}

#[test]
fn equal_temperatures_give_gibbs() {
    let config = with_baths(&fig2(), |b| b.temperature = 1.2);
    for phi in [0.25, 0.5] {
        let system = heatvalve::sweep::prepare_point(&config, phi).unwrap();
        let s = solve_steady_state(&system.generator(&GeneratorMethod::FullSecular).unwrap().total).unwrap();
        let dist = trace_distance(s.rho.matrix(), &gibbs_by_exponential(&system, 1.2));
        assert!(dist <= 1e-8, "phi = {phi}: {dist:.3e}");
    }
}

#[test]
fn uncoupled_baths_leave_a_degenerate_kernel() {
    let config = with_baths(&fig2(), |b| b.alpha = 0.0);
    let system = heatvalve::sweep::prepare_point(&config, 0.2).unwrap();
    let l = system.generator(&GeneratorMethod::FullSecular).unwrap();
    match solve_steady_state(&l.total) {
        Err(Error::DegenerateKernel { kernel_dim }) => assert!(kernel_dim >= 18, "{kernel_dim}"),
        other => panic!("expected a degenerate kernel, got {other:?}"),
    }
}

#[test]
fn kernel_is_one_dimensional_on_the_default_grid() {
    let config = fig2();
    for phi in [0.0, 0.25, 0.5, 0.9] {
        let system = heatvalve::sweep::prepare_point(&config, phi).unwrap();
        for method in all_methods() {
            let l = system.generator(&method).unwrap();
            assert_eq!(kernel_dimension(&l.total), 1, "phi = {phi}, {method}");
        }
    }
}

#[test]
fn steady_state_is_a_fixed_point_of_the_integrator() {
    let config = fig2();
    let system = heatvalve::sweep::prepare_point(&config, 0.4).unwrap();
    for method in all_methods() {
        let l = system.generator(&method).unwrap().total;
        let s = solve_steady_state(&l).unwrap();
        let dt = 0.05 / l.inf_norm();
        let stepped = evolve_ode(&l, &s.rho, dt, dt).unwrap();
        let change = max_abs(&(stepped.matrix() - s.rho.matrix()));
        assert!(change <= 1e-10, "{method}: {change:.3e}");
    }
}

#[test]
fn integration_preserves_trace() {
    let config = fig2();
    let system = heatvalve::sweep::prepare_point(&config, 0.1).unwrap();
    let l = system.generator(&GeneratorMethod::PartialSecular { c_psa: 100.0 }).unwrap().total;
    let dt = 0.05 / l.inf_norm();
    let mut rho = DensityMatrix::maximally_mixed(18);
    for _ in 0..5 {
        rho = evolve_ode(&l, &rho, 2.0, dt).unwrap();
        assert!((rho.trace().re - 1.0).abs() <= 1e-9 && rho.trace().im.abs() <= 1e-9);
    }
}
