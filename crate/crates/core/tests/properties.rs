mod common;

use common::*;
use heatvalve::bath::{rate_gamma, spectral_density, BathSpec, SpectralModel};
use heatvalve::circuit::{build_system_hamiltonian, excitation_number, Side};
use heatvalve::generators::GeneratorMethod;
use heatvalve::operators::{commutator, eigendecompose_hermitian, hermiticity_defect, max_abs, ComplexMatrix, C64};
use heatvalve::steady_state::{validate_state, Grade};
use heatvalve::sweep::{prepare_point, read_csv, solve_point, write_csv, FluxGrid};
use heatvalve::thermo::HeatFlowRecord;
use proptest::prelude::*;

fn method_strategy() -> impl Strategy<Value = GeneratorMethod> {
    (0usize..4).prop_map(|k| all_methods()[k])
}

fn bath(model: SpectralModel, temperature: f64) -> BathSpec {
    BathSpec { side: Side::L, model, temperature, alpha: 0.04, lamb_shift_enabled: false }
}

fn model_strategy() -> impl Strategy<Value = SpectralModel> {
    prop_oneof![
        (0.1f64..5.0, 1.0f64..100.0).prop_map(|(chi, omega_c)| SpectralModel::Ohmic { chi, omega_c }),
        (0.1f64..5.0, 1.0f64..50.0, 0.5f64..2.0).prop_map(|(chi, q, omega_r)| SpectralModel::LorentzianBandPass { chi, q, omega_r }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn eigendecomposition_reconstructs(seed in proptest::collection::vec(-2.0f64..2.0, 2 * 36)) {
        let m = ComplexMatrix::from_fn(6, 6, |r, c| C64::new(seed[r * 6 + c], seed[36 + r * 6 + c]));
        let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        let basis = eigendecompose_hermitian(&h).unwrap();
        prop_assert!(basis.unitarity_defect() <= 1e-12);
        prop_assert!(basis.reconstruction_residual(&h) <= 1e-12 * (1.0 + max_abs(&h)));
        prop_assert!(basis.energies.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn hamiltonian_is_hermitian_and_conserves_excitations(phi in -2.0f64..2.0) {
        let config = fig2();
        let h = build_system_hamiltonian(&config.circuit, phi).unwrap();
        prop_assert!(hermiticity_defect(&h) == 0.0);
        let n = excitation_number(&config.circuit.space().unwrap()).unwrap();
        prop_assert!(max_abs(&commutator(&h, &n)) <= 1e-14);
    }

    #[test]
    fn qubit_frequency_is_periodic_and_mirror_symmetric(phi in -3.0f64..3.0) {
        let c = fig2().circuit;
        let w = c.qubit_frequency(phi);
        prop_assert!((w - c.qubit_frequency(phi + 1.0)).abs() <= 1e-12);
        prop_assert!((w - c.qubit_frequency(-phi)).abs() <= 1e-12);
        prop_assert!(w >= c.qubit_frequency(0.5) - 1e-12 && w <= c.qubit_frequency(0.0) + 1e-12);
    }

    #[test]
    fn rates_obey_kms(model in model_strategy(), t in 0.05f64..5.0, w in 1e-3f64..20.0) {
        let b = bath(model, t);
        let (up, down) = (rate_gamma(&b, -w), rate_gamma(&b, w));
        prop_assert!(up >= 0.0 && down > 0.0);
        prop_assert!(spectral_density(&model, w).unwrap() > 0.0);
        prop_assert!(relative(up, down * (-w / t).exp()) <= 1e-10);
    }

    #[test]
    fn steady_state_is_a_valid_state_with_balanced_currents(phi in 0.0f64..1.0, m in method_strategy(), t_r in 0.2f64..1.0) {
        let mut config = fig2();
        config.baths[1].temperature = t_r;
        let system = prepare_point(&config, phi).unwrap();
        let s = solve_point(&system, &m, 1e-10).unwrap();
        let diag = validate_state(&s.steady.rho, 1e-8);
        prop_assert_eq!(diag.grade, Grade::Pass);
        prop_assert!(s.generator.total.trace_preservation_defect() <= 1e-12 * s.generator.total.frobenius_norm());
        prop_assert!((s.p_l + s.p_r).abs() <= 1e-10 * s.p_l.abs().max(s.p_r.abs()));
        prop_assert!(s.p_l > 0.0);
    }

    #[test]
    fn flux_grid_is_monotone_with_exact_ends(start in -1.0f64..1.0, span in 1e-3f64..3.0, points in 2usize..400) {
        let g = FluxGrid::new(start, start + span, points).unwrap();
        let v = g.values();
        prop_assert_eq!(v.len(), points);
        prop_assert_eq!(v[0], g.start);
        prop_assert_eq!(v[points - 1], g.stop);
        prop_assert!(v.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn csv_round_trip_is_exact(values in proptest::collection::vec(-1e3f64..1e3, 8), phi in 0.0f64..1.0) {
        let rec = HeatFlowRecord {
            phi,
            omega_q: values[0],
            p_l: values[1] * 1e-7,
            p_r: values[2] / 3.0,
            p_l_si: values[3] * 1e-19,
            p_r_si: values[4] * 1e-21,
            residual: values[5].abs() * 1e-18,
            min_eig: values[6] * 1e-9,
            method: "psa:100".into(),
            error: None,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        write_csv(std::slice::from_ref(&rec), &path).unwrap();
        prop_assert_eq!(read_csv(&path).unwrap(), vec![rec]);
    }
}
