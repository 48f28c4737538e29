//! Flux sweeps, method comparisons and CSV output.

pub mod config;
pub mod csv_io;

pub use config::{load_config, parse_config, preset, resolve_config, FluxGrid, SweepConfig, Tolerances, PRESETS};
pub use csv_io::{read_csv, write_csv, CSV_HEADER};

use std::time::{Duration, Instant};

use log::{info, warn};
use rayon::prelude::*;

use crate::circuit::{build_system_hamiltonian, Side};
use crate::error::{Error, Result};
use crate::generators::{GeneratorMethod, Liouvillian, OpenSystem};
use crate::steady_state::{solve_steady_state, validate_state, SteadyState};
use crate::thermo::{heat_flow_trace, to_si_power, HeatFlowRecord};

/// Failed-point fraction above which a sweep is reported as failed.
pub const MAX_FAILURE_FRACTION: f64 = 0.1;

/// `H_S` at flux `phi`, diagonalized, with the configured baths attached.
pub fn prepare_point(config: &SweepConfig, phi: f64) -> Result<OpenSystem> {
    let h = build_system_hamiltonian(&config.circuit, phi)?;
    let space = config.circuit.space()?;
    OpenSystem::for_circuit(&h, &space, &config.baths, &config.generator_options())
}

/// Everything computed for one method at one flux point.
#[derive(Debug, Clone)]
pub struct PointSolution {
    pub generator: Liouvillian,
    pub steady: SteadyState,
    pub p_l: f64,
    pub p_r: f64,
    /// `‖L vec(ρ)‖₂ / ‖L‖_F`.
    pub residual: f64,
    pub min_eig: f64,
}

pub fn solve_point(system: &OpenSystem, method: &GeneratorMethod, residual_tol: f64) -> Result<PointSolution> {
    let generator = system.generator(method)?;
    let steady = solve_steady_state(&generator.total)?;
    let residual = steady.relative_residual(&generator.total);
    if residual > residual_tol {
        return Err(Error::Solver(format!("relative residual {residual:.3e} above {residual_tol:.1e}")));
    }
    let h = system.basis().diagonal_hamiltonian();
    let flow = |side: Side| -> Result<f64> {
        match generator.bath(side) {
            Some(b) => heat_flow_trace(&h, &b.dissipator, &steady.rho),
            None => Ok(0.0),
        }
    };
    let (p_l, p_r) = (flow(Side::L)?, flow(Side::R)?);
    let min_eig = steady.rho.min_eigenvalue();
    Ok(PointSolution { generator, steady, p_l, p_r, residual, min_eig })
}

fn record_from(config: &SweepConfig, phi: f64, method: &GeneratorMethod, result: Result<PointSolution>) -> HeatFlowRecord {
    let omega_q = config.circuit.qubit_frequency(phi);
    match result {
        Ok(s) => {
            let diag = validate_state(&s.steady.rho, config.tolerances.pos_tol);
            if diag.grade != crate::steady_state::Grade::Pass {
                warn!("phi = {phi}: steady state graded {:?} (min eigenvalue {:.3e})", diag.grade, diag.min_eigenvalue);
            }
            HeatFlowRecord {
                phi,
                omega_q,
                p_l: s.p_l,
                p_r: s.p_r,
                p_l_si: to_si_power(s.p_l, config.omega_l_si),
                p_r_si: to_si_power(s.p_r, config.omega_l_si),
                residual: s.residual,
                min_eig: s.min_eig,
                method: method.to_string(),
                error: None,
            }
        }
        Err(e) => {
            warn!("phi = {phi}: {e}");
            HeatFlowRecord::failed(phi, omega_q, method.to_string(), e.to_string())
        }
    }
}

/// One record for flux `phi` with `method`; failures land in the record.
pub fn evaluate_point(config: &SweepConfig, phi: f64, method: &GeneratorMethod) -> HeatFlowRecord {
    let result = prepare_point(config, phi).and_then(|s| solve_point(&s, method, config.tolerances.solver));
    record_from(config, phi, method, result)
}

fn with_pool<T: Send>(parallelism: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::Solver(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(job))
}

/// Records for every grid point in grid order, failures included.
pub fn sweep_records(config: &SweepConfig) -> Result<Vec<HeatFlowRecord>> {
    let grid = config.flux.values();
    info!("sweeping {} flux points with {}", grid.len(), config.method);
    with_pool(config.parallelism, || grid.par_iter().map(|&phi| evaluate_point(config, phi, &config.method)).collect())
}

/// `Err(SweepFailed)` when more than 10% of the records failed.
pub fn check_failures(records: &[HeatFlowRecord]) -> Result<()> {
    let failed = records.iter().filter(|r| !r.is_ok()).count();
    if failed as f64 > MAX_FAILURE_FRACTION * records.len() as f64 {
        return Err(Error::SweepFailed { failed, total: records.len() });
    }
    Ok(())
}

/// Sweep the configured grid; isolated point failures are kept in their
/// records, too many of them fail the sweep.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<HeatFlowRecord>> {
    let records = sweep_records(config)?;
    check_failures(&records)?;
    Ok(records)
}

/// Per-method records over one grid, with timings and deviations.
#[derive(Debug, Clone)]
pub struct MethodComparison {
    pub methods: Vec<GeneratorMethod>,
    /// `records[m][k]`: method `m` at grid point `k`.
    pub records: Vec<Vec<HeatFlowRecord>>,
    /// Generator assembly plus steady-state solve, summed over the grid.
    pub wall_times: Vec<Duration>,
}

impl MethodComparison {
    /// `max_k |P_L^a − P_L^b| / max(|P_L^a|, |P_L^b|)`; NaN if any point failed.
    pub fn max_relative_deviation(&self, a: usize, b: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for (ra, rb) in self.records[a].iter().zip(&self.records[b]) {
            if !ra.is_ok() || !rb.is_ok() {
                return f64::NAN;
            }
            let scale = ra.p_l.abs().max(rb.p_l.abs());
            if scale > 0.0 {
                worst = worst.max((ra.p_l - rb.p_l).abs() / scale);
            }
        }
        worst
    }

    pub fn deviation_table(&self) -> Vec<(usize, usize, f64)> {
        let n = self.methods.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                out.push((a, b, self.max_relative_deviation(a, b)));
            }
        }
        out
    }
}

/// Run several methods over the configured grid, sharing one
/// diagonalization per flux point.
pub fn compare_methods(config: &SweepConfig, methods: &[GeneratorMethod]) -> Result<MethodComparison> {
    if methods.len() < 2 {
        return Err(Error::Domain(format!("comparison needs at least two methods, got {}", methods.len())));
    }
    let grid = config.flux.values();
    let per_point: Vec<Vec<(HeatFlowRecord, Duration)>> = with_pool(config.parallelism, || {
        grid.par_iter()
            .map(|&phi| match prepare_point(config, phi) {
                Ok(system) => methods
                    .iter()
                    .map(|m| {
                        let start = Instant::now();
                        let result = solve_point(&system, m, config.tolerances.solver);
                        let elapsed = start.elapsed();
                        (record_from(config, phi, m, result), elapsed)
                    })
                    .collect(),
                Err(e) => {
                    let msg = e.to_string();
                    methods.iter().map(|m| (record_from(config, phi, m, Err(Error::Solver(msg.clone()))), Duration::ZERO)).collect()
                }
            })
            .collect()
    })?;
    let mut records = vec![Vec::with_capacity(grid.len()); methods.len()];
    let mut wall_times = vec![Duration::ZERO; methods.len()];
    for point in per_point {
        for (m, (rec, t)) in point.into_iter().enumerate() {
            records[m].push(rec);
            wall_times[m] += t;
        }
    }
    Ok(MethodComparison { methods: methods.to_vec(), records, wall_times })
}
