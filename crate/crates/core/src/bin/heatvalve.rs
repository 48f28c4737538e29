use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;

use heatvalve::circuit::Side;
use heatvalve::operators::{commutator, trace, I};
use heatvalve::generators::GeneratorMethod;
use heatvalve::steady_state::{kernel_dimension, validate_state};
use heatvalve::sweep::{self, SweepConfig};
use heatvalve::thermo::{heat_flow_golden_rule, to_si_power, GoldenRuleRates};
use heatvalve::Error;

#[derive(Parser)]
#[command(name = "heatvalve", version, about = "Steady-state heat flow through a resonator-qubit-resonator heat valve")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Config file, or the name of a bundled preset (fig2_psa, fig2_full_secular_lorentzian).
    #[arg(long, default_value = "fig2_psa")]
    config: String,
    /// Override the flux grid size.
    #[arg(long)]
    points: Option<usize>,
    /// Disable the Lamb-shift Hamiltonian on every bath.
    #[arg(long)]
    no_lamb_shift: bool,
    /// Concurrent flux points (0 = one per core).
    #[arg(long)]
    parallel: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the flux grid with one method and write CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// redfield, psa:C, full_secular, unified[:auto|:WIDTH]
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run several methods over the grid and report deviations and timings.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Repeat or comma-separate; defaults to psa:100 and unified:auto.
        #[arg(long, value_delimiter = ',')]
        method: Vec<String>,
        /// Directory for one CSV per method.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve one flux point and print diagnostics.
    Single {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        method: Option<String>,
        #[arg(long, default_value_t = 0.5)]
        phi: f64,
    },
    /// Check the model's invariants on a handful of flux points.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        method: Option<String>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } => 1,
        Error::File { .. } | Error::Csv { .. } => 3,
        _ => 2,
    }
}

fn parse_method(s: &str) -> Result<GeneratorMethod, Error> {
    s.parse().map_err(|e: Error| Error::Config { key: "--method".into(), message: e.to_string() })
}

fn load(common: &Common, method: Option<&str>) -> Result<SweepConfig, Error> {
    let mut config = sweep::resolve_config(&common.config)?;
    if let Some(n) = common.points {
        config.set_points(n)?;
    }
    if common.no_lamb_shift {
        config.set_lamb_shift(false);
    }
    if let Some(p) = common.parallel {
        config.parallelism = p;
    }
    if let Some(m) = method {
        config.method = parse_method(m)?;
    }
    Ok(config)
}

fn run_sweep(common: &Common, method: Option<&str>, out: Option<PathBuf>) -> Result<(), Error> {
    let config = load(common, method)?;
    let path = out.or_else(|| config.output.clone()).unwrap_or_else(|| PathBuf::from("heat_flow.csv"));
    let records = sweep::sweep_records(&config)?;
    sweep::write_csv(&records, &path)?;
    let failed = records.iter().filter(|r| !r.is_ok()).count();
    println!("wrote {} points ({} failed) to {}", records.len(), failed, path.display());
    sweep::check_failures(&records)
}

fn run_compare(common: &Common, methods: &[String], out: Option<PathBuf>) -> Result<(), Error> {
    let config = load(common, None)?;
    let methods: Vec<GeneratorMethod> = if methods.is_empty() {
        vec![parse_method("psa:100")?, parse_method("unified:auto")?]
    } else {
        methods.iter().map(|m| parse_method(m)).collect::<Result<_, _>>()?
    };
    let cmp = sweep::compare_methods(&config, &methods)?;
    for (m, t) in cmp.methods.iter().zip(&cmp.wall_times) {
        println!("{m:<16} assembly+solve {:>10.3} s", t.as_secs_f64());
    }
    for (a, b, dev) in cmp.deviation_table() {
        println!("max |dP_L|/|P_L|  {} vs {}: {dev:.3e}", cmp.methods[a], cmp.methods[b]);
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(&dir).map_err(|source| Error::File { path: dir.clone(), source })?;
        for (m, recs) in cmp.methods.iter().zip(&cmp.records) {
            let name = m.to_string().replace(':', "_");
            sweep::write_csv(recs, &dir.join(format!("{name}.csv")))?;
        }
    }
    for recs in &cmp.records {
        sweep::check_failures(recs)?;
    }
    Ok(())
}

fn run_single(common: &Common, method: Option<&str>, phi: f64) -> Result<(), Error> {
    let config = load(common, method)?;
    let system = sweep::prepare_point(&config, phi)?;
    println!("phi = {phi}, omega_q = {:.10} Omega_L, method {}", config.circuit.qubit_frequency(phi), config.method);
    println!("energies: {:?}", system.basis().energies.iter().map(|e| format!("{e:.6}")).collect::<Vec<_>>());
    for (k, c) in system.channels().iter().enumerate() {
        let pairs = system.pair_set(k, &config.method)?;
        println!(
            "bath {}: T = {:.4}, alpha = {}, {} Bohr frequencies, {} retained pairs, tau_R = {:.4e}",
            c.spec.side,
            c.spec.temperature,
            c.spec.alpha,
            c.terms.len(),
            pairs.len(),
            pairs.tau_r
        );
        let omegas: Vec<String> = c.terms.iter().map(|t| format!("{:.6}", t.omega)).collect();
        println!("  Bohr frequencies: {}", omegas.join(" "));
    }
    let s = sweep::solve_point(&system, &config.method, config.tolerances.solver)?;
    let diag = validate_state(&s.steady.rho, config.tolerances.pos_tol);
    println!("steady state: block {} of {}, relative residual {:.3e}", s.steady.block_size, system.dim() * system.dim(), s.residual);
    println!(
        "  hermiticity {:.2e}, trace defect {:.2e}, min eigenvalue {:.3e}, grade {:?}",
        diag.hermiticity_defect, diag.trace_defect, diag.min_eigenvalue, diag.grade
    );
    println!(
        "P_L = {:+.10e} ({:+.4e} W), P_R = {:+.10e} ({:+.4e} W), P_L + P_R = {:+.3e}",
        s.p_l,
        to_si_power(s.p_l, config.omega_l_si),
        s.p_r,
        to_si_power(s.p_r, config.omega_l_si),
        s.p_l + s.p_r
    );
    Ok(())
}

fn check(name: &str, ok: bool, detail: String) -> bool {
    println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn run_validate(common: &Common, method: Option<&str>) -> Result<(), Error> {
    let config = load(common, method)?;
    let lamb = config.baths.iter().any(|b| b.lamb_shift_enabled);
    let mut all = true;
    for phi in [0.0, 0.2, 0.45, 0.5, 0.8] {
        let system = sweep::prepare_point(&config, phi)?;
        let s = sweep::solve_point(&system, &config.method, config.tolerances.solver)?;
        let l = &s.generator.total;
        let norm = l.frobenius_norm();
        all &= check(
            &format!("phi={phi} trace preservation"),
            l.trace_preservation_defect() <= 1e-10 * norm,
            format!("{:.2e}", l.trace_preservation_defect() / norm),
        );
        let kdim = kernel_dimension(l);
        all &= check(&format!("phi={phi} unique steady state"), kdim == 1, format!("kernel dimension {kdim}"));
        let diag = validate_state(&s.steady.rho, config.tolerances.pos_tol);
        all &= check(&format!("phi={phi} state"), diag.grade != heatvalve::steady_state::Grade::Fail, format!("{diag:?}"));
        let toggled_config = {
            let mut c = config.clone();
            c.set_lamb_shift(!lamb);
            c
        };
        let toggled = sweep::solve_point(&sweep::prepare_point(&toggled_config, phi)?, &config.method, config.tolerances.solver)?;
        let (off, on) = if lamb { (&toggled, &s) } else { (&s, &toggled) };
        let scale = off.p_l.abs().max(off.p_r.abs());
        all &= check(
            &format!("phi={phi} first law"),
            (off.p_l + off.p_r).abs() <= 1e-10 * scale,
            format!("|P_L + P_R| / max|P| = {:.2e} without Lamb shift", (off.p_l + off.p_r).abs() / scale),
        );
        let h = system.basis().diagonal_hamiltonian();
        let lamb_power = (I * trace(&(&h * commutator(&on.generator.lamb_shift_total(), on.steady.rho.matrix())))).re;
        let defect = (on.p_l + on.p_r - lamb_power).abs() / on.p_l.abs().max(on.p_r.abs());
        all &= check(
            &format!("phi={phi} Lamb-shift energy balance"),
            defect <= 1e-9,
            format!("|P_L + P_R - i Tr(H[H_LS, rho])| / max|P| = {defect:.2e}"),
        );
        println!("info phi={phi}: P_L = {:+.10e} without Lamb shift, {:+.10e} with", off.p_l, on.p_l);
        let secular = sweep::solve_point(&system, &GeneratorMethod::FullSecular, config.tolerances.solver)?;
        for (side, p) in [(Side::L, secular.p_l), (Side::R, secular.p_r)] {
            let rates = GoldenRuleRates::from_channel(system.channel(side).expect("both baths configured"), system.basis())?;
            let golden = heat_flow_golden_rule(&rates, &secular.steady.rho)?;
            all &= check(
                &format!("phi={phi} golden rule {side}"),
                (golden - p).abs() <= 1e-10 * p.abs(),
                format!("relative difference {:.2e}", (golden - p).abs() / p.abs()),
            );
            all &= check(
                &format!("phi={phi} detailed balance {side}"),
                rates.detailed_balance_defect() <= 1e-10,
                format!("{:.2e}", rates.detailed_balance_defect()),
            );
        }
    }
    if all {
        Ok(())
    } else {
        Err(Error::Consistency("invariant checks failed".into()))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep { common, method, out } => run_sweep(&common, method.as_deref(), out),
        Command::Compare { common, method, out } => run_compare(&common, &method, out),
        Command::Single { common, method, phi } => run_single(&common, method.as_deref(), phi),
        Command::Validate { common, method } => run_validate(&common, method.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
