//! Sweep configuration: a strict TOML schema with dotted keys.
//!
//! ```toml
//! method = "psa:100"
//! circuit.omega_L_GHz = 5.3122     # Ω_L/2π; sets the SI scale
//! circuit.omega_R = 1.0            # everything else in units of Ω_L
//! circuit.g = 0.015
//! circuit.g12 = 0.007
//! circuit.E_C = 0.15
//! circuit.E_J0 = 28.75
//! circuit.d = 0.385
//! circuit.resonator_levels = 3
//! bath.L.temperature_mK = 308
//! bath.L.alpha = 0.04
//! bath.L.spectrum = "ohmic"        # or "lorentzian" with q, omega_r
//! bath.L.chi = 1.0
//! bath.L.omega_c = 50.0
//! bath.L.lamb_shift = false
//! # bath.R.* likewise
//! flux.points = 201                # optional: start, stop, points
//! tolerances.pos_tol = 1e-8        # optional: degeneracy, pos_tol, solver, quadrature
//! output.path = "out.csv"          # optional
//! run.parallelism = 0              # optional; 0 uses every core
//! ```

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::bath::{BathSpec, QuadratureSettings, SpectralModel};
use crate::circuit::{CircuitParams, Side, TransmonParams};
use crate::error::{Error, Result};
use crate::generators::{GeneratorMethod, GeneratorOptions};
use crate::thermo::natural_temperature;

pub const PRESETS: [(&str, &str); 2] = [
    ("fig2_psa", include_str!("../../presets/fig2_psa.toml")),
    ("fig2_full_secular_lorentzian", include_str!("../../presets/fig2_full_secular_lorentzian.toml")),
];

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    method: String,
    circuit: RawCircuit,
    bath: RawBaths,
    #[serde(default)]
    flux: RawFlux,
    #[serde(default)]
    tolerances: RawTolerances,
    #[serde(default)]
    output: RawOutput,
    #[serde(default)]
    run: RawRun,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCircuit {
    #[serde(rename = "omega_L_GHz")]
    omega_l_ghz: f64,
    #[serde(rename = "omega_R", default = "one")]
    omega_r: f64,
    g: f64,
    g12: f64,
    #[serde(rename = "E_C")]
    e_c: f64,
    #[serde(rename = "E_J0")]
    e_j0: f64,
    d: f64,
    resonator_levels: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBaths {
    #[serde(rename = "L")]
    l: RawBath,
    #[serde(rename = "R")]
    r: RawBath,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBath {
    #[serde(rename = "temperature_mK")]
    temperature_mk: f64,
    alpha: f64,
    spectrum: String,
    chi: f64,
    omega_c: Option<f64>,
    q: Option<f64>,
    omega_r: Option<f64>,
    #[serde(default)]
    lamb_shift: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawFlux {
    start: f64,
    stop: f64,
    points: usize,
}

impl Default for RawFlux {
    fn default() -> Self {
        Self { start: 0.0, stop: 1.0, points: 201 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawTolerances {
    degeneracy: f64,
    pos_tol: f64,
    solver: f64,
    quadrature: f64,
}

impl Default for RawTolerances {
    fn default() -> Self {
        Self { degeneracy: 1e-9, pos_tol: 1e-8, solver: 1e-10, quadrature: 1e-8 }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    path: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    #[serde(default)]
    parallelism: usize,
}

fn one() -> f64 {
    1.0
}

/// Equally spaced flux values `start..=stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl FluxGrid {
    pub fn new(start: f64, stop: f64, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::config("flux.points", format!("need at least 2 points, got {points}")));
        }
        if !(start < stop) || !start.is_finite() || !stop.is_finite() {
            return Err(Error::config("flux.start", format!("need finite start < stop, got {start} and {stop}")));
        }
        Ok(Self { start, stop, points })
    }

    pub fn step(&self) -> f64 {
        (self.stop - self.start) / (self.points - 1) as f64
    }

    /// Point `k` as `start + k·(stop − start)/(points − 1)`, so mirror
    /// points of a grid centered on half flux are exact mirrors.
    pub fn values(&self) -> Vec<f64> {
        let n = (self.points - 1) as f64;
        (0..self.points)
            .map(|k| if k + 1 == self.points { self.stop } else { self.start + (self.stop - self.start) * k as f64 / n })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub degeneracy: f64,
    pub pos_tol: f64,
    /// Accepted `‖L v‖₂ / ‖L‖_F` of a steady state.
    pub solver: f64,
    /// Absolute tolerance of the Lamb-shift quadrature.
    pub quadrature: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub circuit: CircuitParams,
    pub baths: Vec<BathSpec>,
    pub method: GeneratorMethod,
    pub flux: FluxGrid,
    pub tolerances: Tolerances,
    pub output: Option<PathBuf>,
    /// Concurrent flux points; 0 means one per core.
    pub parallelism: usize,
    /// `Ω_L` in rad/s.
    pub omega_l_si: f64,
}

impl SweepConfig {
    pub fn generator_options(&self) -> GeneratorOptions {
        GeneratorOptions {
            degeneracy_tol: self.tolerances.degeneracy,
            quadrature: QuadratureSettings { abs_tol: self.tolerances.quadrature, ..QuadratureSettings::default() },
        }
    }

    pub fn bath(&self, side: Side) -> Option<&BathSpec> {
        self.baths.iter().find(|b| b.side == side)
    }

    pub fn set_lamb_shift(&mut self, enabled: bool) {
        for b in &mut self.baths {
            b.lamb_shift_enabled = enabled;
        }
    }

    pub fn set_points(&mut self, points: usize) -> Result<()> {
        self.flux = FluxGrid::new(self.flux.start, self.flux.stop, points)?;
        Ok(())
    }
}

fn positive(key: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::config(key, format!("must be positive and finite, got {x}")))
    }
}

/// Name of the offending key in a deserializer message, if it quotes one.
fn offending_key(message: &str) -> Option<String> {
    for marker in ["unknown field `", "missing field `", "unknown variant `"] {
        if let Some(start) = message.find(marker) {
            let rest = &message[start + marker.len()..];
            if let Some(end) = rest.find('`') {
                return Some(rest[..end].to_string());
            }
        }
    }
    None
}

fn bath_from_raw(side: Side, raw: &RawBath, omega_l_si: f64) -> Result<BathSpec> {
    let key = |field: &str| format!("bath.{side}.{field}");
    let require = |field: &str, v: Option<f64>| -> Result<f64> {
        let k = key(field);
        positive(&k, v.ok_or_else(|| Error::config(&k, format!("required for spectrum `{}`", raw.spectrum)))?)
    };
    let forbid = |field: &str, v: Option<f64>| -> Result<()> {
        match v {
            Some(_) => Err(Error::config(key(field), format!("not a parameter of spectrum `{}`", raw.spectrum))),
            None => Ok(()),
        }
    };
    let chi = positive(&key("chi"), raw.chi)?;
    let model = match raw.spectrum.as_str() {
        "ohmic" => {
            forbid("q", raw.q)?;
            forbid("omega_r", raw.omega_r)?;
            SpectralModel::Ohmic { chi, omega_c: require("omega_c", raw.omega_c)? }
        }
        "lorentzian" => {
            forbid("omega_c", raw.omega_c)?;
            SpectralModel::LorentzianBandPass { chi, q: require("q", raw.q)?, omega_r: require("omega_r", raw.omega_r)? }
        }
        other => {
            return Err(Error::config(key("spectrum"), format!("expected `ohmic` or `lorentzian`, got `{other}`")));
        }
    };
    let t_mk = positive(&key("temperature_mK"), raw.temperature_mk)?;
    if !(0.0..1.0).contains(&raw.alpha) {
        return Err(Error::config(key("alpha"), format!("must lie in [0, 1), got {}", raw.alpha)));
    }
    let spec = BathSpec {
        side,
        model,
        temperature: natural_temperature(t_mk * 1e-3, omega_l_si),
        alpha: raw.alpha,
        lamb_shift_enabled: raw.lamb_shift,
    };
    spec.validate().map_err(|e| Error::config(format!("bath.{side}"), e.to_string()))?;
    Ok(spec)
}

/// Parse and validate a configuration document. `origin` names it in errors.
pub fn parse_config(text: &str, origin: &str) -> Result<SweepConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let message = e.message().to_string();
        let key = offending_key(&message).unwrap_or_else(|| origin.to_string());
        Error::config(key, message)
    })?;

    let c = &raw.circuit;
    let omega_l_si = 2.0 * PI * positive("circuit.omega_L_GHz", c.omega_l_ghz)? * 1e9;
    let transmon = TransmonParams { e_c: positive("circuit.E_C", c.e_c)?, e_j0: positive("circuit.E_J0", c.e_j0)?, d_asym: c.d };
    let circuit = CircuitParams {
        omega_l: 1.0,
        omega_r: positive("circuit.omega_R", c.omega_r)?,
        g: c.g,
        g12: c.g12,
        transmon,
        n_res_levels: c.resonator_levels,
    };
    circuit.validate().map_err(|e| Error::config("circuit", e.to_string()))?;

    let baths = vec![bath_from_raw(Side::L, &raw.bath.l, omega_l_si)?, bath_from_raw(Side::R, &raw.bath.r, omega_l_si)?];
    let method: GeneratorMethod = raw.method.parse().map_err(|e: Error| Error::config("method", e.to_string()))?;
    let flux = FluxGrid::new(raw.flux.start, raw.flux.stop, raw.flux.points)?;
    let t = &raw.tolerances;
    let tolerances = Tolerances {
        degeneracy: positive("tolerances.degeneracy", t.degeneracy)?,
        pos_tol: positive("tolerances.pos_tol", t.pos_tol)?,
        solver: positive("tolerances.solver", t.solver)?,
        quadrature: positive("tolerances.quadrature", t.quadrature)?,
    };
    Ok(SweepConfig { circuit, baths, method, flux, tolerances, output: raw.output.path, parallelism: raw.run.parallelism, omega_l_si })
}

pub fn load_config(path: &Path) -> Result<SweepConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::File { path: path.to_path_buf(), source })?;
    parse_config(&text, &path.display().to_string())
}

/// A bundled configuration by name.
pub fn preset(name: &str) -> Result<SweepConfig> {
    let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| Error::config("preset", format!("no preset named `{name}`")))?;
    parse_config(text, name)
}

/// A file path if it exists, otherwise a bundled preset of that name.
pub fn resolve_config(path_or_preset: &str) -> Result<SweepConfig> {
    let path = Path::new(path_or_preset);
    if path.exists() || PRESETS.iter().all(|(n, _)| *n != path_or_preset) {
        load_config(path)
    } else {
        preset(path_or_preset)
    }
}
