//! Reservoir spectra: spectral densities, thermal occupation and the
//! one-sided Fourier transform `Γ(ω) = γ(ω)/2 + i S(ω)` of the bath
//! correlation function.
//!
//! The overall `α²` prefactor is *not* applied here; generator assembly
//! applies it once.

use std::f64::consts::PI;

use log::warn;

use crate::circuit::Side;
use crate::error::{Error, Result};
use crate::operators::C64;
use crate::quadrature::integrate_with_breaks;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralModel {
    /// `χω / (1 + ω²/ω_c²)`
    Ohmic { chi: f64, omega_c: f64 },
    /// `χω / (1 + Q²(ω/ω_r − ω_r/ω)²)`, a resonator-filtered ohmic bath.
    LorentzianBandPass { chi: f64, q: f64, omega_r: f64 },
}

impl SpectralModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SpectralModel::Ohmic { chi, omega_c } => {
                if !(chi > 0.0) || !(omega_c > 0.0) {
                    return Err(Error::Domain(format!("ohmic bath needs chi > 0 and omega_c > 0, got chi = {chi}, omega_c = {omega_c}")));
                }
            }
            SpectralModel::LorentzianBandPass { chi, q, omega_r } => {
                if !(chi > 0.0) || !(q > 0.0) || !(omega_r > 0.0) {
                    return Err(Error::Domain(format!("Lorentzian bath needs chi, Q, omega_r > 0, got {chi}, {q}, {omega_r}")));
                }
            }
        }
        Ok(())
    }

    pub fn chi(&self) -> f64 {
        match *self {
            SpectralModel::Ohmic { chi, .. } | SpectralModel::LorentzianBandPass { chi, .. } => chi,
        }
    }

    /// Characteristic frequency: the cutoff or the band-pass peak.
    pub fn scale(&self) -> f64 {
        match *self {
            SpectralModel::Ohmic { omega_c, .. } => omega_c,
            SpectralModel::LorentzianBandPass { omega_r, .. } => omega_r,
        }
    }

    fn density_unchecked(&self, omega: f64) -> f64 {
        match *self {
            SpectralModel::Ohmic { chi, omega_c } => {
                let x = omega / omega_c;
                chi * omega / (1.0 + x * x)
            }
            SpectralModel::LorentzianBandPass { chi, q, omega_r } => {
                if omega == 0.0 {
                    return 0.0;
                }
                let detune = omega / omega_r - omega_r / omega;
                chi * omega / (1.0 + q * q * detune * detune)
            }
        }
    }
}

pub fn spectral_density(m: &SpectralModel, omega: f64) -> Result<f64> {
    if !(omega >= 0.0) {
        return Err(Error::Domain(format!(
            "spectral density is defined for omega >= 0, got {omega}; use rate_gamma for signed frequencies"
        )));
    }
    Ok(m.density_unchecked(omega))
}

/// `1 / (exp(ω/T) − 1)`.
pub fn bose_occupancy(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("Bose occupancy needs omega > 0, got {omega}")));
    }
    if !(temperature > 0.0) {
        return Err(Error::Domain(format!("temperature must be positive, got {temperature}")));
    }
    Ok(1.0 / (omega / temperature).exp_m1())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    pub side: Side,
    pub model: SpectralModel,
    /// `k_B T / ħΩ_L`.
    pub temperature: f64,
    /// Dimensionless system–bath coupling.
    pub alpha: f64,
    pub lamb_shift_enabled: bool,
}

impl BathSpec {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !(self.temperature > 0.0) || !self.temperature.is_finite() {
            return Err(Error::Domain(format!("bath temperature must be positive, got {}", self.temperature)));
        }
        if !(self.alpha >= 0.0 && self.alpha < 1.0) {
            return Err(Error::Domain(format!("coupling alpha must lie in [0, 1), got {}", self.alpha)));
        }
        if self.alpha > 0.1 {
            warn!("bath {}: alpha = {} is not weak; the Born-Markov treatment may be unreliable", self.side, self.alpha);
        }
        Ok(())
    }
}

/// Dissipative rate `γ(ω) = 2 Re Γ(ω)`, without the `α²` prefactor.
///
/// Emission (`ω > 0`) carries `n + 1`, absorption (`ω < 0`) carries `n`,
/// so `γ(−ω) = e^{−ω/T} γ(ω)` holds by construction.
pub fn rate_gamma(b: &BathSpec, omega: f64) -> f64 {
    let t = b.temperature;
    if omega > 0.0 {
        // n + 1 = 1 / (1 − e^{−ω/T})
        -2.0 * PI * b.model.density_unchecked(omega) / (-omega / t).exp_m1()
    } else if omega < 0.0 {
        let w = -omega;
        2.0 * PI * b.model.density_unchecked(w) / (w / t).exp_m1()
    } else {
        match b.model {
            SpectralModel::Ohmic { chi, .. } => 2.0 * PI * chi * t,
            SpectralModel::LorentzianBandPass { .. } => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    /// Absolute tolerance on the principal-value integral.
    pub abs_tol: f64,
    /// Half-width of the excised window around the pole, relative to the
    /// larger of the spectral scale and `|ω|`.
    pub excision_rel: f64,
    pub max_segments: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self { abs_tol: 1e-8, excision_rel: 1e-6, max_segments: 20_000 }
    }
}

/// Integration window half-width `W = 20·max(scale, |ω|)`.
pub fn lamb_window(b: &BathSpec, omega: f64) -> f64 {
    20.0 * b.model.scale().max(omega.abs())
}

/// Lamb-shift function `S(ω) = Im Γ(ω) = (1/2π) PV∫ γ(ω′)/(ω − ω′) dω′`
/// over `[−W, W]` with a symmetric excision of half-width δ around the pole.
///
/// The constant part `γ(ω)` of the integrand is integrated analytically
/// (its excised principal value is `ln((W+ω)/(W−ω))` for any δ). The
/// remainder `(γ(ω′) − γ(ω))/(ω − ω′)` is smooth: the adaptive rule covers it
/// outside the excision and a two-point midpoint rule inside, so no `O(δ)`
/// bias is left behind.
pub fn lamb_shift_s(b: &BathSpec, omega: f64, settings: &QuadratureSettings) -> Result<f64> {
    if !b.lamb_shift_enabled || b.model.chi() == 0.0 {
        return Ok(0.0);
    }
    let w = lamb_window(b, omega);
    let delta = settings.excision_rel * b.model.scale().max(omega.abs());
    let g0 = rate_gamma(b, omega);
    let f = |x: f64| (rate_gamma(b, x) - g0) / (omega - x);

    let peak = b.model.scale();
    let mut breaks = vec![-w, -peak, 0.0, peak, w];
    breaks.retain(|&x| (x - omega).abs() > delta);
    breaks.push(omega - delta);
    breaks.push(omega + delta);
    breaks.sort_by(f64::total_cmp);

    let mut total = 0.0;
    for seg in breaks.windows(2) {
        let (lo, hi) = (seg[0], seg[1]);
        if hi <= lo || (lo == omega - delta && hi == omega + delta) {
            continue;
        }
        // Share the tolerance between the four or five segments.
        let r = integrate_with_breaks(f, &[lo, hi], settings.abs_tol / 8.0, settings.max_segments)?;
        total += r.value;
    }
    total += delta * (f(omega - 0.5 * delta) + f(omega + 0.5 * delta));
    total += g0 * ((w + omega) / (w - omega)).ln();
    Ok(total / (2.0 * PI))
}

/// `Γ(ω) = γ(ω)/2 + i S(ω)` at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseValue {
    pub omega: f64,
    pub gamma: f64,
    pub s_shift: f64,
}

impl ResponseValue {
    pub fn big_gamma(&self) -> C64 {
        C64::new(0.5 * self.gamma, self.s_shift)
    }
}

/// Cached `γ` and `S` at a fixed set of frequencies for one bath.
#[derive(Debug, Clone)]
pub struct BathResponse {
    values: Vec<ResponseValue>,
}

impl BathResponse {
    pub fn compute(b: &BathSpec, frequencies: &[f64], settings: &QuadratureSettings) -> Result<Self> {
        let mut omegas: Vec<f64> = frequencies.to_vec();
        omegas.sort_by(f64::total_cmp);
        omegas.dedup();
        let values = omegas
            .into_iter()
            .map(|omega| Ok(ResponseValue { omega, gamma: rate_gamma(b, omega), s_shift: lamb_shift_s(b, omega, settings)? }))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { values })
    }

    /// Exact-match lookup; frequencies must come from the same computation
    /// that built the cache.
    pub fn get(&self, omega: f64) -> Result<ResponseValue> {
        self.values
            .binary_search_by(|v| v.omega.total_cmp(&omega))
            .map(|k| self.values[k])
            .map_err(|_| Error::Consistency(format!("no bath response cached at omega = {omega}")))
    }

    pub fn values(&self) -> &[ResponseValue] {
        &self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ohmic(chi: f64) -> SpectralModel {
        SpectralModel::Ohmic { chi, omega_c: 50.0 }
    }

    fn bath(model: SpectralModel, t: f64, lamb: bool) -> BathSpec {
        BathSpec { side: Side::L, model, temperature: t, alpha: 0.04, lamb_shift_enabled: lamb }
    }

    #[test]
    fn spectral_density_reference_points() {
        let m = SpectralModel::Ohmic { chi: 0.7, omega_c: 3.0 };
        assert!((spectral_density(&m, 3.0).unwrap() - 0.7 * 3.0 / 2.0).abs() < 1e-15);
        let l = SpectralModel::LorentzianBandPass { chi: 0.7, q: 20.0, omega_r: 1.3 };
        assert!((spectral_density(&l, 1.3).unwrap() - 0.7 * 1.3).abs() < 1e-15);
        assert_eq!(spectral_density(&m, 0.0).unwrap(), 0.0);
        assert_eq!(spectral_density(&l, 0.0).unwrap(), 0.0);
        assert!(matches!(spectral_density(&m, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn ohmic_high_frequency_decay() {
        let m = SpectralModel::Ohmic { chi: 1.0, omega_c: 2.0 };
        let (w1, w2) = (1e4, 1e6);
        let slope = (spectral_density(&m, w2).unwrap().ln() - spectral_density(&m, w1).unwrap().ln()) / (w2.ln() - w1.ln());
        assert!((slope + 1.0).abs() < 1e-6);
        assert!((spectral_density(&m, w2).unwrap() * w2 / 4.0 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn bose_reference_values() {
        assert!((bose_occupancy(2f64.ln(), 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(bose_occupancy(1.0, 1e-6).unwrap(), 0.0);
        assert!((bose_occupancy(1.0, 1.2081).unwrap() - 0.7763).abs() < 1e-4);
        assert!(bose_occupancy(0.0, 1.0).is_err());
        assert!(bose_occupancy(1.0, 0.0).is_err());
    }

    #[test]
    fn gamma_zero_frequency_limits() {
        let b = bath(ohmic(0.3), 1.2, false);
        assert!((rate_gamma(&b, 0.0) - 2.0 * PI * 0.3 * 1.2).abs() < 1e-15);
        let eps = 1e-6;
        assert!((rate_gamma(&b, eps) - rate_gamma(&b, 0.0)).abs() < 1e-4 * rate_gamma(&b, 0.0));
        assert!((rate_gamma(&b, -eps) - rate_gamma(&b, 0.0)).abs() < 1e-4 * rate_gamma(&b, 0.0));
        let l = bath(SpectralModel::LorentzianBandPass { chi: 1.0, q: 20.0, omega_r: 1.0 }, 1.2, false);
        assert_eq!(rate_gamma(&l, 0.0), 0.0);
    }

    #[test]
    fn gamma_cold_bath_does_not_absorb() {
        let b = bath(ohmic(1.0), 1e-4, false);
        assert_eq!(rate_gamma(&b, -1.0), 0.0);
        assert!(rate_gamma(&b, 1.0) > 0.0);
    }

    #[test]
    fn gamma_detailed_balance() {
        for t in [0.3922, 1.2081] {
            let b = bath(ohmic(1.0), t, false);
            for k in 1..40 {
                let w = 0.25 * k as f64;
                let ratio = rate_gamma(&b, -w) / rate_gamma(&b, w);
                assert!((ratio / (-w / t).exp() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lamb_shift_switches() {
        let settings = QuadratureSettings::default();
        assert_eq!(lamb_shift_s(&bath(ohmic(1.0), 1.2, false), 1.0, &settings).unwrap(), 0.0);
        let zero = bath(ohmic(0.0), 1.2, true);
        for w in [-3.0, 0.0, 1.0, 7.5] {
            assert_eq!(lamb_shift_s(&zero, w, &settings).unwrap(), 0.0);
        }
    }

    #[test]
    fn lamb_shift_is_linear_in_chi() {
        let settings = QuadratureSettings::default();
        let s1 = lamb_shift_s(&bath(ohmic(1.0), 1.2, true), 1.0, &settings).unwrap();
        let s2 = lamb_shift_s(&bath(ohmic(2.5), 1.2, true), 1.0, &settings).unwrap();
        assert!((s2 - 2.5 * s1).abs() < 1e-8 * s2.abs());
        assert!(s1 < 0.0);
    }

    #[test]
    fn response_cache_lookup() {
        let b = bath(ohmic(1.0), 1.2, false);
        let r = BathResponse::compute(&b, &[1.0, -1.0, 1.0, 0.5], &QuadratureSettings::default()).unwrap();
        assert_eq!(r.values().len(), 3);
        assert_eq!(r.get(-1.0).unwrap().gamma, rate_gamma(&b, -1.0));
        assert!(matches!(r.get(2.0), Err(Error::Consistency(_))));
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let n = n + n % 2;
        let h = (b - a) / n as f64;
        let inner: f64 = (1..n).map(|k| f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 }).sum();
        (f(a) + f(b) + inner) * h / 3.0
    }

    /// `S(ω)` with the pole folded away, `PV∫ γ(x)/(ω − x) = ∫₀ [γ(ω−u) − γ(ω+u)]/u du`
    /// over the part of the window symmetric about `ω`, plus the regular
    /// leftover strip, both by composite Simpson.
    fn folded_lamb_oracle(b: &BathSpec, omega: f64) -> f64 {
        let w = lamb_window(b, omega);
        let reach = w - omega.abs();
        let h = 1e-5;
        let slope = (rate_gamma(b, omega + h) - rate_gamma(b, omega - h)) / (2.0 * h);
        let folded = |u: f64| if u == 0.0 { -2.0 * slope } else { (rate_gamma(b, omega - u) - rate_gamma(b, omega + u)) / u };
        let near = simpson(folded, 0.0, 2.0 * b.model.scale(), 400_000);
        let far = simpson(folded, 2.0 * b.model.scale(), reach, 400_000);
        let strip = |x: f64| rate_gamma(b, x) / (omega - x);
        let leftover = if omega >= 0.0 { simpson(strip, -w, omega - reach, 20_000) } else { simpson(strip, omega + reach, w, 20_000) };
        (near + far + leftover) / (2.0 * PI)
    }

    #[test]
    fn lamb_shift_matches_folded_oracle() {
        for t in [1.2081, 0.3922] {
            let b = bath(ohmic(1.0), t, true);
            for omega in [1.0, -1.0, 0.02, 3.5] {
                let s = lamb_shift_s(&b, omega, &QuadratureSettings::default()).unwrap();
                let oracle = folded_lamb_oracle(&b, omega);
                assert!((s - oracle).abs() <= 1e-6 * oracle.abs(), "T = {t}, w = {omega}: {s} vs {oracle}");
            }
        }
        let lorentz = bath(SpectralModel::LorentzianBandPass { chi: 1.0, q: 20.0, omega_r: 1.0 }, 1.2081, true);
        for omega in [1.0, -0.97] {
            let s = lamb_shift_s(&lorentz, omega, &QuadratureSettings::default()).unwrap();
            let oracle = folded_lamb_oracle(&lorentz, omega);
            assert!((s - oracle).abs() <= 1e-6 * oracle.abs(), "w = {omega}: {s} vs {oracle}");
        }
    }

    #[test]
    fn lamb_shift_converges_under_refinement() {
        let b = bath(ohmic(1.0), 1.2081, true);
        let oracle = folded_lamb_oracle(&b, 1.0);
        let err = |abs_tol: f64| {
            let q = QuadratureSettings { abs_tol, ..QuadratureSettings::default() };
            (lamb_shift_s(&b, 1.0, &q).unwrap() - oracle).abs()
        };
        let (coarse, fine) = (err(1e-3), err(1e-9));
        assert!(fine <= (0.5 * coarse).max(1e-9), "{coarse:.3e} -> {fine:.3e}");
    }
}
