//! Which `(ω, ω′)` cross terms of the dissipator survive, per method.

use std::fmt;
use std::str::FromStr;

use super::bohr::{group_sorted, BohrTerm};
use crate::bath::BathResponse;
use crate::error::{Error, Result};
use crate::operators::{ComplexMatrix, ZERO};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClusterWidth {
    /// `1/τ_R` of the bath.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorMethod {
    Redfield,
    PartialSecular { c_psa: f64 },
    FullSecular,
    Unified { delta_cluster: ClusterWidth },
}

impl GeneratorMethod {
    pub fn validate(&self) -> Result<()> {
        match *self {
            GeneratorMethod::PartialSecular { c_psa } if !(c_psa > 0.0) => {
                Err(Error::Domain(format!("C_PSA must be positive, got {c_psa}")))
            }
            GeneratorMethod::Unified { delta_cluster: ClusterWidth::Fixed(d) } if !(d > 0.0) => {
                Err(Error::Domain(format!("cluster width must be positive, got {d}")))
            }
            _ => Ok(()),
        }
    }

    /// GKSL-form generators (completely positive by construction).
    pub fn is_gksl(&self) -> bool {
        matches!(self, GeneratorMethod::FullSecular | GeneratorMethod::Unified { .. })
    }
}

impl fmt::Display for GeneratorMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorMethod::Redfield => write!(f, "redfield"),
            GeneratorMethod::PartialSecular { c_psa } => write!(f, "psa:{c_psa}"),
            GeneratorMethod::FullSecular => write!(f, "full_secular"),
            GeneratorMethod::Unified { delta_cluster: ClusterWidth::Auto } => write!(f, "unified:auto"),
            GeneratorMethod::Unified { delta_cluster: ClusterWidth::Fixed(d) } => write!(f, "unified:{d}"),
        }
    }
}

impl FromStr for GeneratorMethod {
    type Err = Error;

    /// `redfield`, `psa:C`, `full_secular`, `unified[:auto|:WIDTH]`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::Domain(msg);
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p.trim())),
            None => (s.trim(), None),
        };
        let number = |p: &str| p.parse::<f64>().map_err(|_| bad(format!("`{p}` is not a number in method `{s}`")));
        let method = match (name.to_ascii_lowercase().as_str(), param) {
            ("redfield", None) => GeneratorMethod::Redfield,
            ("psa" | "partial_secular", Some(p)) => GeneratorMethod::PartialSecular { c_psa: number(p)? },
            ("psa" | "partial_secular", None) => {
                return Err(bad(format!("method `{s}` needs a cutoff, e.g. `psa:100`")));
            }
            ("full_secular" | "secular", None) => GeneratorMethod::FullSecular,
            ("unified", None) => GeneratorMethod::Unified { delta_cluster: ClusterWidth::Auto },
            ("unified", Some(p)) if p.eq_ignore_ascii_case("auto") => GeneratorMethod::Unified { delta_cluster: ClusterWidth::Auto },
            ("unified", Some(p)) => GeneratorMethod::Unified { delta_cluster: ClusterWidth::Fixed(number(p)?) },
            _ => return Err(bad(format!("unknown method `{s}`"))),
        };
        method.validate()?;
        Ok(method)
    }
}

/// A set of Bohr frequencies sharing one jump frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Indices into the frequency list that was clustered.
    pub members: Vec<usize>,
    pub representative: f64,
}

/// Single-linkage clustering of ascending frequencies: neighbours closer
/// than `delta_cluster` share a cluster, represented by the member mean.
pub fn unified_cluster(omegas: &[f64], delta_cluster: f64) -> Vec<Cluster> {
    debug_assert!(omegas.windows(2).all(|w| w[0] <= w[1]), "frequencies must be sorted");
    let (runs, means) = group_sorted(omegas, delta_cluster, false);
    runs.into_iter().zip(means).map(|((lo, hi), representative)| Cluster { members: (lo..hi).collect(), representative }).collect()
}

/// Retained `(ω, ω′)` pairs for one bath, indexed by Bohr-term position.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSet {
    n_terms: usize,
    retained: Vec<bool>,
    /// Relaxation-time estimate `α⁻² / max_ω |Γ(ω)|`.
    pub tau_r: f64,
    rate_frequencies: Vec<f64>,
    clusters: Option<Vec<Cluster>>,
}

impl PairSet {
    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn contains(&self, t: usize, t_prime: usize) -> bool {
        self.retained[t * self.n_terms + t_prime]
    }

    pub fn len(&self) -> usize {
        self.retained.iter().filter(|&&r| r).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n_terms;
        (0..n * n).filter(move |&k| self.retained[k]).map(move |k| (k / n, k % n))
    }

    pub fn is_subset_of(&self, other: &PairSet) -> bool {
        self.n_terms == other.n_terms && self.retained.iter().zip(&other.retained).all(|(&a, &b)| !a || b)
    }

    /// Frequency at which `Γ` is evaluated for term `t`: its own Bohr
    /// frequency, or the cluster representative under the unified method.
    pub fn rate_frequency(&self, t: usize) -> f64 {
        self.rate_frequencies[t]
    }

    pub fn rate_frequencies(&self) -> &[f64] {
        &self.rate_frequencies
    }

    pub fn clusters(&self) -> Option<&[Cluster]> {
        self.clusters.as_deref()
    }
}

/// `α⁻² / max_ω |Γ(ω)|` over the bath's Bohr frequencies; infinite when the
/// bath is decoupled.
pub fn relaxation_time(terms: &[BohrTerm], response: &BathResponse, alpha: f64) -> Result<f64> {
    let mut max_gamma: f64 = 0.0;
    for t in terms {
        max_gamma = max_gamma.max(response.get(t.omega)?.big_gamma().norm());
    }
    let rate = alpha * alpha * max_gamma;
    Ok(if rate > 0.0 { 1.0 / rate } else { f64::INFINITY })
}

pub fn psa_filter(terms: &[BohrTerm], method: &GeneratorMethod, response: &BathResponse, alpha: f64) -> Result<PairSet> {
    method.validate()?;
    let n = terms.len();
    let tau_r = relaxation_time(terms, response, alpha)?;
    let omegas: Vec<f64> = terms.iter().map(|t| t.omega).collect();
    let mut retained = vec![false; n * n];
    let mut rate_frequencies = omegas.clone();
    let mut clusters = None;

    match *method {
        GeneratorMethod::Redfield => retained.fill(true),
        GeneratorMethod::FullSecular => {
            for t in 0..n {
                retained[t * n + t] = true;
            }
        }
        GeneratorMethod::PartialSecular { c_psa } => {
            for t in 0..n {
                for u in 0..n {
                    // Drop (ω, ω′) iff C_PSA / |ω − ω′| < τ_R.
                    let fast = c_psa / (omegas[t] - omegas[u]).abs() < tau_r;
                    retained[t * n + u] = t == u || !fast;
                }
            }
        }
        GeneratorMethod::Unified { delta_cluster } => {
            let width = match delta_cluster {
                ClusterWidth::Auto => 1.0 / tau_r,
                ClusterWidth::Fixed(w) => w,
            };
            let found = unified_cluster(&omegas, width);
            for c in &found {
                for &t in &c.members {
                    rate_frequencies[t] = c.representative;
                    for &u in &c.members {
                        retained[t * n + u] = true;
                    }
                }
            }
            clusters = Some(found);
        }
    }
    Ok(PairSet { n_terms: n, retained, tau_r, rate_frequencies, clusters })
}

/// Coefficient matrix `γ(ω, ω′) = Γ(ω) + Γ*(ω′)` over retained pairs, zero
/// elsewhere. Positive semidefinite for GKSL generators.
pub fn kossakowski_matrix(pairs: &PairSet, response: &BathResponse) -> Result<ComplexMatrix> {
    let n = pairs.n_terms();
    let mut k = ComplexMatrix::from_element(n, n, ZERO);
    for (t, u) in pairs.pairs() {
        let g_t = response.get(pairs.rate_frequency(t))?.big_gamma();
        let g_u = response.get(pairs.rate_frequency(u))?.big_gamma();
        k[(t, u)] = g_t + g_u.conj();
    }
    Ok(k)
}
