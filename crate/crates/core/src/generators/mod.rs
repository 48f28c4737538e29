//! Master-equation generators in the energy eigenbasis of `H_S`.
//!
//! Every matrix produced here (dissipators, Lamb-shift Hamiltonians, the
//! total Liouvillian) is expressed in the eigenbasis returned by
//! [`OpenSystem::basis`]. Steady states and heat flows computed from them
//! live in the same basis.

pub mod bohr;
pub mod secular;
pub mod superop;

pub use bohr::{bohr_decompose, BohrTerm, Transition};
pub use secular::{kossakowski_matrix, psa_filter, relaxation_time, unified_cluster, Cluster, ClusterWidth, GeneratorMethod, PairSet};
pub use superop::{unvectorize, vec_index, vectorize, Superoperator};

use crate::bath::{BathResponse, BathSpec, QuadratureSettings};
use crate::circuit::{bath_coupling_operator, Side};
use crate::error::{Error, Result};
use crate::operators::{eigendecompose_hermitian, ComplexMatrix, CompositeSpace, EigenBasis, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorOptions {
    /// Bohr gaps closer than this (units of Ω_L) are one frequency.
    pub degeneracy_tol: f64,
    pub quadrature: QuadratureSettings,
}

impl Default for GeneratorOptions {
    fn default() -> Self {
        Self { degeneracy_tol: 1e-9, quadrature: QuadratureSettings::default() }
    }
}

/// One bath: its coupling operator split over the Bohr frequencies of `H_S`
/// and `Γ(ω)` cached at those frequencies.
#[derive(Debug, Clone)]
pub struct BathChannel {
    pub spec: BathSpec,
    /// Coupling operator in the computational basis.
    pub coupling: ComplexMatrix,
    pub terms: Vec<BohrTerm>,
    pub response: BathResponse,
}

impl BathChannel {
    pub fn bohr_frequencies(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.omega).collect()
    }
}

/// A diagonalized system Hamiltonian with its baths. Built once per flux
/// point and shared by every generator method.
#[derive(Debug, Clone)]
pub struct OpenSystem {
    h_s: ComplexMatrix,
    basis: EigenBasis,
    channels: Vec<BathChannel>,
    options: GeneratorOptions,
}

impl OpenSystem {
    pub fn new(h_s: &ComplexMatrix, couplings: Vec<(BathSpec, ComplexMatrix)>, options: &GeneratorOptions) -> Result<Self> {
        if couplings.is_empty() {
            return Err(Error::Domain("at least one bath is required".into()));
        }
        let basis = eigendecompose_hermitian(h_s)?;
        let mut channels = Vec::with_capacity(couplings.len());
        for (spec, coupling) in couplings {
            spec.validate()?;
            if coupling.shape() != h_s.shape() {
                return Err(Error::InvalidDimension(format!(
                    "coupling operator is {}x{} but H_S is {}x{}",
                    coupling.nrows(),
                    coupling.ncols(),
                    h_s.nrows(),
                    h_s.ncols()
                )));
            }
            let terms = bohr_decompose(&basis, &coupling, options.degeneracy_tol)?;
            if terms.is_empty() {
                return Err(Error::Domain(format!("bath {} couples to nothing", spec.side)));
            }
            let omegas: Vec<f64> = terms.iter().map(|t| t.omega).collect();
            let response = BathResponse::compute(&spec, &omegas, &options.quadrature)?;
            channels.push(BathChannel { spec, coupling, terms, response });
        }
        Ok(Self { h_s: h_s.clone(), basis, channels, options: *options })
    }

    /// Baths attached through `i(a† − a)` of the resonator on their side.
    pub fn for_circuit(h_s: &ComplexMatrix, space: &CompositeSpace, baths: &[BathSpec], options: &GeneratorOptions) -> Result<Self> {
        let couplings = baths.iter().map(|b| Ok((*b, bath_coupling_operator(b.side, space)?))).collect::<Result<Vec<_>>>()?;
        Self::new(h_s, couplings, options)
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// `H_S` in the computational basis.
    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.h_s
    }

    pub fn basis(&self) -> &EigenBasis {
        &self.basis
    }

    pub fn channels(&self) -> &[BathChannel] {
        &self.channels
    }

    pub fn channel(&self, side: Side) -> Option<&BathChannel> {
        self.channels.iter().find(|c| c.spec.side == side)
    }

    pub fn options(&self) -> &GeneratorOptions {
        &self.options
    }

    /// Largest `α²·max_ω|Γ(ω)|` over baths, inverted. Infinite if all baths
    /// are decoupled.
    pub fn relaxation_time(&self) -> Result<f64> {
        let mut tau: f64 = f64::INFINITY;
        for c in &self.channels {
            tau = tau.min(relaxation_time(&c.terms, &c.response, c.spec.alpha)?);
        }
        Ok(tau)
    }

    pub fn pair_set(&self, channel: usize, method: &GeneratorMethod) -> Result<PairSet> {
        let c = &self.channels[channel];
        psa_filter(&c.terms, method, &c.response, c.spec.alpha)
    }

    /// `Γ` at every rate frequency of `pairs`. Reuses the Bohr-frequency
    /// cache unless cluster representatives need fresh values.
    fn rates_for(&self, channel: usize, pairs: &PairSet) -> Result<BathResponse> {
        let c = &self.channels[channel];
        if pairs.rate_frequencies().iter().all(|&w| c.response.get(w).is_ok()) {
            return Ok(c.response.clone());
        }
        BathResponse::compute(&c.spec, pairs.rate_frequencies(), &self.options.quadrature)
    }

    pub fn generator(&self, method: &GeneratorMethod) -> Result<Liouvillian> {
        method.validate()?;
        let d = self.dim();
        let mut h_eff = self.basis.diagonal_hamiltonian();
        let mut baths = Vec::with_capacity(self.channels.len());
        for (k, c) in self.channels.iter().enumerate() {
            let pairs = self.pair_set(k, method)?;
            let rates = self.rates_for(k, &pairs)?;
            let (dissipator, lamb_shift) = build_bath_generator(&c.spec, &c.terms, &pairs, &rates, d)?;
            h_eff += &lamb_shift;
            baths.push(BathGenerator { spec: c.spec, pairs, rates, dissipator, lamb_shift });
        }
        let mut total = Superoperator::commutator(&h_eff);
        for b in &baths {
            total += &b.dissipator;
        }
        Ok(Liouvillian { method: *method, baths, total })
    }
}

/// The generator contributions of one bath.
#[derive(Debug, Clone)]
pub struct BathGenerator {
    pub spec: BathSpec,
    pub pairs: PairSet,
    /// `Γ` values the generator was built from.
    pub rates: BathResponse,
    pub dissipator: Superoperator,
    pub lamb_shift: ComplexMatrix,
}

/// `L = −i[H_S + Σ_b H_LS^(b), ·] + Σ_b D_b`, in the energy eigenbasis.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    pub method: GeneratorMethod,
    pub baths: Vec<BathGenerator>,
    pub total: Superoperator,
}

impl Liouvillian {
    pub fn dim(&self) -> usize {
        self.total.dim()
    }

    pub fn bath(&self, side: Side) -> Option<&BathGenerator> {
        self.baths.iter().find(|b| b.spec.side == side)
    }

    pub fn lamb_shift_total(&self) -> ComplexMatrix {
        let d = self.dim();
        self.baths.iter().fold(ComplexMatrix::zeros(d, d), |acc, b| acc + &b.lamb_shift)
    }
}

/// One nonzero element of one Bohr term.
struct Element {
    term: usize,
    row: usize,
    col: usize,
    value: C64,
}

fn elements(terms: &[BohrTerm]) -> Vec<Element> {
    terms
        .iter()
        .enumerate()
        .flat_map(|(term, t)| t.transitions.iter().map(move |x| Element { term, row: x.row, col: x.col, value: x.value }))
        .collect()
}

/// Dissipator and Lamb-shift Hamiltonian of one bath, sharing one pass over
/// pairs of matrix elements.
///
/// With `c_tu = α²(Γ_t + Γ_u*)` and `s_tu = α²(Γ_t − Γ_u*)/2i` over retained
/// pairs `(t, u)`:
/// `D(ρ) = Σ c_tu (A_t ρ A_u† − ½{A_u† A_t, ρ})` and `H_LS = Σ s_tu A_u† A_t`.
fn build_bath_generator(
    b: &BathSpec,
    terms: &[BohrTerm],
    pairs: &PairSet,
    rates: &BathResponse,
    d: usize,
) -> Result<(Superoperator, ComplexMatrix)> {
    if pairs.n_terms() != terms.len() {
        return Err(Error::Consistency(format!("pair set covers {} terms but {} were given", pairs.n_terms(), terms.len())));
    }
    let mut dissipator = Superoperator::zeros(d);
    let mut h_ls = ComplexMatrix::zeros(d, d);
    let alpha_sq = b.alpha * b.alpha;
    if alpha_sq == 0.0 {
        return Ok((dissipator, h_ls));
    }
    let big_gamma = (0..terms.len()).map(|t| rates.get(pairs.rate_frequency(t)).map(|r| r.big_gamma())).collect::<Result<Vec<_>>>()?;
    let lamb = b.lamb_shift_enabled;
    let half_i_inv = C64::new(0.0, -0.5);
    let elems = elements(terms);
    let mut k_mat = ComplexMatrix::zeros(d, d);

    for e1 in &elems {
        for e2 in &elems {
            if !pairs.contains(e1.term, e2.term) {
                continue;
            }
            let g1 = big_gamma[e1.term];
            let g2c = big_gamma[e2.term].conj();
            let c = (g1 + g2c) * alpha_sq;
            let w = e1.value * e2.value.conj();
            // A_t ρ A_u†: ρ[j1, j2] feeds out[i1, i2].
            *dissipator.entry_mut(vec_index(e1.row, e2.row, d), vec_index(e1.col, e2.col, d)) += c * w;
            if e1.row == e2.row {
                // (A_u† A_t)[j2, j1] = conj(A_u[k, j2]) A_t[k, j1].
                k_mat[(e2.col, e1.col)] += c * w;
                if lamb {
                    h_ls[(e2.col, e1.col)] += (g1 - g2c) * half_i_inv * alpha_sq * w;
                }
            }
        }
    }
    let minus_half_k = k_mat * C64::new(-0.5, 0.0);
    dissipator.add_left_right(&minus_half_k, &minus_half_k);
    let h_ls = (&h_ls + h_ls.adjoint()) * C64::new(0.5, 0.0);
    Ok((dissipator, h_ls))
}

/// `D_b`, vectorized column-stacked in the eigenbasis of the Bohr terms.
pub fn build_dissipator(b: &BathSpec, terms: &[BohrTerm], pairs: &PairSet, response: &BathResponse) -> Result<Superoperator> {
    let d = dimension_of(terms)?;
    Ok(build_bath_generator(b, terms, pairs, response, d)?.0)
}

/// `H_LS^(b)`; zero when the bath's Lamb shift is disabled.
pub fn build_lamb_shift(b: &BathSpec, terms: &[BohrTerm], pairs: &PairSet, response: &BathResponse) -> Result<ComplexMatrix> {
    let d = dimension_of(terms)?;
    if !b.lamb_shift_enabled {
        return Ok(ComplexMatrix::zeros(d, d));
    }
    Ok(build_bath_generator(b, terms, pairs, response, d)?.1)
}

fn dimension_of(terms: &[BohrTerm]) -> Result<usize> {
    terms.first().map(|t| t.op.nrows()).ok_or_else(|| Error::Domain("no Bohr terms to build a generator from".into()))
}

/// Diagonalize `H_S`, attach the circuit's baths and assemble one generator.
pub fn assemble_liouvillian(
    h_s: &ComplexMatrix,
    space: &CompositeSpace,
    baths: &[BathSpec],
    method: &GeneratorMethod,
    options: &GeneratorOptions,
) -> Result<(OpenSystem, Liouvillian)> {
    let system = OpenSystem::for_circuit(h_s, space, baths, options)?;
    let l = system.generator(method)?;
    Ok((system, l))
}
