//! Retarded propagator, two-time field correlator and Hong-Ou-Mandel
//! indistinguishability of the emitted photon.
//!
//! Under the quantum regression theorem the correlator of mode `m` is
//! `c(t, τ) = ⟨m†(t+τ) m(t)⟩ = Σ_x G_mx(τ) ρ_xm(t)` with
//! `G(τ) = exp(-i h_eff τ)`. The indistinguishability is
//! `I = ∫∫|c|² dt dτ / ∫∫ P(t) P(t+τ) dt dτ` over `t, τ ≥ 0`.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::master::{propagate, PopulationTrace, SpectralEvolution};
use crate::model::{build_liouvillian, DensityState, Mat3, Mode, SystemParams};
use crate::numerics::{eig_dense, expm, trapezoid_weights, CMat, EigenDecomposition};

/// Emission below this probability is treated as no photon at all.
const EMISSION_FLOOR: f64 = 1e-12;

/// `h_eff = H - (i/2) diag(γ+γ*, κ1, κ2)` and its decomposition.
#[derive(Clone, Debug)]
pub struct RetardedPropagator {
    pub h_eff: CMat,
    /// Decomposition of `-i h_eff`; `None` when it is defective, in which
    /// case rows are computed by a dense matrix exponential per `τ`.
    pub eigen: Option<EigenDecomposition>,
}

impl RetardedPropagator {
    pub fn new(params: &SystemParams) -> Result<Self> {
        params.validate()?;
        let h_eff = effective_hamiltonian(params);
        let eigen = match eig_dense(&generator_of(&h_eff)) {
            Ok(e) => Some(e),
            Err(Error::DegenerateSpectrum { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(Self { h_eff, eigen })
    }

    /// `-i h_eff`.
    pub fn generator(&self) -> CMat {
        generator_of(&self.h_eff)
    }

    /// Row `mode` of `G(τ)`: `(G_me, G_ma, G_mb)`.
    pub fn green_row(&self, mode: Mode, tau: f64) -> Result<[C64; 3]> {
        if !(tau >= 0.0) {
            return Err(Error::InvalidRequest(format!("tau must be non-negative, got {tau}")));
        }
        let m = mode.index();
        let mut row = [C64::new(0.0, 0.0); 3];
        match &self.eigen {
            Some(e) => {
                let phases: Vec<C64> = e.values.iter().map(|mu| (mu * tau).exp()).collect();
                for (x, r) in row.iter_mut().enumerate() {
                    *r = (0..3).map(|k| e.right[(m, k)] * phases[k] * e.left[(k, x)]).sum();
                }
            }
            None => {
                let g = expm(&self.generator().scale(C64::new(tau, 0.0)));
                row.copy_from_slice(g.row(m));
            }
        }
        if tau == 0.0 {
            row = [C64::new(0.0, 0.0); 3];
            row[m] = C64::new(1.0, 0.0);
        }
        Ok(row)
    }
}

pub fn effective_hamiltonian(params: &SystemParams) -> CMat {
    let half = |x: f64| C64::new(0.0, -0.5 * x);
    let re = |x: f64| C64::new(x, 0.0);
    CMat::from_rows(&[
        [re(params.delta) + half(params.total_dephasing()), re(params.g1), re(0.0)],
        [re(params.g1), half(params.kappa1), re(params.g2)],
        [re(0.0), re(params.g2), half(params.kappa2)],
    ])
}

fn generator_of(h_eff: &CMat) -> CMat {
    h_eff.scale(C64::new(0.0, -1.0))
}

/// `Σ_x G_mx(τ) ρ_xm(t)`.
///
/// `t` must be a sample time of `trace` unless the trace carries its
/// spectral representation, in which case any `t ≥ 0` is accepted.
pub fn two_time_correlator(
    trace: &PopulationTrace,
    prop: &RetardedPropagator,
    mode: Mode,
    t: f64,
    tau: f64,
) -> Result<C64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidRequest(format!("t must be non-negative, got {t}")));
    }
    let rho = match trace.times.binary_search_by(|x| x.total_cmp(&t)) {
        Ok(i) => trace.density(i).rho,
        Err(_) => match &trace.spectral {
            Some(s) => s.density(t),
            None => return Err(Error::InvalidRequest(format!("t = {t} is not a sample time of the trace"))),
        },
    };
    let row = prop.green_row(mode, tau)?;
    Ok(apply_row(&row, &rho, mode))
}

fn apply_row(row: &[C64; 3], rho: &Mat3, mode: Mode) -> C64 {
    let m = mode.index();
    (0..3).map(|x| row[x] * rho[x][m]).sum()
}

/// Which terms of the correlator are kept.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrelatorTerms {
    /// `Σ_x G_mx ρ_xm` over all three modes.
    #[default]
    Full,
    /// `G_mm ρ_mm` only; drops the coherences with the other modes.
    CavityOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegrationMethod {
    Spectral,
    Quadrature,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CorrelatorOptions {
    pub terms: CorrelatorTerms,
    /// Forces a method; `None` tries the spectral sums first.
    pub method: Option<IntegrationMethod>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IndistinguishabilityReport {
    pub value: f64,
    pub p_coincidence: f64,
    /// `∫∫ |c(t, τ)|² dt dτ`.
    pub numerator: f64,
    /// `∫∫ P(t) P(t+τ) dt dτ`.
    pub denominator: f64,
    /// `∫ P dt`; the denominator should equal half its square.
    pub population_integral: f64,
    pub method: IntegrationMethod,
}

impl IndistinguishabilityReport {
    fn new(numerator: f64, denominator: f64, population_integral: f64, method: IntegrationMethod) -> Self {
        let value = numerator / denominator;
        Self { value, p_coincidence: 0.5 * (1.0 - value), numerator, denominator, population_integral, method }
    }
}

/// Double exponential expansion `c(t, τ) = Σ_jk A_jk e^{λ_j t} e^{μ_k τ}`
/// together with `P(t) = Σ_j P_j e^{λ_j t}` for one parameter point.
#[derive(Clone, Debug)]
pub struct CorrelatorExpansion {
    pub lambdas: Vec<C64>,
    pub mus: Vec<C64>,
    /// `A[j][k]`.
    pub amplitudes: Vec<Vec<C64>>,
    pub populations: Vec<C64>,
}

impl CorrelatorExpansion {
    pub fn new(
        evolution: &SpectralEvolution,
        propagator: &EigenDecomposition,
        mode: Mode,
        terms: CorrelatorTerms,
    ) -> Self {
        let m = mode.index();
        let n_mu = propagator.values.len();
        let amplitudes = evolution
            .modes
            .iter()
            .map(|mj| {
                (0..n_mu)
                    .map(|k| {
                        let lead = propagator.right[(m, k)];
                        match terms {
                            CorrelatorTerms::Full => (0..3).map(|x| lead * propagator.left[(k, x)] * mj[x][m]).sum(),
                            CorrelatorTerms::CavityOnly => lead * propagator.left[(k, m)] * mj[m][m],
                        }
                    })
                    .collect()
            })
            .collect();
        Self {
            lambdas: evolution.rates.clone(),
            mus: propagator.values.clone(),
            amplitudes,
            populations: evolution.modes.iter().map(|mj| mj[m][m]).collect(),
        }
    }

    /// `∫∫ c_self(t, τ) c_other(t, τ)* dt dτ`.
    pub fn overlap(&self, other: &Self) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (j, aj) in self.amplitudes.iter().enumerate() {
            for (l, al) in other.amplitudes.iter().enumerate() {
                let t_factor = -self.lambdas[j] - other.lambdas[l].conj();
                let mut inner = C64::new(0.0, 0.0);
                for (k, ajk) in aj.iter().enumerate() {
                    for (q, alq) in al.iter().enumerate() {
                        inner += ajk * alq.conj() / (-self.mus[k] - other.mus[q].conj());
                    }
                }
                acc += inner / t_factor;
            }
        }
        acc
    }

    /// `∫∫ P_self(t) P_other(t+τ) dt dτ`.
    pub fn population_overlap(&self, other: &Self) -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        for (j, pj) in self.populations.iter().enumerate() {
            for (l, pl) in other.populations.iter().enumerate() {
                let (lj, ll) = (self.lambdas[j], other.lambdas[l]);
                acc += pj * pl / ((-lj - ll) * (-ll));
            }
        }
        acc.re
    }

    /// `∫ P dt`.
    pub fn population_integral(&self) -> f64 {
        self.populations.iter().zip(&self.lambdas).map(|(p, l)| p / (-l)).sum::<C64>().re
    }
}

/// Builds the spectral expansion for `mode`; fails with
/// [`Error::DegenerateSpectrum`] when either generator is defective.
pub fn correlator_expansion(params: &SystemParams, mode: Mode, terms: CorrelatorTerms) -> Result<CorrelatorExpansion> {
    let liouvillian = build_liouvillian(params)?;
    let evolution = SpectralEvolution::new(&liouvillian, &DensityState::excited());
    let prop = RetardedPropagator::new(params)?;
    let eigen = prop.eigen.ok_or(Error::DegenerateSpectrum { residual: f64::INFINITY })?;
    Ok(CorrelatorExpansion::new(&evolution, &eigen, mode, terms))
}

/// HOM indistinguishability of photons leaking from `mode` (`Cavity2`
/// for the cascaded system, `Cavity1` for a single cavity with `g2 = 0`).
pub fn indistinguishability(params: &SystemParams, mode: Mode) -> Result<IndistinguishabilityReport> {
    indistinguishability_with(params, mode, CorrelatorOptions::default())
}

pub fn indistinguishability_with(
    params: &SystemParams,
    mode: Mode,
    options: CorrelatorOptions,
) -> Result<IndistinguishabilityReport> {
    params.validate()?;
    match options.method {
        Some(IntegrationMethod::Quadrature) => indistinguishability_quadrature(params, mode, options.terms),
        Some(IntegrationMethod::Spectral) => indistinguishability_spectral(params, mode, options.terms),
        None => match indistinguishability_spectral(params, mode, options.terms) {
            Err(Error::DegenerateSpectrum { .. }) => indistinguishability_quadrature(params, mode, options.terms),
            other => other,
        },
    }
}

fn check_emission(params: &SystemParams, mode: Mode, integral: f64) -> Result<()> {
    if params.decay_rate(mode) * integral < EMISSION_FLOOR {
        Err(Error::NoEmission)
    } else {
        Ok(())
    }
}

fn indistinguishability_spectral(
    params: &SystemParams,
    mode: Mode,
    terms: CorrelatorTerms,
) -> Result<IndistinguishabilityReport> {
    let expansion = correlator_expansion(params, mode, terms)?;
    let integral = expansion.population_integral();
    check_emission(params, mode, integral)?;
    Ok(IndistinguishabilityReport::new(
        expansion.overlap(&expansion).re,
        expansion.population_overlap(&expansion),
        integral,
        IntegrationMethod::Spectral,
    ))
}

/// Trapezoid rule on the master-equation sample grid in both `t` and
/// `τ`. The denominator uses `∫∫ P(t)P(t+τ) = ½(∫P)²`, which avoids
/// evaluating `P` off the grid.
fn indistinguishability_quadrature(
    params: &SystemParams,
    mode: Mode,
    terms: CorrelatorTerms,
) -> Result<IndistinguishabilityReport> {
    let trace = propagate(params, None)?;
    let prop = RetardedPropagator::new(params)?;
    let weights = trapezoid_weights(&trace.times);
    let m = mode.index();
    let rows = trace.times.iter().map(|&tau| prop.green_row(mode, tau)).collect::<Result<Vec<_>>>()?;
    let mut numerator = 0.0;
    let mut integral = 0.0;
    for (i, wi) in weights.iter().enumerate() {
        let rho = trace.density(i).rho;
        integral += wi * rho[m][m].re;
        let mut inner = 0.0;
        for (row, wk) in rows.iter().zip(&weights) {
            let c = match terms {
                CorrelatorTerms::Full => apply_row(row, &rho, mode),
                CorrelatorTerms::CavityOnly => row[m] * rho[m][m],
            };
            inner += wk * c.norm_sqr();
        }
        numerator += wi * inner;
    }
    check_emission(params, mode, integral)?;
    Ok(IndistinguishabilityReport::new(numerator, 0.5 * integral * integral, integral, IntegrationMethod::Quadrature))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn green_row_at_zero_is_identity_row() {
        let prop = RetardedPropagator::new(&SystemParams::cascaded(500.0, 50.0, 10.0, 1.0)).unwrap();
        for mode in Mode::ALL {
            let row = prop.green_row(mode, 0.0).unwrap();
            for (x, v) in row.iter().enumerate() {
                let expected = if x == mode.index() { 1.0 } else { 0.0 };
                assert_eq!(*v, C64::new(expected, 0.0));
            }
        }
        assert!(prop.green_row(Mode::Cavity2, -1.0).is_err());
    }

    #[test]
    fn decoupled_cavity_decays_freely() {
        let prop = RetardedPropagator::new(&SystemParams::cascaded(0.0, 5.0, 0.0, 3.0)).unwrap();
        let row = prop.green_row(Mode::Cavity2, 0.7).unwrap();
        assert!(row[0].norm() < 1e-15 && row[1].norm() < 1e-15);
        assert_relative_eq!(row[2].re, (-1.5f64 * 0.7).exp(), max_relative = 1e-12);
    }

    #[test]
    fn propagator_modes_all_decay() {
        let prop = RetardedPropagator::new(&SystemParams::cascaded(500.0, 50.0, 150.0, 300.0)).unwrap();
        assert!(prop.eigen.unwrap().values.iter().all(|mu| mu.re < 0.0));
    }

    #[test]
    fn expm_fallback_matches_eigen_rows() {
        let p = SystemParams::cascaded(20.0, 10.0, 5.0, 3.0).with_gamma_star(40.0);
        let prop = RetardedPropagator::new(&p).unwrap();
        let dense = RetardedPropagator { eigen: None, ..prop.clone() };
        for tau in [0.01, 0.3, 2.0] {
            let a = prop.green_row(Mode::Cavity2, tau).unwrap();
            let b = dense.green_row(Mode::Cavity2, tau).unwrap();
            for x in 0..3 {
                assert!((a[x] - b[x]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn equal_time_correlator_is_population() {
        let p = SystemParams::cascaded(500.0, 50.0, 10.0, 1.0);
        let trace = propagate(&p, None).unwrap();
        let prop = RetardedPropagator::new(&p).unwrap();
        for i in (0..trace.len()).step_by(211) {
            let c = two_time_correlator(&trace, &prop, Mode::Cavity2, trace.times[i], 0.0).unwrap();
            assert!((c.re - trace.p_b[i]).abs() < 1e-10 && c.im.abs() < 1e-10);
        }
    }

    #[test]
    fn no_coupling_means_no_photon() {
        let p = SystemParams::cascaded(0.0, 50.0, 10.0, 1.0);
        assert!(matches!(indistinguishability(&p, Mode::Cavity2), Err(Error::NoEmission)));
    }

    #[test]
    fn report_invariants() {
        let r = indistinguishability(&SystemParams::cascaded(500.0, 50.0, 10.0, 1.0), Mode::Cavity2).unwrap();
        assert_eq!(r.method, IntegrationMethod::Spectral);
        assert!(r.value > 0.0 && r.value <= 1.0 + 1e-9);
        assert!((r.value - (1.0 - 2.0 * r.p_coincidence)).abs() < 1e-12);
        let half_square = 0.5 * r.population_integral * r.population_integral;
        assert_relative_eq!(r.denominator, half_square, max_relative = 1e-8);
    }

    #[test]
    fn pure_dephasing_free_photon_is_indistinguishable() {
        let p = SystemParams::cascaded(500.0, 50.0, 10.0, 1.0).with_gamma_star(0.0);
        let r = indistinguishability(&p, Mode::Cavity2).unwrap();
        assert!((r.value - 1.0).abs() < 1e-3, "{}", r.value);
    }
}
