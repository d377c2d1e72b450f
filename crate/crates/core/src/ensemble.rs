//! Averages over a static Gaussian distribution of emitter detunings
//! (spectral diffusion), evaluated by Gauss-Hermite quadrature.

use rayon::prelude::*;
use serde::Serialize;

use crate::correlator::{correlator_expansion, indistinguishability, CorrelatorExpansion, CorrelatorTerms};
use crate::error::{Error, Result};
use crate::master::efficiency;
use crate::model::SystemParams;
use crate::numerics::{gauss_hermite, QuadratureGrid};

pub const DEFAULT_NODES: usize = 15;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiffusionSpec {
    /// Full width at half maximum of the detuning distribution.
    pub fwhm: f64,
    pub n_nodes: usize,
}

impl DiffusionSpec {
    pub fn new(fwhm: f64) -> Self {
        Self { fwhm, n_nodes: DEFAULT_NODES }
    }

    pub fn with_nodes(mut self, n_nodes: usize) -> Self {
        self.n_nodes = n_nodes;
        self
    }

    pub fn sigma(&self) -> f64 {
        self.fwhm / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fwhm >= 0.0 && self.fwhm.is_finite()) {
            return Err(Error::InvalidParameter { name: "fwhm", value: self.fwhm, reason: "must be non-negative" });
        }
        if !(1..=64).contains(&self.n_nodes) {
            return Err(Error::InvalidRequest(format!("node count must be in 1..=64, got {}", self.n_nodes)));
        }
        Ok(())
    }

    /// Detuning nodes (added to the configured δ) and weights.
    pub fn grid(&self) -> QuadratureGrid {
        gauss_hermite(self.n_nodes, self.sigma())
    }
}

/// How two photons from the ensemble are compared.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleAverage {
    /// HOM visibility of two photons with independently drawn detunings.
    #[default]
    CrossTerms,
    /// Weighted mean of the single-detuning values.
    PerDetuningAverage,
}

fn node_params(params: &SystemParams, grid: &QuadratureGrid) -> Vec<SystemParams> {
    grid.nodes.iter().map(|x| params.with_delta(params.delta + x)).collect()
}

/// `Σ_k w_k η(δ + x_k)` with the master-equation efficiency.
pub fn ensemble_efficiency(params: &SystemParams, spec: &DiffusionSpec) -> Result<f64> {
    spec.validate()?;
    if spec.fwhm == 0.0 {
        return efficiency(params);
    }
    let grid = spec.grid();
    let values = node_params(params, &grid).par_iter().map(efficiency).collect::<Result<Vec<_>>>()?;
    Ok(grid.weights.iter().zip(&values).map(|(w, v)| w * v).sum())
}

/// Ensemble HOM visibility using cross terms between detunings.
pub fn ensemble_indistinguishability(params: &SystemParams, spec: &DiffusionSpec) -> Result<f64> {
    ensemble_indistinguishability_with(params, spec, EnsembleAverage::CrossTerms)
}

pub fn ensemble_indistinguishability_with(
    params: &SystemParams,
    spec: &DiffusionSpec,
    average: EnsembleAverage,
) -> Result<f64> {
    spec.validate()?;
    let mode = params.collection_mode();
    if spec.fwhm == 0.0 {
        return Ok(indistinguishability(params, mode)?.value);
    }
    let grid = spec.grid();
    let nodes = node_params(params, &grid);
    match average {
        EnsembleAverage::PerDetuningAverage => {
            let values =
                nodes.par_iter().map(|p| indistinguishability(p, mode).map(|r| r.value)).collect::<Result<Vec<_>>>()?;
            Ok(grid.weights.iter().zip(&values).map(|(w, v)| w * v).sum())
        }
        EnsembleAverage::CrossTerms => {
            let expansions = nodes
                .par_iter()
                .map(|p| correlator_expansion(p, mode, CorrelatorTerms::Full))
                .collect::<Result<Vec<_>>>()?;
            Ok(cross_term_visibility(&grid.weights, &expansions))
        }
    }
}

/// `Σ_jk w_j w_k ∫∫ c_j c_k* / Σ_jk w_j w_k ∫∫ P_j(t) P_k(t+τ)`, summed
/// in node order so the result does not depend on thread scheduling.
pub fn cross_term_visibility(weights: &[f64], expansions: &[CorrelatorExpansion]) -> f64 {
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for (wj, ej) in weights.iter().zip(expansions) {
        for (wk, ek) in weights.iter().zip(expansions) {
            numerator += wj * wk * ej.overlap(ek).re;
            denominator += wj * wk * ej.population_overlap(ek);
        }
    }
    numerator / denominator
}
