//! Rate-equation picture obtained by adiabatically eliminating the
//! coherences: transfer rates, closed-form efficiency and
//! indistinguishability, the characteristic cubic and the
//! effective-emitter reduction.
//!
//! Populations are ordered `(P_e, P_a, P_b)` with `dP/dt = M P`.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::numerics::symmetric_eigen;

pub type RateMatrix = [[f64; 3]; 3];

/// `R1 = 4g1²/(Γ+κ1) · 1/(1 + (2δ/(Γ+κ1))²)`, `Γ = γ + γ*`.
pub fn transfer_rate_r1(params: &SystemParams) -> f64 {
    let width = params.total_dephasing() + params.kappa1;
    let x = 2.0 * params.delta / width;
    4.0 * params.g1 * params.g1 / width / (1.0 + x * x)
}

/// `R2 = 4g2²/(R1+κ1+κ2)`; detuning enters only through `r1`.
pub fn transfer_rate_r2(params: &SystemParams, r1: f64) -> f64 {
    4.0 * params.g2 * params.g2 / (r1 + params.kappa1 + params.kappa2)
}

pub fn rate_matrix(params: &SystemParams, r1: f64, r2: f64) -> RateMatrix {
    let SystemParams { gamma, kappa1, kappa2, .. } = *params;
    [[-gamma - r1, r1, 0.0], [r1, -kappa1 - r1 - r2, r2], [0.0, r2, -kappa2 - r2]]
}

/// Closed-form efficiency `κ2R2 / (κ1(κ2+R2) + κ2R2)`.
pub fn efficiency_closed(params: &SystemParams) -> f64 {
    let r2 = transfer_rate_r2(params, transfer_rate_r1(params));
    eta_from_rates(params.kappa1, params.kappa2, r2)
}

fn eta_from_rates(kappa1: f64, kappa2: f64, r2: f64) -> f64 {
    kappa2 * r2 / (kappa1 * (kappa2 + r2) + kappa2 * r2)
}

/// Closed-form indistinguishability
/// `(κ1/2 + (κ2‖R2)/2) / (κ1/2 + κ2 + 3R2/2)` with `κ2‖R2 = κ2R2/(κ2+R2)`.
pub fn indistinguishability_closed(params: &SystemParams) -> f64 {
    let r2 = transfer_rate_r2(params, transfer_rate_r1(params));
    ind_from_rates(params.kappa1, params.kappa2, r2)
}

fn ind_from_rates(kappa1: f64, kappa2: f64, r2: f64) -> f64 {
    let parallel = kappa2 * r2 / (kappa2 + r2);
    (0.5 * kappa1 + 0.5 * parallel) / (0.5 * kappa1 + kappa2 + 1.5 * r2)
}

/// Rate-model efficiency of a single emitter-cavity system collected
/// through the cavity: `κR/(κR + γ(κ+R))` with `R = R1`.
pub fn single_cavity_efficiency_closed(params: &SystemParams) -> f64 {
    let r = transfer_rate_r1(params);
    let (gamma, kappa) = (params.gamma, params.kappa1);
    kappa * r / (kappa * r + gamma * (kappa + r))
}

/// Applicability of the closed forms. The formulas are still evaluated
/// outside these regions; the flags only annotate the output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RegimeFlags {
    /// `R2, κ2 < κ1`.
    pub reg1: bool,
    /// `R2, κ2 > κ1`.
    pub reg2: bool,
    /// `2R1 ≥ 5(κ1+R2)`: the effective-emitter reduction applies.
    pub effective_emitter: bool,
}

impl RegimeFlags {
    pub fn label(&self) -> &'static str {
        match (self.reg1, self.reg2) {
            (true, _) => "reg1",
            (_, true) => "reg2",
            _ => "mixed",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RateModel {
    #[serde(skip)]
    pub params: SystemParams,
    pub r1: f64,
    pub r2: f64,
    pub matrix: RateMatrix,
    /// Eigenvalues of `matrix`, i.e. `-s1, -s2, -s3`, sorted by `|Re|`.
    #[serde(skip)]
    pub roots: [C64; 3],
    pub eta_closed: f64,
    pub i_closed: f64,
    pub pb_decay_rate: f64,
    pub regime: RegimeFlags,
    #[serde(skip)]
    eigvals: [f64; 3],
    #[serde(skip)]
    eigvecs: [[f64; 3]; 3],
}

impl RateModel {
    pub fn new(params: &SystemParams) -> Result<Self> {
        params.validate()?;
        let r1 = transfer_rate_r1(params);
        let r2 = transfer_rate_r2(params, r1);
        let matrix = rate_matrix(params, r1, r2);
        let rows: Vec<Vec<f64>> = matrix.iter().map(|r| r.to_vec()).collect();
        let (values, vectors) = symmetric_eigen(&rows);
        let mut eigvals = [0.0; 3];
        let mut eigvecs = [[0.0; 3]; 3];
        for k in 0..3 {
            eigvals[k] = values[k];
            for i in 0..3 {
                eigvecs[i][k] = vectors[i][k];
            }
        }
        let mut roots: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
        roots.sort_by(|a, b| a.re.abs().total_cmp(&b.re.abs()));
        let (k1, k2) = (params.kappa1, params.kappa2);
        let effective = 2.0 * r1 >= 5.0 * (k1 + r2);
        Ok(Self {
            params: *params,
            r1,
            r2,
            matrix,
            roots: [roots[0], roots[1], roots[2]],
            eta_closed: eta_from_rates(k1, k2, r2),
            i_closed: ind_from_rates(k1, k2, r2),
            pb_decay_rate: (k1 * (k2 + r2) + k2 * r2) / (k1 + 2.0 * k2 + 3.0 * r2),
            regime: RegimeFlags { reg1: r2 < k1 && k2 < k1, reg2: r2 > k1 && k2 > k1, effective_emitter: effective },
            eigvals,
            eigvecs,
        })
    }

    /// Populations `(P_e, P_a, P_b)` at time `t` from `(1, 0, 0)`.
    pub fn populations(&self, t: f64) -> [f64; 3] {
        let mut p = [0.0; 3];
        for k in 0..3 {
            let weight = self.eigvecs[0][k] * (self.eigvals[k] * t).exp();
            for (i, pi) in p.iter_mut().enumerate() {
                *pi += self.eigvecs[i][k] * weight;
            }
        }
        p
    }

    /// `∫_0^∞ (P_e, P_a, P_b) dt`, analytically.
    pub fn integrated_populations(&self) -> [f64; 3] {
        let mut p = [0.0; 3];
        for k in 0..3 {
            let weight = self.eigvecs[0][k] / (-self.eigvals[k]);
            for (i, pi) in p.iter_mut().enumerate() {
                *pi += self.eigvecs[i][k] * weight;
            }
        }
        p
    }

    /// Rate-model efficiency `κ2 ∫ P_b dt` including emitter decay γ.
    /// Reduces to [`RateModel::eta_closed`] as `γ → 0`.
    pub fn efficiency_exact(&self) -> f64 {
        self.params.kappa2 * self.r1 * self.r2 / self.cubic_constant()
    }

    /// Constant term `c0 = s1 s2 s3` of the characteristic cubic
    /// `(s+γ+R1)[(s+κ1+R1+R2)(s+κ2+R2) − R2²] − R1²(s+κ2+R2)`.
    pub fn cubic_constant(&self) -> f64 {
        self.characteristic_polynomial(0.0)
    }

    pub fn characteristic_polynomial(&self, s: f64) -> f64 {
        let SystemParams { gamma, kappa1, kappa2, .. } = self.params;
        let (r1, r2) = (self.r1, self.r2);
        (s + gamma + r1) * ((s + kappa1 + r1 + r2) * (s + kappa2 + r2) - r2 * r2) - r1 * r1 * (s + kappa2 + r2)
    }

    /// Smallest `|Re|` eigenvalue magnitude of the rate matrix.
    pub fn slowest_rate(&self) -> f64 {
        -self.roots[0].re
    }
}

/// Roots `-s1, -s2, -s3` of the characteristic cubic, sorted by `|Re|`.
pub fn characteristic_roots(model: &RateModel) -> [C64; 3] {
    model.roots
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateTraces {
    pub times: Vec<f64>,
    pub p_e: Vec<f64>,
    pub p_a: Vec<f64>,
    pub p_b: Vec<f64>,
}

/// Evaluates the rate-equation populations on `t_grid`.
pub fn rate_propagate(model: &RateModel, t_grid: &[f64]) -> Result<RateTraces> {
    if t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidRequest("time grid must be non-negative and strictly increasing".into()));
    }
    let mut out = RateTraces {
        times: t_grid.to_vec(),
        p_e: Vec::with_capacity(t_grid.len()),
        p_a: Vec::with_capacity(t_grid.len()),
        p_b: Vec::with_capacity(t_grid.len()),
    };
    for &t in t_grid {
        let [e, a, b] = model.populations(t);
        out.p_e.push(e);
        out.p_a.push(a);
        out.p_b.push(b);
    }
    Ok(out)
}

/// Reduced `(P_s, P_b)` dynamics of the composite emitter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EffectiveEmitter {
    pub matrix: [[f64; 2]; 2],
    pub pb_decay_rate: f64,
    /// False when `2R1 < 5(κ1+R2)`, where the reduction is unreliable.
    pub valid: bool,
}

impl EffectiveEmitter {
    /// Slowest decay rate of the 2×2 system (its eigenvalues are real
    /// because the off-diagonal product is non-negative).
    pub fn slowest_rate(&self) -> f64 {
        let [[a, b], [c, d]] = self.matrix;
        let half_trace = 0.5 * (a + d);
        let disc = (0.25 * (a - d) * (a - d) + b * c).max(0.0).sqrt();
        -(half_trace + disc)
    }
}

pub fn effective_emitter(model: &RateModel) -> EffectiveEmitter {
    let SystemParams { kappa1, kappa2, .. } = model.params;
    let r2 = model.r2;
    EffectiveEmitter {
        matrix: [[-0.5 * (kappa1 + r2), 0.5 * r2], [r2, -(kappa2 + r2)]],
        pb_decay_rate: model.pb_decay_rate,
        valid: model.regime.effective_emitter,
    }
}

/// Exact transformation `T` taking `(P_d, P_s, P_b)` to `(P_e, P_a, P_b)`.
/// It tends to `[[1,1,0],[-1,1,0],[0,0,1]]` when `2R1 ≫ κ1+R2`.
pub fn transformation_exact(model: &RateModel) -> RateMatrix {
    let s = model.params.kappa1 + model.r2;
    let q = (s * s + 4.0 * model.r1 * model.r1).sqrt();
    let r1 = model.r1;
    [[1.0, 1.0, 0.0], [2.0 * r1 / (s - q), 2.0 * r1 / (s + q), 0.0], [0.0, 0.0, 1.0]]
}
