//! Maximisation of a figure of merit over `(κ1, g2, κ2)` (and optionally
//! `g1`) inside a box set by quality-factor limits: a coarse logarithmic
//! grid followed by coordinate descent.

use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::report::{evaluate, Configuration, Evaluator};
use super::units::{q_to_kappa, QFactorSpec};
use crate::error::{Error, Result};
use crate::model::SystemParams;

pub const REFINEMENT_ROUNDS: usize = 3;
/// Each round divides the log-space step by this factor.
pub const SHRINK_FACTOR: f64 = 4.0;
const MAX_PASSES: usize = 25;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    #[default]
    EtaInd,
    Ind,
    Eta,
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.replace('-', "_").as_str() {
            "eta_ind" => Objective::EtaInd,
            "ind" => Objective::Ind,
            "eta" => Objective::Eta,
            _ => return Err(Error::InvalidRequest(format!("unknown objective '{s}'"))),
        })
    }
}

/// Inclusive bounds of one optimisation variable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn fixed(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    fn feasible(&self) -> bool {
        self.lo > 0.0 && self.lo <= self.hi && self.hi.is_finite()
    }

    fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }

    fn log_grid(&self, n: usize) -> Vec<f64> {
        if self.lo == self.hi || n < 2 {
            return vec![self.lo];
        }
        let (a, b) = (self.lo.ln(), self.hi.ln());
        (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
    }

    fn log_width(&self) -> f64 {
        (self.hi / self.lo).ln()
    }
}

/// Search box; `base` supplies γ, γ*, δ and the fixed `g1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OptimizeBox {
    pub base: SystemParams,
    pub g1: Range,
    pub kappa1: Range,
    pub g2: Range,
    pub kappa2: Range,
}

/// Limits in laboratory terms, converted to a search box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Constraints {
    pub q1_max: f64,
    pub q2_max: f64,
    /// Fixed `g1`, or the upper end of `[g1_min, g1_max]` when `g1_max` is set.
    pub g1: f64,
    pub g1_max: Option<f64>,
    pub g1_min: f64,
    pub g2_min: f64,
    pub g2_max: f64,
    pub kappa_max: f64,
    pub omega: f64,
    pub gamma_lab: f64,
}

impl Constraints {
    /// `Q ≤ q_max` is `κ ≥ ω/(q_max γ_lab)`.
    pub fn to_box(&self, base: SystemParams) -> Result<OptimizeBox> {
        let kappa_min = |q| q_to_kappa(&QFactorSpec { q, omega: self.omega, gamma_lab: self.gamma_lab });
        let g1 = match self.g1_max {
            Some(max) => Range::new(self.g1_min, max),
            None => Range::fixed(self.g1),
        };
        Ok(OptimizeBox {
            base,
            g1,
            kappa1: Range::new(kappa_min(self.q1_max)?, self.kappa_max),
            g2: Range::new(self.g2_min, self.g2_max),
            kappa2: Range::new(kappa_min(self.q2_max)?, self.kappa_max),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OptimizeOptions {
    pub objective: Objective,
    /// Points per variable on the coarse grid.
    pub grid_points: usize,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self { objective: Objective::EtaInd, grid_points: 7 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OptimizeResult {
    pub params: SystemParams,
    pub eta: f64,
    pub ind: f64,
    pub eta_ind: f64,
    pub objective: Objective,
    pub objective_value: f64,
    pub evaluations: usize,
}

type Point = [f64; 4];

impl OptimizeBox {
    fn ranges(&self) -> [Range; 4] {
        [self.g1, self.kappa1, self.g2, self.kappa2]
    }

    fn params_at(&self, x: &Point) -> SystemParams {
        SystemParams { g1: x[0], kappa1: x[1], g2: x[2], kappa2: x[3], ..self.base }
    }
}

#[derive(Clone, Copy)]
struct Scored {
    x: Point,
    value: f64,
    eta: f64,
    ind: f64,
}

fn score(bx: &OptimizeBox, objective: Objective, x: Point) -> Option<Scored> {
    let config = Configuration::cascaded(bx.params_at(&x));
    let report = evaluate(&config, Evaluator::Master, objective != Objective::Eta).ok()?;
    let eta = report.eta_master()?;
    let ind = if objective == Objective::Eta { f64::NAN } else { report.i_master()? };
    let value = match objective {
        Objective::EtaInd => eta * ind,
        Objective::Ind => ind,
        Objective::Eta => eta,
    };
    value.is_finite().then_some(Scored { x, value, eta, ind })
}

/// Ties go to the earlier candidate so the result is order-stable.
fn best_of(candidates: impl IntoIterator<Item = Option<Scored>>) -> Option<Scored> {
    candidates.into_iter().flatten().fold(None, |best: Option<Scored>, c| match best {
        Some(b) if b.value >= c.value => Some(b),
        _ => Some(c),
    })
}

pub fn optimize(bx: &OptimizeBox, options: &OptimizeOptions) -> Result<OptimizeResult> {
    let ranges = bx.ranges();
    if let Some(r) = ranges.iter().find(|r| !r.feasible()) {
        return Err(Error::Infeasible(format!("empty search range [{}, {}]", r.lo, r.hi)));
    }
    let n = options.grid_points.max(1);
    let axes: Vec<Vec<f64>> = ranges.iter().map(|r| r.log_grid(n)).collect();
    let mut grid = Vec::new();
    for &a in &axes[0] {
        for &b in &axes[1] {
            for &c in &axes[2] {
                for &d in &axes[3] {
                    grid.push([a, b, c, d]);
                }
            }
        }
    }
    let mut evaluations = grid.len();
    let scored: Vec<Option<Scored>> = grid.into_par_iter().map(|x| score(bx, options.objective, x)).collect();
    let mut best = best_of(scored).ok_or_else(|| Error::Infeasible("no point in the box could be evaluated".into()))?;

    // log-space step: one coarse grid spacing to start with
    let mut steps: Vec<f64> = ranges.iter().map(|r| r.log_width() / (n.max(2) - 1) as f64).collect();
    for _ in 0..REFINEMENT_ROUNDS {
        // sweep the coordinates at this step size until none improves
        for _ in 0..MAX_PASSES {
            let before = best.value;
            for (k, range) in ranges.iter().enumerate() {
                if range.lo == range.hi {
                    continue;
                }
                let candidates: Vec<Point> = [-2.0, -1.0, 1.0, 2.0]
                    .iter()
                    .map(|m| {
                        let mut x = best.x;
                        x[k] = range.clamp(x[k] * (m * steps[k]).exp());
                        x
                    })
                    .filter(|x| x[k] != best.x[k])
                    .collect();
                evaluations += candidates.len();
                let trial: Vec<Option<Scored>> =
                    candidates.into_par_iter().map(|x| score(bx, options.objective, x)).collect();
                best = best_of(std::iter::once(Some(best)).chain(trial)).expect("incumbent is present");
            }
            if best.value <= before {
                break;
            }
        }
        for s in &mut steps {
            *s /= SHRINK_FACTOR;
        }
    }
    let ind = if options.objective == Objective::Eta {
        score(bx, Objective::Ind, best.x).map_or(f64::NAN, |s| s.ind)
    } else {
        best.ind
    };
    Ok(OptimizeResult {
        params: bx.params_at(&best.x),
        eta: best.eta,
        ind,
        eta_ind: best.eta * ind,
        objective: options.objective,
        objective_value: best.value,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_box_returns_its_point() {
        let base = SystemParams::cascaded(500.0, 50.0, 150.0, 300.0);
        let bx = OptimizeBox {
            base,
            g1: Range::fixed(500.0),
            kappa1: Range::fixed(50.0),
            g2: Range::fixed(150.0),
            kappa2: Range::fixed(300.0),
        };
        let r = optimize(&bx, &OptimizeOptions::default()).unwrap();
        assert_eq!(r.params, base);
        assert_eq!(r.evaluations, 1);
    }

    #[test]
    fn empty_box_is_infeasible() {
        let base = SystemParams::cascaded(500.0, 50.0, 150.0, 300.0);
        let bx = OptimizeBox {
            base,
            g1: Range::fixed(500.0),
            kappa1: Range::new(10.0, 5.0),
            g2: Range::fixed(150.0),
            kappa2: Range::fixed(300.0),
        };
        assert!(matches!(optimize(&bx, &OptimizeOptions::default()), Err(Error::Infeasible(_))));
    }

    #[test]
    fn q_limits_become_lower_kappa_bounds() {
        let c = Constraints {
            q1_max: 5e5,
            q2_max: 5e5,
            g1: 500.0,
            g1_max: None,
            g1_min: 1.0,
            g2_min: 1.0,
            g2_max: 2000.0,
            kappa_max: 1e4,
            omega: 400e12,
            gamma_lab: 160e6,
        };
        let bx = c.to_box(SystemParams::cascaded(500.0, 1.0, 1.0, 1.0)).unwrap();
        assert!((bx.kappa1.lo - 5.0).abs() < 1e-12 && (bx.kappa2.lo - 5.0).abs() < 1e-12);
        assert_eq!(bx.g1, Range::fixed(500.0));
    }
}
