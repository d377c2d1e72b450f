//! Single-point evaluation with both the master equation and the
//! closed-form rate model.

use serde::Serialize;

use crate::correlator::{indistinguishability, IntegrationMethod};
use crate::error::{Error, Result};
use crate::master::{efficiency_from_trace, propagate, PropagationMethod};
use crate::model::{Mode, SystemParams};
use crate::rate::{single_cavity_efficiency_closed, RateModel, RegimeFlags};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Evaluator {
    Master,
    Rate,
    #[default]
    Both,
}

impl Evaluator {
    pub fn master(self) -> bool {
        matches!(self, Evaluator::Master | Evaluator::Both)
    }

    pub fn rate(self) -> bool {
        matches!(self, Evaluator::Rate | Evaluator::Both)
    }
}

/// A parameter point together with the cavity whose output is collected.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Configuration {
    pub params: SystemParams,
    pub mode: Mode,
}

impl Configuration {
    pub fn cascaded(params: SystemParams) -> Self {
        Self { params, mode: Mode::Cavity2 }
    }

    /// Single cavity: the second cavity is decoupled and the first one
    /// is collected.
    pub fn single(params: SystemParams) -> Self {
        Self { params: SystemParams { g2: 0.0, ..params }, mode: Mode::Cavity1 }
    }

    pub fn is_single(&self) -> bool {
        self.mode == Mode::Cavity1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MasterFigures {
    pub eta: f64,
    /// `None` when no photon is emitted and `I` is undefined.
    pub ind: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClosedFigures {
    pub eta: f64,
    /// Not available for a single cavity.
    pub ind: Option<f64>,
    pub r1: f64,
    pub r2: f64,
    pub pb_decay_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportDiagnostics {
    pub t_max: Option<f64>,
    pub method: Option<PropagationMethod>,
    pub fallback: Option<String>,
    pub correlator_method: Option<IntegrationMethod>,
    pub ind_undefined: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmissionReport {
    pub params: SystemParams,
    pub mode: Mode,
    pub master: Option<MasterFigures>,
    pub closed: Option<ClosedFigures>,
    pub regime: RegimeFlags,
    pub diagnostics: ReportDiagnostics,
}

impl EmissionReport {
    pub fn eta_master(&self) -> Option<f64> {
        self.master.map(|m| m.eta)
    }

    pub fn i_master(&self) -> Option<f64> {
        self.master.and_then(|m| m.ind)
    }

    pub fn eta_closed(&self) -> Option<f64> {
        self.closed.map(|c| c.eta)
    }

    pub fn i_closed(&self) -> Option<f64> {
        self.closed.and_then(|c| c.ind)
    }
}

/// Evaluates one point. `with_ind = false` skips the correlator.
pub fn evaluate(config: &Configuration, evaluator: Evaluator, with_ind: bool) -> Result<EmissionReport> {
    let params = &config.params;
    params.validate()?;
    let model = RateModel::new(params)?;
    let mut diagnostics =
        ReportDiagnostics { t_max: None, method: None, fallback: None, correlator_method: None, ind_undefined: false };
    let master = if evaluator.master() {
        let trace = propagate(params, None)?;
        diagnostics.t_max = Some(trace.window.t_max);
        diagnostics.method = Some(trace.diagnostics.method);
        diagnostics.fallback = trace.diagnostics.fallback.clone();
        let eta = efficiency_from_trace(&trace, params, config.mode)?;
        let ind = if with_ind {
            match indistinguishability(params, config.mode) {
                Ok(r) => {
                    diagnostics.correlator_method = Some(r.method);
                    Some(r.value)
                }
                Err(Error::NoEmission) => {
                    diagnostics.ind_undefined = true;
                    None
                }
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        Some(MasterFigures { eta, ind })
    } else {
        None
    };
    let closed = evaluator.rate().then(|| {
        if config.is_single() {
            ClosedFigures {
                eta: single_cavity_efficiency_closed(params),
                ind: None,
                r1: model.r1,
                r2: model.r2,
                pb_decay_rate: model.pb_decay_rate,
            }
        } else {
            ClosedFigures {
                eta: model.eta_closed,
                ind: with_ind.then_some(model.i_closed),
                r1: model.r1,
                r2: model.r2,
                pb_decay_rate: model.pb_decay_rate,
            }
        }
    });
    let report =
        EmissionReport { params: *params, mode: config.mode, master, closed, regime: model.regime, diagnostics };
    check_finite(&report)?;
    Ok(report)
}

fn check_finite(report: &EmissionReport) -> Result<()> {
    let values = [report.eta_master(), report.i_master(), report.eta_closed(), report.i_closed()];
    if values.iter().flatten().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidRequest("non-finite figure of merit".into()))
    }
}
