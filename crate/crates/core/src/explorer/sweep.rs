//! One- and two-dimensional parameter sweeps.

use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::format::{fmt_num, fmt_opt, write_header, write_row};
use super::report::{evaluate, Configuration, EmissionReport, Evaluator};
use crate::error::{Error, Result};
use crate::model::SystemParams;

pub const SWEEP_COLUMNS: [&str; 10] =
    ["axis1", "axis2", "eta_master", "i_master", "eta_closed", "i_closed", "r1", "r2", "regime", "note"];

/// Fraction of points that must succeed for a sweep to count as healthy.
pub const MIN_SUCCESS_FRACTION: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamName {
    Gamma,
    GammaStar,
    G1,
    Kappa1,
    G2,
    Kappa2,
    Delta,
    /// Single-cavity coupling (sets `g1`).
    G,
    /// Single-cavity decay (sets `κ1` and `κ2`).
    Kappa,
}

impl ParamName {
    pub fn apply(self, params: &SystemParams, value: f64) -> SystemParams {
        let mut p = *params;
        match self {
            ParamName::Gamma => p.gamma = value,
            ParamName::GammaStar => p.gamma_star = value,
            ParamName::G1 | ParamName::G => p.g1 = value,
            ParamName::Kappa1 => p.kappa1 = value,
            ParamName::G2 => p.g2 = value,
            ParamName::Kappa2 => p.kappa2 = value,
            ParamName::Delta => p.delta = value,
            ParamName::Kappa => {
                p.kappa1 = value;
                p.kappa2 = value;
            }
        }
        p
    }
}

impl FromStr for ParamName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.replace('-', "_").as_str() {
            "gamma" => ParamName::Gamma,
            "gamma_star" => ParamName::GammaStar,
            "g1" => ParamName::G1,
            "kappa1" => ParamName::Kappa1,
            "g2" => ParamName::G2,
            "kappa2" => ParamName::Kappa2,
            "delta" => ParamName::Delta,
            "g" => ParamName::G,
            "kappa" => ParamName::Kappa,
            _ => return Err(Error::InvalidRequest(format!("unknown sweep parameter '{s}'"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Axis {
    pub name: ParamName,
    pub min: f64,
    pub max: f64,
    pub n: usize,
    pub scale: Scale,
}

impl Axis {
    pub fn new(name: ParamName, min: f64, max: f64, n: usize, scale: Scale) -> Result<Self> {
        let axis = Self { name, min, max, n, scale };
        axis.validate()?;
        Ok(axis)
    }

    /// `n ≥ 2` with `min < max`, or a single point with `min == max`.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidRequest(format!("axis {:?}: {msg}", self.name)));
        if !(self.min.is_finite() && self.max.is_finite()) {
            return bad("bounds must be finite");
        }
        match self.n {
            0 => return bad("needs at least one point"),
            1 if self.min != self.max => return bad("a single point needs min == max"),
            1 => {}
            _ if self.min >= self.max => return bad("min must be below max"),
            _ => {}
        }
        if self.scale == Scale::Log && self.min <= 0.0 {
            return bad("log scale needs min > 0");
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.min];
        }
        let last = (self.n - 1) as f64;
        let mut v: Vec<f64> = (0..self.n)
            .map(|i| {
                let f = i as f64 / last;
                match self.scale {
                    Scale::Linear => self.min + (self.max - self.min) * f,
                    Scale::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * f).exp(),
                }
            })
            .collect();
        v[0] = self.min;
        v[self.n - 1] = self.max;
        v
    }
}

/// Parses `name:min:max:n[:linear|log]`.
impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(4..=5).contains(&parts.len()) {
            return Err(Error::InvalidRequest(format!("axis '{s}' is not name:min:max:n[:scale]")));
        }
        let num = |x: &str| {
            x.trim().parse::<f64>().map_err(|_| Error::InvalidRequest(format!("bad number '{x}' in axis '{s}'")))
        };
        let n =
            parts[3].trim().parse::<usize>().map_err(|_| Error::InvalidRequest(format!("bad count in axis '{s}'")))?;
        let scale = match parts.get(4).map(|x| x.trim()) {
            None | Some("linear") | Some("lin") => Scale::Linear,
            Some("log") => Scale::Log,
            Some(other) => return Err(Error::InvalidRequest(format!("unknown scale '{other}'"))),
        };
        Axis::new(parts[0].trim().parse()?, num(parts[1])?, num(parts[2])?, n, scale)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Eta,
    Ind,
    EtaInd,
    Traces,
}

impl FromStr for Output {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().replace('-', "_").as_str() {
            "eta" => Output::Eta,
            "ind" => Output::Ind,
            "eta_ind" => Output::EtaInd,
            "traces" => Output::Traces,
            _ => return Err(Error::InvalidRequest(format!("unknown output '{s}'"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRequest {
    pub base: Configuration,
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    pub evaluator: Evaluator,
    pub outputs: Vec<Output>,
}

impl SweepRequest {
    pub fn validate(&self) -> Result<()> {
        self.axis1.validate()?;
        if let Some(a) = &self.axis2 {
            a.validate()?;
        }
        if self.outputs.contains(&Output::Traces) {
            return Err(Error::InvalidRequest("traces are not part of the sweep table; use `compare`".into()));
        }
        Ok(())
    }

    fn needs_ind(&self) -> bool {
        self.outputs.is_empty() || self.outputs.iter().any(|o| matches!(o, Output::Ind | Output::EtaInd))
    }

    /// Grid points in row order, axis2 varying fastest.
    pub fn points(&self) -> Vec<(f64, Option<f64>)> {
        let v2: Vec<Option<f64>> = match &self.axis2 {
            Some(a) => a.values().into_iter().map(Some).collect(),
            None => vec![None],
        };
        self.axis1.values().into_iter().flat_map(|x| v2.iter().map(move |&y| (x, y))).collect()
    }

    fn configuration_at(&self, x: f64, y: Option<f64>) -> Configuration {
        let mut params = self.axis1.name.apply(&self.base.params, x);
        if let (Some(axis), Some(y)) = (&self.axis2, y) {
            params = axis.name.apply(&params, y);
        }
        Configuration { params, mode: self.base.mode }
    }
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub axis1: f64,
    pub axis2: Option<f64>,
    pub result: std::result::Result<EmissionReport, String>,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn n_failed(&self) -> usize {
        self.rows.iter().filter(|r| r.result.is_err()).count()
    }

    pub fn healthy(&self) -> bool {
        let ok = self.rows.len() - self.n_failed();
        ok as f64 >= MIN_SUCCESS_FRACTION * self.rows.len() as f64
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        write_header(out, &SWEEP_COLUMNS)?;
        for row in &self.rows {
            let mut cells = vec![fmt_num(row.axis1), fmt_opt(row.axis2)];
            match &row.result {
                Ok(r) => {
                    let closed = r.closed;
                    cells.extend([
                        fmt_opt(r.eta_master()),
                        fmt_opt(r.i_master()),
                        fmt_opt(r.eta_closed()),
                        fmt_opt(r.i_closed()),
                        fmt_opt(closed.map(|c| c.r1)),
                        fmt_opt(closed.map(|c| c.r2)),
                        r.regime.label().to_string(),
                        note_for(r),
                    ]);
                }
                Err(msg) => {
                    cells.extend(std::iter::repeat_n(String::new(), 6));
                    cells.push(String::new());
                    cells.push(format!("error: {msg}"));
                }
            }
            write_row(out, &cells)?;
        }
        Ok(())
    }
}

fn note_for(r: &EmissionReport) -> String {
    let mut notes = Vec::new();
    if r.diagnostics.ind_undefined {
        notes.push("ind undefined".to_string());
    }
    if let Some(f) = &r.diagnostics.fallback {
        notes.push(format!("fallback: {f}"));
    }
    notes.join("; ")
}

/// Evaluates every grid point in parallel; rows keep grid order.
pub fn run_sweep(request: &SweepRequest) -> Result<SweepResult> {
    request.validate()?;
    let with_ind = request.needs_ind();
    let rows = request
        .points()
        .into_par_iter()
        .map(|(x, y)| {
            let config = request.configuration_at(x, y);
            let result = evaluate(&config, request.evaluator, with_ind).map_err(|e| e.to_string());
            SweepRow { axis1: x, axis2: y, result }
        })
        .collect();
    Ok(SweepResult { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_parsing() {
        let a: Axis = "kappa2:10:10000:4:log".parse().unwrap();
        assert_eq!(a.name, ParamName::Kappa2);
        let v = a.values();
        assert_eq!(v.len(), 4);
        assert!((v[1] - 100.0).abs() < 1e-9 && v[3] == 10000.0);
        let b: Axis = "g2:0:10:3".parse().unwrap();
        assert_eq!(b.values(), vec![0.0, 5.0, 10.0]);
        assert!("g2:5:5:1".parse::<Axis>().is_ok());
        assert!("g2:5:6:1".parse::<Axis>().is_err());
        assert!("g2:6:5:3".parse::<Axis>().is_err());
        assert!("g2:0:5:3:log".parse::<Axis>().is_err());
        assert!("nope:0:5:3".parse::<Axis>().is_err());
        assert!("g2:0:5".parse::<Axis>().is_err());
    }

    #[test]
    fn axis2_varies_fastest() {
        let req = SweepRequest {
            base: Configuration::cascaded(SystemParams::cascaded(500.0, 50.0, 10.0, 1.0)),
            axis1: "g2:1:2:2".parse().unwrap(),
            axis2: Some("kappa2:1:3:3".parse().unwrap()),
            evaluator: Evaluator::Rate,
            outputs: vec![],
        };
        let pts = req.points();
        assert_eq!(pts[0], (1.0, Some(1.0)));
        assert_eq!(pts[1], (1.0, Some(2.0)));
        assert_eq!(pts[3], (2.0, Some(1.0)));
        let res = run_sweep(&req).unwrap();
        assert_eq!(res.rows.len(), 6);
        assert!(res.healthy());
        let mut buf = Vec::new();
        res.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# schema-version: 1"));
        assert_eq!(lines.next(), Some(SWEEP_COLUMNS.join(",").as_str()));
        assert_eq!(text.lines().count(), 8);
    }

    #[test]
    fn traces_output_is_rejected() {
        let req = SweepRequest {
            base: Configuration::cascaded(SystemParams::cascaded(500.0, 50.0, 10.0, 1.0)),
            axis1: "g2:1:2:2".parse().unwrap(),
            axis2: None,
            evaluator: Evaluator::Rate,
            outputs: vec![Output::Traces],
        };
        assert!(run_sweep(&req).is_err());
    }
}
