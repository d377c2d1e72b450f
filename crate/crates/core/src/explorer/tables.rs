//! Time-trace comparison and spectral-diffusion tables.

use std::io::{self, Write};

use rayon::prelude::*;

use super::format::{fmt_num, write_header, write_row};
use super::report::Configuration;
use crate::correlator::indistinguishability;
use crate::ensemble::{ensemble_efficiency, ensemble_indistinguishability_with, DiffusionSpec, EnsembleAverage};
use crate::error::Result;
use crate::master::{efficiency_from_trace, propagate, TimeWindow};
use crate::rate::{rate_propagate, RateModel};

pub const COMPARE_COLUMNS: [&str; 7] =
    ["t", "p_e_master", "p_a_master", "p_b_master", "p_e_rate", "p_a_rate", "p_b_rate"];
pub const DIFFUSION_COLUMNS: [&str; 5] = ["fwhm", "eta_ensemble", "i_ensemble", "eta_delta0", "i_delta0"];

/// Master-equation and rate-equation populations on a common grid.
#[derive(Clone, Debug)]
pub struct CompareTable {
    pub times: Vec<f64>,
    pub master: [Vec<f64>; 3],
    pub rate: [Vec<f64>; 3],
}

impl CompareTable {
    /// Largest `|master − rate|` over samples with `t > t_min`, per population.
    pub fn max_deviation_after(&self, t_min: f64) -> [f64; 3] {
        let mut worst = [0.0f64; 3];
        for (i, &t) in self.times.iter().enumerate() {
            if t <= t_min {
                continue;
            }
            for k in 0..3 {
                worst[k] = worst[k].max((self.master[k][i] - self.rate[k][i]).abs());
            }
        }
        worst
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        write_header(out, &COMPARE_COLUMNS)?;
        for (i, &t) in self.times.iter().enumerate() {
            let mut cells = vec![fmt_num(t)];
            cells.extend(self.master.iter().map(|p| fmt_num(p[i])));
            cells.extend(self.rate.iter().map(|p| fmt_num(p[i])));
            write_row(out, &cells)?;
        }
        Ok(())
    }
}

pub fn compare_traces(config: &Configuration, window: Option<TimeWindow>) -> Result<CompareTable> {
    let params = &config.params;
    let trace = propagate(params, window)?;
    let model = RateModel::new(params)?;
    let rate = rate_propagate(&model, &trace.times)?;
    Ok(CompareTable {
        times: trace.times.clone(),
        master: [trace.p_e.clone(), trace.p_a.clone(), trace.p_b.clone()],
        rate: [rate.p_e, rate.p_a, rate.p_b],
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiffusionRow {
    pub fwhm: f64,
    pub eta_ensemble: f64,
    pub i_ensemble: f64,
    pub eta_delta0: f64,
    pub i_delta0: f64,
}

pub fn diffusion_table(
    config: &Configuration,
    fwhms: &[f64],
    n_nodes: usize,
    average: EnsembleAverage,
) -> Result<Vec<DiffusionRow>> {
    let params = &config.params;
    let trace = propagate(params, None)?;
    let eta_delta0 = efficiency_from_trace(&trace, params, config.mode)?;
    let i_delta0 = indistinguishability(params, config.mode)?.value;
    let specs = fwhms
        .iter()
        .map(|&f| {
            let spec = DiffusionSpec::new(f).with_nodes(n_nodes);
            spec.validate().map(|_| spec)
        })
        .collect::<Result<Vec<_>>>()?;
    specs
        .par_iter()
        .map(|spec| {
            let (eta_ensemble, i_ensemble) = if spec.fwhm == 0.0 {
                (eta_delta0, i_delta0)
            } else {
                (ensemble_efficiency(params, spec)?, ensemble_indistinguishability_with(params, spec, average)?)
            };
            Ok(DiffusionRow { fwhm: spec.fwhm, eta_ensemble, i_ensemble, eta_delta0, i_delta0 })
        })
        .collect()
}

pub fn write_diffusion_csv<W: Write>(rows: &[DiffusionRow], out: &mut W) -> io::Result<()> {
    write_header(out, &DIFFUSION_COLUMNS)?;
    for r in rows {
        let cells = [r.fwhm, r.eta_ensemble, r.i_ensemble, r.eta_delta0, r.i_delta0].map(fmt_num);
        write_row(out, &cells)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SystemParams;

    #[test]
    fn bare_emitter_master_equals_rate() {
        let c = Configuration::cascaded(SystemParams::cascaded(0.0, 50.0, 10.0, 1.0));
        let table = compare_traces(&c, None).unwrap();
        assert!(table.max_deviation_after(-1.0).iter().all(|&d| d < 1e-9));
    }

    #[test]
    fn zero_width_row_equals_single_point() {
        let c = Configuration::cascaded(SystemParams::cascaded(500.0, 50.0, 3.0, 10.0));
        let rows = diffusion_table(&c, &[0.0], 15, EnsembleAverage::CrossTerms).unwrap();
        assert_eq!(rows[0].eta_ensemble, rows[0].eta_delta0);
        assert_eq!(rows[0].i_ensemble, rows[0].i_delta0);
        assert!(diffusion_table(&c, &[-1.0], 15, EnsembleAverage::CrossTerms).is_err());
    }
}
