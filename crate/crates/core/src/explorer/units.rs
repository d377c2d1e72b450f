//! Conversion between laboratory units and rates normalised to the
//! emitter decay rate. Frequencies are ordinary (not angular) and share
//! one unit, e.g. Hz.

use serde::Serialize;

use crate::error::{Error, Result};

/// Optical frequency of the silicon-vacancy zero-phonon line, 400 THz.
pub const DEFAULT_OMEGA: f64 = 400e12;
/// Silicon-vacancy radiative decay rate, 160 MHz.
pub const DEFAULT_GAMMA_LAB: f64 = 160e6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QFactorSpec {
    pub q: f64,
    pub omega: f64,
    pub gamma_lab: f64,
}

impl QFactorSpec {
    pub fn new(q: f64) -> Self {
        Self { q, omega: DEFAULT_OMEGA, gamma_lab: DEFAULT_GAMMA_LAB }
    }

    fn validate(&self) -> Result<()> {
        positive("q", self.q)?;
        positive("omega", self.omega)?;
        positive("gamma_lab", self.gamma_lab)
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value, reason: "must be positive" })
    }
}

/// `κ = (ω/Q)/γ_lab`.
pub fn q_to_kappa(spec: &QFactorSpec) -> Result<f64> {
    spec.validate()?;
    Ok(spec.omega / spec.q / spec.gamma_lab)
}

/// Inverse of [`q_to_kappa`]: the quality factor giving normalised decay `kappa`.
pub fn kappa_to_q(kappa: f64, omega: f64, gamma_lab: f64) -> Result<f64> {
    positive("kappa", kappa)?;
    positive("omega", omega)?;
    positive("gamma_lab", gamma_lab)?;
    Ok(omega / (kappa * gamma_lab))
}

/// A laboratory rate in units of `gamma_lab`.
pub fn normalize_rate(rate_lab: f64, gamma_lab: f64) -> Result<f64> {
    positive("gamma_lab", gamma_lab)?;
    if !rate_lab.is_finite() {
        return Err(Error::InvalidParameter { name: "rate", value: rate_lab, reason: "must be finite" });
    }
    Ok(rate_lab / gamma_lab)
}
