use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter { name: &'static str, value: f64, reason: &'static str },

    #[error("eigenvalue iteration did not converge after {iterations} sweeps")]
    NonConvergence { iterations: usize },

    /// The eigenvector basis does not reconstruct the matrix; the
    /// matrix is (numerically) defective.
    #[error("degenerate spectrum: reconstruction error {residual:.3e}")]
    DegenerateSpectrum { residual: f64 },

    #[error("step {dt:.3e} exceeds the stability limit {limit:.3e}")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("excitation remaining at window end {tail_mass:.3e} exceeds {tolerance:.1e}")]
    TailTooHeavy { tail_mass: f64, tolerance: f64 },

    /// Nothing is ever emitted through the collection mode, so ratios
    /// normalised by the emitted flux are undefined.
    #[error("no emission through the collection mode")]
    NoEmission,

    #[error("invalid request: {0}")]
    InvalidRequest(String),

    #[error("no feasible point: {0}")]
    Infeasible(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
