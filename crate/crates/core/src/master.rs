//! Density-matrix propagation under the full master equation, starting
//! from `|e,0,0⟩`, and the exact collection efficiency.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    build_liouvillian, liouvillian_generator, slowest_rate, DensityState, LiouvillianDecomposition, Mat3, Mode,
    SystemParams,
};
use crate::numerics::{eigenvalues, integrate, rk_integrate_at, simpson_weights};
use crate::rate::transfer_rate_r1;

/// Largest excitation allowed to remain at the end of the window.
pub const TAIL_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_SAMPLES: usize = 2048;
pub const MIN_SAMPLES: usize = 64;
/// Auto window length in units of the slowest decay time.
const WINDOW_DECAY_LENGTHS: f64 = 40.0;
/// Fraction of samples placed on the logarithmic part of the grid.
const LOG_FRACTION: f64 = 0.75;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimeWindow {
    pub t_max: f64,
    pub n_samples: usize,
    /// Trace of ρ at `t_max`; `NaN` until a propagation has filled it in.
    pub tail_mass: f64,
}

impl TimeWindow {
    pub fn new(t_max: f64, n_samples: usize) -> Self {
        Self { t_max, n_samples, tail_mass: f64::NAN }
    }

    fn validate(&self) -> Result<()> {
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::InvalidRequest(format!("window t_max must be positive, got {}", self.t_max)));
        }
        if self.n_samples < MIN_SAMPLES {
            return Err(Error::InvalidRequest(format!(
                "window needs at least {MIN_SAMPLES} samples, got {}",
                self.n_samples
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PropagationMethod {
    Spectral,
    RungeKutta,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropagationDiagnostics {
    pub method: PropagationMethod,
    /// Why the spectral path was abandoned, if it was.
    pub fallback: Option<String>,
    pub condition_estimate: Option<f64>,
}

/// `ρ(t) = Σ_j e^{λ_j t} M_j` for a diagonalisable generator.
#[derive(Clone, Debug)]
pub struct SpectralEvolution {
    pub rates: Vec<C64>,
    pub modes: Vec<Mat3>,
}

impl SpectralEvolution {
    pub fn new(liouvillian: &LiouvillianDecomposition, initial: &DensityState) -> Self {
        let coeffs = liouvillian.left_vectors().matvec(&initial.to_vec());
        let right = liouvillian.right_vectors();
        let modes = coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                let mut m = [[ZERO; 3]; 3];
                for (k, v) in (0..9).map(|k| (k, right[(k, j)] * c)) {
                    m[k % 3][k / 3] = v;
                }
                m
            })
            .collect();
        Self { rates: liouvillian.eigenvalues().to_vec(), modes }
    }

    pub fn density(&self, t: f64) -> Mat3 {
        let mut rho = [[ZERO; 3]; 3];
        for (lambda, m) in self.rates.iter().zip(&self.modes) {
            let f = (lambda * t).exp();
            for i in 0..3 {
                for j in 0..3 {
                    rho[i][j] += m[i][j] * f;
                }
            }
        }
        rho
    }

    /// `∫_0^∞ ρ(t) dt = Σ_j M_j / (-λ_j)`.
    pub fn integral(&self) -> Mat3 {
        let mut acc = [[ZERO; 3]; 3];
        for (lambda, m) in self.rates.iter().zip(&self.modes) {
            let f = -1.0 / lambda;
            for i in 0..3 {
                for j in 0..3 {
                    acc[i][j] += m[i][j] * f;
                }
            }
        }
        acc
    }
}

/// Sampled master-equation solution.
#[derive(Clone, Debug)]
pub struct PopulationTrace {
    pub times: Vec<f64>,
    pub p_e: Vec<f64>,
    pub p_a: Vec<f64>,
    pub p_b: Vec<f64>,
    pub coh_eb: Vec<C64>,
    pub coh_ab: Vec<C64>,
    pub coh_ea: Vec<C64>,
    pub window: TimeWindow,
    pub diagnostics: PropagationDiagnostics,
    /// Present when the trace came from the spectral path.
    pub spectral: Option<SpectralEvolution>,
}

impl PopulationTrace {
    fn with_capacity(n: usize, window: TimeWindow, diagnostics: PropagationDiagnostics) -> Self {
        Self {
            times: Vec::with_capacity(n),
            p_e: Vec::with_capacity(n),
            p_a: Vec::with_capacity(n),
            p_b: Vec::with_capacity(n),
            coh_eb: Vec::with_capacity(n),
            coh_ab: Vec::with_capacity(n),
            coh_ea: Vec::with_capacity(n),
            window,
            diagnostics,
            spectral: None,
        }
    }

    fn push(&mut self, t: f64, rho: &Mat3) {
        self.times.push(t);
        self.p_e.push(rho[0][0].re);
        self.p_a.push(rho[1][1].re);
        self.p_b.push(rho[2][2].re);
        self.coh_eb.push(rho[0][2]);
        self.coh_ab.push(rho[1][2]);
        self.coh_ea.push(rho[0][1]);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn population(&self, mode: Mode) -> &[f64] {
        match mode {
            Mode::Emitter => &self.p_e,
            Mode::Cavity1 => &self.p_a,
            Mode::Cavity2 => &self.p_b,
        }
    }

    /// Full Hermitian density matrix at sample `i`.
    pub fn density(&self, i: usize) -> DensityState {
        let (ea, eb, ab) = (self.coh_ea[i], self.coh_eb[i], self.coh_ab[i]);
        let re = |x: f64| C64::new(x, 0.0);
        DensityState {
            rho: [[re(self.p_e[i]), ea, eb], [ea.conj(), re(self.p_a[i]), ab], [eb.conj(), ab.conj(), re(self.p_b[i])]],
            time: self.times[i],
        }
    }

    /// Simpson weights on the sample grid.
    pub fn quadrature_weights(&self) -> Vec<f64> {
        simpson_weights(&self.times)
    }

    /// `∫ p_mode dt` by quadrature on the sample grid.
    /// `∫ p_m dt`: the closed spectral sum when available, Simpson on the
    /// sample grid otherwise.
    pub fn integrated_population(&self, mode: Mode) -> f64 {
        match &self.spectral {
            Some(s) => s.integral()[mode.index()][mode.index()].re,
            None => self.sampled_integral(mode),
        }
    }

    /// Simpson integral of the sampled population over `[0, t_max]`.
    pub fn sampled_integral(&self, mode: Mode) -> f64 {
        integrate(&self.quadrature_weights(), self.population(mode))
    }

    /// `γ∫p_e + κ1∫p_a + κ2∫p_b`: total probability of having left the
    /// block through a radiative channel.
    pub fn channel_total(&self, params: &SystemParams) -> f64 {
        Mode::ALL.iter().map(|&m| params.decay_rate(m) * self.integrated_population(m)).sum()
    }
}

/// Propagates `ρ(0) = |e⟩⟨e|` under the master equation.
///
/// Uses the spectral representation of the generator; near exceptional
/// points it falls back to fixed-step RK4 and records why in the
/// diagnostics. With no window, the window is chosen automatically.
pub fn propagate(params: &SystemParams, window: Option<TimeWindow>) -> Result<PopulationTrace> {
    params.validate()?;
    match build_liouvillian(params) {
        Ok(liouvillian) => propagate_spectral(params, &liouvillian, window),
        Err(Error::DegenerateSpectrum { residual }) => {
            propagate_ode(params, window, Some(format!("degenerate generator (residual {residual:.2e})")))
        }
        Err(e) => Err(e),
    }
}

fn propagate_spectral(
    params: &SystemParams,
    liouvillian: &LiouvillianDecomposition,
    window: Option<TimeWindow>,
) -> Result<PopulationTrace> {
    let spectral = SpectralEvolution::new(liouvillian, &DensityState::excited());
    let slow = liouvillian.slowest_rate();
    let tail = |t: f64| {
        let rho = spectral.density(t);
        (0..3).map(|i| rho[i][i].re).sum::<f64>()
    };
    let window = match window {
        Some(w) => {
            w.validate()?;
            TimeWindow { tail_mass: tail(w.t_max), ..w }
        }
        None => auto_window(slow, tail)?,
    };
    let times = sample_times(params, slow, window);
    let diagnostics = PropagationDiagnostics {
        method: PropagationMethod::Spectral,
        fallback: None,
        condition_estimate: Some(liouvillian.condition_estimate()),
    };
    let mut trace = PopulationTrace::with_capacity(times.len(), window, diagnostics);
    for &t in &times {
        trace.push(t, &spectral.density(t));
    }
    trace.spectral = Some(spectral);
    Ok(trace)
}

fn auto_window(slow: f64, tail: impl Fn(f64) -> f64) -> Result<TimeWindow> {
    let mut t_max = WINDOW_DECAY_LENGTHS / slow;
    for _ in 0..8 {
        let mass = tail(t_max);
        if mass.abs() <= TAIL_TOLERANCE {
            return Ok(TimeWindow { t_max, n_samples: DEFAULT_SAMPLES, tail_mass: mass });
        }
        t_max *= 2.0;
    }
    Err(Error::TailTooHeavy { tail_mass: tail(t_max), tolerance: TAIL_TOLERANCE })
}

/// RK4 propagation of the same master equation. This is the oracle for
/// the spectral path and the fallback when the generator is defective.
pub fn propagate_ode(
    params: &SystemParams,
    window: Option<TimeWindow>,
    fallback: Option<String>,
) -> Result<PopulationTrace> {
    params.validate()?;
    let generator = liouvillian_generator(params);
    let slow = slowest_rate(&eigenvalues(&generator)?);
    let dt = oracle_step(params);
    let v0 = DensityState::excited().to_vec();
    let window = match window {
        Some(w) => {
            w.validate()?;
            w
        }
        None => TimeWindow::new(WINDOW_DECAY_LENGTHS / slow, DEFAULT_SAMPLES),
    };
    let times = sample_times(params, slow, window);
    let states = rk_integrate_at(&generator, &v0, &times, dt)?;
    let tail_mass = {
        let last = DensityState::from_vec(states.last().expect("non-empty grid"), window.t_max);
        last.trace()
    };
    if window.tail_mass.is_nan() && tail_mass.abs() > TAIL_TOLERANCE && fallback.is_some() {
        return Err(Error::TailTooHeavy { tail_mass, tolerance: TAIL_TOLERANCE });
    }
    let diagnostics =
        PropagationDiagnostics { method: PropagationMethod::RungeKutta, fallback, condition_estimate: None };
    let mut trace = PopulationTrace::with_capacity(times.len(), TimeWindow { tail_mass, ..window }, diagnostics);
    for (t, v) in times.iter().zip(&states) {
        trace.push(*t, &DensityState::from_vec(v, *t).rho);
    }
    Ok(trace)
}

/// Fixed oracle step, `0.05 / (γ + γ* + κ1 + κ2 + 2g1 + 2g2 + 2|δ|)`.
pub fn oracle_step(params: &SystemParams) -> f64 {
    0.05 / params.fastest_scale()
}

/// Sample grid: `t = 0`, then logarithmic spacing up to the end of the
/// fast transient, then linear spacing up to `t_max`.
///
/// The log/linear split sits at `max(1/R1, 5/|Re λ_slow|)`, capped at
/// `t_max / 2`, so that every fast component has decayed before the
/// spacing turns coarse.
pub fn sample_times(params: &SystemParams, slowest_rate: f64, window: TimeWindow) -> Vec<f64> {
    let n = window.n_samples;
    let t_max = window.t_max;
    let r1 = transfer_rate_r1(params);
    let transient = if r1 > 0.0 { 1.0 / r1 } else { 0.0 };
    let settle = if slowest_rate.is_finite() && slowest_rate > 0.0 { 5.0 / slowest_rate } else { 0.0 };
    let t_split = transient.max(settle).min(0.5 * t_max).max(1e-6 * t_max);
    let mut t_lo = 1e-3 / params.fastest_scale();
    if t_lo >= 0.1 * t_split {
        t_lo = 1e-4 * t_split;
    }
    let n_log = ((n as f64 * LOG_FRACTION) as usize).max(2);
    let n_lin = n - 1 - n_log;
    let mut times = Vec::with_capacity(n);
    times.push(0.0);
    let ratio = (t_split / t_lo).ln();
    for k in 0..n_log {
        times.push(t_lo * (ratio * k as f64 / (n_log - 1) as f64).exp());
    }
    for k in 1..=n_lin {
        times.push(t_split + (t_max - t_split) * k as f64 / n_lin as f64);
    }
    *times.last_mut().expect("non-empty grid") = t_max;
    times
}

/// `κ_m ∫ p_m dt` for the given collection mode.
pub fn efficiency_from_trace(trace: &PopulationTrace, params: &SystemParams, mode: Mode) -> Result<f64> {
    let tail = trace.window.tail_mass;
    if !(tail.abs() <= TAIL_TOLERANCE) {
        return Err(Error::TailTooHeavy { tail_mass: tail, tolerance: TAIL_TOLERANCE });
    }
    Ok(params.decay_rate(mode) * trace.integrated_population(mode))
}

/// `η = κ2 ∫ p_b dt`, from the spectral sum `Σ_j (M_j)_bb / (-λ_j)` when
/// available and by quadrature otherwise.
pub fn efficiency_exact(trace: &PopulationTrace, params: &SystemParams) -> Result<f64> {
    efficiency_from_trace(trace, params, Mode::Cavity2)
}

/// Efficiency into [`SystemParams::collection_mode`], on the automatic
/// window.
pub fn efficiency(params: &SystemParams) -> Result<f64> {
    let trace = propagate(params, None)?;
    efficiency_from_trace(&trace, params, params.collection_mode())
}

/// `η = κ1 ∫ p_a dt` for a single-cavity system (`g2 = 0`).
pub fn efficiency_single_cavity(params: &SystemParams) -> Result<f64> {
    if params.g2 != 0.0 {
        return Err(Error::InvalidRequest("single-cavity efficiency needs g2 = 0".into()));
    }
    let trace = propagate(params, None)?;
    efficiency_from_trace(&trace, params, Mode::Cavity1)
}
