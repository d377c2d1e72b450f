//! Physical parameters, Hamiltonian and Liouvillian of an emitter coupled
//! to two cascaded cavities, truncated to the single-excitation block.
//!
//! Basis ordering is `(e, a, b)` = `{|e,0,0⟩, |g,1,0⟩, |g,0,1⟩}`. The
//! ground state `|g,0,0⟩` is a pure sink and is not stored: its
//! population is `1 - trace(ρ)`. Density matrices are vectorised
//! column-major, `vec(ρ)[i + 3j] = ρ[i][j]`. All rates are in units of
//! the emitter radiative decay rate.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{eig_dense, hermitian_eigenvalues, CMat, EigenDecomposition};

/// Pure-dephasing rate used when none is given (γ* = 10⁴ γ).
pub const DEFAULT_GAMMA_STAR: f64 = 1e4;

pub type Mat3 = [[C64; 3]; 3];

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SystemParams {
    /// Emitter radiative decay γ.
    pub gamma: f64,
    /// Emitter pure dephasing γ*.
    pub gamma_star: f64,
    /// Emitter to first-cavity coupling.
    pub g1: f64,
    /// First-cavity decay.
    pub kappa1: f64,
    /// First- to second-cavity coupling.
    pub g2: f64,
    /// Second-cavity decay.
    pub kappa2: f64,
    /// Emitter detuning from the (common) cavity frequency.
    pub delta: f64,
}

impl SystemParams {
    /// Cascaded configuration with γ = 1, γ* = 10⁴ and no detuning.
    pub fn cascaded(g1: f64, kappa1: f64, g2: f64, kappa2: f64) -> Self {
        Self { gamma: 1.0, gamma_star: DEFAULT_GAMMA_STAR, g1, kappa1, g2, kappa2, delta: 0.0 }
    }

    /// Single emitter-cavity system: the second cavity is decoupled
    /// (`g2 = 0`) and light is collected from the first cavity.
    pub fn single_cavity(g: f64, kappa: f64) -> Self {
        Self::cascaded(g, kappa, 0.0, kappa)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_gamma_star(mut self, gamma_star: f64) -> Self {
        self.gamma_star = gamma_star;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name, value: f64, ok: bool, reason| {
            if value.is_finite() && ok {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, value, reason })
            }
        };
        check("gamma", self.gamma, self.gamma > 0.0, "must be positive")?;
        check("gamma_star", self.gamma_star, self.gamma_star >= 0.0, "must be non-negative")?;
        check("g1", self.g1, self.g1 >= 0.0, "must be non-negative")?;
        check("kappa1", self.kappa1, self.kappa1 > 0.0, "must be positive")?;
        check("g2", self.g2, self.g2 >= 0.0, "must be non-negative")?;
        check("kappa2", self.kappa2, self.kappa2 > 0.0, "must be positive")?;
        check("delta", self.delta, true, "must be finite")
    }

    /// Γ = γ + γ*, the homogeneous emitter linewidth.
    pub fn total_dephasing(&self) -> f64 {
        self.gamma + self.gamma_star
    }

    /// Sum of every coherent and dissipative scale; sets the oracle step.
    pub fn fastest_scale(&self) -> f64 {
        self.gamma + self.gamma_star + self.kappa1 + self.kappa2 + 2.0 * (self.g1 + self.g2 + self.delta.abs())
    }

    /// Mode whose leakage is collected: the second cavity, or the first
    /// one for a single-cavity system (`g2 = 0`).
    pub fn collection_mode(&self) -> Mode {
        if self.g2 == 0.0 {
            Mode::Cavity1
        } else {
            Mode::Cavity2
        }
    }

    /// Decay rate of the given mode's population.
    pub fn decay_rate(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Emitter => self.gamma,
            Mode::Cavity1 => self.kappa1,
            Mode::Cavity2 => self.kappa2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Mode {
    #[serde(rename = "e")]
    Emitter,
    #[serde(rename = "a")]
    Cavity1,
    #[serde(rename = "b")]
    Cavity2,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Emitter, Mode::Cavity1, Mode::Cavity2];

    pub fn index(self) -> usize {
        match self {
            Mode::Emitter => 0,
            Mode::Cavity1 => 1,
            Mode::Cavity2 => 2,
        }
    }
}

/// Density matrix on the single-excitation block at a given time.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState {
    pub rho: Mat3,
    pub time: f64,
}

impl DensityState {
    /// `|e,0,0⟩⟨e,0,0|` at `t = 0`.
    pub fn excited() -> Self {
        let mut rho = [[ZERO; 3]; 3];
        rho[0][0] = C64::new(1.0, 0.0);
        Self { rho, time: 0.0 }
    }

    pub fn from_vec(v: &[C64], time: f64) -> Self {
        let mut rho = [[ZERO; 3]; 3];
        for (j, col) in v.chunks(3).enumerate() {
            for (i, &x) in col.iter().enumerate() {
                rho[i][j] = x;
            }
        }
        Self { rho, time }
    }

    pub fn to_vec(&self) -> Vec<C64> {
        (0..9).map(|k| self.rho[k % 3][k / 3]).collect()
    }

    pub fn population(&self, mode: Mode) -> f64 {
        self.rho[mode.index()][mode.index()].re
    }

    pub fn trace(&self) -> f64 {
        (0..3).map(|i| self.rho[i][i].re).sum()
    }

    pub fn ground_population(&self) -> f64 {
        1.0 - self.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.rho[i][j] - self.rho[j][i].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let m = CMat::from_rows(&self.rho);
        hermitian_eigenvalues(&m)[0]
    }
}

/// `H/ħ = [[δ, g1, 0], [g1, 0, g2], [0, g2, 0]]` in the rotating frame of
/// the cavities.
pub fn build_hamiltonian(params: &SystemParams) -> CMat {
    CMat::from_real_rows(&[[params.delta, params.g1, 0.0], [params.g1, 0.0, params.g2], [0.0, params.g2, 0.0]])
}

fn projector(mode: Mode) -> CMat {
    let mut p = CMat::zeros(3, 3);
    p[(mode.index(), mode.index())] = C64::new(1.0, 0.0);
    p
}

/// 9×9 generator `L` with `d vec(ρ)/dt = L vec(ρ)`.
///
/// Radiative decays leave the block (the jump lands in the ground-state
/// sink), so only their anticommutator part acts here. Pure dephasing is
/// the full dissipator of `√γ* |e⟩⟨e|`.
pub fn liouvillian_generator(params: &SystemParams) -> CMat {
    let h = build_hamiltonian(params);
    let id = CMat::identity(3);
    // vec(AρB) = (Bᵀ ⊗ A) vec(ρ)
    let left = |a: &CMat| id.kron(a);
    let right = |b: &CMat| b.transpose().kron(&id);

    let minus_i = C64::new(0.0, -1.0);
    let mut gen = (&left(&h) - &right(&h)).scale(minus_i);
    for mode in Mode::ALL {
        let p = projector(mode);
        let rate = params.decay_rate(mode);
        let anti = &left(&p) + &right(&p);
        gen = &gen + &anti.scale(C64::new(-0.5 * rate, 0.0));
    }
    let pe = projector(Mode::Emitter);
    let sandwich = pe.transpose().kron(&pe);
    let anti = &left(&pe) + &right(&pe);
    let dephasing = &sandwich - &anti.scale(C64::new(0.5, 0.0));
    &gen + &dephasing.scale(C64::new(params.gamma_star, 0.0))
}

/// Master-equation generator with its cached eigendecomposition.
#[derive(Clone, Debug)]
pub struct LiouvillianDecomposition {
    pub generator: CMat,
    pub spectrum: EigenDecomposition,
}

impl LiouvillianDecomposition {
    pub fn eigenvalues(&self) -> &[C64] {
        &self.spectrum.values
    }

    pub fn right_vectors(&self) -> &CMat {
        &self.spectrum.right
    }

    pub fn left_vectors(&self) -> &CMat {
        &self.spectrum.left
    }

    pub fn condition_estimate(&self) -> f64 {
        self.spectrum.condition
    }

    /// Eigenvalue with the smallest non-zero `|Re λ|`: the slowest mode.
    pub fn slowest_rate(&self) -> f64 {
        slowest_rate(self.eigenvalues())
    }
}

pub(crate) fn slowest_rate(values: &[C64]) -> f64 {
    values.iter().map(|l| l.re.abs()).filter(|&r| r > 0.0).fold(f64::INFINITY, f64::min)
}

/// Builds and diagonalises the generator.
///
/// Fails with [`Error::DegenerateSpectrum`] near exceptional points;
/// callers fall back to step integration of [`liouvillian_generator`].
pub fn build_liouvillian(params: &SystemParams) -> Result<LiouvillianDecomposition> {
    params.validate()?;
    let generator = liouvillian_generator(params);
    let spectrum = eig_dense(&generator)?;
    Ok(LiouvillianDecomposition { generator, spectrum })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec_index(i: usize, j: usize) -> usize {
        i + 3 * j
    }

    #[test]
    fn hamiltonian_entries() {
        let h = build_hamiltonian(&SystemParams::cascaded(500.0, 50.0, 10.0, 1.0));
        let expected = [[0.0, 500.0, 0.0], [500.0, 0.0, 10.0], [0.0, 10.0, 0.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(h[(i, j)], C64::new(expected[i][j], 0.0));
            }
        }
        let h0 = build_hamiltonian(&SystemParams::cascaded(0.0, 1.0, 0.0, 1.0));
        assert_eq!(h0.max_abs(), 0.0);
        let hd = build_hamiltonian(&SystemParams::cascaded(1.0, 1.0, 1.0, 1.0).with_delta(2.0));
        assert_eq!(hd[(0, 0)], C64::new(2.0, 0.0));
        assert_eq!(hd[(1, 1)], C64::new(0.0, 0.0));
        assert_eq!(hd[(1, 2)], C64::new(1.0, 0.0));
    }

    #[test]
    fn decoupled_spectrum_contains_decay_rates() {
        let p = SystemParams::cascaded(0.0, 3.0, 0.0, 7.0).with_gamma_star(2.0);
        let l = build_liouvillian(&p).unwrap();
        for rate in [1.0, 3.0, 7.0] {
            assert!(l.eigenvalues().iter().any(|v| (v - C64::new(-rate, 0.0)).norm() < 1e-12), "missing -{rate}");
        }
    }

    #[test]
    fn emitter_cavity_coherence_damping() {
        let p = SystemParams::cascaded(500.0, 50.0, 10.0, 1.0);
        let g = liouvillian_generator(&p);
        let k = vec_index(0, 1);
        assert!((g[(k, k)] - C64::new(-5025.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn trace_leaks_through_decay_channels_only() {
        let p = SystemParams::cascaded(3.0, 2.0, 5.0, 0.7).with_gamma(1.3).with_gamma_star(11.0).with_delta(0.4);
        let g = liouvillian_generator(&p);
        let diag = [vec_index(0, 0), vec_index(1, 1), vec_index(2, 2)];
        let rates = [1.3, 2.0, 0.7];
        for col in 0..9 {
            let s: C64 = diag.iter().map(|&r| g[(r, col)]).sum();
            let expected = match diag.iter().position(|&d| d == col) {
                Some(k) => -rates[k],
                None => 0.0,
            };
            assert!((s - C64::new(expected, 0.0)).norm() < 1e-12, "column {col}");
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let base = SystemParams::cascaded(1.0, 1.0, 1.0, 1.0);
        assert!(SystemParams { gamma: 0.0, ..base }.validate().is_err());
        assert!(SystemParams { kappa1: -1.0, ..base }.validate().is_err());
        assert!(SystemParams { kappa2: 0.0, ..base }.validate().is_err());
        assert!(SystemParams { g2: -0.1, ..base }.validate().is_err());
        assert!(SystemParams { delta: f64::NAN, ..base }.validate().is_err());
        assert!(SystemParams { gamma_star: 0.0, ..base }.validate().is_ok());
    }

    #[test]
    fn density_vectorisation_is_column_major() {
        let mut s = DensityState::excited();
        s.rho[1][0] = C64::new(0.0, 1.0);
        let v = s.to_vec();
        assert_eq!(v[1], C64::new(0.0, 1.0));
        assert_eq!(DensityState::from_vec(&v, 0.0), s);
    }
}
