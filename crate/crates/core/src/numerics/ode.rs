//! Fixed-step classical Runge-Kutta integration of linear systems
//! `dv/dt = A v`. Kept as an independent oracle for the spectral path.

use num_complex::Complex64 as C64;

use super::matrix::CMat;
use crate::error::{Error, Result};

/// Largest admissible step for `rhs`: `0.1 / max|A_ij|`.
pub fn step_limit(rhs: &CMat) -> f64 {
    let m = rhs.max_abs();
    if m > 0.0 {
        0.1 / m
    } else {
        f64::INFINITY
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<C64>>,
}

/// Integrates from `0` to `t_end`, recording every step.
pub fn rk_integrate(rhs: &CMat, v0: &[C64], t_end: f64, dt: f64) -> Result<Trajectory> {
    if !(t_end >= 0.0) || !(dt > 0.0) {
        return Err(Error::InvalidRequest(format!("need t_end >= 0 and dt > 0 (got {t_end}, {dt})")));
    }
    let steps = (t_end / dt).ceil().max(0.0) as usize;
    let times: Vec<f64> = (0..=steps).map(|k| (k as f64 * dt).min(t_end)).collect();
    let states = rk_integrate_at(rhs, v0, &times, dt)?;
    Ok(Trajectory { times, states })
}

/// Integrates with steps no longer than `dt`, returning the state at each
/// of the increasing, non-negative `sample_times`.
pub fn rk_integrate_at(rhs: &CMat, v0: &[C64], sample_times: &[f64], dt: f64) -> Result<Vec<Vec<C64>>> {
    let limit = step_limit(rhs);
    if dt > limit {
        return Err(Error::StepTooLarge { dt, limit });
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidRequest(format!("step must be positive, got {dt}")));
    }
    let n = v0.len();
    let mut v = v0.to_vec();
    let mut t = 0.0;
    let mut out = Vec::with_capacity(sample_times.len());
    let mut k1 = vec![C64::new(0.0, 0.0); n];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();
    for &target in sample_times {
        if target < t {
            return Err(Error::InvalidRequest("sample times must be increasing and non-negative".into()));
        }
        let span = target - t;
        let steps = (span / dt).ceil() as usize;
        if steps > 0 {
            let h = span / steps as f64;
            for _ in 0..steps {
                rhs.matvec_into(&v, &mut k1);
                for i in 0..n {
                    tmp[i] = v[i] + k1[i] * (0.5 * h);
                }
                rhs.matvec_into(&tmp, &mut k2);
                for i in 0..n {
                    tmp[i] = v[i] + k2[i] * (0.5 * h);
                }
                rhs.matvec_into(&tmp, &mut k3);
                for i in 0..n {
                    tmp[i] = v[i] + k3[i] * h;
                }
                rhs.matvec_into(&tmp, &mut k4);
                for i in 0..n {
                    v[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
                }
            }
        }
        t = target;
        out.push(v.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let a = CMat::from_real_rows(&[[-1.0]]);
        let traj = rk_integrate(&a, &[C64::new(1.0, 0.0)], 1.0, 1e-3).unwrap();
        let last = traj.states.last().unwrap()[0].re;
        assert!((last - 0.367879441171).abs() < 1e-8);
        assert_eq!(*traj.times.last().unwrap(), 1.0);
    }

    #[test]
    fn zero_rhs_is_constant() {
        let a = CMat::zeros(2, 2);
        let v0 = vec![C64::new(0.25, 0.5), C64::new(-1.0, 0.0)];
        let traj = rk_integrate(&a, &v0, 3.0, 0.5).unwrap();
        assert!(traj.states.iter().all(|s| *s == v0));
    }

    #[test]
    fn oversized_step_is_rejected() {
        let a = CMat::from_real_rows(&[[-100.0]]);
        assert!(matches!(rk_integrate(&a, &[C64::new(1.0, 0.0)], 1.0, 0.01), Err(Error::StepTooLarge { .. })));
    }

    #[test]
    fn fourth_order_convergence() {
        let a = CMat::from_real_rows(&[[-1.0, 2.0], [-2.0, -1.0]]);
        let exact = super::super::expm(&a.scale(C64::new(2.0, 0.0))).column(0);
        let err = |dt: f64| {
            let s = rk_integrate_at(&a, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], &[2.0], dt).unwrap();
            (s[0][0] - exact[0]).norm() + (s[0][1] - exact[1]).norm()
        };
        let ratio = err(0.02) / err(0.01);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }
}
