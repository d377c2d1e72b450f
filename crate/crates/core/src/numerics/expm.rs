//! Matrix exponential: spectral action and a scaling-and-squaring fallback.

use num_complex::Complex64 as C64;

use super::eigen::EigenDecomposition;
use super::matrix::CMat;
use crate::error::{Error, Result};

/// `exp(A t) v` evaluated through the cached eigendecomposition of `A`.
///
/// Returns `v` unchanged at `t = 0`.
pub fn expm_action(decomp: &EigenDecomposition, t: f64, v: &[C64]) -> Result<Vec<C64>> {
    if !(t >= 0.0) {
        return Err(Error::InvalidRequest(format!("propagation time must be non-negative, got {t}")));
    }
    if t == 0.0 {
        return Ok(v.to_vec());
    }
    let coeffs = decomp.left.matvec(v);
    let n = decomp.dim();
    let mut out = vec![C64::new(0.0, 0.0); n];
    for k in 0..n {
        let w = coeffs[k] * (decomp.values[k] * t).exp();
        for i in 0..n {
            out[i] += decomp.right[(i, k)] * w;
        }
    }
    Ok(out)
}

/// `exp(A)` by Taylor expansion of `A / 2^s` followed by `s` squarings.
pub fn expm(a: &CMat) -> CMat {
    assert!(a.is_square());
    let n = a.rows();
    let norm = a.norm_one();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = a.scale(C64::new(0.5f64.powi(squarings), 0.0));
    let mut result = CMat::identity(n);
    let mut term = CMat::identity(n);
    for k in 1..=24 {
        term = (&term * &scaled).scale(C64::new(1.0 / k as f64, 0.0));
        result = &result + &term;
        if term.norm_fro() < 1e-18 * result.norm_fro() {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}
