//! Dense complex eigendecomposition for small non-Hermitian matrices.
//!
//! Householder reduction to upper Hessenberg form, shifted QR iteration
//! to complex Schur form `A = Z T Z^H`, then eigenvectors of `T` by back
//! substitution. Left vectors are the rows of the inverse of the right
//! eigenvector matrix, so `left * right = I` holds by construction.

use num_complex::Complex64 as C64;

use super::matrix::CMat;
use crate::error::{Error, Result};

/// Relative Frobenius reconstruction error above which a decomposition
/// is reported as degenerate.
pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-9;

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// `A = right · diag(values) · left`.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<C64>,
    /// Columns are unit-norm right eigenvectors.
    pub right: CMat,
    /// Rows are left eigenvectors, biorthonormal to `right`.
    pub left: CMat,
    /// `‖right‖_F · ‖left‖_F`, an upper bound on the eigenvector
    /// condition number.
    pub condition: f64,
    pub reconstruction_error: f64,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `right · diag(f(λ)) · left`.
    pub fn map_spectrum(&self, f: impl Fn(C64) -> C64) -> CMat {
        let n = self.dim();
        let fl: Vec<C64> = self.values.iter().map(|&l| f(l)).collect();
        CMat::from_fn(n, n, |i, j| (0..n).map(|k| self.right[(i, k)] * fl[k] * self.left[(k, j)]).sum())
    }

    pub fn reconstruct(&self) -> CMat {
        self.map_spectrum(|l| l)
    }
}

/// Eigenvalues and biorthogonal eigenvectors of a square complex matrix.
///
/// Fails with [`Error::DegenerateSpectrum`] when the eigenvector basis
/// does not reproduce the matrix to [`RECONSTRUCTION_TOLERANCE`] (Jordan
/// blocks and near-exceptional points).
pub fn eig_dense(matrix: &CMat) -> Result<EigenDecomposition> {
    assert!(matrix.is_square(), "eig_dense needs a square matrix");
    if !matrix.is_finite() {
        return Err(Error::InvalidRequest("matrix has non-finite entries".into()));
    }
    let n = matrix.rows();
    let (t, z) = schur(matrix)?;
    let values: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    let y = triangular_eigenvectors(&t);
    let mut right = &z * &y;
    for j in 0..n {
        let norm = (0..n).map(|i| right[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            for i in 0..n {
                right[(i, j)] /= norm;
            }
        }
    }
    let left = right.inverse()?;
    let condition = right.norm_fro() * left.norm_fro();
    let mut decomp = EigenDecomposition { values, right, left, condition, reconstruction_error: 0.0 };
    let scale = matrix.norm_fro();
    let residual = (&decomp.reconstruct() - matrix).norm_fro();
    decomp.reconstruction_error = if scale > 0.0 { residual / scale } else { residual };
    if !(decomp.reconstruction_error <= RECONSTRUCTION_TOLERANCE) {
        return Err(Error::DegenerateSpectrum { residual: decomp.reconstruction_error });
    }
    Ok(decomp)
}

/// Eigenvalues only; succeeds on defective matrices as well.
pub fn eigenvalues(matrix: &CMat) -> Result<Vec<C64>> {
    let (t, _) = schur(matrix)?;
    Ok((0..t.rows()).map(|i| t[(i, i)]).collect())
}

/// Complex Schur form `(T, Z)` with `matrix = Z T Z^H`.
pub fn schur(matrix: &CMat) -> Result<(CMat, CMat)> {
    let (mut h, mut z) = hessenberg(matrix);
    let n = h.rows();
    if n <= 1 {
        return Ok((h, z));
    }
    let eps = f64::EPSILON;
    let norm = h.norm_fro().max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let cap = MAX_SWEEPS_PER_EIGENVALUE * n;

    while hi > 0 {
        // Locate the start of the trailing unreduced block.
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let diag = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            let scale = if diag > 0.0 { diag } else { norm };
            if sub <= eps * scale {
                h[(lo, lo - 1)] = C64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > cap {
            return Err(Error::NonConvergence { iterations: total });
        }

        let shift = if iter.is_multiple_of(11) {
            // Exceptional shift to break cycles.
            h[(hi, hi)] + C64::new(h[(hi, hi - 1)].norm() * 0.75, 0.0)
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        for k in lo..=hi {
            h[(k, k)] -= shift;
        }
        let mut rotations = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            rotations.push((c, s));
            for j in k..n {
                let (a, b) = (h[(k, j)], h[(k + 1, j)]);
                h[(k, j)] = a * c + s * b;
                h[(k + 1, j)] = -s.conj() * a + b * c;
            }
            h[(k + 1, k)] = C64::new(0.0, 0.0);
        }
        for (idx, &(c, s)) in rotations.iter().enumerate() {
            let k = lo + idx;
            let last = (k + 2).min(hi);
            for i in 0..=last {
                let (a, b) = (h[(i, k)], h[(i, k + 1)]);
                h[(i, k)] = a * c + s.conj() * b;
                h[(i, k + 1)] = -s * a + b * c;
            }
            for i in 0..n {
                let (a, b) = (z[(i, k)], z[(i, k + 1)]);
                z[(i, k)] = a * c + s.conj() * b;
                z[(i, k + 1)] = -s * a + b * c;
            }
        }
        for k in lo..=hi {
            h[(k, k)] += shift;
        }
    }
    // Clean the strictly lower part.
    for i in 1..n {
        for j in 0..i {
            h[(i, j)] = C64::new(0.0, 0.0);
        }
    }
    Ok((h, z))
}

/// Unitary rotation `[[c, s], [-s*, c]]` mapping `(x, y)` to `(r, 0)`.
fn givens(x: C64, y: C64) -> (f64, C64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let norm = ax.hypot(ay);
    let phase = x / ax;
    (ax / norm, phase * y.conj() / norm)
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powi(2) + b * c;
    let root = disc.sqrt();
    let l1 = half_tr + root;
    let l2 = half_tr - root;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn hessenberg(matrix: &CMat) -> (CMat, CMat) {
    let n = matrix.rows();
    let mut a = matrix.clone();
    let mut q = CMat::identity(n);
    if n < 3 {
        return (a, q);
    }
    for k in 0..n - 2 {
        let x: Vec<C64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let xnorm = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { C64::new(1.0, 0.0) };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // A <- (I - 2vv^H) A
        for j in 0..n {
            let dot: C64 = v.iter().enumerate().map(|(r, vi)| vi.conj() * a[(k + 1 + r, j)]).sum();
            for (r, vi) in v.iter().enumerate() {
                a[(k + 1 + r, j)] -= *vi * dot * 2.0;
            }
        }
        // A <- A (I - 2vv^H), Q <- Q (I - 2vv^H)
        for m in [&mut a, &mut q] {
            for i in 0..n {
                let dot: C64 = v.iter().enumerate().map(|(r, vi)| m[(i, k + 1 + r)] * vi).sum();
                for (r, vi) in v.iter().enumerate() {
                    m[(i, k + 1 + r)] -= dot * vi.conj() * 2.0;
                }
            }
        }
        for i in k + 2..n {
            a[(i, k)] = C64::new(0.0, 0.0);
        }
    }
    (a, q)
}

/// Columns are eigenvectors of the upper-triangular `t`.
fn triangular_eigenvectors(t: &CMat) -> CMat {
    let n = t.rows();
    let small = (f64::EPSILON * t.norm_fro()).max(f64::MIN_POSITIVE);
    let mut y = CMat::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let s: C64 = (i + 1..=k).map(|j| t[(i, j)] * y[(j, k)]).sum();
            let mut d = t[(i, i)] - lambda;
            if d.norm() < small {
                d = C64::new(small, 0.0);
            }
            y[(i, k)] = -s / d;
        }
    }
    y
}
