//! One-dimensional quadrature rules.

use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Gauss-Hermite rule for expectations under `Normal(0, sigma^2)`:
/// `Σ w_k f(x_k) ≈ E[f(X)]`, exact for polynomials of degree `≤ 2n-1`.
///
/// Panics unless `1 ≤ n ≤ 64` and `sigma ≥ 0`.
pub fn gauss_hermite(n: usize, sigma: f64) -> QuadratureGrid {
    assert!((1..=64).contains(&n), "Gauss-Hermite order must be in 1..=64, got {n}");
    assert!(sigma >= 0.0, "sigma must be non-negative, got {sigma}");
    let (x, w) = hermite_physicists(n);
    let total: f64 = w.iter().sum();
    let scale = std::f64::consts::SQRT_2 * sigma;
    let mut pairs: Vec<(f64, f64)> = x.iter().zip(&w).map(|(&xi, &wi)| (xi * scale, wi / total)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    QuadratureGrid { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() }
}

/// Nodes and weights for `∫ e^{-x²} f(x) dx` by Newton iteration on the
/// orthonormal Hermite recurrence.
fn hermite_physicists(n: usize) -> (Vec<f64>, Vec<f64>) {
    let pim4 = PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Trapezoid weights on an increasing, possibly non-uniform grid.
pub fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let h = x[i + 1] - x[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    w
}

/// Composite Simpson weights on an increasing, non-uniform grid. An odd
/// number of intervals is closed with the three-point end correction.
pub fn simpson_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 3 {
        return trapezoid_weights(x);
    }
    let intervals = n - 1;
    let h: Vec<f64> = x.windows(2).map(|p| p[1] - p[0]).collect();
    let mut w = vec![0.0; n];
    let mut i = 1;
    while i < intervals {
        let (h0, h1) = (h[i - 1], h[i]);
        let hph = h0 + h1;
        w[i - 1] += hph / 6.0 * (2.0 - h1 / h0);
        w[i] += hph / 6.0 * hph * hph / (h0 * h1);
        w[i + 1] += hph / 6.0 * (2.0 - h0 / h1);
        i += 2;
    }
    if intervals % 2 == 1 {
        let (h0, h1) = (h[intervals - 2], h[intervals - 1]);
        w[intervals] += (2.0 * h1 * h1 + 3.0 * h0 * h1) / (6.0 * (h0 + h1));
        w[intervals - 1] += (h1 * h1 + 3.0 * h1 * h0) / (6.0 * h0);
        w[intervals - 2] -= h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
    }
    w
}

pub fn integrate(weights: &[f64], values: &[f64]) -> f64 {
    weights.iter().zip(values).map(|(w, v)| w * v).sum()
}
