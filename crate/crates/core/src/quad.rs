//! Gauss–Legendre nodes and the quadrature grid used for sphere averages.

use crate::error::{Error, Result};

/// Quadrature orders for the Bloch-sphere average: Gauss–Legendre in cos θ,
/// equispaced trapezoid in φ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { n_theta: 32, n_phi: 64 }
    }
}

impl QuadratureSpec {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < 2 || n_phi < 2 {
            return Err(Error::out_of_range(format!(
                "quadrature orders ({n_theta}, {n_phi}) must both be >= 2"
            )));
        }
        Ok(Self { n_theta, n_phi })
    }
}

/// Gauss–Legendre nodes and weights on [−1, 1], by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_deriv(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=n {
        let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Weighted (θ, φ) grid such that Σ w f(θ, φ) = (1/4π) ∫ f sin θ dθ dφ.
pub fn sphere_grid(quad: &QuadratureSpec) -> Vec<(f64, f64, f64)> {
    let (nodes, weights) = gauss_legendre(quad.n_theta);
    let mut out = Vec::with_capacity(quad.n_theta * quad.n_phi);
    for (t, wt) in nodes.iter().zip(&weights) {
        let theta = t.acos();
        for j in 0..quad.n_phi {
            let phi = std::f64::consts::TAU * j as f64 / quad.n_phi as f64;
            out.push((theta, phi, wt / 2.0 / quad.n_phi as f64));
        }
    }
    out
}
