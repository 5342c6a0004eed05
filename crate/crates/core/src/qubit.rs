//! Single-qubit pure states, density matrices, the Bloch-angle
//! parameterization, the target shift map and uniform sphere sampling.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// Tolerance for exact algebraic identities.
pub const TOL_EXACT: f64 = 1e-12;
/// Tolerance for composed numerical pipelines.
pub const TOL_PIPELINE: f64 = 1e-9;

pub type C64 = Complex64;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Polar/azimuthal angles (θ, φ) of a pure qubit state.
///
/// Canonical form has 0 ≤ θ ≤ π, 0 ≤ φ < 2π, and φ = 0 at the poles.
/// Raw (non-canonical) angles are accepted everywhere a state is built,
/// since the shift map deliberately produces θ − k < 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochAngles {
    pub theta: f64,
    pub phi: f64,
}

impl BlochAngles {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    /// Fold into the canonical ranges; at the poles φ is set to 0.
    pub fn canonical(self) -> Self {
        let mut theta = self.theta.rem_euclid(TAU);
        let mut phi = self.phi;
        if theta > PI {
            theta = TAU - theta;
            phi += PI;
        }
        let mut phi = phi.rem_euclid(TAU);
        if theta.abs() < TOL_EXACT || (theta - PI).abs() < TOL_EXACT {
            phi = 0.0;
        }
        Self { theta, phi }
    }

    pub fn is_canonical(&self) -> bool {
        (0.0..=PI).contains(&self.theta) && (0.0..TAU).contains(&self.phi)
    }
}

/// The intended transformation (θ, φ) → (θ − k, φ − l).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftTask {
    pub k: f64,
    pub l: f64,
}

impl ShiftTask {
    pub fn new(k: f64, l: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&k) {
            return Err(Error::out_of_range(format!("k = {k} not in [0, pi]")));
        }
        if !(0.0..TAU).contains(&l) {
            return Err(Error::out_of_range(format!("l = {l} not in [0, 2pi)")));
        }
        Ok(Self { k, l })
    }

    pub fn theta_only(k: f64) -> Result<Self> {
        Self::new(k, 0.0)
    }
}

/// Unit-norm complex 2-vector (cos(θ/2), e^{−iφ} sin(θ/2)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureQubit {
    pub a0: C64,
    pub a1: C64,
}

impl PureQubit {
    pub fn new(a0: C64, a1: C64) -> Result<Self> {
        let norm2 = a0.norm_sqr() + a1.norm_sqr();
        if (norm2 - 1.0).abs() > TOL_EXACT {
            return Err(Error::invariant(format!(
                "PureQubit norm: |a0|^2 + |a1|^2 = {norm2}, expected 1"
            )));
        }
        Ok(Self { a0, a1 })
    }

    pub fn ket0() -> Self {
        Self { a0: c(1.0, 0.0), a1: c(0.0, 0.0) }
    }

    pub fn ket1() -> Self {
        Self { a0: c(0.0, 0.0), a1: c(1.0, 0.0) }
    }

    /// The orthogonal state (−a1*, a0*); up to phase this is |ψ(θ−π, φ)⟩.
    pub fn orthogonal(&self) -> Self {
        Self { a0: -self.a1.conj(), a1: self.a0.conj() }
    }

    pub fn as_vector(&self) -> Vector2<C64> {
        Vector2::new(self.a0, self.a1)
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> C64 {
        self.a0.conj() * other.a0 + self.a1.conj() * other.a1
    }

    pub fn projector(&self) -> Matrix2<C64> {
        let v = self.as_vector();
        v * v.adjoint()
    }
}

/// cos(θ/2) |0⟩ + e^{−iφ} sin(θ/2) |1⟩, evaluated on the raw angles.
pub fn state_from_angles(angles: BlochAngles) -> PureQubit {
    let half = angles.theta / 2.0;
    PureQubit {
        a0: c(half.cos(), 0.0),
        a1: c(0.0, -angles.phi).exp() * half.sin(),
    }
}

/// Canonical Bloch angles of a normalized state, stripping global phase.
///
/// Global phase goes by making a0 real non-negative; when |a0| vanishes the
/// phase of a1 is stripped instead. Poles force φ = 0.
pub fn angles_from_state(psi: &PureQubit) -> BlochAngles {
    let r0 = psi.a0.norm();
    let r1 = psi.a1.norm();
    let theta = 2.0 * r1.atan2(r0);
    if r1 < TOL_EXACT || r0 < TOL_EXACT {
        // pole convention
        return BlochAngles::new(if r0 >= r1 { 0.0 } else { PI }, 0.0);
    }
    // a1 / (a0 phase) = e^{-i phi} sin(theta/2)
    let global = psi.a0 / r0;
    let a1 = psi.a1 / global;
    let phi = (-a1.arg()).rem_euclid(TAU);
    BlochAngles::new(theta, phi)
}

/// State of the shifted angles (θ − k, φ − l), fed raw into the formula.
pub fn target_state(angles: BlochAngles, task: ShiftTask) -> PureQubit {
    state_from_angles(BlochAngles::new(angles.theta - task.k, angles.phi - task.l))
}

/// |⟨ψ|χ⟩|².
pub fn fidelity_pure(psi: &PureQubit, chi: &PureQubit) -> f64 {
    psi.inner(chi).norm_sqr()
}

/// 2×2 Hermitian, unit-trace, positive-semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: Matrix2<C64>,
}

impl DensityMatrix {
    pub fn from_matrix(m: Matrix2<C64>) -> Result<Self> {
        let herm = (m - m.adjoint()).norm();
        if herm > TOL_EXACT * 10.0 {
            return Err(Error::invariant(format!(
                "DensityMatrix hermiticity: ||rho - rho^dag|| = {herm:.3e}"
            )));
        }
        let tr = (m[(0, 0)] + m[(1, 1)]).re;
        if (tr - 1.0).abs() > TOL_EXACT * 10.0 {
            return Err(Error::invariant(format!(
                "DensityMatrix trace: tr = {tr}, expected 1"
            )));
        }
        let (lo, _hi) = hermitian2_eigenvalues(&m);
        if lo < -TOL_EXACT * 10.0 {
            return Err(Error::invariant(format!(
                "DensityMatrix positivity: min eigenvalue = {lo:.3e}"
            )));
        }
        Ok(Self { m })
    }

    pub fn pure(psi: &PureQubit) -> Self {
        Self { m: psi.projector() }
    }

    pub fn maximally_mixed() -> Self {
        Self { m: Matrix2::identity() * c(0.5, 0.0) }
    }

    /// Internal constructor for outputs already known valid up to roundoff;
    /// re-hermitizes to kill accumulated asymmetry.
    pub(crate) fn from_matrix_unchecked(m: Matrix2<C64>) -> Self {
        let h = (m + m.adjoint()) * c(0.5, 0.0);
        Self { m: h }
    }

    pub fn matrix(&self) -> &Matrix2<C64> {
        &self.m
    }

    pub fn eigenvalues(&self) -> (f64, f64) {
        hermitian2_eigenvalues(&self.m)
    }
}

/// Eigenvalues (min, max) of a 2×2 Hermitian matrix, in closed form.
fn hermitian2_eigenvalues(m: &Matrix2<C64>) -> (f64, f64) {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b2 = m[(0, 1)].norm_sqr();
    let mean = 0.5 * (a + d);
    let disc = (0.25 * (a - d).powi(2) + b2).sqrt();
    (mean - disc, mean + disc)
}

/// ⟨ψ|ρ|ψ⟩.
pub fn fidelity_state_density(psi: &PureQubit, rho: &DensityMatrix) -> f64 {
    let v = psi.as_vector();
    (v.adjoint() * rho.matrix() * v)[(0, 0)].re
}

/// Uniform Bloch-sphere sample: cos θ uniform on [−1, 1], φ uniform on [0, 2π).
pub fn sample_uniform_angles<R: Rng + ?Sized>(rng: &mut R) -> BlochAngles {
    let cos_theta: f64 = rng.gen_range(-1.0..=1.0);
    let phi: f64 = rng.gen_range(0.0..TAU);
    BlochAngles::new(cos_theta.acos(), phi)
}
