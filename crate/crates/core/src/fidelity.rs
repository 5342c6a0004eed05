//! Pointwise and sphere-averaged fidelity of a channel against the target
//! shift map, by closed form, quadrature, Monte Carlo and the linear kernel.

use nalgebra::Matrix4;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::channel::{
    averaged_mp_choi, choi_to_kraus, kraus_to_choi, ChoiMatrix, KrausChannel, PreparationRule,
};
use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, sphere_grid, QuadratureSpec};
use crate::qubit::{
    c, fidelity_state_density, sample_uniform_angles, state_from_angles, target_state,
    BlochAngles, DensityMatrix, ShiftTask, C64,
};

/// How a fidelity value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Closed,
    Quadrature,
    MonteCarlo,
    Kernel,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Closed => "closed",
            Method::Quadrature => "quadrature",
            Method::MonteCarlo => "mc",
            Method::Kernel => "kernel",
        }
    }
}

/// A fidelity value with its method tag and, for Monte Carlo, its precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityEstimate {
    pub value: f64,
    pub method: Method,
    pub n_samples: u64,
    pub stderr: f64,
}

impl FidelityEstimate {
    pub fn deterministic(value: f64, method: Method) -> Result<Self> {
        Self::new(value, method, 0, 0.0)
    }

    pub fn new(value: f64, method: Method, n_samples: u64, stderr: f64) -> Result<Self> {
        if !(0.0..=1.0 + 1e-9).contains(&value) {
            return Err(Error::invariant(format!(
                "FidelityEstimate range: value = {value} not in [0, 1]"
            )));
        }
        if stderr < 0.0 {
            return Err(Error::invariant("FidelityEstimate: stderr < 0"));
        }
        Ok(Self { value, method, n_samples, stderr })
    }
}

/// The paper's named schemes plus the derived optimal curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchemeId {
    Identity,
    UNot,
    Mp1,
    Mp2,
    Mp3,
    Eta(f64),
    OptimalPiecewise,
}

impl SchemeId {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(SchemeId::Identity),
            "unot" => Ok(SchemeId::UNot),
            "mp1" => Ok(SchemeId::Mp1),
            "mp2" => Ok(SchemeId::Mp2),
            "mp3" => Ok(SchemeId::Mp3),
            "optimal" => Ok(SchemeId::OptimalPiecewise),
            _ => {
                if let Some(v) = s.strip_prefix("eta:") {
                    let eta: f64 = v
                        .parse()
                        .map_err(|_| Error::out_of_range(format!("bad eta value '{v}'")))?;
                    if !(-1.0..=1.0).contains(&eta) {
                        return Err(Error::out_of_range(format!("eta = {eta} not in [-1, 1]")));
                    }
                    Ok(SchemeId::Eta(eta))
                } else {
                    Err(Error::out_of_range(format!("unknown scheme '{s}'")))
                }
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            SchemeId::Identity => "identity".into(),
            SchemeId::UNot => "unot".into(),
            SchemeId::Mp1 => "mp1".into(),
            SchemeId::Mp2 => "mp2".into(),
            SchemeId::Mp3 => "mp3".into(),
            SchemeId::Eta(e) => format!("eta:{e}"),
            SchemeId::OptimalPiecewise => "optimal".into(),
        }
    }

    /// Build the channel realizing this scheme at shift k. OptimalPiecewise
    /// picks the regime-optimal channel (identity or U-NOT).
    pub fn channel(&self, k: f64, quad: &QuadratureSpec) -> Result<KrausChannel> {
        match self {
            SchemeId::Identity => Ok(KrausChannel::identity()),
            SchemeId::UNot => Ok(KrausChannel::unot()),
            SchemeId::Mp1 => choi_to_kraus(&averaged_mp_choi(PreparationRule::ShiftByK, k, quad)?),
            SchemeId::Mp2 => choi_to_kraus(&averaged_mp_choi(PreparationRule::Orthogonal, k, quad)?),
            SchemeId::Mp3 => choi_to_kraus(&averaged_mp_choi(PreparationRule::Same, k, quad)?),
            SchemeId::Eta(eta) => {
                crate::channel::ancilla_to_channel(&crate::channel::eta_model(*eta)?)
            }
            SchemeId::OptimalPiecewise => {
                if k <= PI / 2.0 {
                    Ok(KrausChannel::identity())
                } else {
                    Ok(KrausChannel::unot())
                }
            }
        }
    }
}

/// ⟨ψ′| E(|ψ⟩⟨ψ|) |ψ′⟩ at a single input, general (k, l) target.
pub fn pointwise_fidelity_task(ch: &KrausChannel, angles: BlochAngles, task: ShiftTask) -> f64 {
    let psi = state_from_angles(angles);
    let out = ch.apply(&DensityMatrix::pure(&psi));
    fidelity_state_density(&target_state(angles, task), &out)
}

/// Pointwise fidelity against the θ-shift target (l = 0).
pub fn pointwise_fidelity(ch: &KrausChannel, angles: BlochAngles, k: f64) -> f64 {
    pointwise_fidelity_task(ch, angles, ShiftTask { k, l: 0.0 })
}

/// Deterministic sphere average (1/4π) ∫ ⟨ψ′|E(ρ)|ψ′⟩ sin θ dθ dφ.
pub fn average_fidelity_quadrature_task(
    ch: &KrausChannel,
    task: ShiftTask,
    quad: &QuadratureSpec,
) -> Result<FidelityEstimate> {
    let mut acc = 0.0;
    for (theta, phi, w) in sphere_grid(quad) {
        acc += w * pointwise_fidelity_task(ch, BlochAngles::new(theta, phi), task);
    }
    FidelityEstimate::deterministic(acc, Method::Quadrature)
}

pub fn average_fidelity_quadrature(
    ch: &KrausChannel,
    k: f64,
    quad: &QuadratureSpec,
) -> Result<FidelityEstimate> {
    average_fidelity_quadrature_task(ch, ShiftTask { k, l: 0.0 }, quad)
}

/// Seeded Monte Carlo estimate over uniform Bloch-sphere inputs.
pub fn average_fidelity_monte_carlo_task(
    ch: &KrausChannel,
    task: ShiftTask,
    n: u64,
    seed: u64,
) -> Result<FidelityEstimate> {
    if n < 100 {
        return Err(Error::out_of_range(format!("n = {n} samples, need >= 100")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Kahan-compensated sums; the plain running sum drifts ~1e-12 at n = 1e6
    let mut sum = 0.0;
    let mut sum_c = 0.0;
    let mut sum_sq = 0.0;
    let mut sum_sq_c = 0.0;
    for _ in 0..n {
        let f = pointwise_fidelity_task(ch, sample_uniform_angles(&mut rng), task);
        let y = f - sum_c;
        let t = sum + y;
        sum_c = (t - sum) - y;
        sum = t;
        let y = f * f - sum_sq_c;
        let t = sum_sq + y;
        sum_sq_c = (t - sum_sq) - y;
        sum_sq = t;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
    FidelityEstimate::new(mean.clamp(0.0, 1.0), Method::MonteCarlo, n, (var / nf).sqrt())
}

pub fn average_fidelity_monte_carlo(
    ch: &KrausChannel,
    k: f64,
    n: u64,
    seed: u64,
) -> Result<FidelityEstimate> {
    average_fidelity_monte_carlo_task(ch, ShiftTask { k, l: 0.0 }, n, seed)
}

/// Closed-form average fidelity of the named schemes; MP1 has none.
pub fn closed_form_fidelity(scheme: SchemeId, k: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&k) {
        return Err(Error::out_of_range(format!("k = {k} not in [0, pi]")));
    }
    let half = k / 2.0;
    match scheme {
        SchemeId::Identity => Ok(half.cos().powi(2)),
        SchemeId::UNot => Ok(half.cos().powi(2) / 3.0 + 2.0 * half.sin().powi(2) / 3.0),
        SchemeId::Mp1 => Err(Error::NoClosedForm),
        SchemeId::Mp2 => Ok((6.0 + (PI - k).cos() + (PI + k).cos()) / 12.0),
        SchemeId::Mp3 => Ok(0.5 + k.cos() / 6.0),
        SchemeId::Eta(eta) => Ok(k.cos() / (2.0 - eta) + half.sin().powi(2)),
        SchemeId::OptimalPiecewise => {
            if k <= PI / 2.0 {
                Ok(half.cos().powi(2))
            } else {
                Ok(half.cos().powi(2) / 3.0 + 2.0 * half.sin().powi(2) / 3.0)
            }
        }
    }
}

/// The 4×4 kernel M such that F_avg(E) = Tr(Choi(E) · M): the sphere average
/// of ρ_inᵀ ⊗ |ψ′⟩⟨ψ′| on the same quadrature grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityKernel {
    pub k: f64,
    pub l: f64,
    m: Matrix4<C64>,
}

impl FidelityKernel {
    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.m
    }
}

pub fn fidelity_kernel_task(task: ShiftTask, quad: &QuadratureSpec) -> FidelityKernel {
    let mut m = Matrix4::zeros();
    for (theta, phi, w) in sphere_grid(quad) {
        let angles = BlochAngles::new(theta, phi);
        let rho_in = state_from_angles(angles).projector();
        let proj_out = target_state(angles, task).projector();
        // (rho^T)_{ij} = rho_{ji}; kernel index 2*i_in + a_out
        for i in 0..2 {
            for j in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        m[(2 * i + a, 2 * j + b)] +=
                            rho_in[(j, i)] * proj_out[(a, b)] * c(w, 0.0);
                    }
                }
            }
        }
    }
    FidelityKernel { k: task.k, l: task.l, m }
}

pub fn fidelity_kernel(k: f64, quad: &QuadratureSpec) -> FidelityKernel {
    fidelity_kernel_task(ShiftTask { k, l: 0.0 }, quad)
}

/// Tr(C · M), real part.
pub fn kernel_fidelity(choi: &ChoiMatrix, kernel: &FidelityKernel) -> f64 {
    (choi.matrix() * kernel.matrix()).trace().re
}

pub fn average_fidelity_kernel(
    ch: &KrausChannel,
    kernel: &FidelityKernel,
) -> Result<FidelityEstimate> {
    let v = kernel_fidelity(&kraus_to_choi(ch), kernel);
    FidelityEstimate::deterministic(v.clamp(0.0, 1.0 + 1e-9), Method::Kernel)
}

/// Max − min and mean of the pointwise fidelity over an interior (θ, φ) grid.
/// A channel counts as universal at shift k when the spread is below 1e−9.
pub fn universality_spread(
    ch: &KrausChannel,
    k: f64,
    grid_theta: usize,
    grid_phi: usize,
) -> Result<(f64, f64)> {
    if grid_theta < 16 || grid_phi < 32 {
        return Err(Error::out_of_range(
            "universality grid must be at least 16 x 32",
        ));
    }
    let (nodes, _) = gauss_legendre(grid_theta);
    let task = ShiftTask { k, l: 0.0 };
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    let mut count = 0usize;
    for t in &nodes {
        let theta = t.acos();
        for j in 0..grid_phi {
            let phi = std::f64::consts::TAU * j as f64 / grid_phi as f64;
            let f = pointwise_fidelity_task(ch, BlochAngles::new(theta, phi), task);
            min = min.min(f);
            max = max.max(f);
            sum += f;
            count += 1;
        }
    }
    Ok((max - min, sum / count as f64))
}

/// Default spread threshold for the universality verdict.
pub const UNIVERSALITY_THRESHOLD: f64 = 1e-9;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::eta_model;

    fn k_grid() -> Vec<f64> {
        (0..=8).map(|i| PI * i as f64 / 8.0).collect()
    }

    #[test]
    fn pointwise_examples() {
        let id = KrausChannel::identity();
        let unot = KrausChannel::unot();
        for &(t, p) in &[(0.7, 0.3), (2.1, 4.4)] {
            let a = BlochAngles::new(t, p);
            assert!((pointwise_fidelity(&id, a, 0.0) - 1.0).abs() < 1e-13);
            assert!((pointwise_fidelity(&unot, a, PI) - 2.0 / 3.0).abs() < 1e-13);
            for &k in &[0.4, 1.3, 2.9] {
                assert!(
                    (pointwise_fidelity(&id, a, k) - (k / 2.0).cos().powi(2)).abs() < 1e-13
                );
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        let f = closed_form_fidelity(SchemeId::Mp2, 3.0 * PI / 4.0).unwrap();
        assert!((f - 0.6178).abs() < 5e-4, "{f}");
        assert!((closed_form_fidelity(SchemeId::Mp3, 0.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((closed_form_fidelity(SchemeId::OptimalPiecewise, PI).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((closed_form_fidelity(SchemeId::OptimalPiecewise, PI / 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((closed_form_fidelity(SchemeId::Identity, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(closed_form_fidelity(SchemeId::Mp1, 1.0), Err(Error::NoClosedForm)));
    }

    #[test]
    fn closed_form_algebraic_identities() {
        for &k in &k_grid() {
            let mp2 = closed_form_fidelity(SchemeId::Mp2, k).unwrap();
            assert!((mp2 - (0.5 - k.cos() / 6.0)).abs() < 1e-15);
            let unot = closed_form_fidelity(SchemeId::UNot, k).unwrap();
            assert!((unot - (2.0 / 3.0 - (k / 2.0).cos().powi(2) / 3.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn quadrature_identity_channel_is_cos_half_k_squared() {
        let quad = QuadratureSpec::default();
        let id = KrausChannel::identity();
        for &k in &k_grid() {
            let f = average_fidelity_quadrature(&id, k, &quad).unwrap().value;
            assert!((f - (k / 2.0).cos().powi(2)).abs() < 1e-12, "k={k}: {f}");
        }
    }

    #[test]
    fn quadrature_matches_closed_forms() {
        let quad = QuadratureSpec::default();
        for &k in &k_grid() {
            for scheme in [SchemeId::Identity, SchemeId::UNot, SchemeId::Mp2, SchemeId::Mp3] {
                let ch = scheme.channel(k, &quad).unwrap();
                let f = average_fidelity_quadrature(&ch, k, &quad).unwrap().value;
                let want = closed_form_fidelity(scheme, k).unwrap();
                assert!(
                    (f - want).abs() < 1e-9,
                    "{} at k={k}: {f} vs {want}",
                    scheme.label()
                );
            }
        }
    }

    #[test]
    fn quadrature_is_converged_at_defaults() {
        let quad = QuadratureSpec::default();
        let fine = QuadratureSpec::new(64, 128).unwrap();
        let ch = SchemeId::Mp1.channel(2.0, &quad).unwrap();
        let a = average_fidelity_quadrature(&ch, 2.0, &quad).unwrap().value;
        let b = average_fidelity_quadrature(&ch, 2.0, &fine).unwrap().value;
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn mp1_paper_value() {
        let quad = QuadratureSpec::default();
        let k = 3.0 * PI / 4.0;
        let ch = SchemeId::Mp1.channel(k, &quad).unwrap();
        let f = average_fidelity_quadrature(&ch, k, &quad).unwrap().value;
        assert!((f - 0.5833).abs() < 5e-4, "{f}");
    }

    #[test]
    fn monte_carlo_examples() {
        let id = KrausChannel::identity();
        let est = average_fidelity_monte_carlo(&id, 0.0, 100_000, 1).unwrap();
        assert_eq!(est.value, 1.0);
        assert_eq!(est.stderr, 0.0);

        let unot = KrausChannel::unot();
        let est = average_fidelity_monte_carlo(&unot, PI, 1_000_000, 2).unwrap();
        // constant integrand: stderr collapses to roundoff, allow a floor
        assert!((est.value - 2.0 / 3.0).abs() <= 3.0 * est.stderr + 1e-12);

        let quad = QuadratureSpec::default();
        let mp3 = SchemeId::Mp3.channel(PI / 3.0, &quad).unwrap();
        let est = average_fidelity_monte_carlo(&mp3, PI / 3.0, 1_000_000, 3).unwrap();
        let want = 0.5 + (PI / 3.0).cos() / 6.0;
        assert!((est.value - want).abs() <= 3.0 * est.stderr + 1e-12, "{} vs {want}", est.value);

        assert!(average_fidelity_monte_carlo(&id, 0.0, 50, 1).is_err());
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let unot = KrausChannel::unot();
        let a = average_fidelity_monte_carlo(&unot, 1.0, 10_000, 99).unwrap();
        let b = average_fidelity_monte_carlo(&unot, 1.0, 10_000, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn kernel_trace_and_examples() {
        let quad = QuadratureSpec::default();
        for &k in &k_grid() {
            let m = fidelity_kernel(k, &quad);
            assert!((m.matrix().trace().re - 1.0).abs() < 1e-12);
            assert!(m.matrix().trace().im.abs() < 1e-14);
            // hermitian and PSD
            assert!((m.matrix() - m.matrix().adjoint()).norm() < 1e-12);
            let min_eig = nalgebra::SymmetricEigen::new(*m.matrix())
                .eigenvalues
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            assert!(min_eig > -1e-12, "min eig {min_eig} at k={k}");
        }
        let m0 = fidelity_kernel(0.0, &quad);
        let f = kernel_fidelity(&kraus_to_choi(&KrausChannel::identity()), &m0);
        assert!((f - 1.0).abs() < 1e-12);

        let mpi = fidelity_kernel(PI, &quad);
        let f = kernel_fidelity(&kraus_to_choi(&KrausChannel::unot()), &mpi);
        assert!((f - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn kernel_agrees_with_quadrature() {
        let quad = QuadratureSpec::default();
        let channels = [
            KrausChannel::identity(),
            KrausChannel::unot(),
            KrausChannel::amplitude_damping(0.3).unwrap(),
            SchemeId::Mp1.channel(1.1, &quad).unwrap(),
        ];
        for &k in &[0.0, 0.9, PI / 2.0, 2.5, PI] {
            let m = fidelity_kernel(k, &quad);
            for ch in &channels {
                let f_k = kernel_fidelity(&kraus_to_choi(ch), &m);
                let f_q = average_fidelity_quadrature(ch, k, &quad).unwrap().value;
                assert!((f_k - f_q).abs() < 1e-10, "k={k}: {f_k} vs {f_q}");
            }
        }
    }

    #[test]
    fn universality_examples() {
        let (spread, _) = universality_spread(&KrausChannel::identity(), 1.0, 16, 32).unwrap();
        assert!(spread < 1e-12);
        let (spread, mean) = universality_spread(&KrausChannel::unot(), PI, 16, 32).unwrap();
        assert!(spread < 1e-12);
        assert!((mean - 2.0 / 3.0).abs() < 1e-12);
        let ad = KrausChannel::amplitude_damping(0.3).unwrap();
        let (spread, _) = universality_spread(&ad, PI, 16, 32).unwrap();
        assert!(spread > 0.01, "{spread}");

        assert!(universality_spread(&ad, PI, 8, 32).is_err());
    }

    #[test]
    fn eta_monotonicity_in_eta() {
        for &k in &k_grid() {
            let f = |eta: f64| closed_form_fidelity(SchemeId::Eta(eta), k).unwrap();
            let vals: Vec<f64> = (0..=20).map(|i| f(-1.0 + i as f64 / 10.0)).collect();
            for w in vals.windows(2) {
                if k < PI / 2.0 {
                    assert!(w[1] >= w[0] - 1e-12);
                } else if k > PI / 2.0 {
                    assert!(w[1] <= w[0] + 1e-12);
                } else {
                    assert!((w[1] - 0.5).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn universal_channel_average_equals_pointwise() {
        let quad = QuadratureSpec::default();
        for eta in [-1.0, -0.4, 0.5, 1.0] {
            let ch = SchemeId::Eta(eta).channel(0.0, &quad).unwrap();
            for &k in &[0.3, 1.8] {
                let avg = average_fidelity_quadrature(&ch, k, &quad).unwrap().value;
                let pt = pointwise_fidelity(&ch, BlochAngles::new(1.234, 2.345), k);
                assert!((avg - pt).abs() < 1e-10);
            }
        }
        // the eta construction matches its closed form end to end
        let ch = crate::channel::ancilla_to_channel(&eta_model(0.3).unwrap()).unwrap();
        let f = average_fidelity_quadrature(&ch, 1.0, &quad).unwrap().value;
        assert!((f - closed_form_fidelity(SchemeId::Eta(0.3), 1.0).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn figure_one_ordering() {
        let quad = QuadratureSpec::default();
        for i in 0..=16 {
            let k = PI * i as f64 / 16.0;
            let opt = closed_form_fidelity(SchemeId::OptimalPiecewise, k).unwrap();
            let mp2 = closed_form_fidelity(SchemeId::Mp2, k).unwrap();
            let mp3 = closed_form_fidelity(SchemeId::Mp3, k).unwrap();
            let ch = SchemeId::Mp1.channel(k, &quad).unwrap();
            let mp1 = average_fidelity_quadrature(&ch, k, &quad).unwrap().value;
            assert!(opt >= mp1.max(mp2).max(mp3) - 1e-9, "k={k}");
            if k >= PI / 2.0 {
                assert!((opt - mp2).abs() < 1e-9, "k={k}: {opt} vs {mp2}");
            }
            if k > 1e-9 && k < PI / 2.0 - 1e-9 {
                assert!(opt > mp3 + 1e-9, "k={k}");
            }
        }
    }
}
