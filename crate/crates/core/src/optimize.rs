//! Optimality verification: constraint residuals of the ancilla family,
//! η-extremization, an independent optimizer over the Choi cone, z-twirling
//! and the two-regime classifier.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use std::f64::consts::PI;

use crate::channel::{
    choi_to_kraus, compose, kraus_to_choi, partial_trace_output, vec_inner, vec_norm_sqr,
    AncillaModel, ChoiMatrix, KrausChannel,
};
use crate::error::{Error, Result};
use crate::fidelity::{average_fidelity_quadrature, FidelityKernel};
use crate::channel::{ancilla_to_channel, eta_model};
use crate::quad::QuadratureSpec;
use crate::qubit::{c, C64};

/// Numerical residuals of every universality condition for an ancilla model.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintReport {
    /// |⟨A|Ã⟩|, |⟨A|B⟩|, |⟨B̃|Ã⟩|, |⟨Ã|B⟩|, |⟨B̃|A⟩| — must vanish for
    /// φ-independence.
    pub phi_residuals: [f64; 5],
    /// Signed left-hand sides of the four θ-independence conditions.
    pub theta_residuals: [f64; 4],
    /// Normalization (×2) and orthogonality residuals of the isometry.
    pub isometry_residuals: [f64; 3],
    /// Derived identities: ||A|² − |Ã|²| and ||B|² − |B̃|²|.
    pub norm_identity_residuals: [f64; 2],
    /// Re⟨B|B̃⟩ / |B̃|², when |B̃|² > 1e−12.
    pub eta: Option<f64>,
    /// ||B̃|² − 1/(2−η)|, when η is defined.
    pub btilde_eta_residual: Option<f64>,
}

impl ConstraintReport {
    pub fn max_phi_residual(&self) -> f64 {
        self.phi_residuals.iter().cloned().fold(0.0, f64::max)
    }

    pub fn max_theta_residual(&self) -> f64 {
        self.theta_residuals.iter().map(|r| r.abs()).fold(0.0, f64::max)
    }
}

/// Evaluate every universality condition on a model at shift k.
pub fn constraint_residuals(model: &AncillaModel, k: f64) -> ConstraintReport {
    let a2 = vec_norm_sqr(&model.a);
    let at2 = vec_norm_sqr(&model.atilde);
    let b2 = vec_norm_sqr(&model.b);
    let bt2 = vec_norm_sqr(&model.btilde);
    let b_bt: C64 = vec_inner(&model.btilde, &model.b); // <Btilde|B>
    let re2 = 2.0 * b_bt.re; // <Btilde|B> + <B|Btilde>

    let phi_residuals = [
        vec_inner(&model.a, &model.atilde).norm(),
        vec_inner(&model.a, &model.b).norm(),
        vec_inner(&model.btilde, &model.atilde).norm(),
        vec_inner(&model.atilde, &model.b).norm(),
        vec_inner(&model.btilde, &model.a).norm(),
    ];

    let cs = (k / 2.0).cos().powi(2);
    let sn = (k / 2.0).sin().powi(2);
    let theta_residuals = [
        2.0 * at2 - 2.0 * bt2 + re2,
        2.0 * b2 - 2.0 * a2 - re2,
        a2 + at2 - b2 - bt2 + re2,
        (cs - 2.0 * sn) * at2 + (sn - 2.0 * cs) * bt2 + sn * b2 + cs * a2 + (cs - sn) * re2,
    ];

    let (n0, n1, orth) = model.isometry_residuals();

    let eta = if bt2 > 1e-12 { Some(b_bt.re / bt2) } else { None };
    let btilde_eta_residual = eta.map(|e| (bt2 - 1.0 / (2.0 - e)).abs());

    ConstraintReport {
        phi_residuals,
        theta_residuals,
        isometry_residuals: [n0, n1, orth],
        norm_identity_residuals: [(a2 - at2).abs(), (b2 - bt2).abs()],
        eta,
        btilde_eta_residual,
    }
}

/// Optimal η and fidelity at shift k: identity branch below π/2, U-NOT above.
pub fn eta_optimal(k: f64) -> Result<(f64, f64)> {
    if !(0.0..=PI).contains(&k) {
        return Err(Error::out_of_range(format!("k = {k} not in [0, pi]")));
    }
    let half = k / 2.0;
    if k < PI / 2.0 {
        Ok((1.0, half.cos().powi(2)))
    } else if k > PI / 2.0 {
        Ok((-1.0, half.cos().powi(2) / 3.0 + 2.0 * half.sin().powi(2) / 3.0))
    } else {
        // every eta achieves 1/2 here; identity branch by convention
        Ok((1.0, 0.5))
    }
}

/// End-to-end (η, F) pairs: build the model, the channel, then the
/// quadrature average, over an η grid on [−1, 1].
pub fn eta_scan(k: f64, n_eta: usize, quad: &QuadratureSpec) -> Result<Vec<(f64, f64)>> {
    if n_eta < 3 {
        return Err(Error::out_of_range(format!("n_eta = {n_eta}, need >= 3")));
    }
    let mut out = Vec::with_capacity(n_eta);
    for i in 0..n_eta {
        let eta = -1.0 + 2.0 * i as f64 / (n_eta - 1) as f64;
        let ch = ancilla_to_channel(&eta_model(eta)?)?;
        let f = average_fidelity_quadrature(&ch, k, quad)?.value;
        out.push((eta, f));
    }
    Ok(out)
}

/// Outcome of the Choi-cone maximization.
#[derive(Debug, Clone)]
pub struct SdpResult {
    pub choi: ChoiMatrix,
    pub value: f64,
    pub tp_residual: f64,
    pub min_eigenvalue: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub const SDP_DEFAULT_TOL: f64 = 1e-10;
pub const SDP_DEFAULT_MAX_ITER: usize = 50_000;

fn project_psd(m: &Matrix4<C64>) -> Matrix4<C64> {
    let eig = SymmetricEigen::new(*m);
    let mut out = Matrix4::zeros();
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > 0.0 {
            let v = eig.eigenvectors.column(i);
            out += v * v.adjoint() * c(lambda, 0.0);
        }
    }
    out
}

fn project_tp(m: &Matrix4<C64>) -> Matrix4<C64> {
    let delta = (Matrix2::identity() - partial_trace_output(m)) * c(0.5, 0.0);
    let mut out = *m;
    for i in 0..2 {
        for j in 0..2 {
            for a in 0..2 {
                out[(2 * i + a, 2 * j + a)] += delta[(i, j)];
            }
        }
    }
    out
}

fn feasibility(m: &Matrix4<C64>) -> (f64, f64) {
    let tp = (partial_trace_output(m) - Matrix2::identity()).norm();
    let min_eig = SymmetricEigen::new(*m)
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    (tp, min_eig)
}

/// Maximize Tr(C · M) over CPTP Choi matrices by projected gradient ascent:
/// a gradient step along M, then alternating projections onto the PSD cone
/// and the trace-preserving affine subspace. Returns the best feasible
/// iterate found.
pub fn sdp_optimize(kernel: &FidelityKernel, tol: f64, max_iter: usize) -> SdpResult {
    let m = kernel.matrix();
    let spectral = SymmetricEigen::new(*m)
        .eigenvalues
        .iter()
        .map(|e| e.abs())
        .fold(0.0, f64::max)
        .max(1e-12);
    let step = c(1.0 / spectral, 0.0);

    // maximally mixed Choi (depolarizing channel) is strictly feasible
    let mut x: Matrix4<C64> = Matrix4::identity() * c(0.5, 0.0);
    let objective = |x: &Matrix4<C64>| (x * m).trace().re;

    let mut best = x;
    let mut best_val = objective(&x);
    let mut prev_val = best_val;
    let mut converged = false;
    let mut iters = 0usize;

    for it in 0..max_iter {
        iters = it + 1;
        x += m * step;
        // alternating projections back to the feasible set
        for _ in 0..100 {
            x = project_tp(&project_psd(&x));
            x = (x + x.adjoint()) * c(0.5, 0.0);
            let (tp, min_eig) = feasibility(&x);
            if tp < 1e-12 && min_eig > -1e-12 {
                break;
            }
        }
        let val = objective(&x);
        let (tp, min_eig) = feasibility(&x);
        if tp < 1e-8 && min_eig > -1e-8 && val > best_val {
            best = x;
            best_val = val;
        }
        if (val - prev_val).abs() < tol && tp < 1e-8 && min_eig > -1e-8 {
            converged = true;
            break;
        }
        prev_val = val;
    }

    let (tp, min_eig) = feasibility(&best);
    SdpResult {
        choi: ChoiMatrix::from_matrix_unchecked(best),
        value: best_val,
        tp_residual: tp,
        min_eigenvalue: min_eig,
        iterations: iters,
        converged: converged && tp < 1e-8 && min_eig > -1e-8,
    }
}

/// Average the channel over paired z-rotations Rz(−α) ∘ E ∘ Rz(α) for
/// n_phases equispaced α, via the Choi representation.
pub fn z_twirl(ch: &KrausChannel, n_phases: usize) -> Result<KrausChannel> {
    if n_phases < 4 {
        return Err(Error::out_of_range(format!(
            "n_phases = {n_phases}, need >= 4"
        )));
    }
    let mut acc = Matrix4::zeros();
    for j in 0..n_phases {
        let alpha = std::f64::consts::TAU * j as f64 / n_phases as f64;
        let rotated = compose(
            &compose(&KrausChannel::z_rotation(alpha), ch),
            &KrausChannel::z_rotation(-alpha),
        );
        acc += kraus_to_choi(&rotated).matrix() * c(1.0 / n_phases as f64, 0.0);
    }
    choi_to_kraus(&ChoiMatrix::from_matrix_unchecked(acc))
}

/// Which of the paper's two optimal classes a shift falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// 0 ≤ k ≤ π/2: the identity map is optimal (boundary tie included).
    IdentityRegime,
    /// π/2 < k ≤ π: the U-NOT channel is optimal.
    UNotRegime,
}

pub fn classify_regime(k: f64) -> Result<Regime> {
    if !(0.0..=PI).contains(&k) {
        return Err(Error::out_of_range(format!("k = {k} not in [0, pi]")));
    }
    if k <= PI / 2.0 {
        Ok(Regime::IdentityRegime)
    } else {
        Ok(Regime::UNotRegime)
    }
}
