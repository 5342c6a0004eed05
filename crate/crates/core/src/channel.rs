//! Qubit channels: Kraus and Choi representations, built-in channels,
//! measure-and-prepare schemes, and the ancilla-isometry family.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::{sphere_grid, QuadratureSpec};
use crate::qubit::{c, state_from_angles, BlochAngles, DensityMatrix, PureQubit, C64};

/// Trace-preservation residual tolerance for channel constructors.
pub const TOL_CHANNEL: f64 = 1e-10;

/// CPTP qubit map as a non-empty set of 2×2 Kraus operators.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    ops: Vec<Matrix2<C64>>,
}

impl KrausChannel {
    pub fn new(ops: Vec<Matrix2<C64>>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::invariant("KrausChannel: empty operator set"));
        }
        let mut sum = Matrix2::zeros();
        for k in &ops {
            sum += k.adjoint() * k;
        }
        let resid = (sum - Matrix2::identity()).norm();
        if resid > TOL_CHANNEL {
            return Err(Error::invariant(format!(
                "KrausChannel trace preservation: ||sum K^dag K - I|| = {resid:.3e}"
            )));
        }
        Ok(Self { ops })
    }

    pub fn ops(&self) -> &[Matrix2<C64>] {
        &self.ops
    }

    pub fn identity() -> Self {
        Self { ops: vec![Matrix2::identity()] }
    }

    /// ρ → (2I − ρ)/3, via the Pauli Kraus set {σx, σy, σz}/√3.
    pub fn unot() -> Self {
        let s = c(1.0 / 3f64.sqrt(), 0.0);
        let sx = Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)) * s;
        let sy = Matrix2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)) * s;
        let sz = Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)) * s;
        Self { ops: vec![sx, sy, sz] }
    }

    /// Unitary φ → φ − l, i.e. diag(1, e^{il}).
    pub fn z_rotation(l: f64) -> Self {
        let u = Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, l).exp());
        Self { ops: vec![u] }
    }

    /// Completely depolarizing channel: four Pauli Kraus operators, each ×1/2.
    pub fn depolarizing() -> Self {
        let h = c(0.5, 0.0);
        let i = Matrix2::identity() * h;
        let sx = Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)) * h;
        let sy = Matrix2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)) * h;
        let sz = Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)) * h;
        Self { ops: vec![i, sx, sy, sz] }
    }

    /// Amplitude damping with decay γ; a stock non-universal channel for tests.
    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::out_of_range(format!("gamma = {gamma} not in [0, 1]")));
        }
        let k0 = Matrix2::new(
            c(1.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c((1.0 - gamma).sqrt(), 0.0),
        );
        let k1 = Matrix2::new(c(0.0, 0.0), c(gamma.sqrt(), 0.0), c(0.0, 0.0), c(0.0, 0.0));
        Self::new(vec![k0, k1])
    }

    /// ρ → Σ K ρ K†.
    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        let mut out = Matrix2::zeros();
        for k in &self.ops {
            out += k * rho.matrix() * k.adjoint();
        }
        DensityMatrix::from_matrix_unchecked(out)
    }
}

/// Sequential application: `second` after `first`; Kraus set {K2_i K1_j}.
pub fn compose(first: &KrausChannel, second: &KrausChannel) -> KrausChannel {
    let ops = second
        .ops()
        .iter()
        .flat_map(|k2| first.ops().iter().map(move |k1| k2 * k1))
        .collect();
    KrausChannel::new(ops).expect("composition of CPTP maps is CPTP")
}

/// Choi matrix in the input-index-first convention
/// C = Σ_{ij} |i⟩⟨j| ⊗ E(|i⟩⟨j|); row index 2·i_in + a_out.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    c: Matrix4<C64>,
}

impl ChoiMatrix {
    pub fn from_matrix(m: Matrix4<C64>) -> Result<Self> {
        let herm = (m - m.adjoint()).norm();
        if herm > TOL_CHANNEL {
            return Err(Error::invariant(format!(
                "ChoiMatrix hermiticity: ||C - C^dag|| = {herm:.3e}"
            )));
        }
        let eig = SymmetricEigen::new(m);
        let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -TOL_CHANNEL {
            return Err(Error::invariant(format!(
                "ChoiMatrix positivity: min eigenvalue = {min_eig:.3e}"
            )));
        }
        let resid = (partial_trace_output(&m) - Matrix2::identity()).norm();
        if resid > TOL_CHANNEL {
            return Err(Error::invariant(format!(
                "ChoiMatrix trace preservation: ||Tr_out C - I|| = {resid:.3e}"
            )));
        }
        Ok(Self { c: m })
    }

    pub(crate) fn from_matrix_unchecked(m: Matrix4<C64>) -> Self {
        Self { c: (m + m.adjoint()) * c(0.5, 0.0) }
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.c
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.c)
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn tp_residual(&self) -> f64 {
        (partial_trace_output(&self.c) - Matrix2::identity()).norm()
    }
}

/// Tr over the output (second) factor: X_{ij} = Σ_a C_{(i,a),(j,a)}.
pub fn partial_trace_output(m: &Matrix4<C64>) -> Matrix2<C64> {
    let mut out = Matrix2::zeros();
    for i in 0..2 {
        for j in 0..2 {
            out[(i, j)] = m[(2 * i, 2 * j)] + m[(2 * i + 1, 2 * j + 1)];
        }
    }
    out
}

pub fn kraus_to_choi(ch: &KrausChannel) -> ChoiMatrix {
    let mut m = Matrix4::zeros();
    for k in ch.ops() {
        // vec(K)[2i + a] = K[a, i]
        for i in 0..2 {
            for a in 0..2 {
                for j in 0..2 {
                    for b in 0..2 {
                        m[(2 * i + a, 2 * j + b)] += k[(a, i)] * k[(b, j)].conj();
                    }
                }
            }
        }
    }
    ChoiMatrix::from_matrix_unchecked(m)
}

/// Kraus set from the Choi eigendecomposition; eigenvalues below 1e−12 are
/// dropped, eigenvalues below −1e−8 are an error.
pub fn choi_to_kraus(choi: &ChoiMatrix) -> Result<KrausChannel> {
    let eig = SymmetricEigen::new(*choi.matrix());
    let mut ops = Vec::new();
    for (idx, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda < -1e-8 {
            return Err(Error::invariant(format!(
                "ChoiMatrix positivity: eigenvalue {lambda:.3e} < -1e-8"
            )));
        }
        if lambda < 1e-12 {
            continue;
        }
        let v = eig.eigenvectors.column(idx);
        let s = c(lambda.sqrt(), 0.0);
        let k = Matrix2::new(v[0] * s, v[2] * s, v[1] * s, v[3] * s);
        ops.push(k);
    }
    KrausChannel::new(ops)
}

/// Fidelity-relevant distance between two channels: Frobenius distance of
/// their Choi matrices.
pub fn choi_distance(a: &KrausChannel, b: &KrausChannel) -> f64 {
    (kraus_to_choi(a).matrix() - kraus_to_choi(b).matrix()).norm()
}

/// Measurement basis state |φ(u, v)⟩ and its orthogonal complement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementBasis {
    pub u: f64,
    pub v: f64,
}

impl MeasurementBasis {
    pub fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    pub fn state(&self) -> PureQubit {
        state_from_angles(BlochAngles::new(self.u, self.v))
    }

    pub fn orthogonal_state(&self) -> PureQubit {
        // |phi(u - pi, v)>, matching the shifted-angle convention
        state_from_angles(BlochAngles::new(self.u - PI, self.v))
    }
}

/// What to prepare after measuring in the chosen basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreparationRule {
    /// Outcome |φ(u,v)⟩ prepares |φ(u−k,v)⟩, outcome |φ⊥⟩ its complement.
    ShiftByK,
    /// Prepare the outcome state itself (the plain measurement scheme).
    Same,
    /// Prepare the state orthogonal to the outcome.
    Orthogonal,
}

/// The measure-and-prepare map for one fixed basis:
/// ρ → ⟨φ|ρ|φ⟩ P₊ + ⟨φ⊥|ρ|φ⊥⟩ P₋ with rule-designated preparations,
/// as the rank-1 Kraus pair {|p₊⟩⟨φ|, |p₋⟩⟨φ⊥|}.
pub fn measure_prepare_fixed_basis(
    basis: MeasurementBasis,
    rule: PreparationRule,
    k: f64,
) -> KrausChannel {
    let phi = basis.state();
    let phi_perp = basis.orthogonal_state();
    let (prep_plus, prep_minus) = match rule {
        PreparationRule::Same => (phi, phi_perp),
        PreparationRule::Orthogonal => (phi_perp, phi),
        PreparationRule::ShiftByK => {
            let shifted = MeasurementBasis::new(basis.u - k, basis.v);
            (shifted.state(), shifted.orthogonal_state())
        }
    };
    let outer = |prep: &PureQubit, meas: &PureQubit| -> Matrix2<C64> {
        prep.as_vector() * meas.as_vector().adjoint()
    };
    KrausChannel::new(vec![outer(&prep_plus, &phi), outer(&prep_minus, &phi_perp)])
        .expect("rank-1 measure-prepare pair resolves the identity")
}

/// Choi matrix of the basis-averaged measure-and-prepare map,
/// (1/4π) ∫ E_{u,v} sin u du dv.
pub fn averaged_mp_choi(
    rule: PreparationRule,
    k: f64,
    quad: &QuadratureSpec,
) -> Result<ChoiMatrix> {
    if quad.n_theta < 8 || quad.n_phi < 8 {
        return Err(Error::out_of_range(
            "averaged_mp_choi: quadrature orders must be >= 8",
        ));
    }
    let mut m = Matrix4::zeros();
    for (u, v, w) in sphere_grid(quad) {
        let ch = measure_prepare_fixed_basis(MeasurementBasis::new(u, v), rule, k);
        m += kraus_to_choi(&ch).matrix() * c(w, 0.0);
    }
    ChoiMatrix::from_matrix(m)
}

/// The isometry data (A, Ã, B, B̃) of the general one-ancilla scheme:
/// |0⟩ ↦ |1⟩|A⟩ + |0⟩|B⟩, |1⟩ ↦ |0⟩|Ã⟩ + |1⟩|B̃⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct AncillaModel {
    pub d: usize,
    pub a: Vec<C64>,
    pub atilde: Vec<C64>,
    pub b: Vec<C64>,
    pub btilde: Vec<C64>,
}

pub fn vec_inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(xi, yi)| xi.conj() * yi).sum()
}

pub fn vec_norm_sqr(x: &[C64]) -> f64 {
    x.iter().map(|xi| xi.norm_sqr()).sum()
}

impl AncillaModel {
    pub fn new(a: Vec<C64>, atilde: Vec<C64>, b: Vec<C64>, btilde: Vec<C64>) -> Result<Self> {
        let d = a.len();
        if d == 0 || atilde.len() != d || b.len() != d || btilde.len() != d {
            return Err(Error::invariant(
                "AncillaModel: vectors must share a common dimension d >= 1",
            ));
        }
        let model = Self { d, a, atilde, b, btilde };
        let (n0, n1, orth) = model.isometry_residuals();
        if n0 > TOL_CHANNEL {
            return Err(Error::invariant(format!(
                "AncillaModel normalization: ||A|^2 + |B|^2 - 1| = {n0:.3e}"
            )));
        }
        if n1 > TOL_CHANNEL {
            return Err(Error::invariant(format!(
                "AncillaModel normalization: ||Atilde|^2 + |Btilde|^2 - 1| = {n1:.3e}"
            )));
        }
        if orth > TOL_CHANNEL {
            return Err(Error::invariant(format!(
                "AncillaModel orthogonality: |<A|Btilde> + <B|Atilde>| = {orth:.3e}"
            )));
        }
        Ok(model)
    }

    /// (|A|²+|B|²−1, |Ã|²+|B̃|²−1, |⟨A|B̃⟩+⟨B|Ã⟩|) magnitudes.
    pub fn isometry_residuals(&self) -> (f64, f64, f64) {
        let n0 = (vec_norm_sqr(&self.a) + vec_norm_sqr(&self.b) - 1.0).abs();
        let n1 = (vec_norm_sqr(&self.atilde) + vec_norm_sqr(&self.btilde) - 1.0).abs();
        let orth = (vec_inner(&self.a, &self.btilde) + vec_inner(&self.b, &self.atilde)).norm();
        (n0, n1, orth)
    }
}

/// Kraus operators K_m = (I ⊗ ⟨m|) V of the ancilla isometry.
pub fn ancilla_to_channel(model: &AncillaModel) -> Result<KrausChannel> {
    let ops = (0..model.d)
        .map(|m| {
            Matrix2::new(
                model.b[m],
                model.atilde[m],
                model.a[m],
                model.btilde[m],
            )
        })
        .collect();
    KrausChannel::new(ops)
}

/// Explicit d=4 member of the universal family at parameter η = Re⟨B|B̃⟩/|B̃|²:
/// B = b e₁, B̃ = b(η e₁ + √(1−η²) e₂), A = a e₃, Ã = a e₄,
/// with b² = 1/(2−η) and a² = (1−η)/(2−η).
pub fn eta_model(eta: f64) -> Result<AncillaModel> {
    if !(-1.0..=1.0).contains(&eta) {
        return Err(Error::out_of_range(format!("eta = {eta} not in [-1, 1]")));
    }
    let b = (1.0 / (2.0 - eta)).sqrt();
    let a = ((1.0 - eta) / (2.0 - eta)).sqrt();
    let zero = c(0.0, 0.0);
    let bv = vec![c(b, 0.0), zero, zero, zero];
    let btv = vec![c(b * eta, 0.0), c(b * (1.0 - eta * eta).sqrt(), 0.0), zero, zero];
    let av = vec![zero, zero, c(a, 0.0), zero];
    let atv = vec![zero, zero, zero, c(a, 0.0)];
    AncillaModel::new(av, atv, bv, btv)
}
