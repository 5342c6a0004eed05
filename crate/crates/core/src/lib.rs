//! Optimal universal manipulation of a single qubit.
//!
//! Implements the map (θ, φ) → (θ−k, φ−l) as explicit quantum channels:
//! measure-and-prepare schemes, the ancilla-isometry family parameterized by
//! η, and the optimal piecewise curve (identity below k = π/2, U-NOT above).
//! Average fidelities come by closed form, Gauss–Legendre quadrature, Monte
//! Carlo, and a precomputed linear kernel; an independent projected-gradient
//! optimizer over the Choi cone cross-checks the optimum.

pub mod channel;
pub mod error;
pub mod fidelity;
pub mod optimize;
pub mod quad;
pub mod qubit;
pub mod specfile;

pub use error::{Error, Result};
