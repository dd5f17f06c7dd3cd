//! Nonlinear interaction of elastic P and S waves in the generalized
//! five-constants (Landau) model.
//!
//! The toolkit computes the kinematics and principal-symbol amplitudes of
//! two-wave interactions, verifies them against a desk-scale pseudospectral
//! simulation of the full quasilinear system, and recovers the elastic
//! parameters (λ, μ, A, B) from interaction measurements.
//!
//! Modules follow the pipeline:
//!
//! * [`medium`] — the five-parameter material model and parameter fields,
//! * [`kinematics`] — characteristic varieties, boundary classification and
//!   bicharacteristic ray tracing,
//! * [`resonance`] — outgoing covectors ζ = ζ¹ + bζ² generated by the
//!   quadratic nonlinearity, and the interaction-plane frame,
//! * [`symbols`] — the quadratic-source principal symbol, evaluated both as a
//!   tensor contraction and through closed-form angle formulas,
//! * [`simulator`] — periodic-domain pseudospectral solver used to observe the
//!   predicted interactions,
//! * [`inversion`] — recovery of λ, μ from travel times and A, B from symbol
//!   measurements.
//!
//! Sign convention used throughout: a forward-in-time wave has τ < 0 with ξ
//! pointing along the propagation direction, so the group velocity is
//! −c²ξ/τ ∥ +ξ.

pub mod error;
pub mod inversion;
pub mod kinematics;
pub mod medium;
pub mod resonance;
pub mod simulator;
pub mod symbols;

pub use error::{Error, Result};
pub use medium::{MaterialPoint, MediumField};

/// Format a float with 17 significant digits, the fixed formatting used by
/// every CSV emitter so that identical runs produce byte-identical files.
pub fn fmt_g17(v: f64) -> String {
    format!("{v:.16e}")
}
