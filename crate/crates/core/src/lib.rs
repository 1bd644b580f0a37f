//! Time-reversal frameness.
//!
//! Pure-state resource theory for the time-reversal (TR) superselection rule on
//! integer angular-momentum spaces:
//!
//! - [`angular`]: basis kets `|μ ℓ m⟩`, the antiunitary TR operator under the
//!   Landau–Lifshitz or Sakurai phase convention, the self-conjugate basis and
//!   Clebsch–Gordan coupling.
//! - [`trio`]: TR-invariant operations (TRIO). An efficient map is TRIO iff its
//!   Kraus matrix is real in the self-conjugate basis.
//! - [`standardform`]: reduction of any pure state to the one-parameter
//!   standard resource `(e^{iθ/2}|0⟩ + e^{-iθ/2}|1⟩)/√2`, `θ ∈ [0, π/2]`.
//! - [`monotones`]: `τ = 1 - |⟨ψ*|ψ⟩|`, the asymptotic measure
//!   `τ∞ = -log₂ |⟨ψ*|ψ⟩|` and tensor-power behaviour.
//! - [`protocols`]: explicit Kraus instruments for deterministic, ensemble and
//!   maximal-probability conversions, plus asymptotic copy rates.
//!
//! ```
//! use trframe::standardform::{standard_state, standardize, StandardResource};
//! use trframe::monotones::tau;
//!
//! let psi = standard_state(StandardResource::new(std::f64::consts::FRAC_PI_3).unwrap(), 3).unwrap();
//! assert!((tau(&psi).unwrap() - 0.5).abs() < 1e-12);
//! let std = standardize(&psi).unwrap();
//! assert!((std.resource.theta() - std::f64::consts::FRAC_PI_3).abs() < 1e-12);
//! ```

#![forbid(unsafe_code)]

pub mod angular;
mod error;
mod extended;
pub(crate) mod linalg;
pub mod monotones;
pub mod protocols;
pub mod standardform;
pub mod trio;

pub use error::{Error, Result};
pub use extended::ExtReal;
pub use linalg::{CMatrix, CVector, RMatrix, RVector, C64};

/// Tolerance for identities that hold exactly up to rounding.
pub const EXACT_TOL: f64 = 1e-12;

/// Tolerance for user-facing checks (normalization, validation).
pub const CHECK_TOL: f64 = 1e-9;
