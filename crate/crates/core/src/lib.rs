//! Spectral detectability analysis and reduced-order observer design for
//! linear time-varying and nonlinear systems.
//!
//! The library evolves a continuous QR decomposition along a trajectory (full
//! or reduced to the leading `k` directions), estimates Lyapunov exponents and
//! Bohl (exponential dichotomy) spectral intervals from the triangularized
//! diagonal, and builds observers whose Riccati gain acts only on the
//! unstable/neutral subspace:
//!
//! - [`ode`] — fixed-step RK4 integration, modified Gram-Schmidt, and an
//!   orthogonality-preserving projected integrator for matrix flows.
//! - [`spectral`] — the reduced QR flow, diagonal records, Lyapunov and Bohl
//!   exponent estimators, and the unstable-direction count `j*`.
//! - [`observer`] — the reduced differential Riccati equation, the extended
//!   subspace observer (ESO), and the full-order extended Kalman-Bucy filter
//!   (EKBF) baseline.
//! - [`models`] — bundled benchmark systems (Lorenz'96 with analytic
//!   Jacobian, LTI/LTV test systems, the scalar `1/(1+t)` counterexample).
//! - [`rng`] — a pinned, seedable SplitMix64 generator so that every
//!   randomized experiment replays bit-identically.
//!
//! The crate is `no_std`-compatible (requires `alloc`); disable the default
//! `std` feature for embedded use. All operations are pure functions of their
//! inputs and safe to run concurrently from independent threads.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod error;
pub(crate) mod math;

pub mod models;
pub mod observer;
pub mod ode;
pub mod rng;
pub mod spectral;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
