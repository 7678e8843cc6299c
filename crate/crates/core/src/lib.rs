//! Rounding arithmetic on fixed-precision grids.
//!
//! The crate covers three layers:
//!
//! - [`rounding`]: deterministic rounding modes (floor, ceiling and the
//!   round-to-nearest family), classic stochastic rounding, and stochastic
//!   rounding driven by a tabulated probability curve.
//! - [`distopt`]: synthesis of such probability curves by minimizing a
//!   weighted variance/bias objective with particle swarm optimization.
//! - [`experiments`]: Monte-Carlo studies of summation, Newton square root
//!   and inner products under each rounding mode, summarized by [`stats`].
//!
//! All randomness flows through [`rng::RandomStream`], a counter-based
//! generator whose substreams make repeated runs reproducible and
//! parallel-safe.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distopt;
pub mod error;
pub mod experiments;
pub mod rng;
pub mod rounding;
pub mod stats;

pub use error::{Error, Result};
pub use rng::RandomStream;
pub use rounding::{Base, DeterministicMode, ProbabilityTable, RoundingMode, RoundingSpec};
pub use stats::StatsSummary;
