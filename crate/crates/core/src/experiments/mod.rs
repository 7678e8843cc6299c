//! Monte-Carlo studies of rounded summation, Newton square root and inner
//! products, plus the grid validation of the stochastic rounding variance.
//!
//! Stochastic repetitions run on substream `r` of the experiment seed, so
//! they can be evaluated in any order (and in parallel) with identical
//! results. Deterministic modes are evaluated once.

mod inner_product;
mod newton;
mod summation;
mod varbound;

use rayon::prelude::*;
use serde::Serialize;

use crate::rng::RandomStream;
use crate::rounding::RoundingMode;
use crate::stats::StatsSummary;

pub use inner_product::{
    gen_sine_vectors, rounded_inner_product, run_inner_product_experiment, DOT_SIZES,
};
pub use newton::{
    newton_sqrt_rounded, run_sqrt_experiment, NewtonConfig, NewtonOutcome, SQRT_TEST_VALUES,
};
pub use summation::{gen_case_inputs, rounded_sum, run_summation_experiment, CaseId};
pub use varbound::{validate_variance_bound, VarBoundConfig, VarBoundPoint};

pub const DEFAULT_REPETITIONS: usize = 10_000;

/// One row of a results table: a rounding mode's statistics on one input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub mode: String,
    /// `None` when no repetition produced a value (every run broke down).
    pub summary: Option<StatsSummary>,
    pub exact: f64,
    pub seed: u64,
    pub repetitions: usize,
    pub inputs_digest: String,
    /// Newton runs that hit a zero operand.
    pub breakdowns: usize,
    /// Newton runs that exhausted the iteration budget.
    pub non_converged: usize,
}

impl ExperimentReport {
    pub fn solvable(&self) -> bool {
        self.summary.is_some()
    }
}

/// FNV-1a over the bit patterns of the inputs.
pub fn digest(values: &[f64]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        for b in v.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    format!("{h:016x}")
}

/// Runs `trial` once per repetition on its own substream, in repetition order.
///
/// Deterministic modes run once; the caller treats that single outcome as
/// every repetition's outcome.
pub(crate) fn repeat<T, F>(mode: &RoundingMode, repetitions: usize, seed: u64, trial: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut RandomStream) -> T + Sync,
{
    if !mode.is_stochastic() {
        let mut rng = RandomStream::substream(seed, 0);
        return vec![trial(&mut rng)];
    }
    (0..repetitions)
        .into_par_iter()
        .map(|r| {
            let mut rng = RandomStream::substream(seed, r as u64);
            trial(&mut rng)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rounding::DeterministicMode;

    #[test]
    fn digest_is_stable_and_sensitive() {
        let a = digest(&[0.1, 0.2]);
        assert_eq!(a, digest(&[0.1, 0.2]));
        assert_ne!(a, digest(&[0.2, 0.1]));
        assert_eq!(digest(&[]), "cbf29ce484222325");
    }

    #[test]
    fn repeat_runs_deterministic_once() {
        let mode = RoundingMode::Deterministic(DeterministicMode::Floor);
        assert_eq!(repeat(&mode, 100, 0, |_| 1).len(), 1);
        let out = repeat(&RoundingMode::StochasticSR, 100, 7, |rng| rng.stream_id());
        assert_eq!(out, (0..100).collect::<Vec<u64>>());
    }
}
