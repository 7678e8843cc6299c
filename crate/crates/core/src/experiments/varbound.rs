use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::rounding::{round_stochastic, RoundingMode, RoundingSpec};
use crate::stats::{
    population_variance, sr_variance_theoretical, two_point_variance_stderr, variance_bound,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarBoundConfig {
    pub n_bits: u32,
    pub x_max: f64,
    pub step: f64,
    pub draws: usize,
    /// Keep every `stride`-th grid point.
    pub stride: usize,
    pub seed: u64,
}

impl Default for VarBoundConfig {
    fn default() -> Self {
        Self {
            n_bits: 4,
            x_max: 2.0,
            step: 1e-4,
            draws: 10_000,
            stride: 1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarBoundPoint {
    pub x: f64,
    pub empirical: f64,
    pub theoretical: f64,
    pub bound: f64,
    /// Standard error of `empirical` under the theoretical law.
    pub stderr: f64,
}

/// Empirical stochastic-rounding variance on `[0, x_max]` against theory
/// and the `(1 / (2 theta))^2` bound. Point `j` draws from substream `j`.
pub fn validate_variance_bound(cfg: &VarBoundConfig) -> Result<Vec<VarBoundPoint>> {
    if !(cfg.step > 0.0 && cfg.x_max >= 0.0) || cfg.draws == 0 || cfg.stride == 0 {
        return Err(Error::InvalidConfig(format!(
            "bad variance-bound config {cfg:?}"
        )));
    }
    let spec = RoundingSpec::binary(cfg.n_bits)?;
    let bound = variance_bound(&spec);
    let count = (cfg.x_max / cfg.step).round() as usize + 1;
    let indices: Vec<usize> = (0..count).step_by(cfg.stride).collect();
    indices
        .par_iter()
        .map(|&j| {
            let x = j as f64 * cfg.step;
            let mut rng = RandomStream::substream(cfg.seed, j as u64);
            let samples = (0..cfg.draws)
                .map(|_| round_stochastic(x, &RoundingMode::StochasticSR, &spec, &mut rng))
                .collect::<Result<Vec<f64>>>()?;
            let (_, frac) = spec.split(x)?;
            Ok(VarBoundPoint {
                x,
                empirical: population_variance(&samples)?,
                theoretical: sr_variance_theoretical(x, &spec)?,
                bound,
                stderr: two_point_variance_stderr(frac, spec.delta(), cfg.draws),
            })
        })
        .collect()
}
