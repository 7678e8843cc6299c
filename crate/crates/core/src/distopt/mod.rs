//! Optimized stochastic-rounding distributions.
//!
//! A rounding law that goes down with probability `p` has variance
//! `V(p) = delta^2 (p - p^2)` and bias `B(p) = delta ((1 - p) - f)`, where `f`
//! is the fractional part of the scaled input. The scalarized objective is
//!
//! ```text
//! theta1 V(p)^2 + theta2 B(p)^2 + k1 [V(p) >= V_max] + k2 [|B(p)| >= B_max]
//! ```
//!
//! Since `V` and `B` depend on the input only through `f`, a whole curve
//! `p(f)` is obtained by minimizing the objective independently at each node
//! of a grid over `[0, 1]`.

pub mod pso;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::rounding::{uniform_grid, ProbabilityTable};

pub use pso::{pso_minimize, pso_minimize_with, PsoConfig, PsoResult};

pub const DEFAULT_GRID_SIZE: usize = 1001;
pub const DEFAULT_PENALTY: f64 = 1e10;

/// Weights, limits and penalties of the scalarized objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MopConfig {
    pub theta1: f64,
    pub theta2: f64,
    pub v_max: Option<f64>,
    pub b_max: Option<f64>,
    pub k1: f64,
    pub k2: f64,
    pub delta: f64,
}

impl MopConfig {
    /// Unconstrained weighting with `delta = 1`.
    pub fn weighted(theta1: f64, theta2: f64) -> Self {
        Self {
            theta1,
            theta2,
            v_max: None,
            b_max: None,
            k1: 0.0,
            k2: 0.0,
            delta: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.theta1 >= 0.0 && self.theta2 >= 0.0) {
            return bad(format!(
                "weights ({}, {}) must be >= 0",
                self.theta1, self.theta2
            ));
        }
        if (self.theta1 + self.theta2 - 1.0).abs() > 1e-12 {
            return bad(format!(
                "weights must sum to 1, got {} + {}",
                self.theta1, self.theta2
            ));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return bad(format!("delta = {} must be positive", self.delta));
        }
        for (name, limit, k) in [
            ("v_max", self.v_max, self.k1),
            ("b_max", self.b_max, self.k2),
        ] {
            if !(k >= 0.0 && k.is_finite()) {
                return bad(format!("penalty for {name} must be finite and >= 0"));
            }
            match limit {
                Some(l) if !(l > 0.0) => return bad(format!("{name} = {l} must be positive")),
                Some(_) if k == 0.0 => {
                    return bad(format!("{name} is set but its penalty is zero"))
                }
                None if k != 0.0 => return bad(format!("penalty {k} given for absent {name}")),
                _ => {}
            }
        }
        Ok(())
    }

    /// Whether the objective is unchanged under `p -> 1 - p`.
    fn symmetric_in_p(&self) -> bool {
        self.theta2 == 0.0 && self.b_max.is_none()
    }
}

/// Named configurations for the six reference distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    /// Bias only; recovers classic stochastic rounding.
    BiasMin,
    /// Variance only, resolved to always rounding down.
    VarMinFloor,
    /// Variance only, resolved to always rounding up.
    VarMinCeil,
    /// Heavy variance weight; a round-to-nearest-like step curve.
    NearestLike,
    /// Equal weights, unconstrained.
    D1,
    /// Equal weights with `|B| < 0.05` enforced by a penalty.
    D2,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::BiasMin,
        Preset::VarMinFloor,
        Preset::VarMinCeil,
        Preset::NearestLike,
        Preset::D1,
        Preset::D2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::BiasMin => "bias-min",
            Preset::VarMinFloor => "var-min-floor",
            Preset::VarMinCeil => "var-min-ceil",
            Preset::NearestLike => "nearest-like",
            Preset::D1 => "d1",
            Preset::D2 => "d2",
        }
    }

    /// Label stored in tables built from this preset.
    pub fn label(self) -> &'static str {
        match self {
            Preset::D1 => "D1",
            Preset::D2 => "D2",
            other => other.name(),
        }
    }

    pub fn tie_break(self) -> EndpointTie {
        match self {
            Preset::VarMinFloor => EndpointTie::Floor,
            Preset::VarMinCeil => EndpointTie::Ceil,
            _ => EndpointTie::NearestUnbiased,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == lower)
            .ok_or_else(|| {
                let names: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
                Error::InvalidConfig(format!(
                    "unknown preset '{s}', expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

pub fn preset_config(preset: Preset) -> MopConfig {
    match preset {
        Preset::BiasMin => MopConfig::weighted(0.0, 1.0),
        Preset::VarMinFloor | Preset::VarMinCeil => MopConfig::weighted(1.0, 0.0),
        Preset::NearestLike => MopConfig::weighted(0.98, 0.02),
        Preset::D1 => MopConfig::weighted(0.5, 0.5),
        Preset::D2 => MopConfig {
            b_max: Some(0.05),
            k2: DEFAULT_PENALTY,
            ..MopConfig::weighted(0.5, 0.5)
        },
    }
}

/// How to pick between `p` and `1 - p` when the objective cannot tell them apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EndpointTie {
    /// Prefer the larger probability of rounding down.
    Floor,
    /// Prefer the smaller probability of rounding down.
    Ceil,
    /// Prefer the candidate closer to the unbiased `1 - f`.
    NearestUnbiased,
}

fn check_p(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain(format!("probability {p} outside [0, 1]")))
    }
}

pub fn variance_of_p(p: f64, delta: f64) -> Result<f64> {
    check_p(p)?;
    Ok(variance_unchecked(p, delta))
}

pub fn bias_of_p(p: f64, f: f64, delta: f64) -> Result<f64> {
    check_p(p)?;
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::Domain(format!("fractional part {f} outside [0, 1]")));
    }
    Ok(bias_unchecked(p, f, delta))
}

#[inline]
fn variance_unchecked(p: f64, delta: f64) -> f64 {
    delta * delta * (p - p * p)
}

#[inline]
fn bias_unchecked(p: f64, f: f64, delta: f64) -> f64 {
    delta * ((1.0 - p) - f)
}

/// Penalized scalar objective at probability `p` (clamped onto `[0, 1]`).
#[inline]
pub fn objective(p: f64, f: f64, cfg: &MopConfig) -> f64 {
    let p = p.clamp(0.0, 1.0);
    let v = variance_unchecked(p, cfg.delta);
    let b = bias_unchecked(p, f, cfg.delta);
    let mut obj = cfg.theta1 * v * v + cfg.theta2 * b * b;
    if let Some(v_max) = cfg.v_max {
        if v - v_max >= 0.0 {
            obj += cfg.k1;
        }
    }
    if let Some(b_max) = cfg.b_max {
        if b.abs() - b_max >= 0.0 {
            obj += cfg.k2;
        }
    }
    obj
}

/// Minimizes the objective at one fractional part.
pub fn optimize_node(
    f: f64,
    cfg: &MopConfig,
    tie: EndpointTie,
    pso: &PsoConfig,
    rng: &mut RandomStream,
) -> Result<PsoResult> {
    let mut best = pso_minimize_with(|p| objective(p, f, cfg), pso, rng)?;
    if cfg.symmetric_in_p() {
        let mirror = 1.0 - best.position;
        let take_mirror = match tie {
            EndpointTie::Floor => mirror > best.position,
            EndpointTie::Ceil => mirror < best.position,
            EndpointTie::NearestUnbiased => {
                (mirror - (1.0 - f)).abs() < (best.position - (1.0 - f)).abs()
            }
        };
        if take_mirror {
            best = PsoResult {
                position: mirror,
                fitness: objective(mirror, f, cfg),
            };
        }
    }
    Ok(best)
}

/// Builds a table on `grid_size` equispaced nodes, one PSO run per node.
///
/// Node `j` runs on substream `j` of `pso.seed`, so the parallel result is
/// identical to a serial one.
pub fn optimize_table(
    cfg: &MopConfig,
    tie: EndpointTie,
    grid_size: usize,
    pso: &PsoConfig,
    label: impl Into<String>,
) -> Result<ProbabilityTable> {
    cfg.validate()?;
    pso.validate()?;
    let grid = uniform_grid(grid_size)?;
    let p = grid
        .par_iter()
        .enumerate()
        .map(|(j, &f)| {
            let mut rng = RandomStream::substream(pso.seed, j as u64);
            optimize_node(f, cfg, tie, pso, &mut rng).map(|r| r.position)
        })
        .collect::<Result<Vec<f64>>>()?;
    ProbabilityTable::new(grid, p, label)
}

pub fn optimize_preset(
    preset: Preset,
    grid_size: usize,
    pso: &PsoConfig,
) -> Result<ProbabilityTable> {
    optimize_table(
        &preset_config(preset),
        preset.tie_break(),
        grid_size,
        pso,
        preset.label(),
    )
}

/// Bias and variance extremes of a table, evaluated at its nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableProfile {
    pub min_bias: f64,
    pub max_bias: f64,
    pub max_abs_bias: f64,
    pub min_variance: f64,
    pub max_variance: f64,
}

pub fn table_profile(table: &ProbabilityTable, delta: f64) -> TableProfile {
    let mut prof = TableProfile {
        min_bias: f64::INFINITY,
        max_bias: f64::NEG_INFINITY,
        max_abs_bias: 0.0,
        min_variance: f64::INFINITY,
        max_variance: f64::NEG_INFINITY,
    };
    for (&f, &p) in table.grid().iter().zip(table.p()) {
        let b = bias_unchecked(p, f, delta);
        let v = variance_unchecked(p, delta);
        prof.min_bias = prof.min_bias.min(b);
        prof.max_bias = prof.max_bias.max(b);
        prof.max_abs_bias = prof.max_abs_bias.max(b.abs());
        prof.min_variance = prof.min_variance.min(v);
        prof.max_variance = prof.max_variance.max(v);
    }
    prof
}
