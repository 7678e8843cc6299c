//! Rounding kernels on a grid of spacing `delta = 1 / base^n`.
//!
//! Every kernel scales `x` by `theta = base^n`, rounds the scaled value to an
//! integer, and divides by `theta` again. Negative inputs use the floor
//! convention: the fractional part of `theta * x` is `theta * x - floor(theta * x)`
//! and always lies in `[0, 1)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, Error, Result};
use crate::rng::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Base {
    Binary,
    Decimal,
}

impl Base {
    pub fn radix(self) -> u32 {
        match self {
            Base::Binary => 2,
            Base::Decimal => 10,
        }
    }
}

/// Precision grid: `n` fractional digits in `base`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundingSpec {
    n: u32,
    base: Base,
    theta: f64,
    delta: f64,
}

impl RoundingSpec {
    pub fn new(n: u32, base: Base) -> Result<Self> {
        let theta = (base.radix() as f64).powi(n as i32);
        // 10^22 is the largest power of ten that is exact in f64.
        let exact_limit = match base {
            Base::Binary => 1023,
            Base::Decimal => 22,
        };
        if n > exact_limit {
            return Err(Error::InvalidConfig(format!(
                "{n} fractional digits in base {} is not representable",
                base.radix()
            )));
        }
        Ok(Self {
            n,
            base,
            theta,
            delta: 1.0 / theta,
        })
    }

    /// Rounding to integers (`delta = 1`).
    pub fn integer() -> Self {
        Self {
            n: 0,
            base: Base::Decimal,
            theta: 1.0,
            delta: 1.0,
        }
    }

    pub fn binary(n: u32) -> Result<Self> {
        Self::new(n, Base::Binary)
    }

    pub fn decimal(n: u32) -> Result<Self> {
        Self::new(n, Base::Decimal)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn base(&self) -> Base {
        self.base
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Splits `theta * x` into its floor and fractional part.
    ///
    /// Scaled values within one ulp of an integer are snapped onto it, so grid
    /// values such as `0.549` with three decimal digits report a fractional
    /// part of exactly zero. Fractional parts within one ulp of one half are
    /// snapped to exactly one half.
    pub fn split(&self, x: f64) -> Result<(f64, f64)> {
        check_finite(x)?;
        let scaled = self.theta * x;
        if !scaled.is_finite() {
            return Err(Error::NonFinite(scaled));
        }
        let nearest = scaled.round();
        if (scaled - nearest).abs() <= f64::EPSILON * nearest.abs().max(1.0) {
            return Ok((nearest, 0.0));
        }
        let lower = scaled.floor();
        let mut frac = scaled - lower;
        // Decimal ties such as 0.0025 * 1000 land within an ulp of one half.
        if (frac - 0.5).abs() <= f64::EPSILON * scaled.abs().max(1.0) {
            frac = 0.5;
        }
        Ok((lower, frac))
    }

    /// Whether `x` lies on the grid (after the one-ulp snap).
    pub fn is_on_grid(&self, x: f64) -> Result<bool> {
        Ok(self.split(x)?.1 == 0.0)
    }

    fn unscale(&self, k: f64) -> f64 {
        k / self.theta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DeterministicMode {
    /// Toward negative infinity.
    Floor,
    /// Toward positive infinity.
    Ceiling,
    /// Nearest, ties toward positive infinity.
    HalfUp,
    /// Nearest, ties toward negative infinity.
    HalfDown,
    /// Nearest, ties to the even neighbour (convergent rounding).
    HalfEven,
    /// Nearest, ties to the odd neighbour.
    HalfOdd,
}

impl DeterministicMode {
    pub const ALL: [DeterministicMode; 6] = [
        DeterministicMode::Floor,
        DeterministicMode::Ceiling,
        DeterministicMode::HalfUp,
        DeterministicMode::HalfDown,
        DeterministicMode::HalfEven,
        DeterministicMode::HalfOdd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DeterministicMode::Floor => "floor",
            DeterministicMode::Ceiling => "ceil",
            DeterministicMode::HalfUp => "half-up",
            DeterministicMode::HalfDown => "half-down",
            DeterministicMode::HalfEven => "half-even",
            DeterministicMode::HalfOdd => "half-odd",
        }
    }

    /// Rounds an integer-plus-fraction pair, returning the chosen integer.
    fn pick(self, lower: f64, frac: f64) -> f64 {
        if frac == 0.0 {
            return lower;
        }
        let upper = lower + 1.0;
        match self {
            DeterministicMode::Floor => lower,
            DeterministicMode::Ceiling => upper,
            _ if frac < 0.5 => lower,
            _ if frac > 0.5 => upper,
            DeterministicMode::HalfUp => upper,
            DeterministicMode::HalfDown => lower,
            DeterministicMode::HalfEven => {
                if lower % 2.0 == 0.0 {
                    lower
                } else {
                    upper
                }
            }
            DeterministicMode::HalfOdd => {
                if lower % 2.0 == 0.0 {
                    upper
                } else {
                    lower
                }
            }
        }
    }
}

impl fmt::Display for DeterministicMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Probability of rounding down as a function of the fractional part.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable {
    grid: Vec<f64>,
    p: Vec<f64>,
    label: String,
}

impl ProbabilityTable {
    pub fn new(grid: Vec<f64>, p: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if grid.len() != p.len() {
            return Err(Error::InvalidTable(format!(
                "grid has {} nodes but p has {}",
                grid.len(),
                p.len()
            )));
        }
        if grid.len() < 2 {
            return Err(Error::InvalidTable("need at least two nodes".into()));
        }
        if grid[0] != 0.0 || grid[grid.len() - 1] != 1.0 {
            return Err(Error::InvalidTable(
                "grid must start at 0 and end at 1".into(),
            ));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidTable(
                "grid must be strictly increasing".into(),
            ));
        }
        if let Some(bad) = p.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidTable(format!(
                "probability {bad} outside [0, 1]"
            )));
        }
        Ok(Self {
            grid,
            p,
            label: label.into(),
        })
    }

    /// Table on `size` equispaced nodes of `[0, 1]`, with `p` evaluated per node.
    pub fn from_fn(size: usize, label: impl Into<String>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let grid = uniform_grid(size)?;
        let p = grid.iter().map(|&g| f(g)).collect();
        Self::new(grid, p, label)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Linear interpolation of the probability at fractional part `f`.
    pub fn probability(&self, f: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::Domain(format!("fractional part {f} outside [0, 1]")));
        }
        let hi = self.grid.partition_point(|&g| g < f);
        if self.grid[hi] == f {
            return Ok(self.p[hi]);
        }
        let lo = hi - 1;
        let t = (f - self.grid[lo]) / (self.grid[hi] - self.grid[lo]);
        let v = self.p[lo] + t * (self.p[hi] - self.p[lo]);
        Ok(v.clamp(0.0, 1.0))
    }
}

/// `size` equispaced nodes `j / (size - 1)` covering `[0, 1]`.
pub fn uniform_grid(size: usize) -> Result<Vec<f64>> {
    if size < 2 {
        return Err(Error::InvalidConfig(format!("grid size {size} < 2")));
    }
    let last = (size - 1) as f64;
    Ok((0..size).map(|j| j as f64 / last).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub enum RoundingMode {
    Deterministic(DeterministicMode),
    /// Classic stochastic rounding: round down with probability `1 - f`.
    StochasticSR,
    /// Stochastic rounding with a tabulated probability of rounding down.
    StochasticTable(ProbabilityTable),
}

impl RoundingMode {
    pub fn label(&self) -> String {
        match self {
            RoundingMode::Deterministic(m) => m.name().to_string(),
            RoundingMode::StochasticSR => "sr".to_string(),
            RoundingMode::StochasticTable(t) => t.label().to_string(),
        }
    }

    pub fn is_stochastic(&self) -> bool {
        !matches!(self, RoundingMode::Deterministic(_))
    }
}

impl From<DeterministicMode> for RoundingMode {
    fn from(m: DeterministicMode) -> Self {
        RoundingMode::Deterministic(m)
    }
}

/// Largest grid multiple not exceeding `x`.
pub fn floor_to_grid(x: f64, spec: &RoundingSpec) -> Result<f64> {
    let (lower, _) = spec.split(x)?;
    Ok(spec.unscale(lower))
}

pub fn round_deterministic(x: f64, mode: DeterministicMode, spec: &RoundingSpec) -> Result<f64> {
    let (lower, frac) = spec.split(x)?;
    Ok(spec.unscale(mode.pick(lower, frac)))
}

/// `(p_down, p_up)` of classic stochastic rounding.
pub fn sr_probabilities(x: f64, spec: &RoundingSpec) -> Result<(f64, f64)> {
    let (_, frac) = spec.split(x)?;
    Ok((1.0 - frac, frac))
}

pub fn table_probability(f: f64, table: &ProbabilityTable) -> Result<f64> {
    table.probability(f)
}

/// Stochastic rounding with exactly one uniform draw per call.
///
/// Grid values are returned unchanged; the draw is still consumed so that
/// stream positions never depend on the data.
pub fn round_stochastic(
    x: f64,
    mode: &RoundingMode,
    spec: &RoundingSpec,
    rng: &mut RandomStream,
) -> Result<f64> {
    let (lower, frac) = spec.split(x)?;
    let u = rng.uniform();
    if frac == 0.0 {
        return Ok(spec.unscale(lower));
    }
    let p_down = match mode {
        RoundingMode::StochasticSR => 1.0 - frac,
        RoundingMode::StochasticTable(table) => table.probability(frac)?,
        RoundingMode::Deterministic(m) => {
            return Err(Error::Domain(format!(
                "{m} is deterministic; use round_deterministic"
            )))
        }
    };
    let k = if u < p_down { lower } else { lower + 1.0 };
    Ok(spec.unscale(k))
}

/// Dispatches on the mode; deterministic modes consume no draws.
pub fn round(
    x: f64,
    mode: &RoundingMode,
    spec: &RoundingSpec,
    rng: &mut RandomStream,
) -> Result<f64> {
    match mode {
        RoundingMode::Deterministic(m) => round_deterministic(x, *m, spec),
        _ => round_stochastic(x, mode, spec, rng),
    }
}
