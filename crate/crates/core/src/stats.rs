//! Error metrics for rounded results.
//!
//! Variances use population normalization `(1/N) sum (x - mean)^2`
//! throughout. Relative errors against an exact value of zero are reported as
//! `None` rather than infinity.

use serde::Serialize;

use crate::error::{check_finite, Error, Result};
use crate::rounding::RoundingSpec;

/// Aggregate of repeated rounded outcomes against one exact value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsSummary {
    pub mu: f64,
    pub abs_bias: f64,
    pub variance: f64,
    /// Mean of `|outcome - exact| / |exact|`; `None` when `exact == 0`.
    pub mean_abs_rel_err: Option<f64>,
    pub n_samples: usize,
    /// Mean Newton iteration count, when the outcomes come from Newton runs.
    pub n_it_mean: Option<f64>,
}

/// Neumaier-compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::default();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

pub fn mean(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Domain("mean of an empty sample".into()));
    }
    let sum: CompensatedSum = samples.iter().copied().collect();
    Ok(sum.value() / samples.len() as f64)
}

pub fn population_variance(samples: &[f64]) -> Result<f64> {
    let mu = mean(samples)?;
    let ss: CompensatedSum = samples.iter().map(|x| (x - mu) * (x - mu)).collect();
    Ok((ss.value() / samples.len() as f64).max(0.0))
}

/// Variance of classic stochastic rounding at `x`: `(f - f^2) / theta^2`.
pub fn sr_variance_theoretical(x: f64, spec: &RoundingSpec) -> Result<f64> {
    let (_, frac) = spec.split(x)?;
    let theta = spec.theta();
    Ok((frac - frac * frac) / (theta * theta))
}

/// Upper bound `(1 / (2 theta))^2` on the stochastic rounding variance.
pub fn variance_bound(spec: &RoundingSpec) -> f64 {
    let half_step = 1.0 / (2.0 * spec.theta());
    half_step * half_step
}

/// Standard error of the population-variance estimator for a two-point law.
///
/// The outcome is `lower` or `lower + step`, up with probability `q`.
/// Uses `Var(V_hat) ~ (mu4 - sigma^4) / N`.
pub fn two_point_variance_stderr(q: f64, step: f64, n: usize) -> f64 {
    let pq = q * (1.0 - q);
    let s2 = step * step;
    let sigma4 = s2 * s2 * pq * pq;
    let mu4 = s2 * s2 * pq * (1.0 - 3.0 * pq);
    ((mu4 - sigma4).max(0.0) / n as f64).sqrt()
}

pub fn summarize(rounded_outcomes: &[f64], exact: f64) -> Result<StatsSummary> {
    check_finite(exact)?;
    let mu = mean(rounded_outcomes)?;
    let variance = population_variance(rounded_outcomes)?;
    let mean_abs_rel_err = if exact == 0.0 {
        None
    } else {
        let acc: CompensatedSum = rounded_outcomes
            .iter()
            .map(|y| (y - exact).abs() / exact.abs())
            .collect();
        Some(acc.value() / rounded_outcomes.len() as f64)
    };
    Ok(StatsSummary {
        mu,
        abs_bias: (mu - exact).abs(),
        variance,
        mean_abs_rel_err,
        n_samples: rounded_outcomes.len(),
        n_it_mean: None,
    })
}

/// The two outcomes of the worst case of a stochastically rounded product
/// `fl(x1) * fl(x2)` with `x2` rounded up to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorstCaseBranches {
    /// Relative error when `x1` rounds down to `i`.
    pub e_down: f64,
    /// Relative error when `x1` rounds up to `i + 1`.
    pub e_up: f64,
    /// Probability of the down branch, `1 - (x1 - i)`.
    pub p: f64,
}

pub fn worst_case_rel_error(x1: f64, x2: f64) -> Result<WorstCaseBranches> {
    check_finite(x1)?;
    check_finite(x2)?;
    if !(x1 > 0.0) {
        return Err(Error::Domain(format!("x1 = {x1} must be positive")));
    }
    if !(x2 > 0.0 && x2 < 1.0) {
        return Err(Error::Degenerate(format!("x2 = {x2} must lie in (0, 1)")));
    }
    let i = x1.floor();
    if i == x1 {
        return Err(Error::Degenerate(format!("x1 = {x1} is an integer")));
    }
    let prod = x1 * x2;
    Ok(WorstCaseBranches {
        e_down: (1.0 - i / prod).abs(),
        e_up: (1.0 - (i + 1.0) / prod).abs(),
        p: 1.0 - (x1 - i),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourCell {
    pub x1: f64,
    pub x2: f64,
    pub branches: WorstCaseBranches,
}

/// Worst-case errors at cell centres of a `res.0 x res.1` grid, row-major in `x1`.
///
/// Cell centres sit half a cell inside the ranges, so `x1` avoids the
/// integers whenever the range endpoints are integers and `res.0` is even
/// per unit length. A centre that still lands on an integer is an error.
pub fn contour_grid(
    x1_range: (f64, f64),
    x2_range: (f64, f64),
    res: (usize, usize),
) -> Result<Vec<ContourCell>> {
    let (n1, n2) = res;
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidConfig(
            "contour resolution must be positive".into(),
        ));
    }
    if !(x1_range.0 >= 0.0 && x1_range.1 > x1_range.0) {
        return Err(Error::InvalidConfig(format!("bad x1 range {x1_range:?}")));
    }
    if !(x2_range.0 >= 0.0 && x2_range.1 <= 1.0 && x2_range.1 > x2_range.0) {
        return Err(Error::InvalidConfig(format!("bad x2 range {x2_range:?}")));
    }
    let h1 = (x1_range.1 - x1_range.0) / n1 as f64;
    let h2 = (x2_range.1 - x2_range.0) / n2 as f64;
    let mut cells = Vec::with_capacity(n1 * n2);
    for a in 0..n1 {
        let x1 = x1_range.0 + (a as f64 + 0.5) * h1;
        for b in 0..n2 {
            let x2 = x2_range.0 + (b as f64 + 0.5) * h2;
            cells.push(ContourCell {
                x1,
                x2,
                branches: worst_case_rel_error(x1, x2)?,
            });
        }
    }
    Ok(cells)
}
