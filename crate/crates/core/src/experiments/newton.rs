use super::{digest, repeat, ExperimentReport};
use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::rounding::{round, RoundingMode, RoundingSpec};
use crate::stats::{summarize, CompensatedSum};

/// Five-digit test values, one per decade band `(0,1)`, `(1,10)`, ..., `(1000,10000)`.
pub const SQRT_TEST_VALUES: [f64; 5] = [0.30146, 6.55501, 51.16904, 357.00272, 8133.27762];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    pub x0: f64,
    /// Stop once `|x_{k+1} - x_k| <= tol`.
    pub tol: f64,
    pub n_max: usize,
    pub spec: RoundingSpec,
}

impl NewtonConfig {
    pub fn new(spec: RoundingSpec) -> Self {
        Self {
            x0: 1.0,
            tol: 1e-5,
            n_max: 100,
            spec,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.n_max == 0 || !self.x0.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "newton needs tol > 0, n_max >= 1 and a finite start, got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOutcome {
    pub value: f64,
    pub n_it: usize,
    pub converged: bool,
}

/// Newton iteration for `sqrt(a)` with every operation result rounded:
///
/// ```text
/// x_{k+1} = fl( (x_k + fl(fl(a) / x_k)) / 2 )
/// ```
///
/// `a` is rounded once up front. `mode = None` runs in unrounded arithmetic.
/// A zero rounded operand or iterate is reported as [`Error::Breakdown`].
pub fn newton_sqrt_rounded(
    a: f64,
    mode: Option<&RoundingMode>,
    cfg: &NewtonConfig,
    rng: &mut RandomStream,
) -> Result<NewtonOutcome> {
    cfg.validate()?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Domain(format!("sqrt of {a} needs a > 0")));
    }
    let mut fl = |v: f64| -> Result<f64> {
        match mode {
            Some(m) => round(v, m, &cfg.spec, rng),
            None => Ok(v),
        }
    };
    let a_r = fl(a)?;
    if a_r == 0.0 {
        return Err(Error::Breakdown { operand: "a" });
    }
    let mut x = fl(cfg.x0)?;
    for k in 1..=cfg.n_max {
        if x == 0.0 {
            return Err(Error::Breakdown { operand: "iterate" });
        }
        let q = fl(a_r / x)?;
        let next = fl(0.5 * (x + q))?;
        if (next - x).abs() <= cfg.tol {
            return Ok(NewtonOutcome {
                value: next,
                n_it: k,
                converged: true,
            });
        }
        x = next;
    }
    Ok(NewtonOutcome {
        value: x,
        n_it: cfg.n_max,
        converged: false,
    })
}

/// Repeats the rounded Newton iteration and summarizes against `sqrt(a)`.
///
/// Breakdowns are counted and left out of the statistics; runs that exhaust
/// the budget keep their last iterate and are counted as non-converged.
pub fn run_sqrt_experiment(
    a: f64,
    mode: Option<&RoundingMode>,
    cfg: &NewtonConfig,
    repetitions: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    if repetitions == 0 {
        return Err(Error::InvalidConfig("repetitions must be positive".into()));
    }
    let exact_mode = RoundingMode::Deterministic(crate::rounding::DeterministicMode::Floor);
    // Unrounded arithmetic is deterministic, like a deterministic mode.
    let driver = mode.unwrap_or(&exact_mode);
    let runs = repeat(driver, repetitions, seed, |rng| {
        newton_sqrt_rounded(a, mode, cfg, rng)
    });
    let scale = if runs.len() == 1 { repetitions } else { 1 };

    let mut values = Vec::with_capacity(runs.len());
    let mut iterations = CompensatedSum::default();
    let mut breakdowns = 0;
    let mut non_converged = 0;
    for run in runs {
        match run {
            Ok(out) => {
                values.push(out.value);
                iterations.add(out.n_it as f64);
                if !out.converged {
                    non_converged += scale;
                }
            }
            Err(Error::Breakdown { .. }) => breakdowns += scale,
            Err(e) => return Err(e),
        }
    }
    let exact = a.sqrt();
    let summary = if values.is_empty() {
        None
    } else {
        let mut s = summarize(&values, exact)?;
        s.n_it_mean = Some(iterations.value() / values.len() as f64);
        s.n_samples = values.len() * scale;
        Some(s)
    };
    Ok(ExperimentReport {
        mode: mode.map_or_else(|| "exact".to_string(), |m| m.label()),
        summary,
        exact,
        seed,
        repetitions,
        inputs_digest: digest(&[a, cfg.spec.delta(), cfg.x0, cfg.tol]),
        breakdowns,
        non_converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rounding::DeterministicMode;

    const CR: RoundingMode = RoundingMode::Deterministic(DeterministicMode::HalfEven);

    fn run(a: f64, mode: Option<&RoundingMode>, spec: RoundingSpec) -> Result<NewtonOutcome> {
        let mut rng = RandomStream::new(0);
        newton_sqrt_rounded(a, mode, &NewtonConfig::new(spec), &mut rng)
    }

    #[test]
    fn perfect_square_unrounded() {
        let out = run(4.0, None, RoundingSpec::integer()).unwrap();
        assert!(out.converged);
        assert!((out.value - 2.0).abs() <= 1e-5);
    }

    #[test]
    fn integer_arithmetic_breaks_down_below_one() {
        let err = run(0.30146, Some(&CR), RoundingSpec::integer()).unwrap_err();
        assert_eq!(err, Error::Breakdown { operand: "a" });
        let floor = RoundingMode::Deterministic(DeterministicMode::Floor);
        assert!(matches!(
            run(0.30146, Some(&floor), RoundingSpec::integer()),
            Err(Error::Breakdown { .. })
        ));
        // 0.6 rounds to 1 under CR, the first half step 1 rounds to 1 and
        // then 0.5 * (1 + 1) = 1: this one converges.
        assert!(run(0.6, Some(&CR), RoundingSpec::integer()).is_ok());
    }

    #[test]
    fn iterate_breakdown() {
        // A zero start divides by a zero iterate on the first step.
        let cfg = NewtonConfig {
            x0: 0.0,
            ..NewtonConfig::new(RoundingSpec::integer())
        };
        let mut rng = RandomStream::new(0);
        let err = newton_sqrt_rounded(9.0, Some(&CR), &cfg, &mut rng).unwrap_err();
        assert_eq!(err, Error::Breakdown { operand: "iterate" });
    }

    #[test]
    fn integer_cr_reference_values() {
        // Integer-arithmetic convergent rounding, traced by hand.
        let int = RoundingSpec::integer();
        let out = run(51.16904, Some(&CR), int).unwrap();
        assert_eq!((out.value, out.n_it, out.converged), (7.0, 6, true));
        let out = run(357.00272, Some(&CR), int).unwrap();
        assert_eq!((out.value, out.n_it), (19.0, 7));
        let out = run(8133.27762, Some(&CR), int).unwrap();
        assert_eq!((out.value, out.n_it), (90.0, 10));
        // 6.55501 rounds to 7, then the iterates cycle 3, 2, 3, 2, ...
        let out = run(6.55501, Some(&CR), int).unwrap();
        assert!(!out.converged);
        assert_eq!(out.n_it, 100);
    }

    #[test]
    fn three_digit_cr_reference_values() {
        let d3 = RoundingSpec::decimal(3).unwrap();
        let expected = [(0.548, 4), (2.56, 5), (7.154, 7), (18.894, 8), (90.184, 11)];
        for (a, (mu, n_it)) in SQRT_TEST_VALUES.iter().zip(expected) {
            let out = run(*a, Some(&CR), d3).unwrap();
            assert_eq!((out.value, out.n_it), (mu, n_it), "a = {a}");
        }
    }

    #[test]
    fn unrounded_converges_quickly() {
        for a in SQRT_TEST_VALUES {
            let out = run(a, None, RoundingSpec::integer()).unwrap();
            assert!(out.converged && out.n_it <= 12, "{a}: {out:?}");
            assert!((out.value - a.sqrt()).abs() <= 1e-5);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            run(0.0, Some(&CR), RoundingSpec::integer()),
            Err(Error::Domain(_))
        ));
        assert!(run(-4.0, None, RoundingSpec::integer()).is_err());
        let cfg = NewtonConfig {
            tol: 0.0,
            ..NewtonConfig::new(RoundingSpec::integer())
        };
        let mut rng = RandomStream::new(0);
        assert!(newton_sqrt_rounded(4.0, None, &cfg, &mut rng).is_err());
    }

    #[test]
    fn deterministic_experiment_has_integer_iterations() {
        let cfg = NewtonConfig::new(RoundingSpec::decimal(3).unwrap());
        let r = run_sqrt_experiment(357.00272, Some(&CR), &cfg, 10_000, 0).unwrap();
        let s = r.summary.unwrap();
        assert_eq!(s.n_it_mean.unwrap().fract(), 0.0);
        assert_eq!(s.variance, 0.0);
        assert_eq!(s.n_samples, 10_000);
    }

    #[test]
    fn all_breakdown_is_unsolvable() {
        let cfg = NewtonConfig::new(RoundingSpec::integer());
        let r = run_sqrt_experiment(0.30146, Some(&CR), &cfg, 100, 0).unwrap();
        assert!(!r.solvable());
        assert_eq!(r.breakdowns, 100);
        let sr =
            run_sqrt_experiment(0.30146, Some(&RoundingMode::StochasticSR), &cfg, 1000, 0).unwrap();
        assert!(
            sr.breakdowns > 500 && sr.breakdowns < 1000,
            "{}",
            sr.breakdowns
        );
    }

    #[test]
    fn non_convergence_counted() {
        let cfg = NewtonConfig::new(RoundingSpec::integer());
        let r = run_sqrt_experiment(6.55501, Some(&CR), &cfg, 50, 0).unwrap();
        assert_eq!(r.non_converged, 50);
        assert!(r.solvable());
    }
}
