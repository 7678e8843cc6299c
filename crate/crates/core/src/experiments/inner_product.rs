use std::f64::consts::PI;

use super::{digest, repeat, ExperimentReport};
use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::rounding::{round, RoundingMode, RoundingSpec};
use crate::stats::{summarize, CompensatedSum};

pub const DOT_SIZES: [usize; 6] = [50, 200, 400, 600, 800, 1000];

/// `y` equispaced on the closed interval `[0, 2 pi]`, `x = sin(y)`.
pub fn gen_sine_vectors(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("vector size {n} < 2")));
    }
    let last = (n - 1) as f64;
    let y: Vec<f64> = (0..n).map(|i| 2.0 * PI * i as f64 / last).collect();
    let x = y.iter().map(|v| v.sin()).collect();
    Ok((x, y))
}

/// Rounded inner product.
///
/// On the integer grid the product of two rounded factors is already an
/// integer, so each term is `fl(x_i) fl(y_i)`. On finer grids each product is
/// rounded again: `fl(fl(x_i) fl(y_i))`.
pub fn rounded_inner_product(
    x: &[f64],
    y: &[f64],
    mode: &RoundingMode,
    spec: &RoundingSpec,
    rng: &mut RandomStream,
) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Domain(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let integer_grid = spec.theta() == 1.0;
    let mut acc = CompensatedSum::default();
    for (&a, &b) in x.iter().zip(y) {
        let prod = round(a, mode, spec, rng)? * round(b, mode, spec, rng)?;
        let term = if integer_grid {
            prod
        } else {
            round(prod, mode, spec, rng)?
        };
        acc.add(term);
    }
    Ok(acc.value())
}

/// Integer-arithmetic inner product of the sine vectors of size `n`.
pub fn run_inner_product_experiment(
    n: usize,
    mode: &RoundingMode,
    repetitions: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    if repetitions == 0 {
        return Err(Error::InvalidConfig("repetitions must be positive".into()));
    }
    let (x, y) = gen_sine_vectors(n)?;
    let spec = RoundingSpec::integer();
    let exact = x
        .iter()
        .zip(&y)
        .map(|(a, b)| a * b)
        .collect::<CompensatedSum>()
        .value();
    let outcomes = repeat(mode, repetitions, seed, |rng| {
        rounded_inner_product(&x, &y, mode, &spec, rng)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let mut summary = summarize(&outcomes, exact)?;
    summary.n_samples = repetitions;
    let mut inputs = x;
    inputs.extend_from_slice(&y);
    Ok(ExperimentReport {
        mode: mode.label(),
        summary: Some(summary),
        exact,
        seed,
        repetitions,
        inputs_digest: digest(&inputs),
        breakdowns: 0,
        non_converged: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rounding::DeterministicMode;

    #[test]
    fn three_point_vectors() {
        let (x, y) = gen_sine_vectors(3).unwrap();
        assert_eq!(y, vec![0.0, PI, 2.0 * PI]);
        assert!(x.iter().all(|v| v.abs() < 1e-15));
        assert!(gen_sine_vectors(1).is_err());
    }

    #[test]
    fn exact_inner_product_near_minus_n() {
        // Riemann sum of the integral of y sin(y) over [0, 2 pi] = -2 pi,
        // scaled by (n - 1) / (2 pi).
        let (x, y) = gen_sine_vectors(1000).unwrap();
        let dot: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        assert!((dot + 999.0).abs() < 2.0, "{dot}");
        assert!(x.iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn integer_vectors_exact() {
        let x = [1.0, -2.0, 3.0];
        let y = [4.0, 5.0, -6.0];
        let mut rng = RandomStream::new(0);
        for mode in [
            RoundingMode::StochasticSR,
            RoundingMode::Deterministic(DeterministicMode::HalfEven),
        ] {
            let v =
                rounded_inner_product(&x, &y, &mode, &RoundingSpec::integer(), &mut rng).unwrap();
            assert_eq!(v, -24.0);
        }
    }

    #[test]
    fn unbiased_single_term() {
        let spec = RoundingSpec::integer();
        let n = 100_000u64;
        let mut sum = 0.0;
        for r in 0..n {
            let mut rng = RandomStream::substream(2, r);
            sum +=
                rounded_inner_product(&[0.4], &[1.0], &RoundingMode::StochasticSR, &spec, &mut rng)
                    .unwrap();
        }
        let mean = sum / n as f64;
        assert!((mean - 0.4).abs() < 4.0 * (0.24 / n as f64).sqrt());
    }

    #[test]
    fn zero_vector() {
        let mut rng = RandomStream::new(0);
        let spec = RoundingSpec::integer();
        for mode in [
            RoundingMode::StochasticSR,
            RoundingMode::Deterministic(DeterministicMode::Floor),
        ] {
            let v = rounded_inner_product(&[0.0; 4], &[0.3, 1.7, 2.2, 9.9], &mode, &spec, &mut rng)
                .unwrap();
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn draws_per_term() {
        let x = [0.3, 0.7];
        let y = [0.2, 0.9];
        let spec_int = RoundingSpec::integer();
        let spec_fine = RoundingSpec::decimal(1).unwrap();
        let mut a = RandomStream::new(1);
        rounded_inner_product(&x, &y, &RoundingMode::StochasticSR, &spec_int, &mut a).unwrap();
        let mut b = RandomStream::new(1);
        for _ in 0..4 {
            b.uniform();
        }
        assert_eq!(a.uniform(), b.uniform());
        let mut c = RandomStream::new(1);
        rounded_inner_product(&x, &y, &RoundingMode::StochasticSR, &spec_fine, &mut c).unwrap();
        let mut d = RandomStream::new(1);
        for _ in 0..6 {
            d.uniform();
        }
        assert_eq!(c.uniform(), d.uniform());
    }

    #[test]
    fn length_mismatch() {
        let mut rng = RandomStream::new(0);
        let err = rounded_inner_product(
            &[1.0],
            &[1.0, 2.0],
            &RoundingMode::StochasticSR,
            &RoundingSpec::integer(),
            &mut rng,
        );
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn cr_has_zero_variance() {
        let cr = RoundingMode::Deterministic(DeterministicMode::HalfEven);
        let r = run_inner_product_experiment(50, &cr, 10_000, 0).unwrap();
        assert_eq!(r.summary.unwrap().variance, 0.0);
    }
}
