//! Goodness-of-fit tests used to validate samplers.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Tail of the Kolmogorov distribution, `P(K > λ)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=200 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn sorted(data: &[f64]) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(Error::invalid("data", "empty sample"));
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("data", "non-finite value"));
    }
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

fn p_from_distance(d: f64, n_eff: f64) -> f64 {
    let s = n_eff.sqrt();
    kolmogorov_q((s + 0.12 + 0.11 / s) * d)
}

/// One-sample Kolmogorov-Smirnov test against a continuous CDF.
pub fn ks_one_sample(data: &[f64], cdf: impl Fn(f64) -> f64) -> Result<TestResult> {
    let v = sorted(data)?;
    let n = v.len() as f64;
    let d = v
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    Ok(TestResult {
        statistic: d,
        p_value: p_from_distance(d, n),
    })
}

pub fn ks_uniform(data: &[f64], l: f64) -> Result<TestResult> {
    ks_one_sample(data, |x| (x / l).clamp(0.0, 1.0))
}

/// Two-sample Kolmogorov-Smirnov test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestResult> {
    let (a, b) = (sorted(a)?, sorted(b)?);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(TestResult {
        statistic: d,
        p_value: p_from_distance(d, na * nb / (na + nb)),
    })
}

/// Pearson χ² of observed counts against expected counts; `constraints` is
/// subtracted from the bin count to get the degrees of freedom.
pub fn chi_square(observed: &[f64], expected: &[f64], constraints: usize) -> Result<TestResult> {
    if observed.len() != expected.len() {
        return Err(Error::DimensionMismatch {
            expected: expected.len(),
            found: observed.len(),
        });
    }
    if observed.len() <= constraints {
        return Err(Error::invalid("bins", "no degrees of freedom left"));
    }
    if expected.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::invalid(
            "expected",
            "every bin needs a positive expectation",
        ));
    }
    let stat: f64 = observed
        .iter()
        .zip(expected)
        .map(|(o, e)| (o - e).powi(2) / e)
        .sum();
    let dof = (observed.len() - constraints) as f64;
    let dist = ChiSquared::new(dof).map_err(|e| Error::invalid("dof", e.to_string()))?;
    Ok(TestResult {
        statistic: stat,
        p_value: dist.sf(stat),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use rand::Rng;

    #[test]
    fn kolmogorov_tail_reference_values() {
        // Tabulated critical values of the limiting distribution.
        assert!((kolmogorov_q(1.3581) - 0.05).abs() < 2e-4);
        assert!((kolmogorov_q(1.6276) - 0.01).abs() < 1e-4);
        assert!((kolmogorov_q(1.2238) - 0.10).abs() < 2e-4);
        assert_eq!(kolmogorov_q(0.0), 1.0);
    }

    #[test]
    fn uniform_data_passes_and_skewed_fails() {
        let mut rng = seed::rng(1);
        let u: Vec<f64> = (0..5000).map(|_| rng.random::<f64>()).collect();
        assert!(ks_uniform(&u, 1.0).unwrap().p_value > 0.01);
        let sq: Vec<f64> = u.iter().map(|x| x * x).collect();
        assert!(ks_uniform(&sq, 1.0).unwrap().p_value < 1e-6);
        let v: Vec<f64> = (0..3000).map(|_| rng.random::<f64>()).collect();
        assert!(ks_two_sample(&u, &v).unwrap().p_value > 0.01);
        assert!(ks_two_sample(&sq, &v).unwrap().p_value < 1e-6);
    }

    #[test]
    fn two_sample_statistic_by_hand() {
        let r = ks_two_sample(&[0.1, 0.2, 0.3], &[0.25, 0.35, 0.45, 0.55]).unwrap();
        // after 0.3: F_a = 1, F_b = 1/4
        assert!((r.statistic - 0.75).abs() < 1e-15);
    }

    #[test]
    fn chi_square_reference() {
        let r = chi_square(&[10.0, 10.0], &[10.0, 10.0], 1).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        // χ² = 3.841 at one dof is the 5% point
        let e = [50.0, 50.0];
        let o = [
            50.0 + (3.841f64 * 25.0).sqrt(),
            50.0 - (3.841f64 * 25.0).sqrt(),
        ];
        let r = chi_square(&o, &e, 1).unwrap();
        assert!((r.p_value - 0.05).abs() < 1e-3);
    }
}
