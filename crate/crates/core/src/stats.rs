//! Confidence bounds for comparing strategy recovery rates.
//!
//! Recovery experiments ask "does strategy A really beat strategy B, or did
//! the seeds get lucky?". We answer with one-sided lower bounds: on a single
//! proportion (Wilson score interval) and on a difference of two independent
//! proportions (normal approximation). A difference bound above zero means
//! the dominance is significant at the chosen level.

use crate::error::{Error, Result};

/// One-sided 95% standard-normal quantile, `Φ⁻¹(0.95)`.
pub const Z_95: f64 = 1.6448536269514726;

fn check_counts(successes: u64, trials: u64, z: f64) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    if successes > trials {
        return Err(Error::InvalidArgument(format!(
            "{successes} successes out of {trials} trials"
        )));
    }
    if !(z.is_finite() && z >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "z must be finite and non-negative, got {z}"
        )));
    }
    Ok(())
}

/// One-sided lower Wilson score bound on a binomial proportion.
///
/// Unlike the plain normal interval this stays inside `[0, 1]` and behaves
/// sensibly at 0 or `n` successes.
pub fn wilson_lower_bound(successes: u64, trials: u64, z: f64) -> Result<f64> {
    check_counts(successes, trials, z)?;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let radius = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // the interval lies in [0, 1] mathematically; the clamp only strips
    // floating-point residue at the endpoints
    Ok((center - radius).clamp(0.0, 1.0))
}

/// One-sided lower bound on `p_a − p_b` for two independent binomial
/// samples, by the normal approximation. A positive result rejects
/// "A is no better than B" at the level implied by `z`.
pub fn one_sided_diff_lower_bound(
    successes_a: u64,
    trials_a: u64,
    successes_b: u64,
    trials_b: u64,
    z: f64,
) -> Result<f64> {
    check_counts(successes_a, trials_a, z)?;
    check_counts(successes_b, trials_b, z)?;
    let (na, nb) = (trials_a as f64, trials_b as f64);
    let pa = successes_a as f64 / na;
    let pb = successes_b as f64 / nb;
    let se = (pa * (1.0 - pa) / na + pb * (1.0 - pb) / nb).sqrt();
    Ok((pa - pb) - z * se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // reference values computed independently with 40-digit arithmetic
    #[test]
    fn frozen_wilson_values() {
        assert!((wilson_lower_bound(45, 50, Z_95).unwrap() - 0.8084624858484291).abs() < 1e-15);
        assert_eq!(wilson_lower_bound(0, 10, Z_95).unwrap(), 0.0);
        assert!((wilson_lower_bound(10, 10, Z_95).unwrap() - 0.787058029916593).abs() < 1e-15);
        assert!((wilson_lower_bound(25, 50, Z_95).unwrap() - 0.3867158596865054).abs() < 1e-15);
    }

    #[test]
    fn frozen_difference_values() {
        let d = one_sided_diff_lower_bound(45, 50, 30, 50, Z_95).unwrap();
        assert!((d - 0.16637145964641492).abs() < 1e-15);
        let d = one_sided_diff_lower_bound(50, 50, 35, 50, Z_95).unwrap();
        assert!((d - 0.19340130156891816).abs() < 1e-15);
        let d = one_sided_diff_lower_bound(25, 50, 25, 50, Z_95).unwrap();
        assert!((d - -0.16448536269514727).abs() < 1e-15);
    }

    #[test]
    fn equal_rates_are_never_significant() {
        for n in [10, 50, 200] {
            for s in [0, n / 2, n] {
                let d = one_sided_diff_lower_bound(s, n, s, n, Z_95).unwrap();
                assert!(d <= 0.0, "s={s} n={n} gave {d}");
            }
        }
    }

    #[test]
    fn argument_checks() {
        assert!(wilson_lower_bound(1, 0, Z_95).is_err());
        assert!(wilson_lower_bound(5, 4, Z_95).is_err());
        assert!(wilson_lower_bound(1, 4, -1.0).is_err());
        assert!(one_sided_diff_lower_bound(1, 2, 3, 2, Z_95).is_err());
    }

    proptest! {
        #[test]
        fn wilson_bound_stays_in_range_and_below_estimate(
            trials in 1u64..500,
            ratio in 0.0f64..=1.0,
        ) {
            let successes = ((trials as f64) * ratio).round() as u64;
            let successes = successes.min(trials);
            let bound = wilson_lower_bound(successes, trials, Z_95).unwrap();
            let p = successes as f64 / trials as f64;
            prop_assert!((0.0..=1.0).contains(&bound));
            prop_assert!(bound <= p + 1e-12);
        }

        #[test]
        fn zero_z_recovers_the_estimates(
            sa in 0u64..=40, sb in 0u64..=40,
        ) {
            let bound = one_sided_diff_lower_bound(sa, 40, sb, 40, 0.0).unwrap();
            let expected = (sa as f64 - sb as f64) / 40.0;
            prop_assert!((bound - expected).abs() < 1e-15);
            let w = wilson_lower_bound(sa, 40, 0.0).unwrap();
            prop_assert!((w - sa as f64 / 40.0).abs() < 1e-15);
        }

        #[test]
        fn more_evidence_tightens_the_wilson_bound(
            scale in 2u64..20,
        ) {
            // same 80% rate, growing sample
            let small = wilson_lower_bound(4 * scale, 5 * scale, Z_95).unwrap();
            let big = wilson_lower_bound(8 * scale, 10 * scale, Z_95).unwrap();
            prop_assert!(big >= small - 1e-12);
        }
    }
}
