//! Small statistics helpers for the estimators.

/// Inverse standard normal CDF (Acklam's rational approximation, |error|
/// below 1.2e-9 on (0, 1)).
#[allow(clippy::excessive_precision)]
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile of {p}");
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let p_low = 0.02425;
    if p < p_low {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - p_low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -normal_quantile(1.0 - p)
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_ci(successes: u64, trials: u64, conf: f64) -> (f64, f64) {
    assert!(trials >= 1 && successes <= trials);
    assert!(conf > 0.0 && conf < 1.0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z = normal_quantile(1.0 - (1.0 - conf) / 2.0);
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let hw = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - hw).max(0.0), (center + hw).min(1.0))
}

/// Plain binomial standard deviation of the proportion estimate.
pub fn binomial_sigma(p_hat: f64, trials: u64) -> f64 {
    (p_hat * (1.0 - p_hat) / trials as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quantile_is_standard() {
        assert!((normal_quantile(0.975) - 1.959964).abs() < 1e-5);
        assert!((normal_quantile(0.5)).abs() < 1e-12);
        assert!((normal_quantile(0.025) + 1.959964).abs() < 1e-5);
    }

    #[test]
    fn wilson_edge_cases() {
        let (lo, _) = wilson_ci(0, 100, 0.95);
        assert_eq!(lo, 0.0);
        let (_, hi) = wilson_ci(100, 100, 0.95);
        assert_eq!(hi, 1.0);
        let (lo, hi) = wilson_ci(50, 100, 0.95);
        assert!((0.5 - lo - (hi - 0.5)).abs() < 1e-12, "symmetric about 0.5");
        assert!(((hi - lo) - 0.19).abs() < 0.005, "width {}", hi - lo);
    }

    proptest! {
        #[test]
        fn wilson_is_ordered_and_contained(s in 0u64..=500, n in 1u64..=500, c in 0.5f64..0.999) {
            prop_assume!(s <= n);
            let (lo, hi) = wilson_ci(s, n, c);
            prop_assert!((0.0..=1.0).contains(&lo));
            prop_assert!((0.0..=1.0).contains(&hi));
            prop_assert!(lo <= hi);
            // Wider confidence means a wider interval.
            let (lo2, hi2) = wilson_ci(s, n, (c + 0.999) / 2.0);
            prop_assert!(lo2 <= lo + 1e-12 && hi2 + 1e-12 >= hi);
        }
    }
}
