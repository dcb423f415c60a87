//! Goodness-of-fit helpers: one- and two-sample Kolmogorov-Smirnov tests
//! and a chi-square histogram test. Used by the SDE diagnostics and by
//! sampler-fidelity checks.

use crate::specfun;

/// Asymptotic Kolmogorov survival function Q(λ) = 2 Σ (−1)^{k−1} e^{−2k²λ²}.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Supremum distance between the empirical CDF of `sorted` and `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    let mut sup = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        sup = sup.max((f - i as f64 / n).abs()).max((f - (i as f64 + 1.0) / n).abs());
    }
    sup
}

/// One-sample KS test; sorts in place and returns the asymptotic p-value.
pub fn ks_test<F: Fn(f64) -> f64>(sample: &mut [f64], cdf: F) -> f64 {
    sample.sort_by(|a, b| a.partial_cmp(b).expect("finite sample"));
    let d = ks_statistic(sample, cdf);
    kolmogorov_survival((sample.len() as f64).sqrt() * d)
}

/// One-sample KS distance without the p-value; sorts in place.
pub fn ks_distance<F: Fn(f64) -> f64>(sample: &mut [f64], cdf: F) -> f64 {
    sample.sort_by(|a, b| a.partial_cmp(b).expect("finite sample"));
    ks_statistic(sample, cdf)
}

/// Two-sample KS test; sorts both in place, asymptotic p-value.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(|x, y| x.partial_cmp(y).expect("finite sample"));
    b.sort_by(|x, y| x.partial_cmp(y).expect("finite sample"));
    let (n, m) = (a.len(), b.len());
    let mut i = 0;
    let mut j = 0;
    let mut sup = 0.0f64;
    while i < n && j < m {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        sup = sup.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n as f64 * m as f64) / (n as f64 + m as f64);
    kolmogorov_survival(ne.sqrt() * sup)
}

/// Pearson chi-square test of observed vs expected bin counts; bins with
/// expected count below 1e-12 are skipped. Returns the p-value with
/// `observed.len() − 1 − extra_constraints` degrees of freedom.
pub fn chi_square_test(observed: &[f64], expected: &[f64], extra_constraints: usize) -> f64 {
    assert_eq!(observed.len(), expected.len());
    let mut chi2 = 0.0;
    let mut bins = 0usize;
    for (&o, &e) in observed.iter().zip(expected) {
        if e > 1e-12 {
            chi2 += (o - e) * (o - e) / e;
            bins += 1;
        }
    }
    let df = bins.saturating_sub(1 + extra_constraints).max(1) as f64;
    specfun::reg_inc_gamma_upper(0.5 * df, 0.5 * chi2).unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn kolmogorov_survival_limits() {
        assert_eq!(kolmogorov_survival(0.0), 1.0);
        assert!(kolmogorov_survival(5.0) < 1e-10);
        // Known value Q(1.0) ≈ 0.26999967.
        assert!((kolmogorov_survival(1.0) - 0.269_999_67).abs() < 1e-6);
    }

    #[test]
    fn uniform_sample_passes_ks() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let mut xs: Vec<f64> = (0..50_000).map(|_| rng.gen::<f64>()).collect();
        let p = ks_test(&mut xs, |x| x.clamp(0.0, 1.0));
        assert!(p > 0.01, "p = {p}");
    }

    #[test]
    fn shifted_sample_fails_ks() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let mut xs: Vec<f64> = (0..50_000).map(|_| 0.9 * rng.gen::<f64>()).collect();
        let p = ks_test(&mut xs, |x| x.clamp(0.0, 1.0));
        assert!(p < 1e-6);
    }

    #[test]
    fn two_sample_same_distribution() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let mut a: Vec<f64> = (0..20_000).map(|_| rng.gen::<f64>()).collect();
        let mut b: Vec<f64> = (0..20_000).map(|_| rng.gen::<f64>()).collect();
        assert!(ks_two_sample(&mut a, &mut b) > 0.01);
    }

    #[test]
    fn chi_square_detects_bias() {
        let expected = vec![100.0; 10];
        let ok = chi_square_test(&expected, &expected, 0);
        assert!(ok > 0.99);
        let mut biased = vec![100.0; 10];
        biased[0] = 200.0;
        biased[9] = 0.0;
        assert!(chi_square_test(&biased, &expected, 0) < 1e-6);
    }
}
