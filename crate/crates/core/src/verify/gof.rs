//! Goodness-of-fit tests: one- and two-sample Kolmogorov-Smirnov, a discrete KS
//! variant for integer-valued samples, and Pearson's chi-square.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::TestResult;
use crate::error::{Error, Result};

/// `P(K > x)` for the Kolmogorov distribution.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.0 {
        // P(K <= x) = sqrt(2 pi)/x * sum_k exp(-(2k-1)^2 pi^2 / (8 x^2)); converges fast for small x
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let mut cdf = 0.0;
        for k in 1..=20 {
            let j = (2 * k - 1) as f64;
            cdf += (-(j * j) * pi2 / (8.0 * x * x)).exp();
        }
        cdf *= (2.0 * std::f64::consts::PI).sqrt() / x;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    // 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2)
    let mut sf = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = 2.0 * (-2.0 * kf * kf * x * x).exp();
        if k % 2 == 1 {
            sf += term;
        } else {
            sf -= term;
        }
        if term < 1e-18 {
            break;
        }
    }
    sf.clamp(0.0, 1.0)
}

/// The one-sample KS statistic `sup |F_m - F|` of continuous samples against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::domain("KS statistic of an empty sample"));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let m = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / m - f).max(f - i as f64 / m);
    }
    Ok(d)
}

/// One-sample KS test with the asymptotic Kolmogorov p-value.
pub fn ks_test<F: Fn(f64) -> f64>(
    name: &str,
    samples: &[f64],
    cdf: F,
    threshold: f64,
) -> Result<TestResult> {
    let d = ks_statistic(samples, cdf)?;
    let p = kolmogorov_sf((samples.len() as f64).sqrt() * d);
    Ok(TestResult::new(name, d, p, threshold))
}

/// KS statistic for integer-valued samples against a discrete cdf `F(k) = P(X <= k)`.
pub fn ks_statistic_discrete<F: Fn(i64) -> f64>(samples: &[i64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::domain("KS statistic of an empty sample"));
    }
    let mut xs = samples.to_vec();
    xs.sort_unstable();
    let m = xs.len() as f64;
    let mut d: f64 = cdf(xs[0] - 1).abs();
    let mut i = 0;
    while i < xs.len() {
        let x = xs[i];
        let mut j = i;
        while j < xs.len() && xs[j] == x {
            j += 1;
        }
        // the empirical cdf just below x is i/m, at x it is j/m
        d = d.max((i as f64 / m - cdf(x - 1)).abs());
        d = d.max((j as f64 / m - cdf(x)).abs());
        i = j;
    }
    Ok(d)
}

/// KS test for integer-valued samples; the continuous p-value is conservative here.
pub fn ks_test_discrete<F: Fn(i64) -> f64>(
    name: &str,
    samples: &[i64],
    cdf: F,
    threshold: f64,
) -> Result<TestResult> {
    let d = ks_statistic_discrete(samples, cdf)?;
    let p = kolmogorov_sf((samples.len() as f64).sqrt() * d);
    Ok(TestResult::new(name, d, p, threshold))
}

/// Two-sample KS test.
pub fn ks_two_sample(name: &str, xs: &[f64], ys: &[f64], threshold: f64) -> Result<TestResult> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::domain("two-sample KS with an empty sample"));
    }
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(|x, y| x.total_cmp(y));
    b.sort_by(|x, y| x.total_cmp(y));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
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
    let en = (na * nb / (na + nb)).sqrt();
    Ok(TestResult::new(name, d, kolmogorov_sf(en * d), threshold))
}

/// Pearson's chi-square test of observed counts against cell probabilities.
///
/// Degrees of freedom are `cells - 1`. Cell probabilities are renormalised if they do
/// not sum to one exactly.
pub fn chi_square(
    name: &str,
    observed: &[u64],
    expected: &[f64],
    threshold: f64,
) -> Result<TestResult> {
    if observed.len() != expected.len() {
        return Err(Error::domain("observed and expected cell counts differ"));
    }
    if observed.len() < 2 {
        return Err(Error::domain("chi-square needs at least two cells"));
    }
    if let Some(p) = expected.iter().find(|&&p| !(p > 0.0)) {
        return Err(Error::domain(format!("expected cell probability {p} is not positive")));
    }
    let total: u64 = observed.iter().sum();
    if total < 50 {
        return Err(Error::domain(format!("chi-square needs at least 50 observations, got {total}")));
    }
    let psum: f64 = expected.iter().sum();
    let t = total as f64;
    let stat: f64 = observed
        .iter()
        .zip(expected)
        .map(|(&o, &p)| {
            let e = t * p / psum;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let df = (observed.len() - 1) as f64;
    let p = ChiSquared::new(df)
        .map_err(|e| Error::domain(e.to_string()))?
        .sf(stat);
    Ok(TestResult::new(name, stat, p, threshold))
}

/// Merges trailing cells until each cell expects at least `min_expected` observations.
///
/// Cells are assumed ordered; small cells anywhere are merged into their successor,
/// and a small final cell into its predecessor.
pub fn pool_cells(observed: &[u64], probs: &[f64], min_expected: f64) -> (Vec<u64>, Vec<f64>) {
    let total: u64 = observed.iter().sum();
    let t = total as f64;
    let mut out_o = Vec::new();
    let mut out_p = Vec::new();
    let (mut acc_o, mut acc_p) = (0u64, 0.0f64);
    for (&o, &p) in observed.iter().zip(probs) {
        acc_o += o;
        acc_p += p;
        if acc_p * t >= min_expected {
            out_o.push(acc_o);
            out_p.push(acc_p);
            acc_o = 0;
            acc_p = 0.0;
        }
    }
    if acc_p > 0.0 || acc_o > 0 {
        if let (Some(lo), Some(lp)) = (out_o.last_mut(), out_p.last_mut()) {
            *lo += acc_o;
            *lp += acc_p;
        } else {
            out_o.push(acc_o);
            out_p.push(acc_p);
        }
    }
    (out_o, out_p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(x: f64) -> f64 {
        x.clamp(0.0, 1.0)
    }

    #[test]
    fn quantile_grid_gives_half_step() {
        let m = 50;
        let xs: Vec<f64> = (1..=m).map(|i| (i as f64 - 0.5) / m as f64).collect();
        let d = ks_statistic(&xs, uniform).unwrap();
        assert!((d - 1.0 / (2.0 * m as f64)).abs() < 1e-15);
    }

    #[test]
    fn single_sample_at_median() {
        assert!((ks_statistic(&[0.5], uniform).unwrap() - 0.5).abs() < 1e-15);
        assert!(ks_statistic(&[], uniform).is_err());
    }

    #[test]
    fn ks_matches_brute_force_max_deviation() {
        let xs = [
            0.61, 0.05, 0.93, 0.27, 0.44, 0.88, 0.12, 0.71, 0.33, 0.99, 0.02, 0.57, 0.48, 0.8,
            0.19, 0.66, 0.37, 0.24, 0.91, 0.53,
        ];
        // brute force: scan the empirical cdf just before and at every sample point
        let m = xs.len() as f64;
        let mut brute: f64 = 0.0;
        for &x in &xs {
            let at = xs.iter().filter(|&&y| y <= x).count() as f64 / m;
            let below = xs.iter().filter(|&&y| y < x).count() as f64 / m;
            brute = brute.max((at - x).abs()).max((below - x).abs());
        }
        let d = ks_statistic(&xs, uniform).unwrap();
        assert!((d - brute).abs() < 1e-12);
    }

    #[test]
    fn kolmogorov_sf_reference_points() {
        // P(K > 1.358) ~ 0.05, P(K > 1.628) ~ 0.01
        assert!((kolmogorov_sf(1.3581) - 0.05).abs() < 2e-4);
        assert!((kolmogorov_sf(1.6276) - 0.01).abs() < 1e-4);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
        // both branches agree at the switch point
        let lo = {
            let x: f64 = 1.0 - 1e-12;
            kolmogorov_sf(x)
        };
        assert!((lo - kolmogorov_sf(1.0)).abs() < 1e-9);
    }

    #[test]
    fn discrete_ks_exact_fit_is_zero() {
        // a fair die observed exactly uniformly
        let xs: Vec<i64> = (1..=6).flat_map(|k| std::iter::repeat_n(k, 10)).collect();
        let cdf = |k: i64| (k.clamp(0, 6) as f64) / 6.0;
        assert!(ks_statistic_discrete(&xs, cdf).unwrap() < 1e-15);
        let ys: Vec<i64> = vec![1; 60];
        assert!((ks_statistic_discrete(&ys, cdf).unwrap() - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn two_sample_identical_and_disjoint() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [4.0, 3.0, 2.0, 1.0];
        assert_eq!(ks_two_sample("s", &a, &b, 0.01).unwrap().statistic, 0.0);
        let c = [10.0, 11.0, 12.0, 13.0];
        assert_eq!(ks_two_sample("s", &a, &c, 0.01).unwrap().statistic, 1.0);
        let x = [1.0, 1.0, 4.0, 4.0];
        let y = [1.0, 1.0, 1.0, 4.0];
        assert!((ks_two_sample("s", &x, &y, 0.01).unwrap().statistic - 0.25).abs() < 1e-15);
    }

    #[test]
    fn chi_square_proportional_counts() {
        let r = chi_square("c", &[25, 50, 25], &[0.25, 0.5, 0.25], 1e-3).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        assert!(r.pass);
    }

    #[test]
    fn chi_square_two_cells_matches_binomial_normal_approximation() {
        // 2 cells: X^2 = z^2 with z the standardised binomial count, so p = P(|Z| > |z|)
        let (n, p) = (1000u64, 0.3);
        let k = 330u64;
        let r = chi_square("c", &[k, n - k], &[p, 1.0 - p], 1e-3).unwrap();
        let z = (k as f64 - n as f64 * p) / (n as f64 * p * (1.0 - p)).sqrt();
        assert!((r.statistic - z * z).abs() < 1e-10);
        let normal = statrs::distribution::Normal::new(0.0, 1.0).unwrap();
        let p_norm = 2.0 * normal.sf(z.abs());
        assert!((r.p_value - p_norm).abs() < 1e-10);
    }

    #[test]
    fn chi_square_errors() {
        assert!(chi_square("c", &[30, 30], &[0.5, 0.0], 1e-3).is_err());
        assert!(chi_square("c", &[10, 10], &[0.5, 0.5], 1e-3).is_err());
        assert!(chi_square("c", &[60], &[1.0], 1e-3).is_err());
    }

    #[test]
    fn pooling_respects_minimum() {
        let (o, p) = pool_cells(&[50, 30, 3, 2, 1], &[0.5, 0.3, 0.1, 0.06, 0.04], 5.0);
        assert_eq!(o.iter().sum::<u64>(), 86);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&q| q * 86.0 >= 5.0));
    }
}
