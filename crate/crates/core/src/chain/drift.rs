//! Drift and variance of the log clade size, and trend diagnostics of `a(n, .)`.

use serde::Serialize;

use crate::constants::ZETA2;
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::split::SplitLaw;

/// `a(j) = sum_{i<j} (log i - log j) / (j - i)` and
/// `b(j) = sum_{i<j} (log i - log j)^2 / (j - i)`: jump rate moments of `log X_t` at
/// state `j`.
pub fn drift_variance(j: usize) -> Result<(f64, f64)> {
    if j < 2 {
        return Err(Error::domain(format!("drift needs j >= 2, got {j}")));
    }
    let jf = j as f64;
    let (mut a, mut b) = (CompensatedSum::new(), CompensatedSum::new());
    for d in 1..j {
        let df = d as f64;
        // log(i / j) with i = j - d
        let l = (-df / jf).ln_1p();
        a.add(l / df);
        b.add(l * l / df);
    }
    Ok((a.value(), b.value()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct C1Trend {
    pub n: usize,
    /// `(j, b_j)` with `b_j = zeta(2) j a(n, j) - log j`.
    pub points: Vec<(usize, f64)>,
    /// `zeta(2) j a(n, j) / log j` on the same grid.
    pub ratios: Vec<f64>,
    /// Mean of `b_j` over the upper half of the grid.
    pub tail_average: f64,
}

/// Log-spaced grid from 10 to `n / 20`, avoiding the horizon where `a(n, j)` bends.
pub fn default_c1_grid(n: usize) -> Vec<usize> {
    let hi = (n / 20).max(11);
    let steps = 24;
    let mut g: Vec<usize> = (0..=steps)
        .map(|k| (10f64 * (hi as f64 / 10.0).powf(k as f64 / steps as f64)).round() as usize)
        .collect();
    g.dedup();
    g
}

pub fn c1_trend(a: &[f64], grid: &[usize]) -> Result<C1Trend> {
    let n = a.len().saturating_sub(1);
    if grid.is_empty() || grid.iter().any(|&j| j < 2 || j > n) {
        return Err(Error::domain("grid points must lie in 2..=n"));
    }
    let points: Vec<(usize, f64)> = grid
        .iter()
        .map(|&j| (j, ZETA2 * j as f64 * a[j] - (j as f64).ln()))
        .collect();
    let ratios = grid
        .iter()
        .map(|&j| ZETA2 * j as f64 * a[j] / (j as f64).ln())
        .collect();
    let upper = &points[points.len() / 2..];
    let tail_average = upper.iter().map(|p| p.1).sum::<f64>() / upper.len() as f64;
    Ok(C1Trend {
        n,
        points,
        ratios,
        tail_average,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsumPoint {
    pub m: usize,
    /// `sum_{j=2..m} a_j / log j` divided by `(6/pi^2) log m`.
    pub log_ratio: f64,
    /// `sum_{j=2..m} a_j / h[j-1] - t[m]`, bounded in `m`.
    pub h_gap: f64,
}

/// Both forms of the partial sums of `a_j`, at the grid points.
pub fn asum_trend(a: &[f64], t: &[f64], grid: &[usize]) -> Result<Vec<AsumPoint>> {
    let n = a.len().saturating_sub(1);
    if grid.iter().any(|&m| m < 3 || m > n || m >= t.len()) {
        return Err(Error::domain("grid points must lie in 3..=n"));
    }
    let law = SplitLaw::for_size(n);
    let mut out = Vec::with_capacity(grid.len());
    let (mut sl, mut sh) = (CompensatedSum::new(), CompensatedSum::new());
    let mut j = 2;
    let mut sorted = grid.to_vec();
    sorted.sort_unstable();
    for m in sorted {
        while j <= m {
            sl.add(a[j] / (j as f64).ln());
            sh.add(a[j] / law.h(j - 1));
            j += 1;
        }
        out.push(AsumPoint {
            m,
            log_ratio: sl.value() / ((m as f64).ln() / ZETA2),
            h_gap: sh.value() - t[m],
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_term() {
        let (a, b) = drift_variance(2).unwrap();
        let l2 = std::f64::consts::LN_2;
        assert!((a + l2).abs() < 1e-15);
        assert!((b - l2 * l2).abs() < 1e-15);
        assert!(drift_variance(1).is_err());
    }

    #[test]
    fn grid_is_increasing() {
        let g = default_c1_grid(50_000);
        assert_eq!(g[0], 10);
        assert_eq!(*g.last().unwrap(), 2500);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }
}
