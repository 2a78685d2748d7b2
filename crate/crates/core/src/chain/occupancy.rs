//! Occupation probabilities `a(n, i)`: the chain started at `n` ever visits `i`.
//!
//! Backward in the state: `v(n) = 1` and
//! `v(m) = sum_{j > m} v(j) q*(j, m) = sum_{j > m} (v(j) / h[j-1]) / (j - m)`.

use serde::Serialize;

use crate::constants::ZETA2;
use crate::error::{Error, Result};
use crate::numeric::{cdot, csum};
use crate::split::SplitLaw;

/// `a(n, i)` for `i = 0..=n` (entry 0 is zero; `a(n, 1) = 1`). Reference `O(n^2)`.
pub fn occupancy(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::domain("occupancy needs n >= 1"));
    }
    let law = SplitLaw::for_size(n);
    law.check_size(n)?;
    let inv: Vec<f64> = (0..=n).map(|d| if d == 0 { 0.0 } else { 1.0 / d as f64 }).collect();
    let mut a = vec![0.0; n + 1];
    // u[j] = a[j] / h[j-1]
    let mut u = vec![0.0; n + 1];
    a[n] = 1.0;
    if n >= 2 {
        u[n] = 1.0 / law.h(n - 1);
    }
    for m in (2..n).rev() {
        a[m] = cdot(&u[m + 1..=n], &inv[1..=n - m]);
        u[m] = a[m] / law.h(m - 1);
    }
    // absorption is certain
    a[1] = 1.0;
    Ok(a)
}

/// Same as [`occupancy`] by online FFT convolution, `O(n log^2 n)`.
pub fn occupancy_fast(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::domain("occupancy needs n >= 1"));
    }
    let law = SplitLaw::for_size(n);
    law.check_size(n)?;
    let mut a = vec![0.0; n + 1];
    a[1] = 1.0;
    if n >= 2 {
        // index k = n - m over m = n..=2; x[k] = v(m) / h[m-1]
        let (_, s) = super::conv::solve(n - 1, |k, s| {
            let m = n - k;
            let v = if k == 0 { 1.0 } else { s };
            v / law.h(m - 1)
        });
        a[n] = 1.0;
        for (k, &sk) in s.iter().enumerate().skip(1) {
            a[n - k] = sk;
        }
    }
    Ok(a)
}

/// `|a(n, i) - sum_{j > i} a(n, j) (q(j, i) + q(j, j - i)) i / j|`, the defect in the
/// stationarity system of the limit `a_i`.
pub fn stationarity_residual(a: &[f64], i: usize) -> Result<f64> {
    let n = a.len() - 1;
    if i == 0 || i >= n {
        return Err(Error::domain(format!("state {i} outside 1..{n}")));
    }
    let law = SplitLaw::for_size(n);
    let mut terms = Vec::with_capacity(n - i);
    for j in i + 1..=n {
        let q = law.split_pmf(j, i)? + law.split_pmf(j, j - i)?;
        terms.push(a[j] * q * i as f64 / j as f64);
    }
    Ok((a[i] - csum(terms)).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LengthConstant {
    pub n: usize,
    /// `sum_{m=2..n} a(n, m) / (m h[m-1])`.
    pub value: f64,
    /// Rough size of the omitted tail `m > n`, from `a_m ~ (6/pi^2) log(m) / m`.
    pub tail_estimate: f64,
}

/// The length constant from an occupancy vector `a(n, .)`.
///
/// At finite `n` this is exactly `E[L_n] / n`: each clade of size `m` on a uniform leaf's
/// path contributes its Exponential(`h[m-1]`) hold, shared by its `m` leaves.
pub fn length_constant(a: &[f64]) -> Result<LengthConstant> {
    let n = a.len().saturating_sub(1);
    if n < 2 {
        return Err(Error::domain("length constant needs n >= 2"));
    }
    let law = SplitLaw::for_size(n);
    let value = csum((2..=n).map(|m| a[m] / (m as f64 * law.h(m - 1))));
    let ln = (n as f64).ln();
    let tail_estimate = ln / (ZETA2 * n as f64 * (ln + crate::constants::EULER_GAMMA));
    Ok(LengthConstant {
        n,
        value,
        tail_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_values() {
        let a = occupancy(3).unwrap();
        assert_eq!(a, vec![0.0, 1.0, 2.0 / 3.0, 1.0]);
        let a = occupancy(4).unwrap();
        assert!((a[2] - 7.0 / 11.0).abs() < 1e-15);
        assert_eq!(occupancy(1).unwrap(), vec![0.0, 1.0]);
        assert_eq!(occupancy(2).unwrap(), vec![0.0, 1.0, 1.0]);
        assert!(occupancy(0).is_err());
    }

    #[test]
    fn absorption_mass_is_one() {
        // v(1) computed by the same recursion equals 1
        let n = 500;
        let a = occupancy(n).unwrap();
        let law = SplitLaw::shared();
        let v1 = csum((2..=n).map(|j| a[j] / law.h(j - 1) / (j - 1) as f64));
        assert!((v1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fast_matches_reference() {
        for n in [1, 2, 3, 50, 64, 65, 1500] {
            let a = occupancy(n).unwrap();
            let b = occupancy_fast(n).unwrap();
            for i in 1..=n {
                assert!((a[i] - b[i]).abs() < 1e-12, "n = {n}, i = {i}");
            }
        }
    }

    #[test]
    fn length_constant_two() {
        let l = length_constant(&occupancy(2).unwrap()).unwrap();
        assert_eq!(l.value, 0.5);
        assert!(length_constant(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn finite_system_is_exact() {
        let a = occupancy(2000).unwrap();
        for i in 1..=30 {
            assert!(stationarity_residual(&a, i).unwrap() < 1e-12);
        }
    }
}
