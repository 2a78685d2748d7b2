//! The critical split law and its size-biased version.
//!
//! A clade of `n` leaves splits into a left part of `i` and a right part of `n - i`
//! leaves with probability
//!
//! ```text
//! q(n, i) = n / (2 h(n-1)) * 1 / (i (n - i)),   1 <= i <= n - 1,
//! ```
//!
//! where `h(k)` is the k-th harmonic number. Following a uniform random leaf down the
//! tree, the clade sizes form a Markov chain with the size-biased kernel
//! `q*(m, i) = (2i/m) q(m, i) = 1 / (h(m-1) (m - i))`.
//!
//! Both laws are sampled exactly by inverting the harmonic prefix table: draw `J` with
//! `P(J = j)` proportional to `1/j` on `{1, .., n-1}`. Then `J` or `n - J` (fair coin) has law
//! `q(n, .)`, because `1/(i(n-i)) = (1/i + 1/(n-i)) / n`, and `m - J` has law `q*(m, .)`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Default largest clade size supported by a [`SplitLaw`].
pub const DEFAULT_N_MAX: usize = 200_000;

/// Reference constants of the critical model.
pub mod constants {
    /// zeta(2) = pi^2 / 6.
    pub const ZETA2: f64 = std::f64::consts::PI * std::f64::consts::PI / 6.0;
    /// Apery's constant zeta(3).
    pub const ZETA3: f64 = 1.202_056_903_159_594_3;
    /// Euler-Mascheroni constant.
    pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    /// Leading coefficient of the mean leaf height, 1 / zeta(2) = 6 / pi^2.
    pub const MU: f64 = 1.0 / ZETA2;
    /// Variance rate of the log-clade-size process, 2 zeta(3).
    pub const SIGMA2: f64 = 2.0 * ZETA3;
    /// Limit correlation of two random leaf heights in one tree, gamma zeta(2) / (2 zeta(3)).
    pub const R_INF: f64 = EULER_GAMMA * ZETA2 / (2.0 * ZETA3);
    /// Conjectured growth constant of the maximal leaf height, 1 + mu + mu^3 sigma^2 / 2.
    pub const C_HEIGHT: f64 = 1.0 + MU + MU * MU * MU * SIGMA2 / 2.0;
    /// Coefficient of log n in the leaf-height variance, 2 zeta(3) / zeta(2)^3.
    pub const VAR_CONST: f64 = 2.0 * ZETA3 / (ZETA2 * ZETA2 * ZETA2);
    /// Published numerical estimate of the constant term in the mean leaf height.
    /// Reference value only: never used to compute anything.
    pub const C0_REPORTED: f64 = 0.795_155_660_4;
    /// Published estimate of the second-order constant of the occupation probabilities.
    /// Reference value only.
    pub const C1_REPORTED: f64 = 0.58;
    /// Published estimate of the length constant. Reference value only.
    pub const ELL_REPORTED: f64 = 0.608;
}

/// Harmonic numbers `h[k] = 1 + 1/2 + ... + 1/k` for `k = 0..=n_max`, `h[0] = 0`.
#[derive(Debug, Clone)]
pub struct HarmonicTable {
    h: Vec<f64>,
}

impl HarmonicTable {
    pub fn new(n_max: usize) -> Self {
        let mut h = Vec::with_capacity(n_max + 1);
        h.push(0.0);
        let mut acc = CompensatedSum::new();
        for k in 1..=n_max {
            acc.add(1.0 / k as f64);
            h.push(acc.value());
        }
        HarmonicTable { h }
    }

    /// Largest index stored.
    pub fn n_max(&self) -> usize {
        self.h.len() - 1
    }

    #[inline]
    pub fn get(&self, k: usize) -> f64 {
        self.h[k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.h
    }

    /// Draws `J` in `1..=k` with `P(J = j) = 1 / (j h[k])`.
    #[inline]
    pub fn sample_harmonic<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> usize {
        debug_assert!(k >= 1 && k <= self.n_max());
        let u = rng.random::<f64>() * self.h[k];
        // smallest j with h[j] > u
        let j = self.h[1..=k].partition_point(|&x| x <= u) + 1;
        j.min(k)
    }
}

/// The critical split law and the size-bias kernel over clades of size `2..=n_max`.
#[derive(Debug, Clone)]
pub struct SplitLaw {
    table: HarmonicTable,
}

impl Default for SplitLaw {
    fn default() -> Self {
        SplitLaw::new(DEFAULT_N_MAX)
    }
}

impl SplitLaw {
    pub fn new(n_max: usize) -> Self {
        SplitLaw {
            table: HarmonicTable::new(n_max.max(2)),
        }
    }

    /// A process-wide law with the default capacity.
    pub fn shared() -> &'static SplitLaw {
        static LAW: std::sync::OnceLock<SplitLaw> = std::sync::OnceLock::new();
        LAW.get_or_init(SplitLaw::default)
    }

    /// A law able to handle clades of size `n`: the shared one when large enough.
    pub fn for_size(n: usize) -> std::borrow::Cow<'static, SplitLaw> {
        if n <= DEFAULT_N_MAX {
            std::borrow::Cow::Borrowed(SplitLaw::shared())
        } else {
            std::borrow::Cow::Owned(SplitLaw::new(n))
        }
    }

    pub fn n_max(&self) -> usize {
        self.table.n_max()
    }

    pub fn harmonic(&self) -> &HarmonicTable {
        &self.table
    }

    /// `h[k]`.
    #[inline]
    pub fn h(&self, k: usize) -> f64 {
        self.table.get(k)
    }

    pub(crate) fn check_size(&self, n: usize) -> Result<()> {
        if n > self.n_max() {
            return Err(Error::domain(format!(
                "clade size {n} exceeds the harmonic table capacity {}",
                self.n_max()
            )));
        }
        Ok(())
    }

    fn check_split(&self, n: usize, i: usize) -> Result<()> {
        if n < 2 {
            return Err(Error::domain(format!("split of a clade of size {n}")));
        }
        self.check_size(n)?;
        if i == 0 || i >= n {
            return Err(Error::domain(format!("split part {i} outside 1..={}", n - 1)));
        }
        Ok(())
    }

    /// `q(n, i)`.
    pub fn split_pmf(&self, n: usize, i: usize) -> Result<f64> {
        self.check_split(n, i)?;
        let (nf, i_f) = (n as f64, i as f64);
        Ok(nf / (2.0 * self.h(n - 1)) / (i_f * (nf - i_f)))
    }

    /// `q*(m, i) = 1 / (h[m-1] (m - i))`.
    pub fn sizebias_pmf(&self, m: usize, i: usize) -> Result<f64> {
        self.check_split(m, i)?;
        Ok(1.0 / (self.h(m - 1) * (m - i) as f64))
    }

    /// Draws the left part of a split of a size-`n` clade.
    pub fn sample_split<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<usize> {
        if n < 2 {
            return Err(Error::domain(format!("split of a clade of size {n}")));
        }
        self.check_size(n)?;
        Ok(self.draw_split(n, rng))
    }

    /// Draws the next state of the size-bias chain from state `m`.
    pub fn sample_sizebias<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Result<usize> {
        if m < 2 {
            return Err(Error::domain(format!("size-bias step from state {m}")));
        }
        self.check_size(m)?;
        Ok(self.draw_sizebias(m, rng))
    }

    #[inline]
    pub(crate) fn draw_split<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> usize {
        let j = self.table.sample_harmonic(n - 1, rng);
        if rng.random::<bool>() {
            j
        } else {
            n - j
        }
    }

    #[inline]
    pub(crate) fn draw_sizebias<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> usize {
        m - self.table.sample_harmonic(m - 1, rng)
    }
}

/// Tail of the limiting Levy measure of the log-size jumps: `-log(1 - e^{-a})`.
pub fn levy_tail(a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::domain(format!("levy_tail needs a > 0, got {a}")));
    }
    // -log(1 - e^{-a}) = -ln(-expm1(-a)), accurate for small and large a alike
    Ok(-(-(-a).exp_m1()).ln())
}

#[cfg(test)]
mod tests {
    use super::constants::*;
    use super::*;
    use crate::rng::stream;

    fn law() -> &'static SplitLaw {
        SplitLaw::shared()
    }

    #[test]
    fn harmonic_table_increments() {
        let t = HarmonicTable::new(100_000);
        assert_eq!(t.get(0), 0.0);
        assert_eq!(t.get(1), 1.0);
        assert_eq!(t.get(2), 1.5);
        for k in 1..=100_000 {
            let d = t.get(k) - t.get(k - 1);
            assert!(d > 0.0);
            // the difference of two rounded prefix sums is within a few ulps of h[k]
            assert!((d - 1.0 / k as f64).abs() <= 4.0 * f64::EPSILON * t.get(k));
        }
        // h_n - ln n - gamma ~ 1/(2n)
        let n = 100_000.0_f64;
        let r = t.get(100_000) - n.ln() - EULER_GAMMA;
        assert!((r - 1.0 / (2.0 * n) + 1.0 / (12.0 * n * n)).abs() < 1e-14);
    }

    #[test]
    fn reference_constant_ranges() {
        assert!(MU > 0.6079 && MU < 0.6080);
        assert!(R_INF > 0.3949 && R_INF < 0.3950);
        // 1.8779991.., which rounds to 1.878
        assert!((C_HEIGHT - 1.878).abs() < 5e-4);
        // 2 zeta(3) / zeta(2)^3 = 0.540144..
        assert!(VAR_CONST > 0.5401 && VAR_CONST < 0.5402);
        assert!((SIGMA2 - 2.404_113_806_319_188_5).abs() < 1e-15);
    }

    #[test]
    fn split_pmf_small_cases() {
        assert_eq!(law().split_pmf(2, 1).unwrap(), 1.0);
        assert!((law().split_pmf(3, 1).unwrap() - 0.5).abs() < 1e-15);
        assert!((law().split_pmf(3, 2).unwrap() - 0.5).abs() < 1e-15);
        // weights 1/3, 1/4, 1/3 normalised
        let w = [1.0 / 3.0, 1.0 / 4.0, 1.0 / 3.0];
        let tot: f64 = w.iter().sum();
        for i in 1..=3 {
            assert!((law().split_pmf(4, i).unwrap() - w[i - 1] / tot).abs() < 1e-15);
        }
        assert!((law().split_pmf(4, 2).unwrap() - 3.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn split_pmf_domain_errors() {
        assert!(law().split_pmf(1, 1).is_err());
        assert!(law().split_pmf(5, 0).is_err());
        assert!(law().split_pmf(5, 5).is_err());
        assert!(law().split_pmf(DEFAULT_N_MAX + 1, 1).is_err());
        let mut rng = stream(0);
        assert!(law().sample_split(1, &mut rng).is_err());
        assert!(law().sample_sizebias(0, &mut rng).is_err());
    }

    #[test]
    fn pmfs_normalised_symmetric_and_size_biased() {
        for n in (2..=10_000).step_by(37).chain([10_000]) {
            let ps: Vec<f64> = (1..n).map(|i| law().split_pmf(n, i).unwrap()).collect();
            assert!((crate::numeric::csum(ps.iter().copied()) - 1.0).abs() < 1e-10);
            for i in 1..n {
                assert!((ps[i - 1] - ps[n - i - 1]).abs() < 1e-15);
                let qs = law().sizebias_pmf(n, i).unwrap();
                assert!((qs - 2.0 * i as f64 / n as f64 * ps[i - 1]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sizebias_pmf_small_cases() {
        assert_eq!(law().sizebias_pmf(2, 1).unwrap(), 1.0);
        assert!((law().sizebias_pmf(3, 2).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((law().sizebias_pmf(3, 1).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let expect = [2.0 / 11.0, 3.0 / 11.0, 6.0 / 11.0];
        for i in 1..=3 {
            assert!((law().sizebias_pmf(4, i).unwrap() - expect[i - 1]).abs() < 1e-15);
        }
    }

    #[test]
    fn sum_of_squares_identity() {
        for m in 2..=1000usize {
            let lhs = crate::numeric::csum((1..m).map(|i| {
                let (mf, i_f) = (m as f64, i as f64);
                (mf * mf - i_f * i_f - (mf - i_f) * (mf - i_f)) * law().split_pmf(m, i).unwrap()
            }));
            let rhs = (m * (m - 1)) as f64 / law().h(m - 1);
            assert!((lhs - rhs).abs() < 1e-9 * rhs.max(1.0), "m={m}");
        }
    }

    #[test]
    fn degenerate_sizes_are_deterministic() {
        let mut rng = stream(3);
        for _ in 0..100 {
            assert_eq!(law().sample_split(2, &mut rng).unwrap(), 1);
            assert_eq!(law().sample_sizebias(2, &mut rng).unwrap(), 1);
        }
    }

    #[test]
    fn levy_tail_values() {
        let l2 = std::f64::consts::LN_2;
        assert!((levy_tail(l2).unwrap() - l2).abs() < 1e-15);
        // -log(1-x) = x + x^2/2 + x^3/3 + ..., x = e^{-10}
        let x = (-10.0f64).exp();
        let series = x + x * x / 2.0 + x * x * x / 3.0;
        assert!((levy_tail(10.0).unwrap() - series).abs() < 1e-12 * series);
        // leading term e^{-10}; the next one is e^{-20}/2, a relative 2.3e-5
        assert!((levy_tail(10.0).unwrap() / x - 1.0).abs() < 3e-5);
        // small a: -log(1 - e^{-a}) ~ -log a + a/2
        let a = 1e-12;
        assert!((levy_tail(a).unwrap() - (-(a.ln()) + a / 2.0)).abs() < 1e-12);
        assert!(levy_tail(0.0).is_err());
        assert!(levy_tail(-1.0).is_err());
        assert!(levy_tail(f64::NAN).is_err());
    }
}
