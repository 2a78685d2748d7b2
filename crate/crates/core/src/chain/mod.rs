//! The size-bias chain: clade sizes along the root path of a uniform random leaf.
//!
//! From state `m >= 2` the chain jumps to `i < m` at rate `1/(m - i)`, so it holds for an
//! Exponential(`h[m-1]`) time and then moves with law `q*(m, .)`. State 1 is absorbing.
//! The total hold is the leaf height `D_n`; the number of jumps is the hop count.

mod conv;
mod drift;
mod fringe;
mod occupancy;
mod recurrence;

pub use drift::{asum_trend, c1_trend, default_c1_grid, drift_variance, AsumPoint, C1Trend};
pub use fringe::{fringe_up_pmf, sample_fringe, FringeSampler, FringeSkeleton, FringeUp};
pub use occupancy::{
    length_constant, occupancy, occupancy_fast, stationarity_residual, LengthConstant,
};
pub use recurrence::{
    depth_mean_fast, depth_mean_recurrence, depth_second_moment_recurrence,
    hop_mean_recurrence, moments, Moments, NumericTable,
};

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::split::SplitLaw;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainMode {
    Discrete,
    Continuous,
}

/// A trajectory `n = s0 > s1 > .. > 1`, with one hold per non-absorbing state in
/// continuous mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainPath {
    pub states: Vec<usize>,
    pub holds: Option<Vec<f64>>,
}

impl ChainPath {
    /// Number of jumps, `D_n^hop`.
    pub fn hops(&self) -> usize {
        self.states.len() - 1
    }

    /// Total hold `D_n` (continuous mode).
    pub fn total_hold(&self) -> Option<f64> {
        self.holds.as_ref().map(|h| h.iter().sum())
    }

    pub fn visits(&self, i: usize) -> bool {
        self.states.binary_search_by(|s| i.cmp(s)).is_ok()
    }
}

/// Runs the chain from `n` to absorption.
pub fn simulate_chain<R: Rng + ?Sized>(n: usize, rng: &mut R, mode: ChainMode) -> Result<ChainPath> {
    if n == 0 {
        return Err(Error::domain("the chain starts at a size >= 1"));
    }
    let law = SplitLaw::for_size(n);
    law.check_size(n)?;
    let mut states = vec![n];
    let mut holds = Vec::new();
    let mut m = n;
    while m > 1 {
        if mode == ChainMode::Continuous {
            let e: f64 = rng.sample(Exp1);
            holds.push(e / law.h(m - 1));
        }
        m = law.draw_sizebias(m, rng);
        states.push(m);
    }
    Ok(ChainPath {
        states,
        holds: (mode == ChainMode::Continuous).then_some(holds),
    })
}

/// Height of a uniform leaf of a size-`m` clade, by running the chain from `m`.
fn chain_height<R: Rng + ?Sized>(law: &SplitLaw, mut m: usize, rng: &mut R) -> f64 {
    let mut height = 0.0;
    while m > 1 {
        let e: f64 = rng.sample(Exp1);
        height += e / law.h(m - 1);
        m = law.draw_sizebias(m, rng);
    }
    height
}

/// Heights of two independent uniform leaves of one CTCS(n) tree.
///
/// Only the clades on the two root paths are generated. Returns `None` when both draws
/// hit the same leaf (probability `1/n`); callers discard those pairs.
pub fn leaf_pair_heights<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Option<(f64, f64)>> {
    if n == 0 {
        return Err(Error::domain("a tree needs a leaf"));
    }
    let law = SplitLaw::for_size(n);
    law.check_size(n)?;
    let (mut m, mut shared) = (n, 0.0);
    while m > 1 {
        let e: f64 = rng.sample(Exp1);
        shared += e / law.h(m - 1);
        let i = law.draw_split(m, rng);
        let a = rng.random_range(0..m) < i;
        let b = rng.random_range(0..m) < i;
        if a == b {
            m = if a { i } else { m - i };
            continue;
        }
        let (ma, mb) = if a { (i, m - i) } else { (m - i, i) };
        let da = shared + chain_height(&law, ma, rng);
        let db = shared + chain_height(&law, mb, rng);
        return Ok(Some((da, db)));
    }
    Ok(None)
}
