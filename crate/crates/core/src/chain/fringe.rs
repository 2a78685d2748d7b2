//! The fringe process: clade sizes moving up from a typical leaf.
//!
//! With occupation probabilities `a_j`, the upward chain jumps from `i` to `j > i` with
//! probability `q↑(i, j) = i a_j / (j a_i) (q(j, i) + q(j, j - i))`, and the sibling clade
//! of size `j - i` is a DTCS(j - i) tree. Here `a(n, .)` stands in for the limit `a_.`.

use std::collections::HashMap;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::split::SplitLaw;
use crate::tree::{sample_dtcs, CladeTree, Side};

/// `q↑(i, .)` over `j = i+1..=n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FringeUp {
    pub i: usize,
    pub horizon: usize,
    /// `raw[k]` is `q↑(i, i + 1 + k)` before renormalisation.
    pub raw: Vec<f64>,
    /// Total raw mass; the missing `1 - mass` lies beyond the horizon.
    pub mass: f64,
    /// Set when more than 5% of the mass is lost to truncation.
    pub warning: bool,
}

impl FringeUp {
    pub fn raw_at(&self, j: usize) -> f64 {
        if j <= self.i || j > self.horizon {
            0.0
        } else {
            self.raw[j - self.i - 1]
        }
    }

    /// Renormalised probability of `j`.
    pub fn pmf(&self, j: usize) -> f64 {
        self.raw_at(j) / self.mass
    }
}

pub fn fringe_up_pmf(i: usize, a: &[f64]) -> Result<FringeUp> {
    let n = a.len().saturating_sub(1);
    if i == 0 || i >= n {
        return Err(Error::domain(format!("fringe state {i} needs 1 <= i < horizon {n}")));
    }
    if !(a[i] > 0.0) {
        return Err(Error::domain(format!("a({n}, {i}) is not positive")));
    }
    let law = SplitLaw::for_size(n);
    let raw: Vec<f64> = (i + 1..=n)
        .map(|j| {
            let q = law.split_pmf(j, i).unwrap_or(0.0) + law.split_pmf(j, j - i).unwrap_or(0.0);
            i as f64 * a[j] / (j as f64 * a[i]) * q
        })
        .collect();
    let mass = crate::numeric::csum(raw.iter().copied());
    Ok(FringeUp {
        i,
        horizon: n,
        raw,
        mass,
        warning: mass < 0.95,
    })
}

/// Draws upward steps, caching the cumulative `q↑(i, .)` of each visited state.
#[derive(Debug, Clone)]
pub struct FringeSampler<'a> {
    a: &'a [f64],
    cdfs: HashMap<usize, Vec<f64>>,
}

impl<'a> FringeSampler<'a> {
    pub fn new(a: &'a [f64]) -> Self {
        FringeSampler {
            a,
            cdfs: HashMap::new(),
        }
    }

    pub fn horizon(&self) -> usize {
        self.a.len() - 1
    }

    /// Next size from `i`, or `None` when the draw falls beyond the horizon.
    pub fn step<R: Rng + ?Sized>(&mut self, i: usize, rng: &mut R) -> Result<Option<usize>> {
        if i >= self.horizon() {
            return Ok(None);
        }
        if !self.cdfs.contains_key(&i) {
            let up = fringe_up_pmf(i, self.a)?;
            let mut acc = 0.0;
            let cdf = up
                .raw
                .iter()
                .map(|p| {
                    acc += p;
                    acc
                })
                .collect();
            self.cdfs.insert(i, cdf);
        }
        let cdf = &self.cdfs[&i];
        let u: f64 = rng.random();
        let k = cdf.partition_point(|&c| c <= u);
        Ok((k < cdf.len()).then_some(i + 1 + k))
    }
}

/// The first `levels` steps of the fringe process.
#[derive(Debug, Clone, PartialEq)]
pub struct FringeSkeleton {
    /// `1 = s0 < s1 < ..`.
    pub sizes: Vec<usize>,
    /// Sibling clade added at each step, of size `s_j - s_{j-1}`.
    pub siblings: Vec<CladeTree>,
    /// Side of each sibling relative to the path.
    pub sides: Vec<Side>,
    /// The walk stopped early at the horizon.
    pub truncated: bool,
}

pub fn sample_fringe<R: Rng + ?Sized>(
    levels: usize,
    sampler: &mut FringeSampler,
    rng: &mut R,
) -> Result<FringeSkeleton> {
    if levels == 0 {
        return Err(Error::domain("the fringe needs at least one level"));
    }
    let mut sk = FringeSkeleton {
        sizes: vec![1],
        siblings: Vec::new(),
        sides: Vec::new(),
        truncated: false,
    };
    let mut i = 1;
    for _ in 0..levels {
        let Some(j) = sampler.step(i, rng)? else {
            sk.truncated = true;
            break;
        };
        // q(j, i) = q(j, j - i): the path clade is on either side with probability 1/2
        let side = if rng.random::<bool>() { Side::Left } else { Side::Right };
        sk.siblings.push(sample_dtcs(j - i, rng)?);
        sk.sides.push(side);
        sk.sizes.push(j);
        i = j;
    }
    Ok(sk)
}
