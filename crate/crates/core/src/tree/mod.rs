//! Clade trees and their samplers.
//!
//! A [`CladeTree`] on `n` leaves is stored as preorder arrays. Node `v` of size `m >= 2`
//! has its left child at `v + 1` and its right child at `v + 2 * size(v + 1)`; a tree on
//! `n` leaves has `2n - 1` nodes. Leaves are identified by their interval position
//! `0..n` (left to right), which is also the order in which preorder visits them.
//!
//! In continuous time every internal clade carries a hold time: the time between the
//! split that created it and its own split. Leaves carry hold `0`.

mod bud;
mod io;
mod spanning;

pub use bud::{BudEdge, BudTree, EdgeEnd, SideBud};
pub use spanning::{prune, spanning_tree, SpanningTree};

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::split::SplitLaw;

/// Which child a singleton hangs from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Side {
    Left,
    Right,
}

/// A binary split tree in preorder, with optional hold times.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CladeTree {
    sizes: Vec<u32>,
    holds: Option<Vec<f64>>,
}

impl CladeTree {
    /// The one-leaf tree.
    pub fn leaf() -> Self {
        CladeTree {
            sizes: vec![1],
            holds: None,
        }
    }

    /// Builds a tree from preorder sizes and optional per-node holds, validating both.
    pub fn from_parts(sizes: Vec<u32>, holds: Option<Vec<f64>>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::domain("a tree needs at least one node"));
        }
        let mut expect = vec![sizes[0]];
        let mut v = 0;
        while let Some(m) = expect.pop() {
            let Some(&s) = sizes.get(v) else {
                return Err(Error::domain(format!("preorder ends early at node {v}")));
            };
            if s != m || s == 0 {
                return Err(Error::domain(format!("node {v} has size {s}, expected {m}")));
            }
            if s >= 2 {
                let Some(&l) = sizes.get(v + 1) else {
                    return Err(Error::domain(format!("node {v} has no children")));
                };
                if l == 0 || l >= s {
                    return Err(Error::domain(format!("node {v} splits {s} into {l}")));
                }
                expect.push(s - l);
                expect.push(l);
            }
            v += 1;
        }
        if v != sizes.len() {
            return Err(Error::domain(format!(
                "{} trailing nodes after the root subtree",
                sizes.len() - v
            )));
        }
        if let Some(h) = &holds {
            if h.len() != sizes.len() {
                return Err(Error::domain("holds and sizes differ in length"));
            }
            for (v, (&s, &t)) in sizes.iter().zip(h).enumerate() {
                if !t.is_finite() || t < 0.0 || (s == 1 && t != 0.0) {
                    return Err(Error::domain(format!("node {v} has invalid hold {t}")));
                }
            }
        }
        Ok(CladeTree { sizes, holds })
    }

    pub fn n_leaves(&self) -> usize {
        self.sizes[0] as usize
    }

    pub fn node_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[u32] {
        &self.sizes
    }

    pub fn holds(&self) -> Option<&[f64]> {
        self.holds.as_deref()
    }

    pub fn has_times(&self) -> bool {
        self.holds.is_some()
    }

    #[inline]
    pub fn size(&self, v: usize) -> usize {
        self.sizes[v] as usize
    }

    #[inline]
    pub fn is_leaf(&self, v: usize) -> bool {
        self.sizes[v] == 1
    }

    /// Children `(left, right)` of an internal node.
    #[inline]
    pub fn children(&self, v: usize) -> Option<(usize, usize)> {
        if self.is_leaf(v) {
            None
        } else {
            Some((v + 1, v + 2 * self.size(v + 1)))
        }
    }

    /// Size of the left child (0 for a leaf).
    pub fn left_size(&self, v: usize) -> usize {
        if self.is_leaf(v) {
            0
        } else {
            self.size(v + 1)
        }
    }

    pub fn hold(&self, v: usize) -> Option<f64> {
        self.holds.as_ref().map(|h| h[v])
    }

    /// Node one past the last node of the subtree at `v`.
    #[inline]
    pub fn subtree_end(&self, v: usize) -> usize {
        v + 2 * self.size(v) - 1
    }

    /// The same shape without times.
    pub fn forget_times(&self) -> CladeTree {
        CladeTree {
            sizes: self.sizes.clone(),
            holds: None,
        }
    }

    pub(crate) fn require_times(&self) -> Result<&[f64]> {
        self.holds
            .as_deref()
            .ok_or_else(|| Error::domain("operation needs a tree with hold times"))
    }

    /// Parent of every node (`usize::MAX` for the root).
    pub fn parents(&self) -> Vec<usize> {
        let mut p = vec![usize::MAX; self.node_count()];
        for v in 0..self.node_count() {
            if let Some((l, r)) = self.children(v) {
                p[l] = v;
                p[r] = v;
            }
        }
        p
    }

    /// Height at which each clade comes into existence (0 for the root).
    pub fn births(&self) -> Result<Vec<f64>> {
        let holds = self.require_times()?;
        let mut b = vec![0.0; self.node_count()];
        for v in 0..self.node_count() {
            if let Some((l, r)) = self.children(v) {
                let t = b[v] + holds[v];
                b[l] = t;
                b[r] = t;
            }
        }
        Ok(b)
    }

    /// Node index of each leaf, by interval position.
    pub fn leaf_nodes(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&v| self.is_leaf(v)).collect()
    }

    /// Number of edges on the root path of each node.
    pub fn depths(&self) -> Vec<u32> {
        let mut d = vec![0; self.node_count()];
        for v in 0..self.node_count() {
            if let Some((l, r)) = self.children(v) {
                d[l] = d[v] + 1;
                d[r] = d[v] + 1;
            }
        }
        d
    }

    /// Sizes of the clades alive at height `t`, in left-to-right order.
    ///
    /// A clade is alive on `[birth, birth + hold)`; a leaf from its birth on.
    pub fn clades_at(&self, t: f64) -> Result<Vec<usize>> {
        let holds = self.require_times()?;
        let mut out = Vec::new();
        let mut stack = vec![(0usize, 0.0f64)];
        while let Some((v, birth)) = stack.pop() {
            match self.children(v) {
                Some((l, r)) if t >= birth + holds[v] => {
                    let end = birth + holds[v];
                    stack.push((r, end));
                    stack.push((l, end));
                }
                _ => out.push(self.size(v)),
            }
        }
        Ok(out)
    }

    /// Sum of hold times over internal clades: the tree length `L_n`.
    pub fn total_length(&self) -> Result<f64> {
        Ok(crate::numeric::pairwise_sum(self.require_times()?))
    }
}

fn generate<R: Rng + ?Sized>(n: usize, rng: &mut R, timed: bool) -> Result<CladeTree> {
    if n == 0 {
        return Err(Error::domain("a tree needs at least one leaf"));
    }
    let law = SplitLaw::for_size(n);
    law.check_size(n)?;
    if n > u32::MAX as usize / 2 {
        return Err(Error::domain(format!("n = {n} too large")));
    }
    let mut sizes = Vec::with_capacity(2 * n - 1);
    let mut holds = Vec::with_capacity(if timed { 2 * n - 1 } else { 0 });
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        sizes.push(m as u32);
        if m == 1 {
            if timed {
                holds.push(0.0);
            }
            continue;
        }
        if timed {
            let e: f64 = rng.sample(Exp1);
            holds.push(e / law.h(m - 1));
        }
        let i = law.draw_split(m, rng);
        stack.push(m - i);
        stack.push(i);
    }
    Ok(CladeTree {
        sizes,
        holds: timed.then_some(holds),
    })
}

/// Samples the discrete-time tree DTCS(n).
pub fn sample_dtcs<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CladeTree> {
    generate(n, rng, false)
}

/// Samples the continuous-time tree CTCS(n): a size-`m` clade holds for an
/// Exponential(`h[m-1]`) time before splitting.
pub fn sample_ctcs<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CladeTree> {
    generate(n, rng, true)
}

/// Samples the branchpoint height of two distinct uniform leaves of CTCS(n) without
/// building the tree: only the clades on the common root path are generated.
pub fn sample_branchpoint_height<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain("a branchpoint needs two leaves"));
    }
    let law = SplitLaw::for_size(n);
    law.check_size(n)?;
    let u = rng.random_range(0..n);
    let mut v = rng.random_range(0..n - 1);
    if v >= u {
        v += 1;
    }
    let (mut lo, mut m, mut height) = (0usize, n, 0.0);
    loop {
        let e: f64 = rng.sample(Exp1);
        height += e / law.h(m - 1);
        let i = law.draw_split(m, rng);
        let (lu, lv) = (u < lo + i, v < lo + i);
        if lu != lv {
            return Ok(height);
        }
        if lu {
            m = i;
        } else {
            lo += i;
            m -= i;
        }
    }
}
