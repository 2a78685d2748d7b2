//! Growing CTCS(n+1) from CTCS(n) by adding one bud.
//!
//! One step picks a uniform random bud and walks from the root towards it. Along an edge
//! segment with `m` buds below, a stop occurs at rate `1/m` per unit length. A stop
//! inserts a side-bud at that point on a uniformly random side. If the walk reaches the
//! bud without stopping, the bud is extended by a new edge of Exponential(1) length
//! ending in a bud-pair.
//!
//! The walk spends a single Exponential(1) clock at rate `1/m` over the segments, so a
//! step costs one pass over the root path.

use rand::Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::tree::{BudTree, CladeTree, Side};
use crate::verify::Estimate;

/// The three ways a step can place the new bud.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum GrowthKind {
    /// Stop inside an edge: a new side-bud (`p→`).
    SideBud,
    /// The target was in a bud-pair and gets extended (`p↑`).
    BranchExtension,
    /// The target was a side-bud and gets extended (`p↗`).
    SideLeafExtension,
}

impl GrowthKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GrowthKind::SideBud => "side_bud",
            GrowthKind::BranchExtension => "branch_extension",
            GrowthKind::SideLeafExtension => "side_leaf_extension",
        }
    }
}

/// What one growth step did. Node ids refer to the [`GrowTree`] arena.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthRecord {
    pub kind: GrowthKind,
    /// The bud chosen as the walk's target.
    pub target: usize,
    /// Segment (clade node) and offset from its start, for a side-bud.
    pub stop: Option<(usize, f64)>,
    pub side: Option<Side>,
    /// Length of the new edge, for an extension.
    pub new_length: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Node {
    parent: usize,
    left: usize,
    right: usize,
    size: u32,
    hold: f64,
}

const NONE: usize = usize::MAX;

/// A mutable clade tree with parent links, the working state of the growth chain.
#[derive(Debug, Clone)]
pub struct GrowTree {
    nodes: Vec<Node>,
    root: usize,
    leaves: Vec<usize>,
}

impl GrowTree {
    /// CTCS(2): one edge of Exponential(1) length ending in a bud-pair.
    pub fn two<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let hold: f64 = rng.sample(Exp1);
        let leaf = |parent| Node {
            parent,
            left: NONE,
            right: NONE,
            size: 1,
            hold: 0.0,
        };
        GrowTree {
            nodes: vec![
                Node {
                    parent: NONE,
                    left: 1,
                    right: 2,
                    size: 2,
                    hold,
                },
                leaf(0),
                leaf(0),
            ],
            root: 0,
            leaves: vec![1, 2],
        }
    }

    /// Arena copy of a timed clade tree; node ids equal preorder indices.
    pub fn from_clade_tree(tree: &CladeTree) -> Result<Self> {
        let holds = tree.holds().ok_or_else(|| Error::domain("growth needs hold times"))?;
        if tree.n_leaves() < 2 {
            return Err(Error::domain("growth needs at least two buds"));
        }
        let parents = tree.parents();
        let nodes = (0..tree.node_count())
            .map(|v| {
                let (left, right) = tree.children(v).unwrap_or((NONE, NONE));
                Node {
                    parent: parents[v],
                    left,
                    right,
                    size: tree.size(v) as u32,
                    hold: holds[v],
                }
            })
            .collect();
        Ok(GrowTree {
            nodes,
            root: 0,
            leaves: tree.leaf_nodes(),
        })
    }

    pub fn from_bud_tree(tree: &BudTree) -> Result<Self> {
        GrowTree::from_clade_tree(&tree.to_clade_tree())
    }

    pub fn n_buds(&self) -> usize {
        self.leaves.len()
    }

    /// Preorder clade tree of the current state.
    pub fn to_clade_tree(&self) -> CladeTree {
        let n = self.n_buds();
        let mut sizes = Vec::with_capacity(2 * n - 1);
        let mut holds = Vec::with_capacity(2 * n - 1);
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            let node = &self.nodes[v];
            sizes.push(node.size);
            holds.push(node.hold);
            if node.size >= 2 {
                stack.push(node.right);
                stack.push(node.left);
            }
        }
        CladeTree::from_parts(sizes, Some(holds)).expect("grow tree stays consistent")
    }

    pub fn to_bud_tree(&self) -> BudTree {
        BudTree::from_clade_tree(&self.to_clade_tree()).expect("at least two buds")
    }

    /// Root-to-bud path of clade nodes, ending at the bud itself.
    fn path_to(&self, bud: usize) -> Vec<usize> {
        let mut path = vec![bud];
        let mut v = bud;
        while self.nodes[v].parent != NONE {
            v = self.nodes[v].parent;
            path.push(v);
        }
        path.reverse();
        path
    }

    /// Segments `(length, buds below)` crossed by the walk towards bud number `slot`.
    pub fn stop_profile(&self, slot: usize) -> StopProfile {
        let path = self.path_to(self.leaves[slot]);
        StopProfile {
            segments: path[..path.len() - 1]
                .iter()
                .map(|&v| (self.nodes[v].hold, self.nodes[v].size as usize))
                .collect(),
        }
    }

    fn new_leaf(&mut self, parent: usize) -> usize {
        self.nodes.push(Node {
            parent,
            left: NONE,
            right: NONE,
            size: 1,
            hold: 0.0,
        });
        self.nodes.len() - 1
    }

    /// One step of the inductive construction.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> GrowthRecord {
        let slot = rng.random_range(0..self.leaves.len());
        let target = self.leaves[slot];
        let path = self.path_to(target);
        let mut clock: f64 = rng.sample(Exp1);
        for (k, &c) in path[..path.len() - 1].iter().enumerate() {
            let m = self.nodes[c].size as f64;
            let cost = self.nodes[c].hold / m;
            if clock < cost {
                let offset = clock * m;
                let side = if rng.random::<bool>() { Side::Left } else { Side::Right };
                self.insert_side_bud(c, offset, side);
                for &a in &path[..k] {
                    self.nodes[a].size += 1;
                }
                return GrowthRecord {
                    kind: GrowthKind::SideBud,
                    target,
                    stop: Some((c, offset)),
                    side: Some(side),
                    new_length: None,
                };
            }
            clock -= cost;
        }
        let parent = self.nodes[target].parent;
        let kind = if self.nodes[parent].size == 2 {
            GrowthKind::BranchExtension
        } else {
            GrowthKind::SideLeafExtension
        };
        let length: f64 = rng.sample(Exp1);
        let a = self.new_leaf(target);
        let b = self.new_leaf(target);
        let t = &mut self.nodes[target];
        t.left = a;
        t.right = b;
        t.hold = length;
        t.size = 2;
        self.leaves[slot] = a;
        self.leaves.push(b);
        for &v in &path[..path.len() - 1] {
            self.nodes[v].size += 1;
        }
        GrowthRecord {
            kind,
            target,
            stop: None,
            side: None,
            new_length: Some(length),
        }
    }

    fn insert_side_bud(&mut self, c: usize, offset: f64, side: Side) {
        let parent = self.nodes[c].parent;
        let id = self.nodes.len();
        let leaf = id + 1;
        let (left, right) = match side {
            Side::Left => (leaf, c),
            Side::Right => (c, leaf),
        };
        self.nodes.push(Node {
            parent,
            left,
            right,
            size: self.nodes[c].size + 1,
            hold: offset,
        });
        self.new_leaf(id);
        self.leaves.push(leaf);
        self.nodes[c].hold -= offset;
        self.nodes[c].parent = id;
        if parent == NONE {
            self.root = id;
        } else if self.nodes[parent].left == c {
            self.nodes[parent].left = id;
        } else {
            self.nodes[parent].right = id;
        }
    }

    /// Recounts every clade size from scratch; the incremental counts must agree.
    pub fn sizes_consistent(&self) -> bool {
        let tree = self.to_clade_tree();
        let mut count = vec![0u32; self.nodes.len()];
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            order.push(v);
            if self.nodes[v].left != NONE {
                stack.push(self.nodes[v].right);
                stack.push(self.nodes[v].left);
            }
        }
        for &v in order.iter().rev() {
            let node = &self.nodes[v];
            count[v] = if node.left == NONE { 1 } else { count[node.left] + count[node.right] };
        }
        order.iter().all(|&v| count[v] == self.nodes[v].size)
            && tree.n_leaves() == self.leaves.len()
    }
}

/// The constant-rate pieces of a growth walk.
#[derive(Debug, Clone, PartialEq)]
pub struct StopProfile {
    /// `(length, m)`: stops happen at rate `1/m` along this segment.
    pub segments: Vec<(f64, usize)>,
}

impl StopProfile {
    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(|s| s.0).sum()
    }

    /// Probability of reaching the target without stopping.
    pub fn extension_probability(&self) -> f64 {
        (-self.segments.iter().map(|&(l, m)| l / m as f64).sum::<f64>()).exp()
    }

    /// Density of the stop position at distance `x` from the root.
    pub fn density(&self, x: f64) -> f64 {
        let mut spent = 0.0;
        let mut start = 0.0;
        for &(l, m) in &self.segments {
            let m = m as f64;
            if x < start + l {
                return (-(spent + (x - start) / m)).exp() / m;
            }
            spent += l / m;
            start += l;
        }
        0.0
    }
}

/// Grows CTCS(n) from CTCS(2).
pub fn grow<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<BudTree> {
    Ok(grow_tree(n, rng)?.to_bud_tree())
}

/// Like [`grow`], returning the working tree.
pub fn grow_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<GrowTree> {
    Ok(grow_traced(n, rng)?.0)
}

/// Like [`grow`], also returning the record of each step.
pub fn grow_traced<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<(GrowTree, Vec<GrowthRecord>)> {
    if n < 2 {
        return Err(Error::domain(format!("grow needs n >= 2, got {n}")));
    }
    crate::split::SplitLaw::shared().check_size(n)?;
    let mut t = GrowTree::two(rng);
    let records = (2..n).map(|_| t.step(rng)).collect();
    Ok((t, records))
}

/// Adds one bud to a bud tree.
pub fn grow_step<R: Rng + ?Sized>(tree: &BudTree, rng: &mut R) -> Result<(BudTree, GrowthRecord)> {
    let mut t = GrowTree::from_bud_tree(tree)?;
    let rec = t.step(rng);
    Ok((t.to_bud_tree(), rec))
}

/// Empirical kind frequencies at the step `n -> n + 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KindFrequencies {
    pub n: usize,
    pub branch_extension: Estimate,
    pub side_bud: Estimate,
    pub side_leaf_extension: Estimate,
    /// `p↑ + p↗`: the tree length grows by a mean-one edge.
    pub length_increase: Estimate,
    /// `2 p↗`: the number of buds in bud-pairs grows by two.
    pub pair_increase: Estimate,
}

/// Estimates the kind frequencies from `reps` independent CTCS(n) samples, each grown by
/// one step. Replicate `r` uses substream `r` of `(seed, "kinds")`.
pub fn kind_frequencies(n: usize, reps: usize, seed: u64, workers: usize) -> Result<KindFrequencies> {
    if n < 3 {
        return Err(Error::domain("kind frequencies need n >= 3"));
    }
    if reps < 2 {
        return Err(Error::domain("kind frequencies need at least two replicates"));
    }
    crate::split::SplitLaw::shared().check_size(n)?;
    let kinds = crate::rng::replicate(seed, crate::rng::domain("kinds"), reps, workers, |rng, _| {
        let t = crate::tree::sample_ctcs(n, rng).expect("size checked");
        GrowTree::from_clade_tree(&t).expect("timed").step(rng).kind
    });
    let count = |k: GrowthKind| kinds.iter().filter(|&&x| x == k).count() as u64;
    let (up, side, diag) = (
        count(GrowthKind::BranchExtension),
        count(GrowthKind::SideBud),
        count(GrowthKind::SideLeafExtension),
    );
    let r = reps as u64;
    let pair: Vec<f64> = kinds
        .iter()
        .map(|&k| if k == GrowthKind::SideLeafExtension { 2.0 } else { 0.0 })
        .collect();
    Ok(KindFrequencies {
        n,
        branch_extension: Estimate::proportion(up, r),
        side_bud: Estimate::proportion(side, r),
        side_leaf_extension: Estimate::proportion(diag, r),
        length_increase: Estimate::proportion(up + diag, r),
        pair_increase: Estimate::mean_of(&pair),
    })
}

/// Conditional law of the step CTCS(3) -> CTCS(4) given the 3-bud tree with root edge
/// segment `a` (3 buds below) and pair edge `b`.
///
/// Outcomes: `t1` side-bud on the root segment, `t2` extension of the side-bud,
/// `t3` side-bud on the pair segment, `t4` extension of a pair bud.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ctcs4Oracle {
    pub a: f64,
    pub b: f64,
    pub p: [f64; 4],
}

pub fn ctcs4_oracle(a: f64, b: f64) -> Result<Ctcs4Oracle> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::domain(format!("edge lengths must be positive, got ({a}, {b})")));
    }
    let ea = (-a / 3.0).exp();
    let eb = (-b / 2.0).exp();
    Ok(Ctcs4Oracle {
        a,
        b,
        p: [
            -(-a / 3.0).exp_m1(),
            ea / 3.0,
            2.0 / 3.0 * ea * -(-b / 2.0).exp_m1(),
            2.0 / 3.0 * ea * eb,
        ],
    })
}

impl Ctcs4Oracle {
    /// Joint density `g_i(c | a, b)` of outcome `i` (1-based) and its extra length `c`:
    /// the stop offset for `t1`/`t3`, the new edge length for `t2`/`t4`.
    pub fn density(&self, i: usize, c: f64) -> f64 {
        if c < 0.0 {
            return 0.0;
        }
        let ea = (-self.a / 3.0).exp();
        match i {
            1 if c < self.a => (-c / 3.0).exp() / 3.0,
            2 => ea * (-c).exp() / 3.0,
            3 if c < self.b => ea * (-c / 2.0).exp() / 3.0,
            4 => 2.0 / 3.0 * ea * (-self.b / 2.0).exp() * (-c).exp(),
            _ => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn two_is_ctcs2() {
        let mut rng = stream(1);
        let b = grow(2, &mut rng).unwrap();
        assert_eq!(b.shape_key(), "P");
        assert!(grow(1, &mut rng).is_err());
    }

    #[test]
    fn each_step_adds_one_bud_and_one_segment() {
        let mut rng = stream(2);
        let mut t = GrowTree::two(&mut rng);
        for k in 2..300 {
            let before = t.to_bud_tree();
            assert_eq!(before.n_buds(), k);
            assert_eq!(before.n_segments(), k - 1);
            let rec = t.step(&mut rng);
            let after = t.to_bud_tree();
            assert_eq!(after.n_buds(), k + 1);
            assert_eq!(after.n_segments(), k);
            match rec.kind {
                GrowthKind::SideBud => {
                    assert!(rec.stop.unwrap().1 > 0.0);
                    assert!((after.total_length() - before.total_length()).abs() < 1e-9);
                }
                _ => {
                    let d = after.total_length() - before.total_length();
                    assert!((d - rec.new_length.unwrap()).abs() < 1e-9);
                }
            }
        }
        assert!(t.sizes_consistent());
    }

    #[test]
    fn extension_kind_follows_target_parent() {
        let mut rng = stream(3);
        // from CTCS(2) every extension is a branch extension
        for _ in 0..200 {
            let mut t = GrowTree::two(&mut rng);
            let rec = t.step(&mut rng);
            assert_ne!(rec.kind, GrowthKind::SideLeafExtension);
        }
    }

    #[test]
    fn oracle_probabilities_sum_to_one() {
        for a in [1e-6, 0.1, 1.0, 7.0] {
            for b in [1e-6, 0.3, 2.0, 40.0] {
                let o = ctcs4_oracle(a, b).unwrap();
                assert!((o.p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
        assert!(ctcs4_oracle(1e-12, 1.0).unwrap().p[0] < 1e-12);
        assert!(ctcs4_oracle(1.0, 1e4).unwrap().p[3] == 0.0);
        assert!(ctcs4_oracle(0.0, 1.0).is_err());
        assert!(ctcs4_oracle(1.0, -1.0).is_err());
    }

    #[test]
    fn step_matches_grow_step_on_bud_trees() {
        let mut rng = stream(4);
        let b = grow(10, &mut rng).unwrap();
        let (b2, rec) = grow_step(&b, &mut rng).unwrap();
        assert_eq!(b2.n_buds(), 11);
        if rec.kind == GrowthKind::SideBud {
            assert!(rec.side.is_some());
        }
    }

    #[test]
    fn stop_profile_mass() {
        let p = StopProfile {
            segments: vec![(2.0, 4), (1.0, 2)],
        };
        assert!((p.extension_probability() - (-1.0f64).exp()).abs() < 1e-15);
        assert!((p.density(0.0) - 0.25).abs() < 1e-15);
        assert_eq!(p.density(3.5), 0.0);
    }
}
