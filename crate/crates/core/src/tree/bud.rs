use serde::Serialize;

use super::{CladeTree, Side};
use crate::error::{Error, Result};

/// A bud attached to the interior of an edge, `pos` measured from the edge start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SideBud {
    pub pos: f64,
    pub side: Side,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EdgeEnd {
    /// Two child edges, left then right (indices into [`BudTree::edges`]).
    Branch(usize, usize),
    /// Two terminal buds.
    BudPair,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudEdge {
    pub length: f64,
    pub side_buds: Vec<SideBud>,
    pub end: EdgeEnd,
}

/// The pruned representation of a tree: edges carrying side-buds and ending in either
/// a branch point or a bud-pair.
///
/// Edges are kept in preorder (an edge, then its left subtree, then its right subtree)
/// starting at edge 0, so two trees are structurally equal iff their edge lists are.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudTree {
    edges: Vec<BudEdge>,
}

impl BudTree {
    pub fn edges(&self) -> &[BudEdge] {
        &self.edges
    }

    /// Validates a preorder edge list.
    pub fn from_edges(edges: Vec<BudEdge>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::domain("a bud tree needs an edge"));
        }
        let mut next = 0;
        let mut stack = vec![0usize];
        while let Some(e) = stack.pop() {
            if e != next {
                return Err(Error::domain(format!("edge {e} is not in preorder")));
            }
            next += 1;
            let edge = &edges[e];
            let mut last = 0.0;
            for b in &edge.side_buds {
                if !(b.pos > last && b.pos < edge.length) {
                    return Err(Error::domain(format!("side-bud at {} misplaced on edge {e}", b.pos)));
                }
                last = b.pos;
            }
            if let EdgeEnd::Branch(l, r) = edge.end {
                if l >= edges.len() || r >= edges.len() || l != e + 1 || r <= l {
                    return Err(Error::domain(format!("edge {e} has bad children")));
                }
                stack.push(r);
                stack.push(l);
            }
        }
        if next != edges.len() {
            return Err(Error::domain("unreachable edges"));
        }
        Ok(BudTree { edges })
    }

    /// The bud representation of a timed clade tree on `n >= 2` leaves.
    pub fn from_clade_tree(tree: &CladeTree) -> Result<Self> {
        let counts: Vec<u32> = tree.sizes().to_vec();
        from_counts(tree, &counts)
    }

    /// Number of buds (leaves).
    pub fn n_buds(&self) -> usize {
        self.edges
            .iter()
            .map(|e| e.side_buds.len() + if e.end == EdgeEnd::BudPair { 2 } else { 0 })
            .sum()
    }

    /// Number of edge segments when side-buds subdivide edges: always `n_buds - 1`.
    pub fn n_segments(&self) -> usize {
        self.edges.iter().map(|e| e.side_buds.len() + 1).sum()
    }

    pub fn total_length(&self) -> f64 {
        crate::numeric::csum(self.edges.iter().map(|e| e.length))
    }

    /// Buds below each edge (including its side-buds).
    fn bud_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.edges.len()];
        for (i, e) in self.edges.iter().enumerate().rev() {
            c[i] = e.side_buds.len()
                + match e.end {
                    EdgeEnd::BudPair => 2,
                    EdgeEnd::Branch(l, r) => c[l] + c[r],
                };
        }
        c
    }

    /// The equivalent timed clade tree.
    pub fn to_clade_tree(&self) -> CladeTree {
        enum Task {
            Leaf,
            Segment(usize, usize),
        }
        let counts = self.bud_counts();
        let total = counts[0];
        let mut sizes = Vec::with_capacity(2 * total - 1);
        let mut holds = Vec::with_capacity(2 * total - 1);
        let mut stack = vec![Task::Segment(0, 0)];
        while let Some(task) = stack.pop() {
            let (e, j) = match task {
                Task::Leaf => {
                    sizes.push(1);
                    holds.push(0.0);
                    continue;
                }
                Task::Segment(e, j) => (e, j),
            };
            let edge = &self.edges[e];
            let start = if j == 0 { 0.0 } else { edge.side_buds[j - 1].pos };
            sizes.push((counts[e] - j) as u32);
            if let Some(b) = edge.side_buds.get(j) {
                holds.push(b.pos - start);
                match b.side {
                    Side::Left => {
                        stack.push(Task::Segment(e, j + 1));
                        stack.push(Task::Leaf);
                    }
                    Side::Right => {
                        stack.push(Task::Leaf);
                        stack.push(Task::Segment(e, j + 1));
                    }
                }
            } else {
                holds.push(edge.length - start);
                match edge.end {
                    EdgeEnd::BudPair => {
                        stack.push(Task::Leaf);
                        stack.push(Task::Leaf);
                    }
                    EdgeEnd::Branch(l, r) => {
                        stack.push(Task::Segment(r, 0));
                        stack.push(Task::Segment(l, 0));
                    }
                }
            }
        }
        CladeTree {
            sizes,
            holds: Some(holds),
        }
    }

    /// Structural equality with lengths and positions compared to absolute tolerance `tol`.
    pub fn approx_eq(&self, other: &BudTree, tol: f64) -> bool {
        self.edges.len() == other.edges.len()
            && self.edges.iter().zip(&other.edges).all(|(a, b)| {
                a.end == b.end
                    && (a.length - b.length).abs() <= tol
                    && a.side_buds.len() == b.side_buds.len()
                    && a.side_buds.iter().zip(&b.side_buds).all(|(x, y)| {
                        x.side == y.side && (x.pos - y.pos).abs() <= tol
                    })
            })
    }

    /// Shape without lengths, as a compact string: `B(..,..)` branch, `L`/`R` side-buds,
    /// `P` bud-pair. Used to tabulate shape classes.
    pub fn shape_key(&self) -> String {
        let mut out = String::new();
        let mut stack: Vec<Option<usize>> = vec![Some(0)];
        while let Some(item) = stack.pop() {
            let Some(e) = item else {
                out.push(')');
                continue;
            };
            let edge = &self.edges[e];
            for b in &edge.side_buds {
                out.push(if b.side == Side::Left { 'L' } else { 'R' });
            }
            match edge.end {
                EdgeEnd::BudPair => out.push('P'),
                EdgeEnd::Branch(l, r) => {
                    out.push_str("B(");
                    stack.push(None);
                    stack.push(Some(r));
                    stack.push(Some(l));
                }
            }
        }
        out
    }
}

/// Builds the pruned tree of the leaves counted in `counts` (selected leaves per clade).
pub(super) fn from_counts(tree: &CladeTree, counts: &[u32]) -> Result<BudTree> {
    let holds = tree.require_times()?;
    if counts[0] < 2 {
        return Err(Error::domain("pruning needs at least two leaves"));
    }
    const UNSET: usize = usize::MAX;
    let mut edges: Vec<BudEdge> = Vec::new();
    // (clade node starting the edge, parent edge, is right child)
    let mut stack = vec![(0usize, UNSET, false)];
    while let Some((start, parent, right)) = stack.pop() {
        let id = edges.len();
        if parent != UNSET {
            if let EdgeEnd::Branch(l, r) = &mut edges[parent].end {
                if right {
                    *r = id;
                } else {
                    *l = id;
                }
            }
        }
        let mut len = 0.0;
        let mut buds = Vec::new();
        let mut u = start;
        let end = loop {
            len += holds[u];
            let (l, r) = tree.children(u).expect("a clade with two selected leaves is internal");
            match (counts[l], counts[r]) {
                (1, 1) => break EdgeEnd::BudPair,
                (cl, cr) if cl >= 2 && cr >= 2 => {
                    stack.push((r, id, true));
                    stack.push((l, id, false));
                    break EdgeEnd::Branch(UNSET, UNSET);
                }
                (1, _) => {
                    buds.push(SideBud { pos: len, side: Side::Left });
                    u = r;
                }
                (_, 1) => {
                    buds.push(SideBud { pos: len, side: Side::Right });
                    u = l;
                }
                (0, _) => u = r,
                _ => u = l,
            }
        };
        edges.push(BudEdge {
            length: len,
            side_buds: buds,
            end,
        });
    }
    Ok(BudTree { edges })
}
