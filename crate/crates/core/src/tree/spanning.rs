use super::bud::from_counts;
use super::{BudTree, CladeTree};
use crate::error::{Error, Result};

/// The subtree spanned by a set of leaves, each followed down to its own height.
///
/// `clades` is the induced split history on the selected leaves: a timed clade tree whose
/// holds merge the holds of clades where no selected leaf split off. `terminal[j]` is
/// the length of the branch from the last split involving selected leaf `leaves[j]`
/// down to that leaf.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanningTree {
    pub clades: CladeTree,
    pub terminal: Vec<f64>,
    pub leaves: Vec<usize>,
}

impl SpanningTree {
    /// Cuts every terminal branch back to its last shared split.
    pub fn prune(&self) -> Result<BudTree> {
        BudTree::from_clade_tree(&self.clades)
    }
}

fn selection(tree: &CladeTree, leaves: &[usize]) -> Result<(Vec<usize>, Vec<u32>)> {
    let n = tree.n_leaves();
    let mut sorted = leaves.to_vec();
    sorted.sort_unstable();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(Error::domain(format!("leaf {} selected twice", w[0])));
        }
    }
    if let Some(&bad) = sorted.iter().find(|&&u| u >= n) {
        return Err(Error::domain(format!("leaf {bad} out of range for {n} leaves")));
    }
    if sorted.is_empty() {
        return Err(Error::domain("no leaves selected"));
    }
    let mut counts = vec![0u32; tree.node_count()];
    let mut pos = 0;
    let mut next = sorted.iter().peekable();
    for v in 0..tree.node_count() {
        if tree.is_leaf(v) {
            if next.peek() == Some(&&pos) {
                counts[v] = 1;
                next.next();
            }
            pos += 1;
        }
    }
    for v in (0..tree.node_count()).rev() {
        if let Some((l, r)) = tree.children(v) {
            counts[v] = counts[l] + counts[r];
        }
    }
    Ok((sorted, counts))
}

/// The spanning tree of the given leaf positions in a timed tree.
pub fn spanning_tree(tree: &CladeTree, leaves: &[usize]) -> Result<SpanningTree> {
    let holds = tree.require_times()?;
    let (sorted, counts) = selection(tree, leaves)?;
    let mut sizes = Vec::new();
    let mut span_holds = Vec::new();
    let mut terminal = Vec::new();
    // (node, hold accumulated since the spanning clade began)
    let mut stack = vec![(0usize, 0.0f64)];
    while let Some((mut u, mut acc)) = stack.pop() {
        if counts[u] == 1 {
            while let Some((l, r)) = tree.children(u) {
                acc += holds[u];
                u = if counts[l] == 1 { l } else { r };
            }
            sizes.push(1);
            span_holds.push(0.0);
            terminal.push(acc);
            continue;
        }
        loop {
            acc += holds[u];
            let (l, r) = tree.children(u).expect("two selected leaves below an internal node");
            match (counts[l], counts[r]) {
                (0, _) => u = r,
                (_, 0) => u = l,
                _ => {
                    sizes.push(counts[u]);
                    span_holds.push(acc);
                    stack.push((r, 0.0));
                    stack.push((l, 0.0));
                    break;
                }
            }
        }
    }
    Ok(SpanningTree {
        clades: CladeTree {
            sizes,
            holds: Some(span_holds),
        },
        terminal,
        leaves: sorted,
    })
}

/// The pruned tree PRU of the given leaves (at least two), computed directly from the
/// full tree.
pub fn prune(tree: &CladeTree, leaves: &[usize]) -> Result<BudTree> {
    tree.require_times()?;
    if leaves.len() < 2 {
        return Err(Error::domain("pruning needs at least two leaves"));
    }
    let (_, counts) = selection(tree, leaves)?;
    from_counts(tree, &counts)
}
