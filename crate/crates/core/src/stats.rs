//! Per-tree statistics.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::format_g17;
use crate::tree::CladeTree;

/// Height of each leaf (sum of holds on its root path), by leaf position.
pub fn leaf_heights(tree: &CladeTree) -> Result<Vec<f64>> {
    let births = tree.births()?;
    Ok(tree.leaf_nodes().into_iter().map(|v| births[v]).collect())
}

/// Edge count of each leaf's root path, by leaf position.
pub fn leaf_hops(tree: &CladeTree) -> Vec<u32> {
    let d = tree.depths();
    tree.leaf_nodes().into_iter().map(|v| d[v]).collect()
}

/// Height of the split that separates leaves `u` and `v`.
pub fn branchpoint_height(tree: &CladeTree, u: usize, v: usize) -> Result<f64> {
    let holds = tree.require_times()?;
    let n = tree.n_leaves();
    if u == v {
        return Err(Error::domain("branchpoint of a leaf with itself"));
    }
    if u >= n || v >= n {
        return Err(Error::domain(format!("leaf outside 0..{n}")));
    }
    let (mut node, mut lo, mut height) = (0usize, 0usize, 0.0);
    loop {
        height += holds[node];
        let (l, r) = tree.children(node).expect("two leaves below");
        let split = lo + tree.size(l);
        match (u < split, v < split) {
            (true, true) => node = l,
            (false, false) => {
                node = r;
                lo = split;
            }
            _ => return Ok(height),
        }
    }
}

/// `Q_n(t)`: sum of squared sizes of the clades alive at height `t`.
pub fn sum_squares_at(tree: &CladeTree, t: f64) -> Result<f64> {
    Ok(tree.clades_at(t)?.iter().map(|&s| (s * s) as f64).sum())
}

/// `L_n`: total hold over the internal clades.
pub fn total_length(tree: &CladeTree) -> Result<f64> {
    tree.total_length()
}

/// `S^(p)`: sum of `size^p` over internal clades.
pub fn power_sum(tree: &CladeTree, p: f64) -> f64 {
    tree.sizes()
        .iter()
        .filter(|&&s| s >= 2)
        .map(|&s| (s as f64).powf(p))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HopExtremes {
    /// `L*_n`: the largest hop count.
    pub max: u32,
    /// `L+_n`: hops on the path that always enters the larger sub-clade.
    pub greedy: u32,
    /// Equal splits met on the greedy path (resolved to the left).
    pub ties: u32,
}

pub fn hop_extremes(tree: &CladeTree) -> HopExtremes {
    let max = tree.depths().into_iter().max().unwrap_or(0);
    let (mut v, mut greedy, mut ties) = (0, 0, 0);
    while let Some((l, r)) = tree.children(v) {
        greedy += 1;
        let (sl, sr) = (tree.size(l), tree.size(r));
        if sl == sr {
            ties += 1;
        }
        v = if sl >= sr { l } else { r };
    }
    HopExtremes { max, greedy, ties }
}

/// Draw height of every clade: 0 for leaves, else one more than the higher child.
/// This is the DTCS height of the subtree.
pub fn draw_heights(tree: &CladeTree) -> Vec<u32> {
    let mut dh = vec![0; tree.node_count()];
    for v in (0..tree.node_count()).rev() {
        if let Some((l, r)) = tree.children(v) {
            dh[v] = 1 + dh[l].max(dh[r]);
        }
    }
    dh
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WidthProfile {
    /// `w[h]`: clades with `dh <= h` whose parent has `dh >= h + 1`, for `h < root dh`.
    pub w: Vec<u64>,
    /// `sum_h w[h]`, the vertical length of the drawn cladogram.
    pub drawn_length: u64,
}

pub fn width_profile(tree: &CladeTree) -> WidthProfile {
    let dh = draw_heights(tree);
    let top = dh[0] as usize;
    // difference array over h: clade c counts for dh(c) <= h < dh(parent)
    let mut diff = vec![0i64; top + 1];
    for v in 0..tree.node_count() {
        if let Some((l, r)) = tree.children(v) {
            for c in [l, r] {
                diff[dh[c] as usize] += 1;
                diff[dh[v] as usize] -= 1;
            }
        }
    }
    let mut w = Vec::with_capacity(top);
    let mut run = 0i64;
    for d in diff.iter().take(top) {
        run += d;
        w.push(run as u64);
    }
    let drawn_length = w.iter().sum();
    WidthProfile { w, drawn_length }
}

/// One row of per-replicate statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeStats {
    pub n: usize,
    pub mean_height: Option<f64>,
    pub max_height: Option<f64>,
    pub total_length: Option<f64>,
    pub mean_hops: f64,
    pub hops: HopExtremes,
    pub powers: Vec<(f64, f64)>,
    pub root_draw_height: u32,
    pub drawn_length: u64,
}

impl TreeStats {
    pub fn of(tree: &CladeTree, powers: &[f64]) -> Self {
        let heights = leaf_heights(tree).ok();
        let hops = leaf_hops(tree);
        let n = tree.n_leaves();
        let wp = width_profile(tree);
        TreeStats {
            n,
            mean_height: heights.as_ref().map(|h| h.iter().sum::<f64>() / n as f64),
            max_height: heights.as_ref().map(|h| h.iter().copied().fold(0.0, f64::max)),
            total_length: tree.total_length().ok(),
            mean_hops: hops.iter().map(|&h| h as f64).sum::<f64>() / n as f64,
            hops: hop_extremes(tree),
            powers: powers.iter().map(|&p| (p, power_sum(tree, p))).collect(),
            root_draw_height: draw_heights(tree)[0],
            drawn_length: wp.drawn_length,
        }
    }

    pub fn csv_header(powers: &[f64]) -> String {
        let mut h = String::from(
            "n,mean_height,max_height,total_length,mean_hops,max_hops,greedy_hops,greedy_ties,root_draw_height,drawn_length",
        );
        for p in powers {
            h.push_str(&format!(",power_sum_{}", format_g17(*p)));
        }
        h
    }

    pub fn csv_row(&self) -> String {
        let opt = |x: Option<f64>| x.map(format_g17).unwrap_or_default();
        let mut row = format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.n,
            opt(self.mean_height),
            opt(self.max_height),
            opt(self.total_length),
            format_g17(self.mean_hops),
            self.hops.max,
            self.hops.greedy,
            self.hops.ties,
            self.root_draw_height,
            self.drawn_length
        );
        for (_, s) in &self.powers {
            row.push(',');
            row.push_str(&format_g17(*s));
        }
        row
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::tree::{sample_ctcs, sample_dtcs};

    fn balanced4() -> CladeTree {
        CladeTree::from_parts(vec![4, 2, 1, 1, 2, 1, 1], None).unwrap()
    }

    fn caterpillar4() -> CladeTree {
        CladeTree::from_parts(vec![4, 1, 3, 1, 2, 1, 1], None).unwrap()
    }

    #[test]
    fn two_leaf_tree() {
        let mut rng = stream(1);
        let t = sample_ctcs(2, &mut rng).unwrap();
        let h = leaf_heights(&t).unwrap();
        assert_eq!(h[0], h[1]);
        assert_eq!(h[0], t.hold(0).unwrap());
        assert_eq!(branchpoint_height(&t, 0, 1).unwrap(), t.hold(0).unwrap());
        assert_eq!(power_sum(&t, 2.5), 2f64.powf(2.5));
        assert!(branchpoint_height(&t, 1, 1).is_err());
    }

    #[test]
    fn extremes_of_small_shapes() {
        let b = hop_extremes(&balanced4());
        assert_eq!((b.max, b.greedy, b.ties), (2, 2, 2));
        let c = hop_extremes(&caterpillar4());
        assert_eq!((c.max, c.greedy), (3, 3));
        assert_eq!(draw_heights(&balanced4())[0], 2);
        assert_eq!(draw_heights(&caterpillar4())[0], 3);
    }

    #[test]
    fn width_profiles_of_small_shapes() {
        // balanced: h=0 four leaves, h=1 two pairs
        assert_eq!(width_profile(&balanced4()).w, vec![4, 2]);
        // caterpillar: h=0 two pair leaves + the leaf under the size-3 clade (dh 2)
        // + the root's leaf child (dh 3); h=1 the pair + two side leaves; h=2 two children
        assert_eq!(width_profile(&caterpillar4()).w, vec![4, 3, 2]);
        assert_eq!(width_profile(&caterpillar4()).drawn_length, 9);
    }

    #[test]
    fn identities_on_random_trees() {
        let mut rng = stream(2);
        for _ in 0..200 {
            let t = sample_dtcs(rng_size(&mut rng), &mut rng).unwrap();
            let hops = leaf_hops(&t);
            assert_eq!(power_sum(&t, 1.0), hops.iter().map(|&h| h as f64).sum::<f64>());
            let e = hop_extremes(&t);
            assert_eq!(draw_heights(&t)[0], e.max);
            assert!(e.greedy <= e.max);
            let wp = width_profile(&t);
            assert!(wp.w.len() == e.max as usize);
        }
    }

    fn rng_size(rng: &mut crate::rng::Stream) -> usize {
        use rand::Rng;
        rng.random_range(2..300)
    }

    #[test]
    fn sum_squares_limits() {
        let mut rng = stream(3);
        let t = sample_ctcs(40, &mut rng).unwrap();
        assert_eq!(sum_squares_at(&t, 0.0).unwrap(), 1600.0);
        assert_eq!(sum_squares_at(&t, 1e9).unwrap(), 40.0);
    }

    #[test]
    fn csv_row_has_header_width() {
        let mut rng = stream(4);
        let t = sample_ctcs(30, &mut rng).unwrap();
        let s = TreeStats::of(&t, &[1.0, 2.0]);
        let cols = TreeStats::csv_header(&[1.0, 2.0]).split(',').count();
        assert_eq!(s.csv_row().split(',').count(), cols);
    }
}
