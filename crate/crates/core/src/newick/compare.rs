//! Split statistics of a cladogram and a comparison against model samples.

use rand::Rng;
use serde::Serialize;

use super::PhyloTree;
use crate::error::{Error, Result};
use crate::rng::{domain, replicate, substream};
use crate::split::SplitLaw;
use crate::tree::sample_dtcs;
use crate::verify::{ks_test, Check, Report, TestResult, KS_THRESHOLD};

/// Splits of clades with sizes in `[lo, hi)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitBucket {
    pub lo: u32,
    pub hi: u32,
    pub count: usize,
    pub median_size: u32,
    pub median_smaller: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitStats {
    pub n_leaves: usize,
    /// `(clade size, smaller side)` for every binary split.
    pub records: Vec<(u32, u32)>,
    /// Log2 buckets of clade size.
    pub buckets: Vec<SplitBucket>,
    /// Median-regression slope of log smaller side on log clade size, over splits of
    /// clades with at least 8 leaves.
    pub alpha: Option<f64>,
    pub polytomies: usize,
    pub mean_hop_depth: f64,
    pub max_hop_depth: u32,
    pub root_draw_height: u32,
    pub width_profile: Vec<u64>,
}

const ALPHA_MIN_SIZE: u32 = 8;
const ALPHA_MIN_COUNT: usize = 10;

fn lower_median(v: &mut [u32]) -> u32 {
    v.sort_unstable();
    v[(v.len() - 1) / 2]
}

/// Least-absolute-deviation loss of the line `y = c + a x`, with `c` profiled out.
fn lad_loss(pts: &[(f64, f64)], a: f64) -> f64 {
    let mut r: Vec<f64> = pts.iter().map(|p| p.1 - a * p.0).collect();
    r.sort_by(f64::total_cmp);
    let c = r[r.len() / 2];
    r.iter().map(|x| (x - c).abs()).sum()
}

/// Median-regression slope. The profiled loss is convex in the slope, so a ternary
/// search finds its minimum.
fn median_slope(pts: &[(f64, f64)]) -> f64 {
    let (mut lo, mut hi) = (-1.0f64, 2.0f64);
    while hi - lo > 1e-9 {
        let a = lo + (hi - lo) / 3.0;
        let b = hi - (hi - lo) / 3.0;
        if lad_loss(pts, a) < lad_loss(pts, b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    (lo + hi) / 2.0
}

/// Split statistics; polytomies are counted and left out of the split records.
pub fn split_stats(tree: &PhyloTree) -> SplitStats {
    let sizes = tree.clade_sizes();
    let mut records = Vec::new();
    for (v, node) in tree.nodes.iter().enumerate() {
        if let [a, b] = node.children[..] {
            records.push((sizes[v] as u32, sizes[a].min(sizes[b]) as u32));
        }
    }
    let mut by_bucket: Vec<Vec<(u32, u32)>> = Vec::new();
    for &(m, s) in &records {
        let k = (31 - m.leading_zeros()) as usize;
        if by_bucket.len() <= k {
            by_bucket.resize(k + 1, Vec::new());
        }
        by_bucket[k].push((m, s));
    }
    let buckets: Vec<SplitBucket> = by_bucket
        .iter()
        .enumerate()
        .filter(|(_, b)| !b.is_empty())
        .map(|(k, b)| {
            let mut ms: Vec<u32> = b.iter().map(|r| r.0).collect();
            let mut ss: Vec<u32> = b.iter().map(|r| r.1).collect();
            SplitBucket {
                lo: 1 << k,
                hi: 1 << (k + 1),
                count: b.len(),
                median_size: lower_median(&mut ms),
                median_smaller: lower_median(&mut ss),
            }
        })
        .collect();
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.0 >= ALPHA_MIN_SIZE)
        .map(|&(m, k)| ((m as f64).ln(), (k as f64).ln()))
        .collect();
    let spread = pts.iter().any(|p| p.0 != pts[0].0);
    let alpha = (pts.len() >= ALPHA_MIN_COUNT && spread).then(|| median_slope(&pts));
    let depths = tree.leaf_depths();
    SplitStats {
        n_leaves: depths.len(),
        records,
        buckets,
        alpha,
        polytomies: tree.polytomies(),
        mean_hop_depth: depths.iter().map(|&d| d as f64).sum::<f64>() / depths.len() as f64,
        max_hop_depth: depths.iter().copied().max().unwrap_or(0),
        root_draw_height: tree.draw_heights()[0],
        width_profile: tree.width_profile(),
    }
}

/// `P(smaller side <= s)` for a model split of a size-`m` clade.
pub fn smaller_side_cdf(law: &SplitLaw, m: usize, s: usize) -> f64 {
    if 2 * s >= m {
        return 1.0;
    }
    if s == 0 {
        return 0.0;
    }
    (law.h(s) + law.h(m - 1) - law.h(m - 1 - s)) / law.h(m - 1)
}

/// Model-comparison outcome for one cladogram.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub stats: SplitStats,
    pub report: Report,
    pub extreme_imbalance: bool,
    pub extreme_balance: bool,
}

/// Standardised mean of the split PITs beyond which a tree is flagged.
pub const FLAG_Z: f64 = 4.0;

/// Two-sided rank p-value of `x` among `sims`.
fn rank_p(x: f64, sims: &[f64]) -> f64 {
    let le = sims.iter().filter(|&&s| s <= x).count();
    let ge = sims.iter().filter(|&&s| s >= x).count();
    (2.0 * (1 + le.min(ge)) as f64 / (sims.len() + 1) as f64).min(1.0)
}

/// Compares a cladogram with `reps` model trees on the same leaf count.
///
/// Splits of a model tree are independent given their clade sizes, so the randomised
/// probability-integral transforms of the observed smaller sides are i.i.d. uniform under
/// the model. Their KS test is the split-level check. Mean leaf hop depth and root draw
/// height are ranked among the simulated trees.
pub fn compare(tree: &PhyloTree, reps: usize, seed: u64, workers: usize) -> Result<Comparison> {
    let stats = split_stats(tree);
    let n = stats.n_leaves;
    if n < 10 {
        return Err(Error::domain("model comparison needs at least 10 leaves"));
    }
    if reps == 0 {
        return Err(Error::domain("model comparison needs at least one replicate"));
    }
    let law = SplitLaw::for_size(n);
    let mut rng = substream(seed, domain("newick-pit"), 0);
    let pits: Vec<f64> = stats
        .records
        .iter()
        .filter(|r| r.0 >= 4)
        .map(|&(m, s)| {
            let (m, s) = (m as usize, s as usize);
            let lo = smaller_side_cdf(&law, m, s - 1);
            let hi = smaller_side_cdf(&law, m, s);
            lo + rng.random::<f64>() * (hi - lo)
        })
        .collect();

    let sims = replicate(seed, domain("newick-compare"), reps, workers, |rng, _| {
        let t = sample_dtcs(n, rng).expect("n within the table");
        let depths = t.depths();
        let hops: f64 = t.leaf_nodes().iter().map(|&v| depths[v] as f64).sum();
        let dh = crate::stats::draw_heights(&t)[0];
        (hops / n as f64, dh as f64)
    });
    let sim_depth: Vec<f64> = sims.iter().map(|s| s.0).collect();
    let sim_dh: Vec<f64> = sims.iter().map(|s| s.1).collect();

    let mut report = Report::new("newick_compare");
    report
        .input("n_leaves", n)
        .input("reps", reps)
        .input("seed", seed)
        .input("polytomies", stats.polytomies);
    let mut z = 0.0;
    if pits.is_empty() {
        report.note("no binary splits of clades with 4 or more leaves");
    } else {
        report.test(ks_test("split_pit_uniform", &pits, |u| u.clamp(0.0, 1.0), KS_THRESHOLD)?);
        let k = pits.len() as f64;
        z = (pits.iter().sum::<f64>() / k - 0.5) / (1.0 / (12.0 * k)).sqrt();
        report.report("split_pit_mean_z", z);
    }
    report
        .test(TestResult::new(
            "mean_hop_depth_rank",
            stats.mean_hop_depth,
            rank_p(stats.mean_hop_depth, &sim_depth),
            KS_THRESHOLD,
        ))
        .test(TestResult::new(
            "root_draw_height_rank",
            stats.root_draw_height as f64,
            rank_p(stats.root_draw_height as f64, &sim_dh),
            KS_THRESHOLD,
        ));
    if let Some(a) = stats.alpha {
        report.report("alpha", a);
    }
    report
        .report("mean_hop_depth", stats.mean_hop_depth)
        .report("sim_mean_hop_depth", sim_depth.iter().sum::<f64>() / reps as f64)
        .report("root_draw_height", stats.root_draw_height as f64)
        .report("sim_root_draw_height", sim_dh.iter().sum::<f64>() / reps as f64);
    let max_depth = sim_depth.iter().cloned().fold(f64::MIN, f64::max);
    let min_depth = sim_depth.iter().cloned().fold(f64::MAX, f64::min);
    let extreme_imbalance = z < -FLAG_Z || stats.mean_hop_depth > max_depth;
    let extreme_balance = !extreme_imbalance && (z > FLAG_Z || stats.mean_hop_depth < min_depth);
    report.check(Check::holds("not_extreme_imbalance", z, -FLAG_Z, !extreme_imbalance));
    report.check(Check::holds("not_extreme_balance", z, FLAG_Z, !extreme_balance));
    if extreme_imbalance {
        report.note("extreme imbalance: splits are more lopsided than the model allows");
    }
    if extreme_balance {
        report.note("extreme balance: splits are more even than the model allows");
    }
    if stats.polytomies > 0 {
        report.note(format!("{} polytomies excluded from split records", stats.polytomies));
    }
    Ok(Comparison {
        stats,
        report,
        extreme_imbalance,
        extreme_balance,
    })
}
