//! Named experiments.
//!
//! Every experiment draws replicate `r` from substream `r` of its own domain, so a report
//! depends only on its inputs and the seed, never on the worker count. Monte Carlo
//! tolerances are four standard errors unless stated otherwise.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use super::{
    chi_square, ks_test, ks_two_sample, Check, Estimate, Report, TestResult, CHI2_THRESHOLD,
    KS_THRESHOLD,
};
use crate::chain::{
    c1_trend, default_c1_grid, drift_variance, fringe_up_pmf, leaf_pair_heights,
    length_constant, occupancy, occupancy_fast, simulate_chain, stationarity_residual,
    depth_mean_fast, ChainMode, Moments,
};
use crate::constants::{C0_REPORTED, C_HEIGHT, ELL_REPORTED, R_INF, ZETA2, ZETA3};
use crate::error::{Error, Result};
use crate::growth::{grow, grow_tree, kind_frequencies};
use crate::newick::{self, PhyloNode, PhyloTree};
use crate::rng::{domain, replicate, substream, Stream};
use crate::split::SplitLaw;
use crate::stats::{branchpoint_height, hop_extremes, leaf_heights, power_sum};
use crate::svg;
use crate::tree::{prune, sample_ctcs, sample_dtcs, BudTree, CladeTree};

/// Master seed and worker count shared by every experiment of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Run {
    pub seed: u64,
    pub workers: usize,
}

impl Run {
    pub fn new(seed: u64, workers: usize) -> Self {
        Run { seed, workers }
    }

    fn rep<T, F>(&self, name: &str, reps: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&mut Stream, usize) -> T + Sync + Send,
    {
        replicate(self.seed, domain(name), reps, self.workers, f)
    }
}

fn list(xs: &[usize]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn exp_cdf(rate: f64) -> impl Fn(f64) -> f64 {
    move |x| if x <= 0.0 { 0.0 } else { -(-rate * x).exp_m1() }
}

fn distinct_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    // with replacement, equal pairs discarded
    loop {
        let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
        if u != v {
            return (u, v);
        }
    }
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let e = Estimate::mean_of(xs);
    let v = e.stderr * e.stderr * xs.len() as f64;
    (e.value, v)
}

/// Exact law of the ordered shape of CTCS(k), keyed by [`BudTree::shape_key`].
pub fn shape_distribution(k: usize) -> Result<BTreeMap<String, f64>> {
    if !(2..=9).contains(&k) {
        return Err(Error::domain(format!("shape enumeration needs 2 <= k <= 9, got {k}")));
    }
    let law = SplitLaw::shared();
    // preorder size arrays with their probabilities
    let mut shapes: Vec<Vec<(Vec<u32>, f64)>> = vec![Vec::new(), vec![(vec![1], 1.0)]];
    for m in 2..=k {
        let mut out = Vec::new();
        for i in 1..m {
            let q = law.split_pmf(m, i)?;
            for (l, pl) in &shapes[i] {
                for (r, pr) in &shapes[m - i] {
                    let mut s = vec![m as u32];
                    s.extend(l);
                    s.extend(r);
                    out.push((s, q * pl * pr));
                }
            }
        }
        shapes.push(out);
    }
    let mut map = BTreeMap::new();
    for (sizes, p) in &shapes[k] {
        let holds = sizes.iter().map(|&s| if s > 1 { 1.0 } else { 0.0 }).collect();
        let t = CladeTree::from_parts(sizes.clone(), Some(holds))?;
        *map.entry(BudTree::from_clade_tree(&t)?.shape_key()).or_insert(0.0) += p;
    }
    Ok(map)
}

fn shape_test(
    report: &mut Report,
    name: &str,
    keys: &[String],
    exact: &BTreeMap<String, f64>,
) -> Result<()> {
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for k in keys {
        *counts.entry(k.as_str()).or_default() += 1;
    }
    let unknown: u64 = counts
        .iter()
        .filter(|(k, _)| !exact.contains_key(**k))
        .map(|(_, &c)| c)
        .sum();
    let obs: Vec<u64> = exact.keys().map(|k| counts.get(k.as_str()).copied().unwrap_or(0)).collect();
    let probs: Vec<f64> = exact.values().copied().collect();
    report.test(chi_square(name, &obs, &probs, CHI2_THRESHOLD)?);
    report.check(Check::holds(
        &format!("{name}: samples outside the model's shapes"),
        unknown as f64,
        0.0,
        unknown == 0,
    ));
    let total = keys.len() as f64;
    for ((k, p), o) in exact.iter().zip(&obs) {
        report.report(&format!("{name}: {k} frequency"), *o as f64 / total);
        report.report(&format!("{name}: {k} probability"), *p);
    }
    Ok(())
}

/// Branchpoint height of two distinct random leaves of full CTCS(n) trees against
/// Exponential(1), repeated over `seeds` consecutive seeds. Passes for `n` when at most
/// one seed in ten fails its KS test.
pub fn exp_branchpoint(ns: &[usize], reps: usize, seeds: u64, run: Run) -> Result<Report> {
    let mut r = Report::new("branchpoint");
    r.input("n", list(ns))
        .input("reps", reps)
        .input("seeds", seeds)
        .input("seed", run.seed);
    for &n in ns {
        if n < 2 {
            return Err(Error::domain("a branchpoint needs two leaves"));
        }
        SplitLaw::shared().check_size(n)?;
        let mut passes = 0u64;
        for j in 0..seeds {
            let s = run.seed.wrapping_add(j);
            let xs = replicate(s, domain(&format!("branchpoint-{n}")), reps, run.workers, |rng, _| {
                let t = sample_ctcs(n, rng).expect("size checked");
                let (u, v) = distinct_pair(n, rng);
                branchpoint_height(&t, u, v).expect("distinct leaves")
            });
            let t = ks_test("ks", &xs, exp_cdf(1.0), KS_THRESHOLD)?;
            passes += t.pass as u64;
            r.report(&format!("n={n} seed={s}: KS statistic"), t.statistic);
            r.report(&format!("n={n} seed={s}: KS p"), t.p_value);
            if j == 0 && Some(&n) == ns.last() {
                r.artifact(
                    &format!("branchpoint_{n}.svg"),
                    svg::histogram(&xs, &format!("branchpoint height, n = {n}"), false),
                );
            }
        }
        let need = seeds - seeds / 10;
        r.check(Check::holds(
            &format!("n={n}: seeds with KS p > {KS_THRESHOLD}"),
            passes as f64,
            need as f64,
            passes >= need,
        ));
    }
    Ok(r)
}

/// Type of the leaf deleted from CTCS(4): 0 side-bud of the root, 1 leaf of a (2,2)
/// pair, 2 side-bud of the size-3 clade, 3 leaf of the pair inside the size-3 clade.
fn deletion_type(t: &CladeTree, leaf_pos: usize) -> usize {
    let parents = t.parents();
    let leaf = t.leaf_nodes()[leaf_pos];
    let p = parents[leaf];
    match t.size(p) {
        4 => 0,
        3 => 2,
        _ if t.size(parents[p]) == 4 => 1,
        _ => 3,
    }
}

/// Deleting a uniform leaf of CTCS(k+1) and pruning gives CTCS(k): shape classes,
/// per-shape segment lengths against their Exponential(`h[m-1]`) laws, and total length
/// against direct CTCS(k) samples.
pub fn exp_consistency(k: usize, reps: usize, run: Run) -> Result<Report> {
    if !(3..=6).contains(&k) {
        return Err(Error::domain(format!("consistency needs 3 <= k <= 6, got {k}")));
    }
    let exact = shape_distribution(k)?;
    let law = SplitLaw::shared();
    let samples = run.rep(&format!("consistency-{k}"), reps, |rng, _| {
        let t = sample_ctcs(k + 1, rng).expect("small tree");
        let d = rng.random_range(0..=k);
        let keep: Vec<usize> = (0..=k).filter(|&u| u != d).collect();
        let b = prune(&t, &keep).expect("k >= 3 leaves");
        let c = b.to_clade_tree();
        let holds = c.holds().expect("timed").to_vec();
        let kind = if k == 3 { deletion_type(&t, d) } else { 0 };
        (b.shape_key(), c.sizes().to_vec(), holds, b.total_length(), kind)
    });
    let direct = run.rep(&format!("consistency-direct-{k}"), reps, |rng, _| {
        sample_ctcs(k, rng).expect("small tree").total_length().expect("timed")
    });

    let mut r = Report::new(&format!("consistency_k{k}"));
    r.input("k", k).input("reps", reps).input("seed", run.seed);
    let keys: Vec<String> = samples.iter().map(|s| s.0.clone()).collect();
    shape_test(&mut r, "shape classes", &keys, &exact)?;

    let mut by_shape: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (idx, s) in samples.iter().enumerate() {
        by_shape.entry(s.0.as_str()).or_default().push(idx);
    }
    for (key, idx) in &by_shape {
        let sizes = &samples[idx[0]].1;
        for (pos, &m) in sizes.iter().enumerate().filter(|(_, &m)| m >= 2) {
            let xs: Vec<f64> = idx.iter().map(|&i| samples[i].2[pos]).collect();
            if xs.len() < 10 {
                continue;
            }
            let rate = law.h(m as usize - 1);
            r.test(ks_test(
                &format!("segment length: shape {key}, node {pos}, size {m}"),
                &xs,
                exp_cdf(rate),
                KS_THRESHOLD,
            )?);
        }
    }
    let lengths: Vec<f64> = samples.iter().map(|s| s.3).collect();
    r.test(ks_two_sample("total length vs direct CTCS(k)", &lengths, &direct, KS_THRESHOLD)?);
    r.report("mean total length, pruned", Estimate::mean_of(&lengths).value);
    r.report("mean total length, direct", Estimate::mean_of(&direct).value);

    if k == 3 {
        let mut counts = [0u64; 4];
        for s in &samples {
            counts[s.4] += 1;
        }
        let probs = [2.0 / 11.0, 3.0 / 11.0, 2.0 / 11.0, 4.0 / 11.0];
        r.test(chi_square("deleted leaf type in CTCS(4)", &counts, &probs, CHI2_THRESHOLD)?);
    }
    Ok(r)
}

/// Mean of `Q_n(t)` against `n + (n^2 - n) e^{-t}`.
pub fn exp_sum_squares(n: usize, ts: &[f64], reps: usize, run: Run) -> Result<Report> {
    SplitLaw::shared().check_size(n)?;
    let qs = run.rep(&format!("sum-squares-{n}"), reps, |rng, _| {
        let tree = sample_ctcs(n, rng).expect("size checked");
        ts.iter()
            .map(|&t| crate::stats::sum_squares_at(&tree, t).expect("timed"))
            .collect::<Vec<f64>>()
    });
    let mut r = Report::new("sum_of_squares");
    r.input("n", n).input("reps", reps).input("seed", run.seed);
    let nf = n as f64;
    for (k, &t) in ts.iter().enumerate() {
        let xs: Vec<f64> = qs.iter().map(|q| q[k]).collect();
        let est = Estimate::mean_of(&xs);
        let target = nf + (nf * nf - nf) * (-t).exp();
        r.estimate(&format!("Q(t={t})"), est);
        r.check(Check::within_se(&format!("mean Q(t={t})"), &est, target, 4.0));
    }
    Ok(r)
}

fn log_grid(lo: usize, hi: usize, per_decade: usize) -> Vec<usize> {
    let steps = ((hi as f64 / lo as f64).log10() * per_decade as f64).round().max(1.0) as usize;
    let mut g: Vec<usize> = (0..=steps)
        .map(|k| (lo as f64 * (hi as f64 / lo as f64).powf(k as f64 / steps as f64)).round() as usize)
        .collect();
    g.dedup();
    g
}

/// Smallest `|residual|` that the ten printed digits of the constant can resolve.
const RESIDUAL_FLOOR: f64 = 1e-9;

/// The mean leaf height `t[n]` against `log(n) / zeta(2) + c0`, the sandwich bounds, and
/// the slowly converging variance and hop-count ratios (reported with trend checks).
pub fn exp_mean_depth(m: &Moments) -> Result<Report> {
    let n = m.t.len() - 1;
    if n < 100 {
        return Err(Error::domain("mean depth experiment needs N >= 100"));
    }
    let ln = |k: usize| (k as f64).ln();
    let mut r = Report::new("mean_depth");
    r.input("N", n);
    let c = m.t[n] - ln(n) / ZETA2;
    r.check(Check::close("t[N] - log(N)/zeta(2)", c, C0_REPORTED, 1e-4));
    r.report("t[N] - log(N)/zeta(2)", c);

    let violations = (2..=n)
        .filter(|&k| {
            let lower = ln(k) / ZETA2;
            let upper = 1.0 + ln(k - 1);
            let slack = 1e-12 * m.t[k].abs().max(1.0);
            m.t[k] < lower - slack || m.t[k] > upper + slack
        })
        .count();
    r.check(Check::holds("sandwich bound violations", violations as f64, 0.0, violations == 0));

    let grid = log_grid(10, n, 4);
    let mut resid = Vec::new();
    for &k in &grid {
        let res = m.t[k] - ln(k) / ZETA2 - C0_REPORTED + 1.0 / (2.0 * ZETA2 * k as f64);
        r.report(&format!("corrected residual n={k}"), res);
        resid.push(res.abs());
    }
    let resolved: Vec<f64> = resid.iter().copied().take_while(|&x| x > RESIDUAL_FLOOR).collect();
    let decreasing = resolved.windows(2).all(|w| w[1] < w[0]);
    r.check(Check::holds(
        "corrected residual decreases until the constant's precision",
        resolved.len() as f64,
        0.0,
        decreasing && resolved.len() >= 2,
    ));

    let var_gap: Vec<f64> = grid
        .iter()
        .map(|&k| m.var[k] / ln(k) / crate::constants::VAR_CONST - 1.0)
        .collect();
    let hop_gap: Vec<f64> = grid
        .iter()
        .map(|&k| m.thop[k] / (ln(k) * ln(k)) * (2.0 * ZETA2) - 1.0)
        .collect();
    for (i, &k) in grid.iter().enumerate() {
        r.report(&format!("var[n]/(log n VAR_CONST) - 1, n={k}"), var_gap[i]);
        r.report(&format!("thop[n]/(log^2 n/(2 zeta(2))) - 1, n={k}"), hop_gap[i]);
    }
    let tail = |g: &[f64]| {
        let from = grid.iter().position(|&k| k >= 1000).unwrap_or(0);
        g[from..].windows(2).all(|w| w[1].abs() < w[0].abs())
    };
    r.check(Check::holds(
        "variance ratio approaches its limit for n >= 1000",
        var_gap[var_gap.len() - 1],
        0.0,
        tail(&var_gap),
    ));
    r.check(Check::holds(
        "hop ratio approaches its limit for n >= 1000",
        hop_gap[hop_gap.len() - 1],
        0.0,
        tail(&hop_gap),
    ));
    Ok(r)
}

/// Reference occupation probabilities `a_i` and first fringe steps `q↑(1, i)`.
pub const OCCUPATION_INDEX: [usize; 7] = [2, 3, 4, 5, 10, 20, 30];
pub const OCCUPATION_REFERENCE: [f64; 7] = [0.6079, 0.4559, 0.3715, 0.3176, 0.1911, 0.1135, 0.0831];
pub const FRINGE_REFERENCE: [f64; 7] = [0.6079, 0.1520, 0.0675, 0.0381, 0.0075, 0.0017, 0.0007];
pub const TABLE_TOLERANCE: f64 = 5e-4;

/// `a(n, i)` and `q↑(1, i)` at the reference indices, plus the structural properties of
/// `a(n, .)`: stationarity, monotonicity and the fringe truncation mass.
pub fn exp_occupation_table(a: &[f64]) -> Result<Report> {
    let n = a.len() - 1;
    if n <= 30 {
        return Err(Error::domain("occupation table needs n > 30"));
    }
    let mut r = Report::new("occupation_table");
    r.input("n", n);
    let up = fringe_up_pmf(1, a)?;
    for (k, &i) in OCCUPATION_INDEX.iter().enumerate() {
        r.check(Check::close(&format!("a(n,{i})"), a[i], OCCUPATION_REFERENCE[k], TABLE_TOLERANCE));
    }
    for (k, &i) in OCCUPATION_INDEX.iter().enumerate() {
        r.check(Check::close(&format!("q_up(1,{i})"), up.pmf(i), FRINGE_REFERENCE[k], TABLE_TOLERANCE));
    }
    let worst = (1..=30)
        .map(|i| stationarity_residual(a, i).map(f64::abs))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    r.check(Check::holds("stationarity residual, i <= 30", worst, 1e-3, worst <= 1e-3));
    let decreasing = (2..30).all(|i| a[i + 1] < a[i]);
    r.check(Check::holds("a(n,i) decreasing on 2..=30", a[30], a[2], decreasing));
    r.check(Check::holds("raw fringe mass in (0.95, 1]", up.mass, 1.0, up.mass > 0.95 && up.mass <= 1.0 + 1e-12));
    r.report("raw fringe mass", up.mass);
    for j in [50, 100, 200, 500] {
        if j <= n {
            r.report(&format!("j^2 q_up(1,j) * pi^2/12, j={j}"), (j * j) as f64 * up.pmf(j) / (2.0 / ZETA2));
        }
    }
    Ok(r)
}

/// The two exact links between the occupancy DP and the moment recurrences, and the
/// accelerated solvers against the references.
pub fn exp_identities(ns: &[usize], m: &Moments) -> Result<Report> {
    let mut r = Report::new("exact_identities");
    r.input("n", list(ns));
    for &n in ns {
        if n < 2 || n >= m.t.len() {
            return Err(Error::domain(format!("n = {n} outside the moment table")));
        }
        let a = occupancy(n)?;
        let law = SplitLaw::for_size(n);
        let t_sum = crate::numeric::csum((2..=n).map(|i| a[i] / law.h(i - 1)));
        let hop_sum = crate::numeric::csum((2..=n).map(|i| a[i]));
        r.check(Check::close(&format!("t[{n}] = sum a(n,i)/h[i-1]"), t_sum, m.t[n], 1e-8));
        r.check(Check::close(&format!("thop[{n}] = sum a(n,i)"), hop_sum, m.thop[n], 1e-8));
        let fast = occupancy_fast(n)?;
        let diff = a.iter().zip(&fast).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        r.check(Check::close(&format!("fast occupancy, n={n}"), diff, 0.0, 1e-8));
    }
    let top = *ns.iter().max().unwrap_or(&2);
    let fast_t = depth_mean_fast(top)?;
    let diff = (1..=top).map(|k| (fast_t[k] - m.t[k]).abs()).fold(0.0, f64::max);
    r.check(Check::close(&format!("fast t recurrence, N={top}"), diff, 0.0, 1e-8));
    Ok(r)
}

/// The length constant from `a(n, .)` and a Monte Carlo check of `E[L_n]/n`, which equals
/// the truncated sum exactly at every `n`.
pub fn exp_length(a: &[f64], n_mc: usize, reps: usize, run: Run) -> Result<Report> {
    let lc = length_constant(a)?;
    let mut r = Report::new("length_constant");
    r.input("n", lc.n).input("n_mc", n_mc).input("reps", reps).input("seed", run.seed);
    r.check(Check::holds(
        "ell_hat(n) in [0.606, 0.610]",
        lc.value,
        ELL_REPORTED,
        (0.606..=0.610).contains(&lc.value),
    ));
    r.report("ell_hat(n)", lc.value);
    r.report("tail estimate", lc.tail_estimate);
    r.report("|ell_hat(n) - a(n,2)|", (lc.value - a[2]).abs());
    let target = length_constant(&occupancy_fast(n_mc)?)?.value;
    let xs = run.rep("length-mc", reps, |rng, _| {
        sample_ctcs(n_mc, rng).expect("size").total_length().expect("timed") / n_mc as f64
    });
    let est = Estimate::mean_of(&xs);
    r.estimate("E[L_n]/n", est);
    r.report("ell_hat(n_mc)", target);
    r.check(Check::within_se("E[L_n]/n against ell_hat(n_mc)", &est, target, 4.0));
    r.report("z against ell_hat(n)", est.z_score(lc.value));
    Ok(r)
}

/// Growth chains: the 4-leaf shape law, mean leaf height of grown trees, and the kind
/// frequencies at `n_kind` against their exact finite-`n` values.
pub struct GrowthPlan {
    pub chains4: usize,
    pub n_height: usize,
    pub reps_height: usize,
    pub n_kind: usize,
    pub reps_kind: usize,
}

pub fn exp_growth(plan: &GrowthPlan, t: &[f64], a_limit: &[f64], run: Run) -> Result<Report> {
    let mut r = Report::new("growth");
    r.input("chains4", plan.chains4)
        .input("n_height", plan.n_height)
        .input("reps_height", plan.reps_height)
        .input("n_kind", plan.n_kind)
        .input("reps_kind", plan.reps_kind)
        .input("seed", run.seed);
    let keys = run.rep("grow-4", plan.chains4, |rng, _| grow(4, rng).expect("n = 4").shape_key());
    shape_test(&mut r, "grow(4) shapes", &keys, &shape_distribution(4)?)?;

    let nh = plan.n_height;
    if nh >= t.len() {
        return Err(Error::domain("height check beyond the moment table"));
    }
    let hs = run.rep("grow-height", plan.reps_height, |rng, _| {
        let tree = grow_tree(nh, rng).expect("size").to_clade_tree();
        let h = leaf_heights(&tree).expect("timed");
        h.iter().sum::<f64>() / h.len() as f64
    });
    let est = Estimate::mean_of(&hs);
    r.estimate("mean leaf height of grow(n)", est);
    r.check(Check::within_se(&format!("grow({nh}) mean leaf height vs t[{nh}]"), &est, t[nh], 4.0));

    let n = plan.n_kind;
    let k = kind_frequencies(n, plan.reps_kind, run.seed, run.workers)?;
    let (an, an1) = (occupancy_fast(n)?, occupancy_fast(n + 1)?);
    let (ln, ln1) = (length_constant(&an)?.value, length_constant(&an1)?.value);
    let len_exact = (n + 1) as f64 * ln1 - n as f64 * ln;
    let pair_exact = (n + 1) as f64 * an1[2] - n as f64 * an[2];
    r.estimate("p_up", k.branch_extension)
        .estimate("p_side", k.side_bud)
        .estimate("p_diag", k.side_leaf_extension)
        .estimate("p_up + p_diag", k.length_increase)
        .estimate("2 p_diag", k.pair_increase);
    r.check(Check::within_se("p_up + p_diag vs exact length increment", &k.length_increase, len_exact, 4.0));
    r.check(Check::within_se("2 p_diag vs exact pair increment", &k.pair_increase, pair_exact, 4.0));
    r.check(Check::holds(
        "kind frequencies sum to 1",
        k.branch_extension.value + k.side_bud.value + k.side_leaf_extension.value,
        1.0,
        ((k.branch_extension.value + k.side_bud.value + k.side_leaf_extension.value) - 1.0).abs() < 1e-12,
    ));
    let ell = length_constant(a_limit)?.value;
    r.report("exact length increment", len_exact)
        .report("exact pair increment", pair_exact)
        .report("ell limit proxy", ell)
        .report("a_2 limit proxy", a_limit[2])
        .report("z of p_up + p_diag against ell", k.length_increase.z_score(ell))
        .report("z of 2 p_diag against a_2", k.pair_increase.z_score(a_limit[2]));
    Ok(r)
}

fn leaf_height_samples(n: usize, reps: usize, name: &str, run: Run) -> Result<Vec<f64>> {
    SplitLaw::shared().check_size(n)?;
    Ok(run.rep(name, reps, |rng, _| {
        simulate_chain(n, rng, ChainMode::Continuous)
            .expect("size checked")
            .total_hold()
            .expect("continuous")
    }))
}

/// Standardised leaf heights `(D_n - t[n]) / sd[n]` against the standard normal.
/// Moments are asserted at `check_n`; the KS distance must shrink along `ns`.
pub fn exp_clt(ns: &[usize], check_n: usize, reps: usize, m: &Moments, run: Run) -> Result<Report> {
    let mut r = Report::new("clt");
    r.input("n", list(ns)).input("reps", reps).input("seed", run.seed);
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let mut ks = Vec::new();
    for &n in ns {
        if n >= m.t.len() {
            return Err(Error::domain("CLT n beyond the moment table"));
        }
        let sd = m.var[n].sqrt();
        let zs: Vec<f64> = leaf_height_samples(n, reps, &format!("clt-{n}"), run)?
            .into_iter()
            .map(|x| (x - m.t[n]) / sd)
            .collect();
        let (mean, var) = mean_var(&zs);
        let skew = zs.iter().map(|z| (z - mean).powi(3)).sum::<f64>() / zs.len() as f64 / var.powf(1.5);
        let t = ks_test(&format!("KS vs N(0,1), n={n}"), &zs, |x| normal.cdf(x), KS_THRESHOLD)?;
        r.report(&format!("mean, n={n}"), mean)
            .report(&format!("variance, n={n}"), var)
            .report(&format!("skewness, n={n}"), skew)
            .report(&format!("KS statistic, n={n}"), t.statistic)
            .report(&format!("KS p, n={n}"), t.p_value);
        ks.push(t.statistic);
        if n == check_n {
            r.check(Check::close(&format!("standardised mean, n={n}"), mean, 0.0, 0.02));
            r.check(Check::close(&format!("standardised variance, n={n}"), var, 1.0, 0.03));
            r.artifact(
                &format!("clt_{n}.svg"),
                svg::histogram(&zs, &format!("standardised leaf height, n = {n}"), true),
            );
        }
    }
    let decreasing = ks.windows(2).all(|w| w[1] < w[0]);
    r.check(Check::holds(
        "KS statistic strictly decreasing in n",
        ks.last().copied().unwrap_or(f64::NAN),
        0.0,
        decreasing,
    ));
    Ok(r)
}

/// `P(D_n > t) <= (n - 1) e^{-t}` up to five standard errors.
pub fn exp_tail(n: usize, ts: &[f64], reps: usize, run: Run) -> Result<Report> {
    let xs = leaf_height_samples(n, reps, &format!("tail-{n}"), run)?;
    let mut r = Report::new("tail_bound");
    r.input("n", n).input("reps", reps).input("seed", run.seed);
    for &t in ts {
        let k = xs.iter().filter(|&&x| x > t).count() as u64;
        let est = Estimate::proportion(k, reps as u64);
        let bound = (n - 1) as f64 * (-t).exp();
        r.estimate(&format!("P(D > {t})"), est);
        r.check(Check::holds(
            &format!("P(D > {t}) <= (n-1) e^-t + 5 se"),
            est.value,
            bound,
            est.value <= bound + 5.0 * est.stderr,
        ));
    }
    Ok(r)
}

/// Drift and variance sums against their limits, with the `O(log j / j)` rate fitted on
/// the lower half of a log grid and checked on the upper half.
pub fn exp_drift(j_max: usize) -> Result<Report> {
    if j_max < 1000 {
        return Err(Error::domain("drift experiment needs j_max >= 1000"));
    }
    let mut r = Report::new("drift_variance");
    r.input("j_max", j_max);
    let grid = log_grid(100, j_max, 4);
    let mut scaled = Vec::new();
    for &j in &grid {
        let (a, _) = drift_variance(j)?;
        let c = (a + ZETA2).abs() * j as f64 / (j as f64).ln();
        r.report(&format!("|a(j) + zeta(2)| j / log j, j={j}"), c);
        scaled.push(c);
    }
    let half = grid.len() / 2;
    let fitted = scaled[..=half].iter().copied().fold(0.0, f64::max);
    let worst = scaled[half..].iter().copied().fold(0.0, f64::max);
    r.report("fitted constant", fitted);
    r.check(Check::holds("rate bound holds on the upper grid", worst, fitted, worst <= fitted));
    let (a, b) = drift_variance(j_max)?;
    r.check(Check::close("a(j_max)", a, -ZETA2, 1e-3));
    r.check(Check::close("b(j_max)", b, 2.0 * ZETA3, 1e-2));
    Ok(r)
}

fn random_name<R: Rng + ?Sized>(rng: &mut R) -> String {
    const PLAIN: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_.-";
    const ODD: [&str; 10] = [" ", "'", "(", ")", ",", ":", ";", "[", "]", "é"];
    let len = rng.random_range(1..8);
    (0..len)
        .map(|_| {
            if rng.random_bool(0.15) {
                ODD[rng.random_range(0..ODD.len())].to_string()
            } else {
                (PLAIN[rng.random_range(0..PLAIN.len())] as char).to_string()
            }
        })
        .collect()
}

fn random_length<R: Rng + ?Sized>(rng: &mut R) -> Option<f64> {
    match rng.random_range(0..5) {
        0 => None,
        1 => Some(0.0),
        2 => Some(rng.random::<f64>() * 1e-8),
        3 => Some(rng.random::<f64>() * 1e6),
        _ => Some(rng.random::<f64>()),
    }
}

/// A random labelled tree with polytomies, quoted names and assorted lengths.
pub fn random_phylo<R: Rng + ?Sized>(leaves: usize, rng: &mut R) -> PhyloTree {
    // grow by attaching leaves to random nodes, then relabel in preorder
    let mut children: Vec<Vec<usize>> = vec![Vec::new()];
    let mut leaf_count = 1;
    while leaf_count < leaves {
        let v = rng.random_range(0..children.len());
        if children[v].is_empty() {
            let (a, b) = (children.len(), children.len() + 1);
            children.push(Vec::new());
            children.push(Vec::new());
            children[v] = vec![a, b];
        } else {
            let a = children.len();
            children.push(Vec::new());
            let at = rng.random_range(0..=children[v].len());
            children[v].insert(at, a);
        }
        leaf_count += 1;
    }
    let mut order = Vec::new();
    let mut stack = vec![0];
    while let Some(v) = stack.pop() {
        order.push(v);
        stack.extend(children[v].iter().rev());
    }
    let mut index = vec![0; children.len()];
    for (k, &v) in order.iter().enumerate() {
        index[v] = k;
    }
    let nodes = order
        .iter()
        .map(|&v| {
            let leaf = children[v].is_empty();
            PhyloNode {
                name: (leaf || rng.random_bool(0.3)).then(|| random_name(rng)),
                length: random_length(rng),
                children: children[v].iter().map(|&c| index[c]).collect(),
            }
        })
        .collect();
    PhyloTree { nodes }
}

fn mutate<R: Rng + ?Sized>(text: &str, rng: &mut R) -> Vec<u8> {
    const GRAMMAR: &[u8] = b"(),:;'[] .-e0123456789Ab";
    let mut b = text.as_bytes().to_vec();
    for _ in 0..rng.random_range(1..6) {
        let pos = rng.random_range(0..=b.len());
        match rng.random_range(0..3) {
            0 if pos < b.len() => {
                b.remove(pos);
            }
            1 if pos < b.len() => b[pos] = GRAMMAR[rng.random_range(0..GRAMMAR.len())],
            _ => b.insert(pos, GRAMMAR[rng.random_range(0..GRAMMAR.len())]),
        }
    }
    b
}

fn random_bytes<R: Rng + ?Sized>(rng: &mut R) -> Vec<u8> {
    const GRAMMAR: &[u8] = b"(),:;'[] \t\n.-+eE0123456789ABxyz_";
    let len = rng.random_range(0..200);
    (0..len)
        .map(|_| {
            if rng.random_bool(0.8) {
                GRAMMAR[rng.random_range(0..GRAMMAR.len())]
            } else {
                rng.random()
            }
        })
        .collect()
}

/// Newick checks: round trips over a generated corpus, a fuzz run, and a model
/// comparison on an exported DTCS tree.
pub struct NewickPlan {
    pub corpus: usize,
    pub fuzz: usize,
    pub compare_n: usize,
    pub compare_reps: usize,
}

/// Parse, serialise and re-parse `text`; `None` on success, else a description.
pub fn round_trip_failure(text: &str) -> Option<String> {
    let t1 = match newick::parse(text) {
        Ok(t) => t,
        Err(e) => return Some(format!("parse: {e}")),
    };
    let s1 = newick::serialize(&t1);
    match newick::parse(&s1) {
        Ok(t2) if newick::isomorphic(&t1, &t2) && newick::serialize(&t2) == s1 => None,
        Ok(_) => Some("re-parse not isomorphic".into()),
        Err(e) => Some(format!("re-parse: {e}")),
    }
}

/// Generated corpus: DTCS and CTCS exports, random labelled trees with polytomies, and
/// 77-leaf random binary trees.
pub fn newick_corpus(size: usize, seed: u64) -> Vec<String> {
    replicate(seed, domain("newick-corpus"), size, 1, |rng, r| match r % 4 {
        0 => sample_dtcs(rng.random_range(2..300), rng).expect("size").to_newick(),
        1 => sample_ctcs(rng.random_range(2..300), rng).expect("size").to_newick(),
        2 => {
            let n = rng.random_range(1..120);
            newick::serialize(&random_phylo(n, rng))
        }
        _ => {
            let t = sample_dtcs(77, rng).expect("size").to_newick();
            let mut p = newick::parse(&t).expect("export parses");
            for node in &mut p.nodes {
                if node.children.is_empty() {
                    node.name = Some(random_name(rng));
                }
            }
            newick::serialize(&p)
        }
    })
}

pub fn exp_newick(plan: &NewickPlan, run: Run) -> Result<Report> {
    let mut r = Report::new("newick");
    r.input("corpus", plan.corpus)
        .input("fuzz", plan.fuzz)
        .input("compare_n", plan.compare_n)
        .input("compare_reps", plan.compare_reps)
        .input("seed", run.seed);
    let corpus = newick_corpus(plan.corpus, run.seed);
    let failures: Vec<String> = corpus.iter().filter_map(|t| round_trip_failure(t)).collect();
    for f in failures.iter().take(5) {
        r.note(format!("round trip: {f}"));
    }
    r.check(Check::holds("round-trip failures", failures.len() as f64, 0.0, failures.is_empty()));

    let inputs = replicate(run.seed, domain("newick-fuzz"), plan.fuzz, 1, |rng, k| {
        if k % 2 == 0 {
            random_bytes(rng)
        } else {
            mutate(&corpus[k % corpus.len()], rng)
        }
    });
    let (mut crashes, mut bad_offsets, mut accepted, mut slowest) = (0u64, 0u64, 0u64, Duration::ZERO);
    for bytes in &inputs {
        let text = String::from_utf8_lossy(bytes);
        let start = Instant::now();
        match catch_unwind(AssertUnwindSafe(|| newick::parse(&text))) {
            Err(_) => crashes += 1,
            Ok(Ok(_)) => accepted += 1,
            Ok(Err(Error::Parse { offset, .. })) if offset <= text.len() => {}
            Ok(Err(_)) => bad_offsets += 1,
        }
        slowest = slowest.max(start.elapsed());
    }
    r.check(Check::holds("fuzz crashes", crashes as f64, 0.0, crashes == 0));
    r.check(Check::holds("fuzz errors without a valid offset", bad_offsets as f64, 0.0, bad_offsets == 0));
    r.check(Check::holds("every fuzz input parsed within 1 s", 1.0, 1.0, slowest < Duration::from_secs(1)));
    r.report("fuzz inputs accepted", accepted as f64);

    let mut rng = substream(run.seed, domain("newick-self"), 0);
    let data = newick::parse(&sample_dtcs(plan.compare_n, &mut rng)?.to_newick())?;
    let cmp = newick::compare(&data, plan.compare_reps, run.seed, run.workers)?;
    for t in cmp.report.tests {
        r.test(TestResult { name: format!("compare: {}", t.name), ..t });
    }
    for c in cmp.report.checks {
        r.check(Check { name: format!("compare: {}", c.name), ..c });
    }
    for (k, v) in cmp.report.reported {
        r.report(&format!("compare: {k}"), v);
    }
    Ok(r)
}

/// Correlation of the heights of two random leaves of one tree.
///
/// `r_hat` comes from the two-path sampler at `n`. At `n_ltv` full trees check the law of
/// total variance: the mean over trees of `Var(D | T) + (E[D | T] - t[n])^2` is `var[n]`.
pub fn exp_two_leaf_correlation(
    n: usize,
    reps: usize,
    n_ltv: usize,
    reps_ltv: usize,
    m: &Moments,
    run: Run,
) -> Result<Report> {
    if n < 2 || n_ltv >= m.t.len() || n_ltv < 2 {
        return Err(Error::domain("correlation sizes outside range"));
    }
    SplitLaw::shared().check_size(n)?;
    let pairs = run.rep(&format!("pairs-{n}"), reps, |rng, _| loop {
        if let Some(p) = leaf_pair_heights(n, rng).expect("size checked") {
            return p;
        }
    });
    let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let (mx, vx) = mean_var(&x);
    let (my, vy) = mean_var(&y);
    let cov = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / (reps - 1) as f64;
    let rho = cov / (vx * vy).sqrt();
    let se = (1.0 - rho * rho) / (reps as f64).sqrt();
    let mut r = Report::new("two_leaf_correlation");
    r.input("n", n).input("reps", reps).input("n_ltv", n_ltv).input("reps_ltv", reps_ltv).input("seed", run.seed);
    r.estimate("r_hat", Estimate::new(rho, se, reps));
    r.report("r_hat", rho).report("r_inf", R_INF).report("r_hat in [0.33, 0.46]", ((0.33..=0.46).contains(&rho)) as u8 as f64);

    let t = m.t[n_ltv];
    let parts = run.rep(&format!("ltv-{n_ltv}"), reps_ltv, |rng, _| {
        let h = leaf_heights(&sample_ctcs(n_ltv, rng).expect("size")).expect("timed");
        let k = h.len() as f64;
        let mean = h.iter().sum::<f64>() / k;
        let within = h.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / k;
        (within, (mean - t) * (mean - t))
    });
    let z: Vec<f64> = parts.iter().map(|p| p.0 + p.1).collect();
    let est = Estimate::mean_of(&z);
    let between = parts.iter().map(|p| p.1).sum::<f64>() / reps_ltv as f64;
    r.estimate("within + between", est);
    r.check(Check::within_se("within + between = var[n]", &est, m.var[n_ltv], 4.0));
    r.report("between / var[n]", between / m.var[n_ltv]);
    Ok(r)
}

/// Report-only extremes: `D*_n / log n`, `S^(2) / (n^2 log n)` and the hop extremes.
pub struct ExtremesPlan {
    pub dstar: Vec<(usize, usize)>,
    pub n_power: usize,
    pub reps_power: usize,
    pub n_hops: usize,
    pub reps_hops: usize,
}

pub fn exp_extremes(plan: &ExtremesPlan, run: Run) -> Result<Report> {
    let mut r = Report::new("extremes");
    r.input("seed", run.seed);
    let mut means = Vec::new();
    for &(n, reps) in &plan.dstar {
        SplitLaw::shared().check_size(n)?;
        let xs = run.rep(&format!("dstar-{n}"), reps, |rng, _| {
            let h = leaf_heights(&sample_ctcs(n, rng).expect("size")).expect("timed");
            h.into_iter().fold(0.0, f64::max) / (n as f64).ln()
        });
        let est = Estimate::mean_of(&xs);
        r.input(&format!("dstar reps n={n}"), reps);
        r.estimate(&format!("D*/log n, n={n}"), est);
        r.report(&format!("D*/log n, n={n}"), est.value);
        means.push(est.value);
    }
    r.report("D*/log n conjectured limit", C_HEIGHT);
    r.report("D*/log n increasing", means.windows(2).all(|w| w[1] > w[0]) as u8 as f64);
    r.report("D*/log n within [1.5, 2.1]", means.iter().all(|m| (1.5..=2.1).contains(m)) as u8 as f64);

    let n = plan.n_power;
    let s2 = run.rep("power-2", plan.reps_power, |rng, _| {
        power_sum(&sample_dtcs(n, rng).expect("size"), 2.0) / ((n * n) as f64 * (n as f64).ln())
    });
    r.input("power n", n).input("power reps", plan.reps_power);
    r.estimate("S2/(n^2 log n)", Estimate::mean_of(&s2));
    r.report("S2/(n^2 log n)", Estimate::mean_of(&s2).value);

    let n = plan.n_hops;
    let hops = run.rep("hop-extremes", plan.reps_hops, |rng, _| {
        let e = hop_extremes(&sample_dtcs(n, rng).expect("size"));
        let l2 = (n as f64).ln().powi(2);
        (e.max as f64 / l2, e.greedy as f64 / l2, e.ties as f64)
    });
    r.input("hops n", n).input("hops reps", plan.reps_hops);
    let col = |f: fn(&(f64, f64, f64)) -> f64| hops.iter().map(f).collect::<Vec<f64>>();
    r.report("L*/log^2 n", Estimate::mean_of(&col(|h| h.0)).value)
        .report("L+/log^2 n", Estimate::mean_of(&col(|h| h.1)).value)
        .report("3/pi^2", 0.5 / ZETA2)
        .report("greedy ties per tree", Estimate::mean_of(&col(|h| h.2)).value);
    Ok(r)
}

/// The `c1` trend of `a(n, .)`.
pub fn exp_c1(a: &[f64]) -> Result<Report> {
    let n = a.len() - 1;
    let trend = c1_trend(a, &default_c1_grid(n))?;
    let mut r = Report::new("c1_trend");
    r.input("n", n);
    for (&(j, b), ratio) in trend.points.iter().zip(&trend.ratios) {
        r.report(&format!("b_j, j={j}"), b);
        r.report(&format!("zeta(2) j a_j / log j, j={j}"), *ratio);
    }
    r.report("c1 tail average", trend.tail_average);
    r.report("c1 reference", crate::constants::C1_REPORTED);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_distribution_small() {
        let s3 = shape_distribution(3).unwrap();
        assert_eq!(s3.len(), 2);
        assert!(s3.values().all(|&p| (p - 0.5).abs() < 1e-15));
        let s4 = shape_distribution(4).unwrap();
        assert_eq!(s4.len(), 5);
        assert!((s4.values().sum::<f64>() - 1.0).abs() < 1e-14);
        // the balanced shape is the (2,2) root split
        assert!((s4["B(PP)"] - 3.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn deletion_types_cover_ctcs4() {
        let t = CladeTree::from_parts(vec![4, 1, 3, 1, 2, 1, 1], Some(vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0])).unwrap();
        let types: Vec<usize> = (0..4).map(|d| deletion_type(&t, d)).collect();
        assert_eq!(types, vec![0, 2, 3, 3]);
        let t = CladeTree::from_parts(vec![4, 2, 1, 1, 2, 1, 1], Some(vec![1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0])).unwrap();
        assert!((0..4).all(|d| deletion_type(&t, d) == 1));
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(10, 50_000, 4);
        assert_eq!(g[0], 10);
        assert_eq!(*g.last().unwrap(), 50_000);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn small_runs_are_worker_independent() {
        let a = exp_consistency(3, 2000, Run::new(3, 1)).unwrap();
        let b = exp_consistency(3, 2000, Run::new(3, 3)).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn corpus_round_trips() {
        for t in newick_corpus(40, 9) {
            assert_eq!(round_trip_failure(&t), None, "{t}");
        }
    }
}
