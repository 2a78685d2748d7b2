//! The acceptance suites.
//!
//! `core` runs criteria AC-1 to AC-13 at their stated scale; `full` adds larger and
//! supplementary runs. The moment tables and `a(50000, .)` are computed once per process.

use std::sync::OnceLock;

use super::experiments::{
    exp_branchpoint, exp_c1, exp_clt, exp_consistency, exp_drift, exp_extremes, exp_growth,
    exp_identities, exp_length, exp_mean_depth, exp_newick, exp_occupation_table,
    exp_sum_squares, exp_tail, exp_two_leaf_correlation, ExtremesPlan, GrowthPlan, NewickPlan,
    Run,
};
use super::{Check, Report};
use crate::chain::{moments, occupancy, Moments};
use crate::error::{Error, Result};

/// Size of the shared moment and occupancy tables.
pub const TABLE_N: usize = 50_000;

static MOMENTS: OnceLock<Moments> = OnceLock::new();
static OCCUPANCY: OnceLock<Vec<f64>> = OnceLock::new();

/// `t`, `m2`, `var` and `thop` up to [`TABLE_N`].
pub fn shared_moments() -> &'static Moments {
    MOMENTS.get_or_init(|| moments(TABLE_N).expect("table size within range"))
}

/// `a(TABLE_N, .)` from the reference solver.
pub fn shared_occupancy() -> &'static [f64] {
    OCCUPANCY.get_or_init(|| occupancy(TABLE_N).expect("table size within range"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Core,
    Full,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "core" => Ok(Suite::Core),
            "full" => Ok(Suite::Full),
            _ => Err(Error::domain(format!("unknown suite {s:?} (core or full)"))),
        }
    }
}

/// One line of a suite: an acceptance criterion or a supplementary experiment.
#[derive(Debug, Clone)]
pub struct Entry {
    /// `AC-1` .. `AC-13`, or `extra`.
    pub id: String,
    pub title: &'static str,
    pub report: Report,
}

pub const CRITERIA: [&str; 13] = [
    "branchpoint height is Exponential(1)",
    "pruned CTCS(k+1) is CTCS(k)",
    "expected sum of squared clade sizes",
    "mean depth constant and sandwich bounds",
    "occupation probabilities and first fringe step",
    "exact identities between the dynamic programs",
    "length constant",
    "growth algorithm",
    "central limit shape of the leaf height",
    "leaf height tail bound",
    "drift and variance sums",
    "Newick round trip, fuzzing and model comparison",
    "report-only numerics",
];

fn merge(into: &mut Report, from: Report) {
    let prefix = from.name.clone();
    for t in from.tests {
        into.test(super::TestResult { name: format!("{prefix}: {}", t.name), ..t });
    }
    for c in from.checks {
        into.check(Check { name: format!("{prefix}: {}", c.name), ..c });
    }
    for (k, e) in from.estimates {
        into.estimate(&format!("{prefix}: {k}"), e);
    }
    for (k, v) in from.reported {
        into.report(&format!("{prefix}: {k}"), v);
    }
    for (k, v) in from.inputs {
        into.input(&format!("{prefix}: {k}"), v);
    }
    into.notes.extend(from.notes);
    into.artifacts.extend(from.artifacts);
}

/// Keys whose presence AC-13 requires.
pub const REPORT_ONLY_KEYS: [&str; 4] = [
    "two_leaf_correlation: r_hat",
    "extremes: D*/log n, n=100000",
    "c1_trend: c1 tail average",
    "extremes: S2/(n^2 log n)",
];

/// Runs one acceptance criterion (1..=13).
pub fn run_criterion(id: usize, run: Run) -> Result<Report> {
    let mut r = Report::new(&format!("ac{id:02}"));
    match id {
        1 => merge(&mut r, exp_branchpoint(&[10, 100, 1000], 100_000, 10, run)?),
        2 => {
            merge(&mut r, exp_consistency(3, 100_000, run)?);
            merge(&mut r, exp_consistency(4, 100_000, run)?);
        }
        3 => merge(&mut r, exp_sum_squares(200, &[0.5, 1.0, 2.0], 100_000, run)?),
        4 => merge(&mut r, exp_mean_depth(shared_moments())?),
        5 => merge(&mut r, exp_occupation_table(shared_occupancy())?),
        6 => merge(&mut r, exp_identities(&[10, 100, 1000, 10_000], shared_moments())?),
        7 => merge(&mut r, exp_length(shared_occupancy(), 20_000, 2_000, run)?),
        8 => {
            let plan = GrowthPlan {
                chains4: 1_000_000,
                n_height: 1000,
                reps_height: 10_000,
                n_kind: 10_000,
                reps_kind: 100_000,
            };
            merge(&mut r, exp_growth(&plan, &shared_moments().t, shared_occupancy(), run)?);
        }
        9 => merge(&mut r, exp_clt(&[800, 3200, 12_800], 3200, 100_000, shared_moments(), run)?),
        10 => merge(&mut r, exp_tail(1000, &[2.0, 4.0, 6.0, 8.0], 100_000, run)?),
        11 => merge(&mut r, exp_drift(100_000)?),
        12 => {
            let plan = NewickPlan {
                corpus: 100,
                fuzz: 10_000,
                compare_n: 500,
                compare_reps: 200,
            };
            merge(&mut r, exp_newick(&plan, run)?);
        }
        13 => {
            let corr = exp_two_leaf_correlation(100_000, 100_000, 1000, 2000, shared_moments(), run)?;
            let plan = ExtremesPlan {
                dstar: vec![(1000, 1000), (10_000, 300), (100_000, 100)],
                n_power: 10_000,
                reps_power: 1000,
                n_hops: 30_000,
                reps_hops: 200,
            };
            let ext = exp_extremes(&plan, run)?;
            let c1 = exp_c1(shared_occupancy())?;
            // values are informational; only their presence is checked
            let mut inner = Report::new("report_only");
            for part in [corr, ext, c1] {
                let name = part.name.clone();
                for (k, v) in part.reported {
                    inner.report(&format!("{name}: {k}"), v);
                }
                for (k, e) in part.estimates {
                    inner.estimate(&format!("{name}: {k}"), e);
                }
            }
            for key in REPORT_ONLY_KEYS {
                let v = inner.reported_value(key);
                r.check(Check::holds(
                    &format!("reported: {key}"),
                    v.unwrap_or(f64::NAN),
                    0.0,
                    v.is_some_and(f64::is_finite),
                ));
            }
            r.reported = inner.reported;
            r.estimates = inner.estimates;
        }
        _ => return Err(Error::domain(format!("no criterion AC-{id}"))),
    }
    Ok(r)
}

fn extras(suite: Suite, run: Run) -> Result<Vec<(&'static str, Report)>> {
    let mut out = vec![(
        "law of total variance for leaf heights",
        exp_two_leaf_correlation(1000, 20_000, 1000, 2000, shared_moments(), run)?,
    )];
    if suite == Suite::Full {
        out.push(("consistency for k = 5", exp_consistency(5, 100_000, run)?));
        out.push(("consistency for k = 6", exp_consistency(6, 100_000, run)?));
        out.push(("mean depth to N = 100000", exp_mean_depth(&moments(100_000)?)?));
        let plan = ExtremesPlan {
            dstar: vec![(1000, 10_000), (10_000, 2000), (100_000, 500)],
            n_power: 10_000,
            reps_power: 10_000,
            n_hops: 30_000,
            reps_hops: 2000,
        };
        out.push(("extremes at larger replicate counts", exp_extremes(&plan, run)?));
    }
    Ok(out)
}

/// Runs a suite, calling `progress` after each entry.
pub fn run_suite(suite: Suite, run: Run, mut progress: impl FnMut(&Entry)) -> Result<Vec<Entry>> {
    let mut entries = Vec::new();
    for id in 1..=13 {
        let e = Entry {
            id: format!("AC-{id}"),
            title: CRITERIA[id - 1],
            report: run_criterion(id, run)?,
        };
        progress(&e);
        entries.push(e);
    }
    for (title, report) in extras(suite, run)? {
        let e = Entry {
            id: "extra".into(),
            title,
            report,
        };
        progress(&e);
        entries.push(e);
    }
    Ok(entries)
}
