//! Statistical verification: estimates, test outcomes, experiment reports, and the
//! named experiments that check the model's quantitative properties.

pub mod experiments;
pub mod gof;
pub mod suite;

use serde::Serialize;

pub use gof::{chi_square, ks_test, ks_test_discrete, ks_two_sample};

/// Single KS tests pass when `p > 0.01`.
pub const KS_THRESHOLD: f64 = 0.01;
/// Chi-square batteries pass when `p > 1e-3`.
pub const CHI2_THRESHOLD: f64 = 1e-3;

/// A Monte Carlo point estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub reps: usize,
    pub ci95: (f64, f64),
}

impl Estimate {
    pub fn new(value: f64, stderr: f64, reps: usize) -> Self {
        let stderr = stderr.max(0.0);
        Estimate {
            value,
            stderr,
            reps,
            ci95: (value - 1.96 * stderr, value + 1.96 * stderr),
        }
    }

    /// Sample mean with its standard error.
    pub fn mean_of(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Estimate::new(f64::NAN, f64::NAN, 0);
        }
        let mean = crate::numeric::pairwise_sum(xs) / n as f64;
        if n == 1 {
            return Estimate::new(mean, 0.0, 1);
        }
        let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
        let var = crate::numeric::pairwise_sum(&dev) / (n - 1) as f64;
        Estimate::new(mean, (var / n as f64).sqrt(), n)
    }

    /// Proportion `k / n` with the binomial standard error.
    pub fn proportion(k: u64, n: u64) -> Self {
        let p = k as f64 / n as f64;
        Estimate::new(p, (p * (1.0 - p) / n as f64).sqrt(), n as usize)
    }

    /// Number of standard errors between the estimate and `target`.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.stderr == 0.0 {
            return if self.value == target { 0.0 } else { f64::INFINITY };
        }
        (self.value - target) / self.stderr
    }

    /// True when `|value - target| < k * stderr`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() < k * self.stderr
    }
}

/// Outcome of a goodness-of-fit test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub name: String,
    pub statistic: f64,
    pub p_value: f64,
    pub pass: bool,
    pub threshold: f64,
}

impl TestResult {
    pub fn new(name: &str, statistic: f64, p_value: f64, threshold: f64) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        TestResult {
            name: name.to_string(),
            statistic,
            p_value,
            pass: p_value > threshold,
            threshold,
        }
    }
}

/// A numerical comparison `|value - target| <= tolerance` (or a bound check).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn close(name: &str, value: f64, target: f64, tolerance: f64) -> Self {
        Check {
            name: name.to_string(),
            value,
            target,
            tolerance,
            pass: (value - target).abs() <= tolerance,
        }
    }

    /// Passes when the estimate is within `k` standard errors of `target`.
    pub fn within_se(name: &str, est: &Estimate, target: f64, k: f64) -> Self {
        Check {
            name: name.to_string(),
            value: est.value,
            target,
            tolerance: k * est.stderr,
            pass: est.within(target, k),
        }
    }

    /// A boolean condition carrying a value for the record.
    pub fn holds(name: &str, value: f64, target: f64, pass: bool) -> Self {
        Check {
            name: name.to_string(),
            value,
            target,
            tolerance: 0.0,
            pass,
        }
    }
}

/// Machine-readable result of one experiment.
///
/// `tests` and `checks` are asserted; `reported` values are informational only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub name: String,
    pub inputs: Vec<(String, String)>,
    pub estimates: Vec<(String, Estimate)>,
    pub tests: Vec<TestResult>,
    pub checks: Vec<Check>,
    pub reported: Vec<(String, f64)>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub artifacts: Vec<(String, String)>,
}

impl Report {
    pub fn new(name: &str) -> Self {
        Report {
            name: name.to_string(),
            inputs: Vec::new(),
            estimates: Vec::new(),
            tests: Vec::new(),
            checks: Vec::new(),
            reported: Vec::new(),
            notes: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn input(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.inputs.push((key.to_string(), value.to_string()));
        self
    }

    pub fn estimate(&mut self, key: &str, est: Estimate) -> &mut Self {
        self.estimates.push((key.to_string(), est));
        self
    }

    pub fn test(&mut self, t: TestResult) -> &mut Self {
        self.tests.push(t);
        self
    }

    pub fn check(&mut self, c: Check) -> &mut Self {
        self.checks.push(c);
        self
    }

    pub fn report(&mut self, key: &str, value: f64) -> &mut Self {
        self.reported.push((key.to_string(), value));
        self
    }

    pub fn note(&mut self, s: impl Into<String>) -> &mut Self {
        self.notes.push(s.into());
        self
    }

    /// Attaches a named text artifact (SVG, CSV) written next to the JSON by the CLI.
    pub fn artifact(&mut self, file: &str, contents: String) -> &mut Self {
        self.artifacts.push((file.to_string(), contents));
        self
    }

    pub fn reported_value(&self, key: &str) -> Option<f64> {
        self.reported.iter().find(|(k, _)| k == key).map(|&(_, v)| v)
    }

    /// All asserted tests and checks passed.
    pub fn passed(&self) -> bool {
        self.tests.iter().all(|t| t.pass) && self.checks.iter().all(|c| c.pass)
    }

    /// Names of the failing tests and checks.
    pub fn failures(&self) -> Vec<String> {
        self.tests
            .iter()
            .filter(|t| !t.pass)
            .map(|t| format!("{} (stat {:.6}, p {:.3e})", t.name, t.statistic, t.p_value))
            .chain(self.checks.iter().filter(|c| !c.pass).map(|c| {
                format!(
                    "{} (value {:.6}, target {:.6}, tol {:.2e})",
                    c.name, c.value, c.target, c.tolerance
                )
            }))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// One CSV line per estimate, test, check and reported value.
    pub fn to_csv(&self) -> String {
        use crate::numeric::format_g17 as g;
        let mut out = String::from("experiment,kind,name,value,target_or_stderr,p_or_tol,pass\n");
        for (k, e) in &self.estimates {
            out += &format!("{},estimate,{},{},{},,\n", self.name, k, g(e.value), g(e.stderr));
        }
        for t in &self.tests {
            out += &format!(
                "{},test,{},{},,{},{}\n",
                self.name,
                t.name,
                g(t.statistic),
                g(t.p_value),
                t.pass
            );
        }
        for c in &self.checks {
            out += &format!(
                "{},check,{},{},{},{},{}\n",
                self.name,
                c.name,
                g(c.value),
                g(c.target),
                g(c.tolerance),
                c.pass
            );
        }
        for (k, v) in &self.reported {
            out += &format!("{},reported,{},{},,,\n", self.name, k, g(*v));
        }
        out
    }
}
