use std::path::Path;
use std::process::{Command, Output};

fn betasplit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_betasplit"))
        .args(args)
        .env_remove("BETASPLIT_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = betasplit(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    betasplit(args).status.code().unwrap()
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name).display().to_string()
}

#[test]
fn sample_ctcs_is_deterministic() {
    let a = stdout(&["sample-ctcs", "--n", "20", "--seed", "7", "--format", "csv"]);
    let b = stdout(&["sample-ctcs", "--n", "20", "--seed", "7", "--format", "csv"]);
    assert_eq!(a, b);
    assert!(a.starts_with("size,left_size,hold_time\n20,"));
    assert_eq!(a.lines().count(), 1 + 39);
    assert_ne!(a, stdout(&["sample-ctcs", "--n", "20", "--seed", "8"]));
}

#[test]
fn seed_comes_from_the_environment() {
    let env = Command::new(env!("CARGO_BIN_EXE_betasplit"))
        .args(["sample-dtcs", "--n", "30"])
        .env("BETASPLIT_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(env.stdout).unwrap(), stdout(&["sample-dtcs", "--n", "30", "--seed", "11"]));
    assert_eq!(stdout(&["sample-dtcs", "--n", "30"]), stdout(&["sample-dtcs", "--n", "30", "--seed", "0"]));
}

#[test]
fn recurrence_t4_is_17_over_11() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    stdout(&["recurrence", "--N", "100", "--out", path.to_str().unwrap()]);
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 101);
    let row: Vec<&str> = text.lines().find(|l| l.starts_with("4,")).unwrap().split(',').collect();
    let t4: f64 = row[2].parse().unwrap();
    assert!((t4 - 17.0 / 11.0).abs() < 1e-12, "{t4}");
    // 17 significant digits
    assert_eq!(row[2].trim_start_matches("1.").len(), 16);
}

#[test]
fn occupancy_small_values() {
    let text = stdout(&["occupancy", "--n", "4", "--reference"]);
    let a2: f64 = text.lines().nth(2).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((a2 - 7.0 / 11.0).abs() < 1e-15);
    assert_eq!(text, stdout(&["occupancy", "--n", "4"]).replace("0.63636363636363635", "0.63636363636363646"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&["sample-ctcs"]), 2);
    assert_eq!(code(&["sample-ctcs", "--n", "5", "--bogus"]), 2);
    assert_eq!(code(&["sample-ctcs", "--n", "0"]), 2);
    assert_eq!(code(&["sample-ctcs", "--n", "5", "--format", "png"]), 2);
    assert_eq!(code(&["recurrence", "--N", "5", "--format", "svg"]), 2);
    assert_eq!(code(&["verify", "--suite", "huge", "--out", "/tmp/x"]), 2);
    assert_eq!(code(&["newick-stats", "/no/such/file.nwk"]), 2);
    assert_eq!(code(&["nonsense"]), 2);
    assert_eq!(code(&["stats", "--n", "5", "--workers", "0"]), 2);
}

#[test]
fn malformed_newick_is_a_usage_error_with_offset() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.nwk");
    std::fs::write(&p, "((A,B),C;").unwrap();
    let out = betasplit(&["newick-stats", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("byte"));
}

#[test]
fn every_subcommand_documents_its_flags() {
    let cases: &[(&str, &[&str])] = &[
        ("sample-dtcs", &["--n", "--format", "--newick", "--out", "--seed", "--workers"]),
        ("sample-ctcs", &["--n", "--format", "--newick", "--out", "--seed", "--workers"]),
        ("grow", &["--n", "--trace", "--format", "--out", "--seed", "--workers"]),
        ("prune", &["--n", "--input", "--k", "--leaves", "--format", "--out", "--seed"]),
        ("fringe", &["--levels", "--horizon", "--format", "--out", "--seed"]),
        ("recurrence", &["--N", "--format", "--out"]),
        ("occupancy", &["--n", "--reference", "--format", "--out"]),
        ("stats", &["--n", "--reps", "--model", "--powers", "--format", "--out", "--seed", "--workers"]),
        ("verify", &["--suite", "--criterion", "--out", "--seed", "--workers"]),
        ("newick-stats", &["--compare", "--reps", "--format", "--out", "--seed", "--workers"]),
    ];
    for (cmd, flags) in cases {
        let help = stdout(&[cmd, "--help"]);
        for f in *flags {
            let line = help
                .lines()
                .find(|l| l.trim_start().starts_with(f) && l.contains(&format!("{f} ")) || l.trim() == *f || l.trim_start().starts_with(&format!("{f} <")))
                .unwrap_or_else(|| panic!("{cmd} --help lacks {f}:\n{help}"));
            assert!(line.trim().len() > f.len() + 3, "{cmd}: {f} has no description");
        }
    }
}

#[test]
fn workers_never_change_output() {
    let one = stdout(&["stats", "--n", "50", "--reps", "40", "--seed", "3", "--workers", "1"]);
    let four = stdout(&["stats", "--n", "50", "--reps", "40", "--seed", "3", "--workers", "4"]);
    assert_eq!(one, four);
    let f = data("primates.nwk");
    let a = stdout(&["newick-stats", &f, "--compare", "--reps", "30", "--workers", "1"]);
    let b = stdout(&["newick-stats", &f, "--compare", "--reps", "30", "--workers", "3"]);
    assert_eq!(a, b);
    assert!(a.contains("extreme_imbalance,"));
}

#[test]
fn grow_trace_has_tree_and_steps() {
    let text = stdout(&["grow", "--n", "6", "--seed", "2", "--trace"]);
    let blocks: Vec<&str> = text.split("\n\n").collect();
    assert_eq!(blocks.len(), 2);
    assert_eq!(blocks[0].lines().count(), 1 + 11);
    assert!(blocks[1].starts_with("step,buds_after,kind"));
    assert_eq!(blocks[1].lines().count(), 1 + 4);
    let plain = stdout(&["grow", "--n", "6", "--seed", "2"]);
    assert_eq!(plain.trim_end(), blocks[0].trim_end());
}

#[test]
fn prune_reads_a_sampled_tree() {
    let dir = tempfile::tempdir().unwrap();
    let tree = dir.path().join("t.csv");
    stdout(&["sample-ctcs", "--n", "12", "--seed", "5", "--out", tree.to_str().unwrap()]);
    let all = stdout(&["prune", "--input", tree.to_str().unwrap()]);
    // same sizes; holds agree up to the roundoff of the edge/side-bud representation
    let original = std::fs::read_to_string(&tree).unwrap();
    assert_eq!(all.lines().count(), original.lines().count());
    for (x, y) in all.lines().zip(original.lines()).skip(1) {
        let (x, y): (Vec<&str>, Vec<&str>) = (x.split(',').collect(), y.split(',').collect());
        assert_eq!(x[..2], y[..2]);
        if !x[2].is_empty() {
            let (a, b): (f64, f64) = (x[2].parse().unwrap(), y[2].parse().unwrap());
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }
    let two = stdout(&["prune", "--input", tree.to_str().unwrap(), "--leaves", "0,11"]);
    assert_eq!(two.lines().count(), 1 + 3);
    assert_eq!(code(&["prune", "--input", tree.to_str().unwrap(), "--leaves", "3"]), 2);
}

#[test]
fn formats_are_well_formed() {
    for cmd in [
        vec!["sample-ctcs", "--n", "15"],
        vec!["grow", "--n", "7", "--trace"],
        vec!["fringe", "--levels", "5", "--horizon", "500"],
        vec!["prune", "--n", "20", "--k", "5"],
    ] {
        let mut j = cmd.clone();
        j.extend(["--format", "json"]);
        let v: serde_json::Value = serde_json::from_str(&stdout(&j)).unwrap();
        assert!(v.is_object(), "{cmd:?}");
        let mut s = cmd.clone();
        s.extend(["--format", "svg"]);
        let svg = stdout(&s);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"), "{cmd:?}");
    }
    let nwk = stdout(&["sample-ctcs", "--n", "15", "--newick"]);
    assert!(nwk.trim_end().ends_with(';'));
}

#[test]
fn newick_stats_on_the_balanced_corpus_tree() {
    let text = stdout(&["newick-stats", &data("balanced16.nwk")]);
    assert!(text.contains("n_leaves,16\n"));
    assert!(text.contains("max_hop_depth,4\n"));
    let j: serde_json::Value = serde_json::from_str(&stdout(&["newick-stats", &data("balanced16.nwk"), "--format", "json"])).unwrap();
    assert_eq!(j["records"].as_array().unwrap().len(), 15);
}

#[test]
fn verify_writes_reports_and_sets_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rep");
    let o = out.to_str().unwrap();
    assert_eq!(code(&["verify", "--criterion", "6", "--out", o]), 0);
    for f in ["ac-6.json", "ac-6.csv", "summary.json", "summary.csv", "summary.svg"] {
        assert!(out.join(f).exists(), "{f}");
    }
    // the a(n,5) reference entry is the one criterion that cannot be met
    assert_eq!(code(&["verify", "--criterion", "5", "--out", o]), 1);
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.contains("AC-5,ac-5,\"occupation probabilities and first fringe step\",false,1"));
    assert_eq!(code(&["verify", "--criterion", "14", "--out", o]), 2);
}
