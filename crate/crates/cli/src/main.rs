mod args;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use args::{Cli, Command, Format, Model};
use betasplit::chain::{occupancy, occupancy_fast, sample_fringe, FringeSampler, NumericTable};
use betasplit::growth::{grow_traced, GrowthRecord};
use betasplit::newick::{compare, parse, split_stats, SplitStats};
use betasplit::numeric::format_g17 as g;
use betasplit::rng::{domain, replicate, substream};
use betasplit::stats::TreeStats;
use betasplit::tree::{prune, sample_ctcs, sample_dtcs, Side};
use betasplit::verify::experiments::Run;
use betasplit::verify::suite::{run_criterion, run_suite, Entry, Suite, CRITERIA};
use betasplit::{svg, CladeTree};
use clap::Parser;
use serde_json::json;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Writes to `out`, or to stdout when no path is given.
fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            use std::io::Write;
            let mut s = std::io::stdout().lock();
            s.write_all(text.as_bytes())?;
            s.flush()?;
            Ok(())
        }
    }
}

fn tabular_only(format: Format, cmd: &str) -> Result<()> {
    if format == Format::Svg {
        bail!("{cmd} writes csv or json, not svg");
    }
    Ok(())
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("values serialise") + "\n"
}

fn tree_text(t: &CladeTree, format: Format) -> String {
    match format {
        Format::Csv => t.to_csv(),
        Format::Json => pretty(t),
        Format::Svg => svg::cladogram(t),
    }
}

fn run(cmd: Command) -> Result<bool> {
    match cmd {
        Command::SampleDtcs(a) | Command::SampleCtcs(a) if a.n == 0 => {
            bail!("--n must be at least 1")
        }
        Command::SampleDtcs(a) => {
            let t = sample_dtcs(a.n, &mut substream(a.common.seed, domain("cli-sample-dtcs"), 0))?;
            let text = if a.newick { t.to_newick() + "\n" } else { tree_text(&t, a.format) };
            emit(a.out.as_deref(), &text)?;
        }
        Command::SampleCtcs(a) => {
            let t = sample_ctcs(a.n, &mut substream(a.common.seed, domain("cli-sample-ctcs"), 0))?;
            let text = if a.newick { t.to_newick() + "\n" } else { tree_text(&t, a.format) };
            emit(a.out.as_deref(), &text)?;
        }
        Command::Grow(a) => {
            if a.n < 2 {
                bail!("--n must be at least 2");
            }
            let (tree, records) = grow_traced(a.n, &mut substream(a.common.seed, domain("cli-grow"), 0))?;
            let clades = tree.to_clade_tree();
            let text = match a.format {
                Format::Csv => {
                    let mut s = clades.to_csv();
                    if a.trace {
                        s.push('\n');
                        s.push_str(&trace_csv(&records));
                    }
                    s
                }
                Format::Json => {
                    let bud = tree.to_bud_tree();
                    if a.trace {
                        pretty(&json!({ "tree": bud, "trace": records }))
                    } else {
                        pretty(&bud)
                    }
                }
                Format::Svg => svg::cladogram(&clades),
            };
            emit(a.out.as_deref(), &text)?;
        }
        Command::Prune(a) => {
            let tree = match &a.input {
                Some(p) => {
                    let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    CladeTree::from_csv(&text)?
                }
                None => sample_ctcs(a.n, &mut substream(a.common.seed, domain("cli-prune"), 0))?,
            };
            let n = tree.n_leaves();
            let leaves: Vec<usize> = match a.k {
                Some(k) if k > n => bail!("--k {k} exceeds the {n} leaves of the tree"),
                Some(k) => {
                    let mut rng = substream(a.common.seed, domain("cli-prune"), 1);
                    let mut v = rand::seq::index::sample(&mut rng, n, k).into_vec();
                    v.sort_unstable();
                    v
                }
                None if a.leaves.is_empty() => (0..n).collect(),
                None => a.leaves.clone(),
            };
            if leaves.len() < 2 {
                bail!("pruning needs at least two leaves");
            }
            let bud = prune(&tree, &leaves)?;
            let text = match a.format {
                Format::Json => pretty(&json!({ "leaves": leaves, "shape": bud.shape_key(), "tree": bud })),
                f => tree_text(&bud.to_clade_tree(), f),
            };
            emit(a.out.as_deref(), &text)?;
        }
        Command::Fringe(a) => {
            if a.horizon < 2 {
                bail!("--horizon must be at least 2");
            }
            let table = occupancy_fast(a.horizon)?;
            let mut sampler = FringeSampler::new(&table);
            let sk = sample_fringe(a.levels, &mut sampler, &mut substream(a.common.seed, domain("cli-fringe"), 0))?;
            let text = match a.format {
                Format::Csv => {
                    let mut s = String::from("level,size,sibling_size,side\n");
                    for (k, side) in sk.sides.iter().enumerate() {
                        let _ = writeln!(s, "{},{},{},{}", k + 1, sk.sizes[k + 1], sk.siblings[k].n_leaves(), side_name(*side));
                    }
                    s
                }
                Format::Json => pretty(&json!({
                    "sizes": sk.sizes,
                    "sides": sk.sides,
                    "siblings": sk.siblings,
                    "truncated": sk.truncated,
                })),
                Format::Svg => svg::fringe(&sk.sizes, &sk.sides),
            };
            emit(a.out.as_deref(), &text)?;
        }
        Command::Recurrence(a) => {
            tabular_only(a.format, "recurrence")?;
            if a.n_max == 0 {
                bail!("--N must be at least 1");
            }
            let table = NumericTable::new(a.n_max)?;
            let text = match a.format {
                Format::Json => pretty(&table),
                _ => table.to_csv(),
            };
            emit(a.out.as_deref(), &text)?;
        }
        Command::Occupancy(a) => {
            tabular_only(a.format, "occupancy")?;
            let table = if a.reference { occupancy(a.n)? } else { occupancy_fast(a.n)? };
            let text = match a.format {
                Format::Json => pretty(&json!({ "n": a.n, "a": &table[1..] })),
                _ => {
                    let mut s = String::from("i,a\n");
                    for (i, v) in table.iter().enumerate().skip(1) {
                        let _ = writeln!(s, "{i},{}", g(*v));
                    }
                    s
                }
            };
            emit(a.out.as_deref(), &text)?;
        }
        Command::Stats(a) => {
            tabular_only(a.format, "stats")?;
            if a.n == 0 || a.reps == 0 {
                bail!("--n and --reps must be positive");
            }
            let (model, powers) = (a.model, &a.powers);
            let rows = replicate(a.common.seed, domain("cli-stats"), a.reps, a.common.workers as usize, |rng, _| {
                let t = match model {
                    Model::Dtcs => sample_dtcs(a.n, rng),
                    Model::Ctcs => sample_ctcs(a.n, rng),
                }
                .expect("n checked above");
                TreeStats::of(&t, powers)
            });
            let text = match a.format {
                Format::Json => pretty(&rows),
                _ => {
                    let mut s = TreeStats::csv_header(powers) + "\n";
                    for r in &rows {
                        s.push_str(&r.csv_row());
                        s.push('\n');
                    }
                    s
                }
            };
            emit(a.out.as_deref(), &text)?;
        }
        Command::Verify(a) => return verify(a),
        Command::NewickStats(a) => {
            tabular_only(a.format, "newick-stats")?;
            let text = std::fs::read_to_string(&a.file).with_context(|| format!("reading {}", a.file.display()))?;
            let tree = parse(&text).with_context(|| format!("parsing {}", a.file.display()))?;
            let stats = split_stats(&tree);
            if stats.polytomies > 0 {
                eprintln!("warning: {} polytomies left out of the split statistics", stats.polytomies);
            }
            let cmp = if a.compare {
                Some(compare(&tree, a.reps, a.common.seed, a.common.workers as usize)?)
            } else {
                None
            };
            let out = match a.format {
                Format::Json => match &cmp {
                    Some(c) => pretty(c),
                    None => pretty(&stats),
                },
                _ => {
                    let mut s = newick_csv(&stats);
                    if let Some(c) = &cmp {
                        let _ = writeln!(s, "extreme_imbalance,{}", c.extreme_imbalance);
                        let _ = writeln!(s, "extreme_balance,{}", c.extreme_balance);
                        for t in &c.report.tests {
                            let _ = writeln!(s, "{}_p,{}", t.name, g(t.p_value));
                        }
                        for (k, v) in &c.report.reported {
                            let _ = writeln!(s, "{k},{}", g(*v));
                        }
                    }
                    s
                }
            };
            emit(a.out.as_deref(), &out)?;
        }
    }
    Ok(true)
}

fn side_name(s: Side) -> &'static str {
    match s {
        Side::Left => "left",
        Side::Right => "right",
    }
}

fn trace_csv(records: &[GrowthRecord]) -> String {
    let opt = |x: Option<f64>| x.map(g).unwrap_or_default();
    let mut s = String::from("step,buds_after,kind,target,stop_node,stop_offset,side,new_length\n");
    for (k, r) in records.iter().enumerate() {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            k + 1,
            k + 3,
            r.kind.as_str(),
            r.target,
            r.stop.map(|x| x.0.to_string()).unwrap_or_default(),
            opt(r.stop.map(|x| x.1)),
            r.side.map(side_name).unwrap_or_default(),
            opt(r.new_length),
        );
    }
    s
}

fn newick_csv(s: &SplitStats) -> String {
    let mut out = String::from("key,value\n");
    let _ = writeln!(out, "n_leaves,{}", s.n_leaves);
    let _ = writeln!(out, "binary_splits,{}", s.records.len());
    let _ = writeln!(out, "polytomies,{}", s.polytomies);
    let _ = writeln!(out, "alpha,{}", s.alpha.map(g).unwrap_or_default());
    let _ = writeln!(out, "mean_hop_depth,{}", g(s.mean_hop_depth));
    let _ = writeln!(out, "max_hop_depth,{}", s.max_hop_depth);
    let _ = writeln!(out, "root_draw_height,{}", s.root_draw_height);
    for b in &s.buckets {
        let _ = writeln!(out, "bucket_{}_{}_count,{}", b.lo, b.hi, b.count);
        let _ = writeln!(out, "bucket_{}_{}_median_size,{}", b.lo, b.hi, b.median_size);
        let _ = writeln!(out, "bucket_{}_{}_median_smaller,{}", b.lo, b.hi, b.median_smaller);
    }
    for (h, w) in s.width_profile.iter().enumerate() {
        let _ = writeln!(out, "width_{h},{w}");
    }
    out
}

fn file_stem(e: &Entry, k: usize) -> String {
    if e.id == "extra" {
        format!("extra-{k}")
    } else {
        e.id.to_lowercase()
    }
}

fn verify(a: args::Verify) -> Result<bool> {
    let suite: Suite = a.suite.parse()?;
    let run = Run::new(a.common.seed, a.common.workers as usize);
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut clock = Instant::now();
    let mut progress = |e: &Entry| {
        let verdict = if e.report.passed() { "PASS" } else { "FAIL" };
        println!("{} {verdict}: {} [{:.1} s]", e.id, e.title, clock.elapsed().as_secs_f64());
        for f in e.report.failures() {
            println!("    failed: {f}");
        }
        clock = Instant::now();
    };
    let entries = if a.criterion.is_empty() {
        run_suite(suite, run, &mut progress)?
    } else {
        let mut v = Vec::new();
        for &id in &a.criterion {
            if !(1..=CRITERIA.len()).contains(&id) {
                bail!("--criterion {id} is outside 1..={}", CRITERIA.len());
            }
            let e = Entry { id: format!("AC-{id}"), title: CRITERIA[id - 1], report: run_criterion(id, run)? };
            progress(&e);
            v.push(e);
        }
        v
    };
    write_reports(&a.out, &entries)?;
    Ok(entries.iter().all(|e| e.report.passed()))
}

fn write_reports(dir: &Path, entries: &[Entry]) -> Result<()> {
    let write = |name: String, text: &str| -> Result<()> {
        let p: PathBuf = dir.join(name);
        std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))
    };
    let mut summary = String::from("id,file,title,pass,failed\n");
    let mut rows = Vec::new();
    for (k, e) in entries.iter().enumerate() {
        let stem = file_stem(e, k);
        write(format!("{stem}.json"), &(e.report.to_json() + "\n"))?;
        write(format!("{stem}.csv"), &e.report.to_csv())?;
        for (name, body) in &e.report.artifacts {
            write(format!("{stem}-{name}"), body)?;
        }
        let failed = e.report.failures().len();
        let _ = writeln!(summary, "{},{stem},\"{}\",{},{failed}", e.id, e.title, e.report.passed());
        rows.push(json!({ "id": e.id, "file": stem, "title": e.title, "pass": e.report.passed(), "failed": e.report.failures() }));
    }
    write("summary.csv".into(), &summary)?;
    write("summary.json".into(), &pretty(&rows))?;
    write("summary.svg".into(), &summary_svg(entries))?;
    Ok(())
}

fn summary_svg(entries: &[Entry]) -> String {
    let h = 30 + 24 * entries.len();
    let mut s = format!(r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 600 {h}" font-family="sans-serif" font-size="14">"#);
    s.push('\n');
    for (k, e) in entries.iter().enumerate() {
        let y = 24 + 24 * k;
        let (fill, word) = if e.report.passed() { ("#2a9d3c", "PASS") } else { ("#c0392b", "FAIL") };
        let _ = writeln!(s, r#"<rect x="10" y="{}" width="50" height="18" fill="{fill}"/>"#, y - 14);
        let _ = writeln!(s, r#"<text x="16" y="{y}" fill="white">{word}</text>"#);
        let title = e.title.replace('&', "&amp;").replace('<', "&lt;");
        let _ = writeln!(s, r#"<text x="70" y="{y}">{} {title}</text>"#, e.id);
    }
    s.push_str("</svg>\n");
    s
}
