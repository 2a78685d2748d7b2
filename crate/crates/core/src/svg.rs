//! Hand-written SVG: histograms and cladograms.
//!
//! Histograms use a fixed `600 x 400` view box and Freedman-Diaconis bins
//! (width `2 IQR / m^(1/3)`, clamped to 1..=200 bins).

use std::fmt::Write;

use crate::stats::draw_heights;
use crate::tree::{CladeTree, Side};

const W: f64 = 600.0;
const H: f64 = 400.0;
const PAD: f64 = 40.0;

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Bin edges by the Freedman-Diaconis rule.
pub fn fd_edges(values: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return vec![0.0, 1.0];
    }
    v.sort_by(f64::total_cmp);
    let (lo, hi) = (v[0], v[v.len() - 1]);
    if hi <= lo {
        return vec![lo - 0.5, lo + 0.5];
    }
    let iqr = quantile(&v, 0.75) - quantile(&v, 0.25);
    let width = 2.0 * iqr / (v.len() as f64).cbrt();
    let bins = if width > 0.0 {
        ((hi - lo) / width).ceil().clamp(1.0, 200.0) as usize
    } else {
        1
    };
    let step = (hi - lo) / bins as f64;
    (0..=bins).map(|k| lo + step * k as f64).collect()
}

/// Density histogram. With `overlay`, the standard normal density is drawn on top.
pub fn histogram(values: &[f64], title: &str, overlay: bool) -> String {
    let edges = fd_edges(values);
    let bins = edges.len() - 1;
    let (lo, hi) = (edges[0], edges[bins]);
    let step = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    let mut total = 0usize;
    for &x in values.iter().filter(|x| x.is_finite()) {
        let k = (((x - lo) / step) as usize).min(bins - 1);
        counts[k] += 1;
        total += 1;
    }
    let dens: Vec<f64> = counts
        .iter()
        .map(|&c| c as f64 / (total.max(1) as f64 * step))
        .collect();
    let normal = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut ymax = dens.iter().copied().fold(0.0, f64::max);
    if overlay {
        ymax = ymax.max(normal(0.0));
    }
    let ymax = if ymax > 0.0 { ymax * 1.05 } else { 1.0 };
    let sx = |x: f64| PAD + (x - lo) / (hi - lo) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - y / ymax * (H - 2.0 * PAD);

    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 600 400">"#);
    let _ = writeln!(out, r#"<rect width="600" height="400" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="300" y="20" text-anchor="middle" font-size="14">{}</text>"#, escape(title));
    for (k, &d) in dens.iter().enumerate() {
        let (x0, x1) = (sx(edges[k]), sx(edges[k + 1]));
        let y = sy(d);
        let _ = writeln!(
            out,
            r##"<rect x="{x0:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="#8fb3d9" stroke="#35618f" stroke-width="0.5"/>"##,
            (x1 - x0).max(0.0),
            (H - PAD - y).max(0.0)
        );
    }
    if overlay {
        let pts: Vec<String> = (0..=200)
            .map(|k| {
                let x = lo + (hi - lo) * k as f64 / 200.0;
                format!("{:.2},{:.2}", sx(x), sy(normal(x)))
            })
            .collect();
        let _ = writeln!(out, r##"<polyline points="{}" fill="none" stroke="#c0392b" stroke-width="1.5"/>"##, pts.join(" "));
    }
    let _ = writeln!(out, r#"<line x1="{PAD}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/>"#, H - PAD, W - PAD);
    let _ = writeln!(out, r#"<text x="{PAD}" y="{}" font-size="11">{lo:.3}</text>"#, H - PAD + 15.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{hi:.3}</text>"#, W - PAD, H - PAD + 15.0);
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Cladogram: leaves on the bottom row, each clade at its draw height, the larger
/// sub-clade on the right (ties keep the left child on the left).
pub fn cladogram(tree: &CladeTree) -> String {
    let dh = draw_heights(tree);
    let n = tree.n_leaves();
    let top = dh[0].max(1) as f64;
    // x coordinate of every node, after reordering children by size
    let mut x = vec![0.0; tree.node_count()];
    let mut next_leaf = 0.0;
    let mut order = Vec::with_capacity(tree.node_count());
    let mut stack = vec![(0usize, false)];
    while let Some((v, done)) = stack.pop() {
        match tree.children(v) {
            None => {
                x[v] = next_leaf;
                next_leaf += 1.0;
            }
            Some((l, r)) if !done => {
                stack.push((v, true));
                let (a, b) = if tree.size(l) > tree.size(r) { (r, l) } else { (l, r) };
                stack.push((b, false));
                stack.push((a, false));
            }
            Some((l, r)) => {
                x[v] = 0.5 * (x[l] + x[r]);
                order.push(v);
            }
        }
    }
    let sx = |u: f64| PAD + if n > 1 { u / (n - 1) as f64 } else { 0.5 } * (W - 2.0 * PAD);
    let sy = |d: u32| H - PAD - d as f64 / top * (H - 2.0 * PAD);
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 600 400">"#);
    let _ = writeln!(out, r#"<rect width="600" height="400" fill="white"/>"#);
    for &v in &order {
        let (l, r) = tree.children(v).expect("internal");
        let y = sy(dh[v]);
        let _ = writeln!(out, r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black"/>"#, sx(x[l]), sx(x[r]));
        for c in [l, r] {
            let _ = writeln!(out, r#"<line x1="{0:.2}" y1="{y:.2}" x2="{0:.2}" y2="{1:.2}" stroke="black"/>"#, sx(x[c]), sy(dh[c]));
        }
    }
    let root_x = sx(x[0]);
    let _ = writeln!(out, r#"<line x1="{root_x:.2}" y1="{:.2}" x2="{root_x:.2}" y2="{:.2}" stroke="black"/>"#, sy(dh[0]), PAD / 2.0);
    out.push_str("</svg>\n");
    out
}

/// Fringe render: the path leaf at the bottom, each sibling clade joining at its level,
/// on its recorded side.
pub fn fringe(sizes: &[usize], sides: &[Side]) -> String {
    let levels = sides.len().max(1) as f64;
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 600 400">"#);
    let _ = writeln!(out, r#"<rect width="600" height="400" fill="white"/>"#);
    let cx = W / 2.0;
    let sy = |k: usize| H - PAD - k as f64 / levels * (H - 2.0 * PAD);
    let _ = writeln!(out, r#"<line x1="{cx}" y1="{:.2}" x2="{cx}" y2="{:.2}" stroke="black" stroke-width="2"/>"#, sy(0), sy(sides.len()));
    for (k, side) in sides.iter().enumerate() {
        let y = sy(k + 1);
        let sib = sizes[k + 1] - sizes[k];
        let dx = 20.0 + 180.0 * (sib as f64).ln_1p() / (sizes[sizes.len() - 1] as f64).ln_1p();
        let x = if *side == Side::Left { cx - dx } else { cx + dx };
        let _ = writeln!(out, r#"<line x1="{cx}" y1="{y:.2}" x2="{x:.2}" y2="{y:.2}" stroke="black"/>"#);
        let _ = writeln!(out, r#"<line x1="{x:.2}" y1="{y:.2}" x2="{x:.2}" y2="{:.2}" stroke="gray"/>"#, y + 12.0);
        let anchor = if *side == Side::Left { "end" } else { "start" };
        let _ = writeln!(out, r#"<text x="{x:.2}" y="{:.2}" font-size="11" text-anchor="{anchor}">{sib}</text>"#, y + 24.0);
    }
    out.push_str("</svg>\n");
    out
}
