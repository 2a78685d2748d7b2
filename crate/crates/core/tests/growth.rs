use betasplit::growth::{ctcs4_oracle, grow, grow_tree, GrowTree, GrowthKind};
use betasplit::rng::{domain, substream};
use betasplit::tree::{sample_ctcs, Side};
use betasplit::verify::experiments::shape_distribution;
use betasplit::verify::{chi_square, ks_test, ks_two_sample, Estimate, CHI2_THRESHOLD, KS_THRESHOLD};
use betasplit::CladeTree;

/// Composite two-point Gauss-Legendre; never evaluates the interval ends.
fn gauss(f: impl Fn(f64) -> f64, a: f64, b: f64, k: usize) -> f64 {
    let h = (b - a) / k as f64;
    let d = h / (2.0 * 3f64.sqrt());
    (0..k)
        .map(|j| {
            let mid = a + (j as f64 + 0.5) * h;
            f(mid - d) + f(mid + d)
        })
        .sum::<f64>()
        * h
        / 2.0
}

#[test]
fn stop_profile_density_plus_extension_is_one() {
    let mut rng = substream(0, domain("growth-test"), 0);
    let g = grow_tree(40, &mut rng).unwrap();
    for slot in 0..g.n_buds() {
        let p = g.stop_profile(slot);
        let mut mass = p.extension_probability();
        let mut start = 0.0;
        for &(l, _) in &p.segments {
            mass += gauss(|x| p.density(x), start, start + l, 2000);
            start += l;
        }
        assert!((mass - 1.0).abs() < 1e-8, "slot {slot}: {mass}");
    }
}

#[test]
fn oracle_densities_integrate_to_probabilities() {
    let o = ctcs4_oracle(0.7, 1.9).unwrap();
    let ends = [o.a, 60.0, o.b, 60.0];
    for i in 1..=4 {
        let m = gauss(|c| o.density(i, c), 0.0, ends[i - 1], 20_000);
        assert!((m - o.p[i - 1]).abs() < 1e-9, "outcome {i}: {m} vs {}", o.p[i - 1]);
    }
}

#[test]
fn step_from_three_matches_oracle() {
    let (a, b) = (0.5, 2.0);
    // root clade of 3 (segment a) splits into a side leaf and a pair clade (segment b)
    let three = CladeTree::from_parts(vec![3, 1, 2, 1, 1], Some(vec![a, 0.0, b, 0.0, 0.0])).unwrap();
    let o = ctcs4_oracle(a, b).unwrap();
    let mut counts = [0u64; 4];
    let (mut off1, mut len2, mut len4) = (Vec::new(), Vec::new(), Vec::new());
    for r in 0..200_000u64 {
        let mut rng = substream(1, domain("growth-test-ctcs4"), r);
        let mut g = GrowTree::from_clade_tree(&three).unwrap();
        let rec = g.step(&mut rng);
        match (rec.kind, rec.stop) {
            (GrowthKind::SideBud, Some((0, x))) => {
                counts[0] += 1;
                off1.push(x);
            }
            (GrowthKind::SideLeafExtension, _) => {
                counts[1] += 1;
                len2.push(rec.new_length.unwrap());
            }
            (GrowthKind::SideBud, Some((2, _))) => counts[2] += 1,
            (GrowthKind::BranchExtension, _) => {
                counts[3] += 1;
                len4.push(rec.new_length.unwrap());
            }
            other => panic!("unexpected step {other:?}"),
        }
        assert!(rec.kind != GrowthKind::SideBud || matches!(rec.side, Some(Side::Left | Side::Right)));
    }
    let t = chi_square("kinds", &counts, &o.p, CHI2_THRESHOLD).unwrap();
    assert!(t.pass, "{t:?}");
    let z = -(-a / 3.0f64).exp_m1();
    let t1 = ks_test("t1 offset", &off1, |c| -(-c / 3.0).exp_m1() / z, KS_THRESHOLD).unwrap();
    let t2 = ks_test("t2 length", &len2, |c| -(-c).exp_m1(), KS_THRESHOLD).unwrap();
    let t4 = ks_test("t4 length", &len4, |c| -(-c).exp_m1(), KS_THRESHOLD).unwrap();
    for t in [t1, t2, t4] {
        assert!(t.pass, "{t:?}");
    }
}

#[test]
fn grown_shapes_match_ctcs5() {
    let law = shape_distribution(5).unwrap();
    let mut counts = std::collections::BTreeMap::new();
    for r in 0..100_000u64 {
        let mut rng = substream(2, domain("growth-test-5"), r);
        *counts.entry(grow(5, &mut rng).unwrap().shape_key()).or_insert(0u64) += 1;
    }
    assert!(counts.keys().all(|k| law.contains_key(k)));
    let o: Vec<u64> = law.keys().map(|k| counts.get(k).copied().unwrap_or(0)).collect();
    let p: Vec<f64> = law.values().copied().collect();
    let t = chi_square("shapes", &o, &p, CHI2_THRESHOLD).unwrap();
    assert!(t.pass, "{t:?}");
}

#[test]
fn grown_length_matches_sampled_length_at_100() {
    let reps = 20_000u64;
    let grown: Vec<f64> = (0..reps)
        .map(|r| grow(100, &mut substream(3, domain("growth-test-100g"), r)).unwrap().total_length())
        .collect();
    let direct: Vec<f64> = (0..reps)
        .map(|r| {
            sample_ctcs(100, &mut substream(3, domain("growth-test-100d"), r))
                .unwrap()
                .total_length()
                .unwrap()
        })
        .collect();
    let (eg, ed) = (Estimate::mean_of(&grown), Estimate::mean_of(&direct));
    let se = eg.stderr.hypot(ed.stderr);
    assert!((eg.value - ed.value).abs() < 4.0 * se, "{eg:?} vs {ed:?}");
    let t = ks_two_sample("length", &grown, &direct, KS_THRESHOLD).unwrap();
    assert!(t.pass, "{t:?}");
}
