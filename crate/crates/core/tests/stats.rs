use betasplit::chain::moments;
use betasplit::rng::{domain, substream};
use betasplit::stats::{draw_heights, hop_extremes, leaf_hops, power_sum, width_profile, TreeStats};
use betasplit::tree::sample_dtcs;
use betasplit::verify::Estimate;

#[test]
fn first_power_sum_has_mean_n_times_mean_hops() {
    let n = 400;
    let m = moments(n).unwrap();
    let s: Vec<f64> = (0..20_000u64)
        .map(|r| power_sum(&sample_dtcs(n, &mut substream(0, domain("stats-test"), r)).unwrap(), 1.0))
        .collect();
    let est = Estimate::mean_of(&s);
    let target = n as f64 * m.thop[n];
    assert!(est.within(target, 4.0), "{est:?} vs {target}");
}

#[test]
fn per_tree_identities() {
    for r in 0..300u64 {
        let n = 2 + (r as usize * 37) % 500;
        let t = sample_dtcs(n, &mut substream(1, domain("stats-test-id"), r)).unwrap();
        let hops = leaf_hops(&t);
        assert_eq!(power_sum(&t, 1.0), hops.iter().map(|&h| h as f64).sum::<f64>());
        assert_eq!(power_sum(&t, 0.0), (n - 1) as f64);
        let e = hop_extremes(&t);
        assert_eq!(draw_heights(&t)[0], e.max);
        assert_eq!(e.max, *hops.iter().max().unwrap());
        let w = width_profile(&t);
        assert_eq!(w.w.len(), e.max as usize);
        assert_eq!(w.w.first().copied(), Some(n as u64));
        assert_eq!(w.w.last().copied(), Some(2));
    }
}

#[test]
fn csv_rows_match_header() {
    let t = sample_dtcs(64, &mut substream(2, domain("stats-test-csv"), 0)).unwrap();
    let powers = [0.5, 1.0, 2.0];
    let header = TreeStats::csv_header(&powers);
    let row = TreeStats::of(&t, &powers).csv_row();
    assert_eq!(header.split(',').count(), row.split(',').count());
}
