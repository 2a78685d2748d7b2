use betasplit::newick::{compare, isomorphic, parse, serialize, split_stats, PhyloNode, PhyloTree};
use betasplit::rng::{domain, substream};
use betasplit::tree::sample_dtcs;
use proptest::prelude::*;

fn data(name: &str) -> String {
    let path = format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

#[derive(Debug, Clone)]
enum Shape {
    Leaf(Option<String>, Option<f64>),
    Node(Vec<Shape>, Option<String>, Option<f64>),
}

fn leaf_name() -> impl Strategy<Value = Option<String>> {
    prop_oneof!["[A-Za-z0-9_.-]{1,8}".prop_map(Some), "[ a-z(),:;'\\[\\]]{0,6}".prop_map(Some)]
}

// the grammar has no empty leaf, but internal labels are optional
fn name() -> impl Strategy<Value = Option<String>> {
    prop_oneof![Just(None), leaf_name()]
}

fn length() -> impl Strategy<Value = Option<f64>> {
    prop_oneof![Just(None), (0.0f64..1e6).prop_map(Some), Just(Some(0.0)), Just(Some(1e-300))]
}

fn shape() -> impl Strategy<Value = Shape> {
    let leaf = (leaf_name(), length()).prop_map(|(n, l)| Shape::Leaf(n, l));
    leaf.prop_recursive(6, 64, 4, |inner| {
        (prop::collection::vec(inner, 2..5), name(), length()).prop_map(|(c, n, l)| Shape::Node(c, n, l))
    })
}

fn build(s: &Shape) -> PhyloTree {
    fn go(s: &Shape, nodes: &mut Vec<PhyloNode>) -> usize {
        let id = nodes.len();
        let (name, length) = match s {
            Shape::Leaf(n, l) | Shape::Node(_, n, l) => (n.clone(), *l),
        };
        nodes.push(PhyloNode { name, length, children: Vec::new() });
        if let Shape::Node(cs, ..) = s {
            for c in cs {
                let k = go(c, nodes);
                nodes[id].children.push(k);
            }
        }
        id
    }
    let mut nodes = Vec::new();
    go(s, &mut nodes);
    PhyloTree { nodes }
}

proptest! {
    #[test]
    fn serialise_then_parse_is_identity(s in shape()) {
        let t = build(&s);
        let text = serialize(&t);
        let back = parse(&text).unwrap();
        prop_assert_eq!(&back, &t);
        prop_assert_eq!(serialize(&back), text);
    }

    #[test]
    fn garbage_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        let text = String::from_utf8_lossy(&bytes);
        let _ = parse(&text);
    }
}

#[test]
fn corpus_files_round_trip() {
    for f in ["primates.nwk", "balanced16.nwk", "caterpillar12.nwk"] {
        let t = parse(&data(f)).unwrap();
        let back = parse(&serialize(&t)).unwrap();
        assert_eq!(back, t, "{f}");
        assert!(isomorphic(&back, &t));
        assert!(t.is_binary(), "{f}");
    }
    let p = parse(&data("primates.nwk")).unwrap();
    assert_eq!(p.n_leaves(), 20);
    assert!(p.nodes.iter().any(|n| n.name.as_deref() == Some("Homo")));
}

#[test]
fn balanced_tree_splits_in_half() {
    let s = split_stats(&parse(&data("balanced16.nwk")).unwrap());
    assert_eq!(s.records.len(), 15);
    assert!(s.records.iter().all(|&(m, k)| k == m / 2));
    assert_eq!(s.max_hop_depth, 4);
    assert_eq!(s.mean_hop_depth, 4.0);
}

#[test]
fn caterpillar_smaller_side_is_one() {
    let s = split_stats(&parse(&data("caterpillar12.nwk")).unwrap());
    assert_eq!(s.records.len(), 11);
    assert!(s.records.iter().all(|&(_, k)| k == 1));
    assert_eq!(s.root_draw_height, 11);
}

fn caterpillar(n: usize) -> PhyloTree {
    let mut text = String::new();
    for i in 1..n {
        text.push_str(&format!("(t{i},"));
    }
    text.push_str(&format!("t{n}"));
    text.push_str(&")".repeat(n - 1));
    text.push(';');
    parse(&text).unwrap()
}

fn balanced(depth: u32) -> PhyloTree {
    fn go(d: u32, next: &mut usize) -> String {
        if d == 0 {
            *next += 1;
            return format!("x{next}");
        }
        format!("({},{})", go(d - 1, next), go(d - 1, next))
    }
    parse(&(go(depth, &mut 0) + ";")).unwrap()
}

fn model_tree(n: usize, seed: u64) -> PhyloTree {
    let t = sample_dtcs(n, &mut substream(seed, domain("newick-test"), 0)).unwrap();
    parse(&t.to_newick()).unwrap()
}

#[test]
fn model_alpha_is_near_one_half() {
    let s = split_stats(&model_tree(10_000, 0));
    let a = s.alpha.expect("enough buckets");
    assert!((0.4..=0.6).contains(&a), "{a}");
}

#[test]
fn caterpillar_is_flagged_as_imbalanced() {
    let c = compare(&caterpillar(100), 100, 0, 1).unwrap();
    assert!(c.extreme_imbalance);
    assert!(!c.extreme_balance);
}

#[test]
fn balanced_tree_is_flagged_as_balanced() {
    let c = compare(&balanced(7), 100, 0, 1).unwrap();
    assert!(c.extreme_balance);
    assert!(!c.extreme_imbalance);
}

#[test]
fn model_tree_is_not_flagged() {
    let c = compare(&model_tree(500, 3), 200, 0, 1).unwrap();
    assert!(!c.extreme_balance && !c.extreme_imbalance);
    assert!(c.report.passed(), "{:?}", c.report.failures());
}

#[test]
fn comparison_ignores_worker_count() {
    let t = model_tree(300, 4);
    let a = compare(&t, 50, 9, 1).unwrap();
    let b = compare(&t, 50, 9, 3).unwrap();
    assert_eq!(a.report.to_json(), b.report.to_json());
}
