#![allow(clippy::needless_range_loop)]

use collider_core::fixtures;
use collider_core::{Dag, GraphError, NodeRole};
use proptest::prelude::*;

const NAMES: [&str; 5] = ["a", "b", "c", "d", "e"];

/// Lauritzen's criterion: x ⊥ y | z iff x and y are disconnected in the
/// moral graph of the ancestral set of {x, y} ∪ z once z is removed.
fn moral_separated(k: usize, edges: &[(usize, usize)], x: usize, y: usize, z: u32) -> bool {
    let mut keep = (1u32 << x) | (1u32 << y) | z;
    loop {
        let mut grown = keep;
        for &(p, c) in edges {
            if grown & (1 << c) != 0 {
                grown |= 1 << p;
            }
        }
        if grown == keep {
            break;
        }
        keep = grown;
    }
    let mut adj = vec![0u32; k];
    let mut link = |a: usize, b: usize| {
        adj[a] |= 1 << b;
        adj[b] |= 1 << a;
    };
    for &(p, c) in edges {
        if keep & (1 << c) != 0 {
            link(p, c);
        }
    }
    for c in 0..k {
        if keep & (1 << c) == 0 {
            continue;
        }
        let ps: Vec<usize> = edges.iter().filter(|e| e.1 == c).map(|e| e.0).collect();
        for i in 0..ps.len() {
            for j in i + 1..ps.len() {
                link(ps[i], ps[j]);
            }
        }
    }
    let alive = keep & !z;
    let mut seen = 1u32 << x;
    let mut frontier = vec![x];
    while let Some(u) = frontier.pop() {
        let next = adj[u] & alive & !seen;
        for v in 0..k {
            if next & (1 << v) != 0 {
                seen |= 1 << v;
                frontier.push(v);
            }
        }
    }
    seen & (1 << y) == 0
}

/// Every labeled DAG on `k` nodes: each unordered pair is absent, forward or
/// backward, and cyclic assignments are rejected by the constructor.
fn all_dags(k: usize) -> Vec<(Dag, Vec<(usize, usize)>)> {
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
    let total = 3usize.pow(pairs.len() as u32);
    let mut out = Vec::new();
    for mut code in 0..total {
        let mut edges = Vec::new();
        for &(i, j) in &pairs {
            match code % 3 {
                1 => edges.push((i, j)),
                2 => edges.push((j, i)),
                _ => {}
            }
            code /= 3;
        }
        let named = edges.iter().map(|&(a, b)| (NAMES[a], NAMES[b]));
        match Dag::new(NAMES[..k].iter().copied(), named) {
            Ok(dag) => out.push((dag, edges)),
            Err(GraphError::Cycle(_)) => {}
            Err(e) => panic!("unexpected error {e}"),
        }
    }
    out
}

#[test]
fn labeled_dag_counts() {
    let counts: Vec<usize> = (1..=5).map(|k| all_dags(k).len()).collect();
    assert_eq!(counts, [1, 3, 25, 543, 29281]);
}

#[test]
fn exhaustive_agreement_with_moralization() {
    let start = std::time::Instant::now();
    let mut queries = 0u64;
    for k in 2..=5 {
        for (dag, edges) in all_dags(k) {
            for x in 0..k {
                for y in x + 1..k {
                    for z in 0u32..(1 << k) {
                        if z & ((1 << x) | (1 << y)) != 0 {
                            continue;
                        }
                        let cond: Vec<&str> = (0..k).filter(|i| z & (1 << i) != 0).map(|i| NAMES[i]).collect();
                        let got = dag.d_separated(NAMES[x], NAMES[y], &cond).unwrap();
                        let want = moral_separated(k, &edges, x, y, z);
                        assert_eq!(got, want, "k={k} edges={edges:?} x={x} y={y} z={cond:?}");
                        queries += 1;
                    }
                }
            }
        }
    }
    assert!(queries > 2_000_000);
    assert!(start.elapsed().as_secs_f64() < 30.0, "took {:?}", start.elapsed());
}

fn arb_dag() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (2usize..=5).prop_flat_map(|k| {
        let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
        let n = pairs.len();
        (Just(k), Just(pairs), proptest::collection::vec(0u8..2, n)).prop_map(|(k, pairs, dirs)| {
            // Edges point from lower to higher index, so the graph is acyclic.
            let edges = pairs
                .iter()
                .zip(dirs)
                .filter(|(_, d)| *d != 0)
                .map(|(&(i, j), _)| (i, j))
                .collect();
            (k, edges)
        })
    })
}

fn build(k: usize, edges: &[(usize, usize)]) -> Dag {
    Dag::new(
        NAMES[..k].iter().copied(),
        edges.iter().map(|&(a, b)| (NAMES[a], NAMES[b])),
    )
    .unwrap()
}

fn subset(k: usize, mask: u32, skip: &[usize]) -> Vec<&'static str> {
    (0..k)
        .filter(|i| mask & (1 << i) != 0 && !skip.contains(i))
        .map(|i| NAMES[i])
        .collect()
}

proptest! {
    #[test]
    fn separation_is_symmetric((k, edges) in arb_dag(), x in 0usize..5, y in 0usize..5, mask in 0u32..32) {
        prop_assume!(x < k && y < k && x != y);
        let dag = build(k, &edges);
        let z = subset(k, mask, &[x, y]);
        prop_assert_eq!(
            dag.d_separated(NAMES[x], NAMES[y], &z).unwrap(),
            dag.d_separated(NAMES[y], NAMES[x], &z).unwrap()
        );
    }

    #[test]
    fn conditioning_on_a_collider_or_its_descendant_opens_the_path((k, edges) in arb_dag(), x in 0usize..5, y in 0usize..5) {
        prop_assume!(x < k && y < k && x != y);
        let dag = build(k, &edges);
        for path in dag.enumerate_paths(NAMES[x], NAMES[y]).unwrap() {
            let colliders: Vec<&str> = path
                .interior()
                .filter(|(_, r)| *r == NodeRole::Collider)
                .map(|(v, _)| v)
                .collect();
            let chain_free = path.interior().all(|(_, r)| r == NodeRole::Collider);
            if chain_free && !colliders.is_empty() {
                prop_assert!(dag.is_path_blocked(&path, &[] as &[&str]).unwrap());
                for c in &colliders {
                    let desc = dag.descendants(c).unwrap();
                    let pick = desc.iter().copied().find(|d| !path.nodes().iter().any(|n| n == d));
                    let witnesses: Vec<&str> = colliders.iter().map(|c2| if c2 == c { pick.unwrap_or(c) } else { c2 }).collect();
                    if witnesses.iter().any(|w| *w == NAMES[x] || *w == NAMES[y]) {
                        continue;
                    }
                    prop_assert!(!dag.is_path_blocked(&path, &witnesses).unwrap(), "{} given {:?}", path, witnesses);
                }
            }
        }
    }

    #[test]
    fn valid_adjustment_blocks_every_back_door((k, edges) in arb_dag(), x in 0usize..5, y in 0usize..5, mask in 0u32..32) {
        prop_assume!(x < k && y < k && x != y);
        let dag = build(k, &edges);
        let z = subset(k, mask, &[x, y]);
        let verdict = dag.check_adjustment_set(NAMES[x], NAMES[y], &z).unwrap();
        let open_back_door = dag
            .enumerate_paths(NAMES[x], NAMES[y])
            .unwrap()
            .into_iter()
            .filter(|p| p.is_back_door())
            .any(|p| !dag.is_path_blocked(&p, &z).unwrap());
        if verdict.valid {
            prop_assert!(!open_back_door);
            prop_assert!(verdict.descendants_of_exposure_in_set.is_empty());
        }
        if !open_back_door && verdict.descendants_of_exposure_in_set.is_empty() {
            prop_assert!(verdict.valid);
        }
    }
}

#[test]
fn figure_verdicts() {
    let none: [&str; 0] = [];
    let a = fixtures::fig1a_dag();
    assert!(!a.check_adjustment_set("A", "Y", &none).unwrap().valid);
    assert!(a.check_adjustment_set("A", "Y", &["W"]).unwrap().valid);

    let b = fixtures::fig1b_dag();
    assert!(b.check_adjustment_set("A", "Y", &none).unwrap().valid);
    let v = b.check_adjustment_set("A", "Y", &["C"]).unwrap();
    assert!(!v.valid);
    assert_eq!(v.descendants_of_exposure_in_set, ["C"]);

    let c = fixtures::fig1c_dag();
    assert!(c.check_adjustment_set("A", "Y", &none).unwrap().valid);
    let v = c.check_adjustment_set("A", "Y", &["C"]).unwrap();
    assert!(!v.valid);
    assert_eq!(v.opened_collider_paths.len(), 1);
    assert_eq!(v.opened_collider_paths[0].to_string(), "A ← W1 → C ← W2 → Y");
    assert!(c.check_adjustment_set("A", "Y", &["C", "W1"]).unwrap().valid);

    let f = fixtures::fig3_dag();
    assert!(!f.check_adjustment_set("SOD", "SBP", &none).unwrap().valid);
    assert!(f.check_adjustment_set("SOD", "SBP", &["AGE"]).unwrap().valid);
    let v = f.check_adjustment_set("SOD", "SBP", &["AGE", "PRO"]).unwrap();
    assert!(!v.valid);
    assert_eq!(
        v.opened_collider_paths
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>(),
        ["SOD → PRO ← SBP"]
    );
}
