#![allow(dead_code)]

/// Reference estimates of the collider-adjusted sodium coefficient, each from
/// one n = 1000 draw: rows β1 = 1..5, columns α = 0.5, 1.0, .., 5.0.
pub const REFERENCE_SWEEP: [[f64; 10]; 5] = [
    [
        0.630, 0.033, -0.368, -0.596, -0.727, -0.807, -0.858, -0.892, -0.916, -0.933,
    ],
    [
        1.453, 0.558, -0.045, -0.388, -0.586, -0.706, -0.783, -0.835, -0.871, -0.897,
    ],
    [
        2.277, 1.082, 0.278, -0.181, -0.445, -0.606, -0.709, -0.778, -0.826, -0.861,
    ],
    [
        3.100, 1.607, 0.600, 0.027, -0.304, -0.505, -0.634, -0.721, -0.781, -0.825,
    ],
    [
        3.923, 2.132, 0.923, 0.234, -0.163, -0.405, -0.560, -0.664, -0.737, -0.789,
    ],
];

pub fn sweep_alphas() -> impl Iterator<Item = f64> {
    (1..=10).map(|i| i as f64 * 0.5)
}

use collider_core::{Dag, GraphError};

pub const NAMES: [&str; 5] = ["a", "b", "c", "d", "e"];

/// Lauritzen's criterion: x ⊥ y | z iff x and y are disconnected in the
/// moral graph of the ancestral set of {x, y} ∪ z once z is removed.
pub fn moral_separated(k: usize, edges: &[(usize, usize)], x: usize, y: usize, z: u32) -> bool {
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
pub fn all_dags(k: usize) -> Vec<(Dag, Vec<(usize, usize)>)> {
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
