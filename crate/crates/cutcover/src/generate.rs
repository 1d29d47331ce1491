//! Instance generators used by tests, the benchmark harness and the demo.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Edge, Graph};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complete(n: usize, cost: f64) -> Graph {
    let mut t = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            t.push((u, v, cost));
        }
    }
    Graph::from_triples(n, &t).expect("complete graph")
}

pub fn cycle(n: usize, cost: f64) -> Graph {
    let t: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, cost)).collect();
    Graph::from_triples(n, &t).expect("cycle")
}

/// C5 plus the chord (0,4) closing a path 0-1-2-3-4; costs e1..e4 = 5,1,1,5, chord 1.
pub fn c5_path_instance() -> Graph {
    Graph::from_triples(5, &[(0, 1, 5.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 5.0), (0, 4, 1.0)]).unwrap()
}

/// Weights of [`c5_path_instance`] used as effective weights on unit costs.
pub const C5_WEIGHTS: [f64; 5] = [5.0, 1.0, 1.0, 5.0, 1.0];

/// Same graph with every cost set to 1, so effective weights equal raw weights.
pub fn unit_cost(g: &Graph) -> Graph {
    g.with_costs(&vec![1.0; g.m()]).expect("same topology")
}

/// C5 with one chord, unit costs.
pub fn c5_chord() -> Graph {
    Graph::from_triples(5, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (4, 0, 1.0), (0, 2, 1.0)]).unwrap()
}

pub fn petersen_edges() -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for i in 0..5 {
        e.push((i, (i + 1) % 5));
        e.push((i, i + 5));
        e.push((i + 5, (i + 2) % 5 + 5));
    }
    e
}

/// Petersen graph with the listed edge indices removed (must stay connected).
pub fn petersen_minus(removed: &[usize]) -> Option<Graph> {
    let t: Vec<_> = petersen_edges()
        .into_iter()
        .enumerate()
        .filter(|(i, _)| !removed.contains(i))
        .map(|(_, (u, v))| (u, v, 1.0))
        .collect();
    Graph::from_triples(10, &t).ok()
}

/// Random connected multigraph-free graph: a random spanning tree plus extra
/// distinct edges, integer costs drawn uniformly from `lo..=hi`.
pub fn random_connected(n: usize, m: usize, lo: u32, hi: u32, seed: u64) -> Graph {
    let mut r = rng(seed);
    let max_m = n * (n - 1) / 2;
    let m = m.clamp(n - 1, max_m);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut r);
    let mut used = std::collections::HashSet::new();
    let mut edges = Vec::with_capacity(m);
    for i in 1..n {
        let j = r.gen_range(0..i);
        let (u, v) = (perm[i], perm[j]);
        used.insert((u.min(v), u.max(v)));
        edges.push((u, v));
    }
    while edges.len() < m {
        let u = r.gen_range(0..n);
        let v = r.gen_range(0..n);
        if u == v || !used.insert((u.min(v), u.max(v))) {
            continue;
        }
        edges.push((u, v));
    }
    let edges = edges
        .into_iter()
        .map(|(u, v)| Edge { u, v, cost: r.gen_range(lo..=hi) as f64 })
        .collect();
    Graph::new(n, edges).expect("connected by construction")
}

/// Sparse random graph for large instances: spanning tree plus uniform extra
/// edges (duplicates allowed as parallel edges), real costs in [lo, hi).
pub fn random_sparse(n: usize, m: usize, lo: f64, hi: f64, seed: u64) -> Graph {
    let mut r = rng(seed);
    let mut edges = Vec::with_capacity(m);
    for i in 1..n {
        let j = r.gen_range(0..i);
        edges.push(Edge { u: i, v: j, cost: r.gen_range(lo..hi) });
    }
    while edges.len() < m.max(n - 1) {
        let u = r.gen_range(0..n);
        let v = r.gen_range(0..n);
        if u != v {
            edges.push(Edge { u, v, cost: r.gen_range(lo..hi) });
        }
    }
    Graph::new(n, edges).expect("connected by construction")
}

pub fn random_points(n: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut r = rng(seed);
    (0..n).map(|_| (r.gen_range(0.0..1000.0), r.gen_range(0.0..1000.0))).collect()
}

/// Complete graph on points with TSPLIB EUC_2D rounded distances (minimum 1).
pub fn euclidean_complete(points: &[(f64, f64)]) -> Graph {
    let n = points.len();
    let mut t = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let (dx, dy) = (points[u].0 - points[v].0, points[u].1 - points[v].1);
            let d = (dx * dx + dy * dy).sqrt().round().max(1.0);
            t.push((u, v, d));
        }
    }
    Graph::from_triples(n, &t).expect("complete graph")
}

/// The desk-scale corpus: named small graphs and seeded random graphs.
pub fn corpus(random_count: usize) -> Vec<(String, Graph)> {
    let mut out = vec![
        ("K3".to_string(), complete(3, 1.0)),
        ("C4".to_string(), cycle(4, 1.0)),
        ("C5+chord".to_string(), c5_chord()),
        ("K4".to_string(), complete(4, 1.0)),
        ("K5".to_string(), complete(5, 1.0)),
    ];
    for removed in [&[][..], &[0][..], &[0, 7][..], &[1, 5, 9][..]] {
        if let Some(g) = petersen_minus(removed) {
            out.push((format!("Petersen-{}", removed.len()), g));
        }
    }
    for s in 0..random_count as u64 {
        let mut r = rng(0xC0FFEE + s);
        let n = r.gen_range(4..=12);
        let max_m = (n * (n - 1) / 2).min(30);
        let m = r.gen_range(n..=max_m.max(n));
        out.push((format!("rand-{s}"), random_connected(n, m, 1, 10, 1000 + s)));
    }
    out
}
