//! Greedy fractional tree packing and the λ₀ estimate.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::generate::rng;
use crate::graph::{enumerate_cuts, exact_min_cut_bruteforce, Graph, VertexCut, BRUTE_FORCE_MAX_N};
use crate::oracle::{ColumnMode, CutOracle};
use crate::tree::{SpanningTree, TreeCut};

/// Trees kept: ⌈C_PACK ln n⌉.
pub const C_PACK: f64 = 3.0;
/// Packing rounds: ⌈C_LOAD ln n / PACK_EPS²⌉.
pub const C_LOAD: f64 = 12.0;
pub const PACK_EPS: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct TreePacking {
    pub trees: Vec<SpanningTree>,
    pub rounds: usize,
}

pub fn tree_count(n: usize) -> usize {
    ((C_PACK * (n as f64).ln()).ceil() as usize).max(1)
}

pub fn round_count(n: usize) -> usize {
    ((C_LOAD * (n as f64).ln() / (PACK_EPS * PACK_EPS)).ceil() as usize).max(1)
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Dsu {
        Dsu((0..n).collect())
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        self.0[a] = b;
        true
    }
}

fn kruskal(g: &Graph, order: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(g.n().saturating_sub(1));
    kruskal_into(g, order, &mut Dsu::new(g.n()), &mut out);
    out
}

fn kruskal_into(g: &Graph, order: &[usize], d: &mut Dsu, out: &mut Vec<usize>) {
    for (i, p) in d.0.iter_mut().enumerate() {
        *p = i;
    }
    out.clear();
    for &e in order {
        let ed = g.edge(e);
        if d.union(ed.u, ed.v) {
            out.push(e);
            if out.len() == g.n() - 1 {
                break;
            }
        }
    }
}

/// Uniformly shuffled Kruskal; a cheap random spanning tree for tests.
pub fn random_spanning_tree(g: &Graph, seed: u64) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..g.m()).collect();
    ids.shuffle(&mut rng(seed));
    kruskal(g, &ids)
}

/// Repeated MSTs under key ℓ_e/u_e (ties by edge id), each adding 1/K load to
/// its edges; ⌈C_PACK ln n⌉ of the K rounds are kept, chosen by `seed`.
pub fn pack_trees(g: &Graph, u: &[f64], seed: u64) -> Result<TreePacking> {
    let n = g.n();
    let m = g.m();
    let rounds = round_count(n);
    let want = tree_count(n);
    let mut r = rng(seed);
    let mut keep: Vec<usize> = if want <= rounds {
        rand::seq::index::sample(&mut r, rounds, want).into_vec()
    } else {
        (0..want).map(|i| i % rounds).collect()
    };
    keep.sort_unstable();
    let inc = 1.0 / rounds as f64;
    let mut load = vec![0.0f64; m];
    let mut key: Vec<f64> = (0..m).map(|e| if u[e] > 0.0 { 0.0 } else { f64::INFINITY }).collect();
    let mut order: Vec<usize> = (0..m).collect();
    let mut changed = vec![false; m];
    let mut trees = Vec::with_capacity(want);
    let mut next = 0;
    let mut dsu = Dsu::new(n);
    let mut t = Vec::with_capacity(n);
    let mut stay = Vec::with_capacity(m);
    for round in 0..rounds {
        if next >= keep.len() {
            break;
        }
        kruskal_into(g, &order, &mut dsu, &mut t);
        while next < keep.len() && keep[next] == round {
            trees.push(SpanningTree::from_edges(g, &t)?);
            next += 1;
        }
        for &e in &t {
            load[e] += inc;
            if u[e] > 0.0 {
                key[e] = load[e] / u[e];
            }
            changed[e] = true;
        }
        // re-sort: unchanged edges stay sorted, merge in the bumped ones
        let cmp = |a: usize, b: usize| key[a].total_cmp(&key[b]).then(a.cmp(&b));
        t.sort_by(|&a, &b| cmp(a, b));
        stay.clear();
        stay.extend(order.iter().copied().filter(|&e| !changed[e]));
        order.clear();
        let (mut i, mut j) = (0, 0);
        while i < stay.len() || j < t.len() {
            if j >= t.len() || (i < stay.len() && cmp(stay[i], t[j]).is_lt()) {
                order.push(stay[i]);
                i += 1;
            } else {
                order.push(t[j]);
                j += 1;
            }
        }
        for &e in &t {
            changed[e] = false;
        }
    }
    Ok(TreePacking { trees, rounds })
}

/// Minimum over one-edge and two-edge tree cuts of `oracle`'s tree. Exhaustive
/// for small trees; above that the two-edge part searches the candidate pairs
/// of the interested-pair machinery.
pub fn min_1or2_respecting_cut(oracle: &CutOracle) -> (TreeCut, f64) {
    crate::tree_focus::min_respecting_cut(oracle)
}

/// Best 1-or-2-respecting cut under `w` over a fresh packing: side and value.
/// Exact with high probability; always an upper bound on the min cut.
pub fn packed_min_cut(g: &Graph, w: &[f64], seed: u64) -> Result<(Vec<bool>, f64)> {
    let unit = g.with_costs(&vec![1.0; g.m()])?;
    let packing = pack_trees(&unit, w, seed)?;
    let mut best: Option<(Vec<bool>, f64)> = None;
    for t in &packing.trees {
        let o = CutOracle::new(&unit, t, ColumnMode::Plain { k: 1 }, w, f64::INFINITY);
        let (cut, value) = min_1or2_respecting_cut(&o);
        if best.as_ref().map_or(true, |b| value < b.1) {
            best = Some((t.cut_side(cut)?, value));
        }
    }
    best.ok_or_else(|| Error::Invariant("empty packing".into()))
}

/// λ₀ = min over trees of the 1-or-2-respecting minimum, divided by (1+ε).
pub fn initial_lambda(g: &Graph, packing: &TreePacking, mode: ColumnMode, w: &[f64], eps: f64) -> f64 {
    let mut best = f64::INFINITY;
    for t in &packing.trees {
        let o = CutOracle::new(g, t, mode, w, f64::INFINITY);
        best = best.min(min_1or2_respecting_cut(&o).1 / mode.demand() as f64);
    }
    best / (1.0 + eps)
}

/// Number of tree edges crossing the cut.
fn shared_edges(t: &SpanningTree, side: &[bool]) -> usize {
    t.tree_edges().filter(|&v| side[v] != side[t.parent[v]]).count()
}

/// Every cut within (1+ε) of the minimum shares at most two edges with some tree.
pub fn verify_packing(g: &Graph, u: &[f64], packing: &TreePacking, eps: f64) -> Result<bool> {
    if g.n() > BRUTE_FORCE_MAX_N {
        return Err(Error::TooLarge { n: g.n(), max: BRUTE_FORCE_MAX_N });
    }
    let (_, min) = exact_min_cut_bruteforce(g, u)?;
    let limit = (1.0 + eps) * min * (1.0 + 1e-12);
    let mut ok = true;
    enumerate_cuts(g, u, |bits, val| {
        if ok && val <= limit {
            let side = VertexCut::from_bits(g.n(), bits).expect("proper cut");
            if !packing.trees.iter().any(|t| shared_edges(t, side.mask()) <= 2) {
                ok = false;
            }
        }
    })?;
    Ok(ok)
}
