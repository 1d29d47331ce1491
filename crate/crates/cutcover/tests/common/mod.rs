#![allow(dead_code)]

use cutcover::generate::{self, rng};
use cutcover::graph::Graph;
use cutcover::packing::random_spanning_tree;
use cutcover::tree::{SpanningTree, TreeCut};
use rand::Rng;

/// Seeded connected graph with 3..=max_n vertices and a random spanning tree.
pub fn instance(seed: u64, max_n: usize) -> (Graph, SpanningTree) {
    let mut r = rng(seed);
    let n = r.gen_range(3..=max_n);
    let m = r.gen_range(n - 1..=(n * (n - 1) / 2).min(3 * n));
    let g = generate::random_connected(n, m, 1, 10, seed);
    let t = SpanningTree::from_edges(&g, &random_spanning_tree(&g, seed ^ 0x5EED)).unwrap();
    (g, t)
}

pub fn weights(m: usize, lo: f64, hi: f64, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..m).map(|_| r.gen_range(lo..hi)).collect()
}

/// Every 1- and 2-respecting cut of `t`.
pub fn tree_cuts(t: &SpanningTree) -> Vec<TreeCut> {
    let edges: Vec<usize> = t.tree_edges().collect();
    let mut out: Vec<TreeCut> = edges.iter().map(|&e| TreeCut::single(e)).collect();
    for (i, &e) in edges.iter().enumerate() {
        for &f in &edges[i + 1..] {
            out.push(TreeCut::pair(e, f));
        }
    }
    out
}

/// Tree edges on the u-v path, ordered from u to v.
pub fn tree_path(t: &SpanningTree, u: usize, v: usize) -> Vec<usize> {
    let a = t.lca(u, v);
    let mut up = Vec::new();
    let mut x = u;
    while x != a {
        up.push(x);
        x = t.parent[x];
    }
    let mut down = Vec::new();
    let mut y = v;
    while y != a {
        down.push(y);
        y = t.parent[y];
    }
    down.reverse();
    up.extend(down);
    up
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

use cutcover::graph::{enumerate_cuts, exact_min_cut_bruteforce, VertexCut};
use cutcover::kecss::{range_map_backward, range_map_forward};
use cutcover::mwu::{focus, DualState, EpochOracle, SolverParams};
use cutcover::oracle::{ColumnMode, CutOracle, ExplicitCutColumns};
use cutcover::path::{extract_cuts_in_path, focus_path, query_budget, PathMinor};
use cutcover::reference::{all_2respecting_cuts_bruteforce, min_normalized_free_cut_bruteforce};
use cutcover::tree_focus::{epoch_algorithm, focus_tree, solver_params, SolveOptions, TreeEpochs};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub enum Trial {
    Pass,
    /// The trial's precondition did not hold; nothing was checked.
    Skip,
    Fail(String),
}

impl Trial {
    fn check(ok: bool, msg: impl FnOnce() -> String) -> Trial {
        if ok {
            Trial::Pass
        } else {
            Trial::Fail(msg())
        }
    }
}

#[derive(Debug, Default)]
pub struct Tally {
    pub pass: usize,
    pub skip: usize,
    pub fail: Vec<String>,
}

impl Tally {
    pub fn run(seeds: impl IntoIterator<Item = u64>, mut f: impl FnMut(u64) -> Trial) -> Tally {
        let mut t = Tally::default();
        for s in seeds {
            match f(s) {
                Trial::Pass => t.pass += 1,
                Trial::Skip => t.skip += 1,
                Trial::Fail(m) => t.fail.push(format!("seed {s}: {m}")),
            }
        }
        t
    }

    pub fn ok(&self) -> bool {
        self.fail.is_empty()
    }

    pub fn summary(&self) -> String {
        let mut s = format!("{} passed, {} skipped, {} failed", self.pass, self.skip, self.fail.len());
        if let Some(f) = self.fail.first() {
            s.push_str(&format!(" (first: {f})"));
        }
        s
    }
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) => return Trial::Fail(format!("{}: {err}", stringify!($e))),
        }
    };
}

/// Plain or free columns with k ∈ 1..=3; free k is capped at the edge
/// connectivity of `g` so that every column can be covered.
pub fn random_mode(g: &Graph, r: &mut ChaCha8Rng) -> ColumnMode {
    let k = r.gen_range(1..=3);
    if r.gen_bool(0.5) {
        let conn = exact_min_cut_bruteforce(g, &vec![1.0; g.m()]).unwrap().1 as usize;
        ColumnMode::Free { k: k.min(conn) }
    } else {
        ColumnMode::Plain { k }
    }
}

/// Column value of the cut `side`, straight from the definition: the cut
/// weight in w/(k c) for plain cuts, the normalized free cut with F = {v_e ≥ thr}
/// in w/c for free cuts.
pub fn direct_column_value(g: &Graph, mode: ColumnMode, w: &[f64], thr: f64, side: &[bool]) -> f64 {
    let (mut light, mut heavy) = (0.0, 0usize);
    for (e, ed) in g.edges().iter().enumerate() {
        if side[ed.u] == side[ed.v] {
            continue;
        }
        match mode {
            ColumnMode::Plain { k } => light += w[e] / (k as f64 * ed.cost),
            ColumnMode::Free { .. } => {
                let v = w[e] / ed.cost;
                if v >= thr {
                    heavy += 1;
                } else {
                    light += v;
                }
            }
        }
    }
    match mode {
        ColumnMode::Plain { .. } => light,
        ColumnMode::Free { k } if heavy >= k => f64::INFINITY,
        ColumnMode::Free { k } => light / (k - heavy) as f64,
    }
}

/// Fresh state with weights `w` and a threshold at the `q`-quantile of the
/// untruncated tree-cut column values.
fn state_at_quantile(g: &Graph, t: &SpanningTree, mode: ColumnMode, w: &[f64], eps: f64, q: f64) -> Option<DualState> {
    let mut vals: Vec<f64> = tree_cuts(t)
        .iter()
        .map(|&s| direct_column_value(g, mode, w, f64::INFINITY, &t.cut_side(s).unwrap()))
        .collect();
    vals.sort_by(f64::total_cmp);
    let pick = vals[((vals.len() - 1) as f64 * q) as usize];
    if !(pick > 0.0) {
        return None;
    }
    let mut state = DualState::with_weights(w.to_vec(), SolverParams::new(eps));
    state.start(pick * 1.001 / (1.0 + eps), 1.0).ok()?;
    Some(state)
}

/// Oracle-driven Focus vs explicit-matrix Focus on the same batch: per-iteration
/// (w, cong) agree to `tol` relative.
pub fn equivalence_trial(seed: u64) -> Trial {
    let (g, t) = instance(seed, 8);
    let mut r = rng(seed ^ 0xE9);
    let mode = random_mode(&g, &mut r);
    let w = weights(g.m(), 0.2, 3.0, seed ^ 1);
    let q = r.gen_range(0.2..0.8);
    let Some(base) = state_at_quantile(&g, &t, mode, &w, 0.1, q) else { return Trial::Skip };
    let thr = base.threshold();
    let mut o = CutOracle::new(&g, &t, mode, &w, thr);
    let mut batch: Vec<TreeCut> = tree_cuts(&t).into_iter().filter(|&s| o.is_small(s)).collect();
    batch.sort_unstable();
    if batch.is_empty() {
        return Trial::Skip;
    }
    let sides: Vec<Vec<bool>> = batch.iter().map(|&s| t.cut_side(s).unwrap()).collect();
    let ex = ExplicitCutColumns::new(&g, mode, &sides);
    let mut a = base.clone();
    let mut b = base;
    a.record_trajectory(true);
    b.record_trajectory(true);
    let rep = tri!(o.fast_focus(&batch, &mut a));
    let its = tri!(focus(&ex, &(0..batch.len()).collect::<Vec<_>>(), &mut b));
    if rep.iterations != its {
        return Trial::Fail(format!("{mode:?}: {} oracle iterations vs {its} explicit", rep.iterations));
    }
    let (ta, tb) = (a.take_trajectory(), b.take_trajectory());
    for (step, (x, y)) in ta.iter().zip(&tb).enumerate() {
        let close = |p: &[f64], q: &[f64]| p.iter().zip(q).all(|(&u, &v)| rel_close(u, v, 1e-9));
        if !close(&x.0, &y.0) || !close(&x.1, &y.1) {
            return Trial::Fail(format!("{mode:?}: trajectories diverge at iteration {}", step + 1));
        }
    }
    Trial::check(ta.len() == tb.len() && !ta.is_empty(), || "empty or unequal trajectories".into())
}

/// k = 1: the free-cut oracle reproduces the plain oracle bit for bit.
pub fn k1_bitwise_trial(seed: u64) -> Trial {
    let (g, t) = instance(seed, 8);
    let w = weights(g.m(), 0.2, 3.0, seed ^ 2);
    let q = rng(seed ^ 0xB1).gen_range(0.2..0.8);
    let Some(base) = state_at_quantile(&g, &t, ColumnMode::Plain { k: 1 }, &w, 0.1, q) else { return Trial::Skip };
    let thr = base.threshold();
    let mut plain = CutOracle::new(&g, &t, ColumnMode::Plain { k: 1 }, &w, thr);
    let mut free = CutOracle::new(&g, &t, ColumnMode::Free { k: 1 }, &w, thr);
    let bp: Vec<TreeCut> = tree_cuts(&t).into_iter().filter(|&s| plain.is_small(s)).collect();
    let bf: Vec<TreeCut> = tree_cuts(&t).into_iter().filter(|&s| free.is_small(s)).collect();
    if bp != bf {
        return Trial::Fail("plain and free batches differ".into());
    }
    if bp.is_empty() {
        return Trial::Skip;
    }
    let (mut a, mut b) = (base.clone(), base);
    a.record_trajectory(true);
    b.record_trajectory(true);
    tri!(plain.fast_focus(&bp, &mut a));
    tri!(free.fast_focus(&bf, &mut b));
    let bits = |tr: Vec<(Vec<f64>, Vec<f64>)>| -> Vec<u64> {
        tr.into_iter().flat_map(|(w, c)| w.into_iter().chain(c)).map(f64::to_bits).collect()
    };
    Trial::check(bits(a.take_trajectory()) == bits(b.take_trajectory()), || "trajectories differ".into())
}

/// Small r-cuts of a random tree path vs brute force, plus the size and query bounds.
pub fn extraction_trial(seed: u64) -> Trial {
    let (g, t) = instance(seed, 12);
    let mut r = rng(seed ^ 0x4E);
    let mut path = Vec::new();
    for _ in 0..20 {
        let (u, v) = (r.gen_range(0..g.n()), r.gen_range(0..g.n()));
        path = tree_path(&t, u, v);
        if path.len() >= 2 {
            break;
        }
    }
    if path.len() < 2 {
        return Trial::Skip;
    }
    let root = r.gen_range(1..path.len());
    let p = tri!(PathMinor::new(path.clone(), root));
    let mode = ColumnMode::Plain { k: 1 };
    let w = weights(g.m(), 0.2, 3.0, seed ^ 3);
    let v: Vec<f64> = w.iter().zip(g.costs()).map(|(w, c)| w / c).collect();
    let mut rcuts: Vec<f64> = Vec::new();
    for i in 0..p.rows() {
        for j in 0..p.cols() {
            let side = t.cut_side(p.cut(i, j)).unwrap();
            rcuts.push(direct_column_value(&g, mode, &w, f64::INFINITY, &side));
        }
    }
    rcuts.sort_by(f64::total_cmp);
    let thr = rcuts[0] * r.gen_range(1.0..1.6) + 1e-9;
    let o = CutOracle::new(&g, &t, mode, &w, thr);
    let ext = match extract_cuts_in_path(&p, &o) {
        Ok(x) => x,
        Err(e) => return Trial::Fail(format!("extraction error: {e}")),
    };
    let size_limit = 4 * (path.len() + 2);
    if ext.candidates > size_limit {
        return Trial::Fail(format!("{} candidates > {size_limit}", ext.candidates));
    }
    if ext.queries as f64 > query_budget(p.rows(), p.cols()) {
        return Trial::Fail(format!("{} queries over budget", ext.queries));
    }
    let brute = tri!(all_2respecting_cuts_bruteforce(&g, &t, &v, thr));
    let on_path = |e: usize| path.contains(&e);
    let in_e2: Vec<TreeCut> = brute.iter().map(|x| x.0).filter(|s| !s.is_single() && on_path(s.a) && on_path(s.b)).collect();
    let pos = |e: usize| path.iter().position(|&x| x == e).unwrap();
    let r_side = in_e2.iter().any(|s| (pos(s.a) < root) == (pos(s.b) < root));
    if r_side {
        return Trial::Skip;
    }
    let mut got = ext.cuts.clone();
    got.sort_unstable();
    got.dedup();
    Trial::check(got == in_e2, || format!("extracted {got:?}, brute force {in_e2:?}"))
}

fn state_for_focus(seed: u64, max_n: usize) -> Option<(Graph, SpanningTree, ColumnMode, DualState)> {
    let (g, t) = instance(seed, max_n);
    let mut r = rng(seed ^ 0x5C);
    let mode = random_mode(&g, &mut r);
    let w = weights(g.m(), 0.2, 3.0, seed ^ 4);
    let q = r.gen_range(0.2..0.9);
    let state = state_at_quantile(&g, &t, mode, &w, 0.1, q)?;
    Some((g, t, mode, state))
}

fn clear_singles(o: &mut CutOracle, t: &SpanningTree, state: &mut DualState) -> cutcover::Result<()> {
    let singles: Vec<TreeCut> = t.tree_edges().map(TreeCut::single).filter(|&s| o.is_small(s)).collect();
    o.fast_focus(&singles, state).map(|_| ())
}

fn below(g: &Graph, t: &SpanningTree, mode: ColumnMode, state: &DualState, cuts: &[TreeCut]) -> Option<TreeCut> {
    let thr = state.threshold();
    cuts.iter().copied().find(|&s| direct_column_value(g, mode, &state.w, thr, &t.cut_side(s).unwrap()) < thr * (1.0 - 1e-9))
}

/// After focus_path on a vertical path, every cut with both edges on it is clear.
pub fn focus_path_trial(seed: u64) -> Trial {
    let Some((g, t, mode, mut state)) = state_for_focus(seed, 10) else { return Trial::Skip };
    let thr = state.threshold();
    let mut o = CutOracle::new(&g, &t, mode, &state.w, thr);
    tri!(clear_singles(&mut o, &t, &mut state));
    let mut r = rng(seed ^ 0x9A);
    let bottom = r.gen_range(1..g.n());
    let top = t.ancestor_at_depth(bottom, r.gen_range(0..t.depth[bottom]));
    let mut path = tree_path(&t, bottom, top);
    path.reverse();
    tri!(focus_path(&path, &mut o, &mut state));
    if state.done() {
        return Trial::Skip;
    }
    let mut scope: Vec<TreeCut> = path.iter().map(|&e| TreeCut::single(e)).collect();
    for (i, &e) in path.iter().enumerate() {
        for &f in &path[i + 1..] {
            scope.push(TreeCut::pair(e, f));
        }
    }
    let bad = below(&g, &t, mode, &state, &scope);
    Trial::check(bad.is_none(), || format!("{mode:?}: {bad:?} below threshold on path {path:?}"))
}

/// After focus_tree every 1- and 2-respecting cut of the tree is clear.
pub fn focus_tree_trial(seed: u64) -> Trial {
    let Some((g, t, mode, mut state)) = state_for_focus(seed, 10) else { return Trial::Skip };
    let thr = state.threshold();
    let mut o = CutOracle::new(&g, &t, mode, &state.w, thr);
    tri!(focus_tree(&mut o, &mut state));
    if state.done() {
        return Trial::Skip;
    }
    let bad = below(&g, &t, mode, &state, &tree_cuts(&t));
    Trial::check(bad.is_none(), || format!("{mode:?}: {bad:?} below threshold"))
}

/// Minimum column over all cuts (free cuts in free mode), by enumeration.
pub fn global_min_column(g: &Graph, mode: ColumnMode, w: &[f64]) -> f64 {
    match mode {
        ColumnMode::Plain { k } => {
            let v: Vec<f64> = w.iter().zip(g.costs()).map(|(w, c)| w / (k as f64 * c)).collect();
            exact_min_cut_bruteforce(g, &v).unwrap().1
        }
        ColumnMode::Free { k } => {
            let v: Vec<f64> = w.iter().zip(g.costs()).map(|(w, c)| w / c).collect();
            min_normalized_free_cut_bruteforce(g, &v, k).unwrap().2
        }
    }
}

/// After each epoch every column of the LP is at or above the threshold.
pub fn epoch_trial(seed: u64, opts: SolveOptions, epochs: usize) -> Trial {
    let (g, _) = instance(seed, 8);
    let mut r = rng(seed ^ 0xE0);
    let mode = random_mode(&g, &mut r);
    let params = tri!(solver_params(0.1, &opts));
    let mut driver = TreeEpochs::new(&g, mode, SolveOptions { seed, ..opts });
    let mut state = DualState::new(g.m(), params);
    let (l0, slack) = tri!(driver.initial_lambda(&state));
    if global_min_column(&g, mode, &state.w) < l0 * (1.0 - 1e-9) {
        return Trial::Fail(format!("{mode:?}: initial lambda {l0} above the minimum column"));
    }
    tri!(state.start(l0, slack));
    for ep in 0..epochs {
        tri!(epoch_algorithm(&mut driver, &mut state));
        if state.done() {
            break;
        }
        let min = global_min_column(&g, mode, &state.w);
        if min < state.threshold() * (1.0 - 1e-9) {
            return Trial::Fail(format!("{mode:?}: epoch {ep} left a column at {min} < {}", state.threshold()));
        }
        tri!(state.advance_epoch());
    }
    Trial::Pass
}

/// Range mapping on a tuple (graph, v, λ, ε, k) with λ* ∈ [λ, ρ): forward
/// containment, and backward strictness on every cut below kρ.
pub fn range_mapping_trial(seed: u64) -> Trial {
    let (g, _) = instance(seed, 8);
    let mut r = rng(seed ^ 0x2A);
    let conn = tri!(exact_min_cut_bruteforce(&g, &vec![1.0; g.m()])).1 as usize;
    let k = r.gen_range(1..=3).min(conn);
    let eps = r.gen_range(0.01..0.5);
    let mut v = weights(g.m(), 0.1, 2.0, seed ^ 5);
    for x in v.iter_mut() {
        if r.gen_bool(0.2) {
            *x *= 10.0;
        }
    }
    let (_, _, lstar) = tri!(min_normalized_free_cut_bruteforce(&g, &v, k));
    let lambda = lstar / (1.0 + r.gen_range(0.0..1.0) * eps);
    let rho = (1.0 + eps) * lambda;
    if !(lambda <= lstar && lstar < rho) {
        return Trial::Skip;
    }
    let kf = k as f64;
    let vr: Vec<f64> = v.iter().map(|&x| x.min(rho)).collect();
    let (_, mc) = tri!(exact_min_cut_bruteforce(&g, &vr));
    if !(kf * lambda <= mc * (1.0 + 1e-12) && mc < kf * rho) {
        return Trial::Fail(format!("mincut(v_rho) = {mc} outside [{}, {})", kf * lambda, kf * rho));
    }
    if !tri!(range_map_forward(&g, &v, lambda, eps, k, 20)) && mc >= kf * lambda {
        return Trial::Fail("range_map_forward disagrees with brute force".into());
    }
    let mut bad = None;
    tri!(enumerate_cuts(&g, &vr, |bits, val| {
        if bad.is_some() || val >= kf * rho * (1.0 - 1e-12) {
            return;
        }
        let c = VertexCut::from_bits(g.n(), bits).unwrap();
        match range_map_backward(&g, &c, &v, rho, k) {
            Ok((_, value)) if value < rho => {}
            Ok((_, value)) => bad = Some(format!("backward value {value} >= rho {rho}")),
            Err(e) => bad = Some(format!("backward failed: {e}")),
        }
    }));
    match bad {
        Some(m) => Trial::Fail(m),
        None => Trial::Pass,
    }
}
