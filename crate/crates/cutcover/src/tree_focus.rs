//! Clearing all 1- and 2-respecting cuts of one tree, the per-epoch driver,
//! and the cut covering / Held-Karp facade.

use std::collections::BTreeMap;
use std::time::Duration;
use web_time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{stoer_wagner, Graph};
use crate::mwu::{internal_epsilon, run_solver, DualState, EpochOracle, SolverParams, SolveStats, TraceRecord};
use crate::oracle::{ColumnMode, CutOracle};
use crate::packing::{self, pack_trees};
use crate::path::{extract_cuts_in_path, focus_multiple_paths, minor_minimum, recursion_levels, Node, PathMinor};
use crate::tree::{Interval, Intervals, SpanningTree, TreeCut, NONE};

/// Interested-pair edge total bound: C_INT n log₂ n.
pub const C_INT: f64 = 6.0;
/// Trees up to this size get an exhaustive 2-respecting minimum.
pub const EXHAUSTIVE_TREE_N: usize = 40;

#[derive(Debug, Clone)]
pub struct PathDecomposition {
    pub paths: Vec<Vec<usize>>,
    /// Path id of each tree edge (NONE for the root).
    pub path_of: Vec<usize>,
}

pub fn path_decomposition(t: &SpanningTree) -> PathDecomposition {
    let paths = t.heavy_paths();
    let mut path_of = vec![NONE; t.n];
    for (i, p) in paths.iter().enumerate() {
        for &e in p {
            path_of[e] = i;
        }
    }
    PathDecomposition { paths, path_of }
}

/// w(T_e): the one-edge cut value.
pub fn subtree_weight(o: &CutOracle, e: usize) -> f64 {
    o.cut_value(TreeCut::single(e))
}

/// w(T_e, T_f) for unrelated e, f, or w(T_f, T \ T_e) when f lies below e.
pub fn cross_weight(o: &CutOracle, e: usize, f: usize) -> Result<f64> {
    let t = o.tree();
    if e == f || (t.is_ancestor(f, e) && !t.is_ancestor(e, f)) {
        return Err(Error::Invalid(format!("cross weight needs f unrelated to or below e ({e}, {f})")));
    }
    let v = subtree_weight(o, e) + subtree_weight(o, f) - o.cut_value(TreeCut::pair(e, f));
    Ok((v / 2.0).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    Cross,
    Down,
}

#[derive(Debug, Clone)]
pub struct InterestedPair {
    pub kind: PairKind,
    pub p: usize,
    pub q: usize,
    /// Rows of the minor, outward from its root.
    pub rows: Vec<usize>,
    /// Columns of the minor, outward from its root.
    pub cols: Vec<usize>,
}

impl InterestedPair {
    pub fn minor(&self) -> Result<PathMinor> {
        let mut edges: Vec<usize> = self.rows.iter().rev().copied().collect();
        edges.extend(&self.cols);
        PathMinor::new(edges, self.rows.len())
    }
}

fn clip(iv: &[Interval], lo: usize, hi: usize) -> Intervals {
    iv.iter()
        .map(|i| Interval::new(i.lo.max(lo), i.hi.min(hi)))
        .filter(|i| !i.is_empty())
        .collect()
}

/// Smallest q in [lo, hi) with f(q+1) > half, assuming f nondecreasing.
fn median_position(lo: usize, hi: usize, half: f64, f: impl Fn(usize) -> f64) -> usize {
    let (mut a, mut b) = (lo, hi - 1);
    while a < b {
        let mid = (a + b) / 2;
        if f(mid + 1) > half {
            b = mid;
        } else {
            a = mid + 1;
        }
    }
    a
}

/// Largest d in [lo, hi] with pred(d), given pred(lo) and pred monotone decreasing.
fn deepest(lo: usize, hi: usize, pred: impl Fn(usize) -> bool) -> usize {
    let (mut a, mut b) = (lo, hi);
    while a < b {
        let mid = (a + b).div_ceil(2);
        if pred(mid) {
            a = mid;
        } else {
            b = mid - 1;
        }
    }
    a
}

/// Cross-interest chain of e: the edges f unrelated to e with 2 w(T_e,T_f) > w(T_e).
/// They form the tree path from depth `top` down to `bottom`.
pub fn cross_chain(o: &CutOracle, e: usize) -> Option<(usize, usize)> {
    let t = o.tree();
    let we = subtree_weight(o, e);
    if !(we > 0.0) {
        return None;
    }
    let ie = [t.subtree(e)];
    let out = t.complement(&ie);
    let p = median_position(0, t.n, we / 2.0, |q| o.range_weight(&ie, &clip(&out, 0, q)));
    if ie[0].contains(p) {
        return None;
    }
    let u = t.order[p];
    let a = t.lca(e, u);
    if a == u {
        return None;
    }
    let interest = |d: usize| 2.0 * o.range_weight(&ie, &[t.subtree(t.ancestor_at_depth(u, d))]) > we;
    let top = t.depth[a] + 1;
    if !interest(top) {
        return None;
    }
    let d = deepest(top, t.depth[u], interest);
    Some((t.ancestor_at_depth(u, d), top))
}

/// Down-interest chain of e: descendants f with 2 w(T_f, T \ T_e) > w(T_e).
pub fn down_chain(o: &CutOracle, e: usize) -> Option<(usize, usize)> {
    let t = o.tree();
    let we = subtree_weight(o, e);
    if !(we > 0.0) {
        return None;
    }
    let ie = t.subtree(e);
    let out = t.complement(&[ie]);
    let p = median_position(ie.lo, ie.hi, we / 2.0, |q| o.range_weight(&[Interval::new(ie.lo, q)], &out));
    let u = t.order[p];
    if u == e {
        return None;
    }
    let interest = |d: usize| 2.0 * o.range_weight(&[t.subtree(t.ancestor_at_depth(u, d))], &out) > we;
    let top = t.depth[e] + 1;
    if !interest(top) {
        return None;
    }
    let d = deepest(top, t.depth[u], interest);
    Some((t.ancestor_at_depth(u, d), top))
}

/// Paths met by the vertical chain from `bottom` up to depth `top`.
fn chain_paths(t: &SpanningTree, dec: &PathDecomposition, bottom: usize, top: usize, mut f: impl FnMut(usize)) {
    let mut x = bottom;
    loop {
        f(dec.path_of[x]);
        let h = t.head[x];
        if h == t.root || t.depth[h] <= top {
            break;
        }
        x = t.parent[h];
        if t.depth[x] < top {
            break;
        }
    }
}

pub fn interested_path_pairs(o: &CutOracle, dec: &PathDecomposition) -> Result<Vec<InterestedPair>> {
    let t = o.tree();
    let edges: Vec<usize> = t.tree_edges().collect();
    let chains: Vec<(Option<(usize, usize)>, Option<(usize, usize)>)> =
        edges.par_iter().map(|&e| (cross_chain(o, e), down_chain(o, e))).collect();
    let mut cross: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    let mut down: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (&e, (c, d)) in edges.iter().zip(&chains) {
        let pe = dec.path_of[e];
        if let Some((bottom, top)) = *c {
            chain_paths(t, dec, bottom, top, |q| cross.entry((pe, q)).or_default().push(e));
        }
        if let Some((bottom, top)) = *d {
            chain_paths(t, dec, bottom, top, |q| {
                if q != pe {
                    down.entry((pe, q)).or_default().push(e)
                }
            });
        }
    }
    let by_depth = |v: &mut Vec<usize>| {
        v.sort_by_key(|&x| (t.depth[x], x));
        v.dedup();
    };
    let mut out = Vec::new();
    for (&(p, q), rows) in &cross {
        if p >= q {
            continue;
        }
        if let Some(cols) = cross.get(&(q, p)) {
            let (mut rows, mut cols) = (rows.clone(), cols.clone());
            by_depth(&mut rows);
            by_depth(&mut cols);
            out.push(InterestedPair { kind: PairKind::Cross, p, q, rows, cols });
        }
    }
    for (&(p, q), rows) in &down {
        let mut rows = rows.clone();
        by_depth(&mut rows);
        rows.reverse();
        out.push(InterestedPair { kind: PairKind::Down, p, q, rows, cols: dec.paths[q].clone() });
    }
    let total: usize = out.iter().map(|x| x.rows.len() + if x.kind == PairKind::Cross { x.cols.len() } else { 0 }).sum();
    let n = t.n as f64;
    let bound = C_INT * n * n.log2().max(1.0);
    if total as f64 > bound {
        return Err(Error::Invariant(format!("interested pairs list {total} edges, bound {bound:.0}")));
    }
    Ok(out)
}

/// Focus until every 1- and 2-respecting cut of the oracle's tree is at or
/// above the threshold (or the run ends).
pub fn focus_tree(o: &mut CutOracle, state: &mut DualState) -> Result<()> {
    let t = o.tree();
    let singles: Vec<TreeCut> = t.tree_edges().map(TreeCut::single).filter(|&s| o.is_small(s)).collect();
    o.fast_focus(&singles, state)?;
    if state.done() {
        return Ok(());
    }
    let dec = path_decomposition(t);
    focus_multiple_paths(&dec.paths, o, state)?;
    if state.done() {
        return Ok(());
    }
    let pairs = interested_path_pairs(o, &dec)?;
    let oracle: &CutOracle = o;
    let found = pairs
        .par_iter()
        .map(|p| Ok(extract_cuts_in_path(&p.minor()?, oracle)?.cuts))
        .collect::<Result<Vec<_>>>()?;
    let batch: Vec<TreeCut> = found.into_iter().flatten().collect();
    o.fast_focus(&batch, state)?;
    Ok(())
}

/// Minimum cut value over all 1- and 2-respecting cuts of the oracle's tree.
pub fn min_respecting_cut(o: &CutOracle) -> (TreeCut, f64) {
    min_respecting_cut_with(o, EXHAUSTIVE_TREE_N)
}

pub fn min_respecting_cut_with(o: &CutOracle, exhaustive_n: usize) -> (TreeCut, f64) {
    let t = o.tree();
    let edges: Vec<usize> = t.tree_edges().collect();
    let mut best = (TreeCut::single(edges[0]), f64::INFINITY);
    let mut offer = |s: TreeCut, v: f64| {
        if v < best.1 {
            best = (s, v);
        }
    };
    for &e in &edges {
        offer(TreeCut::single(e), o.cut_value(TreeCut::single(e)));
    }
    if t.n <= exhaustive_n {
        for (i, &e) in edges.iter().enumerate() {
            for &f in &edges[i + 1..] {
                let s = TreeCut::pair(e, f);
                offer(s, o.cut_value(s));
            }
        }
        return best;
    }
    let dec = path_decomposition(t);
    for path in &dec.paths {
        for level in recursion_levels(path.len()) {
            for node in level {
                match node {
                    Node::Base { a, b } => {
                        for i in a..=b {
                            for j in i + 1..=b {
                                let s = TreeCut::pair(path[i], path[j]);
                                offer(s, o.cut_value(s));
                            }
                        }
                    }
                    Node::Split { a, mid, b } => {
                        let p = PathMinor::new(path[a..=b].to_vec(), mid - a + 1).expect("split node");
                        let (s, v) = minor_minimum(&p, o);
                        offer(s, v);
                    }
                }
            }
        }
    }
    if let Ok(pairs) = interested_path_pairs(o, &dec) {
        for p in pairs {
            if let Ok(m) = p.minor() {
                let (s, v) = minor_minimum(&m, o);
                offer(s, v);
            }
        }
    }
    best
}

/// Knobs shared by the solver facades.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub seed: u64,
    /// Extra tree-packing passes allowed per epoch.
    pub max_retries: u32,
    pub max_iterations: u64,
    /// Wall-clock limit for one solve.
    pub time_limit: Option<Duration>,
    /// Graphs up to this size certify every epoch with an exact min cut and
    /// retry until clear; larger ones run one packing pass per epoch.
    pub exact_certify_max_n: usize,
    pub check_invariants: bool,
    pub trace: bool,
}

impl Default for SolveOptions {
    fn default() -> SolveOptions {
        SolveOptions {
            seed: 1,
            max_retries: 32,
            max_iterations: 50_000_000,
            time_limit: None,
            exact_certify_max_n: 64,
            check_invariants: true,
            trace: false,
        }
    }
}

/// Effective weights seen by the cut structures: a_e w_e, truncated at ρ for free cuts.
pub fn effective_weights(g: &Graph, mode: ColumnMode, w: &[f64], rho: f64) -> Vec<f64> {
    let coef = mode.edge_coefficients(&g.costs());
    w.iter()
        .zip(&coef)
        .map(|(w, a)| {
            let v = w * a;
            if mode.truncates() {
                v.min(rho)
            } else {
                v
            }
        })
        .collect()
}

/// Per-epoch driver: packs trees, clears each, and re-checks until the epoch is clear.
pub struct TreeEpochs<'g> {
    pub g: &'g Graph,
    pub mode: ColumnMode,
    pub opts: SolveOptions,
    packings: u64,
}

impl<'g> TreeEpochs<'g> {
    pub fn new(g: &'g Graph, mode: ColumnMode, opts: SolveOptions) -> TreeEpochs<'g> {
        TreeEpochs { g, mode, opts, packings: 0 }
    }

    fn next_seed(&mut self) -> u64 {
        self.packings += 1;
        self.opts.seed.wrapping_add(self.packings.wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }

    fn exact(&self) -> bool {
        self.g.n() <= self.opts.exact_certify_max_n
    }

    /// Whether every cut is at or above the threshold, by an exact min cut
    /// of the (truncated) effective weights.
    pub fn certify_exact(&self, state: &DualState) -> Result<bool> {
        let thr = state.threshold();
        let v = effective_weights(self.g, self.mode, &state.w, thr);
        let limit = self.mode.demand() as f64 * thr * (1.0 - 1e-12);
        Ok(stoer_wagner(self.g, &v)?.1 >= limit)
    }

    fn pass(&mut self, state: &mut DualState, attempt: u32) -> Result<()> {
        let thr = state.threshold();
        let v = effective_weights(self.g, self.mode, &state.w, thr);
        let seed = self.next_seed();
        let mut packing = pack_trees(self.g, &v, seed)?;
        if attempt >= 2 {
            // repeated failures: widen the sample
            let extra = pack_more(self.g, &v, seed, attempt)?;
            packing.trees.extend(extra);
        }
        state.stats.packings += 1;
        let exact = self.exact();
        for t in &packing.trees {
            let mut o = CutOracle::new(self.g, t, self.mode, &state.w, state.threshold());
            let before = state.stats.iterations;
            focus_tree(&mut o, state)?;
            if state.done() || (exact && state.stats.iterations > before && self.certify_exact(state)?) {
                break;
            }
        }
        Ok(())
    }
}

fn pack_more(g: &Graph, v: &[f64], seed: u64, attempt: u32) -> Result<Vec<SpanningTree>> {
    let mut out = Vec::new();
    for i in 0..(attempt - 1).min(4) {
        out.extend(pack_trees(g, v, seed ^ (0xA5A5_0000 + i as u64))?.trees);
    }
    Ok(out)
}

/// One epoch: afterwards every column is at or above (1+ε)λ, or the run is over.
pub fn epoch_algorithm(driver: &mut TreeEpochs, state: &mut DualState) -> Result<()> {
    let exact = driver.exact();
    let mut attempt = 0u32;
    loop {
        if exact && driver.certify_exact(state)? {
            return Ok(());
        }
        if state.done() {
            return Ok(());
        }
        if attempt > driver.opts.max_retries {
            return Err(Error::BudgetExceeded(format!(
                "epoch not clear after {attempt} packing passes"
            )));
        }
        state.check_deadline()?;
        if attempt > 0 {
            state.stats.retries += 1;
        }
        driver.pass(state, attempt)?;
        if !exact {
            // one packing pass: clear with high probability
            return Ok(());
        }
        attempt += 1;
    }
}

impl EpochOracle for TreeEpochs<'_> {
    fn initial_lambda(&mut self, state: &DualState) -> Result<(f64, f64)> {
        let eps = state.eps;
        let out = match self.mode {
            ColumnMode::Plain { .. } => {
                let v = effective_weights(self.g, self.mode, &state.w, f64::INFINITY);
                let seed = self.next_seed();
                let packing = pack_trees(self.g, &v, seed)?;
                let l = packing::initial_lambda(self.g, &packing, self.mode, &state.w, eps);
                (l, 1.0 + eps)
            }
            ColumnMode::Free { k } => {
                let v = effective_weights(self.g, self.mode, &state.w, f64::INFINITY);
                let seed = self.next_seed();
                crate::kecss::init_lambda_kecss(self.g, &v, k, eps, seed, self.opts.exact_certify_max_n)?
            }
        };
        Ok(out)
    }

    fn clear_epoch(&mut self, state: &mut DualState) -> Result<()> {
        let start = Instant::now();
        let r = epoch_algorithm(self, state);
        state.stats.add_phase("epochs", start);
        r
    }
}

/// Fractional cut cover: y ≥ 0 with Σ_{δ(S)} y ≥ k for every cut S.
#[derive(Debug, Clone)]
pub struct CoverSolution {
    /// c^T y.
    pub bound: f64,
    pub y: Vec<f64>,
    /// Packing lower bound on the optimum.
    pub lower_bound: f64,
    /// ⟨1,w*⟩/λ* of the chosen epoch, before any post-processing.
    pub dual_value: f64,
    pub stats: SolveStats,
    pub trace: Vec<TraceRecord>,
}

pub fn solver_params(eps_target: f64, opts: &SolveOptions) -> Result<SolverParams> {
    if !(eps_target > 0.0 && eps_target < 0.5) {
        return Err(Error::Invalid(format!("eps must lie in (0, 0.5), got {eps_target}")));
    }
    let mut p = SolverParams::new(internal_epsilon(eps_target));
    p.max_iterations = opts.max_iterations;
    p.deadline = opts.time_limit.map(|d| Instant::now() + d);
    p.check_invariants = opts.check_invariants;
    p.trace = opts.trace;
    Ok(p)
}

/// (1+ε)-approximate CC(G, c, k).
pub fn solve_cut_cover(g: &Graph, k: usize, eps_target: f64, opts: SolveOptions) -> Result<CoverSolution> {
    if k == 0 {
        return Err(Error::Invalid("k must be at least 1".into()));
    }
    let params = solver_params(eps_target, &opts)?;
    let mut driver = TreeEpochs::new(g, ColumnMode::Plain { k }, opts);
    let out = run_solver(g.m(), params, &mut driver)?;
    let costs = g.costs();
    let y = crate::mwu::extract_covering_solution(&out.z, &costs);
    let bound = y.iter().zip(&costs).map(|(y, c)| y * c).sum();
    Ok(CoverSolution {
        bound,
        y,
        lower_bound: out.lower_bound,
        dual_value: out.value,
        stats: out.stats,
        trace: out.trace,
    })
}

/// (1+ε)-approximate Held-Karp bound, i.e. CC(G, c, 2).
pub fn held_karp(g: &Graph, eps_target: f64, opts: SolveOptions) -> Result<CoverSolution> {
    solve_cut_cover(g, 2, eps_target, opts)
}
