//! Canonical cut decomposition and the implicit-column Focus.
//!
//! Every graph edge is the point (x, y) = (min, max) of its endpoints' Euler
//! positions. An x-tree over positions stores at each node the edges of its
//! x-range sorted by y, and a segment tree over that list. One node of such a
//! y-tree is a canonical set. The edges crossing a 1- or 2-respecting cut form a
//! constant number of rectangles, each a disjoint union of O(log² n) canonical
//! sets.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::mwu::{Column, ColumnSource, DualState};
use crate::tree::{Interval, SpanningTree, TreeCut};

/// Canonical membership bound `C log₂² n + C0`.
pub const CANON_C: f64 = 4.0;
pub const CANON_C0: f64 = 8.0;

/// How columns are formed from tree cuts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnMode {
    /// Cut covering: coefficients 1/(k c_e) on every crossing edge.
    Plain { k: usize },
    /// Free cuts (S, F) with F the edges of weight ≥ ρ: coefficients
    /// 1/((k-|F|) c_e) on the other crossing edges.
    Free { k: usize },
}

impl ColumnMode {
    pub fn k(&self) -> usize {
        match *self {
            ColumnMode::Plain { k } | ColumnMode::Free { k } => k,
        }
    }

    /// Per-edge factor a_e with effective weight v_e = a_e w_e.
    pub fn edge_coefficients(&self, costs: &[f64]) -> Vec<f64> {
        match *self {
            ColumnMode::Plain { k } => costs.iter().map(|&c| 1.0 / (k as f64 * c)).collect(),
            ColumnMode::Free { .. } => costs.iter().map(|&c| 1.0 / c).collect(),
        }
    }

    /// Inverse of [`edge_coefficients`]: k c_e for plain cuts, c_e for free cuts.
    pub fn scaled_costs(&self, costs: &[f64]) -> Vec<f64> {
        match *self {
            ColumnMode::Plain { k } => costs.iter().map(|&c| k as f64 * c).collect(),
            ColumnMode::Free { .. } => costs.to_vec(),
        }
    }

    /// Number of "units" a column must cover in effective weights (k for free cuts).
    pub fn demand(&self) -> usize {
        match *self {
            ColumnMode::Plain { .. } => 1,
            ColumnMode::Free { k } => k,
        }
    }

    pub fn truncates(&self) -> bool {
        matches!(self, ColumnMode::Free { .. })
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CutSum {
    pub light: f64,
    pub heavy: u32,
}

#[derive(Debug, Clone, Default)]
pub struct FocusReport {
    pub iterations: u64,
    pub batch: usize,
}

/// Batch of tree cuts wired to their canonical sets.
#[derive(Debug, Clone)]
pub struct Augmented {
    pub cuts: Vec<TreeCut>,
    pub slots: Vec<Vec<u32>>,
}

pub struct CutOracle<'a> {
    tree: &'a SpanningTree,
    mode: ColumnMode,
    nx: usize,
    levels: usize,
    xoff: Vec<u32>,
    xlen: Vec<u32>,
    ys: Vec<u32>,
    eid: Vec<u32>,
    light: Vec<f64>,
    heavy: Vec<u32>,
    minc: Vec<f64>,
    x_of: Vec<u32>,
    pos: Vec<u32>,
    coef: Vec<f64>,
    cscaled: Vec<f64>,
    v: Vec<f64>,
    is_heavy: Vec<bool>,
    demand: usize,
    rho: f64,
    thr: f64,
    max_membership: usize,
    queries: AtomicU64,
}

impl<'a> CutOracle<'a> {
    /// Builds the structure for `tree` with effective weights taken from `w`.
    /// `thr` is the epoch threshold (1+ε)λ; free mode truncates at ρ = thr.
    pub fn new(g: &Graph, tree: &'a SpanningTree, mode: ColumnMode, w: &[f64], thr: f64) -> CutOracle<'a> {
        let n = g.n();
        let m = g.m();
        let nx = n.next_power_of_two();
        let levels = nx.trailing_zeros() as usize + 1;
        let costs = g.costs();
        let coef = mode.edge_coefficients(&costs);
        let cscaled = mode.scaled_costs(&costs);
        let mut pts: Vec<(u32, u32, u32)> = g
            .edges()
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let (a, b) = (tree.tin[e.u] as u32, tree.tin[e.v] as u32);
                (a.min(b), a.max(b), i as u32)
            })
            .collect();
        pts.sort_unstable();
        let mut xlen = vec![0u32; 2 * nx];
        for p in &pts {
            xlen[nx + p.0 as usize] += 1;
        }
        for i in (1..nx).rev() {
            xlen[i] = xlen[2 * i] + xlen[2 * i + 1];
        }
        let mut xoff = vec![0u32; 2 * nx];
        let mut acc = 0u32;
        for i in 1..2 * nx {
            xoff[i] = acc;
            acc += xlen[i];
        }
        let total = acc as usize;
        let mut ys = vec![0u32; total];
        let mut eid = vec![0u32; total];
        let mut x_of = vec![0u32; m];
        let mut pos = vec![0u32; m * levels];
        {
            let mut fill = vec![0u32; 2 * nx];
            for p in &pts {
                let leaf = nx + p.0 as usize;
                let at = (xoff[leaf] + fill[leaf]) as usize;
                ys[at] = p.1;
                eid[at] = p.2;
                pos[p.2 as usize * levels] = fill[leaf];
                fill[leaf] += 1;
                x_of[p.2 as usize] = p.0;
            }
        }
        for i in (1..nx).rev() {
            let lvl = levels - 1 - (usize::BITS - 1 - i.leading_zeros()) as usize;
            let (l, r) = (2 * i, 2 * i + 1);
            let (mut a, ae) = (xoff[l] as usize, (xoff[l] + xlen[l]) as usize);
            let (mut b, be) = (xoff[r] as usize, (xoff[r] + xlen[r]) as usize);
            let mut at = xoff[i] as usize;
            let base = at;
            while a < ae || b < be {
                let take_a = b >= be || (a < ae && (ys[a], eid[a]) <= (ys[b], eid[b]));
                let src = if take_a { a } else { b };
                ys[at] = ys[src];
                eid[at] = eid[src];
                pos[eid[src] as usize * levels + lvl] = (at - base) as u32;
                at += 1;
                if take_a {
                    a += 1
                } else {
                    b += 1
                }
            }
        }
        let mut max_membership = 0;
        for e in 0..m {
            let mut cnt = 0;
            let leaf = nx + x_of[e] as usize;
            for lvl in 0..levels {
                let len = xlen[leaf >> lvl] as usize;
                // depth of a leaf in an iterative segment tree of `len` leaves
                let p = len + pos[e * levels + lvl] as usize;
                cnt += (usize::BITS - p.leading_zeros()) as usize;
            }
            max_membership = max_membership.max(cnt);
        }
        let ln2 = (n as f64).log2();
        let bound = CANON_C * ln2 * ln2 + CANON_C0;
        assert!(
            max_membership as f64 <= bound,
            "canonical membership {max_membership} exceeds {bound}"
        );
        let demand = mode.demand();
        let rho = if mode.truncates() { thr } else { f64::INFINITY };
        let mut o = CutOracle {
            tree,
            mode,
            nx,
            levels,
            xoff,
            xlen,
            ys,
            eid,
            light: vec![0.0; 2 * total],
            heavy: vec![0; 2 * total],
            minc: vec![f64::INFINITY; 2 * total],
            x_of,
            pos,
            coef,
            cscaled,
            v: vec![0.0; m],
            is_heavy: vec![false; m],
            demand,
            rho,
            thr,
            max_membership,
            queries: AtomicU64::new(0),
        };
        for e in 0..m {
            o.set_edge(e, w[e]);
        }
        o.rebuild_internal();
        o
    }

    pub fn tree(&self) -> &'a SpanningTree {
        self.tree
    }

    pub fn mode(&self) -> ColumnMode {
        self.mode
    }

    pub fn threshold(&self) -> f64 {
        self.thr
    }

    /// Extraction threshold on [`cut_value`]: k ρ for free cuts, (1+ε)λ otherwise.
    pub fn extraction_threshold(&self) -> f64 {
        self.demand as f64 * self.thr
    }

    pub fn max_membership(&self) -> usize {
        self.max_membership
    }

    pub fn canonical_count(&self) -> usize {
        self.light.len() / 2
    }

    pub fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    pub fn effective_weight(&self, e: usize) -> f64 {
        self.v[e]
    }

    fn base(&self, i: usize) -> usize {
        2 * self.xoff[i] as usize
    }

    fn set_edge(&mut self, e: usize, we: f64) {
        let v = we * self.coef[e];
        self.v[e] = v;
        let heavy = v >= self.rho;
        self.is_heavy[e] = heavy;
        let leaf = self.nx + self.x_of[e] as usize;
        for lvl in 0..self.levels {
            let i = leaf >> lvl;
            let s = self.base(i) + self.xlen[i] as usize + self.pos[e * self.levels + lvl] as usize;
            self.light[s] = if heavy { 0.0 } else { v };
            self.heavy[s] = heavy as u32;
            self.minc[s] = if heavy { f64::INFINITY } else { self.cscaled[e] };
        }
    }

    fn pull(&mut self, s: usize, l: usize, r: usize) {
        self.light[s] = self.light[l] + self.light[r];
        self.heavy[s] = self.heavy[l] + self.heavy[r];
        self.minc[s] = self.minc[l].min(self.minc[r]);
    }

    fn rebuild_internal(&mut self) {
        for i in 1..2 * self.nx {
            let len = self.xlen[i] as usize;
            let b = self.base(i);
            for s in (1..len).rev() {
                self.pull(b + s, b + 2 * s, b + 2 * s + 1);
            }
        }
    }

    /// Re-reads the weights of `edges` from `w` and refreshes the cached sums.
    pub fn update_edges(&mut self, edges: &[usize], w: &[f64]) {
        for &e in edges {
            self.set_edge(e, w[e]);
        }
        if edges.len() * self.levels * 8 > self.eid.len() {
            self.rebuild_internal();
            return;
        }
        for &e in edges {
            let leaf = self.nx + self.x_of[e] as usize;
            for lvl in 0..self.levels {
                let i = leaf >> lvl;
                let b = self.base(i);
                let mut s = self.xlen[i] as usize + self.pos[e * self.levels + lvl] as usize;
                while s > 1 {
                    s >>= 1;
                    self.pull(b + s, b + 2 * s, b + 2 * s + 1);
                }
            }
        }
    }

    /// Visits the canonical slots covering points with x in [x1,x2) and y in [y1,y2).
    fn visit_rect(&self, x1: usize, x2: usize, y1: usize, y2: usize, f: &mut impl FnMut(usize)) {
        if x1 >= x2 || y1 >= y2 {
            return;
        }
        let mut l = x1 + self.nx;
        let mut r = x2 + self.nx;
        while l < r {
            if l & 1 == 1 {
                self.visit_y(l, y1, y2, f);
                l += 1;
            }
            if r & 1 == 1 {
                r -= 1;
                self.visit_y(r, y1, y2, f);
            }
            l >>= 1;
            r >>= 1;
        }
    }

    fn visit_y(&self, i: usize, y1: usize, y2: usize, f: &mut impl FnMut(usize)) {
        let len = self.xlen[i] as usize;
        if len == 0 {
            return;
        }
        let off = self.xoff[i] as usize;
        let list = &self.ys[off..off + len];
        let lo = list.partition_point(|&y| (y as usize) < y1);
        let hi = list.partition_point(|&y| (y as usize) < y2);
        let b = self.base(i);
        let mut l = lo + len;
        let mut r = hi + len;
        while l < r {
            if l & 1 == 1 {
                f(b + l);
                l += 1;
            }
            if r & 1 == 1 {
                r -= 1;
                f(b + r);
            }
            l >>= 1;
            r >>= 1;
        }
    }

    /// Rectangles of points with one endpoint in `a` and the other in `b`
    /// (disjoint interval sets), or both in `a` when `same`.
    fn visit_between(&self, a: &[Interval], b: &[Interval], same: bool, f: &mut impl FnMut(usize)) {
        if same {
            for (i, p) in a.iter().enumerate() {
                for q in &a[i..] {
                    let (p, q) = if p.lo <= q.lo { (p, q) } else { (q, p) };
                    self.visit_rect(p.lo, p.hi, q.lo, q.hi, f);
                }
            }
            return;
        }
        for p in a {
            for q in b {
                if p.is_empty() || q.is_empty() {
                    continue;
                }
                if p.hi <= q.lo {
                    self.visit_rect(p.lo, p.hi, q.lo, q.hi, f);
                } else {
                    self.visit_rect(q.lo, q.hi, p.lo, p.hi, f);
                }
            }
        }
    }

    /// Canonical set ids whose disjoint union is δ(cut_T(s)).
    pub fn decompose(&self, s: TreeCut) -> Result<Vec<u32>> {
        let side = self.tree.cut_intervals(s)?;
        let rest = self.tree.complement(&side);
        let mut out = Vec::new();
        self.visit_between(&side, &rest, false, &mut |x| out.push(x as u32));
        Ok(out)
    }

    /// Graph edges of a canonical set.
    pub fn canonical_edges(&self, slot: u32) -> Vec<usize> {
        let slot = slot as usize;
        // locate the x-node owning this slot
        let mut lo = 1;
        let mut hi = 2 * self.nx - 1;
        while lo < hi {
            let mid = (lo + hi + 1) / 2;
            if self.base(mid) <= slot {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        // empty nodes share a base with their successor; pick the nonempty owner
        let mut i = lo;
        while self.xlen[i] == 0 || slot >= self.base(i) + 2 * self.xlen[i] as usize {
            i -= 1;
        }
        let mut out = Vec::new();
        self.leaves_under(i, slot - self.base(i), &mut |e| out.push(e));
        out
    }

    fn leaves_under(&self, i: usize, s: usize, f: &mut impl FnMut(usize)) {
        let len = self.xlen[i] as usize;
        let off = self.xoff[i] as usize;
        let mut stack = vec![s];
        while let Some(t) = stack.pop() {
            if t >= len {
                f(self.eid[off + t - len] as usize);
            } else {
                stack.push(2 * t + 1);
                stack.push(2 * t);
            }
        }
    }

    fn sum_slots(&self, slots: impl IntoIterator<Item = u32>) -> CutSum {
        let mut c = CutSum::default();
        for s in slots {
            c.light += self.light[s as usize];
            c.heavy += self.heavy[s as usize];
        }
        c
    }

    fn sum_between(&self, a: &[Interval], b: &[Interval], same: bool) -> CutSum {
        let mut c = CutSum::default();
        self.visit_between(a, b, same, &mut |s| {
            c.light += self.light[s];
            c.heavy += self.heavy[s];
        });
        c
    }

    fn truncated(&self, c: CutSum) -> f64 {
        if c.heavy == 0 {
            c.light
        } else {
            c.light + c.heavy as f64 * self.rho
        }
    }

    fn normalized(&self, c: CutSum) -> f64 {
        if c.heavy as usize >= self.demand {
            f64::INFINITY
        } else {
            c.light / (self.demand - c.heavy as usize) as f64
        }
    }

    pub fn cut_sum(&self, s: TreeCut) -> CutSum {
        self.queries.fetch_add(1, Ordering::Relaxed);
        let side = self.tree.cut_intervals(s).expect("valid tree cut");
        let rest = self.tree.complement(&side);
        self.sum_between(&side, &rest, false)
    }

    /// cutval_T(s) under the (truncated, in free mode) effective weights.
    pub fn cut_value(&self, s: TreeCut) -> f64 {
        self.truncated(self.cut_sum(s))
    }

    /// Column weight of s: the cut value, or the normalized free-cut value.
    pub fn column_value(&self, s: TreeCut) -> f64 {
        self.normalized(self.cut_sum(s))
    }

    /// Whether s is a column below the threshold (a "small" cut).
    pub fn is_small(&self, s: TreeCut) -> bool {
        self.column_value(s) < self.thr
    }

    /// Weight of edges with one endpoint in `a` and one in `b`; both in `a` if `a == b`.
    pub fn range_weight(&self, a: &[Interval], b: &[Interval]) -> f64 {
        self.queries.fetch_add(1, Ordering::Relaxed);
        let same = a == b;
        self.truncated(self.sum_between(a, b, same))
    }

    /// Deduplicates the batch and wires each cut to its canonical sets.
    pub fn augment(&self, batch: &[TreeCut]) -> Result<Augmented> {
        let mut cuts = batch.to_vec();
        cuts.sort_unstable();
        cuts.dedup();
        let slots = cuts.iter().map(|&s| self.decompose(s)).collect::<Result<Vec<_>>>()?;
        Ok(Augmented { cuts, slots })
    }

    /// Focus on the implicit columns of `batch`.
    pub fn fast_focus(&mut self, batch: &[TreeCut], state: &mut DualState) -> Result<FocusReport> {
        if batch.is_empty() {
            return Ok(FocusReport::default());
        }
        let aug = self.augment(batch)?;
        let nb = aug.cuts.len();
        let thr = self.thr;
        let eps = state.eps;
        let mut maxa = vec![0.0; nb];
        for (j, sl) in aug.slots.iter().enumerate() {
            let c = self.sum_slots(sl.iter().copied());
            let val = self.normalized(c);
            if !(val < thr) {
                return Err(Error::Contract(format!("cut {:?} has column weight {val} >= {thr}", aug.cuts[j])));
            }
            let minc = sl.iter().map(|&s| self.minc[s as usize]).fold(f64::INFINITY, f64::min);
            maxa[j] = 1.0 / ((self.demand - c.heavy as usize) as f64 * minc);
        }
        let m = self.v.len();
        let mut x = vec![0.0; nb];
        let mut active: Vec<usize> = (0..nb).collect();
        let mut slot_x = vec![0.0; self.light.len()];
        let mut touched: Vec<usize> = Vec::new();
        let mut edge_x = vec![0.0; m];
        let mut edge_touched: Vec<usize> = Vec::new();
        let mut seen = vec![false; m];
        let mut iterations = 0u64;
        while !state.done() && !active.is_empty() {
            state.begin_iteration()?;
            iterations += 1;
            let first = iterations == 1;
            let mut g = vec![0.0; active.len()];
            for (t, &j) in active.iter().enumerate() {
                let c = self.sum_slots(aug.slots[j].iter().copied());
                let share = 1.0 / (self.demand - c.heavy as usize) as f64;
                let amount = if first {
                    g[t] = eps / (active.len() as f64 * maxa[j]);
                    g[t]
                } else {
                    x[j]
                };
                for &s in &aug.slots[j] {
                    let s = s as usize;
                    if slot_x[s] == 0.0 {
                        touched.push(s);
                    }
                    slot_x[s] += amount * share;
                }
            }
            for &s in &touched {
                let xs = slot_x[s];
                slot_x[s] = 0.0;
                let (i, local) = self.owner(s);
                let (edge_x_ref, et, seen_ref) = (&mut edge_x, &mut edge_touched, &mut seen);
                self.leaves_under(i, local, &mut |e| {
                    if !seen_ref[e] {
                        seen_ref[e] = true;
                        et.push(e);
                    }
                    edge_x_ref[e] += xs;
                });
            }
            touched.clear();
            edge_touched.sort_unstable();
            let mut axmax: f64 = 0.0;
            let mut ax: Vec<(usize, f64)> = Vec::with_capacity(edge_touched.len());
            for &e in &edge_touched {
                let val = if self.is_heavy[e] { 0.0 } else { edge_x[e] * self.coef[e] };
                edge_x[e] = 0.0;
                seen[e] = false;
                if val > 0.0 {
                    axmax = axmax.max(val);
                    ax.push((e, val));
                }
            }
            edge_touched.clear();
            if axmax == 0.0 {
                return Err(Error::Infeasible("a cut is crossed by fewer than k edges".into()));
            }
            let delta = if first { 1.0 } else { eps / axmax };
            if !first {
                for (t, &j) in active.iter().enumerate() {
                    g[t] = delta * x[j];
                }
                for a in ax.iter_mut() {
                    a.1 *= delta;
                }
            }
            let mass: f64 = g.iter().sum();
            for (t, &j) in active.iter().enumerate() {
                x[j] += g[t];
            }
            state.apply(&ax, mass, active.len(), delta)?;
            let changed: Vec<usize> = ax.iter().map(|a| a.0).collect();
            self.update_edges(&changed, &state.w);
            active.retain(|&j| self.normalized(self.sum_slots(aug.slots[j].iter().copied())) < thr);
        }
        state.focus_finished(iterations, nb)?;
        Ok(FocusReport { iterations, batch: nb })
    }

    fn owner(&self, slot: usize) -> (usize, usize) {
        let mut lo = 1;
        let mut hi = 2 * self.nx - 1;
        while lo < hi {
            let mid = (lo + hi + 1) / 2;
            if self.base(mid) <= slot {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        let mut i = lo;
        while self.xlen[i] == 0 || slot >= self.base(i) + 2 * self.xlen[i] as usize {
            i -= 1;
        }
        (i, slot - self.base(i))
    }
}

/// Explicitly materialized columns for a list of vertex sets, with the same
/// coefficient rules as [`CutOracle`]; the reference for equivalence tests.
pub struct ExplicitCutColumns {
    pub crossing: Vec<Vec<usize>>,
    pub coef: Vec<f64>,
    pub mode: ColumnMode,
}

impl ExplicitCutColumns {
    pub fn new(g: &Graph, mode: ColumnMode, sides: &[Vec<bool>]) -> ExplicitCutColumns {
        let crossing = sides
            .iter()
            .map(|s| (0..g.m()).filter(|&e| s[g.edge(e).u] != s[g.edge(e).v]).collect())
            .collect();
        ExplicitCutColumns { crossing, coef: mode.edge_coefficients(&g.costs()), mode }
    }
}

impl ColumnSource for ExplicitCutColumns {
    fn rows(&self) -> usize {
        self.coef.len()
    }
    fn columns(&self) -> usize {
        self.crossing.len()
    }
    fn column(&self, j: usize, w: &[f64], rho: f64) -> Column {
        let cr = &self.crossing[j];
        match self.mode {
            ColumnMode::Plain { .. } => Column { entries: cr.iter().map(|&e| (e, self.coef[e])).collect(), void: false },
            ColumnMode::Free { k } => {
                let heavy = cr.iter().filter(|&&e| w[e] * self.coef[e] >= rho).count();
                if heavy >= k {
                    return Column { entries: Vec::new(), void: true };
                }
                let share = 1.0 / (k - heavy) as f64;
                let entries = cr
                    .iter()
                    .filter(|&&e| w[e] * self.coef[e] < rho)
                    .map(|&e| (e, self.coef[e] * share))
                    .collect();
                Column { entries, void: false }
            }
        }
    }
}
