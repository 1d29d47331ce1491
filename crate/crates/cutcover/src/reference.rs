//! Exact ground truth for small instances: cut and free-cut enumeration and
//! exact LP optima in rational arithmetic.
//!
//! The covering LPs are solved through their duals, max b^T z subject to
//! A^T z ≤ c, z ≥ 0, by a revised simplex over `BigRational` that starts from
//! the slack basis and generates columns (covering rows) on demand. The
//! simplex multipliers are the covering solution y. Bland's rule picks the
//! entering column by a fixed global key order and breaks ratio ties by key.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::graph::{cut_weight, enumerate_cuts, Graph, VertexCut};
use crate::tree::{SpanningTree, TreeCut};

pub const LP_MAX_N: usize = 16;
pub const KC_MAX_N: usize = 8;
pub const KC_MAX_K: usize = 3;
pub const TWO_RESPECTING_MAX_N: usize = 14;

/// Which family of covering rows to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpKind {
    /// Σ_{δ(S)} y ≥ k.
    CutCover,
    /// Σ_{δ(S)} y ≥ k and y ≤ 1.
    Box,
    /// Σ_{δ(S)\F} y ≥ k - |F| for F ⊆ δ(S), |F| < k.
    KnapsackCover,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub value: f64,
    pub exact: BigRational,
    pub y: Vec<f64>,
    pub pivots: usize,
    pub rows: usize,
}

/// Global column key; the derived order is Bland's order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Slack(usize),
    Upper(usize),
    Cut(u64, Vec<usize>),
}

#[derive(Debug, Clone)]
struct Col {
    key: Key,
    /// Sparse column of A^T (edge, coefficient).
    entries: Vec<(usize, i64)>,
    obj: BigRational,
}

fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

struct Simplex {
    m: usize,
    binv: Vec<Vec<BigRational>>,
    xb: Vec<BigRational>,
    basis: Vec<Col>,
    pivots: usize,
}

impl Simplex {
    fn new(costs: &[f64]) -> Simplex {
        let m = costs.len();
        let mut binv = vec![vec![BigRational::zero(); m]; m];
        for (i, row) in binv.iter_mut().enumerate() {
            row[i] = BigRational::one();
        }
        Simplex {
            m,
            binv,
            xb: costs.iter().map(|&c| rat(c)).collect(),
            basis: (0..m).map(|e| Col { key: Key::Slack(e), entries: vec![(e, 1)], obj: BigRational::zero() }).collect(),
            pivots: 0,
        }
    }

    /// π = c_B^T B^{-1}.
    fn multipliers(&self) -> Vec<BigRational> {
        let mut pi = vec![BigRational::zero(); self.m];
        for (i, col) in self.basis.iter().enumerate() {
            if col.obj.is_zero() {
                continue;
            }
            for (e, p) in pi.iter_mut().enumerate() {
                if !self.binv[i][e].is_zero() {
                    *p += &col.obj * &self.binv[i][e];
                }
            }
        }
        pi
    }

    /// Pivots `col` into the basis; false if the dual is unbounded.
    fn enter(&mut self, col: Col) -> bool {
        let d: Vec<BigRational> = (0..self.m)
            .map(|i| {
                let mut s = BigRational::zero();
                for &(e, a) in &col.entries {
                    if !self.binv[i][e].is_zero() {
                        s += &self.binv[i][e] * BigRational::from_integer(BigInt::from(a));
                    }
                }
                s
            })
            .collect();
        let mut leave: Option<(usize, BigRational)> = None;
        for i in 0..self.m {
            if d[i].is_positive() {
                let r = &self.xb[i] / &d[i];
                let better = match &leave {
                    None => true,
                    Some((j, best)) => r < *best || (r == *best && self.basis[i].key < self.basis[*j].key),
                };
                if better {
                    leave = Some((i, r));
                }
            }
        }
        let Some((r, _)) = leave else { return false };
        let piv = d[r].clone();
        for v in self.binv[r].iter_mut() {
            *v /= &piv;
        }
        self.xb[r] /= &piv;
        let prow = self.binv[r].clone();
        let px = self.xb[r].clone();
        for i in 0..self.m {
            if i == r || d[i].is_zero() {
                continue;
            }
            let f = &d[i];
            for (v, p) in self.binv[i].iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *v -= f * p;
                }
            }
            self.xb[i] -= f * &px;
        }
        self.basis[r] = col;
        self.pivots += 1;
        true
    }
}

/// A^T rows of the requested family in Bland order, with f64 prefiltering.
struct RowSource<'g> {
    g: &'g Graph,
    k: usize,
    kind: LpKind,
    cuts: Vec<(u64, Vec<usize>)>,
}

impl<'g> RowSource<'g> {
    fn new(g: &'g Graph, k: usize, kind: LpKind) -> Result<RowSource<'g>> {
        let mut cuts = Vec::new();
        enumerate_cuts(g, &vec![0.0; g.m()], |bits, _| cuts.push(bits))?;
        cuts.sort_unstable();
        let cuts = cuts
            .into_iter()
            .map(|b| {
                let s = VertexCut::from_bits(g.n(), b).expect("proper cut");
                (b, s.crossing(g))
            })
            .collect();
        Ok(RowSource { g, k, kind, cuts })
    }

    /// First violated row (by key) with y ≥ 0 exact, or None.
    fn first_violated(&self, y: &[BigRational]) -> Option<Col> {
        let yf: Vec<f64> = y.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect();
        let k = self.k as i64;
        let exact_sum = |edges: &[usize]| -> BigRational { edges.iter().fold(BigRational::zero(), |a, &e| a + &y[e]) };
        if self.kind == LpKind::Box {
            for e in 0..self.g.m() {
                if y[e] > BigRational::one() {
                    return Some(Col { key: Key::Upper(e), entries: vec![(e, -1)], obj: -BigRational::one() });
                }
            }
        }
        for (bits, cross) in &self.cuts {
            let total: f64 = cross.iter().map(|&e| yf[e]).sum();
            match self.kind {
                LpKind::CutCover | LpKind::Box => {
                    if total < k as f64 + 1e-7 && exact_sum(cross) < BigRational::from_integer(k.into()) {
                        return Some(Col {
                            key: Key::Cut(*bits, Vec::new()),
                            entries: cross.iter().map(|&e| (e, 1)).collect(),
                            obj: BigRational::from_integer(k.into()),
                        });
                    }
                }
                LpKind::KnapsackCover => {
                    // every F with |F| < k in lexicographic order
                    let mut found = None;
                    for_each_subset(cross, self.k - 1, &mut |f: &[usize]| {
                        if found.is_some() {
                            return;
                        }
                        let rest: Vec<usize> = cross.iter().copied().filter(|e| !f.contains(e)).collect();
                        let need = k - f.len() as i64;
                        let approx: f64 = rest.iter().map(|&e| yf[e]).sum();
                        if approx < need as f64 + 1e-7 && exact_sum(&rest) < BigRational::from_integer(need.into()) {
                            found = Some(Col {
                                key: Key::Cut(*bits, f.to_vec()),
                                entries: rest.iter().map(|&e| (e, 1)).collect(),
                                obj: BigRational::from_integer(need.into()),
                            });
                        }
                    });
                    if found.is_some() {
                        return found;
                    }
                }
            }
        }
        None
    }
}

/// Calls `f` on every subset of `items` of size ≤ `max`, in lexicographic order of index lists.
fn for_each_subset(items: &[usize], max: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(items: &[usize], start: usize, max: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        f(cur);
        if cur.len() == max {
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            rec(items, i + 1, max, cur, f);
            cur.pop();
        }
    }
    rec(items, 0, max, &mut Vec::new(), f);
}

fn solve(g: &Graph, k: usize, kind: LpKind) -> Result<LpSolution> {
    let src = RowSource::new(g, k, kind)?;
    let costs = g.costs();
    let mut sx = Simplex::new(&costs);
    let mut rows = 0;
    loop {
        let pi = sx.multipliers();
        // slack columns first: reduced cost -π_e
        let entering = match (0..g.m()).find(|&e| pi[e].is_negative()) {
            Some(e) => Some(Col { key: Key::Slack(e), entries: vec![(e, 1)], obj: BigRational::zero() }),
            None => src.first_violated(&pi),
        };
        let Some(col) = entering else {
            let exact = pi.iter().zip(&costs).fold(BigRational::zero(), |a, (y, &c)| a + y * rat(c));
            return Ok(LpSolution {
                value: exact.to_f64().unwrap_or(f64::NAN),
                exact,
                y: pi.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect(),
                pivots: sx.pivots,
                rows,
            });
        };
        if matches!(col.key, Key::Cut(..) | Key::Upper(_)) {
            rows += 1;
        }
        if !sx.enter(col) {
            return Err(Error::Infeasible("covering LP has no feasible point".into()));
        }
    }
}

fn check_size(g: &Graph, max: usize) -> Result<()> {
    if g.n() > max {
        return Err(Error::TooLarge { n: g.n(), max });
    }
    Ok(())
}

/// CC(G, c, k): min c^T y subject to Σ_{δ(S)} y ≥ k, y ≥ 0.
pub fn exact_cut_cover_lp(g: &Graph, k: usize) -> Result<LpSolution> {
    check_size(g, LP_MAX_N)?;
    solve(g, k, LpKind::CutCover)
}

/// The k-ECSS LP with box constraints 0 ≤ y ≤ 1.
pub fn exact_kecss_lp(g: &Graph, k: usize) -> Result<LpSolution> {
    check_size(g, LP_MAX_N)?;
    solve(g, k, LpKind::Box)
}

/// The k-ECSS LP with knapsack-cover rows and no upper bounds.
pub fn exact_kc_lp(g: &Graph, k: usize) -> Result<LpSolution> {
    check_size(g, KC_MAX_N)?;
    if k > KC_MAX_K {
        return Err(Error::Invalid(format!("k = {k} exceeds {KC_MAX_K} for the explicit KC LP")));
    }
    solve(g, k, LpKind::KnapsackCover)
}

/// Minimum normalized free cut by enumerating every (S, F).
pub fn min_normalized_free_cut_bruteforce(g: &Graph, v: &[f64], k: usize) -> Result<(VertexCut, Vec<usize>, f64)> {
    check_size(g, KC_MAX_N)?;
    if k > KC_MAX_K || k == 0 {
        return Err(Error::Invalid(format!("k = {k} outside 1..={KC_MAX_K}")));
    }
    let mut best: Option<(u64, Vec<usize>, f64)> = None;
    let mut cuts = Vec::new();
    enumerate_cuts(g, v, |bits, _| cuts.push(bits))?;
    for bits in cuts {
        let cross = VertexCut::from_bits(g.n(), bits)?.crossing(g);
        for_each_subset(&cross, k - 1, &mut |f: &[usize]| {
            let light: f64 = cross.iter().filter(|e| !f.contains(e)).map(|&e| v[e]).sum();
            let val = light / (k - f.len()) as f64;
            if best.as_ref().map_or(true, |b| val < b.2) {
                best = Some((bits, f.to_vec(), val));
            }
        });
    }
    let (bits, f, val) = best.expect("at least one cut");
    Ok((VertexCut::from_bits(g.n(), bits)?, f, val))
}

/// All 1- and 2-respecting cuts of `t` with value below `threshold`, by direct scan.
pub fn all_2respecting_cuts_bruteforce(g: &Graph, t: &SpanningTree, v: &[f64], threshold: f64) -> Result<Vec<(TreeCut, f64)>> {
    check_size(g, TWO_RESPECTING_MAX_N)?;
    let edges: Vec<usize> = t.tree_edges().collect();
    let mut all: Vec<TreeCut> = edges.iter().map(|&e| TreeCut::single(e)).collect();
    for (i, &e) in edges.iter().enumerate() {
        for &f in &edges[i + 1..] {
            all.push(TreeCut::pair(e, f));
        }
    }
    let mut out = Vec::new();
    for s in all {
        let side = VertexCut::from_mask(t.cut_side(s)?)?;
        let val = cut_weight(g, v, &side);
        if val < threshold {
            out.push((s, val));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}
