//! Small 2-respecting cuts of path minors, and the recursive path Focus.
//!
//! A minor is an ordered list of tree edges with a root position between two
//! of them. Rows are the edges left of the root and columns the edges right
//! of it, both counted outward from the root. Entry (i, j) is the tree cut
//! {row i, col j}. By submodularity the column argmins (ties toward the larger
//! row) are nondecreasing, so they come out of a divide and conquer scan.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mwu::DualState;
use crate::oracle::CutOracle;
use crate::tree::TreeCut;

/// Query budget per extraction: C_W (rows+cols) log₂(rows+cols) + C_Q.
pub const C_W: f64 = 4.0;
pub const C_Q: f64 = 16.0;

/// Paths this short are solved by trying every pair.
pub const BASE_LEN: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathMinor {
    pub edges: Vec<usize>,
    /// The root sits between `edges[root-1]` and `edges[root]`.
    pub root: usize,
}

impl PathMinor {
    pub fn new(edges: Vec<usize>, root: usize) -> Result<PathMinor> {
        if root == 0 || root >= edges.len() {
            return Err(Error::Invalid(format!(
                "degenerate path minor: root {root} with {} edges",
                edges.len()
            )));
        }
        Ok(PathMinor { edges, root })
    }

    pub fn rows(&self) -> usize {
        self.root
    }

    pub fn cols(&self) -> usize {
        self.edges.len() - self.root
    }

    pub fn row(&self, i: usize) -> usize {
        self.edges[self.root - 1 - i]
    }

    pub fn col(&self, j: usize) -> usize {
        self.edges[self.root + j]
    }

    pub fn cut(&self, i: usize, j: usize) -> TreeCut {
        TreeCut::pair(self.row(i), self.col(j))
    }

    /// Every 2-edge subset of the minor.
    pub fn all_pairs(&self) -> Vec<TreeCut> {
        let e = &self.edges;
        let mut out = Vec::new();
        for a in 0..e.len() {
            for b in a + 1..e.len() {
                out.push(TreeCut::pair(e[a], e[b]));
            }
        }
        out
    }
}

/// Per column, the row of the minimum entry and its value.
#[derive(Debug, Clone)]
pub struct ColumnMinima {
    pub rows: Vec<usize>,
    pub values: Vec<f64>,
    pub queries: u64,
}

pub fn column_minima(p: &PathMinor, o: &CutOracle) -> ColumnMinima {
    let c = p.cols();
    let mut cm = ColumnMinima { rows: vec![0; c], values: vec![0.0; c], queries: 0 };
    let mut stack = vec![(0usize, c, 0usize, p.rows() - 1)];
    while let Some((jlo, jhi, ilo, ihi)) = stack.pop() {
        if jlo >= jhi {
            continue;
        }
        let mid = (jlo + jhi) / 2;
        let mut best = (ilo, f64::INFINITY);
        for i in ilo..=ihi {
            let v = o.cut_value(p.cut(i, mid));
            cm.queries += 1;
            if v <= best.1 {
                best = (i, v);
            }
        }
        cm.rows[mid] = best.0;
        cm.values[mid] = best.1;
        stack.push((jlo, mid, ilo, best.0));
        stack.push((mid + 1, jhi, best.0, ihi));
    }
    debug_assert!(cm.rows.windows(2).all(|w| w[0] <= w[1]));
    cm
}

#[derive(Debug, Clone, Default)]
pub struct Extraction {
    pub cuts: Vec<TreeCut>,
    pub candidates: usize,
    pub queries: u64,
}

pub fn query_budget(rows: usize, cols: usize) -> f64 {
    let s = (rows + cols) as f64;
    C_W * s * s.log2() + C_Q
}

/// Small r-cuts of the minor taken from the staircase around the column minima.
/// Complete when the minor has no small cut with both edges on one side of
/// the root; sound in any case.
pub fn extract_cuts_in_path(p: &PathMinor, o: &CutOracle) -> Result<Extraction> {
    let cm = column_minima(p, o);
    let mut queries = cm.queries;
    let small: Vec<usize> = (0..p.cols())
        .filter(|&j| {
            queries += 1;
            o.is_small(p.cut(cm.rows[j], j))
        })
        .collect();
    let last = p.rows() - 1;
    let mut cand = Vec::new();
    for (t, &j) in small.iter().enumerate() {
        let before = if t == 0 { 0 } else { cm.rows[small[t - 1]] };
        let after = if t + 1 == small.len() { last } else { cm.rows[small[t + 1]] };
        let lo = before.min(after).min(cm.rows[j]);
        let hi = before.max(after).max(cm.rows[j]);
        cand.extend((lo..=hi).map(|i| (i, j)));
    }
    let limit = 4 * (p.edges.len() + 2);
    if cand.len() > limit {
        return Err(Error::Invariant(format!("{} candidates exceed {limit}", cand.len())));
    }
    let mut cuts = Vec::new();
    for &(i, j) in &cand {
        queries += 1;
        let s = p.cut(i, j);
        if o.is_small(s) {
            cuts.push(s);
        }
    }
    let budget = query_budget(p.rows(), p.cols());
    if queries as f64 > budget {
        return Err(Error::Invariant(format!("extraction used {queries} queries, budget {budget:.0}")));
    }
    Ok(Extraction { cuts, candidates: cand.len(), queries })
}

/// Minimum entry of the minor (its minimum r-cut).
pub fn minor_minimum(p: &PathMinor, o: &CutOracle) -> (TreeCut, f64) {
    let cm = column_minima(p, o);
    let mut best = (p.cut(cm.rows[0], 0), cm.values[0]);
    for j in 1..p.cols() {
        if cm.values[j] < best.1 {
            best = (p.cut(cm.rows[j], j), cm.values[j]);
        }
    }
    best
}

/// Node of the halving recursion over a path's edge indices `a..=b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Node {
    Base { a: usize, b: usize },
    /// Root between edges `mid` and `mid+1`.
    Split { a: usize, mid: usize, b: usize },
}

/// Recursion nodes grouped by depth from the top.
pub fn recursion_levels(len: usize) -> Vec<Vec<Node>> {
    let mut levels: Vec<Vec<Node>> = Vec::new();
    if len == 0 {
        return levels;
    }
    let mut frontier = vec![(0usize, len - 1)];
    while !frontier.is_empty() {
        let mut level = Vec::new();
        let mut next = Vec::new();
        for (a, b) in frontier {
            if b - a + 1 <= BASE_LEN {
                level.push(Node::Base { a, b });
            } else {
                let mid = (a + b) / 2;
                level.push(Node::Split { a, mid, b });
                next.push((a, mid));
                next.push((mid + 1, b));
            }
        }
        levels.push(level);
        frontier = next;
    }
    levels
}

fn node_cuts(path: &[usize], node: Node, o: &CutOracle) -> Result<Vec<TreeCut>> {
    match node {
        Node::Base { a, b } => {
            let mut out = Vec::new();
            for i in a..=b {
                for j in i + 1..=b {
                    let s = TreeCut::pair(path[i], path[j]);
                    if o.is_small(s) {
                        out.push(s);
                    }
                }
            }
            Ok(out)
        }
        Node::Split { a, mid, b } => {
            let p = PathMinor::new(path[a..=b].to_vec(), mid - a + 1)?;
            Ok(extract_cuts_in_path(&p, o)?.cuts)
        }
    }
}

/// Clears every 2-respecting cut inside each path, one Focus per recursion level.
/// Requires the one-edge cuts of the tree to be clear already.
pub fn focus_multiple_paths(paths: &[Vec<usize>], o: &mut CutOracle, state: &mut DualState) -> Result<()> {
    let per_path: Vec<Vec<Vec<Node>>> = paths.iter().map(|p| recursion_levels(p.len())).collect();
    let depth = per_path.iter().map(|l| l.len()).max().unwrap_or(0);
    for d in (0..depth).rev() {
        let work: Vec<(usize, Node)> = per_path
            .iter()
            .enumerate()
            .filter_map(|(pi, l)| l.get(d).map(|nodes| (pi, nodes)))
            .flat_map(|(pi, nodes)| nodes.iter().map(move |&n| (pi, n)))
            .collect();
        let oracle: &CutOracle = o;
        let found = work
            .par_iter()
            .map(|&(pi, n)| node_cuts(&paths[pi], n, oracle))
            .collect::<Result<Vec<_>>>()?;
        let batch: Vec<TreeCut> = found.into_iter().flatten().collect();
        o.fast_focus(&batch, state)?;
        if state.done() {
            break;
        }
    }
    Ok(())
}

pub fn focus_path(path: &[usize], o: &mut CutOracle, state: &mut DualState) -> Result<()> {
    focus_multiple_paths(&[path.to_vec()], o, state)
}
