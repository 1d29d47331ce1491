//! Rooted spanning trees with heavy-first Euler positions.
//!
//! A tree edge is named by its lower endpoint, so tree edges are the vertices
//! `v != root`. The subtree `T_v` occupies the position interval `[tin[v], tout[v])`
//! and every heavy path is contiguous in that order.

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::graph::Graph;

pub const NONE: usize = usize::MAX;

/// At most three disjoint intervals: a tree-cut side or its complement.
pub type Intervals = SmallVec<[Interval; 3]>;

/// Half-open interval of Euler positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interval {
    pub lo: usize,
    pub hi: usize,
}

impl Interval {
    pub fn new(lo: usize, hi: usize) -> Interval {
        Interval { lo, hi }
    }
    pub fn is_empty(&self) -> bool {
        self.lo >= self.hi
    }
    pub fn contains(&self, p: usize) -> bool {
        self.lo <= p && p < self.hi
    }
}

/// One or two tree edges, stored with `a < b` when both are present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TreeCut {
    pub a: usize,
    pub b: usize,
}

impl TreeCut {
    pub fn single(e: usize) -> TreeCut {
        TreeCut { a: e, b: NONE }
    }
    pub fn pair(e: usize, f: usize) -> TreeCut {
        assert_ne!(e, f, "tree cut edges must be distinct");
        TreeCut { a: e.min(f), b: e.max(f) }
    }
    pub fn is_single(&self) -> bool {
        self.b == NONE
    }
    pub fn edges(&self) -> Vec<usize> {
        if self.is_single() {
            vec![self.a]
        } else {
            vec![self.a, self.b]
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpanningTree {
    pub n: usize,
    pub root: usize,
    pub parent: Vec<usize>,
    /// Graph edge id joining v to its parent.
    pub parent_edge: Vec<usize>,
    pub children: Vec<Vec<usize>>,
    pub depth: Vec<usize>,
    pub size: Vec<usize>,
    pub tin: Vec<usize>,
    pub tout: Vec<usize>,
    /// order[p] = vertex at Euler position p.
    pub order: Vec<usize>,
    /// Top vertex of v's heavy chain.
    pub head: Vec<usize>,
}

impl SpanningTree {
    /// Builds the tree spanned by `edge_ids` (n-1 edges of `g`), rooted at 0.
    pub fn from_edges(g: &Graph, edge_ids: &[usize]) -> Result<SpanningTree> {
        let n = g.n();
        if edge_ids.len() != n - 1 {
            return Err(Error::Invalid(format!("a spanning tree needs {} edges, got {}", n - 1, edge_ids.len())));
        }
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for &e in edge_ids {
            let ed = g.edge(e);
            adj[ed.u].push((ed.v, e));
            adj[ed.v].push((ed.u, e));
        }
        let root = 0;
        let mut parent = vec![NONE; n];
        let mut parent_edge = vec![NONE; n];
        let mut depth = vec![0; n];
        let mut bfs = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        seen[root] = true;
        bfs.push(root);
        let mut i = 0;
        while i < bfs.len() {
            let x = bfs[i];
            i += 1;
            for &(y, e) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = x;
                    parent_edge[y] = e;
                    depth[y] = depth[x] + 1;
                    bfs.push(y);
                }
            }
        }
        if bfs.len() != n {
            return Err(Error::Invalid("edge set does not span the graph".into()));
        }
        let mut size = vec![1; n];
        for &x in bfs.iter().rev() {
            if parent[x] != NONE {
                size[parent[x]] += size[x];
            }
        }
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &x in &bfs {
            if parent[x] != NONE {
                children[parent[x]].push(x);
            }
        }
        // heavy child first, remaining children by vertex id
        for c in children.iter_mut() {
            c.sort_by(|&a, &b| size[b].cmp(&size[a]).then(a.cmp(&b)));
        }
        let mut tin = vec![0; n];
        let mut tout = vec![0; n];
        let mut order = vec![0; n];
        let mut head = vec![0; n];
        let mut t = 0;
        let mut stack = vec![(root, 0usize)];
        head[root] = root;
        while let Some(top) = stack.last_mut() {
            let (x, next) = *top;
            if next == 0 {
                tin[x] = t;
                order[t] = x;
                t += 1;
            }
            if next < children[x].len() {
                top.1 += 1;
                let c = children[x][next];
                head[c] = if next == 0 { head[x] } else { c };
                stack.push((c, 0));
            } else {
                tout[x] = t;
                stack.pop();
            }
        }
        Ok(SpanningTree { n, root, parent, parent_edge, children, depth, size, tin, tout, order, head })
    }

    /// Tree edges, i.e. all non-root vertices, in Euler order.
    pub fn tree_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.order.iter().copied().filter(move |&v| v != self.root)
    }

    pub fn graph_edge_ids(&self) -> Vec<usize> {
        self.tree_edges().map(|v| self.parent_edge[v]).collect()
    }

    pub fn subtree(&self, v: usize) -> Interval {
        Interval::new(self.tin[v], self.tout[v])
    }

    /// u is an ancestor of v (or equal).
    pub fn is_ancestor(&self, u: usize, v: usize) -> bool {
        self.tin[u] <= self.tin[v] && self.tin[v] < self.tout[u]
    }

    pub fn related(&self, e: usize, f: usize) -> bool {
        self.is_ancestor(e, f) || self.is_ancestor(f, e)
    }

    pub fn ancestor_at_depth(&self, mut v: usize, d: usize) -> usize {
        debug_assert!(d <= self.depth[v]);
        while self.depth[self.head[v]] > d {
            v = self.parent[self.head[v]];
        }
        self.order[self.tin[v] - (self.depth[v] - d)]
    }

    pub fn lca(&self, mut u: usize, mut v: usize) -> usize {
        while self.head[u] != self.head[v] {
            if self.depth[self.head[u]] > self.depth[self.head[v]] {
                u = self.parent[self.head[u]];
            } else {
                v = self.parent[self.head[v]];
            }
        }
        if self.depth[u] < self.depth[v] {
            u
        } else {
            v
        }
    }

    pub fn valid_edge(&self, e: usize) -> bool {
        e < self.n && e != self.root
    }

    /// Euler intervals of one side of cut_T(s): T_e for a single edge, T_e ∪ T_f
    /// for unrelated edges, T_e \ T_f when f lies below e.
    pub fn cut_intervals(&self, s: TreeCut) -> Result<Intervals> {
        if !self.valid_edge(s.a) || (!s.is_single() && !self.valid_edge(s.b)) {
            return Err(Error::Invalid(format!("invalid tree cut {s:?}")));
        }
        if s.is_single() {
            return Ok(smallvec::smallvec![self.subtree(s.a)]);
        }
        let (e, f) = (s.a, s.b);
        let (ie, jf) = (self.subtree(e), self.subtree(f));
        let pair = if self.is_ancestor(e, f) {
            [Interval::new(ie.lo, jf.lo), Interval::new(jf.hi, ie.hi)]
        } else if self.is_ancestor(f, e) {
            [Interval::new(jf.lo, ie.lo), Interval::new(ie.hi, jf.hi)]
        } else if ie.lo < jf.lo {
            [ie, jf]
        } else {
            [jf, ie]
        };
        Ok(pair.into_iter().filter(|i| !i.is_empty()).collect())
    }

    /// Vertex membership of the side returned by [`cut_intervals`].
    pub fn cut_side(&self, s: TreeCut) -> Result<Vec<bool>> {
        let iv = self.cut_intervals(s)?;
        Ok((0..self.n).map(|v| iv.iter().any(|i| i.contains(self.tin[v]))).collect())
    }

    /// Heavy chains as vertical paths; each path lists its tree edges top-down.
    /// The chain of the root omits the root itself; every other chain starts
    /// with its head, whose parent edge links it to the chain above.
    pub fn heavy_paths(&self) -> Vec<Vec<usize>> {
        let mut paths = Vec::new();
        for &v in &self.order {
            if self.head[v] == v {
                let mut p = Vec::new();
                let mut x = v;
                loop {
                    if x != self.root {
                        p.push(x);
                    }
                    match self.children[x].first() {
                        Some(&c) if self.head[c] == self.head[v] => x = c,
                        _ => break,
                    }
                }
                if !p.is_empty() {
                    paths.push(p);
                }
            }
        }
        paths
    }

    /// Complement of a set of disjoint intervals within [0, n).
    pub fn complement(&self, iv: &[Interval]) -> Intervals {
        let mut sorted: SmallVec<[Interval; 4]> = iv.iter().copied().collect();
        sorted.sort_by_key(|i| i.lo);
        let mut out = Intervals::new();
        let mut at = 0;
        for i in sorted {
            if i.lo > at {
                out.push(Interval::new(at, i.lo));
            }
            at = at.max(i.hi);
        }
        if at < self.n {
            out.push(Interval::new(at, self.n));
        }
        out
    }
}
