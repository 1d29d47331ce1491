//! Undirected multigraphs with positive costs and brute-force cut primitives.

use crate::error::{Error, Result};

/// Largest vertex count accepted by the exhaustive cut enumerations.
pub const BRUTE_FORCE_MAX_N: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub cost: f64,
}

impl Edge {
    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a validated graph. Parallel edges are kept distinct.
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Graph> {
        if n < 2 {
            return Err(Error::Invalid(format!("need at least 2 vertices, got {n}")));
        }
        let mut adj = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            if e.u >= n || e.v >= n {
                return Err(Error::Invalid(format!("edge {i} has an endpoint outside 0..{n}")));
            }
            if e.u == e.v {
                return Err(Error::Invalid(format!("edge {i} is a self-loop")));
            }
            if !(e.cost > 0.0) || !e.cost.is_finite() {
                return Err(Error::Invalid(format!("edge {i} has nonpositive cost {}", e.cost)));
            }
            adj[e.u].push(i);
            adj[e.v].push(i);
        }
        let g = Graph { n, edges, adj };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    pub fn from_triples(n: usize, triples: &[(usize, usize, f64)]) -> Result<Graph> {
        let edges = triples.iter().map(|&(u, v, cost)| Edge { u, v, cost }).collect();
        Graph::new(n, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn incident(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn costs(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.cost).collect()
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for &e in &self.adj[x] {
                let y = self.edges[e].other(x);
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        count == self.n
    }

    /// Same graph with every cost replaced.
    pub fn with_costs(&self, costs: &[f64]) -> Result<Graph> {
        assert_eq!(costs.len(), self.m());
        let edges = self
            .edges
            .iter()
            .zip(costs)
            .map(|(e, &cost)| Edge { cost, ..*e })
            .collect();
        Graph::new(self.n, edges)
    }
}

/// A nonempty proper vertex subset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexCut {
    inside: Vec<bool>,
}

impl VertexCut {
    pub fn new(n: usize, members: &[usize]) -> Result<VertexCut> {
        let mut inside = vec![false; n];
        for &v in members {
            if v >= n {
                return Err(Error::Invalid(format!("vertex {v} out of range")));
            }
            inside[v] = true;
        }
        VertexCut::from_mask(inside)
    }

    pub fn from_mask(inside: Vec<bool>) -> Result<VertexCut> {
        let k = inside.iter().filter(|&&b| b).count();
        if k == 0 || k == inside.len() {
            return Err(Error::Invalid("cut side must be nonempty and proper".into()));
        }
        Ok(VertexCut { inside })
    }

    /// Bit i of `bits` set means vertex i is inside.
    pub fn from_bits(n: usize, bits: u64) -> Result<VertexCut> {
        VertexCut::from_mask((0..n).map(|i| bits >> i & 1 == 1).collect())
    }

    pub fn contains(&self, v: usize) -> bool {
        self.inside[v]
    }

    pub fn mask(&self) -> &[bool] {
        &self.inside
    }

    pub fn members(&self) -> Vec<usize> {
        (0..self.inside.len()).filter(|&v| self.inside[v]).collect()
    }

    pub fn complement(&self) -> VertexCut {
        VertexCut { inside: self.inside.iter().map(|b| !b).collect() }
    }

    pub fn crossing(&self, g: &Graph) -> Vec<usize> {
        (0..g.m())
            .filter(|&e| {
                let ed = g.edge(e);
                self.inside[ed.u] != self.inside[ed.v]
            })
            .collect()
    }
}

pub fn parse_error(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Parses the `p ghct n m` / `e u v cost` edge-list format (1-based ids, `c` comments).
pub fn load_graph(text: &str) -> Result<Graph> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("p") => {
                if header.is_some() {
                    return Err(parse_error(lineno, "duplicate header"));
                }
                if tok.next() != Some("ghct") {
                    return Err(parse_error(lineno, "expected `p ghct <n> <m>`"));
                }
                let n = parse_num::<usize>(tok.next(), lineno, "vertex count")?;
                let m = parse_num::<usize>(tok.next(), lineno, "edge count")?;
                if tok.next().is_some() {
                    return Err(parse_error(lineno, "trailing tokens in header"));
                }
                header = Some((n, m));
            }
            Some("e") => {
                let (n, _) = header.ok_or_else(|| parse_error(lineno, "edge before header"))?;
                let u = parse_num::<usize>(tok.next(), lineno, "endpoint")?;
                let v = parse_num::<usize>(tok.next(), lineno, "endpoint")?;
                let cost = parse_num::<f64>(tok.next(), lineno, "cost")?;
                if tok.next().is_some() {
                    return Err(parse_error(lineno, "trailing tokens in edge line"));
                }
                if u == 0 || v == 0 || u > n || v > n {
                    return Err(parse_error(lineno, format!("vertex id out of range 1..{n}")));
                }
                edges.push(Edge { u: u - 1, v: v - 1, cost });
            }
            Some(other) => return Err(parse_error(lineno, format!("unknown line type `{other}`"))),
            None => continue,
        }
    }
    let (n, m) = header.ok_or_else(|| parse_error(0, "missing `p ghct` header"))?;
    if edges.len() != m {
        return Err(Error::Invalid(format!("header announces {m} edges, found {}", edges.len())));
    }
    Graph::new(n, edges)
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let t = tok.ok_or_else(|| parse_error(line, format!("missing {what}")))?;
    t.parse().map_err(|_| parse_error(line, format!("bad {what} `{t}`")))
}

pub const TSPLIB_MAX_N: usize = 2000;

/// Reads a TSPLIB `EUC_2D` instance into the complete graph on its cities.
pub fn load_tsplib(text: &str) -> Result<Graph> {
    let mut dim: Option<usize> = None;
    let mut points = Vec::new();
    let mut in_coords = false;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line == "EOF" {
            break;
        }
        if in_coords {
            let tok: Vec<&str> = line.split_whitespace().collect();
            if tok.len() != 3 {
                return Err(parse_error(lineno, "expected `<id> <x> <y>`"));
            }
            let x = parse_num::<f64>(Some(tok[1]), lineno, "x coordinate")?;
            let y = parse_num::<f64>(Some(tok[2]), lineno, "y coordinate")?;
            points.push((x, y));
            continue;
        }
        if line.starts_with("NODE_COORD_SECTION") {
            in_coords = true;
            continue;
        }
        let (key, value) = match line.split_once(':') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => (line, ""),
        };
        match key {
            "DIMENSION" => dim = Some(parse_num(Some(value), lineno, "dimension")?),
            "EDGE_WEIGHT_TYPE" if value != "EUC_2D" => {
                return Err(parse_error(lineno, format!("unsupported edge weight type `{value}`")))
            }
            _ => {}
        }
    }
    let n = dim.ok_or_else(|| parse_error(0, "missing DIMENSION"))?;
    if points.len() != n {
        return Err(Error::Invalid(format!("DIMENSION {n} but {} coordinates", points.len())));
    }
    if n > TSPLIB_MAX_N {
        return Err(Error::TooLarge { n, max: TSPLIB_MAX_N });
    }
    if n < 2 {
        return Err(Error::Invalid(format!("need at least 2 cities, got {n}")));
    }
    Ok(crate::generate::euclidean_complete(&points))
}

pub fn write_graph(g: &Graph) -> String {
    let mut s = format!("p ghct {} {}\n", g.n(), g.m());
    for e in g.edges() {
        s.push_str(&format!("e {} {} {}\n", e.u + 1, e.v + 1, e.cost));
    }
    s
}

/// Σ_{e∈δ(S)} w_e by direct scan.
pub fn cut_weight(g: &Graph, w: &[f64], s: &VertexCut) -> f64 {
    g.edges()
        .iter()
        .zip(w)
        .filter(|(e, _)| s.contains(e.u) != s.contains(e.v))
        .map(|(_, &x)| x)
        .sum()
}

fn set_cut(g: &Graph, w: &[f64], inside: &[bool]) -> f64 {
    let all = inside.iter().all(|&b| b);
    let none = inside.iter().all(|&b| !b);
    if all || none {
        return 0.0;
    }
    g.edges()
        .iter()
        .zip(w)
        .filter(|(e, _)| inside[e.u] != inside[e.v])
        .map(|(_, &x)| x)
        .sum()
}

/// Gray-code enumeration of all cuts with vertex 0 inside; calls `visit(bits, value)`.
/// Values are maintained incrementally, so they carry O(2^n ε_mach) drift.
pub fn enumerate_cuts(g: &Graph, w: &[f64], mut visit: impl FnMut(u64, f64)) -> Result<()> {
    let n = g.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::TooLarge { n, max: BRUTE_FORCE_MAX_N });
    }
    let nbrs: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|v| g.incident(v).iter().map(|&e| (g.edge(e).other(v), w[e])).collect())
        .collect();
    // bit 0 is always set; the free bits are vertices 1..n-1
    let full: u64 = (1u64 << n) - 1;
    let mut bits: u64 = 1;
    let mut value: f64 = nbrs[0].iter().map(|&(_, x)| x).sum();
    let total = 1u64 << (n - 1);
    for step in 0..total {
        if step > 0 {
            let flip = step.trailing_zeros() as usize + 1;
            let entering = bits >> flip & 1 == 0;
            let mut delta = 0.0;
            for &(y, x) in &nbrs[flip] {
                if bits >> y & 1 == 1 {
                    delta -= x;
                } else {
                    delta += x;
                }
            }
            if entering {
                value += delta;
            } else {
                value -= delta;
            }
            bits ^= 1 << flip;
        }
        if bits != full {
            visit(bits, value);
        }
    }
    Ok(())
}

/// Minimum cut by enumerating every subset containing vertex 0. The returned
/// value is recomputed by direct scan for the winning cut.
pub fn exact_min_cut_bruteforce(g: &Graph, w: &[f64]) -> Result<(VertexCut, f64)> {
    let mut best = (0u64, f64::INFINITY);
    enumerate_cuts(g, w, |bits, val| {
        if val < best.1 {
            best = (bits, val);
        }
    })?;
    let cut = VertexCut::from_bits(g.n(), best.0)?;
    let value = cut_weight(g, w, &cut);
    Ok((cut, value))
}

pub const STOER_WAGNER_MAX_N: usize = 4000;

/// Exact global min cut by Stoer-Wagner on a dense matrix, O(n³).
pub fn stoer_wagner(g: &Graph, w: &[f64]) -> Result<(VertexCut, f64)> {
    let n = g.n();
    if n > STOER_WAGNER_MAX_N {
        return Err(Error::TooLarge { n, max: STOER_WAGNER_MAX_N });
    }
    let mut a = vec![0.0f64; n * n];
    for (e, x) in g.edges().iter().zip(w) {
        a[e.u * n + e.v] += x;
        a[e.v * n + e.u] += x;
    }
    // members[v]: original vertices merged into v
    let mut members: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    let mut alive: Vec<usize> = (0..n).collect();
    let mut best = (f64::INFINITY, Vec::new());
    let mut conn = vec![0.0f64; n];
    let mut added = vec![false; n];
    while alive.len() > 1 {
        for &v in &alive {
            conn[v] = 0.0;
            added[v] = false;
        }
        let (mut prev, mut last) = (usize::MAX, usize::MAX);
        for _ in 0..alive.len() {
            let mut pick = usize::MAX;
            for &v in &alive {
                if !added[v] && (pick == usize::MAX || conn[v] > conn[pick]) {
                    pick = v;
                }
            }
            added[pick] = true;
            prev = last;
            last = pick;
            for &v in &alive {
                if !added[v] {
                    conn[v] += a[pick * n + v];
                }
            }
        }
        if conn[last] < best.0 {
            best = (conn[last], members[last].clone());
        }
        let moved = std::mem::take(&mut members[last]);
        members[prev].extend(moved);
        for &v in &alive {
            a[prev * n + v] += a[last * n + v];
            a[v * n + prev] = a[prev * n + v];
        }
        a[prev * n + prev] = 0.0;
        alive.retain(|&v| v != last);
    }
    Ok((VertexCut::new(n, &best.1)?, best.0))
}

/// Checks submodularity and posimodularity of the cut function at (X, Y).
pub fn check_sub_posi_modularity(g: &Graph, w: &[f64], x: &VertexCut, y: &VertexCut) -> bool {
    let n = g.n();
    let f = |m: &[bool]| set_cut(g, w, m);
    let xs = x.mask();
    let ys = y.mask();
    let and: Vec<bool> = (0..n).map(|i| xs[i] && ys[i]).collect();
    let or: Vec<bool> = (0..n).map(|i| xs[i] || ys[i]).collect();
    let xmy: Vec<bool> = (0..n).map(|i| xs[i] && !ys[i]).collect();
    let ymx: Vec<bool> = (0..n).map(|i| ys[i] && !xs[i]).collect();
    let lhs = f(xs) + f(ys);
    let tol = 1e-9 * (1.0 + lhs.abs());
    lhs + tol >= f(&and) + f(&or) && lhs + tol >= f(&xmy) + f(&ymx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k3() -> Graph {
        load_graph("p ghct 3 3\ne 1 2 1\ne 2 3 1\ne 1 3 1\n").unwrap()
    }

    #[test]
    fn parses_triangle() {
        let g = k3();
        assert_eq!((g.n(), g.m()), (3, 3));
        assert_eq!(g.edge(1).u, 1);
        let one = load_graph("c single\np ghct 2 1\ne 1 2 5\n").unwrap();
        assert_eq!(one.edge(0).cost, 5.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(load_graph("p ghct 3 1\ne 1 2 1\n").unwrap_err(), Error::Disconnected);
        assert!(matches!(load_graph("p ghct 2 1\ne 1 1 1\n"), Err(Error::Invalid(_))));
        assert!(matches!(load_graph("p ghct 2 1\ne 1 2 0\n"), Err(Error::Invalid(_))));
        assert!(matches!(load_graph("p ghct 2 1\ne 1 x 1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(load_graph("e 1 2 1\n"), Err(Error::Parse { .. })));
        assert!(matches!(load_graph("p ghct 2 1\ne 1 3 1\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn tsplib_square() {
        let text = "NAME : sq\nTYPE : TSP\nDIMENSION : 4\nEDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 3 0\n3 3 4\n4 0 4\nEOF\n";
        let g = load_tsplib(text).unwrap();
        assert_eq!((g.n(), g.m()), (4, 6));
        let mut c = g.costs();
        c.sort_by(f64::total_cmp);
        assert_eq!(c, vec![3.0, 3.0, 4.0, 4.0, 5.0, 5.0]);
        assert!(load_tsplib("DIMENSION : 2\nEDGE_WEIGHT_TYPE : GEO\n").is_err());
        assert!(load_tsplib("DIMENSION : 3\nNODE_COORD_SECTION\n1 0 0\n2 1 1\n").is_err());
    }

    #[test]
    fn roundtrip_text() {
        let g = k3();
        let h = load_graph(&write_graph(&g)).unwrap();
        assert_eq!(g.edges(), h.edges());
    }

    #[test]
    fn cut_weights() {
        let g = k3();
        let s = VertexCut::new(3, &[0]).unwrap();
        assert_eq!(cut_weight(&g, &[1.0; 3], &s), 2.0);
        assert_eq!(cut_weight(&g, &[0.0; 3], &s), 0.0);
        assert_eq!(cut_weight(&g, &[1.0; 3], &s.complement()), 2.0);
        assert!(VertexCut::new(3, &[]).is_err());
        assert!(VertexCut::new(3, &[0, 1, 2]).is_err());
    }

    #[test]
    fn brute_force_min_cuts() {
        let g = k3();
        assert_eq!(exact_min_cut_bruteforce(&g, &[1.0; 3]).unwrap().1, 2.0);
        let c4 = Graph::from_triples(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap();
        assert_eq!(exact_min_cut_bruteforce(&c4, &[1.0; 4]).unwrap().1, 2.0);
        let one = Graph::from_triples(2, &[(0, 1, 5.0)]).unwrap();
        assert_eq!(exact_min_cut_bruteforce(&one, &one.costs()).unwrap().1, 5.0);
    }

    #[test]
    fn enumeration_visits_every_cut_once() {
        let g = Graph::from_triples(5, &[(0, 1, 1.0), (1, 2, 2.0), (2, 3, 3.0), (3, 4, 4.0), (4, 0, 5.0), (0, 2, 0.5)]).unwrap();
        let w = g.costs();
        let mut seen = std::collections::BTreeSet::new();
        enumerate_cuts(&g, &w, |bits, val| {
            assert!(seen.insert(bits));
            let direct = cut_weight(&g, &w, &VertexCut::from_bits(5, bits).unwrap());
            assert!((direct - val).abs() < 1e-12);
        })
        .unwrap();
        assert_eq!(seen.len(), 15);
    }

    #[test]
    fn modularity_examples() {
        let g = k3();
        let x = VertexCut::new(3, &[0]).unwrap();
        let y = VertexCut::new(3, &[1]).unwrap();
        assert!(check_sub_posi_modularity(&g, &[1.0; 3], &x, &y));
        assert!(check_sub_posi_modularity(&g, &[1.0; 3], &x, &x));
    }

    #[test]
    fn stoer_wagner_matches_bruteforce() {
        for seed in 0..30 {
            let g = crate::generate::random_connected(9, 20, 1, 10, seed);
            let w = g.costs();
            let (s, v) = stoer_wagner(&g, &w).unwrap();
            let (_, b) = exact_min_cut_bruteforce(&g, &w).unwrap();
            assert!((v - b).abs() < 1e-9, "{seed}: {v} vs {b}");
            assert!((cut_weight(&g, &w, &s) - v).abs() < 1e-9);
        }
    }
}
