//! Browser demo bindings. Every function returns a JSON string.

use cutcover::generate;
use cutcover::graph::{load_graph, stoer_wagner, Graph};
use cutcover::{held_karp, solve_kecss, CoverSolution, SolveOptions};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn summary(g: &Graph, s: &CoverSolution) -> Value {
    let edges: Vec<Value> = g
        .edges()
        .iter()
        .zip(&s.y)
        .filter(|(_, &y)| y > 1e-12)
        .map(|(e, &y)| json!([e.u, e.v, y]))
        .collect();
    json!({
        "bound": s.bound,
        "lower_bound": s.lower_bound,
        "epochs": s.stats.epochs,
        "iterations": s.stats.iterations,
        "edges": edges,
    })
}

/// Held-Karp bound of `n` random points in a 1000 x 1000 square.
#[wasm_bindgen]
pub fn held_karp_points(n: u32, eps: f64, seed: u32) -> Result<String, JsValue> {
    if !(3..=60).contains(&n) {
        return Err(err("n must lie in 3..=60"));
    }
    let pts = generate::random_points(n as usize, seed as u64);
    let g = generate::euclidean_complete(&pts);
    let opts = SolveOptions { seed: seed as u64, ..SolveOptions::default() };
    let s = held_karp(&g, eps, opts).map_err(err)?;
    let mut out = summary(&g, &s);
    out["points"] = json!(pts);
    Ok(out.to_string())
}

/// k-ECSS LP on a graph in the `p ghct` edge-list format.
#[wasm_bindgen]
pub fn kecss(text: &str, k: u32, eps: f64, seed: u32) -> Result<String, JsValue> {
    let g = load_graph(text).map_err(err)?;
    let opts = SolveOptions { seed: seed as u64, ..SolveOptions::default() };
    let s = solve_kecss(&g, k as usize, eps, opts).map_err(err)?;
    Ok(summary(&g, &s).to_string())
}

/// Exact minimum cut (edge costs as weights) of an edge-list graph.
#[wasm_bindgen]
pub fn min_cut(text: &str) -> Result<String, JsValue> {
    let g = load_graph(text).map_err(err)?;
    let (side, value) = stoer_wagner(&g, &g.costs()).map_err(err)?;
    let members: Vec<usize> = (0..g.n()).filter(|&v| side.contains(v)).map(|v| v + 1).collect();
    Ok(json!({ "min_cut": value, "side": members }).to_string())
}
