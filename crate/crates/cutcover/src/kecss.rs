//! k-ECSS LP with knapsack-cover constraints through free cuts.
//!
//! A free cut (S, F) has F ⊆ δ(S), |F| < k, and normalized weight
//! v(δ(S) \ F)/(k - |F|) under v = w/c. At threshold ρ the cut oracle keeps
//! the edges with v_e ≥ ρ out of its sums and counts them instead, so a tree
//! cut's column is the free cut (S, {e ∈ δ(S): v_e ≥ ρ}).

use crate::error::{Error, Result};
use crate::graph::{stoer_wagner, Graph, VertexCut, STOER_WAGNER_MAX_N};
use crate::oracle::ColumnMode;
use crate::packing::packed_min_cut;
use crate::tree_focus::{solver_params, CoverSolution, SolveOptions, TreeEpochs};

pub fn normalized_free_cut_value(g: &Graph, s: &VertexCut, f: &[usize], v: &[f64], k: usize) -> Result<f64> {
    let cross = s.crossing(g);
    if f.len() >= k {
        return Err(Error::Invalid(format!("|F| = {} must be below k = {k}", f.len())));
    }
    if let Some(e) = f.iter().find(|e| !cross.contains(e)) {
        return Err(Error::Invalid(format!("edge {e} of F does not cross the cut")));
    }
    let light: f64 = cross.iter().filter(|e| !f.contains(e)).map(|&e| v[e]).sum();
    Ok(light / (k - f.len()) as f64)
}

pub fn truncate(v: &[f64], rho: f64) -> Vec<f64> {
    v.iter().map(|&x| x.min(rho)).collect()
}

/// Min cut under `v`: exact (Stoer-Wagner) up to `exact_n` vertices, otherwise the best
/// 1-or-2-respecting cut over a tree packing (an upper bound).
pub fn min_cut_value(g: &Graph, v: &[f64], exact_n: usize, seed: u64) -> Result<f64> {
    if g.n() <= exact_n {
        return Ok(stoer_wagner(g, v)?.1);
    }
    Ok(packed_min_cut(g, v, seed)?.1)
}

/// Whether mincut(v_ρ) with ρ = (1+ε)λ lies in [kλ, kρ).
pub fn range_map_forward(g: &Graph, v: &[f64], lambda: f64, eps: f64, k: usize, exact_n: usize) -> Result<bool> {
    let rho = (1.0 + eps) * lambda;
    let mc = min_cut_value(g, &truncate(v, rho), exact_n, 0)?;
    let k = k as f64;
    Ok(k * lambda <= mc && mc < k * rho)
}

/// The free cut (C, E^{≥ρ}(C)) of a cut C with v_ρ(δ(C)) < kρ, and its normalized value (< ρ).
pub fn range_map_backward(g: &Graph, c: &VertexCut, v: &[f64], rho: f64, k: usize) -> Result<(Vec<usize>, f64)> {
    let cross = c.crossing(g);
    let truncated: f64 = cross.iter().map(|&e| v[e].min(rho)).sum();
    if !(truncated < k as f64 * rho) {
        return Err(Error::Contract(format!("truncated cut {truncated} is not below k rho = {}", k as f64 * rho)));
    }
    let f: Vec<usize> = cross.iter().copied().filter(|&e| v[e] >= rho).collect();
    if f.len() >= k {
        return Err(Error::Invariant(format!("{} heavy edges on a cut below k rho", f.len())));
    }
    let value = normalized_free_cut_value(g, c, &f, v, k)?;
    if !(value < rho) {
        return Err(Error::Invariant(format!("free cut value {value} not below rho {rho}")));
    }
    Ok((f, value))
}

/// λ₀ ≤ min normalized free cut: start at mincut(v)/k and halve until
/// mincut(v_λ) ≥ kλ. Returns λ₀ and the slack mincut(v)/(k λ₀).
pub fn init_lambda_kecss(g: &Graph, v: &[f64], k: usize, eps: f64, seed: u64, exact_n: usize) -> Result<(f64, f64)> {
    let _ = eps;
    let start = min_cut_value(g, v, exact_n, seed)? / k as f64;
    if !(start > 0.0) {
        return Err(Error::Infeasible("zero-weight cut".into()));
    }
    let mut lambda = start;
    for _ in 0..2000 {
        let mc = min_cut_value(g, &truncate(v, lambda), exact_n, seed)?;
        if mc >= k as f64 * lambda * (1.0 - 1e-12) {
            return Ok((lambda, start / lambda));
        }
        lambda /= 2.0;
    }
    Err(Error::Infeasible("no positive lower bound on free cuts".into()))
}

/// Cardinality min cut ≥ k, or an infeasibility error.
pub fn check_k_connected(g: &Graph, k: usize, exact_n: usize) -> Result<()> {
    let c = min_cut_value(g, &vec![1.0; g.m()], exact_n.max(STOER_WAGNER_MAX_N), 0)?;
    if c + 0.5 < k as f64 {
        return Err(Error::Infeasible(format!("not {k}-edge-connected (min cut {c})")));
    }
    Ok(())
}

/// (1+ε)-approximate k-ECSS LP: min c^T y, Σ_{δ(S)} y ≥ k, 0 ≤ y ≤ 1.
/// The MWU covering solution is clamped to y ≤ 1, which keeps every
/// knapsack-cover row satisfied.
pub fn solve_kecss(g: &Graph, k: usize, eps_target: f64, opts: SolveOptions) -> Result<CoverSolution> {
    if k == 0 {
        return Err(Error::Invalid("k must be at least 1".into()));
    }
    let params = solver_params(eps_target, &opts)?;
    check_k_connected(g, k, opts.exact_certify_max_n)?;
    let mut driver = TreeEpochs::new(g, ColumnMode::Free { k }, opts);
    let out = crate::mwu::run_solver(g.m(), params, &mut driver)?;
    let costs = g.costs();
    let y: Vec<f64> = crate::mwu::extract_covering_solution(&out.z, &costs)
        .into_iter()
        .map(|y| y.min(1.0))
        .collect();
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
