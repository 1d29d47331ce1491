//! Epoch-based MWU for normalized covering LPs `min <1,y> s.t. A^T y >= 1`.
//!
//! Rows are indexed by `0..m`; columns are supplied either explicitly
//! ([`ExplicitInstance`]) or by an implicit oracle that drives the epochs
//! through [`EpochOracle`].

use web_time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};

/// Constant in the per-Focus iteration bound `C ln m ln(η|B|/ε)/ε²`.
pub const ITERATION_BOUND_C: f64 = 8.0;

const RESCALE_LOG2: i32 = 512;

/// Internal accuracy that makes the returned covering value provably at most
/// `(1+target)` times the optimum: `(1+ε')/(1-2ε') = 1+target`.
pub fn internal_epsilon(target: f64) -> f64 {
    target / (3.0 + 2.0 * target)
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SolveStats {
    pub epochs: u64,
    pub iterations: u64,
    pub focus_calls: u64,
    pub max_focus_iterations: u64,
    pub max_batch: usize,
    pub packings: u64,
    pub retries: u64,
    /// ln λ at every epoch boundary (scale exponent folded in).
    pub log_lambda: Vec<f64>,
    /// (1+ε) Σ_t λ<1,g>/<1,w>, the exponent of the weight upper bound.
    pub weight_bound_acc: f64,
    /// Σ_t <1,g>, the packing mass.
    pub packing_mass: f64,
    pub epoch_bound: f64,
    pub phase_ms: Vec<(String, f64)>,
}

impl SolveStats {
    pub fn add_phase(&mut self, name: &str, since: Instant) {
        let ms = since.elapsed().as_secs_f64() * 1e3;
        if let Some(p) = self.phase_ms.iter_mut().find(|p| p.0 == name) {
            p.1 += ms;
        } else {
            self.phase_ms.push((name.to_string(), ms));
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceRecord {
    pub epoch: u64,
    pub log_lambda: f64,
    pub batch: usize,
    pub delta: f64,
    pub max_cong: f64,
    pub log_sum_w: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverParams {
    /// Internal accuracy ε (not the target; see [`internal_epsilon`]).
    pub eps: f64,
    pub max_iterations: u64,
    pub check_invariants: bool,
    pub trace: bool,
    /// Wall-clock cutoff, checked once per iteration and epoch.
    pub deadline: Option<Instant>,
}

impl SolverParams {
    pub fn new(eps: f64) -> SolverParams {
        SolverParams { eps, max_iterations: 50_000_000, check_invariants: true, trace: false, deadline: None }
    }

    fn check_deadline(&self) -> Result<()> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(Error::BudgetExceeded("time limit reached".into())),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone)]
struct Snapshot {
    w: Vec<f64>,
    lambda: f64,
    ratio: f64,
}

/// MWU weights, congestion and the epoch lower bound.
#[derive(Debug, Clone)]
pub struct DualState {
    pub w: Vec<f64>,
    pub cong: Vec<f64>,
    pub lambda: f64,
    pub eps: f64,
    pub eta: f64,
    pub scale_exponent: i64,
    pub stats: SolveStats,
    sum_w: f64,
    max_cong: f64,
    best: Snapshot,
    params: SolverParams,
    trajectory: Option<Vec<(Vec<f64>, Vec<f64>)>>,
    trace: Vec<TraceRecord>,
}

impl DualState {
    pub fn new(m: usize, params: SolverParams) -> DualState {
        assert!(m >= 1);
        let eps = params.eps;
        DualState {
            w: vec![1.0; m],
            cong: vec![0.0; m],
            lambda: 0.0,
            eps,
            eta: (m as f64).ln() / eps,
            scale_exponent: 0,
            stats: SolveStats::default(),
            sum_w: m as f64,
            max_cong: 0.0,
            best: Snapshot { w: vec![1.0; m], lambda: 0.0, ratio: f64::INFINITY },
            params,
            trajectory: None,
            trace: Vec::new(),
        }
    }

    pub fn m(&self) -> usize {
        self.w.len()
    }

    /// State starting from arbitrary weights. The weight bound checks assume w = 1 at
    /// the start, so their checks are switched off.
    pub fn with_weights(w: Vec<f64>, mut params: SolverParams) -> DualState {
        params.check_invariants = false;
        let mut s = DualState::new(w.len(), params);
        s.sum_w = w.iter().sum();
        s.w = w;
        s
    }

    /// Installs λ₀. `slack` bounds (true min column weight)/λ₀ and enters the epoch bound.
    pub fn start(&mut self, lambda0: f64, slack: f64) -> Result<()> {
        if !(lambda0 > 0.0) || !lambda0.is_finite() {
            return Err(Error::Invalid(format!("initial lambda must be positive, got {lambda0}")));
        }
        self.lambda = lambda0;
        self.best = Snapshot { w: self.w.clone(), lambda: lambda0, ratio: self.sum_w / lambda0 };
        let m = self.m() as f64;
        let base = (1.0 + self.eps).ln();
        self.stats.epoch_bound = (1.0 + 1.0 / self.eps) * m.ln() / base + slack.max(1.0).ln() / base;
        self.stats.log_lambda.push(self.log_lambda());
        Ok(())
    }

    pub fn threshold(&self) -> f64 {
        (1.0 + self.eps) * self.lambda
    }

    pub fn max_congestion(&self) -> f64 {
        self.max_cong
    }

    pub fn done(&self) -> bool {
        self.max_cong >= self.eta
    }

    pub fn max_cong(&self) -> f64 {
        self.max_cong
    }

    pub fn sum_w(&self) -> f64 {
        self.sum_w
    }

    pub fn log_lambda(&self) -> f64 {
        self.lambda.ln() + self.log_scale()
    }

    fn log_scale(&self) -> f64 {
        self.scale_exponent as f64 * RESCALE_LOG2 as f64 * std::f64::consts::LN_2
    }

    pub fn params(&self) -> &SolverParams {
        &self.params
    }

    pub fn check_deadline(&self) -> Result<()> {
        self.params.check_deadline()
    }

    pub fn record_trajectory(&mut self, on: bool) {
        self.trajectory = if on { Some(Vec::new()) } else { None };
    }

    pub fn take_trajectory(&mut self) -> Vec<(Vec<f64>, Vec<f64>)> {
        self.trajectory.as_mut().map(std::mem::take).unwrap_or_default()
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    /// Counts one MWU iteration against the budget.
    pub fn begin_iteration(&mut self) -> Result<()> {
        self.stats.iterations += 1;
        if self.stats.iterations > self.params.max_iterations {
            return Err(Error::BudgetExceeded(format!(
                "more than {} MWU iterations",
                self.params.max_iterations
            )));
        }
        self.params.check_deadline()
    }

    /// Applies `w_i <- w_i (1 + a_i)`, `cong_i += a_i` for the listed rows and
    /// checks both weight bounds. `g_mass` is `<1,g>` of the step.
    pub fn apply(&mut self, updates: &[(usize, f64)], g_mass: f64, batch: usize, delta: f64) -> Result<()> {
        let eps = self.eps;
        self.stats.weight_bound_acc += (1.0 + eps) * self.lambda * g_mass / self.sum_w;
        self.stats.packing_mass += g_mass;
        let mut added = 0.0;
        for &(i, a) in updates {
            debug_assert!(a >= 0.0);
            if a > eps * (1.0 + 1e-9) {
                return Err(Error::Invariant(format!("row {i} step {a} exceeds eps {eps}")));
            }
            added += self.w[i] * a;
            self.w[i] *= 1.0 + a;
            self.cong[i] += a;
            if self.cong[i] > self.max_cong {
                self.max_cong = self.cong[i];
            }
        }
        self.sum_w += added;
        if self.params.check_invariants {
            let shift = self.log_scale();
            for &(i, _) in updates {
                let lhs = self.w[i].ln() + shift;
                let rhs = (1.0 - eps) * self.cong[i];
                if lhs < rhs - 1e-7 * (1.0 + rhs.abs()) {
                    return Err(Error::Invariant(format!(
                        "weight lower bound: ln w_{i} = {lhs} < (1-eps) cong = {rhs}"
                    )));
                }
            }
            let lhs = self.sum_w.ln() + shift;
            let rhs = (self.m() as f64).ln() + self.stats.weight_bound_acc;
            if lhs > rhs + 1e-7 * (1.0 + rhs.abs()) {
                return Err(Error::Invariant(format!("weight upper bound: ln<1,w> = {lhs} > {rhs}")));
            }
        }
        if let Some(t) = self.trajectory.as_mut() {
            t.push((self.w.clone(), self.cong.clone()));
        }
        if self.params.trace {
            self.trace.push(TraceRecord {
                epoch: self.stats.epochs,
                log_lambda: self.log_lambda(),
                batch,
                delta,
                max_cong: self.max_cong,
                log_sum_w: self.sum_w.ln() + self.log_scale(),
            });
        }
        Ok(())
    }

    /// Records a finished Focus call and checks its iteration bound.
    pub fn focus_finished(&mut self, iterations: u64, batch: usize) -> Result<()> {
        self.stats.focus_calls += 1;
        self.stats.max_focus_iterations = self.stats.max_focus_iterations.max(iterations);
        self.stats.max_batch = self.stats.max_batch.max(batch);
        if self.params.check_invariants && batch > 0 {
            let bound = focus_iteration_bound(self.m(), batch, self.eps);
            if iterations as f64 > bound {
                return Err(Error::Invariant(format!(
                    "focus ran {iterations} iterations, bound {bound:.1} (|B| = {batch})"
                )));
            }
        }
        Ok(())
    }

    /// λ <- (1+ε)λ, snapshot update, rescaling and sum rebuild.
    pub fn advance_epoch(&mut self) -> Result<()> {
        self.params.check_deadline()?;
        self.lambda *= 1.0 + self.eps;
        self.stats.epochs += 1;
        self.sum_w = self.w.iter().sum();
        let ratio = self.sum_w / self.lambda;
        if ratio < self.best.ratio {
            self.best.w.copy_from_slice(&self.w);
            self.best.lambda = self.lambda;
            self.best.ratio = ratio;
        }
        self.rescale_if_needed();
        self.stats.log_lambda.push(self.log_lambda());
        if self.params.check_invariants && self.stats.epochs as f64 > self.stats.epoch_bound + 1.0 + 1e-9 {
            return Err(Error::Invariant(format!(
                "epoch count {} exceeds bound {:.1}",
                self.stats.epochs,
                self.stats.epoch_bound + 1.0
            )));
        }
        Ok(())
    }

    fn rescale_if_needed(&mut self) {
        let max = self.w.iter().cloned().fold(0.0, f64::max);
        if max > 2f64.powi(RESCALE_LOG2) {
            let f = 2f64.powi(-RESCALE_LOG2);
            for x in &mut self.w {
                *x *= f;
            }
            self.lambda *= f;
            self.sum_w = self.w.iter().sum();
            self.scale_exponent += 1;
        }
    }

    /// Normalized covering solution `w*/λ*` of the best epoch boundary.
    pub fn best_dual(&self) -> Vec<f64> {
        self.best.w.iter().map(|&x| x / self.best.lambda).collect()
    }

    pub fn best_ratio(&self) -> f64 {
        self.best.ratio
    }

    /// `<1,x>/‖Ax‖∞`, the value of the scaled packing `x`: a lower bound on OPT.
    pub fn packing_value(&self) -> f64 {
        if self.max_cong > 0.0 {
            self.stats.packing_mass / self.max_cong
        } else {
            0.0
        }
    }
}

/// `C ln m ln(η|B|/ε)/ε² + 2`: the first and last iterations are counted separately.
pub fn focus_iteration_bound(m: usize, batch: usize, eps: f64) -> f64 {
    let lm = (m as f64).ln();
    let eta = lm / eps;
    let inner = (eta * batch as f64 / eps).max(std::f64::consts::E).ln();
    ITERATION_BOUND_C * lm * inner / (eps * eps) + 2.0
}

/// Sparse column with a flag for columns that vanish (free cuts with |F| >= k).
#[derive(Debug, Clone, Default)]
pub struct Column {
    pub entries: Vec<(usize, f64)>,
    pub void: bool,
}

impl Column {
    pub fn weight(&self, w: &[f64]) -> f64 {
        if self.void {
            return f64::INFINITY;
        }
        self.entries.iter().map(|&(i, a)| a * w[i]).sum()
    }

    pub fn max_coefficient(&self) -> f64 {
        self.entries.iter().map(|e| e.1).fold(0.0, f64::max)
    }
}

/// Column family whose coefficients may depend on the current weights.
pub trait ColumnSource {
    fn rows(&self) -> usize;
    fn columns(&self) -> usize;
    /// Column `j` at weights `w`; `rho` is the current threshold (1+ε)λ.
    fn column(&self, j: usize, w: &[f64], rho: f64) -> Column;
}

#[derive(Debug, Clone)]
pub struct ExplicitInstance {
    pub rows: usize,
    pub cols: Vec<Vec<(usize, f64)>>,
}

impl ExplicitInstance {
    pub fn from_dense(a: &[Vec<f64>]) -> ExplicitInstance {
        let rows = a.len();
        let ncols = a.first().map_or(0, |r| r.len());
        let cols = (0..ncols)
            .map(|j| (0..rows).filter(|&i| a[i][j] != 0.0).map(|i| (i, a[i][j])).collect())
            .collect();
        ExplicitInstance { rows, cols }
    }
}

impl ColumnSource for ExplicitInstance {
    fn rows(&self) -> usize {
        self.rows
    }
    fn columns(&self) -> usize {
        self.cols.len()
    }
    fn column(&self, j: usize, _w: &[f64], _rho: f64) -> Column {
        Column { entries: self.cols[j].clone(), void: false }
    }
}

/// One call of Focus on the columns `set`, mutating `state`. Returns the iteration count.
pub fn focus<S: ColumnSource + ?Sized>(src: &S, set: &[usize], state: &mut DualState) -> Result<u64> {
    let mut set = set.to_vec();
    set.sort_unstable();
    set.dedup();
    if set.is_empty() {
        return Ok(0);
    }
    let thr = state.threshold();
    for &j in &set {
        let wj = src.column(j, &state.w, thr).weight(&state.w);
        if !(wj < thr) {
            return Err(Error::Contract(format!("column {j} has weight {wj} >= threshold {thr}")));
        }
    }
    let eps = state.eps;
    let m = state.m();
    let mut x = vec![0.0; set.len()];
    let mut active: Vec<usize> = (0..set.len()).collect();
    let mut iterations = 0u64;
    let mut ax = vec![0.0; m];
    while !state.done() && !active.is_empty() {
        state.begin_iteration()?;
        iterations += 1;
        let cols: Vec<Column> = active.iter().map(|&a| src.column(set[a], &state.w, thr)).collect();
        let first = iterations == 1;
        ax.iter_mut().for_each(|v| *v = 0.0);
        let mut g = vec![0.0; active.len()];
        if first {
            for (t, c) in cols.iter().enumerate() {
                g[t] = eps / (active.len() as f64 * c.max_coefficient());
                for &(i, a) in &c.entries {
                    ax[i] += a * g[t];
                }
            }
        } else {
            for (t, c) in cols.iter().enumerate() {
                let xj = x[active[t]];
                for &(i, a) in &c.entries {
                    ax[i] += a * xj;
                }
            }
        }
        let axmax = ax.iter().cloned().fold(0.0, f64::max);
        if axmax == 0.0 {
            return Err(Error::Infeasible("a cut is crossed by fewer than k edges".into()));
        }
        let delta = if first { 1.0 } else { eps / axmax };
        if !first {
            for (t, &a) in active.iter().enumerate() {
                g[t] = delta * x[a];
            }
        }
        let updates: Vec<(usize, f64)> =
            (0..m).filter(|&i| ax[i] > 0.0).map(|i| (i, if first { ax[i] } else { delta * ax[i] })).collect();
        let mass: f64 = g.iter().sum();
        for (t, &a) in active.iter().enumerate() {
            x[a] += g[t];
        }
        state.apply(&updates, mass, active.len(), delta)?;
        active.retain(|&a| src.column(set[a], &state.w, thr).weight(&state.w) < thr);
    }
    state.focus_finished(iterations, set.len())?;
    Ok(iterations)
}

/// Hooks through which a column oracle drives [`run_solver`].
pub trait EpochOracle {
    /// λ₀ ≤ min column weight at the current weights, and an upper bound on
    /// (min column weight)/λ₀.
    fn initial_lambda(&mut self, state: &DualState) -> Result<(f64, f64)>;
    /// Focus until every column weight is ≥ (1+ε)λ or the congestion reaches η.
    fn clear_epoch(&mut self, state: &mut DualState) -> Result<()>;
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    /// <1, w*/λ*>.
    pub value: f64,
    /// w*/λ*, feasible for `A^T z >= 1`.
    pub z: Vec<f64>,
    /// Packing lower bound on the optimum.
    pub lower_bound: f64,
    pub stats: SolveStats,
    pub trace: Vec<TraceRecord>,
}

pub fn run_solver<O: EpochOracle + ?Sized>(m: usize, params: SolverParams, oracle: &mut O) -> Result<SolveOutcome> {
    let mut state = DualState::new(m, params);
    let (lambda0, slack) = oracle.initial_lambda(&state)?;
    state.start(lambda0, slack)?;
    while !state.done() {
        oracle.clear_epoch(&mut state)?;
        if state.done() {
            break;
        }
        state.advance_epoch()?;
    }
    finish(state)
}

pub fn finish(state: DualState) -> Result<SolveOutcome> {
    let z = state.best_dual();
    let value: f64 = z.iter().sum();
    let lower_bound = state.packing_value();
    if state.params.check_invariants && state.m() > 1 {
        let eps = state.eps;
        let ratio = (1.0 + eps) / (1.0 - 2.0 * eps);
        if value > ratio * lower_bound * (1.0 + 1e-9) {
            return Err(Error::Invariant(format!(
                "duality gap: covering {value} > {ratio} x packing {lower_bound}"
            )));
        }
    }
    Ok(SolveOutcome { value, z, lower_bound, trace: state.trace.clone(), stats: state.stats })
}

/// y_e = z_e / c_e: from normalized covering variables back to edge variables.
pub fn extract_covering_solution(z: &[f64], costs: &[f64]) -> Vec<f64> {
    z.iter().zip(costs).map(|(a, c)| a / c).collect()
}

/// Epoch solver on an explicit column family: every epoch focuses on all columns
/// currently below the threshold.
pub struct ExplicitSolver<'a, S: ColumnSource + ?Sized> {
    pub src: &'a S,
}

impl<S: ColumnSource + ?Sized> ExplicitSolver<'_, S> {
    fn small_columns(&self, state: &DualState) -> Vec<usize> {
        let thr = state.threshold();
        (0..self.src.columns())
            .filter(|&j| self.src.column(j, &state.w, thr).weight(&state.w) < thr)
            .collect()
    }
}

impl<S: ColumnSource + ?Sized> EpochOracle for ExplicitSolver<'_, S> {
    fn initial_lambda(&mut self, state: &DualState) -> Result<(f64, f64)> {
        let l = (0..self.src.columns())
            .map(|j| self.src.column(j, &state.w, f64::INFINITY).weight(&state.w))
            .fold(f64::INFINITY, f64::min);
        if !l.is_finite() || l <= 0.0 {
            return Err(Error::Infeasible("a column has no positive entry".into()));
        }
        Ok((l, 1.0))
    }

    fn clear_epoch(&mut self, state: &mut DualState) -> Result<()> {
        loop {
            let b = self.small_columns(state);
            if b.is_empty() || state.done() {
                return Ok(());
            }
            focus(self.src, &b, state)?;
            if state.done() {
                return Ok(());
            }
        }
    }
}
