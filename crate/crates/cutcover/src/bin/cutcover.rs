use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde_json::{json, Value};

use cutcover::graph::{self, Graph, STOER_WAGNER_MAX_N};
use cutcover::mwu::SolveStats;
use cutcover::{held_karp, packing, solve_cut_cover, solve_kecss, CoverSolution, Error, SolveOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Heldkarp,
    Kecss,
    Mincut,
    Verify,
    Bench,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Approximate cut covering LPs: Held-Karp bound, k-ECSM and k-ECSS.
#[derive(Debug, Parser)]
#[command(name = "cutcover", version)]
struct Cli {
    #[arg(long, value_enum, default_value = "heldkarp")]
    mode: Mode,
    /// Target accuracy in (0, 0.5). Bench accepts a comma-separated sweep.
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    eps: Vec<f64>,
    /// Connectivity; heldkarp with k != 2 solves the k-ECSM relaxation.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads (0 = rayon default).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long, default_value_t = 50_000_000)]
    budget_iters: u64,
    #[arg(long, default_value_t = 32)]
    budget_retries: u32,
    /// Include the per-iteration trace in the JSON output.
    #[arg(long)]
    trace: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Solution file to check (verify mode).
    #[arg(long)]
    verify: Option<PathBuf>,
    /// In verify mode, also flag coordinates above 1.
    #[arg(long)]
    strict: bool,
    /// Read the input as TSPLIB EUC_2D instead of the edge-list format.
    #[arg(long)]
    tsplib: bool,
    /// Output file (default stdout).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Graph file, or an instance directory in bench mode.
    input: PathBuf,
}

struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::Parse { .. } | Error::Invalid(_) | Error::Disconnected | Error::TooLarge { .. } => 2,
            Error::BudgetExceeded(_) => 3,
            Error::Infeasible(_) => 4,
            Error::Invariant(_) | Error::Contract(_) => 1,
        };
        Failure { code, msg: e.to_string() }
    }
}

fn fail(code: u8, msg: impl Into<String>) -> Failure {
    Failure { code, msg: msg.into() }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build();
    let result = match pool {
        Ok(pool) => pool.install(|| run(&cli)),
        Err(e) => Err(fail(2, format!("thread pool: {e}"))),
    };
    let out = match result {
        Ok(out) => out,
        Err(f) => {
            eprintln!("cutcover: {}", f.msg);
            return ExitCode::from(f.code);
        }
    };
    let text = out.text;
    let written = match &cli.output {
        Some(p) => fs::write(p, &text).map_err(|e| e.to_string()),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("cutcover: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(out.code)
}

struct Output {
    text: String,
    code: u8,
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    for &e in &cli.eps {
        if !(e > 0.0 && e < 0.5) {
            return Err(fail(2, format!("eps must lie in (0, 0.5), got {e}")));
        }
    }
    if cli.k == Some(0) {
        return Err(fail(2, "k must be at least 1"));
    }
    if cli.mode != Mode::Bench && cli.eps.len() != 1 {
        return Err(fail(2, "a single eps is expected outside bench mode"));
    }
    match cli.mode {
        Mode::Heldkarp | Mode::Kecss => solve_one(cli),
        Mode::Mincut => mincut(cli),
        Mode::Verify => verify(cli),
        Mode::Bench => bench(cli),
    }
}

fn read_graph(path: &Path, tsplib: bool) -> Result<Graph, Failure> {
    let text = fs::read_to_string(path).map_err(|e| fail(2, format!("{}: {e}", path.display())))?;
    let g = if tsplib { graph::load_tsplib(&text) } else { graph::load_graph(&text) };
    g.map_err(|e| {
        let mut f = Failure::from(e);
        f.msg = format!("{}: {}", path.display(), f.msg);
        f
    })
}

fn options(cli: &Cli) -> SolveOptions {
    SolveOptions {
        seed: cli.seed,
        max_retries: cli.budget_retries,
        max_iterations: cli.budget_iters,
        trace: cli.trace,
        ..SolveOptions::default()
    }
}

fn solve(g: &Graph, mode: Mode, k: usize, eps: f64, opts: SolveOptions) -> cutcover::Result<CoverSolution> {
    match mode {
        Mode::Kecss => solve_kecss(g, k, eps, opts),
        _ if k == 2 => held_karp(g, eps, opts),
        _ => solve_cut_cover(g, k, eps, opts),
    }
}

/// Exact min cut of the edge loads `y`, if the graph is small enough.
fn exact_min_cut(g: &Graph, y: &[f64]) -> Option<f64> {
    if g.n() <= graph::BRUTE_FORCE_MAX_N {
        graph::exact_min_cut_bruteforce(g, y).ok().map(|c| c.1)
    } else if g.n() <= STOER_WAGNER_MAX_N {
        graph::stoer_wagner(g, y).ok().map(|c| c.1)
    } else {
        None
    }
}

fn sparse_y(y: &[f64]) -> Value {
    Value::Array(
        y.iter()
            .enumerate()
            .filter(|(_, &v)| v > 1e-12)
            .map(|(e, &v)| json!([e + 1, v]))
            .collect(),
    )
}

fn solve_one(cli: &Cli) -> Result<Output, Failure> {
    let g = read_graph(&cli.input, cli.tsplib)?;
    let k = cli.k.unwrap_or(2);
    let eps = cli.eps[0];
    let start = Instant::now();
    let sol = solve(&g, cli.mode, k, eps, options(cli))?;
    let runtime_ms = start.elapsed().as_millis() as u64;
    let verified = exact_min_cut(&g, &sol.y).is_some_and(|c| c >= k as f64 * (1.0 - 1e-9))
        && (cli.mode != Mode::Kecss || sol.y.iter().all(|&v| v <= 1.0));
    let mut obj = json!({
        "bound": sol.bound,
        "epochs": sol.stats.epochs,
        "iterations": sol.stats.iterations,
        "k": k,
        "eps": eps,
        "lower_bound": sol.lower_bound,
        "mode": mode_name(cli.mode),
        "n": g.n(),
        "m": g.m(),
        "runtime_ms": runtime_ms,
        "seed": cli.seed,
        "verified": verified,
        "y": sparse_y(&sol.y),
    });
    if cli.trace {
        obj["trace"] = serde_json::to_value(&sol.trace).expect("trace serializes");
    }
    let text = match cli.format {
        Format::Json => to_json(&obj),
        Format::Csv => {
            let header = ["mode", "n", "m", "k", "eps", "seed", "bound", "lower_bound", "epochs", "iterations", "verified", "runtime_ms"];
            to_csv(&header, &[header.iter().map(|h| scalar(&obj[*h])).collect()])
        }
    };
    Ok(Output { text, code: 0 })
}

fn mincut(cli: &Cli) -> Result<Output, Failure> {
    let g = read_graph(&cli.input, cli.tsplib)?;
    let w = g.costs();
    let (side, value, method) = if g.n() <= STOER_WAGNER_MAX_N {
        let (s, v) = graph::stoer_wagner(&g, &w)?;
        (s.mask().to_vec(), v, "stoer-wagner")
    } else {
        let (s, v) = packing::packed_min_cut(&g, &w, cli.seed)?;
        (s, v, "tree-packing")
    };
    let members: Vec<usize> = (0..g.n()).filter(|&v| side[v]).map(|v| v + 1).collect();
    let obj = json!({ "method": method, "min_cut": value, "n": g.n(), "m": g.m(), "side": members });
    let text = match cli.format {
        Format::Json => to_json(&obj),
        Format::Csv => to_csv(&["n", "m", "min_cut", "method"], &[vec![g.n().to_string(), g.m().to_string(), value.to_string(), method.into()]]),
    };
    Ok(Output { text, code: 0 })
}

/// Reads `y` from our JSON output (sparse `[edge, value]` pairs, 1-based) or
/// from whitespace-separated values, one per edge.
fn read_solution(path: &Path, m: usize) -> Result<Vec<f64>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| fail(2, format!("{}: {e}", path.display())))?;
    let mut y = vec![0.0; m];
    if text.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(&text).map_err(|e| fail(2, format!("{}: {e}", path.display())))?;
        let pairs = v["y"].as_array().ok_or_else(|| fail(2, "solution JSON has no `y` array"))?;
        for p in pairs {
            let (e, val) = match (p[0].as_u64(), p[1].as_f64()) {
                (Some(e), Some(val)) if e >= 1 && (e as usize) <= m => (e as usize - 1, val),
                _ => return Err(fail(2, format!("bad solution entry {p}"))),
            };
            y[e] = val;
        }
    } else {
        let vals: Vec<f64> = text
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| fail(2, format!("bad value `{t}`"))))
            .collect::<Result<_, _>>()?;
        if vals.len() != m {
            return Err(fail(2, format!("solution has {} values for {m} edges", vals.len())));
        }
        y = vals;
    }
    if let Some(e) = y.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(fail(2, format!("edge {} has invalid value {}", e + 1, y[e])));
    }
    Ok(y)
}

fn verify(cli: &Cli) -> Result<Output, Failure> {
    let g = read_graph(&cli.input, cli.tsplib)?;
    let path = cli.verify.as_ref().ok_or_else(|| fail(2, "verify mode needs --verify <solution>"))?;
    let y = read_solution(path, g.m())?;
    let k = cli.k.unwrap_or(2);
    let min_cut = exact_min_cut(&g, &y).ok_or_else(|| fail(2, format!("no exact min cut above n = {STOER_WAGNER_MAX_N}")))?;
    let objective: f64 = y.iter().zip(g.costs()).map(|(y, c)| y * c).sum();
    let violations: Vec<usize> = if cli.strict {
        (0..g.m()).filter(|&e| y[e] > 1.0 + 1e-12).map(|e| e + 1).collect()
    } else {
        Vec::new()
    };
    let feasible = min_cut >= k as f64 * (1.0 - 1e-9) && violations.is_empty();
    let obj = json!({
        "bound_violations": violations,
        "feasible": feasible,
        "k": k,
        "min_cut": min_cut,
        "objective": objective,
    });
    let text = match cli.format {
        Format::Json => to_json(&obj),
        Format::Csv => {
            let h = ["k", "min_cut", "objective", "feasible"];
            to_csv(&h, &[h.iter().map(|x| scalar(&obj[*x])).collect()])
        }
    };
    Ok(Output { text, code: if feasible { 0 } else { 1 } })
}

struct BenchRow {
    name: String,
    n: usize,
    m: usize,
    eps: Option<f64>,
    result: Result<(f64, SolveStats, u64), String>,
}

fn bench(cli: &Cli) -> Result<Output, Failure> {
    let mut files: Vec<PathBuf> = fs::read_dir(&cli.input)
        .map_err(|e| fail(2, format!("{}: {e}", cli.input.display())))?
        .filter_map(|d| d.ok().map(|d| d.path()))
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    let k = cli.k.unwrap_or(2);
    let mut rows = Vec::new();
    let mut hard = false;
    for f in &files {
        let tsp = cli.tsplib || f.extension().is_some_and(|x| x == "tsp");
        let name = f.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let g = match read_graph(f, tsp) {
            Ok(g) => g,
            Err(e) => {
                rows.push(BenchRow { name, n: 0, m: 0, eps: None, result: Err(e.msg) });
                continue;
            }
        };
        for &eps in &cli.eps {
            let start = Instant::now();
            let result = solve(&g, Mode::Heldkarp, k, eps, options(cli));
            let ms = start.elapsed().as_millis() as u64;
            let result = match result {
                Ok(s) => Ok((s.bound, s.stats, ms)),
                Err(e @ (Error::Invariant(_) | Error::Contract(_))) => {
                    hard = true;
                    Err(e.to_string())
                }
                Err(e) => Err(e.to_string()),
            };
            rows.push(BenchRow { name: name.clone(), n: g.n(), m: g.m(), eps: Some(eps), result });
        }
    }
    let header = ["instance", "n", "m", "eps", "bound", "epochs", "iterations", "focus_calls", "max_batch", "runtime_ms", "invariants"];
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut row = vec![r.name.clone(), r.n.to_string(), r.m.to_string(), r.eps.map(|e| e.to_string()).unwrap_or_default()];
            match &r.result {
                Ok((bound, s, ms)) => {
                    let ok = (s.epochs as f64) <= s.epoch_bound;
                    row.extend([
                        bound.to_string(),
                        s.epochs.to_string(),
                        s.iterations.to_string(),
                        s.focus_calls.to_string(),
                        s.max_batch.to_string(),
                        ms.to_string(),
                        if ok { "ok".into() } else { "epoch bound exceeded".into() },
                    ]);
                }
                Err(e) => {
                    row.extend(std::iter::repeat(String::new()).take(6));
                    row.push(format!("error: {e}"));
                }
            }
            row
        })
        .collect();
    let text = match cli.format {
        Format::Csv => to_csv(&header, &table),
        Format::Json => {
            let objs: Vec<Value> = table
                .iter()
                .map(|row| {
                    let map = header.iter().zip(row).map(|(h, v)| (h.to_string(), cell(v))).collect();
                    Value::Object(map)
                })
                .collect();
            to_json(&Value::Array(objs))
        }
    };
    Ok(Output { text, code: if hard { 1 } else { 0 } })
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Heldkarp => "heldkarp",
        Mode::Kecss => "kecss",
        Mode::Mincut => "mincut",
        Mode::Verify => "verify",
        Mode::Bench => "bench",
    }
}

fn cell(s: &str) -> Value {
    if s.is_empty() {
        return Value::Null;
    }
    if let Ok(i) = s.parse::<u64>() {
        return json!(i);
    }
    match s.parse::<f64>() {
        Ok(f) if f.is_finite() => json!(f),
        _ => json!(s),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn to_json(v: &Value) -> String {
    let mut s = serde_json::to_string(v).expect("json serializes");
    s.push('\n');
    s
}

fn to_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}
