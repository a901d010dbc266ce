use std::io::IsTerminal;
use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use blockmerge::distribution::{exact_pmf, pmf_moments, Truncation};
use blockmerge::exact_core::suite::{run_identity, Identity};
use blockmerge::recurrence::{
    central_error_terms, central_moments, eps_mean_diagnostics, generic_recurrence, raw_moments,
    rao_bound_failures,
};
use blockmerge::simulator::{
    clt_report, plot_data, run_with_progress, tv_distance, Backend, SimConfig, SimSummary,
};
use blockmerge::{ExactRational, Mode, Number};

use crate::manifest::RunManifest;
use crate::output::{Artifact, Format, Sink, Table};
use crate::Failure;

/// Largest `n` for which simulations are compared with the exact law.
pub const EXACT_COMPARE_MAX_N: usize = 30;
/// Upper end of the range where the mean sandwich `n ≤ μ_n ≤ n + √n` is asserted.
pub const MEAN_BOUND_MAX_N: usize = 300;

type Outcome = Result<bool, Failure>;

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct ExactArgs {
    #[arg(long, default_value_t = 200)]
    pub n_max: usize,
    /// `all` or a comma-separated list of identity names.
    #[arg(long, default_value = "all")]
    pub identities: String,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct MomentsArgs {
    #[arg(long, default_value_t = 50)]
    pub n_max: usize,
    #[arg(long, default_value_t = 1)]
    pub order: usize,
    /// `exact`, `bigfloat:BITS` or `auto`.
    #[arg(long, default_value = "auto")]
    pub mode: String,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct PmfArgs {
    #[arg(long)]
    pub n: usize,
    /// A positive integer or `auto`.
    #[arg(long, default_value = "auto")]
    pub m_max: String,
    #[arg(long, default_value = "exact")]
    pub mode: String,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `chain` (size chain) or `full` (full permutations).
    #[arg(long, default_value = "chain")]
    pub backend: String,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct CltArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimulateArgs,
    /// CSV file for the standardized histogram and normal density.
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct RecurrenceArgs {
    #[arg(long = "L", default_value_t = 0)]
    pub big_l: u32,
    #[arg(long = "M", default_value = "1")]
    pub big_m: String,
    /// One value of λ_n per line, starting at n = 1.
    #[arg(long, conflicts_with = "lambda_const")]
    pub lambda_file: Option<PathBuf>,
    /// Constant forcing λ_n = c.
    #[arg(long)]
    pub lambda_const: Option<String>,
    /// Comma-separated ξ_1, ..., ξ_{n0}.
    #[arg(long)]
    pub initial: String,
    #[arg(long, default_value_t = 100)]
    pub n_max: usize,
    #[arg(long, default_value = "auto")]
    pub mode: String,
}

#[derive(Args, Clone, Debug)]
pub struct ReplayArgs {
    /// Manifest written beside an earlier artifact.
    pub manifest: PathBuf,
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn resolve_mode(mode: &str, n_max: usize) -> Result<Mode, Failure> {
    if mode.trim() == "auto" {
        Ok(Mode::auto(n_max))
    } else {
        Ok(mode.parse()?)
    }
}

fn manifest<A: Serialize>(
    given: Option<RunManifest>,
    command: &str,
    args: &A,
    format: Format,
    mode: Option<Mode>,
    seeds: Vec<u64>,
) -> RunManifest {
    given.unwrap_or_else(|| {
        let mut flags = serde_json::to_value(args).expect("serializable flags");
        flags["format"] = serde_json::to_value(format).expect("serializable format");
        RunManifest::new(command, flags, mode.map(|m| m.to_string()), seeds)
    })
}

fn cell(v: &Number) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn exact(a: &ExactArgs, sink: &Sink, given: Option<RunManifest>) -> Outcome {
    let ids = Identity::parse_list(&a.identities)?;
    let outcomes: Vec<_> = ids.par_iter().map(|&id| run_identity(id, a.n_max)).collect();
    let passed = outcomes.iter().all(|o| o.passed());
    let mut table = Table::new(&["identity", "range", "checks", "failures"]);
    for o in &outcomes {
        table.push(vec![o.identity.clone(), o.range.clone(), o.checks.to_string(), o.failures.len().to_string()]);
    }
    table.note("passed", passed);
    let m = manifest(given, "exact", a, sink.format, Some(Mode::Exact), vec![]);
    let art = Artifact { kind: "identities", json: json!({ "passed": passed, "outcomes": outcomes }), table };
    sink.emit(&m, &art)?;
    Ok(passed)
}

pub fn moments(a: &MomentsArgs, sink: &Sink, given: Option<RunManifest>) -> Outcome {
    if a.n_max == 0 || a.order == 0 {
        return Err(usage("--n-max and --order must be positive"));
    }
    let mode = resolve_mode(&a.mode, a.n_max)?;
    let t = if a.order >= 2 {
        central_moments(a.n_max, a.order, mode)?
    } else {
        raw_moments(a.n_max, 1, mode)?
    };
    let mut passed = true;
    let mut checks = serde_json::Map::new();
    if mode.is_exact() && a.n_max >= 2 {
        let means = t.means()?;
        let fails: Vec<usize> =
            rao_bound_failures(&means)?.into_iter().filter(|&n| n <= MEAN_BOUND_MAX_N).collect();
        passed &= fails.is_empty();
        checks.insert("mean_sandwich_failures".into(), json!(fails));
        if a.n_max >= 3 {
            let eps = eps_mean_diagnostics(&means)?;
            passed &= eps.holds();
            checks.insert("eps_checked_through".into(), json!(eps.checked_through));
            checks.insert("eps_failures".into(), json!(eps.failures));
        }
    }
    let error_terms = if a.order >= 2 { Some(central_error_terms(&t)?) } else { None };

    let mut header = vec!["n".to_string(), "mu".to_string()];
    header.extend((1..=a.order).map(|j| format!("raw_{j}")));
    if a.order >= 2 {
        header.extend((2..=a.order).map(|m| format!("central_{m}")));
        header.extend((2..=a.order).map(|m| format!("ratio_{m}")));
    }
    let mut table = Table { header, rows: Vec::new(), notes: Vec::new() };
    for n in 1..=a.n_max {
        let mut row = vec![n.to_string(), cell(&t.mu(n))];
        row.extend((1..=a.order).map(|j| cell(&t.raw(n, j))));
        if let Some(terms) = &error_terms {
            row.extend((2..=a.order).map(|m| cell(&t.central(n, m))));
            row.extend(
                terms.iter().filter(|r| r.n == n).map(|r| if r.ratio.is_nan() { String::new() } else { r.ratio.to_string() }),
            );
        }
        table.push(row);
    }
    table.note("passed", passed);
    let m = manifest(given, "moments", a, sink.format, Some(mode), vec![]);
    let art = Artifact {
        kind: "moments",
        json: json!({ "passed": passed, "table": t, "checks": checks, "error_terms": error_terms }),
        table,
    };
    sink.emit(&m, &art)?;
    Ok(passed)
}

pub fn pmf(a: &PmfArgs, sink: &Sink, given: Option<RunManifest>) -> Outcome {
    if a.n == 0 {
        return Err(usage("--n must be positive"));
    }
    let trunc: Truncation = a.m_max.parse()?;
    let mode = resolve_mode(&a.mode, a.n)?;
    let p = exact_pmf(a.n, trunc, mode)?;
    let bounds = if p.is_terminal() || p.m_max() >= p.n() { Some(pmf_moments(&p, 4)?) } else { None };
    let mut table = Table::new(&["m", "p"]);
    for (i, v) in p.probs().iter().enumerate() {
        table.push(vec![(i + 1).to_string(), cell(v)]);
    }
    table.note("terminal", p.is_terminal());
    table.note("m_max", p.m_max());
    table.note("residual", p.residual());
    let m = manifest(given, "pmf", a, sink.format, Some(mode), vec![]);
    let art = Artifact { kind: "pmf", json: json!({ "pmf": p, "moment_bounds": bounds }), table };
    sink.emit(&m, &art)?;
    Ok(true)
}

fn sim_config(a: &SimulateArgs) -> Result<SimConfig, Failure> {
    let backend: Backend = a.backend.parse()?;
    let c = SimConfig::new(a.n, a.samples, a.seed, backend).with_workers(a.workers);
    c.validate()?;
    Ok(c)
}

fn simulate_with_progress(c: &SimConfig) -> Result<SimSummary, Failure> {
    let tty = std::io::stderr().is_terminal();
    let step = (c.batches() / 20).max(1);
    let s = run_with_progress(c, |done, total| {
        if tty && (done % step == 0 || done == total) {
            eprint!("\rbatches {done}/{total}");
            if done == total {
                eprintln!();
            }
        }
    })?;
    Ok(s)
}

fn exact_law(n: usize) -> Result<Option<blockmerge::distribution::TruncatedPmf>, Failure> {
    if n > EXACT_COMPARE_MAX_N {
        return Ok(None);
    }
    Ok(Some(exact_pmf(n, Truncation::Auto, Mode::Exact)?))
}

pub fn simulate(a: &SimulateArgs, sink: &Sink, given: Option<RunManifest>) -> Outcome {
    let c = sim_config(a)?;
    let s = simulate_with_progress(&c)?;
    let tv = exact_law(a.n)?.map(|p| tv_distance(&s, &p)).transpose()?;
    let mut table = Table::new(&["x", "count"]);
    for (x, k) in &s.histogram {
        table.push(vec![x.to_string(), k.to_string()]);
    }
    table.note("count", s.count);
    table.note("mean", s.mean());
    if let Some(tv) = tv {
        table.note("tv_vs_exact", tv);
    }
    let m = manifest(given, "simulate", a, sink.format, None, vec![a.seed]);
    let art = Artifact { kind: "sim-summary", json: json!({ "summary": s, "tv_vs_exact": tv }), table };
    sink.emit(&m, &art)?;
    Ok(true)
}

pub fn clt(a: &CltArgs, sink: &Sink, given: Option<RunManifest>) -> Outcome {
    let c = sim_config(&a.sim)?;
    let s = simulate_with_progress(&c)?;
    let law = exact_law(a.sim.n)?;
    let r = clt_report(&s, None, None, law.as_ref())?;
    let mut table = Table::new(&["statistic", "value"]);
    let mut put = |k: &str, v: String| table.push(vec![k.to_string(), v]);
    put("n", r.n.to_string());
    put("count", r.count.to_string());
    put("mean", r.mean.to_string());
    put("variance", r.variance.to_string());
    for (j, v) in r.standardized_moments.iter().enumerate() {
        put(&format!("m{}", j + 1), v.to_string());
    }
    put("ks_statistic", r.ks_statistic.to_string());
    put("ks_p_value", r.ks_p_value.to_string());
    put("mean_ratio", r.mean_ratio.to_string());
    put("var_ratio", r.var_ratio.to_string());
    put("chi_square", opt(r.chi_square.as_ref().map(|c| c.statistic)));
    put("chi_square_p_value", opt(r.chi_square.as_ref().map(|c| c.p_value)));
    let m = manifest(given, "clt", a, sink.format, None, vec![a.sim.seed]);
    let art = Artifact { kind: "clt-report", json: json!({ "config": c, "report": r }), table };
    sink.emit(&m, &art)?;
    if let Some(path) = &a.plot_data {
        let p = plot_data(&s)?;
        let mut t = Table::new(&["series", "x", "z_lo", "z_hi", "value"]);
        for b in &p.bins {
            t.push(vec!["histogram".into(), b.x.to_string(), b.z_lo.to_string(), b.z_hi.to_string(), b.density.to_string()]);
        }
        for (z, phi) in &p.normal {
            t.push(vec!["normal".into(), String::new(), z.to_string(), z.to_string(), phi.to_string()]);
        }
        sink.emit_extra(&m, path, &t)?;
    }
    Ok(true)
}

fn parse_values(text: &str, what: &str) -> Result<Vec<Number>, Failure> {
    text.split(|c: char| c == ',' || c == '\n')
        .map(str::trim)
        .filter(|s| !s.is_empty() && !s.starts_with('#'))
        .map(|s| {
            s.parse::<ExactRational>()
                .map(Number::Exact)
                .map_err(|_| usage(format!("{what}: cannot parse {s:?}")))
        })
        .collect()
}

pub fn recurrence(a: &RecurrenceArgs, sink: &Sink, given: Option<RunManifest>) -> Outcome {
    let big_m: ExactRational = a.big_m.parse().map_err(|_| usage(format!("bad --M {:?}", a.big_m)))?;
    let initial = parse_values(&a.initial, "--initial")?;
    let lambda = match (&a.lambda_file, &a.lambda_const) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            parse_values(&text, "λ file")?
        }
        (None, Some(c)) => vec![parse_values(c, "--lambda-const")?.pop().ok_or_else(|| usage("empty --lambda-const"))?; a.n_max],
        _ => return Err(usage("give exactly one of --lambda-file or --lambda-const")),
    };
    let mode = resolve_mode(&a.mode, a.n_max)?;
    let run = generic_recurrence(a.big_l, &big_m, &lambda, &initial, a.n_max, mode)?;
    let xi = run.xi_vec();
    let mut table = Table::new(&["n", "lambda", "xi", "eta", "delta", "ratio", "scaled_diff", "trend"]);
    for (row, x) in run.rows.iter().zip(&xi) {
        table.push(vec![
            row.n.to_string(),
            row.lambda.to_string(),
            cell(x),
            row.eta.to_string(),
            row.delta.to_string(),
            row.ratio.to_string(),
            opt(row.scaled_diff),
            opt(row.trend),
        ]);
    }
    table.note("sup_ratio", run.sup_ratio());
    let m = manifest(given, "recurrence", a, sink.format, Some(mode), vec![]);
    let art = Artifact {
        kind: "recurrence",
        json: json!({
            "L": run.big_l,
            "M": run.big_m,
            "n0": run.n0,
            "n_max": run.n_max,
            "mode": run.mode,
            "xi": xi,
            "rows": run.rows,
            "sup_ratio": run.sup_ratio(),
        }),
        table,
    };
    sink.emit(&m, &art)?;
    Ok(true)
}

fn flags<A: for<'de> Deserialize<'de>>(m: &RunManifest) -> Result<A, Failure> {
    serde_json::from_value(m.flags.clone()).map_err(|e| usage(format!("manifest flags: {e}")))
}

pub fn replay(a: &ReplayArgs, sink: &Sink) -> Outcome {
    let m = RunManifest::load(&a.manifest).map_err(usage)?;
    let format: Format = serde_json::from_value(m.flags["format"].clone())
        .map_err(|e| usage(format!("manifest format: {e}")))?;
    let sink = Sink { dir: sink.dir.clone(), format };
    let given = Some(m.clone());
    match m.command.as_str() {
        "exact" => exact(&flags(&m)?, &sink, given),
        "moments" => moments(&flags(&m)?, &sink, given),
        "pmf" => pmf(&flags(&m)?, &sink, given),
        "simulate" => simulate(&flags(&m)?, &sink, given),
        "clt" => clt(&flags(&m)?, &sink, given),
        "recurrence" => recurrence(&flags(&m)?, &sink, given),
        other => Err(usage(format!("unknown command {other:?} in manifest"))),
    }
}
