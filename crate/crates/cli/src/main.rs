//! `schur-cue` command-line interface.
//!
//! Exit status: 0 on success or a passing suite, 1 on a failing suite or a
//! runtime failure, 2 on a usage error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use schur_cue::cue::{sample_haar_spectrum_with, Sampler};
use schur_cue::exact::{
    disorder_gap, disorder_gap_limit, expected_log_z, expected_z, limit_f_params, log_expected_z, moment_series,
    ramanujan_gap_check, variance_exact,
};
use schur_cue::io::{resolve_output, write_json_lines, Cell, CsvTable};
use schur_cue::montecarlo::suites::{run_suite, Suite, SuiteOptions};
use schur_cue::montecarlo::{mc_free_energy, RunConfig};
use schur_cue::par::Execution;
use schur_cue::rng::substream;
use schur_cue::scaling::{h_gap, mu_c, near_critical_q, nu_c, sigma2_c};

#[derive(Parser, Debug)]
#[command(name = "schur-cue", version, about = "Schur measures with CUE disorder")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Master seed; every random draw derives from it
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Number of replicates
    #[arg(long, global = true)]
    reps: Option<usize>,
    /// Matrix size N
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Fugacity q in (0, 1)
    #[arg(long, global = true, conflicts_with = "c")]
    q: Option<f64>,
    /// Near-critical parameter; implies q = 1 − c/N
    #[arg(long, global = true)]
    c: Option<f64>,
    /// Output file (default: stdout, or $SCHUR_CUE_OUT_DIR/<command>.<ext>)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Run replicates on one thread
    #[arg(long, global = true)]
    sequential: bool,
    /// Spectrum sampler for `sample` and `free-energy`
    #[arg(long, global = true, default_value = "verblunsky")]
    sampler: Sampler,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw Haar spectra
    Sample,
    /// log Z_N over independent spectra
    FreeEnergy,
    /// Evaluate a closed-form expression
    Exact {
        #[arg(long, value_enum)]
        formula: Formula,
        /// Moment order for `moments`
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 12)]
        max_weight: u32,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Near-critical constants over a grid of c
    Scan {
        /// start:step:stop, inclusive
        #[arg(long, default_value = "0.5:0.5:5")]
        c_grid: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Run a verification suite
    Verify {
        /// identities, enumeration, thm-expectations, disorder-gap, thm-moments, limit-law,
        /// variance, scaling, self-averaging, clt, diaconis-evans, jensen, estimator-sanity
        suite: String,
        /// Moment order for thm-moments (1..=3)
        #[arg(long)]
        k: Option<usize>,
        /// Weight cutoff for enumeration and moment series
        #[arg(long)]
        max_weight: Option<u32>,
        /// Comma-separated increasing N values
        #[arg(long)]
        ladder: Option<String>,
        /// Report the first attempt even if it fails statistically
        #[arg(long)]
        no_retry: bool,
    },
    /// Finite-N exact values beside their near-critical limits
    Table {
        #[arg(long, default_value = "1:1:1")]
        c_grid: String,
        #[arg(long, default_value = "50,100,200,400")]
        n_ladder: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Formula {
    Ez,
    Elogz,
    Gap,
    GapFinite,
    Ramanujan,
    Moments,
    Variance,
    LimitParams,
    Mu,
    Nu,
    Sigma2,
}

/// Bad input detected after parsing.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(Usage(msg.into()).into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            let is_usage = e.downcast_ref::<Usage>().is_some()
                || matches!(e.downcast_ref::<schur_cue::Error>(), Some(schur_cue::Error::Domain(_)));
            ExitCode::from(if is_usage { 2 } else { 1 })
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    match &cli.command {
        Command::Sample => sample(cli).map(|_| true),
        Command::FreeEnergy => free_energy(cli).map(|_| true),
        Command::Exact { formula, k, max_weight, tol } => exact(cli, *formula, *k, *max_weight, *tol).map(|_| true),
        Command::Scan { c_grid, tol } => scan(cli, c_grid, *tol).map(|_| true),
        Command::Verify { suite, k, max_weight, ladder, no_retry } => {
            verify(cli, suite, *k, *max_weight, ladder.as_deref(), *no_retry)
        }
        Command::Table { c_grid, n_ladder } => table(cli, c_grid, n_ladder).map(|_| true),
    }
}

fn execution(cli: &Cli) -> Execution {
    if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn require_n(cli: &Cli) -> anyhow::Result<usize> {
    match cli.n {
        Some(n) if n > 0 => Ok(n),
        Some(_) => usage("--n must be positive"),
        None => usage("--n is required"),
    }
}

/// `q` from `--q`, or `1 − c/N` from `--c`.
fn fugacity(cli: &Cli, n: Option<usize>) -> anyhow::Result<f64> {
    match (cli.q, cli.c) {
        (Some(q), None) => Ok(q),
        (None, Some(c)) => match n {
            Some(n) => Ok(near_critical_q(c, n)?),
            None => usage("--c needs --n to fix q = 1 − c/N"),
        },
        _ => usage("exactly one of --q or --c is required"),
    }
}

fn run_config(cli: &Cli, default_reps: usize) -> anyhow::Result<RunConfig> {
    let n = require_n(cli)?;
    let reps = cli.reps.unwrap_or(default_reps);
    let cfg = match (cli.q, cli.c) {
        (Some(q), None) => RunConfig::fixed_q(cli.seed, reps, n, q)?,
        (None, Some(c)) => RunConfig::near_critical(cli.seed, reps, n, c)?,
        _ => return usage("exactly one of --q or --c is required"),
    };
    Ok(cfg.with_execution(execution(cli)).with_sampler(cli.sampler))
}

fn open_output(cli: &Cli, stem: &str) -> anyhow::Result<Box<dyn Write>> {
    let ext = match cli.format {
        Format::Csv => "csv",
        Format::Json => "jsonl",
    };
    match resolve_output(cli.out.as_deref(), &format!("{stem}.{ext}")) {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn emit_table(cli: &Cli, stem: &str, t: &CsvTable) -> anyhow::Result<()> {
    let mut w = open_output(cli, stem)?;
    match cli.format {
        Format::Csv => t.write(&mut w)?,
        Format::Json => {
            let objs: Vec<Value> = t
                .rows
                .iter()
                .map(|row| {
                    let m: Map<String, Value> = t
                        .header
                        .iter()
                        .zip(row)
                        .map(|(h, c)| {
                            let v = match *c {
                                Cell::Int(i) => json!(i),
                                Cell::Real(x) => json!(x),
                            };
                            (h.clone(), v)
                        })
                        .collect();
                    Value::Object(m)
                })
                .collect();
            write_json_lines(&mut w, &objs)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn sample(cli: &Cli) -> anyhow::Result<()> {
    let n = require_n(cli)?;
    let reps = cli.reps.unwrap_or(1);
    let spectra = (0..reps)
        .map(|r| sample_haar_spectrum_with(n, cli.sampler, &mut substream(cli.seed, r as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    match cli.format {
        Format::Json => {
            let mut w = open_output(cli, "sample")?;
            write_json_lines(&mut w, &spectra)?;
            w.flush()?;
        }
        Format::Csv => {
            let mut t = CsvTable::new(["rep", "index", "angle"]);
            for (r, s) in spectra.iter().enumerate() {
                for (m, &a) in s.angles().iter().enumerate() {
                    t.push(vec![r.into(), m.into(), a.into()]);
                }
            }
            emit_table(cli, "sample", &t)?;
        }
    }
    Ok(())
}

fn free_energy(cli: &Cli) -> anyhow::Result<()> {
    let cfg = run_config(cli, 1)?;
    let values = mc_free_energy(&cfg)?;
    let mut t = CsvTable::new(["rep", "logZ"]);
    for (r, v) in values.into_iter().enumerate() {
        t.push(vec![r.into(), v.into()]);
    }
    emit_table(cli, "free-energy", &t)
}

fn exact(cli: &Cli, formula: Formula, k: usize, max_weight: u32, tol: f64) -> anyhow::Result<()> {
    let needs_n = !matches!(
        formula,
        Formula::Gap | Formula::Ramanujan | Formula::LimitParams | Formula::Mu | Formula::Nu | Formula::Sigma2
    );
    let n = if needs_n { Some(require_n(cli)?) } else { cli.n };
    let c_only = || cli.c.map_or_else(|| usage("--c is required"), Ok);
    let mut obj = match formula {
        Formula::Ez => json!({ "value": expected_z(fugacity(cli, n)?, n.unwrap_or(0))? }),
        Formula::Elogz => json!({ "value": expected_log_z(fugacity(cli, n)?, n.unwrap_or(0))? }),
        Formula::GapFinite => json!({ "value": disorder_gap(fugacity(cli, n)?, n.unwrap_or(0))? }),
        Formula::Gap => json!({ "value": disorder_gap_limit(fugacity(cli, n)?, tol)? }),
        Formula::Ramanujan => serde_json::to_value(ramanujan_gap_check(tol.max(1e-10))?)?,
        Formula::Moments => serde_json::to_value(moment_series(fugacity(cli, n)?, n.unwrap_or(0), k, max_weight)?)?,
        Formula::Variance => serde_json::to_value(variance_exact(fugacity(cli, n)?, n.unwrap_or(0), tol)?)?,
        Formula::LimitParams => {
            let (mean, variance) = limit_f_params(fugacity(cli, n)?)?;
            json!({ "mean": mean, "variance": variance })
        }
        Formula::Mu => json!({ "value": mu_c(c_only()?)? }),
        Formula::Nu => json!({ "value": nu_c(c_only()?)? }),
        Formula::Sigma2 => serde_json::to_value(sigma2_c(c_only()?, tol.max(1e-11))?)?,
    };
    let name = json!(formula.to_possible_value().expect("no skipped variants").get_name());
    let fields = obj.as_object_mut().expect("object");
    fields.insert("formula".into(), name);
    if let Some(q) = cli.q {
        fields.insert("q".into(), json!(q));
    }
    if let Some(c) = cli.c {
        fields.insert("c".into(), json!(c));
    }
    if let Some(n) = n {
        fields.insert("n".into(), json!(n));
    }
    let mut w = open_output(cli, "exact")?;
    match cli.format {
        Format::Json => write_json_lines(&mut w, &[&obj])?,
        Format::Csv => {
            // numeric and boolean fields only
            let mut t = CsvTable::new(Vec::<String>::new());
            let mut row = Vec::new();
            for (key, v) in fields.iter() {
                let cell = match v {
                    Value::Number(x) if x.is_i64() => Cell::Int(x.as_i64().expect("i64")),
                    Value::Number(x) => Cell::Real(x.as_f64().expect("f64")),
                    Value::Bool(b) => Cell::Int(*b as i64),
                    _ => continue,
                };
                t.header.push(key.clone());
                row.push(cell);
            }
            t.push(row);
            t.write(&mut w)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `start:step:stop`, stop inclusive up to rounding.
fn parse_grid(text: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let nums: Vec<f64> = match parts.iter().map(|p| p.trim().parse::<f64>()).collect::<Result<Vec<_>, _>>() {
        Ok(v) if v.len() == 3 => v,
        Ok(v) if v.len() == 1 => return Ok(v),
        _ => return usage(format!("grid must be start:step:stop, got {text:?}")),
    };
    let (start, step, stop) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0) || stop < start {
        return usage(format!("grid needs step > 0 and stop ≥ start, got {text:?}"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        return usage(format!("grid {text:?} has too many points"));
    }
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

fn parse_ladder(text: &str) -> anyhow::Result<Vec<usize>> {
    let v = text
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .or_else(|_| usage(format!("ladder must be comma-separated integers, got {text:?}")))?;
    if v.is_empty() || v.windows(2).any(|w| w[1] <= w[0]) || v[0] == 0 {
        return usage(format!("ladder must be positive and increasing, got {text:?}"));
    }
    Ok(v)
}

fn scan(cli: &Cli, grid: &str, tol: f64) -> anyhow::Result<()> {
    let mut t = CsvTable::new(["c", "mu", "nu", "alpha", "beta", "gamma", "delta", "sigma2", "h"]);
    for c in parse_grid(grid)? {
        let s = sigma2_c(c, tol)?;
        t.push(vec![
            c.into(),
            s.mu.into(),
            s.nu.into(),
            s.alpha.into(),
            s.beta.into(),
            s.gamma.into(),
            s.delta.into(),
            s.sigma2.into(),
            h_gap(c)?.into(),
        ]);
    }
    emit_table(cli, "scan", &t)
}

fn table(cli: &Cli, grid: &str, ladder: &str) -> anyhow::Result<()> {
    let ladder = parse_ladder(ladder)?;
    let mut t = CsvTable::new(["c", "N", "q_N", "E_logZ/N", "logEZ/N", "mu", "nu", "Var/N", "sigma2"]);
    for c in parse_grid(grid)? {
        let s = sigma2_c(c, 1e-10)?;
        for &n in &ladder {
            let q = near_critical_q(c, n)?;
            let nf = n as f64;
            t.push(vec![
                c.into(),
                n.into(),
                q.into(),
                (expected_log_z(q, n)? / nf).into(),
                (log_expected_z(q, n)? / nf).into(),
                s.mu.into(),
                s.nu.into(),
                (variance_exact(q, n, 1e-10)?.total / nf).into(),
                s.sigma2.into(),
            ]);
        }
    }
    emit_table(cli, "table", &t)
}

fn verify(
    cli: &Cli,
    suite: &str,
    k: Option<usize>,
    max_weight: Option<u32>,
    ladder: Option<&str>,
    no_retry: bool,
) -> anyhow::Result<bool> {
    let suite: Suite = match suite.parse() {
        Ok(s) => s,
        Err(_) => {
            let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
            return usage(format!("unknown suite {suite:?}; expected one of {}", names.join(", ")));
        }
    };
    let opts = SuiteOptions {
        seed: cli.seed,
        reps: cli.reps,
        n: cli.n,
        q: cli.q,
        c: cli.c,
        k,
        max_weight,
        ladder: ladder.map(parse_ladder).transpose()?,
        execution: execution(cli),
        no_retry,
    };
    let report = run_suite(suite, &opts)?;
    let mut w = open_output(cli, &format!("verify-{suite}"))?;
    match cli.format {
        Format::Json => write_json_lines(&mut w, &[&report])?,
        Format::Csv => {
            let mut t = CsvTable::new(["test", "statistic", "threshold", "pass", "soft", "informational"]);
            for (i, r) in report.tests.iter().enumerate() {
                t.push(vec![
                    i.into(),
                    r.statistic.into(),
                    r.threshold.into(),
                    Cell::Int(r.pass as i64),
                    Cell::Int(r.soft as i64),
                    Cell::Int(r.informational as i64),
                ]);
            }
            t.write(&mut w)?;
        }
    }
    w.flush()?;
    for r in &report.tests {
        eprintln!("{} {}: {} (threshold {})", if r.pass { "PASS" } else { "FAIL" }, r.name, r.statistic, r.threshold);
    }
    Ok(report.pass)
}
