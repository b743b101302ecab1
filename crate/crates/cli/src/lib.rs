//! The `pidl` command line: `check`, `graph`, `gen`, `bench` and `serve`.
//!
//! Every command writes to the given streams and returns its exit code, so
//! the binary is a thin wrapper and tests can run commands in-process.
//! Exit codes: 0 clean, 1 anomalies found, 2 usage, input or runtime error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use pidl::analysis::export::{to_dot, to_json};
use pidl::analysis::{build_state_graph, check_redundancy, find_cycles};
use pidl::dopler::{batch_seed, generate_random_model, AnomalyClass, DoplerModel, Expr, GenerateError, Ratios};
use pidl::load::Model;
use pidl::saturation::{explore_with, ExploreError, ExploreOptions};

pub const EXIT_CLEAN: i32 = 0;
pub const EXIT_ANOMALIES: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Debug, Parser)]
#[command(name = "pidl", version, about = "Verify and simulate rule-based configuration models")]
pub struct Cli {
    /// Output format; `graph` reads `text` as `dot`.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Worker threads for exploration, or for the model batch in `bench`.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: Option<u16>,
    /// Time limit per model, in seconds.
    #[arg(long, global = true, default_value_t = 720.0, value_parser = positive_seconds)]
    pub time_limit: f64,
    /// Seed of the first generated model; model i uses seed + i.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file (`check`, `graph`, `bench`) or directory (`gen`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Explore a model and report every anomaly.
    Check { path: PathBuf },
    /// Export the state graph as DOT or JSON.
    Graph { path: PathBuf },
    /// Generate random DOPLER models.
    Gen {
        #[arg(long)]
        vars: usize,
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
    /// Generate random models and time their analysis.
    Bench {
        #[arg(long, default_value_t = 20)]
        vars: usize,
        #[arg(long, default_value_t = 20)]
        count: u64,
        /// Print `-` instead of wall times, for reproducible output.
        #[arg(long)]
        no_timings: bool,
    },
    /// Serve the session API over HTTP.
    Serve {
        #[arg(long, env = "PIDL_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: std::net::IpAddr,
        /// Directory with a built UI bundle to serve statically.
        #[arg(long)]
        ui: Option<PathBuf>,
        /// Directory for model and session snapshots.
        #[arg(long)]
        snapshots: Option<PathBuf>,
    },
}

fn positive_seconds(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(t) if t > 0.0 && t.is_finite() => Ok(t),
        Ok(_) => Err("the time limit must be positive".into()),
        Err(e) => Err(e.to_string()),
    }
}

/// A command failure, reported on stderr with exit code 2.
#[derive(Debug)]
pub struct Failure(pub String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Failure {
        Failure(e.to_string())
    }
}

/// Command output and exit code.
pub type CmdResult = Result<(String, i32), Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_CLEAN };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    execute(&cli, out, err)
}

pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Check { path } => cmd_check(cli, path),
        Command::Graph { path } => cmd_graph(cli, path),
        Command::Gen { vars, count } => cmd_gen(cli, *vars, *count),
        Command::Bench { vars, count, no_timings } => cmd_bench(cli, *vars, *count, *no_timings),
        Command::Serve { port, bind, ui, snapshots } => cmd_serve(cli, (*bind, *port).into(), ui.clone(), snapshots.clone()),
    };
    match result {
        Ok((text, code)) => {
            let written = match (&cli.out, &cli.command) {
                (Some(path), Command::Check { .. } | Command::Graph { .. } | Command::Bench { .. }) => {
                    std::fs::write(path, &text).map_err(|e| format!("cannot write {}: {e}", path.display()))
                }
                _ => out.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => code,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    EXIT_ERROR
                }
            }
        }
        Err(Failure(message)) => {
            let _ = writeln!(err, "error: {message}");
            EXIT_ERROR
        }
    }
}

fn options(cli: &Cli) -> ExploreOptions {
    ExploreOptions {
        jobs: cli.jobs.map(usize::from),
        deadline: Some(Instant::now() + Duration::from_secs_f64(cli.time_limit)),
        ..Default::default()
    }
}

pub fn cmd_check(cli: &Cli, path: &Path) -> CmdResult {
    let model = Model::load(path)?;
    let report = model.check(&options(cli), pidl::analysis::DEFAULT_CYCLE_LIMIT)?;
    let states = report.exploration.states.len();
    let inconsistent = report.analysis.inconsistent.len();
    let code = if report.is_clean() { EXIT_CLEAN } else { EXIT_ANOMALIES };
    let text = match cli.format {
        Format::Text => {
            let mut s = format!("states: {states}, inconsistent: {inconsistent}\n");
            for class in AnomalyClass::ALL {
                writeln!(s, "{}: {}", class.name(), report.count(class)).unwrap();
            }
            for class in AnomalyClass::ALL {
                let mut found = report.of(class).peekable();
                if found.peek().is_some() {
                    writeln!(s, "\n{}:", class.name()).unwrap();
                    for f in found {
                        writeln!(s, "  - {}", f.description).unwrap();
                    }
                }
            }
            s
        }
        Format::Json => {
            let counts: serde_json::Map<_, _> =
                AnomalyClass::ALL.iter().map(|&c| (c.name().to_string(), json!(report.count(c)))).collect();
            let doc = json!({
                "version": 1,
                "states": states,
                "inconsistent": inconsistent,
                "counts": counts,
                "findings": report.findings,
            });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
        Format::Dot => return Err(Failure("check supports --format text or json".into())),
    };
    Ok((text, code))
}

pub fn cmd_graph(cli: &Cli, path: &Path) -> CmdResult {
    let model = Model::load(path)?;
    let report = model.check(&options(cli), pidl::analysis::DEFAULT_CYCLE_LIMIT)?;
    let text = match cli.format {
        Format::Text | Format::Dot => to_dot(&report.analysis.graph),
        Format::Json => to_json(&report.analysis.graph, Some(&report.analysis)),
    };
    Ok((text, EXIT_CLEAN))
}

/// The file name of model `i` (0-based) of a batch.
pub fn model_name(i: u64) -> String {
    format!("rnd_{}", i + 1)
}

fn generate(vars: usize, seed: u64, i: u64) -> Result<pidl::dopler::ModelDocument, GenerateError> {
    generate_random_model(vars, batch_seed(seed, i as usize), &Ratios::default())
}

pub fn cmd_gen(cli: &Cli, vars: usize, count: u64) -> CmdResult {
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    let mut listing = String::new();
    for i in 0..count {
        let doc = generate(vars, cli.seed, i)?;
        let path = dir.join(format!("{}.json", model_name(i)));
        std::fs::write(&path, doc.to_json()).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        writeln!(listing, "{}", path.display()).unwrap();
    }
    Ok((listing, EXIT_CLEAN))
}

/// Outcome of one benchmark model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Inconsistent,
    /// States, whether a cycle exists, redundant rule applications.
    Consistent { states: usize, cycle: bool, redundant: usize },
    Timeout,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Inconsistent => f.write_str("inconsistent"),
            Verdict::Consistent { states, cycle, redundant } => {
                write!(f, "{states}/{}/{redundant}", if *cycle { "Y" } else { "N" })
            }
            Verdict::Timeout => f.write_str("timeout"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub name: String,
    pub visible: usize,
    pub time: Duration,
    pub verdict: Verdict,
}

/// Explores until the first inconsistent level; consistent models get the
/// full state count, cycle flag and redundancy count.
pub fn bench_model(model: &DoplerModel, time_limit: Duration, jobs: Option<usize>) -> BenchRow {
    let visible = model.decisions.iter().filter(|d| d.visibility != Expr::False).count();
    let clock = Instant::now();
    let verdict = match Model::dopler(model.clone()) {
        Err(e) => panic!("generated model does not translate: {e}"),
        Ok(m) => {
            let opts = ExploreOptions {
                jobs,
                deadline: Some(clock + time_limit),
                stop_at_first_inconsistency: true,
                ..Default::default()
            };
            match explore_with(m.spec(), &opts) {
                Err(ExploreError::Timeout { .. }) => Verdict::Timeout,
                Err(e) => panic!("exploration failed: {e}"),
                Ok(r) if r.inconsistent().next().is_some() => Verdict::Inconsistent,
                Ok(r) => {
                    let g = build_state_graph(&r, m.spec());
                    Verdict::Consistent {
                        states: g.len(),
                        cycle: find_cycles(&g, 1).exists,
                        redundant: check_redundancy(&g).len(),
                    }
                }
            }
        }
    };
    BenchRow {
        name: String::new(),
        visible,
        time: clock.elapsed(),
        verdict,
    }
}

pub fn bench_rows(vars: usize, count: u64, seed: u64, time_limit: Duration, jobs: Option<usize>) -> Result<Vec<BenchRow>, GenerateError> {
    let models = (0..count)
        .map(|i| Ok((model_name(i), DoplerModel::from_document(generate(vars, seed, i)?).expect("generated models validate"))))
        .collect::<Result<Vec<_>, GenerateError>>()?;
    let one = |(name, m): &(String, DoplerModel), jobs| BenchRow {
        name: name.clone(),
        ..bench_model(m, time_limit, jobs)
    };
    Ok(match jobs {
        // Models run in parallel, each exploration single-threaded.
        Some(n) if n > 1 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(|| models.par_iter().map(|m| one(m, Some(1))).collect()),
        _ => models.iter().map(|m| one(m, Some(1))).collect(),
    })
}

pub fn cmd_bench(cli: &Cli, vars: usize, count: u64, no_timings: bool) -> CmdResult {
    let rows = bench_rows(vars, count, cli.seed, Duration::from_secs_f64(cli.time_limit), cli.jobs.map(usize::from))?;
    let time = |r: &BenchRow| if no_timings { "-".to_string() } else { format!("{:.3}s", r.time.as_secs_f64()) };
    let inconsistent = rows.iter().filter(|r| r.verdict == Verdict::Inconsistent).count();
    let timeouts = rows.iter().filter(|r| r.verdict == Verdict::Timeout).count();
    let consistent = rows.len() - inconsistent - timeouts;
    let text = match cli.format {
        Format::Text => {
            let mut s = format!("{:<10} {:>7} {:>10}  result\n", "model", "visible", "time");
            for r in &rows {
                writeln!(s, "{:<10} {:>7} {:>10}  {}", r.name, r.visible, time(r), r.verdict).unwrap();
            }
            writeln!(
                s,
                "summary: {} models, {inconsistent} inconsistent, {consistent} consistent, {timeouts} timeouts",
                rows.len()
            )
            .unwrap();
            s
        }
        Format::Json => {
            let doc = json!({
                "version": 1,
                "vars": vars,
                "seed": cli.seed,
                "models": rows.iter().map(|r| json!({
                    "name": r.name,
                    "visible": r.visible,
                    "seconds": if no_timings { None } else { Some(r.time.as_secs_f64()) },
                    "result": r.verdict.to_string(),
                })).collect::<Vec<_>>(),
                "summary": {
                    "inconsistent": inconsistent,
                    "consistent": consistent,
                    "timeouts": timeouts,
                },
            });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
        Format::Dot => return Err(Failure("bench supports --format text or json".into())),
    };
    Ok((text, EXIT_CLEAN))
}

fn cmd_serve(cli: &Cli, addr: std::net::SocketAddr, ui: Option<PathBuf>, snapshots: Option<PathBuf>) -> CmdResult {
    let config = pidl_server::Config {
        analysis_time_limit: Duration::from_secs_f64(cli.time_limit),
        jobs: cli.jobs.map(usize::from),
        snapshot_dir: snapshots,
    };
    let state = pidl_server::AppState::restore(config)?;
    let app = pidl_server::router(Arc::clone(&state), ui.as_deref());
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(pidl_server::serve(addr, app))?;
    Ok((String::new(), EXIT_CLEAN))
}
