use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use fhegen::costmodel::{advise, all_queries, AdvisorQuery, Family, OpMixKind};
use fhegen::emulator::{ContextConfig, Method, CONFIG_ENV};
use fhegen::exec::Execution;
use fhegen::report::{self, Format, ReportRow};
use fhegen::sweep::{self, AppInput, AppKind, AppSpec, BenchPlan};
use fhegen::workloads::WorkloadKind;
use fhegen::{apps, io, Error};

#[derive(Parser)]
#[command(name = "fhegen", version, about = "Cost-ledger benchmarks for exact comparison under FHE encodings")]
struct Cli {
    /// TOML config; defaults to $FHEGEN_CONFIG, then built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// json-lines, csv or markdown.
    #[arg(long, global = true, default_value = "json-lines")]
    format: String,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Run scenarios one at a time.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Mixed-operation workloads.
    Bench(BenchArgs),
    /// End-to-end applications.
    App(AppArgs),
    /// Method recommendation for an operation profile.
    Advise(AdviseArgs),
    /// Re-render a JSON-lines or CSV report.
    Report(ReportArgs),
}

#[derive(Args)]
struct BenchArgs {
    /// w1, w2, w3 or all (comma-separated).
    #[arg(long, default_value = "all")]
    workload: String,
    /// tfhe, scheme, encoding or all (comma-separated).
    #[arg(long, default_value = "all")]
    method: String,
    #[arg(long, default_value = "6,8,12,16", value_delimiter = ',')]
    bits: Vec<u32>,
    #[arg(long, default_value_t = 100)]
    slots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seeds per combination: seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    repeat: u64,
}

#[derive(Args)]
struct AppArgs {
    /// floyd, tree, sort or db.
    app: String,
    /// Nodes, depth, length or rows (comma-separated).
    #[arg(long, alias = "nodes", alias = "depth", alias = "len", alias = "rows", value_delimiter = ',')]
    size: Vec<usize>,
    #[arg(long, default_value = "all")]
    method: String,
    #[arg(long, default_value = "8", value_delimiter = ',')]
    bits: Vec<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    repeat: u64,
    /// Edge list (floyd), level-order tree (tree), CSV table (db) or
    /// whitespace-separated values (sort).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Feature values for a tree given with --input.
    #[arg(long, value_delimiter = ',')]
    features: Vec<u64>,
}

#[derive(Args)]
struct AdviseArgs {
    /// linear, nonlinear or mixed.
    #[arg(long)]
    ops: Option<String>,
    #[arg(long)]
    simd: bool,
    #[arg(long)]
    exact: bool,
    /// Print the whole decision table.
    #[arg(long)]
    all: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// JSON-lines or CSV report (by extension).
    input: PathBuf,
}

/// Failure classes mapped to exit codes.
enum Fail {
    Usage(String),
    Oracle(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Usage(e.to_string())
    }
}

fn list<T>(s: &str, all: &[T], parse: impl Fn(&str) -> Result<T, Error>) -> Result<Vec<T>, Fail>
where
    T: Copy,
{
    if s == "all" {
        return Ok(all.to_vec());
    }
    s.split(',').map(|t| parse(t.trim()).map_err(Fail::from)).collect()
}

fn load_config(path: Option<&Path>) -> Result<ContextConfig, Fail> {
    match path {
        Some(p) => Ok(ContextConfig::load(p)?),
        None => ContextConfig::from_env().map_err(|e| Fail::Usage(format!("{CONFIG_ENV}: {e}"))),
    }
}

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))
}

fn exec(cli: &Cli) -> Execution {
    if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn bench(cli: &Cli, a: &BenchArgs, cfg: &ContextConfig) -> Result<Vec<ReportRow>, Fail> {
    let plan = BenchPlan {
        workloads: list(&a.workload, &WorkloadKind::ALL, str::parse)?,
        methods: list(&a.method, &Method::ALL, str::parse)?,
        bits: a.bits.clone(),
        slots: a.slots,
        seed: a.seed,
        repeat: a.repeat,
    };
    let specs = plan.expand();
    for s in &specs {
        s.validate()?;
    }
    sweep::run_workloads(&specs, cfg, exec(cli)).map_err(|e| Fail::Oracle(e.to_string()))
}

fn app_input(kind: AppKind, path: &Path, features: &[u64], bits: u32) -> Result<AppInput, Fail> {
    let text = read(path)?;
    Ok(match kind {
        AppKind::Floyd => AppInput::Graph(io::parse_edge_list(&text)?),
        AppKind::Tree => {
            let tree = io::parse_tree(&text)?;
            if features.len() < tree.feature_count() {
                return Err(Fail::Usage(format!("tree reads {} features; pass --features", tree.feature_count())));
            }
            AppInput::Tree { tree, features: features.to_vec() }
        }
        AppKind::Sort => AppInput::Array(
            text.split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| t.parse().map_err(|_| Fail::Usage(format!("'{t}' is not a non-negative integer"))))
                .collect::<Result<_, _>>()?,
        ),
        AppKind::Db => AppInput::Table { table: io::parse_table_csv(&text)?, query: apps::employee_query(bits) },
    })
}

fn app(cli: &Cli, a: &AppArgs, cfg: &ContextConfig) -> Result<Vec<ReportRow>, Fail> {
    let kind: AppKind = a.app.parse()?;
    let methods = list(&a.method, &Method::ALL, str::parse)?;
    let Some(path) = &a.input else {
        if a.size.is_empty() {
            return Err(Fail::Usage(format!("{kind} needs --size (or --input)")));
        }
        let specs = sweep::expand_apps(kind, &methods, &a.bits, &a.size, a.seed, a.repeat);
        return sweep::run_apps(&specs, cfg, exec(cli)).map_err(|e| Fail::Oracle(e.to_string()));
    };
    let mut rows = Vec::new();
    for rep in 0..a.repeat {
        for &method in &methods {
            for &bits in &a.bits {
                let input = app_input(kind, path, &a.features, bits)?;
                let spec = AppSpec { app: kind, size: input.size(), method, bits, seed: a.seed + rep };
                let run = sweep::run_app(&spec, cfg, Some(input))
                    .map_err(|e| Fail::Oracle(format!("{}: {e}", spec.scenario_id())))?;
                rows.push(sweep::app_row(&run)?);
            }
        }
    }
    rows.sort_by(|x, y| x.scenario.cmp(&y.scenario));
    Ok(rows)
}

#[derive(Serialize)]
struct AdviceRow {
    op_mix: OpMixKind,
    simd_useful: bool,
    exact_required: bool,
    family: Family,
    recommendation: String,
}

fn advice(a: &AdviseArgs, format: Format) -> Result<Vec<u8>, Fail> {
    let queries = if a.all {
        all_queries()
    } else {
        let ops: OpMixKind = a
            .ops
            .as_deref()
            .ok_or_else(|| Fail::Usage("advise needs --ops or --all".into()))?
            .parse()?;
        vec![AdvisorQuery { op_mix: ops, simd_useful: a.simd, exact_required: a.exact }]
    };
    let rows: Vec<AdviceRow> = queries
        .into_iter()
        .map(|q| {
            let r = advise(q);
            AdviceRow {
                op_mix: q.op_mix,
                simd_useful: q.simd_useful,
                exact_required: q.exact_required,
                family: r.family,
                recommendation: r.text,
            }
        })
        .collect();
    match format {
        Format::JsonLines => {
            let mut out = Vec::new();
            for r in &rows {
                serde_json::to_writer(&mut out, r).map_err(|e| Fail::Usage(e.to_string()))?;
                out.push(b'\n');
            }
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &rows {
                w.serialize(r).map_err(|e| Fail::Usage(e.to_string()))?;
            }
            w.into_inner().map_err(|e| Fail::Usage(e.to_string()))
        }
        Format::Markdown => {
            let mut s = String::from("| ops | simd | exact | recommendation |\n|---|---|---|---|\n");
            for r in &rows {
                let ops = serde_json::to_value(r.op_mix).map_err(|e| Fail::Usage(e.to_string()))?;
                s += &format!(
                    "| {} | {} | {} | {} |\n",
                    ops.as_str().unwrap_or_default(),
                    r.simd_useful,
                    r.exact_required,
                    r.recommendation
                );
            }
            Ok(s.into_bytes())
        }
    }
}

fn rerender(a: &ReportArgs, format: Format) -> Result<Vec<u8>, Fail> {
    let text = read(&a.input)?;
    let rows = match a.input.extension().and_then(|e| e.to_str()) {
        Some("csv") => report::parse_csv(&text)?,
        _ => report::parse_json_lines(&text)?,
    };
    Ok(report::render(&rows, format)?)
}

fn run(cli: &Cli) -> Result<(Vec<u8>, Option<String>), Fail> {
    let format: Format = cli.format.parse()?;
    let cfg = load_config(cli.config.as_deref())?;
    let rows = match &cli.cmd {
        Cmd::Bench(a) => bench(cli, a, &cfg)?,
        Cmd::App(a) => app(cli, a, &cfg)?,
        Cmd::Advise(a) => return Ok((advice(a, format)?, None)),
        Cmd::Report(a) => return Ok((rerender(a, format)?, None)),
    };
    let failed = sweep::first_failure(&rows).map(str::to_string);
    Ok((report::render(&rows, format)?, failed))
}

fn emit(cli: &Cli, bytes: &[u8]) -> std::io::Result<()> {
    match &cli.output {
        Some(p) => fs::write(p, bytes),
        None => std::io::stdout().lock().write_all(bytes),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((bytes, failed)) => {
            if let Err(e) = emit(&cli, &bytes) {
                eprintln!("fhegen: {e}");
                return ExitCode::from(2);
            }
            match failed {
                Some(s) => {
                    eprintln!("fhegen: oracle mismatch in {s}");
                    ExitCode::from(1)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(Fail::Usage(m)) => {
            eprintln!("fhegen: {m}");
            ExitCode::from(2)
        }
        Err(Fail::Oracle(m)) => {
            eprintln!("fhegen: scenario failed: {m}");
            ExitCode::from(1)
        }
    }
}
