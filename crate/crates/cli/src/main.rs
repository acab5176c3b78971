mod report;
mod rows;
mod sweep;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pimdb_core::config::DramConfig;
use pimdb_core::denorm::{memory_overhead, rewrite_query, DenormLevel};
use pimdb_core::engine::run_query;
use pimdb_core::error::Error as CoreError;
use pimdb_core::query::fixtures::workload;
use pimdb_core::query::Query;
use pimdb_core::store::{open_store, save_store};
use pimdb_core::store::ssb::{generate_ssb, ssb_schema};
use pimdb_core::store::Database;
use pimdb_core::timing::{PimLevel, PimLevelSpec, Placement};
use serde::{Deserialize, Serialize};

use crate::rows::{report_rows, to_csv_string, Key, Row};
use crate::sweep::{prepare, run_sweep, SweepSpec};

const STORE_FILE: &str = "ssb.store";
const MANIFEST_FILE: &str = "manifest.json";

#[derive(Parser)]
#[command(name = "pimdb", version, about = "PIM filtering simulator and columnar query engine")]
struct Cli {
    /// DRAM/cost configuration JSON; the bundled default otherwise.
    /// Fields can be overridden with PIMDB_CFG__<FIELD>[__<SUBFIELD>] variables.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate an SSB store.
    Gen {
        #[arg(long)]
        sf: f64,
    },
    /// Analyze a workload at a denormalization level and build the wide table.
    Denorm {
        #[arg(long)]
        level: DenormLevel,
        #[arg(long, default_value = "ssb")]
        workload: String,
        /// Directory written by `gen`; without it only the plan is emitted.
        #[arg(long)]
        store: Option<PathBuf>,
    },
    /// Execute one query.
    Run {
        #[arg(long)]
        store: PathBuf,
        /// Fixture query name (e.g. q1.1) or path to a query JSON file.
        #[arg(long)]
        query: String,
        #[arg(long, default_value = "D1")]
        denorm: DenormLevel,
        #[command(flatten)]
        pim: PimArgs,
    },
    /// Run an experiment grid.
    Sweep {
        /// Sweep specification JSON; defaults cover SSB at SF 0.01.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Use a generated store instead of generating per scale factor.
        #[arg(long)]
        store: Option<PathBuf>,
    },
    /// Summarize a sweep result matrix.
    Report {
        /// `sweep.json` or the directory containing it.
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Args)]
struct PimArgs {
    #[arg(long, default_value = "bank_ab")]
    level: PimLevel,
    #[arg(long, default_value_t = 1)]
    salp: u32,
    #[arg(long, default_value = "optimistic")]
    placement: Placement,
}

impl PimArgs {
    fn spec(&self, cfg: &DramConfig) -> Result<PimLevelSpec> {
        Ok(PimLevelSpec { level: self.level, salp: self.salp, placement: self.placement }.validate(cfg)?)
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0}")]
    Usage(String),
    #[error("{failed} grid point(s) failed; see error rows in the output")]
    Partial { failed: usize },
}

impl CliError {
    fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Usage(_) => "usage",
            CliError::Partial { .. } => "partial_sweep",
        }
    }

    fn exit(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_validation() => 2,
            CliError::Usage(_) => 2,
            CliError::Partial { .. } => 3,
            CliError::Core(_) => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    scale_factor: f64,
    seed: u64,
    tables: Vec<(String, usize)>,
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| CoreError::io(path, e).into())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CoreError::io(path, e).into())
}

fn mkdir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| CoreError::io(path, e).into())
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn load_config(path: &Option<PathBuf>) -> Result<DramConfig> {
    Ok(match path {
        Some(p) => DramConfig::load(p)?,
        None => DramConfig::from_env_default()?,
    })
}

fn open_generated(dir: &Path) -> Result<(Manifest, Database)> {
    let manifest: Manifest =
        serde_json::from_str(&read(&dir.join(MANIFEST_FILE))?).map_err(CoreError::from)?;
    let db = open_store(&dir.join(STORE_FILE))?;
    if db.manifest() != manifest.tables {
        return Err(CoreError::Format(format!("store in {} does not match its manifest", dir.display())).into());
    }
    Ok((manifest, db))
}

fn workload_or_err(name: &str) -> Result<Vec<Query>> {
    workload(name).ok_or_else(|| CliError::Usage(format!("unknown workload {name:?}; expected ssb or tpch")))
}

fn cmd_gen(sf: f64, seed: u64, out: &Path) -> Result<()> {
    let db = generate_ssb(sf, seed)?;
    mkdir(out)?;
    save_store(&db, &out.join(STORE_FILE))?;
    let manifest = Manifest { scale_factor: sf, seed, tables: db.manifest() };
    write(&out.join(MANIFEST_FILE), json(&manifest))?;
    // Self-check: the written store reopens with the same row counts.
    open_generated(out)?;
    println!("{}", json(&manifest).trim_end());
    Ok(())
}

fn cmd_denorm(level: DenormLevel, name: &str, store: Option<&Path>, out: &Path) -> Result<()> {
    let queries = workload_or_err(name)?;
    let db = store.map(open_generated).transpose()?.map(|(_, db)| db);
    let schema = match (&db, name) {
        (Some(db), _) => db.schema().clone(),
        (None, "tpch") => pimdb_core::query::fixtures::tpch_schema(),
        (None, _) => ssb_schema(),
    };
    let plan = pimdb_core::denorm::analyze_workload(&queries, &schema, level)?;
    mkdir(&out.join("queries"))?;
    write(&out.join("plan.json"), json(&plan))?;
    for q in &queries {
        write(&out.join("queries").join(format!("{}.json", q.name)), json(&rewrite_query(q, &plan, &schema)?))?;
    }
    let mut summary = serde_json::json!({
        "level": level,
        "folded_columns": plan.folds.len(),
        "residual_joins": plan.residual_joins.values().map(Vec::len).sum::<usize>(),
    });
    if let Some(db) = db {
        let wide = pimdb_core::denorm::build_widetable(&db, &plan)?;
        save_store(&wide, &out.join(format!("wide_{level}.store")))?;
        summary["memory_overhead"] = memory_overhead(&db, &wide).into();
    }
    println!("{summary}");
    Ok(())
}

fn load_query(arg: &str) -> Result<(Query, Vec<Query>)> {
    let fixtures = workload_or_err("ssb")?;
    if let Some(q) = fixtures.iter().find(|q| q.name == arg) {
        return Ok((q.clone(), fixtures));
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(CliError::Usage(format!("{arg:?} is neither a fixture query nor a file")));
    }
    let q = Query::from_json(&read(path)?)?;
    let mut all = fixtures;
    all.push(q.clone());
    Ok((q, all))
}

fn cmd_run(cfg: &DramConfig, store: &Path, query: &str, denorm: DenormLevel, pim: &PimArgs, out: &Path) -> Result<()> {
    let spec = pim.spec(cfg)?;
    let (manifest, db) = open_generated(store)?;
    let (q, all) = load_query(query)?;
    let prep = prepare(&db, &all, denorm)?;
    let rq = rewrite_query(&q, &prep.plan, db.schema())?;
    let report = run_query(&rq, &prep.wide, spec, cfg)?;
    let key = Key::new(&manifest.scale_factor.to_string(), &denorm.to_string(), Some(&spec));
    let rows = report_rows(&key, &report, cfg)?;
    mkdir(out)?;
    write(&out.join("result.csv"), report.result.to_csv())?;
    write(&out.join("metrics.csv"), to_csv_string(&rows))?;
    let cost = pimdb_core::cost::cost_report(&report, cfg)?;
    write(&out.join("report.json"), json(&serde_json::json!({ "execution": report, "cost": cost })))?;
    print!("{}", report.result.to_csv());
    Ok(())
}

fn cmd_sweep(cfg: &DramConfig, spec: Option<&Path>, store: Option<&Path>, seed: u64, out: &Path) -> Result<()> {
    let spec: SweepSpec = match spec {
        Some(p) => serde_json::from_str(&read(p)?).map_err(CoreError::from)?,
        None => SweepSpec::default(),
    };
    let mut spec = spec.validate(cfg)?;
    let sources = match store {
        Some(dir) => {
            let (m, db) = open_generated(dir)?;
            spec.scale_factors = vec![m.scale_factor];
            vec![(m.scale_factor.to_string(), db)]
        }
        None => spec
            .scale_factors
            .iter()
            .map(|&sf| Ok((sf.to_string(), generate_ssb(sf, seed)?)))
            .collect::<Result<Vec<_>>>()?,
    };
    let res = run_sweep(&spec, &sources, cfg, seed)?;
    mkdir(out)?;
    write(&out.join("sweep.csv"), to_csv_string(&res.rows))?;
    write(&out.join("sweep.json"), json(&res.rows))?;
    eprintln!("{} rows, {} failures", res.rows.len(), res.failures);
    if res.failures > 0 {
        return Err(CliError::Partial { failed: res.failures });
    }
    Ok(())
}

fn cmd_report(input: &Path, out: &Path) -> Result<()> {
    let path = if input.is_dir() { input.join("sweep.json") } else { input.to_path_buf() };
    let rows: Vec<Row> = serde_json::from_str(&read(&path)?).map_err(CoreError::from)?;
    let t = report::build(&rows)?;
    mkdir(out)?;
    write(&out.join("speedup_vs_selectivity.csv"), &t.speedup_vs_selectivity)?;
    write(&out.join("operator_breakdown.csv"), &t.operator_breakdown)?;
    write(&out.join("memory_overhead.csv"), &t.memory_overhead)?;
    write(&out.join("area_overhead.csv"), &t.area_overhead)?;
    write(&out.join("summary.json"), json(&t.summary))?;
    println!("{} points, {} errors", t.summary.points, t.summary.errors);
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    let out = &cli.out;
    match &cli.cmd {
        Cmd::Gen { sf } => cmd_gen(*sf, cli.seed, out),
        Cmd::Denorm { level, workload, store } => cmd_denorm(*level, workload, store.as_deref(), out),
        Cmd::Run { store, query, denorm, pim } => cmd_run(&load_config(&cli.config)?, store, query, *denorm, pim, out),
        Cmd::Sweep { spec, store } => {
            cmd_sweep(&load_config(&cli.config)?, spec.as_deref(), store.as_deref(), cli.seed, out)
        }
        Cmd::Report { input } => cmd_report(input, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "error": e.code(), "message": e.to_string() }));
            ExitCode::from(e.exit())
        }
    }
}
