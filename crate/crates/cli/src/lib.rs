//! Command-line front end for the join-ordering toolkit.

pub mod bench;
pub mod commands;
pub mod error;
pub mod extract;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use joinorder_core::costlab::{ExecOptions, GeneratorConfig, Topology, DEFAULT_DP_BOUND, DEFAULT_ROW_CEILING};
use joinorder_core::rewriter::EngineProfile;

use bench::{BenchConfig, BenchQuery, Mode, PgRunner};
use commands::{Algo, CompareOptions, GenerateArgs, ModeArg, TargetArg};
use error::{Classify, CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "joinorder", version, about = "Statistics-free join ordering and query rewriting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct QueryInput {
    /// Catalog JSON file (tables, row counts, keys, foreign keys).
    #[arg(long)]
    pub schema: PathBuf,
    /// File holding one SELECT query.
    #[arg(long)]
    pub query: PathBuf,
    /// Add edges implied by chains of column equalities.
    #[arg(long)]
    pub transitive: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the join order for a query.
    Plan {
        #[command(flatten)]
        input: QueryInput,
        #[arg(long, value_enum, default_value_t = Algo::Simpli2)]
        algo: Algo,
        /// For size orders: prefer the next table that joins the prefix.
        #[arg(long)]
        avoid_cartesian: bool,
        #[arg(long)]
        json: bool,
    },
    /// Print SQL that pins the join order, preceded by the session prologue.
    Rewrite {
        #[command(flatten)]
        input: QueryInput,
        #[arg(long, value_enum, default_value_t = ModeArg::Subquery)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = TargetArg::PostgresCompatible)]
        target: TargetArg,
        #[arg(long, value_enum, default_value_t = Algo::Simpli2)]
        algo: Algo,
    },
    /// Measure exact intermediate result sizes of each order on CSV data.
    Compare(CompareArgs),
    /// Write a seeded random catalog, query and dataset.
    Generate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Dataset seed; derived from --seed when absent.
        #[arg(long)]
        data_seed: Option<u64>,
        #[arg(long, default_value = "multi-fact", value_parser = commands::parse_topology)]
        topology: Topology,
        /// Maximum rows per table.
        #[arg(long, default_value_t = 500)]
        rows: u64,
        /// Maximum table instances in the query.
        #[arg(long, default_value_t = 6)]
        tables: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time each query form on a live PostgreSQL database.
    Bench {
        #[arg(long)]
        schema: PathBuf,
        /// Directory of `.sql` files.
        #[arg(long)]
        queries: PathBuf,
        /// Connection URL.
        #[arg(long, env = "DB_URL", hide_env_values = true)]
        db_url: String,
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
        runs: u64,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Mode::Original, Mode::Subquery, Mode::Leftdeep, Mode::SizeDesc])]
        modes: Vec<Mode>,
        /// Per-query timeout in seconds.
        #[arg(long)]
        timeout: Option<u64>,
        /// Label copied into every report row.
        #[arg(long, default_value = "default")]
        variant: String,
        /// Report file (CSV); standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a catalog file from a live database.
    ExtractCatalog {
        #[arg(long, env = "DB_URL", hide_env_values = true)]
        db_url: String,
        #[arg(long, default_value = "public")]
        db_schema: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long, requires_all = ["query", "data_dir"], conflicts_with = "generated")]
    pub schema: Option<PathBuf>,
    #[arg(long)]
    pub query: Option<PathBuf>,
    /// Directory of `<table>.csv` files.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Compare this many generated instances instead of given files.
    #[arg(long)]
    pub generated: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "multi-fact", value_parser = commands::parse_topology)]
    pub topology: Topology,
    #[arg(long, default_value_t = 500)]
    pub rows: u64,
    #[arg(long, default_value_t = 6)]
    pub tables: usize,
    /// Largest table count for the exact optimum.
    #[arg(long, default_value_t = DEFAULT_DP_BOUND)]
    pub dp_bound: usize,
    /// Largest intermediate result any join step may produce.
    #[arg(long, default_value_t = DEFAULT_ROW_CEILING)]
    pub row_ceiling: u64,
    #[arg(long)]
    pub json: bool,
}

fn run_compare(args: &CompareArgs) -> CliResult<String> {
    let opts = CompareOptions {
        dp_bound: args.dp_bound,
        exec: ExecOptions {
            row_ceiling: args.row_ceiling,
        },
    };
    let rows = match (&args.schema, &args.query, &args.data_dir, args.generated) {
        (Some(schema), Some(query), Some(data), None) => {
            let loaded = commands::load(schema, query, false)?;
            let db = commands::load_data(data)?;
            let name = query.file_stem().and_then(|s| s.to_str()).unwrap_or("query");
            commands::compare_instance(name, &db, &loaded.query, &loaded.graph, &opts)?
        }
        (None, None, None, Some(count)) => {
            let cfg = GeneratorConfig {
                topology: args.topology,
                max_rows: args.rows,
                max_tables: args.tables,
                ..GeneratorConfig::default()
            };
            commands::compare_generated(args.seed, count, &cfg, &opts)?
        }
        _ => {
            return Err(CliError::input(anyhow::anyhow!(
                "compare needs either --schema, --query and --data-dir, or --generated"
            )))
        }
    };
    let bad = commands::inequivalent(&rows);
    for r in &bad {
        eprintln!("warning: rewrite of {} for {} is not equivalent to the original", r.algorithm, r.instance);
    }
    if args.json {
        Ok(serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n")
    } else {
        Ok(commands::render_compare(&rows))
    }
}

fn load_bench_queries(schema: &Path, dir: &Path) -> CliResult<Vec<BenchQuery>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))
        .input()?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("sql"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::input(anyhow::anyhow!("no .sql files in {}", dir.display())));
    }
    files
        .iter()
        .map(|path| {
            let loaded = commands::load(schema, path, false)?;
            let text = fs::read_to_string(path).input()?;
            Ok(BenchQuery {
                name: path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string(),
                sql: text.trim().trim_end_matches(';').trim_end().to_string(),
                model: loaded.query,
                graph: loaded.graph,
            })
        })
        .collect()
}

fn dispatch(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::Plan {
            input,
            algo,
            avoid_cartesian,
            json,
        } => {
            let loaded = commands::load(&input.schema, &input.query, input.transitive)?;
            Ok(commands::plan(&loaded, algo, avoid_cartesian, json))
        }
        Command::Rewrite {
            input,
            mode,
            target,
            algo,
        } => {
            let loaded = commands::load(&input.schema, &input.query, input.transitive)?;
            commands::rewrite_cmd(&loaded, algo, mode, target)
        }
        Command::Compare(args) => run_compare(&args),
        Command::Generate {
            seed,
            data_seed,
            topology,
            rows,
            tables,
            out,
        } => commands::generate(&GenerateArgs {
            seed,
            data_seed,
            config: GeneratorConfig {
                topology,
                max_rows: rows,
                max_tables: tables,
                ..GeneratorConfig::default()
            },
            out,
        }),
        Command::Bench {
            schema,
            queries,
            db_url,
            runs,
            modes,
            timeout,
            variant,
            out,
        } => {
            let queries = load_bench_queries(&schema, &queries)?;
            let cfg = BenchConfig {
                runs: runs as usize,
                modes,
                timeout: timeout.map(Duration::from_secs),
                target: EngineProfile::PostgresCompatible,
                variant,
            };
            let mut runner = PgRunner::connect(&db_url).context("connecting to the database").environment()?;
            let cells = bench::bench(&mut runner, &queries, &cfg)
                .map_err(|e| anyhow::anyhow!("session setup failed: {e:?}"))
                .environment()?;
            for c in &cells {
                for w in &c.warnings {
                    eprintln!("warning: {} [{}]: {w}", c.query, c.mode.name());
                }
            }
            let report = bench::report_csv(&cells);
            match out {
                Some(path) => {
                    fs::write(&path, &report)
                        .with_context(|| format!("writing {}", path.display()))
                        .environment()?;
                    Ok(format!("wrote {} rows to {}\n", cells.len(), path.display()))
                }
                None => Ok(report),
            }
        }
        Command::ExtractCatalog { db_url, db_schema, out } => {
            let mut runner = PgRunner::connect(&db_url).context("connecting to the database").environment()?;
            let raw = extract::fetch_schema(runner.client(), &db_schema)
                .context("reading the information schema")
                .environment()?;
            let (catalog, warnings) = extract::assemble_catalog(&raw).input()?;
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            fs::write(&out, catalog.to_json_pretty() + "\n")
                .with_context(|| format!("writing {}", out.display()))
                .environment()?;
            Ok(format!("wrote {} tables to {}\n", catalog.table_count(), out.display()))
        }
    }
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn run<'a, I, T>(args: I, out: &'a mut dyn Write, err: &'a mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let sink = if code == 0 { out } else { err };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli) {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
