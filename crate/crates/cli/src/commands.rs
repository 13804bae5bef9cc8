use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::ValueEnum;
use serde::Serialize;

use joinorder_core::costlab::{
    check_equivalence, execute_order, generate_dataset, generate_query, load_dataset, optimal_order,
    write_dataset, Database, ExecError, ExecOptions, GeneratorConfig, OptimalOptions, Topology,
};
use joinorder_core::planner::JoinOrder;
use joinorder_core::rewriter::{rewrite, EngineProfile, RewriteMode};
use joinorder_core::{
    build_join_graph, load_catalog, parse_query, simpli2_order, size_order, Catalog, Direction, JoinGraph,
    QueryModel,
};

use crate::error::{Classify, CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Simpli2,
    SizeAsc,
    SizeDesc,
}

impl Algo {
    pub fn order(self, g: &JoinGraph, avoid_cartesian: bool) -> JoinOrder {
        match self {
            Algo::Simpli2 => simpli2_order(g),
            Algo::SizeAsc => size_order(g, Direction::Ascending, avoid_cartesian),
            Algo::SizeDesc => size_order(g, Direction::Descending, avoid_cartesian),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Subquery,
    Leftdeep,
}

impl From<ModeArg> for RewriteMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Subquery => RewriteMode::Subquery,
            ModeArg::Leftdeep => RewriteMode::Leftdeep,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    Generic,
    PostgresCompatible,
}

impl From<TargetArg> for EngineProfile {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::Generic => EngineProfile::Generic,
            TargetArg::PostgresCompatible => EngineProfile::PostgresCompatible,
        }
    }
}

/// Catalog, parsed query and join graph, all failures being input errors.
pub struct Loaded {
    pub catalog: Catalog,
    pub query: QueryModel,
    pub graph: JoinGraph,
}

pub fn load(schema: &Path, query: &Path, transitive: bool) -> CliResult<Loaded> {
    let catalog = load_catalog(schema)
        .with_context(|| format!("loading catalog {}", schema.display()))
        .input()?;
    let sql = fs::read_to_string(query)
        .with_context(|| format!("reading query {}", query.display()))
        .input()?;
    let (query, graph) = model(&catalog, &sql, transitive)
        .with_context(|| format!("in query {}", query.display()))
        .input()?;
    Ok(Loaded { catalog, query, graph })
}

fn model(catalog: &Catalog, sql: &str, transitive: bool) -> anyhow::Result<(QueryModel, JoinGraph)> {
    let q = parse_query(sql, catalog)?;
    let g = build_join_graph(&q, catalog, transitive)?;
    Ok((q, g))
}

pub fn plan(loaded: &Loaded, algo: Algo, avoid_cartesian: bool, json: bool) -> String {
    let order = algo.order(&loaded.graph, avoid_cartesian);
    if json {
        order.to_json() + "\n"
    } else {
        order.report()
    }
}

pub fn rewrite_cmd(loaded: &Loaded, algo: Algo, mode: ModeArg, target: TargetArg) -> CliResult<String> {
    let order = algo.order(&loaded.graph, true);
    let rw = rewrite(&loaded.query, &order, mode.into()).input()?.for_target(target.into());
    let mut out = String::new();
    for w in &rw.warnings {
        let _ = writeln!(out, "-- warning: {w}");
    }
    out.push_str(&rw.script());
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareRow {
    pub instance: String,
    pub algorithm: String,
    /// `ok`, `skipped` (beyond the search bound) or `guard` (row ceiling hit).
    pub status: String,
    pub sequence: Vec<String>,
    pub step_cardinalities: Vec<u64>,
    pub analytical_cost: Option<u64>,
    pub subquery_equivalent: Option<bool>,
    pub leftdeep_equivalent: Option<bool>,
    pub note: Option<String>,
}

pub struct CompareOptions {
    pub dp_bound: usize,
    pub exec: ExecOptions,
}

fn equivalent(db: &Database, q: &QueryModel, order: &JoinOrder, mode: RewriteMode, exec: &ExecOptions) -> (Option<bool>, Option<String>) {
    let rw = match rewrite(q, order, mode) {
        Ok(rw) => rw,
        Err(e) => return (None, Some(e.to_string())),
    };
    match check_equivalence(db, q, &rw, exec) {
        Ok(eq) => (Some(eq.equivalent), None),
        Err(e) => (None, Some(e.to_string())),
    }
}

fn row_for(
    instance: &str,
    db: &Database,
    q: &QueryModel,
    algorithm: &str,
    outcome: Result<JoinOrder, ExecError>,
    opts: &CompareOptions,
) -> CliResult<CompareRow> {
    let mut row = CompareRow {
        instance: instance.to_string(),
        algorithm: algorithm.to_string(),
        status: "ok".into(),
        sequence: Vec::new(),
        step_cardinalities: Vec::new(),
        analytical_cost: None,
        subquery_equivalent: None,
        leftdeep_equivalent: None,
        note: None,
    };
    let order = match outcome {
        Ok(o) => o,
        Err(ExecError::BoundExceeded { tables, bound }) => {
            row.status = "skipped".into();
            row.note = Some(format!("{tables} tables exceed the search bound {bound}"));
            return Ok(row);
        }
        Err(e @ (ExecError::RowCeiling { .. } | ExecError::NoValidOrder(_))) => {
            row.status = "guard".into();
            row.note = Some(e.to_string());
            return Ok(row);
        }
        Err(e) => return Err(CliError::input(e)),
    };
    row.sequence = order.sequence.clone();
    match execute_order(db, q, &order, &opts.exec) {
        Ok((_, report)) => {
            row.step_cardinalities = report.step_cardinalities;
            row.analytical_cost = Some(report.analytical_cost);
        }
        Err(e @ ExecError::RowCeiling { .. }) => {
            row.status = "guard".into();
            row.note = Some(e.to_string());
            return Ok(row);
        }
        Err(e) => return Err(CliError::input(e)),
    }
    let (sub, n1) = equivalent(db, q, &order, RewriteMode::Subquery, &opts.exec);
    let (left, n2) = equivalent(db, q, &order, RewriteMode::Leftdeep, &opts.exec);
    row.subquery_equivalent = sub;
    row.leftdeep_equivalent = left;
    row.note = n1.or(n2);
    Ok(row)
}

/// Heuristic orders, the Cartesian-free optimum and the unrestricted optimum
/// for one instance.
pub fn compare_instance(
    instance: &str,
    db: &Database,
    q: &QueryModel,
    g: &JoinGraph,
    opts: &CompareOptions,
) -> CliResult<Vec<CompareRow>> {
    let mut rows = Vec::new();
    for (name, algo) in [("simpli2", Algo::Simpli2), ("size-asc", Algo::SizeAsc), ("size-desc", Algo::SizeDesc)] {
        rows.push(row_for(instance, db, q, name, Ok(algo.order(g, false)), opts)?);
    }
    for (name, cartesian_allowed) in [("optimal", true), ("optimal-connected", false)] {
        let oo = OptimalOptions {
            dp_bound: opts.dp_bound,
            cartesian_allowed,
            exec: opts.exec,
        };
        let outcome = optimal_order(db, q, g, &oo).map(|r| r.order);
        rows.push(row_for(instance, db, q, name, outcome, opts)?);
    }
    Ok(rows)
}

pub fn load_data(dir: &Path) -> CliResult<Database> {
    load_dataset(dir)
        .with_context(|| format!("loading dataset {}", dir.display()))
        .input()
}

/// Instances `seed..seed + count`, each with its own dataset.
pub fn compare_generated(seed: u64, count: u64, cfg: &GeneratorConfig, opts: &CompareOptions) -> CliResult<Vec<CompareRow>> {
    let mut rows = Vec::new();
    for s in seed..seed + count {
        let gq = generate_query(s, cfg);
        let (q, g) = model(&gq.catalog, &gq.sql, false).input()?;
        let db = generate_dataset(&gq.catalog, data_seed(s), cfg);
        rows.extend(compare_instance(&format!("seed-{s}"), &db, &q, &g, opts)?);
    }
    Ok(rows)
}

/// Dataset seed paired with a query seed.
pub fn data_seed(seed: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17)
}

fn opt_text<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "-".to_string(), T::to_string)
}

pub fn render_compare(rows: &[CompareRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<12} {:<18} {:<8} {:>14} {:<9} {:<9} sequence / steps",
        "instance", "algorithm", "status", "cost", "subquery", "leftdeep"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<12} {:<18} {:<8} {:>14} {:<9} {:<9} {} / {:?}{}",
            r.instance,
            r.algorithm,
            r.status,
            opt_text(&r.analytical_cost),
            opt_text(&r.subquery_equivalent),
            opt_text(&r.leftdeep_equivalent),
            r.sequence.join(" "),
            r.step_cardinalities,
            r.note.as_ref().map(|n| format!("  ({n})")).unwrap_or_default()
        );
    }
    out
}

/// Rows whose rewrite disagreed with the original query.
pub fn inequivalent(rows: &[CompareRow]) -> Vec<&CompareRow> {
    rows.iter()
        .filter(|r| r.subquery_equivalent == Some(false) || r.leftdeep_equivalent == Some(false))
        .collect()
}

pub struct GenerateArgs {
    pub seed: u64,
    pub data_seed: Option<u64>,
    pub config: GeneratorConfig,
    pub out: PathBuf,
}

/// Writes `catalog.json`, `query.sql` and `data/<table>.csv` under `out`.
pub fn generate(args: &GenerateArgs) -> CliResult<String> {
    let gq = generate_query(args.seed, &args.config);
    let db = generate_dataset(&gq.catalog, args.data_seed.unwrap_or(data_seed(args.seed)), &args.config);
    let write = || -> anyhow::Result<()> {
        fs::create_dir_all(&args.out)?;
        fs::write(args.out.join("catalog.json"), gq.catalog.to_json_pretty() + "\n")?;
        fs::write(args.out.join("query.sql"), format!("{}\n", gq.sql))?;
        write_dataset(&db, args.out.join("data"))?;
        Ok(())
    };
    write()
        .with_context(|| format!("writing instance to {}", args.out.display()))
        .environment()?;
    Ok(format!(
        "seed {} ({}): wrote {} tables to {}\n",
        args.seed,
        args.config.topology,
        db.len(),
        args.out.display()
    ))
}

pub fn parse_topology(s: &str) -> Result<Topology, String> {
    s.parse()
}
