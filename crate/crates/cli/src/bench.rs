//! Live-database benchmark: runs each query in several forms, `runs` times
//! each, on a single session and reports median execution times.

use std::time::{Duration, Instant};

use clap::ValueEnum;
use serde::Serialize;

use joinorder_core::rewriter::{render_settings, rewrite, EngineProfile, RewriteMode};
use joinorder_core::{simpli2_order, size_order, Direction, JoinGraph, QueryModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// The query as written, engine settings at their defaults.
    Original,
    /// Simpli-Squared order in nested-subquery form.
    Subquery,
    /// Simpli-Squared order as one explicit join chain.
    Leftdeep,
    /// Tables by decreasing size as one explicit join chain.
    SizeDesc,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Original => "original",
            Mode::Subquery => "subquery",
            Mode::Leftdeep => "leftdeep",
            Mode::SizeDesc => "size-desc",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub runs: usize,
    pub modes: Vec<Mode>,
    pub timeout: Option<Duration>,
    pub target: EngineProfile,
    /// Free-form label, e.g. whether the database declares its foreign keys.
    pub variant: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunError {
    Timeout,
    Failed(String),
}

/// Session against the database under test.
pub trait QueryRunner {
    /// Runs a statement whose result is ignored.
    fn execute(&mut self, sql: &str) -> Result<(), RunError>;
    /// Runs a query, returning its row count and execution wall time.
    fn run(&mut self, sql: &str) -> Result<(u64, Duration), RunError>;
    /// Current value of a session setting.
    fn setting(&mut self, name: &str) -> Result<String, RunError>;
}

pub struct BenchQuery {
    pub name: String,
    /// Query text as written, without a trailing semicolon.
    pub sql: String,
    pub model: QueryModel,
    pub graph: JoinGraph,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Timeout,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchCell {
    pub variant: String,
    pub query: String,
    pub mode: Mode,
    pub status: Status,
    pub median_ms: Option<f64>,
    pub runs_ms: Vec<f64>,
    pub rows: Option<u64>,
    /// Ordering plus rewriting time, never part of `runs_ms`.
    pub planning_ms: f64,
    pub warnings: Vec<String>,
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    })
}

fn reset_statements(target: EngineProfile) -> Vec<String> {
    match target {
        EngineProfile::Generic => Vec::new(),
        EngineProfile::PostgresCompatible => vec![
            "RESET from_collapse_limit".to_string(),
            "RESET join_collapse_limit".to_string(),
        ],
    }
}

/// SQL for `mode` and the time spent producing it.
pub fn prepare(q: &BenchQuery, mode: Mode) -> Result<(String, Duration), String> {
    let start = Instant::now();
    let sql = match mode {
        Mode::Original => return Ok((q.sql.clone(), Duration::ZERO)),
        Mode::Subquery => rewrite(&q.model, &simpli2_order(&q.graph), RewriteMode::Subquery),
        Mode::Leftdeep => rewrite(&q.model, &simpli2_order(&q.graph), RewriteMode::Leftdeep),
        Mode::SizeDesc => rewrite(
            &q.model,
            &size_order(&q.graph, Direction::Descending, false),
            RewriteMode::Leftdeep,
        ),
    }
    .map_err(|e| e.to_string())?
    .sql;
    Ok((sql, start.elapsed()))
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}

/// Sets up the session for `mode` and checks that the settings took.
fn configure(runner: &mut dyn QueryRunner, mode: Mode, target: EngineProfile) -> Result<Vec<String>, RunError> {
    let mut warnings = Vec::new();
    if mode == Mode::Original {
        for stmt in reset_statements(target) {
            runner.execute(&stmt)?;
        }
        return Ok(warnings);
    }
    for stmt in render_settings(target) {
        runner.execute(&stmt)?;
    }
    if target == EngineProfile::PostgresCompatible {
        for name in ["from_collapse_limit", "join_collapse_limit"] {
            let value = runner.setting(name)?;
            if value.trim() != "1" {
                warnings.push(format!("{name} is {value} after the prologue, expected 1"));
            }
        }
    }
    Ok(warnings)
}

fn run_cell(runner: &mut dyn QueryRunner, q: &BenchQuery, mode: Mode, cfg: &BenchConfig) -> BenchCell {
    let mut cell = BenchCell {
        variant: cfg.variant.clone(),
        query: q.name.clone(),
        mode,
        status: Status::Ok,
        median_ms: None,
        runs_ms: Vec::new(),
        rows: None,
        planning_ms: 0.0,
        warnings: Vec::new(),
    };
    let (sql, planning) = match prepare(q, mode) {
        Ok(p) => p,
        Err(e) => {
            cell.status = Status::Error;
            cell.warnings.push(e);
            return cell;
        }
    };
    cell.planning_ms = ms(planning);
    match configure(runner, mode, cfg.target) {
        Ok(w) => cell.warnings.extend(w),
        Err(e) => {
            cell.status = Status::Error;
            cell.warnings.push(format!("session setup failed: {e:?}"));
            return cell;
        }
    }
    for _ in 0..cfg.runs {
        match runner.run(&sql) {
            Ok((rows, took)) => {
                if cell.rows.is_some_and(|r| r != rows) {
                    cell.warnings.push(format!("row count changed between runs: {} vs {rows}", cell.rows.unwrap_or(0)));
                }
                cell.rows = Some(rows);
                cell.runs_ms.push(ms(took));
            }
            Err(RunError::Timeout) => {
                cell.status = Status::Timeout;
                break;
            }
            Err(RunError::Failed(e)) => {
                cell.status = Status::Error;
                cell.warnings.push(e);
                break;
            }
        }
    }
    if cell.status == Status::Ok {
        cell.median_ms = median(&cell.runs_ms);
    }
    cell
}

/// Runs every query in every mode, strictly one after another.
pub fn bench(runner: &mut dyn QueryRunner, queries: &[BenchQuery], cfg: &BenchConfig) -> Result<Vec<BenchCell>, RunError> {
    if let Some(t) = cfg.timeout {
        if cfg.target == EngineProfile::PostgresCompatible {
            runner.execute(&format!("SET statement_timeout = {}", t.as_millis()))?;
        }
    }
    let mut cells = Vec::new();
    for q in queries {
        let start = cells.len();
        for &mode in &cfg.modes {
            cells.push(run_cell(runner, q, mode, cfg));
        }
        flag_row_mismatch(&mut cells[start..]);
    }
    Ok(cells)
}

fn flag_row_mismatch(cells: &mut [BenchCell]) {
    let counts: Vec<(Mode, u64)> = cells
        .iter()
        .filter(|c| c.status == Status::Ok)
        .filter_map(|c| c.rows.map(|r| (c.mode, r)))
        .collect();
    if counts.windows(2).all(|w| w[0].1 == w[1].1) {
        return;
    }
    let detail = counts
        .iter()
        .map(|(m, r)| format!("{}={r}", m.name()))
        .collect::<Vec<_>>()
        .join(", ");
    for c in cells {
        c.warnings.push(format!("row count mismatch across modes: {detail}"));
    }
}

pub fn report_csv(cells: &[BenchCell]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "variant", "query", "mode", "status", "median_ms", "runs_ms", "rows", "planning_ms", "warnings",
    ])
    .expect("in-memory write");
    for c in cells {
        let runs = c.runs_ms.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join(";");
        w.write_record([
            c.variant.clone(),
            c.query.clone(),
            c.mode.name().to_string(),
            serde_json::to_value(c.status).expect("status").as_str().unwrap_or_default().to_string(),
            c.median_ms.map(|m| format!("{m:.3}")).unwrap_or_default(),
            runs,
            c.rows.map(|r| r.to_string()).unwrap_or_default(),
            format!("{:.3}", c.planning_ms),
            c.warnings.join(" | "),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

/// PostgreSQL session over the simple query protocol.
pub struct PgRunner {
    client: postgres::Client,
}

impl PgRunner {
    pub fn connect(url: &str) -> Result<Self, postgres::Error> {
        Ok(Self {
            client: postgres::Client::connect(url, postgres::NoTls)?,
        })
    }

    pub fn client(&mut self) -> &mut postgres::Client {
        &mut self.client
    }
}

fn classify(e: postgres::Error) -> RunError {
    if e.code() == Some(&postgres::error::SqlState::QUERY_CANCELED) {
        RunError::Timeout
    } else {
        RunError::Failed(e.to_string())
    }
}

impl QueryRunner for PgRunner {
    fn execute(&mut self, sql: &str) -> Result<(), RunError> {
        self.client.batch_execute(sql).map_err(classify)
    }

    fn run(&mut self, sql: &str) -> Result<(u64, Duration), RunError> {
        let start = Instant::now();
        let messages = self.client.simple_query(sql).map_err(classify)?;
        let took = start.elapsed();
        let rows = messages
            .iter()
            .filter(|m| matches!(m, postgres::SimpleQueryMessage::Row(_)))
            .count();
        Ok((rows as u64, took))
    }

    fn setting(&mut self, name: &str) -> Result<String, RunError> {
        let messages = self.client.simple_query(&format!("SHOW {name}")).map_err(classify)?;
        messages
            .iter()
            .find_map(|m| match m {
                postgres::SimpleQueryMessage::Row(r) => r.get(0).map(str::to_string),
                _ => None,
            })
            .ok_or_else(|| RunError::Failed(format!("SHOW {name} returned no row")))
    }
}
