//! Benchmark driver against a scripted in-memory session.

use std::collections::{HashMap, VecDeque};
use std::time::Duration;

use joinorder_cli::bench::{bench, median, report_csv, BenchConfig, BenchQuery, Mode, QueryRunner, RunError, Status};
use joinorder_core::rewriter::EngineProfile;
use joinorder_core::{build_join_graph, load_catalog, parse_query};

#[derive(Default)]
struct FakeSession {
    log: Vec<String>,
    settings: HashMap<String, String>,
    /// Durations handed out per run, in order; 1 ms once exhausted.
    timings: VecDeque<u64>,
    /// Rows returned by statements containing the key.
    rows_by_marker: Vec<(String, u64)>,
    /// Statements containing this text time out.
    timeout_marker: Option<String>,
    /// Ignore SET statements, as a pooler might.
    drop_sets: bool,
}

impl QueryRunner for FakeSession {
    fn execute(&mut self, sql: &str) -> Result<(), RunError> {
        self.log.push(sql.to_string());
        let body = sql.trim_end_matches(';');
        if let Some(rest) = body.strip_prefix("SET ") {
            if !self.drop_sets {
                let (k, v) = rest.split_once('=').unwrap();
                self.settings.insert(k.trim().to_string(), v.trim().to_string());
            }
        } else if let Some(k) = body.strip_prefix("RESET ") {
            self.settings.insert(k.trim().to_string(), "8".to_string());
        }
        Ok(())
    }

    fn run(&mut self, sql: &str) -> Result<(u64, Duration), RunError> {
        self.log.push(sql.to_string());
        if self.timeout_marker.as_ref().is_some_and(|m| sql.contains(m.as_str())) {
            return Err(RunError::Timeout);
        }
        let rows = self
            .rows_by_marker
            .iter()
            .find(|(m, _)| sql.contains(m.as_str()))
            .map_or(1, |(_, r)| *r);
        Ok((rows, Duration::from_millis(self.timings.pop_front().unwrap_or(1))))
    }

    fn setting(&mut self, name: &str) -> Result<String, RunError> {
        Ok(self.settings.get(name).cloned().unwrap_or_else(|| "8".to_string()))
    }
}

fn job_query(name: &str) -> BenchQuery {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/job");
    let cat = load_catalog(dir.join("catalog.json")).unwrap();
    let sql = std::fs::read_to_string(dir.join("queries").join(format!("{name}.sql"))).unwrap();
    let model = parse_query(&sql, &cat).unwrap();
    let graph = build_join_graph(&model, &cat, false).unwrap();
    BenchQuery {
        name: name.to_string(),
        sql: sql.trim().trim_end_matches(';').to_string(),
        model,
        graph,
    }
}

fn config(modes: &[Mode]) -> BenchConfig {
    BenchConfig {
        runs: 5,
        modes: modes.to_vec(),
        timeout: None,
        target: EngineProfile::PostgresCompatible,
        variant: "with-fk".into(),
    }
}

#[test]
fn median_of_odd_and_even_samples() {
    assert_eq!(median(&[]), None);
    assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
    assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), Some(2.5));
}

#[test]
fn five_runs_reported_by_their_median() {
    let mut s = FakeSession {
        timings: [40, 10, 30, 50, 20].into(),
        ..Default::default()
    };
    let cells = bench(&mut s, &[job_query("1a")], &config(&[Mode::Subquery])).unwrap();
    assert_eq!(cells.len(), 1);
    let c = &cells[0];
    assert_eq!(c.status, Status::Ok);
    assert_eq!(c.runs_ms.len(), 5);
    assert!((c.median_ms.unwrap() - 30.0).abs() < 1e-6);
    assert_eq!(c.variant, "with-fk");
    assert!(c.warnings.is_empty(), "{:?}", c.warnings);
    assert!(c.planning_ms >= 0.0);
    // Planning happens once, outside the timed runs.
    assert_eq!(s.log.iter().filter(|l| l.contains("AS sq1")).count(), 5);
}

#[test]
fn original_mode_resets_and_rewritten_modes_pin_the_order() {
    let mut s = FakeSession::default();
    bench(&mut s, &[job_query("1a")], &config(&[Mode::Original, Mode::Leftdeep, Mode::Original])).unwrap();
    let setup: Vec<&str> = s
        .log
        .iter()
        .filter(|l| l.starts_with("SET") || l.starts_with("RESET"))
        .map(String::as_str)
        .collect();
    assert_eq!(
        setup,
        [
            "RESET from_collapse_limit",
            "RESET join_collapse_limit",
            "SET from_collapse_limit = 1",
            "SET join_collapse_limit = 1",
            "RESET from_collapse_limit",
            "RESET join_collapse_limit",
        ]
    );
}

#[test]
fn timeout_is_recorded_without_a_median() {
    let mut s = FakeSession {
        timeout_marker: Some("JOIN".into()),
        ..Default::default()
    };
    let mut cfg = config(&[Mode::Subquery, Mode::Leftdeep]);
    cfg.timeout = Some(Duration::from_secs(2));
    let cells = bench(&mut s, &[job_query("1a")], &cfg).unwrap();
    assert_eq!(s.log[0], "SET statement_timeout = 2000");
    assert_eq!(cells[0].status, Status::Ok);
    assert_eq!(cells[1].status, Status::Timeout);
    assert_eq!(cells[1].median_ms, None);
    // A timeout stops the remaining runs of that cell.
    assert!(cells[1].runs_ms.is_empty());
}

#[test]
fn differing_row_counts_are_flagged() {
    let mut s = FakeSession {
        rows_by_marker: vec![("JOIN".into(), 7)],
        ..Default::default()
    };
    let cells = bench(&mut s, &[job_query("6a")], &config(&[Mode::Original, Mode::Leftdeep])).unwrap();
    for c in &cells {
        assert!(c.warnings.iter().any(|w| w.contains("row count mismatch")), "{:?}", c.warnings);
    }
}

#[test]
fn ignored_settings_are_flagged() {
    let mut s = FakeSession {
        drop_sets: true,
        ..Default::default()
    };
    let cells = bench(&mut s, &[job_query("1a")], &config(&[Mode::Subquery])).unwrap();
    let w = &cells[0].warnings;
    assert!(w.iter().any(|w| w.contains("join_collapse_limit is 8")), "{w:?}");
}

#[test]
fn csv_report_has_one_row_per_cell() {
    let mut s = FakeSession::default();
    let modes = [Mode::Original, Mode::Subquery, Mode::Leftdeep, Mode::SizeDesc];
    let cells = bench(&mut s, &[job_query("1a"), job_query("18a")], &config(&modes)).unwrap();
    let csv = report_csv(&cells);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "variant,query,mode,status,median_ms,runs_ms,rows,planning_ms,warnings");
    assert_eq!(lines.len(), 1 + 8);
    assert!(lines[4].starts_with("with-fk,1a,size-desc,ok,1.000,"));
}
