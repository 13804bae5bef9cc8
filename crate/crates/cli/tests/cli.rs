use std::path::{Path, PathBuf};
use std::process::Command;

fn job_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/job")
}

fn catalog() -> String {
    job_dir().join("catalog.json").display().to_string()
}

fn query(name: &str) -> String {
    job_dir().join("queries").join(name).display().to_string()
}

/// Runs the library entry point; returns (exit code, stdout, stderr).
fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["joinorder"];
    argv.extend_from_slice(args);
    let code = joinorder_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_query(dir: &Path, sql: &str) -> String {
    let p = dir.join("q.sql");
    std::fs::write(&p, sql).unwrap();
    p.display().to_string()
}

#[test]
fn plan_prints_the_18a_order() {
    let (code, out, err) = run(&["plan", "--schema", &catalog(), "--query", &query("18a.sql")]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("sequence: mi_idx -> it2 -> t -> mi -> it1 -> ci -> n"), "{out}");
    assert!(out.contains("1: [mi_idx, it2, t]"));
    assert!(out.contains("2: [mi, it1]"));
    assert!(out.contains("3: [ci, n]"));
}

#[test]
fn plan_json_is_machine_readable() {
    let (code, out, _) = run(&["plan", "--schema", &catalog(), "--query", &query("18a.sql"), "--json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let seq: Vec<&str> = v["sequence"].as_array().unwrap().iter().map(|s| s.as_str().unwrap()).collect();
    assert_eq!(seq, ["mi_idx", "it2", "t", "mi", "it1", "ci", "n"]);
}

#[test]
fn size_desc_starts_with_the_largest_table() {
    let (code, out, _) = run(&["plan", "--schema", &catalog(), "--query", &query("18a.sql"), "--algo", "size-desc"]);
    assert_eq!(code, 0);
    // cast_info is the largest table in the catalog.
    assert!(out.contains("sequence: ci ->"), "{out}");
}

#[test]
fn malformed_query_exits_with_input_status() {
    let dir = tempfile::tempdir().unwrap();
    let q = write_query(dir.path(), "SELECT FROM WHERE");
    let (code, out, err) = run(&["plan", "--schema", &catalog(), "--query", &q]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("syntax error"), "{err}");
}

#[test]
fn unknown_table_exits_with_input_status() {
    let dir = tempfile::tempdir().unwrap();
    let q = write_query(dir.path(), "SELECT MIN(x.a) FROM nosuch AS x, title AS t WHERE x.id = t.id;");
    let (code, _, err) = run(&["plan", "--schema", &catalog(), "--query", &q]);
    assert_eq!(code, 2);
    assert!(err.contains("nosuch"), "{err}");
}

#[test]
fn missing_catalog_exits_with_input_status() {
    let (code, _, err) = run(&["plan", "--schema", "/nonexistent/catalog.json", "--query", &query("1a.sql")]);
    assert_eq!(code, 2);
    assert!(err.contains("catalog"), "{err}");
}

#[test]
fn bad_flag_exits_with_input_status() {
    let (code, _, err) = run(&["plan", "--algo", "greedy"]);
    assert_eq!(code, 2);
    assert!(!err.is_empty());
}

#[test]
fn subquery_rewrite_of_18a_nests_three_levels() {
    let (code, out, err) = run(&["rewrite", "--schema", &catalog(), "--query", &query("18a.sql"), "--mode", "subquery"]);
    assert_eq!(code, 0, "{err}");
    let sets: Vec<&str> = out.lines().filter(|l| l.starts_with("SET ")).collect();
    assert_eq!(sets, ["SET from_collapse_limit = 1;", "SET join_collapse_limit = 1;"]);
    assert_eq!(out.matches("FROM (").count(), 2, "two derived tables plus the outer block");
    assert!(out.contains(") AS sq1") && out.contains(") AS sq2"));
    let inner = out.find("FROM movie_info_idx AS mi_idx").unwrap();
    assert!(inner < out.find("movie_info AS mi,").unwrap());
    assert!(out.trim_end().ends_with(';'));
}

#[test]
fn generic_target_has_no_prologue() {
    let (code, out, _) = run(&["rewrite", "--schema", &catalog(), "--query", &query("1a.sql"), "--target", "generic"]);
    assert_eq!(code, 0);
    assert!(!out.contains("SET "));
}

#[test]
fn two_table_leftdeep_rewrite_is_a_single_join() {
    let dir = tempfile::tempdir().unwrap();
    let q = write_query(
        dir.path(),
        "SELECT MIN(t.title) AS title FROM title AS t, kind_type AS kt WHERE kt.id = t.kind_id AND kt.kind = 'movie';",
    );
    let (code, out, err) = run(&["rewrite", "--schema", &catalog(), "--query", &q, "--mode", "leftdeep"]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.matches(" JOIN ").count(), 1, "{out}");
    assert!(out.contains("ON"), "{out}");
}

#[test]
fn transitive_flag_is_accepted() {
    let (code, out, _) = run(&["plan", "--schema", &catalog(), "--query", &query("18a.sql"), "--transitive"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("algorithm: simpli2"));
}

fn cost_of(rows: &[serde_json::Value], instance: &str, algo: &str) -> Option<u64> {
    rows.iter()
        .find(|r| r["instance"] == instance && r["algorithm"] == algo)
        .and_then(|r| r["analytical_cost"].as_u64())
}

#[test]
fn compare_on_generated_instances_bounds_every_heuristic() {
    let (code, out, err) = run(&["compare", "--generated", "4", "--seed", "11", "--rows", "150", "--tables", "5", "--json"]);
    assert_eq!(code, 0, "{err}");
    let rows: Vec<serde_json::Value> = serde_json::from_str(&out).unwrap();
    assert_eq!(rows.len(), 4 * 5);
    for s in 11..15 {
        let inst = format!("seed-{s}");
        let best = cost_of(&rows, &inst, "optimal").expect("optimal present");
        let connected = cost_of(&rows, &inst, "optimal-connected").expect("connected optimum present");
        assert!(best <= connected);
        for algo in ["simpli2", "size-asc", "size-desc"] {
            if let Some(c) = cost_of(&rows, &inst, algo) {
                assert!(best <= c, "{inst} {algo}: {best} > {c}");
            }
        }
        // Simpli-Squared orders are Cartesian-free.
        assert!(connected <= cost_of(&rows, &inst, "simpli2").unwrap());
    }
    for r in &rows {
        if r["status"] == "ok" {
            assert_eq!(r["subquery_equivalent"], true, "{r}");
            assert_eq!(r["leftdeep_equivalent"], true, "{r}");
        }
    }
}

#[test]
fn compare_skips_the_optimum_beyond_the_bound() {
    let (code, out, _) = run(&["compare", "--generated", "1", "--seed", "2", "--dp-bound", "2", "--json"]);
    assert_eq!(code, 0);
    let rows: Vec<serde_json::Value> = serde_json::from_str(&out).unwrap();
    let opt = rows.iter().find(|r| r["algorithm"] == "optimal").unwrap();
    assert_eq!(opt["status"], "skipped");
    assert!(opt["note"].as_str().unwrap().contains("bound"));
    assert!(rows.iter().any(|r| r["algorithm"] == "simpli2" && r["status"] == "ok"));
}

#[test]
fn compare_needs_an_input_source() {
    let (code, _, err) = run(&["compare"]);
    assert_eq!(code, 2);
    assert!(err.contains("--generated"), "{err}");
}

#[test]
fn generate_then_compare_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("inst");
    let out_s = out_dir.display().to_string();
    let (code, out, err) = run(&["generate", "--seed", "5", "--rows", "120", "--tables", "4", "--out", &out_s]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("seed 5"));
    assert!(out_dir.join("catalog.json").is_file());
    assert!(out_dir.join("query.sql").is_file());
    let csvs = std::fs::read_dir(out_dir.join("data")).unwrap().count();
    assert!(csvs >= 2);

    let (code, out, err) = run(&[
        "compare",
        "--schema",
        &out_dir.join("catalog.json").display().to_string(),
        "--query",
        &out_dir.join("query.sql").display().to_string(),
        "--data-dir",
        &out_dir.join("data").display().to_string(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.lines().any(|l| l.starts_with("query") && l.contains("simpli2")), "{out}");
    assert!(err.is_empty(), "{err}");
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let (code, _, _) = run(&["generate", "--seed", "9", "--out", &d.display().to_string()]);
        assert_eq!(code, 0);
    }
    for f in ["catalog.json", "query.sql"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
    }
}

#[test]
fn unreachable_database_exits_with_environment_status() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json").display().to_string();
    let (code, _, err) = run(&["extract-catalog", "--db-url", "postgres://nobody@127.0.0.1:1/none", "--out", &out]);
    assert_eq!(code, 3, "{err}");
}

#[test]
fn binary_reports_exit_status() {
    let bin = env!("CARGO_BIN_EXE_joinorder");
    let ok = Command::new(bin)
        .args(["plan", "--schema", &catalog(), "--query", &query("1a.sql")])
        .output()
        .unwrap();
    assert!(ok.status.success());
    let bad = Command::new(bin)
        .args(["plan", "--schema", &catalog(), "--query", "/nonexistent.sql"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn live_extract_catalog() {
    let Ok(url) = std::env::var("DB_URL") else {
        eprintln!("skipped: DB_URL is not set");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let (code, _, err) = run(&["extract-catalog", "--db-url", &url, "--out", &out.display().to_string()]);
    assert_eq!(code, 0, "{err}");
    assert!(joinorder_core::load_catalog(&out).is_ok());
}
