//! Seeded random schemas, queries and datasets for differential testing.
//!
//! Schemas follow a fact/dimension layout: a `hub` table, dimension tables
//! `d1..d3` and fact tables `f1..f3` that reference both. Facts joined with
//! each other on `hub_id` give many-to-many edges; everything else is
//! one-to-many. Every choice comes from a ChaCha stream seeded by the caller.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::table::{Database, MiniTable, Value};
use crate::catalog::{Catalog, ForeignKeyDef, TableDef};

const DIMS: usize = 3;
const FACTS: usize = 3;
const LABELS: &[&str] = &["alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta"];
const NAMES: &[&str] = &["ada", "bert", "cleo", "dora", "emil", "fay", "gus", "hana", "ivo", "jade"];
const NOTES: &[&str] = &["(voice)", "(uncredited)", "lead", "cameo", "extra", "narrator"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    /// One fact table surrounded by dimensions.
    Star,
    /// Several facts sharing `hub_id`, each with its own dimensions.
    MultiFact,
}

impl FromStr for Topology {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "star" => Ok(Topology::Star),
            "multi-fact" => Ok(Topology::MultiFact),
            other => Err(format!("unknown topology `{other}` (expected star or multi-fact)")),
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::Star => "star",
            Topology::MultiFact => "multi-fact",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorConfig {
    pub topology: Topology,
    /// Upper bound on rows per table.
    pub max_rows: u64,
    /// Upper bound on table instances per query.
    pub max_tables: usize,
    /// Share of fact rows whose `hub_id` falls in a small hot set.
    pub skew: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            topology: Topology::MultiFact,
            max_rows: 500,
            max_tables: 6,
            skew: 0.3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedQuery {
    pub seed: u64,
    pub catalog: Catalog,
    pub sql: String,
}

fn table_def(name: &str, rows: u64, columns: &[&str]) -> TableDef {
    TableDef {
        name: name.to_string(),
        row_count: rows,
        columns: columns.iter().map(|c| c.to_string()).collect(),
        unique_keys: vec![vec!["id".to_string()]],
    }
}

fn fk(from: &str, column: &str, to: &str) -> ForeignKeyDef {
    ForeignKeyDef {
        from_table: from.to_string(),
        from_columns: vec![column.to_string()],
        to_table: to.to_string(),
        to_columns: vec!["id".to_string()],
    }
}

fn fact_columns() -> Vec<String> {
    let mut cols = vec!["id".to_string(), "hub_id".to_string()];
    cols.extend((1..=DIMS).map(|d| format!("d{d}_id")));
    cols.extend(["note".to_string(), "val".to_string()]);
    cols
}

fn generate_catalog(rng: &mut ChaCha8Rng, cfg: &GeneratorConfig) -> Catalog {
    let max = cfg.max_rows.max(4);
    let mut tables = vec![table_def("hub", rng.gen_range(max / 16 + 2..=max / 4 + 2), &["id", "name", "year"])];
    let mut fks = Vec::new();
    for d in 1..=DIMS {
        tables.push(table_def(&format!("d{d}"), rng.gen_range(3..=25.min(max)), &["id", "label"]));
    }
    let cols = fact_columns();
    let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
    for f in 1..=FACTS {
        let name = format!("f{f}");
        tables.push(table_def(&name, rng.gen_range(max / 5 + 1..=max), &cols));
        fks.push(fk(&name, "hub_id", "hub"));
        for d in 1..=DIMS {
            fks.push(fk(&name, &format!("d{d}_id"), &format!("d{d}")));
        }
    }
    Catalog::new(tables, fks).expect("generated catalog is consistent")
}

struct QueryBuilder<'r> {
    rng: &'r mut ChaCha8Rng,
    from: Vec<(String, String)>,
    joins: Vec<String>,
    selections: Vec<String>,
}

impl QueryBuilder<'_> {
    fn add(&mut self, table: &str) -> String {
        let count = self.from.iter().filter(|(t, _)| t == table).count();
        let alias = if count == 0 {
            table.to_string()
        } else {
            format!("{table}_{}", count + 1)
        };
        self.from.push((table.to_string(), alias.clone()));
        alias
    }

    fn table_of(&self, alias: &str) -> &str {
        &self.from.iter().find(|(_, a)| a == alias).expect("alias").0
    }

    fn attach_dim(&mut self, fact: &str) {
        let d = self.rng.gen_range(1..=DIMS);
        let alias = self.add(&format!("d{d}"));
        self.joins.push(format!("{fact}.d{d}_id = {alias}.id"));
    }

    fn label(&mut self) -> String {
        format!("'{}'", LABELS.choose(self.rng).expect("labels"))
    }

    fn select_on(&mut self, alias: &str) {
        let table = self.table_of(alias).to_string();
        let r = self.rng.gen_range(0..4);
        let pred = if table.starts_with('d') {
            match r {
                0 => format!("{alias}.label = {}", self.label()),
                1 => format!("{alias}.label IN ({}, {})", self.label(), self.label()),
                2 => format!("{alias}.label LIKE '%{}%'", ["a", "e", "t"].choose(self.rng).expect("letters")),
                _ => format!("{alias}.label <> {}", self.label()),
            }
        } else if table == "hub" {
            let lo = self.rng.gen_range(1980..2015);
            match r {
                0 | 1 => format!("{alias}.year BETWEEN {lo} AND {}", lo + self.rng.gen_range(3..15)),
                2 => format!("{alias}.year > {lo}"),
                _ => format!("{alias}.name LIKE '_{}%'", ["a", "e", "o"].choose(self.rng).expect("letters")),
            }
        } else {
            let n = self.rng.gen_range(10..90);
            match r {
                0 => format!("{alias}.val < {n}"),
                1 => format!("({alias}.note LIKE '%(%' OR {alias}.note IS NULL)"),
                2 => format!("{alias}.note IS NOT NULL"),
                _ => format!("{alias}.val >= {n}"),
            }
        };
        self.selections.push(pred);
    }
}

fn generate_sql(rng: &mut ChaCha8Rng, cfg: &GeneratorConfig) -> String {
    let max_tables = cfg.max_tables.max(2);
    let mut b = QueryBuilder {
        rng,
        from: Vec::new(),
        joins: Vec::new(),
        selections: Vec::new(),
    };
    let facts = match cfg.topology {
        Topology::Star => 1,
        Topology::MultiFact => b.rng.gen_range(2..=3.min(max_tables)),
    };
    let mut fact_aliases = Vec::new();
    for i in 0..facts {
        let table = format!("f{}", b.rng.gen_range(1..=FACTS));
        let alias = b.add(&table);
        if i > 0 {
            let other: &String = fact_aliases.choose(b.rng).expect("earlier fact");
            b.joins.push(format!("{other}.hub_id = {alias}.hub_id"));
        }
        fact_aliases.push(alias);
    }
    if facts == 3 && b.rng.gen_bool(0.3) {
        let (x, y) = (&fact_aliases[0], &fact_aliases[2]);
        if !b.joins.iter().any(|j| j.contains(&format!("{x}.")) && j.contains(&format!("{y}."))) {
            b.joins.push(format!("{x}.hub_id = {y}.hub_id"));
        }
    }
    if b.from.len() < max_tables && b.rng.gen_bool(0.5) {
        let fact = fact_aliases.choose(b.rng).expect("fact").clone();
        let hub = b.add("hub");
        b.joins.push(format!("{hub}.id = {fact}.hub_id"));
    }
    let room = max_tables - b.from.len();
    let dims = if room == 0 { 0 } else { b.rng.gen_range(1.min(room)..=room) };
    for _ in 0..dims {
        let fact = fact_aliases.choose(b.rng).expect("fact").clone();
        b.attach_dim(&fact);
    }
    let aliases: Vec<String> = b.from.iter().map(|(_, a)| a.clone()).collect();
    for alias in &aliases {
        if b.rng.gen_bool(0.5) {
            b.select_on(alias);
        }
    }
    if fact_aliases.len() > 1 && b.rng.gen_bool(0.2) {
        b.selections.push(format!("{}.val < {}.val", fact_aliases[0], fact_aliases[1]));
    }

    let output = if b.rng.gen_bool(0.5) {
        let mut items = Vec::new();
        for i in 0..b.rng.gen_range(1..=3) {
            let alias = aliases.choose(b.rng).expect("alias").clone();
            let table = b.table_of(&alias).to_string();
                let col = column_of(&table, b.rng);
            items.push(format!("MIN({alias}.{col}) AS m{}", i + 1));
        }
        items.push("COUNT(*) AS n".to_string());
        items
    } else {
        (0..b.rng.gen_range(2..=4))
            .map(|_| {
                let alias = aliases.choose(b.rng).expect("alias").clone();
                let table = b.table_of(&alias).to_string();
                let col = column_of(&table, b.rng);
                format!("{alias}.{col}")
            })
            .collect()
    };
    let mut from = b.from.clone();
    from.shuffle(b.rng);
    let mut conjuncts = b.joins.clone();
    conjuncts.extend(b.selections.iter().cloned());
    conjuncts.shuffle(b.rng);
    let from: Vec<String> = from
        .iter()
        .map(|(t, a)| if t == a { t.clone() } else { format!("{t} AS {a}") })
        .collect();
    format!(
        "SELECT {}\nFROM {}\nWHERE {};",
        output.join(", "),
        from.join(",\n     "),
        conjuncts.join("\n  AND ")
    )
}

fn column_of(table: &str, rng: &mut ChaCha8Rng) -> &'static str {
    let cols: &[&'static str] = if table == "hub" {
        &["id", "name", "year"]
    } else if table.starts_with('d') {
        &["id", "label"]
    } else {
        &["id", "hub_id", "note", "val"]
    };
    cols.choose(rng).expect("columns")
}

/// Catalog and query for `seed`. The catalog's row counts are the sizes
/// [`generate_dataset`] will produce.
pub fn generate_query(seed: u64, cfg: &GeneratorConfig) -> GeneratedQuery {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let catalog = generate_catalog(&mut rng, cfg);
    let sql = generate_sql(&mut rng, cfg);
    GeneratedQuery { seed, catalog, sql }
}

fn nullable(rng: &mut ChaCha8Rng, p_null: f64, v: Value) -> Value {
    if rng.gen_bool(p_null) {
        Value::Null
    } else {
        v
    }
}

/// Rows for every catalog table, with row counts taken from the catalog.
pub fn generate_dataset(catalog: &Catalog, seed: u64, cfg: &GeneratorConfig) -> Database {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows_of = |name: &str| catalog.table(name).map(|t| t.row_count as i64).unwrap_or(0);
    let hub_rows = rows_of("hub").max(1);
    let hot = (hub_rows / 10).max(1);
    let mut db = Database::new();
    for def in catalog.tables() {
        let n = def.row_count as i64;
        let mut rows = Vec::with_capacity(n as usize);
        for id in 1..=n {
            let row = if def.name == "hub" {
                vec![
                    Value::Int(id),
                    Value::Str(NAMES.choose(&mut rng).expect("names").to_string()),
                    Value::Int(rng.gen_range(1980..=2020)),
                ]
            } else if def.name.starts_with('d') {
                vec![Value::Int(id), Value::Str(LABELS.choose(&mut rng).expect("labels").to_string())]
            } else {
                let hub = if rng.gen_bool(cfg.skew.clamp(0.0, 1.0)) {
                    rng.gen_range(1..=hot)
                } else {
                    rng.gen_range(1..=hub_rows)
                };
                let mut row = vec![Value::Int(id), nullable(&mut rng, 0.05, Value::Int(hub))];
                for d in 1..=DIMS {
                    let dim_rows = rows_of(&format!("d{d}")).max(1);
                    let v = Value::Int(rng.gen_range(1..=dim_rows));
                    row.push(nullable(&mut rng, 0.05, v));
                }
                let note = Value::Str(NOTES.choose(&mut rng).expect("notes").to_string());
                row.push(nullable(&mut rng, 0.15, note));
                row.push(Value::Int(rng.gen_range(0..100)));
                row
            };
            rows.push(row);
        }
        let table = MiniTable::new(def.name.clone(), def.columns.clone(), rows).expect("rectangular");
        db.insert(def.name.clone(), table);
    }
    db
}
