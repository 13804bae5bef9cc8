//! Schema metadata consumed by the planner: table sizes, unique keys and
//! foreign-key constraints.
//!
//! The catalog is loaded from a JSON document:
//!
//! ```json
//! {
//!   "tables": [
//!     {"name": "title", "row_count": 2528312, "columns": ["id", "title"], "unique_keys": [["id"]]}
//!   ],
//!   "foreign_keys": [
//!     {"from_table": "movie_info", "from_columns": ["movie_id"], "to_table": "title", "to_columns": ["id"]}
//!   ]
//! }
//! ```
//!
//! Unknown fields are rejected and a missing `row_count` is an error.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("cannot read catalog file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed catalog: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("duplicate table name `{0}`")]
    DuplicateTable(String),
    #[error("table `{0}` declares no columns")]
    NoColumns(String),
    #[error("table `{table}`: duplicate column `{column}`")]
    DuplicateColumn { table: String, column: String },
    #[error("table `{table}`: unique key references unknown column `{column}`")]
    UnknownKeyColumn { table: String, column: String },
    #[error("table `{table}`: empty unique key")]
    EmptyKey { table: String },
    #[error("foreign key {fk}: {reason}")]
    Reference { fk: String, reason: String },
    #[error("unknown table `{0}`")]
    UnknownTable(String),
    #[error("unknown column `{table}.{column}`")]
    UnknownColumn { table: String, column: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableDef {
    pub name: String,
    pub row_count: u64,
    pub columns: Vec<String>,
    #[serde(default)]
    pub unique_keys: Vec<Vec<String>>,
}

impl TableDef {
    pub fn has_column(&self, column: &str) -> bool {
        self.columns.iter().any(|c| c == column)
    }

    /// True iff `column` alone is a declared unique key.
    pub fn is_single_column_key(&self, column: &str) -> bool {
        self.unique_keys
            .iter()
            .any(|key| key.len() == 1 && key[0] == column)
    }

    fn is_unique_key(&self, columns: &[String]) -> bool {
        let wanted: BTreeSet<&String> = columns.iter().collect();
        self.unique_keys
            .iter()
            .any(|key| key.iter().collect::<BTreeSet<_>>() == wanted)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForeignKeyDef {
    pub from_table: String,
    pub from_columns: Vec<String>,
    pub to_table: String,
    pub to_columns: Vec<String>,
}

impl std::fmt::Display for ForeignKeyDef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}({}) -> {}({})",
            self.from_table,
            self.from_columns.join(", "),
            self.to_table,
            self.to_columns.join(", ")
        )
    }
}

/// On-disk shape of the catalog document.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogFile {
    pub tables: Vec<TableDef>,
    #[serde(default)]
    pub foreign_keys: Vec<ForeignKeyDef>,
}

/// Validated, immutable schema metadata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    tables: BTreeMap<String, TableDef>,
    foreign_keys: Vec<ForeignKeyDef>,
}

/// The narrow view of a schema that query analysis and planning may consult:
/// names, row counts and key constraints. Nothing else is reachable through it.
pub trait SchemaInfo {
    fn has_table(&self, table: &str) -> bool;
    /// Column names of `table` in declaration order.
    fn columns(&self, table: &str) -> Option<Vec<String>>;
    fn row_count(&self, table: &str) -> Option<u64>;
    fn is_key_column(&self, table: &str, column: &str) -> Result<bool, CatalogError>;
}

impl Catalog {
    pub fn new(tables: Vec<TableDef>, foreign_keys: Vec<ForeignKeyDef>) -> Result<Self, CatalogError> {
        let mut by_name = BTreeMap::new();
        for table in tables {
            validate_table(&table)?;
            if by_name.contains_key(&table.name) {
                return Err(CatalogError::DuplicateTable(table.name));
            }
            by_name.insert(table.name.clone(), table);
        }
        for fk in &foreign_keys {
            validate_foreign_key(&by_name, fk)?;
        }
        Ok(Self {
            tables: by_name,
            foreign_keys,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, CatalogError> {
        let file: CatalogFile = serde_json::from_str(text)?;
        Self::new(file.tables, file.foreign_keys)
    }

    pub fn to_file(&self) -> CatalogFile {
        CatalogFile {
            tables: self.tables.values().cloned().collect(),
            foreign_keys: self.foreign_keys.clone(),
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("catalog serializes")
    }

    pub fn table(&self, name: &str) -> Option<&TableDef> {
        self.tables.get(name)
    }

    pub fn tables(&self) -> impl Iterator<Item = &TableDef> {
        self.tables.values()
    }

    pub fn table_count(&self) -> usize {
        self.tables.len()
    }

    pub fn foreign_keys(&self) -> &[ForeignKeyDef] {
        &self.foreign_keys
    }
}

fn validate_table(table: &TableDef) -> Result<(), CatalogError> {
    if table.columns.is_empty() {
        return Err(CatalogError::NoColumns(table.name.clone()));
    }
    let mut seen = BTreeSet::new();
    for column in &table.columns {
        if !seen.insert(column) {
            return Err(CatalogError::DuplicateColumn {
                table: table.name.clone(),
                column: column.clone(),
            });
        }
    }
    for key in &table.unique_keys {
        if key.is_empty() {
            return Err(CatalogError::EmptyKey {
                table: table.name.clone(),
            });
        }
        if let Some(column) = key.iter().find(|c| !table.has_column(c)) {
            return Err(CatalogError::UnknownKeyColumn {
                table: table.name.clone(),
                column: column.clone(),
            });
        }
    }
    Ok(())
}

fn validate_foreign_key(
    tables: &BTreeMap<String, TableDef>,
    fk: &ForeignKeyDef,
) -> Result<(), CatalogError> {
    let fail = |reason: String| CatalogError::Reference {
        fk: fk.to_string(),
        reason,
    };
    let from = tables
        .get(&fk.from_table)
        .ok_or_else(|| fail(format!("unknown table `{}`", fk.from_table)))?;
    let to = tables
        .get(&fk.to_table)
        .ok_or_else(|| fail(format!("unknown table `{}`", fk.to_table)))?;
    if fk.from_columns.is_empty() || fk.from_columns.len() != fk.to_columns.len() {
        return Err(fail("column lists are empty or differ in length".into()));
    }
    for column in &fk.from_columns {
        if !from.has_column(column) {
            return Err(fail(format!("unknown column `{}.{}`", from.name, column)));
        }
    }
    for column in &fk.to_columns {
        if !to.has_column(column) {
            return Err(fail(format!("unknown column `{}.{}`", to.name, column)));
        }
    }
    if !to.is_unique_key(&fk.to_columns) {
        return Err(fail(format!(
            "referenced columns are not a unique key of `{}`",
            to.name
        )));
    }
    Ok(())
}

impl SchemaInfo for Catalog {
    fn has_table(&self, table: &str) -> bool {
        self.tables.contains_key(table)
    }

    fn columns(&self, table: &str) -> Option<Vec<String>> {
        self.tables.get(table).map(|t| t.columns.clone())
    }

    fn row_count(&self, table: &str) -> Option<u64> {
        self.tables.get(table).map(|t| t.row_count)
    }

    fn is_key_column(&self, table: &str, column: &str) -> Result<bool, CatalogError> {
        is_key_column(self, table, column)
    }
}

pub fn load_catalog(path: impl AsRef<Path>) -> Result<Catalog, CatalogError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| CatalogError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Catalog::from_json(&text)
}

/// Single-column key membership. A column that is only part of a composite
/// key does not count.
pub fn is_key_column(cat: &Catalog, table: &str, column: &str) -> Result<bool, CatalogError> {
    let def = cat
        .table(table)
        .ok_or_else(|| CatalogError::UnknownTable(table.to_string()))?;
    if !def.has_column(column) {
        return Err(CatalogError::UnknownColumn {
            table: table.to_string(),
            column: column.to_string(),
        });
    }
    Ok(def.is_single_column_key(column))
}

/// The IMDB schema used by the Join Order Benchmark, with row counts.
pub const JOB_CATALOG_JSON: &str = include_str!("../data/job/catalog.json");

pub fn job_catalog() -> Catalog {
    Catalog::from_json(JOB_CATALOG_JSON).expect("bundled JOB catalog is valid")
}
