use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::hash::{Hash, Hasher};
use std::path::Path;

use super::ExecError;

/// Cell value. `Float` only arises from decimal literals.
#[derive(Debug, Clone)]
pub enum Value {
    Null,
    Int(i64),
    Float(f64),
    Str(String),
}

impl Value {
    /// Reads a CSV cell: empty is NULL, integers become `Int`.
    pub fn from_cell(cell: &str) -> Self {
        if cell.is_empty() {
            Value::Null
        } else if let Ok(v) = cell.parse::<i64>() {
            Value::Int(v)
        } else {
            Value::Str(cell.to_string())
        }
    }

    pub fn to_cell(&self) -> String {
        match self {
            Value::Null => String::new(),
            Value::Int(v) => v.to_string(),
            Value::Float(v) => v.to_string(),
            Value::Str(s) => s.clone(),
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    fn as_number(&self) -> Option<f64> {
        match self {
            Value::Int(v) => Some(*v as f64),
            Value::Float(v) => Some(*v),
            Value::Str(s) => s.trim().parse().ok(),
            Value::Null => None,
        }
    }

    /// SQL comparison; `None` when either side is NULL. Numbers compare
    /// numerically, strings bytewise; a string meets a number numerically when
    /// it parses as one and textually otherwise.
    pub fn sql_cmp(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::Null, _) | (_, Value::Null) => None,
            (Value::Int(a), Value::Int(b)) => Some(a.cmp(b)),
            (Value::Str(a), Value::Str(b)) => Some(a.cmp(b)),
            (a, b) => match (a.as_number(), b.as_number()) {
                (Some(x), Some(y)) => x.partial_cmp(&y),
                _ => Some(a.to_cell().cmp(&b.to_cell())),
            },
        }
    }

    /// Key under which `sql_cmp` equality becomes plain equality; `None` for NULL.
    pub fn join_key(&self) -> Option<Value> {
        match self {
            Value::Null => None,
            Value::Int(_) => Some(self.clone()),
            Value::Float(f) if f.fract() == 0.0 && f.abs() < 9.0e15 => Some(Value::Int(*f as i64)),
            Value::Float(_) => Some(self.clone()),
            Value::Str(s) => match s.trim().parse::<f64>() {
                Ok(f) => Value::Float(f).join_key(),
                Err(_) => Some(self.clone()),
            },
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Null => 0,
            Value::Int(_) => 1,
            Value::Float(_) => 2,
            Value::Str(_) => 3,
        }
    }
}

/// Structural equality and a total order, used for hashing and multiset comparison.
impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Float(a), Value::Float(b)) => a.total_cmp(b),
            (Value::Str(a), Value::Str(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            Value::Null => {}
            Value::Int(v) => v.hash(state),
            Value::Float(v) => v.to_bits().hash(state),
            Value::Str(s) => s.hash(state),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => f.write_str("NULL"),
            other => f.write_str(&other.to_cell()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MiniTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl MiniTable {
    pub fn new(name: impl Into<String>, columns: Vec<String>, rows: Vec<Vec<Value>>) -> Result<Self, ExecError> {
        let name = name.into();
        if let Some(bad) = rows.iter().position(|r| r.len() != columns.len()) {
            return Err(ExecError::Data(format!(
                "table `{name}`: row {bad} has {} values for {} columns",
                rows[bad].len(),
                columns.len()
            )));
        }
        Ok(Self { name, columns, rows })
    }

    pub fn from_csv(name: impl Into<String>, text: &str) -> Result<Self, ExecError> {
        let name = name.into();
        let data_err = |e: csv::Error| ExecError::Data(format!("table `{name}`: {e}"));
        let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let columns = reader
            .headers()
            .map_err(data_err)?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for record in reader.records() {
            rows.push(record.map_err(data_err)?.iter().map(Value::from_cell).collect());
        }
        Self::new(name, columns, rows)
    }

    pub fn to_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            writer
                .write_record(row.iter().map(Value::to_cell))
                .expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("flush")).expect("utf8 csv")
    }
}

/// Tables by name.
pub type Database = BTreeMap<String, MiniTable>;

/// Loads every `<table>.csv` in `dir`.
pub fn load_dataset(dir: impl AsRef<Path>) -> Result<Database, ExecError> {
    let dir = dir.as_ref();
    let io_err = |e: std::io::Error| ExecError::Data(format!("{}: {e}", dir.display()));
    let mut db = Database::new();
    for entry in fs::read_dir(dir).map_err(io_err)? {
        let path = entry.map_err(io_err)?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("csv") {
            continue;
        }
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        let text = fs::read_to_string(&path).map_err(io_err)?;
        db.insert(name.clone(), MiniTable::from_csv(name, &text)?);
    }
    Ok(db)
}

pub fn write_dataset(db: &Database, dir: impl AsRef<Path>) -> std::io::Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    for table in db.values() {
        fs::write(dir.join(format!("{}.csv", table.name)), table.to_csv())?;
    }
    Ok(())
}
