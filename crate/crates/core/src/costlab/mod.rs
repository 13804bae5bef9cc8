//! Small-scale cost laboratory: runs join orders exactly over in-memory
//! tables to measure intermediate result sizes, finds the optimal left-deep
//! order, and checks rewritten SQL against the original query.

mod eval;
mod exec;
mod generator;
mod optimal;
mod table;

pub use eval::{like_match, ColumnName, Relation};
pub use exec::{eval_select, execute_order, CostReport, ExecOptions, DEFAULT_ROW_CEILING};
pub use generator::{generate_dataset, generate_query, GeneratedQuery, GeneratorConfig, Topology};
pub use optimal::{optimal_order, OptimalOptions, DEFAULT_DP_BOUND};
pub use table::{load_dataset, write_dataset, Database, MiniTable, Value};

use thiserror::Error;

use crate::rewriter::RewrittenQuery;
use crate::sql::{parse_select, Grammar, SqlError};
use crate::sqlfront::QueryModel;

#[derive(Debug, Error)]
pub enum ExecError {
    #[error("data error: {0}")]
    Data(String),
    #[error("no data for table `{0}`")]
    MissingTable(String),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("column `{0}` is ambiguous")]
    AmbiguousColumn(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("row ceiling of {limit} exceeded while joining `{table}`")]
    RowCeiling { limit: u64, table: String },
    #[error("order does not match query: {0}")]
    OrderMismatch(String),
    #[error("in derived table `{alias}`: {source}")]
    InDerived {
        alias: String,
        #[source]
        source: Box<ExecError>,
    },
    #[error("cannot parse rewritten SQL: {0}")]
    Sql(#[from] SqlError),
    #[error("{tables} tables exceed the search bound of {bound}")]
    BoundExceeded { tables: usize, bound: usize },
    #[error("no valid order: {0}")]
    NoValidOrder(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equivalence {
    pub equivalent: bool,
    pub original_rows: usize,
    pub rewritten_rows: usize,
}

/// Evaluates the original query and the rewritten SQL on `db` and compares
/// the results as multisets.
pub fn check_equivalence(
    db: &Database,
    q: &QueryModel,
    rewritten: &RewrittenQuery,
    opts: &ExecOptions,
) -> Result<Equivalence, ExecError> {
    let original = eval_select(db, &q.to_select(), opts)?;
    let select = parse_select(&rewritten.sql, Grammar::Extended)?;
    let result = eval_select(db, &select, opts)?;
    Ok(Equivalence {
        equivalent: original.same_multiset(&result),
        original_rows: original.len(),
        rewritten_rows: result.len(),
    })
}
