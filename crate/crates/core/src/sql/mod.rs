//! Lexer, parser and renderer for the SQL subset.
//!
//! Input grammar (`Grammar::Subset`):
//!
//! ```text
//! query      := SELECT item (, item)* FROM table (, table)* [WHERE expr] [;]
//! item       := * | expr [[AS] name]
//! table      := name [[AS] alias]
//! expr       := expr OR expr | expr AND expr | NOT expr | predicate
//! predicate  := primary (= | <> | != | < | <= | > | >=) primary
//!             | primary [NOT] IN (primary, ...)
//!             | primary [NOT] BETWEEN primary AND primary
//!             | primary [NOT] LIKE primary
//!             | primary IS [NOT] NULL
//!             | primary
//! primary    := literal | [alias.]column | FUNC([DISTINCT] expr, ... | *) | (expr)
//! ```
//!
//! `Grammar::Extended` additionally accepts derived tables `(SELECT ...) AS name`
//! and explicit `[INNER] JOIN ... ON expr` / `CROSS JOIN` chains, which is what the
//! rewriter emits.

pub mod ast;
pub mod lexer;
pub mod parser;

pub use ast::*;
pub use parser::{parse_expr, parse_select, Grammar};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} (at byte {offset})")]
pub struct SqlError {
    pub message: String,
    pub offset: usize,
}

impl SqlError {
    pub fn new(message: impl Into<String>, offset: usize) -> Self {
        Self {
            message: message.into(),
            offset,
        }
    }
}
