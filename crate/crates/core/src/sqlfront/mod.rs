//! Query front end: turns SQL text into a [`QueryModel`] whose equi-join
//! predicates are classified as one-to-many or many-to-many from the key
//! constraints of the catalog, and builds the annotated [`JoinGraph`].

mod graph;

pub use graph::{build_join_graph, JoinEdge, JoinGraph};

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::catalog::{CatalogError, SchemaInfo};
use crate::sql::{
    self, CmpOp, ColumnRef, Expr, FromItem, Grammar, JoinConstraint, Select, SelectItem, SqlError,
    TableFactor,
};

#[derive(Debug, Error)]
pub enum QueryError {
    #[error("syntax error: {0}")]
    Syntax(#[from] SqlError),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("unknown table `{0}`")]
    UnknownTable(String),
    #[error("table `{0}` has no row count")]
    MissingRowCount(String),
    #[error("duplicate alias `{0}`")]
    DuplicateAlias(String),
    #[error("unknown alias `{0}`")]
    UnknownAlias(String),
    #[error("unknown column `{alias}.{column}`")]
    UnknownColumn { alias: String, column: String },
    #[error("column `{0}` is ambiguous")]
    AmbiguousColumn(String),
    #[error("column `{0}` does not exist in any FROM table")]
    UnresolvedColumn(String),
    #[error("predicate `{0}` references no table")]
    Unbound(String),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

/// One aliased occurrence of a base table in a query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableInstance {
    pub alias: String,
    pub base_table: String,
    /// Row count of the base table.
    pub size: u64,
    #[serde(skip)]
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct AttrRef {
    pub alias: String,
    pub column: String,
}

impl AttrRef {
    pub fn new(alias: impl Into<String>, column: impl Into<String>) -> Self {
        Self {
            alias: alias.into(),
            column: column.into(),
        }
    }

    pub fn to_expr(&self) -> Expr {
        Expr::column(&self.alias, &self.column)
    }
}

impl std::fmt::Display for AttrRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", ColumnRef::qualified(&self.alias, &self.column))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum JoinKind {
    OneToMany,
    ManyToMany,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KeySide {
    Left,
    Right,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JoinPredicate {
    pub left: AttrRef,
    pub right: AttrRef,
    pub kind: JoinKind,
    pub key_side: KeySide,
}

impl JoinPredicate {
    /// Classifies an equi-join from whether each endpoint column is a
    /// single-column key. Key on both sides counts as one-to-many keyed left.
    pub fn classified(left: AttrRef, right: AttrRef, left_is_key: bool, right_is_key: bool) -> Self {
        let (kind, key_side) = match (left_is_key, right_is_key) {
            (true, _) => (JoinKind::OneToMany, KeySide::Left),
            (false, true) => (JoinKind::OneToMany, KeySide::Right),
            (false, false) => (JoinKind::ManyToMany, KeySide::None),
        };
        Self {
            left,
            right,
            kind,
            key_side,
        }
    }

    pub fn to_expr(&self) -> Expr {
        Expr::eq(self.left.to_expr(), self.right.to_expr())
    }

    pub fn aliases(&self) -> [&str; 2] {
        [&self.left.alias, &self.right.alias]
    }

    pub fn touches(&self, alias: &str) -> bool {
        self.left.alias == alias || self.right.alias == alias
    }
}

/// A non-join conjunct. The planner treats it as opaque text bound to the
/// aliases it mentions.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionPredicate {
    pub text: String,
    pub expr: Expr,
    pub aliases: BTreeSet<String>,
}

impl SelectionPredicate {
    fn new(expr: Expr) -> Self {
        Self {
            text: expr.to_string(),
            aliases: expr.qualifiers(),
            expr,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputItem {
    pub expr: Expr,
    pub alias: Option<String>,
    pub aliases: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryModel {
    pub instances: Vec<TableInstance>,
    pub joins: Vec<JoinPredicate>,
    pub selections: Vec<SelectionPredicate>,
    pub output: Vec<OutputItem>,
}

pub fn parse_query(sql: &str, cat: &impl SchemaInfo) -> Result<QueryModel, QueryError> {
    let select = sql::parse_select(sql, Grammar::Subset)?;
    QueryModel::from_select(&select, cat)
}

/// Parses a query that may use explicit `JOIN ... ON` chains over base tables,
/// such as the flat left-deep rewriting. ON conditions are folded into the
/// conjunct list.
pub fn parse_query_extended(sql: &str, cat: &impl SchemaInfo) -> Result<QueryModel, QueryError> {
    let select = sql::parse_select(sql, Grammar::Extended)?;
    QueryModel::from_select(&select, cat)
}

impl QueryModel {
    pub fn from_select(select: &Select, cat: &impl SchemaInfo) -> Result<Self, QueryError> {
        let mut instances: Vec<TableInstance> = Vec::new();
        let mut conjuncts = Vec::new();
        let mut add_table = |factor: &TableFactor| -> Result<(), QueryError> {
            let TableFactor::Table { name, alias } = factor else {
                return Err(QueryError::Unsupported("derived tables in FROM".into()));
            };
            if !cat.has_table(name) {
                return Err(QueryError::UnknownTable(name.clone()));
            }
            let alias = alias.clone().unwrap_or_else(|| name.clone());
            if instances.iter().any(|i| i.alias == alias) {
                return Err(QueryError::DuplicateAlias(alias));
            }
            let size = cat
                .row_count(name)
                .ok_or_else(|| QueryError::MissingRowCount(name.clone()))?;
            instances.push(TableInstance {
                alias,
                base_table: name.clone(),
                size,
                columns: cat.columns(name).unwrap_or_default(),
            });
            Ok(())
        };
        for FromItem { factor, joins } in &select.from {
            add_table(factor)?;
            for join in joins {
                add_table(&join.factor)?;
                if let JoinConstraint::On(on) = &join.constraint {
                    conjuncts.extend(on.clone().split_conjunction());
                }
            }
        }
        if let Some(selection) = &select.selection {
            conjuncts.extend(selection.clone().split_conjunction());
        }

        let resolver = Resolver {
            instances: &instances,
        };
        let mut joins = Vec::new();
        let mut selections = Vec::new();
        for conjunct in conjuncts {
            let conjunct = resolver.resolve(&conjunct)?;
            if let Some((left, right)) = as_equi_join(&conjunct) {
                let left_key = resolver.is_key(cat, &left)?;
                let right_key = resolver.is_key(cat, &right)?;
                joins.push(JoinPredicate::classified(left, right, left_key, right_key));
            } else {
                let pred = SelectionPredicate::new(conjunct);
                if pred.aliases.is_empty() {
                    return Err(QueryError::Unbound(pred.text));
                }
                selections.push(pred);
            }
        }

        let mut output = Vec::new();
        for item in &select.items {
            match item {
                SelectItem::Wildcard => {
                    for inst in &instances {
                        for column in &inst.columns {
                            output.push(OutputItem {
                                expr: Expr::column(&inst.alias, column),
                                alias: None,
                                aliases: BTreeSet::from([inst.alias.clone()]),
                            });
                        }
                    }
                }
                SelectItem::Expr { expr, alias } => {
                    let expr = resolver.resolve(expr)?;
                    output.push(OutputItem {
                        aliases: expr.qualifiers(),
                        expr,
                        alias: alias.clone(),
                    });
                }
            }
        }

        Ok(Self {
            instances,
            joins,
            selections,
            output,
        })
    }

    pub fn instance(&self, alias: &str) -> Option<&TableInstance> {
        self.instances.iter().find(|i| i.alias == alias)
    }

    pub fn aliases(&self) -> Vec<&str> {
        self.instances.iter().map(|i| i.alias.as_str()).collect()
    }

    pub fn has_aggregates(&self) -> bool {
        self.output.iter().any(|o| o.expr.contains_aggregate())
    }

    /// The query as a comma-join SELECT: joins first, then selections.
    pub fn to_select(&self) -> Select {
        let conjuncts = self
            .joins
            .iter()
            .map(JoinPredicate::to_expr)
            .chain(self.selections.iter().map(|s| s.expr.clone()));
        Select {
            items: self.select_items(),
            from: self
                .instances
                .iter()
                .map(|i| FromItem {
                    factor: TableFactor::Table {
                        name: i.base_table.clone(),
                        alias: Some(i.alias.clone()),
                    },
                    joins: Vec::new(),
                })
                .collect(),
            selection: Expr::conjunction(conjuncts),
        }
    }

    pub fn select_items(&self) -> Vec<SelectItem> {
        self.output
            .iter()
            .map(|o| SelectItem::Expr {
                expr: o.expr.clone(),
                alias: o.alias.clone(),
            })
            .collect()
    }

    pub fn to_sql(&self) -> String {
        self.to_select().to_string()
    }

    /// Every `(alias, column)` referenced anywhere in the query.
    pub fn referenced_columns(&self) -> BTreeMap<String, BTreeSet<String>> {
        let mut out: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let mut add = |c: &ColumnRef| {
            if let Some(q) = &c.qualifier {
                out.entry(q.clone()).or_default().insert(c.name.clone());
            }
        };
        for j in &self.joins {
            add(&ColumnRef::qualified(&j.left.alias, &j.left.column));
            add(&ColumnRef::qualified(&j.right.alias, &j.right.column));
        }
        for s in &self.selections {
            s.expr.visit_columns(&mut add);
        }
        for o in &self.output {
            o.expr.visit_columns(&mut add);
        }
        out
    }
}

fn as_equi_join(expr: &Expr) -> Option<(AttrRef, AttrRef)> {
    let Expr::Compare {
        left,
        op: CmpOp::Eq,
        right,
    } = expr
    else {
        return None;
    };
    match (left.as_ref(), right.as_ref()) {
        (Expr::Column(l), Expr::Column(r)) => {
            let (la, ra) = (l.qualifier.as_ref()?, r.qualifier.as_ref()?);
            (la != ra).then(|| (AttrRef::new(la, &l.name), AttrRef::new(ra, &r.name)))
        }
        _ => None,
    }
}

struct Resolver<'a> {
    instances: &'a [TableInstance],
}

impl Resolver<'_> {
    /// Qualifies every column reference, checking alias and column existence.
    fn resolve(&self, expr: &Expr) -> Result<Expr, QueryError> {
        let mut error = None;
        let resolved = expr.map_columns(&mut |c| match self.resolve_column(c) {
            Ok(c) => Expr::Column(c),
            Err(e) => {
                error.get_or_insert(e);
                Expr::Column(c.clone())
            }
        });
        match error {
            Some(e) => Err(e),
            None => Ok(resolved),
        }
    }

    fn resolve_column(&self, c: &ColumnRef) -> Result<ColumnRef, QueryError> {
        match &c.qualifier {
            Some(q) => {
                let inst = self
                    .instances
                    .iter()
                    .find(|i| &i.alias == q)
                    .ok_or_else(|| QueryError::UnknownAlias(q.clone()))?;
                if !inst.columns.contains(&c.name) {
                    return Err(QueryError::UnknownColumn {
                        alias: q.clone(),
                        column: c.name.clone(),
                    });
                }
                Ok(c.clone())
            }
            None => {
                let mut owners = self.instances.iter().filter(|i| i.columns.contains(&c.name));
                match (owners.next(), owners.next()) {
                    (Some(inst), None) => Ok(ColumnRef::qualified(&inst.alias, &c.name)),
                    (Some(_), Some(_)) => Err(QueryError::AmbiguousColumn(c.name.clone())),
                    (None, _) => Err(QueryError::UnresolvedColumn(c.name.clone())),
                }
            }
        }
    }

    fn is_key(&self, cat: &impl SchemaInfo, attr: &AttrRef) -> Result<bool, QueryError> {
        let inst = self
            .instances
            .iter()
            .find(|i| i.alias == attr.alias)
            .ok_or_else(|| QueryError::UnknownAlias(attr.alias.clone()))?;
        Ok(cat.is_key_column(&inst.base_table, &attr.column)?)
    }
}

/// Re-classifies an equi-join between two instances of `q`.
pub(crate) fn classify(
    q_instances: &[TableInstance],
    cat: &impl SchemaInfo,
    left: AttrRef,
    right: AttrRef,
) -> Result<JoinPredicate, QueryError> {
    let resolver = Resolver {
        instances: q_instances,
    };
    let left_key = resolver.is_key(cat, &left)?;
    let right_key = resolver.is_key(cat, &right)?;
    Ok(JoinPredicate::classified(left, right, left_key, right_key))
}
