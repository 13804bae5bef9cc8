//! Renders a join order as SQL that an engine executes in that order.
//!
//! Two forms are produced:
//!
//! * **subquery**: one nesting level per partition. The first partition is
//!   the innermost derived table; each following partition wraps the previous
//!   level and joins its own tables to it. Columns needed by outer levels are
//!   exported under `<alias>_<column>` names.
//! * **leftdeep**: a single `JOIN ... ON` chain in sequence order, each join
//!   predicate attached to the first step where both of its tables are present.
//!
//! Engines only honour the written order when join reordering across FROM
//! items and subqueries is switched off; [`render_settings`] produces the
//! session statements that do that.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::planner::JoinOrder;
use crate::sql::{ColumnRef, Expr, FromItem, Join, JoinConstraint, Select, SelectItem, TableFactor};
use crate::sqlfront::{AttrRef, QueryModel};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RewriteError {
    #[error("order does not match query: {0}")]
    Mismatch(String),
    #[error("exported name `{name}` is produced by both {first} and {second}")]
    RenameCollision {
        name: String,
        first: String,
        second: String,
    },
    #[error("unknown engine profile `{0}` (expected generic or postgres-compatible)")]
    UnknownProfile(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineProfile {
    Generic,
    PostgresCompatible,
}

impl FromStr for EngineProfile {
    type Err = RewriteError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "generic" => Ok(Self::Generic),
            "postgres-compatible" | "postgres" | "postgresql" => Ok(Self::PostgresCompatible),
            other => Err(RewriteError::UnknownProfile(other.to_string())),
        }
    }
}

impl fmt::Display for EngineProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Generic => "generic",
            Self::PostgresCompatible => "postgres-compatible",
        })
    }
}

/// Session statements that stop the engine from reordering the written joins.
pub fn render_settings(target: EngineProfile) -> Vec<String> {
    match target {
        EngineProfile::Generic => Vec::new(),
        EngineProfile::PostgresCompatible => vec![
            "SET from_collapse_limit = 1".to_string(),
            "SET join_collapse_limit = 1".to_string(),
        ],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RewriteMode {
    Subquery,
    Leftdeep,
}

impl FromStr for RewriteMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "subquery" => Ok(Self::Subquery),
            "leftdeep" | "left-deep" => Ok(Self::Leftdeep),
            other => Err(format!("unknown rewrite mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RewrittenQuery {
    pub mode: RewriteMode,
    pub sql: String,
    /// For each nesting level (innermost first) the columns it exports.
    pub exported_column_map: Vec<BTreeMap<AttrRef, String>>,
    pub prologue: Vec<String>,
    pub warnings: Vec<String>,
}

impl RewrittenQuery {
    /// Replaces the prologue with the statements for `target`.
    pub fn for_target(mut self, target: EngineProfile) -> Self {
        self.prologue = render_settings(target);
        self
    }

    /// Prologue and query as one script, statements terminated by `;`.
    pub fn script(&self) -> String {
        let mut out = String::new();
        for stmt in &self.prologue {
            out.push_str(stmt);
            out.push_str(";\n");
        }
        out.push_str(&self.sql);
        out.push_str(";\n");
        out
    }
}

fn check_aliases(q: &QueryModel, o: &JoinOrder) -> Result<(), RewriteError> {
    let query: BTreeSet<&str> = q.aliases().into_iter().collect();
    let order: BTreeSet<&str> = o.sequence.iter().map(String::as_str).collect();
    if query != order || order.len() != o.sequence.len() {
        return Err(RewriteError::Mismatch(format!(
            "query aliases {:?} vs order {:?}",
            query, o.sequence
        )));
    }
    let flattened: Vec<&String> = o.partitions.iter().flat_map(|p| &p.members).collect();
    if flattened.len() != o.sequence.len() || flattened.iter().zip(&o.sequence).any(|(a, b)| *a != b) {
        return Err(RewriteError::Mismatch(
            "partitions are not contiguous segments of the sequence".into(),
        ));
    }
    Ok(())
}

fn table_factor(q: &QueryModel, alias: &str) -> TableFactor {
    let inst = q.instance(alias).expect("alias checked");
    TableFactor::Table {
        name: inst.base_table.clone(),
        alias: Some(alias.to_string()),
    }
}

/// Keeps output column names stable when a bare column gets rewritten.
fn output_item(expr: Expr, original: &Expr, alias: &Option<String>) -> SelectItem {
    let alias = match (alias, original) {
        (Some(a), _) => Some(a.clone()),
        (None, Expr::Column(c)) => Some(c.name.clone()),
        (None, _) => None,
    };
    SelectItem::Expr { expr, alias }
}

fn derived_alias(q: &QueryModel, level: usize) -> String {
    let mut name = format!("sq{}", level + 1);
    while q.instance(&name).is_some() {
        name.push('_');
    }
    name
}

/// Nested-subquery form: one level per partition, first partition innermost.
pub fn rewrite_subquery(q: &QueryModel, o: &JoinOrder) -> Result<RewrittenQuery, RewriteError> {
    check_aliases(q, o)?;
    let levels = o.partitions.len();
    let level_of: BTreeMap<&str, usize> = o
        .partitions
        .iter()
        .enumerate()
        .flat_map(|(i, p)| p.members.iter().map(move |m| (m.as_str(), i)))
        .collect();
    let max_level = |aliases: &mut dyn Iterator<Item = &str>| {
        aliases.map(|a| level_of[a]).max().unwrap_or(0)
    };

    let join_level: Vec<usize> = q
        .joins
        .iter()
        .map(|j| max_level(&mut j.aliases().into_iter()))
        .collect();
    let selection_level: Vec<usize> = q
        .selections
        .iter()
        .map(|s| max_level(&mut s.aliases.iter().map(String::as_str)))
        .collect();
    let outer = levels - 1;

    // Every (alias, column) used at a level above the one that introduces it
    // must be exported by each level in between.
    let mut exports: Vec<BTreeSet<AttrRef>> = vec![BTreeSet::new(); levels];
    let mut need = |attr: AttrRef, used_at: usize| {
        for level in exports.iter_mut().take(used_at).skip(level_of[attr.alias.as_str()]) {
            level.insert(attr.clone());
        }
    };
    for (j, &lvl) in q.joins.iter().zip(&join_level) {
        need(j.left.clone(), lvl);
        need(j.right.clone(), lvl);
    }
    let column_attrs = |e: &Expr| -> Vec<AttrRef> {
        e.columns()
            .into_iter()
            .filter_map(|c| c.qualifier.as_ref().map(|a| AttrRef::new(a, &c.name)))
            .collect()
    };
    for (s, &lvl) in q.selections.iter().zip(&selection_level) {
        column_attrs(&s.expr).into_iter().for_each(|a| need(a, lvl));
    }
    for item in &q.output {
        column_attrs(&item.expr).into_iter().for_each(|a| need(a, outer));
    }

    let mut exported_column_map = Vec::with_capacity(levels);
    for level in &exports {
        let mut names: BTreeMap<String, &AttrRef> = BTreeMap::new();
        let mut map = BTreeMap::new();
        for attr in level {
            let name = format!("{}_{}", attr.alias, attr.column);
            if let Some(prev) = names.insert(name.clone(), attr) {
                return Err(RewriteError::RenameCollision {
                    name,
                    first: prev.to_string(),
                    second: attr.to_string(),
                });
            }
            map.insert(attr.clone(), name);
        }
        exported_column_map.push(map);
    }

    // Column reference as seen from `level`.
    let reference = |c: &ColumnRef, level: usize| -> Expr {
        let alias = c.qualifier.as_deref().expect("resolved reference");
        if level_of[alias] == level {
            Expr::Column(c.clone())
        } else {
            let name = &exported_column_map[level - 1][&AttrRef::new(alias, &c.name)];
            Expr::column(&derived_alias(q, level - 1), name)
        }
    };

    let mut inner: Option<Select> = None;
    for (level, partition) in o.partitions.iter().enumerate() {
        let mut from = Vec::new();
        if let Some(sub) = inner.take() {
            from.push(FromItem {
                factor: TableFactor::Derived {
                    subquery: Box::new(sub),
                    alias: derived_alias(q, level - 1),
                },
                joins: vec![],
            });
        }
        for member in &partition.members {
            from.push(FromItem {
                factor: table_factor(q, member),
                joins: vec![],
            });
        }
        let joins = q
            .joins
            .iter()
            .zip(&join_level)
            .filter(|(_, &l)| l == level)
            .map(|(j, _)| j.to_expr());
        let selections = q
            .selections
            .iter()
            .zip(&selection_level)
            .filter(|(_, &l)| l == level)
            .map(|(s, _)| s.expr.clone());
        let selection = Expr::conjunction(
            joins
                .chain(selections)
                .map(|e| e.map_columns(&mut |c| reference(c, level))),
        );
        let items = if level == outer {
            q.output
                .iter()
                .map(|o| output_item(o.expr.map_columns(&mut |c| reference(c, level)), &o.expr, &o.alias))
                .collect()
        } else if exported_column_map[level].is_empty() {
            vec![SelectItem::Expr {
                expr: Expr::Literal(crate::sql::Literal::Int(1)),
                alias: Some("unit".into()),
            }]
        } else {
            exported_column_map[level]
                .iter()
                .map(|(attr, name)| SelectItem::Expr {
                    expr: reference(&ColumnRef::qualified(&attr.alias, &attr.column), level),
                    alias: Some(name.clone()),
                })
                .collect()
        };
        inner = Some(Select {
            items,
            from,
            selection,
        });
    }

    Ok(RewrittenQuery {
        mode: RewriteMode::Subquery,
        sql: inner.expect("at least one partition").to_string(),
        exported_column_map: exported_column_map.into_iter().take(outer).collect(),
        prologue: render_settings(EngineProfile::PostgresCompatible),
        warnings: o.warnings.clone(),
    })
}

/// Flat left-deep form: one explicit join chain in sequence order.
pub fn rewrite_leftdeep(q: &QueryModel, o: &JoinOrder) -> Result<RewrittenQuery, RewriteError> {
    check_aliases(q, o)?;
    let position: BTreeMap<&str, usize> = o
        .sequence
        .iter()
        .enumerate()
        .map(|(i, a)| (a.as_str(), i))
        .collect();
    let mut on_clauses: Vec<Vec<Expr>> = vec![Vec::new(); o.sequence.len()];
    for j in &q.joins {
        let step = j.aliases().iter().map(|a| position[a]).max().unwrap_or(0);
        on_clauses[step].push(j.to_expr());
    }

    let mut warnings = Vec::new();
    let mut joins = Vec::new();
    for (i, alias) in o.sequence.iter().enumerate().skip(1) {
        let constraint = match Expr::conjunction(std::mem::take(&mut on_clauses[i])) {
            Some(on) => JoinConstraint::On(on),
            None => {
                warnings.push(format!(
                    "Cartesian product: `{alias}` at position {i} joins no earlier table"
                ));
                JoinConstraint::Cross
            }
        };
        joins.push(Join {
            factor: table_factor(q, alias),
            constraint,
        });
    }
    let select = Select {
        items: q
            .output
            .iter()
            .map(|o| SelectItem::Expr {
                expr: o.expr.clone(),
                alias: o.alias.clone(),
            })
            .collect(),
        from: vec![FromItem {
            factor: table_factor(q, &o.sequence[0]),
            joins,
        }],
        selection: Expr::conjunction(q.selections.iter().map(|s| s.expr.clone())),
    };
    Ok(RewrittenQuery {
        mode: RewriteMode::Leftdeep,
        sql: select.to_string(),
        exported_column_map: Vec::new(),
        prologue: render_settings(EngineProfile::PostgresCompatible),
        warnings,
    })
}

pub fn rewrite(q: &QueryModel, o: &JoinOrder, mode: RewriteMode) -> Result<RewrittenQuery, RewriteError> {
    match mode {
        RewriteMode::Subquery => rewrite_subquery(q, o),
        RewriteMode::Leftdeep => rewrite_leftdeep(q, o),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{job_catalog, Catalog};
    use crate::planner::{simpli2_order, size_order, Direction};
    use crate::sql::{parse_select, Grammar};
    use crate::sqlfront::{build_join_graph, parse_query, parse_query_extended};

    fn plan(sql: &str, cat: &Catalog) -> (QueryModel, JoinOrder) {
        let q = parse_query(sql, cat).unwrap();
        let g = build_join_graph(&q, cat, false).unwrap();
        let o = simpli2_order(&g);
        (q, o)
    }

    fn two_table_catalog() -> Catalog {
        Catalog::from_json(
            r#"{"tables": [
                {"name": "A", "row_count": 100, "columns": ["id", "v"], "unique_keys": [["id"]]},
                {"name": "B", "row_count": 10, "columns": ["id", "a_id"], "unique_keys": [["id"]]}
            ]}"#,
        )
        .unwrap()
    }

    #[test]
    fn settings_per_profile() {
        assert_eq!(render_settings(EngineProfile::PostgresCompatible).len(), 2);
        assert!(render_settings(EngineProfile::Generic).is_empty());
        assert!("oracle".parse::<EngineProfile>().is_err());
    }

    #[test]
    fn job_18a_subquery_structure() {
        let cat = job_catalog();
        let (q, o) = plan(include_str!("../data/job/queries/18a.sql"), &cat);
        let r = rewrite_subquery(&q, &o).unwrap();
        assert_eq!(r.prologue.len(), 2);
        assert_eq!(r.exported_column_map.len(), 2);
        let level1 = &r.exported_column_map[0];
        assert_eq!(level1[&AttrRef::new("t", "id")], "t_id");
        let parsed = parse_select(&r.sql, Grammar::Extended).unwrap();
        // Outer level: derived table + ci + n.
        let names: Vec<&str> = parsed.from.iter().map(|f| f.factor.reference_name()).collect();
        assert_eq!(names, ["sq2", "ci", "n"]);
        let TableFactor::Derived { subquery: middle, .. } = &parsed.from[0].factor else {
            panic!("expected derived table")
        };
        let names: Vec<&str> = middle.from.iter().map(|f| f.factor.reference_name()).collect();
        assert_eq!(names, ["sq1", "mi", "it1"]);
        let TableFactor::Derived { subquery: innermost, .. } = &middle.from[0].factor else {
            panic!("expected derived table")
        };
        let names: Vec<&str> = innermost.from.iter().map(|f| f.factor.reference_name()).collect();
        assert_eq!(names, ["mi_idx", "it2", "t"]);
    }

    #[test]
    fn single_partition_has_no_nesting() {
        let cat = two_table_catalog();
        let (q, o) = plan("SELECT a.v FROM A a, B b WHERE a.id = b.a_id AND a.v > 3", &cat);
        assert_eq!(o.partitions.len(), 1);
        let r = rewrite_subquery(&q, &o).unwrap();
        assert!(!r.sql.contains('('));
        assert!(r.exported_column_map.is_empty());
        assert_eq!(r.prologue.len(), 2);
    }

    #[test]
    fn level_local_columns_are_not_exported() {
        let cat = job_catalog();
        let (q, o) = plan(include_str!("../data/job/queries/18a.sql"), &cat);
        let r = rewrite_subquery(&q, &o).unwrap();
        // it2.info and it2.id are only used inside the innermost level.
        for level in &r.exported_column_map {
            assert!(!level.contains_key(&AttrRef::new("it2", "info")));
            assert!(!level.contains_key(&AttrRef::new("it2", "id")));
        }
    }

    #[test]
    fn rename_collision_is_an_error() {
        let cat = Catalog::from_json(
            r#"{"tables": [
                {"name": "P", "row_count": 5, "columns": ["b_c", "k"], "unique_keys": []},
                {"name": "Q", "row_count": 6, "columns": ["c", "k"], "unique_keys": []},
                {"name": "R", "row_count": 7, "columns": ["k"], "unique_keys": []}
            ]}"#,
        )
        .unwrap();
        let q = parse_query(
            "SELECT a.b_c, a_b.c FROM P a, Q a_b, R r WHERE a.k = a_b.k AND a_b.k = r.k",
            &cat,
        )
        .unwrap();
        let g = build_join_graph(&q, &cat, false).unwrap();
        let o = simpli2_order(&g);
        assert_eq!(o.partitions.len(), 3);
        assert!(matches!(
            rewrite_subquery(&q, &o),
            Err(RewriteError::RenameCollision { .. })
        ));
    }

    #[test]
    fn leftdeep_chain_for_18a() {
        let cat = job_catalog();
        let (q, o) = plan(include_str!("../data/job/queries/18a.sql"), &cat);
        let r = rewrite_leftdeep(&q, &o).unwrap();
        let parsed = parse_select(&r.sql, Grammar::Extended).unwrap();
        assert_eq!(parsed.from.len(), 1);
        let chain: Vec<&str> = std::iter::once(parsed.from[0].factor.reference_name())
            .chain(parsed.from[0].joins.iter().map(|j| j.factor.reference_name()))
            .collect();
        assert_eq!(chain, ["mi_idx", "it2", "t", "mi", "it1", "ci", "n"]);
        let on_counts: Vec<usize> = parsed.from[0]
            .joins
            .iter()
            .map(|j| match &j.constraint {
                JoinConstraint::On(e) => e.clone().split_conjunction().len(),
                JoinConstraint::Cross => 0,
            })
            .collect();
        // it2, t: one each; mi: with t and mi_idx; it1: one; ci: with t, mi
        // and mi_idx; n: one.
        assert_eq!(on_counts, [1, 1, 2, 1, 3, 1]);
        assert_eq!(on_counts.iter().sum::<usize>(), 9);
        let reparsed = parse_query_extended(&r.sql, &cat).unwrap();
        assert_eq!(reparsed.joins.len(), q.joins.len());
        assert_eq!(reparsed.selections.len(), q.selections.len());
    }

    #[test]
    fn leftdeep_cross_join_for_cartesian_step() {
        let cat = two_table_catalog();
        let q = parse_query("SELECT a.v FROM A a, B b", &cat).unwrap();
        let g = build_join_graph(&q, &cat, false).unwrap();
        let o = size_order(&g, Direction::Ascending, false);
        let r = rewrite_leftdeep(&q, &o).unwrap();
        assert!(r.sql.contains("CROSS JOIN"));
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn mismatched_order_rejected() {
        let cat = two_table_catalog();
        let (q, mut o) = plan("SELECT a.v FROM A a, B b WHERE a.id = b.a_id", &cat);
        o.sequence.push("zz".into());
        assert!(matches!(rewrite_subquery(&q, &o), Err(RewriteError::Mismatch(_))));
        assert!(matches!(rewrite_leftdeep(&q, &o), Err(RewriteError::Mismatch(_))));
    }
}
