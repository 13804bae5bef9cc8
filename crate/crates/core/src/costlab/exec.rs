use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use super::eval::{compile, ColumnName, Compiled, Relation};
use super::table::{Database, MiniTable, Value};
use super::ExecError;
use crate::planner::JoinOrder;
use crate::sql::{CmpOp, ColumnRef, Expr, Select, SelectItem, TableFactor};
use crate::sqlfront::QueryModel;

pub const DEFAULT_ROW_CEILING: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecOptions {
    /// Largest intermediate result a join step may produce.
    pub row_ceiling: u64,
}

impl Default for ExecOptions {
    fn default() -> Self {
        Self {
            row_ceiling: DEFAULT_ROW_CEILING,
        }
    }
}

/// Exact intermediate result sizes of one join order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostReport {
    pub order: JoinOrder,
    /// Output size of each join step; entry `k` covers the first `k + 2` tables.
    pub step_cardinalities: Vec<u64>,
    /// Sum of `step_cardinalities`.
    pub analytical_cost: u64,
}

impl CostReport {
    pub fn new(order: JoinOrder, step_cardinalities: Vec<u64>) -> Self {
        let analytical_cost = step_cardinalities.iter().sum();
        Self {
            order,
            step_cardinalities,
            analytical_cost,
        }
    }
}

pub(crate) fn qualified(table: &MiniTable, qualifier: &str) -> Relation {
    Relation {
        columns: table
            .columns
            .iter()
            .map(|c| ColumnName {
                qualifier: Some(qualifier.to_string()),
                name: c.clone(),
            })
            .collect(),
        rows: table.rows.clone(),
    }
}

/// Sources of one FROM scope, pre-filtered by their single-source
/// conjuncts, plus the conjuncts that span several sources.
pub(crate) struct Prepared {
    pub names: Vec<String>,
    pub sources: Vec<Relation>,
    /// Multi-source conjuncts with the bitmask of sources they touch.
    spanning: Vec<(Expr, u64)>,
}

fn source_mask(e: &Expr, names: &[String], sources: &[Relation]) -> Result<u64, ExecError> {
    let mut mask = 0u64;
    for c in e.columns() {
        let hits: Vec<usize> = match &c.qualifier {
            Some(q) => names.iter().enumerate().filter(|(_, n)| *n == q).map(|(i, _)| i).collect(),
            None => (0..sources.len())
                .filter(|&i| sources[i].columns.iter().any(|col| col.name == c.name))
                .collect(),
        };
        match hits.as_slice() {
            [i] => mask |= 1 << i,
            [] => return Err(ExecError::UnknownColumn(c.to_string())),
            _ => return Err(ExecError::AmbiguousColumn(c.to_string())),
        }
    }
    Ok(mask)
}

fn filter(rel: Relation, preds: &[Compiled]) -> Relation {
    if preds.is_empty() {
        return rel;
    }
    let rows = rel
        .rows
        .into_iter()
        .filter(|r| preds.iter().all(|p| p.truth(r) == Some(true)))
        .collect();
    Relation {
        columns: rel.columns,
        rows,
    }
}

impl Prepared {
    pub fn new(names: Vec<String>, sources: Vec<Relation>, conjuncts: Vec<Expr>) -> Result<Self, ExecError> {
        if sources.len() > 64 {
            return Err(ExecError::Unsupported("more than 64 tables in one FROM".into()));
        }
        let mut local: Vec<Vec<Compiled>> = vec![Vec::new(); sources.len()];
        let mut spanning = Vec::new();
        for e in conjuncts {
            let mask = source_mask(&e, &names, &sources)?;
            if mask.count_ones() <= 1 {
                let i = mask.trailing_zeros().min(sources.len().saturating_sub(1) as u32) as usize;
                let rel = &sources[i];
                local[i].push(compile(&e, &|c| rel.resolve(c))?);
            } else {
                spanning.push((e, mask));
            }
        }
        let sources = sources
            .into_iter()
            .zip(local)
            .map(|(rel, preds)| filter(rel, &preds))
            .collect();
        Ok(Self {
            names,
            sources,
            spanning,
        })
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn touches(&self, a: u64, b: u64) -> bool {
        self.spanning.iter().any(|(_, m)| m & a != 0 && m & b != 0)
    }

    /// Joins source `next` onto `acc`, which holds the sources in `acc_mask`.
    /// Equalities between plain columns drive a hash join; everything else
    /// that becomes evaluable is checked on each output row.
    pub fn join(&self, acc: &Relation, acc_mask: u64, next: usize, ceiling: u64) -> Result<Relation, ExecError> {
        let right = &self.sources[next];
        let bit = 1u64 << next;
        let mut columns = acc.columns.clone();
        columns.extend(right.columns.iter().cloned());
        let combined = Relation {
            columns,
            rows: Vec::new(),
        };
        let mut left_keys = Vec::new();
        let mut right_keys = Vec::new();
        let mut residual = Vec::new();
        for (e, mask) in &self.spanning {
            if mask & bit == 0 || mask & !(acc_mask | bit) != 0 {
                continue;
            }
            if let Some((l, r)) = equi_columns(e, acc, right) {
                left_keys.push(l);
                right_keys.push(r);
            } else {
                residual.push(compile(e, &|c| combined.resolve(c))?);
            }
        }

        let mut rows = Vec::new();
        let emit = |l: &[Value], r: &[Value], rows: &mut Vec<Vec<Value>>| -> Result<(), ExecError> {
            let mut row = Vec::with_capacity(l.len() + r.len());
            row.extend_from_slice(l);
            row.extend_from_slice(r);
            if residual.iter().all(|p| p.truth(&row) == Some(true)) {
                if rows.len() as u64 >= ceiling {
                    return Err(ExecError::RowCeiling {
                        limit: ceiling,
                        table: self.names[next].clone(),
                    });
                }
                rows.push(row);
            }
            Ok(())
        };
        if left_keys.is_empty() {
            for l in &acc.rows {
                for r in &right.rows {
                    emit(l, r, &mut rows)?;
                }
            }
        } else {
            let mut index: HashMap<Vec<Value>, Vec<usize>> = HashMap::new();
            for (i, r) in right.rows.iter().enumerate() {
                if let Some(k) = key(r, &right_keys) {
                    index.entry(k).or_default().push(i);
                }
            }
            for l in &acc.rows {
                let Some(k) = key(l, &left_keys) else { continue };
                if let Some(matches) = index.get(&k) {
                    for &i in matches {
                        emit(l, &right.rows[i], &mut rows)?;
                    }
                }
            }
        }
        Ok(Relation {
            columns: combined.columns,
            rows,
        })
    }

    /// Joins the sources in `order`, returning the result and the output size
    /// of every join step.
    pub fn run(&self, order: &[usize], ceiling: u64) -> Result<(Relation, Vec<u64>), ExecError> {
        let (&first, rest) = order.split_first().expect("at least one source");
        let mut acc = self.sources[first].clone();
        let mut mask = 1u64 << first;
        let mut steps = Vec::with_capacity(rest.len());
        for &next in rest {
            acc = self.join(&acc, mask, next, ceiling)?;
            mask |= 1 << next;
            steps.push(acc.len() as u64);
        }
        Ok((acc, steps))
    }

    /// Sources in written order, except that each step prefers the first
    /// remaining source that shares a conjunct with the prefix.
    pub fn connected_order(&self) -> Vec<usize> {
        let mut order = vec![0];
        let mut mask = 1u64;
        let mut left: Vec<usize> = (1..self.len()).collect();
        while !left.is_empty() {
            let pick = left
                .iter()
                .position(|&i| self.touches(mask, 1 << i))
                .unwrap_or(0);
            let v = left.remove(pick);
            order.push(v);
            mask |= 1 << v;
        }
        order
    }
}

/// Partial rows with multiplicities, narrowed to the columns that conjuncts
/// not yet fully joined still need. Cardinality is the multiplicity sum.
#[derive(Debug, Clone)]
pub(crate) struct Counted {
    columns: Vec<ColumnName>,
    rows: Vec<(Vec<Value>, u64)>,
    total: u64,
}

impl Counted {
    pub fn total(&self) -> u64 {
        self.total
    }
}

impl Prepared {
    /// Positions in `rel` (holding the sources in `mask`) still referenced by
    /// a conjunct that reaches outside `mask`.
    fn pending_positions(&self, rel: &Relation, mask: u64) -> Vec<usize> {
        let mut keep = BTreeSet::new();
        for (e, m) in &self.spanning {
            if m & !mask == 0 {
                continue;
            }
            for c in e.columns() {
                if let Ok(p) = rel.resolve(c) {
                    keep.insert(p);
                }
            }
        }
        keep.into_iter().collect()
    }

    pub fn counted_source(&self, i: usize) -> Counted {
        let src = &self.sources[i];
        let keep = self.pending_positions(src, 1 << i);
        let mut groups: HashMap<Vec<Value>, u64> = HashMap::new();
        for row in &src.rows {
            *groups.entry(keep.iter().map(|&p| row[p].clone()).collect()).or_default() += 1;
        }
        Counted {
            columns: keep.iter().map(|&p| src.columns[p].clone()).collect(),
            rows: groups.into_iter().collect(),
            total: src.len() as u64,
        }
    }

    /// Like [`Prepared::join`], but only counts: `right` must be
    /// `counted_source(next)`.
    pub fn count_join(
        &self,
        acc: &Counted,
        acc_mask: u64,
        right: &Counted,
        next: usize,
        ceiling: u64,
    ) -> Result<Counted, ExecError> {
        let bit = 1u64 << next;
        let left_rel = Relation {
            columns: acc.columns.clone(),
            rows: Vec::new(),
        };
        let right_rel = Relation {
            columns: right.columns.clone(),
            rows: Vec::new(),
        };
        let mut columns = acc.columns.clone();
        columns.extend(right.columns.iter().cloned());
        let combined = Relation {
            columns,
            rows: Vec::new(),
        };
        let keep = self.pending_positions(&combined, acc_mask | bit);
        let mut left_keys = Vec::new();
        let mut right_keys = Vec::new();
        let mut residual = Vec::new();
        for (e, mask) in &self.spanning {
            if mask & bit == 0 || mask & !(acc_mask | bit) != 0 {
                continue;
            }
            if let Some((l, r)) = equi_columns(e, &left_rel, &right_rel) {
                left_keys.push(l);
                right_keys.push(r);
            } else {
                residual.push(compile(e, &|c| combined.resolve(c))?);
            }
        }
        let mut groups: HashMap<Vec<Value>, u64> = HashMap::new();
        let mut total = 0u64;
        let mut emit = |l: &(Vec<Value>, u64), r: &(Vec<Value>, u64)| -> Result<(), ExecError> {
            let mut row = Vec::with_capacity(l.0.len() + r.0.len());
            row.extend_from_slice(&l.0);
            row.extend_from_slice(&r.0);
            if residual.iter().all(|p| p.truth(&row) == Some(true)) {
                total = total.saturating_add(l.1.saturating_mul(r.1));
                if total > ceiling {
                    return Err(ExecError::RowCeiling {
                        limit: ceiling,
                        table: self.names[next].clone(),
                    });
                }
                *groups.entry(keep.iter().map(|&p| row[p].clone()).collect()).or_default() += l.1 * r.1;
            }
            Ok(())
        };
        if left_keys.is_empty() {
            for l in &acc.rows {
                for r in &right.rows {
                    emit(l, r)?;
                }
            }
        } else {
            let mut index: HashMap<Vec<Value>, Vec<usize>> = HashMap::new();
            for (i, r) in right.rows.iter().enumerate() {
                if let Some(k) = key(&r.0, &right_keys) {
                    index.entry(k).or_default().push(i);
                }
            }
            for l in &acc.rows {
                let Some(k) = key(&l.0, &left_keys) else { continue };
                if let Some(matches) = index.get(&k) {
                    for &i in matches {
                        emit(l, &right.rows[i])?;
                    }
                }
            }
        }
        Ok(Counted {
            columns: keep.iter().map(|&p| combined.columns[p].clone()).collect(),
            rows: groups.into_iter().collect(),
            total,
        })
    }
}

fn key(row: &[Value], positions: &[usize]) -> Option<Vec<Value>> {
    positions.iter().map(|&p| row[p].join_key()).collect()
}

/// `a = b` with one column in `left` and the other in `right`.
fn equi_columns(e: &Expr, left: &Relation, right: &Relation) -> Option<(usize, usize)> {
    let Expr::Compare { left: a, op: CmpOp::Eq, right: b } = e else { return None };
    let (Expr::Column(a), Expr::Column(b)) = (a.as_ref(), b.as_ref()) else { return None };
    let pair = |x: &ColumnRef, y: &ColumnRef| Some((left.resolve(x).ok()?, right.resolve(y).ok()?));
    pair(a, b).or_else(|| pair(b, a))
}

fn item_name(expr: &Expr, alias: &Option<String>) -> String {
    match (alias, expr) {
        (Some(a), _) => a.clone(),
        (None, Expr::Column(c)) => c.name.clone(),
        (None, e) => e.to_string(),
    }
}

/// Evaluates the SELECT list over `rel`. Aggregate lists yield one row.
pub(crate) fn project(rel: &Relation, items: &[SelectItem]) -> Result<Relation, ExecError> {
    let aggregate = items
        .iter()
        .any(|i| matches!(i, SelectItem::Expr { expr, .. } if expr.contains_aggregate()));
    let mut columns = Vec::new();
    if aggregate {
        let mut row = Vec::new();
        for item in items {
            let SelectItem::Expr { expr, alias } = item else {
                return Err(ExecError::Unsupported("`*` mixed with aggregates".into()));
            };
            row.push(aggregate_value(rel, expr)?);
            columns.push(ColumnName {
                qualifier: None,
                name: item_name(expr, alias),
            });
        }
        return Ok(Relation {
            columns,
            rows: vec![row],
        });
    }
    let mut compiled = Vec::new();
    for item in items {
        match item {
            SelectItem::Wildcard => {
                for (i, c) in rel.columns.iter().enumerate() {
                    compiled.push(Compiled::Col(i));
                    columns.push(ColumnName {
                        qualifier: None,
                        name: c.name.clone(),
                    });
                }
            }
            SelectItem::Expr { expr, alias } => {
                compiled.push(compile(expr, &|c| rel.resolve(c))?);
                columns.push(ColumnName {
                    qualifier: None,
                    name: item_name(expr, alias),
                });
            }
        }
    }
    let rows = rel
        .rows
        .iter()
        .map(|r| compiled.iter().map(|c| c.value(r)).collect())
        .collect();
    Ok(Relation { columns, rows })
}

fn aggregate_value(rel: &Relation, expr: &Expr) -> Result<Value, ExecError> {
    match expr {
        Expr::Literal(l) => Ok(super::eval::literal_value(l)),
        Expr::Function { name, args, distinct } => {
            if name == "COUNT" && matches!(args.as_slice(), [Expr::Wildcard]) {
                return Ok(Value::Int(rel.len() as i64));
            }
            let [arg] = args.as_slice() else {
                return Err(ExecError::Unsupported(format!("{name} with {} arguments", args.len())));
            };
            if arg.contains_aggregate() {
                return Err(ExecError::Unsupported("nested aggregate".into()));
            }
            let c = compile(arg, &|col| rel.resolve(col))?;
            let mut values: Vec<Value> = rel.rows.iter().map(|r| c.value(r)).filter(|v| !v.is_null()).collect();
            if *distinct {
                let set: BTreeSet<Value> = values.into_iter().collect();
                values = set.into_iter().collect();
            }
            let pick = |want: std::cmp::Ordering| {
                values
                    .iter()
                    .cloned()
                    .reduce(|a, b| if b.sql_cmp(&a) == Some(want) { b } else { a })
                    .unwrap_or(Value::Null)
            };
            Ok(match name.as_str() {
                "MIN" => pick(std::cmp::Ordering::Less),
                "MAX" => pick(std::cmp::Ordering::Greater),
                "COUNT" => Value::Int(values.len() as i64),
                "SUM" => sum(&values)?,
                other => return Err(ExecError::Unsupported(format!("function {other}"))),
            })
        }
        other => Err(ExecError::Unsupported(format!(
            "`{other}` next to aggregates; only aggregates and literals are allowed"
        ))),
    }
}

fn sum(values: &[Value]) -> Result<Value, ExecError> {
    if values.is_empty() {
        return Ok(Value::Null);
    }
    if let Some(ints) = values
        .iter()
        .map(|v| match v {
            Value::Int(i) => Some(*i),
            _ => None,
        })
        .collect::<Option<Vec<i64>>>()
    {
        return Ok(Value::Int(ints.iter().sum()));
    }
    let mut total = 0.0;
    for v in values {
        match v {
            Value::Int(i) => total += *i as f64,
            Value::Float(f) => total += f,
            Value::Str(s) => {
                total += s
                    .parse::<f64>()
                    .map_err(|_| ExecError::Unsupported(format!("SUM over non-numeric `{s}`")))?
            }
            Value::Null => {}
        }
    }
    Ok(Value::Float(total))
}

fn table<'a>(db: &'a Database, name: &str) -> Result<&'a MiniTable, ExecError> {
    db.get(name).ok_or_else(|| ExecError::MissingTable(name.to_string()))
}

fn prepare_query(db: &Database, q: &QueryModel, aliases: &[String]) -> Result<Prepared, ExecError> {
    let mut sources = Vec::with_capacity(aliases.len());
    for alias in aliases {
        let inst = q
            .instance(alias)
            .ok_or_else(|| ExecError::OrderMismatch(format!("`{alias}` is not a table instance of the query")))?;
        sources.push(qualified(table(db, &inst.base_table)?, alias));
    }
    let conjuncts = q
        .joins
        .iter()
        .map(|j| j.to_expr())
        .chain(q.selections.iter().map(|s| s.expr.clone()))
        .collect();
    Prepared::new(aliases.to_vec(), sources, conjuncts)
}

pub(crate) fn prepare_model(db: &Database, q: &QueryModel) -> Result<Prepared, ExecError> {
    let aliases: Vec<String> = q.instances.iter().map(|i| i.alias.clone()).collect();
    prepare_query(db, q, &aliases)
}

/// Runs `q` joining tables in the order of `order.sequence`.
pub fn execute_order(
    db: &Database,
    q: &QueryModel,
    order: &JoinOrder,
    opts: &ExecOptions,
) -> Result<(Relation, CostReport), ExecError> {
    let mut expected: Vec<&str> = q.aliases();
    let mut got: Vec<&str> = order.sequence.iter().map(String::as_str).collect();
    expected.sort_unstable();
    got.sort_unstable();
    if expected != got {
        return Err(ExecError::OrderMismatch(format!(
            "order covers [{}] but the query has [{}]",
            got.join(", "),
            expected.join(", ")
        )));
    }
    let prepared = prepare_query(db, q, &order.sequence)?;
    let positions: Vec<usize> = (0..prepared.len()).collect();
    let (rel, steps) = prepared.run(&positions, opts.row_ceiling)?;
    let result = project(&rel, &q.select_items())?;
    Ok((result, CostReport::new(order.clone(), steps)))
}

/// Evaluates a SELECT of the extended grammar. Inner joins and comma joins
/// are treated alike: all ON and WHERE conjuncts form one pool.
pub fn eval_select(db: &Database, select: &Select, opts: &ExecOptions) -> Result<Relation, ExecError> {
    let mut names = Vec::new();
    let mut sources = Vec::new();
    let mut conjuncts: Vec<Expr> = select
        .selection
        .clone()
        .map(Expr::split_conjunction)
        .unwrap_or_default();
    for item in &select.from {
        let factors = std::iter::once(&item.factor).chain(item.joins.iter().map(|j| &j.factor));
        for factor in factors {
            names.push(factor.reference_name().to_string());
            sources.push(factor_relation(db, factor, opts)?);
        }
        for j in &item.joins {
            if let crate::sql::JoinConstraint::On(e) = &j.constraint {
                conjuncts.extend(e.clone().split_conjunction());
            }
        }
    }
    if sources.is_empty() {
        return Err(ExecError::Unsupported("SELECT without FROM".into()));
    }
    let prepared = Prepared::new(names, sources, conjuncts)?;
    let (rel, _) = prepared.run(&prepared.connected_order(), opts.row_ceiling)?;
    project(&rel, &select.items)
}

fn factor_relation(db: &Database, factor: &TableFactor, opts: &ExecOptions) -> Result<Relation, ExecError> {
    match factor {
        TableFactor::Table { name, .. } => Ok(qualified(table(db, name)?, factor.reference_name())),
        TableFactor::Derived { subquery, alias } => {
            let inner = eval_select(db, subquery, opts).map_err(|e| ExecError::InDerived {
                alias: alias.clone(),
                source: Box::new(e),
            })?;
            Ok(Relation {
                columns: inner
                    .columns
                    .into_iter()
                    .map(|c| ColumnName {
                        qualifier: Some(alias.clone()),
                        name: c.name,
                    })
                    .collect(),
                rows: inner.rows,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sql::{parse_select, Grammar};

    pub(crate) fn db() -> Database {
        let mut db = Database::new();
        for (name, csv) in [
            ("a", "id,x\n1,10\n2,20\n3,\n"),
            ("b", "id,a_id,y\n1,1,p\n2,1,q\n3,2,p\n4,,q\n"),
            ("c", "id,b_id\n1,1\n2,1\n3,3\n"),
        ] {
            db.insert(name.into(), MiniTable::from_csv(name, csv).unwrap());
        }
        db
    }

    fn eval(sql: &str) -> Relation {
        eval_select(&db(), &parse_select(sql, Grammar::Extended).unwrap(), &ExecOptions::default()).unwrap()
    }

    #[test]
    fn hash_join_skips_null_keys() {
        let r = eval("SELECT a.id, b.id FROM a, b WHERE a.id = b.a_id");
        assert_eq!(
            r.sorted_rows(),
            vec![
                vec![Value::Int(1), Value::Int(1)],
                vec![Value::Int(1), Value::Int(2)],
                vec![Value::Int(2), Value::Int(3)],
            ]
        );
    }

    #[test]
    fn residual_and_local_predicates() {
        let r = eval("SELECT COUNT(*) AS n FROM a JOIN b ON a.id = b.a_id AND b.y = 'p' WHERE a.x < 15");
        assert_eq!(r.rows, vec![vec![Value::Int(1)]]);
        let r = eval("SELECT COUNT(*) FROM a, b WHERE a.id < b.id");
        assert_eq!(r.rows, vec![vec![Value::Int(6)]]);
    }

    #[test]
    fn aggregates_over_empty_input() {
        let r = eval("SELECT MIN(a.x), COUNT(a.x), SUM(a.x), COUNT(*) FROM a WHERE a.id > 5");
        assert_eq!(r.rows, vec![vec![Value::Null, Value::Int(0), Value::Null, Value::Int(0)]]);
        let r = eval("SELECT MIN(a.x), MAX(a.x), COUNT(a.x), SUM(a.x), COUNT(DISTINCT b.a_id) FROM a, b");
        assert_eq!(
            r.rows,
            vec![vec![Value::Int(10), Value::Int(20), Value::Int(8), Value::Int(120), Value::Int(2)]]
        );
    }

    #[test]
    fn derived_tables_expose_renamed_columns() {
        let r = eval(
            "SELECT s.aid, c.id FROM (SELECT a.id AS aid, b.id AS bid FROM a JOIN b ON a.id = b.a_id) AS s \
             JOIN c ON c.b_id = s.bid",
        );
        assert_eq!(r.columns[0].name, "aid");
        assert_eq!(r.len(), 3);
    }

    #[test]
    fn ceiling_stops_cartesian_growth() {
        let err = eval_select(
            &db(),
            &parse_select("SELECT * FROM a, b, c", Grammar::Extended).unwrap(),
            &ExecOptions { row_ceiling: 20 },
        )
        .unwrap_err();
        assert!(matches!(err, ExecError::RowCeiling { limit: 20, .. }), "{err}");
    }

    #[test]
    fn errors_name_the_derived_level() {
        let err = eval_select(
            &db(),
            &parse_select("SELECT * FROM (SELECT a.nope FROM a) AS s1", Grammar::Extended).unwrap(),
            &ExecOptions::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("s1"), "{err}");
    }

    #[test]
    fn connected_order_avoids_written_cross_product() {
        let sel = parse_select("SELECT * FROM a, c, b WHERE a.id = b.a_id AND b.id = c.b_id", Grammar::Extended).unwrap();
        let opts = ExecOptions { row_ceiling: 5 };
        assert_eq!(eval_select(&db(), &sel, &opts).unwrap().len(), 3);
    }
}
