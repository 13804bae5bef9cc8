//! Expression compilation against a relation schema and row-wise evaluation
//! with three-valued logic.

use std::cmp::Ordering;

use super::table::Value;
use super::ExecError;
use crate::sql::{CmpOp, ColumnRef, Expr, Literal};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ColumnName {
    pub qualifier: Option<String>,
    pub name: String,
}

/// A bag of rows under a named column list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub columns: Vec<ColumnName>,
    pub rows: Vec<Vec<Value>>,
}

impl Relation {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn resolve(&self, c: &ColumnRef) -> Result<usize, ExecError> {
        let mut hits = self.columns.iter().enumerate().filter(|(_, col)| {
            col.name == c.name
                && match &c.qualifier {
                    Some(q) => col.qualifier.as_deref() == Some(q.as_str()),
                    None => true,
                }
        });
        match (hits.next(), hits.next()) {
            (Some((i, _)), None) => Ok(i),
            (None, _) => Err(ExecError::UnknownColumn(c.to_string())),
            (Some(_), Some(_)) => Err(ExecError::AmbiguousColumn(c.to_string())),
        }
    }

    /// Rows sorted, so that equal multisets compare equal.
    pub fn sorted_rows(&self) -> Vec<Vec<Value>> {
        let mut rows = self.rows.clone();
        rows.sort();
        rows
    }

    pub fn same_multiset(&self, other: &Relation) -> bool {
        self.columns.len() == other.columns.len() && self.sorted_rows() == other.sorted_rows()
    }
}

/// Expression with column references bound to row positions.
#[derive(Debug, Clone)]
pub(crate) enum Compiled {
    Col(usize),
    Lit(Value),
    Neg(Box<Compiled>),
    Not(Box<Compiled>),
    And(Box<Compiled>, Box<Compiled>),
    Or(Box<Compiled>, Box<Compiled>),
    Cmp(Box<Compiled>, CmpOp, Box<Compiled>),
    In(Box<Compiled>, Vec<Compiled>, bool),
    Between(Box<Compiled>, Box<Compiled>, Box<Compiled>, bool),
    Like(Box<Compiled>, Box<Compiled>, bool),
    IsNull(Box<Compiled>, bool),
}

pub(crate) fn literal_value(l: &Literal) -> Value {
    match l {
        Literal::Int(v) => Value::Int(*v),
        Literal::Decimal(d) => d.parse().map(Value::Float).unwrap_or(Value::Null),
        Literal::Str(s) => Value::Str(s.clone()),
        Literal::Null => Value::Null,
    }
}

pub(crate) fn compile(e: &Expr, columns: &dyn Fn(&ColumnRef) -> Result<usize, ExecError>) -> Result<Compiled, ExecError> {
    let go = |e: &Expr| compile(e, columns).map(Box::new);
    Ok(match e {
        Expr::Column(c) => Compiled::Col(columns(c)?),
        Expr::Literal(l) => Compiled::Lit(literal_value(l)),
        Expr::Wildcard => return Err(ExecError::Unsupported("`*` outside COUNT(*)".into())),
        Expr::Neg(x) => Compiled::Neg(go(x)?),
        Expr::Not(x) => Compiled::Not(go(x)?),
        Expr::And(l, r) => Compiled::And(go(l)?, go(r)?),
        Expr::Or(l, r) => Compiled::Or(go(l)?, go(r)?),
        Expr::Compare { left, op, right } => Compiled::Cmp(go(left)?, *op, go(right)?),
        Expr::InList { expr, list, negated } => Compiled::In(
            go(expr)?,
            list.iter().map(|x| compile(x, columns)).collect::<Result<_, _>>()?,
            *negated,
        ),
        Expr::Between { expr, low, high, negated } => Compiled::Between(go(expr)?, go(low)?, go(high)?, *negated),
        Expr::Like { expr, pattern, negated } => Compiled::Like(go(expr)?, go(pattern)?, *negated),
        Expr::IsNull { expr, negated } => Compiled::IsNull(go(expr)?, *negated),
        Expr::Function { name, .. } => {
            return Err(ExecError::Unsupported(format!("function {name} in this position")))
        }
    })
}

fn truth_value(t: Option<bool>) -> Value {
    match t {
        Some(b) => Value::Int(b as i64),
        None => Value::Null,
    }
}

fn and3(a: Option<bool>, b: impl FnOnce() -> Option<bool>) -> Option<bool> {
    if a == Some(false) {
        return Some(false);
    }
    match (a, b()) {
        (_, Some(false)) => Some(false),
        (Some(true), Some(true)) => Some(true),
        _ => None,
    }
}

fn or3(a: Option<bool>, b: impl FnOnce() -> Option<bool>) -> Option<bool> {
    if a == Some(true) {
        return Some(true);
    }
    match (a, b()) {
        (_, Some(true)) => Some(true),
        (Some(false), Some(false)) => Some(false),
        _ => None,
    }
}

fn negate_if(t: Option<bool>, negated: bool) -> Option<bool> {
    if negated {
        t.map(|b| !b)
    } else {
        t
    }
}

fn cmp_holds(op: CmpOp, ord: Ordering) -> bool {
    match op {
        CmpOp::Eq => ord == Ordering::Equal,
        CmpOp::NotEq => ord != Ordering::Equal,
        CmpOp::Lt => ord == Ordering::Less,
        CmpOp::LtEq => ord != Ordering::Greater,
        CmpOp::Gt => ord == Ordering::Greater,
        CmpOp::GtEq => ord != Ordering::Less,
    }
}

/// SQL LIKE with `%` and `_`, case-sensitive, no escape character.
pub fn like_match(text: &str, pattern: &str) -> bool {
    let t: Vec<char> = text.chars().collect();
    let p: Vec<char> = pattern.chars().collect();
    let (mut ti, mut pi) = (0, 0);
    let mut backtrack: Option<(usize, usize)> = None;
    while ti < t.len() {
        if pi < p.len() && (p[pi] == '_' || (p[pi] != '%' && p[pi] == t[ti])) {
            ti += 1;
            pi += 1;
        } else if pi < p.len() && p[pi] == '%' {
            backtrack = Some((pi, ti));
            pi += 1;
        } else if let Some((bp, bt)) = backtrack {
            pi = bp + 1;
            ti = bt + 1;
            backtrack = Some((bp, bt + 1));
        } else {
            return false;
        }
    }
    p[pi..].iter().all(|&c| c == '%')
}

impl Compiled {
    pub(crate) fn value(&self, row: &[Value]) -> Value {
        match self {
            Compiled::Col(i) => row[*i].clone(),
            Compiled::Lit(v) => v.clone(),
            Compiled::Neg(x) => match x.value(row) {
                Value::Int(v) => Value::Int(-v),
                Value::Float(v) => Value::Float(-v),
                Value::Str(s) => s.parse::<f64>().map(|f| Value::Float(-f)).unwrap_or(Value::Null),
                Value::Null => Value::Null,
            },
            other => truth_value(other.truth(row)),
        }
    }

    /// Three-valued truth; `None` is SQL UNKNOWN.
    pub(crate) fn truth(&self, row: &[Value]) -> Option<bool> {
        match self {
            Compiled::Col(_) | Compiled::Lit(_) | Compiled::Neg(_) => match self.value(row) {
                Value::Null => None,
                Value::Int(v) => Some(v != 0),
                Value::Float(v) => Some(v != 0.0),
                Value::Str(s) => Some(!s.is_empty()),
            },
            Compiled::Not(x) => x.truth(row).map(|b| !b),
            Compiled::And(l, r) => and3(l.truth(row), || r.truth(row)),
            Compiled::Or(l, r) => or3(l.truth(row), || r.truth(row)),
            Compiled::Cmp(l, op, r) => l.value(row).sql_cmp(&r.value(row)).map(|o| cmp_holds(*op, o)),
            Compiled::In(x, list, negated) => {
                let v = x.value(row);
                if v.is_null() {
                    return None;
                }
                let mut saw_null = false;
                for item in list {
                    match v.sql_cmp(&item.value(row)) {
                        Some(Ordering::Equal) => return Some(!negated),
                        None => saw_null = true,
                        Some(_) => {}
                    }
                }
                if saw_null {
                    None
                } else {
                    Some(*negated)
                }
            }
            Compiled::Between(x, lo, hi, negated) => {
                let v = x.value(row);
                let above = v.sql_cmp(&lo.value(row)).map(|o| o != Ordering::Less);
                let t = and3(above, || v.sql_cmp(&hi.value(row)).map(|o| o != Ordering::Greater));
                negate_if(t, *negated)
            }
            Compiled::Like(x, p, negated) => {
                let (v, p) = (x.value(row), p.value(row));
                if v.is_null() || p.is_null() {
                    return None;
                }
                negate_if(Some(like_match(&v.to_cell(), &p.to_cell())), *negated)
            }
            Compiled::IsNull(x, negated) => Some(x.value(row).is_null() != *negated),
        }
    }
}
