//! Syntax tree for the supported SQL subset and its canonical rendering.

use std::collections::BTreeSet;
use std::fmt::{self, Display, Formatter};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColumnRef {
    pub qualifier: Option<String>,
    pub name: String,
}

impl ColumnRef {
    pub fn qualified(qualifier: impl Into<String>, name: impl Into<String>) -> Self {
        Self {
            qualifier: Some(qualifier.into()),
            name: name.into(),
        }
    }

    pub fn bare(name: impl Into<String>) -> Self {
        Self {
            qualifier: None,
            name: name.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Int(i64),
    /// Decimal literal kept as written.
    Decimal(String),
    Str(String),
    Null,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    NotEq,
    Lt,
    LtEq,
    Gt,
    GtEq,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::NotEq => "<>",
            CmpOp::Lt => "<",
            CmpOp::LtEq => "<=",
            CmpOp::Gt => ">",
            CmpOp::GtEq => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Column(ColumnRef),
    Literal(Literal),
    /// `*`, only meaningful as an aggregate argument.
    Wildcard,
    Neg(Box<Expr>),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Compare {
        left: Box<Expr>,
        op: CmpOp,
        right: Box<Expr>,
    },
    InList {
        expr: Box<Expr>,
        list: Vec<Expr>,
        negated: bool,
    },
    Between {
        expr: Box<Expr>,
        low: Box<Expr>,
        high: Box<Expr>,
        negated: bool,
    },
    Like {
        expr: Box<Expr>,
        pattern: Box<Expr>,
        negated: bool,
    },
    IsNull {
        expr: Box<Expr>,
        negated: bool,
    },
    Function {
        /// Upper-cased function name.
        name: String,
        args: Vec<Expr>,
        distinct: bool,
    },
}

pub const AGGREGATES: &[&str] = &["MIN", "MAX", "COUNT", "SUM"];

impl Expr {
    pub fn column(qualifier: &str, name: &str) -> Self {
        Expr::Column(ColumnRef::qualified(qualifier, name))
    }

    pub fn eq(left: Expr, right: Expr) -> Self {
        Expr::Compare {
            left: Box::new(left),
            op: CmpOp::Eq,
            right: Box::new(right),
        }
    }

    /// Left-folds `parts` with AND; `None` when empty.
    pub fn conjunction(parts: impl IntoIterator<Item = Expr>) -> Option<Expr> {
        parts
            .into_iter()
            .reduce(|acc, e| Expr::And(Box::new(acc), Box::new(e)))
    }

    /// Flattens nested ANDs into their conjuncts, left to right.
    pub fn split_conjunction(self) -> Vec<Expr> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(e) = stack.pop() {
            match e {
                Expr::And(l, r) => {
                    stack.push(*r);
                    stack.push(*l);
                }
                other => out.push(other),
            }
        }
        out
    }

    pub fn visit_columns<'a>(&'a self, f: &mut impl FnMut(&'a ColumnRef)) {
        match self {
            Expr::Column(c) => f(c),
            Expr::Literal(_) | Expr::Wildcard => {}
            Expr::Neg(e) | Expr::Not(e) => e.visit_columns(f),
            Expr::And(l, r) | Expr::Or(l, r) => {
                l.visit_columns(f);
                r.visit_columns(f);
            }
            Expr::Compare { left, right, .. } => {
                left.visit_columns(f);
                right.visit_columns(f);
            }
            Expr::InList { expr, list, .. } => {
                expr.visit_columns(f);
                list.iter().for_each(|e| e.visit_columns(f));
            }
            Expr::Between {
                expr, low, high, ..
            } => {
                expr.visit_columns(f);
                low.visit_columns(f);
                high.visit_columns(f);
            }
            Expr::Like { expr, pattern, .. } => {
                expr.visit_columns(f);
                pattern.visit_columns(f);
            }
            Expr::IsNull { expr, .. } => expr.visit_columns(f),
            Expr::Function { args, .. } => args.iter().for_each(|e| e.visit_columns(f)),
        }
    }

    pub fn columns(&self) -> Vec<&ColumnRef> {
        let mut out = Vec::new();
        self.visit_columns(&mut |c| out.push(c));
        out
    }

    pub fn qualifiers(&self) -> BTreeSet<String> {
        self.columns()
            .into_iter()
            .filter_map(|c| c.qualifier.clone())
            .collect()
    }

    /// Rebuilds the expression with every column reference passed through `f`.
    pub fn map_columns(&self, f: &mut impl FnMut(&ColumnRef) -> Expr) -> Expr {
        let mut go = |e: &Expr| e.map_columns(f);
        match self {
            Expr::Column(c) => f(c),
            Expr::Literal(_) | Expr::Wildcard => self.clone(),
            Expr::Neg(e) => Expr::Neg(Box::new(go(e))),
            Expr::Not(e) => Expr::Not(Box::new(go(e))),
            Expr::And(l, r) => {
                let l = go(l);
                Expr::And(Box::new(l), Box::new(go(r)))
            }
            Expr::Or(l, r) => {
                let l = go(l);
                Expr::Or(Box::new(l), Box::new(go(r)))
            }
            Expr::Compare { left, op, right } => {
                let left = go(left);
                Expr::Compare {
                    left: Box::new(left),
                    op: *op,
                    right: Box::new(go(right)),
                }
            }
            Expr::InList {
                expr,
                list,
                negated,
            } => {
                let expr = go(expr);
                Expr::InList {
                    expr: Box::new(expr),
                    list: list.iter().map(go).collect(),
                    negated: *negated,
                }
            }
            Expr::Between {
                expr,
                low,
                high,
                negated,
            } => {
                let expr = go(expr);
                let low = go(low);
                Expr::Between {
                    expr: Box::new(expr),
                    low: Box::new(low),
                    high: Box::new(go(high)),
                    negated: *negated,
                }
            }
            Expr::Like {
                expr,
                pattern,
                negated,
            } => {
                let expr = go(expr);
                Expr::Like {
                    expr: Box::new(expr),
                    pattern: Box::new(go(pattern)),
                    negated: *negated,
                }
            }
            Expr::IsNull { expr, negated } => Expr::IsNull {
                expr: Box::new(go(expr)),
                negated: *negated,
            },
            Expr::Function {
                name,
                args,
                distinct,
            } => Expr::Function {
                name: name.clone(),
                args: args.iter().map(go).collect(),
                distinct: *distinct,
            },
        }
    }

    pub fn contains_aggregate(&self) -> bool {
        match self {
            Expr::Function { name, args, .. } => {
                AGGREGATES.contains(&name.as_str()) || args.iter().any(Expr::contains_aggregate)
            }
            Expr::Neg(e) | Expr::Not(e) => e.contains_aggregate(),
            Expr::And(l, r) | Expr::Or(l, r) => l.contains_aggregate() || r.contains_aggregate(),
            Expr::Compare { left, right, .. } => {
                left.contains_aggregate() || right.contains_aggregate()
            }
            _ => false,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Or(..) => 1,
            Expr::And(..) => 2,
            Expr::Not(..) => 3,
            Expr::Compare { .. }
            | Expr::InList { .. }
            | Expr::Between { .. }
            | Expr::Like { .. }
            | Expr::IsNull { .. } => 4,
            _ => 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SelectItem {
    Expr { expr: Expr, alias: Option<String> },
    Wildcard,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TableFactor {
    Table { name: String, alias: Option<String> },
    Derived { subquery: Box<Select>, alias: String },
}

impl TableFactor {
    /// The name other clauses use to refer to this source.
    pub fn reference_name(&self) -> &str {
        match self {
            TableFactor::Table { name, alias } => alias.as_deref().unwrap_or(name),
            TableFactor::Derived { alias, .. } => alias,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum JoinConstraint {
    On(Expr),
    Cross,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Join {
    pub factor: TableFactor,
    pub constraint: JoinConstraint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FromItem {
    pub factor: TableFactor,
    pub joins: Vec<Join>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Select {
    pub items: Vec<SelectItem>,
    pub from: Vec<FromItem>,
    pub selection: Option<Expr>,
}

const RESERVED: &[&str] = &[
    "select", "from", "where", "as", "and", "or", "not", "in", "between", "like", "is", "null",
    "join", "inner", "cross", "on", "group", "order", "by", "limit", "having", "union", "distinct",
    "left", "right", "full", "outer", "natural", "using",
];

pub(crate) fn is_reserved(word: &str) -> bool {
    RESERVED.iter().any(|kw| kw.eq_ignore_ascii_case(word))
}

pub struct Ident<'a>(pub &'a str);

impl Display for Ident<'_> {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        let s = self.0;
        let plain = s
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            && !is_reserved(s);
        if plain {
            f.write_str(s)
        } else {
            write!(f, "\"{s}\"")
        }
    }
}

impl Display for ColumnRef {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if let Some(q) = &self.qualifier {
            write!(f, "{}.", Ident(q))?;
        }
        write!(f, "{}", Ident(&self.name))
    }
}

impl Display for Literal {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Int(v) => write!(f, "{v}"),
            Literal::Decimal(v) => f.write_str(v),
            Literal::Str(s) => write!(f, "'{}'", s.replace('\'', "''")),
            Literal::Null => f.write_str("NULL"),
        }
    }
}

struct Child<'a>(&'a Expr, u8);

impl Display for Child<'_> {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if self.0.precedence() < self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

fn not_kw(negated: bool) -> &'static str {
    if negated {
        "NOT "
    } else {
        ""
    }
}

impl Display for Expr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Column(c) => write!(f, "{c}"),
            Expr::Literal(l) => write!(f, "{l}"),
            Expr::Wildcard => f.write_str("*"),
            Expr::Neg(e) => write!(f, "-{}", Child(e, 5)),
            Expr::Not(e) => write!(f, "NOT {}", Child(e, 4)),
            Expr::And(l, r) => write!(f, "{} AND {}", Child(l, 2), Child(r, 3)),
            Expr::Or(l, r) => write!(f, "{} OR {}", Child(l, 1), Child(r, 2)),
            Expr::Compare { left, op, right } => {
                write!(f, "{} {} {}", Child(left, 5), op.symbol(), Child(right, 5))
            }
            Expr::InList {
                expr,
                list,
                negated,
            } => {
                write!(f, "{} {}IN (", Child(expr, 5), not_kw(*negated))?;
                for (i, e) in list.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{e}")?;
                }
                f.write_str(")")
            }
            Expr::Between {
                expr,
                low,
                high,
                negated,
            } => write!(
                f,
                "{} {}BETWEEN {} AND {}",
                Child(expr, 5),
                not_kw(*negated),
                Child(low, 5),
                Child(high, 5)
            ),
            Expr::Like {
                expr,
                pattern,
                negated,
            } => write!(
                f,
                "{} {}LIKE {}",
                Child(expr, 5),
                not_kw(*negated),
                Child(pattern, 5)
            ),
            Expr::IsNull { expr, negated } => {
                write!(f, "{} IS {}NULL", Child(expr, 5), not_kw(*negated))
            }
            Expr::Function {
                name,
                args,
                distinct,
            } => {
                write!(f, "{name}(")?;
                if *distinct {
                    f.write_str("DISTINCT ")?;
                }
                for (i, e) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{e}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl Display for SelectItem {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            SelectItem::Wildcard => f.write_str("*"),
            SelectItem::Expr { expr, alias: None } => write!(f, "{expr}"),
            SelectItem::Expr {
                expr,
                alias: Some(a),
            } => write!(f, "{expr} AS {}", Ident(a)),
        }
    }
}

impl Select {
    /// Renders with nested subqueries indented by `indent` levels.
    pub fn render(&self, indent: usize) -> String {
        let pad = "  ".repeat(indent);
        let mut out = String::new();
        out.push_str("SELECT ");
        let items: Vec<String> = self.items.iter().map(|i| i.to_string()).collect();
        out.push_str(&items.join(&format!(",\n{pad}       ")));
        out.push('\n');
        out.push_str(&pad);
        out.push_str("FROM ");
        for (i, item) in self.from.iter().enumerate() {
            if i > 0 {
                out.push_str(&format!(",\n{pad}     "));
            }
            out.push_str(&render_factor(&item.factor, indent));
            for join in &item.joins {
                out.push_str(&format!("\n{pad}  "));
                match &join.constraint {
                    JoinConstraint::Cross => {
                        out.push_str("CROSS JOIN ");
                        out.push_str(&render_factor(&join.factor, indent + 1));
                    }
                    JoinConstraint::On(on) => {
                        out.push_str("JOIN ");
                        out.push_str(&render_factor(&join.factor, indent + 1));
                        out.push_str(&format!(" ON {on}"));
                    }
                }
            }
        }
        if let Some(selection) = &self.selection {
            out.push('\n');
            out.push_str(&pad);
            out.push_str("WHERE ");
            let conjuncts: Vec<String> = selection
                .clone()
                .split_conjunction()
                .iter()
                .map(|c| Child(c, 3).to_string())
                .collect();
            out.push_str(&conjuncts.join(&format!("\n{pad}  AND ")));
        }
        out
    }
}

fn render_factor(factor: &TableFactor, indent: usize) -> String {
    match factor {
        TableFactor::Table { name, alias: None } => Ident(name).to_string(),
        TableFactor::Table {
            name,
            alias: Some(alias),
        } => format!("{} AS {}", Ident(name), Ident(alias)),
        TableFactor::Derived { subquery, alias } => {
            let pad = "  ".repeat(indent + 1);
            format!(
                "(\n{pad}{}\n{}) AS {}",
                subquery.render(indent + 1),
                "  ".repeat(indent),
                Ident(alias)
            )
        }
    }
}

impl Display for Select {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn or_inside_and_is_parenthesized() {
        let a = Expr::eq(Expr::column("a", "x"), Expr::Literal(Literal::Int(1)));
        let b = Expr::eq(Expr::column("a", "y"), Expr::Literal(Literal::Str("q".into())));
        let or = Expr::Or(Box::new(a.clone()), Box::new(b));
        let and = Expr::And(Box::new(a), Box::new(or));
        assert_eq!(and.to_string(), "a.x = 1 AND (a.x = 1 OR a.y = 'q')");
    }

    #[test]
    fn reserved_and_odd_identifiers_are_quoted() {
        assert_eq!(Ident("order").to_string(), "\"order\"");
        assert_eq!(Ident("Mixed Case").to_string(), "\"Mixed Case\"");
        assert_eq!(Ident("mi_idx").to_string(), "mi_idx");
    }

    #[test]
    fn split_conjunction_preserves_order() {
        let c = |n: i64| Expr::Literal(Literal::Int(n));
        let e = Expr::conjunction([c(1), c(2), c(3)]).unwrap();
        assert_eq!(e.split_conjunction(), vec![c(1), c(2), c(3)]);
    }
}
