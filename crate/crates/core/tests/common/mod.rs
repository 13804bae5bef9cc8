//! Brute-force reference evaluator, written independently of the executor:
//! nested loops over table instances, predicates interpreted straight off the
//! syntax tree.

#![allow(dead_code)]

pub mod graphs;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use joinorder_core::costlab::{Database, Value};
use joinorder_core::sql::{CmpOp, Expr, Literal};
use joinorder_core::QueryModel;

/// Current row of every bound alias.
type Env<'r> = BTreeMap<String, &'r [Value]>;

pub struct Oracle<'a> {
    db: &'a Database,
    q: &'a QueryModel,
    /// Column positions per alias.
    columns: BTreeMap<String, HashMap<String, usize>>,
    /// Every conjunct with the aliases it mentions.
    conjuncts: Vec<(Expr, BTreeSet<String>)>,
}

fn cmp(a: &Value, b: &Value) -> Option<std::cmp::Ordering> {
    match (a, b) {
        (Value::Null, _) | (_, Value::Null) => None,
        (Value::Int(x), Value::Int(y)) => Some(x.cmp(y)),
        (Value::Str(x), Value::Str(y)) => Some(x.cmp(y)),
        (x, y) => Some(x.to_string().cmp(&y.to_string())),
    }
}

fn like(t: &[char], p: &[char]) -> bool {
    match p.split_first() {
        None => t.is_empty(),
        Some(('%', rest)) => (0..=t.len()).any(|i| like(&t[i..], rest)),
        Some((c, rest)) => match t.split_first() {
            Some((h, tail)) if *c == '_' || c == h => like(tail, rest),
            _ => false,
        },
    }
}

impl<'a> Oracle<'a> {
    pub fn new(db: &'a Database, q: &'a QueryModel) -> Self {
        let columns = q
            .instances
            .iter()
            .map(|i| {
                let t = &db[&i.base_table];
                let pos = t.columns.iter().enumerate().map(|(k, c)| (c.clone(), k)).collect();
                (i.alias.clone(), pos)
            })
            .collect();
        let conjuncts = q
            .joins
            .iter()
            .map(|j| {
                let aliases = [j.left.alias.clone(), j.right.alias.clone()].into_iter().collect();
                (j.to_expr(), aliases)
            })
            .chain(q.selections.iter().map(|s| (s.expr.clone(), s.aliases.clone())))
            .collect();
        Self {
            db,
            q,
            columns,
            conjuncts,
        }
    }

    fn rows(&self, alias: &str) -> &'a [Vec<Value>] {
        &self.db[&self.q.instance(alias).unwrap().base_table].rows
    }

    fn value(&self, e: &Expr, env: &BTreeMap<String, &[Value]>) -> Value {
        match e {
            Expr::Column(c) => {
                let alias = c.qualifier.as_ref().expect("qualified");
                env[alias][self.columns[alias][&c.name]].clone()
            }
            Expr::Literal(Literal::Int(v)) => Value::Int(*v),
            Expr::Literal(Literal::Str(s)) => Value::Str(s.clone()),
            Expr::Literal(Literal::Null) => Value::Null,
            other => panic!("oracle does not evaluate `{other}` as a value"),
        }
    }

    fn truth(&self, e: &Expr, env: &BTreeMap<String, &[Value]>) -> Option<bool> {
        match e {
            Expr::And(l, r) => match (self.truth(l, env), self.truth(r, env)) {
                (Some(false), _) | (_, Some(false)) => Some(false),
                (Some(true), Some(true)) => Some(true),
                _ => None,
            },
            Expr::Or(l, r) => match (self.truth(l, env), self.truth(r, env)) {
                (Some(true), _) | (_, Some(true)) => Some(true),
                (Some(false), Some(false)) => Some(false),
                _ => None,
            },
            Expr::Not(x) => self.truth(x, env).map(|b| !b),
            Expr::Compare { left, op, right } => {
                let o = cmp(&self.value(left, env), &self.value(right, env))?;
                Some(match op {
                    CmpOp::Eq => o.is_eq(),
                    CmpOp::NotEq => o.is_ne(),
                    CmpOp::Lt => o.is_lt(),
                    CmpOp::LtEq => o.is_le(),
                    CmpOp::Gt => o.is_gt(),
                    CmpOp::GtEq => o.is_ge(),
                })
            }
            Expr::InList { expr, list, negated } => {
                let v = self.value(expr, env);
                let results: Vec<Option<bool>> = list.iter().map(|i| cmp(&v, &self.value(i, env)).map(|o| o.is_eq())).collect();
                let hit = if results.contains(&Some(true)) {
                    Some(true)
                } else if results.contains(&None) {
                    None
                } else {
                    Some(false)
                };
                hit.map(|b| b != *negated)
            }
            Expr::Between { expr, low, high, negated } => {
                let v = self.value(expr, env);
                let lo = cmp(&v, &self.value(low, env)).map(|o| o.is_ge());
                let hi = cmp(&v, &self.value(high, env)).map(|o| o.is_le());
                let both = match (lo, hi) {
                    (Some(false), _) | (_, Some(false)) => Some(false),
                    (Some(true), Some(true)) => Some(true),
                    _ => None,
                };
                both.map(|b| b != *negated)
            }
            Expr::Like { expr, pattern, negated } => {
                let (v, p) = (self.value(expr, env), self.value(pattern, env));
                if v == Value::Null || p == Value::Null {
                    return None;
                }
                let t: Vec<char> = v.to_string().chars().collect();
                let p: Vec<char> = p.to_string().chars().collect();
                Some(like(&t, &p) != *negated)
            }
            Expr::IsNull { expr, negated } => Some((self.value(expr, env) == Value::Null) != *negated),
            other => panic!("oracle does not evaluate `{other}` as a predicate"),
        }
    }

    /// Orders `set` so that each alias after the first shares a conjunct with
    /// an earlier one when possible, keeping the loops pruned.
    fn loop_order(&self, set: &BTreeSet<String>) -> Vec<String> {
        let mut order: Vec<String> = Vec::new();
        let mut left: Vec<String> = set.iter().cloned().collect();
        while !left.is_empty() {
            let k = left
                .iter()
                .position(|a| {
                    self.conjuncts
                        .iter()
                        .any(|(_, s)| s.len() > 1 && s.contains(a) && order.iter().any(|o| s.contains(o)))
                })
                .unwrap_or(0);
            order.push(left.remove(k));
        }
        order
    }

    /// All bindings over `set` satisfying every conjunct it covers.
    fn bindings(&self, set: &BTreeSet<String>, visit: &mut dyn FnMut(&Env)) {
        let order = self.loop_order(set);
        let mut env = BTreeMap::new();
        self.descend(&order, 0, &mut env, visit);
    }

    fn descend<'r>(
        &'r self,
        order: &[String],
        depth: usize,
        env: &mut BTreeMap<String, &'r [Value]>,
        visit: &mut dyn FnMut(&Env),
    ) {
        if depth == order.len() {
            visit(env);
            return;
        }
        let alias = &order[depth];
        let newly_covered: Vec<&Expr> = self
            .conjuncts
            .iter()
            .filter(|(_, s)| s.contains(alias) && s.iter().all(|a| order[..=depth].contains(a)))
            .map(|(e, _)| e)
            .collect();
        for row in self.rows(alias) {
            env.insert(alias.clone(), row.as_slice());
            if newly_covered.iter().all(|e| self.truth(e, env) == Some(true)) {
                self.descend(order, depth + 1, env, visit);
            }
        }
        env.remove(alias);
    }

    /// Size of the join of `set` under all predicates it covers.
    pub fn cardinality(&self, set: &BTreeSet<String>) -> u64 {
        let mut n = 0;
        self.bindings(set, &mut |_| n += 1);
        n
    }

    /// Step sizes of a left-deep order.
    pub fn steps(&self, sequence: &[String]) -> Vec<u64> {
        (2..=sequence.len())
            .map(|k| self.cardinality(&sequence[..k].iter().cloned().collect()))
            .collect()
    }

    /// Query result, rows sorted. Supports plain columns, MIN/MAX of a
    /// column and COUNT(*).
    pub fn result(&self) -> Vec<Vec<Value>> {
        let all: BTreeSet<String> = self.q.instances.iter().map(|i| i.alias.clone()).collect();
        let mut rows: Vec<Vec<Value>> = Vec::new();
        let items: Vec<&Expr> = self.q.output.iter().map(|o| &o.expr).collect();
        let aggregate = self.q.has_aggregates();
        self.bindings(&all, &mut |env| {
            rows.push(
                items
                    .iter()
                    .map(|e| match e {
                        Expr::Function { args, .. } if matches!(args.as_slice(), [Expr::Wildcard]) => Value::Null,
                        Expr::Function { args, .. } => self.value(&args[0], env),
                        other => self.value(other, env),
                    })
                    .collect(),
            )
        });
        if aggregate {
            let row = items
                .iter()
                .enumerate()
                .map(|(k, e)| {
                    let Expr::Function { name, .. } = e else { panic!("mixed output") };
                    let vals = rows.iter().map(|r| r[k].clone()).filter(|v| *v != Value::Null);
                    match name.as_str() {
                        "COUNT" => Value::Int(rows.len() as i64),
                        "MIN" => vals.reduce(|a, b| if cmp(&b, &a).unwrap().is_lt() { b } else { a }).unwrap_or(Value::Null),
                        "MAX" => vals.reduce(|a, b| if cmp(&b, &a).unwrap().is_gt() { b } else { a }).unwrap_or(Value::Null),
                        other => panic!("oracle does not aggregate {other}"),
                    }
                })
                .collect();
            return vec![row];
        }
        rows.sort();
        rows
    }

    /// Minimum cost over all permutations (optionally Cartesian-free) and
    /// the lexicographically smallest sequence reaching it.
    pub fn exhaustive_optimum(&self, cartesian_allowed: bool) -> Option<(u64, Vec<String>)> {
        let aliases: Vec<String> = {
            let mut v: Vec<String> = self.q.instances.iter().map(|i| i.alias.clone()).collect();
            v.sort();
            v
        };
        let mut memo: HashMap<BTreeSet<String>, u64> = HashMap::new();
        let mut best: Option<(u64, Vec<String>)> = None;
        let mut perm = aliases.clone();
        permutations(&mut perm, 0, &mut |seq| {
            if !cartesian_allowed && !self.connected_prefixes(seq) {
                return;
            }
            let cost: u64 = (2..=seq.len())
                .map(|k| {
                    let set: BTreeSet<String> = seq[..k].iter().cloned().collect();
                    *memo.entry(set.clone()).or_insert_with(|| self.cardinality(&set))
                })
                .sum();
            let better = match &best {
                None => true,
                Some((c, s)) => cost < *c || (cost == *c && seq < s.as_slice()),
            };
            if better {
                best = Some((cost, seq.to_vec()));
            }
        });
        best
    }

    fn connected_prefixes(&self, seq: &[String]) -> bool {
        (1..seq.len()).all(|k| {
            self.q.joins.iter().any(|j| {
                let [a, b] = j.aliases();
                (a == seq[k] && seq[..k].iter().any(|p| p == b)) || (b == seq[k] && seq[..k].iter().any(|p| p == a))
            })
        })
    }
}

fn permutations(v: &mut Vec<String>, k: usize, f: &mut dyn FnMut(&[String])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, f);
        v.swap(k, i);
    }
}
