//! Exact optimum over left-deep orders by dynamic programming over table
//! subsets. The output size of a join step depends only on the set of tables
//! joined so far, so each subset is counted once and the cheapest prefix
//! reaching it is kept. Subsets are held as multiplicity-weighted tuples of
//! the join columns still pending, not as full rows.

use std::collections::{BTreeMap, HashMap};

use super::exec::{prepare_model, CostReport, Counted, ExecOptions};
use super::table::Database;
use super::ExecError;
use crate::planner::fixed_order;
use crate::sqlfront::{JoinGraph, QueryModel};

pub const DEFAULT_DP_BOUND: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OptimalOptions {
    /// Largest table count searched.
    pub dp_bound: usize,
    /// Whether steps that join nothing (Cartesian products) are allowed.
    pub cartesian_allowed: bool,
    pub exec: ExecOptions,
}

impl Default for OptimalOptions {
    fn default() -> Self {
        Self {
            dp_bound: DEFAULT_DP_BOUND,
            cartesian_allowed: false,
            exec: ExecOptions::default(),
        }
    }
}

struct State {
    rel: Counted,
    cost: u64,
    seq: Vec<usize>,
}

/// Cheapest left-deep order for `q` on `db`; cost is the sum of join step
/// output sizes. Ties go to the lexicographically smallest alias sequence.
/// Subsets larger than the row ceiling are unusable.
pub fn optimal_order(
    db: &Database,
    q: &QueryModel,
    g: &JoinGraph,
    opts: &OptimalOptions,
) -> Result<CostReport, ExecError> {
    let n = q.instances.len();
    if n > opts.dp_bound {
        return Err(ExecError::BoundExceeded {
            tables: n,
            bound: opts.dp_bound,
        });
    }
    let prepared = prepare_model(db, q)?;
    let names = &prepared.names;
    let adjacency: Vec<u64> = names
        .iter()
        .map(|a| {
            let v = g.index_of(a).expect("graph built from the query");
            g.neighbors(v)
                .iter()
                .map(|&w| 1u64 << names.iter().position(|b| b == g.alias(w)).expect("same aliases"))
                .fold(0, |m, b| m | b)
        })
        .collect();
    let lex = |a: &[usize], b: &[usize]| a.iter().map(|&i| &names[i]).cmp(b.iter().map(|&i| &names[i]));

    let counted: Vec<Counted> = (0..n).map(|i| prepared.counted_source(i)).collect();
    let mut cards: HashMap<u64, u64> = HashMap::new();
    let mut layer: BTreeMap<u64, State> = (0..n)
        .map(|i| {
            (
                1u64 << i,
                State {
                    rel: counted[i].clone(),
                    cost: 0,
                    seq: vec![i],
                },
            )
        })
        .collect();
    for _ in 1..n {
        let mut next: BTreeMap<u64, State> = BTreeMap::new();
        let mut tripped: Vec<u64> = Vec::new();
        for (&mask, prev) in &layer {
            let reach = (0..n)
                .filter(|&v| mask & (1 << v) == 0)
                .filter(|&v| opts.cartesian_allowed || adjacency[v] & mask != 0);
            for v in reach {
                let set = mask | (1 << v);
                if tripped.contains(&set) {
                    continue;
                }
                let card = match cards.get(&set) {
                    Some(&c) => c,
                    None => match prepared.count_join(&prev.rel, mask, &counted[v], v, opts.exec.row_ceiling) {
                        Ok(rel) => {
                            let c = rel.total();
                            cards.insert(set, c);
                            next.insert(
                                set,
                                State {
                                    rel,
                                    cost: u64::MAX,
                                    seq: Vec::new(),
                                },
                            );
                            c
                        }
                        Err(ExecError::RowCeiling { .. }) => {
                            tripped.push(set);
                            continue;
                        }
                        Err(e) => return Err(e),
                    },
                };
                let cost = prev.cost + card;
                let mut seq = prev.seq.clone();
                seq.push(v);
                let entry = next.get_mut(&set).expect("materialized");
                let better = cost < entry.cost || (cost == entry.cost && lex(&seq, &entry.seq).is_lt());
                if better {
                    entry.cost = cost;
                    entry.seq = seq;
                }
            }
        }
        layer = next;
    }
    let best = layer.into_values().next().ok_or_else(|| {
        ExecError::NoValidOrder(if opts.cartesian_allowed {
            "every order exceeds the row ceiling".into()
        } else {
            "no Cartesian-free order within the row ceiling".into()
        })
    })?;
    let sequence: Vec<String> = best.seq.iter().map(|&i| names[i].clone()).collect();
    let mut steps = Vec::with_capacity(n.saturating_sub(1));
    let mut mask = 0u64;
    for (k, &i) in best.seq.iter().enumerate() {
        mask |= 1 << i;
        if k > 0 {
            steps.push(cards[&mask]);
        }
    }
    let order = fixed_order(g, "optimal", &sequence).expect("permutation of the query's aliases");
    Ok(CostReport::new(order, steps))
}
