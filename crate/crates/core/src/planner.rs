//! Statistics-free join ordering.
//!
//! [`simpli2_order`] splits the join graph along its many-to-many edges. Every
//! table incident to a many-to-many edge heads a partition, taken smallest
//! first, followed by its not-yet-ordered one-to-many neighbours in ascending
//! size. Tables that only take part in one-to-many joins and are not pulled in
//! as candidates are spliced in right after the leftmost table they join with.
//! The only numeric input is the row count of each base table; ties are broken
//! by alias.
//!
//! [`size_order`] provides the size-sorting baselines.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::sqlfront::JoinGraph;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlanError {
    #[error("order is not a permutation of the graph's vertices: {0}")]
    NotAPermutation(String),
}

/// Why a vertex sits where it does in an order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Table with a many-to-many join that opens a partition.
    FkHead,
    /// One-to-many neighbour appended after its partition head.
    FkCandidate,
    /// Spliced in to reach a disconnected many-to-many component, or appended
    /// as a Cartesian product when nothing joins the order.
    InsertedDisconnect,
    /// Remaining one-to-many table spliced in by the final pass.
    InsertedOrphan,
    /// Starting vertex of an order built without many-to-many joins.
    Seed,
    /// Placed by a size-sorting baseline.
    Ranked,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    pub head: String,
    /// Members in sequence order, head first.
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JoinOrder {
    pub algorithm: String,
    pub sequence: Vec<String>,
    pub partitions: Vec<Partition>,
    pub provenance: BTreeMap<String, Provenance>,
    /// Aliases whose step is a Cartesian product.
    pub cartesian: Vec<String>,
    pub warnings: Vec<String>,
}

impl JoinOrder {
    pub fn position(&self, alias: &str) -> Option<usize> {
        self.sequence.iter().position(|a| a == alias)
    }

    pub fn partition_of(&self, alias: &str) -> Option<usize> {
        self.partitions
            .iter()
            .position(|p| p.members.iter().any(|m| m == alias))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("join order serializes")
    }

    /// Human-readable report: sequence, partitions, provenance, warnings.
    pub fn report(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "algorithm: {}", self.algorithm);
        let _ = writeln!(out, "sequence: {}", self.sequence.join(" -> "));
        let _ = writeln!(out, "partitions:");
        for (i, p) in self.partitions.iter().enumerate() {
            let _ = writeln!(out, "  {}: [{}]", i + 1, p.members.join(", "));
        }
        let _ = writeln!(out, "provenance:");
        for alias in &self.sequence {
            let tag = serde_json::to_value(self.provenance[alias]).expect("tag");
            let _ = writeln!(out, "  {alias}: {}", tag.as_str().unwrap_or_default());
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Ascending,
    Descending,
}

/// Incrementally built order with splice bookkeeping.
struct OrderBuilder<'g> {
    g: &'g JoinGraph,
    /// Vertices by (size, alias).
    by_size: Vec<usize>,
    seq: Vec<usize>,
    placed: Vec<bool>,
    partition_of: Vec<usize>,
    heads: Vec<usize>,
    /// Vertex each spliced vertex was inserted after.
    anchor: Vec<Option<usize>>,
    provenance: Vec<Option<Provenance>>,
    cartesian: Vec<usize>,
}

impl<'g> OrderBuilder<'g> {
    fn new(g: &'g JoinGraph) -> Self {
        let n = g.len();
        let mut by_size: Vec<usize> = (0..n).collect();
        by_size.sort_by(|&a, &b| (g.size(a), g.alias(a)).cmp(&(g.size(b), g.alias(b))));
        Self {
            g,
            by_size,
            seq: Vec::with_capacity(n),
            placed: vec![false; n],
            partition_of: vec![usize::MAX; n],
            heads: Vec::new(),
            anchor: vec![None; n],
            provenance: vec![None; n],
            cartesian: Vec::new(),
        }
    }

    fn done(&self) -> bool {
        self.seq.len() == self.g.len()
    }

    fn joins_order(&self, v: usize) -> bool {
        self.g.neighbors(v).iter().any(|&n| self.placed[n])
    }

    fn smallest(&self, pred: impl Fn(usize) -> bool) -> Option<usize> {
        self.by_size.iter().copied().find(|&v| pred(v))
    }

    fn position(&self, v: usize) -> usize {
        self.seq.iter().position(|&x| x == v).expect("vertex placed")
    }

    fn append(&mut self, v: usize, tag: Provenance, opens_partition: bool) {
        let partition = if opens_partition || self.heads.is_empty() {
            self.heads.push(v);
            self.heads.len() - 1
        } else {
            self.partition_of[*self.seq.last().expect("non-empty order")]
        };
        self.seq.push(v);
        self.placed[v] = true;
        self.partition_of[v] = partition;
        self.provenance[v] = Some(tag);
    }

    /// Appends `v` as a Cartesian step opening its own partition.
    fn append_cartesian(&mut self, v: usize) {
        self.cartesian.push(v);
        self.append(v, Provenance::InsertedDisconnect, true);
    }

    /// Inserts `v` right after its leftmost ordered neighbour. Vertices that
    /// were spliced behind that neighbour earlier stay ahead of `v`.
    fn splice(&mut self, v: usize, tag: Provenance) {
        let anchor = self
            .g
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&n| self.placed[n])
            .min_by_key(|&n| self.position(n))
            .expect("spliced vertex joins the order");
        let anchor_pos = self.position(anchor);
        let mut at = anchor_pos + 1;
        while let Some(&next) = self.seq.get(at) {
            let behind_anchor = self.anchor[next]
                .map(|a| (anchor_pos..at).contains(&self.position(a)))
                .unwrap_or(false);
            if !behind_anchor {
                break;
            }
            at += 1;
        }
        self.seq.insert(at, v);
        self.placed[v] = true;
        self.anchor[v] = Some(anchor);
        self.partition_of[v] = self.partition_of[anchor];
        self.provenance[v] = Some(tag);
    }

    /// Appends to the single partition of a baseline order.
    fn append_ranked(&mut self, v: usize) {
        if self.seq.is_empty() {
            self.append(v, Provenance::Seed, true);
        } else if self.joins_order(v) {
            self.append(v, Provenance::Ranked, false);
        } else {
            self.cartesian.push(v);
            self.append(v, Provenance::InsertedDisconnect, false);
        }
    }

    fn finish(self, algorithm: &str) -> JoinOrder {
        let g = self.g;
        let name = |v: usize| g.alias(v).to_string();
        let partitions = self
            .heads
            .iter()
            .enumerate()
            .map(|(p, &head)| Partition {
                head: name(head),
                members: self
                    .seq
                    .iter()
                    .copied()
                    .filter(|&v| self.partition_of[v] == p)
                    .map(name)
                    .collect(),
            })
            .collect();
        let provenance = self
            .seq
            .iter()
            .map(|&v| (name(v), self.provenance[v].expect("tagged")))
            .collect();
        let mut cartesian: Vec<usize> = self.cartesian.clone();
        cartesian.sort_by_key(|&v| self.position(v));
        let warnings = cartesian
            .iter()
            .map(|&v| {
                format!(
                    "Cartesian product: `{}` at position {} joins no earlier table",
                    g.alias(v),
                    self.position(v)
                )
            })
            .collect();
        JoinOrder {
            algorithm: algorithm.to_string(),
            sequence: self.seq.iter().map(|&v| name(v)).collect(),
            partitions,
            provenance,
            cartesian: cartesian.into_iter().map(name).collect(),
            warnings,
        }
    }
}

/// Simpli-Squared join order over `g`. Panics on an empty graph.
pub fn simpli2_order(g: &JoinGraph) -> JoinOrder {
    assert!(!g.is_empty(), "join graph has no vertices");
    let mut b = OrderBuilder::new(g);
    let mut fk: BTreeSet<usize> = g.many_to_many_participants();

    if fk.is_empty() {
        let seed = b.by_size[0];
        b.append(seed, Provenance::Seed, true);
    }

    while !fk.is_empty() {
        let first = b.seq.is_empty();
        let pick = b.smallest(|v| fk.contains(&v) && (first || b.joins_order(v)));
        let (head, tag) = match pick {
            Some(f) => (f, Provenance::FkHead),
            None => {
                if let Some(bridge) = b.smallest(|v| !b.placed[v] && b.joins_order(v)) {
                    b.splice(bridge, Provenance::InsertedDisconnect);
                    continue;
                }
                let f = b.smallest(|v| fk.contains(&v)).expect("fk non-empty");
                (f, Provenance::InsertedDisconnect)
            }
        };
        if tag == Provenance::InsertedDisconnect {
            b.append_cartesian(head);
        } else {
            b.append(head, tag, true);
        }
        let mut candidates: Vec<usize> = g
            .neighbors(head)
            .iter()
            .copied()
            .filter(|&c| !fk.contains(&c) && !b.placed[c])
            .collect();
        candidates.sort_by(|&x, &y| (g.size(x), g.alias(x)).cmp(&(g.size(y), g.alias(y))));
        for c in candidates {
            b.append(c, Provenance::FkCandidate, false);
        }
        fk.remove(&head);
    }

    while !b.done() {
        match b.smallest(|v| !b.placed[v] && b.joins_order(v)) {
            Some(v) => b.splice(v, Provenance::InsertedOrphan),
            None => {
                let v = b.smallest(|v| !b.placed[v]).expect("unplaced vertex");
                b.append_cartesian(v);
            }
        }
    }
    b.finish("simpli2")
}

/// Size-sorted single-partition order. With `avoid_cartesian`, each step
/// takes the most extreme table that joins the prefix, if any does.
pub fn size_order(g: &JoinGraph, direction: Direction, avoid_cartesian: bool) -> JoinOrder {
    assert!(!g.is_empty(), "join graph has no vertices");
    let mut b = OrderBuilder::new(g);
    let mut ranked: Vec<usize> = (0..g.len()).collect();
    match direction {
        Direction::Ascending => ranked.sort_by(|&x, &y| (g.size(x), g.alias(x)).cmp(&(g.size(y), g.alias(y)))),
        Direction::Descending => ranked.sort_by(|&x, &y| {
            (Reverse(g.size(x)), g.alias(x)).cmp(&(Reverse(g.size(y)), g.alias(y)))
        }),
    }
    while !b.done() {
        let next = if avoid_cartesian && !b.seq.is_empty() {
            ranked
                .iter()
                .copied()
                .find(|&v| !b.placed[v] && b.joins_order(v))
        } else {
            None
        };
        let v = next.unwrap_or_else(|| ranked.iter().copied().find(|&v| !b.placed[v]).expect("unplaced"));
        b.append_ranked(v);
    }
    let name = match direction {
        Direction::Ascending => "size-asc",
        Direction::Descending => "size-desc",
    };
    b.finish(name)
}

/// Wraps an externally chosen permutation as a single-partition order.
pub fn fixed_order(g: &JoinGraph, algorithm: &str, sequence: &[String]) -> Result<JoinOrder, PlanError> {
    let indices = sequence_indices(g, sequence)?;
    let mut b = OrderBuilder::new(g);
    for v in indices {
        b.append_ranked(v);
    }
    Ok(b.finish(algorithm))
}

/// Positions `i > 0` whose table shares no edge with any earlier table.
pub fn validate_order(g: &JoinGraph, o: &JoinOrder) -> Result<Vec<usize>, PlanError> {
    let indices = sequence_indices(g, &o.sequence)?;
    Ok((1..indices.len())
        .filter(|&i| !indices[..i].iter().any(|&p| g.adjacent(p, indices[i])))
        .collect())
}

/// Maps a permutation of the graph's aliases to vertex indices.
pub fn sequence_indices(g: &JoinGraph, sequence: &[String]) -> Result<Vec<usize>, PlanError> {
    if sequence.len() != g.len() {
        return Err(PlanError::NotAPermutation(format!(
            "{} entries for {} vertices",
            sequence.len(),
            g.len()
        )));
    }
    let mut seen = vec![false; g.len()];
    sequence
        .iter()
        .map(|alias| {
            let v = g
                .index_of(alias)
                .ok_or_else(|| PlanError::NotAPermutation(format!("unknown alias `{alias}`")))?;
            if std::mem::replace(&mut seen[v], true) {
                return Err(PlanError::NotAPermutation(format!("`{alias}` repeated")));
            }
            Ok(v)
        })
        .collect()
}
