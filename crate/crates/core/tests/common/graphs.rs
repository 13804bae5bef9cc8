//! Random join graphs and the structural invariants every Simpli-Squared
//! order must satisfy.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use joinorder_core::planner::{sequence_indices, validate_order, Provenance};
use joinorder_core::sqlfront::{AttrRef, JoinEdge, JoinPredicate, TableInstance};
use joinorder_core::{JoinGraph, JoinOrder};

#[derive(Debug, Clone)]
pub struct GraphSpec {
    pub vertices: Vec<(String, u64)>,
    /// (a, b, many_to_many, key on a)
    pub edges: Vec<(usize, usize, bool, bool)>,
}

/// Connected graph with `2..=max_vertices` vertices. Sizes come from a
/// narrow range so ties are common.
pub fn random_connected(seed: u64, max_vertices: usize) -> GraphSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=max_vertices);
    let vertices = (0..n)
        .map(|i| (format!("t{i}"), rng.gen_range(1..=40u64) * 10))
        .collect();
    let mut edges = Vec::new();
    let mm_share = rng.gen_range(0.0..0.6);
    let edge = |rng: &mut ChaCha8Rng, a: usize, b: usize| (a, b, rng.gen_bool(mm_share), rng.gen_bool(0.5));
    for v in 1..n {
        let u = rng.gen_range(0..v);
        edges.push(edge(&mut rng, u, v));
    }
    for _ in 0..rng.gen_range(0..n) {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            edges.push(edge(&mut rng, a, b));
        }
    }
    GraphSpec { vertices, edges }
}

impl GraphSpec {
    pub fn build(&self) -> JoinGraph {
        let instances = self
            .vertices
            .iter()
            .map(|(alias, size)| TableInstance {
                alias: alias.clone(),
                base_table: format!("{alias}_base"),
                size: *size,
                columns: vec!["id".into(), "k".into()],
            })
            .collect();
        let edges = self
            .edges
            .iter()
            .map(|&(a, b, mm, key_on_a)| {
                let left = AttrRef::new(&self.vertices[a].0, if !mm && key_on_a { "id" } else { "k" });
                let right = AttrRef::new(&self.vertices[b].0, if !mm && !key_on_a { "id" } else { "k" });
                JoinEdge {
                    predicate: JoinPredicate::classified(left, right, !mm && key_on_a, !mm && !key_on_a),
                    implied: false,
                }
            })
            .collect();
        JoinGraph::new(instances, edges)
    }

    /// Same graph with vertices and edges listed in a shuffled order.
    pub fn shuffled(&self, seed: u64) -> GraphSpec {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut perm: Vec<usize> = (0..self.vertices.len()).collect();
        perm.shuffle(&mut rng);
        let mut at = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            at[old] = new;
        }
        let vertices = perm.iter().map(|&old| self.vertices[old].clone()).collect();
        let mut edges: Vec<_> = self.edges.iter().map(|&(a, b, mm, k)| (at[a], at[b], mm, k)).collect();
        edges.shuffle(&mut rng);
        GraphSpec { vertices, edges }
    }
}

/// Checks the invariants of an order over a connected graph; returns the
/// first violation.
pub fn check_invariants(g: &JoinGraph, o: &JoinOrder) -> Result<(), String> {
    let indices = sequence_indices(g, &o.sequence).map_err(|e| e.to_string())?;
    let cartesian = validate_order(g, o).map_err(|e| e.to_string())?;
    if !cartesian.is_empty() {
        return Err(format!("Cartesian steps at {cartesian:?}"));
    }
    let flat: Vec<&String> = o.partitions.iter().flat_map(|p| &p.members).collect();
    if flat.iter().copied().ne(o.sequence.iter()) {
        return Err("partitions do not concatenate to the sequence".into());
    }
    let fk = g.many_to_many_participants();
    let heads: Vec<usize> = o
        .partitions
        .iter()
        .map(|p| g.index_of(&p.head).expect("head alias"))
        .collect();
    if fk.is_empty() {
        if o.partitions.len() != 1 || o.provenance[&o.partitions[0].head] != Provenance::Seed {
            return Err("graph without many-to-many joins must give one seeded partition".into());
        }
    } else {
        let mut sorted = heads.clone();
        sorted.sort_unstable();
        if sorted != fk.iter().copied().collect::<Vec<_>>() {
            return Err(format!("heads {heads:?} differ from many-to-many participants {fk:?}"));
        }
    }
    for (p, &head) in o.partitions.iter().zip(&heads) {
        if p.members.first() != Some(&p.head) {
            return Err(format!("partition of `{}` does not start with its head", p.head));
        }
        let candidates: Vec<usize> = p
            .members
            .iter()
            .filter(|m| o.provenance[*m] == Provenance::FkCandidate)
            .map(|m| g.index_of(m).expect("member alias"))
            .collect();
        let keys: Vec<(u64, &str)> = candidates.iter().map(|&c| (g.size(c), g.alias(c))).collect();
        if keys.windows(2).any(|w| w[0] > w[1]) {
            return Err(format!("candidates of `{}` not size-ascending: {keys:?}", p.head));
        }
        if let Some(&c) = candidates.iter().find(|&&c| !g.adjacent(c, head)) {
            return Err(format!("candidate `{}` does not join head `{}`", g.alias(c), p.head));
        }
    }
    debug_assert_eq!(indices.len(), g.len());
    Ok(())
}
