use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{classify, AttrRef, JoinKind, JoinPredicate, QueryError, QueryModel, TableInstance};
use crate::catalog::SchemaInfo;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JoinEdge {
    #[serde(flatten)]
    pub predicate: JoinPredicate,
    /// Added by equality closure rather than written in the query.
    pub implied: bool,
}

/// Query join graph: table instances as vertices, equi-join predicates as
/// (possibly parallel) edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinGraph {
    vertices: Vec<TableInstance>,
    edges: Vec<JoinEdge>,
    index: BTreeMap<String, usize>,
    adjacency: Vec<BTreeSet<usize>>,
    component: Vec<usize>,
    component_count: usize,
}

impl JoinGraph {
    /// Panics if an edge endpoint is not a vertex alias or aliases repeat.
    pub fn new(vertices: Vec<TableInstance>, edges: Vec<JoinEdge>) -> Self {
        let mut index = BTreeMap::new();
        for (i, v) in vertices.iter().enumerate() {
            let prev = index.insert(v.alias.clone(), i);
            assert!(prev.is_none(), "duplicate vertex alias `{}`", v.alias);
        }
        let mut adjacency = vec![BTreeSet::new(); vertices.len()];
        for e in &edges {
            let l = index[&e.predicate.left.alias];
            let r = index[&e.predicate.right.alias];
            assert_ne!(l, r, "self-loop edge on `{}`", e.predicate.left.alias);
            adjacency[l].insert(r);
            adjacency[r].insert(l);
        }
        let (component, component_count) = components(&adjacency);
        Self {
            vertices,
            edges,
            index,
            adjacency,
            component,
            component_count,
        }
    }

    pub fn vertices(&self) -> &[TableInstance] {
        &self.vertices
    }

    pub fn edges(&self) -> &[JoinEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index_of(&self, alias: &str) -> Option<usize> {
        self.index.get(alias).copied()
    }

    pub fn alias(&self, v: usize) -> &str {
        &self.vertices[v].alias
    }

    pub fn size(&self, v: usize) -> u64 {
        self.vertices[v].size
    }

    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.adjacency[v]
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].contains(&b)
    }

    pub fn is_connected(&self) -> bool {
        self.component_count <= 1
    }

    pub fn component_count(&self) -> usize {
        self.component_count
    }

    pub fn component_of(&self, v: usize) -> usize {
        self.component[v]
    }

    /// Vertices incident to at least one many-to-many edge.
    pub fn many_to_many_participants(&self) -> BTreeSet<usize> {
        self.edges
            .iter()
            .filter(|e| e.predicate.kind == JoinKind::ManyToMany)
            .flat_map(|e| {
                [
                    self.index[&e.predicate.left.alias],
                    self.index[&e.predicate.right.alias],
                ]
            })
            .collect()
    }

    /// Edges with one endpoint in `placed` and the other equal to `v`.
    pub fn edges_between<'a>(
        &'a self,
        placed: &'a BTreeSet<String>,
        v: &'a str,
    ) -> impl Iterator<Item = &'a JoinEdge> + 'a {
        self.edges.iter().filter(move |e| {
            let p = &e.predicate;
            (p.left.alias == v && placed.contains(&p.right.alias))
                || (p.right.alias == v && placed.contains(&p.left.alias))
        })
    }
}

fn components(adjacency: &[BTreeSet<usize>]) -> (Vec<usize>, usize) {
    let mut component = vec![usize::MAX; adjacency.len()];
    let mut count = 0;
    for start in 0..adjacency.len() {
        if component[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        component[start] = count;
        while let Some(v) = stack.pop() {
            for &n in &adjacency[v] {
                if component[n] == usize::MAX {
                    component[n] = count;
                    stack.push(n);
                }
            }
        }
        count += 1;
    }
    (component, count)
}

/// Builds the annotated join graph. With `transitive`, every pair of columns
/// in the same equality class that is not already joined directly gets an
/// implied edge, classified on its own endpoints.
pub fn build_join_graph(
    q: &QueryModel,
    cat: &impl SchemaInfo,
    transitive: bool,
) -> Result<JoinGraph, QueryError> {
    let mut edges: Vec<JoinEdge> = q
        .joins
        .iter()
        .map(|p| JoinEdge {
            predicate: p.clone(),
            implied: false,
        })
        .collect();
    if transitive {
        edges.extend(implied_edges(q, cat)?);
    }
    Ok(JoinGraph::new(q.instances.clone(), edges))
}

fn implied_edges(q: &QueryModel, cat: &impl SchemaInfo) -> Result<Vec<JoinEdge>, QueryError> {
    let mut classes = UnionFind::default();
    for j in &q.joins {
        classes.union(&j.left, &j.right);
    }
    let direct: BTreeSet<(AttrRef, AttrRef)> = q
        .joins
        .iter()
        .flat_map(|j| {
            [
                (j.left.clone(), j.right.clone()),
                (j.right.clone(), j.left.clone()),
            ]
        })
        .collect();
    let mut out = Vec::new();
    for members in classes.classes() {
        for (i, a) in members.iter().enumerate() {
            for b in &members[i + 1..] {
                if a.alias == b.alias || direct.contains(&(a.clone(), b.clone())) {
                    continue;
                }
                out.push(JoinEdge {
                    predicate: classify(&q.instances, cat, a.clone(), b.clone())?,
                    implied: true,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Default)]
struct UnionFind {
    ids: BTreeMap<AttrRef, usize>,
    parent: Vec<usize>,
}

impl UnionFind {
    fn id(&mut self, a: &AttrRef) -> usize {
        if let Some(&id) = self.ids.get(a) {
            return id;
        }
        let id = self.parent.len();
        self.parent.push(id);
        self.ids.insert(a.clone(), id);
        id
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: &AttrRef, b: &AttrRef) {
        let (a, b) = (self.id(a), self.id(b));
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    /// Classes with members in sorted order, classes ordered by first member.
    fn classes(mut self) -> Vec<Vec<AttrRef>> {
        let ids: Vec<(AttrRef, usize)> = std::mem::take(&mut self.ids).into_iter().collect();
        let mut by_root: BTreeMap<usize, Vec<AttrRef>> = BTreeMap::new();
        for (attr, id) in ids {
            let root = self.find(id);
            by_root.entry(root).or_default().push(attr);
        }
        let mut classes: Vec<Vec<AttrRef>> = by_root.into_values().collect();
        classes.iter_mut().for_each(|c| c.sort());
        classes.sort();
        classes
    }
}
