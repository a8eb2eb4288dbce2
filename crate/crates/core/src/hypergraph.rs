//! u-graphs, r-uniform multi-hypergraphs and F-graphs.
//!
//! Vertices are dense zero-based integers and every edge is stored as a
//! strictly increasing tuple, so equality and hashing are canonical.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};

pub type VertexId = u32;

/// A hyperedge of a u-graph: `u` distinct vertices in increasing order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct UEdge(Vec<VertexId>);

impl UEdge {
    /// Builds an edge from any ordering of distinct vertices.
    pub fn new(mut vertices: Vec<VertexId>) -> Result<Self> {
        vertices.sort_unstable();
        if vertices.len() < 2 || vertices.windows(2).any(|w| w[0] == w[1]) {
            let expected = vertices.len();
            return Err(Error::BadEdge { edge: vertices, expected });
        }
        Ok(Self(vertices))
    }

    pub(crate) fn from_sorted(vertices: Vec<VertexId>) -> Self {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        Self(vertices)
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.0.binary_search(&v).is_ok()
    }
}

impl<const K: usize> From<[VertexId; K]> for UEdge {
    fn from(v: [VertexId; K]) -> Self {
        UEdge::new(v.to_vec()).expect("distinct vertices")
    }
}

/// A u-uniform simple hypergraph on `[n]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UGraph {
    n: usize,
    u: usize,
    edges: BTreeSet<UEdge>,
}

impl UGraph {
    pub fn empty(n: usize, u: usize) -> Self {
        Self { n, u, edges: BTreeSet::new() }
    }

    pub fn from_edges(n: usize, u: usize, edges: impl IntoIterator<Item = UEdge>) -> Result<Self> {
        let mut g = Self::empty(n, u);
        for e in edges {
            if !g.insert(e.clone())? {
                return Err(Error::DuplicateEdge(e.0));
            }
        }
        Ok(g)
    }

    /// The complete u-graph on `[n]`.
    pub fn complete(n: usize, u: usize) -> Self {
        let mut edges = BTreeSet::new();
        crate::combinatorics::for_each_subset(n, u, |s| {
            edges.insert(UEdge::from_sorted(s.to_vec()));
        });
        Self { n, u, edges }
    }

    /// Inserts an edge; returns `false` if it was already present.
    pub fn insert(&mut self, e: UEdge) -> Result<bool> {
        self.check_edge(&e)?;
        Ok(self.edges.insert(e))
    }

    pub fn remove(&mut self, e: &UEdge) -> bool {
        self.edges.remove(e)
    }

    fn check_edge(&self, e: &UEdge) -> Result<()> {
        if e.len() != self.u {
            return Err(Error::BadEdge { edge: e.0.clone(), expected: self.u });
        }
        if let Some(&v) = e.0.last() {
            if v as usize >= self.n {
                return Err(Error::VertexOutOfRange { vertex: v, n: self.n });
            }
        }
        Ok(())
    }

    pub fn contains(&self, e: &UEdge) -> bool {
        self.edges.contains(e)
    }

    pub fn edges(&self) -> impl Iterator<Item = &UEdge> + '_ {
        self.edges.iter()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn u(&self) -> usize {
        self.u
    }

    pub fn is_subgraph_of(&self, other: &UGraph) -> bool {
        self.edges.is_subset(&other.edges)
    }
}

/// An r-uniform multi-hypergraph: a multiset of r-subsets of `[n]`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RMultiHypergraph {
    n: usize,
    r: usize,
    edges: BTreeMap<Vec<VertexId>, usize>,
}

impl RMultiHypergraph {
    pub fn new(n: usize, r: usize) -> Self {
        Self { n, r, edges: BTreeMap::new() }
    }

    pub fn from_edges(n: usize, r: usize, edges: impl IntoIterator<Item = Vec<VertexId>>) -> Result<Self> {
        let mut h = Self::new(n, r);
        for e in edges {
            h.insert(e)?;
        }
        Ok(h)
    }

    pub fn insert(&mut self, mut e: Vec<VertexId>) -> Result<()> {
        e.sort_unstable();
        if e.len() != self.r || e.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::BadEdge { edge: e, expected: self.r });
        }
        if let Some(&v) = e.last() {
            if v as usize >= self.n {
                return Err(Error::VertexOutOfRange { vertex: v, n: self.n });
            }
        }
        *self.edges.entry(e).or_insert(0) += 1;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn multiplicity(&self, e: &[VertexId]) -> usize {
        self.edges.get(e).copied().unwrap_or(0)
    }

    /// Number of hyperedges counted with multiplicity.
    pub fn edge_count(&self) -> usize {
        self.edges.values().sum()
    }

    pub fn distinct_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_simple(&self) -> bool {
        self.edges.values().all(|&m| m == 1)
    }

    pub fn distinct_edges(&self) -> impl Iterator<Item = &[VertexId]> + '_ {
        self.edges.keys().map(Vec::as_slice)
    }

    /// Every hyperedge, repeated according to its multiplicity.
    pub fn edges_with_repeats(&self) -> impl Iterator<Item = &[VertexId]> + '_ {
        self.edges
            .iter()
            .flat_map(|(e, &m)| std::iter::repeat_n(e.as_slice(), m))
    }

    /// Removes repeated hyperedges.
    pub fn simplify(&self) -> RMultiHypergraph {
        RMultiHypergraph {
            n: self.n,
            r: self.r,
            edges: self.edges.keys().map(|e| (e.clone(), 1)).collect(),
        }
    }

    pub fn non_isolated_vertices(&self) -> BTreeSet<VertexId> {
        self.edges.keys().flatten().copied().collect()
    }

    /// `(r−1)·e + c − v` over the vertices incident to some hyperedge.
    pub fn nullity(&self) -> i64 {
        nullity(self.r, self.edges_with_repeats())
    }
}

/// Connected components of the non-isolated vertices, plus isolated ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Components {
    pub components: Vec<Vec<VertexId>>,
    pub isolated: Vec<VertexId>,
}

/// Connected components under shared-vertex adjacency.
pub fn components<'a>(edges: impl IntoIterator<Item = &'a [VertexId]>, n: usize) -> Components {
    let mut dsu = Dsu::new(n);
    let mut touched = vec![false; n];
    for e in edges {
        for &v in e {
            touched[v as usize] = true;
        }
        for w in e.windows(2) {
            dsu.union(w[0] as usize, w[1] as usize);
        }
    }
    let mut by_root: BTreeMap<usize, Vec<VertexId>> = BTreeMap::new();
    let mut isolated = Vec::new();
    for v in 0..n {
        if touched[v] {
            by_root.entry(dsu.find(v)).or_default().push(v as VertexId);
        } else {
            isolated.push(v as VertexId);
        }
    }
    let mut components: Vec<_> = by_root.into_values().collect();
    components.sort();
    Components { components, isolated }
}

/// Nullity `(r−1)·e(S) + c(S) − v(S)` of a collection of r-sets, where `v`
/// and `c` only count vertices incident to some edge.
pub fn nullity<'a>(r: usize, edges: impl IntoIterator<Item = &'a [VertexId]>) -> i64 {
    let mut index: BTreeMap<VertexId, usize> = BTreeMap::new();
    let mut dsu = Dsu::new(0);
    let mut e_count = 0i64;
    for e in edges {
        e_count += 1;
        let mut first = None;
        for &v in e {
            let next = index.len();
            let id = *index.entry(v).or_insert_with(|| {
                dsu.push();
                next
            });
            match first {
                None => first = Some(id),
                Some(f) => {
                    dsu.union(f, id);
                }
            }
        }
    }
    let v = index.len() as i64;
    let c = (0..index.len()).filter(|&i| dsu.find(i) == i).count() as i64;
    (r as i64 - 1) * e_count + c - v
}

/// A copy of the pattern, identified with its image edge set.
///
/// Two copies are equal iff their edge sets are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FCopy {
    edges: Vec<UEdge>,
    #[serde(skip)]
    vertex_set: Vec<VertexId>,
}

impl FCopy {
    pub fn new(mut edges: Vec<UEdge>) -> Self {
        edges.sort_unstable();
        edges.dedup();
        let mut vertex_set: Vec<VertexId> = edges.iter().flat_map(|e| e.0.iter().copied()).collect();
        vertex_set.sort_unstable();
        vertex_set.dedup();
        Self { edges, vertex_set }
    }

    pub fn edges(&self) -> &[UEdge] {
        &self.edges
    }

    pub fn vertex_set(&self) -> &[VertexId] {
        &self.vertex_set
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.vertex_set.binary_search(&v).is_ok()
    }

    pub fn is_in(&self, g: &UGraph) -> bool {
        self.edges.iter().all(|e| g.contains(e))
    }

    /// Number of vertices shared with another copy.
    pub fn overlap(&self, other: &FCopy) -> usize {
        sorted_intersection_len(&self.vertex_set, &other.vertex_set)
    }
}

/// A set of copies of one pattern on the vertex set `[n]`.
///
/// Distinct copies may share a vertex set, so the unlabeled view is a
/// multi-hypergraph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FGraph {
    n: usize,
    r: usize,
    u: usize,
    copies: BTreeSet<FCopy>,
}

impl FGraph {
    pub fn new(n: usize, r: usize, u: usize) -> Self {
        Self { n, r, u, copies: BTreeSet::new() }
    }

    pub fn insert(&mut self, c: FCopy) -> Result<bool> {
        if c.vertex_set.len() != self.r {
            return Err(Error::BadEdge { edge: c.vertex_set, expected: self.r });
        }
        if let Some(e) = c.edges.iter().find(|e| e.len() != self.u) {
            return Err(Error::BadEdge { edge: e.0.clone(), expected: self.u });
        }
        if let Some(&v) = c.vertex_set.last() {
            if v as usize >= self.n {
                return Err(Error::VertexOutOfRange { vertex: v, n: self.n });
            }
        }
        Ok(self.copies.insert(c))
    }

    pub fn remove(&mut self, c: &FCopy) -> bool {
        self.copies.remove(c)
    }

    pub fn contains(&self, c: &FCopy) -> bool {
        self.copies.contains(c)
    }

    pub fn copies(&self) -> impl Iterator<Item = &FCopy> + '_ {
        self.copies.iter()
    }

    pub fn len(&self) -> usize {
        self.copies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.copies.is_empty()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn u(&self) -> usize {
        self.u
    }

    /// Replaces each copy by a hyperedge on its vertex set.
    pub fn forget_labels(&self) -> RMultiHypergraph {
        let mut h = RMultiHypergraph::new(self.n, self.r);
        for c in &self.copies {
            *h.edges.entry(c.vertex_set.clone()).or_insert(0) += 1;
        }
        h
    }

    /// The u-graph union of the copies.
    pub fn union_of_labels(&self) -> UGraph {
        let mut g = UGraph::empty(self.n, self.u);
        for c in &self.copies {
            g.edges.extend(c.edges.iter().cloned());
        }
        g
    }

    /// Number of copies whose vertex set contains `v`.
    pub fn degree(&self, v: VertexId) -> usize {
        self.copies.iter().filter(|c| c.contains_vertex(v)).count()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for c in &self.copies {
            for &v in &c.vertex_set {
                d[v as usize] += 1;
            }
        }
        d
    }

    pub fn isolated_vertices(&self) -> Vec<VertexId> {
        self.degrees()
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == 0)
            .map(|(v, _)| v as VertexId)
            .collect()
    }
}

impl<'a> IntoIterator for &'a FGraph {
    type Item = &'a FCopy;
    type IntoIter = std::collections::btree_set::Iter<'a, FCopy>;

    fn into_iter(self) -> Self::IntoIter {
        self.copies.iter()
    }
}

pub(crate) fn sorted_intersection_len(a: &[VertexId], b: &[VertexId]) -> usize {
    let (mut i, mut j, mut k) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                k += 1;
                i += 1;
                j += 1;
            }
        }
    }
    k
}

/// Union-find with path halving.
#[derive(Clone, Debug)]
pub(crate) struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    pub fn push(&mut self) -> usize {
        self.parent.push(self.parent.len());
        self.parent.len() - 1
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e(v: &[u32]) -> UEdge {
        UEdge::new(v.to_vec()).unwrap()
    }

    #[test]
    fn single_edge_component_and_isolated() {
        let c = components([[0u32, 1, 2].as_slice()], 5);
        assert_eq!(c.components, vec![vec![0, 1, 2]]);
        assert_eq!(c.isolated, vec![3, 4]);
    }

    #[test]
    fn chained_and_disjoint_components() {
        let chained = components([[0u32, 1, 2].as_slice(), &[2, 3, 4]], 5);
        assert_eq!(chained.components, vec![vec![0, 1, 2, 3, 4]]);
        let disjoint = components([[0u32, 1, 2].as_slice(), &[3, 4, 5]], 6);
        assert_eq!(disjoint.components.len(), 2);
    }

    #[test]
    fn nullity_examples() {
        assert_eq!(nullity(4, [[0u32, 1, 2, 3].as_slice()]), 0);
        assert_eq!(nullity(4, [[0u32, 1, 2, 3].as_slice(), &[0, 1, 2, 3]]), 3);
        assert_eq!(nullity(4, [[0u32, 1, 2, 3].as_slice(), &[1, 2, 3, 4]]), 2);
        assert_eq!(nullity(4, std::iter::empty()), 0);
    }

    #[test]
    fn edges_are_canonical() {
        assert_eq!(e(&[3, 1]), e(&[1, 3]));
        assert!(UEdge::new(vec![2, 2]).is_err());
        let mut g = UGraph::empty(4, 2);
        assert!(g.insert(e(&[0, 1])).unwrap());
        assert!(!g.insert(e(&[1, 0])).unwrap());
        assert!(g.insert(e(&[0, 4])).is_err());
        assert!(g.insert(e(&[0, 1, 2])).is_err());
    }

    #[test]
    fn forget_labels_keeps_multiplicity() {
        let mut h = FGraph::new(4, 4, 2);
        assert!(h.forget_labels().edge_count() == 0);
        let c1 = FCopy::new(vec![e(&[0, 1]), e(&[1, 2]), e(&[2, 3]), e(&[0, 3])]);
        let c2 = FCopy::new(vec![e(&[0, 2]), e(&[1, 2]), e(&[1, 3]), e(&[0, 3])]);
        h.insert(c1).unwrap();
        h.insert(c2).unwrap();
        let t = h.forget_labels();
        assert_eq!(t.multiplicity(&[0, 1, 2, 3]), 2);
        assert_eq!(t.simplify().edge_count(), 1);
        assert_eq!(t.nullity(), 3);
    }

    #[test]
    fn three_disjoint_copies_give_three_hyperedges() {
        let mut h = FGraph::new(9, 3, 2);
        for b in [0u32, 3, 6] {
            h.insert(FCopy::new(vec![e(&[b, b + 1]), e(&[b + 1, b + 2]), e(&[b, b + 2])])).unwrap();
        }
        let t = h.forget_labels();
        assert_eq!(t.edge_count(), 3);
        assert!(t.is_simple());
    }

    #[test]
    fn union_of_labels_of_overlapping_copies() {
        let k4 = |vs: [u32; 4]| {
            let mut es = Vec::new();
            for i in 0..4 {
                for j in i + 1..4 {
                    es.push(e(&[vs[i], vs[j]]));
                }
            }
            FCopy::new(es)
        };
        let mut h = FGraph::new(6, 4, 2);
        assert_eq!(h.union_of_labels().edge_count(), 0);
        h.insert(k4([0, 1, 2, 3])).unwrap();
        assert_eq!(h.union_of_labels().edge_count(), 6);
        h.insert(k4([0, 1, 4, 5])).unwrap();
        assert_eq!(h.union_of_labels().edge_count(), 11);
    }

    #[test]
    fn degrees_and_isolated_vertices() {
        let mut h = FGraph::new(6, 3, 2);
        assert_eq!(h.isolated_vertices().len(), 6);
        let tri = |a, b, c| FCopy::new(vec![e(&[a, b]), e(&[b, c]), e(&[a, c])]);
        h.insert(tri(0, 1, 2)).unwrap();
        assert_eq!(h.degree(0), 1);
        assert_eq!(h.isolated_vertices(), vec![3, 4, 5]);
        h.insert(tri(0, 3, 4)).unwrap();
        assert_eq!(h.degree(0), 2);
        assert_eq!(h.degrees(), vec![2, 1, 1, 1, 1, 0]);
    }

    fn arb_multi() -> impl Strategy<Value = Vec<Vec<u32>>> {
        proptest::collection::vec(proptest::sample::subsequence((0u32..9).collect::<Vec<_>>(), 3), 0..8)
    }

    proptest! {
        #[test]
        fn nullity_is_additive_over_components(edges in arb_multi()) {
            let comps = components(edges.iter().map(Vec::as_slice), 9);
            let total = nullity(3, edges.iter().map(Vec::as_slice));
            let per: i64 = comps.components.iter().map(|c| {
                nullity(3, edges.iter().filter(|e| c.contains(&e[0])).map(Vec::as_slice))
            }).sum();
            prop_assert_eq!(total, per);
            prop_assert!(total >= 0);
        }

        #[test]
        fn simplify_is_idempotent(edges in arb_multi()) {
            let h = RMultiHypergraph::from_edges(9, 3, edges).unwrap();
            let s = h.simplify();
            prop_assert_eq!(s.simplify(), s.clone());
            prop_assert_eq!(s.non_isolated_vertices(), h.non_isolated_vertices());
        }
    }
}
