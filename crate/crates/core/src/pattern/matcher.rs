//! Backtracking search for copies of a pattern in a host u-graph.

use std::collections::{BTreeSet, HashSet};

use crate::combinatorics::{for_each_permutation, SubsetIndexer};
use crate::error::{Error, Result};
use crate::hypergraph::{FCopy, UEdge, UGraph, VertexId};

use super::Pattern;

/// Above this many possible edges the presence set is hashed instead of a
/// bitmap.
const BITMAP_LIMIT: u64 = 1 << 30;

#[derive(Clone, Debug)]
enum EdgeSet {
    Bits(Vec<u64>),
    Hash(HashSet<u64>),
}

impl EdgeSet {
    fn new(total: u64) -> Self {
        if total <= BITMAP_LIMIT {
            EdgeSet::Bits(vec![0; total.div_ceil(64) as usize])
        } else {
            EdgeSet::Hash(HashSet::new())
        }
    }

    #[inline]
    fn contains(&self, id: u64) -> bool {
        match self {
            EdgeSet::Bits(b) => b[(id >> 6) as usize] >> (id & 63) & 1 == 1,
            EdgeSet::Hash(h) => h.contains(&id),
        }
    }

    fn insert(&mut self, id: u64) -> bool {
        match self {
            EdgeSet::Bits(b) => {
                let w = &mut b[(id >> 6) as usize];
                let fresh = *w >> (id & 63) & 1 == 0;
                *w |= 1 << (id & 63);
                fresh
            }
            EdgeSet::Hash(h) => h.insert(id),
        }
    }
}

/// Incrementally built u-graph with edge-rank lookup and co-occurrence
/// adjacency lists.
#[derive(Clone, Debug)]
pub struct HostGraph {
    u: usize,
    index: SubsetIndexer,
    present: EdgeSet,
    nbrs: Vec<Vec<VertexId>>,
    edges: usize,
}

impl HostGraph {
    pub fn new(n: usize, u: usize) -> Result<Self> {
        let index = SubsetIndexer::new(n, u)?;
        Ok(Self { u, present: EdgeSet::new(index.count()), index, nbrs: vec![Vec::new(); n], edges: 0 })
    }

    pub fn from_ugraph(g: &UGraph) -> Result<Self> {
        let mut h = Self::new(g.n(), g.u())?;
        for e in g.edges() {
            h.insert(e.vertices());
        }
        Ok(h)
    }

    pub fn n(&self) -> usize {
        self.nbrs.len()
    }

    pub fn u(&self) -> usize {
        self.u
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn indexer(&self) -> &SubsetIndexer {
        &self.index
    }

    /// Inserts a sorted edge; returns false if it was present.
    pub fn insert(&mut self, e: &[VertexId]) -> bool {
        if !self.present.insert(self.index.rank(e)) {
            return false;
        }
        self.edges += 1;
        for &a in e {
            for &b in e {
                if a != b {
                    let list = &mut self.nbrs[a as usize];
                    if let Err(pos) = list.binary_search(&b) {
                        list.insert(pos, b);
                    }
                }
            }
        }
        true
    }

    #[inline]
    pub fn contains_rank(&self, id: u64) -> bool {
        self.present.contains(id)
    }

    #[inline]
    pub fn contains_unsorted(&self, e: &[VertexId]) -> bool {
        self.present.contains(self.index.rank_unsorted(e))
    }

    pub fn neighbours(&self, v: VertexId) -> &[VertexId] {
        &self.nbrs[v as usize]
    }
}

/// Vertex order for extending a partial embedding.
#[derive(Clone, Debug)]
struct Plan {
    order: Vec<u32>,
    fixed: usize,
    // for positions >= fixed: an earlier local vertex sharing an edge
    anchor: Vec<u32>,
    // edges (as local vertex lists) whose last vertex in `order` is at pos
    checks: Vec<Vec<Vec<u32>>>,
    // pattern neighbourhood sizes, for pruning
    local_degree: Vec<usize>,
}

impl Plan {
    fn new(pattern: &Pattern, prefix: &[u32]) -> Self {
        let r = pattern.r();
        let masks: Vec<u32> = pattern.edges().iter().map(|e| e.iter().fold(0, |m, &v| m | 1 << v)).collect();
        let mut local_degree = vec![0usize; r];
        for v in 0..r {
            let nb = masks.iter().filter(|&&m| m >> v & 1 == 1).fold(0u32, |a, &m| a | m) & !(1 << v);
            local_degree[v] = nb.count_ones() as usize;
        }
        let mut order = prefix.to_vec();
        let mut placed = prefix.iter().fold(0u32, |m, &v| m | 1 << v);
        while order.len() < r {
            let next = (0..r as u32)
                .filter(|&v| placed >> v & 1 == 0)
                .max_by_key(|&v| {
                    let closing = masks.iter().filter(|&&m| m >> v & 1 == 1 && m & !(placed | 1 << v) == 0).count();
                    let touching = masks.iter().filter(|&&m| m >> v & 1 == 1 && m & placed != 0).count();
                    (closing, touching, local_degree[v as usize], std::cmp::Reverse(v))
                })
                .expect("unplaced vertex");
            order.push(next);
            placed |= 1 << next;
        }
        let mut anchor = vec![0u32; r];
        let mut checks = vec![Vec::new(); r];
        let mut seen = 0u32;
        for (pos, &v) in order.iter().enumerate() {
            if pos >= prefix.len() {
                anchor[pos] = order[..pos]
                    .iter()
                    .copied()
                    .find(|&w| masks.iter().any(|&m| m >> v & 1 == 1 && m >> w & 1 == 1))
                    .expect("connected pattern with nonempty prefix");
            }
            seen |= 1 << v;
            if pos + 1 >= prefix.len() {
                checks[pos] = pattern
                    .edges()
                    .iter()
                    .zip(&masks)
                    .filter(|(_, &m)| {
                        m & !seen == 0 && (pos + 1 == prefix.len() || m >> v & 1 == 1)
                    })
                    .map(|(e, _)| e.clone())
                    .collect();
            }
        }
        Self { order, fixed: prefix.len(), anchor, checks, local_degree }
    }
}

struct Search<'a, F: FnMut(&[VertexId])> {
    host: &'a HostGraph,
    plan: &'a Plan,
    map: [VertexId; 32],
    visit: F,
}

impl<F: FnMut(&[VertexId])> Search<'_, F> {
    fn edges_ok(&self, pos: usize) -> bool {
        let mut buf = [0u32; 16];
        self.plan.checks[pos].iter().all(|e| {
            for (k, &i) in e.iter().enumerate() {
                buf[k] = self.map[i as usize];
            }
            self.host.contains_unsorted(&buf[..e.len()])
        })
    }

    fn extend(&mut self, pos: usize) {
        let r = self.plan.order.len();
        if pos == r {
            let map = self.map;
            (self.visit)(&map[..r]);
            return;
        }
        let v = self.plan.order[pos] as usize;
        let hub = self.map[self.plan.anchor[pos] as usize];
        let need = self.plan.local_degree[v];
        for &c in self.host.neighbours(hub) {
            if self.host.neighbours(c).len() < need {
                continue;
            }
            if self.plan.order[..pos].iter().any(|&w| self.map[w as usize] == c) {
                continue;
            }
            self.map[v] = c;
            if self.edges_ok(pos) {
                self.extend(pos + 1);
            }
        }
    }

    fn run_from(&mut self, prefix_images: &[VertexId]) {
        for (k, &h) in prefix_images.iter().enumerate() {
            self.map[self.plan.order[k] as usize] = h;
        }
        if self.plan.fixed > 0 && !self.edges_ok(self.plan.fixed - 1) {
            return;
        }
        self.extend(self.plan.fixed);
    }
}

fn image_ranks(pattern: &Pattern, index: &SubsetIndexer, map: &[VertexId]) -> Vec<u64> {
    let mut buf = [0u32; 16];
    let mut ids: Vec<u64> = pattern
        .edges()
        .iter()
        .map(|e| {
            for (k, &i) in e.iter().enumerate() {
                buf[k] = map[i as usize];
            }
            index.rank_unsorted(&buf[..e.len()])
        })
        .collect();
    ids.sort_unstable();
    ids
}

fn image_copy(pattern: &Pattern, map: &[VertexId]) -> FCopy {
    FCopy::new(
        pattern
            .edges()
            .iter()
            .map(|e| UEdge::new(e.iter().map(|&i| map[i as usize]).collect()).expect("injective map"))
            .collect(),
    )
}

/// Searches for copies of one pattern containing a given host edge.
#[derive(Clone, Debug)]
pub struct AnchoredMatcher<'p> {
    pattern: &'p Pattern,
    // one plan per pattern edge, with that edge as prefix
    plans: Vec<Plan>,
    perms: Vec<Vec<u32>>,
}

impl<'p> AnchoredMatcher<'p> {
    pub fn new(pattern: &'p Pattern) -> Self {
        let plans = pattern.edges().iter().map(|e| Plan::new(pattern, e)).collect();
        let mut perms = Vec::new();
        for_each_permutation(pattern.u(), |p| perms.push(p.to_vec()));
        Self { pattern, plans, perms }
    }

    pub fn pattern(&self) -> &'p Pattern {
        self.pattern
    }

    /// Calls `visit` with the local-to-host map of every embedding whose
    /// image contains the host edge `e`. Each copy is reported `aut` times
    /// per pattern edge mapped onto `e`; callers deduplicate.
    pub fn for_each_embedding_through(&self, host: &HostGraph, e: &[VertexId], mut visit: impl FnMut(&[VertexId])) {
        let mut images = vec![0u32; e.len()];
        for plan in &self.plans {
            for perm in &self.perms {
                for (k, &i) in perm.iter().enumerate() {
                    images[k] = e[i as usize];
                }
                let mut s = Search { host, plan, map: [0; 32], visit: &mut visit };
                s.run_from(&images);
            }
        }
    }

    /// Distinct copies through `e`, as sorted edge-rank lists.
    pub fn copies_through(&self, host: &HostGraph, e: &[VertexId]) -> Vec<Vec<u64>> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        self.for_each_embedding_through(host, e, |map| {
            let ids = image_ranks(self.pattern, host.indexer(), map);
            if seen.insert(ids.clone()) {
                out.push(ids);
            }
        });
        out
    }
}

/// All distinct copies of `pattern` in `g`.
pub fn enumerate_copies(pattern: &Pattern, g: &UGraph) -> Result<BTreeSet<FCopy>> {
    if pattern.u() != g.u() {
        return Err(Error::InvalidParameters(format!(
            "pattern is {}-uniform, host is {}-uniform",
            pattern.u(),
            g.u()
        )));
    }
    let mut out = BTreeSet::new();
    if g.n() < pattern.r() || g.edge_count() < pattern.s() {
        return Ok(out);
    }
    let host = HostGraph::from_ugraph(g)?;
    let first = &pattern.edges()[0];
    let plan = Plan::new(pattern, first);
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let perms = {
        let mut v = Vec::new();
        for_each_permutation(pattern.u(), |p| v.push(p.to_vec()));
        v
    };
    let mut images = vec![0u32; pattern.u()];
    for e in g.edges() {
        for perm in &perms {
            for (k, &i) in perm.iter().enumerate() {
                images[k] = e.vertices()[i as usize];
            }
            let mut s = Search {
                host: &host,
                plan: &plan,
                map: [0; 32],
                visit: |map: &[VertexId]| {
                    if seen.insert(image_ranks(pattern, host.indexer(), map)) {
                        out.insert(image_copy(pattern, map));
                    }
                },
            };
            s.run_from(&images);
        }
    }
    Ok(out)
}

/// Maintains the set of vertices lying in at least one copy of the pattern
/// as host edges arrive.
#[derive(Clone, Debug)]
pub struct CoverTracker<'p> {
    matcher: AnchoredMatcher<'p>,
    host: HostGraph,
    covered: Vec<bool>,
    covered_count: usize,
}

impl<'p> CoverTracker<'p> {
    pub fn new(pattern: &'p Pattern, n: usize) -> Result<Self> {
        Ok(Self {
            matcher: AnchoredMatcher::new(pattern),
            host: HostGraph::new(n, pattern.u())?,
            covered: vec![false; n],
            covered_count: 0,
        })
    }

    /// Adds an edge and returns the vertices it newly covers, in
    /// increasing order.
    pub fn add_u_edge(&mut self, e: &UEdge) -> Result<Vec<VertexId>> {
        if e.len() != self.host.u() {
            return Err(Error::BadEdge { edge: e.vertices().to_vec(), expected: self.host.u() });
        }
        if let Some(&v) = e.vertices().last() {
            if v as usize >= self.host.n() {
                return Err(Error::VertexOutOfRange { vertex: v, n: self.host.n() });
            }
        }
        if !self.host.insert(e.vertices()) {
            return Err(Error::DuplicateEdge(e.vertices().to_vec()));
        }
        let mut fresh = Vec::new();
        if self.all_covered() {
            return Ok(fresh);
        }
        let covered = &mut self.covered;
        self.matcher.for_each_embedding_through(&self.host, e.vertices(), |map| {
            for &v in map {
                if !covered[v as usize] {
                    covered[v as usize] = true;
                    fresh.push(v);
                }
            }
        });
        self.covered_count += fresh.len();
        fresh.sort_unstable();
        Ok(fresh)
    }

    pub fn is_covered(&self, v: VertexId) -> bool {
        self.covered[v as usize]
    }

    pub fn covered(&self) -> Vec<VertexId> {
        (0..self.covered.len() as u32).filter(|&v| self.covered[v as usize]).collect()
    }

    pub fn covered_count(&self) -> usize {
        self.covered_count
    }

    pub fn all_covered(&self) -> bool {
        self.covered_count == self.covered.len()
    }

    pub fn host(&self) -> &HostGraph {
        &self.host
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::for_each_subset;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_force(pattern: &Pattern, g: &UGraph) -> BTreeSet<FCopy> {
        let mut out = BTreeSet::new();
        for_each_subset(g.n(), pattern.r(), |set| {
            for_each_permutation(pattern.r(), |perm| {
                let map: Vec<u32> = perm.iter().map(|&i| set[i as usize]).collect();
                let c = image_copy(pattern, &map);
                if c.is_in(g) {
                    out.insert(c);
                }
            });
        });
        out
    }

    fn random_graph(n: usize, u: usize, p: f64, seed: u64) -> UGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = UGraph::empty(n, u);
        for_each_subset(n, u, |e| {
            if rng.random_bool(p) {
                g.insert(UEdge::new(e.to_vec()).unwrap()).unwrap();
            }
        });
        g
    }

    #[test]
    fn spec_examples() {
        let k4 = Pattern::complete_graph(4).unwrap();
        assert_eq!(enumerate_copies(&k4, &UGraph::complete(5, 2)).unwrap().len(), 5);
        let c4 = Pattern::cycle(4).unwrap();
        assert_eq!(enumerate_copies(&c4, &UGraph::complete(4, 2)).unwrap().len(), 3);
        let mut sparse = UGraph::empty(6, 2);
        for (a, b) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)] {
            sparse.insert(UEdge::new(vec![a, b]).unwrap()).unwrap();
        }
        assert!(enumerate_copies(&k4, &sparse).unwrap().is_empty());
    }

    #[test]
    fn tracker_completes_k4_on_last_edge() {
        let k4 = Pattern::complete_graph(4).unwrap();
        let mut t = CoverTracker::new(&k4, 6).unwrap();
        assert!(t.covered().is_empty());
        let edges = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];
        for (i, e) in edges.iter().enumerate() {
            let fresh = t.add_u_edge(&UEdge::from(*e)).unwrap();
            if i < 5 {
                assert!(fresh.is_empty());
            } else {
                assert_eq!(fresh, vec![0, 1, 2, 3]);
            }
        }
        assert!(matches!(t.add_u_edge(&UEdge::from([0, 1])), Err(Error::DuplicateEdge(_))));
    }

    #[test]
    fn tracker_covers_everything_on_complete_graph() {
        let c5 = Pattern::cycle(5).unwrap();
        let mut t = CoverTracker::new(&c5, 7).unwrap();
        for_each_subset(7, 2, |e| {
            t.add_u_edge(&UEdge::new(e.to_vec()).unwrap()).unwrap();
        });
        assert!(t.all_covered());
    }

    #[test]
    fn hypergraph_patterns_match_brute_force() {
        let k43 = Pattern::complete_uniform(3, 4).unwrap();
        let loose = Pattern::new(3, 5, vec![vec![0, 1, 2], vec![2, 3, 4], vec![0, 1, 4]]).unwrap();
        for seed in 0..20 {
            let g = random_graph(7, 3, 0.5, seed);
            for p in [&k43, &loose] {
                assert_eq!(enumerate_copies(p, &g).unwrap(), brute_force(p, &g));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn enumeration_matches_brute_force(seed in any::<u64>(), n in 4usize..=8, p in 0.3f64..0.9, which in 0usize..4) {
            let pattern = match which {
                0 => Pattern::complete_graph(4).unwrap(),
                1 => Pattern::cycle(4).unwrap(),
                2 => Pattern::path(3).unwrap(),
                _ => Pattern::complete_bipartite(2, 3).unwrap(),
            };
            let g = random_graph(n, 2, p, seed);
            prop_assert_eq!(enumerate_copies(&pattern, &g).unwrap(), brute_force(&pattern, &g));
        }

        #[test]
        fn tracker_matches_recomputation(seed in any::<u64>(), n in 4usize..=8) {
            let pattern = Pattern::cycle(4).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut edges = Vec::new();
            for_each_subset(n, 2, |e| edges.push(UEdge::new(e.to_vec()).unwrap()));
            use rand::seq::SliceRandom;
            edges.shuffle(&mut rng);
            let mut t = CoverTracker::new(&pattern, n).unwrap();
            let mut g = UGraph::empty(n, 2);
            for e in edges.into_iter().take(rng.random_range(0..=n * (n - 1) / 2)) {
                t.add_u_edge(&e).unwrap();
                g.insert(e).unwrap();
                let expected: BTreeSet<u32> = enumerate_copies(&pattern, &g).unwrap().iter().flat_map(|c| c.vertex_set().to_vec()).collect();
                prop_assert_eq!(t.covered(), expected.into_iter().collect::<Vec<_>>());
            }
        }
    }
}
