//! The fixed pattern `F`: densities, balancedness, connectivity,
//! automorphisms and niceness, plus copy enumeration in host graphs.

mod matcher;

use std::collections::{HashSet, VecDeque};
use std::sync::OnceLock;

use num::rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{for_each_subset, SubsetIndexer};
use crate::error::{Error, Result};
use crate::hypergraph::{Dsu, FCopy, UEdge, VertexId};

pub use matcher::{enumerate_copies, AnchoredMatcher, CoverTracker, HostGraph};

/// Largest pattern the exact analyses accept.
pub const DEFAULT_VERTEX_CAP: usize = 12;

/// Largest number of distinct copies per vertex set we materialize.
const TEMPLATE_CAP: usize = 1 << 20;

/// On-disk pattern description: `{"u": 2, "r": 4, "edges": [[0,1], ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternSpec {
    pub u: usize,
    pub r: usize,
    pub edges: Vec<Vec<u32>>,
}

/// A fixed connected u-graph on the vertex set `0..r`.
#[derive(Clone, Debug)]
pub struct Pattern {
    u: usize,
    r: usize,
    // sorted list of sorted edges
    edges: Vec<Vec<u32>>,
    masks: Vec<u32>,
    aut: u64,
    templates: OnceLock<Vec<Vec<Vec<u32>>>>,
}

impl PartialEq for Pattern {
    fn eq(&self, other: &Self) -> bool {
        self.u == other.u && self.r == other.r && self.edges == other.edges
    }
}

impl Eq for Pattern {}

impl Pattern {
    pub fn new(u: usize, r: usize, edges: Vec<Vec<u32>>) -> Result<Self> {
        Self::with_cap(u, r, edges, DEFAULT_VERTEX_CAP)
    }

    pub fn with_cap(u: usize, r: usize, edges: Vec<Vec<u32>>, cap: usize) -> Result<Self> {
        if u < 2 {
            return Err(Error::InvalidPattern(format!("uniformity {u} < 2")));
        }
        if r < u {
            return Err(Error::InvalidPattern(format!("r = {r} < u = {u}")));
        }
        if r > cap || r > 31 {
            return Err(Error::PatternTooLarge { r, cap });
        }
        let mut sorted: Vec<Vec<u32>> = Vec::with_capacity(edges.len());
        for mut e in edges {
            e.sort_unstable();
            if e.len() != u || e.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::BadEdge { edge: e, expected: u });
            }
            if let Some(&v) = e.last() {
                if v as usize >= r {
                    return Err(Error::VertexOutOfRange { vertex: v, n: r });
                }
            }
            sorted.push(e);
        }
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateEdge(w[0].clone()));
        }
        if sorted.is_empty() {
            return Err(Error::InvalidPattern("pattern has no edges".into()));
        }
        let masks: Vec<u32> = sorted.iter().map(|e| vertex_mask(e)).collect();
        let span = masks.iter().fold(0u32, |a, &m| a | m);
        if span != full_mask(r) {
            return Err(Error::InvalidPattern("every vertex must lie in an edge".into()));
        }
        if !connected_after_removal(r, &masks, 0) {
            return Err(Error::InvalidPattern("pattern must be connected".into()));
        }
        let aut = count_isomorphisms(r, &masks, &masks.iter().copied().collect(), None);
        Ok(Self { u, r, edges: sorted, masks, aut, templates: OnceLock::new() })
    }

    pub fn from_spec(spec: &PatternSpec) -> Result<Self> {
        Self::new(spec.u, spec.r, spec.edges.clone())
    }

    pub fn to_spec(&self) -> PatternSpec {
        PatternSpec { u: self.u, r: self.r, edges: self.edges.clone() }
    }

    /// The complete graph `K_r`.
    pub fn complete_graph(r: usize) -> Result<Self> {
        Self::complete_uniform(2, r)
    }

    /// The complete u-graph on `r` vertices.
    pub fn complete_uniform(u: usize, r: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for_each_subset(r, u, |s| edges.push(s.to_vec()));
        Self::new(u, r, edges)
    }

    /// `K_{a,b}` with parts `0..a` and `a..a+b`.
    pub fn complete_bipartite(a: usize, b: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for i in 0..a as u32 {
            for j in a as u32..(a + b) as u32 {
                edges.push(vec![i, j]);
            }
        }
        Self::new(2, a + b, edges)
    }

    pub fn cycle(r: usize) -> Result<Self> {
        let edges = (0..r as u32).map(|i| vec![i, (i + 1) % r as u32]).collect();
        Self::new(2, r, edges)
    }

    /// The path with `len` edges.
    pub fn path(len: usize) -> Result<Self> {
        let edges = (0..len as u32).map(|i| vec![i, i + 1]).collect();
        Self::new(2, len + 1, edges)
    }

    pub fn star(leaves: usize) -> Result<Self> {
        let edges = (1..=leaves as u32).map(|i| vec![0, i]).collect();
        Self::new(2, leaves + 1, edges)
    }

    pub fn u(&self) -> usize {
        self.u
    }

    /// Number of vertices.
    pub fn r(&self) -> usize {
        self.r
    }

    /// Number of edges.
    pub fn s(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Vec<u32>] {
        &self.edges
    }

    /// Number of automorphisms.
    pub fn aut(&self) -> u64 {
        self.aut
    }

    /// The 1-density `s/(r−1)`.
    pub fn d1(&self) -> Ratio<u64> {
        density_d1(self.r, self.s()).expect("patterns have r >= 2")
    }

    /// Number of distinct copies on any fixed r-set, `r!/aut`.
    pub fn copies_per_vertex_set(&self) -> u64 {
        let fact = crate::combinatorics::factorial(self.r as u64).expect("r <= 31");
        (fact / self.aut as u128) as u64
    }

    /// The distinct relabelings of the pattern on `0..r`, one per copy on a
    /// fixed r-set. Computed on first use as the orbit under `S_r`.
    pub fn templates(&self) -> Result<&[Vec<Vec<u32>>]> {
        if let Some(t) = self.templates.get() {
            return Ok(t);
        }
        let expected = self.copies_per_vertex_set();
        if expected as usize > TEMPLATE_CAP {
            return Err(Error::PatternTooLarge { r: self.r, cap: self.r - 1 });
        }
        let t = orbit_templates(self.r, &self.masks);
        debug_assert_eq!(t.len() as u64, expected);
        Ok(self.templates.get_or_init(|| t))
    }

    /// The copy obtained by mapping local vertex `i` to `rset[i]`.
    pub fn copy_from_template(&self, template: &[Vec<u32>], rset: &[VertexId]) -> FCopy {
        let edges = template
            .iter()
            .map(|e| UEdge::new(e.iter().map(|&i| rset[i as usize]).collect()).expect("injective"))
            .collect();
        FCopy::new(edges)
    }

    /// All `r!/aut(F)` distinct copies on the vertex set `rset`.
    pub fn copies_on_vertex_set(&self, rset: &[VertexId]) -> Result<Vec<FCopy>> {
        if rset.len() != self.r {
            return Err(Error::BadEdge { edge: rset.to_vec(), expected: self.r });
        }
        let mut sorted = rset.to_vec();
        sorted.sort_unstable();
        Ok(self.templates()?.iter().map(|t| self.copy_from_template(t, &sorted)).collect())
    }

    /// Strict 1-balancedness over all proper subgraphs.
    pub fn strict_balance(&self) -> BalanceCheck {
        let (r, s) = (self.r as u64, self.s() as u64);
        let mut witness: Option<(Ratio<u64>, u32)> = None;
        for w in 1u32..full_mask(self.r) {
            let k = w.count_ones() as u64;
            if k < 2 {
                continue;
            }
            let e = self.masks.iter().filter(|&&m| m & w == m).count() as u64;
            // e/(k-1) >= s/(r-1)
            if e * (r - 1) >= s * (k - 1) {
                let d = Ratio::new(e, k - 1);
                if witness.as_ref().is_none_or(|(best, _)| d > *best) {
                    witness = Some((d, w));
                }
            }
        }
        match witness {
            None => BalanceCheck { strictly_balanced: true, witness: None },
            Some((_, w)) => BalanceCheck {
                strictly_balanced: false,
                witness: Some(SubPattern {
                    vertices: mask_vertices(w),
                    edges: self.edges.iter().zip(&self.masks).filter(|(_, &m)| m & w == m).map(|(e, _)| e.clone()).collect(),
                }),
            },
        }
    }

    pub fn is_strictly_1_balanced(&self) -> bool {
        self.strict_balance().strictly_balanced
    }

    /// k-connectivity: at least `k+1` vertices and no set of at most `k−1`
    /// vertices whose deletion disconnects the rest. After deletion an edge
    /// connects its surviving vertices.
    pub fn connectivity(&self, k: usize) -> ConnectivityCheck {
        assert!(k >= 1, "k must be positive");
        if self.r < k + 1 {
            return ConnectivityCheck { k_connected: false, too_few_vertices: true, cut: None };
        }
        for size in 0..k {
            let mut cut = None;
            for_each_subset(self.r, size, |s| {
                if cut.is_none() && !connected_after_removal(self.r, &self.masks, vertex_mask(s)) {
                    cut = Some(s.to_vec());
                }
            });
            if cut.is_some() {
                return ConnectivityCheck { k_connected: false, too_few_vertices: false, cut };
            }
        }
        ConnectivityCheck { k_connected: true, too_few_vertices: false, cut: None }
    }

    pub fn is_k_connected(&self, k: usize) -> bool {
        self.connectivity(k).k_connected
    }

    /// For graphs: whether no single edge swap yields an isomorphic graph.
    pub fn shift_freeness(&self) -> Result<ShiftCheck> {
        if self.u != 2 {
            return Err(Error::RequiresGraph(self.u));
        }
        let present: HashSet<u32> = self.masks.iter().copied().collect();
        let degrees = |masks: &[u32]| {
            let mut d = vec![0usize; self.r];
            for &m in masks {
                for v in mask_vertices(m) {
                    d[v as usize] += 1;
                }
            }
            d.sort_unstable();
            d
        };
        let base_degrees = degrees(&self.masks);
        for i in 0..self.r as u32 {
            for j in i + 1..self.r as u32 {
                let plus = (1 << i) | (1 << j);
                if present.contains(&plus) {
                    continue;
                }
                for (idx, &minus) in self.masks.iter().enumerate() {
                    let mut shifted = self.masks.clone();
                    shifted[idx] = plus;
                    if degrees(&shifted) != base_degrees {
                        continue;
                    }
                    let target: HashSet<u32> = shifted.iter().copied().collect();
                    if count_isomorphisms(self.r, &self.masks, &target, Some(1)) > 0 {
                        return Ok(ShiftCheck {
                            shift_free: false,
                            witness: Some((vec![i, j], mask_vertices(minus))),
                        });
                    }
                }
            }
        }
        Ok(ShiftCheck { shift_free: true, witness: None })
    }

    pub fn niceness(&self) -> NicenessReport {
        let balance = self.strict_balance();
        let conn = self.connectivity(3);
        let shift = if self.u == 2 { Some(self.shift_freeness().expect("u = 2")) } else { None };
        let nice = balance.strictly_balanced
            && conn.k_connected
            && shift.as_ref().is_none_or(|s| s.shift_free);
        NicenessReport {
            strictly_1_balanced: balance.strictly_balanced,
            balance_witness: balance.witness,
            three_connected: conn.k_connected,
            cut_witness: conn.cut,
            shift_free: shift.as_ref().map(|s| s.shift_free),
            shift_witness: shift.and_then(|s| s.witness),
            nice,
        }
    }

    pub fn is_nice(&self) -> bool {
        self.niceness().nice
    }

    /// For every proper nonempty edge subset `S`, checks
    /// `|E \ S| ≥ s − d1·(r − z) + 1/(r−1)` where `z` counts the components
    /// of `([r], S)` including singleton vertices. Returns the violating
    /// subsets.
    pub fn component_bound_violations(&self) -> Vec<Vec<Vec<u32>>> {
        let (r, s) = (self.r as i64, self.s());
        assert!(s < 64, "component bound check needs fewer than 64 edges");
        let mut out = Vec::new();
        let all: u64 = if s == 64 { u64::MAX } else { (1u64 << s) - 1 };
        for subset in 1..all {
            let mut dsu = Dsu::new(self.r);
            for (i, e) in self.edges.iter().enumerate() {
                if subset >> i & 1 == 1 {
                    for w in e.windows(2) {
                        dsu.union(w[0] as usize, w[1] as usize);
                    }
                }
            }
            let z = (0..self.r).filter(|&v| dsu.find(v) == v).count() as i64;
            let missing = (s as i64) - subset.count_ones() as i64;
            // (r−1)·missing ≥ (r−1)·s − s·(r − z) + 1, all in integers
            if (r - 1) * missing < (r - 1) * s as i64 - s as i64 * (r - z) + 1 {
                out.push(
                    self.edges.iter().enumerate().filter(|(i, _)| subset >> i & 1 == 1).map(|(_, e)| e.clone()).collect(),
                );
            }
        }
        out
    }
}

/// The exact 1-density `e/(v−1)`.
pub fn density_d1(vertices: usize, edges: usize) -> Result<Ratio<u64>> {
    if vertices <= 1 {
        return Err(Error::DensityUndefined);
    }
    Ok(Ratio::new(edges as u64, vertices as u64 - 1))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubPattern {
    pub vertices: Vec<u32>,
    pub edges: Vec<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BalanceCheck {
    pub strictly_balanced: bool,
    /// A densest subgraph that is at least as dense as the pattern.
    pub witness: Option<SubPattern>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConnectivityCheck {
    pub k_connected: bool,
    pub too_few_vertices: bool,
    pub cut: Option<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShiftCheck {
    pub shift_free: bool,
    /// `(added edge, deleted edge)` giving an isomorphic graph.
    pub witness: Option<(Vec<u32>, Vec<u32>)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NicenessReport {
    pub strictly_1_balanced: bool,
    pub balance_witness: Option<SubPattern>,
    pub three_connected: bool,
    pub cut_witness: Option<Vec<u32>>,
    /// `None` when `u ≥ 3`, where the condition does not apply.
    pub shift_free: Option<bool>,
    pub shift_witness: Option<(Vec<u32>, Vec<u32>)>,
    pub nice: bool,
}

fn full_mask(r: usize) -> u32 {
    if r >= 32 { u32::MAX } else { (1u32 << r) - 1 }
}

fn vertex_mask(vs: &[u32]) -> u32 {
    vs.iter().fold(0, |m, &v| m | 1 << v)
}

fn mask_vertices(mut m: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(m.count_ones() as usize);
    while m != 0 {
        out.push(m.trailing_zeros());
        m &= m - 1;
    }
    out
}

/// Whether the vertices outside `removed` are connected, where each edge
/// links its surviving vertices.
fn connected_after_removal(r: usize, masks: &[u32], removed: u32) -> bool {
    let alive = full_mask(r) & !removed;
    if alive.count_ones() <= 1 {
        return true;
    }
    let start = alive.trailing_zeros();
    let mut reached = 1u32 << start;
    let mut frontier = VecDeque::from([start]);
    while let Some(v) = frontier.pop_front() {
        for &m in masks {
            if m >> v & 1 == 1 {
                let new = m & alive & !reached;
                if new != 0 {
                    reached |= new;
                    frontier.extend(mask_vertices(new));
                }
            }
        }
    }
    reached == alive
}

/// Counts bijections `σ` of `0..r` with `σ(E_a) ⊆ target`, stopping at
/// `limit` if given. With `|E_a| = |target|` this counts isomorphisms.
fn count_isomorphisms(r: usize, a: &[u32], target: &HashSet<u32>, limit: Option<u64>) -> u64 {
    let deg = |masks: &mut dyn Iterator<Item = u32>| {
        let mut d = vec![0usize; r];
        for m in masks {
            for v in mask_vertices(m) {
                d[v as usize] += 1;
            }
        }
        d
    };
    let deg_a = deg(&mut a.iter().copied());
    let deg_b = deg(&mut target.iter().copied());
    // place high-degree, well-connected vertices first
    let mut order: Vec<u32> = Vec::with_capacity(r);
    let mut placed = 0u32;
    while order.len() < r {
        let next = (0..r as u32)
            .filter(|&v| placed >> v & 1 == 0)
            .max_by_key(|&v| {
                let links = a.iter().filter(|&&m| m >> v & 1 == 1 && m & placed != 0).count();
                (links, deg_a[v as usize], std::cmp::Reverse(v))
            })
            .expect("unplaced vertex");
        order.push(next);
        placed |= 1 << next;
    }
    let mut checks: Vec<Vec<u32>> = vec![Vec::new(); r];
    let mut prefix = 0u32;
    for (pos, &v) in order.iter().enumerate() {
        prefix |= 1 << v;
        checks[pos] = a.iter().copied().filter(|&m| m >> v & 1 == 1 && m & prefix == m).collect();
    }
    struct Search<'a> {
        order: &'a [u32],
        checks: &'a [Vec<u32>],
        deg_a: &'a [usize],
        deg_b: &'a [usize],
        target: &'a HashSet<u32>,
        sigma: Vec<u32>,
        limit: u64,
        found: u64,
    }
    impl Search<'_> {
        fn go(&mut self, pos: usize, used: u32) {
            if self.found >= self.limit {
                return;
            }
            if pos == self.order.len() {
                self.found += 1;
                return;
            }
            let x = self.order[pos] as usize;
            for c in 0..self.order.len() {
                if used >> c & 1 == 1 || self.deg_b[c] != self.deg_a[x] {
                    continue;
                }
                self.sigma[x] = c as u32;
                let ok = self.checks[pos].iter().all(|&m| {
                    let img = mask_vertices(m).iter().fold(0u32, |acc, &v| acc | 1 << self.sigma[v as usize]);
                    self.target.contains(&img)
                });
                if ok {
                    self.go(pos + 1, used | 1 << c);
                }
            }
        }
    }
    let mut search = Search {
        order: &order,
        checks: &checks,
        deg_a: &deg_a,
        deg_b: &deg_b,
        target,
        sigma: vec![0; r],
        limit: limit.unwrap_or(u64::MAX),
        found: 0,
    };
    search.go(0, 0);
    search.found
}

/// Orbit of the edge set under `S_r`, generated by adjacent transpositions.
fn orbit_templates(r: usize, masks: &[u32]) -> Vec<Vec<Vec<u32>>> {
    let canon = |ms: &mut Vec<u32>| ms.sort_unstable();
    let mut start = masks.to_vec();
    canon(&mut start);
    let mut seen: HashSet<Vec<u32>> = HashSet::from([start.clone()]);
    let mut order = vec![start.clone()];
    let mut queue = VecDeque::from([start]);
    while let Some(cur) = queue.pop_front() {
        for i in 0..r.saturating_sub(1) {
            let mut next: Vec<u32> = cur
                .iter()
                .map(|&m| {
                    let (bi, bj) = (m >> i & 1, m >> (i + 1) & 1);
                    (m & !(0b11 << i)) | bi << (i + 1) | bj << i
                })
                .collect();
            canon(&mut next);
            if seen.insert(next.clone()) {
                order.push(next.clone());
                queue.push_back(next);
            }
        }
    }
    order.sort();
    order
        .into_iter()
        .map(|ms| {
            let mut edges: Vec<Vec<u32>> = ms.into_iter().map(mask_vertices).collect();
            edges.sort();
            edges
        })
        .collect()
}

/// Colex index of copies of `F` in the complete u-graph on `[n]`: copy id
/// `rset_rank · T + template`.
#[derive(Clone, Debug)]
pub struct CopyIndexer {
    rsets: SubsetIndexer,
    edges: SubsetIndexer,
    per_set: usize,
}

impl CopyIndexer {
    pub fn new(pattern: &Pattern, n: usize) -> Result<Self> {
        if n < pattern.r() {
            return Err(Error::InvalidParameters(format!("n = {n} < r = {}", pattern.r())));
        }
        let per_set = pattern.templates()?.len();
        let rsets = SubsetIndexer::new(n, pattern.r())?;
        rsets.count().checked_mul(per_set as u64).ok_or(Error::Overflow("copy count"))?;
        Ok(Self { rsets, edges: SubsetIndexer::new(n, pattern.u())?, per_set })
    }

    /// `M`, the number of copies on `[n]`.
    pub fn count(&self) -> u64 {
        self.rsets.count() * self.per_set as u64
    }

    pub fn rsets(&self) -> &SubsetIndexer {
        &self.rsets
    }

    pub fn edge_indexer(&self) -> &SubsetIndexer {
        &self.edges
    }

    pub fn per_set(&self) -> usize {
        self.per_set
    }

    /// Vertex set and template of a copy id.
    pub fn split(&self, id: u64) -> (Vec<u32>, usize) {
        let per = self.per_set as u64;
        (self.rsets.unrank_vec(id / per), (id % per) as usize)
    }

    pub fn id_of(&self, rset_rank: u64, template: usize) -> u64 {
        rset_rank * self.per_set as u64 + template as u64
    }

    /// Edge ids (colex ranks of u-edges) of a copy, sorted.
    pub fn edge_ids(&self, pattern: &Pattern, id: u64, out: &mut Vec<u64>) {
        let (rset, t) = self.split(id);
        let template = &pattern.templates().expect("indexer built")[t];
        out.clear();
        let mut buf = [0u32; 16];
        for e in template {
            for (k, &i) in e.iter().enumerate() {
                buf[k] = rset[i as usize];
            }
            out.push(self.edges.rank_unsorted(&buf[..e.len()]));
        }
        out.sort_unstable();
    }

    pub fn copy(&self, pattern: &Pattern, id: u64) -> FCopy {
        let (rset, t) = self.split(id);
        pattern.copy_from_template(&pattern.templates().expect("indexer built")[t], &rset)
    }

    /// Id of a copy given as an [`FCopy`].
    pub fn id_of_copy(&self, pattern: &Pattern, copy: &FCopy) -> Option<u64> {
        let rset = copy.vertex_set();
        if rset.len() != pattern.r() {
            return None;
        }
        let local: Vec<Vec<u32>> = {
            let mut es: Vec<Vec<u32>> = copy
                .edges()
                .iter()
                .map(|e| e.vertices().iter().map(|v| rset.binary_search(v).expect("in set") as u32).collect())
                .collect();
            es.sort();
            es
        };
        let t = pattern.templates().ok()?.binary_search(&local).ok()?;
        Some(self.id_of(self.rsets.rank(rset), t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::for_each_permutation;

    fn brute_aut(p: &Pattern) -> u64 {
        let set: HashSet<Vec<u32>> = p.edges().iter().cloned().collect();
        let mut count = 0;
        for_each_permutation(p.r(), |perm| {
            let ok = p.edges().iter().all(|e| {
                let mut img: Vec<u32> = e.iter().map(|&v| perm[v as usize]).collect();
                img.sort_unstable();
                set.contains(&img)
            });
            if ok {
                count += 1;
            }
        });
        count
    }

    fn brute_strictly_balanced(p: &Pattern) -> bool {
        let s = p.s();
        let d = p.d1();
        (1u64..(1 << s) - 1).all(|sub| {
            let es: Vec<&Vec<u32>> = p.edges().iter().enumerate().filter(|(i, _)| sub >> i & 1 == 1).map(|(_, e)| e).collect();
            let span: HashSet<u32> = es.iter().flat_map(|e| e.iter().copied()).collect();
            density_d1(span.len(), es.len()).unwrap() < d
        })
    }

    #[test]
    fn automorphism_counts() {
        assert_eq!(Pattern::complete_graph(4).unwrap().aut(), 24);
        assert_eq!(Pattern::cycle(4).unwrap().aut(), 8);
        assert_eq!(Pattern::complete_bipartite(3, 3).unwrap().aut(), 72);
        for p in [Pattern::path(3).unwrap(), Pattern::complete_uniform(3, 5).unwrap(), Pattern::star(4).unwrap()] {
            assert_eq!(p.aut(), brute_aut(&p));
        }
    }

    #[test]
    fn densities() {
        assert_eq!(Pattern::complete_graph(4).unwrap().d1(), Ratio::new(2, 1));
        assert_eq!(density_d1(3, 1).unwrap(), Ratio::new(1, 2));
        assert_eq!(Pattern::complete_bipartite(3, 3).unwrap().d1(), Ratio::new(9, 5));
        assert_eq!(density_d1(1, 0), Err(Error::DensityUndefined));
    }

    #[test]
    fn strict_balance_examples() {
        assert!(Pattern::complete_graph(4).unwrap().is_strictly_1_balanced());
        assert!(Pattern::cycle(4).unwrap().is_strictly_1_balanced());
        let p3 = Pattern::path(3).unwrap().strict_balance();
        assert!(!p3.strictly_balanced);
        assert!(p3.witness.is_some());
        for p in [
            Pattern::complete_graph(5).unwrap(),
            Pattern::complete_bipartite(3, 3).unwrap(),
            Pattern::path(4).unwrap(),
            Pattern::star(3).unwrap(),
            Pattern::complete_uniform(3, 5).unwrap(),
        ] {
            assert_eq!(p.is_strictly_1_balanced(), brute_strictly_balanced(&p), "{p:?}");
        }
    }

    #[test]
    fn connectivity_examples() {
        assert!(Pattern::complete_graph(4).unwrap().is_k_connected(3));
        let k3 = Pattern::complete_graph(3).unwrap().connectivity(3);
        assert!(!k3.k_connected && k3.too_few_vertices);
        let c4 = Pattern::cycle(4).unwrap().connectivity(3);
        assert!(!c4.k_connected);
        let cut = c4.cut.unwrap();
        assert_eq!(cut.len(), 2);
        assert_eq!((cut[0] + cut[1]) % 2, 0, "opposite vertices");
        assert!(Pattern::cycle(5).unwrap().is_k_connected(2));
        assert!(Pattern::complete_uniform(3, 4).unwrap().is_k_connected(3));
    }

    #[test]
    fn shift_freeness_examples() {
        assert!(Pattern::complete_graph(4).unwrap().shift_freeness().unwrap().shift_free);
        assert!(Pattern::complete_bipartite(3, 3).unwrap().shift_freeness().unwrap().shift_free);
        let p2 = Pattern::path(2).unwrap().shift_freeness().unwrap();
        assert!(!p2.shift_free);
        assert!(Pattern::complete_uniform(3, 4).unwrap().shift_freeness().is_err());
    }

    #[test]
    fn niceness_examples() {
        assert!(Pattern::complete_graph(4).unwrap().is_nice());
        assert!(Pattern::complete_bipartite(3, 3).unwrap().is_nice());
        let k3 = Pattern::complete_graph(3).unwrap().niceness();
        assert!(!k3.nice && !k3.three_connected && k3.strictly_1_balanced);
        let k43 = Pattern::complete_uniform(3, 4).unwrap().niceness();
        assert!(k43.nice);
        assert_eq!(k43.shift_free, None);
    }

    #[test]
    fn templates_count_r_factorial_over_aut() {
        for (p, expected) in [
            (Pattern::complete_graph(4).unwrap(), 1),
            (Pattern::cycle(4).unwrap(), 3),
            (Pattern::complete_bipartite(3, 3).unwrap(), 10),
            (Pattern::path(3).unwrap(), 12),
        ] {
            assert_eq!(p.templates().unwrap().len(), expected);
            assert_eq!(p.copies_on_vertex_set(&[9, 2, 5, 7, 11, 13][..p.r()]).unwrap().len(), expected);
            assert_eq!(p.aut() * expected as u64, crate::combinatorics::factorial(p.r() as u64).unwrap() as u64);
        }
    }

    #[test]
    fn invalid_patterns_are_rejected() {
        assert!(Pattern::new(2, 4, vec![vec![0, 1], vec![2, 3]]).is_err());
        assert!(Pattern::new(2, 3, vec![vec![0, 1], vec![0, 1]]).is_err());
        assert!(Pattern::new(2, 3, vec![vec![0, 1, 2]]).is_err());
        assert!(Pattern::new(2, 4, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(matches!(
            Pattern::complete_graph(13),
            Err(Error::PatternTooLarge { r: 13, .. })
        ));
    }

    #[test]
    fn component_bound_examples() {
        assert!(Pattern::complete_graph(4).unwrap().component_bound_violations().is_empty());
        assert!(Pattern::complete_bipartite(3, 3).unwrap().component_bound_violations().is_empty());
        assert!(!Pattern::path(3).unwrap().component_bound_violations().is_empty());
    }

    #[test]
    fn copy_indexer_roundtrip() {
        let p = Pattern::cycle(4).unwrap();
        let ix = CopyIndexer::new(&p, 7).unwrap();
        assert_eq!(ix.count(), 35 * 3);
        for id in [0, 17, 104] {
            let c = ix.copy(&p, id);
            assert_eq!(ix.id_of_copy(&p, &c), Some(id));
            let mut ids = Vec::new();
            ix.edge_ids(&p, id, &mut ids);
            assert_eq!(ids.len(), 4);
        }
    }
}
