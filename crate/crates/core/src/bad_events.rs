//! Detectors for the bad events B1–B5 and the searches behind them.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypergraph::{sorted_intersection_len, Dsu, FCopy, FGraph, RMultiHypergraph, VertexId};

pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

/// `2^{r+1}`, the edge cap in the definition of avoidable configurations.
pub fn default_cap(r: usize) -> usize {
    1usize << (r + 1).min(usize::BITS as usize - 1)
}

/// A connected sub-multi-hypergraph with nullity above 1.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct AvoidableConfig {
    /// Sorted multiset of r-sets.
    pub edges: Vec<Vec<VertexId>>,
    pub nullity: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct B1Outcome {
    pub flag: bool,
    pub max_degree: usize,
    pub vertex: Option<VertexId>,
    pub threshold: f64,
}

/// B1: some vertex has degree above `Mπ + max(Mπ, 3 ln n)`.
pub fn check_b1(h: &FGraph, m: u128, pi: f64) -> B1Outcome {
    let mpi = m as f64 * pi;
    let threshold = mpi + mpi.max(3.0 * (h.n() as f64).ln());
    let degrees = h.degrees();
    let (vertex, max_degree) = degrees
        .iter()
        .enumerate()
        .max_by_key(|&(v, &d)| (d, std::cmp::Reverse(v)))
        .map(|(v, &d)| (Some(v as VertexId), d))
        .unwrap_or((None, 0));
    B1Outcome { flag: max_degree as f64 > threshold, max_degree, vertex, threshold }
}

struct Incidence<'a> {
    r: usize,
    edges: Vec<&'a [VertexId]>,
    nbrs: Vec<Vec<usize>>,
}

impl<'a> Incidence<'a> {
    fn new(ht: &'a RMultiHypergraph) -> Self {
        let edges: Vec<&[VertexId]> = ht.edges_with_repeats().collect();
        let mut by_vertex: Vec<Vec<usize>> = vec![Vec::new(); ht.n()];
        for (i, e) in edges.iter().enumerate() {
            for &v in e.iter() {
                by_vertex[v as usize].push(i);
            }
        }
        let nbrs = edges
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let mut ns: Vec<usize> = e.iter().flat_map(|&v| by_vertex[v as usize].iter().copied()).filter(|&j| j != i).collect();
                ns.sort_unstable();
                ns.dedup();
                ns
            })
            .collect();
        Self { r: ht.r(), edges, nbrs }
    }
}

fn subset_nullity(r: usize, edges: &[&[VertexId]]) -> i64 {
    crate::hypergraph::nullity(r, edges.iter().copied())
}

/// True if no proper connected sub-configuration has nullity above 1.
fn is_minimal(r: usize, edges: &[&[VertexId]]) -> bool {
    for skip in 0..edges.len() {
        let rest: Vec<&[VertexId]> = edges.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, e)| *e).collect();
        let mut dsu = Dsu::new(rest.len());
        for i in 0..rest.len() {
            for j in i + 1..rest.len() {
                if sorted_intersection_len(rest[i], rest[j]) > 0 {
                    dsu.union(i, j);
                }
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<&[VertexId]>> = Default::default();
        for (i, e) in rest.iter().enumerate() {
            groups.entry(dsu.find(i)).or_default().push(e);
        }
        if groups.values().any(|g| subset_nullity(r, g) > 1) {
            return false;
        }
    }
    true
}

struct Esu<'a, 'b> {
    inc: &'b Incidence<'a>,
    cap: usize,
    budget: u64,
    nodes: u64,
    members: Vec<usize>,
    // number of members equal or adjacent to each edge
    closed: Vec<u32>,
    vcount: Vec<u32>,
    distinct_vertices: i64,
    stop_at_first: bool,
    // some branch was cut by the size cap
    truncated: bool,
    found: BTreeSet<AvoidableConfig>,
}

impl Esu<'_, '_> {
    fn nullity(&self) -> i64 {
        (self.inc.r as i64 - 1) * self.members.len() as i64 + 1 - self.distinct_vertices
    }

    fn push(&mut self, w: usize) {
        self.members.push(w);
        self.closed[w] += 1;
        for &x in &self.inc.nbrs[w] {
            self.closed[x] += 1;
        }
        for &v in self.inc.edges[w] {
            if self.vcount[v as usize] == 0 {
                self.distinct_vertices += 1;
            }
            self.vcount[v as usize] += 1;
        }
    }

    fn pop(&mut self) {
        let w = self.members.pop().expect("nonempty");
        self.closed[w] -= 1;
        for &x in &self.inc.nbrs[w] {
            self.closed[x] -= 1;
        }
        for &v in self.inc.edges[w] {
            self.vcount[v as usize] -= 1;
            if self.vcount[v as usize] == 0 {
                self.distinct_vertices -= 1;
            }
        }
    }

    /// Returns true to stop the whole search.
    fn extend(&mut self, anchor: usize, mut ext: Vec<usize>) -> Result<bool> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded { what: "avoidable-configuration search", budget: self.budget });
        }
        let nul = self.nullity();
        if nul > 1 {
            let es: Vec<&[VertexId]> = self.members.iter().map(|&i| self.inc.edges[i]).collect();
            if is_minimal(self.inc.r, &es) {
                let mut edges: Vec<Vec<VertexId>> = es.iter().map(|e| e.to_vec()).collect();
                edges.sort();
                self.found.insert(AvoidableConfig { edges, nullity: nul });
                return Ok(self.stop_at_first);
            }
            return Ok(false);
        }
        let room = self.cap - self.members.len();
        if room == 0 || nul + (self.inc.r as i64 - 1) * room as i64 <= 1 {
            self.truncated = true;
            return Ok(false);
        }
        while let Some(w) = ext.pop() {
            let mut next = ext.clone();
            next.extend(self.inc.nbrs[w].iter().copied().filter(|&x| x > anchor && self.closed[x] == 0));
            self.push(w);
            let stop = self.extend(anchor, next);
            self.pop();
            if stop? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn run(&mut self) -> Result<()> {
        for anchor in 0..self.inc.edges.len() {
            self.push(anchor);
            let ext: Vec<usize> = self.inc.nbrs[anchor].iter().copied().filter(|&x| x > anchor).collect();
            let stop = self.extend(anchor, ext);
            self.pop();
            if stop? {
                break;
            }
        }
        Ok(())
    }
}

fn make_esu<'a, 'b>(inc: &'b Incidence<'a>, n: usize, cap: usize, budget: u64, stop: bool) -> Esu<'a, 'b> {
    Esu {
        inc,
        cap,
        budget,
        nodes: 0,
        members: Vec::new(),
        closed: vec![0; inc.edges.len()],
        vcount: vec![0; n],
        distinct_vertices: 0,
        stop_at_first: stop,
        truncated: false,
        found: BTreeSet::new(),
    }
}

/// All minimal avoidable configurations with at most `cap_edges` edges,
/// deduplicated as multisets of r-sets.
pub fn find_avoidable_configurations(ht: &RMultiHypergraph, cap_edges: usize, node_budget: u64) -> Result<Vec<AvoidableConfig>> {
    check_cap(ht, cap_edges)?;
    let inc = Incidence::new(ht);
    let mut esu = make_esu(&inc, ht.n(), cap_edges, node_budget, false);
    esu.run()?;
    Ok(esu.found.into_iter().collect())
}

/// A smallest avoidable configuration with at most `cap_edges` edges, or
/// `None` if there is none. Searches by increasing size.
pub fn find_avoidable_configuration(ht: &RMultiHypergraph, cap_edges: usize, node_budget: u64) -> Result<Option<AvoidableConfig>> {
    check_cap(ht, cap_edges)?;
    let inc = Incidence::new(ht);
    let mut spent = 0;
    for size in 2..=cap_edges.min(inc.edges.len()) {
        let mut esu = make_esu(&inc, ht.n(), size, node_budget - spent, true);
        esu.run()?;
        spent += esu.nodes;
        if let Some(c) = esu.found.into_iter().next() {
            return Ok(Some(c));
        }
        if !esu.truncated {
            break;
        }
    }
    Ok(None)
}

fn check_cap(ht: &RMultiHypergraph, cap: usize) -> Result<()> {
    if cap > default_cap(ht.r()) {
        return Err(Error::InvalidParameters(format!("cap {cap} exceeds 2^(r+1) = {}", default_cap(ht.r()))));
    }
    Ok(())
}

/// Vertices of degree at most `7g`.
pub fn low_degree_vertices(h: &FGraph, g: f64) -> Vec<VertexId> {
    h.degrees().iter().enumerate().filter(|&(_, &d)| d as f64 <= 7.0 * g).map(|(v, _)| v as VertexId).collect()
}

/// `(ln n)^{8g}`.
pub fn b3_threshold(n: usize, g: f64) -> f64 {
    (n as f64).ln().powf(8.0 * g)
}

pub fn check_b3(h: &FGraph, g: f64) -> bool {
    low_degree_vertices(h, g).len() as f64 > b3_threshold(h.n(), g)
}

/// Unordered pairs of copies whose vertex sets meet in exactly `u`
/// vertices, as index pairs into the iteration order of `h`.
pub fn partner_pairs(h: &FGraph) -> Vec<(FCopy, FCopy)> {
    let copies: Vec<&FCopy> = h.copies().collect();
    let mut out = Vec::new();
    for (i, a) in copies.iter().enumerate() {
        for b in &copies[i + 1..] {
            if a.overlap(b) == h.u() {
                out.push(((*a).clone(), (*b).clone()));
            }
        }
    }
    out
}

pub fn partner_pair_count(h: &FGraph) -> usize {
    let copies: Vec<&FCopy> = h.copies().collect();
    let mut count = 0;
    for (i, a) in copies.iter().enumerate() {
        count += copies[i + 1..].iter().filter(|b| a.overlap(b) == h.u()).count();
    }
    count
}

pub fn check_b4(h: &FGraph) -> bool {
    partner_pair_count(h) as f64 > (h.n() as f64).ln().powi(3)
}

pub fn check_b5(h: &FGraph) -> bool {
    !h.isolated_vertices().is_empty()
}

/// Three-valued outcome of the B2 search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum B2Outcome {
    Present { witness: AvoidableConfig },
    Absent,
    Inconclusive { budget: u64 },
}

impl B2Outcome {
    pub fn flag(&self) -> Option<bool> {
        match self {
            B2Outcome::Present { .. } => Some(true),
            B2Outcome::Absent => Some(false),
            B2Outcome::Inconclusive { .. } => None,
        }
    }
}

/// B2 on the unlabeled view of `h`.
pub fn check_b2(h: &FGraph, node_budget: u64) -> Result<B2Outcome> {
    let ht = h.forget_labels();
    match find_avoidable_configuration(&ht, default_cap(h.r()), node_budget) {
        Ok(Some(witness)) => Ok(B2Outcome::Present { witness }),
        Ok(None) => Ok(B2Outcome::Absent),
        Err(Error::BudgetExceeded { budget, .. }) => Ok(B2Outcome::Inconclusive { budget }),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BadEventReport {
    pub pi: f64,
    pub b1: B1Outcome,
    pub b2: B2Outcome,
    pub b3: bool,
    pub low_degree_count: usize,
    pub b4: bool,
    pub partner_pairs: usize,
    pub b5: bool,
    pub isolated: Vec<VertexId>,
}

impl BadEventReport {
    /// Whether any bad event holds; `None` if only an inconclusive B2
    /// search stands between the answer and `false`.
    pub fn any(&self) -> Option<bool> {
        if self.b1.flag || self.b3 || self.b4 || self.b5 {
            return Some(true);
        }
        self.b2.flag()
    }
}

/// Evaluates all five detectors with `π` used for B1.
pub fn bad_event_report(h: &FGraph, m: u128, pi: f64, g: f64, node_budget: u64) -> Result<BadEventReport> {
    let low = low_degree_vertices(h, g);
    let pairs = partner_pair_count(h);
    let isolated = h.isolated_vertices();
    Ok(BadEventReport {
        pi,
        b1: check_b1(h, m, pi),
        b2: check_b2(h, node_budget)?,
        b3: low.len() as f64 > b3_threshold(h.n(), g),
        low_degree_count: low.len(),
        b4: pairs as f64 > (h.n() as f64).ln().powi(3),
        partner_pairs: pairs,
        b5: !isolated.is_empty(),
        isolated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::{components, nullity, UEdge};
    use proptest::prelude::*;

    fn multi(n: usize, r: usize, edges: &[&[u32]]) -> RMultiHypergraph {
        RMultiHypergraph::from_edges(n, r, edges.iter().map(|e| e.to_vec())).unwrap()
    }

    /// Every connected, minimal edge subset with nullity above 1.
    fn oracle(ht: &RMultiHypergraph, cap: usize) -> Vec<AvoidableConfig> {
        let edges: Vec<&[u32]> = ht.edges_with_repeats().collect();
        let m = edges.len();
        let avoidable = |mask: u32| {
            let es: Vec<&[u32]> = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| edges[i]).collect();
            let comps = components(es.iter().copied(), ht.n()).components.len();
            es.len() <= cap && comps == 1 && nullity(ht.r(), es.iter().copied()) > 1
        };
        let mut out = BTreeSet::new();
        for mask in 1u32..(1 << m) {
            if !avoidable(mask) {
                continue;
            }
            let mut sub = (mask - 1) & mask;
            let mut minimal = true;
            while sub > 0 {
                if avoidable(sub) {
                    minimal = false;
                    break;
                }
                sub = (sub - 1) & mask;
            }
            if minimal {
                let mut es: Vec<Vec<u32>> = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| edges[i].to_vec()).collect();
                es.sort();
                let nul = nullity(ht.r(), es.iter().map(|e| e.as_slice()));
                out.insert(AvoidableConfig { edges: es, nullity: nul });
            }
        }
        out.into_iter().collect()
    }

    #[test]
    fn doubled_edge_is_avoidable() {
        let ht = multi(6, 4, &[&[0, 1, 2, 3], &[0, 1, 2, 3]]);
        let found = find_avoidable_configurations(&ht, default_cap(4), DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].nullity, 3);
    }

    #[test]
    fn three_shared_vertices() {
        let ht = multi(6, 4, &[&[0, 1, 2, 3], &[1, 2, 3, 4]]);
        let c = find_avoidable_configuration(&ht, default_cap(4), DEFAULT_NODE_BUDGET).unwrap().unwrap();
        assert_eq!(c.nullity, 2);
    }

    #[test]
    fn loose_path_has_none() {
        let ht = multi(20, 3, &[&[0, 1, 2], &[2, 3, 4], &[4, 5, 6], &[6, 7, 8], &[8, 9, 10]]);
        assert!(find_avoidable_configurations(&ht, default_cap(3), DEFAULT_NODE_BUDGET).unwrap().is_empty());
        assert!(find_avoidable_configuration(&ht, default_cap(3), DEFAULT_NODE_BUDGET).unwrap().is_none());
        assert_eq!(oracle(&ht, 16), vec![]);
    }

    #[test]
    fn budget_is_reported() {
        let edges: Vec<Vec<u32>> = (0..8u32).map(|i| vec![i, i + 1]).collect();
        let ht = RMultiHypergraph::from_edges(10, 2, edges).unwrap();
        assert!(matches!(
            find_avoidable_configurations(&ht, 8, 3),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    fn fgraph(n: usize, copies: &[&[[u32; 2]]]) -> FGraph {
        let mut h = FGraph::new(n, 4, 2);
        for c in copies {
            h.insert(FCopy::new(c.iter().map(|&e| UEdge::from(e)).collect())).unwrap();
        }
        h
    }

    #[test]
    fn b1_threshold() {
        let h = FGraph::new(20, 4, 2);
        let out = check_b1(&h, 100, 0.04);
        assert!(!out.flag);
        assert!((out.threshold - (4.0 + 3.0 * 20f64.ln())).abs() < 1e-12);
        assert!(out.threshold > 9.0 && out.threshold < 14.0);
    }

    #[test]
    fn partners_and_isolated() {
        let a: &[[u32; 2]] = &[[0, 1], [1, 2], [2, 3], [0, 3]];
        let b: &[[u32; 2]] = &[[0, 4], [4, 1], [1, 5], [0, 5]];
        let c: &[[u32; 2]] = &[[6, 7], [7, 8], [8, 9], [6, 9]];
        let h = fgraph(10, &[a, b]);
        assert_eq!(partner_pairs(&h).len(), 1);
        assert!(check_b5(&h));
        let disjoint = fgraph(10, &[a, c]);
        assert!(partner_pairs(&disjoint).is_empty());
        assert!(check_b5(&FGraph::new(5, 4, 2)));
    }

    #[test]
    fn b3_is_vacuous_at_small_n() {
        let h = FGraph::new(50, 4, 2);
        assert_eq!(low_degree_vertices(&h, 1.0).len(), 50);
        assert!(!check_b3(&h, 1.0));
        assert!(b3_threshold(50, 1.0) > 5e4);
    }

    #[test]
    fn same_vertex_set_sets_b2() {
        let a: &[[u32; 2]] = &[[0, 1], [1, 2], [2, 3], [0, 3]];
        let b: &[[u32; 2]] = &[[0, 2], [1, 2], [1, 3], [0, 3]];
        let h = fgraph(6, &[a, b]);
        assert_eq!(check_b2(&h, DEFAULT_NODE_BUDGET).unwrap().flag(), Some(true));
    }

    fn arb_multi() -> impl Strategy<Value = RMultiHypergraph> {
        (2usize..=4, 1usize..=8).prop_flat_map(|(r, m)| {
            let n = r + 4;
            proptest::collection::vec(proptest::sample::subsequence((0..n as u32).collect::<Vec<_>>(), r), m)
                .prop_map(move |es| RMultiHypergraph::from_edges(n, r, es).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn finder_matches_subset_enumeration(ht in arb_multi(), cap in 2usize..=8) {
            let cap = cap.min(default_cap(ht.r()));
            let expected = oracle(&ht, cap);
            prop_assert_eq!(find_avoidable_configurations(&ht, cap, DEFAULT_NODE_BUDGET).unwrap(), expected.clone());
            let first = find_avoidable_configuration(&ht, cap, DEFAULT_NODE_BUDGET).unwrap();
            prop_assert_eq!(first.is_some(), !expected.is_empty());
            if let Some(c) = first {
                prop_assert!(expected.iter().all(|e| e.edges.len() >= c.edges.len()));
            }
        }
    }
}
