//! Exact-cover search for F-factors and perfect matchings.
//!
//! Both questions reduce to covering `[n]` by pairwise disjoint blocks of
//! size `r`. The search branches on the uncovered vertex with the fewest
//! live blocks, and a node budget turns hopeless searches into an
//! inconclusive answer instead of a wrong "no".

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::Result;
use crate::hypergraph::{FCopy, UGraph, VertexId};
use crate::pattern::{enumerate_copies, Pattern};

pub const DEFAULT_FACTOR_BUDGET: u64 = 10_000_000;

/// Tri-state search result.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Search<T> {
    Found(T),
    NotFound,
    Inconclusive { budget: u64 },
}

impl<T> Search<T> {
    pub fn is_found(&self) -> bool {
        matches!(self, Search::Found(_))
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Search<U> {
        match self {
            Search::Found(x) => Search::Found(f(x)),
            Search::NotFound => Search::NotFound,
            Search::Inconclusive { budget } => Search::Inconclusive { budget },
        }
    }

    /// `Some(true)` if found, `Some(false)` if none exists, `None` if the
    /// budget ran out.
    pub fn flag(&self) -> Option<bool> {
        match self {
            Search::Found(_) => Some(true),
            Search::NotFound => Some(false),
            Search::Inconclusive { .. } => None,
        }
    }
}

struct Cover<'a> {
    blocks: &'a [Vec<VertexId>],
    by_vertex: Vec<Vec<usize>>,
    alive: Vec<bool>,
    live: Vec<usize>,
    covered: Vec<bool>,
    uncovered: usize,
    chosen: Vec<usize>,
    killed: Vec<usize>,
    left: u64,
}

impl Cover<'_> {
    fn kill(&mut self, b: usize) {
        self.alive[b] = false;
        for &v in &self.blocks[b] {
            self.live[v as usize] -= 1;
        }
        self.killed.push(b);
    }

    fn search(&mut self) -> Option<bool> {
        if self.uncovered == 0 {
            return Some(true);
        }
        if self.left == 0 {
            return None;
        }
        self.left -= 1;
        let v = (0..self.covered.len()).filter(|&v| !self.covered[v]).min_by_key(|&v| self.live[v])?;
        if self.live[v] == 0 {
            return Some(false);
        }
        let options: Vec<usize> = self.by_vertex[v].iter().copied().filter(|&b| self.alive[b]).collect();
        for b in options {
            let mark = self.killed.len();
            for &w in &self.blocks[b] {
                self.covered[w as usize] = true;
            }
            self.uncovered -= self.blocks[b].len();
            for &w in &self.blocks[b] {
                for i in 0..self.by_vertex[w as usize].len() {
                    let c = self.by_vertex[w as usize][i];
                    if self.alive[c] {
                        self.kill(c);
                    }
                }
            }
            self.chosen.push(b);
            match self.search() {
                Some(false) => {}
                done => return done,
            }
            self.chosen.pop();
            while self.killed.len() > mark {
                let c = self.killed.pop().expect("above mark");
                self.alive[c] = true;
                for &w in &self.blocks[c] {
                    self.live[w as usize] += 1;
                }
            }
            for &w in &self.blocks[b] {
                self.covered[w as usize] = false;
            }
            self.uncovered += self.blocks[b].len();
        }
        Some(false)
    }
}

/// Indices of pairwise disjoint blocks covering `[n]`.
///
/// Blocks must hold distinct vertices below `n`.
pub fn exact_cover(n: usize, blocks: &[Vec<VertexId>], budget: u64) -> Search<Vec<usize>> {
    let mut by_vertex = vec![Vec::new(); n];
    let mut live = vec![0; n];
    for (b, blk) in blocks.iter().enumerate() {
        for &v in blk {
            by_vertex[v as usize].push(b);
            live[v as usize] += 1;
        }
    }
    let mut cover = Cover {
        blocks,
        by_vertex,
        alive: vec![true; blocks.len()],
        live,
        covered: vec![false; n],
        uncovered: n,
        chosen: Vec::new(),
        killed: Vec::new(),
        left: budget,
    };
    match cover.search() {
        Some(true) => {
            cover.chosen.sort_unstable();
            Search::Found(cover.chosen)
        }
        Some(false) => Search::NotFound,
        None => Search::Inconclusive { budget },
    }
}

/// Vertex-disjoint copies of `F` in `g` covering every vertex.
pub fn find_f_factor(g: &UGraph, pattern: &Pattern, budget: u64) -> Result<Search<Vec<FCopy>>> {
    if !g.n().is_multiple_of(pattern.r()) {
        return Ok(Search::NotFound);
    }
    // one representative copy per vertex set
    let mut by_set: BTreeMap<Vec<VertexId>, FCopy> = BTreeMap::new();
    for c in enumerate_copies(pattern, g)? {
        by_set.entry(c.vertex_set().to_vec()).or_insert(c);
    }
    let (sets, copies): (Vec<Vec<VertexId>>, Vec<FCopy>) = by_set.into_iter().unzip();
    Ok(exact_cover(g.n(), &sets, budget).map(|idx| idx.into_iter().map(|i| copies[i].clone()).collect()))
}

/// A perfect matching among `edges`, each an `r`-set of `[n]`.
pub fn find_perfect_matching(n: usize, r: usize, edges: &[Vec<VertexId>], budget: u64) -> Search<Vec<Vec<VertexId>>> {
    if r == 0 || !n.is_multiple_of(r) {
        return Search::NotFound;
    }
    let mut blocks: Vec<Vec<VertexId>> = edges
        .iter()
        .map(|e| {
            let mut e = e.clone();
            e.sort_unstable();
            e
        })
        .collect();
    blocks.sort();
    blocks.dedup();
    exact_cover(n, &blocks, budget).map(|idx| idx.into_iter().map(|i| blocks[i].clone()).collect())
}

/// Whether `blocks` partition `[n]`.
pub fn is_partition(n: usize, blocks: &[&[VertexId]]) -> bool {
    let mut hit = vec![false; n];
    for b in blocks {
        for &v in *b {
            if v as usize >= n || std::mem::replace(&mut hit[v as usize], true) {
                return false;
            }
        }
    }
    hit.into_iter().all(|h| h)
}

/// Checks a claimed F-factor of `g`.
pub fn verify_factor(g: &UGraph, pattern: &Pattern, factor: &[FCopy]) -> bool {
    let genuine = factor.iter().all(|c| {
        c.is_in(g)
            && c.vertex_set().len() == pattern.r()
            && pattern.copies_on_vertex_set(c.vertex_set()).is_ok_and(|cs| cs.contains(c))
    });
    let sets: Vec<&[VertexId]> = factor.iter().map(|c| c.vertex_set()).collect();
    genuine && is_partition(g.n(), &sets)
}

/// Checks a claimed perfect matching drawn from `edges`.
pub fn verify_matching(n: usize, edges: &[Vec<VertexId>], matching: &[Vec<VertexId>]) -> bool {
    let mut sorted: Vec<Vec<VertexId>> = edges
        .iter()
        .map(|e| {
            let mut e = e.clone();
            e.sort_unstable();
            e
        })
        .collect();
    sorted.sort();
    let genuine = matching.iter().all(|m| {
        let mut m = m.clone();
        m.sort_unstable();
        sorted.binary_search(&m).is_ok()
    });
    let sets: Vec<&[VertexId]> = matching.iter().map(Vec::as_slice).collect();
    genuine && is_partition(n, &sets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::UEdge;
    use proptest::prelude::*;

    /// Whether some subset of exactly `n/r` blocks partitions `[n]`.
    fn brute(n: usize, r: usize, blocks: &[Vec<VertexId>]) -> bool {
        if n % r != 0 {
            return false;
        }
        (0u32..1 << blocks.len()).any(|mask| {
            mask.count_ones() as usize == n / r && {
                let chosen: Vec<&[VertexId]> =
                    (0..blocks.len()).filter(|i| mask >> i & 1 == 1).map(|i| blocks[i].as_slice()).collect();
                is_partition(n, &chosen)
            }
        })
    }

    #[test]
    fn k8_has_k4_factor() {
        let g = UGraph::complete(8, 2);
        let k4 = Pattern::complete_graph(4).unwrap();
        let Search::Found(f) = find_f_factor(&g, &k4, DEFAULT_FACTOR_BUDGET).unwrap() else { panic!() };
        assert_eq!(f.len(), 2);
        assert!(verify_factor(&g, &k4, &f));
    }

    #[test]
    fn divisibility_rules_out_factors() {
        let g = UGraph::complete(10, 2);
        let k4 = Pattern::complete_graph(4).unwrap();
        assert_eq!(find_f_factor(&g, &k4, DEFAULT_FACTOR_BUDGET).unwrap(), Search::NotFound);
    }

    #[test]
    fn two_disjoint_k4_plus_junk() {
        let mut edges = Vec::new();
        for base in [0u32, 4] {
            for a in 0..4 {
                for b in a + 1..4 {
                    edges.push(UEdge::from([base + a, base + b]));
                }
            }
        }
        edges.extend([UEdge::from([0, 4]), UEdge::from([3, 7]), UEdge::from([1, 5])]);
        let g = UGraph::from_edges(8, 2, edges).unwrap();
        let k4 = Pattern::complete_graph(4).unwrap();
        let Search::Found(f) = find_f_factor(&g, &k4, DEFAULT_FACTOR_BUDGET).unwrap() else { panic!() };
        let sets: Vec<&[u32]> = f.iter().map(|c| c.vertex_set()).collect();
        assert_eq!(sets, vec![&[0, 1, 2, 3][..], &[4, 5, 6, 7][..]]);
    }

    #[test]
    fn matchings() {
        let part = vec![vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 8]];
        let Search::Found(m) = find_perfect_matching(9, 3, &part, 100) else { panic!() };
        assert_eq!(m, part);
        assert!(verify_matching(9, &part, &m));
        // vertex 8 isolated
        let missing = vec![vec![0, 1, 2], vec![3, 4, 5], vec![5, 6, 7]];
        assert_eq!(find_perfect_matching(9, 3, &missing, 100), Search::NotFound);
        assert!(!verify_matching(9, &missing, &missing));
    }

    #[test]
    fn budget_gives_inconclusive() {
        let g = UGraph::complete(12, 2);
        let k3 = Pattern::complete_graph(3).unwrap();
        assert_eq!(find_f_factor(&g, &k3, 1).unwrap(), Search::Inconclusive { budget: 1 });
    }

    fn arb_blocks() -> impl Strategy<Value = (usize, Vec<Vec<u32>>)> {
        (2usize..5).prop_flat_map(|k| {
            let n = 3 * k;
            let block = proptest::sample::subsequence((0..n as u32).collect::<Vec<_>>(), 3);
            (Just(n), proptest::collection::vec(block, 0..16))
        })
    }

    proptest! {
        #[test]
        fn solver_agrees_with_brute_force((n, blocks) in arb_blocks()) {
            let got = find_perfect_matching(n, 3, &blocks, DEFAULT_FACTOR_BUDGET);
            prop_assert_eq!(got.flag(), Some(brute(n, 3, &blocks)));
            if let Search::Found(m) = got {
                prop_assert!(verify_matching(n, &blocks, &m));
            }
        }
    }
}
