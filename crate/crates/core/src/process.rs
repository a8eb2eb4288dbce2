//! Random processes, hitting times and process couplings.
//!
//! The u-graph process adds the `N` u-edges in uniformly random order; the
//! F-graph process adds the `M` copies of `F` in uniformly random order and
//! the r-uniform process does the same with `r`-sets. Hitting times count
//! steps, so `T = t` means the condition first holds after `t` additions.
//!
//! Long processes are only ever needed up to a prefix, so F-graph and
//! r-uniform orders are drawn lazily through [`LazyOrder`].

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Geometric};
use rustc_hash::FxHashSet;
use serde::Serialize;

use crate::bad_events::partner_pairs;
use crate::combinatorics::SubsetIndexer;
use crate::coupling::{run_static_coupling, CouplingConfig, CouplingTrace};
use crate::error::{Error, Result};
use crate::hypergraph::{FCopy, FGraph, UEdge, UGraph, VertexId};
use crate::params::ParamSet;
use crate::pattern::{CopyIndexer, CoverTracker, Pattern};

/// Uniform random order of `0..m`, drawn one element at a time.
///
/// Elements are rejection-sampled while few are used; once half the range
/// is gone the rest is materialized and shuffled.
#[derive(Clone, Debug)]
pub struct LazyOrder {
    m: u64,
    used: FxHashSet<u64>,
    tail: Option<Vec<u64>>,
}

impl LazyOrder {
    pub fn new(m: u64) -> Self {
        Self { m, used: FxHashSet::default(), tail: None }
    }

    /// Order over `0..m` that never yields any of `skip`.
    pub fn excluding(m: u64, skip: impl IntoIterator<Item = u64>) -> Self {
        let mut o = Self::new(m);
        o.used.extend(skip);
        o
    }

    pub fn remaining(&self) -> u64 {
        match &self.tail {
            Some(t) => t.len() as u64,
            None => self.m - self.used.len() as u64,
        }
    }

    pub fn next<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<u64> {
        if self.tail.is_none() && 2 * self.used.len() as u64 >= self.m {
            let mut rest: Vec<u64> = (0..self.m).filter(|x| !self.used.contains(x)).collect();
            rest.shuffle(rng);
            self.tail = Some(rest);
        }
        if let Some(t) = &mut self.tail {
            return t.pop();
        }
        loop {
            let x = rng.random_range(0..self.m);
            if self.used.insert(x) {
                return Some(x);
            }
        }
    }
}

/// Ids in `0..m` kept independently with probability `q`.
pub fn bernoulli_ids<R: Rng + ?Sized>(m: u64, q: f64, rng: &mut R) -> Vec<u64> {
    let mut out = Vec::new();
    if q <= 0.0 {
        return out;
    }
    if q >= 1.0 {
        return (0..m).collect();
    }
    let gap = Geometric::new(q).expect("q in (0, 1)");
    let mut next = gap.sample(rng);
    while next < m {
        out.push(next);
        next = next.saturating_add(1).saturating_add(gap.sample(rng));
    }
    out
}

/// `H_F(n, π)`: every copy of `F` on `[n]` independently with probability `π`.
pub fn random_fgraph<R: Rng + ?Sized>(pattern: &Pattern, n: usize, pi: f64, rng: &mut R) -> Result<FGraph> {
    let ix = CopyIndexer::new(pattern, n)?;
    let mut h = FGraph::new(n, pattern.r(), pattern.u());
    for id in bernoulli_ids(ix.count(), pi, rng) {
        h.insert(ix.copy(pattern, id))?;
    }
    Ok(h)
}

/// The random u-graph process: a permutation of all u-edges on `[n]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UProcess {
    pub n: usize,
    pub u: usize,
    pub order: Vec<UEdge>,
}

impl UProcess {
    pub fn random<R: Rng + ?Sized>(n: usize, u: usize, rng: &mut R) -> Result<Self> {
        let ix = SubsetIndexer::new(n, u)?;
        let mut ids: Vec<u64> = (0..ix.count()).collect();
        ids.shuffle(rng);
        Ok(Self { n, u, order: ids.into_iter().map(|i| UEdge::from_sorted(ix.unrank_vec(i))).collect() })
    }

    /// Checks the order for repeats and foreign edges.
    pub fn from_order(n: usize, u: usize, order: Vec<UEdge>) -> Result<Self> {
        let mut seen = UGraph::empty(n, u);
        for e in &order {
            if !seen.insert(e.clone())? {
                return Err(Error::DuplicateEdge(e.vertices().to_vec()));
            }
        }
        Ok(Self { n, u, order })
    }

    pub fn prefix(&self, t: usize) -> Result<UGraph> {
        UGraph::from_edges(self.n, self.u, self.order[..t.min(self.order.len())].iter().cloned())
    }
}

/// A sequence of distinct copies of one pattern: a prefix of the random
/// F-graph process.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FProcess {
    pub n: usize,
    pub order: Vec<FCopy>,
}

impl FProcess {
    pub fn from_order(n: usize, order: Vec<FCopy>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for c in &order {
            if !seen.insert(c) {
                return Err(Error::InvalidParameters("repeated copy in F-graph process".into()));
            }
        }
        Ok(Self { n, order })
    }

    /// Draws the process until no vertex is isolated and then `extra`
    /// further steps (fewer if the copies run out).
    pub fn until_covered<R: Rng + ?Sized>(pattern: &Pattern, n: usize, extra: usize, rng: &mut R) -> Result<Self> {
        let ix = CopyIndexer::new(pattern, n)?;
        let mut lazy = LazyOrder::new(ix.count());
        let mut order = Vec::new();
        extend_covering(n, &mut order, FCopy::vertex_set, || lazy.next(rng).map(|id| ix.copy(pattern, id)), extra);
        Ok(Self { n, order })
    }

    pub fn prefix(&self, t: usize, r: usize, u: usize) -> Result<FGraph> {
        let mut h = FGraph::new(self.n, r, u);
        for c in &self.order[..t.min(self.order.len())] {
            h.insert(c.clone())?;
        }
        Ok(h)
    }

    /// Vertex sets of the copies in order.
    pub fn forget_labels(&self) -> Vec<Vec<VertexId>> {
        self.order.iter().map(|c| c.vertex_set().to_vec()).collect()
    }
}

/// Appends items from `next` until `items` covers `[n]`, then `extra` more
/// (fewer if `next` runs dry).
fn extend_covering<T>(
    n: usize,
    items: &mut Vec<T>,
    verts: impl Fn(&T) -> &[VertexId],
    mut next: impl FnMut() -> Option<T>,
    extra: usize,
) {
    let mut seen = vec![false; n];
    let mut left = n;
    let mut hit = (n == 0).then_some(0);
    for (t, x) in items.iter().enumerate() {
        for &v in verts(x) {
            if !std::mem::replace(&mut seen[v as usize], true) {
                left -= 1;
            }
        }
        if hit.is_none() && left == 0 {
            hit = Some(t + 1);
        }
    }
    while hit.is_none_or(|t| items.len() < t + extra) {
        let Some(x) = next() else { return };
        for &v in verts(&x) {
            if !std::mem::replace(&mut seen[v as usize], true) {
                left -= 1;
            }
        }
        items.push(x);
        if hit.is_none() && left == 0 {
            hit = Some(items.len());
        }
    }
}

/// First `t` such that the first `t` sets cover `[n]`.
pub fn first_cover<'a>(n: usize, sets: impl IntoIterator<Item = &'a [VertexId]>) -> Option<usize> {
    let mut seen = vec![false; n];
    let mut left = n;
    if left == 0 {
        return Some(0);
    }
    for (t, s) in sets.into_iter().enumerate() {
        for &v in s {
            if !std::mem::replace(&mut seen[v as usize], true) {
                left -= 1;
            }
        }
        if left == 0 {
            return Some(t + 1);
        }
    }
    None
}

/// `T_G`: first step at which every vertex lies in a copy of `F`.
pub fn hitting_time_tg(proc: &UProcess, pattern: &Pattern) -> Result<usize> {
    let mut tracker = CoverTracker::new(pattern, proc.n)?;
    for (t, e) in proc.order.iter().enumerate() {
        tracker.add_u_edge(e)?;
        if tracker.all_covered() {
            return Ok(t + 1);
        }
    }
    Err(Error::NeverHit)
}

/// `T_H`: first step without isolated vertices.
pub fn hitting_time_th(proc: &FProcess) -> Result<usize> {
    first_cover(proc.n, proc.order.iter().map(|c| c.vertex_set())).ok_or(Error::NeverHit)
}

/// `T_E` for an r-uniform process given as a sequence of vertex sets.
pub fn hitting_time_te(n: usize, order: &[Vec<VertexId>]) -> Result<usize> {
    first_cover(n, order.iter().map(Vec::as_slice)).ok_or(Error::NeverHit)
}

/// Outcome of coupling the F-graph process with the r-uniform process.
#[derive(Clone, Debug, Serialize)]
pub struct FhCoupling {
    pub f_proc: FProcess,
    /// The r-uniform process, as vertex sets.
    pub e_proc: Vec<Vec<VertexId>>,
    /// `|H_F|`, the length over which the two agree by construction.
    pub shared: usize,
    /// Samples of `H_F` rejected for a repeated vertex set.
    pub resamples: usize,
    pub t_h: usize,
    pub t_e: usize,
    /// Leading steps at which the unlabeled processes coincide.
    pub agreement: usize,
    /// Whether `|H_F| ≥ T_H + ⌊g n⌋`.
    pub horizon_reached: bool,
}

/// Couples the F-graph process with the r-uniform process through
/// `H_F(n, 2π+)` and its unlabeled view.
pub fn couple_fh_processes<R: Rng + ?Sized>(params: &ParamSet<f64>, rng: &mut R) -> Result<FhCoupling> {
    let (n, pattern) = (params.n, &params.pattern);
    let ix = CopyIndexer::new(pattern, n)?;
    let rsets = ix.rsets().clone();
    let q = (2.0 * params.pi_plus()?).min(1.0);
    let window = (params.g() * n as f64).floor() as usize;

    let mut resamples = 0;
    let ids = loop {
        let ids = bernoulli_ids(ix.count(), q, rng);
        let per = ix.per_set() as u64;
        let distinct: FxHashSet<u64> = ids.iter().map(|&id| id / per).collect();
        if distinct.len() == ids.len() {
            break ids;
        }
        resamples += 1;
    };
    let mut shuffled = ids.clone();
    shuffled.shuffle(rng);
    let mut order: Vec<FCopy> = shuffled.iter().map(|&id| ix.copy(pattern, id)).collect();
    let mut e_proc: Vec<Vec<VertexId>> = order.iter().map(|c| c.vertex_set().to_vec()).collect();
    let shared = order.len();

    let mut lazy_f = LazyOrder::excluding(ix.count(), ids.iter().copied());
    extend_covering(n, &mut order, FCopy::vertex_set, || lazy_f.next(rng).map(|id| ix.copy(pattern, id)), window);
    let per = ix.per_set() as u64;
    let mut lazy_e = LazyOrder::excluding(rsets.count(), ids.iter().map(|&id| id / per));
    extend_covering(n, &mut e_proc, Vec::as_slice, || lazy_e.next(rng).map(|x| rsets.unrank_vec(x)), window);

    let f_proc = FProcess { n, order };
    let t_h = hitting_time_th(&f_proc)?;
    let t_e = hitting_time_te(n, &e_proc)?;
    let agreement = f_proc
        .order
        .iter()
        .zip(&e_proc)
        .take_while(|(c, e)| c.vertex_set() == e.as_slice())
        .count();
    Ok(FhCoupling { f_proc, e_proc, shared, resamples, t_h, t_e, agreement, horizon_reached: shared >= t_h + window })
}

/// A duplicate of a shared u-edge carried by one copy of a partner pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DummyEdge {
    pub edge: UEdge,
    /// Index into `h_proc.order` of the copy that uses the dummy.
    pub copy: usize,
    pub time: f64,
}

/// Result of coupling the u-graph process with the F-graph process.
#[derive(Clone, Debug, Serialize)]
pub struct ProcessCouplingResult {
    pub g_proc: UProcess,
    pub h_proc: FProcess,
    /// Copies of `h_proc.order` coming from the static `H`; the rest is
    /// the uniform continuation.
    pub h_len: usize,
    /// Auxiliary time of each edge of the static `G`.
    pub aux_times: BTreeMap<UEdge, f64>,
    pub dummies: Vec<DummyEdge>,
    /// `τ` of the first `h_len` copies of `h_proc`.
    pub tau: Vec<f64>,
    pub t_g: usize,
    pub t_h: usize,
    /// `⌊g(n)·n⌋`.
    pub window: usize,
    pub set_e: Vec<FCopy>,
    pub set_f: Vec<FCopy>,
    pub chain_holds: bool,
    pub failed: bool,
    pub approximate_steps: usize,
    #[serde(skip)]
    pub trace: CouplingTrace,
}

impl ProcessCouplingResult {
    /// `H_{T_H}`.
    pub fn h_at_hit(&self) -> &[FCopy] {
        &self.h_proc.order[..self.t_h]
    }

    /// `G_{T_G}`.
    pub fn g_at_hit(&self) -> Result<UGraph> {
        self.g_proc.prefix(self.t_g)
    }
}

/// Couples `(G_t)` and `(H_t)` by running the static coupling at `(p+, π+)`
/// and ordering both outcomes by shared auxiliary times.
pub fn couple_gh_processes<R: Rng + ?Sized>(
    params: &ParamSet<f64>,
    config: &CouplingConfig,
    rng: &mut R,
) -> Result<ProcessCouplingResult> {
    let (n, pattern) = (params.n, &params.pattern);
    let u = pattern.u();
    let trace = run_static_coupling(pattern, n, params.p_plus()?, params.pi_plus()?, config, rng)?;
    let window = (params.g() * n as f64).floor() as usize;
    let ix = CopyIndexer::new(pattern, n)?;

    // auxiliary times for the edges of G, in edge order for determinism
    let aux_times: BTreeMap<UEdge, f64> = trace.g.edges().map(|e| (e.clone(), rng.random::<f64>())).collect();

    // H in inclusion order; dummies are attached by position in this list
    let h_copies: Vec<FCopy> = trace.h_ids.iter().map(|&id| ix.copy(pattern, id)).collect();
    let position: BTreeMap<&FCopy, usize> = h_copies.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let mut override_time: BTreeMap<(usize, UEdge), f64> = BTreeMap::new();
    let mut dummy_of: Vec<(usize, UEdge, f64)> = Vec::new();
    if u == 2 {
        for (a, b) in partner_pairs(&trace.h) {
            let shared: Vec<&UEdge> = a.edges().iter().filter(|e| b.edges().contains(e)).collect();
            for e in shared {
                let who = if rng.random_bool(0.5) { &a } else { &b };
                let i = position[who];
                let t = rng.random::<f64>();
                let slot = override_time.entry((i, e.clone())).or_insert(t);
                *slot = slot.max(t);
                dummy_of.push((i, e.clone(), t));
            }
        }
    }
    let tau: Vec<f64> = h_copies
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if !c.is_in(&trace.g) {
                return rng.random::<f64>();
            }
            c.edges()
                .iter()
                .map(|e| override_time.get(&(i, e.clone())).copied().unwrap_or(aux_times[e]))
                .fold(0.0, f64::max)
        })
        .collect();

    // process orders: sort by time, ties by copy/edge order
    let mut g_order: Vec<(f64, UEdge)> = aux_times.iter().map(|(e, &t)| (t, e.clone())).collect();
    g_order.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let eix = ix.edge_indexer();
    let mut absent: Vec<UEdge> =
        (0..eix.count()).map(|i| UEdge::from_sorted(eix.unrank_vec(i))).filter(|e| !trace.g.contains(e)).collect();
    absent.shuffle(rng);
    let g_proc = UProcess { n, u, order: g_order.into_iter().map(|(_, e)| e).chain(absent).collect() };

    let mut by_tau: Vec<usize> = (0..h_copies.len()).collect();
    by_tau.sort_by(|&a, &b| tau[a].total_cmp(&tau[b]).then_with(|| h_copies[a].cmp(&h_copies[b])));
    let rank: Vec<usize> = {
        let mut rk = vec![0; by_tau.len()];
        for (k, &i) in by_tau.iter().enumerate() {
            rk[i] = k;
        }
        rk
    };
    let mut order: Vec<FCopy> = by_tau.iter().map(|&i| h_copies[i].clone()).collect();
    let sorted_tau: Vec<f64> = by_tau.iter().map(|&i| tau[i]).collect();
    let dummies: Vec<DummyEdge> =
        dummy_of.into_iter().map(|(i, edge, time)| DummyEdge { edge, copy: rank[i], time }).collect();
    let h_len = order.len();
    let mut lazy = LazyOrder::excluding(ix.count(), trace.h_ids.iter().copied());
    extend_covering(n, &mut order, FCopy::vertex_set, || lazy.next(rng).map(|id| ix.copy(pattern, id)), window);
    let h_proc = FProcess { n, order };

    let t_g = hitting_time_tg(&g_proc, pattern)?;
    let t_h = hitting_time_th(&h_proc)?;
    let g_hit = g_proc.prefix(t_g)?;
    let h_hit = &h_proc.order[..t_h];
    let set_e: Vec<FCopy> = h_hit.iter().filter(|c| !c.is_in(&g_hit)).cloned().collect();
    let later = &h_proc.order[t_h..(t_h + window).min(h_proc.order.len())];
    let set_f: Vec<FCopy> =
        h_hit.iter().filter(|c| later.iter().any(|d| c.overlap(d) == u)).cloned().collect();
    let chain_holds = set_e.iter().all(|c| set_f.contains(c));

    Ok(ProcessCouplingResult {
        g_proc,
        h_proc,
        h_len,
        aux_times,
        dummies,
        tau: sorted_tau,
        t_g,
        t_h,
        window,
        set_e,
        set_f,
        chain_holds,
        failed: trace.failed,
        approximate_steps: trace.approximate_steps,
        trace,
    })
}

/// Checks `H_{T_H} \ 𝓕 ⊆ H_{T_H} \ 𝓔` and `H_{T_H} \ 𝓔 ⊆ cl(G_{T_G})`.
pub fn verify_embedding_chain(result: &ProcessCouplingResult) -> Result<bool> {
    let first = result.set_e.iter().all(|c| result.set_f.contains(c));
    let g = result.g_at_hit()?;
    let second = result.h_at_hit().iter().filter(|c| !result.set_e.contains(c)).all(|c| c.is_in(&g));
    Ok(first && second)
}
