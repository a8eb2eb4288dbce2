//! Sequential coupling of `H_F(n, π)` and `G(n, p)`.
//!
//! Copies are visited in a uniformly random order. For copy `h_j` with
//! conditional probability `π_j` of being present in `G` given the answers
//! so far, a coin with heads probability `π/π_j` decides whether to test
//! `A_j` (when `π_j ≥ π`); a heads coin with probability `π` otherwise adds
//! `h_j` untested and marks the coupling as failed.
//!
//! The coin is realized from one uniform `U` per step, so most steps are
//! decided from cheap bounds on `π_j` and the exact value is only computed
//! when the bounds straddle the decision threshold.

mod count;
pub mod prob;

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bad_events::{check_b1, check_b2, low_degree_vertices, B2Outcome};
use crate::error::{Error, Result};
use crate::hypergraph::{FCopy, FGraph, UEdge, UGraph};
use crate::pattern::{enumerate_copies, CopyIndexer, Pattern};
use crate::scalar::Probability;

use prob::{ConditionalEngine, PiBounds};

/// How undecided steps obtain `π_j`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PiPolicy {
    /// Always exact; exhausting the budget aborts the run.
    #[default]
    Exact,
    /// Exact within the budget, otherwise a Gibbs-sampling estimate
    /// clipped to the bounds reached. Such steps are counted in the trace.
    Hybrid,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CouplingConfig {
    pub policy: PiPolicy,
    /// Branching nodes per exact evaluation.
    pub node_budget: u64,
    /// Largest constraint cluster handed to the exact counter.
    pub cluster_cap: usize,
    /// Gibbs sweeps behind each hybrid estimate; zero selects the cheap
    /// product-form estimate instead.
    pub sweeps: usize,
    /// Constraints nearest to the copy that the sampler keeps.
    pub sample_clauses: usize,
    /// Keep a per-step log in the trace.
    pub record_steps: bool,
}

impl Default for CouplingConfig {
    fn default() -> Self {
        Self {
            policy: PiPolicy::Exact,
            node_budget: prob::DEFAULT_NODE_BUDGET,
            cluster_cap: prob::DEFAULT_CLUSTER_CAP,
            sweeps: DEFAULT_SWEEPS,
            sample_clauses: DEFAULT_SAMPLE_CLAUSES,
            record_steps: false,
        }
    }
}

impl CouplingConfig {
    pub fn hybrid(node_budget: u64, cluster_cap: usize) -> Self {
        Self { policy: PiPolicy::Hybrid, node_budget, cluster_cap, ..Self::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// `π_j ≥ π`: the coin decides whether to test `A_j`.
    Test,
    /// `π_j < π`: heads adds the copy untested and fails the coupling.
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub copy: u64,
    pub lower: f64,
    pub upper: f64,
    /// Set when the step needed the value itself.
    pub pi_j: Option<f64>,
    pub approximate: bool,
    /// `None` for tails steps where the bounds did not pin the branch.
    pub branch: Option<Branch>,
    pub heads: bool,
    pub answer: Option<bool>,
}

/// A step with `0 < π_j < π`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmallPi {
    pub step: usize,
    pub copy: u64,
    pub upper: f64,
    pub heads: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CouplingTrace {
    pub n: usize,
    #[serde(skip)]
    pub h: FGraph,
    #[serde(skip)]
    pub g: UGraph,
    /// Copy ids of `H` in inclusion order.
    pub h_ids: Vec<u64>,
    pub failed: bool,
    pub failure_steps: usize,
    pub tested_yes: usize,
    pub tested_no: usize,
    pub exact_evaluations: usize,
    pub approximate_steps: usize,
    /// Branching nodes spent on conditional probabilities.
    pub counter_nodes: u64,
    pub small_pi: Vec<SmallPi>,
    pub steps: Vec<StepRecord>,
}

impl CouplingTrace {
    /// Whether every copy of `H` lies in `G`.
    pub fn h_within_g(&self) -> bool {
        self.h.copies().all(|c| c.is_in(&self.g))
    }
}

/// Decision from bounds `lo ≤ π_j ≤ hi` and the step's uniform `u`, or
/// `None` if the bounds do not settle it.
const REFINE_START: u64 = 64;
const REFINE_GROWTH: u64 = 8;
pub const DEFAULT_SWEEPS: usize = 500;
pub const DEFAULT_SAMPLE_CLAUSES: usize = 256;

fn decide<P: Probability>(u: &P, pi: &P, lo: &P, hi: &P) -> Option<(bool, Option<Branch>)> {
    if u < pi {
        if lo >= pi {
            Some((true, Some(Branch::Test)))
        } else if hi < pi {
            Some((true, Some(Branch::Fail)))
        } else {
            None
        }
    } else if hi < pi {
        Some((false, Some(Branch::Fail)))
    } else if u.clone() * lo.clone() >= *pi {
        Some((false, Some(Branch::Test)))
    } else if lo >= pi && u.clone() * hi.clone() < *pi {
        Some((true, Some(Branch::Test)))
    } else {
        None
    }
}

fn decide_exact<P: Probability>(u: &P, pi: &P, pj: &P) -> (bool, Branch) {
    if pj >= pi {
        (u.clone() * pj.clone() < *pi, Branch::Test)
    } else {
        (u < pi, Branch::Fail)
    }
}

/// Tightens the enclosure of `π_j` with growing node budgets until the
/// coin is decided. Returns the decision, `π_j` when it was computed
/// exactly, and whether an estimate had to stand in for it.
#[allow(clippy::type_complexity)]
#[allow(clippy::too_many_arguments)]
fn refine<P: Probability, R: Rng + ?Sized>(
    engine: &mut ConditionalEngine<P>,
    edges: &[u32],
    u: &P,
    pi: &P,
    harris: (P, P),
    product: P,
    config: &CouplingConfig,
    rng: &mut R,
) -> Result<(bool, Branch, Option<P>, bool)> {
    let (mut lo, mut hi) = harris;
    let mut nodes = REFINE_START.min(config.node_budget);
    loop {
        match engine.conditional_interval(edges, nodes) {
            Ok(iv) if iv.exact => {
                let (h, b) = decide_exact(u, pi, &iv.lower);
                return Ok((h, b, Some(iv.lower), false));
            }
            Ok(iv) => {
                (lo, hi) = (iv.lower, iv.upper);
                if let Some((h, Some(b))) = decide(u, pi, &lo, &hi) {
                    return Ok((h, b, None, false));
                }
            }
            Err(Error::BudgetExceeded { .. }) => nodes = config.node_budget,
            Err(e) => return Err(e),
        }
        if nodes >= config.node_budget {
            if config.policy == PiPolicy::Hybrid {
                let estimate = if config.sweeps == 0 {
                    product
                } else {
                    P::from_f64_lossless(engine.sample_conditional(edges, config.sweeps, config.sample_clauses, rng))
                };
                let v = if estimate < lo { lo } else if estimate > hi { hi } else { estimate };
                let (h, b) = decide_exact(u, pi, &v);
                return Ok((h, b, Some(v), true));
            }
            return Err(Error::BudgetExceeded { what: "conditional probability", budget: config.node_budget });
        }
        nodes = nodes.saturating_mul(REFINE_GROWTH).min(config.node_budget);
    }
}

/// Runs the coupling over all copies of `pattern` on `[n]`.
pub fn run_static_coupling<P: Probability, R: Rng + ?Sized>(
    pattern: &Pattern,
    n: usize,
    p: P,
    pi: P,
    config: &CouplingConfig,
    rng: &mut R,
) -> Result<CouplingTrace> {
    if !(p >= P::zero() && p <= P::one() && pi >= P::zero() && pi <= P::one()) {
        return Err(Error::InvalidParameters("p and pi must lie in [0, 1]".into()));
    }
    let ix = CopyIndexer::new(pattern, n)?;
    let m = ix.count();
    let universe = ix.edge_indexer().count() as usize;
    let mut order: Vec<u64> = (0..m).collect();
    order.shuffle(rng);
    let mut engine = ConditionalEngine::new(p.clone(), universe)
        .with_node_budget(config.node_budget)
        .with_cluster_cap(config.cluster_cap);
    let p64 = p.to_f64_lossy();
    let mut hidden: Vec<i8> = vec![-1; universe];
    let mut read = |e: u64, rng: &mut R| -> bool {
        let slot = &mut hidden[e as usize];
        if *slot < 0 {
            *slot = rng.random_bool(p64) as i8;
        }
        *slot == 1
    };

    let mut trace = CouplingTrace {
        n,
        h: FGraph::new(n, pattern.r(), pattern.u()),
        g: UGraph::empty(n, pattern.u()),
        h_ids: Vec::new(),
        failed: false,
        failure_steps: 0,
        tested_yes: 0,
        tested_no: 0,
        exact_evaluations: 0,
        approximate_steps: 0,
        counter_nodes: 0,
        small_pi: Vec::new(),
        steps: Vec::new(),
    };
    let mut edges: Vec<u64> = Vec::with_capacity(pattern.s());
    let mut edges32: Vec<u32> = Vec::with_capacity(pattern.s());

    for (step, &id) in order.iter().enumerate() {
        ix.edge_ids(pattern, id, &mut edges);
        edges32.clear();
        edges32.extend(edges.iter().map(|&e| e as u32));
        let u = P::from_f64_lossless(rng.random::<f64>());
        let PiBounds { lower, upper, estimate, .. } = engine.bounds(&edges32);
        let mut pi_j = None;
        let mut approximate = false;
        let (heads, branch) = match decide(&u, &pi, &lower, &upper) {
            Some(d) => d,
            None => {
                let (h, b, value, approx) = refine(&mut engine, &edges32, &u, &pi, (lower.clone(), upper.clone()), estimate, config, rng)?;
                if approx {
                    approximate = true;
                    trace.approximate_steps += 1;
                } else {
                    trace.exact_evaluations += 1;
                }
                pi_j = value.map(|v| v.to_f64_lossy());
                (h, Some(b))
            }
        };
        let mut answer = None;
        match (heads, branch) {
            (true, Some(Branch::Test)) => {
                let yes = edges.iter().all(|&e| read(e, rng));
                answer = Some(yes);
                if yes {
                    engine.add_yes(&edges32)?;
                    trace.tested_yes += 1;
                    trace.h_ids.push(id);
                } else {
                    engine.add_no(&edges32)?;
                    trace.tested_no += 1;
                }
            }
            (true, Some(Branch::Fail)) => {
                trace.failed = true;
                trace.failure_steps += 1;
                trace.h_ids.push(id);
            }
            (true, None) => unreachable!("heads always pins the branch"),
            (false, _) => {}
        }
        if branch == Some(Branch::Fail) && !upper.is_exactly_zero() {
            trace.small_pi.push(SmallPi { step, copy: id, upper: upper.to_f64_lossy(), heads });
        }
        if config.record_steps {
            trace.steps.push(StepRecord {
                copy: id,
                lower: lower.to_f64_lossy(),
                upper: upper.to_f64_lossy(),
                pi_j,
                approximate,
                branch,
                heads,
                answer,
            });
        }
    }

    trace.counter_nodes = engine.nodes_used();
    let eix = ix.edge_indexer();
    for e in 0..universe as u64 {
        if read(e, rng) {
            trace.g.insert(UEdge::new(eix.unrank_vec(e))?)?;
        }
    }
    for &id in &trace.h_ids {
        trace.h.insert(ix.copy(pattern, id))?;
    }
    Ok(trace)
}

/// `π_j* = p^{|E_j \ E(G(H0))|}`.
pub fn pi_star<P: Probability>(h0: &FGraph, copy: &FCopy, p: &P) -> P {
    let g0 = h0.union_of_labels();
    let missing = copy.edges().iter().filter(|e| !g0.contains(e)).count();
    p.powu(missing)
}

/// Copies of the pattern in `G` whose F-edge is not in `H`.
pub fn extra_copies(trace: &CouplingTrace, pattern: &Pattern) -> Result<BTreeSet<FCopy>> {
    Ok(enumerate_copies(pattern, &trace.g)?.into_iter().filter(|c| !trace.h.contains(c)).collect())
}

/// Number of (low-degree vertex of `H`, extra copy containing it) pairs.
pub fn extra_low_degree_incidences(trace: &CouplingTrace, pattern: &Pattern, g: f64) -> Result<usize> {
    let low = low_degree_vertices(&trace.h, g);
    Ok(extra_copies(trace, pattern)?
        .iter()
        .map(|c| low.iter().filter(|&&v| c.contains_vertex(v)).count())
        .sum())
}

/// For a failed trace, whether `H ∈ B1(π) ∪ B2`. `None` if B1 fails and
/// the B2 search ran out of budget. Non-failed traces pass vacuously.
pub fn verify_failure_implies_bad(trace: &CouplingTrace, m: u128, pi: f64, node_budget: u64) -> Result<Option<bool>> {
    if !trace.failed {
        return Ok(Some(true));
    }
    if check_b1(&trace.h, m, pi).flag {
        return Ok(Some(true));
    }
    Ok(match check_b2(&trace.h, node_budget)? {
        B2Outcome::Present { .. } => Some(true),
        B2Outcome::Absent => Some(false),
        B2Outcome::Inconclusive { .. } => None,
    })
}

/// Edge subsets of `F` violating the component bound; empty for strictly
/// 1-balanced patterns.
pub fn verify_component_bound(pattern: &Pattern) -> Vec<Vec<Vec<u32>>> {
    pattern.component_bound_violations()
}
