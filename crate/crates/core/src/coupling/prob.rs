//! Conditional probabilities of "copy present" events given a history of
//! yes/no answers about other copies, under the product measure on u-edges.
//!
//! Edges are plain integer ids. A "yes" answer fixes its edges present; a
//! "no" answer becomes a constraint "not all of these edges are present"
//! over the edges not already fixed. With `P` the fixed edges and `D` the
//! conjunction of all constraints,
//!
//! ```text
//! P(C ⊆ G | history) = p^{|C \ P|} · W(D | C present) / W(D)
//! ```
//!
//! where `W` is the product-measure probability of `D`. `W` factorizes
//! over clusters of constraints sharing edges; each cluster is evaluated
//! by inclusion–exclusion when small and by a memoized branching counter
//! otherwise.

use rand::Rng;
use rustc_hash::FxHashMap as HashMap;

use crate::error::{Error, Result};
use crate::scalar::Probability;

use super::count::{Budget, Constraint, Counter, Interval};

pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000;
pub const DEFAULT_CLUSTER_CAP: usize = usize::MAX;

/// Harris-inequality bounds on a conditional probability, together with a
/// product-form estimate that lies between them.
#[derive(Clone, Debug, PartialEq)]
pub struct PiBounds<P> {
    pub lower: P,
    pub upper: P,
    pub estimate: P,
    /// `|C \ P|`.
    pub missing: usize,
    /// Number of constraints sharing an edge with `C \ P`.
    pub touching: usize,
}

/// Enclosure of a conditional probability.
#[derive(Clone, Debug, PartialEq)]
pub struct PiInterval<P> {
    pub lower: P,
    pub upper: P,
    pub exact: bool,
}

/// `p^k·num/den` from enclosures of both weights, clipped to the Harris
/// bounds.
fn enclose<P: Probability>(b: &PiBounds<P>, den: Interval<P>, num: Interval<P>) -> PiInterval<P> {
    if den.exact && num.exact && !den.lo.is_exactly_zero() {
        let v = b.upper.clone() * num.lo / den.lo;
        return PiInterval { lower: v.clone(), upper: v, exact: true };
    }
    let mut lower = b.lower.clone();
    let mut upper = b.upper.clone();
    if !den.hi.is_exactly_zero() {
        let l = b.upper.clone() * num.lo / den.hi;
        if l > lower {
            lower = l;
        }
    }
    if !den.lo.is_exactly_zero() {
        let u = b.upper.clone() * num.hi / den.lo;
        if u < upper {
            upper = u;
        }
    }
    if upper < lower {
        // rounding in floating point; the enclosure has collapsed
        upper = lower.clone();
    }
    PiInterval { lower, upper, exact: false }
}

/// Exact conditional-probability engine over a growing answer history.
#[derive(Clone, Debug)]
pub struct ConditionalEngine<P> {
    p: P,
    counter: Counter<P>,
    present: Vec<bool>,
    // residual edge sets of "no" answers, each nonempty and sorted
    constraints: Vec<Constraint>,
    by_edge: Vec<Vec<u32>>,
    node_budget: u64,
    cluster_cap: usize,
    stamp: Vec<u32>,
    epoch: u32,
    nodes_used: u64,
}

impl<P: Probability> ConditionalEngine<P> {
    /// Engine for edge ids `0..edges` with edge probability `p`.
    pub fn new(p: P, edges: usize) -> Self {
        assert!(p >= P::zero() && p <= P::one(), "edge probability outside [0, 1]");
        Self {
            counter: Counter::new(p.clone(), edges),
            p,
            present: vec![false; edges],
            constraints: Vec::new(),
            by_edge: vec![Vec::new(); edges],
            node_budget: DEFAULT_NODE_BUDGET,
            cluster_cap: DEFAULT_CLUSTER_CAP,
            stamp: Vec::new(),
            epoch: 0,
            nodes_used: 0,
        }
    }

    /// Branching-node budget for a single exact evaluation.
    pub fn with_node_budget(mut self, budget: u64) -> Self {
        self.node_budget = budget;
        self
    }

    /// Largest constraint cluster an exact evaluation will attempt.
    pub fn with_cluster_cap(mut self, cap: usize) -> Self {
        self.cluster_cap = cap;
        self
    }

    pub fn p(&self) -> &P {
        &self.p
    }

    pub fn edge_universe(&self) -> usize {
        self.present.len()
    }

    pub fn is_present(&self, e: u32) -> bool {
        self.present[e as usize]
    }

    pub fn constraints(&self) -> &[Vec<u32>] {
        &self.constraints
    }

    /// Branching nodes spent by exact evaluations so far.
    pub fn nodes_used(&self) -> u64 {
        self.nodes_used
    }

    /// Edges of `edges` not yet fixed present, sorted.
    pub fn residual(&self, edges: &[u32]) -> Vec<u32> {
        let mut c: Vec<u32> = edges.iter().copied().filter(|&e| !self.present[e as usize]).collect();
        c.sort_unstable();
        c.dedup();
        c
    }

    /// Records that all of `edges` are present.
    pub fn add_yes(&mut self, edges: &[u32]) -> Result<()> {
        for &e in edges {
            if self.present[e as usize] {
                continue;
            }
            self.present[e as usize] = true;
            for &ci in &self.by_edge[e as usize] {
                let c = &mut self.constraints[ci as usize];
                if let Ok(pos) = c.binary_search(&e) {
                    c.remove(pos);
                }
                if c.is_empty() {
                    return Err(Error::InconsistentState(format!(
                        "constraint {ci} is fully present after a yes answer"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Records that not all of `edges` are present.
    pub fn add_no(&mut self, edges: &[u32]) -> Result<()> {
        let c = self.residual(edges);
        if c.is_empty() {
            return Err(Error::InconsistentState("no answer for a copy whose edges are all present".into()));
        }
        let id = self.constraints.len() as u32;
        for &e in &c {
            self.by_edge[e as usize].push(id);
        }
        self.constraints.push(c);
        Ok(())
    }

    fn next_epoch(&mut self) -> u32 {
        if self.stamp.len() < self.constraints.len() {
            self.stamp.resize(self.constraints.len(), 0);
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        self.epoch
    }

    fn touching(&mut self, c: &[u32]) -> Vec<u32> {
        let ep = self.next_epoch();
        let mut out = Vec::new();
        for &e in c {
            for &ci in &self.by_edge[e as usize] {
                if self.stamp[ci as usize] != ep {
                    self.stamp[ci as usize] = ep;
                    out.push(ci);
                }
            }
        }
        out
    }

    /// Bounds `p^k·Π(1 − p^{|R_i \ C|}) ≤ π ≤ p^k` over the constraints
    /// `R_i` touching `C`, with `k = |C|`; both are zero when some
    /// constraint lies inside `C`.
    pub fn bounds(&mut self, edges: &[u32]) -> PiBounds<P> {
        let c = self.residual(edges);
        let k = c.len();
        let touching = self.touching(&c);
        let pk = self.counter.powers().get(k);
        let mut lower = pk.clone();
        let mut estimate = pk.clone();
        for &ci in &touching {
            let r = &self.constraints[ci as usize];
            let outside = r.iter().filter(|e| c.binary_search(e).is_err()).count();
            if outside == 0 {
                return PiBounds { lower: P::zero(), upper: P::zero(), estimate: P::zero(), missing: k, touching: touching.len() };
            }
            let keep = self.counter.powers().get(outside).complement();
            estimate = estimate * keep.clone() / self.counter.powers().get(r.len()).complement();
            lower = lower * keep;
        }
        PiBounds { lower, upper: pk, estimate, missing: k, touching: touching.len() }
    }

    /// Constraint ids in the cluster containing any constraint touching
    /// `c`, or `None` if it exceeds the cluster cap.
    fn cluster_of(&mut self, c: &[u32]) -> Option<Vec<u32>> {
        let mut queue = self.touching(c);
        let ep = self.epoch;
        let mut head = 0;
        while head < queue.len() {
            if queue.len() > self.cluster_cap {
                return None;
            }
            let ci = queue[head];
            head += 1;
            for &e in &self.constraints[ci as usize] {
                for &cj in &self.by_edge[e as usize] {
                    if self.stamp[cj as usize] != ep {
                        self.stamp[cj as usize] = ep;
                        queue.push(cj);
                    }
                }
            }
        }
        (queue.len() <= self.cluster_cap).then_some(queue)
    }

    /// `P(all of edges present | history)`, exactly.
    pub fn conditional_prob(&mut self, edges: &[u32]) -> Result<P> {
        let c = self.residual(edges);
        if c.is_empty() {
            return Ok(P::one());
        }
        let b = self.bounds(edges);
        if b.upper.is_exactly_zero() {
            return Ok(P::zero());
        }
        if b.touching == 0 {
            return Ok(b.upper);
        }
        let cluster = self.cluster_of(&c).ok_or(Error::BudgetExceeded {
            what: "constraint cluster size",
            budget: self.cluster_cap as u64,
        })?;
        let base: Vec<Constraint> = cluster.iter().map(|&ci| self.constraints[ci as usize].clone()).collect();
        let cond: Vec<Constraint> = base
            .iter()
            .map(|r| r.iter().copied().filter(|e| c.binary_search(e).is_err()).collect())
            .collect();
        let mut budget = Budget::hard(self.node_budget);
        let den = self.counter.weight(base, &mut budget);
        let num = den.and_then(|d| Ok((d, self.counter.weight(cond, &mut budget)?)));
        self.nodes_used += budget.used();
        let (den, num) = num?;
        if den.is_exactly_zero() {
            return Err(Error::InconsistentState("answer history has probability zero".into()));
        }
        Ok(b.upper * num / den)
    }

    /// Encloses `P(all of edges present | history)` using at most `nodes`
    /// branching nodes; the result is exact when the count finished.
    pub fn conditional_interval(&mut self, edges: &[u32], nodes: u64) -> Result<PiInterval<P>> {
        let c = self.residual(edges);
        let b = self.bounds(edges);
        if c.is_empty() || b.upper.is_exactly_zero() || b.touching == 0 {
            return Ok(PiInterval { lower: b.upper.clone(), upper: b.upper, exact: true });
        }
        let cluster = self.cluster_of(&c).ok_or(Error::BudgetExceeded {
            what: "constraint cluster size",
            budget: self.cluster_cap as u64,
        })?;
        let base: Vec<Constraint> = cluster.iter().map(|&ci| self.constraints[ci as usize].clone()).collect();
        let cond: Vec<Constraint> = base
            .iter()
            .map(|r| r.iter().copied().filter(|e| c.binary_search(e).is_err()).collect())
            .collect();
        let mut budget = Budget::soft(nodes);
        let den = self.counter.weight_interval(base, &mut budget)?;
        let num = self.counter.weight_interval(cond, &mut budget)?;
        self.nodes_used += budget.used();
        Ok(enclose(&b, den, num))
    }

    /// Monte Carlo estimate of `P(all of edges present | history)` by
    /// single-site Gibbs sampling over the constraint cluster of `edges`.
    /// Only the `max_clauses` constraints nearest to the target (in
    /// breadth-first order) are kept; the rest are ignored.
    ///
    /// Each retained sweep contributes the conditional probability of the
    /// target given the sampled edges outside it: `p^k` unless some
    /// constraint is missing only target edges, and zero otherwise.
    pub fn sample_conditional<R: Rng + ?Sized>(&self, edges: &[u32], sweeps: usize, max_clauses: usize, rng: &mut R) -> f64 {
        let c = self.residual(edges);
        if c.is_empty() {
            return 1.0;
        }
        let p = self.p.to_f64_lossy();

        // local variables: the cluster's undetermined edges, target first
        let mut local: HashMap<u32, usize> = HashMap::default();
        let mut vars: Vec<u32> = Vec::new();
        for &e in &c {
            local.insert(e, vars.len());
            vars.push(e);
        }
        let mut clauses: Vec<Vec<usize>> = Vec::new();
        let mut seen: HashMap<u32, ()> = HashMap::default();
        let mut head = 0;
        'bfs: while head < vars.len() {
            let e = vars[head];
            head += 1;
            for &ci in &self.by_edge[e as usize] {
                if clauses.len() == max_clauses {
                    break 'bfs;
                }
                if seen.insert(ci, ()).is_some() {
                    continue;
                }
                let clause = self.constraints[ci as usize]
                    .iter()
                    .map(|&f| {
                        *local.entry(f).or_insert_with(|| {
                            vars.push(f);
                            vars.len() - 1
                        })
                    })
                    .collect();
                clauses.push(clause);
            }
        }
        let mut of_var: Vec<Vec<usize>> = vec![Vec::new(); vars.len()];
        for (k, cl) in clauses.iter().enumerate() {
            for &v in cl {
                of_var[v].push(k);
            }
        }
        let mut touching: Vec<usize> = (0..c.len()).flat_map(|v| of_var[v].iter().copied()).collect();
        touching.sort_unstable();
        touching.dedup();
        let inner: Vec<usize> = touching.iter().map(|&k| clauses[k].iter().filter(|&&v| v < c.len()).count()).collect();
        let mut state = vec![false; vars.len()];
        let mut count = vec![0usize; clauses.len()];
        let burn = sweeps / 10;
        let mut hits = 0usize;
        for sweep in 0..burn + sweeps {
            for v in 0..vars.len() {
                if state[v] {
                    state[v] = false;
                    of_var[v].iter().for_each(|&k| count[k] -= 1);
                }
                let blocked = of_var[v].iter().any(|&k| count[k] + 1 == clauses[k].len());
                if !blocked && rng.random::<f64>() < p {
                    state[v] = true;
                    of_var[v].iter().for_each(|&k| count[k] += 1);
                }
            }
            if sweep < burn {
                continue;
            }
            // Given the rest, the target is blocked exactly when some clause
            // is missing only target edges; otherwise its edges are free.
            let blocked = touching.iter().zip(&inner).any(|(&k, &m)| {
                let set = clauses[k].iter().filter(|&&v| v < c.len() && state[v]).count();
                count[k] - set + m == clauses[k].len()
            });
            if !blocked {
                hits += 1;
            }
        }
        p.powi(c.len() as i32) * hits as f64 / sweeps as f64
    }

    /// `W(D)` for the whole current history.
    pub fn history_weight(&mut self) -> Result<P> {
        let all = self.constraints.clone();
        let mut budget = Budget::hard(self.node_budget);
        self.counter.weight(all, &mut budget)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::{BigInt, BigRational, One, Zero};
    use proptest::prelude::*;

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    /// Full enumeration over assignments of the edges that appear anywhere.
    fn brute(p: &BigRational, yes: &[Vec<u32>], no: &[Vec<u32>], target: &[u32], universe: usize) -> Option<BigRational> {
        let (mut num, mut den) = (BigRational::zero(), BigRational::zero());
        for mask in 0u32..(1 << universe) {
            let has = |e: &u32| mask >> e & 1 == 1;
            if !yes.iter().all(|c| c.iter().all(has)) || no.iter().any(|c| c.iter().all(has)) {
                continue;
            }
            let k = mask.count_ones() as usize;
            let w = num::pow::pow(p.clone(), k) * num::pow::pow(BigRational::one() - p, universe - k);
            if target.iter().all(has) {
                num += w.clone();
            }
            den += w;
        }
        (!den.is_zero()).then(|| num / den)
    }

    #[test]
    fn independent_target() {
        let mut e = ConditionalEngine::new(rat(1, 3), 10);
        e.add_no(&[7, 8]).unwrap();
        assert_eq!(e.conditional_prob(&[0, 1, 2]).unwrap(), rat(1, 27));
    }

    #[test]
    fn forced_target() {
        let mut e = ConditionalEngine::new(rat(1, 3), 10);
        e.add_yes(&[0, 1, 2]).unwrap();
        assert_eq!(e.conditional_prob(&[1, 2]).unwrap(), BigRational::one());
    }

    #[test]
    fn one_sixth() {
        // edges a=0, b=1, c=2; no-answer on {a,b}, target {b,c}
        let mut e = ConditionalEngine::new(rat(1, 2), 3);
        e.add_no(&[0, 1]).unwrap();
        assert_eq!(e.conditional_prob(&[1, 2]).unwrap(), rat(1, 6));
    }

    #[test]
    fn inconsistent_histories_are_errors() {
        let mut e = ConditionalEngine::new(rat(1, 2), 4);
        e.add_yes(&[0, 1]).unwrap();
        assert!(matches!(e.add_no(&[0, 1]), Err(Error::InconsistentState(_))));
        e.add_no(&[1, 2]).unwrap();
        assert!(matches!(e.add_yes(&[2]), Err(Error::InconsistentState(_))));
    }

    #[test]
    fn target_containing_constraint_is_zero() {
        let mut e = ConditionalEngine::new(rat(1, 2), 5);
        e.add_no(&[0, 1]).unwrap();
        assert!(e.conditional_prob(&[0, 1, 2]).unwrap().is_zero());
    }

    #[test]
    fn budget_is_reported() {
        let mut e = ConditionalEngine::new(rat(1, 2), 40).with_node_budget(2);
        for i in 0..30u32 {
            e.add_no(&[i, i + 1, i + 2]).unwrap();
        }
        assert!(matches!(e.conditional_prob(&[0, 5, 9]), Err(Error::BudgetExceeded { .. })));
        let mut capped = ConditionalEngine::new(rat(1, 2), 40).with_cluster_cap(3);
        for i in 0..30u32 {
            capped.add_no(&[i, i + 1]).unwrap();
        }
        assert!(capped.conditional_prob(&[0, 5]).is_err());
    }

    #[test]
    fn float_engine_matches_rational() {
        let mut a = ConditionalEngine::new(0.3f64, 12);
        let mut b = ConditionalEngine::new(rat(3, 10), 12);
        for c in [[0u32, 1, 2], [2, 3, 4], [4, 5, 0], [1, 3, 5], [6, 7, 8], [8, 9, 1]] {
            a.add_no(&c).unwrap();
            b.add_no(&c).unwrap();
        }
        let x = a.conditional_prob(&[1, 2, 9]).unwrap();
        let y = b.conditional_prob(&[1, 2, 9]).unwrap();
        assert!((x - y.to_f64_lossy()).abs() < 1e-14);
    }

    #[test]
    fn gibbs_estimate_is_close() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut e = ConditionalEngine::new(0.7f64, 14);
        for c in [[0u32, 1, 2], [2, 3, 4], [4, 5, 0], [1, 3, 5], [6, 7, 8], [8, 9, 1], [9, 10, 11], [11, 12, 13]] {
            e.add_no(&c).unwrap();
        }
        e.add_yes(&[6]).unwrap();
        for target in [[1u32, 2, 9], [0, 3, 12], [7, 10, 13]] {
            let exact = e.conditional_prob(&target).unwrap();
            let est = e.sample_conditional(&target, 40_000, usize::MAX, &mut rng);
            assert!((exact - est).abs() < 0.01, "{target:?}: {exact} vs {est}");
        }
        assert_eq!(e.sample_conditional(&[6], 10, usize::MAX, &mut rng), 1.0);
        // with no constraints kept the edges look independent
        assert!((e.sample_conditional(&[0, 1], 10, 0, &mut rng) - 0.49).abs() < 1e-12);
    }

    fn arb_instance() -> impl Strategy<Value = (i64, Vec<Vec<u32>>, Vec<Vec<u32>>, Vec<u32>)> {
        let set = || proptest::sample::subsequence((0u32..12).collect::<Vec<_>>(), 1..=4);
        (1i64..10, proptest::collection::vec(set(), 0..3), proptest::collection::vec(set(), 0..16), set())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn matches_enumeration((pn, yes, no, target) in arb_instance()) {
            let p = rat(pn, 10);
            let mut eng = ConditionalEngine::new(p.clone(), 12);
            // keep only answers consistent with the history so far
            let (mut ys, mut ns) = (Vec::new(), Vec::new());
            for y in &yes {
                ys.push(y.clone());
                if brute(&p, &ys, &ns, &[], 12).is_none() { ys.pop(); continue; }
                eng.add_yes(y).unwrap();
            }
            for c in &no {
                ns.push(c.clone());
                if brute(&p, &ys, &ns, &[], 12).is_none() { ns.pop(); continue; }
                eng.add_no(c).unwrap();
            }
            let expected = brute(&p, &ys, &ns, &target, 12).unwrap();
            prop_assert_eq!(eng.conditional_prob(&target).unwrap(), expected.clone());
            let b = eng.bounds(&target);
            prop_assert!(b.lower <= expected && expected <= b.upper);
            prop_assert!(b.lower <= b.estimate && b.estimate <= b.upper);
            for nodes in [0, 1, 3, 10, 1 << 20] {
                let iv = eng.conditional_interval(&target, nodes).unwrap();
                prop_assert!(iv.lower <= expected && expected <= iv.upper);
                if iv.exact {
                    prop_assert_eq!(iv.lower, expected.clone());
                }
            }
        }
    }
}
