//! Weighted counting for monotone constraint systems: the probability,
//! under independent Bernoulli(p) edges, that no constraint has all of its
//! edges present.
//!
//! Components are encoded as fixed-width bitsets: on global edge ids when
//! the edge universe fits in 512 bits (so results are reusable across
//! calls), otherwise relabeled per component. Counting simplifies
//! (forced-absent singletons, superset removal, component splitting) and
//! then branches on the most frequent edge, switching to
//! inclusion–exclusion once a component has few constraints.
//!
//! A soft budget turns the counter into a bounding procedure: once the
//! budget runs out, unexpanded components contribute Harris-type bounds
//! instead of exact values, so the caller gets an interval that tightens as
//! the budget grows.

use rustc_hash::FxHashMap as HashMap;

use crate::error::{Error, Result};
use crate::scalar::{PowerTable, Probability};

/// Components with at most this many constraints use inclusion–exclusion.
pub const INCLUSION_EXCLUSION_LIMIT: usize = 10;

/// Widest component (in distinct edges) the bitset counter accepts.
pub const MAX_COMPONENT_EDGES: usize = 2048;

const MEMO_LIMIT: usize = 1 << 20;
const GLOBAL_LIMIT: usize = 512;
// memo keys above this many words are not stored
const MEMO_KEY_LIMIT: usize = 1 << 12;

pub(crate) type Constraint = Vec<u32>;

/// Branching nodes available to one evaluation.
pub(crate) struct Budget {
    left: u64,
    total: u64,
    soft: bool,
}

impl Budget {
    /// Exhaustion is an error.
    pub fn hard(total: u64) -> Self {
        Self { left: total, total, soft: false }
    }

    /// Exhaustion degrades to bounds.
    pub fn soft(total: u64) -> Self {
        Self { left: total, total, soft: true }
    }

    /// `Ok(true)` if a node may be expanded, `Ok(false)` if it must be
    /// bounded instead.
    fn spend(&mut self) -> Result<bool> {
        if self.left == 0 {
            if self.soft {
                return Ok(false);
            }
            return Err(Error::BudgetExceeded { what: "conditional probability", budget: self.total });
        }
        self.left -= 1;
        Ok(true)
    }

    pub fn used(&self) -> u64 {
        self.total - self.left
    }
}

/// An enclosure `lo ≤ W ≤ hi`; `exact` when `lo == hi` was computed.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Interval<P> {
    pub lo: P,
    pub hi: P,
    pub exact: bool,
}

impl<P: Probability> Interval<P> {
    fn point(v: P) -> Self {
        Self { lo: v.clone(), hi: v, exact: true }
    }

    fn mul(self, other: Self) -> Self {
        Self { lo: self.lo * other.lo, hi: self.hi * other.hi, exact: self.exact && other.exact }
    }

    /// `a·x + b·y` for nonnegative `a`, `b`.
    fn mix(a: &P, x: Self, b: &P, y: Self) -> Self {
        Self {
            lo: a.clone() * x.lo + b.clone() * y.lo,
            hi: a.clone() * x.hi + b.clone() * y.hi,
            exact: x.exact && y.exact,
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Counter<P> {
    p: P,
    q: P,
    powers: PowerTable<P>,
    // whole components in global edge ids
    memo: HashMap<Vec<Constraint>, P>,
    // bitset components, flattened; only kept across calls for global ids
    bit_memo: HashMap<Vec<u64>, P>,
    global_width: Option<usize>,
}

impl<P: Probability> Counter<P> {
    /// Counter for edge ids below `universe`.
    pub fn new(p: P, universe: usize) -> Self {
        Self {
            q: p.complement(),
            powers: PowerTable::new(&p, 64),
            p,
            memo: HashMap::default(),
            bit_memo: HashMap::default(),
            global_width: (universe <= GLOBAL_LIMIT).then_some(universe),
        }
    }

    pub fn powers(&self) -> &PowerTable<P> {
        &self.powers
    }

    /// Exact probability that no constraint in `cons` is fully present.
    pub fn weight(&mut self, cons: Vec<Constraint>, budget: &mut Budget) -> Result<P> {
        debug_assert!(!budget.soft);
        Ok(self.weight_interval(cons, budget)?.lo)
    }

    /// Enclosure of the same probability; exact unless a soft budget ran out.
    pub fn weight_interval(&mut self, cons: Vec<Constraint>, budget: &mut Budget) -> Result<Interval<P>> {
        let (factor, comps) = match simplify_vec(cons, &self.q) {
            None => return Ok(Interval::point(P::zero())),
            Some(x) => x,
        };
        let mut total = Interval::point(factor);
        for comp in comps {
            if total.hi.is_exactly_zero() {
                break;
            }
            let w = self.component(comp, budget)?;
            total = total.mul(w);
        }
        Ok(total)
    }

    fn component(&mut self, comp: Vec<Constraint>, budget: &mut Budget) -> Result<Interval<P>> {
        if comp.len() == 1 {
            return Ok(Interval::point(self.powers.get(comp[0].len()).complement()));
        }
        if let Some(v) = self.memo.get(&comp) {
            return Ok(Interval::point(v.clone()));
        }
        let value = if let Some(universe) = self.global_width {
            match universe {
                0..=64 => self.bits::<1>(&comp, None, budget)?,
                65..=128 => self.bits::<2>(&comp, None, budget)?,
                129..=256 => self.bits::<4>(&comp, None, budget)?,
                _ => self.bits::<8>(&comp, None, budget)?,
            }
        } else {
            let mut ids: Vec<u32> = comp.iter().flatten().copied().collect();
            ids.sort_unstable();
            ids.dedup();
            let ids = Some(ids.as_slice());
            match ids.map_or(0, <[u32]>::len) {
                0..=64 => self.bits::<1>(&comp, ids, budget)?,
                65..=128 => self.bits::<2>(&comp, ids, budget)?,
                129..=256 => self.bits::<4>(&comp, ids, budget)?,
                257..=512 => self.bits::<8>(&comp, ids, budget)?,
                513..=1024 => self.bits::<16>(&comp, ids, budget)?,
                1025..=MAX_COMPONENT_EDGES => self.bits::<32>(&comp, ids, budget)?,
                _ if budget.soft => harris_vec(&comp, &self.powers),
                w => return Err(Error::BudgetExceeded { what: "component width", budget: w as u64 }),
            }
        };
        if value.exact {
            if self.memo.len() >= MEMO_LIMIT {
                self.memo.clear();
            }
            let words: usize = comp.iter().map(Vec::len).sum();
            if words <= MEMO_KEY_LIMIT {
                self.memo.insert(comp, value.lo.clone());
            }
        }
        Ok(value)
    }

    /// Counts one component on bitsets; `ids` relabels edges, `None` keeps
    /// global ids and the cross-call memo.
    fn bits<const W: usize>(&mut self, comp: &[Constraint], ids: Option<&[u32]>, budget: &mut Budget) -> Result<Interval<P>> {
        let local: Vec<[u64; W]> = comp
            .iter()
            .map(|c| {
                let mut b = [0u64; W];
                for &e in c {
                    let i = match ids {
                        None => e as usize,
                        Some(ids) => ids.binary_search(&e).expect("collected"),
                    };
                    b[i / 64] |= 1 << (i % 64);
                }
                b
            })
            .collect();
        if ids.is_some() || self.bit_memo.len() >= MEMO_LIMIT {
            self.bit_memo.clear();
        }
        let mut bc = BitCounter::<P, W> { p: &self.p, q: &self.q, powers: &self.powers, memo: &mut self.bit_memo, budget, scratch: Vec::new() };
        bc.component(local)
    }
}

/// Drops forced-absent singletons, duplicates and supersets, then splits
/// into components. `None` if some constraint is already fully present.
fn simplify_vec<P: Probability>(mut cons: Vec<Constraint>, q: &P) -> Option<(P, Vec<Vec<Constraint>>)> {
    let mut factor = P::one();
    loop {
        if cons.iter().any(|c| c.is_empty()) {
            return None;
        }
        let mut singles: Vec<u32> = cons.iter().filter(|c| c.len() == 1).map(|c| c[0]).collect();
        if singles.is_empty() {
            break;
        }
        singles.sort_unstable();
        singles.dedup();
        factor = factor * q.powu(singles.len());
        cons.retain(|c| !c.iter().any(|e| singles.binary_search(e).is_ok()));
    }
    Some((factor, split_components(drop_supersets(cons))))
}

/// Removes duplicate constraints and those containing another one.
fn drop_supersets(mut cons: Vec<Constraint>) -> Vec<Constraint> {
    cons.sort_unstable_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    cons.dedup();
    let mut kept: Vec<Constraint> = Vec::with_capacity(cons.len());
    for c in cons {
        if !kept.iter().any(|k| is_subset(k, &c)) {
            kept.push(c);
        }
    }
    kept
}

fn is_subset(small: &[u32], big: &[u32]) -> bool {
    if small.len() > big.len() {
        return false;
    }
    let mut j = 0;
    for &x in small {
        while j < big.len() && big[j] < x {
            j += 1;
        }
        if j == big.len() || big[j] != x {
            return false;
        }
        j += 1;
    }
    true
}

/// Groups constraints into clusters sharing edges; each group is sorted.
fn split_components(cons: Vec<Constraint>) -> Vec<Vec<Constraint>> {
    if cons.len() <= 1 {
        return if cons.is_empty() { Vec::new() } else { vec![cons] };
    }
    let mut dsu = crate::hypergraph::Dsu::new(cons.len());
    let mut owner: HashMap<u32, usize> = HashMap::default();
    for (i, c) in cons.iter().enumerate() {
        for &e in c {
            match owner.get(&e) {
                Some(&j) => {
                    dsu.union(i, j);
                }
                None => {
                    owner.insert(e, i);
                }
            }
        }
    }
    let mut groups: HashMap<usize, Vec<Constraint>> = HashMap::default();
    for (i, c) in cons.into_iter().enumerate() {
        groups.entry(dsu.find(i)).or_default().push(c);
    }
    let mut out: Vec<Vec<Constraint>> = groups.into_values().collect();
    for g in &mut out {
        g.sort_unstable();
    }
    out.sort_unstable();
    out
}

/// Harris lower bound and disjoint-packing upper bound for an antichain.
fn harris_vec<P: Probability>(comp: &[Constraint], powers: &PowerTable<P>) -> Interval<P> {
    let mut lo = P::one();
    let mut hi = P::one();
    let mut used: Vec<u32> = Vec::new();
    let mut order: Vec<&Constraint> = comp.iter().collect();
    order.sort_by_key(|c| c.len());
    for c in order {
        let f = powers.get(c.len()).complement();
        lo = lo * f.clone();
        if c.iter().all(|e| used.binary_search(e).is_err()) {
            hi = hi * f;
            for &e in c {
                let at = used.binary_search(&e).unwrap_err();
                used.insert(at, e);
            }
        }
    }
    Interval { lo, hi, exact: false }
}

/// `Σ_k c_k p^k` with the positive and negative parts summed separately.
fn signed_sum<P: Probability>(by_size: &[i64], powers: &PowerTable<P>) -> P {
    let mut pos = P::zero();
    let mut neg = P::zero();
    for (size, &count) in by_size.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let term = powers.get(size) * P::from_i64(count.abs()).expect("small count");
        if count > 0 {
            pos = pos + term;
        } else {
            neg = neg + term;
        }
    }
    pos - neg
}

#[inline]
fn is_zero<const W: usize>(a: &[u64; W]) -> bool {
    a.iter().all(|&w| w == 0)
}

#[inline]
fn pop<const W: usize>(a: &[u64; W]) -> usize {
    a.iter().map(|w| w.count_ones() as usize).sum()
}

#[inline]
fn meets<const W: usize>(a: &[u64; W], b: &[u64; W]) -> bool {
    a.iter().zip(b).any(|(x, y)| x & y != 0)
}

#[inline]
fn within<const W: usize>(a: &[u64; W], b: &[u64; W]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

#[inline]
fn or<const W: usize>(a: &[u64; W], b: &[u64; W]) -> [u64; W] {
    std::array::from_fn(|i| a[i] | b[i])
}

struct BitCounter<'a, P, const W: usize> {
    p: &'a P,
    q: &'a P,
    powers: &'a PowerTable<P>,
    memo: &'a mut HashMap<Vec<u64>, P>,
    budget: &'a mut Budget,
    scratch: Vec<[u64; W]>,
}

impl<P: Probability, const W: usize> BitCounter<'_, P, W> {
    /// Weight of `fresh ∪ old`, where `old` is an antichain without
    /// singletons and `fresh` holds constraints that just lost an edge.
    fn weight(&mut self, mut fresh: Vec<[u64; W]>, mut old: Vec<[u64; W]>) -> Result<Interval<P>> {
        if fresh.iter().any(is_zero) {
            return Ok(Interval::point(P::zero()));
        }
        let mut factor = P::one();
        // forced-absent edges only delete constraints, so one pass suffices
        let mut singles = [0u64; W];
        for c in &fresh {
            if pop(c) == 1 {
                singles = or(&singles, c);
            }
        }
        if !is_zero(&singles) {
            factor = factor * self.q.powu(pop(&singles));
            fresh.retain(|c| !meets(c, &singles));
            old.retain(|c| !meets(c, &singles));
        }
        // a shrunk constraint can only duplicate another shrunk one or sit
        // inside an old one
        fresh.sort_unstable();
        fresh.dedup();
        if !fresh.is_empty() {
            old.retain(|d| !fresh.iter().any(|s| within(s, d)));
        }
        let mut kept = fresh;
        kept.append(&mut old);
        let mut total = Interval::point(factor);
        while let Some(first) = kept.pop() {
            let mut span = first;
            let mut group = vec![first];
            loop {
                let before = group.len();
                kept.retain(|c| {
                    if meets(c, &span) {
                        span = or(&span, c);
                        group.push(*c);
                        false
                    } else {
                        true
                    }
                });
                if group.len() == before {
                    break;
                }
            }
            total = total.mul(self.component(group)?);
        }
        Ok(total)
    }

    fn component(&mut self, mut comp: Vec<[u64; W]>) -> Result<Interval<P>> {
        if comp.len() == 1 {
            return Ok(Interval::point(self.powers.get(pop(&comp[0])).complement()));
        }
        comp.sort_unstable();
        let key: Vec<u64> = comp.iter().flatten().copied().collect();
        if let Some(v) = self.memo.get(&key) {
            return Ok(Interval::point(v.clone()));
        }
        if !self.budget.spend()? {
            return Ok(self.harris(&comp));
        }
        let value = if comp.len() <= INCLUSION_EXCLUSION_LIMIT {
            // unions of all constraint subsets, each built from its prefix
            let mut by_size = vec![0i64; 64 * W + 1];
            let unions = &mut self.scratch;
            unions.clear();
            unions.push([0u64; W]);
            by_size[0] = 1;
            for mask in 1usize..1 << comp.len() {
                let u = or(&unions[mask & (mask - 1)], &comp[mask.trailing_zeros() as usize]);
                unions.push(u);
                by_size[pop(&u)] += if mask.count_ones() % 2 == 0 { 1 } else { -1 };
            }
            Interval::point(signed_sum(&by_size, self.powers))
        } else {
            let mut counts = vec![0u32; 64 * W];
            for c in &comp {
                let score = (1u32 << (16 - pop(c).min(16))) * 2 / 3 + (1u32 << (15 - pop(c).min(15)));
                for (w, &word) in c.iter().enumerate() {
                    let mut x = word;
                    while x != 0 {
                        counts[w * 64 + x.trailing_zeros() as usize] += score;
                        x &= x - 1;
                    }
                }
            }
            let best = (0..64 * W).max_by_key(|&i| (counts[i], std::cmp::Reverse(i))).expect("W > 0");
            let mut bit = [0u64; W];
            bit[best / 64] = 1 << (best % 64);
            let (with, same): (Vec<[u64; W]>, Vec<[u64; W]>) = comp.iter().partition(|c| meets(c, &bit));
            let with: Vec<[u64; W]> = with.iter().map(|c| std::array::from_fn(|i| c[i] & !bit[i])).collect();
            let w1 = self.weight(with, same.clone())?;
            let w0 = self.weight(Vec::new(), same)?;
            Interval::mix(self.p, w1, self.q, w0)
        };
        if value.exact && key.len() <= MEMO_KEY_LIMIT {
            self.memo.insert(key, value.lo.clone());
        }
        Ok(value)
    }

    fn harris(&self, comp: &[[u64; W]]) -> Interval<P> {
        let mut lo = P::one();
        let mut hi = P::one();
        let mut used = [0u64; W];
        let mut order: Vec<&[u64; W]> = comp.iter().collect();
        order.sort_by_key(|c| pop(c));
        for c in order {
            let f = self.powers.get(pop(c)).complement();
            lo = lo * f.clone();
            if !meets(c, &used) {
                hi = hi * f;
                used = or(&used, c);
            }
        }
        Interval { lo, hi, exact: false }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::{BigInt, BigRational};
    use proptest::prelude::*;

    fn brute(p: &BigRational, cons: &[Vec<u32>], universe: u32) -> BigRational {
        let mut total = BigRational::from_integer(BigInt::from(0));
        let q = BigRational::from_integer(BigInt::from(1)) - p;
        for mask in 0u32..(1 << universe) {
            if cons.iter().any(|c| c.iter().all(|e| mask >> e & 1 == 1)) {
                continue;
            }
            let k = mask.count_ones() as usize;
            total += num::pow::pow(p.clone(), k) * num::pow::pow(q.clone(), universe as usize - k);
        }
        total
    }

    fn families(universe: u32, max: usize) -> impl Strategy<Value = Vec<Vec<u32>>> {
        proptest::collection::vec(proptest::sample::subsequence((0..universe).collect::<Vec<_>>(), 1..=5), 0..max)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn matches_enumeration(pn in 1i64..10, cons in families(13, 24)) {
            let p = BigRational::new(BigInt::from(pn), BigInt::from(10));
            let expected = brute(&p, &cons, 13);
            let mut global = Counter::new(p.clone(), 13);
            prop_assert_eq!(global.weight(cons.clone(), &mut Budget::hard(u64::MAX)).unwrap(), expected.clone());
            let mut relabeled = Counter::new(p.clone(), 10_000);
            prop_assert_eq!(relabeled.weight(cons.clone(), &mut Budget::hard(u64::MAX)).unwrap(), expected);
        }

        #[test]
        fn soft_budgets_enclose_the_value(pn in 1i64..10, cons in families(12, 30), nodes in 0u64..12) {
            let p = BigRational::new(BigInt::from(pn), BigInt::from(10));
            let expected = brute(&p, &cons, 12);
            let mut c = Counter::new(p.clone(), 12);
            let iv = c.weight_interval(cons.clone(), &mut Budget::soft(nodes)).unwrap();
            prop_assert!(iv.lo <= expected && expected <= iv.hi);
            if iv.exact {
                prop_assert_eq!(iv.lo, expected);
            }
        }
    }

    #[test]
    fn budget_is_reported() {
        let cons: Vec<Vec<u32>> = (0..40u32).map(|i| vec![i, i + 1, i + 2]).collect();
        let mut c = Counter::new(0.5f64, 42);
        let err = c.weight(cons, &mut Budget::hard(3)).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn large_soft_budget_is_exact() {
        let cons: Vec<Vec<u32>> = (0..40u32).map(|i| vec![i, i + 1, i + 2]).collect();
        let w = Counter::new(0.5f64, 42).weight(cons.clone(), &mut Budget::hard(u64::MAX)).unwrap();
        let iv = Counter::new(0.5f64, 42).weight_interval(cons.clone(), &mut Budget::soft(1 << 20)).unwrap();
        assert!(iv.exact && iv.lo == w);
        let rough = Counter::new(0.5f64, 42).weight_interval(cons, &mut Budget::soft(2)).unwrap();
        assert!(!rough.exact && rough.lo <= w && w <= rough.hi);
    }
}
