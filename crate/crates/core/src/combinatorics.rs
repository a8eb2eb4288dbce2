//! Binomial coefficients and colexicographic ranking of k-subsets.

use crate::error::{Error, Result};

/// Exact `C(n, k)`, or `None` on `u128` overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) after the multiplication
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

pub fn binomial_checked(n: u64, k: u64) -> Result<u128> {
    binomial(n, k).ok_or(Error::Overflow("binomial coefficient"))
}

/// `C(n, k)` as a float, for probability formulas.
pub fn binomial_f64(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn factorial(k: u64) -> Option<u128> {
    (1..=k as u128).try_fold(1u128, |acc, i| acc.checked_mul(i))
}

/// Colex ranking of sorted k-subsets of `[n]` into `0..C(n, k)`.
#[derive(Clone, Debug)]
pub struct SubsetIndexer {
    n: usize,
    k: usize,
    // table[j][v] = C(v, j)
    table: Vec<Vec<u64>>,
    total: u64,
}

impl SubsetIndexer {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        let total = binomial_checked(n as u64, k as u64)?;
        if total > u64::MAX as u128 {
            return Err(Error::Overflow("subset index"));
        }
        let table = (0..=k)
            .map(|j| (0..=n).map(|v| binomial(v as u64, j as u64).unwrap_or(0) as u64).collect())
            .collect();
        Ok(Self { n, k, table, total: total as u64 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of k-subsets.
    pub fn count(&self) -> u64 {
        self.total
    }

    /// Rank of a strictly increasing k-tuple.
    #[inline]
    pub fn rank(&self, sorted: &[u32]) -> u64 {
        debug_assert_eq!(sorted.len(), self.k);
        sorted
            .iter()
            .enumerate()
            .map(|(i, &v)| self.table[i + 1][v as usize])
            .sum()
    }

    /// Rank of an arbitrary ordering of k distinct vertices.
    #[inline]
    pub fn rank_unsorted(&self, verts: &[u32]) -> u64 {
        let mut buf = [0u32; 16];
        let buf = &mut buf[..verts.len()];
        buf.copy_from_slice(verts);
        buf.sort_unstable();
        self.rank(buf)
    }

    /// Inverse of [`rank`](Self::rank); writes the subset in increasing order.
    pub fn unrank(&self, mut rank: u64, out: &mut [u32]) {
        debug_assert_eq!(out.len(), self.k);
        let mut v = self.n;
        for j in (1..=self.k).rev() {
            // largest v with C(v, j) <= rank
            v -= 1;
            while self.table[j][v] > rank {
                v -= 1;
            }
            out[j - 1] = v as u32;
            rank -= self.table[j][v];
        }
    }

    pub fn unrank_vec(&self, rank: u64) -> Vec<u32> {
        let mut out = vec![0; self.k];
        self.unrank(rank, &mut out);
        out
    }
}

/// Calls `f` on every k-subset of `0..n` in lexicographic order.
pub fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[u32])) {
    if k > n {
        return;
    }
    let mut idx: Vec<u32> = (0..k as u32).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] as usize == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Calls `f` on every permutation of `0..n` (Heap's algorithm).
pub fn for_each_permutation(n: usize, mut f: impl FnMut(&[u32])) {
    let mut perm: Vec<u32> = (0..n as u32).collect();
    let mut c = vec![0usize; n];
    f(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            f(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_binomials() {
        assert_eq!(binomial(10, 4), Some(210));
        assert_eq!(binomial(10, 2), Some(45));
        assert_eq!(binomial(3, 5), Some(0));
        assert_eq!(binomial(99, 3), Some(156_849));
        assert_eq!(factorial(6), Some(720));
    }

    #[test]
    fn subsets_and_permutations_are_counted() {
        let mut count = 0;
        for_each_subset(7, 3, |_| count += 1);
        assert_eq!(count, 35);
        let mut count = 0;
        for_each_subset(4, 4, |s| {
            assert_eq!(s, &[0, 1, 2, 3]);
            count += 1
        });
        assert_eq!(count, 1);
        let mut seen = std::collections::HashSet::new();
        for_each_permutation(5, |p| {
            seen.insert(p.to_vec());
        });
        assert_eq!(seen.len(), 120);
    }

    #[test]
    fn colex_rank_is_a_bijection() {
        let ix = SubsetIndexer::new(9, 4).unwrap();
        let mut ranks = Vec::new();
        for_each_subset(9, 4, |s| {
            let r = ix.rank(s);
            assert_eq!(ix.unrank_vec(r), s);
            ranks.push(r);
        });
        ranks.sort_unstable();
        assert_eq!(ranks, (0..126).collect::<Vec<_>>());
    }

    proptest! {
        #[test]
        fn rank_unsorted_matches_sorted(mut v in proptest::sample::subsequence((0u32..30).collect::<Vec<_>>(), 3)) {
            let ix = SubsetIndexer::new(30, 3).unwrap();
            let sorted = v.clone();
            v.reverse();
            prop_assert_eq!(ix.rank_unsorted(&v), ix.rank(&sorted));
        }
    }
}
