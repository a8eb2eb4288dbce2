//! Scalar abstraction for probability-valued computations.

use std::fmt::Debug;

use num::{BigRational, FromPrimitive, Num, ToPrimitive};

/// A probability scalar: `f64`/`f32` for simulation, [`BigRational`] for
/// exact checks.
pub trait Probability:
    Clone + PartialOrd + Debug + Num + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Converts an `f64` into this scalar. Rationals convert exactly.
    fn from_f64_lossless(x: f64) -> Self {
        Self::from_f64(x).expect("finite probability")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn complement(&self) -> Self {
        Self::one() - self.clone()
    }

    /// `self^k` by repeated squaring.
    fn powu(&self, k: usize) -> Self {
        num::pow::pow(self.clone(), k)
    }

    fn is_exactly_zero(&self) -> bool {
        self.is_zero()
    }
}

impl Probability for f64 {}
impl Probability for f32 {}
impl Probability for BigRational {}

/// Table of `p^k` for `k` up to a fixed bound.
#[derive(Clone, Debug)]
pub struct PowerTable<P> {
    powers: Vec<P>,
}

impl<P: Probability> PowerTable<P> {
    pub fn new(p: &P, max: usize) -> Self {
        let mut powers = Vec::with_capacity(max + 1);
        let mut acc = P::one();
        for _ in 0..=max {
            powers.push(acc.clone());
            acc = acc * p.clone();
        }
        Self { powers }
    }

    pub fn get(&self, k: usize) -> P {
        match self.powers.get(k) {
            Some(v) => v.clone(),
            None => {
                let last = self.powers.len() - 1;
                self.powers[last].clone() * self.powers[1].powu(k - last)
            }
        }
    }
}

impl<P: Probability> Default for PowerTable<P> {
    fn default() -> Self {
        Self { powers: vec![P::one(), P::zero()] }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::{BigInt, One};

    #[test]
    fn power_table_extends_past_its_length() {
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let t = PowerTable::new(&half, 3);
        assert_eq!(t.get(5), BigRational::new(BigInt::from(1), BigInt::from(32)));
        assert_eq!(t.get(0), BigRational::one());
    }

    #[test]
    fn rational_from_f64_is_exact() {
        let x = BigRational::from_f64_lossless(0.375);
        assert_eq!(x, BigRational::new(BigInt::from(3), BigInt::from(8)));
    }
}
