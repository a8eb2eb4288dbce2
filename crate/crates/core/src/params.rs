//! Edge counts, the critical window `[π−, π+]`, the matching graph
//! probabilities `p±`, the hat-view probability `π′` and the sharp
//! threshold `p0`.
//!
//! All logarithms are natural.

use num::{Float, FromPrimitive};
use serde::{Deserialize, Serialize};

use crate::combinatorics::binomial_checked;
use crate::error::{Error, Result};
use crate::pattern::Pattern;

pub const DEFAULT_DELTA: f64 = 0.1;
pub const DEFAULT_EPSILON: f64 = 0.05;

/// Choice of the slowly growing window function `g(n)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GMode {
    /// `max(1, ln n / (ln ln n)²)`.
    #[default]
    Default,
    /// `max(1, ln ln n)`.
    LogLog,
    /// `g ≡ 1`; violates `g → ∞` but is handy for fixed-window checks.
    Unit,
}

impl GMode {
    pub const NAMES: [&'static str; 3] = ["default", "log-log", "unit"];

    pub fn name(self) -> &'static str {
        match self {
            GMode::Default => "default",
            GMode::LogLog => "log-log",
            GMode::Unit => "unit",
        }
    }

    pub fn eval<T: Float + FromPrimitive>(self, n: usize) -> T {
        let one = T::one();
        let ln_n = T::from_usize(n).expect("n fits").ln();
        match self {
            GMode::Default => {
                let ll = ln_n.ln();
                (ln_n / (ll * ll)).max(one)
            }
            GMode::LogLog => ln_n.ln().max(one),
            GMode::Unit => one,
        }
    }
}

impl std::str::FromStr for GMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(GMode::Default),
            "log-log" => Ok(GMode::LogLog),
            "unit" => Ok(GMode::Unit),
            other => Err(Error::InvalidParameters(format!(
                "unknown g mode {other:?}; expected one of {:?}",
                GMode::NAMES
            ))),
        }
    }
}

/// `g(n)` under the default mode.
pub fn g<T: Float + FromPrimitive>(n: usize) -> T {
    GMode::Default.eval(n)
}

/// `M = C(n, r)·r!/aut(F)`, the number of copies of `F` on `[n]`.
pub fn count_f_edges(n: usize, pattern: &Pattern) -> Result<u128> {
    binomial_checked(n as u64, pattern.r() as u64)?
        .checked_mul(pattern.copies_per_vertex_set() as u128)
        .ok_or(Error::Overflow("M"))
}

/// `N = C(n, u)`.
pub fn count_u_edges(n: usize, u: usize) -> Result<u128> {
    binomial_checked(n as u64, u as u64)
}

/// `π′ = 1 − (1 − π)^{r!/aut(F)}`.
pub fn pi_prime<T: Float + FromPrimitive>(pi: T, pattern: &Pattern) -> T {
    let k = pattern.copies_per_vertex_set() as i32;
    T::one() - (T::one() - pi).powi(k)
}

/// `p0 = ((aut(F)/r)·n^{−r+1}·ln n)^{1/s}`.
pub fn p0<T: Float + FromPrimitive>(n: usize, pattern: &Pattern) -> T {
    let f = |x: f64| T::from_f64(x).expect("finite");
    let nt = T::from_usize(n).expect("n fits");
    let base = f(pattern.aut() as f64) / f(pattern.r() as f64) * nt.powi(1 - pattern.r() as i32) * nt.ln();
    base.powf(T::one() / f(pattern.s() as f64))
}

/// Window parameters for one `(n, F)`.
#[derive(Clone, Debug)]
pub struct ParamSet<T> {
    pub n: usize,
    pub pattern: Pattern,
    pub delta: T,
    pub epsilon: T,
    pub g_mode: GMode,
}

impl<T: Float + FromPrimitive> ParamSet<T> {
    pub fn new(n: usize, pattern: Pattern, delta: T, epsilon: T, g_mode: GMode) -> Result<Self> {
        if n < pattern.r() {
            return Err(Error::InvalidParameters(format!("n = {n} < r = {}", pattern.r())));
        }
        if n < 3 {
            return Err(Error::InvalidParameters("g(n) needs n >= 3".into()));
        }
        let unit = |x: T| x > T::zero() && x < T::one();
        if !unit(delta) || !unit(epsilon) {
            return Err(Error::InvalidParameters("delta and epsilon must lie in (0, 1)".into()));
        }
        Ok(Self { n, pattern, delta, epsilon, g_mode })
    }

    pub fn with_defaults(n: usize, pattern: Pattern) -> Result<Self> {
        let d = T::from_f64(DEFAULT_DELTA).expect("finite");
        let e = T::from_f64(DEFAULT_EPSILON).expect("finite");
        Self::new(n, pattern, d, e, GMode::Default)
    }

    pub fn g(&self) -> T {
        self.g_mode.eval(self.n)
    }

    /// `M` as an integer.
    pub fn m(&self) -> Result<u128> {
        count_f_edges(self.n, &self.pattern)
    }

    /// `N` as an integer.
    pub fn big_n(&self) -> Result<u128> {
        count_u_edges(self.n, self.pattern.u())
    }

    fn window_scale(&self) -> Result<T> {
        let c = binomial_checked(self.n as u64 - 1, self.pattern.r() as u64 - 1)?;
        Ok(T::one()
            / T::from_u64(self.pattern.copies_per_vertex_set()).expect("finite")
            / T::from_u128(c).ok_or(Error::Overflow("C(n-1, r-1)"))?)
    }

    /// `π+` alone; defined even where `ln n ≤ g(n)`.
    pub fn pi_plus(&self) -> Result<T> {
        let ln_n = T::from_usize(self.n).expect("n fits").ln();
        let hi = self.window_scale()? * (ln_n + self.g());
        if hi >= T::one() {
            return Err(Error::InvalidParameters(format!("pi_plus >= 1 at n = {}", self.n)));
        }
        Ok(hi)
    }

    /// `p+` alone; see [`pi_plus`](Self::pi_plus).
    pub fn p_plus(&self) -> Result<T> {
        let p = self.p_of_pi(self.pi_plus()?);
        if p >= T::one() {
            return Err(Error::InvalidParameters(format!("p_plus >= 1 at n = {}", self.n)));
        }
        Ok(p)
    }

    /// `(π−, π+)` with `π± = aut/r!·(ln n ± g)/C(n−1, r−1)`.
    pub fn pi_pm(&self) -> Result<(T, T)> {
        let scale = self.window_scale()?;
        let ln_n = T::from_usize(self.n).expect("n fits").ln();
        let g = self.g();
        let (lo, hi) = (scale * (ln_n - g), scale * (ln_n + g));
        if lo <= T::zero() {
            return Err(Error::InvalidParameters(format!(
                "pi_minus <= 0 at n = {}: ln n does not exceed g(n)",
                self.n
            )));
        }
        if hi >= T::one() {
            return Err(Error::InvalidParameters(format!("pi_plus >= 1 at n = {}", self.n)));
        }
        Ok((lo, hi))
    }

    /// Maps `π` to `p = (π/(1 − n^{−δ}))^{1/s}`.
    pub fn p_of_pi(&self, pi: T) -> T {
        let nt = T::from_usize(self.n).expect("n fits");
        let s = T::from_usize(self.pattern.s()).expect("s fits");
        (pi / (T::one() - nt.powf(-self.delta))).powf(T::one() / s)
    }

    /// `(p−, p+)`.
    pub fn p_pm(&self) -> Result<(T, T)> {
        let (lo, hi) = self.pi_pm()?;
        let (plo, phi) = (self.p_of_pi(lo), self.p_of_pi(hi));
        if phi >= T::one() {
            return Err(Error::InvalidParameters(format!("p_plus >= 1 at n = {}", self.n)));
        }
        Ok((plo, phi))
    }

    /// Expected F-edge counts `(M·π−, M·π+)` at the window ends.
    pub fn window_edge_counts(&self) -> Result<(T, T)> {
        let m = T::from_u128(self.m()?).ok_or(Error::Overflow("M"))?;
        let (lo, hi) = self.pi_pm()?;
        Ok((m * lo, m * hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn edge_counts() {
        assert_eq!(count_f_edges(10, &Pattern::complete_graph(4).unwrap()).unwrap(), 210);
        assert_eq!(count_f_edges(10, &Pattern::cycle(4).unwrap()).unwrap(), 630);
        assert_eq!(count_u_edges(10, 2).unwrap(), 45);
    }

    #[test]
    fn g_values() {
        assert!(g::<f64>(15) >= 1.0);
        assert!(g::<f64>(1 << 20) >= 1.0);
        let big = g::<f64>(1_000_000);
        let ln = (1e6f64).ln();
        assert!(close(big, ln / ln.ln().powi(2), 1e-12));
        assert!((big - 2.0).abs() < 0.05);
        // g/(ln n/ln ln n) shrinks over n = 10^3..10^12
        let ratio = |n: f64| {
            let gv = (n.ln() / n.ln().ln().powi(2)).max(1.0);
            gv / (n.ln() / n.ln().ln())
        };
        let rs: Vec<f64> = (3..=12).map(|k| ratio(10f64.powi(k))).collect();
        assert!(rs.windows(2).all(|w| w[1] < w[0]));
        // x/(ln x)² with x = ln n only increases once ln ln n ≥ 2
        let mut prev = 0.0;
        for n in 1619..20_000 {
            let v = g::<f64>(n);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn window_probabilities() {
        let k4 = Pattern::complete_graph(4).unwrap();
        let ps = ParamSet::<f64>::new(100, k4.clone(), 0.1, 0.05, GMode::Unit).unwrap();
        let (lo, hi) = ps.pi_pm().unwrap();
        assert!(close(hi, (100f64.ln() + 1.0) / 156_849.0, 1e-12));
        assert!(close(hi - lo, 2.0 / 156_849.0, 1e-9));
        let c4 = ParamSet::<f64>::new(100, Pattern::cycle(4).unwrap(), 0.1, 0.05, GMode::Unit).unwrap();
        let (clo, chi) = c4.pi_pm().unwrap();
        assert!(close(chi * 3.0, hi, 1e-12) && close(clo * 3.0, lo, 1e-12));
        let (plo, phi) = ps.p_pm().unwrap();
        assert!(phi > plo);
        let shrink = 1.0 - 100f64.powf(-0.1);
        assert!(close(phi.powi(6) * shrink, hi, 1e-12));
        assert!(close(phi, (hi / shrink).powf(1.0 / 6.0), 1e-12));
    }

    #[test]
    fn window_needs_ln_n_above_g() {
        let k4 = Pattern::complete_graph(4).unwrap();
        assert!(ParamSet::<f64>::with_defaults(3, k4.clone()).is_err());
        assert!(ParamSet::<f64>::new(4, k4.clone(), 0.1, 0.05, GMode::Unit).unwrap().pi_pm().is_err());
        // g(12) ≈ 3.0 exceeds ln 12, yet the upper end is still defined
        let twelve = ParamSet::<f64>::with_defaults(12, k4).unwrap();
        assert!(twelve.pi_pm().is_err());
        let hi = twelve.pi_plus().unwrap();
        assert!(close(hi, (12f64.ln() + twelve.g()) / 165.0, 1e-12));
        assert!((twelve.p_plus().unwrap() - 0.73).abs() < 0.01);
    }

    #[test]
    fn pi_prime_values() {
        let k4 = Pattern::complete_graph(4).unwrap();
        assert!(close(pi_prime(0.3f64, &k4), 0.3, 1e-15));
        let c4 = Pattern::cycle(4).unwrap();
        assert!(close(pi_prime(0.01f64, &c4), 1.0 - 0.99f64.powi(3), 1e-14));
        assert_eq!(pi_prime(0.0f64, &c4), 0.0);
        assert_eq!(pi_prime(1.0f64, &c4), 1.0);
    }

    #[test]
    fn p0_inverts() {
        let k4 = Pattern::complete_graph(4).unwrap();
        let n = 10_000usize;
        let v: f64 = p0(n, &k4);
        assert!(close(v, (6e-12 * (n as f64).ln()).powf(1.0 / 6.0), 1e-12));
        assert!(close(v.powi(6) / 6.0 * (n as f64).powi(3), (n as f64).ln(), 1e-12));
        let c4 = Pattern::cycle(4).unwrap();
        let w: f64 = p0(50, &c4);
        assert!(close(w.powi(4) / 2.0 * 50f64.powi(3), 50f64.ln(), 1e-12));
    }

    #[test]
    fn single_precision_agrees() {
        let k4 = Pattern::complete_graph(4).unwrap();
        let a = ParamSet::<f64>::with_defaults(40, k4.clone()).unwrap().p_pm().unwrap();
        let b = ParamSet::<f32>::with_defaults(40, k4).unwrap().p_pm().unwrap();
        assert!(close(b.1 as f64, a.1, 1e-5));
    }

    #[test]
    fn m_pi_plus_is_n_log_over_r() {
        for n in [50usize, 80, 200] {
            let ps = ParamSet::<f64>::with_defaults(n, Pattern::complete_graph(4).unwrap()).unwrap();
            let (_, hi) = ps.window_edge_counts().unwrap();
            let target = n as f64 * ((n as f64).ln() + ps.g()) / 4.0;
            assert!(hi >= target * (1.0 - 1.0 / n as f64) && hi <= target * (1.0 + 1.0 / n as f64));
        }
    }
}
