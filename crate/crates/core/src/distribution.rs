//! Sorted probability distributions, entropy, and the `(N, M, π)` geometry.

use alloc::vec::Vec;
use core::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::math;

/// Default tolerance for normalization, ordering and bound checks.
pub const DEFAULT_EPS: f64 = 1e-9;

/// Upper limit on the number of states a dense distribution may hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub max_states: usize,
    pub eps: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_states: 10_000_000,
            eps: DEFAULT_EPS,
        }
    }
}

/// A probability vector sorted in non-increasing order.
///
/// `original_index[i]` is the input position of the `i`-th largest entry, so
/// the distribution can always be mapped back to object ids.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedDistribution {
    probs: Vec<f64>,
    original_index: Vec<usize>,
}

impl SortedDistribution {
    /// Wraps an already sorted, normalized vector. The permutation is the
    /// identity.
    pub fn from_sorted(probs: Vec<f64>, eps: f64) -> Result<Self> {
        validate_sorted(&probs, eps)?;
        let original_index = (0..probs.len()).collect();
        Ok(SortedDistribution {
            probs,
            original_index,
        })
    }

    pub(crate) fn from_parts(
        probs: Vec<f64>,
        original_index: Vec<usize>,
        eps: f64,
    ) -> Result<Self> {
        debug_assert_eq!(probs.len(), original_index.len());
        validate_sorted(&probs, eps)?;
        Ok(SortedDistribution {
            probs,
            original_index,
        })
    }

    /// Uniform distribution over `n` states.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        Self::from_sorted(alloc::vec![1.0 / n as f64; n], DEFAULT_EPS)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn original_index(&self) -> &[usize] {
        &self.original_index
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Probabilities back in input order.
    pub fn in_input_order(&self) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.probs.len()];
        for (p, &idx) in self.probs.iter().zip(&self.original_index) {
            out[idx] = *p;
        }
        out
    }

    pub fn entropy(&self) -> EntropyValue {
        entropy(self)
    }

    pub fn tail_probability(&self, m: usize) -> Result<f64> {
        tail_probability(self, m)
    }
}

fn validate_sorted(probs: &[f64], eps: f64) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::Empty);
    }
    for (index, &value) in probs.iter().enumerate() {
        if !value.is_finite() || value < -eps {
            return Err(Error::InvalidEntry { index, value });
        }
    }
    if let Some(index) = probs.windows(2).position(|w| w[1] > w[0] + eps) {
        return Err(Error::Unsorted { index: index + 1 });
    }
    let sum = math::sum(probs.iter().copied());
    if (sum - 1.0).abs() > eps {
        return Err(Error::NotNormalized { sum, eps });
    }
    Ok(())
}

/// Normalizes non-negative weights `q(a_i)` into `p(a_i) = q(a_i) / Σ q` and
/// sorts them in non-increasing order. Ties keep input order.
pub fn make_distribution(raw: &[f64]) -> Result<SortedDistribution> {
    make_distribution_with(raw, &Limits::default())
}

pub fn make_distribution_with(raw: &[f64], limits: &Limits) -> Result<SortedDistribution> {
    if raw.is_empty() {
        return Err(Error::Empty);
    }
    if raw.len() > limits.max_states {
        return Err(Error::TooLarge {
            what: "number of states",
            size: raw.len() as u128,
            cap: limits.max_states as u128,
        });
    }
    for (index, &value) in raw.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidEntry { index, value });
        }
    }
    let total = math::sum(raw.iter().copied());
    if total <= 0.0 {
        return Err(Error::AllZero);
    }
    let mut order: Vec<usize> = (0..raw.len()).collect();
    // slice::sort_by is stable, so equal weights keep their input order.
    order.sort_by(|&a, &b| raw[b].total_cmp(&raw[a]));
    let probs = order.iter().map(|&i| raw[i] / total).collect();
    SortedDistribution::from_parts(probs, order, limits.eps)
}

/// Entropy in bits.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EntropyValue(pub f64);

impl EntropyValue {
    pub fn bits(self) -> f64 {
        self.0
    }
}

/// Base-2 Shannon entropy. Entries at or below `1e-15` contribute nothing.
pub fn entropy(d: &SortedDistribution) -> EntropyValue {
    EntropyValue(entropy_of(d.probs()))
}

/// Entropy of a raw slice, for callers that hold probabilities outside a
/// [`SortedDistribution`].
pub fn entropy_of(probs: &[f64]) -> f64 {
    let h = math::sum(probs.iter().map(|&p| math::neg_x_log2_x(p)));
    h.max(0.0)
}

/// Error probability of the optimal strategy: mass of the `N − M` smallest
/// entries.
pub fn tail_probability(d: &SortedDistribution, m: usize) -> Result<f64> {
    let n = d.len();
    if m == 0 || m > n {
        return Err(Error::BadM { m, n });
    }
    Ok(math::sum(d.probs()[m..].iter().copied()))
}

/// The range of tail masses any sorted distribution over `n` states can have
/// beyond its first `m` entries: `[0, (N − M)/N]`.
pub fn feasible_pi_range(n: usize, m: usize) -> Result<RangeInclusive<f64>> {
    if m == 0 || m > n {
        return Err(Error::BadM { m, n });
    }
    Ok(0.0..=max_pi(n, m))
}

#[inline]
pub(crate) fn max_pi(n: usize, m: usize) -> f64 {
    (n - m) as f64 / n as f64
}

/// The triple `(N, M, π)` describing a selection problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemShape {
    n: usize,
    m: usize,
    pi: f64,
}

impl SystemShape {
    /// Validates `1 ≤ M ≤ N` and `0 ≤ π ≤ (N − M)/N`. Values of `π` within
    /// [`DEFAULT_EPS`] outside the interval are clamped onto it.
    pub fn new(n: usize, m: usize, pi: f64) -> Result<Self> {
        Self::with_eps(n, m, pi, DEFAULT_EPS)
    }

    pub fn with_eps(n: usize, m: usize, pi: f64, eps: f64) -> Result<Self> {
        if m == 0 || m > n {
            return Err(Error::BadM { m, n });
        }
        let hi = max_pi(n, m);
        if !pi.is_finite() || pi < -eps || pi > hi + eps {
            return Err(Error::Infeasible { n, m, pi });
        }
        Ok(SystemShape {
            n,
            m,
            pi: pi.clamp(0.0, hi),
        })
    }

    /// Shape of an observed distribution with `m` selected objects.
    pub fn of(d: &SortedDistribution, m: usize) -> Result<Self> {
        let pi = tail_probability(d, m)?;
        Self::new(d.len(), m, pi)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn pi(&self) -> f64 {
        self.pi
    }

    /// Mean of the head entries, `(1 − π)/M`.
    pub fn head_mean(&self) -> f64 {
        (1.0 - self.pi) / self.m as f64
    }

    /// Mean of the tail entries, `π/(N − M)`; zero when `M = N`.
    pub fn tail_mean(&self) -> f64 {
        if self.m == self.n {
            0.0
        } else {
            self.pi / (self.n - self.m) as f64
        }
    }

    pub fn max_pi(&self) -> f64 {
        max_pi(self.n, self.m)
    }

    /// Number of interior candidates `y = ⌈(N − M − Nπ)/(1 − π)⌉`, clamped to
    /// `[0, N − M]`.
    pub fn interior_count(&self) -> usize {
        let tail_slots = self.n - self.m;
        let x = (tail_slots as f64 - self.n as f64 * self.pi) / (1.0 - self.pi);
        let y = math::snapped_ceil(x);
        if y <= 0.0 {
            0
        } else {
            (y as usize).min(tail_slots)
        }
    }
}
