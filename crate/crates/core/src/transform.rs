//! Reduction of a performance requirement `k > 1` to a single-object system.
//!
//! The `N` objects are replaced by composite objects, one per `k`-subset
//! ([`TransformKind::Unique`], draws without replacement) or per `k`-multiset
//! ([`TransformKind::Repeated`], independent draws). A composite is selected
//! when all of its members lie in the original selected set, which gives
//! `M′ = C(M, k)` or `M′ = C(M + k − 1, k)` selected composites.
//!
//! Object ids used here are positions in the sorted distribution (`0` is the
//! most probable object). [`Composite::ids`] maps them back to input ids.

use alloc::vec::Vec;

use itertools::Itertools;

use crate::bounds::{report_with, BoundOptions, BoundReport, TightInverter};
use crate::distribution::{entropy, SortedDistribution, DEFAULT_EPS};
use crate::error::{Error, Result};
use crate::math;

/// How the `k` evaluated objects relate to each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransformKind {
    /// `k` distinct objects, drawn without replacement.
    Unique,
    /// `k` independent draws that may repeat.
    Repeated,
}

impl TransformKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TransformKind::Unique => "unique",
            TransformKind::Repeated => "repeated",
        }
    }
}

/// Caps that keep the combinatorial blow-up in check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformLimits {
    pub max_composites: u128,
    pub max_unique_k: usize,
    pub max_repeated_k: usize,
}

impl Default for TransformLimits {
    fn default() -> Self {
        TransformLimits {
            max_composites: 2_000_000,
            max_unique_k: 8,
            max_repeated_k: 12,
        }
    }
}

/// One composite object of the transformed system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Composite {
    /// Member positions in the sorted source distribution, ascending.
    pub positions: Vec<usize>,
    /// Member ids in the caller's input order, ascending.
    pub ids: Vec<usize>,
    /// Every member is among the top `M` objects.
    pub in_selected_set: bool,
}

/// The system seen through a `k`-transform.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedSystem {
    pub kind: TransformKind,
    pub k: usize,
    pub n_prime: usize,
    pub m_prime: usize,
    /// Composite probabilities, sorted descending.
    pub dist: SortedDistribution,
    /// `composites[i]` describes `dist.probs()[i]`.
    pub composites: Vec<Composite>,
}

impl TransformedSystem {
    pub fn entropy_bits(&self) -> f64 {
        entropy(&self.dist).bits()
    }

    /// Error probability when the top `M` objects are selected: mass of composites with
    /// at least one member outside the top `M`.
    pub fn membership_pi(&self) -> f64 {
        math::sum(
            self.dist
                .probs()
                .iter()
                .zip(&self.composites)
                .filter(|(_, c)| !c.in_selected_set)
                .map(|(p, _)| *p),
        )
    }

    /// Error probability of the optimal selection over composites: mass beyond
    /// the `M′` most probable composites.
    pub fn optimal_pi(&self) -> f64 {
        math::sum(self.dist.probs()[self.m_prime..].iter().copied())
    }

    /// `true` when some composite outside the selected set is strictly more
    /// probable than one inside it, i.e. selecting the top `M` objects is not
    /// the same as selecting the top `M′` composites.
    pub fn selection_mismatch(&self, eps: f64) -> bool {
        let probs = self.dist.probs();
        let min_in = self
            .composites
            .iter()
            .zip(probs)
            .filter(|(c, _)| c.in_selected_set)
            .map(|(_, p)| *p)
            .fold(f64::INFINITY, f64::min);
        let max_out = self
            .composites
            .iter()
            .zip(probs)
            .filter(|(c, _)| !c.in_selected_set)
            .map(|(_, p)| *p)
            .fold(f64::NEG_INFINITY, f64::max);
        max_out > min_in + eps
    }

    /// Bounds for `(N′, M′, H′)`.
    pub fn bound_report(&self, opts: &BoundOptions) -> Result<BoundReport> {
        let inverter = TightInverter::with_options(self.n_prime, self.m_prime, opts)?;
        report_with(&inverter, self.entropy_bits(), self.k, self.kind.into())
    }
}

/// Probability of drawing the ordered tuple of distinct positions, one at a
/// time without replacement: `∏ p(a_t) / (1 − Σ_{s<t} p(a_s))`.
pub fn sequential_probability(d: &SortedDistribution, tuple: &[usize]) -> Result<f64> {
    let p = d.probs();
    let n = p.len();
    let mut seen = alloc::vec![false; n];
    for &id in tuple {
        if id >= n {
            return Err(Error::BadId { id, n });
        }
        if core::mem::replace(&mut seen[id], true) {
            return Err(Error::DuplicateId(id));
        }
    }
    let mut prob = 1.0;
    for (step, &id) in tuple.iter().enumerate() {
        // Summing the undrawn entries directly avoids cancellation in
        // `total - drawn` when little mass is left.
        let drawn = &tuple[..step];
        let remaining = math::sum(
            p.iter()
                .enumerate()
                .filter(|(i, _)| !drawn.contains(i))
                .map(|(_, &x)| x),
        );
        if p[id] > 0.0 {
            if remaining <= DEFAULT_EPS {
                return Err(Error::ZeroDenominator { step, remaining });
            }
            prob *= p[id] / remaining;
        } else {
            return Ok(0.0);
        }
    }
    Ok(prob)
}

fn check_k(n: usize, m: usize, k: usize) -> Result<()> {
    if m == 0 || m > n {
        return Err(Error::BadM { m, n });
    }
    if k == 0 || k > m {
        return Err(Error::BadK { k, m });
    }
    Ok(())
}

fn too_large(what: &'static str, size: Option<u128>, cap: u128) -> Result<u128> {
    match size {
        Some(s) if s <= cap => Ok(s),
        Some(s) => Err(Error::TooLarge { what, size: s, cap }),
        None => Err(Error::TooLarge {
            what,
            size: u128::MAX,
            cap,
        }),
    }
}

/// Transform over `k`-subsets. Each subset's probability sums the
/// sequential probabilities of its `k!` orderings, computed by a dynamic
/// program over the subset's `2^k` sub-subsets.
pub fn transform_unique(
    d: &SortedDistribution,
    m: usize,
    k: usize,
    limits: &TransformLimits,
) -> Result<TransformedSystem> {
    let n = d.len();
    check_k(n, m, k)?;
    if k > limits.max_unique_k {
        return Err(Error::TooLarge {
            what: "k (unique)",
            size: k as u128,
            cap: limits.max_unique_k as u128,
        });
    }
    let n_prime = too_large(
        "C(N, k)",
        math::binomial(n as u64, k as u64),
        limits.max_composites,
    )?;
    let support = d.probs().iter().filter(|&&p| p > 0.0).count();
    if support < k {
        return Err(Error::InsufficientSupport { support, k });
    }
    let p = d.probs();
    let mut members = Vec::with_capacity(n_prime as usize);
    let mut dp = alloc::vec![0.0f64; 1 << k];
    let mut mass = alloc::vec![0.0f64; 1 << k];
    for subset in (0..n).combinations(k) {
        let outside = math::sum(
            p.iter()
                .enumerate()
                .filter(|(i, _)| subset.binary_search(i).is_err())
                .map(|(_, &x)| x),
        );
        let prob = subset_probability(p, outside, &subset, &mut dp, &mut mass)?;
        members.push((subset, prob));
    }
    finish(d, m, k, TransformKind::Unique, members, n_prime as usize)
}

// dp[mask] = probability that the first |mask| draws are exactly the members
// in `mask`, in any order. `outside` is the mass of the entries not in
// `subset`, so the undrawn mass after `prev` is `outside + mass[full ^ prev]`.
fn subset_probability(
    p: &[f64],
    outside: f64,
    subset: &[usize],
    dp: &mut [f64],
    mass: &mut [f64],
) -> Result<f64> {
    let k = subset.len();
    let full = (1usize << k) - 1;
    mass[0] = 0.0;
    for mask in 1usize..=full {
        let low = mask.trailing_zeros() as usize;
        mass[mask] = mass[mask & (mask - 1)] + p[subset[low]];
    }
    dp[0] = 1.0;
    for mask in 1usize..=full {
        let mut acc = 0.0;
        for (bit, &id) in subset.iter().enumerate() {
            if mask & (1 << bit) == 0 {
                continue;
            }
            let prev = mask ^ (1 << bit);
            if dp[prev] == 0.0 || p[id] == 0.0 {
                continue;
            }
            let remaining = outside + mass[full ^ prev];
            if remaining <= DEFAULT_EPS {
                return Err(Error::ZeroDenominator {
                    step: prev.count_ones() as usize,
                    remaining,
                });
            }
            acc += dp[prev] * p[id] / remaining;
        }
        dp[mask] = acc;
    }
    Ok(dp[(1 << k) - 1])
}

/// Transform over `k`-multisets with multinomial probabilities
/// `k!/∏ m_a! · ∏ p(a)^{m_a}`.
pub fn transform_repeated(
    d: &SortedDistribution,
    m: usize,
    k: usize,
    limits: &TransformLimits,
) -> Result<TransformedSystem> {
    let n = d.len();
    check_k(n, m, k)?;
    if k > limits.max_repeated_k {
        return Err(Error::TooLarge {
            what: "k (repeated)",
            size: k as u128,
            cap: limits.max_repeated_k as u128,
        });
    }
    let n_prime = too_large(
        "C(N + k - 1, k)",
        math::multichoose(n as u64, k as u64),
        limits.max_composites,
    )?;
    let p = d.probs();
    let k_fact = math::factorial(k);
    let mut members = Vec::with_capacity(n_prime as usize);
    for multiset in (0..n).combinations_with_replacement(k) {
        let mut prob = k_fact;
        for (_, run) in &multiset.iter().chunk_by(|&&id| id) {
            let mut count = 0;
            for &id in run {
                count += 1;
                prob *= p[id] / count as f64;
            }
        }
        members.push((multiset, prob));
    }
    finish(d, m, k, TransformKind::Repeated, members, n_prime as usize)
}

/// Dispatches on `kind`.
pub fn transform(
    d: &SortedDistribution,
    m: usize,
    k: usize,
    kind: TransformKind,
    limits: &TransformLimits,
) -> Result<TransformedSystem> {
    match kind {
        TransformKind::Unique => transform_unique(d, m, k, limits),
        TransformKind::Repeated => transform_repeated(d, m, k, limits),
    }
}

fn finish(
    d: &SortedDistribution,
    m: usize,
    k: usize,
    kind: TransformKind,
    mut members: Vec<(Vec<usize>, f64)>,
    n_prime: usize,
) -> Result<TransformedSystem> {
    debug_assert_eq!(members.len(), n_prime);
    let mut order: Vec<usize> = (0..members.len()).collect();
    order.sort_by(|&a, &b| {
        members[b]
            .1
            .total_cmp(&members[a].1)
            .then_with(|| members[a].0.cmp(&members[b].0))
    });
    let probs: Vec<f64> = order.iter().map(|&i| members[i].1).collect();
    let total = math::sum(probs.iter().copied());
    if (total - 1.0).abs() > DEFAULT_EPS {
        return Err(Error::Numeric(alloc::format!(
            "{} transform lost mass: total {total}",
            kind.as_str()
        )));
    }
    let original = d.original_index();
    let mut m_prime = 0;
    let composites = order
        .iter()
        .map(|&i| {
            let positions = core::mem::take(&mut members[i].0);
            let mut ids: Vec<usize> = positions.iter().map(|&p| original[p]).collect();
            ids.sort_unstable();
            let in_selected_set = positions.iter().all(|&p| p < m);
            m_prime += usize::from(in_selected_set);
            Composite {
                positions,
                ids,
                in_selected_set,
            }
        })
        .collect();
    let dist = SortedDistribution::from_parts(probs, order, DEFAULT_EPS)?;
    Ok(TransformedSystem {
        kind,
        k,
        n_prime,
        m_prime,
        dist,
        composites,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::make_distribution;
    use alloc::vec;
    use proptest::prelude::*;

    fn dist(p: &[f64]) -> SortedDistribution {
        make_distribution(p).unwrap()
    }

    fn prob_of(sys: &TransformedSystem, positions: &[usize]) -> f64 {
        let i = sys
            .composites
            .iter()
            .position(|c| c.positions == positions)
            .unwrap();
        sys.dist.probs()[i]
    }

    #[test]
    fn sequential_examples() {
        let u = dist(&[1.0, 1.0, 1.0]);
        assert!((sequential_probability(&u, &[0, 1]).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        let d = dist(&[0.5, 0.3, 0.2]);
        assert!((sequential_probability(&d, &[0, 1]).unwrap() - 0.3).abs() < 1e-15);
        assert!((sequential_probability(&d, &[1, 0]).unwrap() - 0.3 * 0.5 / 0.7).abs() < 1e-15);
        assert_eq!(
            sequential_probability(&d, &[1, 1]),
            Err(Error::DuplicateId(1))
        );
        assert!(matches!(
            sequential_probability(&d, &[3]),
            Err(Error::BadId { .. })
        ));
    }

    #[test]
    fn zero_denominator() {
        let d = SortedDistribution::from_sorted(vec![1.0 - 1e-12, 1e-12], 1e-9).unwrap();
        assert!(matches!(
            sequential_probability(&d, &[0, 1]),
            Err(Error::ZeroDenominator { step: 1, .. })
        ));
    }

    #[test]
    fn unique_examples() {
        let sys =
            transform_unique(&dist(&[1.0, 1.0, 1.0]), 3, 2, &TransformLimits::default()).unwrap();
        assert_eq!(sys.n_prime, 3);
        assert!(sys
            .dist
            .probs()
            .iter()
            .all(|p| (p - 1.0 / 3.0).abs() < 1e-15));

        let d = dist(&[0.5, 0.3, 0.2]);
        let sys = transform_unique(&d, 2, 2, &TransformLimits::default()).unwrap();
        // Hand chain rule: 0.5*0.3/0.5 + 0.3*0.5/0.7, etc.
        assert!((prob_of(&sys, &[0, 1]) - (0.3 + 0.15 / 0.7)).abs() < 1e-15);
        assert!((prob_of(&sys, &[0, 2]) - (0.2 + 0.1 / 0.8)).abs() < 1e-15);
        assert!((prob_of(&sys, &[1, 2]) - (0.06 / 0.7 + 0.06 / 0.8)).abs() < 1e-15);
        assert!((prob_of(&sys, &[0, 1]) - 0.514_285_714_285_714_3).abs() < 1e-12);
        assert_eq!(sys.m_prime, 1);
        assert!(sys.composites[0].in_selected_set);
    }

    #[test]
    fn repeated_examples() {
        let sys =
            transform_repeated(&dist(&[1.0, 1.0, 1.0]), 3, 2, &TransformLimits::default()).unwrap();
        assert_eq!(sys.n_prime, 6);
        assert!((prob_of(&sys, &[0, 0]) - 1.0 / 9.0).abs() < 1e-15);
        assert!((prob_of(&sys, &[0, 1]) - 2.0 / 9.0).abs() < 1e-15);

        let sys =
            transform_repeated(&dist(&[0.6, 0.4]), 2, 2, &TransformLimits::default()).unwrap();
        assert!((prob_of(&sys, &[0, 0]) - 0.36).abs() < 1e-15);
        assert!((prob_of(&sys, &[0, 1]) - 0.48).abs() < 1e-15);
        assert!((prob_of(&sys, &[1, 1]) - 0.16).abs() < 1e-15);

        let sys =
            transform_repeated(&dist(&[0.5, 0.3, 0.2]), 3, 3, &TransformLimits::default()).unwrap();
        assert!((prob_of(&sys, &[0, 0, 1]) - 0.225).abs() < 1e-15);
    }

    #[test]
    fn repeated_membership_vs_optimal() {
        let sys =
            transform_repeated(&dist(&[1.0, 1.0, 1.0]), 2, 2, &TransformLimits::default()).unwrap();
        assert_eq!(sys.m_prime, 3);
        assert!((sys.membership_pi() - 5.0 / 9.0).abs() < 1e-15);
        assert!((sys.optimal_pi() - 1.0 / 3.0).abs() < 1e-15);
        assert!(sys.selection_mismatch(DEFAULT_EPS));
    }

    #[test]
    fn k1_is_identity() {
        let d = dist(&[0.1, 0.4, 0.2, 0.3]);
        for kind in [TransformKind::Unique, TransformKind::Repeated] {
            let sys = transform(&d, 2, 1, kind, &TransformLimits::default()).unwrap();
            assert_eq!(sys.n_prime, 4);
            assert_eq!(sys.m_prime, 2);
            for (a, b) in sys.dist.probs().iter().zip(d.probs()) {
                assert!((a - b).abs() < 1e-15);
            }
            let ids: Vec<usize> = sys.composites.iter().map(|c| c.ids[0]).collect();
            assert_eq!(ids, d.original_index());
        }
    }

    #[test]
    fn caps_and_validation() {
        let d = dist(&[1.0; 20]);
        let tight = TransformLimits {
            max_composites: 100,
            ..TransformLimits::default()
        };
        assert!(matches!(
            transform_unique(&d, 10, 5, &tight),
            Err(Error::TooLarge { .. })
        ));
        assert!(matches!(
            transform_unique(&d, 10, 9, &TransformLimits::default()),
            Err(Error::TooLarge { .. })
        ));
        assert!(matches!(
            transform_repeated(&d, 3, 4, &TransformLimits::default()),
            Err(Error::BadK { .. })
        ));
        let point = dist(&[1.0, 0.0, 0.0]);
        assert!(matches!(
            transform_unique(&point, 2, 2, &TransformLimits::default()),
            Err(Error::InsufficientSupport { support: 1, k: 2 })
        ));
    }

    proptest! {
        #[test]
        fn mass_and_counts(raw in prop::collection::vec(0.01f64..1.0, 1..9), m_frac in 0.0f64..1.0, k_frac in 0.0f64..1.0) {
            let d = dist(&raw);
            let n = d.len();
            let m = 1 + ((n - 1) as f64 * m_frac) as usize;
            let k = 1 + ((m - 1) as f64 * k_frac) as usize;
            let limits = TransformLimits::default();
            let u = transform_unique(&d, m, k, &limits).unwrap();
            prop_assert_eq!(u.n_prime as u128, math::binomial(n as u64, k as u64).unwrap());
            prop_assert_eq!(u.m_prime as u128, math::binomial(m as u64, k as u64).unwrap());
            let r = transform_repeated(&d, m, k, &limits).unwrap();
            prop_assert_eq!(r.n_prime as u128, math::multichoose(n as u64, k as u64).unwrap());
            prop_assert_eq!(r.m_prime as u128, math::multichoose(m as u64, k as u64).unwrap());
            for sys in [&u, &r] {
                let s: f64 = sys.dist.probs().iter().sum();
                prop_assert!((s - 1.0).abs() < 1e-12);
                let pi = sys.membership_pi();
                prop_assert!((-1e-12..=1.0 + 1e-12).contains(&pi));
                prop_assert!(sys.optimal_pi() <= pi + 1e-12);
            }
        }

        // Swapping two equal-probability objects permutes the composites the
        // same way.
        #[test]
        fn symmetry(raw in prop::collection::vec(0.05f64..1.0, 3..7), k in 1usize..4) {
            let mut raw = raw;
            raw[1] = raw[0];
            let n = raw.len();
            let k = k.min(n);
            let a = dist(&raw);
            let mut swapped = raw.clone();
            swapped.swap(0, 1);
            let b = dist(&swapped);
            for kind in [TransformKind::Unique, TransformKind::Repeated] {
                let sa = transform(&a, n, k, kind, &TransformLimits::default()).unwrap();
                let sb = transform(&b, n, k, kind, &TransformLimits::default()).unwrap();
                let lookup = |sys: &TransformedSystem, ids: &[usize]| {
                    let i = sys.composites.iter().position(|c| c.ids == ids).unwrap();
                    sys.dist.probs()[i]
                };
                for c in &sa.composites {
                    let mut mapped: Vec<usize> = c.ids.iter().map(|&i| match i { 0 => 1, 1 => 0, x => x }).collect();
                    mapped.sort_unstable();
                    prop_assert!((lookup(&sa, &c.ids) - lookup(&sb, &mapped)).abs() < 1e-14);
                }
            }
        }
    }
}
