//! Maximum- and minimum-entropy distributions under head/tail constraints.
//!
//! Both problems fix the first `M` sorted probabilities to sum to `1 − π` and
//! the remaining `N − M` to sum to `π`.
//!
//! The maximum spreads each block evenly. The minimum is attained at a vertex
//! of the constraint polytope where the smallest head entry equals the
//! largest tail entry, `p̂`. The head then has the form
//! `[(1 − π) − (M − 1)p̂, p̂, …, p̂]` and the tail the form
//! `[p̂, …, p̂, π mod p̂, 0, …]`. As a function of `p̂` the entropy is
//! piecewise concave, so its minimum sits on one of the finitely many
//! junctions `π/(N − M − j + 1)`, `j = 1..y`, or on the right endpoint
//! `(1 − π)/M`.
//!
//! The junctions lie on the curve `−π·log2(p̂)` (the tail holds an integer
//! number of copies of `p̂` there). Some printed derivations drop the minus
//! sign; the junction checks here use the signed form.

use alloc::vec::Vec;

use crate::distribution::{entropy, SortedDistribution, SystemShape, DEFAULT_EPS};
use crate::error::{Error, Result};
use crate::math::{self, neg_x_log2_x};

/// Two-level distribution `[p̄₁ × M, p̄₂ × (N − M)]`.
pub fn max_entropy_distribution(shape: &SystemShape) -> Result<SortedDistribution> {
    let (n, m) = (shape.n(), shape.m());
    if m == n {
        return SortedDistribution::uniform(n);
    }
    let mut probs = alloc::vec![shape.head_mean(); m];
    probs.resize(n, shape.tail_mean());
    SortedDistribution::from_sorted(probs, DEFAULT_EPS)
}

/// `(1 − π)·log2(M/(1 − π)) + π·log2((N − M)/π)`, zero-mass terms dropped.
pub fn max_entropy(shape: &SystemShape) -> f64 {
    let pi = shape.pi();
    let head = 1.0 - pi;
    let mut h = head * math::log2(shape.m() as f64 / head);
    if pi > 0.0 {
        h += pi * math::log2((shape.n() - shape.m()) as f64 / pi);
    }
    h
}

/// Minimum-entropy distribution when only one object is selected.
///
/// For `π ∈ [(j−1)/j, j/(j+1)]` it is `j` copies of `1 − π`, then the
/// remainder `1 − j(1 − π)`, then zeros.
pub fn min_entropy_m1(n: usize, pi: f64) -> Result<SortedDistribution> {
    let shape = SystemShape::new(n, 1, pi)?;
    let pi = shape.pi();
    let top = 1.0 - pi;
    let copies = (math::snapped_floor(1.0 / top) as usize).clamp(1, n);
    let mut remainder = pi - (copies - 1) as f64 * top;
    if remainder <= DEFAULT_EPS {
        remainder = 0.0;
    }
    let mut probs = alloc::vec![top; copies];
    if copies < n {
        probs.push(remainder.min(top));
        probs.resize(n, 0.0);
    }
    SortedDistribution::from_sorted(probs, DEFAULT_EPS)
}

/// Interval `[π/(N − M), (1 − π)/M]` in which the shared value `p̂` lives.
pub fn p_hat_range(shape: &SystemShape) -> (f64, f64) {
    // At the feasibility edge both means are 1/N up to rounding.
    let hi = shape.head_mean();
    (shape.tail_mean().min(hi), hi)
}

/// Finite set of `p̂` values that can minimize entropy, in ascending order.
///
/// Emits `π/(N − M − j + 1)` for `j = 1..y` followed by `(1 − π)/M`, with
/// values closer than `1e-9` merged.
pub fn candidate_set(shape: &SystemShape) -> Result<Vec<f64>> {
    if shape.m() < 2 {
        return Err(Error::BadM {
            m: shape.m(),
            n: shape.n(),
        });
    }
    if shape.m() == shape.n() {
        return Ok(alloc::vec![shape.head_mean()]);
    }
    let (lo, hi) = p_hat_range(shape);
    let tail_slots = shape.n() - shape.m();
    let y = shape.interior_count();
    let mut out: Vec<f64> = Vec::with_capacity(y + 1);
    let interior = (1..=y).map(|j| shape.pi() / (tail_slots - j + 1) as f64);
    for p in interior.chain(core::iter::once(hi)) {
        let p = p.max(lo).min(hi);
        match out.last() {
            Some(&last) if (p - last).abs() <= DEFAULT_EPS => {}
            _ => out.push(p),
        }
    }
    // The right endpoint always survives deduplication.
    if let Some(last) = out.last_mut() {
        *last = hi;
    }
    Ok(out)
}

/// Splits a tail of mass `pi` into full copies of `p_hat` plus a remainder,
/// over at most `slots` entries.
fn tail_split(pi: f64, p_hat: f64, slots: usize) -> (usize, f64) {
    if p_hat <= 0.0 || pi <= 0.0 {
        return (0, 0.0);
    }
    let copies = (math::snapped_floor(pi / p_hat) as usize).min(slots);
    let mut remainder = pi - copies as f64 * p_hat;
    if remainder <= DEFAULT_EPS || copies == slots {
        remainder = 0.0;
    }
    (copies, remainder.min(p_hat))
}

fn check_p_hat(shape: &SystemShape, p_hat: f64) -> Result<f64> {
    let (lo, hi) = p_hat_range(shape);
    if !p_hat.is_finite() || p_hat < lo - DEFAULT_EPS || p_hat > hi + DEFAULT_EPS {
        return Err(Error::BadPHat { p_hat, lo, hi });
    }
    Ok(p_hat.clamp(lo, hi))
}

/// Builds the vertex distribution for a shared value `p̂`: head
/// `[(1 − π) − (M − 1)p̂, p̂ × (M − 1)]`, tail `⌊π/p̂⌋` copies of `p̂`, the
/// remainder, then zeros.
///
/// With `M = 1` the head is just `[1 − π]`; choosing `p̂ = 1 − π` reproduces
/// [`min_entropy_m1`].
pub fn assemble_min_candidate(shape: &SystemShape, p_hat: f64) -> Result<SortedDistribution> {
    let p_hat = check_p_hat(shape, p_hat)?;
    let (n, m, pi) = (shape.n(), shape.m(), shape.pi());
    let mut probs = Vec::with_capacity(n);
    probs.push(((1.0 - pi) - (m - 1) as f64 * p_hat).max(p_hat));
    probs.resize(m, p_hat);
    let (copies, remainder) = tail_split(pi, p_hat, n - m);
    probs.resize(m + copies, p_hat);
    if probs.len() < n {
        probs.push(remainder);
    }
    probs.resize(n, 0.0);
    SortedDistribution::from_sorted(probs, DEFAULT_EPS)
        .map_err(|e| Error::Numeric(alloc::format!("candidate assembly at p_hat={p_hat}: {e}")))
}

/// Entropy of [`assemble_min_candidate`]`(shape, p_hat)` in O(1), without
/// building the vector.
pub fn candidate_entropy(shape: &SystemShape, p_hat: f64) -> Result<f64> {
    let p_hat = check_p_hat(shape, p_hat)?;
    Ok(candidate_entropy_unchecked(shape, p_hat))
}

fn candidate_entropy_unchecked(shape: &SystemShape, p_hat: f64) -> f64 {
    let (n, m, pi) = (shape.n(), shape.m(), shape.pi());
    let first = ((1.0 - pi) - (m - 1) as f64 * p_hat).max(p_hat);
    let (copies, remainder) = tail_split(pi, p_hat, n - m);
    let f = neg_x_log2_x(p_hat);
    neg_x_log2_x(first) + (m - 1 + copies) as f64 * f + neg_x_log2_x(remainder)
}

/// Result of the discrete minimum-entropy search.
#[derive(Debug, Clone, PartialEq)]
pub struct MinEntropyResult {
    pub shape: SystemShape,
    /// Number of interior candidates `y` (clamped to `[0, N − M]`).
    pub y: usize,
    pub candidates: Vec<Candidate>,
    pub argmin_index: usize,
    pub min_entropy_bits: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub p_hat: f64,
    pub entropy_bits: f64,
    pub distribution: SortedDistribution,
}

impl MinEntropyResult {
    pub fn argmin(&self) -> &Candidate {
        &self.candidates[self.argmin_index]
    }
}

/// Exact minimum entropy over all sorted distributions with the given shape.
///
/// `M = 1` uses the staircase of [`min_entropy_m1`]; `π = 0` is the point
/// mass. Otherwise every candidate of [`candidate_set`] is assembled and the
/// lowest entropy wins, ties going to the earliest candidate.
pub fn min_entropy(shape: &SystemShape) -> Result<MinEntropyResult> {
    let y = shape.interior_count();
    let single = |p_hat: f64, distribution: SortedDistribution| {
        let entropy_bits = entropy(&distribution).bits();
        MinEntropyResult {
            shape: *shape,
            y,
            candidates: alloc::vec![Candidate {
                p_hat,
                entropy_bits,
                distribution,
            }],
            argmin_index: 0,
            min_entropy_bits: entropy_bits,
        }
    };
    if shape.pi() == 0.0 {
        let mut probs = alloc::vec![0.0; shape.n()];
        probs[0] = 1.0;
        return Ok(single(
            0.0,
            SortedDistribution::from_sorted(probs, DEFAULT_EPS)?,
        ));
    }
    if shape.m() == 1 {
        let d = min_entropy_m1(shape.n(), shape.pi())?;
        return Ok(single(1.0 - shape.pi(), d));
    }
    let mut candidates = Vec::new();
    for p_hat in candidate_set(shape)? {
        let distribution = assemble_min_candidate(shape, p_hat)?;
        let entropy_bits = entropy(&distribution).bits();
        candidates.push(Candidate {
            p_hat,
            entropy_bits,
            distribution,
        });
    }
    let argmin_index = lowest_index_min(candidates.iter().map(|c| c.entropy_bits));
    let min_entropy_bits = candidates[argmin_index].entropy_bits;
    Ok(MinEntropyResult {
        shape: *shape,
        y,
        candidates,
        argmin_index,
        min_entropy_bits,
    })
}

fn lowest_index_min(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, v) in values.enumerate() {
        if v < best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// Minimum entropy in bits, using the O(1) candidate formula. Same value as
/// `min_entropy(shape)?.min_entropy_bits` up to rounding, without allocating
/// the candidate distributions.
pub fn min_entropy_bits(shape: &SystemShape) -> f64 {
    let pi = shape.pi();
    if pi == 0.0 {
        return 0.0;
    }
    if shape.m() == 1 {
        let top = 1.0 - pi;
        let copies = (math::snapped_floor(1.0 / top) as usize).clamp(1, shape.n());
        let mut remainder = 1.0 - copies as f64 * top;
        if remainder < DEFAULT_EPS || copies == shape.n() {
            remainder = 0.0;
        }
        return copies as f64 * neg_x_log2_x(top) + neg_x_log2_x(remainder);
    }
    if shape.m() == shape.n() {
        return math::log2(shape.n() as f64);
    }
    let (lo, hi) = p_hat_range(shape);
    let tail_slots = shape.n() - shape.m();
    let y = shape.interior_count();
    (1..=y)
        .map(|j| (pi / (tail_slots - j + 1) as f64).clamp(lo, hi))
        .chain(core::iter::once(hi))
        .map(|p| candidate_entropy_unchecked(shape, p))
        .fold(f64::INFINITY, f64::min)
}

/// One point of the `H(p̂)` curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub p_hat: f64,
    pub entropy_bits: f64,
    /// Which concave piece is active: `0` at the left endpoint, `i` on
    /// `(π/(N − M − i + 1), π/(N − M − i)]`.
    pub segment_index: usize,
    /// `true` for candidate-set points (junctions and the right endpoint).
    pub is_junction: bool,
}

/// Samples `H(p̂)` uniformly over `[π/(N − M), (1 − π)/M]` and merges in the
/// candidate-set points, flagged as junctions. Output is sorted by `p̂`.
pub fn piecewise_curve(shape: &SystemShape, samples: usize) -> Result<Vec<CurveSample>> {
    if shape.m() < 2 || shape.m() == shape.n() {
        return Err(Error::BadM {
            m: shape.m(),
            n: shape.n(),
        });
    }
    if shape.pi() <= 0.0 {
        return Err(Error::BadConfig("the entropy curve needs pi > 0".into()));
    }
    if samples < 2 {
        return Err(Error::BadConfig(alloc::format!(
            "samples = {samples}; need at least 2"
        )));
    }
    let (lo, hi) = p_hat_range(shape);
    let junctions = candidate_set(shape)?;
    let point = |p_hat: f64, is_junction: bool| CurveSample {
        p_hat,
        entropy_bits: candidate_entropy_unchecked(shape, p_hat),
        segment_index: segment_index(shape, p_hat),
        is_junction,
    };
    let mut out: Vec<CurveSample> = (0..samples)
        .map(|i| {
            let p = if i + 1 == samples {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (samples - 1) as f64
            };
            point(p, false)
        })
        .collect();
    for &j in &junctions {
        match out.iter_mut().find(|s| (s.p_hat - j).abs() <= DEFAULT_EPS) {
            Some(s) => *s = point(j, true),
            None => out.push(point(j, true)),
        }
    }
    out.sort_by(|a, b| a.p_hat.total_cmp(&b.p_hat));
    Ok(out)
}

fn segment_index(shape: &SystemShape, p_hat: f64) -> usize {
    let tail_slots = shape.n() - shape.m();
    let (copies, _) = tail_split(shape.pi(), p_hat, tail_slots);
    tail_slots - copies
}

/// Entropy contributed by the tail block of the candidate at `p_hat`.
pub fn tail_entropy(shape: &SystemShape, p_hat: f64) -> Result<f64> {
    let d = assemble_min_candidate(shape, p_hat)?;
    Ok(crate::distribution::entropy_of(&d.probs()[shape.m()..]))
}
