//! Independent validators and the Monte Carlo bound-verification sweep.
//!
//! Nothing here reuses the closed forms it checks: the minimum-entropy oracle
//! is a randomized local search over the feasible polytope, and the transform
//! oracle enumerates ordered tuples directly.
//!
//! Every scenario draws from its own ChaCha8 stream, selected by
//! `(shape_index, scenario_index)`, so evaluation order never changes results.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::bounds::{report_with, BoundOptions, ReportMode, TightInverter};
use crate::distribution::{
    entropy, make_distribution, tail_probability, EntropyValue, SortedDistribution, SystemShape,
    DEFAULT_EPS,
};
use crate::error::{Error, Result};
use crate::math;
use crate::transform::{transform, TransformKind, TransformLimits};

/// Family used to draw random distributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sampler {
    /// Symmetric Dirichlet with concentration `α`.
    Dirichlet(f64),
    /// Symmetric Dirichlet with `α < 1`: a few large entries, low entropy.
    Spiky(f64),
}

impl Sampler {
    pub fn alpha(self) -> f64 {
        match self {
            Sampler::Dirichlet(a) | Sampler::Spiky(a) => a,
        }
    }

    fn validate(self) -> Result<()> {
        let a = self.alpha();
        let ok = match self {
            Sampler::Dirichlet(_) => a > 0.0 && a.is_finite(),
            Sampler::Spiky(_) => a > 0.0 && a < 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::BadConfig(alloc::format!(
                "sampler {self:?}: alpha out of range"
            )))
        }
    }
}

/// ChaCha8 stream for one scenario.
pub fn scenario_rng(seed: u64, shape_index: usize, scenario_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((shape_index as u64) << 32) | (scenario_index as u64 & 0xffff_ffff));
    rng
}

/// Draws `n` Gamma weights, normalizes and sorts them.
pub fn sample_distribution<R: Rng + ?Sized>(
    n: usize,
    sampler: Sampler,
    rng: &mut R,
) -> Result<SortedDistribution> {
    sampler.validate()?;
    if n == 0 {
        return Err(Error::Empty);
    }
    let gamma = Gamma::new(sampler.alpha(), 1.0)
        .map_err(|e| Error::BadConfig(alloc::format!("gamma sampler: {e}")))?;
    // Tiny α can underflow every draw to zero; redraw in that case.
    for _ in 0..64 {
        let weights: Vec<f64> = (0..n).map(|_| gamma.sample(rng)).collect();
        if weights.iter().any(|&w| w > 0.0) {
            return make_distribution(&weights);
        }
    }
    Err(Error::Numeric("sampler produced only zero weights".into()))
}

/// Sweep settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub shapes: Vec<(usize, usize)>,
    pub scenarios_per_shape: usize,
    pub seed: u64,
    /// Scenario `i` uses `samplers[i % samplers.len()]`.
    pub samplers: Vec<Sampler>,
    pub eps: f64,
    pub bounds: BoundOptions,
}

/// The eight reference `(N, M)` configurations of the built-in sweep preset.
pub const REFERENCE_SHAPES: [(usize, usize); 8] = [
    (20, 6),
    (30, 20),
    (50, 15),
    (100, 60),
    (200, 40),
    (500, 300),
    (1000, 400),
    (1500, 1000),
];

impl SweepConfig {
    pub fn new(shapes: Vec<(usize, usize)>, seed: u64) -> Self {
        SweepConfig {
            shapes,
            scenarios_per_shape: 100,
            seed,
            samplers: alloc::vec![Sampler::Dirichlet(1.0), Sampler::Spiky(0.2)],
            eps: DEFAULT_EPS,
            bounds: BoundOptions::default(),
        }
    }

    pub fn reference(seed: u64) -> Self {
        Self::new(REFERENCE_SHAPES.to_vec(), seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenarios_per_shape == 0 {
            return Err(Error::BadConfig("scenarios_per_shape must be >= 1".into()));
        }
        if self.samplers.is_empty() {
            return Err(Error::BadConfig("at least one sampler is required".into()));
        }
        if self.eps.is_nan() || self.eps < 0.0 {
            return Err(Error::BadConfig("eps must be >= 0".into()));
        }
        for s in &self.samplers {
            s.validate()?;
        }
        for &(n, m) in &self.shapes {
            if m == 0 || m > n {
                return Err(Error::BadM { m, n });
            }
        }
        Ok(())
    }

    pub fn sampler_for(&self, scenario_index: usize) -> Sampler {
        self.samplers[scenario_index % self.samplers.len()]
    }

    pub fn total(&self) -> usize {
        self.shapes.len() * self.scenarios_per_shape
    }
}

/// One evaluated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub scenario_id: usize,
    pub shape_index: usize,
    pub n: usize,
    pub m: usize,
    pub entropy_bits: f64,
    pub pi_observed: f64,
    pub pi_lb_analytic: f64,
    pub pi_ub_analytic: f64,
    pub pi_lb_tight: f64,
    pub pi_ub_tight: f64,
    /// Observed `π` outside the analytic interval widened by `eps`.
    pub violation: bool,
    /// Observed `π` outside the tight interval widened by `eps`.
    pub tight_violation: bool,
    /// Numerical failure for this row; bounds are NaN when set.
    pub error: Option<String>,
}

/// Per-shape evaluator. Building one costs a full `H_min` grid, so reuse it
/// for every scenario of the shape.
#[derive(Debug, Clone)]
pub struct ShapeEvaluator {
    shape_index: usize,
    inverter: TightInverter,
}

impl ShapeEvaluator {
    pub fn new(cfg: &SweepConfig, shape_index: usize) -> Result<Self> {
        let (n, m) = cfg.shapes[shape_index];
        Ok(ShapeEvaluator {
            shape_index,
            inverter: TightInverter::with_options(n, m, &cfg.bounds)?,
        })
    }

    pub fn evaluate(&self, cfg: &SweepConfig, scenario_index: usize) -> SweepRecord {
        let (n, m) = (self.inverter.n(), self.inverter.m());
        let mut rec = SweepRecord {
            scenario_id: self.shape_index * cfg.scenarios_per_shape + scenario_index,
            shape_index: self.shape_index,
            n,
            m,
            entropy_bits: f64::NAN,
            pi_observed: f64::NAN,
            pi_lb_analytic: f64::NAN,
            pi_ub_analytic: f64::NAN,
            pi_lb_tight: f64::NAN,
            pi_ub_tight: f64::NAN,
            violation: false,
            tight_violation: false,
            error: None,
        };
        let mut rng = scenario_rng(cfg.seed, self.shape_index, scenario_index);
        let outcome =
            sample_distribution(n, cfg.sampler_for(scenario_index), &mut rng).and_then(|d| {
                let h = entropy(&d).bits();
                let pi = tail_probability(&d, m)?;
                Ok((
                    h,
                    pi,
                    report_with(&self.inverter, h, 1, ReportMode::Direct)?,
                ))
            });
        match outcome {
            Ok((h, pi, report)) => {
                let eps = cfg.eps;
                rec.entropy_bits = h;
                rec.pi_observed = pi;
                rec.pi_lb_analytic = report.pi_lb_analytic;
                rec.pi_ub_analytic = report.pi_ub_analytic;
                rec.pi_lb_tight = report.pi_lb_tight;
                rec.pi_ub_tight = report.pi_ub_tight;
                rec.violation = !report.contains(pi, eps);
                rec.tight_violation =
                    pi < report.pi_lb_tight - eps || pi > report.pi_ub_tight + eps;
            }
            Err(e) => rec.error = Some(e.to_string()),
        }
        rec
    }
}

/// Serial sweep; rows come out ordered by `(shape, scenario)`.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let mut out = Vec::with_capacity(cfg.total());
    for shape_index in 0..cfg.shapes.len() {
        let eval = ShapeEvaluator::new(cfg, shape_index)?;
        out.extend((0..cfg.scenarios_per_shape).map(|i| eval.evaluate(cfg, i)));
    }
    Ok(out)
}

/// Mean and median of a set of bound gaps.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GapStats {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
}

impl GapStats {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return GapStats::default();
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let mid = v.len() / 2;
        let median = if v.len() % 2 == 1 {
            v[mid]
        } else {
            0.5 * (v[mid - 1] + v[mid])
        };
        GapStats {
            count: v.len(),
            mean: math::sum(v.iter().copied()) / v.len() as f64,
            median,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.mean.is_finite() && self.median.is_finite()
    }
}

/// Analytic and tight gap statistics for a group of rows.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GapPair {
    pub analytic: GapStats,
    pub tight: GapStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeSummary {
    pub n: usize,
    pub m: usize,
    pub gaps: GapPair,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub total: usize,
    pub violations: usize,
    pub tight_violations: usize,
    pub failures: usize,
    pub per_shape: Vec<ShapeSummary>,
    /// Shapes with `2M ≥ N`.
    pub large_m: GapPair,
    /// Shapes with `2M < N`.
    pub small_m: GapPair,
}

fn gap_pair<'a>(rows: impl Iterator<Item = &'a SweepRecord> + Clone) -> GapPair {
    let ok = rows.filter(|r| r.error.is_none());
    let analytic: Vec<f64> = ok
        .clone()
        .map(|r| r.pi_ub_analytic - r.pi_lb_analytic)
        .collect();
    let tight: Vec<f64> = ok.map(|r| r.pi_ub_tight - r.pi_lb_tight).collect();
    GapPair {
        analytic: GapStats::of(&analytic),
        tight: GapStats::of(&tight),
    }
}

pub fn summarize(records: &[SweepRecord]) -> SweepSummary {
    let shapes: Vec<(usize, usize)> = records.iter().map(|r| (r.n, r.m)).dedup().collect();
    let per_shape = shapes
        .iter()
        .map(|&(n, m)| ShapeSummary {
            n,
            m,
            gaps: gap_pair(records.iter().filter(move |r| (r.n, r.m) == (n, m))),
        })
        .collect();
    SweepSummary {
        total: records.len(),
        violations: records.iter().filter(|r| r.violation).count(),
        tight_violations: records.iter().filter(|r| r.tight_violation).count(),
        failures: records.iter().filter(|r| r.error.is_some()).count(),
        per_shape,
        large_m: gap_pair(records.iter().filter(|r| 2 * r.m >= r.n)),
        small_m: gap_pair(records.iter().filter(|r| 2 * r.m < r.n)),
    }
}

/// Randomized local search for the minimum entropy over all sorted
/// distributions with shape `(N, M, π)`.
///
/// Each restart starts from a random feasible point (a random head and tail
/// pulled toward the maximum-entropy point until the head dominates the
/// tail), then repeatedly moves as much mass as feasible from a smaller entry
/// to a larger one inside the head or inside the tail. The result is the
/// entropy of an actual feasible point, so it never undercuts the true
/// minimum.
pub fn oracle_min_entropy<R: Rng + ?Sized>(
    shape: &SystemShape,
    restarts: usize,
    iters: usize,
    rng: &mut R,
) -> Result<EntropyValue> {
    let (n, m, pi) = (shape.n(), shape.m(), shape.pi());
    let head_mass = 1.0 - pi;
    let mut best = f64::INFINITY;
    for _ in 0..restarts.max(1) {
        let mut p = random_feasible_point(n, m, pi, rng);
        descend(&mut p, m, iters);
        // Guard against drift: the point must still be feasible.
        let head: f64 = math::sum(p[..m].iter().copied());
        debug_assert!((head - head_mass).abs() < 1e-9);
        best = best.min(math::sum(p.iter().map(|&x| math::neg_x_log2_x(x))));
    }
    Ok(EntropyValue(best))
}

fn random_feasible_point<R: Rng + ?Sized>(n: usize, m: usize, pi: f64, rng: &mut R) -> Vec<f64> {
    let head_level = (1.0 - pi) / m as f64;
    let tail_level = if n > m { pi / (n - m) as f64 } else { 0.0 };
    let mut p = Vec::with_capacity(n);
    fill_simplex(&mut p, m, 1.0 - pi, rng);
    fill_simplex(&mut p, n - m, pi, rng);
    let head_min = p[..m].iter().copied().fold(f64::INFINITY, f64::min);
    let tail_max = p[m..].iter().copied().fold(0.0, f64::max);
    if head_min < tail_max {
        // Mix with the two-level point until min(head) = max(tail).
        let t = (head_level - tail_level) / ((head_level - tail_level) + (tail_max - head_min));
        for (i, x) in p.iter_mut().enumerate() {
            let level = if i < m { head_level } else { tail_level };
            *x = t * *x + (1.0 - t) * level;
        }
    }
    p
}

// Uniform point on the scaled simplex: normalized exponentials, with a random
// sharpening exponent so restarts also visit near-vertex regions.
fn fill_simplex<R: Rng + ?Sized>(out: &mut Vec<f64>, len: usize, mass: f64, rng: &mut R) {
    if len == 0 {
        return;
    }
    let sharp = 1.0 + 7.0 * rng.random::<f64>();
    let raw: Vec<f64> = (0..len)
        .map(|_| libm::pow(-libm::log(1.0 - rng.random::<f64>()), sharp))
        .collect();
    let total = math::sum(raw.iter().copied());
    if total > 0.0 {
        out.extend(raw.iter().map(|w| mass * w / total));
    } else {
        out.extend(core::iter::repeat_n(mass / len as f64, len));
    }
}

// A move adds `step * coeff` to each listed entry. Coefficients sum to zero
// inside the head and inside the tail, so both block masses are preserved.
struct Move {
    dir: Vec<(usize, f64)>,
    step: f64,
}

impl Move {
    fn gain(&self, p: &[f64]) -> f64 {
        self.dir
            .iter()
            .map(|&(i, c)| {
                math::neg_x_log2_x(p[i]) - math::neg_x_log2_x((p[i] + self.step * c).max(0.0))
            })
            .sum()
    }

    fn apply(&self, p: &mut [f64]) {
        for &(i, c) in &self.dir {
            p[i] += self.step * c;
            if p[i] < 1e-300 {
                p[i] = 0.0;
            }
        }
    }
}

// Largest step along `dir` that keeps every entry non-negative and every
// head entry at or above every tail entry.
fn line_limit(p: &[f64], m: usize, dir: &[(usize, f64)]) -> f64 {
    let mut d = alloc::vec![0.0; p.len()];
    for &(i, c) in dir {
        d[i] += c;
    }
    let mut limit = f64::INFINITY;
    for (i, (&x, &c)) in p.iter().zip(&d).enumerate() {
        if c < 0.0 {
            limit = limit.min(x / -c);
        }
        if i < m {
            for j in m..p.len() {
                let slope = c - d[j];
                if slope < 0.0 {
                    limit = limit.min((x - p[j]).max(0.0) / -slope);
                }
            }
        }
    }
    limit
}

const TIE: f64 = 1e-12;

// Transfers between two entries of the same block, smaller to larger, as far
// as feasibility allows.
fn pair_moves(p: &[f64], m: usize, out: &mut Vec<Move>) {
    let n = p.len();
    let head_min = p[..m].iter().copied().fold(f64::INFINITY, f64::min);
    let tail_max = p[m..].iter().copied().fold(0.0, f64::max);
    for (lo, hi) in [(0, m), (m, n)] {
        for i in lo..hi {
            for j in lo..hi {
                if i == j || p[i] > p[j] {
                    continue;
                }
                let step = if i < m {
                    p[i] - tail_max
                } else {
                    p[i].min(head_min - p[j])
                };
                if step > 0.0 {
                    out.push(Move {
                        dir: alloc::vec![(i, -1.0), (j, 1.0)],
                        step,
                    });
                }
            }
        }
    }
}

// Shifts the shared level where the smallest head entries meet the largest
// tail entries, compensating with the largest free head entry and the largest
// free tail entry. Pair transfers cannot do this because the tie blocks them.
fn level_moves(p: &[f64], m: usize, out: &mut Vec<Move>) {
    let n = p.len();
    let level = p[..m].iter().copied().fold(f64::INFINITY, f64::min);
    let head_tied: Vec<usize> = (0..m).filter(|&i| p[i] <= level + TIE).collect();
    let tail_tied: Vec<usize> = (m..n).filter(|&j| p[j] >= level - TIE).collect();
    if tail_tied.is_empty() {
        return;
    }
    let free_max = |range: core::ops::Range<usize>, tied: &[usize]| {
        range
            .filter(|i| !tied.contains(i))
            .max_by(|&a, &b| p[a].total_cmp(&p[b]))
    };
    let head_free = free_max(0..m, &head_tied);
    let tail_free = free_max(m..n, &tail_tied);
    for sign in [1.0, -1.0] {
        let mut dir: Vec<(usize, f64)> = Vec::new();
        match head_free {
            Some(h) => {
                dir.extend(head_tied.iter().map(|&i| (i, sign)));
                dir.push((h, -sign * head_tied.len() as f64));
            }
            // Every head entry sits at the level, which pins it.
            None => continue,
        }
        match tail_free {
            Some(t) => {
                dir.extend(tail_tied.iter().map(|&j| (j, sign)));
                dir.push((t, -sign * tail_tied.len() as f64));
            }
            None => continue,
        }
        let step = line_limit(p, m, &dir);
        if step > 0.0 && step.is_finite() {
            out.push(Move { dir, step });
        }
    }
}

fn descend(p: &mut [f64], m: usize, iters: usize) {
    let mut moves = Vec::new();
    for _ in 0..iters {
        moves.clear();
        pair_moves(p, m, &mut moves);
        level_moves(p, m, &mut moves);
        let best = moves
            .iter()
            .map(|mv| (mv.gain(p), mv))
            .filter(|(g, _)| *g > 1e-15)
            .max_by(|a, b| a.0.total_cmp(&b.0));
        let Some((_, mv)) = best else { break };
        mv.apply(p);
    }
}

/// Default local-search budget for [`oracle_min_entropy`].
pub const DEFAULT_RESTARTS: usize = 100;
pub const DEFAULT_ITERS: usize = 5000;

/// Exact minimum, oracle value and `Ω` bound at one `(N, M, π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinEntropyPoint {
    pub n: usize,
    pub m: usize,
    pub pi: f64,
    pub exact: f64,
    pub oracle: f64,
    pub omega: f64,
    /// For `M = 1`: the staircase equals the general candidate assembly
    /// entry for entry.
    pub staircase_ok: Option<bool>,
}

impl MinEntropyPoint {
    /// `exact ≤ oracle + tol` and `exact ≥ Ω − tol`, plus the staircase
    /// identity when it applies.
    pub fn passes(&self, tol: f64) -> bool {
        self.exact <= self.oracle + tol
            && self.exact >= self.omega - tol
            && self.staircase_ok != Some(false)
    }
}

/// All shapes with `N ≤ n_max` and `π` on `points` evenly spaced values of
/// `[0, (N − M)/N]` (a single point when `M = N`).
pub fn min_entropy_grid(n_max: usize, points: usize) -> Vec<SystemShape> {
    let mut out = Vec::new();
    for n in 1..=n_max {
        for m in 1..=n {
            let hi = (n - m) as f64 / n as f64;
            let count = if m == n { 1 } else { points.max(2) };
            for i in 0..count {
                let pi = if i + 1 == count && count > 1 {
                    hi
                } else {
                    hi * i as f64 / (count - 1).max(1) as f64
                };
                out.push(SystemShape::new(n, m, pi).expect("grid point is feasible"));
            }
        }
    }
    out
}

/// Evaluates one grid point. The oracle uses stream `index` of `seed`.
pub fn check_min_entropy_point(
    shape: &SystemShape,
    restarts: usize,
    iters: usize,
    seed: u64,
    index: usize,
) -> Result<MinEntropyPoint> {
    use crate::bounds::entropy_lower_bound_omega;
    use crate::extrema::{assemble_min_candidate, min_entropy, min_entropy_m1};

    let exact = min_entropy(shape)?.min_entropy_bits;
    let mut rng = scenario_rng(seed, usize::MAX >> 32, index);
    let oracle = oracle_min_entropy(shape, restarts, iters, &mut rng)?.bits();
    let staircase_ok = if shape.m() == 1 {
        let stair = min_entropy_m1(shape.n(), shape.pi())?;
        let general = assemble_min_candidate(shape, 1.0 - shape.pi())?;
        Some(stair.probs() == general.probs())
    } else {
        None
    };
    Ok(MinEntropyPoint {
        n: shape.n(),
        m: shape.m(),
        pi: shape.pi(),
        exact,
        oracle,
        omega: entropy_lower_bound_omega(shape),
        staircase_ok,
    })
}

/// Largest deviation between transform output and total enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TransformCheck {
    pub cases: usize,
    pub max_dev_unique: f64,
    pub max_dev_repeated: f64,
    /// Composite and selected counts matched the closed forms every time.
    pub counts_ok: bool,
}

impl TransformCheck {
    pub fn max_deviation(&self) -> f64 {
        self.max_dev_unique.max(self.max_dev_repeated)
    }
}

const ORACLE_MAX_N: usize = 6;
const ORACLE_MAX_K: usize = 3;

/// Compares both transforms of `d` (with every `M` in `k..=N`) against
/// grouping all ordered `k`-tuples.
pub fn transform_enumeration_check(d: &SortedDistribution, k: usize) -> Result<TransformCheck> {
    let n = d.len();
    if n > ORACLE_MAX_N || k > ORACLE_MAX_K {
        return Err(Error::TooLarge {
            what: "transform oracle (N <= 6, k <= 3)",
            size: n.max(k) as u128,
            cap: ORACLE_MAX_N as u128,
        });
    }
    if k == 0 || k > n {
        return Err(Error::BadK { k, m: n });
    }
    let p = d.probs();
    let limits = TransformLimits::default();
    let mut check = TransformCheck {
        counts_ok: true,
        ..TransformCheck::default()
    };

    let mut without: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for tuple in (0..n).permutations(k) {
        let mut prob = 1.0;
        let mut left = 1.0;
        for &a in &tuple {
            prob *= if p[a] == 0.0 { 0.0 } else { p[a] / left };
            left -= p[a];
        }
        let mut key = tuple.clone();
        key.sort_unstable();
        *without.entry(key).or_default() += prob;
    }
    let mut with: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for tuple in core::iter::repeat_n(0..n, k).multi_cartesian_product() {
        let prob: f64 = tuple.iter().map(|&a| p[a]).product();
        let mut key = tuple.clone();
        key.sort_unstable();
        *with.entry(key).or_default() += prob;
    }

    let support = p.iter().filter(|&&x| x > 0.0).count();
    for m in k..=n {
        for (kind, table) in [
            (TransformKind::Unique, &without),
            (TransformKind::Repeated, &with),
        ] {
            if kind == TransformKind::Unique && support < k {
                continue;
            }
            let sys = transform(d, m, k, kind, &limits)?;
            check.cases += 1;
            let selected = table
                .keys()
                .filter(|key| key.iter().all(|&a| a < m))
                .count();
            check.counts_ok &= sys.n_prime == table.len() && sys.m_prime == selected;
            let mut dev: f64 = 0.0;
            for (c, prob) in sys.composites.iter().zip(sys.dist.probs()) {
                let expected = table.get(&c.positions).copied().unwrap_or(f64::NAN);
                dev = dev.max((prob - expected).abs());
            }
            if dev.is_nan() {
                dev = f64::INFINITY;
            }
            match kind {
                TransformKind::Unique => check.max_dev_unique = check.max_dev_unique.max(dev),
                TransformKind::Repeated => check.max_dev_repeated = check.max_dev_repeated.max(dev),
            }
        }
    }
    Ok(check)
}

/// [`transform_enumeration_check`] over `trials` random Dirichlet(1)
/// distributions on `n` objects.
pub fn oracle_transform_check<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    trials: usize,
    rng: &mut R,
) -> Result<TransformCheck> {
    if n > ORACLE_MAX_N || k > ORACLE_MAX_K {
        return Err(Error::TooLarge {
            what: "transform oracle (N <= 6, k <= 3)",
            size: n.max(k) as u128,
            cap: ORACLE_MAX_N as u128,
        });
    }
    let mut total = TransformCheck {
        counts_ok: true,
        ..TransformCheck::default()
    };
    for _ in 0..trials {
        let d = sample_distribution(n, Sampler::Dirichlet(1.0), rng)?;
        let c = transform_enumeration_check(&d, k)?;
        total.cases += c.cases;
        total.max_dev_unique = total.max_dev_unique.max(c.max_dev_unique);
        total.max_dev_repeated = total.max_dev_repeated.max(c.max_dev_repeated);
        total.counts_ok &= c.counts_ok;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extrema::min_entropy_bits;
    use alloc::vec;

    #[test]
    fn sampler_basics() {
        let mut rng = scenario_rng(7, 0, 0);
        let d = sample_distribution(1, Sampler::Dirichlet(1.0), &mut rng).unwrap();
        assert_eq!(d.probs(), &[1.0]);
        let a = sample_distribution(20, Sampler::Spiky(0.2), &mut scenario_rng(9, 3, 4)).unwrap();
        let b = sample_distribution(20, Sampler::Spiky(0.2), &mut scenario_rng(9, 3, 4)).unwrap();
        assert_eq!(a, b);
        let c = sample_distribution(20, Sampler::Spiky(0.2), &mut scenario_rng(9, 3, 5)).unwrap();
        assert_ne!(a, c);
        assert!(sample_distribution(3, Sampler::Spiky(1.5), &mut rng).is_err());
    }

    #[test]
    fn small_sweeps() {
        let mut cfg = SweepConfig::new(vec![(5, 5)], 1);
        cfg.scenarios_per_shape = 4;
        let rows = run_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 4);
        for r in &rows {
            assert_eq!(r.pi_observed, 0.0);
            assert_eq!((r.pi_lb_analytic, r.pi_ub_analytic), (0.0, 0.0));
            assert!(!r.violation);
        }
        let mut cfg = SweepConfig::new(vec![(20, 6)], 1);
        cfg.scenarios_per_shape = 1;
        assert_eq!(run_sweep(&cfg).unwrap().len(), 1);
    }

    #[test]
    fn summary_split() {
        let mut cfg = SweepConfig::new(vec![(20, 6), (30, 20)], 3);
        cfg.scenarios_per_shape = 10;
        let rows = run_sweep(&cfg).unwrap();
        let s = summarize(&rows);
        assert_eq!(s.total, 20);
        assert_eq!(s.violations, 0);
        assert_eq!(s.per_shape.len(), 2);
        assert_eq!(s.small_m.analytic.count, 10);
        assert_eq!(s.large_m.analytic.count, 10);
        assert!(s.small_m.analytic.is_finite() && s.large_m.tight.is_finite());
        assert!(s.large_m.tight.mean <= s.large_m.analytic.mean + 1e-12);
    }

    #[test]
    fn oracle_examples() {
        let mut rng = scenario_rng(11, 0, 0);
        let v =
            oracle_min_entropy(&SystemShape::new(4, 2, 0.5).unwrap(), 10, 1000, &mut rng).unwrap();
        assert!((v.bits() - 2.0).abs() < 1e-12);
        let v =
            oracle_min_entropy(&SystemShape::new(3, 1, 0.3).unwrap(), 20, 1000, &mut rng).unwrap();
        assert!((v.bits() - 0.881_290_899_230_692_7).abs() < 1e-6);
        let shape = SystemShape::new(15, 5, 0.4).unwrap();
        let v = oracle_min_entropy(&shape, 100, 5000, &mut rng).unwrap();
        assert!(v.bits() >= min_entropy_bits(&shape) - 1e-9);
    }

    #[test]
    fn grid_points() {
        let g = min_entropy_grid(3, 5);
        // (1,1), (2,1)x5, (2,2), (3,1)x5, (3,2)x5, (3,3)
        assert_eq!(g.len(), 18);
        assert!(g.iter().all(|s| s.pi() <= s.max_pi()));
        let p = check_min_entropy_point(&g[5], 20, 500, 1, 5).unwrap();
        assert!(p.passes(1e-9), "{p:?}");
        assert_eq!(p.staircase_ok, Some(true));
    }

    #[test]
    fn transform_oracle_examples() {
        let d = make_distribution(&[0.5, 0.3, 0.2]).unwrap();
        let c = transform_enumeration_check(&d, 2).unwrap();
        assert!(c.max_deviation() <= 1e-12);
        assert!(c.counts_ok);
        let d = SortedDistribution::uniform(2).unwrap();
        let c = transform_enumeration_check(&d, 2).unwrap();
        assert_eq!(c.max_dev_repeated, 0.0);
        let mut rng = scenario_rng(5, 0, 0);
        let c = oracle_transform_check(4, 1, 5, &mut rng).unwrap();
        assert!(c.max_deviation() <= 1e-15);
        assert!(matches!(
            oracle_transform_check(7, 2, 1, &mut rng),
            Err(Error::TooLarge { .. })
        ));
    }
}
