//! Bounds on the error probability `π` and merit probability `ψ = 1 − π` of
//! the optimal selection, given only the entropy `H` of the system.
//!
//! Two families are provided:
//!
//! * **Analytic**: the closed-form lower bound obtained by relaxing the
//!   maximum entropy (valid for `M < N/2`, zero otherwise) and the upper bound
//!   obtained by inverting the `Ω` lower bound on the minimum entropy.
//! * **Tight**: numeric inversions of the exact `H_max(π)` and `H_min(π)`
//!   curves. The lower one is exact because `H_max` is strictly increasing in
//!   `π`. The upper one scans a grid and refines by bisection; monotonicity of
//!   `H_min` is not proven, so it is only heuristically tight.
//!
//! `Ω` uses the logarithm argument `N(N − M − j + 1)/(N − M)`, the orientation
//! consistent with the upper-bound denominators. The inverted argument
//! `(N − M)/(N(N − M − j + 1))` is below one and would make every entry
//! non-positive.

use alloc::vec::Vec;

use crate::distribution::{max_pi, SortedDistribution, SystemShape, DEFAULT_EPS};
use crate::error::{Error, Result};
use crate::extrema::{max_entropy, min_entropy_bits};
use crate::math;
use crate::transform::{self, TransformKind, TransformLimits};

/// `min(Ω)`, a closed-form lower bound on the minimum entropy of the shape.
///
/// Entries are `((N − j)π/(N − M − j + 1))·log2(N(N − M − j + 1)/(N − M))`
/// for `j = 1..y`, plus `((N − y)(1 − π)/M)·log2(M)` when `M ≥ 2`.
pub fn entropy_lower_bound_omega(shape: &SystemShape) -> f64 {
    let (n, m, pi) = (shape.n(), shape.m(), shape.pi());
    if pi <= 0.0 || m == n {
        return 0.0;
    }
    let tail_slots = (n - m) as f64;
    let y = shape.interior_count();
    let interior = (1..=y).map(|j| {
        let rest = (n - m - j + 1) as f64;
        ((n - j) as f64 * pi / rest) * math::log2(n as f64 * rest / tail_slots)
    });
    let head = (m >= 2).then(|| ((n - y) as f64 * (1.0 - pi) / m as f64) * math::log2(m as f64));
    let v = interior.chain(head).fold(f64::INFINITY, f64::min);
    if v.is_finite() {
        v.max(0.0)
    } else {
        0.0
    }
}

fn check_args(n: usize, m: usize, h: f64) -> Result<f64> {
    if m == 0 || m > n {
        return Err(Error::BadM { m, n });
    }
    let max = math::log2(n as f64);
    if !h.is_finite() || h < -DEFAULT_EPS || h > max + DEFAULT_EPS {
        return Err(Error::BadEntropy { bits: h, max });
    }
    Ok(h.clamp(0.0, max))
}

/// Unclamped lower bound `(H − 1 − log2 M)/log2(N/M − 1)` for `M < N/2`,
/// zero otherwise.
pub fn pi_lower_bound_raw(n: usize, m: usize, h: f64) -> Result<f64> {
    let h = check_args(n, m, h)?;
    if 2 * m < n {
        Ok((h - 1.0 - math::log2(m as f64)) / math::log2(n as f64 / m as f64 - 1.0))
    } else {
        Ok(0.0)
    }
}

/// Lower bound on `π`, clamped to `[0, (N − M)/N]`. At `H = log2 N` only the
/// uniform distribution qualifies, so the bound is `(N − M)/N` there.
pub fn pi_lower_bound(n: usize, m: usize, h: f64) -> Result<f64> {
    let raw = pi_lower_bound_raw(n, m, h)?;
    if at_uniform(n, h) {
        return Ok(max_pi(n, m));
    }
    Ok(raw.clamp(0.0, max_pi(n, m)))
}

// Exact comparison on purpose: an entropy deficit of d still allows a
// deviation of order sqrt(d) from the uniform tail mass.
fn at_uniform(n: usize, h: f64) -> bool {
    h >= math::log2(n as f64)
}

/// The uncorrected form of the lower bound, applied for every `M`. Kept only
/// as a comparison value: for `M ≥ N/2` the denominator is zero or negative
/// and the value is meaningless or wrong.
pub fn flawed_pi_lower_bound(n: usize, m: usize, h: f64) -> Result<f64> {
    let h = check_args(n, m, h)?;
    Ok((h - 1.0 - math::log2(m as f64)) / math::log2(n as f64 / m as f64 - 1.0))
}

/// Unclamped upper bound: the maximum of
/// `H(N − M − j + 1)/((N − j)·log2(N(N − M − j + 1)/(N − M)))` over
/// `j = 1..N − M`, and of `1 − H/log2 M` when `M ≥ 2`. Zero when the set is
/// empty (`N = M = 1`).
pub fn pi_upper_bound_raw(n: usize, m: usize, h: f64) -> Result<f64> {
    let h = check_args(n, m, h)?;
    let tail_slots = (n - m) as f64;
    let interior = (1..=n - m).map(|j| {
        let rest = (n - m - j + 1) as f64;
        h * rest / ((n - j) as f64 * math::log2(n as f64 * rest / tail_slots))
    });
    let head = (m >= 2).then(|| 1.0 - h / math::log2(m as f64));
    let raw = interior.chain(head).fold(f64::NEG_INFINITY, f64::max);
    Ok(if raw.is_finite() { raw } else { 0.0 })
}

/// Upper bound on `π`, clamped to `[pi_lower_bound, (N − M)/N]`.
pub fn pi_upper_bound(n: usize, m: usize, h: f64) -> Result<f64> {
    let lb = pi_lower_bound(n, m, h)?;
    Ok(pi_upper_bound_raw(n, m, h)?.clamp(lb, max_pi(n, m)))
}

/// `(ψ_lb, ψ_ub) = (1 − π_ub, 1 − π_lb)`, clamped to `[M/N, 1]`.
pub fn merit_bounds_k1(n: usize, m: usize, h: f64) -> Result<(f64, f64)> {
    let lb = pi_lower_bound(n, m, h)?;
    let ub = pi_upper_bound(n, m, h)?;
    let floor = m as f64 / n as f64;
    Ok(((1.0 - ub).clamp(floor, 1.0), (1.0 - lb).clamp(floor, 1.0)))
}

/// Numeric inversion of the exact entropy extremes for a fixed `(N, M)`.
///
/// Building the inverter evaluates `H_min` on a grid of `π` values once;
/// each query then costs a bisection. Reuse one inverter for many entropies
/// of the same shape.
#[derive(Debug, Clone)]
pub struct TightInverter {
    n: usize,
    m: usize,
    grid_pi: Vec<f64>,
    grid_hmin: Vec<f64>,
}

const BISECTION_STEPS: usize = 60;

impl TightInverter {
    pub fn new(n: usize, m: usize, grid: usize) -> Result<Self> {
        if m == 0 || m > n {
            return Err(Error::BadM { m, n });
        }
        if grid < 2 {
            return Err(Error::BadConfig(alloc::format!(
                "tight-bound grid = {grid}; need at least 2 points"
            )));
        }
        let hi = max_pi(n, m);
        let (grid_pi, grid_hmin) = if m == n {
            (alloc::vec![0.0], alloc::vec![0.0])
        } else {
            (0..grid)
                .map(|i| {
                    let pi = if i + 1 == grid {
                        hi
                    } else {
                        hi * i as f64 / (grid - 1) as f64
                    };
                    (pi, hmin_at(n, m, pi))
                })
                .unzip()
        };
        Ok(TightInverter {
            n,
            m,
            grid_pi,
            grid_hmin,
        })
    }

    /// Inverter whose grid is shrunk so that building it costs about
    /// `opts.work_budget` candidate evaluations.
    pub fn with_options(n: usize, m: usize, opts: &BoundOptions) -> Result<Self> {
        let per_point = (n.saturating_sub(m) + 1).max(1);
        let grid =
            (opts.work_budget / per_point).clamp(opts.min_grid, opts.grid.max(opts.min_grid));
        Self::new(n, m, grid.min(opts.grid).max(2))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Smallest `π` whose maximum entropy reaches `h`.
    pub fn lower(&self, h: f64) -> Result<f64> {
        let h = check_args(self.n, self.m, h)?;
        let (n, m) = (self.n, self.m);
        let hi = max_pi(n, m);
        if m == n || h <= math::log2(m as f64) {
            return Ok(0.0);
        }
        if at_uniform(n, h) {
            return Ok(hi);
        }
        let hmax = |pi: f64| max_entropy(&shape_unchecked(n, m, pi));
        let (mut lo, mut up) = (0.0, hi);
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + up);
            if hmax(mid) >= h {
                up = mid;
            } else {
                lo = mid;
            }
            if up - lo <= 1e-13 {
                break;
            }
        }
        Ok(up)
    }

    /// Largest `π` whose minimum entropy does not exceed `h`.
    pub fn upper(&self, h: f64) -> Result<f64> {
        let h = check_args(self.n, self.m, h)?;
        let (n, m) = (self.n, self.m);
        if m == n {
            return Ok(0.0);
        }
        let ok = |hmin: f64| hmin <= h + 1e-12;
        let Some(i) = self.grid_hmin.iter().rposition(|&v| ok(v)) else {
            return Ok(0.0);
        };
        if i + 1 == self.grid_pi.len() {
            return Ok(self.grid_pi[i]);
        }
        let (mut lo, mut up) = (self.grid_pi[i], self.grid_pi[i + 1]);
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + up);
            if ok(hmin_at(n, m, mid)) {
                lo = mid;
            } else {
                up = mid;
            }
            if up - lo <= 1e-13 {
                break;
            }
        }
        Ok(lo)
    }

    pub fn bounds(&self, h: f64) -> Result<(f64, f64)> {
        Ok((self.lower(h)?, self.upper(h)?))
    }
}

fn shape_unchecked(n: usize, m: usize, pi: f64) -> SystemShape {
    SystemShape::new(n, m, pi.clamp(0.0, max_pi(n, m))).expect("pi clamped into range")
}

fn hmin_at(n: usize, m: usize, pi: f64) -> f64 {
    min_entropy_bits(&shape_unchecked(n, m, pi))
}

/// Tight numeric bounds `(π_lb, π_ub)` with the default grid.
pub fn pi_bounds_tight(n: usize, m: usize, h: f64) -> Result<(f64, f64)> {
    TightInverter::with_options(n, m, &BoundOptions::default())?.bounds(h)
}

/// Which system a report describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReportMode {
    /// The original system (`k = 1`).
    Direct,
    /// Transformed over `k`-subsets.
    Unique,
    /// Transformed over `k`-multisets.
    Repeated,
}

impl ReportMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ReportMode::Direct => "direct",
            ReportMode::Unique => "unique",
            ReportMode::Repeated => "repeated",
        }
    }
}

impl From<TransformKind> for ReportMode {
    fn from(kind: TransformKind) -> Self {
        match kind {
            TransformKind::Unique => ReportMode::Unique,
            TransformKind::Repeated => ReportMode::Repeated,
        }
    }
}

/// A clamp that fired while building a [`BoundReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClampFlag {
    /// Input entropy was a hair above `log2 N` and was pulled down.
    Entropy,
    /// Raw lower bound was negative.
    LowerAtZero,
    /// Entropy equals `log2 N`, which pins `π` to `(N − M)/N`.
    LowerAtUniform,
    /// Raw lower bound exceeded `(N − M)/N`.
    LowerAtFeasibility,
    /// Raw upper bound exceeded `(N − M)/N`.
    UpperAtFeasibility,
    /// Raw upper bound fell below the lower bound.
    UpperAtLower,
}

impl ClampFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            ClampFlag::Entropy => "entropy_bits",
            ClampFlag::LowerAtZero => "pi_lb_analytic:zero",
            ClampFlag::LowerAtUniform => "pi_lb_analytic:uniform",
            ClampFlag::LowerAtFeasibility => "pi_lb_analytic:feasibility",
            ClampFlag::UpperAtFeasibility => "pi_ub_analytic:feasibility",
            ClampFlag::UpperAtLower => "pi_ub_analytic:lower",
        }
    }
}

/// Analytic and tight bounds on `π` and `ψ` for one `(N, M, H)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub mode: ReportMode,
    pub entropy_bits: f64,
    pub pi_lb_analytic: f64,
    pub pi_ub_analytic: f64,
    pub pi_lb_tight: f64,
    pub pi_ub_tight: f64,
    pub pi_lb_raw: f64,
    pub pi_ub_raw: f64,
    pub psi_lb: f64,
    pub psi_ub: f64,
    /// Uncorrected lower bound, for comparison only. Not finite when `M = N/2`
    /// or `M = N`.
    pub flawed_pi_lb: f64,
    pub clamped: Vec<ClampFlag>,
}

impl BoundReport {
    /// Is `pi` inside `[pi_lb_analytic − eps, pi_ub_analytic + eps]`?
    pub fn contains(&self, pi: f64, eps: f64) -> bool {
        pi >= self.pi_lb_analytic - eps && pi <= self.pi_ub_analytic + eps
    }
}

/// Knobs for the tight numeric bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundOptions {
    /// Number of `π` grid points for the upper inversion.
    pub grid: usize,
    /// Grid size never drops below this, whatever the budget.
    pub min_grid: usize,
    /// Approximate cap on candidate-entropy evaluations spent building the
    /// grid; large `N − M` gets a coarser grid.
    pub work_budget: usize,
}

impl Default for BoundOptions {
    fn default() -> Self {
        BoundOptions {
            grid: 4096,
            min_grid: 64,
            work_budget: 20_000_000,
        }
    }
}

/// Full report for the untransformed system.
pub fn bound_report(n: usize, m: usize, h: f64, opts: &BoundOptions) -> Result<BoundReport> {
    let inverter = TightInverter::with_options(n, m, opts)?;
    report_with(&inverter, h, 1, ReportMode::Direct)
}

/// Builds a report re-using a prepared inverter for `(N, M)`.
pub fn report_with(
    inverter: &TightInverter,
    h: f64,
    k: usize,
    mode: ReportMode,
) -> Result<BoundReport> {
    let (n, m) = (inverter.n(), inverter.m());
    let checked = check_args(n, m, h)?;
    let mut clamped = Vec::new();
    if checked != h && h > 0.0 {
        clamped.push(ClampFlag::Entropy);
    }
    let h = checked;
    let hi = max_pi(n, m);

    let lb_raw = pi_lower_bound_raw(n, m, h)?;
    let lb = pi_lower_bound(n, m, h)?;
    if at_uniform(n, h) && lb_raw < hi {
        clamped.push(ClampFlag::LowerAtUniform);
    } else if lb_raw < 0.0 {
        clamped.push(ClampFlag::LowerAtZero);
    } else if lb_raw > hi {
        clamped.push(ClampFlag::LowerAtFeasibility);
    }
    let ub_raw = pi_upper_bound_raw(n, m, h)?;
    let ub = ub_raw.clamp(lb, hi);
    if ub_raw > hi {
        clamped.push(ClampFlag::UpperAtFeasibility);
    } else if ub_raw < lb {
        clamped.push(ClampFlag::UpperAtLower);
    }
    let (lb_tight, ub_tight) = inverter.bounds(h)?;
    let floor = m as f64 / n as f64;
    let report = BoundReport {
        n,
        m,
        k,
        mode,
        entropy_bits: h,
        pi_lb_analytic: lb,
        pi_ub_analytic: ub,
        pi_lb_tight: lb_tight,
        pi_ub_tight: ub_tight,
        pi_lb_raw: lb_raw,
        pi_ub_raw: ub_raw,
        psi_lb: (1.0 - ub).clamp(floor, 1.0),
        psi_ub: (1.0 - lb).clamp(floor, 1.0),
        flawed_pi_lb: flawed_pi_lower_bound(n, m, h)?,
        clamped,
    };
    let finite = [
        report.pi_lb_analytic,
        report.pi_ub_analytic,
        report.pi_lb_tight,
        report.pi_ub_tight,
    ]
    .iter()
    .all(|v| v.is_finite());
    if !finite {
        return Err(Error::Numeric(alloc::format!(
            "non-finite bound for n={n}, m={m}, H={h}"
        )));
    }
    Ok(report)
}

/// Bounds for performance requirement `k`: transform the system, take the
/// entropy `H′` of the transformed distribution, and apply the `k = 1` bounds
/// to `(N′, M′, H′)`.
pub fn bounds_for_k(
    d: &SortedDistribution,
    m: usize,
    k: usize,
    kind: TransformKind,
    limits: &TransformLimits,
    opts: &BoundOptions,
) -> Result<BoundReport> {
    let sys = transform::transform(d, m, k, kind, limits)?;
    sys.bound_report(opts)
}
