//! Application wrappers: cache prefetching and opportunistic scheduling.
//!
//! * Cache: `N` equal-size pages with popularity weights, `M` cache slots
//!   holding the most popular pages. A request batch misses when any requested
//!   page is not cached. One request (`cache_single`), `k` distinct pages from
//!   one user (`cache_multipage`, unique transform) or one page from each of `k`
//!   independent users (`cache_multiuser`, repeated transform).
//! * Scheduling: `N` clients weighted by their chance of a good channel, `M`
//!   channels given to the best `M` clients. Success means the `M` clients that
//!   turn out good are exactly the scheduled ones, i.e. the unique transform
//!   with `k = M`, reported as a merit probability.
//!
//! Weights are taken as already encoding the "good performance" score; any
//! threshold used to produce them is kept only as a note.
//!
//! Monte Carlo trials run in blocks of [`TRIAL_BLOCK`], each with its own
//! ChaCha8 stream, so a parallel driver gets the same counts as
//! [`run_scenario`].

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::{bound_report, BoundOptions, BoundReport};
use crate::distribution::{entropy, make_distribution, SortedDistribution, DEFAULT_EPS};
use crate::error::{Error, Result};
use crate::math;
use crate::transform::{transform, TransformKind, TransformLimits};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    CacheSingle,
    CacheMultipage,
    CacheMultiuser,
    Scheduling,
}

impl ScenarioKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::CacheSingle => "cache_single",
            ScenarioKind::CacheMultipage => "cache_multipage",
            ScenarioKind::CacheMultiuser => "cache_multiuser",
            ScenarioKind::Scheduling => "scheduling",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            ScenarioKind::CacheSingle,
            ScenarioKind::CacheMultipage,
            ScenarioKind::CacheMultiuser,
            ScenarioKind::Scheduling,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
    }

    pub fn is_cache(self) -> bool {
        self != ScenarioKind::Scheduling
    }

    /// Which rate the report's `*_rate` fields measure.
    pub fn metric(self) -> RateKind {
        if self.is_cache() {
            RateKind::Miss
        } else {
            RateKind::Merit
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RateKind {
    /// Error probability `π`.
    Miss,
    /// Merit probability `ψ = 1 − π`.
    Merit,
}

impl RateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RateKind::Miss => "miss",
            RateKind::Merit => "merit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Popularity {
    /// `q(a_i) = i^(−s)` for `i = 1..N`.
    Zipf(f64),
    /// Explicit non-negative weights, one per object.
    Weights(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub popularity: Popularity,
    pub trials: u64,
    pub seed: u64,
    pub threshold_note: Option<String>,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::BadConfig(msg));
        if self.m == 0 || self.m > self.n {
            return Err(Error::BadM {
                m: self.m,
                n: self.n,
            });
        }
        if self.k == 0 || self.k > self.m {
            return Err(Error::BadK {
                k: self.k,
                m: self.m,
            });
        }
        match self.kind {
            ScenarioKind::CacheSingle if self.k != 1 => {
                return bad(alloc::format!("k = {}: cache_single needs k = 1", self.k));
            }
            ScenarioKind::Scheduling if self.k != self.m => {
                return bad(alloc::format!(
                    "k = {}: scheduling needs k = m = {}",
                    self.k,
                    self.m
                ));
            }
            _ => {}
        }
        match &self.popularity {
            Popularity::Zipf(s) if !(*s > 0.0 && s.is_finite()) => {
                bad(alloc::format!("zipf_s = {s}: must be finite and > 0"))
            }
            Popularity::Weights(w) if w.len() != self.n => bad(alloc::format!(
                "weights: {} entries for n = {}",
                w.len(),
                self.n
            )),
            _ => Ok(()),
        }
    }

    pub fn distribution(&self) -> Result<SortedDistribution> {
        match &self.popularity {
            Popularity::Zipf(s) => make_distribution(&zipf_weights(self.n, *s)),
            Popularity::Weights(w) => make_distribution(w),
        }
    }
}

/// Unnormalized Zipf weights `i^(−s)`, `i = 1..n`.
pub fn zipf_weights(n: usize, s: f64) -> Vec<f64> {
    (1..=n).map(|i| libm::pow(i as f64, -s)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub kind: ScenarioKind,
    pub metric: RateKind,
    pub bound_report: BoundReport,
    /// Observed miss or merit frequency.
    pub empirical_rate: f64,
    pub trials: u64,
    /// Trials that hit (cache) or succeeded (scheduling).
    pub hits: u64,
    pub misses: u64,
    /// Exact rate when the top `M` objects are selected and a composite counts
    /// as selected when all its members are.
    pub exact_rate: f64,
    /// Exact rate of the best `M′` composites of the transformed system. This
    /// is the quantity the bounds govern.
    pub optimal_rate: f64,
    /// Input ids of the selected objects, most probable first.
    pub selected_ids: Vec<usize>,
    /// `optimal_rate` lies inside the analytic bounds.
    pub within_bounds: bool,
    /// The membership selection differs from the best `M′` composites.
    pub selection_mismatch: bool,
    pub threshold_note: Option<String>,
}

/// Number of trials per RNG stream.
pub const TRIAL_BLOCK: u64 = 8192;

/// A validated scenario with its exact quantities computed, ready for trials.
#[derive(Debug, Clone)]
pub struct PreparedScenario {
    cfg: ScenarioConfig,
    report: BoundReport,
    exact_pi: f64,
    optimal_pi: f64,
    mismatch: bool,
    selected_ids: Vec<usize>,
    cdf: Vec<f64>,
}

pub fn prepare(
    cfg: &ScenarioConfig,
    opts: &BoundOptions,
    limits: &TransformLimits,
) -> Result<PreparedScenario> {
    cfg.validate()?;
    let d = cfg.distribution()?;
    let (report, exact_pi, optimal_pi, mismatch) = match cfg.kind {
        ScenarioKind::CacheSingle => {
            let pi = d.tail_probability(cfg.m)?;
            (
                bound_report(cfg.n, cfg.m, entropy(&d).bits(), opts)?,
                pi,
                pi,
                false,
            )
        }
        kind => {
            let tk = if kind == ScenarioKind::CacheMultiuser {
                TransformKind::Repeated
            } else {
                TransformKind::Unique
            };
            let sys = transform(&d, cfg.m, cfg.k, tk, limits)?;
            (
                sys.bound_report(opts)?,
                sys.membership_pi(),
                sys.optimal_pi(),
                sys.selection_mismatch(DEFAULT_EPS),
            )
        }
    };
    let mut acc = math::CompensatedSum::new();
    let cdf = d
        .probs()
        .iter()
        .map(|&p| {
            acc.add(p);
            acc.value()
        })
        .collect();
    Ok(PreparedScenario {
        cfg: cfg.clone(),
        report,
        exact_pi,
        optimal_pi,
        mismatch,
        selected_ids: d.original_index()[..cfg.m].to_vec(),
        cdf,
    })
}

impl PreparedScenario {
    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn block_count(&self) -> u64 {
        self.cfg.trials.div_ceil(TRIAL_BLOCK)
    }

    /// Runs block `block` and returns the number of misses (cache) or failures
    /// (scheduling) in it.
    pub fn run_block(&self, block: u64) -> u64 {
        let start = block * TRIAL_BLOCK;
        let count = TRIAL_BLOCK.min(self.cfg.trials.saturating_sub(start));
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(block);
        let mut taken = alloc::vec![false; self.cdf.len()];
        let mut failures = 0;
        for _ in 0..count {
            failures += u64::from(!self.trial_ok(&mut rng, &mut taken));
        }
        failures
    }

    fn trial_ok(&self, rng: &mut ChaCha8Rng, taken: &mut [bool]) -> bool {
        let m = self.cfg.m;
        if self.cfg.kind == ScenarioKind::CacheMultiuser {
            return (0..self.cfg.k).all(|_| self.draw(rng) < m);
        }
        taken.fill(false);
        let mut ok = true;
        for _ in 0..self.cfg.k {
            let a = self.draw_without(rng, taken);
            taken[a] = true;
            ok &= a < m;
        }
        ok
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> usize {
        let total = self.cdf[self.cdf.len() - 1];
        let u = rng.random::<f64>() * total;
        self.cdf
            .partition_point(|&c| c <= u)
            .min(self.cdf.len() - 1)
    }

    // Rejection from the full distribution is exact for sampling without
    // replacement; fall back to a scan when the drawn mass is large.
    fn draw_without(&self, rng: &mut ChaCha8Rng, taken: &[bool]) -> usize {
        for _ in 0..64 {
            let a = self.draw(rng);
            if !taken[a] {
                return a;
            }
        }
        let weight = |i: usize| {
            let lo = if i == 0 { 0.0 } else { self.cdf[i - 1] };
            self.cdf[i] - lo
        };
        let free: f64 = (0..self.cdf.len()).filter(|&i| !taken[i]).map(weight).sum();
        let mut u = rng.random::<f64>() * free;
        let mut last = 0;
        for i in (0..self.cdf.len()).filter(|&i| !taken[i]) {
            let w = weight(i);
            if w > 0.0 {
                last = i;
                if u < w {
                    return i;
                }
                u -= w;
            }
        }
        last
    }

    /// Assembles the report from the total failure count over all blocks.
    pub fn finish(self, failures: u64) -> ScenarioReport {
        let trials = self.cfg.trials;
        let metric = self.cfg.kind.metric();
        let miss_rate = if trials == 0 {
            f64::NAN
        } else {
            failures as f64 / trials as f64
        };
        let as_metric = |pi: f64| match metric {
            RateKind::Miss => pi,
            RateKind::Merit => 1.0 - pi,
        };
        let optimal_pi = self.optimal_pi;
        ScenarioReport {
            kind: self.cfg.kind,
            metric,
            within_bounds: self.report.contains(optimal_pi, DEFAULT_EPS),
            empirical_rate: as_metric(miss_rate),
            trials,
            hits: trials - failures,
            misses: failures,
            exact_rate: as_metric(self.exact_pi),
            optimal_rate: as_metric(optimal_pi),
            bound_report: self.report,
            selected_ids: self.selected_ids,
            selection_mismatch: self.mismatch,
            threshold_note: self.cfg.threshold_note,
        }
    }
}

/// Prepares and runs all trials serially.
pub fn run_scenario(
    cfg: &ScenarioConfig,
    opts: &BoundOptions,
    limits: &TransformLimits,
) -> Result<ScenarioReport> {
    let prepared = prepare(cfg, opts, limits)?;
    let failures = (0..prepared.block_count())
        .map(|b| prepared.run_block(b))
        .sum();
    Ok(prepared.finish(failures))
}

/// Cache variants only.
pub fn cache_scenario(
    cfg: &ScenarioConfig,
    opts: &BoundOptions,
    limits: &TransformLimits,
) -> Result<ScenarioReport> {
    if !cfg.kind.is_cache() {
        return Err(Error::BadConfig(
            "kind: cache_scenario needs a cache kind".into(),
        ));
    }
    run_scenario(cfg, opts, limits)
}

/// Scheduling only.
pub fn scheduling_scenario(
    cfg: &ScenarioConfig,
    opts: &BoundOptions,
    limits: &TransformLimits,
) -> Result<ScenarioReport> {
    if cfg.kind != ScenarioKind::Scheduling {
        return Err(Error::BadConfig(
            "kind: scheduling_scenario needs kind = scheduling".into(),
        ));
    }
    run_scenario(cfg, opts, limits)
}
