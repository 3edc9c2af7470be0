//! JSON and CSV views of core results. Key names here are the stable output
//! schema.

use serde::Serialize;

use selbound_core::extrema::{CurveSample, MinEntropyResult};
use selbound_core::oracle::{GapPair, GapStats, SweepRecord, SweepSummary};
use selbound_core::scenarios::ScenarioReport;
use selbound_core::{BoundReport, TransformedSystem};

use crate::fmt::{bool01, sig12};

#[derive(Debug, Clone, Serialize)]
pub struct PiBounds {
    pub lb_analytic: f64,
    pub ub_analytic: f64,
    pub lb_tight: f64,
    pub ub_tight: f64,
    pub lb_raw: f64,
    pub ub_raw: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PsiBounds {
    pub lb: f64,
    pub ub: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReportJson {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub mode: &'static str,
    pub entropy_bits: f64,
    pub pi: PiBounds,
    pub psi: PsiBounds,
    pub clamped: Vec<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flawed_pi_lb: Option<f64>,
    /// Tail mass of the given distribution (best `M` objects or composites).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi_observed: Option<f64>,
    /// Mass of composites with a member outside the top `M` objects.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi_membership: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selection_mismatch: Option<bool>,
}

impl BoundReportJson {
    pub fn new(r: &BoundReport) -> Self {
        BoundReportJson {
            n: r.n,
            m: r.m,
            k: r.k,
            mode: r.mode.as_str(),
            entropy_bits: r.entropy_bits,
            pi: PiBounds {
                lb_analytic: r.pi_lb_analytic,
                ub_analytic: r.pi_ub_analytic,
                lb_tight: r.pi_lb_tight,
                ub_tight: r.pi_ub_tight,
                lb_raw: r.pi_lb_raw,
                ub_raw: r.pi_ub_raw,
            },
            psi: PsiBounds {
                lb: r.psi_lb,
                ub: r.psi_ub,
            },
            clamped: r.clamped.iter().map(|c| c.as_str()).collect(),
            flawed_pi_lb: None,
            pi_observed: None,
            pi_membership: None,
            selection_mismatch: None,
        }
    }

    pub fn with_flawed(mut self, r: &BoundReport) -> Self {
        self.flawed_pi_lb = Some(r.flawed_pi_lb);
        self
    }

    pub const CSV_HEADER: &'static str = "n,m,k,mode,entropy_bits,pi_lb_analytic,pi_ub_analytic,pi_lb_tight,pi_ub_tight,pi_lb_raw,pi_ub_raw,psi_lb,psi_ub,pi_observed,clamped";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.m,
            self.k,
            self.mode,
            sig12(self.entropy_bits),
            sig12(self.pi.lb_analytic),
            sig12(self.pi.ub_analytic),
            sig12(self.pi.lb_tight),
            sig12(self.pi.ub_tight),
            sig12(self.pi.lb_raw),
            sig12(self.pi.ub_raw),
            sig12(self.psi.lb),
            sig12(self.psi.ub),
            self.pi_observed.map(sig12).unwrap_or_default(),
            self.clamped.join(";"),
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DistributionJson {
    pub which: &'static str,
    pub n: usize,
    pub m: usize,
    pub pi: f64,
    pub distribution: Vec<f64>,
    pub entropy_bits: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<CandidateJson>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateJson {
    pub p_hat: f64,
    pub entropy_bits: f64,
}

impl CandidateJson {
    pub fn all(r: &MinEntropyResult) -> Vec<Self> {
        r.candidates
            .iter()
            .map(|c| CandidateJson {
                p_hat: c.p_hat,
                entropy_bits: c.entropy_bits,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveJson {
    pub n: usize,
    pub m: usize,
    pub pi: f64,
    pub y: usize,
    pub candidates: Vec<f64>,
    pub samples: Vec<CurveSampleJson>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveSampleJson {
    pub p_hat: f64,
    pub entropy_bits: f64,
    pub segment_index: usize,
    pub is_junction: bool,
}

impl From<&CurveSample> for CurveSampleJson {
    fn from(s: &CurveSample) -> Self {
        CurveSampleJson {
            p_hat: s.p_hat,
            entropy_bits: s.entropy_bits,
            segment_index: s.segment_index,
            is_junction: s.is_junction,
        }
    }
}

pub const CURVE_CSV_HEADER: &str = "p_hat,entropy_bits,segment_index,is_junction";

pub fn curve_csv_row(s: &CurveSample) -> String {
    format!(
        "{},{},{},{}",
        sig12(s.p_hat),
        sig12(s.entropy_bits),
        s.segment_index,
        bool01(s.is_junction)
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct TransformHeader {
    pub n_prime: usize,
    pub m_prime: usize,
    pub mode: &'static str,
    pub k: usize,
    pub entropy_bits: f64,
    pub pi_membership: f64,
    pub pi_optimal: f64,
    pub selection_mismatch: bool,
}

impl TransformHeader {
    pub fn new(sys: &TransformedSystem, eps: f64) -> Self {
        TransformHeader {
            n_prime: sys.n_prime,
            m_prime: sys.m_prime,
            mode: sys.kind.as_str(),
            k: sys.k,
            entropy_bits: sys.entropy_bits(),
            pi_membership: sys.membership_pi(),
            pi_optimal: sys.optimal_pi(),
            selection_mismatch: sys.selection_mismatch(eps),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompositeJson {
    pub ids: Vec<usize>,
    pub probability: f64,
    pub in_selected_set: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransformJson {
    #[serde(flatten)]
    pub header: TransformHeader,
    pub composites: Vec<CompositeJson>,
}

impl TransformJson {
    pub fn new(sys: &TransformedSystem, eps: f64) -> Self {
        TransformJson {
            header: TransformHeader::new(sys, eps),
            composites: sys
                .composites
                .iter()
                .zip(sys.dist.probs())
                .map(|(c, &p)| CompositeJson {
                    ids: c.ids.clone(),
                    probability: p,
                    in_selected_set: c.in_selected_set,
                })
                .collect(),
        }
    }
}

/// `# {header json}` line, CSV header, then one row per composite. Ids inside
/// a composite are separated by `;`.
pub fn transform_csv(sys: &TransformedSystem, eps: f64) -> String {
    let header = serde_json::to_string(&TransformHeader::new(sys, eps)).expect("header serializes");
    let mut out = format!("# {header}\ncomposite_ids,probability,in_selected_set\n");
    for (c, &p) in sys.composites.iter().zip(sys.dist.probs()) {
        let ids: Vec<String> = c.ids.iter().map(usize::to_string).collect();
        out.push_str(&format!(
            "{},{},{}\n",
            ids.join(";"),
            sig12(p),
            bool01(c.in_selected_set)
        ));
    }
    out
}

pub const SWEEP_CSV_HEADER: &str = "scenario_id,n,m,entropy_bits,pi_observed,pi_lb_analytic,pi_ub_analytic,pi_lb_tight,pi_ub_tight,violation";

pub fn sweep_csv_row(r: &SweepRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        r.scenario_id,
        r.n,
        r.m,
        sig12(r.entropy_bits),
        sig12(r.pi_observed),
        sig12(r.pi_lb_analytic),
        sig12(r.pi_ub_analytic),
        sig12(r.pi_lb_tight),
        sig12(r.pi_ub_tight),
        bool01(r.violation),
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRecordJson {
    pub scenario_id: usize,
    pub n: usize,
    pub m: usize,
    pub entropy_bits: f64,
    pub pi_observed: f64,
    pub pi_lb_analytic: f64,
    pub pi_ub_analytic: f64,
    pub pi_lb_tight: f64,
    pub pi_ub_tight: f64,
    pub violation: bool,
    pub tight_violation: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl From<&SweepRecord> for SweepRecordJson {
    fn from(r: &SweepRecord) -> Self {
        SweepRecordJson {
            scenario_id: r.scenario_id,
            n: r.n,
            m: r.m,
            entropy_bits: r.entropy_bits,
            pi_observed: r.pi_observed,
            pi_lb_analytic: r.pi_lb_analytic,
            pi_ub_analytic: r.pi_ub_analytic,
            pi_lb_tight: r.pi_lb_tight,
            pi_ub_tight: r.pi_ub_tight,
            violation: r.violation,
            tight_violation: r.tight_violation,
            error: r.error.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GapJson {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
}

impl From<GapStats> for GapJson {
    fn from(g: GapStats) -> Self {
        GapJson {
            count: g.count,
            mean: g.mean,
            median: g.median,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GapPairJson {
    pub analytic: GapJson,
    pub tight: GapJson,
}

impl From<GapPair> for GapPairJson {
    fn from(g: GapPair) -> Self {
        GapPairJson {
            analytic: g.analytic.into(),
            tight: g.tight.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ShapeGapJson {
    pub n: usize,
    pub m: usize,
    #[serde(flatten)]
    pub gaps: GapPairJson,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapStatsJson {
    pub per_shape: Vec<ShapeGapJson>,
    /// Shapes with `2M >= N`.
    pub m_ge_half_n: GapPairJson,
    /// Shapes with `2M < N`.
    pub m_lt_half_n: GapPairJson,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummaryJson {
    pub total: usize,
    pub violations: usize,
    pub tight_violations: usize,
    pub failures: usize,
    pub gap_stats: GapStatsJson,
}

impl From<&SweepSummary> for SweepSummaryJson {
    fn from(s: &SweepSummary) -> Self {
        SweepSummaryJson {
            total: s.total,
            violations: s.violations,
            tight_violations: s.tight_violations,
            failures: s.failures,
            gap_stats: GapStatsJson {
                per_shape: s
                    .per_shape
                    .iter()
                    .map(|p| ShapeGapJson {
                        n: p.n,
                        m: p.m,
                        gaps: p.gaps.into(),
                    })
                    .collect(),
                m_ge_half_n: s.large_m.into(),
                m_lt_half_n: s.small_m.into(),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioJson {
    #[serde(flatten)]
    pub bounds: BoundReportJson,
    pub kind: &'static str,
    pub metric: &'static str,
    pub empirical_rate: f64,
    pub exact_rate: f64,
    pub optimal_rate: f64,
    pub within_bounds: bool,
    pub selection_mismatch: bool,
    pub selected_ids: Vec<usize>,
    pub trials: u64,
    pub hits: u64,
    pub misses: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold_note: Option<String>,
}

impl From<&ScenarioReport> for ScenarioJson {
    fn from(r: &ScenarioReport) -> Self {
        ScenarioJson {
            bounds: BoundReportJson::new(&r.bound_report),
            kind: r.kind.as_str(),
            metric: r.metric.as_str(),
            empirical_rate: r.empirical_rate,
            exact_rate: r.exact_rate,
            optimal_rate: r.optimal_rate,
            within_bounds: r.within_bounds,
            selection_mismatch: r.selection_mismatch,
            selected_ids: r.selected_ids.clone(),
            trials: r.trials,
            hits: r.hits,
            misses: r.misses,
            threshold_note: r.threshold_note.clone(),
        }
    }
}
