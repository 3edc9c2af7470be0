//! Cross-module properties: extremes sandwich every distribution, bounds
//! nest, transformed systems obey the single-object bounds, and the
//! randomized minimum-entropy search agrees with the exact minimum.

use proptest::prelude::*;

use selbound_core::bounds::{
    bound_report, bounds_for_k, entropy_lower_bound_omega, pi_lower_bound, pi_upper_bound,
};
use selbound_core::extrema::{max_entropy, min_entropy, min_entropy_bits};
use selbound_core::oracle::{
    check_min_entropy_point, min_entropy_grid, run_sweep, sample_distribution, scenario_rng,
    summarize, Sampler, SweepConfig,
};
use selbound_core::scenarios::{run_scenario, Popularity, ScenarioConfig, ScenarioKind};
use selbound_core::{
    entropy, make_distribution, BoundOptions, SystemShape, TransformKind, TransformLimits,
    DEFAULT_EPS,
};

fn opts() -> BoundOptions {
    BoundOptions {
        grid: 256,
        ..BoundOptions::default()
    }
}

fn weights(max_n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, 1..=max_n)
        .prop_filter("some mass", |w| w.iter().sum::<f64>() > 1e-3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn extremes_sandwich_entropy(w in weights(9), m_frac in 0.0f64..1.0) {
        let d = make_distribution(&w).unwrap();
        let m = 1 + ((d.len() - 1) as f64 * m_frac) as usize;
        let shape = SystemShape::of(&d, m).unwrap();
        let h = entropy(&d).bits();
        prop_assert!(h <= max_entropy(&shape) + 1e-9);
        prop_assert!(h >= min_entropy_bits(&shape) - 1e-9);
        prop_assert!(min_entropy_bits(&shape) >= entropy_lower_bound_omega(&shape) - 1e-9);
    }

    #[test]
    fn tight_bounds_nest_inside_analytic(w in weights(10), m_frac in 0.0f64..1.0) {
        let d = make_distribution(&w).unwrap();
        let m = 1 + ((d.len() - 1) as f64 * m_frac) as usize;
        let pi = d.tail_probability(m).unwrap();
        let r = bound_report(d.len(), m, entropy(&d).bits(), &opts()).unwrap();
        prop_assert!(r.pi_lb_analytic <= r.pi_lb_tight + 1e-9);
        prop_assert!(r.pi_ub_tight <= r.pi_ub_analytic + 1e-9);
        prop_assert!(r.pi_lb_tight <= pi + 1e-9 && pi <= r.pi_ub_tight + 1e-9);
        prop_assert!(r.contains(pi, 1e-9));
    }

    #[test]
    fn transformed_systems_obey_bounds(w in weights(6), m_frac in 0.0f64..1.0, k_frac in 0.0f64..1.0, repeated: bool) {
        let d = make_distribution(&w).unwrap();
        let support = d.probs().iter().filter(|&&p| p > 0.0).count();
        let m = 1 + ((d.len() - 1) as f64 * m_frac) as usize;
        let k = 1 + ((m - 1) as f64 * k_frac) as usize;
        let kind = if repeated { TransformKind::Repeated } else { TransformKind::Unique };
        prop_assume!(repeated || support >= k);
        let limits = TransformLimits::default();
        let sys = selbound_core::transform::transform(&d, m, k, kind, &limits).unwrap();
        let r = bounds_for_k(&d, m, k, kind, &limits, &opts()).unwrap();
        prop_assert!(r.contains(sys.optimal_pi(), 1e-9));
        prop_assert!((r.entropy_bits - sys.entropy_bits()).abs() <= 1e-12);
    }
}

#[test]
fn analytic_bounds_at_known_point() {
    let lb = pi_lower_bound(20, 6, 4.0).unwrap();
    assert!((lb - 0.339528855083281).abs() < 1e-12);
    assert!(pi_upper_bound(20, 6, 4.0).unwrap() >= lb);
}

#[test]
fn min_entropy_oracle_converges_on_small_grid() {
    let grid = min_entropy_grid(6, 12);
    let mut converged = 0;
    for (i, shape) in grid.iter().enumerate() {
        let p = check_min_entropy_point(shape, 20, 2000, 11, i).unwrap();
        assert!(p.passes(1e-9), "{p:?}");
        if p.oracle - p.exact <= 1e-6 {
            converged += 1;
        }
    }
    assert!(
        converged as f64 >= 0.95 * grid.len() as f64,
        "{converged}/{}",
        grid.len()
    );
}

#[test]
fn min_entropy_result_is_attained() {
    let shape = SystemShape::new(15, 5, 0.4).unwrap();
    let r = min_entropy(&shape).unwrap();
    let d = &r.argmin().distribution;
    assert!((d.tail_probability(5).unwrap() - 0.4).abs() < 1e-12);
    assert!((entropy(d).bits() - r.min_entropy_bits).abs() < 1e-12);
}

#[test]
fn sampled_distributions_are_deterministic() {
    let a = sample_distribution(12, Sampler::Spiky(0.2), &mut scenario_rng(9, 1, 2)).unwrap();
    let b = sample_distribution(12, Sampler::Spiky(0.2), &mut scenario_rng(9, 1, 2)).unwrap();
    let c = sample_distribution(12, Sampler::Spiky(0.2), &mut scenario_rng(9, 1, 3)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn small_sweep_has_no_violations() {
    let mut cfg = SweepConfig::new(vec![(8, 2), (8, 4), (12, 3)], 21);
    cfg.scenarios_per_shape = 30;
    cfg.bounds = opts();
    let records = run_sweep(&cfg).unwrap();
    assert_eq!(records.len(), 90);
    let s = summarize(&records);
    assert_eq!(s.violations, 0);
    assert_eq!(s.failures, 0);
    assert!(records
        .iter()
        .all(|r| r.pi_lb_analytic <= r.pi_observed + DEFAULT_EPS));
}

#[test]
fn scenario_rate_tracks_exact_value() {
    let cfg = ScenarioConfig {
        kind: ScenarioKind::CacheMultipage,
        n: 8,
        m: 4,
        k: 2,
        popularity: Popularity::Zipf(1.2),
        trials: 40_000,
        seed: 3,
        threshold_note: None,
    };
    let r = run_scenario(&cfg, &opts(), &TransformLimits::default()).unwrap();
    let sigma = (r.exact_rate * (1.0 - r.exact_rate) / r.trials as f64).sqrt();
    assert!((r.empirical_rate - r.exact_rate).abs() <= 5.0 * sigma);
    assert_eq!(r.hits + r.misses, r.trials);
    assert!(r.within_bounds);
}
