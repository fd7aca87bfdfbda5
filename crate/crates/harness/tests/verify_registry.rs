use chebhmc_harness::verify::{registry, run_checks, FaultInjection};

const EXPECTED: [&str; 26] = [
    "chebyshev.cosine_product_below_polynomial",
    "chebyshev.polynomial_within_rate_bound",
    "chebyshev.psi_bounded_by_one",
    "chebyshev.polynomial_equals_root_product",
    "chebyshev.closed_form_matches_recurrence",
    "chebyshev.gradient_descent_matches_polynomial",
    "schedules.pair_sums_nondecreasing",
    "schedules.permutation_invariant_product",
    "schedules.average_time_near_midpoint",
    "potentials.gradient_matches_finite_differences",
    "potentials.mixture_convexity_gate",
    "potentials.hard_curvature_in_range",
    "potentials.logistic_curvature_floor",
    "ideal_flow.energy_conserved",
    "ideal_flow.coupling_identity",
    "ideal_flow.contraction_within_rate_bound",
    "ideal_flow.coupled_gap_equals_contraction",
    "hmc_sampler.reversible",
    "hmc_sampler.volume_preserving",
    "hmc_sampler.energy_error_second_order",
    "hmc_sampler.rejection_repeats_position",
    "hmc_sampler.stationary_under_target",
    "diagnostics.iid_ess_near_n",
    "diagnostics.tv_symmetric_and_bounded",
    "diagnostics.w2_triangle_inequality",
    "diagnostics.cov_error_order_invariant",
];

// Both schedule-shape statements are false for Chebyshev roots; see README.
const KNOWN_FALSE: [&str; 2] = ["schedules.pair_sums_nondecreasing", "schedules.average_time_near_midpoint"];

#[test]
fn registry_is_complete_and_unique() {
    let ids: Vec<&str> = registry().iter().map(|c| c.id).collect();
    assert_eq!(ids, EXPECTED);
    for c in registry() {
        assert!(!c.module.is_empty() && !c.description.is_empty(), "{}", c.id);
    }
}

#[test]
fn every_check_outcome() {
    let results = run_checks(None, &FaultInjection::default());
    assert_eq!(results.len(), EXPECTED.len());
    for r in &results {
        let expect_pass = !KNOWN_FALSE.contains(&r.id);
        assert_eq!(r.passed, expect_pass, "{}: {}", r.id, r.detail);
    }
}

#[test]
fn prefix_filter() {
    let results = run_checks(Some("ideal_flow."), &FaultInjection::default());
    assert_eq!(results.len(), 4);
    assert!(results.iter().all(|r| r.module == "ideal_flow" && r.passed));
    assert!(run_checks(Some("nope"), &FaultInjection::default()).is_empty());
}

#[test]
fn perturbed_root_is_caught() {
    let fault = FaultInjection { root_perturbation: Some(0.01) };
    let results = run_checks(Some("chebyshev.cosine_product_below_polynomial"), &fault);
    assert_eq!(results.len(), 1);
    assert!(!results[0].passed, "{}", results[0].detail);
}
