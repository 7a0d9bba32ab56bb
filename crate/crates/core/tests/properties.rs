mod common;

#[test]
fn projection_matches_face_enumeration() {
    common::projection_suite(1000).unwrap();
}

#[test]
fn fenchel_young_inequality_and_equality() {
    common::fenchel_young_suite(100).unwrap();
}

#[test]
fn smooth_convex_sandwich() {
    common::sandwich_suite(100).unwrap();
}

#[test]
fn gradient_matches_central_differences() {
    common::gradient_suite(100).unwrap();
}

#[test]
fn wasserstein_metric_axioms() {
    common::wasserstein_suite(100).unwrap();
}

#[test]
fn analytic_families_are_chebyshev_systems() {
    common::chebyshev_suite(50).unwrap();
}

#[test]
fn synthesis_is_linear_and_canonical_form_is_stable() {
    common::synthesis_suite(100).unwrap();
}

#[test]
fn traces_stay_feasible_and_nested() {
    common::trace_suite(10).unwrap();
}
