mod common;

use std::f64::consts::PI;

use common::*;
use cornerflow::diagnostics::{curvature_integral, ScanOptions};
use cornerflow::profile::{build_profile, spectral_filter, Experiment};
use cornerflow::shooting::{classify_blowup, find_admissible_v0, InitialPair};
use proptest::prelude::*;

#[test]
fn ode_stepper_is_fourth_order() {
    let p = ode_order();
    assert!((3.5..=4.5).contains(&p), "ODE order {p}");
}

#[test]
fn pde_stepper_is_fourth_order() {
    let p = pde_order();
    assert!((3.5..=4.5).contains(&p), "PDE order {p}");
}

#[test]
fn pde_local_error_is_fifth_order() {
    let p = pde_local_order();
    assert!(p >= 4.7, "local order {p}");
}

#[test]
fn forward_backward_error_scales_like_dt4() {
    let [(h1, e1), (h2, e2)] = round_trip_errors();
    // out and back over t = 0.2; the round trip cancels part of the local error
    assert!(e1 <= 1e4 * h1.powi(4), "round trip error {e1}");
    assert!(e2 <= 1e4 * h2.powi(4), "round trip error {e2}");
    assert!((e1 / e2).log2() >= 3.5, "round trip errors {e1:e}, {e2:e}");
}

#[test]
fn turning_and_curvature_sum_are_conserved() {
    let (exact, worst) = turning_conservation();
    assert!(exact);
    assert!(worst < 1e-12, "sum k ds off by {worst:e}");
}

#[test]
fn ode_solutions_are_odd_in_the_initial_pair() {
    assert!(ode_oddness(InitialPair { u0: 0.3, v0: -0.2 }) <= 1e-8);
}

#[test]
fn filtering_again_changes_less_than_the_first_pass() {
    let p = build_profile(&Experiment::Short.config()).unwrap().profile;
    let f1 = spectral_filter(&p);
    let f2 = spectral_filter(&f1);
    let first = max_diff(&f1.theta, &p.theta);
    let second = max_diff(&f2.theta, &f1.theta);
    assert!(second <= first, "{second:e} > {first:e}");
    assert_eq!(f2.theta[0], p.theta_minus);
    assert_eq!(f2.theta[p.n], p.theta_plus);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn integrating_factor_is_exact_for_the_linear_flow(
        amps in prop::collection::vec(-1.0f64..1.0, 6),
        phases in prop::collection::vec(0.0f64..6.3, 6),
        dt in -0.1f64..0.1,
        steps in 1usize..20,
    ) {
        let err = linear_flow_error(&amps, &phases, dt, steps);
        prop_assert!(err <= 1e-13, "error {:e}", err);
    }

    #[test]
    fn unit_circle_has_area_pi(log_n in 6u32..12, phase in -PI..PI) {
        let (gap, area_err) = unit_circle(1 << log_n, phase);
        prop_assert!(gap < 1e-10);
        prop_assert!(area_err.abs() <= 1e-6);
    }

    #[test]
    fn escape_direction_is_odd(u0 in -1.5f64..1.5, v0 in -1.5f64..1.5) {
        let pair = InitialPair { u0, v0 };
        let a = classify_blowup(pair, 20.0, 1e-3).unwrap();
        let b = classify_blowup(pair.negated(), 20.0, 1e-3).unwrap();
        prop_assert_eq!(a.sign(), -b.sign());
        prop_assert_eq!(a.x_escape(), b.x_escape());
    }

    #[test]
    fn backward_sweeps_are_odd(u0 in -1.5f64..1.5, v0 in -1.5f64..1.5) {
        let err = ode_oddness(InitialPair { u0, v0 });
        prop_assert!(err <= 1e-8, "{:e}", err);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn admissible_pairs_and_integrals_are_odd(u0 in 0.01f64..0.3) {
        let dx = 1e-3;
        let v0 = find_admissible_v0(u0, -1.0, 0.0, 0.0, 20.0, dx).unwrap();
        let w0 = find_admissible_v0(-u0, 0.0, 1.0, 0.0, 20.0, dx).unwrap();
        prop_assert!((v0 + w0).abs() <= 1e-8, "{} vs {}", v0, w0);
        let opts = ScanOptions { dx, ..Default::default() };
        let pair = InitialPair { u0, v0 };
        let i_plus = curvature_integral(pair, &opts).unwrap();
        let i_minus = curvature_integral(pair.negated(), &opts).unwrap();
        prop_assert!(i_plus > 0.0);
        prop_assert!((i_plus + i_minus).abs() <= 1e-8, "{} vs {}", i_plus, i_minus);
    }
}
