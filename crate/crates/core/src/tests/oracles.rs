//! Reference values computed independently with mpmath at 30 digits and
//! frozen here.

use std::f64::consts::PI;

use approx::assert_abs_diff_eq;

use crate::cli::Oracles;
use crate::copropagating::{
    compute_c1, compute_c2, fidelity_closed_form, transition_k0, OverlapCoeffs,
};
use crate::headon::{series_term, CollisionSetup};
use crate::numerics::{make_grid, GridSpec, ProfileSpec, PulseProfile, Rule, SystemParams};

const GAUSSIAN_C1: [(f64, f64); 8] = [
    (1e-4, 1.15470053581325),
    (0.01, 1.154674878880480),
    (0.1, 1.152139661049759),
    (0.5, 1.093634743126766),
    (1.0, 0.942225176350820),
    (2.5, 0.499374286362877),
    (5.0, 0.250662825516945),
    (10.0, 0.125331413731550),
];

/// k0 where C1 = 1/2 for unit Gaussians and for square pulses of width 2.
const GAUSSIAN_TRANSITION: f64 = 2.49675460102420;
const SQUARE_TRANSITION: f64 = 2.83405561678188;

fn gaussian() -> PulseProfile {
    PulseProfile::gaussian(1.0, 0.0).unwrap()
}

#[test]
fn gaussian_c1_table() {
    let g = gaussian();
    for (k0, c1) in GAUSSIAN_C1 {
        assert_abs_diff_eq!(compute_c1(&g, &g, k0, 1e-9).unwrap(), c1, epsilon = 1e-9);
    }
    // the zero-bandwidth limit (∫f)(∫f³) = 2/√3
    assert_abs_diff_eq!(
        compute_c1(&g, &g, 1e-4, 1e-9).unwrap(),
        2.0 / 3f64.sqrt(),
        epsilon = 1e-3
    );
}

#[test]
fn brute_force_c1_agrees_with_reference() {
    let g = gaussian();
    for (k0, c1) in [
        (2.5, 0.499374286362877),
        (5.0, 0.250662825516945),
        (10.0, 0.125331413731550),
    ] {
        assert_abs_diff_eq!(Oracles::brute_c1(&g, -10.0, 10.0, k0), c1, epsilon = 1e-12);
    }
}

#[test]
fn c1_decreases_past_the_transition() {
    let g = gaussian();
    let c = |k0| compute_c1(&g, &g, k0, 1e-6).unwrap();
    assert!(c(10.0) < c(5.0) && c(5.0) < c(2.5));
}

#[test]
fn square_c1_matches_sine_integral_form() {
    // C1(k) = Si(2k)/k − (1 − cos 2k)/(2k²) for w = 2
    let s = PulseProfile::square(2.0, 0.0).unwrap();
    for (k0, c1) in [
        (0.5, 0.972770752470645),
        (1.0, 0.897339558529124),
        (2.5, 0.562665472814928),
        (5.0, 0.294888088262246),
    ] {
        assert_abs_diff_eq!(compute_c1(&s, &s, k0, 1e-9).unwrap(), c1, epsilon = 1e-9);
    }
}

#[test]
fn transition_points() {
    let g = gaussian();
    assert_abs_diff_eq!(
        transition_k0(&g, &g, 0.5, 8.0, 1e-9).unwrap(),
        GAUSSIAN_TRANSITION,
        epsilon = 1e-8
    );
    let s = PulseProfile::square(2.0, 0.0).unwrap();
    assert_abs_diff_eq!(
        transition_k0(&s, &s, 0.5, 8.0, 1e-9).unwrap(),
        SQUARE_TRANSITION,
        epsilon = 1e-8
    );
}

#[test]
fn gaussian_c2_and_fourth_moment() {
    let g = gaussian();
    let grid = make_grid(-10.0, 10.0, 160, Rule::GaussLegendre).unwrap();
    assert_abs_diff_eq!(
        grid.integrate(|z| g.value(z).powi(4)),
        0.398942280401433,
        epsilon = 1e-12
    );
    assert_abs_diff_eq!(
        compute_c2(&g, &g, 2.5, 1e-9).unwrap(),
        0.501325654926200,
        epsilon = 1e-12
    );
    assert_abs_diff_eq!(
        compute_c2(&g, &g, 0.01, 1e-9).unwrap(),
        125.331413731550,
        epsilon = 1e-9
    );
}

#[test]
fn closed_form_fidelity_table() {
    let g = gaussian();
    // values rounded as printed; tolerances are half a unit in the last place
    let rows = [
        (0.01, 0.0034446, 5e-8, 0.0054429, 5e-8),
        (0.1, 0.0365649, 5e-8, 0.0568375, 5e-8),
        (0.5, 0.2119083, 5e-8, 0.3149003, 5e-8),
        (2.5, 1.55394e-6, 5e-12, 0.498057, 5e-7),
        (5.0, 0.2486761, 5e-8, 0.6243381, 5e-8),
        (10.0, 0.5615062, 5e-8, 0.7807531, 5e-8),
    ];
    for (k0, f_pi, tol_pi, f_half, tol_half) in rows {
        let c = OverlapCoeffs::compute(&g, &g, k0, 1e-9).unwrap();
        assert_abs_diff_eq!(c.fidelity(PI).unwrap(), f_pi, epsilon = tol_pi);
        assert_abs_diff_eq!(c.fidelity(PI / 2.0).unwrap(), f_half, epsilon = tol_half);
    }
    // the C1 = 1/2 zero
    assert_eq!(fidelity_closed_form(0.5, 0.5013, PI).unwrap(), 0.0);
}

#[test]
fn first_order_collision_term() {
    // pulses 10σ apart meeting at the origin; lab point z1 = z2 = 0 at
    // contact, primed coordinates (−5, 5)
    let p = SystemParams::head_on(1e-3, PI, 5e3, -5e3, 10.0).unwrap();
    assert_abs_diff_eq!(p.chi, 4934802.2005446793, epsilon = 1e-6);
    let setup = CollisionSetup::new(
        &ProfileSpec::default(),
        p,
        &GridSpec::default(),
        vec![1e-3],
        40,
    )
    .unwrap();
    let t1 = series_term(&setup, 1, 0.0, 0.0, 1e-3).unwrap();
    assert_abs_diff_eq!(t1.re, 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(t1.im, 0.111072054941949690, epsilon = 1e-12);
    let t2 = series_term(&setup, 2, 0.0, 0.0, 1e-3).unwrap();
    assert_abs_diff_eq!(t2.re, -0.0872353178535927, epsilon = 1e-12);
    assert_abs_diff_eq!(t2.im, 0.0, epsilon = 1e-15);
}
