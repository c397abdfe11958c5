use std::f64::consts::PI;

use approx::assert_abs_diff_eq;

use crate::copropagating::{
    compute_c1, conditional_phase, metrics_copropagating, phase_curve, transition_k0,
    two_particle_copropagating, CopropagatingFamily, OverlapCoeffs,
};
use crate::numerics::{make_grid, Grid1D, GridSpec, PulseProfile, Rule, SystemParams};
use crate::state::{free_state, normalize, overlap};

fn gaussian() -> PulseProfile {
    PulseProfile::gaussian(1.0, 0.0).unwrap()
}

fn family(k0: f64) -> CopropagatingFamily {
    let g = gaussian();
    CopropagatingFamily::from_spec(&g, &g, k0, &GridSpec::default()).unwrap()
}

#[test]
fn wide_band_kernel_leaves_state_nearly_untouched() {
    // sinc(1000 z) needs sub-period panels along Z1; Z2 only sees it
    // through Z1 integrals
    let g = gaussian();
    let k0 = 1e3;
    let breaks: Vec<f64> = (0..=2800).map(|i| -7.0 + 0.005 * i as f64).collect();
    let grid1 = Grid1D::composite(&breaks, 6).unwrap();
    let grid2 = make_grid(-7.0, 7.0, 281, Rule::Uniform).unwrap();
    let fam = CopropagatingFamily::new(&g, &g, k0, &grid1, &grid2).unwrap();
    let m = fam.metrics(0.2).unwrap();
    assert!((1.0 - m.fidelity).abs() < 1e-3, "F = {}", m.fidelity);
    let closed = OverlapCoeffs::compute(&g, &g, k0, 1e-6)
        .unwrap()
        .fidelity(0.2)
        .unwrap();
    assert_abs_diff_eq!(m.fidelity, closed, epsilon = 1e-4);
}

#[test]
fn norm_equals_fidelity_denominator() {
    let g = gaussian();
    let c = OverlapCoeffs::compute(&g, &g, 1.0, 1e-9).unwrap();
    let n2 = family(1.0).norm_squared(PI).unwrap();
    assert_abs_diff_eq!(n2, 1.0 - 4.0 * (c.c1 - c.c2), epsilon = 1e-3);
}

#[test]
fn grid_overlap_matches_closed_forms() {
    let g = gaussian();
    let spec = GridSpec::default();
    let grid2 = spec.build().unwrap();
    let grid1 = spec.tail_grid((spec.lower, spec.upper), 2.5).unwrap();
    let p = SystemParams::copropagating(2.5, PI / 2.0, 0.0).unwrap();
    let psi = normalize(two_particle_copropagating(&g, &g, &p, &grid1, &grid2).unwrap()).unwrap();
    let free = normalize(free_state(&g, &g, &p, 0.0, &grid1, &grid2)).unwrap();
    let o = overlap(&free, &psi).unwrap();
    let m = metrics_copropagating(&g, &g, 2.5, PI / 2.0).unwrap();
    assert_abs_diff_eq!(o.norm_sqr(), m.fidelity, epsilon = 1e-3);
    assert_abs_diff_eq!(o.arg(), m.phase, epsilon = 1e-3);
}

#[test]
fn narrow_band_collapses_fidelity_rather_than_entangling() {
    let at = |k0: f64| family(k0).with_entropy().metrics(PI).unwrap();
    let (a, b) = (at(0.1), at(0.5));
    assert!(a.entropy.unwrap() < b.entropy.unwrap(), "{a:?} {b:?}");
    assert!(a.fidelity < b.fidelity);
}

#[test]
fn transition_fidelity_and_phase() {
    let g = gaussian();
    let m = metrics_copropagating(&g, &g, 2.5, PI).unwrap();
    assert!(m.fidelity <= 1e-3);
    // C1(2.5) sits just below 1/2, where the phase at Φ = π is back to 0
    assert!(m.phase.abs() < 1e-9);
    let c1 = compute_c1(&g, &g, 2.5, 1e-9).unwrap();
    let peak = (c1 / (1.0 - c1)).asin();
    let curve = phase_curve(
        c1,
        &(0..=20000)
            .map(|k| PI * k as f64 / 20000.0)
            .collect::<Vec<_>>(),
    )
    .unwrap();
    let top = curve.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert_abs_diff_eq!(top, peak, epsilon = 1e-6);
    let m0 = metrics_copropagating(&g, &g, 2.5, 0.0).unwrap();
    assert_eq!((m0.fidelity, m0.phase), (1.0, 0.0));
}

#[test]
fn fidelity_at_pi_recovers_with_bandwidth() {
    let g = gaussian();
    let f = |k0| metrics_copropagating(&g, &g, k0, PI).unwrap().fidelity;
    assert!(f(10.0) > f(5.0));
}

#[test]
fn phase_examples() {
    assert_eq!(conditional_phase(0.3, 0.0).unwrap(), 0.0);
    assert_abs_diff_eq!(conditional_phase(0.5, 1.2).unwrap(), 0.6, epsilon = 1e-15);
    assert_abs_diff_eq!(conditional_phase(0.98, PI).unwrap(), PI, epsilon = 1e-12);
    assert_abs_diff_eq!(conditional_phase(0.20, PI).unwrap(), 0.0, epsilon = 1e-12);
}

#[test]
fn square_pulses_share_the_two_regimes() {
    let s = PulseProfile::square(2.0, 0.0).unwrap();
    let k_star = transition_k0(&s, &s, 0.5, 8.0, 1e-4).unwrap();
    assert!((k_star - 2.5).abs() > 0.1);
    let phis: Vec<f64> = (0..=1000).map(|k| 2.0 * PI * k as f64 / 1000.0).collect();
    let sup = |k0: f64| {
        let c1 = compute_c1(&s, &s, k0, 1e-9).unwrap();
        phase_curve(c1, &phis)
            .unwrap()
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
    };
    assert!(sup(k_star - 0.3) > PI / 2.0);
    assert!(sup(k_star + 0.3) < PI / 2.0);
    for k0 in [0.1, 1.0, 3.0, 10.0] {
        let c = OverlapCoeffs::compute(&s, &s, k0, 1e-6).unwrap();
        assert!(c.c2 >= c.c1 * c.c1);
    }
}
