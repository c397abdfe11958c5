//! Two pulses moving at the same group velocity.
//!
//! In co-moving coordinates `Z = z − vt` the interacting amplitude is
//!
//! ```text
//! ψ(Z1, Z2) = f1(Z1) f2(Z2) + f1(Z2) f2(Z2) sinc(k0 (Z1 − Z2)) (e^{iΦ} − 1)
//! ```
//!
//! and its overlap with the free product reduces to the two numbers C1, C2.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use ndarray::Array2;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{
    gauss_legendre, sinc, Grid1D, GridSpec, Mode, PulseProfile, Shape, SystemParams,
};
use crate::state::{LinearFamily, TwoParticleState};

/// Starting Gauss-Legendre order per axis for the coefficient integrals.
pub const COEFF_NODES: usize = 200;
const COEFF_MAX_NODES: usize = 6400;
pub const DEFAULT_COEFF_TOL: f64 = 1e-6;

/// Largest allowed jump of the unwrapped phase between neighbouring samples.
const STEP_GUARD: f64 = FRAC_PI_2;
/// Half-width of the probe used to take the limit through the removable
/// point (C1 = 1/2, Φ = π).
const LIMIT_PROBE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OverlapCoeffs {
    pub c1: f64,
    pub c2: f64,
    pub k0: f64,
    pub shape1: Shape,
    pub shape2: Shape,
}

impl OverlapCoeffs {
    pub fn compute(f1: &PulseProfile, f2: &PulseProfile, k0: f64, tol: f64) -> Result<Self> {
        let c = OverlapCoeffs {
            c1: compute_c1(f1, f2, k0, tol)?,
            c2: compute_c2(f1, f2, k0, tol)?,
            k0,
            shape1: f1.shape(),
            shape2: f2.shape(),
        };
        c.check()?;
        Ok(c)
    }

    /// `C1 > 0`, `C2 > 0` and `C2 ≥ C1²`, the condition for `F ≤ 1`.
    pub fn check(&self) -> Result<()> {
        if self.c1 > 0.0 && self.c2 > 0.0 && self.c2 >= self.c1 * self.c1 {
            Ok(())
        } else {
            Err(Error::InvalidCoefficients {
                c1: self.c1,
                c2: self.c2,
                denominator: 1.0 - 4.0 * (self.c1 - self.c2),
            })
        }
    }

    pub fn phase(&self, phi: f64) -> Result<f64> {
        conditional_phase(self.c1, phi)
    }

    pub fn fidelity(&self, phi: f64) -> Result<f64> {
        fidelity_closed_form(self.c1, self.c2, phi)
    }
}

/// Fidelity, conditional phase and (when computed) linear entropy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GateMetrics {
    pub fidelity: f64,
    pub phase: f64,
    pub entropy: Option<f64>,
}

impl GateMetrics {
    /// From `√F e^{iθ} = ⟨Φ0|Φout⟩`.
    pub fn from_overlap(c: Complex64, entropy: Option<f64>) -> Self {
        GateMetrics {
            fidelity: c.norm_sqr(),
            phase: c.arg(),
            entropy,
        }
    }

    pub fn check(&self) -> Result<()> {
        let f_ok = (0.0..=1.0 + 1e-9).contains(&self.fidelity);
        let s_ok = self.entropy.is_none_or(|s| (-1e-9..1.0).contains(&s));
        if f_ok && s_ok && self.phase.is_finite() {
            Ok(())
        } else {
            Err(Error::Contract(format!("metrics out of range: {self:?}")))
        }
    }
}

fn require_real(f: &PulseProfile) -> Result<()> {
    if f.is_real() {
        Ok(())
    } else {
        Err(Error::UnsupportedProfile(
            "closed-form coefficients need real profiles; use the grid path for complex ones"
                .into(),
        ))
    }
}

/// Gauss-Legendre nodes on `[lo, hi]`, split at interior kinks.
fn panel_rule(lo: f64, hi: f64, kinks: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut breaks = vec![lo];
    breaks.extend(kinks.iter().copied().filter(|&k| k > lo && k < hi));
    breaks.push(hi);
    let per = n.div_ceil(breaks.len() - 1).max(2);
    let (x, w) = gauss_legendre(per);
    let mut nodes = Vec::with_capacity(per * (breaks.len() - 1));
    let mut weights = Vec::with_capacity(nodes.capacity());
    for p in breaks.windows(2) {
        let (half, mid) = (0.5 * (p[1] - p[0]), 0.5 * (p[1] + p[0]));
        nodes.extend(x.iter().map(|&x| mid + half * x));
        weights.extend(w.iter().map(|&w| half * w));
    }
    (nodes, weights)
}

fn common_support(f1: &PulseProfile, f2: &PulseProfile) -> Result<(f64, f64)> {
    let (a1, b1) = f1.support();
    let (a2, b2) = f2.support();
    let (lo, hi) = (a1.max(a2), b1.min(b2));
    if lo < hi {
        Ok((lo, hi))
    } else {
        Err(Error::param("profiles do not overlap"))
    }
}

fn kinks(f1: &PulseProfile, f2: &PulseProfile) -> Vec<f64> {
    let mut k: Vec<f64> = f1.kinks();
    k.extend(f2.kinks());
    // square edges are kinks of the product when the supports differ
    for f in [f1, f2] {
        if f.shape() == Shape::Square {
            let (a, b) = f.support();
            k.extend([a, b]);
        }
    }
    k.sort_by(f64::total_cmp);
    k.dedup();
    k
}

/// Evaluate `estimate(n)` at n and 2n until the two agree to `tol`.
fn converge(tol: f64, estimate: impl Fn(usize) -> f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::param(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let mut n = COEFF_NODES;
    let mut coarse = estimate(n);
    loop {
        let fine = estimate(2 * n);
        if (fine - coarse).abs() <= tol {
            return Ok(fine);
        }
        n *= 2;
        if n > COEFF_MAX_NODES {
            return Err(Error::Accuracy {
                coarse,
                fine,
                tolerance: tol,
            });
        }
        coarse = fine;
    }
}

/// `C1 = ∫∫ f1(Z1) f1(Z2) f2(Z2)² sinc(k0 (Z1 − Z2))`.
pub fn compute_c1(f1: &PulseProfile, f2: &PulseProfile, k0: f64, tol: f64) -> Result<f64> {
    require_real(f1)?;
    require_real(f2)?;
    if !(k0 > 0.0) {
        return Err(Error::param(format!("k0 must be positive, got {k0}")));
    }
    let (a1, b1) = f1.support();
    let (lo, hi) = common_support(f1, f2)?;
    let k = kinks(f1, f2);
    converge(tol, |n| {
        let (x, wx) = panel_rule(a1, b1, &k, n);
        let (y, wy) = panel_rule(lo, hi, &k, n);
        let gx: Vec<f64> = x.iter().zip(&wx).map(|(&z, w)| w * f1.value(z)).collect();
        let gy: Vec<f64> = y
            .iter()
            .zip(&wy)
            .map(|(&z, w)| w * f1.value(z) * f2.value(z).powi(2))
            .collect();
        let mut total = 0.0;
        for (xi, gi) in x.iter().zip(&gx) {
            if *gi == 0.0 {
                continue;
            }
            let row: f64 = y
                .iter()
                .zip(&gy)
                .map(|(yj, gj)| gj * sinc(k0 * (xi - yj)))
                .sum();
            total += gi * row;
        }
        total
    })
}

/// `C2 = (π/k0) ∫ f1(Z)² f2(Z)² dZ`, the `Z1` integral of `sinc²` done
/// analytically.
pub fn compute_c2(f1: &PulseProfile, f2: &PulseProfile, k0: f64, tol: f64) -> Result<f64> {
    require_real(f1)?;
    require_real(f2)?;
    if !(k0 > 0.0) {
        return Err(Error::param(format!("k0 must be positive, got {k0}")));
    }
    let (lo, hi) = common_support(f1, f2)?;
    let k = kinks(f1, f2);
    let scale = PI / k0;
    converge(tol, |n| {
        let (x, w) = panel_rule(lo, hi, &k, n);
        scale
            * x.iter()
                .zip(&w)
                .map(|(&z, w)| w * (f1.value(z) * f2.value(z)).powi(2))
                .sum::<f64>()
    })
}

fn phase_args(c1: f64, phi: f64) -> (f64, f64) {
    (c1 * phi.sin(), 1.0 - c1 + c1 * phi.cos())
}

/// `θ = atan2(C1 sin Φ, 1 − C1 + C1 cos Φ)` on the principal branch.
pub fn conditional_phase(c1: f64, phi: f64) -> Result<f64> {
    if !(phi >= 0.0) || !phi.is_finite() {
        return Err(Error::param(format!(
            "phi must be finite and non-negative, got {phi}"
        )));
    }
    let (y, x) = phase_args(c1, phi);
    if y.abs() < 1e-12 && x.abs() < 1e-12 {
        return Err(Error::DegeneratePhase { c1, phi });
    }
    Ok(y.atan2(x))
}

fn nearest_branch(raw: f64, previous: f64) -> f64 {
    raw + TAU * ((previous - raw) / TAU).round()
}

/// Phase of `±(1 − C1 + C1 e^{iΦ})` on the branch nearest `previous`; the
/// sign is negative once the curve has passed through a zero of the
/// overlap. Returns the phase and the sign state after `phi`.
fn phase_near(c1: f64, phi: f64, previous: f64, flipped: bool) -> Result<(f64, bool)> {
    let shift = if flipped { PI } else { 0.0 };
    match conditional_phase(c1, phi) {
        Ok(raw) => Ok((nearest_branch(raw + shift, previous), flipped)),
        Err(Error::DegeneratePhase { .. }) => {
            let (below, _) = phase_near(c1, (phi - LIMIT_PROBE).max(0.0), previous, flipped)?;
            let (above, _) = phase_near(c1, phi + LIMIT_PROBE, below, !flipped)?;
            Ok((0.5 * (below + above), !flipped))
        }
        Err(e) => Err(e),
    }
}

/// Continue θ from `(phi0, theta0)` to `phi`, halving the step until each
/// sub-step moves the phase by less than π/4.
///
/// A jump of π that survives every halving is the overlap passing through
/// zero (C1 = 1/2 at Φ = π). `tan θ` stays continuous there, so the curve
/// continues on the opposite sign.
fn continue_phase(
    c1: f64,
    phi0: f64,
    start: (f64, bool),
    phi: f64,
    depth: u32,
) -> Result<(f64, bool)> {
    let (theta0, flipped) = start;
    let next = phase_near(c1, phi, theta0, flipped)?;
    if (next.0 - theta0).abs() < 0.5 * STEP_GUARD {
        return Ok(next);
    }
    if depth == 0 {
        return phase_near(c1, phi, theta0, !flipped);
    }
    let mid = 0.5 * (phi0 + phi);
    let at_mid = continue_phase(c1, phi0, start, mid, depth - 1)?;
    continue_phase(c1, mid, at_mid, phi, depth - 1)
}

/// θ(Φ) continued along `phis` so that the curve is continuous and starts
/// on the branch through θ(0) = 0.
///
/// Fails when consecutive samples differ by π/2 or more, which means the Φ
/// grid is too coarse to show the curve.
pub fn phase_curve(c1: f64, phis: &[f64]) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = Vec::with_capacity(phis.len());
    let (mut phi_prev, mut previous, mut flipped) = (0.0, 0.0, false);
    for (k, &phi) in phis.iter().enumerate() {
        let (theta, sign) = continue_phase(c1, phi_prev, (previous, flipped), phi, 40)?;
        if k > 0 && (theta - previous).abs() >= STEP_GUARD {
            return Err(Error::Contract(format!(
                "phase jumps by {:.3} between phi = {} and {}; refine the phi grid",
                theta - previous,
                phis[k - 1],
                phi
            )));
        }
        out.push(theta);
        previous = theta;
        flipped = sign;
        phi_prev = phi;
    }
    Ok(out)
}

/// `F = (1 − 4C1(1 − C1) sin²(Φ/2)) / (1 − 4(C1 − C2) sin²(Φ/2))`.
pub fn fidelity_closed_form(c1: f64, c2: f64, phi: f64) -> Result<f64> {
    let s = (0.5 * phi).sin().powi(2);
    let denominator = 1.0 - 4.0 * (c1 - c2) * s;
    if !(denominator > 0.0) {
        return Err(Error::InvalidCoefficients {
            c1,
            c2,
            denominator,
        });
    }
    let numerator = (1.0 - 4.0 * c1 * (1.0 - c1) * s).max(0.0);
    Ok(numerator / denominator)
}

/// Closed-form (F, θ) for real profiles; no entropy.
pub fn metrics_copropagating(
    f1: &PulseProfile,
    f2: &PulseProfile,
    k0: f64,
    phi: f64,
) -> Result<GateMetrics> {
    let c = OverlapCoeffs::compute(f1, f2, k0, DEFAULT_COEFF_TOL)?;
    Ok(GateMetrics {
        fidelity: c.fidelity(phi)?,
        phase: c.phase(phi)?,
        entropy: None,
    })
}

/// The amplitude sampled at co-moving coordinates on `grid1 × grid2`;
/// not normalized.
pub fn two_particle_copropagating(
    f1: &PulseProfile,
    f2: &PulseProfile,
    params: &SystemParams,
    grid1: &Grid1D,
    grid2: &Grid1D,
) -> Result<TwoParticleState> {
    require_copropagating(params)?;
    let family = CopropagatingFamily::new(f1, f2, params.k0, grid1, grid2)?;
    family.state(params.phi)
}

fn require_copropagating(params: &SystemParams) -> Result<()> {
    if params.mode != Mode::Copropagating || params.v1 != params.v2 {
        return Err(Error::Mode(format!(
            "co-propagating amplitude needs v1 == v2, got {} and {}",
            params.v1, params.v2
        )));
    }
    Ok(())
}

/// The amplitude as the family `φ0 + (e^{iΦ} − 1) φ1`, so any number of
/// Φ values share one pass over the grid.
#[derive(Clone, Debug)]
pub struct CopropagatingFamily {
    family: LinearFamily,
    k0: f64,
}

impl CopropagatingFamily {
    pub fn new(
        f1: &PulseProfile,
        f2: &PulseProfile,
        k0: f64,
        grid1: &Grid1D,
        grid2: &Grid1D,
    ) -> Result<Self> {
        if !(k0 > 0.0) {
            return Err(Error::param(format!("k0 must be positive, got {k0}")));
        }
        let a: Vec<Complex64> = grid1.nodes().iter().map(|&z| f1.eval(z)).collect();
        let b: Vec<Complex64> = grid2.nodes().iter().map(|&z| f2.eval(z)).collect();
        let diag: Vec<Complex64> = grid2
            .nodes()
            .iter()
            .zip(&b)
            .map(|(&z, fb)| f1.eval(z) * fb)
            .collect();
        let (z1, z2) = (grid1.nodes(), grid2.nodes());
        let dim = (z1.len(), z2.len());
        let free = Array2::from_shape_fn(dim, |(i, j)| a[i] * b[j]);
        let kick = Array2::from_shape_fn(dim, |(i, j)| diag[j] * sinc(k0 * (z1[i] - z2[j])));
        let family = LinearFamily::new(grid1.clone(), grid2.clone(), vec![free, kick])?;
        Ok(CopropagatingFamily { family, k0 })
    }

    /// Grids from `spec`: tails along `Z1`, the plain grid along `Z2`.
    pub fn from_spec(
        f1: &PulseProfile,
        f2: &PulseProfile,
        k0: f64,
        spec: &GridSpec,
    ) -> Result<Self> {
        let grid2 = spec.build()?;
        let grid1 = spec.tail_grid((spec.lower, spec.upper), k0)?;
        Self::new(f1, f2, k0, &grid1, &grid2)
    }

    /// Enable entropy evaluation.
    pub fn with_entropy(self) -> Self {
        CopropagatingFamily {
            family: self.family.with_purity(),
            k0: self.k0,
        }
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    pub fn family(&self) -> &LinearFamily {
        &self.family
    }

    fn coeffs(phi: f64) -> [Complex64; 2] {
        [
            Complex64::new(1.0, 0.0),
            Complex64::from_polar(1.0, phi) - 1.0,
        ]
    }

    pub fn state(&self, phi: f64) -> Result<TwoParticleState> {
        self.family.state(&Self::coeffs(phi))
    }

    /// Squared norm of the unnormalized amplitude.
    pub fn norm_squared(&self, phi: f64) -> Result<f64> {
        self.family.norm_squared(&Self::coeffs(phi))
    }

    /// Grid (F, θ) from the overlap with the free product, plus S_L when
    /// entropy was enabled.
    pub fn metrics(&self, phi: f64) -> Result<GateMetrics> {
        let c = Self::coeffs(phi);
        let overlap = self.family.overlap(0, &c)?;
        let entropy = match self.family.purity(&c) {
            Ok(p) => Some(1.0 - p),
            Err(Error::Contract(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(GateMetrics::from_overlap(overlap, entropy))
    }
}

/// k0 at which C1 = 1/2, by bisection on `[lo, hi]` to width `tol`.
pub fn transition_k0(
    f1: &PulseProfile,
    f2: &PulseProfile,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64> {
    if !(0.0 < lo && lo < hi) || !(tol > 0.0) {
        return Err(Error::param(format!(
            "bad bisection bracket [{lo}, {hi}] or tolerance {tol}"
        )));
    }
    let g = |k0: f64| compute_c1(f1, f2, k0, 1e-9).map(|c| c - 0.5);
    let (mut a, mut b) = (lo, hi);
    let mut ga = g(a)?;
    let gb = g(b)?;
    if ga.signum() == gb.signum() {
        return Err(Error::param(format!(
            "C1 - 1/2 does not change sign on [{lo}, {hi}] ({ga:.4}, {gb:.4})"
        )));
    }
    while b - a > tol {
        let m = 0.5 * (a + b);
        let gm = g(m)?;
        if gm.signum() == ga.signum() {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss() -> PulseProfile {
        PulseProfile::gaussian(1.0, 0.0).unwrap()
    }

    #[test]
    fn phase_at_zero_is_zero() {
        for c1 in [0.2, 0.5, 1.1] {
            assert_eq!(conditional_phase(c1, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn half_coefficient_gives_half_phase() {
        assert!((conditional_phase(0.5, 1.2).unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn branch_at_pi() {
        assert!((conditional_phase(0.98, PI).unwrap() - PI).abs() < 1e-12);
        assert!(conditional_phase(0.20, PI).unwrap().abs() < 1e-12);
        assert!(matches!(
            conditional_phase(0.5, PI),
            Err(Error::DegeneratePhase { .. })
        ));
        assert!(conditional_phase(0.5, -0.1).is_err());
    }

    #[test]
    fn unwrapped_curve_crosses_removable_point() {
        let phis: Vec<f64> = (0..=200).map(|i| TAU * i as f64 / 200.0).collect();
        let theta = phase_curve(0.5, &phis).unwrap();
        for (t, p) in theta.iter().zip(&phis) {
            assert!((t - p / 2.0).abs() < 1e-9, "phi {p} theta {t}");
        }
        let high = phase_curve(0.98, &phis).unwrap();
        assert!((high[200] - TAU).abs() < 1e-9);
    }

    #[test]
    fn coarse_phi_grid_trips_guard() {
        assert!(matches!(
            phase_curve(0.499, &[0.0, 3.0, 3.3]),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn fidelity_edge_values() {
        assert_eq!(fidelity_closed_form(0.3, 0.4, 0.0).unwrap(), 1.0);
        assert!(fidelity_closed_form(0.5, 0.5013, PI).unwrap() < 1e-15);
        let f = fidelity_closed_form(1.1547, 125.33, FRAC_PI_2).unwrap();
        assert!((f - 0.0054).abs() < 5e-5);
        assert!(matches!(
            fidelity_closed_form(0.9, 0.1, PI),
            Err(Error::InvalidCoefficients { .. })
        ));
    }

    #[test]
    fn gaussian_c2_matches_analytic() {
        for k0 in [0.1, 1.0, 2.5, 10.0] {
            let c2 = compute_c2(&gauss(), &gauss(), k0, 1e-10).unwrap();
            assert!((c2 - (PI / 2.0).sqrt() / k0).abs() < 1e-9);
        }
    }

    #[test]
    fn small_k0_c1_limit() {
        let c1 = compute_c1(&gauss(), &gauss(), 1e-4, 1e-9).unwrap();
        assert!((c1 - 2.0 / 3f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn complex_profiles_rejected() {
        let nodes = vec![-1.0, 0.0, 1.0];
        let vals = vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 0.0),
        ];
        let f = PulseProfile::tabulated(nodes, vals).unwrap();
        assert!(matches!(
            compute_c1(&f, &gauss(), 1.0, 1e-6),
            Err(Error::UnsupportedProfile(_))
        ));
        assert!(matches!(
            compute_c2(&gauss(), &f, 1.0, 1e-6),
            Err(Error::UnsupportedProfile(_))
        ));
    }

    #[test]
    fn unreachable_tolerance_reports_both_estimates() {
        match compute_c1(&gauss(), &gauss(), 2.5, 1e-30) {
            Err(Error::Accuracy { coarse, fine, .. }) => assert!((coarse - fine).abs() < 1e-12),
            other => panic!("expected accuracy error, got {other:?}"),
        }
    }

    #[test]
    fn mode_mismatch_rejected() {
        let p = SystemParams::head_on(1.0, 1.0, 1.0, -1.0, 10.0).unwrap();
        let g = crate::numerics::make_grid(-5.0, 5.0, 11, crate::numerics::Rule::Uniform).unwrap();
        assert!(matches!(
            two_particle_copropagating(&gauss(), &gauss(), &p, &g, &g),
            Err(Error::Mode(_))
        ));
    }

    #[test]
    fn zero_phase_is_product() {
        let g = crate::numerics::make_grid(-6.0, 6.0, 61, crate::numerics::Rule::Uniform).unwrap();
        let p = SystemParams::copropagating(2.5, 0.0, 1.0).unwrap();
        let s = two_particle_copropagating(&gauss(), &gauss(), &p, &g, &g).unwrap();
        let f = gauss();
        for (i, a) in g.nodes().iter().enumerate() {
            for (j, b) in g.nodes().iter().enumerate() {
                assert!((s.amplitude()[[i, j]] - f.value(*a) * f.value(*b)).norm() < 1e-15);
            }
        }
    }
}
