//! Counter-propagating pulses under the slow-pulse approximation.
//!
//! Amplitudes are sampled in the primed coordinates `z_i' = z_i − v_i t`,
//! where the free product `f1(z1') f2(z2')` stands still. With every chain
//! factor of the kernel replaced by κ, the interaction series is
//!
//! ```text
//! ψ = ψ0 + iχ D f2 + Σ_{n≥2} (iχ)ⁿ κ^{n−1} t^{n−2} / n! · A B f2
//!   = ψ0 + iχ D f2 + A B f2 (e^{iχκt} − 1 − iχκt) / (κ t²)
//! ```
//!
//! with `u = z2' − z1'` and the time integrals
//!
//! ```text
//! A = ∫₀ᵗ C(u − v_r t′) dt′
//! B = ∫₀ᵗ f1(z2' − v_r t′) dt′
//! D = ∫₀ᵗ C(u − v_r t′) f1(z2' − v_r t′) dt′
//! ```
//!
//! The closed form evaluates these from antiderivatives tabulated once per
//! setup ([`HeadOnEngine`]); the truncated series evaluates them pointwise by
//! adaptive quadrature ([`TimeIntegrals::adaptive`]) and serves as its check.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;

use crate::copropagating::GateMetrics;
use crate::error::{Error, Result};
use crate::numerics::{
    commutator_kernel, gauss_legendre, integrate_adaptive, make_profile, sinc, sine_integral,
    Grid1D, GridSpec, Mode, ProfileSpec, PulseProfile, SystemParams,
};
use crate::state::{LinearFamily, TwoParticleState};

/// Above this value of `k0 |v_r| t` the constant-kernel approximation is
/// flagged.
pub const VALIDITY_GAUGE: f64 = 0.1;
/// Series terms below this sup-norm end the summation.
pub const TERM_FLOOR: f64 = 1e-12;
/// A series still carrying terms above this at `N_max` has not converged.
pub const TRUNCATION_LIMIT: f64 = 1e-6;
/// Adaptive time integrals are converged to this fraction of their natural
/// scale (κt for A and D, t for B).
const REL_TOL: f64 = 1e-11;
/// Gauss-Legendre nodes per panel of the cumulative tables.
const TABLE_NODES: usize = 6;
/// Relative mismatch below which `v_r t` counts as a whole number of `z2`
/// grid steps.
const LATTICE_SLACK: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct CollisionSetup {
    f1: PulseProfile,
    f2: PulseProfile,
    params: SystemParams,
    grid1: Grid1D,
    grid2: Grid1D,
    times: Vec<f64>,
    n_max: usize,
}

impl CollisionSetup {
    /// Identical envelopes centered `l/2` either side of the origin and
    /// approaching each other, so they overlap fully at `t = l/|v_r|`.
    ///
    /// The `z2'` grid is `grid` moved onto pulse 2; the `z1'` grid covers
    /// both pulses and follows the kernel tails.
    pub fn new(
        profile: &ProfileSpec,
        params: SystemParams,
        grid: &GridSpec,
        times: Vec<f64>,
        n_max: usize,
    ) -> Result<Self> {
        require_head_on(&params)?;
        let dir = params.relative_velocity().signum();
        let (c1, c2) = (
            -0.5 * dir * params.separation,
            0.5 * dir * params.separation,
        );
        let f1 = make_profile(profile, c1)?;
        let f2 = make_profile(profile, c2)?;
        let grid2 = grid.shifted(c2).build()?;
        let core = (c1.min(c2) + grid.lower, c1.max(c2) + grid.upper);
        let grid1 = grid.tail_grid(core, params.k0)?;
        Self::from_parts(f1, f2, params, grid1, grid2, times, n_max)
    }

    pub fn from_parts(
        f1: PulseProfile,
        f2: PulseProfile,
        params: SystemParams,
        grid1: Grid1D,
        grid2: Grid1D,
        times: Vec<f64>,
        n_max: usize,
    ) -> Result<Self> {
        require_head_on(&params)?;
        params.check()?;
        if !f1.is_real() || !f2.is_real() {
            return Err(Error::UnsupportedProfile(
                "head-on collisions need real profiles".into(),
            ));
        }
        if n_max < 1 {
            return Err(Error::param("truncation order must be at least 1"));
        }
        if let Some(t) = times.iter().find(|t| !(**t >= 0.0) || !t.is_finite()) {
            return Err(Error::param(format!(
                "time samples must be finite and non-negative, got {t}"
            )));
        }
        Ok(CollisionSetup {
            f1,
            f2,
            params,
            grid1,
            grid2,
            times,
            n_max,
        })
    }

    pub fn f1(&self) -> &PulseProfile {
        &self.f1
    }

    pub fn f2(&self) -> &PulseProfile {
        &self.f2
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn grid1(&self) -> &Grid1D {
        &self.grid1
    }

    pub fn grid2(&self) -> &Grid1D {
        &self.grid2
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn kappa(&self) -> f64 {
        self.params.kappa()
    }

    pub fn chi(&self) -> f64 {
        self.params.chi
    }

    pub fn relative_velocity(&self) -> f64 {
        self.params.relative_velocity()
    }

    /// Time of complete overlap, `l / |v_r|`.
    pub fn contact_time(&self) -> f64 {
        self.params.separation / self.relative_velocity().abs()
    }

    /// `k0 |v_r| t`, small when the constant-kernel approximation holds.
    pub fn gauge(&self, t: f64) -> f64 {
        self.params.k0 * self.relative_velocity().abs() * t
    }

    /// One message per time sample where the approximation is stretched.
    pub fn warnings(&self) -> Vec<String> {
        self.times
            .iter()
            .filter(|&&t| self.gauge(t) > VALIDITY_GAUGE)
            .map(|&t| {
                format!(
                    "k0*|v_r|*t = {:.3} exceeds {VALIDITY_GAUGE} at t = {t}",
                    self.gauge(t)
                )
            })
            .collect()
    }

    /// Same geometry with another Φ (χ rescaled).
    pub fn with_phi(&self, phi: f64) -> Result<Self> {
        let mut out = self.clone();
        out.params = self.params.with_phi(phi)?;
        Ok(out)
    }

    pub fn with_times(&self, times: Vec<f64>) -> Result<Self> {
        Self::from_parts(
            self.f1.clone(),
            self.f2.clone(),
            self.params,
            self.grid1.clone(),
            self.grid2.clone(),
            times,
            self.n_max,
        )
    }

    fn kernel(&self, z: f64) -> f64 {
        commutator_kernel(z, self.params.k0)
    }

    /// Free amplitude `f1(z1') f2(z2')` on the grids.
    pub fn free_amplitude(&self) -> Array2<f64> {
        let a: Vec<f64> = self
            .grid1
            .nodes()
            .iter()
            .map(|&z| self.f1.value(z))
            .collect();
        let b: Vec<f64> = self
            .grid2
            .nodes()
            .iter()
            .map(|&z| self.f2.value(z))
            .collect();
        Array2::from_shape_fn((a.len(), b.len()), |(i, j)| a[i] * b[j])
    }

    /// Time window `[t0, t1]` in which `z2' − v_r t′` lies in the support of
    /// `f1`, clipped to `[0, t]`.
    fn f1_window(&self, z2p: f64, t: f64) -> Option<(f64, f64)> {
        let (lo, hi) = self.f1.support();
        let vr = self.relative_velocity();
        let (p, q) = ((z2p - hi) / vr, (z2p - lo) / vr);
        let (a, b) = (p.min(q).max(0.0), p.max(q).min(t));
        (a < b).then_some((a, b))
    }
}

fn require_head_on(params: &SystemParams) -> Result<()> {
    if params.mode != Mode::HeadOn || params.v1 == params.v2 {
        return Err(Error::Mode(format!(
            "head-on collision needs v1 != v2, got {} and {}",
            params.v1, params.v2
        )));
    }
    Ok(())
}

/// Adaptive integral split into pieces of at most `piece` length.
fn integrate_pieces(f: impl Fn(f64) -> f64, a: f64, b: f64, piece: f64, tol: f64) -> Result<f64> {
    let n = ((b - a) / piece).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    let mut total = 0.0;
    for k in 0..n {
        let lo = a + k as f64 * h;
        let hi = if k + 1 == n { b } else { lo + h };
        total += integrate_adaptive(&f, lo, hi, tol / n as f64)?;
    }
    Ok(total)
}

fn integral_a(setup: &CollisionSetup, u: f64, t: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let vr = setup.relative_velocity();
    // one kernel lobe, π/k0, per piece
    let piece = PI / (setup.params.k0 * vr.abs());
    integrate_pieces(
        |s| setup.kernel(u - vr * s),
        0.0,
        t,
        piece,
        REL_TOL * setup.kappa() * t,
    )
}

fn integral_b(setup: &CollisionSetup, z2p: f64, t: f64) -> Result<f64> {
    let Some((a, b)) = setup.f1_window(z2p, t) else {
        return Ok(0.0);
    };
    let vr = setup.relative_velocity();
    integrate_pieces(
        |s| setup.f1.value(z2p - vr * s),
        a,
        b,
        2.0 / vr.abs(),
        REL_TOL * t,
    )
}

fn integral_d(setup: &CollisionSetup, z1p: f64, z2p: f64, t: f64) -> Result<f64> {
    let Some((a, b)) = setup.f1_window(z2p, t) else {
        return Ok(0.0);
    };
    let vr = setup.relative_velocity();
    let u = z2p - z1p;
    let f = |s: f64| setup.kernel(u - vr * s) * setup.f1.value(z2p - vr * s);
    integrate_pieces(f, a, b, 2.0 / vr.abs(), REL_TOL * setup.kappa() * t)
}

/// The time integrals A, D (on the grid) and B (on the `z2'` axis) at one
/// time.
#[derive(Clone, Debug)]
pub struct TimeIntegrals {
    pub t: f64,
    pub a: Array2<f64>,
    pub b: Vec<f64>,
    pub d: Array2<f64>,
}

impl TimeIntegrals {
    /// Pointwise adaptive quadrature in the time variable.
    pub fn adaptive(setup: &CollisionSetup, t: f64) -> Result<Self> {
        let (z1, z2) = (setup.grid1.nodes(), setup.grid2.nodes());
        let mut a = Array2::zeros((z1.len(), z2.len()));
        let mut d = Array2::zeros((z1.len(), z2.len()));
        let b = z2
            .iter()
            .map(|&y| integral_b(setup, y, t))
            .collect::<Result<Vec<_>>>()?;
        for (i, &x) in z1.iter().enumerate() {
            for (j, &y) in z2.iter().enumerate() {
                a[[i, j]] = integral_a(setup, y - x, t)?;
                d[[i, j]] = integral_d(setup, x, y, t)?;
            }
        }
        Ok(TimeIntegrals { t, a, b, d })
    }
}

/// `e^{ia} − 1 − ia`, without cancellation for small `a`.
pub fn phase_remainder(a: f64) -> Complex64 {
    let re = -2.0 * (0.5 * a).sin().powi(2);
    let im = if a.abs() < 0.5 {
        // a − sin a by its alternating series
        let a2 = a * a;
        let mut term = a * a2 / 6.0;
        let mut sum = 0.0;
        let mut k = 3.0;
        while term.abs() > 1e-18 * a.abs().max(1e-300) {
            sum += term;
            term *= -a2 / ((k + 1.0) * (k + 2.0));
            k += 2.0;
        }
        -sum
    } else {
        a.sin() - a
    };
    Complex64::new(re, im)
}

/// Weights `[1, iχ, (e^{iχκt} − 1 − iχκt)/(κt²)]` of `[ψ0, D f2, A B f2]`
/// in the summed amplitude.
pub fn closed_coefficients(chi: f64, kappa: f64, t: f64) -> [Complex64; 3] {
    let tail = if t == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        phase_remainder(chi * kappa * t) / (kappa * t * t)
    };
    [Complex64::new(1.0, 0.0), Complex64::new(0.0, chi), tail]
}

/// Coefficient of `A B f2` in the order-`n` term (n ≥ 2), and of `D f2`
/// for n = 1.
fn series_coefficient(chi: f64, kappa: f64, t: f64, n: usize) -> Complex64 {
    let i_chi = Complex64::new(0.0, chi);
    if n == 1 {
        return i_chi;
    }
    // (iχ)ⁿ κ^{n−1} t^{n−2} / n!, accumulated factor by factor
    let mut c = i_chi * i_chi * kappa / 2.0;
    for m in 3..=n {
        c *= i_chi * kappa * t / m as f64;
    }
    c
}

/// Order-`n` contribution at lab coordinates `(z1, z2)` and time `t`,
/// with the time integrals done by adaptive quadrature.
pub fn series_term(
    setup: &CollisionSetup,
    n: usize,
    z1: f64,
    z2: f64,
    t: f64,
) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::param(
            "series order starts at 1; the free term is the free state",
        ));
    }
    let p = setup.params();
    let (z1p, z2p) = (z1 - p.v1 * t, z2 - p.v2 * t);
    let f2 = setup.f2.value(z2p);
    let c = series_coefficient(setup.chi(), setup.kappa(), t, n);
    if n == 1 {
        Ok(c * integral_d(setup, z1p, z2p, t)? * f2)
    } else {
        Ok(c * integral_a(setup, z2p - z1p, t)? * integral_b(setup, z2p, t)? * f2)
    }
}

/// Partial sums of the interaction series at one time.
#[derive(Clone, Debug)]
pub struct HeadOnSeries {
    grid1: Grid1D,
    grid2: Grid1D,
    t: f64,
    chi: f64,
    kappa: f64,
    free: Array2<f64>,
    d_f2: Array2<f64>,
    ab_f2: Array2<f64>,
}

impl HeadOnSeries {
    pub fn new(setup: &CollisionSetup, integrals: &TimeIntegrals) -> Result<Self> {
        let dim = (setup.grid1.len(), setup.grid2.len());
        if integrals.a.dim() != dim || integrals.d.dim() != dim || integrals.b.len() != dim.1 {
            return Err(Error::param("time integrals do not match the setup grids"));
        }
        let f2: Vec<f64> = setup
            .grid2
            .nodes()
            .iter()
            .map(|&z| setup.f2.value(z))
            .collect();
        let d_f2 = Array2::from_shape_fn(dim, |(i, j)| integrals.d[[i, j]] * f2[j]);
        let ab_f2 =
            Array2::from_shape_fn(dim, |(i, j)| integrals.a[[i, j]] * integrals.b[j] * f2[j]);
        Ok(HeadOnSeries {
            grid1: setup.grid1.clone(),
            grid2: setup.grid2.clone(),
            t: integrals.t,
            chi: setup.chi(),
            kappa: setup.kappa(),
            free: setup.free_amplitude(),
            d_f2,
            ab_f2,
        })
    }

    /// Series with the integrals from pointwise adaptive quadrature.
    pub fn adaptive(setup: &CollisionSetup, t: f64) -> Result<Self> {
        Self::new(setup, &TimeIntegrals::adaptive(setup, t)?)
    }

    /// Same integrals, another rate (the time integrals do not depend on χ).
    pub fn set_chi(&mut self, chi: f64) {
        self.chi = chi;
    }

    fn coefficient(&self, n: usize) -> Complex64 {
        series_coefficient(self.chi, self.kappa, self.t, n)
    }

    /// Sup-norm of the order-`n` term over the grid.
    pub fn term_sup(&self, n: usize) -> f64 {
        let base = if n == 1 { &self.d_f2 } else { &self.ab_f2 };
        self.coefficient(n).norm() * base.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `ψ0 + Σ_{n=1}^{order}` terms, unnormalized.
    pub fn partial_sum(&self, order: usize) -> Result<TwoParticleState> {
        let c1 = if order >= 1 {
            self.coefficient(1)
        } else {
            Complex64::new(0.0, 0.0)
        };
        let tail: Complex64 = (2..=order).map(|n| self.coefficient(n)).sum();
        let amp = Array2::from_shape_fn(self.free.dim(), |(i, j)| {
            self.free[[i, j]] + c1 * self.d_f2[[i, j]] + tail * self.ab_f2[[i, j]]
        });
        TwoParticleState::new(self.grid1.clone(), self.grid2.clone(), amp)
    }

    /// Sum until a term's sup-norm drops below [`TERM_FLOOR`]; returns the
    /// state and the last order included.
    pub fn converged(&self, n_max: usize) -> Result<(TwoParticleState, usize)> {
        if n_max < 1 {
            return Err(Error::param("truncation order must be at least 1"));
        }
        let mut order = n_max;
        for n in 1..=n_max {
            if self.term_sup(n) < TERM_FLOOR {
                order = n;
                break;
            }
        }
        let last = self.term_sup(order);
        if order == n_max && last > TRUNCATION_LIMIT {
            return Err(Error::Truncation {
                order: n_max,
                last_term: last,
            });
        }
        Ok((self.partial_sum(order)?, order))
    }

    /// The summed series, `ψ0 + iχ D f2 + A B f2 (e^{ia} − 1 − ia)/(κt²)`.
    pub fn closed(&self) -> Result<TwoParticleState> {
        let [_, c1, tail] = closed_coefficients(self.chi, self.kappa, self.t);
        let amp = Array2::from_shape_fn(self.free.dim(), |(i, j)| {
            self.free[[i, j]] + c1 * self.d_f2[[i, j]] + tail * self.ab_f2[[i, j]]
        });
        TwoParticleState::new(self.grid1.clone(), self.grid2.clone(), amp)
    }
}

/// Free term plus series through `n_max`, stopping early once terms fall
/// below [`TERM_FLOOR`]. Time integrals by adaptive quadrature.
pub fn two_particle_headon_series(
    setup: &CollisionSetup,
    t: f64,
    n_max: usize,
) -> Result<TwoParticleState> {
    HeadOnSeries::adaptive(setup, t)?
        .converged(n_max)
        .map(|(s, _)| s)
}

/// Summed series at time `t` from the tabulated antiderivatives.
pub fn two_particle_headon_closed(setup: &CollisionSetup, t: f64) -> Result<TwoParticleState> {
    let setup = setup.with_times(vec![t])?;
    let engine = HeadOnEngine::new(&setup)?;
    engine.closed_state(t)
}

/// Antiderivatives `G(z1', x) = ∫_{-∞}^x C(s − z1') f1(s) ds`,
/// `F(x) = ∫_{-∞}^x f1` and `Si(k0 (x − z1'))` along ascending `xs`.
struct Antiderivatives {
    g: Array2<f64>,
    f: Vec<f64>,
    si: Array2<f64>,
}

impl Antiderivatives {
    fn build(setup: &CollisionSetup, xs: &[f64]) -> Antiderivatives {
        let k0 = setup.params.k0;
        let kappa = setup.kappa();
        let (lo, hi) = setup.f1.support();
        let (gx, gw) = gauss_legendre(TABLE_NODES);
        let max_width = 0.05_f64.min(0.5 / k0);

        // nodes s and weights w·f1(s) of every panel, grouped by the first
        // lattice slot whose antiderivative includes them
        let mut slots: Vec<(usize, Vec<f64>, Vec<f64>)> = Vec::new();
        let mut push = |slot: usize, a: f64, b: f64| {
            let (a, b) = (a.max(lo), b.min(hi));
            if !(a < b) {
                return;
            }
            let pieces = ((b - a) / max_width).ceil().max(1.0) as usize;
            let h = (b - a) / pieces as f64;
            let mut s = Vec::with_capacity(pieces * TABLE_NODES);
            let mut w = Vec::with_capacity(pieces * TABLE_NODES);
            for p in 0..pieces {
                let mid = a + (p as f64 + 0.5) * h;
                for (x, wt) in gx.iter().zip(&gw) {
                    let z = mid + 0.5 * h * x;
                    s.push(z);
                    w.push(0.5 * h * wt * setup.f1.value(z));
                }
            }
            slots.push((slot, s, w));
        };
        push(0, f64::NEG_INFINITY, xs[0]);
        for m in 1..xs.len() {
            push(m, xs[m - 1], xs[m]);
        }

        let mut f = vec![0.0; xs.len()];
        {
            let mut acc = 0.0;
            let mut k = 0;
            for (m, slot) in f.iter_mut().enumerate() {
                while k < slots.len() && slots[k].0 == m {
                    acc += slots[k].2.iter().sum::<f64>();
                    k += 1;
                }
                *slot = acc;
            }
        }

        let z1 = setup.grid1.nodes();
        let mut g = Array2::zeros((z1.len(), xs.len()));
        let mut si = Array2::zeros((z1.len(), xs.len()));
        for (i, &x1) in z1.iter().enumerate() {
            let mut acc = 0.0;
            let mut k = 0;
            for m in 0..xs.len() {
                while k < slots.len() && slots[k].0 == m {
                    let (_, s, w) = &slots[k];
                    acc += s
                        .iter()
                        .zip(w)
                        .map(|(s, w)| w * sinc(k0 * (s - x1)))
                        .sum::<f64>();
                    k += 1;
                }
                g[[i, m]] = kappa * acc;
                si[[i, m]] = sine_integral(k0 * (xs[m] - x1));
            }
        }
        Antiderivatives { g, f, si }
    }
}

/// Closed-form evaluator with antiderivative tables shared by all times.
///
/// When `z2'` is a uniform grid and `v_r t` is a whole number of steps, the
/// shifted lower limits land on an extended lattice tabulated up front;
/// other times build their shifted tables on demand.
pub struct HeadOnEngine<'a> {
    setup: &'a CollisionSetup,
    free: Array2<Complex64>,
    f2: Vec<f64>,
    step: Option<f64>,
    /// Index of `z2'[0]` within the extended lattice.
    offset: usize,
    tables: Antiderivatives,
}

impl<'a> HeadOnEngine<'a> {
    pub fn new(setup: &'a CollisionSetup) -> Result<Self> {
        let z2 = setup.grid2.nodes();
        let vr = setup.relative_velocity();
        let step = setup.grid2.spacing();
        let (mut lo_shift, mut hi_shift) = (0_i64, 0_i64);
        if let Some(h) = step {
            for &t in &setup.times {
                if let Some(n) = lattice_shift(vr * t, h) {
                    lo_shift = lo_shift.min(n);
                    hi_shift = hi_shift.max(n);
                }
            }
        }
        // x_m = z2'[0] + (m − offset) h covers z2'[j] − n h for all shifts n
        let offset = hi_shift as usize;
        let len = z2.len() + offset + (-lo_shift) as usize;
        let xs: Vec<f64> = match step {
            Some(h) => (0..len)
                .map(|m| z2[0] + (m as f64 - offset as f64) * h)
                .collect(),
            None => z2.to_vec(),
        };
        let tables = Antiderivatives::build(setup, &xs);
        let free = setup.free_amplitude().mapv(|v| Complex64::new(v, 0.0));
        let f2 = z2.iter().map(|&z| setup.f2.value(z)).collect();
        Ok(HeadOnEngine {
            setup,
            free,
            f2,
            step,
            offset,
            tables,
        })
    }

    /// A, B, D at time `t`.
    pub fn integrals(&self, t: f64) -> Result<TimeIntegrals> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::param(format!(
                "time must be finite and non-negative, got {t}"
            )));
        }
        let setup = self.setup;
        let vr = setup.relative_velocity();
        let (n1, n2) = (setup.grid1.len(), setup.grid2.len());
        let base = |m: usize| m + self.offset;
        let lattice = self
            .step
            .and_then(|h| lattice_shift(vr * t, h))
            .filter(|&n| {
                let first = self.offset as i64 - n;
                first >= 0 && (first as usize + n2) <= self.tables.f.len()
            });
        let shifted_tables;
        let (shifted, at): (&Antiderivatives, Box<dyn Fn(usize) -> usize>) = match lattice {
            Some(n) => (
                &self.tables,
                Box::new(move |j: usize| (base(j) as i64 - n) as usize),
            ),
            None => {
                let xs: Vec<f64> = setup.grid2.nodes().iter().map(|&z| z - vr * t).collect();
                shifted_tables = Antiderivatives::build(setup, &xs);
                (&shifted_tables, Box::new(|j: usize| j))
            }
        };
        let t0 = &self.tables;
        let a = Array2::from_shape_fn((n1, n2), |(i, j)| {
            (t0.si[[i, base(j)]] - shifted.si[[i, at(j)]]) / (PI * vr)
        });
        let d = Array2::from_shape_fn((n1, n2), |(i, j)| {
            (t0.g[[i, base(j)]] - shifted.g[[i, at(j)]]) / vr
        });
        let b = (0..n2)
            .map(|j| (t0.f[base(j)] - shifted.f[at(j)]) / vr)
            .collect();
        Ok(TimeIntegrals { t, a, b, d })
    }

    /// Basis `[ψ0, D f2, A B f2]` at time `t`; see [`closed_coefficients`].
    pub fn family(&self, t: f64) -> Result<LinearFamily> {
        let ints = self.integrals(t)?;
        let f2 = &self.f2;
        let dim = self.free.dim();
        let d_f2 = Array2::from_shape_fn(dim, |(i, j)| Complex64::new(ints.d[[i, j]] * f2[j], 0.0));
        let ab_f2 = Array2::from_shape_fn(dim, |(i, j)| {
            Complex64::new(ints.a[[i, j]] * ints.b[j] * f2[j], 0.0)
        });
        LinearFamily::new(
            self.setup.grid1.clone(),
            self.setup.grid2.clone(),
            vec![self.free.clone(), d_f2, ab_f2],
        )
    }

    pub fn closed_state(&self, t: f64) -> Result<TwoParticleState> {
        let c = closed_coefficients(self.setup.chi(), self.setup.kappa(), t);
        self.family(t)?.state(&c)
    }
}

/// Whole number of grid steps in `shift`, if it is one.
fn lattice_shift(shift: f64, h: f64) -> Option<i64> {
    let s = shift / h;
    let n = s.round();
    ((s - n).abs() <= LATTICE_SLACK * s.abs().max(1.0)).then_some(n as i64)
}

/// F(t) and θ(t) of one Φ value.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionCurve {
    pub phi: f64,
    pub chi: f64,
    pub times: Vec<f64>,
    pub fidelity: Vec<f64>,
    pub phase: Vec<f64>,
    pub min_fidelity: f64,
    pub final_fidelity: f64,
}

/// Fidelity and phase against the free state at every setup time, for each
/// Φ in `phis` (same geometry, χ scaled with Φ).
pub fn fidelity_evolution(setup: &CollisionSetup, phis: &[f64]) -> Result<Vec<EvolutionCurve>> {
    if setup.times.is_empty() {
        return Err(Error::param(
            "fidelity evolution needs at least one time sample",
        ));
    }
    let engine = HeadOnEngine::new(setup)?;
    let chis = phis
        .iter()
        .map(|&phi| setup.params.with_phi(phi).map(|p| p.chi))
        .collect::<Result<Vec<_>>>()?;
    let mut curves: Vec<EvolutionCurve> = phis
        .iter()
        .zip(&chis)
        .map(|(&phi, &chi)| EvolutionCurve {
            phi,
            chi,
            times: setup.times.clone(),
            fidelity: Vec::with_capacity(setup.times.len()),
            phase: Vec::with_capacity(setup.times.len()),
            min_fidelity: f64::INFINITY,
            final_fidelity: f64::NAN,
        })
        .collect();
    for &t in &setup.times {
        let family = engine.family(t)?;
        for curve in curves.iter_mut() {
            let c = closed_coefficients(curve.chi, setup.kappa(), t);
            let m = GateMetrics::from_overlap(family.overlap(0, &c)?, None);
            let phase = match curve.phase.last() {
                Some(&prev) => {
                    m.phase
                        + std::f64::consts::TAU * ((prev - m.phase) / std::f64::consts::TAU).round()
                }
                None => m.phase,
            };
            curve.fidelity.push(m.fidelity);
            curve.phase.push(phase);
        }
    }
    for curve in curves.iter_mut() {
        curve.min_fidelity = curve.fidelity.iter().copied().fold(f64::INFINITY, f64::min);
        curve.final_fidelity = *curve.fidelity.last().unwrap();
    }
    Ok(curves)
}

/// The unbounded-bandwidth limit after a complete pass: a pure phase
/// `θ = χ / v_r` on an unentangled product.
pub fn ideal_headon_metrics(chi: f64, vr: f64) -> Result<GateMetrics> {
    if vr == 0.0 || !vr.is_finite() || !chi.is_finite() {
        return Err(Error::param(format!(
            "ideal limit needs finite chi and nonzero v_r, got {chi}, {vr}"
        )));
    }
    Ok(GateMetrics {
        fidelity: 1.0,
        phase: chi / vr,
        entropy: Some(0.0),
    })
}
