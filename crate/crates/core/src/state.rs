//! Two-particle amplitudes on tensor-product grids.
//!
//! Quadrature weights enter every contraction through the weighted amplitude
//! `M = W1^{1/2} ψ W2^{1/2}`, so discrete norms, overlaps and traces are the
//! quadrature approximations of the continuous integrals.

use ndarray::{Array2, Zip};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{Grid1D, PulseProfile, SystemParams};

const NORM_FLOOR: f64 = 1e-14;
const NORMALIZED_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct TwoParticleState {
    grid1: Grid1D,
    grid2: Grid1D,
    amplitude: Array2<Complex64>,
    normalized: bool,
}

impl TwoParticleState {
    pub fn new(grid1: Grid1D, grid2: Grid1D, amplitude: Array2<Complex64>) -> Result<Self> {
        if amplitude.dim() != (grid1.len(), grid2.len()) {
            return Err(Error::param(format!(
                "amplitude is {:?} but grids have {} x {} nodes",
                amplitude.dim(),
                grid1.len(),
                grid2.len()
            )));
        }
        Ok(TwoParticleState {
            grid1,
            grid2,
            amplitude,
            normalized: false,
        })
    }

    /// Sample `psi(z1, z2)` on the grid nodes.
    pub fn from_fn(grid1: &Grid1D, grid2: &Grid1D, psi: impl Fn(f64, f64) -> Complex64) -> Self {
        let (z1, z2) = (grid1.nodes(), grid2.nodes());
        let amplitude = Array2::from_shape_fn((z1.len(), z2.len()), |(i, j)| psi(z1[i], z2[j]));
        TwoParticleState {
            grid1: grid1.clone(),
            grid2: grid2.clone(),
            amplitude,
            normalized: false,
        }
    }

    pub fn grid1(&self) -> &Grid1D {
        &self.grid1
    }

    pub fn grid2(&self) -> &Grid1D {
        &self.grid2
    }

    pub fn amplitude(&self) -> &Array2<Complex64> {
        &self.amplitude
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// `ΣΣ w1_i w2_j |ψ_ij|²`.
    pub fn norm_squared(&self) -> f64 {
        weighted_inner(&self.grid1, &self.grid2, &self.amplitude, &self.amplitude).re
    }

    /// Same amplitude multiplied by `factor`; the normalized flag is dropped.
    pub fn scaled(&self, factor: Complex64) -> TwoParticleState {
        TwoParticleState {
            grid1: self.grid1.clone(),
            grid2: self.grid2.clone(),
            amplitude: &self.amplitude * factor,
            normalized: false,
        }
    }

    /// Largest `|ψ_ij − φ_ij|` over the grid.
    pub fn sup_distance(&self, other: &TwoParticleState) -> Result<f64> {
        same_grids(self, other)?;
        Ok(Zip::from(&self.amplitude)
            .and(&other.amplitude)
            .fold(0.0_f64, |m, a, b| m.max((a - b).norm())))
    }

    fn weighted(&self) -> Array2<Complex64> {
        weighted_amplitude(&self.grid1, &self.grid2, &self.amplitude)
    }
}

/// Scale to unit norm; the global phase is kept.
pub fn normalize(state: TwoParticleState) -> Result<TwoParticleState> {
    let n2 = state.norm_squared();
    if !(n2 >= NORM_FLOOR) || !n2.is_finite() {
        return Err(Error::DegenerateState(n2));
    }
    let mut out = state.scaled(Complex64::new(n2.sqrt().recip(), 0.0));
    out.normalized = true;
    Ok(out)
}

/// Freely propagated product `f1(z1 − v1 t) f2(z2 − v2 t)`.
pub fn free_state(
    f1: &PulseProfile,
    f2: &PulseProfile,
    params: &SystemParams,
    t: f64,
    grid1: &Grid1D,
    grid2: &Grid1D,
) -> TwoParticleState {
    let (s1, s2) = (params.v1 * t, params.v2 * t);
    let a: Vec<Complex64> = grid1.nodes().iter().map(|&z| f1.eval(z - s1)).collect();
    let b: Vec<Complex64> = grid2.nodes().iter().map(|&z| f2.eval(z - s2)).collect();
    let amplitude = Array2::from_shape_fn((a.len(), b.len()), |(i, j)| a[i] * b[j]);
    TwoParticleState {
        grid1: grid1.clone(),
        grid2: grid2.clone(),
        amplitude,
        normalized: false,
    }
}

/// `⟨reference|state⟩ = ∫∫ ψ0* ψ`; fidelity is `|c|²` and the phase `arg c`.
pub fn overlap(reference: &TwoParticleState, state: &TwoParticleState) -> Result<Complex64> {
    same_grids(reference, state)?;
    require_normalized(reference)?;
    require_normalized(state)?;
    Ok(weighted_inner(
        &state.grid1,
        &state.grid2,
        &reference.amplitude,
        &state.amplitude,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    /// Keep particle 1, trace out `z2`.
    First,
    /// Keep particle 2, trace out `z1`.
    Second,
}

/// One-body density kernel `ρ(z, z')` sampled on the kept particle's grid.
#[derive(Clone, Debug)]
pub struct ReducedKernel {
    grid: Grid1D,
    matrix: Array2<Complex64>,
}

impl ReducedKernel {
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    /// `Σ w_i ρ_ii`.
    pub fn trace(&self) -> f64 {
        self.grid
            .weights()
            .iter()
            .zip(self.matrix.diag())
            .map(|(w, r)| w * r.re)
            .sum()
    }

    /// `max |ρ_ij − conj(ρ_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.matrix.nrows();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..=i {
                worst = worst.max((self.matrix[[i, j]] - self.matrix[[j, i]].conj()).norm());
            }
        }
        worst
    }

    /// Symmetrically weighted matrix `W^{1/2} ρ W^{1/2}`, whose eigenvalues
    /// are the occupation numbers.
    pub fn weighted(&self) -> Array2<Complex64> {
        let s: Vec<f64> = self.grid.weights().iter().map(|w| w.sqrt()).collect();
        Array2::from_shape_fn(self.matrix.dim(), |(i, j)| {
            self.matrix[[i, j]] * (s[i] * s[j])
        })
    }

    /// `Tr ρ² = Σ w_i w_j |ρ_ij|²`.
    pub fn purity(&self) -> f64 {
        let w = self.grid.weights();
        let mut acc = 0.0;
        for ((i, j), r) in self.matrix.indexed_iter() {
            acc += w[i] * w[j] * r.norm_sqr();
        }
        acc
    }

    /// Check Hermiticity and unit trace to `tol`.
    pub fn check(&self, tol: f64) -> Result<()> {
        let h = self.hermiticity_defect();
        let tr = self.trace();
        if h > tol || (tr - 1.0).abs() > tol {
            return Err(Error::Contract(format!(
                "reduced kernel off by {h:e} from Hermitian, trace {tr}"
            )));
        }
        Ok(())
    }
}

/// `ρ1(z1, z3) = ∫ dz2 ψ(z1, z2) ψ*(z3, z2)`, or the analogue for particle 2.
pub fn reduced_kernel(state: &TwoParticleState, keep: Subsystem) -> Result<ReducedKernel> {
    require_normalized(state)?;
    let psi = &state.amplitude;
    let (grid, matrix) = match keep {
        Subsystem::First => {
            let w2 = state.grid2.weights();
            let scaled = Array2::from_shape_fn(psi.dim(), |(i, j)| psi[[i, j]] * w2[j]);
            (state.grid1.clone(), scaled.dot(&conj_t(psi)))
        }
        Subsystem::Second => {
            // ρ2(z2, z4) = ∫ dz1 ψ(z1, z2) ψ*(z1, z4)
            let w1 = state.grid1.weights();
            let scaled = Array2::from_shape_fn(psi.dim(), |(i, j)| psi[[i, j]] * w1[i]);
            (state.grid2.clone(), scaled.t().dot(&psi.mapv(|c| c.conj())))
        }
    };
    Ok(ReducedKernel { grid, matrix })
}

/// `Tr ρ²` of either reduced kernel, contracted on the smaller grid.
pub fn purity(state: &TwoParticleState) -> Result<f64> {
    require_normalized(state)?;
    let m = state.weighted();
    let g = if m.ncols() <= m.nrows() {
        conj_t(&m).dot(&m)
    } else {
        m.dot(&conj_t(&m))
    };
    Ok(g.iter().map(|c| c.norm_sqr()).sum())
}

/// `S_L = 1 − Tr ρ²`.
pub fn linear_entropy(state: &TwoParticleState) -> Result<f64> {
    Ok(1.0 - purity(state)?)
}

/// States `ψ(c) = Σ_a c_a φ_a` over a fixed basis.
///
/// The Gram matrix and, on request, the fourth-order purity tensor are built
/// once, after which norm, overlap and purity of any member cost O(n⁴) in the
/// basis size instead of a pass over the grid.
#[derive(Clone, Debug)]
pub struct LinearFamily {
    grid1: Grid1D,
    grid2: Grid1D,
    basis: Vec<Array2<Complex64>>,
    gram: Array2<Complex64>,
    purity_tensor: Option<Vec<Complex64>>,
}

impl LinearFamily {
    pub fn new(grid1: Grid1D, grid2: Grid1D, basis: Vec<Array2<Complex64>>) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::param("linear family needs at least one basis state"));
        }
        let dim = (grid1.len(), grid2.len());
        if basis.iter().any(|b| b.dim() != dim) {
            return Err(Error::param(
                "basis amplitudes must match the grid dimensions",
            ));
        }
        let n = basis.len();
        let mut gram = Array2::zeros((n, n));
        for a in 0..n {
            for b in a..n {
                let g = weighted_inner(&grid1, &grid2, &basis[a], &basis[b]);
                gram[[a, b]] = g;
                gram[[b, a]] = g.conj();
            }
        }
        Ok(LinearFamily {
            grid1,
            grid2,
            basis,
            gram,
            purity_tensor: None,
        })
    }

    /// Precompute `T_abcd = Tr(M_a M_b† M_c M_d†)` for entropy queries.
    pub fn with_purity(mut self) -> Self {
        let n = self.basis.len();
        let m: Vec<Array2<Complex64>> = self
            .basis
            .iter()
            .map(|b| weighted_amplitude(&self.grid1, &self.grid2, b))
            .collect();
        let small_right = self.grid2.len() <= self.grid1.len();
        // H[x][y] = M_x† M_y when particle 2 has fewer nodes, else M_x M_y†;
        // both give T_abcd through a cyclic reordering of the trace.
        let mut h = vec![Array2::<Complex64>::zeros((0, 0)); n * n];
        for x in 0..n {
            let mx_h = conj_t(&m[x]);
            for y in 0..n {
                h[x * n + y] = if small_right {
                    mx_h.dot(&m[y])
                } else {
                    m[x].dot(&conj_t(&m[y]))
                };
            }
        }
        let trace_product = |p: &Array2<Complex64>, q: &Array2<Complex64>| -> Complex64 {
            Zip::from(p)
                .and(&q.t())
                .fold(Complex64::new(0.0, 0.0), |acc, a, b| acc + a * b)
        };
        let mut t = vec![Complex64::new(0.0, 0.0); n * n * n * n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        t[((a * n + b) * n + c) * n + d] = if small_right {
                            trace_product(&h[b * n + c], &h[d * n + a])
                        } else {
                            trace_product(&h[a * n + b], &h[c * n + d])
                        };
                    }
                }
            }
        }
        self.purity_tensor = Some(t);
        self
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn grid1(&self) -> &Grid1D {
        &self.grid1
    }

    pub fn grid2(&self) -> &Grid1D {
        &self.grid2
    }

    pub fn basis(&self, index: usize) -> &Array2<Complex64> {
        &self.basis[index]
    }

    pub fn gram(&self) -> &Array2<Complex64> {
        &self.gram
    }

    /// Explicit member `Σ_a c_a φ_a` (unnormalized).
    pub fn state(&self, coeffs: &[Complex64]) -> Result<TwoParticleState> {
        self.check_len(coeffs)?;
        let mut amp = Array2::zeros(self.basis[0].dim());
        for (c, b) in coeffs.iter().zip(&self.basis) {
            amp.scaled_add(*c, b);
        }
        TwoParticleState::new(self.grid1.clone(), self.grid2.clone(), amp)
    }

    pub fn norm_squared(&self, coeffs: &[Complex64]) -> Result<f64> {
        self.check_len(coeffs)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, ca) in coeffs.iter().enumerate() {
            for (b, cb) in coeffs.iter().enumerate() {
                acc += ca.conj() * self.gram[[a, b]] * cb;
            }
        }
        Ok(acc.re)
    }

    /// Overlap of the normalized basis state `reference` with the normalized
    /// member `ψ(c)`.
    pub fn overlap(&self, reference: usize, coeffs: &[Complex64]) -> Result<Complex64> {
        let n2 = self.norm_squared(coeffs)?;
        let r2 = self.gram[[reference, reference]].re;
        if !(n2 >= NORM_FLOOR) {
            return Err(Error::DegenerateState(n2));
        }
        if !(r2 >= NORM_FLOOR) {
            return Err(Error::DegenerateState(r2));
        }
        let raw: Complex64 = coeffs
            .iter()
            .enumerate()
            .map(|(b, c)| self.gram[[reference, b]] * c)
            .sum();
        Ok(raw / (n2 * r2).sqrt())
    }

    /// `Tr ρ²` of the normalized member; needs [`LinearFamily::with_purity`].
    pub fn purity(&self, coeffs: &[Complex64]) -> Result<f64> {
        let t = self
            .purity_tensor
            .as_ref()
            .ok_or_else(|| Error::Contract("purity tensor was not precomputed".into()))?;
        let n2 = self.norm_squared(coeffs)?;
        if !(n2 >= NORM_FLOOR) {
            return Err(Error::DegenerateState(n2));
        }
        let n = self.basis.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..n {
            for b in 0..n {
                let ab = coeffs[a] * coeffs[b].conj();
                for c in 0..n {
                    for d in 0..n {
                        acc += ab * coeffs[c] * coeffs[d].conj() * t[((a * n + b) * n + c) * n + d];
                    }
                }
            }
        }
        Ok(acc.re / (n2 * n2))
    }

    fn check_len(&self, coeffs: &[Complex64]) -> Result<()> {
        if coeffs.len() == self.basis.len() {
            Ok(())
        } else {
            Err(Error::param(format!(
                "expected {} coefficients, got {}",
                self.basis.len(),
                coeffs.len()
            )))
        }
    }
}

fn weighted_amplitude(
    grid1: &Grid1D,
    grid2: &Grid1D,
    psi: &Array2<Complex64>,
) -> Array2<Complex64> {
    let s1: Vec<f64> = grid1.weights().iter().map(|w| w.sqrt()).collect();
    let s2: Vec<f64> = grid2.weights().iter().map(|w| w.sqrt()).collect();
    Array2::from_shape_fn(psi.dim(), |(i, j)| psi[[i, j]] * (s1[i] * s2[j]))
}

/// `ΣΣ w1_i w2_j conj(a_ij) b_ij`.
fn weighted_inner(
    grid1: &Grid1D,
    grid2: &Grid1D,
    a: &Array2<Complex64>,
    b: &Array2<Complex64>,
) -> Complex64 {
    let w2 = grid2.weights();
    let mut total = Complex64::new(0.0, 0.0);
    for ((ra, rb), w1) in a.rows().into_iter().zip(b.rows()).zip(grid1.weights()) {
        let mut row = Complex64::new(0.0, 0.0);
        for ((x, y), w) in ra.iter().zip(rb.iter()).zip(w2) {
            row += x.conj() * y * w;
        }
        total += row * w1;
    }
    total
}

fn conj_t(m: &Array2<Complex64>) -> Array2<Complex64> {
    m.t().mapv(|c| c.conj())
}

fn same_grids(a: &TwoParticleState, b: &TwoParticleState) -> Result<()> {
    if a.grid1 == b.grid1 && a.grid2 == b.grid2 {
        Ok(())
    } else {
        Err(Error::param("states live on different grids"))
    }
}

fn require_normalized(s: &TwoParticleState) -> Result<()> {
    if !s.normalized {
        return Err(Error::Contract("state must be normalized first".into()));
    }
    let n2 = s.norm_squared();
    if (n2 - 1.0).abs() > NORMALIZED_TOL {
        return Err(Error::Contract(format!(
            "state flagged normalized has squared norm {n2}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{make_grid, Rule};

    fn grid(n: usize) -> Grid1D {
        make_grid(-10.0, 10.0, n, Rule::Uniform).unwrap()
    }

    fn hermite_pair(z: f64) -> (f64, f64) {
        let g = std::f64::consts::PI.powf(-0.25) * (-0.5 * z * z).exp();
        (g, std::f64::consts::SQRT_2 * z * g)
    }

    #[test]
    fn product_state_is_pure_and_normalized() {
        let g = grid(201);
        let f = PulseProfile::gaussian(1.0, 0.0).unwrap();
        let p = SystemParams::copropagating(1.0, 0.5, 1.0).unwrap();
        let s = free_state(&f, &f, &p, 0.0, &g, &g);
        assert!((s.norm_squared() - 1.0).abs() < 1e-9);
        let s = normalize(s).unwrap();
        assert!(linear_entropy(&s).unwrap().abs() < 1e-9);
        let c = overlap(&s, &s).unwrap();
        assert!((c - 1.0).norm() < 1e-12);
    }

    #[test]
    fn global_phase_is_kept() {
        let g = grid(101);
        let s =
            TwoParticleState::from_fn(&g, &g, |a, b| Complex64::new((-(a * a + b * b)).exp(), 0.0));
        let n = normalize(s.clone()).unwrap();
        let m = normalize(s.scaled(Complex64::new(0.0, 3.0))).unwrap();
        let c = overlap(&n, &m).unwrap();
        assert!((c - Complex64::i()).norm() < 1e-12);
    }

    #[test]
    fn zero_state_is_degenerate() {
        let g = grid(11);
        let s = TwoParticleState::from_fn(&g, &g, |_, _| Complex64::new(0.0, 0.0));
        assert!(matches!(normalize(s), Err(Error::DegenerateState(_))));
    }

    #[test]
    fn unnormalized_inputs_violate_contract() {
        let g = grid(11);
        let s = TwoParticleState::from_fn(&g, &g, |_, _| Complex64::new(1.0, 0.0));
        assert!(matches!(linear_entropy(&s), Err(Error::Contract(_))));
        assert!(matches!(
            reduced_kernel(&s, Subsystem::First),
            Err(Error::Contract(_))
        ));
        assert!(matches!(overlap(&s, &s), Err(Error::Contract(_))));
    }

    #[test]
    fn mismatched_grids_rejected() {
        let a = normalize(TwoParticleState::from_fn(&grid(21), &grid(21), |_, _| {
            1.0.into()
        }))
        .unwrap();
        let b = normalize(TwoParticleState::from_fn(&grid(21), &grid(23), |_, _| {
            1.0.into()
        }))
        .unwrap();
        assert!(matches!(overlap(&a, &b), Err(Error::Parameter(_))));
    }

    #[test]
    fn balanced_schmidt_state() {
        let g = make_grid(-12.0, 12.0, 120, Rule::GaussLegendre).unwrap();
        let s = TwoParticleState::from_fn(&g, &g, |a, b| {
            let (fa, fb) = hermite_pair(a);
            let (ga, gb) = hermite_pair(b);
            Complex64::new((fa * gb + fb * ga) / std::f64::consts::SQRT_2, 0.0)
        });
        let s = normalize(s).unwrap();
        assert!((linear_entropy(&s).unwrap() - 0.5).abs() < 1e-9);
        let k = reduced_kernel(&s, Subsystem::First).unwrap();
        k.check(1e-10).unwrap();
        assert!((k.purity() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn family_matches_explicit_states() {
        let g1 = make_grid(-8.0, 8.0, 60, Rule::GaussLegendre).unwrap();
        let g2 = grid(41);
        let phi0 = Array2::from_shape_fn((60, 41), |(i, j)| {
            let (a, b) = (g1.nodes()[i], g2.nodes()[j]);
            Complex64::new((-(a * a + b * b) / 2.0).exp(), 0.0)
        });
        let phi1 = Array2::from_shape_fn((60, 41), |(i, j)| {
            let (a, b) = (g1.nodes()[i], g2.nodes()[j]);
            Complex64::new((-(a - b).powi(2) - b * b).exp(), 0.3 * a)
        });
        for family in [
            LinearFamily::new(g1.clone(), g2.clone(), vec![phi0.clone(), phi1.clone()])
                .unwrap()
                .with_purity(),
            LinearFamily::new(
                g2.clone(),
                g1.clone(),
                vec![phi0.t().to_owned(), phi1.t().to_owned()],
            )
            .unwrap()
            .with_purity(),
        ] {
            let coeffs = [Complex64::new(1.0, 0.0), Complex64::new(-0.4, 0.9)];
            let s = family.state(&coeffs).unwrap();
            assert!((family.norm_squared(&coeffs).unwrap() - s.norm_squared()).abs() < 1e-12);
            let s = normalize(s).unwrap();
            let r = normalize(family.state(&[1.0.into(), 0.0.into()]).unwrap()).unwrap();
            let c = overlap(&r, &s).unwrap();
            assert!((family.overlap(0, &coeffs).unwrap() - c).norm() < 1e-12);
            assert!((family.purity(&coeffs).unwrap() - purity(&s).unwrap()).abs() < 1e-12);
        }
    }
}
