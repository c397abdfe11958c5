use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::cli::schmidt_pair;
use crate::copropagating::CopropagatingFamily;
use crate::numerics::{make_grid, Grid1D, PulseProfile, Rule};
use crate::state::{
    linear_entropy, normalize, purity, reduced_kernel, Subsystem, TwoParticleState,
};

fn weighted(state: &TwoParticleState) -> DMatrix<Complex64> {
    let (w1, w2) = (state.grid1().weights(), state.grid2().weights());
    let a = state.amplitude();
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| {
        a[[i, j]] * (w1[i] * w2[j]).sqrt()
    })
}

fn svd_entropy(state: &TwoParticleState) -> f64 {
    let s = weighted(state).singular_values();
    1.0 - s.iter().map(|x| x.powi(4)).sum::<f64>()
}

fn coprop_state(k0: f64, phi: f64, grid: &Grid1D) -> TwoParticleState {
    let f = PulseProfile::gaussian(1.0, 0.0).unwrap();
    normalize(
        CopropagatingFamily::new(&f, &f, k0, grid, grid)
            .unwrap()
            .state(phi)
            .unwrap(),
    )
    .unwrap()
}

#[test]
fn entropy_matches_schmidt_decomposition() {
    let grid = make_grid(-9.0, 9.0, 60, Rule::GaussLegendre).unwrap();
    let pair = schmidt_pair(&grid).unwrap();
    assert!((linear_entropy(&pair).unwrap() - 0.5).abs() < 1e-10);
    assert!((svd_entropy(&pair) - 0.5).abs() < 1e-10);
    for (k0, phi) in [(1.0, PI), (2.5, PI / 2.0), (0.3, 2.0)] {
        let s = coprop_state(k0, phi, &grid);
        let (a, b) = (linear_entropy(&s).unwrap(), svd_entropy(&s));
        assert!((a - b).abs() < 1e-10, "k0 = {k0}: {a} vs {b}");
    }
}

#[test]
fn reduced_kernels_are_density_operators() {
    let grid = make_grid(-9.0, 9.0, 60, Rule::GaussLegendre).unwrap();
    let s = coprop_state(1.0, PI, &grid);
    let p = purity(&s).unwrap();
    for keep in [Subsystem::First, Subsystem::Second] {
        let k = reduced_kernel(&s, keep).unwrap();
        k.check(1e-10).unwrap();
        let w = k.weighted();
        let m = DMatrix::from_fn(w.nrows(), w.ncols(), |i, j| w[[i, j]]);
        let eig = m.symmetric_eigenvalues();
        assert!(eig.iter().all(|&e| e >= -1e-8), "min {}", eig.min());
        assert!((eig.sum() - 1.0).abs() < 1e-10);
        assert!((eig.iter().map(|e| e * e).sum::<f64>() - p).abs() < 1e-10);
        assert!((k.purity() - p).abs() < 1e-10);
    }
}

#[test]
fn purity_by_direct_fourfold_sum() {
    let grid = make_grid(-6.0, 6.0, 41, Rule::Uniform).unwrap();
    let s = coprop_state(1.5, 2.0, &grid);
    let (psi, w) = (s.amplitude(), grid.weights());
    let n = grid.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let wt = w[a] * w[b] * w[c] * w[d];
                    acc += wt * psi[[a, b]] * psi[[c, b]].conj() * psi[[c, d]] * psi[[a, d]].conj();
                }
            }
        }
    }
    assert!(acc.im.abs() < 1e-12);
    assert!((acc.re - purity(&s).unwrap()).abs() < 1e-8);
    let f = PulseProfile::gaussian(1.0, 0.0).unwrap();
    let fam = CopropagatingFamily::new(&f, &f, 1.5, &grid, &grid)
        .unwrap()
        .with_entropy();
    let s_l = fam.metrics(2.0).unwrap().entropy.unwrap();
    assert!((1.0 - s_l - acc.re).abs() < 1e-8);
}
