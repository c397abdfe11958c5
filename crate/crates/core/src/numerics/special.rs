use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

/// `sin(x) / x`, with the removable singularity handled by its series.
#[inline]
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Spatial factor of the band-limited commutator, `sinc(k0 z)`.
#[inline]
pub fn sinc_kernel(z: f64, k0: f64) -> f64 {
    sinc(k0 * z)
}

/// Full commutator kernel `C(z) = (k0/π) sinc(k0 z)` in units where σ = 1,
/// so that `∫ C(z) dz = 1`.
#[inline]
pub fn commutator_kernel(z: f64, k0: f64) -> f64 {
    k0 / PI * sinc(k0 * z)
}

/// Sine integral `Si(x) = ∫₀ˣ sin(t)/t dt`.
///
/// Power series below |x| = 2, otherwise the continued fraction for
/// `E1(ix)` evaluated with the modified Lentz method.
pub fn sine_integral(x: f64) -> f64 {
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;
    let t = x.abs();
    if t == 0.0 {
        return 0.0;
    }
    let si = if t <= 2.0 {
        let t2 = t * t;
        let mut term = t;
        let mut sum = t;
        let mut k = 1.0_f64;
        loop {
            // term_k = (-1)^k t^(2k+1) / (2k+1)!
            term *= -t2 / ((2.0 * k) * (2.0 * k + 1.0));
            let add = term / (2.0 * k + 1.0);
            sum += add;
            if add.abs() < EPS * sum.abs() {
                break;
            }
            k += 1.0;
        }
        sum
    } else {
        let one = Complex64::new(1.0, 0.0);
        let mut b = Complex64::new(1.0, t);
        let mut c = Complex64::new(1.0 / TINY, 0.0);
        let mut d = one / b;
        let mut h = d;
        for i in 2..10_000 {
            let a = -((i - 1) as f64).powi(2);
            b += 2.0;
            d = one / (d * a + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del.re - 1.0).abs() + del.im.abs() < EPS {
                break;
            }
        }
        h *= Complex64::new(t.cos(), -t.sin());
        FRAC_PI_2 + h.im
    };
    si.copysign(x)
}
