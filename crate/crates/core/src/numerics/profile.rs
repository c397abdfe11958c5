//! Normalized single-photon envelopes `f(z)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gaussian amplitude is below 1e-21 this many widths from the center.
const GAUSSIAN_REACH: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Gaussian,
    Square,
    Tabulated,
}

impl std::str::FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Shape::Gaussian),
            "square" => Ok(Shape::Square),
            "tabulated" => Ok(Shape::Tabulated),
            other => Err(Error::param(format!("unknown profile shape `{other}`"))),
        }
    }
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Shape::Gaussian => "gaussian",
            Shape::Square => "square",
            Shape::Tabulated => "tabulated",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Envelope {
    Gaussian {
        sigma: f64,
        amplitude: f64,
    },
    Square {
        width: f64,
        amplitude: f64,
    },
    /// Piecewise-linear interpolation of complex samples, zero outside.
    Tabulated {
        nodes: Vec<f64>,
        values: Vec<Complex64>,
    },
}

/// An L2-normalized pulse envelope.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseProfile {
    envelope: Envelope,
    center: f64,
}

impl PulseProfile {
    /// `f(z) = (σ√π)^{-1/2} exp(-(z - z0)² / 2σ²)`.
    pub fn gaussian(sigma: f64, center: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::param(format!(
                "gaussian width must be positive, got {sigma}"
            )));
        }
        Ok(PulseProfile {
            envelope: Envelope::Gaussian {
                sigma,
                amplitude: (sigma * PI.sqrt()).powf(-0.5),
            },
            center: finite(center)?,
        })
    }

    /// Flat-top pulse `w^{-1/2}` on the closed interval `[z0 - w/2, z0 + w/2]`.
    pub fn square(width: f64, center: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::param(format!(
                "square width must be positive, got {width}"
            )));
        }
        Ok(PulseProfile {
            envelope: Envelope::Square {
                width,
                amplitude: width.powf(-0.5),
            },
            center: finite(center)?,
        })
    }

    /// Linear interpolation through `(nodes, values)`, rescaled to unit norm.
    ///
    /// The profile vanishes outside `[nodes[0], nodes[last]]`; values may be
    /// complex.
    pub fn tabulated(nodes: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if nodes.len() < 2 || nodes.len() != values.len() {
            return Err(Error::param(
                "tabulated profile needs matching node/value lists of length >= 2",
            ));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("tabulated nodes must be strictly increasing"));
        }
        let norm2 = piecewise_linear_norm2(&nodes, &values);
        if !(norm2 > 0.0) || !norm2.is_finite() {
            return Err(Error::param("tabulated profile has zero norm"));
        }
        let scale = norm2.sqrt().recip();
        let values = values.into_iter().map(|v| v * scale).collect();
        Ok(PulseProfile {
            envelope: Envelope::Tabulated { nodes, values },
            center: 0.0,
        })
    }

    pub fn shape(&self) -> Shape {
        match self.envelope {
            Envelope::Gaussian { .. } => Shape::Gaussian,
            Envelope::Square { .. } => Shape::Square,
            Envelope::Tabulated { .. } => Shape::Tabulated,
        }
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    /// Same envelope translated by `dz`.
    pub fn shifted(&self, dz: f64) -> PulseProfile {
        let mut out = self.clone();
        match &mut out.envelope {
            Envelope::Tabulated { nodes, .. } => nodes.iter_mut().for_each(|z| *z += dz),
            _ => out.center += dz,
        }
        out
    }

    pub fn is_real(&self) -> bool {
        match &self.envelope {
            Envelope::Tabulated { values, .. } => values.iter().all(|v| v.im == 0.0),
            _ => true,
        }
    }

    /// Real part of `f(z)`; exact for the closed-form shapes.
    #[inline]
    pub fn value(&self, z: f64) -> f64 {
        match &self.envelope {
            Envelope::Gaussian { sigma, amplitude } => {
                let x = (z - self.center) / sigma;
                amplitude * (-0.5 * x * x).exp()
            }
            Envelope::Square { width, amplitude } => {
                if (z - self.center).abs() <= 0.5 * width {
                    *amplitude
                } else {
                    0.0
                }
            }
            Envelope::Tabulated { .. } => self.eval(z).re,
        }
    }

    #[inline]
    pub fn eval(&self, z: f64) -> Complex64 {
        match &self.envelope {
            Envelope::Tabulated { nodes, values } => {
                let last = nodes.len() - 1;
                if z < nodes[0] || z > nodes[last] {
                    return Complex64::new(0.0, 0.0);
                }
                let k = nodes.partition_point(|&x| x <= z).clamp(1, last);
                let (x0, x1) = (nodes[k - 1], nodes[k]);
                let s = (z - x0) / (x1 - x0);
                values[k - 1] * (1.0 - s) + values[k] * s
            }
            _ => Complex64::new(self.value(z), 0.0),
        }
    }

    /// Interval outside which the profile is zero (or below 1e-21 for the
    /// Gaussian).
    pub fn support(&self) -> (f64, f64) {
        match &self.envelope {
            Envelope::Gaussian { sigma, .. } => (
                self.center - GAUSSIAN_REACH * sigma,
                self.center + GAUSSIAN_REACH * sigma,
            ),
            Envelope::Square { width, .. } => {
                (self.center - 0.5 * width, self.center + 0.5 * width)
            }
            Envelope::Tabulated { nodes, .. } => (nodes[0], nodes[nodes.len() - 1]),
        }
    }

    /// Points inside the support where the profile or its derivative jumps.
    pub fn kinks(&self) -> Vec<f64> {
        match &self.envelope {
            Envelope::Tabulated { nodes, .. } => nodes[1..nodes.len() - 1].to_vec(),
            _ => Vec::new(),
        }
    }

    /// `∫|f|²` evaluated exactly for the stored envelope.
    pub fn norm_squared(&self) -> f64 {
        match &self.envelope {
            Envelope::Gaussian { sigma, amplitude } => amplitude * amplitude * sigma * PI.sqrt(),
            Envelope::Square { width, amplitude } => amplitude * amplitude * width,
            Envelope::Tabulated { nodes, values } => piecewise_linear_norm2(nodes, values),
        }
    }

    /// Copy rescaled so that `norm_squared() == 1`.
    pub fn renormalized(&self) -> PulseProfile {
        let s = self.norm_squared().sqrt().recip();
        let mut out = self.clone();
        match &mut out.envelope {
            Envelope::Gaussian { amplitude, .. } | Envelope::Square { amplitude, .. } => {
                *amplitude *= s
            }
            Envelope::Tabulated { values, .. } => values.iter_mut().for_each(|v| *v *= s),
        }
        out
    }
}

fn finite(x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::param(format!(
            "profile center must be finite, got {x}"
        )))
    }
}

fn piecewise_linear_norm2(nodes: &[f64], values: &[Complex64]) -> f64 {
    nodes
        .windows(2)
        .zip(values.windows(2))
        .map(|(x, v)| {
            let h = x[1] - x[0];
            h * (v[0].norm_sqr() + (v[0] * v[1].conj()).re + v[1].norm_sqr()) / 3.0
        })
        .sum()
}

/// Profile selection as it appears in run configurations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub shape: Shape,
    pub sigma: f64,
    /// Full width of the square pulse.
    pub width: f64,
}

impl Default for ProfileSpec {
    fn default() -> Self {
        ProfileSpec {
            shape: Shape::Gaussian,
            sigma: 1.0,
            width: 2.0,
        }
    }
}

/// Build a normalized profile centered at `center`.
pub fn make_profile(spec: &ProfileSpec, center: f64) -> Result<PulseProfile> {
    if !(spec.sigma > 0.0) {
        return Err(Error::param(format!(
            "sigma must be positive, got {}",
            spec.sigma
        )));
    }
    match spec.shape {
        Shape::Gaussian => PulseProfile::gaussian(spec.sigma, center),
        Shape::Square => PulseProfile::square(spec.width, center),
        Shape::Tabulated => Err(Error::param(
            "tabulated profiles are built from data, not a spec",
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{make_grid, Rule};

    #[test]
    fn gaussian_is_normalized() {
        let f = PulseProfile::gaussian(1.0, 0.0).unwrap();
        let g = make_grid(-12.0, 12.0, 240, Rule::GaussLegendre).unwrap();
        assert!((g.integrate(|z| f.value(z).powi(2)) - 1.0).abs() < 1e-10);
        assert!((f.norm_squared() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_fourth_moment() {
        let f = PulseProfile::gaussian(1.0, 0.0).unwrap();
        let g = make_grid(-12.0, 12.0, 240, Rule::GaussLegendre).unwrap();
        let expect = 1.0 / (2.0 * PI).sqrt();
        assert!((g.integrate(|z| f.value(z).powi(4)) - expect).abs() < 1e-12);
    }

    #[test]
    fn square_flat_top() {
        let f = PulseProfile::square(2.0, 0.0).unwrap();
        assert_eq!(f.value(0.3), 2f64.powf(-0.5));
        assert_eq!(f.value(-1.0), 2f64.powf(-0.5));
        assert_eq!(f.value(1.0001), 0.0);
        assert!((f.norm_squared() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_positive_width_rejected() {
        assert!(PulseProfile::square(0.0, 0.0).is_err());
        assert!(PulseProfile::gaussian(-1.0, 0.0).is_err());
        let spec = ProfileSpec {
            sigma: 0.0,
            ..Default::default()
        };
        assert!(make_profile(&spec, 0.0).is_err());
    }

    #[test]
    fn tabulated_normalizes_complex_samples() {
        let nodes: Vec<f64> = (0..=40).map(|i| -4.0 + 0.2 * i as f64).collect();
        let values: Vec<Complex64> = nodes
            .iter()
            .map(|&z| Complex64::from_polar((-z * z).exp(), 0.3 * z))
            .collect();
        let f = PulseProfile::tabulated(nodes, values).unwrap();
        assert!(!f.is_real());
        assert!((f.norm_squared() - 1.0).abs() < 1e-12);
        // the fine composite rule is exact on each linear piece squared
        let breaks: Vec<f64> = (0..=40).map(|i| -4.0 + 0.2 * i as f64).collect();
        let g = crate::numerics::Grid1D::composite(&breaks, 3).unwrap();
        assert!((g.integrate(|z| f.eval(z).norm_sqr()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn renormalizing_fresh_profiles_is_identity() {
        for f in [
            PulseProfile::gaussian(1.0, 0.4).unwrap(),
            PulseProfile::square(2.0, -1.0).unwrap(),
        ] {
            let r = f.renormalized();
            for i in 0..50 {
                let z = -3.0 + 0.12 * i as f64;
                assert!((r.value(z) - f.value(z)).abs() < 1e-12);
            }
        }
    }
}
