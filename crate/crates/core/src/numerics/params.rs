//! Dimensionless system parameters. Lengths are in units of the pulse
//! width σ, so `κ = k0 / π`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Copropagating,
    HeadOn,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub mode: Mode,
    pub k0: f64,
    /// Accumulated XPM phase Φ.
    pub phi: f64,
    pub v1: f64,
    pub v2: f64,
    /// Initial center separation (head-on only, zero otherwise).
    pub separation: f64,
    /// Interaction time that converts Φ into a rate for co-propagation.
    pub time: f64,
    /// Nonlinear rate χ.
    pub chi: f64,
}

impl SystemParams {
    /// Equal-velocity pulses; Φ = χκt with the interaction time taken as 1.
    pub fn copropagating(k0: f64, phi: f64, v: f64) -> Result<Self> {
        Self::copropagating_at(k0, phi, v, 1.0)
    }

    pub fn copropagating_at(k0: f64, phi: f64, v: f64, time: f64) -> Result<Self> {
        check_k0(k0)?;
        check_phi(phi)?;
        if !v.is_finite() {
            return Err(Error::param(format!("velocity must be finite, got {v}")));
        }
        if !(time > 0.0) || !time.is_finite() {
            return Err(Error::param(format!(
                "interaction time must be positive, got {time}"
            )));
        }
        let kappa = k0 / PI;
        Ok(SystemParams {
            mode: Mode::Copropagating,
            k0,
            phi,
            v1: v,
            v2: v,
            separation: 0.0,
            time,
            chi: phi / (kappa * time),
        })
    }

    /// Counter-propagating pulses with Φ = 2χκl / |v_r|.
    pub fn head_on(k0: f64, phi: f64, v1: f64, v2: f64, separation: f64) -> Result<Self> {
        check_k0(k0)?;
        check_phi(phi)?;
        let vr = v1 - v2;
        if !(vr != 0.0) || !vr.is_finite() {
            return Err(Error::Mode(format!(
                "head-on mode needs v1 != v2, got v1 = {v1}, v2 = {v2}"
            )));
        }
        if !(separation > 0.0) || !separation.is_finite() {
            return Err(Error::param(format!(
                "separation must be positive, got {separation}"
            )));
        }
        let kappa = k0 / PI;
        Ok(SystemParams {
            mode: Mode::HeadOn,
            k0,
            phi,
            v1,
            v2,
            separation,
            time: 0.0,
            chi: phi * vr.abs() / (2.0 * kappa * separation),
        })
    }

    /// κ = k0 / (πσ), the kernel value at zero separation.
    pub fn kappa(&self) -> f64 {
        self.k0 / PI
    }

    /// Relative velocity v_r = v1 − v2.
    pub fn relative_velocity(&self) -> f64 {
        self.v1 - self.v2
    }

    /// Same system with a different Φ (χ rescaled accordingly).
    pub fn with_phi(&self, phi: f64) -> Result<Self> {
        check_phi(phi)?;
        let mut out = *self;
        out.phi = phi;
        out.chi = match self.mode {
            Mode::Copropagating => phi / (self.kappa() * self.time),
            Mode::HeadOn => {
                phi * self.relative_velocity().abs() / (2.0 * self.kappa() * self.separation)
            }
        };
        Ok(out)
    }

    /// Verify the stored Φ, χ and geometry agree to 1e-12 (relative).
    pub fn check(&self) -> Result<()> {
        check_k0(self.k0)?;
        let implied = match self.mode {
            Mode::Copropagating => {
                if self.v1 != self.v2 {
                    return Err(Error::Mode("co-propagating pulses need v1 == v2".into()));
                }
                self.chi * self.kappa() * self.time
            }
            Mode::HeadOn => {
                if self.v1 == self.v2 {
                    return Err(Error::Mode("head-on pulses need v1 != v2".into()));
                }
                2.0 * self.chi * self.kappa() * self.separation / self.relative_velocity().abs()
            }
        };
        if (implied - self.phi).abs() > 1e-12 * self.phi.abs().max(1.0) {
            return Err(Error::Contract(format!(
                "phase {} inconsistent with rate and geometry (implies {implied})",
                self.phi
            )));
        }
        Ok(())
    }
}

fn check_k0(k0: f64) -> Result<()> {
    if k0 > 0.0 && k0.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("k0 must be positive, got {k0}")))
    }
}

fn check_phi(phi: f64) -> Result<()> {
    if phi >= 0.0 && phi.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!(
            "phi must be finite and non-negative, got {phi}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn copropagating_rate_reproduces_phase() {
        let p = SystemParams::copropagating_at(2.5, 1.3, 0.7, 4.0).unwrap();
        assert!((p.chi * p.kappa() * p.time - 1.3).abs() < 1e-12);
        p.check().unwrap();
    }

    #[test]
    fn head_on_rate_matches_caption_definition() {
        let p = SystemParams::head_on(1e-3, PI, 5e3, -5e3, 10.0).unwrap();
        assert_eq!(p.relative_velocity(), 1e4);
        // Φ = χ Δω_s l / (π v_r c) with Δω_s / c = 2 k0 / σ
        let phi = p.chi * 2.0 * p.k0 * p.separation / (PI * 1e4);
        assert!((phi - PI).abs() < 1e-12);
        p.check().unwrap();
        let q = p.with_phi(PI / 4.0).unwrap();
        assert!((q.chi - p.chi / 4.0).abs() < 1e-9 * p.chi);
        q.check().unwrap();
    }

    #[test]
    fn rejects_bad_input() {
        assert!(SystemParams::copropagating(0.0, 1.0, 1.0).is_err());
        assert!(SystemParams::copropagating(1.0, -1.0, 1.0).is_err());
        assert!(matches!(
            SystemParams::head_on(1.0, 1.0, 2.0, 2.0, 10.0),
            Err(Error::Mode(_))
        ));
        assert!(SystemParams::head_on(1.0, 1.0, 2.0, -2.0, 0.0).is_err());
    }

    #[test]
    fn tampered_fields_fail_consistency() {
        let mut p = SystemParams::copropagating(1.0, 1.0, 1.0).unwrap();
        p.chi *= 1.001;
        assert!(matches!(p.check(), Err(Error::Contract(_))));
        let mut q = SystemParams::copropagating(1.0, 1.0, 1.0).unwrap();
        q.v2 = 2.0;
        assert!(matches!(q.check(), Err(Error::Mode(_))));
    }
}
