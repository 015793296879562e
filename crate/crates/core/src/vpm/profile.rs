use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;

/// Normalized radial bump φ(r) = (3/π)(1 − r²)² on the unit disk.
///
/// ∫φ = 1 and ∫|x|²φ = 1/4 in closed form, so a component ω̄ = (a/ε²)φ(·/ε)
/// has W2 distance ε/2 to the Dirac mass at its center.
pub fn mother_profile(r: f64) -> f64 {
    if r >= 1.0 {
        0.0
    } else {
        let s = 1.0 - r * r;
        3.0 / PI * s * s
    }
}

/// Second moment ∫|x|² φ(x) dx of [`mother_profile`].
pub const MOTHER_SECOND_MOMENT: f64 = 0.25;

/// Inner radius of the tail annulus as a fraction of the support radius.
pub const TAIL_INNER_FRACTION: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    CompactBump,
    /// Bump carrying mass fraction ε^β in a thin annulus reaching out to R.
    BumpWithTail,
}

/// Initial data for N concentrated vortex components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialDataSpec {
    pub centers: Vec<Vec2>,
    pub intensities: Vec<f64>,
    pub epsilon: f64,
    pub support_radius: f64,
    pub separation: f64,
    pub p: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub profile: ProfileKind,
    pub tail_fraction: f64,
}

impl InitialDataSpec {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Exponent γ_eff = 2(p−1)/p realized by the ε-scaled bump.
    pub fn gamma_eff(&self) -> f64 {
        2.0 * (self.p - 1.0) / self.p
    }

    /// Mass fraction moved into the tail annulus.
    pub fn tail_mass(&self) -> f64 {
        match self.profile {
            ProfileKind::CompactBump => 0.0,
            ProfileKind::BumpWithTail => self.epsilon.powf(self.tail_fraction),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64, f: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::validation(f, "must be a positive finite number"))
            }
        };
        if self.centers.is_empty() {
            return Err(Error::validation("centers", "at least one component is required"));
        }
        if self.centers.len() != self.intensities.len() {
            return Err(Error::validation("intensities", "one intensity per center"));
        }
        if self.intensities.iter().any(|a| *a == 0.0 || !a.is_finite()) {
            return Err(Error::validation("intensities", "must be finite and nonzero"));
        }
        if self.centers.iter().any(|c| !c.is_finite()) {
            return Err(Error::validation("centers", "must be finite"));
        }
        pos(self.epsilon, "epsilon")?;
        pos(self.support_radius, "support_radius")?;
        pos(self.separation, "separation")?;
        pos(self.gamma, "gamma")?;
        pos(self.lambda, "lambda")?;
        if !(self.p > 2.0) || !self.p.is_finite() {
            return Err(Error::validation("p", "must exceed 2"));
        }
        if self.epsilon > self.support_radius {
            return Err(Error::validation("epsilon", "must not exceed support_radius"));
        }
        if self.support_radius >= self.separation {
            return Err(Error::validation("support_radius", "must be smaller than separation"));
        }
        if self.profile == ProfileKind::BumpWithTail {
            pos(self.tail_fraction, "tail_fraction")?;
        }
        let need = self.separation + 2.0 * self.support_radius;
        for i in 0..self.centers.len() {
            for j in i + 1..self.centers.len() {
                if self.centers[i].dist(self.centers[j]) < need * (1.0 - 1e-12) {
                    return Err(Error::validation(
                        "centers",
                        format!("centers {i} and {j} closer than separation + 2 support_radius"),
                    ));
                }
            }
        }
        Ok(())
    }
}
