use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::Numerics;
use crate::geom::Vec2;
use crate::point_vortex::PointVortexState;
use crate::vpm::{InitialDataSpec, ProfileKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Pointvortex,
    Simulate,
    Sweep,
    Metrics,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Pointvortex => "pointvortex",
            Mode::Simulate => "simulate",
            Mode::Sweep => "sweep",
            Mode::Metrics => "metrics",
        })
    }
}

fn d_dt() -> f64 {
    1e-3
}
fn d_horizon() -> f64 {
    5.0
}
fn d_cadence() -> f64 {
    0.05
}
fn d_ppc() -> f64 {
    24.0
}
fn d_blob() -> f64 {
    2.0
}
fn d_theta() -> f64 {
    0.5
}
fn d_crossover() -> usize {
    2000
}
fn d_cfl() -> f64 {
    0.4
}
fn d_p() -> f64 {
    4.0
}
fn d_lambda() -> f64 {
    10.0
}
fn d_tail() -> f64 {
    3.0
}
fn d_profile() -> ProfileKind {
    ProfileKind::CompactBump
}

/// Flat run configuration. Physics fields are optional because not every
/// mode needs them; [`RunConfig::validate`] checks what the mode requires.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(default)]
    pub centers: Vec<[f64; 2]>,
    #[serde(default)]
    pub intensities: Vec<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub support_radius: Option<f64>,
    #[serde(default)]
    pub separation: Option<f64>,
    #[serde(default = "d_p")]
    pub p: f64,
    /// Defaults to 2(p − 1)/p, the exponent realized by the bump profile.
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default = "d_lambda")]
    pub lambda: f64,
    #[serde(default = "d_profile")]
    pub profile: ProfileKind,
    #[serde(default = "d_tail")]
    pub tail_fraction: f64,
    #[serde(default = "d_dt")]
    pub dt: f64,
    #[serde(default = "d_horizon")]
    pub horizon: f64,
    #[serde(default = "d_cadence")]
    pub cadence: f64,
    #[serde(default = "d_ppc")]
    pub particles_per_core: f64,
    #[serde(default = "d_blob")]
    pub blob_factor: f64,
    #[serde(default = "d_theta")]
    pub theta: f64,
    #[serde(default)]
    pub deterministic: bool,
    #[serde(default = "d_crossover")]
    pub direct_crossover: usize,
    #[serde(default = "d_cfl")]
    pub cfl: f64,
    #[serde(default)]
    pub pv_offsets: Vec<[f64; 2]>,
    #[serde(default)]
    pub collision_floor: Option<f64>,
    #[serde(default)]
    pub jitter: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let start: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
    (start + column.saturating_sub(1)).min(text.len())
}

/// Parses and validates a JSON configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
        offset: byte_offset(text, e.line(), e.column()),
        message: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs serialize")
    }

    pub fn validate(&self) -> Result<()> {
        self.numerics().validate()?;
        match self.mode {
            Mode::Metrics => Ok(()),
            Mode::Pointvortex => {
                self.pv_state()?;
                Ok(())
            }
            Mode::Simulate => self.spec().map(|_| ()),
            Mode::Sweep => {
                let spec = self.spec()?;
                if self.epsilons.is_empty() {
                    return Err(Error::validation("epsilons", "a sweep needs at least one value"));
                }
                if self.epsilons.windows(2).any(|w| !(w[1] < w[0])) {
                    return Err(Error::validation("epsilons", "must be strictly decreasing"));
                }
                for &e in &self.epsilons {
                    InitialDataSpec { epsilon: e, ..spec.clone() }.validate().map_err(|err| match err {
                        Error::Validation { message, .. } => Error::validation("epsilons", message),
                        other => other,
                    })?;
                }
                Ok(())
            }
        }
    }

    pub fn numerics(&self) -> Numerics {
        Numerics {
            dt: self.dt,
            horizon: self.horizon,
            cadence: self.cadence,
            particles_per_core: self.particles_per_core,
            blob_factor: self.blob_factor,
            theta: self.theta,
            deterministic: self.deterministic,
            direct_crossover: self.direct_crossover,
            cfl: self.cfl,
            pv_offsets: self.pv_offsets.iter().map(|&v| v.into()).collect(),
            collision_floor: self.collision_floor,
            jitter: self.jitter,
            seed: self.seed,
        }
    }

    fn centers(&self) -> Vec<Vec2> {
        self.centers.iter().map(|&c| c.into()).collect()
    }

    /// Initial data; in sweep mode ε defaults to the first sweep value.
    pub fn spec(&self) -> Result<InitialDataSpec> {
        let need = |v: Option<f64>, f: &str| v.ok_or_else(|| Error::validation(f, "is required in this mode"));
        let epsilon = match (self.epsilon, self.mode, self.epsilons.first()) {
            (Some(e), _, _) => e,
            (None, Mode::Sweep, Some(&e)) => e,
            _ => return Err(Error::validation("epsilon", "is required in this mode")),
        };
        if self.pv_offsets.len() > self.centers.len() {
            return Err(Error::validation("pv_offsets", "more offsets than centers"));
        }
        if self.pv_offsets.iter().any(|o| Vec2::from(*o).norm() > 1.0) {
            return Err(Error::validation("pv_offsets", "offsets are in units of epsilon and must not exceed 1"));
        }
        let spec = InitialDataSpec {
            centers: self.centers(),
            intensities: self.intensities.clone(),
            epsilon,
            support_radius: need(self.support_radius, "support_radius")?,
            separation: need(self.separation, "separation")?,
            p: self.p,
            gamma: self.gamma.unwrap_or(2.0 * (self.p - 1.0) / self.p),
            lambda: self.lambda,
            profile: self.profile,
            tail_fraction: self.tail_fraction,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn pv_state(&self) -> Result<PointVortexState> {
        if self.centers.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::validation("centers", "must be finite"));
        }
        PointVortexState::new(self.centers(), self.intensities.clone())
    }

    /// Collision floor for point-vortex runs: explicit, else δ/4, else 0.
    pub fn pv_floor(&self) -> f64 {
        self.collision_floor.or(self.separation.map(|d| 0.25 * d)).unwrap_or(0.0)
    }
}
