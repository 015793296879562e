//! Vortex particle discretization of concentrated initial vorticity and its
//! advection by the regularized Biot–Savart velocity.

mod profile;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::kernel::{direct_velocity, tree_velocity, KernelParams, Targets};
use crate::rk4::{rk4_step, step_count};

pub use profile::{mother_profile, InitialDataSpec, ProfileKind, MOTHER_SECOND_MOMENT, TAIL_INNER_FRACTION};

/// Discrete vorticity: point circulations tagged by component.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleCloud {
    pub positions: Vec<Vec2>,
    circulations: Vec<f64>,
    tags: Vec<usize>,
    n_components: usize,
    /// Sampling pitch; unknown for clouds read back from disk.
    pub pitch: Option<f64>,
    pub blob_radius: f64,
    pub t: f64,
}

impl ParticleCloud {
    pub fn new(
        positions: Vec<Vec2>,
        circulations: Vec<f64>,
        tags: Vec<usize>,
        pitch: Option<f64>,
        blob_radius: f64,
    ) -> Result<Self> {
        if positions.len() != circulations.len() || positions.len() != tags.len() {
            return Err(Error::validation("cloud", "positions, circulations and tags differ in length"));
        }
        if positions.iter().any(|p| !p.is_finite()) || circulations.iter().any(|g| !g.is_finite()) {
            return Err(Error::validation("cloud", "non-finite position or circulation"));
        }
        let n_components = tags.iter().max().map_or(0, |m| m + 1);
        let mut sign = vec![0i8; n_components];
        for (&g, &tag) in circulations.iter().zip(&tags) {
            let s = if g > 0.0 {
                1
            } else if g < 0.0 {
                -1
            } else {
                0
            };
            if s != 0 {
                if sign[tag] != 0 && sign[tag] != s {
                    return Err(Error::MixedSign(tag));
                }
                sign[tag] = s;
            }
        }
        Ok(ParticleCloud {
            positions,
            circulations,
            tags,
            n_components,
            pitch,
            blob_radius,
            t: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn circulations(&self) -> &[f64] {
        &self.circulations
    }

    pub fn tags(&self) -> &[usize] {
        &self.tags
    }

    pub fn n_components(&self) -> usize {
        self.n_components
    }

    pub fn component(&self, i: usize) -> impl Iterator<Item = (Vec2, f64)> + '_ {
        self.positions
            .iter()
            .zip(&self.circulations)
            .zip(&self.tags)
            .filter(move |(_, &t)| t == i)
            .map(|((&p, &g), _)| (p, g))
    }

    /// a_i = Σ_{tag=i} Γ_k.
    pub fn intensity(&self, i: usize) -> f64 {
        crate::sum::exact_sum(self.component(i).map(|(_, g)| g))
    }

    pub fn with_positions(&self, positions: Vec<Vec2>, t: f64) -> ParticleCloud {
        assert_eq!(positions.len(), self.len());
        ParticleCloud {
            positions,
            t,
            ..self.clone()
        }
    }
}

/// Particle-method numerics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VpmConfig {
    pub kernel: KernelParams,
    /// Clouds with at most this many particles use direct summation.
    pub direct_crossover: usize,
}

impl Default for VpmConfig {
    fn default() -> Self {
        VpmConfig {
            kernel: KernelParams::default(),
            direct_crossover: 2000,
        }
    }
}

/// Samples each component on a midpoint grid of pitch `h`. With `jitter`
/// the grid origin of every component is shifted by a seeded random offset
/// inside one cell.
pub fn sample_initial_cloud(spec: &InitialDataSpec, h: f64, jitter: Option<u64>) -> Result<ParticleCloud> {
    spec.validate()?;
    if !(h > 0.0) {
        return Err(Error::validation("pitch", "must be positive"));
    }
    if h > spec.epsilon / 4.0 * (1.0 + 1e-12) {
        return Err(Error::validation("pitch", "must resolve the core (h <= epsilon/4)"));
    }
    let eps = spec.epsilon;
    let big_r = spec.support_radius;
    let tail = spec.tail_mass();
    let inner = TAIL_INNER_FRACTION * big_r;
    let reach = if tail > 0.0 { big_r } else { eps };
    let mut rng = jitter.map(ChaCha8Rng::seed_from_u64);

    let mut positions = Vec::new();
    let mut circulations = Vec::new();
    let mut tags = Vec::new();
    for (i, (&c, &a)) in spec.centers.iter().zip(&spec.intensities).enumerate() {
        let off = match rng.as_mut() {
            Some(r) => Vec2::new(r.gen_range(-0.5..0.5) * h, r.gen_range(-0.5..0.5) * h),
            None => Vec2::ZERO,
        };
        let m = (reach / h).ceil() as i64 + 1;
        let mut cells = Vec::new();
        for k in -m..m {
            for l in -m..m {
                let d = Vec2::new((k as f64 + 0.5) * h, (l as f64 + 0.5) * h) + off;
                let r = d.norm();
                if r >= reach {
                    continue;
                }
                let core = mother_profile(r / eps);
                let ring = if tail > 0.0 && r >= inner { 1.0 } else { 0.0 };
                if core > 0.0 || ring > 0.0 {
                    cells.push((c + d, core, ring));
                }
            }
        }
        let core_sum: f64 = cells.iter().map(|c| c.1).sum();
        let ring_sum: f64 = cells.iter().map(|c| c.2).sum();
        if core_sum == 0.0 || (tail > 0.0 && ring_sum == 0.0) {
            return Err(Error::SpecInconsistency(format!("component {i} not resolved by the grid")));
        }
        let core_scale = a * (1.0 - tail) / core_sum;
        let ring_scale = if tail > 0.0 { a * tail / ring_sum } else { 0.0 };
        let gam: Vec<f64> = cells.iter().map(|c| c.1 * core_scale + c.2 * ring_scale).collect();
        let gmax = gam.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        for (cell, g) in cells.iter().zip(gam) {
            if g.abs() >= 1e-14 * gmax {
                positions.push(cell.0);
                circulations.push(g);
                tags.push(i);
            }
        }
    }
    let cloud = ParticleCloud::new(positions, circulations, tags, Some(h), 2.0 * h)?;
    check_hypotheses(spec, &cloud)?;
    Ok(cloud)
}

fn check_hypotheses(spec: &InitialDataSpec, cloud: &ParticleCloud) -> Result<()> {
    for (i, &c) in spec.centers.iter().enumerate() {
        let a = cloud.intensity(i);
        let m2: f64 = cloud.component(i).map(|(x, g)| g * x.dist_sq(c)).sum::<f64>() / a;
        if m2.sqrt() > spec.epsilon {
            return Err(Error::SpecInconsistency(format!(
                "component {i}: W2 to its center is {} > epsilon",
                m2.sqrt()
            )));
        }
        if cloud.component(i).any(|(x, _)| x.dist(c) >= spec.support_radius) {
            return Err(Error::SpecInconsistency(format!("component {i}: particle outside B_R")));
        }
    }
    let lp = lp_norm_estimate(cloud, spec.p)?;
    let ceiling = spec.lambda * spec.epsilon.powf(-spec.gamma_eff());
    if lp > ceiling {
        return Err(Error::SpecInconsistency(format!(
            "discrete L^p norm {lp} exceeds lambda * epsilon^-gamma_eff = {ceiling}"
        )));
    }
    Ok(())
}

/// Quadrature L^p norm (Σ |Γ_k/h²|^p h²)^{1/p} of the reconstructed density.
pub fn lp_norm_estimate(cloud: &ParticleCloud, p: f64) -> Result<f64> {
    let h = cloud.pitch.ok_or(Error::PitchUnknown)?;
    if !(p > 2.0) {
        return Err(Error::validation("p", "must exceed 2"));
    }
    let h2 = h * h;
    let s: f64 = cloud.circulations.iter().map(|g| (g.abs() / h2).powf(p) * h2).sum();
    Ok(s.powf(1.0 / p))
}

/// Particle velocities, by treecode above the crossover size.
pub fn vpm_rhs(cloud: &ParticleCloud, cfg: &VpmConfig) -> Result<Vec<Vec2>> {
    velocities(&cloud.positions, &cloud.circulations, cfg)
}

fn velocities(pos: &[Vec2], gam: &[f64], cfg: &VpmConfig) -> Result<Vec<Vec2>> {
    if pos.len() <= cfg.direct_crossover {
        direct_velocity(pos, gam, Targets::Sources, &cfg.kernel)
    } else {
        tree_velocity(pos, gam, Targets::Sources, &cfg.kernel)
    }
}

/// One RK4 step of the particle positions; circulations never change.
pub fn vpm_step(cloud: &ParticleCloud, dt: f64, cfg: &VpmConfig) -> Result<ParticleCloud> {
    if !(dt > 0.0) {
        return Err(Error::validation("dt", "must be positive"));
    }
    let gam = &cloud.circulations;
    let next = rk4_step(&cloud.positions, dt, |x| velocities(x, gam, cfg))?;
    Ok(cloud.with_positions(next, cloud.t + dt))
}

/// Minimum over component pairs of the smallest particle distance, with the
/// pair attaining it. `None` for fewer than two components.
pub fn support_gap(cloud: &ParticleCloud) -> Option<(f64, usize, usize)> {
    support_gap_below(cloud, f64::INFINITY)
}

/// Like [`support_gap`], but pairs whose bounding disks are already at
/// least `limit` apart are not examined particle by particle; returns
/// `None` when no pair can be closer than `limit`.
pub fn support_gap_below(cloud: &ParticleCloud, limit: f64) -> Option<(f64, usize, usize)> {
    let n = cloud.n_components;
    if n < 2 {
        return None;
    }
    let members: Vec<Vec<Vec2>> = (0..n).map(|i| cloud.component(i).map(|(p, _)| p).collect()).collect();
    // bounding disks about the first particle give a cheap lower bound
    let disks: Vec<(Vec2, f64)> = members
        .iter()
        .map(|m| {
            let c = m.first().copied().unwrap_or(Vec2::ZERO);
            (c, m.iter().map(|p| p.dist(c)).fold(0.0, f64::max))
        })
        .collect();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if !members[i].is_empty() && !members[j].is_empty() {
                pairs.push((i, j));
            }
        }
    }
    pairs.sort_by(|a, b| {
        let lb = |(i, j): (usize, usize)| disks[i].0.dist(disks[j].0) - disks[i].1 - disks[j].1;
        lb(*a).total_cmp(&lb(*b))
    });
    let mut best: Option<(f64, usize, usize)> = None;
    for (i, j) in pairs {
        let lower = disks[i].0.dist(disks[j].0) - disks[i].1 - disks[j].1;
        if lower >= limit {
            continue;
        }
        if let Some(b) = best {
            if lower > b.0 {
                continue;
            }
        }
        let d = members[i]
            .par_iter()
            .map(|a| members[j].iter().map(|b| a.dist_sq(*b)).fold(f64::INFINITY, f64::min))
            .reduce(|| f64::INFINITY, f64::min)
            .sqrt();
        if best.map_or(true, |b| d < b.0) {
            best = Some((d, i, j));
        }
    }
    best
}

/// Distance between the particle supports of the closest two components;
/// `+∞` when there is only one component.
pub fn component_support_distance(cloud: &ParticleCloud) -> f64 {
    support_gap(cloud).map_or(f64::INFINITY, |g| g.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StopReport {
    RanToHorizon { t: f64 },
    /// Components `i` and `j` came closer than the threshold at time `t`.
    Separated { t: f64, i: usize, j: usize, distance: f64 },
}

impl StopReport {
    pub fn separation_time(&self) -> Option<f64> {
        match self {
            StopReport::Separated { t, .. } => Some(*t),
            StopReport::RanToHorizon { .. } => None,
        }
    }
}

/// Advances the cloud to `t_end`, calling `observer` on the initial cloud
/// and every `cadence` steps. With `stop_below = Some(d)` integration halts
/// as soon as two component supports are closer than `d`.
pub fn vpm_integrate(
    cloud: &ParticleCloud,
    dt: f64,
    t_end: f64,
    cadence: usize,
    stop_below: Option<f64>,
    cfg: &VpmConfig,
    observer: &mut dyn FnMut(&ParticleCloud) -> Result<()>,
) -> Result<(ParticleCloud, StopReport)> {
    if !(dt > 0.0) {
        return Err(Error::validation("dt", "must be positive"));
    }
    let cadence = cadence.max(1);
    let t0 = cloud.t;
    let steps = step_count(t_end - t0, dt);
    let mut cur = cloud.clone();
    observer(&cur)?;
    for n in 1..=steps {
        cur = vpm_step(&cur, dt, cfg)?;
        cur.t = t0 + n as f64 * dt;
        if let Some(limit) = stop_below {
            if let Some((d, i, j)) = support_gap_below(&cur, limit) {
                if d < limit {
                    observer(&cur)?;
                    let report = StopReport::Separated { t: cur.t, i, j, distance: d };
                    return Ok((cur, report));
                }
            }
        }
        if n % cadence == 0 || n == steps {
            observer(&cur)?;
        }
    }
    let t = cur.t;
    Ok((cur, StopReport::RanToHorizon { t }))
}

#[cfg(test)]
mod tests;
