//! Paired particle / point-vortex runs, ε-sweeps and the fits extracted
//! from them.

mod fit;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::kernel::KernelParams;
use crate::metrics::{
    center_of_vorticity, center_velocity, centered_cutoff, component_density, outer_mass, smoothed_outer_mass,
    tail_velocity_bound_check, w1_signed, w2_to_dirac, AtomicMeasure,
};
use crate::point_vortex::{pv_min_separation, pv_rhs, pv_step, CollisionReport, PointVortexState};
use crate::rk4::step_count;
use crate::vpm::{
    component_support_distance, sample_initial_cloud, support_gap_below, vpm_step, InitialDataSpec, ParticleCloud,
    StopReport, VpmConfig,
};

pub use fit::{fit_rate, Fit};

/// Discretization and run-control parameters shared by every run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Numerics {
    pub dt: f64,
    pub horizon: f64,
    /// Time between diagnostics records.
    pub cadence: f64,
    /// Sampling pitch is h = ε / particles_per_core.
    pub particles_per_core: f64,
    /// Blob radius is δ_b = blob_factor · h.
    pub blob_factor: f64,
    pub theta: f64,
    pub deterministic: bool,
    pub direct_crossover: usize,
    /// Caps dt at cfl / max|ω| so the fastest core rotation stays resolved;
    /// zero disables the cap.
    pub cfl: f64,
    /// Initial point-vortex offsets Ȳ_i − X̄_i in units of ε (zero if empty).
    pub pv_offsets: Vec<Vec2>,
    /// Point-vortex collision floor; δ/4 when unset.
    pub collision_floor: Option<f64>,
    /// Shift each component's sampling grid by a seeded random sub-cell offset.
    pub jitter: bool,
    pub seed: u64,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            dt: 1e-3,
            horizon: 5.0,
            cadence: 0.05,
            particles_per_core: 24.0,
            blob_factor: 2.0,
            theta: 0.5,
            deterministic: false,
            direct_crossover: 2000,
            cfl: 0.4,
            pv_offsets: Vec::new(),
            collision_floor: None,
            jitter: false,
            seed: 0,
        }
    }
}

impl Numerics {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64, f: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::validation(f, "must be a positive finite number"))
            }
        };
        pos(self.dt, "dt")?;
        pos(self.horizon, "horizon")?;
        pos(self.cadence, "cadence")?;
        pos(self.particles_per_core, "particles_per_core")?;
        if !(self.blob_factor >= 0.0) || !self.blob_factor.is_finite() {
            return Err(Error::validation("blob_factor", "must be nonnegative"));
        }
        if !(self.cfl >= 0.0) || !self.cfl.is_finite() {
            return Err(Error::validation("cfl", "must be nonnegative"));
        }
        if let Some(f) = self.collision_floor {
            if !(f >= 0.0) {
                return Err(Error::validation("collision_floor", "must be nonnegative"));
            }
        }
        self.kernel(0.0).validate()
    }

    pub fn kernel(&self, blob_radius: f64) -> KernelParams {
        KernelParams {
            blob_radius,
            theta: self.theta,
            deterministic: self.deterministic,
        }
    }
}

/// Per-component columns of a diagnostics record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentDiagnostics {
    /// Center of vorticity X_i.
    pub x: Vec2,
    /// Point vortex Y_i.
    pub y: Vec2,
    /// W2(ω_i/a_i, δ_{Y_i}).
    pub w2_pv: f64,
    /// W2(ω_i/a_i, δ_{X_i}).
    pub w2_center: f64,
    /// |X_i − Y_i|.
    pub center_gap: f64,
    /// |dX_i/dt − dY_i/dt|.
    pub vel_gap: f64,
    /// m_i(t, R).
    pub m_r: f64,
    /// m_i(t, 2R).
    pub m_2r: f64,
    /// μ_i with ρ = 2R − R/8 and band R/8.
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub components: Vec<ComponentDiagnostics>,
    /// W1(ω, Σ a_i δ_{Y_i}).
    pub w1_total: f64,
    pub min_sep_cloud: f64,
    pub min_sep_pv: f64,
}

impl DiagnosticsRecord {
    /// W2_i ≤ W2_center_i + |X_i − Y_i| for every component.
    pub fn triangle_holds(&self) -> bool {
        self.components.iter().all(|c| c.w2_pv <= c.w2_center + c.center_gap)
    }

    /// W1_total ≤ Σ |a_i| W2_i.
    pub fn w1_bound_holds(&self, intensities: &[f64]) -> bool {
        let rhs: f64 = self.components.iter().zip(intensities).map(|(c, a)| a.abs() * c.w2_pv).sum();
        self.w1_total <= rhs
    }

    /// m_i(ρ) ≤ W2_center_i²/ρ² at ρ = R and 2R.
    pub fn chebyshev_holds(&self, support_radius: f64) -> bool {
        self.components.iter().all(|c| {
            let v = c.w2_center * c.w2_center;
            c.m_r <= v / (support_radius * support_radius) && c.m_2r <= v / (4.0 * support_radius * support_radius)
        })
    }
}

/// Everything a paired run produced, including partial output on failure.
#[derive(Debug, Clone)]
pub struct PairingOutcome {
    pub records: Vec<DiagnosticsRecord>,
    /// Per record: max over components of I₂ / bound for the tail field at
    /// distance ≥ ε/2 from X_i, evaluated at X_i + ε·(direction to the
    /// nearest other center). Empty when the pitch is unknown.
    pub tail_ratios: Vec<f64>,
    pub cloud: ParticleCloud,
    pub pv: PointVortexState,
    pub intensities: Vec<f64>,
    pub dt: f64,
    /// Separation of the particle supports below δ/2, or horizon.
    pub stop: StopReport,
    /// First time the point vortices came closer than δ/2.
    pub pv_separation_failure: Option<f64>,
    pub pv_collision: Option<CollisionReport>,
    /// End of the run: min of horizon and the two stopping events.
    pub t_run: f64,
    pub failure: Option<String>,
}

/// Samples the initial cloud for `spec` and runs it against the point
/// vortices started at X̄_i + ε·offset_i.
pub fn run_pairing(spec: &InitialDataSpec, num: &Numerics) -> Result<PairingOutcome> {
    spec.validate()?;
    num.validate()?;
    let h = spec.epsilon / num.particles_per_core;
    let mut cloud = sample_initial_cloud(spec, h, num.jitter.then_some(num.seed))?;
    cloud.blob_radius = num.blob_factor * h;
    let ys = spec
        .centers
        .iter()
        .enumerate()
        .map(|(i, &c)| c + spec.epsilon * num.pv_offsets.get(i).copied().unwrap_or(Vec2::ZERO))
        .collect();
    let pv = PointVortexState::new(ys, spec.intensities.clone())?;
    run_pairing_on(cloud, pv, spec, num)
}

/// Time step actually used: dt capped by the core-rotation rule and
/// shrunk so that it divides the horizon.
pub fn effective_dt(cloud: &ParticleCloud, num: &Numerics) -> f64 {
    let mut dt = num.dt;
    if num.cfl > 0.0 {
        if let Some(h) = cloud.pitch {
            let wmax = cloud.circulations().iter().fold(0.0f64, |m, g| m.max(g.abs())) / (h * h);
            if wmax > 0.0 {
                dt = dt.min(num.cfl / wmax);
            }
        }
    }
    num.horizon / step_count(num.horizon, dt) as f64
}

/// Runs a prepared cloud and point-vortex state side by side; component i
/// of the cloud is paired with vortex i.
pub fn run_pairing_on(
    cloud: ParticleCloud,
    pv: PointVortexState,
    spec: &InitialDataSpec,
    num: &Numerics,
) -> Result<PairingOutcome> {
    num.validate()?;
    let n = cloud.n_components();
    if n != pv.len() {
        return Err(Error::validation("centers", "one point vortex per cloud component is required"));
    }
    let intensities: Vec<f64> = (0..n).map(|i| cloud.intensity(i)).collect();
    if let Some(i) = intensities.iter().position(|a| *a == 0.0) {
        return Err(Error::ZeroIntensity(i));
    }
    let cfg = VpmConfig {
        kernel: num.kernel(cloud.blob_radius),
        direct_crossover: num.direct_crossover,
    };
    let dt = effective_dt(&cloud, num);
    let steps = step_count(num.horizon, dt);
    let cadence = ((num.cadence / dt).round() as usize).max(1);
    let half_delta = 0.5 * spec.separation;
    let floor = num.collision_floor.unwrap_or(0.25 * spec.separation);

    let mut out = PairingOutcome {
        records: Vec::new(),
        tail_ratios: Vec::new(),
        cloud,
        pv,
        intensities,
        dt,
        stop: StopReport::RanToHorizon { t: 0.0 },
        pv_separation_failure: None,
        pv_collision: None,
        t_run: 0.0,
        failure: None,
    };
    let t0 = out.cloud.t;
    out.pv.t = t0;
    if let Err(e) = observe(&mut out, spec, &cfg) {
        out.failure = Some(e.to_string());
        return Ok(out);
    }
    for k in 1..=steps {
        let t = t0 + k as f64 * dt;
        let next = match vpm_step(&out.cloud, dt, &cfg) {
            Ok(c) => c,
            Err(e) => {
                out.failure = Some(e.to_string());
                break;
            }
        };
        match pv_step(&out.pv, dt, floor) {
            Ok(p) => out.pv = p,
            Err(Error::Collision { i, j, t, distance }) => {
                out.pv_collision = Some(CollisionReport { i, j, t, distance });
                out.failure = Some(format!("point vortices {i} and {j} collided at t = {t}"));
                break;
            }
            Err(e) => {
                out.failure = Some(e.to_string());
                break;
            }
        }
        out.cloud = next;
        out.cloud.t = t;
        out.pv.t = t;
        out.t_run = t;

        let mut stop = false;
        if let Some((d, i, j)) = support_gap_below(&out.cloud, half_delta) {
            if d < half_delta {
                out.stop = StopReport::Separated { t, i, j, distance: d };
                stop = true;
            }
        }
        if pv_min_separation(&out.pv) < half_delta {
            out.pv_separation_failure = Some(t);
            stop = true;
        }
        if stop || k % cadence == 0 || k == steps {
            if let Err(e) = observe(&mut out, spec, &cfg) {
                out.failure = Some(e.to_string());
                break;
            }
        }
        if stop {
            break;
        }
    }
    if let StopReport::RanToHorizon { .. } = out.stop {
        out.stop = StopReport::RanToHorizon { t: out.t_run };
    }
    Ok(out)
}

fn observe(out: &mut PairingOutcome, spec: &InitialDataSpec, cfg: &VpmConfig) -> Result<()> {
    let cloud = &out.cloud;
    let big_r = spec.support_radius;
    let band = big_r / 8.0;
    let ydot = pv_rhs(&out.pv)?;
    let n = cloud.n_components();
    let mut comps = Vec::with_capacity(n);
    for i in 0..n {
        let x = center_of_vorticity(cloud, i)?;
        let y = out.pv.positions[i];
        let xdot = center_velocity(cloud, i, &cfg.kernel)?;
        let cutoff = centered_cutoff(cloud, i, 2.0 * big_r - band, band)?;
        comps.push(ComponentDiagnostics {
            x,
            y,
            w2_pv: w2_to_dirac(cloud, i, y)?,
            w2_center: w2_to_dirac(cloud, i, x)?,
            center_gap: x.dist(y),
            vel_gap: xdot.dist(ydot[i]),
            m_r: outer_mass(cloud, i, big_r)?,
            m_2r: outer_mass(cloud, i, 2.0 * big_r)?,
            mu: smoothed_outer_mass(cloud, i, &cutoff)?,
        });
    }
    let omega = AtomicMeasure::from_cloud(cloud);
    let diracs = AtomicMeasure::from_point_vortices(&out.pv.positions, &out.intensities)?;
    let record = DiagnosticsRecord {
        t: cloud.t,
        w1_total: w1_signed(&omega, &diracs)?,
        min_sep_cloud: component_support_distance(cloud),
        min_sep_pv: pv_min_separation(&out.pv),
        components: comps,
    };
    if cloud.pitch.is_some() {
        out.tail_ratios.push(tail_ratio(cloud, &record, spec)?);
    }
    out.records.push(record);
    Ok(())
}

fn tail_ratio(cloud: &ParticleCloud, record: &DiagnosticsRecord, spec: &InitialDataSpec) -> Result<f64> {
    let l = spec.epsilon;
    let centers: Vec<Vec2> = record.components.iter().map(|c| c.x).collect();
    let mut worst: f64 = 0.0;
    for (i, &c) in centers.iter().enumerate() {
        let dir = centers
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, &o)| o - c)
            .min_by(|a, b| a.norm().total_cmp(&b.norm()))
            .filter(|d| d.norm() > 0.0)
            .map_or(Vec2::new(1.0, 0.0), |d| (1.0 / d.norm()) * d);
        let field = component_density(cloud, i)?.outside(c, 0.5 * l);
        let (i2, rhs) = tail_velocity_bound_check(&field, c + l * dir, spec.p)?;
        if rhs > 0.0 {
            worst = worst.max(i2 / rhs);
        }
    }
    Ok(worst)
}

/// Log-linear fit of W2(ω_i/a_i, δ_{X_i}) against t; the slope is the
/// growth exponent C in W2 ≈ prefactor · e^{Ct}.
pub fn fit_gronwall(records: &[DiagnosticsRecord], i: usize) -> Result<Fit> {
    if records.is_empty() {
        return Err(Error::Degenerate("no records".into()));
    }
    let mut ts = Vec::with_capacity(records.len());
    let mut ls = Vec::with_capacity(records.len());
    for r in records {
        let c = r.components.get(i).ok_or(Error::NoSuchComponent(i))?;
        if !(c.w2_center > 0.0) {
            return Err(Error::Degenerate(format!("W2 to the center vanishes at t = {}", r.t)));
        }
        ts.push(r.t);
        ls.push(c.w2_center.ln());
    }
    fit::least_squares(&ts, &ls)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdMonitor {
    /// α = p γ / (p − 2).
    pub alpha: f64,
    /// ε^α.
    pub level: f64,
    pub times: Vec<f64>,
    /// m_i(t, 2R) per record and component.
    pub outer: Vec<Vec<f64>>,
    /// W2_center_i² / (2R)² per record and component.
    pub ceiling: Vec<Vec<f64>>,
    /// First sampled time at which some m_i(t, 2R) ≥ ε^α.
    pub crossing: Option<f64>,
}

pub fn threshold_monitor(records: &[DiagnosticsRecord], spec: &InitialDataSpec) -> ThresholdMonitor {
    let alpha = spec.p * spec.gamma / (spec.p - 2.0);
    let level = spec.epsilon.powf(alpha);
    let r2 = 4.0 * spec.support_radius * spec.support_radius;
    let outer: Vec<Vec<f64>> = records.iter().map(|r| r.components.iter().map(|c| c.m_2r).collect()).collect();
    let crossing = records
        .iter()
        .zip(&outer)
        .find(|(_, m)| m.iter().any(|v| *v >= level))
        .map(|(r, _)| r.t);
    ThresholdMonitor {
        alpha,
        level,
        times: records.iter().map(|r| r.t).collect(),
        ceiling: records
            .iter()
            .map(|r| r.components.iter().map(|c| c.w2_center * c.w2_center / r2).collect())
            .collect(),
        outer,
        crossing,
    }
}

/// Sup-over-time summary of one sweep member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMember {
    pub epsilon: f64,
    pub pitch: f64,
    pub dt: f64,
    pub particles: usize,
    pub sup_w2: Vec<f64>,
    pub sup_w2_center: Vec<f64>,
    pub sup_center_gap: Vec<f64>,
    pub sup_vel_gap: Vec<f64>,
    /// Largest tail ratio I₂/bound over the run.
    pub tail_ratio: f64,
    pub gronwall: Vec<Option<Fit>>,
    pub separation_time: Option<f64>,
    pub pv_separation_failure: Option<f64>,
    pub t_run: f64,
    pub failure: Option<String>,
    pub records: Vec<DiagnosticsRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub epsilons: Vec<f64>,
    pub members: Vec<SweepMember>,
    /// Per component fits of log sup_t value against log ε; `None` when
    /// fewer than two members succeeded.
    pub w2_fit: Vec<Option<Fit>>,
    pub w2_center_fit: Vec<Option<Fit>>,
    pub center_gap_fit: Vec<Option<Fit>>,
    pub vel_gap_fit: Vec<Option<Fit>>,
}

fn summarize(epsilon: f64, spec: &InitialDataSpec, num: &Numerics) -> SweepMember {
    let pitch = epsilon / num.particles_per_core;
    let n = spec.len();
    let mut member = SweepMember {
        epsilon,
        pitch,
        dt: 0.0,
        particles: 0,
        sup_w2: vec![0.0; n],
        sup_w2_center: vec![0.0; n],
        sup_center_gap: vec![0.0; n],
        sup_vel_gap: vec![0.0; n],
        tail_ratio: 0.0,
        gronwall: vec![None; n],
        separation_time: None,
        pv_separation_failure: None,
        t_run: 0.0,
        failure: None,
        records: Vec::new(),
    };
    let out = match run_pairing(spec, num) {
        Ok(o) => o,
        Err(e) => {
            member.failure = Some(e.to_string());
            return member;
        }
    };
    member.dt = out.dt;
    member.particles = out.cloud.len();
    for r in &out.records {
        for (i, c) in r.components.iter().enumerate() {
            member.sup_w2[i] = member.sup_w2[i].max(c.w2_pv);
            member.sup_w2_center[i] = member.sup_w2_center[i].max(c.w2_center);
            member.sup_center_gap[i] = member.sup_center_gap[i].max(c.center_gap);
            member.sup_vel_gap[i] = member.sup_vel_gap[i].max(c.vel_gap);
        }
    }
    member.tail_ratio = out.tail_ratios.iter().copied().fold(0.0, f64::max);
    member.gronwall = (0..n).map(|i| fit_gronwall(&out.records, i).ok()).collect();
    member.separation_time = out.stop.separation_time();
    member.pv_separation_failure = out.pv_separation_failure;
    member.t_run = out.t_run;
    member.failure = out.failure;
    member.records = out.records;
    member
}

/// Runs one pairing per ε (pitch ∝ ε) and fits the sup-over-time distances
/// against ε on log-log axes.
pub fn run_sweep(base: &InitialDataSpec, epsilons: &[f64], num: &Numerics) -> Result<SweepResult> {
    num.validate()?;
    if epsilons.is_empty() {
        return Err(Error::validation("epsilons", "at least one value is required"));
    }
    if epsilons.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::validation("epsilons", "must be strictly decreasing"));
    }
    if epsilons.iter().any(|e| !(*e > 0.0) || *e > base.support_radius) {
        return Err(Error::validation("epsilons", "each value must lie in (0, support_radius]"));
    }
    let members: Vec<SweepMember> = epsilons
        .par_iter()
        .map(|&e| {
            let spec = InitialDataSpec { epsilon: e, ..base.clone() };
            summarize(e, &spec, num)
        })
        .collect();
    let n = base.len();
    let fits = |pick: fn(&SweepMember) -> &Vec<f64>| -> Vec<Option<Fit>> {
        (0..n)
            .map(|i| {
                let pts: Vec<(f64, f64)> =
                    members.iter().filter(|m| m.failure.is_none()).map(|m| (m.epsilon, pick(m)[i])).collect();
                fit_rate(&pts).ok()
            })
            .collect()
    };
    Ok(SweepResult {
        epsilons: epsilons.to_vec(),
        w2_fit: fits(|m| &m.sup_w2),
        w2_center_fit: fits(|m| &m.sup_w2_center),
        center_gap_fit: fits(|m| &m.sup_center_gap),
        vel_gap_fit: fits(|m| &m.sup_vel_gap),
        members,
    })
}

#[cfg(test)]
mod tests;
