//! Helmholtz–Kirchhoff point-vortex system and its first integrals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::kernel::{blob_raw, INV_2PI};
use crate::rk4::{rk4_step, step_count};
use crate::sum::{exact_sum, Accumulator, ExactSum, VecAcc};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointVortexState {
    pub positions: Vec<Vec2>,
    pub intensities: Vec<f64>,
    pub t: f64,
}

impl PointVortexState {
    pub fn new(positions: Vec<Vec2>, intensities: Vec<f64>) -> Result<Self> {
        let s = PointVortexState {
            positions,
            intensities,
            t: 0.0,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.positions.is_empty() {
            return Err(Error::validation("positions", "at least one vortex is required"));
        }
        if self.positions.len() != self.intensities.len() {
            return Err(Error::validation("intensities", "one intensity per vortex"));
        }
        if let Some(k) = self.intensities.iter().position(|a| *a == 0.0 || !a.is_finite()) {
            return Err(Error::validation("intensities", format!("intensity {k} must be finite and nonzero")));
        }
        if let Some((i, j, d)) = closest_pair(&self.positions) {
            if d == 0.0 {
                return Err(Error::Collision { i, j, t: self.t, distance: 0.0 });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

fn closest_pair(p: &[Vec2]) -> Option<(usize, usize, f64)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            let d = p[i].dist(p[j]);
            if best.map_or(true, |b| d < b.2) {
                best = Some((i, j, d));
            }
        }
    }
    best
}

fn rhs_at(positions: &[Vec2], intensities: &[f64], t: f64) -> Result<Vec<Vec2>> {
    (0..positions.len())
        .map(|i| {
            let mut acc = VecAcc::<ExactSum>::default();
            for j in 0..positions.len() {
                if j == i {
                    continue;
                }
                let z = positions[i] - positions[j];
                if z == Vec2::ZERO {
                    return Err(Error::Collision { i, j, t, distance: 0.0 });
                }
                acc.add(intensities[j] * blob_raw(z, 0.0));
            }
            Ok(acc.value())
        })
        .collect()
}

/// dY_i/dt = Σ_{j≠i} a_j K(Y_i − Y_j).
pub fn pv_rhs(state: &PointVortexState) -> Result<Vec<Vec2>> {
    rhs_at(&state.positions, &state.intensities, state.t)
}

/// One RK4 step. Fails if any stage brings two vortices closer than `floor`.
pub fn pv_step(state: &PointVortexState, dt: f64, floor: f64) -> Result<PointVortexState> {
    if !(dt > 0.0) {
        return Err(Error::validation("dt", "must be positive"));
    }
    let t = state.t;
    let positions = rk4_step(&state.positions, dt, |y| {
        if let Some((i, j, d)) = closest_pair(y) {
            if d < floor {
                return Err(Error::Collision { i, j, t, distance: d });
            }
        }
        rhs_at(y, &state.intensities, t)
    })?;
    if let Some((i, j, d)) = closest_pair(&positions) {
        if d < floor {
            return Err(Error::Collision { i, j, t: t + dt, distance: d });
        }
    }
    Ok(PointVortexState {
        positions,
        intensities: state.intensities.clone(),
        t: t + dt,
    })
}

/// H = −(1/2π) Σ_{i<j} a_i a_j log|Y_i − Y_j|.
pub fn pv_hamiltonian(state: &PointVortexState) -> Result<f64> {
    let p = &state.positions;
    let a = &state.intensities;
    let mut terms = Vec::with_capacity(p.len() * p.len() / 2);
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            let d = p[i].dist(p[j]);
            if d == 0.0 {
                return Err(Error::Collision { i, j, t: state.t, distance: 0.0 });
            }
            terms.push(-INV_2PI * a[i] * a[j] * d.ln());
        }
    }
    Ok(exact_sum(terms))
}

/// Linear impulse Σ a_i Y_i and angular impulse Σ a_i |Y_i|².
pub fn pv_impulses(state: &PointVortexState) -> (Vec2, f64) {
    let mut lin = VecAcc::<ExactSum>::default();
    let mut ang = ExactSum::default();
    for (p, a) in state.positions.iter().zip(&state.intensities) {
        lin.add(*a * *p);
        ang.add(a * p.norm_sq());
    }
    (lin.value(), ang.value())
}

/// Minimum pairwise distance; `+∞` for a single vortex.
pub fn pv_min_separation(state: &PointVortexState) -> f64 {
    closest_pair(&state.positions).map_or(f64::INFINITY, |b| b.2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionReport {
    pub i: usize,
    pub j: usize,
    pub t: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PvTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<PointVortexState>,
    pub hamiltonian: Vec<f64>,
    pub linear_impulse: Vec<Vec2>,
    pub angular_impulse: Vec<f64>,
    pub min_separation: Vec<f64>,
    pub collision: Option<CollisionReport>,
}

impl PvTrajectory {
    fn record(&mut self, s: &PointVortexState) -> Result<()> {
        let (lin, ang) = pv_impulses(s);
        self.times.push(s.t);
        self.hamiltonian.push(pv_hamiltonian(s)?);
        self.linear_impulse.push(lin);
        self.angular_impulse.push(ang);
        self.min_separation.push(pv_min_separation(s));
        self.states.push(s.clone());
        Ok(())
    }

    pub fn last(&self) -> Option<&PointVortexState> {
        self.states.last()
    }
}

/// Fixed-step RK4 from `state.t` to `t_end`, keeping every
/// `sample_every`-th state (plus the first and the last). Stops early with a
/// collision report when two vortices come closer than `floor`.
pub fn pv_integrate(
    state: &PointVortexState,
    dt: f64,
    t_end: f64,
    sample_every: usize,
    floor: f64,
) -> Result<PvTrajectory> {
    if !(dt > 0.0) {
        return Err(Error::validation("dt", "must be positive"));
    }
    if !(t_end > state.t) {
        return Err(Error::validation("horizon", "must exceed the initial time"));
    }
    state.validate()?;
    let sample_every = sample_every.max(1);
    let t0 = state.t;
    let steps = step_count(t_end - t0, dt);
    let mut traj = PvTrajectory::default();
    let mut cur = state.clone();
    traj.record(&cur)?;
    for n in 1..=steps {
        match pv_step(&cur, dt, floor) {
            Ok(mut next) => {
                next.t = t0 + n as f64 * dt;
                cur = next;
            }
            Err(Error::Collision { i, j, t, distance }) => {
                if traj.times.last() != Some(&cur.t) {
                    traj.record(&cur)?;
                }
                traj.collision = Some(CollisionReport { i, j, t, distance });
                return Ok(traj);
            }
            Err(e) => return Err(e),
        }
        if n % sample_every == 0 || n == steps {
            traj.record(&cur)?;
        }
    }
    Ok(traj)
}
