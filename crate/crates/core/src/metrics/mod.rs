//! Concentration and transport diagnostics: centers of vorticity, W2 to a
//! Dirac mass, exact W1, outer and smoothed outer masses, and the
//! rearrangement-based tail bound.
//!
//! Quantities meant to satisfy inequalities exactly (Chebyshev, the cutoff
//! sandwich) are built from the same normalized weights Γ_k/a_i, compare
//! squared distances, and sum nonnegative terms with a correctly rounded
//! sum, so the inequalities survive floating point.

mod grid;
mod measure;
mod simplex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::kernel::{blob_raw, KernelParams};
use crate::sum::{exact_sum, PlainSum, VecAcc};
use crate::vpm::ParticleCloud;

pub use grid::{rearrangement_profile, tail_velocity_bound_check, DensityGrid};
pub use measure::{w1_exact, w1_signed, AtomicMeasure, TransportPlan, COARSEN_ABOVE, MERGE_RADIUS};

/// Members of component `i` with normalized weights Γ_k / a_i ≥ 0.
fn weights(cloud: &ParticleCloud, i: usize) -> Result<(f64, Vec<(Vec2, f64)>)> {
    if i >= cloud.n_components() {
        return Err(Error::NoSuchComponent(i));
    }
    let a = cloud.intensity(i);
    if a == 0.0 {
        return Err(Error::ZeroIntensity(i));
    }
    Ok((a, cloud.component(i).map(|(p, g)| (p, g / a)).collect()))
}

fn measure_weights(m: &AtomicMeasure) -> Result<Vec<(Vec2, f64)>> {
    let a = m.total_mass();
    if a == 0.0 {
        return Err(Error::ZeroIntensity(0));
    }
    let w: Vec<(Vec2, f64)> = m.atoms().iter().map(|&(p, g)| (p, g / a)).collect();
    if w.iter().any(|x| x.1 < 0.0) {
        return Err(Error::MixedSign(0));
    }
    Ok(w)
}

fn centroid(w: &[(Vec2, f64)]) -> Vec2 {
    let x = exact_sum(w.iter().map(|(p, m)| m * p.x));
    let y = exact_sum(w.iter().map(|(p, m)| m * p.y));
    let s = exact_sum(w.iter().map(|(_, m)| *m));
    Vec2::new(x / s, y / s)
}

/// X_i = (1/a_i) Σ_{tag=i} Γ_k x_k.
pub fn center_of_vorticity(cloud: &ParticleCloud, i: usize) -> Result<Vec2> {
    Ok(centroid(&weights(cloud, i)?.1))
}

/// dX_i/dt from the pair sum over particles of component i against every
/// other component; the self-interaction cancels by antisymmetry and is
/// omitted.
pub fn center_velocity(cloud: &ParticleCloud, i: usize, params: &KernelParams) -> Result<Vec2> {
    let (a, _) = weights(cloud, i)?;
    let b2 = params.blob_radius * params.blob_radius;
    let own: Vec<(Vec2, f64)> = cloud.component(i).collect();
    let others: Vec<(Vec2, f64)> = cloud
        .positions
        .iter()
        .zip(cloud.circulations())
        .zip(cloud.tags())
        .filter(|(_, &t)| t != i)
        .map(|((&p, &g), _)| (p, g))
        .collect();
    let parts: Vec<Result<Vec2>> = own
        .par_iter()
        .map(|&(x, g)| {
            let mut acc = VecAcc::<PlainSum>::default();
            for &(y, h) in &others {
                let z = x - y;
                if b2 == 0.0 && z == Vec2::ZERO {
                    return Err(Error::Degenerate("coincident particles of distinct components".into()));
                }
                acc.add(h * blob_raw(z, b2));
            }
            Ok(g * acc.value())
        })
        .collect();
    let mut total = VecAcc::<PlainSum>::default();
    for p in parts {
        total.add(p?);
    }
    Ok((1.0 / a) * total.value())
}

fn w2_weights(w: &[(Vec2, f64)], y: Vec2) -> f64 {
    exact_sum(w.iter().map(|(p, m)| m * p.dist_sq(y))).sqrt()
}

/// W2(ω_i/a_i, δ_Y) = sqrt((1/a_i) Σ Γ_k |x_k − Y|²).
pub fn w2_to_dirac(cloud: &ParticleCloud, i: usize, y: Vec2) -> Result<f64> {
    Ok(w2_weights(&weights(cloud, i)?.1, y))
}

/// W2 between a single-signed measure normalized to unit mass and δ_Y.
pub fn w2_measure_to_dirac(m: &AtomicMeasure, y: Vec2) -> Result<f64> {
    Ok(w2_weights(&measure_weights(m)?, y))
}

/// Center of mass of a single-signed measure.
pub fn measure_center(m: &AtomicMeasure) -> Result<Vec2> {
    Ok(centroid(&measure_weights(m)?))
}

fn outer(w: &[(Vec2, f64)], c: Vec2, rho: f64) -> f64 {
    let r2 = rho * rho;
    exact_sum(w.iter().filter(|(p, _)| p.dist_sq(c) >= r2).map(|(_, m)| *m))
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::validation("rho", "must be positive"))
    }
}

/// m_i(ρ): normalized circulation of component i at distance ≥ ρ from X_i.
pub fn outer_mass(cloud: &ParticleCloud, i: usize, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let (_, w) = weights(cloud, i)?;
    Ok(outer(&w, centroid(&w), rho))
}

/// W2(ω_i/a_i, δ_{X_i})² / ρ², summed term by term as Σ w_k (|x_k − X_i|²/ρ²)
/// so that it dominates [`outer_mass`] exactly.
pub fn chebyshev_ceiling(cloud: &ParticleCloud, i: usize, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let (_, w) = weights(cloud, i)?;
    let c = centroid(&w);
    let r2 = rho * rho;
    Ok(exact_sum(w.iter().map(|(p, m)| m * (p.dist_sq(c) / r2))))
}

/// Radial cutoff: 1 inside radius ρ, 0 beyond ρ + δR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub rho: f64,
    pub band: f64,
    pub center: Vec2,
}

impl CutoffSpec {
    pub fn new(rho: f64, band: f64, center: Vec2) -> Result<Self> {
        check_rho(rho)?;
        if !(band > 0.0 && band.is_finite()) {
            return Err(Error::validation("band", "must be positive"));
        }
        Ok(CutoffSpec { rho, band, center })
    }
}

/// ψ = 1 − S(s), S(s) = 6s⁵ − 15s⁴ + 10s³, s = (|x − c| − ρ)/δR.
///
/// S' = 30s²(1−s)² ≤ 15/8 and |S''| = 60 s(1−s)|1−2s| ≤ 10/√3, so
/// |ψ'| ≤ 15/(8δR) and |ψ''| ≤ 10/(√3 δR²).
pub fn cutoff_eval(spec: &CutoffSpec, x: Vec2) -> f64 {
    let d2 = x.dist_sq(spec.center);
    let outer = spec.rho + spec.band;
    if d2 <= spec.rho * spec.rho {
        return 1.0;
    }
    if d2 >= outer * outer {
        return 0.0;
    }
    let s = ((d2.sqrt() - spec.rho) / spec.band).clamp(0.0, 1.0);
    let smooth = s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
    (1.0 - smooth).clamp(0.0, 1.0)
}

/// μ_i = (1/a_i) Σ (1 − ψ(x_k)) Γ_k with ψ centered at `spec.center`.
pub fn smoothed_outer_mass(cloud: &ParticleCloud, i: usize, spec: &CutoffSpec) -> Result<f64> {
    let (_, w) = weights(cloud, i)?;
    Ok(exact_sum(w.iter().map(|(p, m)| m * (1.0 - cutoff_eval(spec, *p)))))
}

/// Cutoff centered at the current center of vorticity of component `i`.
pub fn centered_cutoff(cloud: &ParticleCloud, i: usize, rho: f64, band: f64) -> Result<CutoffSpec> {
    CutoffSpec::new(rho, band, center_of_vorticity(cloud, i)?)
}

/// Density field of component `i` deposited on cells of the cloud's pitch.
pub fn component_density(cloud: &ParticleCloud, i: usize) -> Result<DensityGrid> {
    let h = cloud.pitch.ok_or(Error::PitchUnknown)?;
    if i >= cloud.n_components() {
        return Err(Error::NoSuchComponent(i));
    }
    DensityGrid::deposit(cloud.component(i), h)
}

#[cfg(test)]
mod tests;
