//! Biot–Savart kernel, its algebraic blob regularization, and induced
//! velocities of particle sets by direct summation or Barnes–Hut treecode.

mod tree;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::sum::{Accumulator, ExactSum, PlainSum, VecAcc};

pub use tree::{tree_velocity, QuadTree};

pub const INV_2PI: f64 = 0.5 / PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    /// Blob radius; zero selects the singular kernel.
    pub blob_radius: f64,
    /// Treecode opening parameter. Zero opens every node.
    pub theta: f64,
    /// Sum contributions with a correctly rounded, order-independent
    /// accumulator.
    pub deterministic: bool,
}

impl Default for KernelParams {
    fn default() -> Self {
        KernelParams {
            blob_radius: 0.0,
            theta: 0.5,
            deterministic: false,
        }
    }
}

impl KernelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.blob_radius >= 0.0) || !self.blob_radius.is_finite() {
            return Err(Error::validation("blob_radius", "must be finite and >= 0"));
        }
        if !(0.0..1.0).contains(&self.theta) {
            return Err(Error::validation("theta", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Which points the velocity is evaluated at.
#[derive(Debug, Clone, Copy)]
pub enum Targets<'a> {
    Points(&'a [Vec2]),
    /// Evaluate at the sources themselves, omitting each self-pair.
    Sources,
}

#[inline(always)]
pub(crate) fn blob_raw(z: Vec2, blob_sq: f64) -> Vec2 {
    let r2 = z.x * z.x + z.y * z.y + blob_sq;
    let f = INV_2PI / r2;
    Vec2::new(-z.y * f, z.x * f)
}

/// K(z) = z⊥ / (2π|z|²).
pub fn biot_savart(z: Vec2) -> Result<Vec2> {
    if z == Vec2::ZERO {
        return Err(Error::Domain("Biot-Savart kernel evaluated at the origin".into()));
    }
    Ok(blob_raw(z, 0.0))
}

/// G(z) = -log|z| / 2π, whose rotated gradient is [`biot_savart`].
pub fn newtonian_potential(z: Vec2) -> Result<f64> {
    if z == Vec2::ZERO {
        return Err(Error::Domain("Newtonian potential evaluated at the origin".into()));
    }
    Ok(-INV_2PI * z.norm().ln())
}

/// z⊥ / (2π(|z|² + δ²)). Defined (and zero) at the origin when δ > 0.
pub fn blob_kernel(z: Vec2, blob_radius: f64) -> Result<Vec2> {
    if blob_radius < 0.0 {
        return Err(Error::Domain("negative blob radius".into()));
    }
    if blob_radius == 0.0 {
        return biot_savart(z);
    }
    Ok(blob_raw(z, blob_radius * blob_radius))
}

fn direct_one<A: Accumulator>(
    x: Vec2,
    skip: Option<usize>,
    target: usize,
    sources: &[Vec2],
    gammas: &[f64],
    blob_sq: f64,
) -> Result<Vec2> {
    let mut acc = VecAcc::<A>::default();
    for (k, (&p, &g)) in sources.iter().zip(gammas).enumerate() {
        if skip == Some(k) {
            continue;
        }
        let z = x - p;
        if blob_sq == 0.0 && z == Vec2::ZERO {
            return Err(Error::Coincident {
                target,
                source_index: k,
            });
        }
        acc.add(g * blob_raw(z, blob_sq));
    }
    Ok(acc.value())
}

/// Velocity induced at the targets by point circulations `gammas` at
/// `sources`, summing every pair.
pub fn direct_velocity(
    sources: &[Vec2],
    gammas: &[f64],
    targets: Targets<'_>,
    params: &KernelParams,
) -> Result<Vec<Vec2>> {
    assert_eq!(sources.len(), gammas.len());
    let blob_sq = params.blob_radius * params.blob_radius;
    let eval = |t: usize, x: Vec2, skip: Option<usize>| {
        if params.deterministic {
            direct_one::<ExactSum>(x, skip, t, sources, gammas, blob_sq)
        } else {
            direct_one::<PlainSum>(x, skip, t, sources, gammas, blob_sq)
        }
    };
    match targets {
        Targets::Points(pts) => pts
            .par_iter()
            .enumerate()
            .map(|(t, &x)| eval(t, x, None))
            .collect(),
        Targets::Sources => sources
            .par_iter()
            .enumerate()
            .map(|(t, &x)| eval(t, x, Some(t)))
            .collect(),
    }
}

/// Splits the velocity at `x` into the part induced by component
/// `component` (`u_i`) and the far field of all other components (`F_i`).
/// `skip` omits one source, for evaluation at a particle position.
pub fn split_velocity(
    sources: &[Vec2],
    gammas: &[f64],
    tags: &[usize],
    component: usize,
    x: Vec2,
    skip: Option<usize>,
    params: &KernelParams,
) -> Result<(Vec2, Vec2)> {
    if !tags.contains(&component) {
        return Err(Error::NoSuchComponent(component));
    }
    let blob_sq = params.blob_radius * params.blob_radius;
    let mut own = VecAcc::<ExactSum>::default();
    let mut far = VecAcc::<ExactSum>::default();
    for k in 0..sources.len() {
        if skip == Some(k) {
            continue;
        }
        let z = x - sources[k];
        if blob_sq == 0.0 && z == Vec2::ZERO {
            return Err(Error::Coincident {
                target: 0,
                source_index: k,
            });
        }
        let v = gammas[k] * blob_raw(z, blob_sq);
        if tags[k] == component {
            own.add(v);
        } else {
            far.add(v);
        }
    }
    Ok((own.value(), far.value()))
}
