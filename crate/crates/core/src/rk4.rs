use crate::error::Result;
use crate::geom::Vec2;

/// One classical fourth-order Runge-Kutta step for an autonomous system of
/// planar positions. Point vortices and particle clouds both go through this
/// routine so that the two solvers agree bit for bit on atomic data.
pub fn rk4_step<F>(positions: &[Vec2], dt: f64, mut rhs: F) -> Result<Vec<Vec2>>
where
    F: FnMut(&[Vec2]) -> Result<Vec<Vec2>>,
{
    let half = 0.5 * dt;
    let stage = |k: &[Vec2], h: f64| -> Vec<Vec2> {
        positions
            .iter()
            .zip(k)
            .map(|(&p, &v)| p + h * v)
            .collect()
    };
    let k1 = rhs(positions)?;
    let k2 = rhs(&stage(&k1, half))?;
    let k3 = rhs(&stage(&k2, half))?;
    let k4 = rhs(&stage(&k3, dt))?;
    let sixth = dt / 6.0;
    Ok(positions
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let incr = k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i];
            p + sixth * incr
        })
        .collect())
}

/// Number of fixed steps of size close to `dt` that exactly cover `span`.
pub(crate) fn step_count(span: f64, dt: f64) -> usize {
    ((span / dt) - 1e-9).ceil().max(0.0) as usize
}
