use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::sum::exact_sum;

/// Piecewise-constant density on square cells `[k h, (k+1) h) × [l h, (l+1) h)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub pitch: f64,
    /// Occupied cells `(k, l, density)` in lexicographic order.
    pub cells: Vec<(i64, i64, f64)>,
}

impl DensityGrid {
    /// Deposits each mass into the cell containing it, as density |m|/h².
    pub fn deposit(points: impl IntoIterator<Item = (Vec2, f64)>, pitch: f64) -> Result<Self> {
        if !(pitch > 0.0) {
            return Err(Error::validation("pitch", "must be positive"));
        }
        let mut acc: BTreeMap<(i64, i64), Vec<f64>> = BTreeMap::new();
        for (p, m) in points {
            let key = ((p.x / pitch).floor() as i64, (p.y / pitch).floor() as i64);
            acc.entry(key).or_default().push(m.abs());
        }
        let h2 = pitch * pitch;
        let cells = acc
            .into_iter()
            .map(|((k, l), ms)| (k, l, exact_sum(ms) / h2))
            .filter(|c| c.2 > 0.0)
            .collect();
        Ok(DensityGrid { pitch, cells })
    }

    pub fn center(&self, k: i64, l: i64) -> Vec2 {
        Vec2::new((k as f64 + 0.5) * self.pitch, (l as f64 + 0.5) * self.pitch)
    }

    /// The field restricted to cells whose centers lie at distance ≥ `radius`
    /// from `center`.
    pub fn outside(&self, center: Vec2, radius: f64) -> DensityGrid {
        DensityGrid {
            pitch: self.pitch,
            cells: self
                .cells
                .iter()
                .copied()
                .filter(|&(k, l, _)| self.center(k, l).dist(center) >= radius)
                .collect(),
        }
    }

    pub fn mass(&self) -> f64 {
        let h2 = self.pitch * self.pitch;
        exact_sum(self.cells.iter().map(|c| c.2 * h2))
    }

    /// (Σ ζ^p h²)^{1/p}.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let h2 = self.pitch * self.pitch;
        exact_sum(self.cells.iter().map(|c| c.2.powf(p) * h2)).powf(1.0 / p)
    }
}

/// Radius ℓ(s) = sqrt(|{ζ > s}|/π) of the disk carrying the superlevel set
/// of the symmetric-decreasing rearrangement.
pub fn rearrangement_profile(grid: &DensityGrid, s: f64) -> f64 {
    let count = grid.cells.iter().filter(|c| c.2 > s).count();
    (count as f64 * grid.pitch * grid.pitch / PI).sqrt()
}

/// Returns `(I₂, rhs)` where I₂ = Σ ζ h²/|x − y| over cells with
/// |x − y| ≥ h/2, and rhs = ‖ζ‖_p^{p/(2(p−1))} · (∫ζ)^{(p−2)/(2(p−1))}.
pub fn tail_velocity_bound_check(grid: &DensityGrid, x: Vec2, p: f64) -> Result<(f64, f64)> {
    if !(p > 2.0) {
        return Err(Error::validation("p", "must exceed 2"));
    }
    let h = grid.pitch;
    let h2 = h * h;
    let i2 = exact_sum(grid.cells.iter().filter_map(|&(k, l, z)| {
        let d = grid.center(k, l).dist(x);
        (d >= 0.5 * h).then(|| z * h2 / d)
    }));
    let mass = grid.mass();
    if mass == 0.0 {
        return Ok((i2, 0.0));
    }
    let e = 2.0 * (p - 1.0);
    Ok((i2, grid.lp_norm(p).powf(p / e) * mass.powf((p - 2.0) / e)))
}
