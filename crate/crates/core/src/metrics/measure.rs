use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::simplex;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::sum::exact_sum;
use crate::vpm::ParticleCloud;

/// Weighted point masses, possibly signed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicMeasure {
    atoms: Vec<(Vec2, f64)>,
    total_mass: f64,
}

impl AtomicMeasure {
    pub fn new(atoms: Vec<(Vec2, f64)>) -> Result<Self> {
        if atoms.iter().any(|(p, m)| !p.is_finite() || !m.is_finite()) {
            return Err(Error::validation("measure", "non-finite atom"));
        }
        let total_mass = exact_sum(atoms.iter().map(|a| a.1));
        Ok(AtomicMeasure { atoms, total_mass })
    }

    pub fn from_cloud(cloud: &ParticleCloud) -> Self {
        let atoms = cloud.positions.iter().copied().zip(cloud.circulations().iter().copied()).collect();
        AtomicMeasure::new(atoms).expect("clouds hold finite data")
    }

    /// Σ a_i δ_{Y_i}.
    pub fn from_point_vortices(positions: &[Vec2], intensities: &[f64]) -> Result<Self> {
        AtomicMeasure::new(positions.iter().copied().zip(intensities.iter().copied()).collect())
    }

    pub fn atoms(&self) -> &[(Vec2, f64)] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn total_variation(&self) -> f64 {
        exact_sum(self.atoms.iter().map(|a| a.1.abs()))
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Aggregates atoms into square cells of the given pitch, placing each
    /// aggregate at the mass-weighted mean of its members. Returns the
    /// coarse measure and Σ m_k |x_k − c_cell|, an upper bound on the W1
    /// distance between the two.
    pub fn coarsen(&self, pitch: f64) -> (AtomicMeasure, f64) {
        let mut cells: BTreeMap<(i64, i64), (f64, f64, f64, Vec<usize>)> = BTreeMap::new();
        for (k, (p, m)) in self.atoms.iter().enumerate() {
            let key = ((p.x / pitch).floor() as i64, (p.y / pitch).floor() as i64);
            let e = cells.entry(key).or_insert((0.0, 0.0, 0.0, Vec::new()));
            e.0 += m;
            e.1 += m * p.x;
            e.2 += m * p.y;
            e.3.push(k);
        }
        let mut atoms = Vec::with_capacity(cells.len());
        let mut moved = Vec::new();
        for (_, (m, mx, my, members)) in cells {
            if m == 0.0 {
                continue;
            }
            let c = Vec2::new(mx / m, my / m);
            for k in members {
                let (p, w) = self.atoms[k];
                moved.push(w.abs() * p.dist(c));
            }
            atoms.push((c, m));
        }
        (AtomicMeasure::new(atoms).expect("finite aggregates"), exact_sum(moved))
    }
}

/// Optimal plan returned as a witness for [`w1_exact`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    /// (source atom, target atom, shipped mass).
    pub routes: Vec<(usize, usize, f64)>,
    pub cost: f64,
}

/// Atom count per side above which measures are aggregated before solving.
pub const COARSEN_ABOVE: usize = 5000;

/// Exact W1 between nonnegative measures of equal total mass.
pub fn w1_exact(mu: &AtomicMeasure, nu: &AtomicMeasure) -> Result<(f64, TransportPlan)> {
    for m in [mu, nu] {
        if let Some(&(_, w)) = m.atoms.iter().find(|a| a.1 < 0.0) {
            return Err(Error::NegativeMass(w));
        }
    }
    let (a, b) = (mu.total_mass, nu.total_mass);
    if (a - b).abs() > 1e-9 * a.abs().max(b.abs()) {
        return Err(Error::MassMismatch(a, b));
    }
    // Solve in a canonical orientation so that W1(μ, ν) and W1(ν, μ) are
    // computed by the same pivots and agree bitwise.
    if canonical_order(mu, nu) == Ordering::Greater {
        let (w, plan) = w1_exact(nu, mu)?;
        let routes = plan.routes.into_iter().map(|(j, i, f)| (i, j, f)).collect();
        return Ok((w, TransportPlan { routes, cost: plan.cost }));
    }
    if mu.atoms.len() > COARSEN_ABOVE || nu.atoms.len() > COARSEN_ABOVE {
        return Ok(w1_coarsened(mu, nu));
    }
    Ok(solve_indexed(mu, nu))
}

fn canonical_order(mu: &AtomicMeasure, nu: &AtomicMeasure) -> Ordering {
    let key = |(p, m): &(Vec2, f64)| [p.x, p.y, *m];
    mu.atoms.len().cmp(&nu.atoms.len()).then_with(|| {
        mu.atoms
            .iter()
            .zip(&nu.atoms)
            .flat_map(|(a, b)| key(a).into_iter().zip(key(b)))
            .map(|(a, b)| a.total_cmp(&b))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

fn solve_indexed(mu: &AtomicMeasure, nu: &AtomicMeasure) -> (f64, TransportPlan) {
    let keep = |m: &AtomicMeasure| -> Vec<usize> { (0..m.atoms.len()).filter(|&k| m.atoms[k].1 > 0.0).collect() };
    let (ki, kj) = (keep(mu), keep(nu));
    if ki.is_empty() || kj.is_empty() {
        return (0.0, TransportPlan { routes: Vec::new(), cost: 0.0 });
    }
    let xs: Vec<Vec2> = ki.iter().map(|&k| mu.atoms[k].0).collect();
    let a: Vec<f64> = ki.iter().map(|&k| mu.atoms[k].1).collect();
    let ys: Vec<Vec2> = kj.iter().map(|&k| nu.atoms[k].0).collect();
    let b: Vec<f64> = kj.iter().map(|&k| nu.atoms[k].1).collect();
    let sol = simplex::solve(&xs, &a, &ys, &b);
    if sol.artificial_flow > 0.0 {
        log::debug!("w1: {:.3e} mass left unmatched by the mass mismatch", sol.artificial_flow);
    }
    let routes = sol.routes.into_iter().map(|(i, j, f)| (ki[i], kj[j], f)).collect();
    (sol.cost, TransportPlan { routes, cost: sol.cost })
}

fn w1_coarsened(mu: &AtomicMeasure, nu: &AtomicMeasure) -> (f64, TransportPlan) {
    let (lo, hi) = mu.atoms.iter().chain(&nu.atoms).fold(
        (Vec2::new(f64::INFINITY, f64::INFINITY), Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY)),
        |(lo, hi), (p, _)| (Vec2::new(lo.x.min(p.x), lo.y.min(p.y)), Vec2::new(hi.x.max(p.x), hi.y.max(p.y))),
    );
    let extent = (hi.x - lo.x).max(hi.y - lo.y).max(f64::MIN_POSITIVE);
    let mut pitch = extent / (COARSEN_ABOVE as f64).sqrt() / 4.0;
    loop {
        let (cm, em) = mu.coarsen(pitch);
        let (cn, en) = nu.coarsen(pitch);
        if cm.len() <= COARSEN_ABOVE && cn.len() <= COARSEN_ABOVE {
            let (w, plan) = solve_indexed(&cm, &cn);
            let err = em + en;
            log::info!("w1: aggregated to pitch {pitch:.3e}, displacement bound {err:.3e} ({:.2}% of W1)", 100.0 * err / w.max(f64::MIN_POSITIVE));
            if err > 0.01 * w {
                log::warn!("w1: aggregation error exceeds 1% of the measured distance");
            }
            return (w, plan);
        }
        pitch *= 1.5;
    }
}

/// Merge radius used when cancelling coincident atoms of a signed difference.
pub const MERGE_RADIUS: f64 = 1e-12;

/// Kantorovich–Rubinstein distance between signed measures of equal total
/// mass: W1 between the positive and negative parts of f − g.
pub fn w1_signed(f: &AtomicMeasure, g: &AtomicMeasure) -> Result<f64> {
    let scale = f.total_variation().max(g.total_variation());
    if (f.total_mass - g.total_mass).abs() > 1e-9 * scale {
        return Err(Error::MassMismatch(f.total_mass, g.total_mass));
    }
    let mut atoms: Vec<(Vec2, f64)> = f.atoms.iter().copied().chain(g.atoms.iter().map(|&(p, m)| (p, -m))).collect();
    atoms.sort_by(|a, b| a.0.x.total_cmp(&b.0.x).then(a.0.y.total_cmp(&b.0.y)));
    let mut merged: Vec<(Vec2, Vec<f64>)> = Vec::new();
    for (p, m) in atoms {
        match merged.last_mut() {
            Some((q, ms)) if (p.x - q.x).abs() < MERGE_RADIUS && (p.y - q.y).abs() < MERGE_RADIUS => ms.push(m),
            _ => merged.push((p, vec![m])),
        }
    }
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for (p, ms) in merged {
        let m = exact_sum(ms);
        if m > 0.0 {
            plus.push((p, m));
        } else if m < 0.0 {
            minus.push((p, -m));
        }
    }
    let (plus, minus) = (AtomicMeasure::new(plus)?, AtomicMeasure::new(minus)?);
    let (a, b) = (plus.total_mass, minus.total_mass);
    if (a - b).abs() > 1e-9 * scale {
        return Err(Error::MassMismatch(a, b));
    }
    if plus.is_empty() || minus.is_empty() {
        return Ok(0.0);
    }
    if plus.len() > COARSEN_ABOVE || minus.len() > COARSEN_ABOVE {
        return Ok(w1_coarsened(&plus, &minus).0);
    }
    Ok(solve_indexed(&plus, &minus).0)
}
