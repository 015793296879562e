use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::kernel::{direct_velocity, Targets};
use crate::point_vortex::{pv_rhs, PointVortexState};

fn cloud(p: &[(f64, f64, f64, usize)]) -> ParticleCloud {
    ParticleCloud::new(
        p.iter().map(|q| Vec2::new(q.0, q.1)).collect(),
        p.iter().map(|q| q.2).collect(),
        p.iter().map(|q| q.3).collect(),
        None,
        0.0,
    )
    .unwrap()
}

fn random_cloud(rng: &mut ChaCha8Rng, comps: usize, per: usize, blob: f64) -> ParticleCloud {
    let mut pts = Vec::new();
    for c in 0..comps {
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let base = Vec2::new(3.0 * c as f64, rng.gen_range(-1.0..1.0));
        for _ in 0..per {
            pts.push((
                base.x + rng.gen_range(-1.0..1.0),
                base.y + rng.gen_range(-1.0..1.0),
                sign * rng.gen_range(0.01..1.0),
                c,
            ));
        }
    }
    let mut c = cloud(&pts);
    c.blob_radius = blob;
    c
}

#[test]
fn center_examples() {
    let c = cloud(&[(0.0, 0.0, 1.0, 0), (2.0, 0.0, 1.0, 0)]);
    assert_eq!(center_of_vorticity(&c, 0).unwrap(), Vec2::new(1.0, 0.0));
    let sym = cloud(&[(1.5, 0.5, 2.0, 0), (0.5, 0.5, 2.0, 0), (1.0, 1.0, 3.0, 0), (1.0, 0.0, 3.0, 0)]);
    let x = center_of_vorticity(&sym, 0).unwrap();
    assert!((x - Vec2::new(1.0, 0.5)).norm() < 1e-15);
    assert!(matches!(center_of_vorticity(&c, 3), Err(Error::NoSuchComponent(3))));
}

#[test]
fn variance_minimized_at_center() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let c = random_cloud(&mut rng, 1, 30, 0.0);
        let x = center_of_vorticity(&c, 0).unwrap();
        let at = w2_to_dirac(&c, 0, x).unwrap();
        for _ in 0..20 {
            let y = x + Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            assert!(at <= w2_to_dirac(&c, 0, y).unwrap());
        }
    }
}

#[test]
fn center_velocity_cases() {
    let single = cloud(&[(0.0, 0.0, 1.0, 0), (0.3, 0.1, 2.0, 0)]);
    assert_eq!(center_velocity(&single, 0, &KernelParams::default()).unwrap(), Vec2::ZERO);

    let pos = vec![Vec2::new(-0.2, 0.1), Vec2::new(0.7, -0.3)];
    let a = vec![1.3, -0.4];
    let atomic = ParticleCloud::new(pos.clone(), a.clone(), vec![0, 1], None, 0.0).unwrap();
    let pv = pv_rhs(&PointVortexState::new(pos, a).unwrap()).unwrap();
    for i in 0..2 {
        let v = center_velocity(&atomic, i, &KernelParams::default()).unwrap();
        assert!((v - pv[i]).norm() < 1e-15);
    }

    // full-sum oracle: self-interaction cancels
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let c = random_cloud(&mut rng, 2, 200, 0.05);
    let params = KernelParams { blob_radius: 0.05, ..Default::default() };
    let u = direct_velocity(&c.positions, c.circulations(), Targets::Sources, &params).unwrap();
    for i in 0..2 {
        let a = c.intensity(i);
        let mut s = Vec2::ZERO;
        for k in 0..c.len() {
            if c.tags()[k] == i {
                s += (c.circulations()[k] / a) * u[k];
            }
        }
        let v = center_velocity(&c, i, &params).unwrap();
        assert!((v - s).norm() < 1e-10 * s.norm().max(1.0), "{v:?} vs {s:?}");
    }
}

#[test]
fn w2_examples() {
    let y = Vec2::new(0.3, -0.2);
    let one = cloud(&[(0.3, -0.2, 2.0, 0)]);
    assert_eq!(w2_to_dirac(&one, 0, y).unwrap(), 0.0);
    let ring: Vec<_> = (0..16)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / 16.0;
            (y.x + 0.7 * t.cos(), y.y + 0.7 * t.sin(), -1.0, 0)
        })
        .collect();
    assert!((w2_to_dirac(&cloud(&ring), 0, y).unwrap() - 0.7).abs() < 1e-15);
    let two = cloud(&[(1.0, 0.0, 0.5, 0), (-2.0, 0.0, 0.5, 0)]);
    assert!((w2_to_dirac(&two, 0, Vec2::ZERO).unwrap() - 2.5f64.sqrt()).abs() < 1e-15);
    let mixed = AtomicMeasure::new(vec![(Vec2::ZERO, 1.0), (Vec2::new(1.0, 0.0), -0.5)]).unwrap();
    assert!(matches!(w2_measure_to_dirac(&mixed, Vec2::ZERO), Err(Error::MixedSign(_))));
}

fn m(atoms: &[(f64, f64, f64)]) -> AtomicMeasure {
    AtomicMeasure::new(atoms.iter().map(|a| (Vec2::new(a.0, a.1), a.2)).collect()).unwrap()
}

#[test]
fn w1_examples() {
    let (w, plan) = w1_exact(&m(&[(0.0, 0.0, 2.0)]), &m(&[(3.0, 4.0, 2.0)])).unwrap();
    assert!((w - 10.0).abs() < 1e-15);
    assert_eq!(plan.routes, vec![(0, 0, 2.0)]);
    let (w, _) = w1_exact(&m(&[(0.0, 0.0, 0.5), (1.0, 0.0, 0.5)]), &m(&[(0.5, 0.0, 1.0)])).unwrap();
    assert!((w - 0.5).abs() < 1e-15);
    assert!(matches!(w1_exact(&m(&[(0.0, 0.0, 1.0)]), &m(&[(0.0, 0.0, 2.0)])), Err(Error::MassMismatch(..))));
    assert!(matches!(
        w1_exact(&m(&[(0.0, 0.0, -1.0)]), &m(&[(0.0, 0.0, -1.0)])),
        Err(Error::NegativeMass(_))
    ));
}

#[test]
fn w1_signed_examples() {
    let f = m(&[(0.0, 0.0, 1.0), (1.0, 0.0, -1.0)]);
    let g = m(&[(0.0, 1.0, 1.0), (1.0, 1.0, -1.0)]);
    assert!((w1_signed(&f, &g).unwrap() - 2.0).abs() < 1e-15);
    assert_eq!(w1_signed(&f, &f).unwrap(), 0.0);
    assert!(w1_signed(&f, &m(&[(0.0, 0.0, 1.0)])).is_err());
}

/// All assignments of unit atoms; exponential, so only for tiny inputs.
pub(crate) fn brute_force_w1(xs: &[Vec2], ys: &[Vec2]) -> f64 {
    fn rec(k: usize, xs: &[Vec2], ys: &[Vec2], used: &mut [bool], acc: f64, best: &mut f64) {
        if k == xs.len() {
            *best = best.min(acc);
            return;
        }
        for j in 0..ys.len() {
            if !used[j] {
                used[j] = true;
                rec(k + 1, xs, ys, used, acc + xs[k].dist(ys[j]), best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    rec(0, xs, ys, &mut vec![false; ys.len()], 0.0, &mut best);
    best
}

fn random_integer_measure(rng: &mut ChaCha8Rng, units: usize) -> (AtomicMeasure, Vec<Vec2>) {
    let atoms = rng.gen_range(1..=units);
    let mut counts = vec![1usize; atoms];
    for _ in atoms..units {
        counts[rng.gen_range(0..atoms)] += 1;
    }
    let pts: Vec<Vec2> = (0..atoms).map(|_| Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let unit: Vec<Vec2> = pts.iter().zip(&counts).flat_map(|(p, &c)| std::iter::repeat(*p).take(c)).collect();
    let meas = AtomicMeasure::new(pts.into_iter().zip(counts.iter().map(|&c| c as f64)).collect()).unwrap();
    (meas, unit)
}

#[test]
fn w1_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..60 {
        let units = rng.gen_range(1..=7);
        let (mu, xs) = random_integer_measure(&mut rng, units);
        let (nu, ys) = random_integer_measure(&mut rng, units);
        let (w, plan) = w1_exact(&mu, &nu).unwrap();
        let b = brute_force_w1(&xs, &ys);
        assert!((w - b).abs() <= 1e-12, "{w} vs {b}");
        // plan is feasible and attains the cost
        let mut rows = vec![0.0; mu.len()];
        let mut cols = vec![0.0; nu.len()];
        let mut cost = 0.0;
        for &(i, j, f) in &plan.routes {
            assert!(f > 0.0);
            rows[i] += f;
            cols[j] += f;
            cost += f * mu.atoms()[i].0.dist(nu.atoms()[j].0);
        }
        for (r, a) in rows.iter().zip(mu.atoms()) {
            assert!((r - a.1).abs() < 1e-9);
        }
        for (c, a) in cols.iter().zip(nu.atoms()) {
            assert!((c - a.1).abs() < 1e-9);
        }
        assert!((cost - w).abs() < 1e-12);
    }
}

#[test]
fn w1_real_masses_against_dual_bound() {
    // random real masses: check plan feasibility and a 1-Lipschitz dual lower bound
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let n = rng.gen_range(2..40);
        let mk = |rng: &mut ChaCha8Rng| -> Vec<(Vec2, f64)> {
            (0..n).map(|_| (Vec2::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)), 1.0 / n as f64)).collect()
        };
        let mu = AtomicMeasure::new(mk(&mut rng)).unwrap();
        let nu = AtomicMeasure::new(mk(&mut rng)).unwrap();
        let (w, _) = w1_exact(&mu, &nu).unwrap();
        // f(x) = x.x is 1-Lipschitz
        let dual: f64 = mu.atoms().iter().map(|a| a.1 * a.0.x).sum::<f64>() - nu.atoms().iter().map(|a| a.1 * a.0.x).sum::<f64>();
        assert!(w + 1e-12 >= dual.abs());
        let (back, _) = w1_exact(&nu, &mu).unwrap();
        assert!((w - back).abs() < 1e-12);
    }
}

#[test]
fn w1_coarsened_close_to_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = COARSEN_ABOVE + 10;
    let mu = AtomicMeasure::new(
        (0..n).map(|_| (Vec2::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)), 1.0)).collect(),
    )
    .unwrap();
    let nu = AtomicMeasure::new(vec![(Vec2::new(3.0, 0.5), n as f64)]).unwrap();
    let (w, _) = w1_exact(&mu, &nu).unwrap();
    let direct: f64 = mu.atoms().iter().map(|a| a.0.dist(Vec2::new(3.0, 0.5))).sum();
    assert!((w / direct - 1.0).abs() < 0.01);
}

#[test]
fn outer_mass_examples_and_chebyshev() {
    let c = cloud(&[(0.0, 0.0, 1.0, 0), (0.1, 0.0, 1.0, 0), (-0.1, 0.0, 2.0, 0)]);
    assert_eq!(outer_mass(&c, 0, 1.0).unwrap(), 0.0);
    assert_eq!(outer_mass(&c, 0, 1e-300).unwrap(), 1.0);
    assert!(outer_mass(&c, 0, 0.0).is_err());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let c = random_cloud(&mut rng, 2, 25, 0.0);
        for i in 0..2 {
            let rho = rng.gen_range(0.01..2.0);
            assert!(outer_mass(&c, i, rho).unwrap() <= chebyshev_ceiling(&c, i, rho).unwrap());
            let x = center_of_vorticity(&c, i).unwrap();
            let w2 = w2_to_dirac(&c, i, x).unwrap();
            let ceil = chebyshev_ceiling(&c, i, rho).unwrap();
            assert!((ceil - w2 * w2 / (rho * rho)).abs() <= 1e-12 * ceil);
        }
    }
}

#[test]
fn cutoff_values() {
    let s = CutoffSpec::new(1.0, 0.5, Vec2::new(1.0, 1.0)).unwrap();
    assert_eq!(cutoff_eval(&s, Vec2::new(2.0, 1.0)), 1.0);
    assert_eq!(cutoff_eval(&s, Vec2::new(2.5, 1.0)), 0.0);
    assert!((cutoff_eval(&s, Vec2::new(2.25, 1.0)) - 0.5).abs() < 1e-15);
    assert_eq!(cutoff_eval(&s, Vec2::new(9.0, 1.0)), 0.0);
    assert!(CutoffSpec::new(1.0, 0.0, Vec2::ZERO).is_err());
}

#[test]
fn cutoff_derivative_bounds() {
    let band = 0.3;
    let s = CutoffSpec::new(0.5, band, Vec2::ZERO).unwrap();
    let f = |r: f64| cutoff_eval(&s, Vec2::new(r, 0.0));
    let d = 1e-5;
    let (mut d1, mut d2) = (0.0f64, 0.0f64);
    let mut r = 0.4;
    while r < 0.9 {
        d1 = d1.max(((f(r + d) - f(r - d)) / (2.0 * d)).abs());
        d2 = d2.max(((f(r + d) - 2.0 * f(r) + f(r - d)) / (d * d)).abs());
        r += 1e-4;
    }
    assert!(d1 <= 15.0 / (8.0 * band) * (1.0 + 1e-6));
    assert!((d1 - 15.0 / (8.0 * band)).abs() < 1e-3);
    assert!(d2 <= 10.0 / (3f64.sqrt() * band * band) * 1.01);
    assert!(d2 > 10.0 / (3f64.sqrt() * band * band) * 0.95);
}

#[test]
fn smoothed_mass_cases_and_sandwich() {
    let inside = cloud(&[(0.0, 0.0, 1.0, 0), (0.1, 0.0, 1.0, 0)]);
    let spec = centered_cutoff(&inside, 0, 1.0, 0.2).unwrap();
    assert_eq!(smoothed_outer_mass(&inside, 0, &spec).unwrap(), 0.0);
    let spec = CutoffSpec::new(0.01, 0.01, Vec2::new(0.05, 0.0)).unwrap();
    assert_eq!(smoothed_outer_mass(&inside, 0, &spec).unwrap(), 1.0);

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..300 {
        let c = random_cloud(&mut rng, 1, 40, 0.0);
        let rho = rng.gen_range(0.05..1.5);
        let band = rng.gen_range(0.01..0.5);
        let spec = centered_cutoff(&c, 0, rho, band).unwrap();
        let mu = smoothed_outer_mass(&c, 0, &spec).unwrap();
        assert!(outer_mass(&c, 0, rho + band).unwrap() <= mu);
        assert!(mu <= outer_mass(&c, 0, rho).unwrap());
    }
}

#[test]
fn rearrangement_cases() {
    let h = 0.01;
    // indicator of (approximately) the unit disk: area counted cell by cell
    let mut pts = Vec::new();
    let n = (1.0 / h) as i64 + 2;
    for k in -n..n {
        for l in -n..n {
            let c = Vec2::new((k as f64 + 0.5) * h, (l as f64 + 0.5) * h);
            if c.norm() < 1.0 {
                pts.push((c, h * h));
            }
        }
    }
    let g = DensityGrid::deposit(pts, h).unwrap();
    let area = g.cells.len() as f64 * h * h;
    assert!((rearrangement_profile(&g, 0.5) - (area / PI).sqrt()).abs() < 1e-15);
    assert!((rearrangement_profile(&g, 0.5) - 1.0).abs() < 1e-3);
    assert_eq!(rearrangement_profile(&g, 1.0), 0.0);
}

#[test]
fn layer_cake_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let h = 0.1;
    let pts: Vec<(Vec2, f64)> = (0..300)
        .map(|_| (Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)), rng.gen_range(0.0..0.05)))
        .collect();
    let g = DensityGrid::deposit(pts, h).unwrap();
    let top = g.cells.iter().map(|c| c.2).fold(0.0, f64::max);
    let steps = 200_000;
    let ds = top / steps as f64;
    let integral: f64 = (0..steps)
        .map(|k| PI * rearrangement_profile(&g, (k as f64 + 0.5) * ds).powi(2) * ds)
        .sum();
    assert!((integral - g.mass()).abs() < 1e-6 * g.mass().max(1.0));
}

#[test]
fn tail_bound_cases() {
    let empty = DensityGrid { pitch: 0.1, cells: vec![] };
    assert_eq!(tail_velocity_bound_check(&empty, Vec2::ZERO, 4.0).unwrap(), (0.0, 0.0));
    let one = DensityGrid::deposit([(Vec2::new(1.05, 0.05), 0.3)], 0.1).unwrap();
    let (i2, rhs) = tail_velocity_bound_check(&one, Vec2::new(0.05, 0.05), 4.0).unwrap();
    assert!((i2 - 0.3).abs() < 1e-14);
    assert!(rhs > 0.0);
    assert!(tail_velocity_bound_check(&one, Vec2::ZERO, 2.0).is_err());
}

proptest! {
    #[test]
    fn w1_metric_axioms(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..12);
        let mk = |rng: &mut ChaCha8Rng| {
            AtomicMeasure::new((0..n).map(|_| (Vec2::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)), 0.5)).collect()).unwrap()
        };
        let (a, b, c) = (mk(&mut rng), mk(&mut rng), mk(&mut rng));
        let ab = w1_exact(&a, &b).unwrap().0;
        let ba = w1_exact(&b, &a).unwrap().0;
        let bc = w1_exact(&b, &c).unwrap().0;
        let ac = w1_exact(&a, &c).unwrap().0;
        prop_assert_eq!(w1_exact(&a, &a).unwrap().0, 0.0);
        prop_assert!((ab - ba).abs() <= 1e-12);
        prop_assert!(ac <= ab + bc + 1e-9);
    }
}
