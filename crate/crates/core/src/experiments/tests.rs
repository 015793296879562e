use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::vpm::ProfileKind;

fn spec(centers: Vec<Vec2>, epsilon: f64) -> InitialDataSpec {
    let n = centers.len();
    InitialDataSpec {
        centers,
        intensities: vec![1.0; n],
        epsilon,
        support_radius: 0.25,
        separation: 1.5,
        p: 4.0,
        gamma: 1.5,
        lambda: 10.0,
        profile: ProfileKind::CompactBump,
        tail_fraction: 3.0,
    }
}

#[test]
fn fit_rate_examples() {
    let eps = [0.16, 0.08, 0.04, 0.02];
    let f = fit_rate(&eps.map(|e| (e, 3.0 * e))).unwrap();
    assert!((f.slope - 1.0).abs() < 1e-12);
    assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
    assert!(f.residual < 1e-12);
    assert!((fit_rate(&eps.map(|e| (e, e * e))).unwrap().slope - 2.0).abs() < 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let noisy: Vec<(f64, f64)> = (0..12)
        .map(|k| {
            let e = 0.2 * 0.7f64.powi(k);
            (e, e * (1.0 + rng.gen_range(-0.05..0.05)))
        })
        .collect();
    let f = fit_rate(&noisy).unwrap();
    assert!((0.9..=1.1).contains(&f.slope));

    assert!(matches!(fit_rate(&[(0.1, 1.0)]), Err(Error::Degenerate(_))));
    assert!(fit_rate(&[(0.1, 1.0), (0.2, 0.0)]).is_err());
}

fn synthetic(ws: &[(f64, f64)]) -> Vec<DiagnosticsRecord> {
    ws.iter()
        .map(|&(t, w)| DiagnosticsRecord {
            t,
            components: vec![ComponentDiagnostics {
                x: Vec2::ZERO,
                y: Vec2::ZERO,
                w2_pv: w,
                w2_center: w,
                center_gap: 0.0,
                vel_gap: 0.0,
                m_r: 0.0,
                m_2r: w,
                mu: 0.0,
            }],
            w1_total: 0.0,
            min_sep_cloud: f64::INFINITY,
            min_sep_pv: f64::INFINITY,
        })
        .collect()
}

#[test]
fn gronwall_fits() {
    let recs = synthetic(&(0..20).map(|k| (0.1 * k as f64, 0.05 * (0.7 * 0.1 * k as f64).exp())).collect::<Vec<_>>());
    let f = fit_gronwall(&recs, 0).unwrap();
    assert!((f.slope - 0.7).abs() < 1e-12);
    assert!(f.residual < 1e-12);
    let flat = synthetic(&[(0.0, 0.1), (1.0, 0.1), (2.0, 0.1)]);
    assert_eq!(fit_gronwall(&flat, 0).unwrap().slope, 0.0);
    assert!(fit_gronwall(&[], 0).is_err());
}

#[test]
fn threshold_detects_injected_crossing() {
    let s = spec(vec![Vec2::ZERO], 0.1);
    let level = 0.1f64.powf(3.0);
    let recs = synthetic(&[(0.0, 0.0), (0.5, 0.5 * level), (1.0, 2.0 * level), (1.5, 3.0 * level)]);
    let mon = threshold_monitor(&recs, &s);
    assert!((mon.alpha - 3.0).abs() < 1e-15);
    assert_eq!(mon.crossing, Some(1.0));
    let quiet = threshold_monitor(&recs[..2], &s);
    assert_eq!(quiet.crossing, None);
}

#[test]
fn atomic_pair_has_zero_distances() {
    let pos = vec![Vec2::new(-0.5, 0.0), Vec2::new(0.5, 0.0)];
    let cloud = ParticleCloud::new(pos.clone(), vec![1.0, 0.5], vec![0, 1], None, 0.0).unwrap();
    let pv = PointVortexState::new(pos, vec![1.0, 0.5]).unwrap();
    let s = InitialDataSpec {
        centers: vec![Vec2::new(-0.5, 0.0), Vec2::new(0.5, 0.0)],
        separation: 0.4,
        support_radius: 0.1,
        epsilon: 0.1,
        ..spec(vec![], 0.1)
    };
    let num = Numerics { horizon: 0.5, deterministic: true, ..Default::default() };
    let out = run_pairing_on(cloud, pv, &s, &num).unwrap();
    assert!(out.failure.is_none());
    assert_eq!(out.records.len(), 11);
    for r in &out.records {
        assert_eq!(r.w1_total, 0.0);
        for c in &r.components {
            assert_eq!((c.w2_pv, c.w2_center, c.center_gap, c.vel_gap), (0.0, 0.0, 0.0, 0.0));
        }
    }
    assert_eq!(out.cloud.positions, out.pv.positions);
}

#[test]
fn single_component_stays_put() {
    let s = spec(vec![Vec2::new(0.3, -0.1)], 0.1);
    let num = Numerics { horizon: 1.0, particles_per_core: 6.0, cadence: 0.25, ..Default::default() };
    let out = run_pairing(&s, &num).unwrap();
    assert!(out.failure.is_none());
    assert_eq!(out.pv.positions[0], Vec2::new(0.3, -0.1));
    for r in &out.records {
        let c = &r.components[0];
        assert!(c.center_gap <= 1e-6, "{}", c.center_gap);
        assert!((c.w2_pv - c.w2_center).abs() <= 1e-6);
        assert!(r.triangle_holds());
        assert!(r.w1_bound_holds(&out.intensities));
    }
    assert_eq!(threshold_monitor(&out.records, &s).crossing, None);
}

#[test]
fn offsets_shift_point_vortices() {
    let s = spec(vec![Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0)], 0.1);
    let num = Numerics {
        horizon: 0.1,
        particles_per_core: 5.0,
        pv_offsets: vec![Vec2::new(0.5, 0.0), Vec2::new(0.0, 0.5)],
        ..Default::default()
    };
    let out = run_pairing(&s, &num).unwrap();
    let first = &out.records[0];
    assert!((first.components[0].center_gap - 0.05).abs() < 1e-12);
    assert!((first.components[1].y - Vec2::new(1.0, 0.05)).norm() < 1e-15);
    assert!(first.components.iter().all(|c| c.w2_pv <= s.epsilon));
    assert!(out.records.iter().all(|r| r.triangle_holds() && r.w1_bound_holds(&out.intensities)));
}

#[test]
fn collapsing_components_stop_on_separation() {
    // three-vortex self-similar collapse (Σ 1/a_i = 0, zero angular invariant)
    let r2 = 2f64.sqrt();
    let mut s = spec(vec![Vec2::new(-0.5, 0.0), Vec2::new(0.5, 0.0), Vec2::new(0.5, 0.5 * r2)], 0.05);
    s.intensities = vec![2.0, 2.0, -1.0];
    s.support_radius = 0.1;
    s.separation = 0.5;
    let num = Numerics { horizon: 6.0, particles_per_core: 5.0, ..Default::default() };
    let out = run_pairing(&s, &num).unwrap();
    assert!(out.failure.is_none(), "{:?}", out.failure);
    assert!(out.t_run < 6.0);
    let t_sep = out.stop.separation_time().or(out.pv_separation_failure).unwrap();
    assert_eq!(t_sep, out.t_run);
    let last = out.records.last().unwrap();
    assert_eq!(last.t, out.t_run);
    assert!(last.min_sep_cloud < 0.25 || last.min_sep_pv < 0.25);
}

#[test]
fn sweep_validation_and_single_epsilon() {
    let base = spec(vec![Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0)], 0.2);
    let num = Numerics { horizon: 0.05, particles_per_core: 4.0, ..Default::default() };
    assert!(run_sweep(&base, &[0.1, 0.2], &num).is_err());
    assert!(run_sweep(&base, &[0.3], &num).is_err());
    let r = run_sweep(&base, &[0.2], &num).unwrap();
    assert!(r.w2_fit.iter().all(|f| f.is_none()));
    assert!(r.members[0].sup_w2.iter().all(|w| *w > 0.0));
}
