use super::*;
use crate::point_vortex::{pv_rhs, PointVortexState};

fn two_blobs(profile: ProfileKind) -> InitialDataSpec {
    InitialDataSpec {
        centers: vec![Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0)],
        intensities: vec![1.0, 0.5],
        epsilon: 0.1,
        support_radius: 0.4,
        separation: 1.0,
        p: 4.0,
        gamma: 1.5,
        lambda: 10.0,
        profile,
        tail_fraction: 3.0,
    }
}

#[test]
fn sampling_conserves_intensity_and_support() {
    for profile in [ProfileKind::CompactBump, ProfileKind::BumpWithTail] {
        let spec = two_blobs(profile);
        let cloud = sample_initial_cloud(&spec, spec.epsilon / 24.0, None).unwrap();
        assert_eq!(cloud.n_components(), 2);
        for i in 0..2 {
            assert!((cloud.intensity(i) - spec.intensities[i]).abs() < 1e-14);
            let c = spec.centers[i];
            assert!(cloud.component(i).all(|(x, _)| x.dist(c) < spec.support_radius));
        }
    }
}

#[test]
fn compact_bump_second_moment_is_half_epsilon() {
    let spec = two_blobs(ProfileKind::CompactBump);
    let cloud = sample_initial_cloud(&spec, spec.epsilon / 48.0, None).unwrap();
    let c = spec.centers[0];
    let m2: f64 = cloud.component(0).map(|(x, g)| g * x.dist_sq(c)).sum::<f64>() / cloud.intensity(0);
    assert!((m2.sqrt() - 0.5 * spec.epsilon).abs() < 1e-3 * spec.epsilon);
}

#[test]
fn tail_mass_sits_in_annulus() {
    let spec = two_blobs(ProfileKind::BumpWithTail);
    let cloud = sample_initial_cloud(&spec, spec.epsilon / 24.0, None).unwrap();
    let c = spec.centers[0];
    let outside: f64 = cloud
        .component(0)
        .filter(|(x, _)| x.dist(c) >= spec.epsilon)
        .map(|(_, g)| g)
        .sum();
    assert!((outside - spec.tail_mass() * spec.intensities[0]).abs() < 1e-12);
}

#[test]
fn lp_norm_matches_continuum() {
    // ‖(a/ε²)φ(·/ε)‖_p = a ε^{-2(p-1)/p} ‖φ‖_p, ‖φ‖_p by radial quadrature
    let spec = two_blobs(ProfileKind::CompactBump);
    let cloud = sample_initial_cloud(&spec, spec.epsilon / 48.0, None).unwrap();
    let single = ParticleCloud::new(
        cloud.component(0).map(|c| c.0).collect(),
        cloud.component(0).map(|c| c.1).collect(),
        vec![0; cloud.component(0).count()],
        cloud.pitch,
        cloud.blob_radius,
    )
    .unwrap();
    let p = 4.0;
    let n = 100_000;
    let s: f64 = (0..n)
        .map(|k| {
            let r = (k as f64 + 0.5) / n as f64;
            2.0 * std::f64::consts::PI * r * mother_profile(r).powf(p) / n as f64
        })
        .sum();
    let expect = spec.epsilon.powf(-2.0 * (p - 1.0) / p) * s.powf(1.0 / p);
    let got = lp_norm_estimate(&single, p).unwrap();
    assert!((got / expect - 1.0).abs() < 1e-2, "{got} vs {expect}");
}

#[test]
fn pitch_must_resolve_core() {
    let spec = two_blobs(ProfileKind::CompactBump);
    assert!(sample_initial_cloud(&spec, spec.epsilon / 2.0, None).is_err());
    assert!(sample_initial_cloud(&spec, 0.0, None).is_err());
}

#[test]
fn inconsistent_lambda_rejected() {
    let mut spec = two_blobs(ProfileKind::CompactBump);
    spec.lambda = 1e-3;
    assert!(matches!(
        sample_initial_cloud(&spec, spec.epsilon / 24.0, None),
        Err(Error::SpecInconsistency(_))
    ));
}

#[test]
fn jitter_is_seeded() {
    let spec = two_blobs(ProfileKind::CompactBump);
    let h = spec.epsilon / 12.0;
    let a = sample_initial_cloud(&spec, h, Some(7)).unwrap();
    let b = sample_initial_cloud(&spec, h, Some(7)).unwrap();
    let c = sample_initial_cloud(&spec, h, Some(8)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.positions, c.positions);
}

#[test]
fn mixed_sign_component_rejected() {
    let r = ParticleCloud::new(
        vec![Vec2::ZERO, Vec2::new(1.0, 0.0)],
        vec![1.0, -1.0],
        vec![0, 0],
        None,
        0.0,
    );
    assert!(matches!(r, Err(Error::MixedSign(0))));
}

#[test]
fn atomic_cloud_matches_point_vortices_bitwise() {
    let pos = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.2), Vec2::new(-0.3, 0.9)];
    let a = vec![1.0, -0.7, 0.4];
    let cloud = ParticleCloud::new(pos.clone(), a.clone(), vec![0, 1, 2], None, 0.0).unwrap();
    let mut cfg = VpmConfig::default();
    cfg.kernel.deterministic = true;
    let u = vpm_rhs(&cloud, &cfg).unwrap();
    let pv = PointVortexState::new(pos, a).unwrap();
    assert_eq!(u, pv_rhs(&pv).unwrap());
}

#[test]
fn step_preserves_circulation_and_tags() {
    let spec = two_blobs(ProfileKind::CompactBump);
    let cloud = sample_initial_cloud(&spec, spec.epsilon / 6.0, None).unwrap();
    let next = vpm_step(&cloud, 1e-3, &VpmConfig::default()).unwrap();
    assert_eq!(next.circulations(), cloud.circulations());
    assert_eq!(next.tags(), cloud.tags());
    assert!((next.t - 1e-3).abs() < 1e-15);
}

#[test]
fn tree_and_direct_paths_agree() {
    let spec = two_blobs(ProfileKind::CompactBump);
    let cloud = sample_initial_cloud(&spec, spec.epsilon / 24.0, None).unwrap();
    assert!(cloud.len() > 2000);
    let direct = VpmConfig { direct_crossover: usize::MAX, ..Default::default() };
    let tree = VpmConfig { direct_crossover: 0, ..Default::default() };
    let ud = vpm_rhs(&cloud, &direct).unwrap();
    let ut = vpm_rhs(&cloud, &tree).unwrap();
    let scale = ud.iter().map(|u| u.norm()).fold(0.0, f64::max);
    for (a, b) in ud.iter().zip(&ut) {
        assert!((*a - *b).norm() < 1e-3 * scale);
    }
}

#[test]
fn support_distance_and_stop() {
    let cloud = ParticleCloud::new(
        vec![Vec2::new(0.0, 0.0), Vec2::new(0.1, 0.0), Vec2::new(2.0, 0.0), Vec2::new(3.0, 0.0)],
        vec![1.0, 1.0, 1.0, 1.0],
        vec![0, 0, 1, 2],
        None,
        0.05,
    )
    .unwrap();
    let (d, i, j) = support_gap(&cloud).unwrap();
    assert!((d - 1.0).abs() < 1e-15);
    assert_eq!((i, j), (1, 2));
    let one = ParticleCloud::new(vec![Vec2::ZERO], vec![1.0], vec![0], None, 0.0).unwrap();
    assert_eq!(component_support_distance(&one), f64::INFINITY);

    let mut seen = 0;
    let (_, report) = vpm_integrate(&cloud, 0.01, 0.1, 1, Some(10.0), &VpmConfig::default(), &mut |_| {
        seen += 1;
        Ok(())
    })
    .unwrap();
    assert!(matches!(report, StopReport::Separated { i: 1, j: 2, .. }));
    assert_eq!(report.separation_time(), Some(0.01));
    assert_eq!(seen, 2);
}

#[test]
fn integrate_observer_cadence() {
    let cloud = ParticleCloud::new(vec![Vec2::ZERO, Vec2::new(1.0, 0.0)], vec![1.0, 1.0], vec![0, 1], None, 0.0)
        .unwrap();
    let mut times = Vec::new();
    let (last, report) = vpm_integrate(&cloud, 0.1, 1.0, 5, None, &VpmConfig::default(), &mut |c| {
        times.push(c.t);
        Ok(())
    })
    .unwrap();
    assert_eq!(times.len(), 3);
    assert!((last.t - 1.0).abs() < 1e-12);
    assert!(matches!(report, StopReport::RanToHorizon { .. }));
}
