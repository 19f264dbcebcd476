use gcam_pose::constraints::{AcLayout, SolutionCount, Variant};
use gcam_pose::geometry::*;
use gcam_pose::pipeline::experiment::candidate_errors;
use gcam_pose::pipeline::metrics::chordal_error;
use gcam_pose::pipeline::ransac::MinimalSampler;
use gcam_pose::pipeline::synthetic::*;
use gcam_pose::solver::*;
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};

fn rig4() -> Rig {
    Rig::new(vec![
        RigCamera::new(euler_xyz(0.05, 0.1, 0.0), Vector3::new(-0.5, 0.0, 0.2)),
        RigCamera::new(euler_xyz(-0.05, -0.1, 0.02), Vector3::new(0.5, 0.1, 0.0)),
        RigCamera::new(euler_xyz(0.0, 0.2, -0.03), Vector3::new(0.1, -0.4, -0.3)),
        RigCamera::new(euler_xyz(0.1, -0.2, 0.0), Vector3::new(-0.2, 0.3, 0.5)),
    ])
}

fn random_ac(
    rng: &mut ChaCha8Rng,
    rig: &Rig,
    pose: &RelativePose,
    i: usize,
    j: usize,
) -> AffineCorrespondence {
    loop {
        let x = Vector3::new(
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(6.0..15.0),
        );
        let n = Vector3::from(UnitSphere.sample(rng));
        if let Some(a) = exact_ac(rig, pose, i, j, &x, &n) {
            return a;
        }
    }
}

/// `(rotation chordal, relative translation)` errors of the nearest candidate.
fn nearest(gt: &RelativePose, set: &SolutionSet) -> (f64, f64) {
    candidate_errors(gt, &set.candidates)
        .map(|(_, t, _, c)| (c, t))
        .unwrap_or((f64::INFINITY, f64::INFINITY))
}

fn ok(e: (f64, f64)) -> bool {
    e.0 <= 1e-5 && e.1 <= 1e-4
}

#[test]
fn two_ac_cases_recover_pose() {
    let rig = rig4();
    let cfg = SolverConfig::default();
    let trials = 30u64;
    for case in 1..=7u8 {
        let layout = AcLayout::for_case(case).unwrap();
        let p = layout.pattern;
        for choice in [VariantChoice::E1, VariantChoice::E1E2] {
            let variant = if choice == VariantChoice::E1 {
                Variant::E1
            } else {
                Variant::E1E2
            };
            let mut good = 0;
            for seed in 0..trials {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let pose = random_pose(&SyntheticConfig::default(), &mut rng);
                let a = random_ac(&mut rng, &rig, &pose, p[0], p[1]);
                let b = random_ac(&mut rng, &rig, &pose, p[2], p[3]);
                match solve_2ac_gcam(&a, &b, &rig, choice, &cfg) {
                    Ok(set) => {
                        if let SolutionCount::Finite(n) = layout.expected_count(variant) {
                            assert!(set.len() <= n, "case {case}: {} > {n} roots", set.len());
                        }
                        good += ok(nearest(&pose, &set)) as u64;
                    }
                    Err(SolverError::OneDimensionalFamily) => {
                        assert_eq!((case, variant), (7, Variant::E1));
                    }
                    Err(e) => panic!("case {case} {choice:?}: {e}"),
                }
            }
            if (case, variant) != (7, Variant::E1) {
                assert!(
                    good >= trials * 9 / 10,
                    "case {case} {choice:?}: {good}/{trials}"
                );
            }
        }
    }
}

#[test]
fn shared_pair_cases_give_rotation_only() {
    let rig = rig4();
    for case in [8u8, 9] {
        let p = AcLayout::for_case(case).unwrap().pattern;
        let mut good = 0;
        for seed in 0..30 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let pose = random_pose(&SyntheticConfig::default(), &mut rng);
            let a = random_ac(&mut rng, &rig, &pose, p[0], p[1]);
            let b = random_ac(&mut rng, &rig, &pose, p[2], p[3]);
            let set = solve_2ac_gcam(&a, &b, &rig, VariantChoice::Auto, &SolverConfig::default())
                .unwrap();
            assert!(set.candidates.iter().all(|c| !c.scale_valid));
            let best = set
                .candidates
                .iter()
                .map(|c| chordal_error(&pose.rotation, &c.pose.rotation))
                .fold(f64::INFINITY, f64::min);
            good += (best <= 1e-5) as usize;
        }
        assert!(good >= 29, "case {case}: {good}/30");
    }
}

fn sampled(
    kind: SolverKind,
    cfg: &SyntheticConfig,
    seed: u64,
) -> (
    SyntheticScene,
    Vec<AffineCorrespondence>,
    Vec<PointCorrespondence>,
) {
    let scene = synth_scene(cfg, seed).unwrap();
    let pcs = scene.points();
    let idx = MinimalSampler::new(kind, &pcs).unwrap().draw_seeded(seed);
    let acs = idx.iter().map(|&i| scene.acs[i]).collect();
    let pts = idx.iter().map(|&i| pcs[i]).collect();
    (scene, acs, pts)
}

#[test]
fn catalog_solvers_on_synthetic_scenes() {
    for kind in SolverKind::ALL {
        if kind == SolverKind::Linear17 {
            continue;
        }
        let cfg = SyntheticConfig {
            pairing: gcam_pose::pipeline::experiment::pairing_for(kind),
            ..Default::default()
        };
        let mut good = 0;
        for seed in 0..25 {
            let (scene, acs, pts) = sampled(kind, &cfg, seed);
            let set = kind
                .solve(&scene.rig, &acs, &pts, &SolverConfig::default())
                .unwrap();
            let e = candidate_errors(&scene.pose, &set.candidates).unwrap();
            good += (e.3 <= 1e-5 && e.1 <= 1e-4) as usize;
        }
        assert!(good >= 23, "{kind}: {good}/25");
    }
}

#[test]
fn mono_translation_has_unit_norm_and_correct_sign() {
    let cfg = SyntheticConfig {
        pairing: Pairing::Mono,
        ..Default::default()
    };
    for seed in 0..10 {
        let (scene, acs, _) = sampled(SolverKind::Mono2Ac, &cfg, seed);
        let set = solve_2ac_mono(&acs[0], &acs[1], &SolverConfig::default()).unwrap();
        let c = set
            .candidates
            .iter()
            .min_by(|a, b| {
                chordal_error(&scene.pose.rotation, &a.pose.rotation)
                    .total_cmp(&chordal_error(&scene.pose.rotation, &b.pose.rotation))
            })
            .unwrap();
        assert!(!c.scale_valid);
        assert!((c.pose.translation.norm() - 1.0).abs() < 1e-9);
        assert!((c.pose.translation - scene.pose.translation.normalize()).norm() < 1e-5);
    }
}

#[test]
fn linear_17pt_on_nonplanar_points() {
    for pairing in [Pairing::Inter, Pairing::Intra] {
        let cfg = SyntheticConfig {
            pairing,
            ..Default::default()
        };
        for seed in 0..10 {
            let scene = synth_scene(&cfg, seed).unwrap();
            // the first half of the correspondences lie on the ground plane
            let pcs: Vec<_> = scene
                .points()
                .into_iter()
                .skip(cfg.acs / 2)
                .take(20)
                .collect();
            let set = solve_17pt_linear(&pcs, &scene.rig).unwrap();
            let e = candidate_errors(&scene.pose, &set.candidates).unwrap();
            assert!(e.3 < 1e-8 && e.1 < 1e-7, "{pairing:?} seed {seed}: {e:?}");
        }
    }
}

#[test]
fn solution_independent_of_rig_frame() {
    let cfg = SyntheticConfig::default();
    let g = RigTransform {
        rotation: axis_angle(&Vector3::new(0.3, -1.0, 0.2).normalize(), 0.8),
        translation: Vector3::new(0.4, -2.0, 1.5),
    };
    for kind in [SolverKind::Inter56, SolverKind::SixPtInter48] {
        for seed in 0..5 {
            let (scene, acs, pts) = sampled(kind, &cfg, seed);
            let s = SolverConfig::default();
            let a = kind.solve(&scene.rig, &acs, &pts, &s).unwrap();
            let b = kind
                .solve(&scene.rig.transformed(&g), &acs, &pts, &s)
                .unwrap();
            let pick = |set: &SolutionSet, gt: &RelativePose| {
                set.candidates
                    .iter()
                    .min_by(|x, y| {
                        chordal_error(&gt.rotation, &x.pose.rotation)
                            .total_cmp(&chordal_error(&gt.rotation, &y.pose.rotation))
                    })
                    .unwrap()
                    .pose
            };
            let pa = pick(&a, &scene.pose);
            let pb = g.pose_to_original(&pick(&b, &g.pose_to_new(&scene.pose)));
            assert!((pa.rotation - pb.rotation).norm() < 1e-8);
            assert!(
                (pa.translation - pb.translation).norm() < 1e-8 * (1.0 + pa.translation.norm())
            );
        }
    }
}

fn degenerate_cfg(pairing: Pairing, motion: Motion) -> SyntheticConfig {
    SyntheticConfig {
        pairing,
        motion,
        perturbation_deg: 0.0,
        ..Default::default()
    }
}

#[test]
fn degenerate_motions_leave_scale_unobservable() {
    for (pairing, motion, kind) in [
        (Pairing::Inter, Motion::Sideways, SolverKind::Inter56),
        (Pairing::Intra, Motion::Random, SolverKind::Intra2Ac),
        (Pairing::Intra, Motion::Forward, SolverKind::Intra2Ac),
    ] {
        let cfg = degenerate_cfg(pairing, motion);
        for seed in 0..20 {
            let (scene, acs, _) = sampled(kind, &cfg, seed);
            assert_eq!(
                translation_for_rotation(&acs[0], &acs[1], &scene.rig, &scene.pose.rotation),
                Err(SolverError::ScaleUnobservable),
                "{pairing:?} {motion:?} seed {seed}"
            );
            // every scaled translation explains the ACs equally well
            for lambda in [1.0, 2.5] {
                let p = RelativePose::new(scene.pose.rotation, lambda * scene.pose.translation);
                for ac in &acs {
                    let e = scene
                        .rig
                        .generalized_essential(ac.cam_i, ac.cam_j, &p)
                        .unwrap();
                    let r = affine_residuals(&e, ac);
                    assert!(r.iter().all(|v| v.abs() < 1e-8), "{r:?}");
                }
            }
        }
    }
}

#[test]
fn generic_motion_recovers_metric_translation() {
    for (pairing, kind) in [
        (Pairing::Inter, SolverKind::Inter56),
        (Pairing::Intra, SolverKind::Intra2Ac),
    ] {
        let cfg = SyntheticConfig {
            pairing,
            ..Default::default()
        };
        for seed in 0..20 {
            let (scene, acs, _) = sampled(kind, &cfg, seed);
            let t = translation_for_rotation(&acs[0], &acs[1], &scene.rig, &scene.pose.rotation)
                .unwrap();
            assert!((t - scene.pose.translation).norm() < 1e-7);
        }
    }
}

#[test]
fn precondition_errors() {
    let cfg = SyntheticConfig::default();
    let (scene, acs, pts) = sampled(SolverKind::Inter56, &cfg, 0);
    let s = SolverConfig::default();
    assert!(matches!(
        SolverKind::Inter56.solve(&scene.rig, &acs[..1], &pts, &s),
        Err(SolverError::InsufficientSpan(_))
    ));
    assert!(matches!(
        SolverKind::SixPtInter56.solve(&scene.rig, &acs, &pts[..2], &s),
        Err(SolverError::InsufficientSpan(_))
    ));
    assert!(matches!(
        solve_2ac_gcam(&acs[0], &acs[0], &scene.rig, VariantChoice::Auto, &s),
        Err(SolverError::DegenerateInput(_))
    ));
    assert!(matches!(
        SolverKind::Mono2Ac.solve(&scene.rig, &acs, &pts, &s),
        Err(SolverError::DegenerateInput(_))
    ));
    let mut far = acs[0];
    far.cam_j = 7;
    assert!(matches!(
        solve_2ac_gcam(&far, &acs[1], &scene.rig, VariantChoice::Auto, &s),
        Err(SolverError::Geometry(_))
    ));
    assert!("2AC-Inter-56".parse::<SolverKind>().is_ok());
    assert!("2ac-foo".parse::<SolverKind>().is_err());
}

#[test]
fn noisy_inputs_still_produce_candidates() {
    let cfg = SyntheticConfig {
        sigma: 1.0,
        ..Default::default()
    };
    let mut near = 0;
    for seed in 0..20 {
        let (scene, acs, pts) = sampled(SolverKind::Inter56, &cfg, seed);
        if let Ok(set) = SolverKind::Inter56.solve(&scene.rig, &acs, &pts, &SolverConfig::noisy()) {
            let e = candidate_errors(&scene.pose, &set.candidates).unwrap();
            near += (e.0 < 20.0) as usize;
        }
    }
    assert!(near >= 15, "{near}/20");
}
