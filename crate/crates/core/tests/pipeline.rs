use gcam_pose::dataset::CorrespondenceFile;
use gcam_pose::pipeline::experiment::*;
use gcam_pose::pipeline::metrics::rotation_error;
use gcam_pose::pipeline::ransac::*;
use gcam_pose::pipeline::synthetic::*;
use gcam_pose::solver::{SolverConfig, SolverKind};
use proptest::prelude::*;

proptest! {
    #[test]
    fn iterations_monotone(p in 0.5..0.999f64, eps in 0.0..0.8f64, s in 1usize..10) {
        let n = ransac_iterations(p, eps, s);
        prop_assert!(n >= 1);
        prop_assert!(ransac_iterations(p, (eps + 0.05).min(0.85), s) >= n);
        prop_assert!(ransac_iterations(p, eps, s + 1) >= n);
        prop_assert!(ransac_iterations((p + 0.0009).min(0.9999), eps, s) >= n);
    }
}

#[test]
fn quoted_iteration_counts() {
    for (s, n) in [(17, 603_607), (8, 1177), (6, 292), (2, 16)] {
        assert_eq!(ransac_iterations(0.99, 0.5, s), n);
    }
}

fn outlier_scene(seed: u64) -> SyntheticScene {
    let cfg = SyntheticConfig {
        sigma: 1.0,
        outlier_ratio: 0.3,
        acs: 100,
        ..Default::default()
    };
    synth_scene(&cfg, seed).unwrap()
}

#[test]
fn ransac_is_reproducible() {
    let scene = outlier_scene(7);
    let cfg = RansacConfig {
        seed: 42,
        ..Default::default()
    };
    let run = || {
        ransac(
            SolverKind::Inter56,
            &scene.rig,
            &scene.acs,
            &SolverConfig::noisy(),
            &cfg,
        )
        .unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a.inliers, b.inliers);
    assert_eq!(a.iterations, b.iterations);
    assert_eq!(a.best.pose, b.best.pose);
}

#[test]
fn ransac_rejects_outliers() {
    let mut errs = Vec::new();
    for seed in 0..5 {
        let scene = outlier_scene(seed);
        let r = ransac(
            SolverKind::Inter56,
            &scene.rig,
            &scene.acs,
            &SolverConfig::noisy(),
            &RansacConfig {
                seed,
                ..Default::default()
            },
        )
        .unwrap();
        let false_pos = r
            .inliers
            .iter()
            .enumerate()
            .filter(|(k, &b)| b && scene.outliers.contains(k))
            .count();
        assert!(
            false_pos as f64 <= 0.05 * r.inlier_count as f64,
            "seed {seed}: {false_pos}/{}",
            r.inlier_count
        );
        assert!(r.best_iteration < r.iterations);
        errs.push(rotation_error(&scene.pose.rotation, &r.best.pose.rotation));
    }
    errs.sort_by(f64::total_cmp);
    assert!(errs[2] < 2.0, "{errs:?}");
}

#[test]
fn ransac_with_point_solver() {
    let scene = synth_scene(
        &SyntheticConfig {
            sigma: 0.5,
            acs: 60,
            ..Default::default()
        },
        3,
    )
    .unwrap();
    let pcs = scene.points();
    let r = ransac_on(
        SolverKind::SixPtInter48,
        &scene.rig,
        &[],
        &pcs,
        &SolverConfig::noisy(),
        &RansacConfig::default(),
    )
    .unwrap();
    assert!(rotation_error(&scene.pose.rotation, &r.best.pose.rotation) < 2.0);
}

#[test]
fn ransac_errors() {
    let scene = outlier_scene(1);
    let s = SolverConfig::noisy();
    let bad = RansacConfig {
        confidence: 1.0,
        ..Default::default()
    };
    assert!(matches!(
        ransac(SolverKind::Inter56, &scene.rig, &scene.acs, &s, &bad),
        Err(RansacError::InvalidConfig(_))
    ));
    let bad = RansacConfig {
        threshold_deg: 0.0,
        ..Default::default()
    };
    assert!(matches!(
        ransac(SolverKind::Inter56, &scene.rig, &scene.acs, &s, &bad),
        Err(RansacError::InvalidConfig(_))
    ));
    // inter-camera scene has no intra-camera groups
    assert!(matches!(
        ransac(
            SolverKind::Intra2Ac,
            &scene.rig,
            &scene.acs,
            &s,
            &RansacConfig::default()
        ),
        Err(RansacError::InsufficientData(_))
    ));
    assert!(matches!(
        ransac_on(
            SolverKind::Inter56,
            &scene.rig,
            &[],
            &scene.points(),
            &s,
            &RansacConfig::default()
        ),
        Err(RansacError::InsufficientData(_))
    ));
}

#[test]
fn samplers_respect_layouts() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    for (pairing, kind) in [
        (Pairing::Inter, SolverKind::Inter56),
        (Pairing::Intra, SolverKind::Intra2Ac),
        (Pairing::Inter, SolverKind::SixPtInter56),
        (Pairing::Intra, SolverKind::SixPtIntra),
        (Pairing::Mono, SolverKind::Mono2Ac),
        (Pairing::Intra, SolverKind::Linear17),
    ] {
        let scene = synth_scene(
            &SyntheticConfig {
                pairing,
                ..Default::default()
            },
            0,
        )
        .unwrap();
        let pcs = scene.points();
        let sampler = MinimalSampler::new(kind, &pcs).unwrap();
        for _ in 0..50 {
            let idx = sampler.draw(&mut rng);
            assert_eq!(idx.len(), kind.sample_size());
            let mut uniq = idx.clone();
            uniq.sort_unstable();
            uniq.dedup();
            assert_eq!(uniq.len(), idx.len());
            let pairs: Vec<_> = idx.iter().map(|&i| (pcs[i].cam_i, pcs[i].cam_j)).collect();
            match kind.sample_layout() {
                gcam_pose::solver::SampleLayout::Inter(k) => {
                    assert!(pairs[..k].iter().all(|p| *p == pairs[0] && p.0 != p.1));
                    assert!(pairs[k..].iter().all(|p| *p == (pairs[0].1, pairs[0].0)));
                }
                gcam_pose::solver::SampleLayout::Intra(k) => {
                    assert!(pairs[..k].iter().all(|p| *p == pairs[0] && p.0 == p.1));
                    assert!(pairs[k..]
                        .iter()
                        .all(|p| *p == pairs[k] && p.0 == p.1 && p.0 != pairs[0].0));
                }
                gcam_pose::solver::SampleLayout::SamePair(_) => {
                    assert!(pairs.iter().all(|p| *p == pairs[0]))
                }
                gcam_pose::solver::SampleLayout::Any(_) => {
                    assert!(pairs.iter().any(|p| *p != pairs[0]))
                }
            }
        }
    }
}

#[test]
fn stability_is_deterministic_and_accurate() {
    let cfg = StabilityConfig {
        variants: vec![
            StabilityVariant::new(SolverKind::Inter56),
            StabilityVariant::new(SolverKind::Intra2Ac),
            StabilityVariant::unnormalized(SolverKind::Intra2Ac),
        ],
        trials: 12,
        seed: 5,
        ..Default::default()
    };
    let a = run_stability(&cfg);
    let b = run_stability(&cfg);
    assert_eq!(a.records.len(), 36);
    assert_eq!(a.summaries.len(), 3);
    for (x, y) in a.records.iter().zip(&b.records) {
        assert_eq!(
            (x.trial, &x.solver, x.eps_r_chordal.to_bits()),
            (y.trial, &y.solver, y.eps_r_chordal.to_bits())
        );
    }
    for s in &a.summaries {
        assert!(
            s.median_eps_r_chordal < 1e-8,
            "{}: {}",
            s.solver,
            s.median_eps_r_chordal
        );
        assert_eq!(s.hist_log10_eps_r_chordal.total(), s.trials - s.failures);
        assert!(s.hist_log10_eps_r_chordal.mode().unwrap() < -8.0);
    }
    // paired seeds: the same motion for every variant
    let n = a
        .records
        .iter()
        .filter(|r| r.solver == "2ac-intra-unnormalized")
        .count();
    assert_eq!(n, 12);
}

#[test]
fn noise_sweep_rows_and_csv() {
    let cfg = NoiseSweepConfig {
        solvers: vec![SolverKind::Inter56],
        sigmas: vec![0.0, 1.0],
        trials: 4,
        seed: 1,
        ..Default::default()
    };
    let r = run_noise_sweep(&cfg);
    assert_eq!(r.records.len(), 8);
    let s0 = r.summary("2ac-inter-56", 0.0).unwrap();
    let s1 = r.summary("2ac-inter-56", 1.0).unwrap();
    assert!(s0.median_eps_r_deg < 1e-6);
    assert!(s1.median_eps_r_deg > s0.median_eps_r_deg);
    let mut buf = Vec::new();
    r.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "trial,solver,eps_R_deg,eps_t,eps_t_dir_deg,eps_R_chordal,runtime_us"
    );
    assert_eq!(lines.len(), 9);
    assert!(lines[1].starts_with("0,2ac-inter-56@0,"));
    assert!(lines[8].starts_with("3,2ac-inter-56@1,"));
    let json: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
    assert_eq!(json["seed"], 1);
}

#[test]
fn thread_cap_does_not_change_results() {
    let out = par_trials(10, |k| k * k);
    assert_eq!(out, (0..10).map(|k| k * k).collect::<Vec<_>>());
}

#[test]
fn synthetic_file_round_trip() {
    for pairing in [Pairing::Mono, Pairing::Inter, Pairing::Intra] {
        let scene = synth_scene(
            &SyntheticConfig {
                pairing,
                sigma: 0.7,
                ..Default::default()
            },
            2,
        )
        .unwrap();
        let f = CorrespondenceFile::from_scene(&scene);
        let text = f.to_json();
        let back = CorrespondenceFile::parse(&text).unwrap();
        assert_eq!(back.to_json(), text);
        assert_eq!(back.ground_truth_pose().unwrap(), scene.pose);
    }
}

#[test]
fn noise_free_scene_satisfies_constraints() {
    for pairing in [Pairing::Mono, Pairing::Inter, Pairing::Intra] {
        let scene = synth_scene(
            &SyntheticConfig {
                pairing,
                ..Default::default()
            },
            9,
        )
        .unwrap();
        for ac in &scene.acs {
            let e = scene
                .rig
                .generalized_essential(ac.cam_i, ac.cam_j, &scene.pose)
                .unwrap();
            let r = gcam_pose::geometry::affine_residuals(&e, ac);
            assert!(r.iter().all(|v| v.abs() < 1e-9), "{r:?}");
        }
    }
}
