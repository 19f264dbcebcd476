use gcam_pose::constraints::rotation_angle_constraint;
use gcam_pose::geometry::*;
use gcam_pose::pipeline::metrics::*;
use gcam_pose::polynomial::{self, Reals};
use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;

fn vec3(r: f64) -> impl Strategy<Value = Vector3<f64>> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| Vector3::new(x, y, z))
}

fn unit() -> impl Strategy<Value = Vector3<f64>> {
    vec3(1.0)
        .prop_filter("nonzero", |v| v.norm() > 0.1)
        .prop_map(|v| v.normalize())
}

fn rotation() -> impl Strategy<Value = Matrix3<f64>> {
    (unit(), -3.0..3.0f64).prop_map(|(a, t)| axis_angle(&a, t))
}

fn pose() -> impl Strategy<Value = RelativePose> {
    (rotation(), vec3(5.0)).prop_map(|(r, t)| RelativePose::new(r, t))
}

fn rig() -> impl Strategy<Value = Rig> {
    prop::collection::vec((rotation(), vec3(1.0)), 1..4)
        .prop_map(|cs| Rig::new(cs.into_iter().map(|(q, s)| RigCamera::new(q, s)).collect()))
}

fn orth_err(r: &Matrix3<f64>) -> f64 {
    (r.transpose() * r - Matrix3::identity()).norm()
}

proptest! {
    #[test]
    fn cayley_rotation_is_orthonormal(q in vec3(50.0)) {
        let r = cayley_to_rotation(&q);
        prop_assert!(orth_err(&r) < 1e-12);
        prop_assert!((r.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scaled_cayley_matches_polynomial_numerator(q in vec3(3.0)) {
        let scaled = cayley_to_rotation(&q) * (1.0 + q.norm_squared());
        let num = polynomial::cayley_numerator(Reals);
        for r in 0..3 {
            for c in 0..3 {
                let v = num[r][c].evaluate([q.x, q.y, q.z]);
                prop_assert!((v - scaled[(r, c)]).abs() < 1e-12 * (1.0 + q.norm_squared()));
                prop_assert!((v - cayley_numerator(&q)[(r, c)]).abs() < 1e-12 * (1.0 + q.norm_squared()));
            }
        }
    }

    #[test]
    fn cayley_round_trip(r in rotation()) {
        let q = rotation_to_cayley(&r).unwrap();
        prop_assert!((cayley_to_rotation(&q) - r).norm() < 1e-9);
    }

    #[test]
    fn generalized_essential_matches_pair_pose(rig in rig(), p in pose(), i in 0usize..4, j in 0usize..4) {
        let (i, j) = (i % rig.len(), j % rig.len());
        let g = rig.generalized_essential(i, j, &p).unwrap();
        let e = rig.camera_pair_pose(i, j, &p).unwrap().essential();
        prop_assert!((g - e).norm() <= 1e-12 * (1.0 + e.norm()));
    }

    #[test]
    fn frame_normalization(s1 in vec3(2.0), s2 in vec3(2.0), p in pose()) {
        prop_assume!((s1 - s2).norm() > 1e-3);
        let g = normalize_rig_frame(&s1, &s2).unwrap();
        prop_assert!(orth_err(&g.rotation) < 1e-12);
        let l = (s2 - s1).norm();
        let d = Vector3::new(1.0, 1.0, 1.0) * (l / (2.0 * 3f64.sqrt()));
        prop_assert!((g.rotation * s1 + g.translation + d).norm() < 1e-9);
        prop_assert!((g.rotation * s2 + g.translation - d).norm() < 1e-9);
        let back = g.pose_to_original(&g.pose_to_new(&p));
        prop_assert!((back.rotation - p.rotation).norm() < 1e-12);
        prop_assert!((back.translation - p.translation).norm() < 1e-12);
    }

    #[test]
    fn metrics_invariant_to_rigid_conjugation(a in pose(), b in pose(), g in rotation(), s in vec3(3.0)) {
        // the same change of frame applied to both motions
        let tf = RigTransform { rotation: g, translation: s };
        let (ga, gb) = (tf.pose_to_new(&a), tf.pose_to_new(&b));
        prop_assert!((rotation_error(&a.rotation, &b.rotation) - rotation_error(&ga.rotation, &gb.rotation)).abs() < 1e-7);
        prop_assert!((chordal_error(&a.rotation, &b.rotation) - chordal_error(&ga.rotation, &gb.rotation)).abs() < 1e-12);
        // rotation-only conjugation keeps translation norms and angles
        let ra = RelativePose::new(g * a.rotation * g.transpose(), g * a.translation);
        let rb = RelativePose::new(g * b.rotation * g.transpose(), g * b.translation);
        prop_assert!((translation_error(&a.translation, &b.translation) - translation_error(&ra.translation, &rb.translation)).abs() < 1e-12);
        if let (Ok(x), Ok(y)) = (translation_direction_error(&a.translation, &b.translation), translation_direction_error(&ra.translation, &rb.translation)) {
            prop_assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn translation_error_symmetric(a in vec3(5.0), b in vec3(5.0)) {
        prop_assert_eq!(translation_error(&a, &b), translation_error(&b, &a));
        prop_assert!(translation_error(&a, &b) <= 2.0 + 1e-15);
    }

    #[test]
    fn translation_error_of_scaled_vector(t in vec3(5.0), lambda in 1e-3..1e3f64) {
        prop_assume!(t.norm() > 1e-6);
        let want = 2.0 * (1.0 - lambda).abs() / (1.0 + lambda);
        prop_assert!((translation_error(&t, &(lambda * t)) - want).abs() < 1e-12);
    }

    #[test]
    fn rotation_error_matches_axis_angle(r in rotation(), a in unit(), theta in 0.0..3.1f64) {
        let r2 = axis_angle(&a, theta) * r;
        prop_assert!((rotation_error(&r, &r2) - theta.to_degrees()).abs() < 1e-6);
    }

    #[test]
    fn angle_constraint_vanishes_at_cayley(a in unit(), theta in -3.0..3.0f64) {
        let p = rotation_angle_constraint(theta).unwrap();
        let q = rotation_to_cayley(&axis_angle(&a, theta)).unwrap();
        prop_assert!(p.evaluate([q.x, q.y, q.z]).abs() < 1e-10 * (1.0 + q.norm_squared()));
    }
}

#[test]
fn angle_constraint_examples() {
    let zero = rotation_angle_constraint(0.0).unwrap();
    assert_eq!(
        zero,
        polynomial::cayley_scale(Reals).sub(&polynomial::Poly3::constant(Reals, 1.0))
    );
    let right = rotation_angle_constraint(std::f64::consts::FRAC_PI_2).unwrap();
    for q in [[1.0, 0.0, 0.0], [0.0, 0.6, 0.8], [0.3, 0.4, 0.5]] {
        let want = q[0] * q[0] + q[1] * q[1] + q[2] * q[2] - 1.0;
        assert!((right.evaluate(q) - want).abs() < 1e-12);
    }
    assert!(rotation_angle_constraint(std::f64::consts::PI).is_err());
}

#[test]
fn near_half_turn_has_no_cayley_vector() {
    let r = axis_angle(&Vector3::new(0.0, 0.0, 1.0), std::f64::consts::PI);
    assert!(rotation_to_cayley(&r).is_err());
}
