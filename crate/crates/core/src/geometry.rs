//! Rigid-body primitives: rotation parameterizations, rigs, correspondences
//! and essential matrices.

use nalgebra::{Matrix2, Matrix3, Vector3};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("rotation angle too close to pi for the Cayley parameterization (1 + trace = {0:e})")]
    NearPiRotation(f64),
    #[error("camera centers coincide; frame normalization undefined")]
    CoincidentCenters,
    #[error("camera index {index} out of range for a rig with {count} cameras")]
    CameraIndex { index: usize, count: usize },
}

/// Threshold on `1 + trace(R)` below which the inverse Cayley map is rejected.
pub const NEAR_PI_EPS: f64 = 1e-9;

pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

pub fn vee(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}

/// Unnormalized Cayley matrix `C(q)`; the rotation is `C / (1 + |q|^2)`.
pub fn cayley_numerator(q: &Vector3<f64>) -> Matrix3<f64> {
    let (x, y, z) = (q.x, q.y, q.z);
    Matrix3::new(
        1.0 + x * x - y * y - z * z,
        2.0 * x * y - 2.0 * z,
        2.0 * x * z + 2.0 * y,
        2.0 * x * y + 2.0 * z,
        1.0 - x * x + y * y - z * z,
        2.0 * y * z - 2.0 * x,
        2.0 * x * z - 2.0 * y,
        2.0 * y * z + 2.0 * x,
        1.0 - x * x - y * y + z * z,
    )
}

pub fn cayley_to_rotation(q: &Vector3<f64>) -> Matrix3<f64> {
    cayley_numerator(q) / (1.0 + q.norm_squared())
}

/// Inverse Cayley map `q = tan(theta/2) * axis`.
pub fn rotation_to_cayley(r: &Matrix3<f64>) -> Result<Vector3<f64>, GeometryError> {
    let den = 1.0 + r.trace();
    if den < NEAR_PI_EPS {
        return Err(GeometryError::NearPiRotation(den));
    }
    Ok(vee(&(r - r.transpose())) / den)
}

/// Rotation from a quaternion `(w, x, y, z)`; the input need not be unit length.
pub fn quaternion_to_rotation(q: [f64; 4]) -> Matrix3<f64> {
    let n = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
    let (w, x, y, z) = (q[0] / n, q[1] / n, q[2] / n, q[3] / n);
    Matrix3::new(
        w * w + x * x - y * y - z * z,
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        w * w - x * x + y * y - z * z,
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        w * w - x * x - y * y + z * z,
    )
}

/// Quaternion `(w, x, y, z)` equivalent to a Cayley vector.
pub fn cayley_to_quaternion(q: &Vector3<f64>) -> [f64; 4] {
    let n = (1.0 + q.norm_squared()).sqrt();
    [1.0 / n, q.x / n, q.y / n, q.z / n]
}

/// Rotation of `angle` radians about `axis` (need not be unit length).
pub fn axis_angle(axis: &Vector3<f64>, angle: f64) -> Matrix3<f64> {
    nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(*axis), angle).into_inner()
}

/// Relative motion of a rig or camera: `X' = R X + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativePose {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl RelativePose {
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self::new(Matrix3::identity(), Vector3::zeros())
    }

    pub fn essential(&self) -> Matrix3<f64> {
        skew(&self.translation) * self.rotation
    }
}

/// `E = [t]x R`.
pub fn essential_from_pose(r: &Matrix3<f64>, t: &Vector3<f64>) -> Matrix3<f64> {
    skew(t) * r
}

/// Rigid extrinsics of one camera: a point `X_c` in the camera frame is
/// `Q X_c + s` in the rig frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigCamera {
    pub rotation: Matrix3<f64>,
    pub center: Vector3<f64>,
}

impl RigCamera {
    pub fn new(rotation: Matrix3<f64>, center: Vector3<f64>) -> Self {
        Self { rotation, center }
    }
}

/// A calibrated multi-camera rig.
#[derive(Debug, Clone, PartialEq)]
pub struct Rig {
    pub cameras: Vec<RigCamera>,
}

impl Rig {
    pub fn new(cameras: Vec<RigCamera>) -> Self {
        Self { cameras }
    }

    /// A single camera at the rig origin.
    pub fn monocular() -> Self {
        Self::new(vec![RigCamera::new(Matrix3::identity(), Vector3::zeros())])
    }

    pub fn len(&self) -> usize {
        self.cameras.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cameras.is_empty()
    }

    pub fn camera(&self, i: usize) -> Result<&RigCamera, GeometryError> {
        self.cameras.get(i).ok_or(GeometryError::CameraIndex {
            index: i,
            count: self.cameras.len(),
        })
    }

    /// Pose from camera `i` at time k to camera `j` at time k+1.
    pub fn camera_pair_pose(
        &self,
        i: usize,
        j: usize,
        pose: &RelativePose,
    ) -> Result<RelativePose, GeometryError> {
        let (ci, cj) = (self.camera(i)?, self.camera(j)?);
        let qjt = cj.rotation.transpose();
        Ok(RelativePose::new(
            qjt * pose.rotation * ci.rotation,
            qjt * (pose.rotation * ci.center + pose.translation - cj.center),
        ))
    }

    /// Essential matrix between camera `i` and camera `j` of the moved rig.
    pub fn generalized_essential(
        &self,
        i: usize,
        j: usize,
        pose: &RelativePose,
    ) -> Result<Matrix3<f64>, GeometryError> {
        let (ci, cj) = (self.camera(i)?, self.camera(j)?);
        let r = pose.rotation;
        Ok(cj.rotation.transpose()
            * (r * skew(&ci.center) + skew(&(pose.translation - cj.center)) * r)
            * ci.rotation)
    }

    /// Apply a rigid change of rig frame `X -> G X`.
    pub fn transformed(&self, g: &RigTransform) -> Rig {
        Rig::new(
            self.cameras
                .iter()
                .map(|c| {
                    RigCamera::new(
                        g.rotation * c.rotation,
                        g.rotation * c.center + g.translation,
                    )
                })
                .collect(),
        )
    }
}

/// Rigid transform `X -> R X + t` of the rig reference frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl RigTransform {
    /// Express a rig motion given in the original frame in the new frame.
    pub fn pose_to_new(&self, p: &RelativePose) -> RelativePose {
        let (r0, t0) = (self.rotation, self.translation);
        let r = r0 * p.rotation * r0.transpose();
        RelativePose::new(r, r0 * p.translation + t0 - r * t0)
    }

    /// Inverse of [`RigTransform::pose_to_new`].
    pub fn pose_to_original(&self, p: &RelativePose) -> RelativePose {
        let (r0, t0) = (self.rotation, self.translation);
        let r0t = r0.transpose();
        RelativePose::new(
            r0t * p.rotation * r0,
            r0t * (p.rotation * t0 + p.translation - t0),
        )
    }
}

/// Rigid change of frame placing two camera centers symmetrically on the
/// `(1,1,1)` diagonal around the origin, `s1 -> -L/(2 sqrt 3)(1,1,1)` and
/// `s2 -> +L/(2 sqrt 3)(1,1,1)` with `L = |s2 - s1|`.
pub fn normalize_rig_frame(
    s1: &Vector3<f64>,
    s2: &Vector3<f64>,
) -> Result<RigTransform, GeometryError> {
    let d = s2 - s1;
    let l = d.norm();
    if l < 1e-12 {
        return Err(GeometryError::CoincidentCenters);
    }
    let a = d / l;
    let b = Vector3::new(1.0, 1.0, 1.0) / 3f64.sqrt();
    let v = a.cross(&b);
    let s = v.norm();
    let c = a.dot(&b);
    let r0 = if s > 1e-10 {
        let k = skew(&(v / s));
        Matrix3::identity() + s * k + (1.0 - c) * k * k
    } else if c > 0.0 {
        Matrix3::identity()
    } else {
        // antiparallel: half turn about an axis perpendicular to b
        let axis = Vector3::new(1.0, -1.0, 0.0);
        axis_angle(&axis, std::f64::consts::PI)
    };
    let mid = 0.5 * (s1 + s2);
    Ok(RigTransform {
        rotation: r0,
        translation: -(r0 * mid),
    })
}

/// A point seen in camera `cam_i` at time k and camera `cam_j` at time k+1,
/// in normalized homogeneous coordinates (third component 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointCorrespondence {
    pub x: Vector3<f64>,
    pub xp: Vector3<f64>,
    pub cam_i: usize,
    pub cam_j: usize,
}

/// A point correspondence with the 2x2 local affine map `A` in normalized
/// coordinates (the Jacobian of the view-1 to view-2 warp).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineCorrespondence {
    pub x: Vector3<f64>,
    pub xp: Vector3<f64>,
    pub a: Matrix2<f64>,
    pub cam_i: usize,
    pub cam_j: usize,
}

impl AffineCorrespondence {
    pub fn point(&self) -> PointCorrespondence {
        PointCorrespondence {
            x: self.x,
            xp: self.xp,
            cam_i: self.cam_i,
            cam_j: self.cam_j,
        }
    }

    /// Column `j` of `A` lifted to 3D: `(A_1j, A_2j, 0)`.
    pub fn a_col(&self, j: usize) -> Vector3<f64> {
        Vector3::new(self.a[(0, j)], self.a[(1, j)], 0.0)
    }
}

/// Residuals of the three affine constraints for essential matrix `e`:
/// `x'^T E x` and `x'^T E e_j + a_j^T E x` for `j = 1, 2`.
pub fn affine_residuals(e: &Matrix3<f64>, ac: &AffineCorrespondence) -> [f64; 3] {
    let ex = e * ac.x;
    let etxp = e.transpose() * ac.xp;
    [
        ac.xp.dot(&ex),
        etxp[0] + ac.a_col(0).dot(&ex),
        etxp[1] + ac.a_col(1).dot(&ex),
    ]
}

/// Smallest rotation angle (radians) of `a b^T`.
pub fn rotation_angle_between(a: &Matrix3<f64>, b: &Matrix3<f64>) -> f64 {
    let c = (((a * b.transpose()).trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    c.acos()
}
