//! Synthetic scenes: a two-camera rig moving through a cube of random planes.
//!
//! Affine maps are measured the way a feature detector would: the corners of
//! a small square around the point are mapped to view 2 by the true
//! homography, all points get Gaussian pixel noise, a homography is refit to
//! the four noisy corner pairs and linearized at the noisy point.

use crate::geometry::{AffineCorrespondence, PointCorrespondence, RelativePose, Rig, RigCamera};
use nalgebra::{DMatrix, Matrix2, Matrix3, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, UnitSphere};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SyntheticError {
    #[error("no visible point found after {0} draws")]
    ResampleExhausted(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Direction of the rig motion before the rotation perturbation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Motion {
    /// Along the optical axis.
    Forward,
    /// Along the baseline.
    Sideways,
    /// Uniform on the sphere.
    Random,
}

/// Camera pairs of the generated ACs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pairing {
    /// Single camera, every AC is `(0, 0)`.
    Mono,
    /// Alternating `(0, 1)` and `(1, 0)`.
    Inter,
    /// Alternating `(0, 0)` and `(1, 1)`.
    Intra,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    /// Distance between the two rig cameras (m).
    pub baseline: f64,
    /// Length of the rig translation between the two frames (m).
    pub translation: f64,
    pub width: f64,
    pub height: f64,
    pub focal: f64,
    pub cube_min: [f64; 3],
    pub cube_max: [f64; 3],
    /// Random planes besides the ground plane.
    pub planes: usize,
    pub acs: usize,
    /// Height of the ground plane below the rig (m, y axis pointing down).
    pub ground_height: f64,
    /// Side of the square used to measure the affine map (px).
    pub side: f64,
    /// Pixel noise standard deviation.
    pub sigma: f64,
    pub motion: Motion,
    /// Uniform rotation perturbation per axis (degrees).
    pub perturbation_deg: f64,
    pub pairing: Pairing,
    /// Fraction of ACs replaced by gross outliers.
    pub outlier_ratio: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            baseline: 1.0,
            translation: 3.0,
            width: 640.0,
            height: 480.0,
            focal: 400.0,
            cube_min: [-5.0, -5.0, 10.0],
            cube_max: [5.0, 5.0, 20.0],
            planes: 50,
            acs: 100,
            ground_height: 1.65,
            side: 40.0,
            sigma: 0.0,
            motion: Motion::Random,
            perturbation_deg: 10.0,
            pairing: Pairing::Inter,
            outlier_ratio: 0.0,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<(), SyntheticError> {
        let bad = |m: &str| Err(SyntheticError::InvalidConfig(m.to_string()));
        if !(self.focal > 0.0 && self.width > 0.0 && self.height > 0.0) {
            return bad("camera dimensions must be positive");
        }
        if !(self.side > 0.0) || !(self.sigma >= 0.0) {
            return bad("side must be positive and sigma non-negative");
        }
        if !(self.baseline > 0.0) && self.pairing != Pairing::Mono {
            return bad("baseline must be positive for a rig");
        }
        if !(0.0..1.0).contains(&self.outlier_ratio) {
            return bad("outlier ratio must be in [0, 1)");
        }
        if (0..3).any(|k| self.cube_min[k] >= self.cube_max[k]) {
            return bad("empty cube");
        }
        Ok(())
    }

    /// Side lengths other than 30 and 40 px are allowed but unusual.
    pub fn nonstandard_side(&self) -> bool {
        self.side != 30.0 && self.side != 40.0
    }

    pub fn rig(&self) -> Rig {
        match self.pairing {
            Pairing::Mono => Rig::monocular(),
            _ => {
                let h = 0.5 * self.baseline;
                Rig::new(vec![
                    RigCamera::new(Matrix3::identity(), Vector3::new(-h, 0.0, 0.0)),
                    RigCamera::new(Matrix3::identity(), Vector3::new(h, 0.0, 0.0)),
                ])
            }
        }
    }

    fn pair(&self, k: usize) -> (usize, usize) {
        match (self.pairing, k % 2) {
            (Pairing::Mono, _) => (0, 0),
            (Pairing::Inter, 0) => (0, 1),
            (Pairing::Inter, _) => (1, 0),
            (Pairing::Intra, 0) => (0, 0),
            (Pairing::Intra, _) => (1, 1),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticScene {
    pub rig: Rig,
    pub pose: RelativePose,
    pub acs: Vec<AffineCorrespondence>,
    /// Indices of gross outliers in `acs`.
    pub outliers: Vec<usize>,
}

impl SyntheticScene {
    pub fn points(&self) -> Vec<PointCorrespondence> {
        self.acs.iter().map(|a| a.point()).collect()
    }
}

/// Rotation about x, then y, then z.
pub fn euler_xyz(ax: f64, ay: f64, az: f64) -> Matrix3<f64> {
    let (x, y, z) = (Vector3::x_axis(), Vector3::y_axis(), Vector3::z_axis());
    let r = |a: &nalgebra::Unit<Vector3<f64>>, t: f64| {
        *nalgebra::Rotation3::from_axis_angle(a, t).matrix()
    };
    r(&z, az) * r(&y, ay) * r(&x, ax)
}

/// Rig pose `X' = R X + t` for a rig whose frame at time k+1 sits at
/// `c` with orientation `W` in the frame at time k.
pub fn pose_from_motion(w: &Matrix3<f64>, c: &Vector3<f64>) -> RelativePose {
    let r = w.transpose();
    RelativePose::new(r, -(r * c))
}

/// Homography between normalized coordinates of camera pair `(i, j)` induced
/// by the plane `n . X = n . p` (rig frame at time k).
pub fn plane_homography(
    rig: &Rig,
    pose: &RelativePose,
    i: usize,
    j: usize,
    point: &Vector3<f64>,
    normal: &Vector3<f64>,
) -> Option<Matrix3<f64>> {
    let p = rig.camera_pair_pose(i, j, pose).ok()?;
    let ci = rig.camera(i).ok()?;
    let nc = ci.rotation.transpose() * normal;
    let d = normal.dot(&(point - ci.center));
    if d.abs() < 1e-9 {
        return None;
    }
    Some(p.rotation + p.translation * nc.transpose() / d)
}

/// Noise-free AC of the rig-frame point `x` on the plane with normal
/// `normal`, seen by camera `i` before and camera `j` after the motion.
/// `None` when the point is behind either camera.
pub fn exact_ac(
    rig: &Rig,
    pose: &RelativePose,
    i: usize,
    j: usize,
    x: &Vector3<f64>,
    normal: &Vector3<f64>,
) -> Option<AffineCorrespondence> {
    let ci = rig.camera(i).ok()?;
    let xi = ci.rotation.transpose() * (x - ci.center);
    let pair = rig.camera_pair_pose(i, j, pose).ok()?;
    let xj = pair.rotation * xi + pair.translation;
    if xi.z <= 1e-9 || xj.z <= 1e-9 {
        return None;
    }
    let h = plane_homography(rig, pose, i, j, x, normal)?;
    let a = affine_from_homography(&h, &Vector2::new(xi.x / xi.z, xi.y / xi.z))?;
    Some(AffineCorrespondence {
        x: xi / xi.z,
        xp: xj / xj.z,
        a,
        cam_i: i,
        cam_j: j,
    })
}

fn apply_h(h: &Matrix3<f64>, u: &Vector2<f64>) -> Option<Vector2<f64>> {
    let v = h * Vector3::new(u.x, u.y, 1.0);
    if v.z.abs() < 1e-12 {
        return None;
    }
    Some(Vector2::new(v.x / v.z, v.y / v.z))
}

/// Local affine map of `h` at `u`: the Jacobian of the projective warp.
pub fn affine_from_homography(h: &Matrix3<f64>, u: &Vector2<f64>) -> Option<Matrix2<f64>> {
    let w = h[(2, 0)] * u.x + h[(2, 1)] * u.y + h[(2, 2)];
    if w.abs() < 1e-12 {
        return None;
    }
    let up = apply_h(h, u)?;
    Some(Matrix2::from_fn(|a, b| (h[(a, b)] - up[a] * h[(2, b)]) / w))
}

fn normalizer(pts: &[Vector2<f64>]) -> Matrix3<f64> {
    let n = pts.len() as f64;
    let c = pts.iter().fold(Vector2::zeros(), |a, p| a + p) / n;
    let d = pts.iter().map(|p| (p - c).norm()).sum::<f64>() / n;
    let s = if d > 0.0 {
        std::f64::consts::SQRT_2 / d
    } else {
        1.0
    };
    Matrix3::new(s, 0.0, -s * c.x, 0.0, s, -s * c.y, 0.0, 0.0, 1.0)
}

/// Normalized direct linear transform from at least four point pairs.
pub fn fit_homography(src: &[Vector2<f64>], dst: &[Vector2<f64>]) -> Option<Matrix3<f64>> {
    if src.len() < 4 || src.len() != dst.len() {
        return None;
    }
    let (ts, td) = (normalizer(src), normalizer(dst));
    let mut a = DMatrix::<f64>::zeros(2 * src.len().max(5), 9);
    for (k, (s, d)) in src.iter().zip(dst).enumerate() {
        let s = ts * Vector3::new(s.x, s.y, 1.0);
        let d = td * Vector3::new(d.x, d.y, 1.0);
        let (x, y, u, v) = (s.x / s.z, s.y / s.z, d.x / d.z, d.y / d.z);
        let r1 = [-x, -y, -1.0, 0.0, 0.0, 0.0, u * x, u * y, u];
        let r2 = [0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v];
        for c in 0..9 {
            a[(2 * k, c)] = r1[c];
            a[(2 * k + 1, c)] = r2[c];
        }
    }
    let svd = a.svd(false, true);
    let k = svd.singular_values.imin();
    let h = svd.v_t?.row(k).transpose();
    let hn = Matrix3::from_row_slice(h.as_slice());
    let out = td.try_inverse()? * hn * ts;
    let s = out[(2, 2)];
    Some(if s.abs() > 1e-15 { out / s } else { out })
}

struct Plane {
    point: Vector3<f64>,
    normal: Vector3<f64>,
    ground: bool,
}

const MAX_DRAWS: usize = 1000;

fn sample_on_plane<R: Rng>(cfg: &SyntheticConfig, plane: &Plane, rng: &mut R) -> Vector3<f64> {
    if plane.ground {
        let x = rng.random_range(cfg.cube_min[0]..cfg.cube_max[0]);
        let z = rng.random_range(cfg.cube_min[2]..cfg.cube_max[2]);
        return Vector3::new(x, cfg.ground_height, z);
    }
    let n = plane.normal;
    let a = if n.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let u = n.cross(&a).normalize();
    let v = n.cross(&u);
    plane.point + u * rng.random_range(-1.0..1.0) + v * rng.random_range(-1.0..1.0)
}

struct Camera<'a> {
    cfg: &'a SyntheticConfig,
}

impl Camera<'_> {
    fn project(&self, xc: &Vector3<f64>) -> Option<Vector2<f64>> {
        if xc.z <= 1e-6 {
            return None;
        }
        let u = Vector2::new(
            self.cfg.focal * xc.x / xc.z + 0.5 * self.cfg.width,
            self.cfg.focal * xc.y / xc.z + 0.5 * self.cfg.height,
        );
        (u.x >= 0.0 && u.x < self.cfg.width && u.y >= 0.0 && u.y < self.cfg.height).then_some(u)
    }

    fn normalized(&self, u: &Vector2<f64>) -> Vector3<f64> {
        Vector3::new(
            (u.x - 0.5 * self.cfg.width) / self.cfg.focal,
            (u.y - 0.5 * self.cfg.height) / self.cfg.focal,
            1.0,
        )
    }

    fn k(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.cfg.focal,
            0.0,
            0.5 * self.cfg.width,
            0.0,
            self.cfg.focal,
            0.5 * self.cfg.height,
            0.0,
            0.0,
            1.0,
        )
    }
}

/// Draw the rig pose for `cfg` from `rng`.
pub fn random_pose<R: Rng>(cfg: &SyntheticConfig, rng: &mut R) -> RelativePose {
    let dir = match cfg.motion {
        Motion::Forward => Vector3::z(),
        Motion::Sideways => Vector3::x(),
        Motion::Random => Vector3::from(UnitSphere.sample(rng)),
    };
    let p = cfg.perturbation_deg.to_radians();
    let mut angle = || {
        if p > 0.0 {
            rng.random_range(-p..p)
        } else {
            0.0
        }
    };
    let (ax, ay, az) = (angle(), angle(), angle());
    pose_from_motion(&euler_xyz(ax, ay, az), &(dir * cfg.translation))
}

/// Generate a scene with the rig pose drawn from `cfg`.
pub fn synth_scene(cfg: &SyntheticConfig, seed: u64) -> Result<SyntheticScene, SyntheticError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pose = random_pose(cfg, &mut rng);
    synth_scene_with_pose(cfg, &pose, &mut rng)
}

/// Generate a scene for a given rig pose.
pub fn synth_scene_with_pose<R: Rng>(
    cfg: &SyntheticConfig,
    pose: &RelativePose,
    rng: &mut R,
) -> Result<SyntheticScene, SyntheticError> {
    cfg.validate()?;
    let rig = cfg.rig();
    let cam = Camera { cfg };
    let k = cam.k();
    let kinv = k.try_inverse().unwrap();
    let noise = Normal::new(0.0, cfg.sigma.max(0.0)).unwrap();
    // separate stream so the geometry does not depend on sigma
    let mut noise_rng = ChaCha8Rng::seed_from_u64(rng.random());
    let mut planes = vec![Plane {
        point: Vector3::new(0.0, cfg.ground_height, 0.0),
        normal: Vector3::y(),
        ground: true,
    }];
    for _ in 0..cfg.planes {
        let point = Vector3::from_fn(|a, _| rng.random_range(cfg.cube_min[a]..cfg.cube_max[a]));
        planes.push(Plane {
            point,
            normal: Vector3::from(UnitSphere.sample(rng)),
            ground: false,
        });
    }
    let n_ground = cfg.acs / 2;
    let mut acs = Vec::with_capacity(cfg.acs);
    for idx in 0..cfg.acs {
        let (i, j) = cfg.pair(idx);
        let pair = rig.camera_pair_pose(i, j, pose).expect("rig cameras");
        let ci = rig.cameras[i];
        let mut made = None;
        for draw in 0..MAX_DRAWS {
            // one AC per random plane, falling back to any plane when the
            // designated one stays out of view
            let plane = if idx < n_ground || cfg.planes == 0 {
                &planes[0]
            } else if draw < MAX_DRAWS / 2 {
                &planes[1 + (idx - n_ground) % cfg.planes]
            } else {
                &planes[1 + rng.random_range(0..cfg.planes)]
            };
            let x = sample_on_plane(cfg, plane, rng);
            let xi = ci.rotation.transpose() * (x - ci.center);
            let xj = pair.rotation * xi + pair.translation;
            let (Some(u1), Some(_)) = (cam.project(&xi), cam.project(&xj)) else {
                continue;
            };
            let Some(hn) = plane_homography(&rig, pose, i, j, &plane.point, &plane.normal) else {
                continue;
            };
            let hp = k * hn * kinv;
            if let Some(ac) = measure(cfg, &cam, &hp, &u1, &mut noise_rng, &noise) {
                made = Some(AffineCorrespondence {
                    cam_i: i,
                    cam_j: j,
                    ..ac
                });
                break;
            }
        }
        acs.push(made.ok_or(SyntheticError::ResampleExhausted(MAX_DRAWS))?);
    }
    let n_out = (cfg.outlier_ratio * cfg.acs as f64).round() as usize;
    let mut outliers: Vec<usize> = rand::seq::index::sample(rng, cfg.acs, n_out).into_vec();
    outliers.sort_unstable();
    for &o in &outliers {
        let u1 = Vector2::new(
            rng.random_range(0.0..cfg.width),
            rng.random_range(0.0..cfg.height),
        );
        let u2 = Vector2::new(
            rng.random_range(0.0..cfg.width),
            rng.random_range(0.0..cfg.height),
        );
        let ac = &mut acs[o];
        ac.x = cam.normalized(&u1);
        ac.xp = cam.normalized(&u2);
        ac.a = Matrix2::from_fn(|_, _| rng.random_range(-1.5..1.5));
    }
    Ok(SyntheticScene {
        rig,
        pose: *pose,
        acs,
        outliers,
    })
}

/// Measure one AC around pixel `u1` of view 1 using the pixel homography `hp`.
fn measure<R: Rng>(
    cfg: &SyntheticConfig,
    cam: &Camera<'_>,
    hp: &Matrix3<f64>,
    u1: &Vector2<f64>,
    rng: &mut R,
    noise: &Normal<f64>,
) -> Option<AffineCorrespondence> {
    let u2 = apply_h(hp, u1)?;
    let mut jitter = |u: Vector2<f64>| {
        if cfg.sigma > 0.0 {
            u + Vector2::new(noise.sample(rng), noise.sample(rng))
        } else {
            u
        }
    };
    let h = 0.5 * cfg.side;
    let corners = [(-h, -h), (h, -h), (h, h), (-h, h)].map(|(a, b)| u1 + Vector2::new(a, b));
    let mapped: Vec<Vector2<f64>> = corners
        .iter()
        .map(|c| apply_h(hp, c))
        .collect::<Option<_>>()?;
    let src: Vec<Vector2<f64>> = corners.iter().map(|&c| jitter(c)).collect();
    let dst: Vec<Vector2<f64>> = mapped.into_iter().map(&mut jitter).collect();
    let (n1, n2) = (jitter(*u1), jitter(u2));
    let a = if cfg.sigma > 0.0 {
        affine_from_homography(&fit_homography(&src, &dst)?, &n1)?
    } else {
        affine_from_homography(hp, u1)?
    };
    Some(AffineCorrespondence {
        x: cam.normalized(&n1),
        xp: cam.normalized(&n2),
        a,
        cam_i: 0,
        cam_j: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::affine_residuals;

    #[test]
    fn noise_free_acs_are_consistent() {
        for pairing in [Pairing::Mono, Pairing::Inter, Pairing::Intra] {
            let cfg = SyntheticConfig {
                pairing,
                ..Default::default()
            };
            let s = synth_scene(&cfg, 7).unwrap();
            assert_eq!(s.acs.len(), 100);
            for ac in &s.acs {
                let e = s
                    .rig
                    .generalized_essential(ac.cam_i, ac.cam_j, &s.pose)
                    .unwrap();
                for r in affine_residuals(&e, ac) {
                    assert!(r.abs() < 1e-9, "{pairing:?} residual {r}");
                }
            }
        }
    }

    #[test]
    fn homography_fit_recovers_exact_map() {
        let h = Matrix3::new(1.1, 0.02, 3.0, -0.05, 0.95, -2.0, 1e-4, -2e-4, 1.0);
        let src: Vec<Vector2<f64>> = [(10.0, 20.0), (50.0, 22.0), (48.0, 70.0), (12.0, 65.0)]
            .map(|(a, b)| Vector2::new(a, b))
            .to_vec();
        let dst: Vec<Vector2<f64>> = src.iter().map(|s| apply_h(&h, s).unwrap()).collect();
        let fit = fit_homography(&src, &dst).unwrap();
        assert!((fit - h).norm() < 1e-9);
    }

    #[test]
    fn affine_matches_finite_differences() {
        let h = Matrix3::new(1.1, 0.02, 0.3, -0.05, 0.95, -0.2, 0.1, -0.2, 1.0);
        let u = Vector2::new(0.3, -0.2);
        let a = affine_from_homography(&h, &u).unwrap();
        let step = 1e-6;
        for b in 0..2 {
            let mut up = u;
            let mut um = u;
            up[b] += step;
            um[b] -= step;
            let d = (apply_h(&h, &up).unwrap() - apply_h(&h, &um).unwrap()) / (2.0 * step);
            for a_ in 0..2 {
                assert!((d[a_] - a[(a_, b)]).abs() < 1e-6);
            }
        }
    }
}
