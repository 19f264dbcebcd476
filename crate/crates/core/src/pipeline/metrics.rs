//! Pose error metrics.

use crate::geometry::RelativePose;
use nalgebra::{Matrix3, Vector3};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("translation too small for a direction error")]
    ZeroTranslation,
}

/// Angle of `R_gt R^T` in degrees.
pub fn rotation_error(r_gt: &Matrix3<f64>, r: &Matrix3<f64>) -> f64 {
    let m = r_gt * r.transpose();
    // atan2 keeps small angles accurate where acos of the trace does not
    let s = 0.5 * crate::geometry::vee(&(m - m.transpose())).norm();
    let c = 0.5 * (m.trace() - 1.0);
    s.atan2(c).to_degrees()
}

/// Frobenius distance between two rotations.
pub fn chordal_error(r_gt: &Matrix3<f64>, r: &Matrix3<f64>) -> f64 {
    (r_gt - r).norm()
}

/// `2 |t_gt - t| / (|t_gt| + |t|)`.
pub fn translation_error(t_gt: &Vector3<f64>, t: &Vector3<f64>) -> f64 {
    let d = t_gt.norm() + t.norm();
    if d == 0.0 {
        0.0
    } else {
        2.0 * (t_gt - t).norm() / d
    }
}

/// Angle between translation directions in degrees.
pub fn translation_direction_error(
    t_gt: &Vector3<f64>,
    t: &Vector3<f64>,
) -> Result<f64, MetricError> {
    let (a, b) = (t_gt.norm(), t.norm());
    if a < 1e-12 || b < 1e-12 {
        return Err(MetricError::ZeroTranslation);
    }
    Ok((t_gt.dot(t) / (a * b)).clamp(-1.0, 1.0).acos().to_degrees())
}

/// Both translation errors.
pub fn translation_errors(
    t_gt: &Vector3<f64>,
    t: &Vector3<f64>,
) -> Result<(f64, f64), MetricError> {
    Ok((
        translation_error(t_gt, t),
        translation_direction_error(t_gt, t)?,
    ))
}

/// Errors of one estimated pose against the ground truth.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PoseErrors {
    pub eps_r_deg: f64,
    pub eps_t: f64,
    pub eps_t_dir_deg: f64,
    pub eps_r_chordal: f64,
}

impl PoseErrors {
    pub fn of(gt: &RelativePose, est: &RelativePose) -> Self {
        Self {
            eps_r_deg: rotation_error(&gt.rotation, &est.rotation),
            eps_t: translation_error(&gt.translation, &est.translation),
            eps_t_dir_deg: translation_direction_error(&gt.translation, &est.translation)
                .unwrap_or(f64::NAN),
            eps_r_chordal: chordal_error(&gt.rotation, &est.rotation),
        }
    }
}

/// Errors of the candidate closest to the ground truth (smallest chordal
/// error); `None` when there are no candidates.
pub fn best_candidate_errors<'a>(
    gt: &RelativePose,
    candidates: impl IntoIterator<Item = &'a RelativePose>,
) -> Option<PoseErrors> {
    candidates
        .into_iter()
        .map(|p| PoseErrors::of(gt, p))
        .min_by(|a, b| {
            a.eps_r_chordal
                .total_cmp(&b.eps_r_chordal)
                .then(a.eps_t.total_cmp(&b.eps_t))
        })
}

/// Median of finite values; NaN for an empty input.
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
