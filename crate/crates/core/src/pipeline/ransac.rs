//! RANSAC around the minimal solvers.

use crate::geometry::{AffineCorrespondence, PointCorrespondence, Rig};
use crate::solver::minimal::midpoint_depths;
use crate::solver::{Candidate, SampleLayout, SolverConfig, SolverKind};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RansacError {
    #[error("no hypothesis produced a model")]
    NoModelFound,
    #[error("not enough correspondences for a {0} sample")]
    InsufficientData(String),
    #[error("invalid RANSAC configuration: {0}")]
    InvalidConfig(String),
}

/// Iterations needed to draw one all-inlier sample of size `s` with
/// confidence `p` when a fraction `eps` of the data are outliers, rounded to
/// the nearest integer and at least 1.
pub fn ransac_iterations(p: f64, eps: f64, s: usize) -> u64 {
    let w = (1.0 - eps).clamp(0.0, 1.0).powi(s as i32);
    if w >= 1.0 {
        return 1;
    }
    if w <= 0.0 {
        return u64::MAX;
    }
    let n = (1.0 - p).ln() / (-w).ln_1p();
    if !n.is_finite() {
        return u64::MAX;
    }
    (n.round() as u64).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RansacConfig {
    pub confidence: f64,
    /// Inlier threshold on the epipolar angle (degrees).
    pub threshold_deg: f64,
    pub max_iterations: u64,
    pub seed: u64,
}

impl Default for RansacConfig {
    fn default() -> Self {
        Self {
            confidence: 0.99,
            threshold_deg: 0.1,
            max_iterations: 5000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RansacResult {
    pub best: Candidate,
    pub inliers: Vec<bool>,
    pub inlier_count: usize,
    /// Samples drawn.
    pub iterations: u64,
    /// Index of the sample that produced `best`.
    pub best_iteration: u64,
}

/// Angle (degrees) between each bearing and its epipolar plane, the larger
/// of the two views. `e` maps view-1 bearings to view-2 epipolar normals.
pub fn epipolar_angle(e: &nalgebra::Matrix3<f64>, pc: &PointCorrespondence) -> f64 {
    let one = |b: &nalgebra::Vector3<f64>, n: nalgebra::Vector3<f64>| {
        let d = b.norm() * n.norm();
        if d == 0.0 {
            90.0
        } else {
            (b.dot(&n).abs() / d).min(1.0).asin().to_degrees()
        }
    };
    one(&pc.xp, e * pc.x).max(one(&pc.x, e.transpose() * pc.xp))
}

/// Epipolar angles of all correspondences under `cand`; points that
/// triangulate behind either camera get an infinite angle.
pub fn residual_angles(rig: &Rig, cand: &Candidate, pcs: &[PointCorrespondence]) -> Vec<f64> {
    pcs.iter()
        .map(|pc| {
            let Ok(pair) = rig.camera_pair_pose(pc.cam_i, pc.cam_j, &cand.pose) else {
                return f64::INFINITY;
            };
            match midpoint_depths(&pair.rotation, &pair.translation, &pc.x, &pc.xp) {
                Some((a, b)) if a > 0.0 && b > 0.0 => epipolar_angle(&pair.essential(), pc),
                _ => f64::INFINITY,
            }
        })
        .collect()
}

/// Draws minimal samples with the camera-pair structure a solver needs:
/// one `(i, j)` and one `(j, i)` group for inter solvers, two distinct
/// intra-camera groups for intra solvers, one intra-camera group for the
/// monocular solver and any two or more pairs for the linear solver.
pub struct MinimalSampler {
    layout: SampleLayout,
    pairs: Vec<(usize, usize)>,
    choices: Vec<(Vec<usize>, Vec<usize>)>,
}

impl MinimalSampler {
    pub fn new(kind: SolverKind, pcs: &[PointCorrespondence]) -> Result<Self, RansacError> {
        let mut by_pair: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (k, pc) in pcs.iter().enumerate() {
            by_pair.entry((pc.cam_i, pc.cam_j)).or_default().push(k);
        }
        let layout = kind.sample_layout();
        let choices = choices(&by_pair, layout);
        if choices.is_empty() {
            return Err(RansacError::InsufficientData(kind.name().into()));
        }
        Ok(Self {
            layout,
            pairs: pcs.iter().map(|p| (p.cam_i, p.cam_j)).collect(),
            choices,
        })
    }

    /// One sample drawn from ChaCha8 seeded with `seed`.
    pub fn draw_seeded(&self, seed: u64) -> Vec<usize> {
        self.draw(&mut ChaCha8Rng::seed_from_u64(seed))
    }

    /// Indices of one minimal sample.
    pub fn draw<R: Rng>(&self, rng: &mut R) -> Vec<usize> {
        let (g, h) = &self.choices[rng.random_range(0..self.choices.len())];
        let pick = |rng: &mut R, g: &[usize], k: usize| -> Vec<usize> {
            sample(rng, g.len(), k).into_iter().map(|i| g[i]).collect()
        };
        match self.layout {
            SampleLayout::SamePair(k) => pick(rng, g, k),
            SampleLayout::Inter(k) | SampleLayout::Intra(k) => {
                let mut s = pick(rng, g, k);
                s.extend(pick(rng, h, k));
                s
            }
            SampleLayout::Any(k) => {
                // redraw until the sample spans two camera pairs
                for _ in 0..100 {
                    let s = pick(rng, g, k);
                    if s.iter().any(|&i| self.pairs[i] != self.pairs[s[0]]) {
                        return s;
                    }
                }
                pick(rng, g, k)
            }
        }
    }
}

type Choice = (Vec<usize>, Vec<usize>);

fn choices(by_pair: &BTreeMap<(usize, usize), Vec<usize>>, layout: SampleLayout) -> Vec<Choice> {
    let mut out = Vec::new();
    let pairs: Vec<_> = by_pair.iter().collect();
    match layout {
        SampleLayout::SamePair(k) => {
            for (&(i, j), g) in &pairs {
                if i == j && g.len() >= k {
                    out.push(((*g).clone(), Vec::new()));
                }
            }
        }
        SampleLayout::Inter(k) => {
            for (&(i, j), g) in &pairs {
                if i < j {
                    if let Some(h) = by_pair.get(&(j, i)) {
                        if g.len() >= k && h.len() >= k {
                            out.push(((*g).clone(), h.clone()));
                        }
                    }
                }
            }
        }
        SampleLayout::Intra(k) => {
            for (a, (&(i, j), g)) in pairs.iter().enumerate() {
                for (&(u, v), h) in &pairs[a + 1..] {
                    if i == j && u == v && g.len() >= k && h.len() >= k {
                        out.push(((*g).clone(), (*h).clone()));
                    }
                }
            }
        }
        SampleLayout::Any(k) => {
            let total: usize = pairs.iter().map(|(_, g)| g.len()).sum();
            if pairs.len() >= 2 && total >= k {
                out.push((
                    pairs.iter().flat_map(|(_, g)| g.iter().copied()).collect(),
                    Vec::new(),
                ));
            }
        }
    }
    out
}

/// Name of the residual behind the inlier threshold.
pub const INLIER_METRIC: &str = "max epipolar-plane angle over both views, positive depths";

/// Robust estimate with `kind` on `acs`; point solvers use the point part.
pub fn ransac(
    kind: SolverKind,
    rig: &Rig,
    acs: &[AffineCorrespondence],
    solver_cfg: &SolverConfig,
    cfg: &RansacConfig,
) -> Result<RansacResult, RansacError> {
    let pcs: Vec<PointCorrespondence> = acs.iter().map(|a| a.point()).collect();
    ransac_on(kind, rig, acs, &pcs, solver_cfg, cfg)
}

/// Robust estimate from point correspondences `pcs`, with the matching
/// affine correspondences `acs` for AC solvers (may be empty otherwise).
pub fn ransac_on(
    kind: SolverKind,
    rig: &Rig,
    acs: &[AffineCorrespondence],
    pcs: &[PointCorrespondence],
    solver_cfg: &SolverConfig,
    cfg: &RansacConfig,
) -> Result<RansacResult, RansacError> {
    if !(cfg.confidence > 0.0 && cfg.confidence < 1.0) {
        return Err(RansacError::InvalidConfig(
            "confidence must be in (0, 1)".into(),
        ));
    }
    if !(cfg.threshold_deg > 0.0) {
        return Err(RansacError::InvalidConfig(
            "threshold must be positive".into(),
        ));
    }
    if kind.uses_affine() && acs.len() != pcs.len() {
        return Err(RansacError::InsufficientData(format!(
            "{} needs affine correspondences",
            kind.name()
        )));
    }
    let sampler = MinimalSampler::new(kind, pcs)?;
    let s = kind.sample_size();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut bound = cfg.max_iterations;
    let mut best: Option<(usize, Candidate, Vec<bool>, u64)> = None;
    let mut k = 0u64;
    while k < bound {
        let idx = sampler.draw(&mut rng);
        let sample_acs: Vec<AffineCorrespondence> = if kind.uses_affine() {
            idx.iter().map(|&i| acs[i]).collect()
        } else {
            Vec::new()
        };
        let sample_pcs: Vec<PointCorrespondence> = idx.iter().map(|&i| pcs[i]).collect();
        if let Ok(set) = kind.solve(rig, &sample_acs, &sample_pcs, solver_cfg) {
            for cand in set.candidates {
                let inl: Vec<bool> = residual_angles(rig, &cand, pcs)
                    .into_iter()
                    .map(|a| a <= cfg.threshold_deg)
                    .collect();
                let n = inl.iter().filter(|&&b| b).count();
                // strict improvement keeps the earliest hypothesis on ties
                if best.as_ref().is_none_or(|b| n > b.0) {
                    let eps = 1.0 - n as f64 / pcs.len() as f64;
                    bound = ransac_iterations(cfg.confidence, eps, s).min(cfg.max_iterations);
                    best = Some((n, cand, inl, k));
                }
            }
        }
        k += 1;
    }
    let (inlier_count, best, inliers, best_iteration) = match best {
        Some(b) if b.0 >= s => b,
        _ => return Err(RansacError::NoModelFound),
    };
    Ok(RansacResult {
        best,
        inliers,
        inlier_count,
        iterations: k,
        best_iteration,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iteration_counts() {
        assert_eq!(ransac_iterations(0.99, 0.5, 17), 603_607);
        assert_eq!(ransac_iterations(0.99, 0.5, 8), 1177);
        assert_eq!(ransac_iterations(0.99, 0.5, 6), 292);
        assert_eq!(ransac_iterations(0.99, 0.5, 2), 16);
        assert_eq!(ransac_iterations(0.99, 0.0, 2), 1);
    }

    #[test]
    fn epipolar_angle_zero_on_plane() {
        let pose = crate::geometry::RelativePose::new(
            crate::geometry::axis_angle(&nalgebra::Vector3::y(), 0.1),
            nalgebra::Vector3::new(1.0, 0.0, 0.2),
        );
        let x = nalgebra::Vector3::new(0.1, -0.2, 1.0);
        let xw = 5.0 * x;
        let xc = pose.rotation * xw + pose.translation;
        let pc = PointCorrespondence {
            x,
            xp: xc / xc.z,
            cam_i: 0,
            cam_j: 0,
        };
        assert!(epipolar_angle(&pose.essential(), &pc) < 1e-9);
        let off = PointCorrespondence {
            xp: pc.xp + nalgebra::Vector3::new(0.0, 0.01, 0.0),
            ..pc
        };
        assert!(epipolar_angle(&pose.essential(), &off) > 0.1);
    }
}
