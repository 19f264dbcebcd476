//! JSON correspondence files.
//!
//! ```json
//! {"rig": [{"Q": [9 numbers, row-major], "s": [3 numbers]}],
//!  "correspondences": [{"type": "ac", "x": [u, v, 1], "xp": [u, v, 1],
//!                       "cam_i": 0, "cam_j": 1, "A": [a11, a12, a21, a22]}],
//!  "ground_truth": {"R": [9 numbers], "t": [3 numbers], "outliers": [indices]}}
//! ```
//!
//! Unknown fields are rejected. `outliers` is optional.

use crate::geometry::{AffineCorrespondence, PointCorrespondence, RelativePose, Rig, RigCamera};
use crate::pipeline::synthetic::SyntheticScene;
use nalgebra::{Matrix2, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("malformed correspondence file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid correspondence file: {0}")]
    Invalid(String),
    #[error("correspondence {0} is a point correspondence, an affine one is required")]
    NotAffine(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RigEntry {
    #[serde(rename = "Q")]
    pub q: [f64; 9],
    pub s: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryKind {
    Ac,
    Pc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrespondenceEntry {
    #[serde(rename = "type")]
    pub kind: EntryKind,
    pub x: [f64; 3],
    pub xp: [f64; 3],
    pub cam_i: usize,
    pub cam_j: usize,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<[f64; 4]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruth {
    #[serde(rename = "R")]
    pub r: [f64; 9],
    pub t: [f64; 3],
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub outliers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrespondenceFile {
    pub rig: Vec<RigEntry>,
    pub correspondences: Vec<CorrespondenceEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<GroundTruth>,
}

fn row_major(m: &Matrix3<f64>) -> [f64; 9] {
    std::array::from_fn(|k| m[(k / 3, k % 3)])
}

fn from_row_major(v: &[f64; 9]) -> Matrix3<f64> {
    Matrix3::from_row_slice(v)
}

const ROTATION_TOL: f64 = 1e-6;

fn check_rotation(m: &Matrix3<f64>, what: &str) -> Result<(), DatasetError> {
    let orth = (m.transpose() * m - Matrix3::identity()).norm();
    if !(orth <= ROTATION_TOL && (m.determinant() - 1.0).abs() <= ROTATION_TOL) {
        return Err(DatasetError::Invalid(format!("{what} is not a rotation")));
    }
    Ok(())
}

impl CorrespondenceFile {
    pub fn from_scene(scene: &SyntheticScene) -> Self {
        Self {
            rig: scene
                .rig
                .cameras
                .iter()
                .map(|c| RigEntry {
                    q: row_major(&c.rotation),
                    s: c.center.into(),
                })
                .collect(),
            correspondences: scene
                .acs
                .iter()
                .map(|a| CorrespondenceEntry {
                    kind: EntryKind::Ac,
                    x: a.x.into(),
                    xp: a.xp.into(),
                    cam_i: a.cam_i,
                    cam_j: a.cam_j,
                    a: Some([a.a[(0, 0)], a.a[(0, 1)], a.a[(1, 0)], a.a[(1, 1)]]),
                })
                .collect(),
            ground_truth: Some(GroundTruth {
                r: row_major(&scene.pose.rotation),
                t: scene.pose.translation.into(),
                outliers: scene.outliers.clone(),
            }),
        }
    }

    /// Parse and validate.
    pub fn parse(s: &str) -> Result<Self, DatasetError> {
        let f: Self = serde_json::from_str(s)?;
        f.validate()?;
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("finite numbers serialize");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        let bad = |m: String| Err(DatasetError::Invalid(m));
        if self.rig.is_empty() {
            return bad("rig has no cameras".into());
        }
        for (k, c) in self.rig.iter().enumerate() {
            if c.q.iter().chain(&c.s).any(|v| !v.is_finite()) {
                return bad(format!("camera {k} has non-finite extrinsics"));
            }
            check_rotation(&from_row_major(&c.q), &format!("Q of camera {k}"))?;
        }
        for (k, e) in self.correspondences.iter().enumerate() {
            if e.x[2] != 1.0 || e.xp[2] != 1.0 {
                return bad(format!("correspondence {k}: x[2] and xp[2] must be 1"));
            }
            if e.x.iter().chain(&e.xp).any(|v| !v.is_finite()) {
                return bad(format!("correspondence {k} has non-finite coordinates"));
            }
            if e.cam_i >= self.rig.len() || e.cam_j >= self.rig.len() {
                return bad(format!("correspondence {k} refers to a missing camera"));
            }
            match (e.kind, &e.a) {
                (EntryKind::Ac, None) => return bad(format!("correspondence {k}: ac without A")),
                (EntryKind::Pc, Some(_)) => return bad(format!("correspondence {k}: pc with A")),
                (EntryKind::Ac, Some(a)) if a.iter().any(|v| !v.is_finite()) => {
                    return bad(format!("correspondence {k} has a non-finite A"))
                }
                _ => {}
            }
        }
        if let Some(gt) = &self.ground_truth {
            if gt.t.iter().any(|v| !v.is_finite()) {
                return bad("ground-truth translation is not finite".into());
            }
            check_rotation(&from_row_major(&gt.r), "ground-truth R")?;
            if let Some(&o) = gt
                .outliers
                .iter()
                .find(|&&o| o >= self.correspondences.len())
            {
                return bad(format!("outlier index {o} out of range"));
            }
        }
        Ok(())
    }

    pub fn rig(&self) -> Rig {
        Rig::new(
            self.rig
                .iter()
                .map(|c| RigCamera::new(from_row_major(&c.q), Vector3::from(c.s)))
                .collect(),
        )
    }

    pub fn points(&self) -> Vec<PointCorrespondence> {
        self.correspondences
            .iter()
            .map(|e| PointCorrespondence {
                x: Vector3::from(e.x),
                xp: Vector3::from(e.xp),
                cam_i: e.cam_i,
                cam_j: e.cam_j,
            })
            .collect()
    }

    /// All correspondences as ACs; fails on the first PC.
    pub fn affine(&self) -> Result<Vec<AffineCorrespondence>, DatasetError> {
        self.correspondences
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let a = e.a.ok_or(DatasetError::NotAffine(k))?;
                Ok(AffineCorrespondence {
                    x: Vector3::from(e.x),
                    xp: Vector3::from(e.xp),
                    a: Matrix2::new(a[0], a[1], a[2], a[3]),
                    cam_i: e.cam_i,
                    cam_j: e.cam_j,
                })
            })
            .collect()
    }

    pub fn ground_truth_pose(&self) -> Option<RelativePose> {
        self.ground_truth
            .as_ref()
            .map(|g| RelativePose::new(from_row_major(&g.r), Vector3::from(g.t)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::synthetic::{synth_scene, SyntheticConfig};

    #[test]
    fn round_trip_is_idempotent() {
        let scene = synth_scene(
            &SyntheticConfig {
                acs: 6,
                sigma: 1.0,
                outlier_ratio: 0.3,
                ..Default::default()
            },
            4,
        )
        .unwrap();
        let f = CorrespondenceFile::from_scene(&scene);
        let s1 = f.to_json();
        let g = CorrespondenceFile::parse(&s1).unwrap();
        assert_eq!(f, g);
        assert_eq!(s1, g.to_json());
        assert_eq!(g.affine().unwrap(), scene.acs);
        assert_eq!(g.rig(), scene.rig);
    }

    #[test]
    fn rejects_bad_files() {
        let rig = r#""rig":[{"Q":[1,0,0,0,1,0,0,0,1],"s":[0,0,0]}]"#;
        let ok = format!(
            r#"{{{rig},"correspondences":[{{"type":"pc","x":[0.1,0.2,1],"xp":[0,0,1],"cam_i":0,"cam_j":0}}]}}"#
        );
        let f = CorrespondenceFile::parse(&ok).unwrap();
        assert!(matches!(f.affine(), Err(DatasetError::NotAffine(0))));
        for bad in [
            ok.replace("\"cam_j\":0", "\"cam_j\":0,\"extra\":1"),
            ok.replace("[0.1,0.2,1]", "[0.1,0.2,2]"),
            ok.replace("\"cam_i\":0", "\"cam_i\":1"),
            ok.replace("\"pc\"", "\"ac\""),
            ok.replace("[1,0,0,0,1,0,0,0,1]", "[2,0,0,0,1,0,0,0,1]"),
            ok.replace("\"s\":[0,0,0]", "\"s\":[0,0]"),
        ] {
            assert!(CorrespondenceFile::parse(&bad).is_err(), "{bad}");
        }
    }
}
