//! Named solvers with a uniform calling convention.

use super::{
    solve_17pt_linear, solve_2ac_gcam, solve_2ac_mono, solve_6pt_gcam, SolutionSet, SolverConfig,
    SolverError, VariantChoice,
};
use crate::geometry::{AffineCorrespondence, PointCorrespondence, Rig};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolverKind {
    #[serde(rename = "2ac-mono")]
    Mono2Ac,
    #[serde(rename = "2ac-inter-56")]
    Inter56,
    #[serde(rename = "2ac-inter-48")]
    Inter48,
    #[serde(rename = "2ac-intra")]
    Intra2Ac,
    #[serde(rename = "6pt-inter-56")]
    SixPtInter56,
    #[serde(rename = "6pt-inter-48")]
    SixPtInter48,
    #[serde(rename = "6pt-intra")]
    SixPtIntra,
    #[serde(rename = "17pt")]
    Linear17,
}

/// How a minimal sample is drawn from the camera-pair groups.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleLayout {
    /// `k` correspondences of one intra-camera pair.
    SamePair(usize),
    /// `k` from `(i, j)` and `k` from `(j, i)`, `i != j`.
    Inter(usize),
    /// `k` from `(i, i)` and `k` from `(j, j)`, `i != j`.
    Intra(usize),
    /// `k` correspondences from at least two camera pairs.
    Any(usize),
}

impl SolverKind {
    pub const ALL: [SolverKind; 8] = [
        SolverKind::Mono2Ac,
        SolverKind::Inter56,
        SolverKind::Inter48,
        SolverKind::Intra2Ac,
        SolverKind::SixPtInter56,
        SolverKind::SixPtInter48,
        SolverKind::SixPtIntra,
        SolverKind::Linear17,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::Mono2Ac => "2ac-mono",
            SolverKind::Inter56 => "2ac-inter-56",
            SolverKind::Inter48 => "2ac-inter-48",
            SolverKind::Intra2Ac => "2ac-intra",
            SolverKind::SixPtInter56 => "6pt-inter-56",
            SolverKind::SixPtInter48 => "6pt-inter-48",
            SolverKind::SixPtIntra => "6pt-intra",
            SolverKind::Linear17 => "17pt",
        }
    }

    pub fn uses_affine(&self) -> bool {
        matches!(
            self,
            SolverKind::Mono2Ac | SolverKind::Inter56 | SolverKind::Inter48 | SolverKind::Intra2Ac
        )
    }

    pub fn sample_layout(&self) -> SampleLayout {
        match self {
            SolverKind::Mono2Ac => SampleLayout::SamePair(2),
            SolverKind::Inter56 | SolverKind::Inter48 => SampleLayout::Inter(1),
            SolverKind::Intra2Ac => SampleLayout::Intra(1),
            SolverKind::SixPtInter56 | SolverKind::SixPtInter48 => SampleLayout::Inter(3),
            SolverKind::SixPtIntra => SampleLayout::Intra(3),
            SolverKind::Linear17 => SampleLayout::Any(17),
        }
    }

    pub fn sample_size(&self) -> usize {
        match self.sample_layout() {
            SampleLayout::SamePair(k) | SampleLayout::Any(k) => k,
            SampleLayout::Inter(k) | SampleLayout::Intra(k) => 2 * k,
        }
    }

    fn variant(&self) -> VariantChoice {
        match self {
            SolverKind::Inter56 | SolverKind::SixPtInter56 => VariantChoice::E1,
            SolverKind::Inter48 | SolverKind::SixPtInter48 => VariantChoice::E1E2,
            _ => VariantChoice::Auto,
        }
    }

    /// Run the solver on a minimal set. AC solvers read `acs`, point solvers
    /// read `pcs`.
    pub fn solve(
        &self,
        rig: &Rig,
        acs: &[AffineCorrespondence],
        pcs: &[PointCorrespondence],
        cfg: &SolverConfig,
    ) -> Result<SolutionSet, SolverError> {
        let need = self.sample_size();
        let got = if self.uses_affine() {
            acs.len()
        } else {
            pcs.len()
        };
        let enough = match self {
            SolverKind::Linear17 => got >= need,
            _ => got == need,
        };
        if !enough {
            return Err(SolverError::InsufficientSpan(format!(
                "{} needs {need} {}, got {got}",
                self.name(),
                if self.uses_affine() {
                    "affine correspondences"
                } else {
                    "point correspondences"
                }
            )));
        }
        match self {
            SolverKind::Mono2Ac if rig.len() == 1 => solve_2ac_mono(&acs[0], &acs[1], cfg),
            SolverKind::Mono2Ac => {
                let (a, b) = (&acs[0], &acs[1]);
                if (a.cam_i, a.cam_j) != (b.cam_i, b.cam_j) {
                    return Err(SolverError::DegenerateInput(
                        "2ac-mono needs both ACs from one camera pair".into(),
                    ));
                }
                solve_2ac_gcam(a, b, rig, VariantChoice::Auto, cfg)
            }
            SolverKind::Inter56 | SolverKind::Inter48 | SolverKind::Intra2Ac => {
                solve_2ac_gcam(&acs[0], &acs[1], rig, self.variant(), cfg)
            }
            SolverKind::SixPtInter56 | SolverKind::SixPtInter48 | SolverKind::SixPtIntra => {
                solve_6pt_gcam(pcs, rig, self.variant(), cfg)
            }
            SolverKind::Linear17 => solve_17pt_linear(pcs, rig),
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SolverKind::ALL
            .iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .copied()
            .ok_or_else(|| {
                let names: Vec<&str> = SolverKind::ALL.iter().map(|k| k.name()).collect();
                format!("unknown solver '{s}', expected one of {}", names.join(", "))
            })
    }
}
