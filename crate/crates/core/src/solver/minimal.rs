//! Minimal solvers: two ACs (single camera and rig) and six PCs (rig).

use super::template::{template_with_degree, TemplateKey};
use super::{
    recover_translation_gcam, solve_with_template, system_residual, Candidate, SolutionSet,
    SolverConfig, SolverError,
};
use crate::constraints::{
    equations_6pt, equations_gcam, equations_mono, AcLayout, EquationSystem, FieldAc, FieldPc,
    FieldRig, SixPointLayout, Variant,
};
use crate::finite_field::FpLayout;
use crate::geometry::{
    cayley_to_rotation, normalize_rig_frame, AffineCorrespondence, PointCorrespondence,
    RelativePose, Rig, RigTransform,
};
use crate::polynomial::Reals;
use nalgebra::{DMatrix, Matrix3, Matrix3x2, Vector3};

/// Which equation families to use for a rig solver.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum VariantChoice {
    /// E1 for inter-camera layouts, E1+E2 otherwise.
    #[default]
    Auto,
    E1,
    E1E2,
}

fn layout_of(eqs: &EquationSystem<Reals>) -> FpLayout {
    let p = &eqs.pairs;
    match p.len() {
        0 => FpLayout::Mono,
        2 => FpLayout::TwoAc([p[0], p[1]]),
        _ => FpLayout::SixPoint([p[0], p[1], p[2], p[3], p[4], p[5]]),
    }
}

fn roots_of(eqs: &EquationSystem<Reals>, cfg: &SolverConfig) -> Result<Vec<[f64; 3]>, SolverError> {
    let key = TemplateKey {
        layout: layout_of(eqs),
        variant: eqs.variant,
    };
    let tpl = template_with_degree(&key, cfg.expansion_degree)?;
    solve_with_template(&eqs.polys, &tpl, cfg)
}

fn evaluated(eqs: &EquationSystem<Reals>, q: [f64; 3]) -> DMatrix<f64> {
    let m = &eqs.matrix;
    DMatrix::from_row_slice(m.nrows(), m.ncols(), &m.evaluate(q))
}

/// Unit null vector of the first five rows of the evaluated `6x3` monocular
/// matrix and its selection score `|row_6 . t| / |row_6|`. The sign is
/// arbitrary; see [`cheirality_sign`].
pub fn recover_translation_single(mbar: &DMatrix<f64>) -> Result<(Vector3<f64>, f64), SolverError> {
    if mbar.nrows() != 6 || mbar.ncols() != 3 {
        return Err(SolverError::DegenerateInput(format!(
            "expected a 6 x 3 matrix, got {} x {}",
            mbar.nrows(),
            mbar.ncols()
        )));
    }
    let top = mbar.rows(0, 5).into_owned();
    let svd = top.svd(false, true);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let s = |k: usize| svd.singular_values[order[k]];
    if !(s(1) > 1e-10 * s(0)) {
        return Err(SolverError::RankCollapse);
    }
    let v = svd.v_t.as_ref().unwrap().row(order[2]).transpose();
    let t = Vector3::new(v[0], v[1], v[2]).normalize();
    let dropped = Vector3::new(mbar[(5, 0)], mbar[(5, 1)], mbar[(5, 2)]);
    let n = dropped.norm();
    let score = if n > 0.0 {
        dropped.dot(&t).abs() / n
    } else {
        0.0
    };
    Ok((t, score))
}

/// Depths of the midpoint triangulation of `x <-> xp` under `X' = R X + t`.
pub fn midpoint_depths(
    r: &Matrix3<f64>,
    t: &Vector3<f64>,
    x: &Vector3<f64>,
    xp: &Vector3<f64>,
) -> Option<(f64, f64)> {
    let a = Matrix3x2::from_columns(&[r * x, -xp]);
    let ata = a.transpose() * a;
    let sol = ata.try_inverse()? * (a.transpose() * (-t));
    Some((sol[0], sol[1]))
}

/// `+1` or `-1`: the sign of `t` placing more triangulated points in front
/// of both views.
pub fn cheirality_sign(
    r: &Matrix3<f64>,
    t: &Vector3<f64>,
    pts: &[(Vector3<f64>, Vector3<f64>)],
) -> f64 {
    let mut votes = 0i32;
    for (x, xp) in pts {
        if let Some((a, b)) = midpoint_depths(r, t, x, xp) {
            if a > 0.0 && b > 0.0 {
                votes += 1;
            } else if a < 0.0 && b < 0.0 {
                votes -= 1;
            }
        }
    }
    if votes < 0 {
        -1.0
    } else {
        1.0
    }
}

fn same_correspondence(a: &AffineCorrespondence, b: &AffineCorrespondence) -> bool {
    a.cam_i == b.cam_i
        && a.cam_j == b.cam_j
        && (a.x - b.x).norm() < 1e-12
        && (a.xp - b.xp).norm() < 1e-12
}

/// Two-AC relative pose of a single camera. Translation is a unit direction.
pub fn solve_2ac_mono(
    ac1: &AffineCorrespondence,
    ac2: &AffineCorrespondence,
    cfg: &SolverConfig,
) -> Result<SolutionSet, SolverError> {
    if same_correspondence(ac1, ac2) || (ac1.x - ac2.x).norm() < 1e-12 {
        return Err(SolverError::DegenerateInput(
            "repeated correspondence".into(),
        ));
    }
    let eqs = equations_mono(Reals, &FieldAc::from_ac(ac1), &FieldAc::from_ac(ac2))?;
    let roots = roots_of(&eqs, cfg)?;
    let pts = [(ac1.x, ac1.xp), (ac2.x, ac2.xp)];
    let mut set = SolutionSet::default();
    for q in roots {
        let Ok((t, score)) = recover_translation_single(&evaluated(&eqs, q)) else {
            continue;
        };
        let cayley = Vector3::from(q);
        let r = cayley_to_rotation(&cayley);
        let t = t * cheirality_sign(&r, &t, &pts);
        set.candidates.push(Candidate {
            pose: RelativePose::new(r, t),
            cayley,
            residual: system_residual(&eqs.polys, q),
            score,
            scale_valid: false,
        });
    }
    set.sort();
    Ok(set)
}

/// Solve a rig system and attach metric translations.
fn solve_rig_system(
    eqs: &EquationSystem<Reals>,
    cfg: &SolverConfig,
    back: Option<&RigTransform>,
) -> Result<SolutionSet, SolverError> {
    let roots = roots_of(eqs, cfg)?;
    let mut set = SolutionSet::default();
    for q in roots {
        let m = evaluated(eqs, q);
        let (t, scale_valid) = match recover_translation_gcam(&m) {
            Ok(t) => (t, true),
            Err(SolverError::ScaleUnobservable) => (translation_direction(&m), false),
            Err(_) => continue,
        };
        let cayley = Vector3::from(q);
        let mut pose = RelativePose::new(cayley_to_rotation(&cayley), t);
        if let Some(g) = back {
            pose = g.pose_to_original(&pose);
        }
        let residual = system_residual(&eqs.polys, q);
        set.candidates.push(Candidate {
            pose,
            cayley: crate::geometry::rotation_to_cayley(&pose.rotation).unwrap_or(cayley),
            residual,
            score: residual,
            scale_valid,
        });
    }
    set.sort();
    Ok(set)
}

/// Unit direction of the translation part of the null space when the scale
/// is unobservable.
fn translation_direction(m: &DMatrix<f64>) -> Vector3<f64> {
    let a = m.columns(0, 3).into_owned();
    let svd = a.svd(false, true);
    let k = svd.singular_values.imin();
    let v = svd.v_t.as_ref().unwrap().row(k).transpose();
    Vector3::new(v[0], v[1], v[2]).normalize()
}

fn frame_for(rig: &Rig, a: usize, b: usize) -> Result<RigTransform, SolverError> {
    Ok(normalize_rig_frame(
        &rig.camera(a)?.center,
        &rig.camera(b)?.center,
    )?)
}

/// Two-AC relative pose of a multi-camera rig; the case (1 to 9) follows
/// from the camera indices.
pub fn solve_2ac_gcam(
    ac1: &AffineCorrespondence,
    ac2: &AffineCorrespondence,
    rig: &Rig,
    choice: VariantChoice,
    cfg: &SolverConfig,
) -> Result<SolutionSet, SolverError> {
    for ac in [ac1, ac2] {
        rig.camera(ac.cam_i)?;
        rig.camera(ac.cam_j)?;
    }
    if same_correspondence(ac1, ac2) {
        return Err(SolverError::DegenerateInput(
            "repeated correspondence".into(),
        ));
    }
    let layout = AcLayout::classify((ac1.cam_i, ac1.cam_j), (ac2.cam_i, ac2.cam_j));
    let case = layout.case_number();
    if layout.is_degenerate() {
        return solve_shared_pair(ac1, ac2, rig, cfg);
    }
    let variant = match choice {
        VariantChoice::Auto if case == 6 => Variant::E1,
        VariantChoice::Auto | VariantChoice::E1E2 => Variant::E1E2,
        VariantChoice::E1 => Variant::E1,
    };
    if case == 7 && variant == Variant::E1 {
        return Err(SolverError::OneDimensionalFamily);
    }
    let g = if case == 7 && cfg.normalize_intra {
        Some(frame_for(rig, ac1.cam_i, ac2.cam_i)?)
    } else {
        None
    };
    let frig = match &g {
        Some(g) => FieldRig::from_rig(&rig.transformed(g)),
        None => FieldRig::from_rig(rig),
    };
    let eqs = equations_gcam(
        Reals,
        &frig,
        &FieldAc::from_ac(ac1),
        &FieldAc::from_ac(ac2),
        variant,
    )?;
    solve_rig_system(&eqs, cfg, g.as_ref())
}

/// Cases 8 and 9: both ACs observe the same camera pair, so only the pair
/// pose up to scale is recoverable. Mapped to the rig frame with a unit
/// pair translation and flagged `scale_valid = false`.
fn solve_shared_pair(
    ac1: &AffineCorrespondence,
    ac2: &AffineCorrespondence,
    rig: &Rig,
    cfg: &SolverConfig,
) -> Result<SolutionSet, SolverError> {
    let ci = rig.camera(ac1.cam_i)?;
    let cj = rig.camera(ac1.cam_j)?;
    let mut set = solve_2ac_mono(ac1, ac2, cfg)?;
    for c in &mut set.candidates {
        let r = cj.rotation * c.pose.rotation * ci.rotation.transpose();
        let t = cj.rotation * c.pose.translation - r * ci.center + cj.center;
        c.pose = RelativePose::new(r, t);
        c.cayley = crate::geometry::rotation_to_cayley(&r).unwrap_or(c.cayley);
        c.scale_valid = false;
    }
    Ok(set)
}

/// Rig translation for a known rotation from two ACs. Fails with
/// `ScaleUnobservable` when the motion leaves the scale undetermined.
pub fn translation_for_rotation(
    ac1: &AffineCorrespondence,
    ac2: &AffineCorrespondence,
    rig: &Rig,
    rotation: &Matrix3<f64>,
) -> Result<Vector3<f64>, SolverError> {
    let q = crate::geometry::rotation_to_cayley(rotation)?;
    let eqs = equations_gcam(
        Reals,
        &FieldRig::from_rig(rig),
        &FieldAc::from_ac(ac1),
        &FieldAc::from_ac(ac2),
        Variant::E1,
    )?;
    recover_translation_gcam(&evaluated(&eqs, [q.x, q.y, q.z]))
}

/// Six-PC relative pose of a multi-camera rig.
pub fn solve_6pt_gcam(
    pcs: &[PointCorrespondence],
    rig: &Rig,
    choice: VariantChoice,
    cfg: &SolverConfig,
) -> Result<SolutionSet, SolverError> {
    if pcs.len() != 6 {
        return Err(SolverError::InsufficientSpan(format!(
            "six point correspondences required, got {}",
            pcs.len()
        )));
    }
    for pc in pcs {
        rig.camera(pc.cam_i)?;
        rig.camera(pc.cam_j)?;
    }
    let pairs: Vec<(usize, usize)> = pcs.iter().map(|p| (p.cam_i, p.cam_j)).collect();
    let layout = SixPointLayout::classify(&pairs);
    let variant = match (choice, layout) {
        (VariantChoice::Auto, SixPointLayout::Inter) => Variant::E1,
        (VariantChoice::Auto, _) | (VariantChoice::E1E2, _) => Variant::E1E2,
        (VariantChoice::E1, _) => Variant::E1,
    };
    if layout == SixPointLayout::Intra && variant == Variant::E1 {
        return Err(SolverError::OneDimensionalFamily);
    }
    let g = if layout == SixPointLayout::Intra && cfg.normalize_intra {
        let other = pairs.iter().find(|p| p.0 != pairs[0].0).unwrap();
        Some(frame_for(rig, pairs[0].0, other.0)?)
    } else {
        None
    };
    let frig = match &g {
        Some(g) => FieldRig::from_rig(&rig.transformed(g)),
        None => FieldRig::from_rig(rig),
    };
    let fpcs: Vec<FieldPc<Reals>> = pcs.iter().map(FieldPc::from_pc).collect();
    let eqs = equations_6pt(Reals, &frig, &fpcs, variant)?;
    solve_rig_system(&eqs, cfg, g.as_ref())
}
