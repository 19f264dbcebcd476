//! Linear 17-point solver for the generalized epipolar constraint.
//!
//! With Pluecker rays `(f, s x f)` in the rig frame, every PC gives
//! `f_j' E f_i + f_j' R m_i + m_j' R f_i = 0`, linear in the 18 entries of
//! `(E, R)`. Intra-only data and axial rigs (all centers on a line) add null
//! vectors with a vanishing `E` part, so `E` is solved first with the `R`
//! columns projected out, decomposed, and the scale fitted in 1D.

use super::{Candidate, SolutionSet, SolverError};
use crate::geometry::{rotation_to_cayley, skew, PointCorrespondence, RelativePose, Rig};
use nalgebra::{DMatrix, Matrix3, Vector3};

pub const MIN_POINTS: usize = 17;

struct Ray {
    fi: Vector3<f64>,
    mi: Vector3<f64>,
    fj: Vector3<f64>,
    mj: Vector3<f64>,
}

fn rays(pcs: &[PointCorrespondence], rig: &Rig) -> Result<Vec<Ray>, SolverError> {
    pcs.iter()
        .map(|pc| {
            let (ci, cj) = (rig.camera(pc.cam_i)?, rig.camera(pc.cam_j)?);
            let fi = (ci.rotation * pc.x).normalize();
            let fj = (cj.rotation * pc.xp).normalize();
            Ok(Ray {
                fi,
                mi: ci.center.cross(&fi),
                fj,
                mj: cj.center.cross(&fj),
            })
        })
        .collect()
}

fn mat(v: &[f64]) -> Matrix3<f64> {
    Matrix3::from_row_slice(v)
}

/// Coupling term `f_j' R m_i + m_j' R f_i` and the `E` coefficient for `t`.
fn scale_fit(rays: &[Ray], r: &Matrix3<f64>, t: &Vector3<f64>) -> (f64, f64) {
    let e = skew(t) * r;
    let (mut aa, mut ab, mut bb) = (0.0, 0.0, 0.0);
    for ray in rays {
        let a = ray.fj.dot(&(e * ray.fi));
        let b = ray.fj.dot(&(r * ray.mi)) + ray.mj.dot(&(r * ray.fi));
        aa += a * a;
        ab += a * b;
        bb += b * b;
    }
    if aa == 0.0 {
        return (0.0, bb);
    }
    let k = -ab / aa;
    (k, (bb + k * ab).max(0.0))
}

/// Linear solve from at least 17 PCs spanning at least two camera pairs.
pub fn solve_17pt_linear(
    pcs: &[PointCorrespondence],
    rig: &Rig,
) -> Result<SolutionSet, SolverError> {
    if pcs.len() < MIN_POINTS {
        return Err(SolverError::InsufficientSpan(format!(
            "{} point correspondences, need {MIN_POINTS}",
            pcs.len()
        )));
    }
    let mut pairs: Vec<(usize, usize)> = pcs.iter().map(|p| (p.cam_i, p.cam_j)).collect();
    pairs.sort_unstable();
    pairs.dedup();
    if pairs.len() < 2 {
        return Err(SolverError::InsufficientSpan(
            "correspondences cover a single camera pair".into(),
        ));
    }
    let rays = rays(pcs, rig)?;
    let mut a = DMatrix::<f64>::zeros(rays.len(), 18);
    for (k, ray) in rays.iter().enumerate() {
        let (rfi, rmi) = (ray.fi, ray.mi);
        for u in 0..3 {
            for v in 0..3 {
                a[(k, 3 * u + v)] = ray.fj[u] * rfi[v];
                a[(k, 9 + 3 * u + v)] = ray.fj[u] * rmi[v] + ray.mj[u] * rfi[v];
            }
        }
    }
    // Eliminate the R block: with P the projector onto the column space of
    // A_R, the E part solves (I - P) A_E e = 0. Null vectors of A with a
    // vanishing E part (intra-only (0, I), axial rigs) drop out here.
    let a_e = a.columns(0, 9).into_owned();
    let a_r = a.columns(9, 9).into_owned();
    let svd_r = a_r.clone().svd(true, false);
    let u_r = svd_r.u.as_ref().unwrap();
    let smax = svd_r.singular_values.max();
    let basis: Vec<usize> = (0..svd_r.singular_values.len())
        .filter(|&k| svd_r.singular_values[k] > 1e-10 * smax)
        .collect();
    let mut b = a_e.clone();
    for &k in &basis {
        let u = u_r.column(k);
        let proj = u.transpose() * &b;
        b -= u * proj;
    }
    let btb = b.transpose() * &b;
    let eig = btb.symmetric_eigen();
    let mut order: Vec<usize> = (0..9).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let lmax = eig.eigenvalues[order[8]].max(f64::MIN_POSITIVE);
    if eig.eigenvalues[order[1]].max(0.0) < 1e-16 * lmax {
        return Err(SolverError::InsufficientSpan(
            "constraint matrix has a larger null space than expected".into(),
        ));
    }
    let ev: Vec<f64> = eig.eigenvectors.column(order[0]).iter().copied().collect();
    let e = mat(&ev);
    let svd = e.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let w = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
    let fix = |m: Matrix3<f64>| if m.determinant() < 0.0 { -m } else { m };
    let dir = u.column(2).into_owned();
    let mut best: Option<(f64, Matrix3<f64>, Vector3<f64>)> = None;
    for r in [fix(u * w * vt), fix(u * w.transpose() * vt)] {
        let (k, res) = scale_fit(&rays, &r, &dir);
        if best.as_ref().is_none_or(|b| res < b.0) {
            best = Some((res, r, dir * k));
        }
    }
    let (res, rotation, translation) = best.unwrap();
    let l0 = eig.eigenvalues[order[0]].max(0.0);
    let pose = RelativePose::new(rotation, translation);
    Ok(SolutionSet {
        candidates: vec![Candidate {
            cayley: rotation_to_cayley(&pose.rotation).unwrap_or_else(|_| Vector3::zeros()),
            pose,
            residual: (l0 / lmax).sqrt(),
            score: res.sqrt(),
            scale_valid: true,
        }],
    })
}
