//! Polynomial constraint systems in the Cayley parameters.
//!
//! Every point or affine constraint is linear in the rig translation `t` and
//! in the entries of `R`. Replacing `R` by the Cayley numerator `C(q)` gives
//! one row `[m_t(q) | m_0(q)]` of quadratic polynomials per constraint with
//! `m_t . t + m_0 = 0`. Stacking rows and taking minors yields the equation
//! systems solved by [`crate::solver`].

use crate::geometry::{AffineCorrespondence, PointCorrespondence, Rig};
use crate::polynomial::{
    cayley_numerator, cayley_scale, combinations, Field, Poly3, PolyError, PolyMatrix, Reals,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConstraintError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("camera index {0} out of range")]
    CameraIndex(usize),
    #[error("expected {expected} correspondences, got {got}")]
    WrongCount { expected: usize, got: usize },
    #[error("no three point correspondences share a camera pair")]
    NoSharedTriple,
    #[error("rotation angle {0} rad is not inside (-pi, pi)")]
    AngleAtPi(f64),
}

/// Rig extrinsics with entries in a generic field.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldRig<F: Field> {
    pub rotations: Vec<[[F::Elem; 3]; 3]>,
    pub centers: Vec<[F::Elem; 3]>,
}

impl FieldRig<Reals> {
    pub fn from_rig(rig: &Rig) -> Self {
        Self {
            rotations: rig
                .cameras
                .iter()
                .map(|c| {
                    let q = c.rotation;
                    [
                        [q[(0, 0)], q[(0, 1)], q[(0, 2)]],
                        [q[(1, 0)], q[(1, 1)], q[(1, 2)]],
                        [q[(2, 0)], q[(2, 1)], q[(2, 2)]],
                    ]
                })
                .collect(),
            centers: rig
                .cameras
                .iter()
                .map(|c| [c.center.x, c.center.y, c.center.z])
                .collect(),
        }
    }
}

impl<F: Field> FieldRig<F> {
    /// A single camera with identity extrinsics.
    pub fn monocular(f: F) -> Self {
        let (o, z) = (f.one(), f.zero());
        Self {
            rotations: vec![[[o, z, z], [z, o, z], [z, z, o]]],
            centers: vec![[z, z, z]],
        }
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
}

/// Affine correspondence with entries in a generic field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldAc<F: Field> {
    pub x: [F::Elem; 3],
    pub xp: [F::Elem; 3],
    /// Row-major 2x2 affine map.
    pub a: [[F::Elem; 2]; 2],
    pub cam_i: usize,
    pub cam_j: usize,
}

impl FieldAc<Reals> {
    pub fn from_ac(ac: &AffineCorrespondence) -> Self {
        Self {
            x: [ac.x.x, ac.x.y, ac.x.z],
            xp: [ac.xp.x, ac.xp.y, ac.xp.z],
            a: [[ac.a[(0, 0)], ac.a[(0, 1)]], [ac.a[(1, 0)], ac.a[(1, 1)]]],
            cam_i: ac.cam_i,
            cam_j: ac.cam_j,
        }
    }
}

/// Point correspondence with entries in a generic field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldPc<F: Field> {
    pub x: [F::Elem; 3],
    pub xp: [F::Elem; 3],
    pub cam_i: usize,
    pub cam_j: usize,
}

impl FieldPc<Reals> {
    pub fn from_pc(pc: &PointCorrespondence) -> Self {
        Self {
            x: [pc.x.x, pc.x.y, pc.x.z],
            xp: [pc.xp.x, pc.xp.y, pc.xp.z],
            cam_i: pc.cam_i,
            cam_j: pc.cam_j,
        }
    }
}

impl<F: Field> FieldAc<F> {
    pub fn point(&self) -> FieldPc<F> {
        FieldPc {
            x: self.x,
            xp: self.xp,
            cam_i: self.cam_i,
            cam_j: self.cam_j,
        }
    }
}

/// One constraint `t_coeffs . t + constant = 0` with entries quadratic in `q`
/// (the rotation replaced by its Cayley numerator).
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintRow<F: Field> {
    pub t_coeffs: [Poly3<F>; 3],
    pub constant: Poly3<F>,
}

impl<F: Field> ConstraintRow<F> {
    fn zero(f: F) -> Self {
        Self {
            t_coeffs: [Poly3::zero(f), Poly3::zero(f), Poly3::zero(f)],
            constant: Poly3::zero(f),
        }
    }

    fn add_assign(&mut self, o: &Self) {
        for k in 0..3 {
            self.t_coeffs[k] = self.t_coeffs[k].add(&o.t_coeffs[k]);
        }
        self.constant = self.constant.add(&o.constant);
    }
}

fn mat_vec<F: Field>(f: F, m: &[[F::Elem; 3]; 3], v: &[F::Elem; 3]) -> [F::Elem; 3] {
    let mut out = [f.zero(); 3];
    for (r, o) in out.iter_mut().enumerate() {
        for c in 0..3 {
            *o = f.add(*o, f.mul(m[r][c], v[c]));
        }
    }
    out
}

fn cross<F: Field>(f: F, a: &[F::Elem; 3], b: &[F::Elem; 3]) -> [F::Elem; 3] {
    [
        f.sub(f.mul(a[1], b[2]), f.mul(a[2], b[1])),
        f.sub(f.mul(a[2], b[0]), f.mul(a[0], b[2])),
        f.sub(f.mul(a[0], b[1]), f.mul(a[1], b[0])),
    ]
}

/// Polynomial vector `C(q) w` for a constant vector `w`.
fn cayley_times<F: Field>(c: &[[Poly3<F>; 3]; 3], w: &[F::Elem; 3]) -> [Poly3<F>; 3] {
    let row = |r: usize| {
        c[r][0]
            .scale(w[0])
            .add(&c[r][1].scale(w[1]))
            .add(&c[r][2].scale(w[2]))
    };
    [row(0), row(1), row(2)]
}

/// Dot product of a constant vector with a polynomial vector.
fn dot_const<F: Field>(a: &[F::Elem; 3], p: &[Poly3<F>; 3]) -> Poly3<F> {
    p[0].scale(a[0])
        .add(&p[1].scale(a[1]))
        .add(&p[2].scale(a[2]))
}

/// Cross product of a constant vector with a polynomial vector.
fn cross_const<F: Field>(a: &[F::Elem; 3], p: &[Poly3<F>; 3]) -> [Poly3<F>; 3] {
    [
        p[2].scale(a[1]).sub(&p[1].scale(a[2])),
        p[0].scale(a[2]).sub(&p[2].scale(a[0])),
        p[1].scale(a[0]).sub(&p[0].scale(a[1])),
    ]
}

/// Row for the bilinear form `u^T E v` with `E` the essential matrix from
/// camera `cam_i` (vector `v`) to camera `cam_j` (vector `u`).
fn bilinear_row<F: Field>(
    f: F,
    rig: &FieldRig<F>,
    c: &[[Poly3<F>; 3]; 3],
    u: &[F::Elem; 3],
    v: &[F::Elem; 3],
    cam_i: usize,
    cam_j: usize,
) -> Result<ConstraintRow<F>, ConstraintError> {
    let qi = rig
        .rotations
        .get(cam_i)
        .ok_or(ConstraintError::CameraIndex(cam_i))?;
    let qj = rig
        .rotations
        .get(cam_j)
        .ok_or(ConstraintError::CameraIndex(cam_j))?;
    let si = rig.centers[cam_i];
    let sj = rig.centers[cam_j];
    let uu = mat_vec(f, qj, u);
    let vv = mat_vec(f, qi, v);
    // t coefficient: -(U x C V)
    let cv = cayley_times(c, &vv);
    let ucv = cross_const(&uu, &cv);
    let t_coeffs = [ucv[0].neg(), ucv[1].neg(), ucv[2].neg()];
    // constant: U^T C (s_i x V) + s_j . (U x C V)
    let sxv = cross(f, &si, &vv);
    let csv = cayley_times(c, &sxv);
    let constant = dot_const(&uu, &csv).add(&dot_const(&sj, &ucv));
    Ok(ConstraintRow { t_coeffs, constant })
}

/// The epipolar row of a point correspondence.
pub fn point_row<F: Field>(
    f: F,
    rig: &FieldRig<F>,
    pc: &FieldPc<F>,
) -> Result<ConstraintRow<F>, ConstraintError> {
    let c = cayley_numerator(f);
    bilinear_row(f, rig, &c, &pc.xp, &pc.x, pc.cam_i, pc.cam_j)
}

/// The three rows (epipolar, affine column 1, affine column 2) of an AC.
pub fn affine_rows<F: Field>(
    f: F,
    rig: &FieldRig<F>,
    ac: &FieldAc<F>,
) -> Result<[ConstraintRow<F>; 3], ConstraintError> {
    let c = cayley_numerator(f);
    let (z, o) = (f.zero(), f.one());
    let epi = bilinear_row(f, rig, &c, &ac.xp, &ac.x, ac.cam_i, ac.cam_j)?;
    let mut out = [epi, ConstraintRow::zero(f), ConstraintRow::zero(f)];
    for j in 0..2 {
        let ej = if j == 0 { [o, z, z] } else { [z, o, z] };
        let aj = [ac.a[0][j], ac.a[1][j], z];
        let mut row = bilinear_row(f, rig, &c, &ac.xp, &ej, ac.cam_i, ac.cam_j)?;
        row.add_assign(&bilinear_row(f, rig, &c, &aj, &ac.x, ac.cam_i, ac.cam_j)?);
        out[j + 1] = row;
    }
    Ok(out)
}

/// Stack rows into `[t | 1]` form (`with_constant`) or `t` only.
fn stack<F: Field>(f: F, rows: &[ConstraintRow<F>], with_constant: bool) -> PolyMatrix<F> {
    let nc = if with_constant { 4 } else { 3 };
    let mut m = PolyMatrix::zeros(f, rows.len(), nc);
    for (r, row) in rows.iter().enumerate() {
        for k in 0..3 {
            m.set(r, k, row.t_coeffs[k].clone());
        }
        if with_constant {
            m.set(r, 3, row.constant.clone());
        }
    }
    m
}

/// Which family of equations a polynomial belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EquationTag {
    /// Quotiented 3x3 minor of the monocular coefficient matrix.
    Mono { rows: [usize; 3] },
    /// Quotiented 4x4 minor of the stacked `[t | 1]` matrix.
    E1 { rows: [usize; 4] },
    /// Quotiented determinant of a 3x3 `t` block of rows sharing a camera pair.
    E2 { rows: [usize; 3] },
}

/// Which equations to include for generalized problems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// Only 4x4 minors.
    E1,
    /// 4x4 minors plus the per-pair 3x3 determinants.
    E1E2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolutionCount {
    Finite(usize),
    /// Positive-dimensional solution set; not solvable by eigen methods.
    OneDimensional,
    /// No tabulated value for this configuration.
    Unknown,
}

/// Layout of two ACs on a rig, numbered 1 to 9.
///
/// Cameras are labelled by first appearance; a pair `(i, j)` means camera `i`
/// at time k and camera `j` at time k+1.
///
/// | case | ACs |
/// |------|-----|
/// | 1 | (1,2) (3,4) |
/// | 2 | (1,1) (2,3) |
/// | 3 | (1,2) (1,3), also (1,2) (3,2) |
/// | 4 | (1,2) (2,3) |
/// | 5 | (1,1) (1,2), also (1,1) (2,1) |
/// | 6 | (1,2) (2,1), inter-camera |
/// | 7 | (1,1) (2,2), intra-camera |
/// | 8 | (1,1) (1,1), degenerate |
/// | 9 | (1,2) (1,2), degenerate |
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AcLayout {
    /// Canonical relabelled pattern `(i, i', j, j')`.
    pub pattern: [usize; 4],
    /// True when the ACs were swapped to reach the canonical pattern.
    pub swapped: bool,
}

fn relabel(seq: &[usize]) -> Vec<usize> {
    let mut map: Vec<(usize, usize)> = Vec::new();
    seq.iter()
        .map(|&c| match map.iter().find(|(k, _)| *k == c) {
            Some((_, v)) => *v,
            None => {
                let v = map.len();
                map.push((c, v));
                v
            }
        })
        .collect()
}

impl AcLayout {
    pub fn classify(a: (usize, usize), b: (usize, usize)) -> Self {
        let p1 = relabel(&[a.0, a.1, b.0, b.1]);
        let p2 = relabel(&[b.0, b.1, a.0, a.1]);
        let (p, swapped) = if p2 < p1 { (p2, true) } else { (p1, false) };
        Self {
            pattern: [p[0], p[1], p[2], p[3]],
            swapped,
        }
    }

    pub fn case_number(&self) -> u8 {
        match self.pattern {
            [0, 1, 2, 3] => 1,
            [0, 0, 1, 2] => 2,
            [0, 1, 0, 2] | [0, 1, 2, 1] => 3,
            [0, 1, 1, 2] => 4,
            [0, 0, 0, 1] | [0, 0, 1, 0] => 5,
            [0, 1, 1, 0] => 6,
            [0, 0, 1, 1] => 7,
            [0, 0, 0, 0] => 8,
            [0, 1, 0, 1] => 9,
            p => unreachable!("pattern {p:?} is not canonical"),
        }
    }

    /// Cases 8 and 9: both ACs share one camera pair.
    pub fn is_degenerate(&self) -> bool {
        matches!(self.case_number(), 8 | 9)
    }

    /// Number of distinct cameras involved.
    pub fn camera_count(&self) -> usize {
        self.pattern.iter().max().unwrap() + 1
    }

    /// A representative pattern for each case number (1..=9).
    pub fn for_case(case: u8) -> Option<Self> {
        let pattern = match case {
            1 => [0, 1, 2, 3],
            2 => [0, 0, 1, 2],
            3 => [0, 1, 0, 2],
            4 => [0, 1, 1, 2],
            5 => [0, 0, 0, 1],
            6 => [0, 1, 1, 0],
            7 => [0, 0, 1, 1],
            8 => [0, 0, 0, 0],
            9 => [0, 1, 0, 1],
            _ => return None,
        };
        Some(Self {
            pattern,
            swapped: false,
        })
    }

    pub fn expected_count(&self, variant: Variant) -> SolutionCount {
        match (self.case_number(), variant) {
            (1..=5, Variant::E1) => SolutionCount::Finite(64),
            (6, Variant::E1) => SolutionCount::Finite(56),
            (7, Variant::E1) => SolutionCount::OneDimensional,
            (1..=7, Variant::E1E2) => SolutionCount::Finite(48),
            _ => SolutionCount::Unknown,
        }
    }
}

/// Layout of six PCs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SixPointLayout {
    /// Three PCs from camera pair (i, j) and three from (j, i).
    Inter,
    /// Three PCs within camera i and three within camera j.
    Intra,
    General,
}

impl SixPointLayout {
    pub fn classify(pairs: &[(usize, usize)]) -> Self {
        if pairs.len() != 6 {
            return Self::General;
        }
        let mut groups: Vec<((usize, usize), usize)> = Vec::new();
        for p in pairs {
            match groups.iter_mut().find(|g| g.0 == *p) {
                Some(g) => g.1 += 1,
                None => groups.push((*p, 1)),
            }
        }
        if groups.len() != 2 || groups.iter().any(|g| g.1 != 3) {
            return Self::General;
        }
        let (a, b) = (groups[0].0, groups[1].0);
        if a.0 == a.1 && b.0 == b.1 && a.0 != b.0 {
            Self::Intra
        } else if a.0 != a.1 && a.0 == b.1 && a.1 == b.0 {
            Self::Inter
        } else {
            Self::General
        }
    }

    pub fn expected_count(&self, variant: Variant) -> SolutionCount {
        match (self, variant) {
            (Self::Inter, Variant::E1) => SolutionCount::Finite(56),
            (Self::Intra, Variant::E1) => SolutionCount::OneDimensional,
            (Self::Inter | Self::Intra, Variant::E1E2) => SolutionCount::Finite(48),
            _ => SolutionCount::Unknown,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SystemKind {
    Mono,
    TwoAc(AcLayout),
    SixPoint(SixPointLayout),
}

/// A polynomial system in `q` with the coefficient matrix it was built from.
#[derive(Clone, Debug)]
pub struct EquationSystem<F: Field> {
    pub polys: Vec<Poly3<F>>,
    pub tags: Vec<EquationTag>,
    pub kind: SystemKind,
    pub variant: Variant,
    pub expected: SolutionCount,
    /// `6x3` (monocular) or `6x4` (`[t | 1]`) coefficient matrix.
    pub matrix: PolyMatrix<F>,
    /// Camera pairs of the correspondences in input order, relabelled by
    /// first appearance (empty for monocular systems).
    pub pairs: Vec<(usize, usize)>,
}

/// Relabel camera indices of `pairs` by first appearance.
pub fn relabel_pairs(pairs: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let flat: Vec<usize> = pairs.iter().flat_map(|p| [p.0, p.1]).collect();
    relabel(&flat).chunks(2).map(|c| (c[0], c[1])).collect()
}

/// Scale real polynomials so the largest-magnitude coefficient becomes 1.
/// Over Z_p the polynomial is returned unchanged.
fn finish<F: Field>(p: Poly3<F>) -> Poly3<F> {
    if F::EXACT {
        return p;
    }
    let f = p.field();
    let big = p
        .terms()
        .iter()
        .map(|t| t.1)
        .max_by(|a, b| f.magnitude(*a).total_cmp(&f.magnitude(*b)));
    match big.and_then(|c| f.inv(c)) {
        Some(inv) => p.scale(inv),
        None => p,
    }
}

/// Equations of the two-AC monocular problem: ten quotiented 3x3 minors of the
/// first five rows of the `6x3` matrix.
pub fn equations_mono<F: Field>(
    f: F,
    ac1: &FieldAc<F>,
    ac2: &FieldAc<F>,
) -> Result<EquationSystem<F>, ConstraintError> {
    let rig = FieldRig::monocular(f);
    let mut a1 = *ac1;
    let mut a2 = *ac2;
    a1.cam_i = 0;
    a1.cam_j = 0;
    a2.cam_i = 0;
    a2.cam_j = 0;
    let mut rows = affine_rows(f, &rig, &a1)?.to_vec();
    rows.extend(affine_rows(f, &rig, &a2)?);
    let m = stack(f, &rows, false);
    let s = cayley_scale(f);
    let mut polys = Vec::new();
    let mut tags = Vec::new();
    for r in combinations(5, 3) {
        let d = m.submatrix(&r, &[0, 1, 2]).det()?;
        polys.push(finish(d.exact_quotient(&s)?));
        tags.push(EquationTag::Mono {
            rows: [r[0], r[1], r[2]],
        });
    }
    Ok(EquationSystem {
        polys,
        tags,
        kind: SystemKind::Mono,
        variant: Variant::E1,
        expected: SolutionCount::Finite(20),
        matrix: m,
        pairs: vec![],
    })
}

/// All twenty 3x3 minors of the monocular `6x3` matrix, quotiented by `s`.
pub fn mono_all_minors<F: Field>(m: &PolyMatrix<F>) -> Vec<Result<Poly3<F>, PolyError>> {
    let f = m.get(0, 0).field();
    let s = cayley_scale(f);
    combinations(6, 3)
        .into_iter()
        .map(|r| m.submatrix(&r, &[0, 1, 2]).det()?.exact_quotient(&s))
        .collect()
}

fn e1_e2<F: Field>(
    f: F,
    m: &PolyMatrix<F>,
    triples: &[[usize; 3]],
    variant: Variant,
) -> Result<(Vec<Poly3<F>>, Vec<EquationTag>), ConstraintError> {
    let s = cayley_scale(f);
    let mut polys = Vec::new();
    let mut tags = Vec::new();
    for (r, d) in combinations(m.nrows(), 4)
        .into_iter()
        .zip(m.maximal_minors_4()?)
    {
        polys.push(finish(d.exact_quotient(&s)?));
        tags.push(EquationTag::E1 {
            rows: [r[0], r[1], r[2], r[3]],
        });
    }
    if variant == Variant::E1E2 {
        for t in triples {
            let d = m.submatrix(t, &[0, 1, 2]).det()?;
            polys.push(finish(d.exact_quotient(&s)?));
            tags.push(EquationTag::E2 { rows: *t });
        }
    }
    Ok((polys, tags))
}

/// Equations of the two-AC generalized problem: fifteen quotiented 4x4
/// minors of the `6x4` matrix, plus (for [`Variant::E1E2`]) the quotiented
/// determinant of each AC's `3x3` translation block.
pub fn equations_gcam<F: Field>(
    f: F,
    rig: &FieldRig<F>,
    ac1: &FieldAc<F>,
    ac2: &FieldAc<F>,
    variant: Variant,
) -> Result<EquationSystem<F>, ConstraintError> {
    let layout = AcLayout::classify((ac1.cam_i, ac1.cam_j), (ac2.cam_i, ac2.cam_j));
    let mut rows = affine_rows(f, rig, ac1)?.to_vec();
    rows.extend(affine_rows(f, rig, ac2)?);
    let m = stack(f, &rows, true);
    let (polys, tags) = e1_e2(f, &m, &[[0, 1, 2], [3, 4, 5]], variant)?;
    Ok(EquationSystem {
        polys,
        tags,
        kind: SystemKind::TwoAc(layout),
        variant,
        expected: layout.expected_count(variant),
        matrix: m,
        pairs: relabel_pairs(&[(ac1.cam_i, ac1.cam_j), (ac2.cam_i, ac2.cam_j)]),
    })
}

/// Index triples of PCs sharing a camera pair.
pub fn shared_pair_triples(pairs: &[(usize, usize)]) -> Vec<[usize; 3]> {
    combinations(pairs.len(), 3)
        .into_iter()
        .filter(|t| pairs[t[0]] == pairs[t[1]] && pairs[t[1]] == pairs[t[2]])
        .map(|t| [t[0], t[1], t[2]])
        .collect()
}

/// Equations of the six-point generalized problem.
pub fn equations_6pt<F: Field>(
    f: F,
    rig: &FieldRig<F>,
    pcs: &[FieldPc<F>],
    variant: Variant,
) -> Result<EquationSystem<F>, ConstraintError> {
    if pcs.len() != 6 {
        return Err(ConstraintError::WrongCount {
            expected: 6,
            got: pcs.len(),
        });
    }
    let pairs: Vec<(usize, usize)> = pcs.iter().map(|p| (p.cam_i, p.cam_j)).collect();
    let layout = SixPointLayout::classify(&pairs);
    let triples = shared_pair_triples(&pairs);
    if variant == Variant::E1E2 && triples.is_empty() {
        return Err(ConstraintError::NoSharedTriple);
    }
    let rows = pcs
        .iter()
        .map(|p| point_row(f, rig, p))
        .collect::<Result<Vec<_>, _>>()?;
    let m = stack(f, &rows, true);
    let (polys, tags) = e1_e2(f, &m, &triples, variant)?;
    Ok(EquationSystem {
        polys,
        tags,
        kind: SystemKind::SixPoint(layout),
        variant,
        expected: layout.expected_count(variant),
        matrix: m,
        pairs: relabel_pairs(&pairs),
    })
}

/// Known rotation angle: `qx^2 + qy^2 + qz^2 - tan^2(theta/2)`.
pub fn rotation_angle_constraint(theta: f64) -> Result<Poly3<Reals>, ConstraintError> {
    if !theta.is_finite() || theta.abs() >= std::f64::consts::PI - 1e-9 {
        return Err(ConstraintError::AngleAtPi(theta));
    }
    let t = (theta / 2.0).tan();
    Ok(cayley_scale(Reals).sub(&Poly3::constant(Reals, 1.0 + t * t)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_table() {
        let cases = [
            ((0, 1), (2, 3), 1),
            ((0, 0), (1, 2), 2),
            ((1, 2), (0, 0), 2),
            ((0, 1), (0, 2), 3),
            ((0, 2), (1, 2), 3),
            ((0, 1), (1, 2), 4),
            ((1, 2), (0, 1), 4),
            ((0, 0), (0, 1), 5),
            ((0, 1), (1, 1), 5),
            ((0, 1), (1, 0), 6),
            ((0, 0), (1, 1), 7),
            ((1, 1), (1, 1), 8),
            ((0, 1), (0, 1), 9),
        ];
        for (a, b, c) in cases {
            assert_eq!(AcLayout::classify(a, b).case_number(), c, "{a:?} {b:?}");
        }
    }

    #[test]
    fn six_point_layouts() {
        let inter = [(0, 1), (0, 1), (1, 0), (0, 1), (1, 0), (1, 0)];
        assert_eq!(SixPointLayout::classify(&inter), SixPointLayout::Inter);
        let intra = [(0, 0), (1, 1), (0, 0), (1, 1), (0, 0), (1, 1)];
        assert_eq!(SixPointLayout::classify(&intra), SixPointLayout::Intra);
        assert_eq!(shared_pair_triples(&intra).len(), 2);
    }
}
