//! Exact random instances in Z_p, theorem verification and solution counting.
//!
//! Scenes are built from random Cayley vectors so the ground-truth rotation
//! is an exact point of Z_p^3 and all constraints vanish exactly there.

pub mod groebner;

use crate::constraints::{
    equations_6pt, equations_gcam, equations_mono, mono_all_minors, shared_pair_triples, AcLayout,
    EquationSystem, FieldAc, FieldPc, FieldRig, Variant,
};
use crate::polynomial::{cayley_scale, combinations, Field, PolyMatrix, PrimeField};
use groebner::{groebner_basis, GroebnerError, DEFAULT_DEGREE_CAP};
use rand::Rng;
use serde::Serialize;

pub use crate::polynomial::field::DEFAULT_PRIME;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FpError {
    #[error("no unit normal found after {0} tries")]
    ExhaustedRetries(usize),
    #[error("plane passes through the camera center")]
    PlaneThroughCenter,
    #[error("degenerate projection (zero denominator)")]
    DegenerateProjection,
    #[error("unknown configuration '{0}'")]
    UnknownConfig(String),
    #[error(transparent)]
    Constraint(#[from] crate::constraints::ConstraintError),
    #[error(transparent)]
    Groebner(#[from] GroebnerError),
}

/// Default number of rejection-sampling attempts for unit normals.
pub const NORMAL_RETRIES: usize = 64;

pub type Vec3 = [u64; 3];
pub type Mat3 = [[u64; 3]; 3];

/// Square root in Z_p, `None` for non-residues.
pub fn fp_sqrt(f: PrimeField, a: u64) -> Option<u64> {
    f.sqrt(a)
}

fn rand_elem<R: Rng>(f: PrimeField, rng: &mut R) -> u64 {
    rng.random_range(0..f.modulus())
}

fn rand_vec<R: Rng>(f: PrimeField, rng: &mut R) -> Vec3 {
    [rand_elem(f, rng), rand_elem(f, rng), rand_elem(f, rng)]
}

fn dot(f: PrimeField, a: &Vec3, b: &Vec3) -> u64 {
    f.add(
        f.add(f.mul(a[0], b[0]), f.mul(a[1], b[1])),
        f.mul(a[2], b[2]),
    )
}

fn mat_vec(f: PrimeField, m: &Mat3, v: &Vec3) -> Vec3 {
    [dot(f, &m[0], v), dot(f, &m[1], v), dot(f, &m[2], v)]
}

fn transpose(m: &Mat3) -> Mat3 {
    let mut t = [[0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            t[r][c] = m[c][r];
        }
    }
    t
}

fn mat_mul(f: PrimeField, a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            let mut s = 0;
            for k in 0..3 {
                s = f.add(s, f.mul(a[r][k], b[k][c]));
            }
            out[r][c] = s;
        }
    }
    out
}

fn vsub(f: PrimeField, a: &Vec3, b: &Vec3) -> Vec3 {
    [f.sub(a[0], b[0]), f.sub(a[1], b[1]), f.sub(a[2], b[2])]
}

fn vadd(f: PrimeField, a: &Vec3, b: &Vec3) -> Vec3 {
    [f.add(a[0], b[0]), f.add(a[1], b[1]), f.add(a[2], b[2])]
}

/// Random `n` with `n . n = 1` in Z_p by rejection sampling.
pub fn random_unit_normal_fp<R: Rng>(
    f: PrimeField,
    rng: &mut R,
    retries: usize,
) -> Result<Vec3, FpError> {
    for _ in 0..retries {
        let v = rand_vec(f, rng);
        let n2 = dot(f, &v, &v);
        if n2 == 0 {
            continue;
        }
        if let Some(r) = f.sqrt(n2) {
            let inv = f.inv(r).unwrap();
            return Ok([f.mul(v[0], inv), f.mul(v[1], inv), f.mul(v[2], inv)]);
        }
    }
    Err(FpError::ExhaustedRetries(retries))
}

/// Rotation `C(q) / (1 + q.q)` in Z_p, `None` when the scale vanishes.
pub fn cayley_rotation_fp(f: PrimeField, q: &Vec3) -> Option<Mat3> {
    let s = f.add(f.one(), dot(f, q, q));
    let inv = f.inv(s)?;
    let c = crate::polynomial::cayley_numerator(f);
    let mut r = [[0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = f.mul(c[i][j].evaluate(*q), inv);
        }
    }
    Some(r)
}

/// Plane-induced homography `H = R + t n^T / d` for the plane `n^T X = d`.
pub fn fp_homography(f: PrimeField, r: &Mat3, t: &Vec3, n: &Vec3, d: u64) -> Result<Mat3, FpError> {
    let dinv = f.inv(d).ok_or(FpError::PlaneThroughCenter)?;
    let mut h = *r;
    for i in 0..3 {
        for j in 0..3 {
            h[i][j] = f.add(h[i][j], f.mul(f.mul(t[i], n[j]), dinv));
        }
    }
    Ok(h)
}

/// Normalized projection `H x / (h3 . x)`.
pub fn fp_project(f: PrimeField, h: &Mat3, x: &Vec3) -> Result<Vec3, FpError> {
    let hx = mat_vec(f, h, x);
    let inv = f.inv(hx[2]).ok_or(FpError::DegenerateProjection)?;
    Ok([f.mul(hx[0], inv), f.mul(hx[1], inv), 1])
}

/// Jacobian of the homography map at `x`:
/// `A_uv = (H_uv - x'_u H_3v) / (h3 . x)`.
pub fn fp_affine_from_homography(
    f: PrimeField,
    h: &Mat3,
    x: &Vec3,
    xp: &Vec3,
) -> Result<[[u64; 2]; 2], FpError> {
    let den = dot(f, &h[2], x);
    let inv = f.inv(den).ok_or(FpError::DegenerateProjection)?;
    let mut a = [[0; 2]; 2];
    for u in 0..2 {
        for v in 0..2 {
            a[u][v] = f.mul(f.sub(h[u][v], f.mul(xp[u], h[2][v])), inv);
        }
    }
    Ok(a)
}

/// Configurations used for theorem checks and solution counting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FpLayout {
    Mono,
    TwoAc([(usize, usize); 2]),
    SixPoint([(usize, usize); 6]),
}

impl FpLayout {
    /// Parse `mono`, `case1`..`case9`, `inter`, `intra`, `6pt-inter`, `6pt-intra`.
    pub fn named(name: &str) -> Result<Self, FpError> {
        let two = |case: u8| {
            let p = AcLayout::for_case(case).unwrap().pattern;
            FpLayout::TwoAc([(p[0], p[1]), (p[2], p[3])])
        };
        Ok(match name {
            "mono" => Self::Mono,
            "inter" => two(6),
            "intra" => two(7),
            "6pt-inter" => Self::SixPoint([(0, 1), (0, 1), (0, 1), (1, 0), (1, 0), (1, 0)]),
            "6pt-intra" => Self::SixPoint([(0, 0), (0, 0), (0, 0), (1, 1), (1, 1), (1, 1)]),
            s if s.starts_with("case") => match s[4..].parse::<u8>() {
                Ok(c @ 1..=9) => two(c),
                _ => return Err(FpError::UnknownConfig(name.to_string())),
            },
            _ => return Err(FpError::UnknownConfig(name.to_string())),
        })
    }

    pub fn camera_count(&self) -> usize {
        let pairs: &[(usize, usize)] = match self {
            Self::Mono => return 1,
            Self::TwoAc(p) => p,
            Self::SixPoint(p) => p,
        };
        pairs.iter().map(|p| p.0.max(p.1)).max().unwrap_or(0) + 1
    }
}

/// A plane through `point` with unit normal `normal` (rig frame at time k).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FpPlane {
    pub point: Vec3,
    pub normal: Vec3,
}

/// An exact random scene in Z_p.
#[derive(Clone, Debug)]
pub struct FpScene {
    pub field: PrimeField,
    pub layout: FpLayout,
    pub rig: FieldRig<PrimeField>,
    /// Ground-truth Cayley vector of the rig rotation.
    pub q: Vec3,
    pub rotation: Mat3,
    pub translation: Vec3,
    pub planes: Vec<FpPlane>,
    pub acs: Vec<FieldAc<PrimeField>>,
    pub pcs: Vec<FieldPc<PrimeField>>,
}

fn random_rotation<R: Rng>(f: PrimeField, rng: &mut R) -> (Vec3, Mat3) {
    loop {
        let q = rand_vec(f, rng);
        if let Some(r) = cayley_rotation_fp(f, &q) {
            return (q, r);
        }
    }
}

struct Observation {
    x: Vec3,
    xp: Vec3,
    a: [[u64; 2]; 2],
    plane: FpPlane,
}

/// Observe a random point of a random plane from camera `ci` (time k) and
/// camera `cj` (time k+1). Retries on degenerate draws.
fn observe<R: Rng>(
    f: PrimeField,
    rng: &mut R,
    rig: &FieldRig<PrimeField>,
    r: &Mat3,
    t: &Vec3,
    ci: usize,
    cj: usize,
) -> Result<Observation, FpError> {
    let (qi, qj) = (rig.rotations[ci], rig.rotations[cj]);
    let (si, sj) = (rig.centers[ci], rig.centers[cj]);
    // camera-pair pose
    let qjt = transpose(&qj);
    let rp = mat_mul(f, &qjt, &mat_mul(f, r, &qi));
    let tp = mat_vec(f, &qjt, &vsub(f, &vadd(f, &mat_vec(f, r, &si), t), &sj));
    for _ in 0..NORMAL_RETRIES {
        let normal = random_unit_normal_fp(f, rng, NORMAL_RETRIES)?;
        let point = rand_vec(f, rng);
        // signed distance from the camera center to the plane
        let d0 = dot(f, &normal, &vsub(f, &si, &point));
        if d0 == 0 {
            continue;
        }
        // plane in camera-i coordinates: (Q_i^T n) . X = -d0
        let nc = mat_vec(f, &transpose(&qi), &normal);
        let d = f.neg(d0);
        let h = fp_homography(f, &rp, &tp, &nc, d)?;
        let x = [rand_elem(f, rng), rand_elem(f, rng), 1];
        if dot(f, &nc, &x) == 0 {
            continue;
        }
        let xp = match fp_project(f, &h, &x) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let a = fp_affine_from_homography(f, &h, &x, &xp)?;
        return Ok(Observation {
            x,
            xp,
            a,
            plane: FpPlane { point, normal },
        });
    }
    Err(FpError::ExhaustedRetries(NORMAL_RETRIES))
}

/// Build a random consistent scene for `layout` over `f`.
pub fn synth_instance_fp<R: Rng>(
    f: PrimeField,
    layout: FpLayout,
    rng: &mut R,
) -> Result<FpScene, FpError> {
    let rig = match layout {
        FpLayout::Mono => FieldRig::monocular(f),
        _ => {
            let n = layout.camera_count();
            let mut rig = FieldRig {
                rotations: vec![],
                centers: vec![],
            };
            for _ in 0..n {
                rig.rotations.push(random_rotation(f, rng).1);
                rig.centers.push(rand_vec(f, rng));
            }
            rig
        }
    };
    let (q, rotation) = random_rotation(f, rng);
    let translation = rand_vec(f, rng);
    let mut scene = FpScene {
        field: f,
        layout,
        rig,
        q,
        rotation,
        translation,
        planes: vec![],
        acs: vec![],
        pcs: vec![],
    };
    let pairs: Vec<(usize, usize)> = match layout {
        FpLayout::Mono => vec![(0, 0), (0, 0)],
        FpLayout::TwoAc(p) => p.to_vec(),
        FpLayout::SixPoint(p) => p.to_vec(),
    };
    for (ci, cj) in pairs {
        let o = observe(f, rng, &scene.rig, &rotation, &translation, ci, cj)?;
        scene.planes.push(o.plane);
        let ac = FieldAc {
            x: o.x,
            xp: o.xp,
            a: o.a,
            cam_i: ci,
            cam_j: cj,
        };
        match layout {
            FpLayout::SixPoint(_) => scene.pcs.push(ac.point()),
            _ => scene.acs.push(ac),
        }
    }
    Ok(scene)
}

impl FpScene {
    /// Equation system of the scene (mono systems ignore `variant`).
    pub fn equations(&self, variant: Variant) -> Result<EquationSystem<PrimeField>, FpError> {
        let f = self.field;
        Ok(match self.layout {
            FpLayout::Mono => equations_mono(f, &self.acs[0], &self.acs[1])?,
            FpLayout::TwoAc(_) => {
                equations_gcam(f, &self.rig, &self.acs[0], &self.acs[1], variant)?
            }
            FpLayout::SixPoint(_) => equations_6pt(f, &self.rig, &self.pcs, variant)?,
        })
    }

    /// Coefficient matrix (`6x3` mono or `6x4` rig) of the scene.
    pub fn matrix(&self) -> Result<PolyMatrix<PrimeField>, FpError> {
        Ok(self.equations(Variant::E1)?.matrix)
    }

    /// Replace the affine map of AC `k` by a random matrix.
    pub fn corrupt_affine<R: Rng>(&mut self, k: usize, rng: &mut R) {
        let f = self.field;
        self.acs[k].a = [
            [rand_elem(f, rng), rand_elem(f, rng)],
            [rand_elem(f, rng), rand_elem(f, rng)],
        ];
    }
}

/// Rank of a small matrix over Z_p by Gaussian elimination.
pub fn rank_fp(f: PrimeField, rows: &[Vec<u64>]) -> usize {
    let mut m: Vec<Vec<u64>> = rows.to_vec();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..ncols {
        let Some(piv) = (rank..m.len()).find(|&r| m[r][c] != 0) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = f.inv(m[rank][c]).unwrap();
        for r in 0..m.len() {
            if r != rank && m[r][c] != 0 {
                let k = f.mul(m[r][c], inv);
                for cc in c..ncols {
                    let v = f.mul(k, m[rank][cc]);
                    m[r][cc] = f.sub(m[r][cc], v);
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Theorems checked by [`verify_theorems`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Theorem {
    /// 3x3 minors of the monocular matrix carry the factor `1 + q.q`.
    T2,
    /// The 3x3 translation block of each AC has rank 2 at the true rotation.
    T3,
    /// 4x4 minors and per-AC 3x3 blocks of the rig matrix carry the factor.
    T4,
    /// Same-pair PC triples have rank 2 blocks with the factor.
    T5,
    /// The constraint rows vanish at the ground-truth pose.
    Consistency,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub theorem: Theorem,
    pub name: String,
    pub pass: bool,
}

fn divisible(p: &crate::polynomial::Poly3<PrimeField>) -> bool {
    p.exact_quotient(&cayley_scale(p.field())).is_ok()
}

fn block_rank_at(scene: &FpScene, m: &PolyMatrix<PrimeField>, rows: &[usize]) -> usize {
    let vals = m.evaluate(scene.q);
    let rows: Vec<Vec<u64>> = rows
        .iter()
        .map(|&r| (0..3).map(|c| vals[r * m.ncols() + c]).collect())
        .collect();
    rank_fp(scene.field, &rows)
}

/// Exact theorem checks for `scene`. Checks that do not apply to the scene's
/// layout are skipped.
pub fn verify_theorems(scene: &FpScene, which: &[Theorem]) -> Result<Vec<CheckResult>, FpError> {
    let f = scene.field;
    let m = scene.matrix()?;
    let mut out = Vec::new();
    let mut push = |theorem, name: String, pass| {
        out.push(CheckResult {
            theorem,
            name,
            pass,
        })
    };
    let has = |t| which.contains(&t);
    // consistency: the scene satisfies its own constraint rows
    let vals = m.evaluate(scene.q);
    let nc = m.ncols();
    let mut tvec = scene.translation.to_vec();
    if nc == 4 {
        tvec.push(f.one());
    }
    match scene.layout {
        FpLayout::Mono => {
            if has(Theorem::T2) {
                for (r, res) in combinations(6, 3).into_iter().zip(mono_all_minors(&m)) {
                    push(Theorem::T2, format!("minor3 {r:?} divisible"), res.is_ok());
                }
            }
            if has(Theorem::T3) {
                for k in 0..2 {
                    let rows = [3 * k, 3 * k + 1, 3 * k + 2];
                    push(
                        Theorem::T3,
                        format!("ac{k} block rank 2"),
                        block_rank_at(scene, &m, &rows) == 2,
                    );
                }
            }
        }
        FpLayout::TwoAc(_) | FpLayout::SixPoint(_) => {
            if has(Theorem::T4) {
                for r in combinations(6, 4) {
                    let d = m.submatrix(&r, &[0, 1, 2, 3]).det().expect("4x4");
                    push(
                        Theorem::T4,
                        format!("minor4 {r:?} divisible"),
                        divisible(&d),
                    );
                }
            }
            let is_ac = matches!(scene.layout, FpLayout::TwoAc(_));
            let blocks: Vec<[usize; 3]> = if is_ac {
                vec![[0, 1, 2], [3, 4, 5]]
            } else {
                let pairs: Vec<(usize, usize)> =
                    scene.pcs.iter().map(|p| (p.cam_i, p.cam_j)).collect();
                shared_pair_triples(&pairs)
            };
            let (div_thm, rank_thm) = if is_ac {
                (Theorem::T4, Theorem::T3)
            } else {
                (Theorem::T5, Theorem::T5)
            };
            for b in blocks {
                if has(div_thm) {
                    let d = m.submatrix(&b, &[0, 1, 2]).det().expect("3x3");
                    push(div_thm, format!("block3 {b:?} divisible"), divisible(&d));
                }
                if has(rank_thm) {
                    push(
                        rank_thm,
                        format!("block3 {b:?} rank 2"),
                        block_rank_at(scene, &m, &b) == 2,
                    );
                }
            }
        }
    }
    // M (t, 1) = 0 at the ground truth
    for r in 0..m.nrows() {
        let mut acc = 0;
        for c in 0..nc {
            acc = f.add(acc, f.mul(vals[r * nc + c], tvec[c]));
        }
        out.push(CheckResult {
            theorem: Theorem::Consistency,
            name: format!("row {r} vanishes at ground truth"),
            pass: acc == 0,
        });
    }
    Ok(out)
}

/// Variant whose solution count is the configuration's headline number:
/// `E1` for monocular and inter-camera layouts, `E1E2` otherwise.
pub fn default_variant(layout: FpLayout) -> Variant {
    let intra = |pairs: &[(usize, usize)]| pairs.iter().all(|p| p.0 == p.1);
    match layout {
        FpLayout::Mono => Variant::E1,
        FpLayout::TwoAc(p) if !intra(&p) => Variant::E1,
        _ => Variant::E1E2,
    }
}

/// Outcome of one named check over all trials.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckSummary {
    pub name: String,
    pub theorem: Theorem,
    pub pass: bool,
    pub failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoremReport {
    pub config: String,
    pub variant: String,
    pub p: u64,
    pub seed: u64,
    pub trials: usize,
    pub checks: Vec<CheckSummary>,
    /// Failed checks summed over trials.
    pub failures: usize,
    /// Quotient dimension when every counted trial agrees.
    pub solution_count: Option<usize>,
    /// Distinct dimensions seen, ascending.
    pub solution_counts: Vec<usize>,
    /// Trials whose count failed (e.g. positive-dimensional systems).
    pub count_errors: usize,
}

/// Check every theorem on `trials` random instances of the named
/// configuration. Trial `k` draws from ChaCha8 stream `k` of `seed`.
pub fn verify_config(
    name: &str,
    field: PrimeField,
    trials: usize,
    seed: u64,
    variant: Option<Variant>,
    count: bool,
) -> Result<TheoremReport, FpError> {
    use rand::SeedableRng;
    let layout = FpLayout::named(name)?;
    let variant = variant.unwrap_or_else(|| default_variant(layout));
    let all = [
        Theorem::T2,
        Theorem::T3,
        Theorem::T4,
        Theorem::T5,
        Theorem::Consistency,
    ];
    let mut checks: Vec<CheckSummary> = Vec::new();
    let mut counts = Vec::new();
    let mut count_errors = 0;
    for k in 0..trials {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let scene = synth_instance_fp(field, layout, &mut rng)?;
        for c in verify_theorems(&scene, &all)? {
            match checks.iter_mut().find(|s| s.name == c.name) {
                Some(s) => {
                    s.pass &= c.pass;
                    s.failures += usize::from(!c.pass);
                }
                None => checks.push(CheckSummary {
                    name: c.name,
                    theorem: c.theorem,
                    pass: c.pass,
                    failures: usize::from(!c.pass),
                }),
            }
        }
        if count {
            match count_solutions_fp(&scene.equations(variant)?) {
                Ok(n) => counts.push(n),
                Err(_) => count_errors += 1,
            }
        }
    }
    counts.sort_unstable();
    counts.dedup();
    Ok(TheoremReport {
        config: name.to_string(),
        variant: format!("{variant:?}"),
        p: field.modulus(),
        seed,
        trials,
        failures: checks.iter().map(|c| c.failures).sum(),
        checks,
        solution_count: match counts[..] {
            [n] if count_errors == 0 => Some(n),
            _ => None,
        },
        solution_counts: counts,
        count_errors,
    })
}

/// Quotient-ring dimension of the scene's equation system.
pub fn count_solutions_fp(eqs: &EquationSystem<PrimeField>) -> Result<usize, FpError> {
    let gb = groebner_basis(&eqs.polys, DEFAULT_DEGREE_CAP)?;
    Ok(gb.standard_monomials()?.len())
}
