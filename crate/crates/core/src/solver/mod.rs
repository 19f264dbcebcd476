//! Numeric solution of the Cayley systems and the minimal solvers built on it.

pub mod catalog;
pub mod linear17;
pub mod minimal;
pub mod template;

use crate::constraints::ConstraintError;
use crate::geometry::{GeometryError, RelativePose};
use crate::polynomial::monomial::Monomial;
use crate::polynomial::{Poly3, Reals};
use nalgebra::{DMatrix, DVector, Vector3};
use template::{Template, TemplateError};

pub use catalog::{SampleLayout, SolverKind};
pub use linear17::solve_17pt_linear;
pub use minimal::{
    solve_2ac_gcam, solve_2ac_mono, solve_6pt_gcam, translation_for_rotation, VariantChoice,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("elimination template is rank deficient: {0}")]
    RankDeficientTemplate(String),
    #[error("no real roots")]
    NoRealRoots,
    #[error("translation null space collapsed")]
    RankCollapse,
    #[error("translation scale is unobservable for this motion")]
    ScaleUnobservable,
    #[error("configuration has a one-dimensional solution family")]
    OneDimensionalFamily,
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("insufficient correspondences: {0}")]
    InsufficientSpan(String),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl From<TemplateError> for SolverError {
    fn from(e: TemplateError) -> Self {
        match e {
            TemplateError::NotZeroDimensional => SolverError::OneDimensionalFamily,
            e => SolverError::RankDeficientTemplate(e.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Overrides the frozen expansion degree of the configuration.
    pub expansion_degree: Option<usize>,
    /// Accept an eigenvalue when `|Im| <= real_tolerance * max(|lambda|, 1)`.
    pub real_tolerance: f64,
    /// Largest relative polynomial residual of a kept root.
    pub residual_tolerance: f64,
    /// Apply the rig-frame normalization to intra-camera configurations.
    pub normalize_intra: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            expansion_degree: None,
            real_tolerance: 1e-6,
            residual_tolerance: 1e-6,
            normalize_intra: true,
        }
    }
}

impl SolverConfig {
    /// Configuration for noisy data: every real root is kept.
    pub fn noisy() -> Self {
        Self {
            residual_tolerance: f64::INFINITY,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub pose: RelativePose,
    pub cayley: Vector3<f64>,
    /// Largest relative residual over the emitted polynomials.
    pub residual: f64,
    /// Ranking key (smaller is better).
    pub score: f64,
    /// False when the translation is only known up to scale.
    pub scale_valid: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolutionSet {
    pub candidates: Vec<Candidate>,
}

impl SolutionSet {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn best(&self) -> Option<&Candidate> {
        self.candidates.first()
    }

    pub(crate) fn sort(&mut self) {
        self.candidates.sort_by(|a, b| {
            a.score
                .total_cmp(&b.score)
                .then(a.residual.total_cmp(&b.residual))
        });
    }
}

/// Largest relative residual of `polys` at `q`.
pub fn system_residual(polys: &[Poly3<Reals>], q: [f64; 3]) -> f64 {
    polys
        .iter()
        .map(|p| p.relative_residual(q))
        .fold(0.0, f64::max)
}

/// Result of the numeric elimination: the action matrix on the selected
/// basis and the map from basis values to all permissible monomials.
pub struct Elimination {
    pub action: DMatrix<f64>,
    /// `|P| x n`: permissible monomial values from basis values.
    pub phi: DMatrix<f64>,
}

fn rank_deficient(msg: impl Into<String>) -> SolverError {
    SolverError::RankDeficientTemplate(msg.into())
}

/// Fill the template matrix, eliminate the excess and reducible blocks and
/// select the basis by column-pivoted QR of the permissible block.
pub fn eliminate(polys: &[Poly3<Reals>], tpl: &Template) -> Result<Elimination, SolverError> {
    let (ne, nr, np) = (tpl.excess.len(), tpl.reducible.len(), tpl.permissible.len());
    let n = tpl.n_solutions;
    let nrows = tpl.rows.len();
    let mut c = DMatrix::<f64>::zeros(nrows, ne + nr + np);
    for (row, &(i, m)) in tpl.rows.iter().enumerate() {
        let p = polys
            .get(i)
            .ok_or_else(|| rank_deficient("template references a missing polynomial"))?;
        for &(t, v) in p.terms() {
            let idx = t.mul(&m).grevlex_index();
            if let Some(&col) = tpl.column_of.get(idx) {
                if col != usize::MAX {
                    c[(row, col)] = v;
                }
            }
        }
    }
    // excess block: its generic rank is known from the template
    let mut rest = c.columns(ne, nr + np).into_owned();
    let mut skip = 0;
    if ne > 0 {
        let qr = c.columns(0, ne).into_owned().col_piv_qr();
        qr.q_tr_mul(&mut rest);
        skip = tpl.excess_rank.min(nrows);
    }
    let rest = rest.rows(skip, nrows - skip).into_owned();
    if rest.nrows() < nr + np - n {
        return Err(rank_deficient(format!(
            "{} rows left for {} unknown monomials",
            rest.nrows(),
            nr + np - n
        )));
    }
    // reducible block
    let qr = rest.columns(0, nr).into_owned().qr();
    let mut cp = rest.columns(nr, np).into_owned();
    qr.q_tr_mul(&mut cp);
    let ur = qr.r().view((0, 0), (nr, nr)).into_owned();
    check_triangular(&ur, "reducible")?;
    let g = cp.rows(0, nr).into_owned();
    let w = cp.rows(nr, cp.nrows() - nr).into_owned();
    // basis selection on the permissible block
    let k = np - n;
    let cpqr = w.col_piv_qr();
    let rw = cpqr.r();
    let r11 = rw.view((0, 0), (k, k)).into_owned();
    check_triangular(&r11, "permissible")?;
    let r12 = rw.view((0, k), (k, n)).into_owned();
    let t2 = -r11
        .solve_upper_triangular(&r12)
        .ok_or_else(|| rank_deficient("singular permissible block"))?;
    // column order after pivoting
    let mut perm: Vec<usize> = (0..np).collect();
    {
        let mut idx = DMatrix::from_fn(1, np, |_, j| j as f64);
        cpqr.p().permute_columns(&mut idx);
        for j in 0..np {
            perm[j] = idx[(0, j)] as usize;
        }
    }
    let mut phi = DMatrix::<f64>::zeros(np, n);
    for j in 0..k {
        phi.row_mut(perm[j]).copy_from(&t2.row(j));
    }
    for j in 0..n {
        phi[(perm[k + j], j)] = 1.0;
    }
    // reducible values: x_R = -U_R^-1 G x_P
    let psi = -ur
        .solve_upper_triangular(&(g * &phi))
        .ok_or_else(|| rank_deficient("singular reducible block"))?;
    let mut action = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let xb = tpl.permissible[perm[k + j]].mul(&Monomial::X);
        if let Some(pi) = tpl.permissible_index(&xb) {
            action.row_mut(j).copy_from(&phi.row(pi));
        } else if let Some(ri) = tpl.reducible_index(&xb) {
            action.row_mut(j).copy_from(&psi.row(ri));
        } else {
            return Err(rank_deficient("basis multiple outside the template"));
        }
    }
    Ok(Elimination { action, phi })
}

fn check_triangular(r: &DMatrix<f64>, what: &str) -> Result<(), SolverError> {
    let n = r.nrows();
    if n == 0 {
        return Ok(());
    }
    let d: Vec<f64> = (0..n).map(|k| r[(k, k)].abs()).collect();
    let (lo, hi) = d
        .iter()
        .fold((f64::INFINITY, 0f64), |(a, b), &x| (a.min(x), b.max(x)));
    if !(lo > 1e-14 * hi) {
        return Err(rank_deficient(format!(
            "{what} block conditioning {:.1e}",
            lo / hi
        )));
    }
    Ok(())
}

/// Action matrix of multiplication by `qx` on the selected basis.
pub fn action_matrix(polys: &[Poly3<Reals>], tpl: &Template) -> Result<DMatrix<f64>, SolverError> {
    Ok(eliminate(polys, tpl)?.action)
}

/// Real eigenvalues of `m` (imaginary part within the tolerance).
fn real_eigenvalues(m: &DMatrix<f64>, real_tol: f64) -> Vec<f64> {
    let Some(schur) = m.clone().try_schur(1e-14, 10_000) else {
        return Vec::new();
    };
    let mut out: Vec<f64> = schur
        .complex_eigenvalues()
        .iter()
        .filter(|l| l.im.abs() <= real_tol * l.re.abs().max(1.0))
        .map(|l| l.re)
        .collect();
    out.sort_by(|a, b| a.total_cmp(b));
    out
}

/// Eigenvector for the eigenvalue `lambda` by inverse iteration.
fn eigenvector(m: &DMatrix<f64>, lambda: f64) -> Option<DVector<f64>> {
    let n = m.nrows();
    let shift = lambda + 1e-10 * lambda.abs().max(1.0);
    let lu = (m - DMatrix::identity(n, n) * shift).lu();
    let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.1 * ((i * 7919) % 13) as f64);
    for _ in 0..3 {
        let w = lu.solve(&v)?;
        let norm = w.norm();
        if !norm.is_finite() || norm == 0.0 {
            return None;
        }
        v = w / norm;
    }
    Some(v)
}

/// Solve `polys` using `tpl`. Returns distinct real roots whose residual is
/// within the configured tolerance, ordered by residual.
pub fn solve_with_template(
    polys: &[Poly3<Reals>],
    tpl: &Template,
    cfg: &SolverConfig,
) -> Result<Vec<[f64; 3]>, SolverError> {
    let elim = eliminate(polys, tpl)?;
    let at = |m: Monomial| tpl.permissible_index(&m).expect("template keeps 1, qy, qz");
    let (i1, iy, iz) = (at(Monomial::ONE), at(Monomial::Y), at(Monomial::Z));
    let scaled: Vec<Poly3<Reals>> = polys.iter().map(|p| p.normalized()).collect();
    let mut roots: Vec<([f64; 3], f64)> = Vec::new();
    for lambda in real_eigenvalues(&elim.action, cfg.real_tolerance) {
        let Some(v) = eigenvector(&elim.action, lambda) else {
            continue;
        };
        let vals = &elim.phi * v;
        let one = vals[i1];
        if one.abs() < 1e-300 {
            continue;
        }
        let q = [lambda, vals[iy] / one, vals[iz] / one];
        if q.iter().any(|x| !x.is_finite()) {
            continue;
        }
        let q = polish(polys, &scaled, q);
        let res = system_residual(polys, q);
        if res <= cfg.residual_tolerance {
            roots.push((q, res));
        }
    }
    if roots.is_empty() {
        return Err(SolverError::NoRealRoots);
    }
    // merge duplicates from repeated eigenvalues
    roots.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut out: Vec<[f64; 3]> = Vec::new();
    for (q, _) in roots {
        let dup = out.iter().any(|o| {
            let d: f64 = (0..3).map(|k| (o[k] - q[k]).powi(2)).sum::<f64>().sqrt();
            d <= 1e-9 * (1.0 + q.iter().map(|x| x * x).sum::<f64>().sqrt())
        });
        if !dup {
            out.push(q);
        }
    }
    Ok(out)
}

/// A few Gauss-Newton steps on the full system, each kept only when it
/// lowers the residual.
fn polish(polys: &[Poly3<Reals>], scaled: &[Poly3<Reals>], mut q: [f64; 3]) -> [f64; 3] {
    let mut res = system_residual(polys, q);
    if res <= POLISH_SKIP {
        return q;
    }
    for _ in 0..POLISH_STEPS {
        let mut j = DMatrix::<f64>::zeros(scaled.len(), 3);
        let mut f = DVector::<f64>::zeros(scaled.len());
        for (r, p) in scaled.iter().enumerate() {
            let (v, g) = p.value_and_gradient(q);
            f[r] = v;
            for k in 0..3 {
                j[(r, k)] = g[k];
            }
        }
        let Some(step) = j.svd(true, true).solve(&f, 1e-12).ok() else {
            break;
        };
        let next = [q[0] - step[0], q[1] - step[1], q[2] - step[2]];
        let r = system_residual(polys, next);
        if !(r < res) {
            break;
        }
        q = next;
        res = r;
    }
    q
}

const POLISH_STEPS: usize = 3;
const POLISH_SKIP: f64 = 1e-11;

/// Null vector of an evaluated `6x4` rig matrix, normalized by its last entry.
pub fn recover_translation_gcam(m: &DMatrix<f64>) -> Result<Vector3<f64>, SolverError> {
    if m.ncols() != 4 || m.nrows() < 3 {
        return Err(SolverError::DegenerateInput(format!(
            "expected an n x 4 matrix, got {} x {}",
            m.nrows(),
            m.ncols()
        )));
    }
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.as_ref().unwrap();
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let s = |k: usize| svd.singular_values[order[k]];
    if s(0) == 0.0 {
        return Err(SolverError::RankCollapse);
    }
    // a second null direction makes the scale ambiguous
    if m.nrows() >= 4 && s(2) < SCALE_TOL * s(0) {
        return Err(SolverError::ScaleUnobservable);
    }
    let v = vt.row(order[3]).transpose();
    if v[3].abs() < SCALE_TOL * v.norm() {
        return Err(SolverError::ScaleUnobservable);
    }
    Ok(Vector3::new(v[0], v[1], v[2]) / v[3])
}

/// Relative threshold for declaring the translation scale unobservable.
pub const SCALE_TOL: f64 = 1e-6;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polynomial::{var, PrimeField};
    use template::build_template_from_polys;

    #[test]
    fn trivial_system() {
        let fp = PrimeField::new(30011).unwrap();
        let zp = |f: PrimeField| {
            vec![
                var(f, 0).mul(&var(f, 0)).sub(&Poly3::constant(f, 1)),
                var(f, 1),
                var(f, 2),
            ]
        };
        let tpl = build_template_from_polys(&zp(fp), Some(2), 0, Some([1, 0, 0])).unwrap();
        let polys = vec![
            var(Reals, 0)
                .mul(&var(Reals, 0))
                .sub(&Poly3::constant(Reals, 1.0)),
            var(Reals, 1),
            var(Reals, 2),
        ];
        let mut roots = solve_with_template(&polys, &tpl, &SolverConfig::default()).unwrap();
        roots.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert_eq!(roots.len(), 2);
        for (r, x) in roots.iter().zip([-1.0, 1.0]) {
            assert!((r[0] - x).abs() < 1e-12 && r[1].abs() < 1e-12 && r[2].abs() < 1e-12);
        }
    }

    #[test]
    fn translation_scale() {
        let t = Vector3::new(0.3, -1.0, 2.0);
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let m = DMatrix::from_fn(6, 4, |_, _| rng.random_range(-1.0..1.0));
        // make (t, 1) a null vector by fixing the last column
        let mut m = m;
        for i in 0..6 {
            let v = m[(i, 0)] * t[0] + m[(i, 1)] * t[1] + m[(i, 2)] * t[2];
            m[(i, 3)] = -v;
        }
        let got = recover_translation_gcam(&m).unwrap();
        assert!((got - t).norm() < 1e-10);
        let scaled = &m * 10.0;
        assert!((recover_translation_gcam(&scaled).unwrap() - t).norm() < 1e-10);
        // rows orthogonal to t with a vanishing last column: (t, 0) and (0, 1)
        for i in 0..6 {
            let a = Vector3::new(m[(i, 0)], m[(i, 1)], m[(i, 2)]).cross(&t);
            for k in 0..3 {
                m[(i, k)] = a[k];
            }
            m[(i, 3)] = 0.0;
        }
        assert_eq!(
            recover_translation_gcam(&m),
            Err(SolverError::ScaleUnobservable)
        );
    }
}
