//! Elimination templates derived from random Z_p instances.
//!
//! A seeded Z_p instance of a configuration fixes the number of solutions
//! (standard monomials of its Groebner basis). Every polynomial is multiplied
//! by all monomials up to the expansion degree; the degree is accepted when
//! exact elimination over Z_p leaves a quotient of the right size and the
//! resulting action matrix has the instance's root as an eigenvector.

use crate::constraints::{EquationSystem, Variant};
use crate::finite_field::groebner::{groebner_basis, DEFAULT_DEGREE_CAP};
use crate::finite_field::{synth_instance_fp, FpError, FpLayout};
use crate::polynomial::monomial::{count_below, Monomial};
use crate::polynomial::{Field, Poly3, PrimeField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Largest expansion degree tried before giving up.
pub const MAX_EXPANSION_DEGREE: usize = 12;

/// Frozen expansion degrees for the named configurations, found by
/// [`discover_expansion_degree`].
pub const EXPANSION_DEGREES: &[(&str, Variant, usize)] = &[
    ("mono", Variant::E1, 5),
    ("case1", Variant::E1, 8),
    ("case1", Variant::E1E2, 7),
    ("inter", Variant::E1, 7),
    ("inter", Variant::E1E2, 7),
    ("intra", Variant::E1E2, 7),
    ("6pt-inter", Variant::E1, 7),
    ("6pt-inter", Variant::E1E2, 7),
    ("6pt-intra", Variant::E1E2, 7),
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TemplateError {
    #[error("elimination cannot isolate the quotient basis up to degree {0}")]
    RankDeficient(usize),
    #[error("system is not zero-dimensional")]
    NotZeroDimensional,
    #[error("basis size {got} differs from the expected {expected}")]
    BasisSize { expected: usize, got: usize },
    #[error(transparent)]
    Fp(#[from] FpError),
}

/// Elimination template: which polynomial multiples to stack and how the
/// monomial columns are partitioned.
///
/// Columns are ordered `[E | R | P]`. `P` (permissible) holds monomials whose
/// `qx` multiple is also a column, `R = qx * P \ P` and `E` is the rest. At
/// solve time `E` and `R` are eliminated and a column-pivoted QR of the
/// remaining `P` block selects `n_solutions` basis monomials.
#[derive(Clone, Debug)]
pub struct Template {
    pub expansion_degree: usize,
    /// Largest degree of a permissible monomial.
    pub permissible_degree: usize,
    /// Number of solutions (size of the quotient basis).
    pub n_solutions: usize,
    /// Standard monomials of the Groebner basis of the generating instance.
    pub standard_basis: Vec<Monomial>,
    /// Template rows: (polynomial index, multiplier).
    pub rows: Vec<(usize, Monomial)>,
    pub excess: Vec<Monomial>,
    /// Rank of the excess block on the generating instance.
    pub excess_rank: usize,
    pub reducible: Vec<Monomial>,
    pub permissible: Vec<Monomial>,
    /// Column of each monomial (by grevlex index); `usize::MAX` if absent.
    pub column_of: Vec<usize>,
}

impl Template {
    pub fn n_columns(&self) -> usize {
        self.excess.len() + self.reducible.len() + self.permissible.len()
    }

    /// Position of `m` in the permissible block.
    pub fn permissible_index(&self, m: &Monomial) -> Option<usize> {
        let c = *self.column_of.get(m.grevlex_index())?;
        let first = self.excess.len() + self.reducible.len();
        (c != usize::MAX && c >= first).then(|| c - first)
    }

    /// Position of `m` in the reducible block.
    pub fn reducible_index(&self, m: &Monomial) -> Option<usize> {
        let c = *self.column_of.get(m.grevlex_index())?;
        let (a, b) = (self.excess.len(), self.excess.len() + self.reducible.len());
        (c != usize::MAX && c >= a && c < b).then(|| c - a)
    }
}

fn expansion_rows(degrees: &[usize], d: usize) -> Vec<(usize, Monomial)> {
    let mut rows = Vec::new();
    for (i, &deg) in degrees.iter().enumerate() {
        if deg > d {
            continue;
        }
        for k in 0..count_below(d - deg + 1) {
            rows.push((i, Monomial::from_grevlex_index(k)));
        }
    }
    rows
}

/// Gaussian elimination over Z_p to reduced row echelon form. Returns the
/// pivot columns (one per nonzero row, in order).
fn rref(f: PrimeField, m: &mut [Vec<u64>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for c in 0..ncols {
        if row == m.len() {
            break;
        }
        let Some(p) = (row..m.len()).find(|&r| m[r][c] != 0) else {
            continue;
        };
        m.swap(row, p);
        let inv = f.inv(m[row][c]).unwrap();
        for v in m[row][c..].iter_mut() {
            *v = f.mul(*v, inv);
        }
        let pivot_row = m[row].clone();
        for (r, other) in m.iter_mut().enumerate() {
            if r == row || other[c] == 0 {
                continue;
            }
            let k = other[c];
            for cc in c..ncols {
                if pivot_row[cc] != 0 {
                    other[cc] = f.sub(other[cc], f.mul(k, pivot_row[cc]));
                }
            }
        }
        pivots.push(c);
        row += 1;
    }
    pivots
}

/// Try to build a template of expansion degree `d`, preferring the largest
/// permissible set that still isolates the quotient.
fn try_build(
    polys: &[Poly3<PrimeField>],
    standard: &[Monomial],
    d: usize,
    root: Option<[u64; 3]>,
) -> Option<Template> {
    let lo = standard.iter().map(|m| m.degree()).max().unwrap_or(0);
    (lo..d)
        .rev()
        .find_map(|dp| try_build_with(polys, standard, d, dp, root))
}

/// Template with permissible monomials of degree at most `dp`. `root`
/// (when given) validates the action matrix exactly.
fn try_build_with(
    polys: &[Poly3<PrimeField>],
    standard: &[Monomial],
    d: usize,
    dp: usize,
    root: Option<[u64; 3]>,
) -> Option<Template> {
    let n = standard.len();
    let f = polys[0].field();
    let degrees: Vec<usize> = polys.iter().map(|p| p.degree()).collect();
    let rows = expansion_rows(&degrees, d);
    let mut present = vec![false; count_below(d + 1)];
    for &(i, m) in &rows {
        for (t, _) in polys[i].terms() {
            present[t.mul(&m).grevlex_index()] = true;
        }
    }
    // descending grevlex within each block
    let all: Vec<Monomial> = (0..present.len())
        .rev()
        .filter(|&k| present[k])
        .map(Monomial::from_grevlex_index)
        .collect();
    let is_present = |m: &Monomial| m.degree() <= d && present[m.grevlex_index()];
    let permissible: Vec<Monomial> = all
        .iter()
        .copied()
        .filter(|m| m.degree() <= dp && is_present(&m.mul(&Monomial::X)))
        .collect();
    for v in 0..3 {
        if !permissible.contains(&Monomial::var(v)) {
            return None;
        }
    }
    if !permissible.contains(&Monomial::ONE) || permissible.len() < n {
        return None;
    }
    let mut reducible: Vec<Monomial> = permissible
        .iter()
        .map(|m| m.mul(&Monomial::X))
        .filter(|m| !permissible.contains(m))
        .collect();
    reducible.sort_by(|a, b| b.cmp(a));
    reducible.dedup();
    let excess: Vec<Monomial> = all
        .iter()
        .copied()
        .filter(|m| !permissible.contains(m) && !reducible.contains(m))
        .collect();
    let mut column_of = vec![usize::MAX; count_below(d + 1)];
    for (k, m) in excess
        .iter()
        .chain(reducible.iter())
        .chain(permissible.iter())
        .enumerate()
    {
        column_of[m.grevlex_index()] = k;
    }
    let (ne, nr, np) = (excess.len(), reducible.len(), permissible.len());
    let ncols = ne + nr + np;
    let mut mat: Vec<Vec<u64>> = rows
        .iter()
        .map(|&(i, m)| {
            let mut r = vec![0u64; ncols];
            for &(t, c) in polys[i].terms() {
                r[column_of[t.mul(&m).grevlex_index()]] = c;
            }
            r
        })
        .collect();
    let pivots = rref(f, &mut mat, ncols);
    let excess_rank = pivots.iter().filter(|&&c| c < ne).count();
    let r_pivots = pivots.iter().filter(|&&c| c >= ne && c < ne + nr).count();
    let p_pivots = pivots.iter().filter(|&&c| c >= ne + nr).count();
    if r_pivots != nr || p_pivots + n != np {
        return None;
    }
    if let Some(q) = root {
        // exact check with the Z_p basis (non-pivot P columns)
        let mut row_of = vec![usize::MAX; ncols];
        for (r, &c) in pivots.iter().enumerate() {
            row_of[c] = r;
        }
        let basis: Vec<usize> = (ne + nr..ncols)
            .filter(|&c| row_of[c] == usize::MAX)
            .collect();
        let bval: Vec<u64> = basis
            .iter()
            .map(|&c| {
                let m = permissible[c - ne - nr];
                Poly3::term(f, m, f.one()).evaluate(q)
            })
            .collect();
        let value = |c: usize| -> u64 {
            if row_of[c] == usize::MAX {
                let k = basis.iter().position(|&b| b == c).unwrap();
                return bval[k];
            }
            let row = &mat[row_of[c]];
            let mut s = 0;
            for (k, &b) in basis.iter().enumerate() {
                s = f.add(s, f.mul(row[b], bval[k]));
            }
            f.neg(s)
        };
        for (k, &b) in basis.iter().enumerate() {
            let xb = permissible[b - ne - nr].mul(&Monomial::X);
            let c = column_of[xb.grevlex_index()];
            if value(c) != f.mul(q[0], bval[k]) {
                return None;
            }
        }
    }
    Some(Template {
        expansion_degree: d,
        permissible_degree: dp,
        n_solutions: n,
        standard_basis: standard.to_vec(),
        rows,
        excess,
        excess_rank,
        reducible,
        permissible,
        column_of,
    })
}

fn standard_basis(polys: &[Poly3<PrimeField>]) -> Result<Vec<Monomial>, TemplateError> {
    let gb = groebner_basis(polys, DEFAULT_DEGREE_CAP).map_err(FpError::from)?;
    gb.standard_monomials()
        .map_err(|_| TemplateError::NotZeroDimensional)
}

/// Build a template for a Z_p system, trying degrees from `start` upward.
pub fn build_template(
    eqs: &EquationSystem<PrimeField>,
    start: usize,
    root: Option<[u64; 3]>,
) -> Result<Template, TemplateError> {
    let expected = match eqs.expected {
        crate::constraints::SolutionCount::Finite(n) => Some(n),
        crate::constraints::SolutionCount::OneDimensional => {
            return Err(TemplateError::NotZeroDimensional)
        }
        crate::constraints::SolutionCount::Unknown => None,
    };
    build_template_from_polys(&eqs.polys, expected, start, root)
}

/// Build a template for an arbitrary zero-dimensional system over Z_p.
pub fn build_template_from_polys(
    polys: &[Poly3<PrimeField>],
    expected: Option<usize>,
    start: usize,
    root: Option<[u64; 3]>,
) -> Result<Template, TemplateError> {
    let basis = standard_basis(polys)?;
    if let Some(n) = expected {
        if n != basis.len() {
            return Err(TemplateError::BasisSize {
                expected: n,
                got: basis.len(),
            });
        }
    }
    let min_d = polys.iter().map(|p| p.degree()).max().unwrap_or(0);
    for d in start.max(min_d)..=MAX_EXPANSION_DEGREE {
        if let Some(t) = try_build(polys, &basis, d, root) {
            return Ok(t);
        }
    }
    Err(TemplateError::RankDeficient(MAX_EXPANSION_DEGREE))
}

/// Smallest expansion degree that eliminates successfully on `instances`
/// seeded random instances of `layout`.
pub fn discover_expansion_degree(
    layout: FpLayout,
    variant: Variant,
    instances: usize,
    seed: u64,
) -> Result<usize, TemplateError> {
    let f = PrimeField::new(crate::finite_field::DEFAULT_PRIME).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = 0;
    for _ in 0..instances {
        let scene = synth_instance_fp(f, layout, &mut rng)?;
        let eqs = scene.equations(variant)?;
        let t = build_template(&eqs, d, Some(scene.q))?;
        d = d.max(t.expansion_degree);
    }
    Ok(d)
}

/// Key identifying a template: the relabelled camera-pair pattern of the
/// correspondences (empty for monocular) and the variant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TemplateKey {
    pub layout: FpLayout,
    pub variant: Variant,
}

fn frozen_degree(layout: FpLayout, variant: Variant) -> Option<usize> {
    EXPANSION_DEGREES.iter().find_map(|(name, v, d)| {
        let l = FpLayout::named(name).ok()?;
        (l == layout && *v == variant).then_some(*d)
    })
}

const TEMPLATE_SEED: u64 = 0x7e3a_11c5;

fn build_for_key(key: &TemplateKey, degree: Option<usize>) -> Result<Template, TemplateError> {
    let f = PrimeField::new(crate::finite_field::DEFAULT_PRIME).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(TEMPLATE_SEED);
    let start = degree
        .or_else(|| frozen_degree(key.layout, key.variant))
        .unwrap_or(0);
    let scene = synth_instance_fp(f, key.layout, &mut rng)?;
    let eqs = scene.equations(key.variant)?;
    build_template(&eqs, start, Some(scene.q))
}

type Cache = Mutex<HashMap<TemplateKey, Result<Arc<Template>, TemplateError>>>;

/// Cached template for `key`, built on first use.
pub fn template_for(key: &TemplateKey) -> Result<Arc<Template>, TemplateError> {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().unwrap().get(key) {
        return t.clone();
    }
    let built = build_for_key(key, None).map(Arc::new);
    cache.lock().unwrap().insert(key.clone(), built.clone());
    built
}

/// Template for `key`; an explicit `degree` bypasses the cache.
pub fn template_with_degree(
    key: &TemplateKey,
    degree: Option<usize>,
) -> Result<Arc<Template>, TemplateError> {
    match degree {
        None => template_for(key),
        Some(d) => build_for_key(key, Some(d)).map(Arc::new),
    }
}
