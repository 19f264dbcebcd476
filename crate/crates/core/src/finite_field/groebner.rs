//! Buchberger's algorithm over Z_p in graded reverse lexicographic order.

use crate::polynomial::monomial::{count_below, Monomial};
use crate::polynomial::{Field, Poly3, PrimeField};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroebnerError {
    #[error("S-pair sugar degree {0} exceeds the cap {1}")]
    DegreeCap(usize, usize),
    #[error("the ideal is not zero-dimensional (no pure power of {0} among leading terms)")]
    NotZeroDimensional(&'static str),
    #[error("the ideal is the whole ring (no solutions)")]
    UnitIdeal,
}

/// Default cap on the sugar degree of processed S-pairs.
pub const DEFAULT_DEGREE_CAP: usize = 14;

/// Reduced Groebner basis, each element monic, sorted by leading monomial.
#[derive(Clone, Debug)]
pub struct GroebnerBasis {
    pub field: PrimeField,
    pub polys: Vec<Poly3<PrimeField>>,
}

struct Elem {
    /// Dense-free sparse terms, descending grevlex (leading term first).
    terms: Vec<(Monomial, u64)>,
    sugar: usize,
    active: bool,
}

impl Elem {
    fn lm(&self) -> Monomial {
        self.terms[0].0
    }
}

#[derive(Clone, Copy)]
struct Pair {
    i: usize,
    j: usize,
    lcm: Monomial,
    sugar: usize,
}

/// Normal form of a dense coefficient vector (indexed by grevlex position)
/// with respect to the active basis elements. Returns sparse descending terms.
fn reduce_dense(f: PrimeField, buf: &mut [u64], basis: &[Elem]) -> Vec<(Monomial, u64)> {
    let p = f.modulus();
    let mut out = Vec::new();
    for idx in (0..buf.len()).rev() {
        let c = buf[idx];
        if c == 0 {
            continue;
        }
        let m = Monomial::from_grevlex_index(idx);
        let red = basis.iter().find(|g| g.active && g.lm().divides(&m));
        match red {
            Some(g) => {
                // g is monic: subtract c * (m / lm) * g
                let q = g.lm().quotient_of(&m);
                buf[idx] = 0;
                for &(gm, gc) in &g.terms[1..] {
                    let j = gm.mul(&q).grevlex_index();
                    let v = c * gc % p;
                    buf[j] = if buf[j] >= v {
                        buf[j] - v
                    } else {
                        buf[j] + p - v
                    };
                }
            }
            None => {
                out.push((m, c));
                buf[idx] = 0;
            }
        }
    }
    out
}

fn make_monic(f: PrimeField, terms: &mut [(Monomial, u64)]) {
    if let Some(&(_, lc)) = terms.first() {
        let inv = f.inv(lc).expect("nonzero leading coefficient");
        for t in terms.iter_mut() {
            t.1 = f.mul(t.1, inv);
        }
    }
}

fn to_desc_terms(p: &Poly3<PrimeField>) -> Vec<(Monomial, u64)> {
    p.terms().iter().rev().copied().collect()
}

fn s_poly_dense(f: PrimeField, a: &Elem, b: &Elem, lcm: Monomial) -> Vec<u64> {
    // grevlex is degree compatible, so no term exceeds the lcm degree
    let mut buf = vec![0u64; count_below(lcm.degree() + 1)];
    let qa = a.lm().quotient_of(&lcm);
    let qb = b.lm().quotient_of(&lcm);
    for &(m, c) in &a.terms {
        let j = m.mul(&qa).grevlex_index();
        buf[j] = f.add(buf[j], c);
    }
    for &(m, c) in &b.terms {
        let j = m.mul(&qb).grevlex_index();
        buf[j] = f.sub(buf[j], c);
    }
    buf
}

fn pair_sugar(basis: &[Elem], i: usize, j: usize, lcm: &Monomial) -> usize {
    let si = basis[i].sugar + lcm.degree() - basis[i].lm().degree();
    let sj = basis[j].sugar + lcm.degree() - basis[j].lm().degree();
    si.max(sj)
}

/// Gebauer-Moeller update after adding basis element `h`.
fn update(basis: &mut [Elem], pairs: &mut Vec<Pair>, h: usize) {
    let lh = basis[h].lm();
    // drop old pairs made redundant by h (chain criterion)
    pairs.retain(|pr| {
        !(lh.divides(&pr.lcm)
            && basis[pr.i].lm().lcm(&lh) != pr.lcm
            && basis[pr.j].lm().lcm(&lh) != pr.lcm)
    });
    let cands: Vec<(usize, Monomial)> = (0..h)
        .filter(|&g| basis[g].active)
        .map(|g| (g, basis[g].lm().lcm(&lh)))
        .collect();
    let mut kept: Vec<(usize, Monomial)> = Vec::new();
    for (k, &(g, l)) in cands.iter().enumerate() {
        let coprime = basis[g].lm().is_coprime(&lh);
        // discard if another candidate's lcm properly divides this one, or an
        // earlier candidate has the same lcm
        let dominated = cands
            .iter()
            .enumerate()
            .any(|(k2, &(_, l2))| k2 != k && l2.divides(&l) && (l2 != l || k2 < k));
        // coprime leading terms: product criterion, the pair reduces to zero
        if !dominated && !coprime {
            kept.push((g, l));
        }
    }
    for (g, l) in kept {
        let sugar = pair_sugar(basis, g, h, &l);
        pairs.push(Pair {
            i: g,
            j: h,
            lcm: l,
            sugar,
        });
    }
    // elements whose leading term is divisible by lm(h) become redundant
    for g in 0..h {
        if basis[g].active && lh.divides(&basis[g].lm()) {
            basis[g].active = false;
        }
    }
}

/// Reduced Groebner basis of the ideal generated by `polys`.
pub fn groebner_basis(
    polys: &[Poly3<PrimeField>],
    degree_cap: usize,
) -> Result<GroebnerBasis, GroebnerError> {
    let f = match polys.first() {
        Some(p) => p.field(),
        None => {
            return Ok(GroebnerBasis {
                field: PrimeField::new(crate::polynomial::field::DEFAULT_PRIME).unwrap(),
                polys: vec![],
            })
        }
    };
    let mut basis: Vec<Elem> = Vec::new();
    let mut pairs: Vec<Pair> = Vec::new();
    // insert inputs in increasing degree, reducing each by the previous ones
    let mut inputs: Vec<&Poly3<PrimeField>> = polys.iter().filter(|p| !p.is_zero()).collect();
    inputs.sort_by_key(|p| p.degree());
    for p in inputs {
        let deg = p.degree();
        let mut buf = vec![0u64; count_below(deg + 1)];
        for &(m, c) in p.terms() {
            buf[m.grevlex_index()] = c;
        }
        let mut terms = reduce_dense(f, &mut buf, &basis);
        if terms.is_empty() {
            continue;
        }
        if terms[0].0.degree() == 0 {
            return Err(GroebnerError::UnitIdeal);
        }
        make_monic(f, &mut terms);
        basis.push(Elem {
            terms,
            sugar: deg,
            active: true,
        });
        let h = basis.len() - 1;
        update(&mut basis, &mut pairs, h);
    }
    while !pairs.is_empty() {
        // sugar strategy, ties broken by the smaller lcm
        let (k, _) = pairs
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.sugar.cmp(&b.1.sugar).then(a.1.lcm.cmp(&b.1.lcm)))
            .unwrap();
        let pr = pairs.swap_remove(k);
        if pr.sugar > degree_cap {
            return Err(GroebnerError::DegreeCap(pr.sugar, degree_cap));
        }
        let mut buf = s_poly_dense(f, &basis[pr.i], &basis[pr.j], pr.lcm);
        let mut terms = reduce_dense(f, &mut buf, &basis);
        if terms.is_empty() {
            continue;
        }
        if terms[0].0.degree() == 0 {
            return Err(GroebnerError::UnitIdeal);
        }
        make_monic(f, &mut terms);
        basis.push(Elem {
            terms,
            sugar: pr.sugar,
            active: true,
        });
        let h = basis.len() - 1;
        update(&mut basis, &mut pairs, h);
    }
    // interreduce the minimal basis
    let mut minimal: Vec<Elem> = basis.into_iter().filter(|e| e.active).collect();
    minimal.sort_by(|a, b| a.lm().cmp(&b.lm()));
    let mut out = Vec::with_capacity(minimal.len());
    for k in 0..minimal.len() {
        let deg = minimal[k].terms[0].0.degree();
        let mut buf = vec![0u64; count_below(deg + 1)];
        for &(m, c) in &minimal[k].terms[1..] {
            buf[m.grevlex_index()] = c;
        }
        minimal[k].active = false;
        let mut tail = reduce_dense(f, &mut buf, &minimal);
        minimal[k].active = true;
        let mut terms = vec![minimal[k].terms[0]];
        terms.append(&mut tail);
        out.push(Poly3::from_terms(f, terms));
    }
    Ok(GroebnerBasis {
        field: f,
        polys: out,
    })
}

impl GroebnerBasis {
    pub fn leading_monomials(&self) -> Vec<Monomial> {
        self.polys
            .iter()
            .filter_map(|p| p.leading().map(|t| t.0))
            .collect()
    }

    /// Monomials not divisible by any leading monomial, ascending grevlex.
    pub fn standard_monomials(&self) -> Result<Vec<Monomial>, GroebnerError> {
        let lms = self.leading_monomials();
        if lms.iter().any(|m| m.degree() == 0) {
            return Err(GroebnerError::UnitIdeal);
        }
        let names = ["qx", "qy", "qz"];
        let mut bounds = [0usize; 3];
        for v in 0..3 {
            bounds[v] = lms
                .iter()
                .filter(|m| (0..3).all(|w| w == v || m.0[w] == 0))
                .map(|m| m.0[v] as usize)
                .min()
                .ok_or(GroebnerError::NotZeroDimensional(names[v]))?;
        }
        let mut out = Vec::new();
        for a in 0..bounds[0] {
            for b in 0..bounds[1] {
                for c in 0..bounds[2] {
                    let m = Monomial::new(a as u8, b as u8, c as u8);
                    if !lms.iter().any(|l| l.divides(&m)) {
                        out.push(m);
                    }
                }
            }
        }
        out.sort();
        Ok(out)
    }

    /// Normal form of `p` modulo the basis.
    pub fn normal_form(&self, p: &Poly3<PrimeField>) -> Poly3<PrimeField> {
        let f = self.field;
        let elems: Vec<Elem> = self
            .polys
            .iter()
            .map(|g| Elem {
                terms: to_desc_terms(g),
                sugar: 0,
                active: true,
            })
            .collect();
        let mut buf = vec![0u64; count_below(p.degree() + 1)];
        for &(m, c) in p.terms() {
            buf[m.grevlex_index()] = c;
        }
        Poly3::from_terms(f, reduce_dense(f, &mut buf, &elems))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp() -> PrimeField {
        PrimeField::new(30011).unwrap()
    }

    fn p(ts: &[((u8, u8, u8), i64)]) -> Poly3<PrimeField> {
        let f = fp();
        Poly3::from_terms(
            f,
            ts.iter()
                .map(|&((a, b, c), v)| (Monomial::new(a, b, c), f.from_i64(v))),
        )
    }

    #[test]
    fn simple_zero_dimensional() {
        // x^2 - 1, y - x, z^2 - y: 4 solutions
        let polys = [
            p(&[((2, 0, 0), 1), ((0, 0, 0), -1)]),
            p(&[((0, 1, 0), 1), ((1, 0, 0), -1)]),
            p(&[((0, 0, 2), 1), ((0, 1, 0), -1)]),
        ];
        let gb = groebner_basis(&polys, DEFAULT_DEGREE_CAP).unwrap();
        assert_eq!(gb.standard_monomials().unwrap().len(), 4);
    }

    #[test]
    fn positive_dimensional_detected() {
        let polys = [
            p(&[((1, 0, 0), 1), ((0, 1, 0), -1)]),
            p(&[((0, 0, 2), 1), ((0, 0, 0), -4)]),
        ];
        let gb = groebner_basis(&polys, DEFAULT_DEGREE_CAP).unwrap();
        assert!(matches!(
            gb.standard_monomials(),
            Err(GroebnerError::NotZeroDimensional(_))
        ));
    }

    #[test]
    fn generic_quadrics_bezout() {
        // three generic quadrics: 8 solutions
        use rand::{Rng, SeedableRng};
        let f = fp();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut polys = vec![];
        for _ in 0..3 {
            let terms = crate::polynomial::monomial::monomials_up_to(2)
                .into_iter()
                .map(|m| (m, rng.random_range(1..f.modulus())))
                .collect::<Vec<_>>();
            polys.push(Poly3::from_terms(f, terms));
        }
        let gb = groebner_basis(&polys, DEFAULT_DEGREE_CAP).unwrap();
        assert_eq!(gb.standard_monomials().unwrap().len(), 8);
        for g in &polys {
            assert!(gb.normal_form(g).is_zero());
        }
    }
}
