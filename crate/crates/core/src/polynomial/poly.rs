//! Sparse trivariate polynomials over a generic coefficient field.

use super::field::{Field, Reals};
use super::monomial::{count_below, Monomial};
use std::fmt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolyError {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("determinant of size {0} not supported (max 4)")]
    TooLarge(usize),
    #[error("division left a nonzero remainder (relative size {relative:e})")]
    NonzeroRemainder { relative: f64 },
    #[error("division by the zero polynomial")]
    DivisionByZero,
}

/// Polynomial in `qx, qy, qz`.
///
/// Terms are kept sorted in ascending grevlex order with no zero coefficients.
#[derive(Clone, PartialEq)]
pub struct Poly3<F: Field> {
    field: F,
    terms: Vec<(Monomial, F::Elem)>,
}

impl<F: Field> Poly3<F> {
    pub fn zero(field: F) -> Self {
        Self {
            field,
            terms: Vec::new(),
        }
    }

    pub fn constant(field: F, c: F::Elem) -> Self {
        Self::term(field, Monomial::ONE, c)
    }

    pub fn term(field: F, m: Monomial, c: F::Elem) -> Self {
        let terms = if field.is_zero(c) {
            vec![]
        } else {
            vec![(m, c)]
        };
        Self { field, terms }
    }

    /// Build from arbitrary terms, merging duplicates and dropping zeros.
    pub fn from_terms(field: F, terms: impl IntoIterator<Item = (Monomial, F::Elem)>) -> Self {
        let mut v: Vec<(Monomial, F::Elem)> = terms.into_iter().collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Monomial, F::Elem)> = Vec::with_capacity(v.len());
        for (m, c) in v {
            match out.last_mut() {
                Some(last) if last.0 == m => last.1 = field.add(last.1, c),
                _ => out.push((m, c)),
            }
        }
        out.retain(|t| !field.is_zero(t.1));
        Self { field, terms: out }
    }

    pub fn field(&self) -> F {
        self.field
    }

    pub fn terms(&self) -> &[(Monomial, F::Elem)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; 0 for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.terms.iter().map(|t| t.0.degree()).max().unwrap_or(0)
    }

    /// Leading term in grevlex order.
    pub fn leading(&self) -> Option<(Monomial, F::Elem)> {
        self.terms.last().copied()
    }

    pub fn coeff(&self, m: &Monomial) -> F::Elem {
        match self.terms.binary_search_by(|t| t.0.cmp(m)) {
            Ok(i) => self.terms[i].1,
            Err(_) => self.field.zero(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.combine(o, false)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.combine(o, true)
    }

    fn combine(&self, o: &Self, negate: bool) -> Self {
        let f = self.field;
        let mut out = Vec::with_capacity(self.terms.len() + o.terms.len());
        let (mut i, mut j) = (0, 0);
        let other = |c: F::Elem| if negate { f.neg(c) } else { c };
        while i < self.terms.len() && j < o.terms.len() {
            let (a, b) = (&self.terms[i], &o.terms[j]);
            match a.0.cmp(&b.0) {
                std::cmp::Ordering::Less => {
                    out.push(*a);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push((b.0, other(b.1)));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = if negate {
                        f.sub(a.1, b.1)
                    } else {
                        f.add(a.1, b.1)
                    };
                    if !f.is_zero(c) {
                        out.push((a.0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend(o.terms[j..].iter().map(|t| (t.0, other(t.1))));
        Self {
            field: f,
            terms: out,
        }
    }

    pub fn neg(&self) -> Self {
        let f = self.field;
        Self {
            field: f,
            terms: self.terms.iter().map(|t| (t.0, f.neg(t.1))).collect(),
        }
    }

    pub fn scale(&self, c: F::Elem) -> Self {
        let f = self.field;
        if f.is_zero(c) {
            return Self::zero(f);
        }
        Self::from_sorted(f, self.terms.iter().map(|t| (t.0, f.mul(t.1, c))).collect())
    }

    /// Multiply by a monomial; ordering is preserved.
    pub fn mul_monomial(&self, m: &Monomial) -> Self {
        Self {
            field: self.field,
            terms: self.terms.iter().map(|t| (t.0.mul(m), t.1)).collect(),
        }
    }

    fn from_sorted(field: F, mut terms: Vec<(Monomial, F::Elem)>) -> Self {
        terms.retain(|t| !field.is_zero(t.1));
        Self { field, terms }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let f = self.field;
        if self.is_zero() || o.is_zero() {
            return Self::zero(f);
        }
        if self.terms.len() == 1 || o.terms.len() == 1 {
            let (single, other) = if self.terms.len() == 1 {
                (self, o)
            } else {
                (o, self)
            };
            let (m, c) = single.terms[0];
            return Self::from_sorted(
                f,
                other
                    .terms
                    .iter()
                    .map(|t| (t.0.mul(&m), f.mul(t.1, c)))
                    .collect(),
            );
        }
        // dense accumulation indexed by grevlex position
        let deg = self.degree() + o.degree();
        let mut acc = vec![f.zero(); count_below(deg + 1)];
        let mut used = vec![false; acc.len()];
        for a in &self.terms {
            for b in &o.terms {
                let idx = a.0.mul(&b.0).grevlex_index();
                acc[idx] = f.add(acc[idx], f.mul(a.1, b.1));
                used[idx] = true;
            }
        }
        let terms = acc
            .into_iter()
            .enumerate()
            .filter(|(i, c)| used[*i] && !f.is_zero(*c))
            .map(|(i, c)| (Monomial::from_grevlex_index(i), c))
            .collect();
        Self { field: f, terms }
    }

    pub fn evaluate(&self, p: [F::Elem; 3]) -> F::Elem {
        let f = self.field;
        let deg = self.degree();
        let mut pw = [[f.one(); 32]; 3];
        for v in 0..3 {
            for k in 1..=deg.min(31) {
                pw[v][k] = f.mul(pw[v][k - 1], p[v]);
            }
        }
        let mut s = f.zero();
        for (m, c) in &self.terms {
            let t = f.mul(
                f.mul(pw[0][m.0[0] as usize], pw[1][m.0[1] as usize]),
                pw[2][m.0[2] as usize],
            );
            s = f.add(s, f.mul(*c, t));
        }
        s
    }

    /// Exact division by `d` using multivariate long division in grlex order.
    ///
    /// Over an exact field any nonzero remainder is an error. Over the reals the
    /// remainder must be below `1e-9` times the norm of `self`.
    pub fn exact_quotient(&self, d: &Self) -> Result<Self, PolyError> {
        let (q, r) = self.div_rem_grlex(d)?;
        if F::EXACT {
            if r.is_zero() {
                Ok(q)
            } else {
                Err(PolyError::NonzeroRemainder { relative: 1.0 })
            }
        } else {
            let n = self.norm();
            let rn = r.norm();
            if rn <= 1e-9 * n || n == 0.0 {
                Ok(q)
            } else {
                Err(PolyError::NonzeroRemainder { relative: rn / n })
            }
        }
    }

    /// Quotient and remainder of division by `d` with grlex leading terms.
    pub fn div_rem_grlex(&self, d: &Self) -> Result<(Self, Self), PolyError> {
        let f = self.field;
        let lead = d
            .terms
            .iter()
            .max_by(|a, b| a.0.cmp_grlex(&b.0))
            .copied()
            .ok_or(PolyError::DivisionByZero)?;
        let lead_inv = f.inv(lead.1).ok_or(PolyError::DivisionByZero)?;
        let deg = self.degree();
        let n = count_below(deg + 1);
        let mut buf = vec![f.zero(); n];
        let mut mons = vec![Monomial::ONE; n];
        for (m, c) in &self.terms {
            let i = m.grlex_index();
            buf[i] = *c;
        }
        for d_ in 0..=deg {
            for a in 0..=d_ {
                for b in 0..=(d_ - a) {
                    let m = Monomial::new(a as u8, b as u8, (d_ - a - b) as u8);
                    mons[m.grlex_index()] = m;
                }
            }
        }
        let mut quot = Vec::new();
        let mut rem = Vec::new();
        for i in (0..n).rev() {
            let c = buf[i];
            if f.is_zero(c) {
                continue;
            }
            let m = mons[i];
            if lead.0.divides(&m) {
                let qm = lead.0.quotient_of(&m);
                let qc = f.mul(c, lead_inv);
                quot.push((qm, qc));
                buf[i] = f.zero();
                for (dm, dc) in &d.terms {
                    if *dm == lead.0 {
                        continue;
                    }
                    let j = dm.mul(&qm).grlex_index();
                    buf[j] = f.sub(buf[j], f.mul(qc, *dc));
                }
            } else {
                rem.push((m, c));
            }
        }
        Ok((Self::from_terms(f, quot), Self::from_terms(f, rem)))
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let m = self.field.magnitude(t.1);
                m * m
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Largest coefficient magnitude.
    pub fn max_coeff(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| self.field.magnitude(t.1))
            .fold(0.0, f64::max)
    }
}

impl Poly3<Reals> {
    /// Scale so that the largest coefficient magnitude is one.
    pub fn normalized(&self) -> Self {
        let m = self.max_coeff();
        if m == 0.0 {
            self.clone()
        } else {
            self.scale(1.0 / m)
        }
    }

    /// Value and gradient at `p`.
    pub fn value_and_gradient(&self, p: [f64; 3]) -> (f64, [f64; 3]) {
        let deg = self.degree().min(31);
        let mut pw = [[1.0; 32]; 3];
        for v in 0..3 {
            for k in 1..=deg {
                pw[v][k] = pw[v][k - 1] * p[v];
            }
        }
        let mut v = 0.0;
        let mut g = [0.0; 3];
        for (m, c) in &self.terms {
            let [a, b, d] = m.0.map(|e| e as usize);
            v += c * pw[0][a] * pw[1][b] * pw[2][d];
            if a > 0 {
                g[0] += c * a as f64 * pw[0][a - 1] * pw[1][b] * pw[2][d];
            }
            if b > 0 {
                g[1] += c * b as f64 * pw[0][a] * pw[1][b - 1] * pw[2][d];
            }
            if d > 0 {
                g[2] += c * d as f64 * pw[0][a] * pw[1][b] * pw[2][d - 1];
            }
        }
        (v, g)
    }

    /// Residual `|p(x)|` relative to the sum of term magnitudes at `x`.
    pub fn relative_residual(&self, p: [f64; 3]) -> f64 {
        let deg = self.degree().min(31);
        let mut pw = [[1.0; 32]; 3];
        for v in 0..3 {
            for k in 1..=deg {
                pw[v][k] = pw[v][k - 1] * p[v];
            }
        }
        let mut s = 0.0;
        let mut a = 0.0;
        for (m, c) in &self.terms {
            let t = c * pw[0][m.0[0] as usize] * pw[1][m.0[1] as usize] * pw[2][m.0[2] as usize];
            s += t;
            a += t.abs();
        }
        if a == 0.0 {
            0.0
        } else {
            s.abs() / a
        }
    }
}

impl<F: Field> fmt::Debug for Poly3<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{:?}*{}", c, m)?;
        }
        Ok(())
    }
}

/// Variable `q_i` as a polynomial.
pub fn var<F: Field>(field: F, i: usize) -> Poly3<F> {
    Poly3::term(field, Monomial::var(i), field.one())
}

/// The Cayley scale `s = qx^2 + qy^2 + qz^2 + 1`.
pub fn cayley_scale<F: Field>(field: F) -> Poly3<F> {
    let one = field.one();
    Poly3::from_terms(
        field,
        [
            (Monomial::new(2, 0, 0), one),
            (Monomial::new(0, 2, 0), one),
            (Monomial::new(0, 0, 2), one),
            (Monomial::ONE, one),
        ],
    )
}

/// Entries of the unnormalized Cayley rotation `C(q)` with `R = C / s`.
pub fn cayley_numerator<F: Field>(field: F) -> [[Poly3<F>; 3]; 3] {
    let c = |v: i64| field.from_i64(v);
    let t = |a: u8, b: u8, cc: u8, v: i64| (Monomial::new(a, b, cc), c(v));
    let p = |ts: Vec<(Monomial, F::Elem)>| Poly3::from_terms(field, ts);
    [
        [
            p(vec![
                t(0, 0, 0, 1),
                t(2, 0, 0, 1),
                t(0, 2, 0, -1),
                t(0, 0, 2, -1),
            ]),
            p(vec![t(1, 1, 0, 2), t(0, 0, 1, -2)]),
            p(vec![t(1, 0, 1, 2), t(0, 1, 0, 2)]),
        ],
        [
            p(vec![t(1, 1, 0, 2), t(0, 0, 1, 2)]),
            p(vec![
                t(0, 0, 0, 1),
                t(2, 0, 0, -1),
                t(0, 2, 0, 1),
                t(0, 0, 2, -1),
            ]),
            p(vec![t(0, 1, 1, 2), t(1, 0, 0, -2)]),
        ],
        [
            p(vec![t(1, 0, 1, 2), t(0, 1, 0, -2)]),
            p(vec![t(0, 1, 1, 2), t(1, 0, 0, 2)]),
            p(vec![
                t(0, 0, 0, 1),
                t(2, 0, 0, -1),
                t(0, 2, 0, -1),
                t(0, 0, 2, 1),
            ]),
        ],
    ]
}
