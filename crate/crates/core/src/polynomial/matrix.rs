//! Small dense matrices with polynomial entries.

use super::field::Field;
use super::poly::{Poly3, PolyError};

#[derive(Clone, Debug, PartialEq)]
pub struct PolyMatrix<F: Field> {
    rows: usize,
    cols: usize,
    entries: Vec<Poly3<F>>,
}

impl<F: Field> PolyMatrix<F> {
    pub fn zeros(field: F, rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Poly3::zero(field); rows * cols],
        }
    }

    /// Build from row-major entries.
    pub fn from_rows(rows: Vec<Vec<Poly3<F>>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Poly3<F> {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, p: Poly3<F>) {
        self.entries[r * self.cols + c] = p;
    }

    pub fn row(&self, r: usize) -> &[Poly3<F>] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut entries = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            for &c in cols {
                entries.push(self.get(r, c).clone());
            }
        }
        Self {
            rows: rows.len(),
            cols: cols.len(),
            entries,
        }
    }

    /// Determinant by cofactor expansion along the first row (size <= 4).
    pub fn det(&self) -> Result<Poly3<F>, PolyError> {
        if self.rows != self.cols {
            return Err(PolyError::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        if self.rows > 4 {
            return Err(PolyError::TooLarge(self.rows));
        }
        let idx: Vec<usize> = (0..self.rows).collect();
        Ok(self.det_rec(&idx, &idx))
    }

    /// All `4x4` minors of an `n x 4` matrix, rows in [`combinations`]
    /// order. Laplace expansion along the first two columns, sharing the
    /// `2x2` minors between the row sets.
    pub fn maximal_minors_4(&self) -> Result<Vec<Poly3<F>>, PolyError> {
        if self.cols != 4 {
            return Err(PolyError::NonSquare {
                rows: 4,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let two = |a: usize, b: usize, c: usize| {
            self.get(a, c)
                .mul(self.get(b, c + 1))
                .sub(&self.get(a, c + 1).mul(self.get(b, c)))
        };
        let mut left = vec![None; n * n];
        let mut right = vec![None; n * n];
        for a in 0..n {
            for b in a + 1..n {
                left[a * n + b] = Some(two(a, b, 0));
                right[a * n + b] = Some(two(a, b, 2));
            }
        }
        let field = self.entries[0].field();
        let pairs = [
            (0, 1, 2, 3),
            (0, 2, 1, 3),
            (0, 3, 1, 2),
            (1, 2, 0, 3),
            (1, 3, 0, 2),
            (2, 3, 0, 1),
        ];
        Ok(combinations(n, 4)
            .into_iter()
            .map(|r| {
                let mut acc = Poly3::zero(field);
                for &(p, q, u, v) in &pairs {
                    let l = left[r[p] * n + r[q]].as_ref().unwrap();
                    let rr = right[r[u] * n + r[v]].as_ref().unwrap();
                    let term = l.mul(rr);
                    acc = if (p + q + 1) % 2 == 0 {
                        acc.add(&term)
                    } else {
                        acc.sub(&term)
                    };
                }
                acc
            })
            .collect())
    }

    fn det_rec(&self, rows: &[usize], cols: &[usize]) -> Poly3<F> {
        let n = rows.len();
        let field = self.entries[0].field();
        match n {
            0 => Poly3::constant(field, field.one()),
            1 => self.get(rows[0], cols[0]).clone(),
            2 => {
                let a = self.get(rows[0], cols[0]).mul(self.get(rows[1], cols[1]));
                let b = self.get(rows[0], cols[1]).mul(self.get(rows[1], cols[0]));
                a.sub(&b)
            }
            _ => {
                let mut acc = Poly3::zero(field);
                for (k, &c) in cols.iter().enumerate() {
                    let e = self.get(rows[0], c);
                    if e.is_zero() {
                        continue;
                    }
                    let sub_cols: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
                    let minor = self.det_rec(&rows[1..], &sub_cols);
                    let term = e.mul(&minor);
                    acc = if k % 2 == 0 {
                        acc.add(&term)
                    } else {
                        acc.sub(&term)
                    };
                }
                acc
            }
        }
    }

    /// Evaluate every entry, row-major.
    pub fn evaluate(&self, p: [F::Elem; 3]) -> Vec<F::Elem> {
        self.entries.iter().map(|e| e.evaluate(p)).collect()
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polynomial::field::Reals;
    use crate::polynomial::monomial::Monomial;

    #[test]
    fn det_matches_numeric() {
        let mut m = PolyMatrix::zeros(Reals, 4, 4);
        let pts = [0.4, -0.3, 1.1];
        let mut numeric = nalgebra::Matrix4::zeros();
        for r in 0..4 {
            for c in 0..4 {
                let p = Poly3::from_terms(
                    Reals,
                    [
                        (Monomial::X, (r * 4 + c) as f64 * 0.1 - 0.7),
                        (Monomial::new(0, 1, 1), ((r + 2 * c) % 5) as f64 - 2.0),
                        (Monomial::ONE, (r as f64 - c as f64).sin()),
                    ],
                );
                numeric[(r, c)] = p.evaluate(pts);
                m.set(r, c, p);
            }
        }
        let d = m.det().unwrap();
        assert!((d.evaluate(pts) - numeric.determinant()).abs() < 1e-10);
        let fast = m.maximal_minors_4().unwrap();
        assert_eq!(fast.len(), 1);
        assert!((fast[0].evaluate(pts) - numeric.determinant()).abs() < 1e-10);
        assert!(m.submatrix(&[0, 1], &[0, 1, 2]).det().is_err());
    }

    #[test]
    fn combinations_lexicographic() {
        let c = combinations(6, 4);
        assert_eq!(c.len(), 15);
        assert_eq!(c[0], vec![0, 1, 2, 3]);
        assert_eq!(c[1], vec![0, 1, 2, 4]);
        assert_eq!(c[14], vec![2, 3, 4, 5]);
    }
}
