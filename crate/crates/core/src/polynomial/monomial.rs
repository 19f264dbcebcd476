//! Monomials in the three Cayley variables `qx, qy, qz`.

use std::cmp::Ordering;
use std::fmt;

/// Exponent vector `qx^a qy^b qz^c`.
///
/// The `Ord` implementation is graded reverse lexicographic with `qx > qy > qz`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Monomial(pub [u8; 3]);

impl Monomial {
    pub const ONE: Monomial = Monomial([0, 0, 0]);
    pub const X: Monomial = Monomial([1, 0, 0]);
    pub const Y: Monomial = Monomial([0, 1, 0]);
    pub const Z: Monomial = Monomial([0, 0, 1]);

    pub fn new(a: u8, b: u8, c: u8) -> Self {
        Monomial([a, b, c])
    }

    /// Single variable `q_i`.
    pub fn var(i: usize) -> Self {
        let mut e = [0; 3];
        e[i] = 1;
        Monomial(e)
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.0[0] as usize + self.0[1] as usize + self.0[2] as usize
    }

    #[inline]
    pub fn mul(&self, o: &Monomial) -> Monomial {
        Monomial([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }

    #[inline]
    pub fn divides(&self, o: &Monomial) -> bool {
        self.0[0] <= o.0[0] && self.0[1] <= o.0[1] && self.0[2] <= o.0[2]
    }

    /// `o / self`, assuming `self` divides `o`.
    #[inline]
    pub fn quotient_of(&self, o: &Monomial) -> Monomial {
        Monomial([o.0[0] - self.0[0], o.0[1] - self.0[1], o.0[2] - self.0[2]])
    }

    pub fn lcm(&self, o: &Monomial) -> Monomial {
        Monomial([
            self.0[0].max(o.0[0]),
            self.0[1].max(o.0[1]),
            self.0[2].max(o.0[2]),
        ])
    }

    pub fn is_coprime(&self, o: &Monomial) -> bool {
        (0..3).all(|i| self.0[i] == 0 || o.0[i] == 0)
    }

    pub fn eval(&self, p: [f64; 3]) -> f64 {
        p[0].powi(self.0[0] as i32) * p[1].powi(self.0[1] as i32) * p[2].powi(self.0[2] as i32)
    }

    /// Graded lexicographic comparison with `qx > qy > qz`.
    pub fn cmp_grlex(&self, o: &Monomial) -> Ordering {
        self.degree()
            .cmp(&o.degree())
            .then(self.0[0].cmp(&o.0[0]))
            .then(self.0[1].cmp(&o.0[1]))
    }

    /// Position in the ascending grevlex enumeration of all monomials.
    #[inline]
    pub fn grevlex_index(&self) -> usize {
        let d = self.degree();
        let [_, b, c] = self.0;
        let (b, c) = (b as usize, c as usize);
        // descending position within degree d: smaller z first, then smaller y
        let desc = c * (d + 1) - c * (c.saturating_sub(1)) / 2 + b;
        count_below(d) + (d + 1) * (d + 2) / 2 - 1 - desc
    }

    /// Inverse of [`Monomial::grevlex_index`].
    pub fn from_grevlex_index(idx: usize) -> Monomial {
        let mut d = 0;
        while count_below(d + 1) <= idx {
            d += 1;
        }
        let asc = idx - count_below(d);
        let mut desc = (d + 1) * (d + 2) / 2 - 1 - asc;
        let mut c = 0;
        while desc > d - c {
            desc -= d - c + 1;
            c += 1;
        }
        let b = desc;
        Monomial([(d - b - c) as u8, b as u8, c as u8])
    }

    /// Position in the ascending grlex enumeration of all monomials.
    #[inline]
    pub fn grlex_index(&self) -> usize {
        let d = self.degree();
        let [a, b, _] = self.0;
        let (a, b) = (a as usize, b as usize);
        // ascending: smaller a first, then smaller b. Monomials with x-exponent < a:
        // sum_{a'<a} (d - a' + 1)
        let below_a = a * (d + 1) - a * (a.saturating_sub(1)) / 2;
        count_below(d) + below_a + b
    }
}

/// Number of monomials of total degree strictly below `d`.
#[inline]
pub fn count_below(d: usize) -> usize {
    d * (d + 1) * (d + 2) / 6
}

/// All monomials of degree `<= d` in ascending grevlex order.
pub fn monomials_up_to(d: usize) -> Vec<Monomial> {
    (0..count_below(d + 1))
        .map(Monomial::from_grevlex_index)
        .collect()
}

impl Ord for Monomial {
    fn cmp(&self, o: &Self) -> Ordering {
        self.degree()
            .cmp(&o.degree())
            .then(o.0[2].cmp(&self.0[2]))
            .then(o.0[1].cmp(&self.0[1]))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree() == 0 {
            return write!(f, "1");
        }
        let names = ["qx", "qy", "qz"];
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{}", names[i])?;
            } else {
                write!(f, "{}^{}", names[i], e)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grevlex_degree_two_order() {
        let mut v = vec![
            Monomial::new(0, 0, 2),
            Monomial::new(1, 1, 0),
            Monomial::new(0, 1, 1),
            Monomial::new(2, 0, 0),
            Monomial::new(1, 0, 1),
            Monomial::new(0, 2, 0),
        ];
        v.sort_by(|a, b| b.cmp(a));
        let expect = [
            [2, 0, 0],
            [1, 1, 0],
            [0, 2, 0],
            [1, 0, 1],
            [0, 1, 1],
            [0, 0, 2],
        ];
        for (m, e) in v.iter().zip(expect) {
            assert_eq!(m.0, e);
        }
    }

    #[test]
    fn indices_are_consistent_with_order() {
        let all = monomials_up_to(9);
        for (i, m) in all.iter().enumerate() {
            assert_eq!(m.grevlex_index(), i);
            if i > 0 {
                assert!(all[i - 1] < *m);
            }
        }
        let mut gl = all.clone();
        gl.sort_by(|a, b| a.cmp_grlex(b));
        for (i, m) in gl.iter().enumerate() {
            assert_eq!(m.grlex_index(), i);
        }
    }
}
