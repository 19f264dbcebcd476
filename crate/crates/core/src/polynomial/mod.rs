//! Multivariate polynomial arithmetic in the Cayley parameters.

pub mod field;
pub mod matrix;
pub mod monomial;
pub mod poly;

pub use field::{Field, PrimeField, Reals};
pub use matrix::{combinations, PolyMatrix};
pub use monomial::Monomial;
pub use poly::{cayley_numerator, cayley_scale, var, Poly3, PolyError};
