//! Finite field towers `F_p ⊆ F_q ⊆ F_{q^N}` with the `q`-power Frobenius.
//!
//! A tower is one field `F_{q^N}`; every sort `K_m` with `m | N` is the set
//! of elements fixed by `σ^m`. Inclusions between sorts are therefore
//! identities and no embedding bookkeeping is needed.
//!
//! Two realizations share the [`Field`] trait:
//!
//! * [`FieldSpec`] works in the power basis of the modulus and handles any
//!   field whose order fits in a `u128`.
//! * [`TableField`] keeps logarithm tables for fields small enough to
//!   enumerate, making multiplication and Frobenius table lookups.

mod fp_poly;
mod table;
mod tower;
pub mod upoly;

use std::fmt::Debug;
use std::hash::Hash;

pub use table::{TableField, TABLE_LIMIT};
pub use tower::{make_tower, FieldElement, FieldSpec};

/// Default cap on how many elements a single enumeration may visit.
pub const DEFAULT_ENUMERATION_BOUND: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GfError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("degree must be at least 1")]
    ZeroDegree,
    #[error("field too large: {what}")]
    TooLarge { what: String },
    #[error("sort K{m} is not contained in a tower of degree {n}")]
    SortNotInTower { m: u32, n: u32 },
    #[error("invalid modulus: {0}")]
    BadModulus(String),
}

/// Common interface over the two field realizations.
///
/// Elements compare in lexicographic order of their coefficient vectors,
/// read from the highest power-basis coordinate down to the constant term.
pub trait Field: Send + Sync {
    type Elem: Clone + Eq + Ord + Hash + Debug + Send + Sync;

    /// The characteristic `p`.
    fn characteristic(&self) -> u64;
    /// `k` with `q = p^k`.
    fn base_degree(&self) -> u32;
    /// `N`, the degree of the tower over `F_q`.
    fn tower_degree(&self) -> u32;
    fn q(&self) -> u64 {
        self.characteristic().pow(self.base_degree())
    }
    /// `|F_{q^N}|`.
    fn order(&self) -> u128;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_int(&self, v: i64) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem> {
        if self.is_zero(a) {
            None
        } else {
            Some(self.pow(a, self.order() - 2))
        }
    }

    fn pow(&self, a: &Self::Elem, mut exp: u128) -> Self::Elem {
        let mut acc = self.one();
        let mut base = a.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            exp >>= 1;
            if exp > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// `σ^j(x) = x^(q^j)`; `j` is reduced mod `N`.
    fn sigma_pow(&self, a: &Self::Elem, j: u64) -> Self::Elem;

    fn frobenius(&self, a: &Self::Elem) -> Self::Elem {
        self.sigma_pow(a, 1)
    }

    /// Power-basis coordinates over `F_p`, length `k·N`.
    fn coeffs(&self, a: &Self::Elem) -> Vec<u32>;
    fn from_coeffs(&self, c: &[u32]) -> Self::Elem;

    /// Quadratic character: `0` on zero, `1` on nonzero squares, `-1` otherwise.
    /// In characteristic 2 every element is a square.
    fn quadratic_character(&self, a: &Self::Elem) -> i8 {
        if self.is_zero(a) {
            return 0;
        }
        if self.characteristic() == 2 {
            return 1;
        }
        if self.pow(a, (self.order() - 1) / 2) == self.one() {
            1
        } else {
            -1
        }
    }

    /// The elements of `K_m`, in ascending order.
    fn sort_elements(&self, m: u32, limit: u128) -> Result<Vec<Self::Elem>, GfError>;

    /// An `F_p`-basis of `K_m`.
    fn sort_basis(&self, m: u32) -> Result<Vec<Self::Elem>, GfError>;

    fn sort_member(&self, a: &Self::Elem, m: u32) -> Result<bool, GfError> {
        check_sort(m, self.tower_degree())?;
        Ok(self.sigma_pow(a, m as u64) == *a)
    }
}

pub(crate) fn check_sort(m: u32, n: u32) -> Result<(), GfError> {
    if m == 0 || !n.is_multiple_of(m) {
        Err(GfError::SortNotInTower { m, n })
    } else {
        Ok(())
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits a prime power `q` into `(p, k)`.
pub fn prime_power(q: u64) -> Result<(u64, u32), GfError> {
    if q < 2 {
        return Err(GfError::NotPrimePower(q));
    }
    let mut p = 2;
    while p * p <= q && !q.is_multiple_of(p) {
        p += 1;
    }
    if !q.is_multiple_of(p) {
        p = q;
    }
    let mut k = 0;
    let mut r = q;
    while r.is_multiple_of(p) {
        r /= p;
        k += 1;
    }
    if r != 1 {
        return Err(GfError::NotPrimePower(q));
    }
    Ok((p, k))
}

pub(crate) fn prime_factors_u128(mut n: u128) -> Vec<u128> {
    let mut out = Vec::new();
    let mut d: u128 = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_power_splits() {
        assert_eq!(prime_power(7).unwrap(), (7, 1));
        assert_eq!(prime_power(49).unwrap(), (7, 2));
        assert_eq!(prime_power(128).unwrap(), (2, 7));
        assert_eq!(prime_power(12), Err(GfError::NotPrimePower(12)));
        assert_eq!(prime_power(1), Err(GfError::NotPrimePower(1)));
    }
}
