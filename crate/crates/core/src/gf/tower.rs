use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use super::fp_poly;
use super::{check_sort, is_prime, Field, GfError};

/// Degree bound `k·N` for power-basis towers.
pub const MAX_TOWER_DEGREE: u32 = 128;

/// The field `F_{q^N}`, `q = p^k`, realized as `F_p[X]/(modulus)`.
///
/// Immutable after construction; clones share the precomputed Frobenius
/// matrix.
#[derive(Clone)]
pub struct FieldSpec {
    p: u32,
    k: u32,
    n: u32,
    modulus: Arc<Vec<u32>>,
    order: u128,
    /// Column `i` holds the coordinates of `(X^i)^q`.
    frob: Arc<Vec<Vec<u32>>>,
}

/// Power-basis coordinates `(c_0, …, c_{d-1})` of an element of a tower.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldElement(pub(crate) Vec<u32>);

impl FieldElement {
    pub fn coeffs(&self) -> &[u32] {
        &self.0
    }
}

impl Ord for FieldElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.iter().rev().cmp(other.0.iter().rev())
    }
}

impl PartialOrd for FieldElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("p", &self.p)
            .field("k", &self.k)
            .field("n", &self.n)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.k == other.k && self.n == other.n && self.modulus == other.modulus
    }
}

impl Eq for FieldSpec {}

/// Builds the tower `F_p ⊆ F_{p^k} ⊆ F_{p^{kN}}` on the lexicographically
/// least monic irreducible polynomial of degree `k·N` over `F_p`.
pub fn make_tower(p: u64, k: u32, n: u32) -> Result<FieldSpec, GfError> {
    if !is_prime(p) {
        return Err(GfError::NotPrime(p));
    }
    if k == 0 || n == 0 {
        return Err(GfError::ZeroDegree);
    }
    let d = k.checked_mul(n).filter(|&d| d <= MAX_TOWER_DEGREE).ok_or_else(|| GfError::TooLarge {
        what: format!("degree {k}·{n} exceeds {MAX_TOWER_DEGREE}"),
    })?;
    if p >= 1 << 31 {
        return Err(GfError::TooLarge { what: format!("characteristic {p}") });
    }
    let p32 = p as u32;
    check_order(p, d)?;
    let modulus = fp_poly::least_irreducible(d, p32);
    Ok(FieldSpec::from_parts(p32, k, n, modulus))
}

fn check_order(p: u64, d: u32) -> Result<u128, GfError> {
    (p as u128).checked_pow(d).ok_or_else(|| GfError::TooLarge {
        what: format!("{p}^{d} does not fit in 128 bits"),
    })
}

impl FieldSpec {
    /// A tower on a caller-supplied modulus, which must be monic, of degree
    /// `k·n`, and irreducible over `F_p`.
    pub fn with_modulus(p: u64, k: u32, n: u32, modulus: Vec<u32>) -> Result<FieldSpec, GfError> {
        if !is_prime(p) {
            return Err(GfError::NotPrime(p));
        }
        if k == 0 || n == 0 {
            return Err(GfError::ZeroDegree);
        }
        if p >= 1 << 31 {
            return Err(GfError::TooLarge { what: format!("characteristic {p}") });
        }
        let d = k * n;
        if modulus.len() != d as usize + 1 || modulus[d as usize] != 1 {
            return Err(GfError::BadModulus(format!("expected a monic polynomial of degree {d}")));
        }
        if modulus.iter().any(|&c| c as u64 >= p) {
            return Err(GfError::BadModulus("coefficients must be reduced".into()));
        }
        check_order(p, d)?;
        if !fp_poly::is_irreducible(&modulus, p as u32) {
            return Err(GfError::BadModulus(format!("{modulus:?} is reducible mod {p}")));
        }
        Ok(FieldSpec::from_parts(p as u32, k, n, modulus))
    }

    fn from_parts(p: u32, k: u32, n: u32, modulus: Vec<u32>) -> FieldSpec {
        let d = (k * n) as usize;
        let order = (p as u128).pow(d as u32);
        let q = (p as u128).pow(k);
        let xq = fp_poly::pow_mod_poly(&[0, 1], q, &modulus, p);
        let mut frob = Vec::with_capacity(d);
        let mut cur = fp_poly::rem(&[1], &modulus, p);
        for _ in 0..d {
            let mut col = cur.clone();
            col.resize(d, 0);
            frob.push(col);
            cur = fp_poly::mul_mod(&cur, &xq, &modulus, p);
        }
        FieldSpec { p, k, n, modulus: Arc::new(modulus), order, frob: Arc::new(frob) }
    }

    pub fn p(&self) -> u64 {
        self.p as u64
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Total degree `k·N` over `F_p`.
    pub fn degree(&self) -> usize {
        (self.k * self.n) as usize
    }

    /// Coefficients of the modulus, ascending, monic.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn element(&self, coeffs: &[u32]) -> FieldElement {
        let d = self.degree();
        let mut v: Vec<u32> = coeffs.iter().map(|&c| c % self.p).collect();
        assert!(v.len() <= d, "too many coordinates for a degree {d} field");
        v.resize(d, 0);
        FieldElement(v)
    }

    /// The class of `X` in `F_p[X]/(modulus)`.
    pub fn generator_x(&self) -> FieldElement {
        if self.degree() == 1 {
            // X ≡ -c_0 in a degree-one quotient
            return FieldElement(vec![(self.p - self.modulus[0]) % self.p]);
        }
        self.element(&[0, 1])
    }

    /// Packed index `Σ c_i p^i`; agrees with the element order.
    pub fn packed(&self, a: &FieldElement) -> u128 {
        a.0.iter().rev().fold(0u128, |acc, &c| acc * self.p as u128 + c as u128)
    }

    pub fn unpack(&self, mut idx: u128) -> FieldElement {
        let mut v = Vec::with_capacity(self.degree());
        for _ in 0..self.degree() {
            v.push((idx % self.p as u128) as u32);
            idx /= self.p as u128;
        }
        FieldElement(v)
    }

    /// `x^q`.
    pub fn frobenius(&self, x: &FieldElement) -> FieldElement {
        self.apply_frob(&x.0)
    }

    pub fn sort_member(&self, x: &FieldElement, m: u32) -> Result<bool, GfError> {
        Field::sort_member(self, x, m)
    }

    /// The `q^m` elements of `K_m` in ascending order.
    pub fn enumerate_sort(&self, m: u32, limit: u128) -> Result<Vec<FieldElement>, GfError> {
        self.sort_elements(m, limit)
    }

    fn apply_frob(&self, x: &[u32]) -> FieldElement {
        let d = self.degree();
        let p = self.p as u64;
        let mut out = vec![0u64; d];
        for (i, &c) in x.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (o, &f) in out.iter_mut().zip(self.frob[i].iter()) {
                *o = (*o + c as u64 * f as u64) % p;
            }
        }
        FieldElement(out.into_iter().map(|c| c as u32).collect())
    }

    fn reduce(&self, prod: &mut [u64]) -> FieldElement {
        let d = self.degree();
        let p = self.p as u64;
        for v in prod.iter_mut() {
            *v %= p;
        }
        for top in (d..prod.len()).rev() {
            let c = prod[top];
            if c == 0 {
                continue;
            }
            let shift = top - d;
            for j in 0..d {
                let m = self.modulus[j] as u64;
                if m != 0 {
                    prod[shift + j] = (prod[shift + j] + (p - c) * m) % p;
                }
            }
            prod[top] = 0;
        }
        FieldElement(prod[..d].iter().map(|&c| c as u32).collect())
    }

    /// Nullspace of `σ^m - id` as an `F_p`-linear map, in reduced echelon form.
    fn fixed_space(&self, m: u32) -> Vec<Vec<u32>> {
        let d = self.degree();
        let p = self.p as u64;
        // rows of the matrix of σ^m - id acting on coordinate vectors
        let mut cols: Vec<Vec<u32>> = Vec::with_capacity(d);
        for i in 0..d {
            let mut e = vec![0u32; d];
            e[i] = 1;
            let mut v = FieldElement(e);
            for _ in 0..m {
                v = self.apply_frob(&v.0);
            }
            let mut col = v.0;
            col[i] = ((col[i] as u64 + p - 1) % p) as u32;
            cols.push(col);
        }
        // matrix A with A[r][c] = cols[c][r]; solve A v = 0
        let mut a: Vec<Vec<u32>> = (0..d).map(|r| (0..d).map(|c| cols[c][r]).collect()).collect();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..d {
            let Some(piv) = (row..d).find(|&r| a[r][col] != 0) else { continue };
            a.swap(row, piv);
            let inv = fp_poly::inv_mod(a[row][col], self.p) as u64;
            for c in 0..d {
                a[row][c] = (a[row][c] as u64 * inv % p) as u32;
            }
            for r in 0..d {
                if r != row && a[r][col] != 0 {
                    let f = a[r][col] as u64;
                    for c in 0..d {
                        a[r][c] = ((a[r][c] as u64 + (p - f) * a[row][c] as u64) % p) as u32;
                    }
                }
            }
            pivots.push(col);
            row += 1;
            if row == d {
                break;
            }
        }
        let free: Vec<usize> = (0..d).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![0u32; d];
                v[f] = 1;
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = ((p - a[r][f] as u64) % p) as u32;
                }
                v
            })
            .collect()
    }
}

impl Field for FieldSpec {
    type Elem = FieldElement;

    fn characteristic(&self) -> u64 {
        self.p as u64
    }

    fn base_degree(&self) -> u32 {
        self.k
    }

    fn tower_degree(&self) -> u32 {
        self.n
    }

    fn order(&self) -> u128 {
        self.order
    }

    fn zero(&self) -> FieldElement {
        FieldElement(vec![0; self.degree()])
    }

    fn one(&self) -> FieldElement {
        self.from_int(1)
    }

    fn from_int(&self, v: i64) -> FieldElement {
        let mut e = vec![0; self.degree()];
        e[0] = v.rem_euclid(self.p as i64) as u32;
        FieldElement(e)
    }

    fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let p = self.p;
        FieldElement(a.0.iter().zip(&b.0).map(|(&x, &y)| {
            let s = x + y;
            if s >= p { s - p } else { s }
        }).collect())
    }

    fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let p = self.p;
        FieldElement(a.0.iter().zip(&b.0).map(|(&x, &y)| if x >= y { x - y } else { x + p - y }).collect())
    }

    fn neg(&self, a: &FieldElement) -> FieldElement {
        let p = self.p;
        FieldElement(a.0.iter().map(|&x| if x == 0 { 0 } else { p - x }).collect())
    }

    fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let d = self.degree();
        if d == 1 {
            return FieldElement(vec![((a.0[0] as u64 * b.0[0] as u64) % self.p as u64) as u32]);
        }
        // p < 2^31, so each product is below 2^62 and one pending sum cannot overflow
        let p2 = (self.p as u64) * (self.p as u64);
        let mut prod = vec![0u64; 2 * d - 1];
        for (i, &x) in a.0.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.0.iter().enumerate() {
                let v = prod[i + j] + x as u64 * y as u64;
                prod[i + j] = if v >= 1 << 62 { v % p2 } else { v };
            }
        }
        self.reduce(&mut prod)
    }

    fn is_zero(&self, a: &FieldElement) -> bool {
        a.0.iter().all(|&c| c == 0)
    }

    fn sigma_pow(&self, a: &FieldElement, j: u64) -> FieldElement {
        let j = j % self.n as u64;
        let mut v = a.clone();
        for _ in 0..j {
            v = self.apply_frob(&v.0);
        }
        v
    }

    fn coeffs(&self, a: &FieldElement) -> Vec<u32> {
        a.0.clone()
    }

    fn from_coeffs(&self, c: &[u32]) -> FieldElement {
        self.element(c)
    }

    fn sort_elements(&self, m: u32, limit: u128) -> Result<Vec<FieldElement>, GfError> {
        check_sort(m, self.n)?;
        let size = (self.p as u128).checked_pow(self.k * m);
        match size {
            Some(s) if s <= limit => {}
            _ => {
                return Err(GfError::TooLarge {
                    what: format!("K{m} over F_{} has more than {limit} elements", self.q()),
                })
            }
        }
        let basis = self.fixed_space(m);
        let p = self.p as u64;
        let mut out = Vec::with_capacity(size.unwrap() as usize);
        let mut digits = vec![0u32; basis.len()];
        loop {
            let mut v = vec![0u64; self.degree()];
            for (b, &c) in basis.iter().zip(&digits) {
                if c != 0 {
                    for (o, &x) in v.iter_mut().zip(b) {
                        *o = (*o + c as u64 * x as u64) % p;
                    }
                }
            }
            out.push(FieldElement(v.into_iter().map(|c| c as u32).collect()));
            let mut i = 0;
            loop {
                if i == digits.len() {
                    out.sort();
                    return Ok(out);
                }
                digits[i] += 1;
                if digits[i] < self.p {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
        }
    }

    fn sort_basis(&self, m: u32) -> Result<Vec<FieldElement>, GfError> {
        check_sort(m, self.n)?;
        Ok(self.fixed_space(m).into_iter().map(FieldElement).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_towers() {
        let f = make_tower(2, 1, 1).unwrap();
        assert_eq!(f.modulus(), &[0, 1]);
        assert_eq!(f.order(), 2);
        let f = make_tower(2, 1, 2).unwrap();
        assert_eq!(f.modulus(), &[1, 1, 1]);
        assert_eq!(f.order(), 4);
        assert_eq!(make_tower(5, 1, 1).unwrap().order(), 5);
        assert_eq!(make_tower(4, 1, 1).unwrap_err(), GfError::NotPrime(4));
        assert_eq!(make_tower(3, 0, 1).unwrap_err(), GfError::ZeroDegree);
    }

    #[test]
    fn frobenius_on_f4_swaps_the_new_elements() {
        let f = make_tower(2, 1, 2).unwrap();
        let all = f.enumerate_sort(2, 100).unwrap();
        assert_eq!(all.len(), 4);
        let moved: Vec<_> = all.iter().filter(|x| f.frobenius(x) != **x).collect();
        assert_eq!(moved.len(), 2);
        assert_eq!(f.frobenius(moved[0]), *moved[1]);
    }

    #[test]
    fn generator_orbit_in_f16() {
        let f = make_tower(2, 1, 4).unwrap();
        let all = f.enumerate_sort(4, 100).unwrap();
        // find a generator of the multiplicative group by brute force
        let g = all
            .iter()
            .find(|x| {
                let mut seen = std::collections::HashSet::new();
                let mut cur = f.one();
                for _ in 0..15 {
                    cur = f.mul(&cur, x);
                    seen.insert(cur.clone());
                }
                seen.len() == 15
            })
            .unwrap();
        let mut orbit = vec![g.clone()];
        let mut cur = f.frobenius(g);
        while cur != *g {
            orbit.push(cur.clone());
            cur = f.frobenius(&cur);
        }
        assert_eq!(orbit.len(), 4);
    }

    #[test]
    fn sort_sizes() {
        let f = make_tower(2, 1, 4).unwrap();
        let all = f.enumerate_sort(4, 100).unwrap();
        assert_eq!(all.iter().filter(|x| f.sort_member(x, 2).unwrap()).count(), 4);
        assert_eq!(all.iter().filter(|x| f.sort_member(x, 1).unwrap()).count(), 2);
        let f = make_tower(3, 1, 2).unwrap();
        let all = f.enumerate_sort(2, 100).unwrap();
        assert_eq!(all.iter().filter(|x| f.sort_member(x, 1).unwrap()).count(), 3);
        assert!(matches!(f.sort_member(&all[0], 3), Err(GfError::SortNotInTower { m: 3, n: 2 })));
        let f = make_tower(3, 1, 4).unwrap();
        let k2 = f.enumerate_sort(2, 100).unwrap();
        assert_eq!(k2.len(), 9);
        assert!(k2.iter().all(|x| f.sigma_pow(x, 2) == *x));
    }

    #[test]
    fn enumeration_is_sorted_and_closed() {
        let f = make_tower(2, 1, 2).unwrap();
        let k2 = f.enumerate_sort(2, 100).unwrap();
        assert!(k2.windows(2).all(|w| w[0] < w[1]));
        for a in &k2 {
            for b in &k2 {
                assert!(k2.contains(&f.add(a, b)));
                assert!(k2.contains(&f.mul(a, b)));
            }
        }
        assert!(f.enumerate_sort(2, 3).is_err());
    }

    #[test]
    fn inverse_and_fermat() {
        let f = make_tower(3, 2, 2).unwrap();
        let all = f.enumerate_sort(2, 10_000).unwrap();
        for x in all.iter().skip(1) {
            let inv = f.inv(x).unwrap();
            assert_eq!(f.mul(x, &inv), f.one());
            assert_eq!(f.pow(x, f.order()), *x);
        }
    }
}
