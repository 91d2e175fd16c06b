use std::sync::Arc;

use super::tower::FieldSpec;
use super::{check_sort, prime_factors_u128, Field, FieldElement, GfError};

/// Largest field order for which logarithm tables are built.
pub const TABLE_LIMIT: u128 = 1 << 23;

/// A small tower with discrete-log tables; elements are packed indices
/// `Σ c_i p^i`, so the natural integer order is the element order.
#[derive(Clone)]
pub struct TableField {
    spec: FieldSpec,
    p: u32,
    d: usize,
    order: u32,
    q: u64,
    /// `log[x]` for packed `x != 0`; `log[0]` is unused.
    log: Arc<Vec<u32>>,
    /// `exp[i]` = packed `g^i` for `0 <= i < order - 1`.
    exp: Arc<Vec<u32>>,
}

impl std::fmt::Debug for TableField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TableField").field("spec", &self.spec).finish()
    }
}

impl TableField {
    pub fn new(spec: &FieldSpec) -> Result<TableField, GfError> {
        let order = spec.order();
        if order > TABLE_LIMIT {
            return Err(GfError::TooLarge { what: format!("{order} elements exceed the table limit {TABLE_LIMIT}") });
        }
        let order = order as u32;
        let p = spec.p() as u32;
        let d = spec.degree();
        let g = find_generator(spec);
        let g_digits = spec.coeffs(&g);
        let mut exp = Vec::with_capacity(order as usize - 1);
        let mut log = vec![0u32; order as usize];
        let mut cur = vec![0u32; d];
        cur[0] = 1;
        let mut scratch = vec![0u64; 2 * d];
        for i in 0..order - 1 {
            let packed = pack(&cur, p);
            exp.push(packed);
            log[packed as usize] = i;
            mul_digits(&mut cur, &g_digits, spec.modulus(), p, &mut scratch);
        }
        Ok(TableField {
            spec: spec.clone(),
            p,
            d,
            order,
            q: spec.q(),
            log: Arc::new(log),
            exp: Arc::new(exp),
        })
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn to_element(&self, x: u32) -> FieldElement {
        self.spec.unpack(x as u128)
    }

    pub fn from_element(&self, x: &FieldElement) -> u32 {
        self.spec.packed(x) as u32
    }

    /// Discrete logarithm of a nonzero element with respect to the table generator.
    pub fn log(&self, x: u32) -> Option<u32> {
        if x == 0 {
            None
        } else {
            Some(self.log[x as usize])
        }
    }

    #[inline]
    fn mul_exp(&self, la: u64, lb: u64) -> u32 {
        let m = (self.order - 1) as u64;
        let mut s = la + lb;
        if s >= m {
            s -= m;
        }
        self.exp[s as usize]
    }
}

fn pack(digits: &[u32], p: u32) -> u32 {
    digits.iter().rev().fold(0u32, |acc, &c| acc * p + c)
}

/// `cur <- cur · g` in `F_p[X]/(modulus)`.
fn mul_digits(cur: &mut [u32], g: &[u32], modulus: &[u32], p: u32, scratch: &mut [u64]) {
    let d = cur.len();
    let p = p as u64;
    for s in scratch.iter_mut() {
        *s = 0;
    }
    for (i, &x) in cur.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in g.iter().enumerate() {
            if y != 0 {
                scratch[i + j] = (scratch[i + j] + x as u64 * y as u64) % p;
            }
        }
    }
    for top in (d..2 * d).rev() {
        let c = scratch[top];
        if c == 0 {
            continue;
        }
        for j in 0..d {
            let m = modulus[j] as u64;
            if m != 0 {
                scratch[top - d + j] = (scratch[top - d + j] + (p - c) * m) % p;
            }
        }
    }
    for (o, s) in cur.iter_mut().zip(scratch.iter()) {
        *o = *s as u32;
    }
}

/// Least element (in packed order) generating the multiplicative group.
fn find_generator(spec: &FieldSpec) -> FieldElement {
    let order = spec.order();
    if order == 2 {
        return spec.one();
    }
    let factors = prime_factors_u128(order - 1);
    let one = spec.one();
    (1..order)
        .map(|i| spec.unpack(i))
        .find(|g| factors.iter().all(|&r| spec.pow(g, (order - 1) / r) != one))
        .expect("multiplicative group of a finite field is cyclic")
}

impl Field for TableField {
    type Elem = u32;

    fn characteristic(&self) -> u64 {
        self.p as u64
    }

    fn base_degree(&self) -> u32 {
        self.spec.k()
    }

    fn tower_degree(&self) -> u32 {
        self.spec.n()
    }

    fn q(&self) -> u64 {
        self.q
    }

    fn order(&self) -> u128 {
        self.order as u128
    }

    fn zero(&self) -> u32 {
        0
    }

    fn one(&self) -> u32 {
        1
    }

    fn from_int(&self, v: i64) -> u32 {
        v.rem_euclid(self.p as i64) as u32
    }

    #[inline]
    fn add(&self, a: &u32, b: &u32) -> u32 {
        let p = self.p;
        if self.d == 1 {
            let s = a + b;
            return if s >= p { s - p } else { s };
        }
        if p == 2 {
            return a ^ b;
        }
        let (mut x, mut y) = (*a, *b);
        let mut out = 0u32;
        let mut place = 1u32;
        while x > 0 || y > 0 {
            let s = x % p + y % p;
            out += (if s >= p { s - p } else { s }) * place;
            x /= p;
            y /= p;
            place = place.wrapping_mul(p);
        }
        out
    }

    fn sub(&self, a: &u32, b: &u32) -> u32 {
        self.add(a, &self.neg(b))
    }

    #[inline]
    fn neg(&self, a: &u32) -> u32 {
        let p = self.p;
        if p == 2 {
            return *a;
        }
        if self.d == 1 {
            return if *a == 0 { 0 } else { p - a };
        }
        let mut x = *a;
        let mut out = 0u32;
        let mut place = 1u32;
        while x > 0 {
            let c = x % p;
            out += (if c == 0 { 0 } else { p - c }) * place;
            x /= p;
            place = place.wrapping_mul(p);
        }
        out
    }

    #[inline]
    fn mul(&self, a: &u32, b: &u32) -> u32 {
        if *a == 0 || *b == 0 {
            return 0;
        }
        self.mul_exp(self.log[*a as usize] as u64, self.log[*b as usize] as u64)
    }

    fn is_zero(&self, a: &u32) -> bool {
        *a == 0
    }

    fn inv(&self, a: &u32) -> Option<u32> {
        if *a == 0 {
            return None;
        }
        let m = self.order - 1;
        let l = self.log[*a as usize];
        Some(self.exp[((m - l) % m) as usize])
    }

    fn pow(&self, a: &u32, exp: u128) -> u32 {
        if *a == 0 {
            return if exp == 0 { 1 } else { 0 };
        }
        let m = (self.order - 1) as u128;
        let l = self.log[*a as usize] as u128;
        self.exp[((l * (exp % m)) % m) as usize]
    }

    fn sigma_pow(&self, a: &u32, j: u64) -> u32 {
        let j = j % self.spec.n() as u64;
        if *a == 0 || j == 0 {
            return *a;
        }
        let m = (self.order - 1) as u128;
        let qj = (self.q as u128).pow(j as u32) % m;
        let l = self.log[*a as usize] as u128;
        self.exp[((l * qj) % m) as usize]
    }

    fn coeffs(&self, a: &u32) -> Vec<u32> {
        self.to_element(*a).0
    }

    fn from_coeffs(&self, c: &[u32]) -> u32 {
        self.from_element(&self.spec.element(c))
    }

    #[inline]
    fn quadratic_character(&self, a: &u32) -> i8 {
        if *a == 0 {
            0
        } else if self.p == 2 || self.log[*a as usize].is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    fn sort_elements(&self, m: u32, limit: u128) -> Result<Vec<u32>, GfError> {
        check_sort(m, self.spec.n())?;
        let size = (self.q as u128).pow(m);
        if size > limit {
            return Err(GfError::TooLarge { what: format!("K{m} over F_{} has more than {limit} elements", self.q) });
        }
        // x ∈ K_m iff x = 0 or log(x)·(q^m - 1) ≡ 0 mod (order - 1)
        let modulus = (self.order - 1) as u128;
        let step = modulus / gcd_u128((self.q as u128).pow(m) - 1, modulus);
        let mut out: Vec<u32> = vec![0];
        let mut l = 0u128;
        while l < modulus {
            out.push(self.exp[l as usize]);
            l += step;
        }
        out.sort_unstable();
        Ok(out)
    }

    fn sort_basis(&self, m: u32) -> Result<Vec<u32>, GfError> {
        Ok(self.spec.sort_basis(m)?.iter().map(|x| self.from_element(x)).collect())
    }
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}
