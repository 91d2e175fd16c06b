//! Dense polynomials over a prime field `F_p`, coefficients ascending.
//!
//! Only what modulus selection and irreducibility testing need lives here;
//! polynomials over extension fields are in [`crate::gf::upoly`].

pub(crate) fn trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

pub(crate) fn inv_mod(a: u32, p: u32) -> u32 {
    debug_assert!(!a.is_multiple_of(p));
    pow_mod(a as u64, (p - 2) as u64, p as u64) as u32
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

pub(crate) fn sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = *a.get(i).unwrap_or(&0);
        let y = *b.get(i).unwrap_or(&0);
        out.push((x + p - y) % p);
    }
    trim(&mut out);
    out
}

pub(crate) fn mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let p64 = p as u64;
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % p64;
        }
    }
    let mut out: Vec<u32> = out.into_iter().map(|c| c as u32).collect();
    trim(&mut out);
    out
}

/// Remainder of `a` modulo the nonzero polynomial `m`.
pub(crate) fn rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    trim(&mut r);
    let dm = m.len() - 1;
    let lead_inv = inv_mod(m[dm], p) as u64;
    let p64 = p as u64;
    while r.len() > dm {
        let top = r.len() - 1;
        let c = r[top] as u64 * lead_inv % p64;
        if c != 0 {
            let shift = top - dm;
            for (i, &mi) in m.iter().enumerate() {
                let v = (r[shift + i] as u64 + p64 - c * mi as u64 % p64) % p64;
                r[shift + i] = v as u32;
            }
        }
        r.pop();
        trim(&mut r);
    }
    r
}

pub(crate) fn mul_mod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    rem(&mul(a, b, p), m, p)
}

pub(crate) fn pow_mod_poly(base: &[u32], mut exp: u128, m: &[u32], p: u32) -> Vec<u32> {
    let mut acc = rem(&[1], m, p);
    let mut b = rem(base, m, p);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(&acc, &b, m, p);
        }
        exp >>= 1;
        if exp > 0 {
            b = mul_mod(&b, &b, m, p);
        }
    }
    acc
}

pub(crate) fn gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let r = rem(&a, &b, p);
        a = b;
        b = r;
    }
    if let Some(&lead) = a.last() {
        let inv = inv_mod(lead, p) as u64;
        for c in a.iter_mut() {
            *c = (*c as u64 * inv % p as u64) as u32;
        }
    }
    a
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// `X^(p^e) mod f`, computed by `e` successive p-th powers.
fn x_pow_p_pow(f: &[u32], e: u32, p: u32) -> Vec<u32> {
    let mut h = rem(&[0, 1], f, p);
    for _ in 0..e {
        h = pow_mod_poly(&h, p as u128, f, p);
    }
    h
}

/// Rabin's irreducibility test for a monic `f` of degree `d >= 1`.
pub(crate) fn is_irreducible(f: &[u32], p: u32) -> bool {
    let d = f.len() as u32 - 1;
    if d == 0 {
        return false;
    }
    if d == 1 {
        return true;
    }
    if f[0] == 0 {
        return false;
    }
    let x = vec![0, 1];
    if sub(&x_pow_p_pow(f, d, p), &rem(&x, f, p), p).iter().any(|&c| c != 0) {
        return false;
    }
    for r in prime_factors(d as u64) {
        let h = x_pow_p_pow(f, d / r as u32, p);
        let g = gcd(f, &sub(&h, &x, p), p);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

/// The lexicographically least monic irreducible polynomial of degree `d`.
///
/// Candidates `X^d + c_{d-1} X^{d-1} + ... + c_0` are scanned with `c_{d-1}`
/// most significant and the constant term least significant.
pub(crate) fn least_irreducible(d: u32, p: u32) -> Vec<u32> {
    let mut digits = vec![0u32; d as usize];
    loop {
        // digits[0] is c_{d-1}, digits[d-1] is c_0
        let mut f: Vec<u32> = digits.iter().rev().copied().collect();
        f.push(1);
        if is_irreducible(&f, p) {
            return f;
        }
        // increment, constant term fastest
        let mut i = d as usize;
        loop {
            assert!(i > 0, "no irreducible polynomial of degree {d} over F_{p}");
            i -= 1;
            digits[i] += 1;
            if digits[i] < p {
                break;
            }
            digits[i] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_irreducible(f: &[u32], p: u32) -> bool {
        // f is irreducible iff it has no monic factor of degree 1..=d/2
        let d = f.len() - 1;
        for deg in 1..=d / 2 {
            let total = (p as u64).pow(deg as u32);
            for idx in 0..total {
                let mut g = Vec::with_capacity(deg + 1);
                let mut v = idx;
                for _ in 0..deg {
                    g.push((v % p as u64) as u32);
                    v /= p as u64;
                }
                g.push(1);
                if rem(f, &g, p).is_empty() {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn rabin_matches_trial_division() {
        for p in [2u32, 3, 5] {
            for d in 1..=4u32 {
                let total = (p as u64).pow(d);
                for idx in 0..total {
                    let mut f = Vec::new();
                    let mut v = idx;
                    for _ in 0..d {
                        f.push((v % p as u64) as u32);
                        v /= p as u64;
                    }
                    f.push(1);
                    assert_eq!(is_irreducible(&f, p), brute_irreducible(&f, p), "{f:?} mod {p}");
                }
            }
        }
    }

    #[test]
    fn least_irreducibles() {
        assert_eq!(least_irreducible(1, 2), vec![0, 1]);
        assert_eq!(least_irreducible(2, 2), vec![1, 1, 1]);
        // x^2 + 1 is irreducible mod 3 and comes first (c_1 = 0, c_0 = 1)
        assert_eq!(least_irreducible(2, 3), vec![1, 0, 1]);
        assert_eq!(least_irreducible(3, 2), vec![1, 1, 0, 1]);
    }
}
