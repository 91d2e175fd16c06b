//! Dense univariate polynomials over any [`Field`], coefficients ascending.
//!
//! Polynomials are plain `Vec<F::Elem>` kept trimmed (no trailing zeros);
//! the zero polynomial is the empty vector. Large exponents of the form
//! `q^m` are never materialized: `q`-th powers are iterated instead, so root
//! finding works in towers whose order does not fit comfortably in 128 bits.

use rand::Rng;

use super::{check_sort, Field, GfError};

pub type Poly<E> = Vec<E>;

pub fn trim<F: Field>(f: &F, a: &mut Poly<F::Elem>) {
    while a.last().is_some_and(|c| f.is_zero(c)) {
        a.pop();
    }
}

/// `None` for the zero polynomial.
pub fn degree<E>(a: &[E]) -> Option<usize> {
    a.len().checked_sub(1)
}

pub fn constant<F: Field>(f: &F, c: F::Elem) -> Poly<F::Elem> {
    let mut v = vec![c];
    trim(f, &mut v);
    v
}

/// `X`.
pub fn x<F: Field>(f: &F) -> Poly<F::Elem> {
    vec![f.zero(), f.one()]
}

pub fn from_ints<F: Field>(f: &F, coeffs: &[i64]) -> Poly<F::Elem> {
    let mut v: Poly<F::Elem> = coeffs.iter().map(|&c| f.from_int(c)).collect();
    trim(f, &mut v);
    v
}

pub fn add<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Poly<F::Elem> {
    let n = a.len().max(b.len());
    let zero = f.zero();
    let mut out: Poly<F::Elem> =
        (0..n).map(|i| f.add(a.get(i).unwrap_or(&zero), b.get(i).unwrap_or(&zero))).collect();
    trim(f, &mut out);
    out
}

pub fn sub<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Poly<F::Elem> {
    let n = a.len().max(b.len());
    let zero = f.zero();
    let mut out: Poly<F::Elem> =
        (0..n).map(|i| f.sub(a.get(i).unwrap_or(&zero), b.get(i).unwrap_or(&zero))).collect();
    trim(f, &mut out);
    out
}

pub fn scale<F: Field>(f: &F, a: &[F::Elem], c: &F::Elem) -> Poly<F::Elem> {
    let mut out: Poly<F::Elem> = a.iter().map(|x| f.mul(x, c)).collect();
    trim(f, &mut out);
    out
}

pub fn mul<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Poly<F::Elem> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![f.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if f.is_zero(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = f.add(&out[i + j], &f.mul(x, y));
        }
    }
    trim(f, &mut out);
    out
}

pub fn pow<F: Field>(f: &F, a: &[F::Elem], mut e: u32) -> Poly<F::Elem> {
    let mut acc = vec![f.one()];
    let mut base = a.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(f, &acc, &base);
        }
        e >>= 1;
        if e > 0 {
            base = mul(f, &base, &base);
        }
    }
    acc
}

/// Quotient and remainder; panics if `b` is zero.
pub fn divrem<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> (Poly<F::Elem>, Poly<F::Elem>) {
    let db = degree(b).expect("division by the zero polynomial");
    let lead_inv = f.inv(&b[db]).expect("trimmed polynomial has a nonzero leading coefficient");
    let mut r = a.to_vec();
    trim(f, &mut r);
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let mut quot = vec![f.zero(); r.len() - db];
    while r.len() > db {
        let top = r.len() - 1;
        let c = f.mul(&r[top], &lead_inv);
        let shift = top - db;
        for (i, bi) in b.iter().enumerate() {
            r[shift + i] = f.sub(&r[shift + i], &f.mul(&c, bi));
        }
        quot[shift] = c;
        r.pop();
        trim(f, &mut r);
    }
    trim(f, &mut quot);
    (quot, r)
}

pub fn rem<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Poly<F::Elem> {
    divrem(f, a, b).1
}

pub fn monic<F: Field>(f: &F, a: &[F::Elem]) -> Poly<F::Elem> {
    match a.last() {
        None => Vec::new(),
        Some(lead) => {
            let inv = f.inv(lead).expect("nonzero leading coefficient");
            scale(f, a, &inv)
        }
    }
}

/// Monic greatest common divisor (zero if both inputs are zero).
pub fn gcd<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Poly<F::Elem> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim(f, &mut a);
    trim(f, &mut b);
    while !b.is_empty() {
        let r = rem(f, &a, &b);
        a = b;
        b = r;
    }
    monic(f, &a)
}

/// Inverse of `a` modulo `m`, if `gcd(a, m) = 1`.
pub fn inv_mod<F: Field>(f: &F, a: &[F::Elem], m: &[F::Elem]) -> Option<Poly<F::Elem>> {
    // extended Euclid tracking only the coefficient of `a`
    let (mut r0, mut r1) = (m.to_vec(), rem(f, a, m));
    let (mut s0, mut s1): (Poly<F::Elem>, Poly<F::Elem>) = (Vec::new(), vec![f.one()]);
    while !r1.is_empty() {
        let (qt, r) = divrem(f, &r0, &r1);
        let s = sub(f, &s0, &mul(f, &qt, &s1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
    }
    if r0.len() != 1 {
        return None;
    }
    let c = f.inv(&r0[0])?;
    Some(rem(f, &scale(f, &s0, &c), m))
}

pub fn mul_mod<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem], m: &[F::Elem]) -> Poly<F::Elem> {
    rem(f, &mul(f, a, b), m)
}

pub fn pow_mod<F: Field>(f: &F, base: &[F::Elem], mut e: u128, m: &[F::Elem]) -> Poly<F::Elem> {
    let mut acc = rem(f, &[f.one()], m);
    let mut b = rem(f, base, m);
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(f, &acc, &b, m);
        }
        e >>= 1;
        if e > 0 {
            b = mul_mod(f, &b, &b, m);
        }
    }
    acc
}

pub fn derivative<F: Field>(f: &F, a: &[F::Elem]) -> Poly<F::Elem> {
    let mut out: Poly<F::Elem> =
        a.iter().enumerate().skip(1).map(|(i, c)| f.mul(c, &f.from_int(i as i64))).collect();
    trim(f, &mut out);
    out
}

pub fn eval<F: Field>(f: &F, a: &[F::Elem], x: &F::Elem) -> F::Elem {
    a.iter().rev().fold(f.zero(), |acc, c| f.add(&f.mul(&acc, x), c))
}

/// Applies `g` coefficientwise (used for embeddings between fields).
pub fn map_coeffs<F: Field, G: Field>(
    g: &G,
    a: &[F::Elem],
    phi: impl Fn(&F::Elem) -> G::Elem,
) -> Poly<G::Elem> {
    let mut out: Poly<G::Elem> = a.iter().map(phi).collect();
    trim(g, &mut out);
    out
}

/// `h^(q^times) mod m` by repeated `q`-th powers.
fn q_power_iter<F: Field>(f: &F, h: &[F::Elem], times: u64, m: &[F::Elem]) -> Poly<F::Elem> {
    let q = f.q() as u128;
    let mut cur = rem(f, h, m);
    for _ in 0..times {
        cur = pow_mod(f, &cur, q, m);
    }
    cur
}

/// `a^((q^d - 1)/2) mod m` for odd `q`, written as a norm-like product of
/// `q`-power conjugates raised to `(q - 1)/2`.
fn half_power<F: Field>(f: &F, a: &[F::Elem], d: u64, m: &[F::Elem]) -> Poly<F::Elem> {
    let q = f.q() as u128;
    let mut conj = rem(f, a, m);
    let mut prod = rem(f, &[f.one()], m);
    for i in 0..d {
        prod = mul_mod(f, &prod, &conj, m);
        if i + 1 < d {
            conj = pow_mod(f, &conj, q, m);
        }
    }
    pow_mod(f, &prod, (q - 1) / 2, m)
}

/// `Σ_{i < e} a^(2^i) mod m`, the absolute trace over `F_2` of a degree-`e` extension.
fn trace_f2<F: Field>(f: &F, a: &[F::Elem], e: u64, m: &[F::Elem]) -> Poly<F::Elem> {
    let mut cur = rem(f, a, m);
    let mut acc = cur.clone();
    for _ in 1..e {
        cur = mul_mod(f, &cur, &cur, m);
        acc = add(f, &acc, &cur);
    }
    acc
}

/// Squarefree decomposition: pairs `(g_i, i)` with `a = lc · Π g_i^i`, each
/// `g_i` monic and squarefree. Works in characteristic `p` by extracting
/// `p`-th roots of coefficients.
pub fn squarefree<F: Field>(f: &F, a: &[F::Elem]) -> Vec<(Poly<F::Elem>, u32)> {
    let mut out = Vec::new();
    let a = monic(f, a);
    if degree(&a).unwrap_or(0) == 0 {
        return out;
    }
    sqf_rec(f, &a, 1, &mut out);
    out.sort_by_key(|(_, m)| *m);
    // merge equal multiplicities produced by different branches
    let mut merged: Vec<(Poly<F::Elem>, u32)> = Vec::new();
    for (g, m) in out {
        match merged.last_mut() {
            Some((h, mm)) if *mm == m => *h = mul(f, h, &g),
            _ => merged.push((g, m)),
        }
    }
    merged
}

fn sqf_rec<F: Field>(f: &F, a: &[F::Elem], mult: u32, out: &mut Vec<(Poly<F::Elem>, u32)>) {
    let p = f.characteristic();
    let da = derivative(f, a);
    if da.is_empty() {
        // a = b(X^p); take the p-th root
        if degree(a).unwrap_or(0) > 0 {
            let b = pth_root(f, a);
            sqf_rec(f, &b, mult * p as u32, out);
        }
        return;
    }
    let mut c = gcd(f, a, &da);
    let mut w = divrem(f, a, &c).0;
    let mut i = 1;
    while degree(&w).unwrap_or(0) > 0 {
        let y = gcd(f, &w, &c);
        let z = divrem(f, &w, &y).0;
        if degree(&z).unwrap_or(0) > 0 {
            out.push((monic(f, &z), i * mult));
        }
        i += 1;
        w = y;
        c = divrem(f, &c, &w).0;
    }
    if degree(&c).unwrap_or(0) > 0 {
        let b = pth_root(f, &c);
        sqf_rec(f, &b, mult * p as u32, out);
    }
}

/// `b` with `b(X)^p = a(X)`; `a` must be a polynomial in `X^p`.
fn pth_root<F: Field>(f: &F, a: &[F::Elem]) -> Poly<F::Elem> {
    let p = f.characteristic() as usize;
    // c^(1/p) = c^(order / p) in the whole field
    let e = f.order() / p as u128;
    let mut out: Poly<F::Elem> = a.iter().step_by(p).map(|c| f.pow(c, e)).collect();
    trim(f, &mut out);
    out
}

/// Product of the distinct monic irreducible factors.
pub fn radical<F: Field>(f: &F, a: &[F::Elem]) -> Poly<F::Elem> {
    squarefree(f, a).into_iter().fold(vec![f.one()], |acc, (g, _)| mul(f, &acc, &g))
}

/// Distinct-degree factorization of a monic squarefree `a` whose coefficients
/// lie in `K_1`: pairs `(d, product of the degree-d irreducible factors)`.
pub fn distinct_degree<F: Field>(f: &F, a: &[F::Elem]) -> Vec<(u32, Poly<F::Elem>)> {
    let mut out = Vec::new();
    let mut rest = monic(f, a);
    let xp = x(f);
    let mut h = rem(f, &xp, &rest);
    let mut d = 0u32;
    while degree(&rest).unwrap_or(0) > 0 {
        d += 1;
        if 2 * d as usize > degree(&rest).unwrap() {
            out.push((degree(&rest).unwrap() as u32, rest));
            break;
        }
        h = q_power_iter(f, &h, 1, &rest);
        let g = gcd(f, &rest, &sub(f, &h, &xp));
        if degree(&g).unwrap_or(0) > 0 {
            rest = divrem(f, &rest, &g).0;
            h = rem(f, &h, &rest);
            out.push((d, g));
        }
    }
    out
}

/// Random element of `K_m` as a random `F_p`-combination of a basis.
fn random_in<F: Field, R: Rng>(f: &F, basis: &[F::Elem], rng: &mut R) -> F::Elem {
    let p = f.characteristic() as i64;
    basis.iter().fold(f.zero(), |acc, b| f.add(&acc, &f.mul(b, &f.from_int(rng.gen_range(0..p)))))
}

/// Splits a monic squarefree `a` with coefficients in `K_1` whose
/// irreducible factors all have degree `d` over `K_1`.
pub fn equal_degree<F: Field, R: Rng>(f: &F, a: &[F::Elem], d: u32, rng: &mut R) -> Result<Vec<Poly<F::Elem>>, GfError> {
    let basis = f.sort_basis(1)?;
    let n = degree(a).unwrap_or(0);
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut stack = vec![monic(f, a)];
    while let Some(g) = stack.pop() {
        let dg = degree(&g).unwrap();
        if dg == d as usize {
            out.push(g);
            continue;
        }
        loop {
            let r: Poly<F::Elem> = {
                let mut v: Poly<F::Elem> = (0..dg).map(|_| random_in(f, &basis, rng)).collect();
                trim(f, &mut v);
                v
            };
            if r.is_empty() {
                continue;
            }
            let s = splitter(f, &r, d as u64, &g);
            let h = gcd(f, &g, &s);
            let dh = degree(&h).unwrap_or(0);
            if dh > 0 && dh < dg {
                let other = divrem(f, &g, &h).0;
                stack.push(h);
                stack.push(monic(f, &other));
                break;
            }
        }
    }
    out.sort();
    Ok(out)
}

/// A polynomial whose gcd with `g` is a proper factor with probability about 1/2
/// when every root of `g` lies in `K_d` (relative to the base of the tower).
fn splitter<F: Field>(f: &F, r: &[F::Elem], d: u64, g: &[F::Elem]) -> Poly<F::Elem> {
    if f.characteristic() == 2 {
        trace_f2(f, r, d * f.base_degree() as u64, g)
    } else {
        sub(f, &half_power(f, r, d, g), &[f.one()])
    }
}

/// Full factorization over `K_1` into monic irreducibles with multiplicities,
/// sorted by degree then coefficients.
pub fn factor<F: Field, R: Rng>(f: &F, a: &[F::Elem], rng: &mut R) -> Result<Vec<(Poly<F::Elem>, u32)>, GfError> {
    let mut out = Vec::new();
    for (g, m) in squarefree(f, a) {
        for (d, h) in distinct_degree(f, &g) {
            for irr in equal_degree(f, &h, d, rng)? {
                out.push((irr, m));
            }
        }
    }
    out.sort_by(|(a, _), (b, _)| a.len().cmp(&b.len()).then_with(|| a.iter().rev().cmp(b.iter().rev())));
    Ok(out)
}

/// The distinct roots of `a` lying in the sort `K_m`, ascending.
///
/// Coefficients may be anywhere in the tower; `K_m` must be a sort of it.
pub fn roots_in_sort<F: Field, R: Rng>(f: &F, a: &[F::Elem], m: u32, rng: &mut R) -> Result<Vec<F::Elem>, GfError> {
    check_sort(m, f.tower_degree())?;
    let a = monic(f, a);
    if degree(&a).unwrap_or(0) == 0 {
        return Ok(Vec::new());
    }
    let xp = x(f);
    let xqm = q_power_iter(f, &xp, m as u64, &a);
    let g = gcd(f, &a, &sub(f, &xqm, &xp));
    if degree(&g).unwrap_or(0) == 0 {
        return Ok(Vec::new());
    }
    let basis = f.sort_basis(m)?;
    let mut roots = Vec::new();
    let mut stack = vec![g];
    while let Some(g) = stack.pop() {
        let dg = degree(&g).unwrap();
        if dg == 1 {
            roots.push(f.neg(&g[0]));
            continue;
        }
        loop {
            let delta = random_in(f, &basis, rng);
            let r = if f.characteristic() == 2 {
                // Tr(δX) separates the roots
                vec![f.zero(), delta]
            } else {
                vec![delta, f.one()]
            };
            let s = splitter(f, &r, m as u64, &g);
            let h = gcd(f, &g, &s);
            let dh = degree(&h).unwrap_or(0);
            if dh > 0 && dh < dg {
                let other = divrem(f, &g, &h).0;
                stack.push(h);
                stack.push(monic(f, &other));
                break;
            }
        }
    }
    roots.sort();
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::{make_tower, TableField};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn brute_roots<F: Field>(f: &F, a: &[F::Elem], m: u32) -> Vec<F::Elem> {
        f.sort_elements(m, 1 << 24).unwrap().into_iter().filter(|x| f.is_zero(&eval(f, a, x))).collect()
    }

    #[test]
    fn division_identity() {
        let f = TableField::new(&make_tower(7, 1, 1).unwrap()).unwrap();
        let a = from_ints(&f, &[3, 1, 4, 1, 5, 9, 2]);
        let b = from_ints(&f, &[6, 5, 3]);
        let (q, r) = divrem(&f, &a, &b);
        assert!(r.len() < b.len());
        assert_eq!(add(&f, &mul(&f, &q, &b), &r), a);
    }

    #[test]
    fn inverse_modulo() {
        let f = TableField::new(&make_tower(5, 1, 1).unwrap()).unwrap();
        let m = from_ints(&f, &[2, 0, 0, 1]);
        let a = from_ints(&f, &[1, 3]);
        let inv = inv_mod(&f, &a, &m).unwrap();
        assert_eq!(mul_mod(&f, &a, &inv, &m), vec![1]);
    }

    #[test]
    fn roots_agree_with_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (p, k, n) in [(2, 1, 4), (3, 1, 4), (5, 2, 2), (7, 1, 3), (2, 2, 3)] {
            let f = TableField::new(&make_tower(p, k, n).unwrap()).unwrap();
            for trial in 0..6i64 {
                // x^5 - 1, x^q^n - x truncated, and a few arbitrary products
                let a = match trial {
                    0 => from_ints(&f, &[-1, 0, 0, 0, 0, 1]),
                    1 => from_ints(&f, &[1, 1, 0, 1]),
                    _ => {
                        let els = f.sort_elements(n, 1 << 24).unwrap();
                        let mut acc = vec![f.one()];
                        for i in 0..trial as usize {
                            let r = &els[(i * 7 + trial as usize * 3) % els.len()];
                            acc = mul(&f, &acc, &[f.neg(r), f.one()]);
                        }
                        acc
                    }
                };
                for m in (1..=n).filter(|m| n % m == 0) {
                    assert_eq!(roots_in_sort(&f, &a, m, &mut rng).unwrap(), brute_roots(&f, &a, m), "{p} {k} {n} {trial} {m}");
                }
            }
        }
    }

    #[test]
    fn roots_in_power_basis_tower() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let spec = make_tower(3, 1, 4).unwrap();
        let a: Poly<_> = [-1i64, 0, 0, 0, 0, 1].iter().map(|&c| spec.from_int(c)).collect();
        let roots = roots_in_sort(&spec, &a, 4, &mut rng).unwrap();
        // 5 ∤ 3^4 - 1 = 80? it does: 80 = 16·5, so five fifth roots of unity
        assert_eq!(roots.len(), 5);
        assert_eq!(roots, brute_roots(&spec, &a, 4));
    }

    #[test]
    fn factorization_reassembles() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for p in [2u64, 3, 5, 13] {
            let f = TableField::new(&make_tower(p, 1, 1).unwrap()).unwrap();
            for seed in 0..8i64 {
                let coeffs: Vec<i64> = (0..9).map(|i| (seed * 31 + i * i * 7 + 1) % p as i64).chain([1]).collect();
                let mut a = from_ints(&f, &coeffs);
                a = mul(&f, &a, &from_ints(&f, &[1, 1]));
                a = mul(&f, &a, &from_ints(&f, &[1, 1]));
                let fac = factor(&f, &a, &mut rng).unwrap();
                let back = fac.iter().fold(vec![f.one()], |acc, (g, m)| mul(&f, &acc, &pow(&f, g, *m)));
                assert_eq!(back, monic(&f, &a));
                for (g, _) in &fac {
                    let spec = crate::gf::FieldSpec::with_modulus(p, 1, degree(g).unwrap() as u32, g.clone());
                    assert!(spec.is_ok() || degree(g) == Some(1), "{g:?} should be irreducible mod {p}");
                }
            }
        }
    }

    #[test]
    fn squarefree_handles_pth_powers() {
        let f = TableField::new(&make_tower(3, 2, 1).unwrap()).unwrap();
        // (x^3 + 2)^2 (x + 1) over F_9: x^3 + 2 = (x + 2)^3
        let a = mul(&f, &pow(&f, &from_ints(&f, &[2, 0, 0, 1]), 2), &from_ints(&f, &[1, 1]));
        let sq = squarefree(&f, &a);
        assert_eq!(sq, vec![(from_ints(&f, &[1, 1]), 1), (from_ints(&f, &[2, 1]), 6)]);
        assert_eq!(radical(&f, &a), from_ints(&f, &[2, 0, 1]));
    }
}
