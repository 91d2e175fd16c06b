use rayon::prelude::*;

use crate::gf::Field;
use crate::logic::Tower;
use crate::with_tower;

use super::{ConstructibleSpec, GeometryError};

/// `y² + a1·xy + a3·y = x³ + a2·x² + a4·x + a6` with integer coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Weierstrass {
    pub a: [i64; 5],
}

impl Weierstrass {
    /// `(b2, b4, b6, b8)` reduced mod `p`.
    pub fn b_invariants(&self, p: u64) -> [i128; 4] {
        let p = p as i128;
        let [a1, a2, a3, a4, a6] = self.a.map(|x| (x as i128).rem_euclid(p));
        let r = |x: i128| x.rem_euclid(p);
        let b2 = r(a1 * a1 + 4 * a2);
        let b4 = r(2 * a4 + a1 * a3);
        let b6 = r(a3 * a3 + 4 * a6);
        let b8 = r(r(a1 * a1 * a6) + r(4 * a2 * a6) - r(a1 * a3 * a4) + r(a2 * a3 * a3) - r(a4 * a4));
        [b2, b4, b6, b8]
    }

    /// Reads `lhs = rhs` in `x, y` as a Weierstrass equation over `F_p`,
    /// for instance `y^2 + x*y = x^3 + 1`. Coefficients come back reduced
    /// into `0..p`.
    pub fn from_equation(text: &str, q: u64) -> Result<Weierstrass, GeometryError> {
        let (lhs, rhs) = text.split_once('=').ok_or_else(|| GeometryError::Unsupported(format!("no '=' in {text:?}")))?;
        let vars = ConstructibleSpec::affine(&["x", "y"], q)?;
        let f = vars.poly(&format!("({lhs}) - ({rhs})"))?;
        let p = vars.p();
        let not_weierstrass = || GeometryError::Unsupported(format!("{text:?} is not in Weierstrass form"));
        let mut coeff = std::collections::BTreeMap::new();
        for (e, c) in f.terms() {
            coeff.insert((e[0], e[1]), c);
        }
        // normalize so that y² has coefficient 1
        let sign = match coeff.get(&(0, 2)) {
            Some(&1) => 1,
            Some(&c) if c == p - 1 => -1,
            _ => return Err(not_weierstrass()),
        };
        let mut take = |e: (u32, u32)| -> i64 {
            let c = coeff.remove(&e).unwrap_or(0) as i128;
            (sign * c).rem_euclid(p as i128) as i64
        };
        let neg = |c: i64| (-(c as i128)).rem_euclid(p as i128) as i64;
        take((0, 2));
        if take((3, 0)) != neg(1) {
            return Err(not_weierstrass());
        }
        let a = [take((1, 1)), neg(take((2, 0))), take((0, 1)), neg(take((1, 0))), neg(take((0, 0)))];
        if !coeff.is_empty() {
            return Err(not_weierstrass());
        }
        Ok(Weierstrass { a })
    }

    pub fn discriminant(&self, p: u64) -> u64 {
        let [b2, b4, b6, b8] = self.b_invariants(p);
        let p = p as i128;
        let r = |x: i128| x.rem_euclid(p);
        let d = -r(r(b2 * b2) * b8) - r(8 * r(b4 * b4) * b4) - r(27 * r(b6 * b6)) + r(9 * r(b2 * b4) * b6);
        r(d) as u64
    }
}

/// Absolute trace of `a` to `F_2` is 1.
pub(crate) fn trace_f2<F: Field>(f: &F, a: &F::Elem) -> bool {
    let bits = f.order().trailing_zeros();
    let mut acc = f.zero();
    let mut x = a.clone();
    for _ in 0..bits {
        acc = f.add(&acc, &x);
        x = f.mul(&x, &x);
    }
    !f.is_zero(&acc)
}

/// Points on the projective Weierstrass curve over the field `f`, including
/// the point at infinity. `a` are the coefficients as field elements.
pub fn weierstrass_count<F: Field>(f: &F, a: &[F::Elem; 5], elems: &[F::Elem]) -> u128 {
    let [a1, a2, a3, a4, a6] = a;
    let char2 = f.characteristic() == 2;
    let four = f.from_int(4);
    let affine: u128 = elems
        .par_iter()
        .map(|x| {
            // y² + b·y = c
            let b = f.add(&f.mul(a1, x), a3);
            let x2 = f.mul(x, x);
            let c = f.add(&f.add(&f.mul(&x2, &f.add(x, a2)), &f.mul(a4, x)), a6);
            if char2 {
                match f.inv(&b) {
                    None => 1,
                    Some(bi) => {
                        if trace_f2(f, &f.mul(&c, &f.mul(&bi, &bi))) {
                            0
                        } else {
                            2
                        }
                    }
                }
            } else {
                let disc = f.add(&f.mul(&b, &b), &f.mul(&four, &c));
                (1 + f.quadratic_character(&disc) as i32) as u128
            }
        })
        .sum();
    affine + 1
}

/// `|E(F_{q^n})|` for the Weierstrass curve with coefficients `a = [a1, a2, a3, a4, a6]`.
pub fn count_elliptic(a: [i64; 5], q: u64, n: u32) -> Result<u128, GeometryError> {
    let tower = Tower::new(q, n)?;
    let p = with_tower!(&tower, f => f.characteristic());
    if (Weierstrass { a }).discriminant(p) == 0 {
        return Err(GeometryError::SingularCurve);
    }
    let bound = crate::enumeration_bound();
    with_tower!(&tower, f => {
        let elems = f.sort_elements(n, bound)?;
        let coeffs = a.map(|c| f.from_int(c));
        Ok(weierstrass_count(f, &coeffs, &elems))
    })
}
