//! ℓ-adic views of zeta data.
//!
//! ```
//! use num_rational::Ratio;
//! use pfchi::padic::{newton_polygon, unit_root};
//!
//! // T² − 2T + 5 at 5: one unit root and one of valuation 1
//! let np = newton_polygon(&[5, -2, 1], 5).unwrap();
//! assert_eq!(np.slopes, vec![Ratio::from_integer(0), Ratio::from_integer(1)]);
//! assert_eq!(unit_root(2, 5, 5, 2).unwrap().value, 12);
//! ```

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::euler::EulerValue;
use crate::gf::{is_prime, prime_power};
use crate::zeta::{power_sum, ZetaData};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PadicError {
    #[error("the zero polynomial has no Newton polygon")]
    ZeroPolynomial,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("modulus {0} is too large")]
    ModulusTooLarge(String),
    #[error("power sums of 1 + tE disagree mod {modulus}: {values:?}")]
    StabilizationFailure { modulus: u64, values: Vec<u64> },
    #[error("a characteristic root is not a unit at {ell}")]
    NonUnitRoot { ell: u64 },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("p divides the trace; the curve is supersingular")]
    Supersingular,
}

/// Valuations of the roots of a polynomial, counted with multiplicity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewtonPolygon {
    pub ell: u64,
    /// Ascending.
    pub slopes: Vec<Ratio<i64>>,
}

impl NewtonPolygon {
    pub fn unit_count(&self) -> usize {
        self.slopes.iter().filter(|s| s.is_zero()).count()
    }
}

/// A residue class `value mod modulus` with `0 <= value < modulus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Residue {
    pub modulus: u64,
    pub value: u64,
}

impl Residue {
    pub fn new(value: i128, modulus: u64) -> Residue {
        Residue { modulus, value: value.rem_euclid(modulus as i128) as u64 }
    }
}

fn valuation(x: &BigInt, ell: u64) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let ell = BigInt::from(ell);
    let mut x = x.clone();
    let mut v = 0;
    while x.is_multiple_of(&ell) {
        x /= &ell;
        v += 1;
    }
    Some(v)
}

/// Newton polygon of `Σ c_i Tⁱ` (ascending coefficients) at `ell`: the
/// valuations of its roots. A root at 0 is reported with slope `i64::MAX`.
pub fn newton_polygon(coeffs: &[i64], ell: u64) -> Result<NewtonPolygon, PadicError> {
    let big: Vec<BigInt> = coeffs.iter().map(|&c| BigInt::from(c)).collect();
    newton_polygon_big(&big, ell)
}

pub fn newton_polygon_big(coeffs: &[BigInt], ell: u64) -> Result<NewtonPolygon, PadicError> {
    if !is_prime(ell) {
        return Err(PadicError::NotPrime(ell));
    }
    let pts: Vec<(i64, i64)> = coeffs.iter().enumerate().filter_map(|(i, c)| valuation(c, ell).map(|v| (i as i64, v))).collect();
    if pts.is_empty() {
        return Err(PadicError::ZeroPolynomial);
    }
    let mut slopes = vec![Ratio::from_integer(i64::MAX); pts[0].0 as usize];
    // lower hull, left to right
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &pt in &pts {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            // drop the middle point when it is on or above the chord
            if (y2 - y1) * (pt.0 - x1) >= (pt.1 - y1) * (x2 - x1) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    for w in hull.windows(2) {
        let (x1, y1) = w[0];
        let (x2, y2) = w[1];
        // a segment of slope −v covers x2 − x1 roots of valuation v
        let v = Ratio::new(y1 - y2, x2 - x1);
        slopes.extend(std::iter::repeat_n(v, (x2 - x1) as usize));
    }
    slopes.sort();
    Ok(NewtonPolygon { ell, slopes })
}

/// Valuations of the reciprocal roots of `1 + c_1 T + …` (the `α_i`).
pub fn root_valuations(poly: &[i64], ell: u64) -> Result<NewtonPolygon, PadicError> {
    let rev: Vec<i64> = poly.iter().rev().copied().collect();
    newton_polygon(&rev, ell)
}

fn check_modulus(ell: u64, k: u32) -> Result<u64, PadicError> {
    if !is_prime(ell) {
        return Err(PadicError::NotPrime(ell));
    }
    ell.checked_pow(k).filter(|&m| m < (1 << 62)).ok_or_else(|| PadicError::ModulusTooLarge(format!("{ell}^{k}")))
}

/// `trace(C^n) mod m` for the companion matrix `C` of the reversed
/// polynomial, i.e. `Σ α^n mod m`.
fn power_sum_mod(poly: &[i64], n: &BigUint, m: u64) -> u64 {
    let d = poly.len() - 1;
    if d == 0 {
        return 0;
    }
    let md = m as u128;
    let red = |x: i64| (x as i128).rem_euclid(md as i128) as u128;
    // C acts on (x^0..x^{d−1}) as multiplication by x modulo the monic
    // reversed polynomial x^d + c_1 x^{d−1} + … + c_d
    let mut comp = vec![vec![0u128; d]; d];
    for i in 1..d {
        comp[i][i - 1] = 1;
    }
    for i in 0..d {
        comp[i][d - 1] = red(-poly[d - i]);
    }
    let mul = |a: &Vec<Vec<u128>>, b: &Vec<Vec<u128>>| -> Vec<Vec<u128>> {
        let mut out = vec![vec![0u128; d]; d];
        for i in 0..d {
            for k in 0..d {
                if a[i][k] == 0 {
                    continue;
                }
                for j in 0..d {
                    out[i][j] = (out[i][j] + a[i][k] * b[k][j]) % md;
                }
            }
        }
        out
    };
    let mut acc: Vec<Vec<u128>> = (0..d).map(|i| (0..d).map(|j| u128::from(i == j) % md).collect()).collect();
    for bit in (0..n.bits()).rev() {
        acc = mul(&acc, &acc);
        if n.bit(bit) {
            acc = mul(&acc, &comp);
        }
    }
    ((0..d).map(|i| acc[i][i]).sum::<u128>() % md) as u64
}

/// `ℓ^{kD} · lcm{ℓ^d − 1 : 1 <= d <= D}`.
pub fn stabilization_exponent(ell: u64, k: u32, degree: usize) -> BigUint {
    let l = BigUint::from(ell);
    let mut lcm = BigUint::one();
    for d in 1..=degree {
        lcm = lcm.lcm(&(l.pow(d as u32) - 1u32));
    }
    l.pow(k * degree as u32) * lcm
}

/// `Σ α′_i − Σ β′_j mod ℓ^k`, where the roots of positive valuation are
/// dropped: the common value of `N_{1+tE} mod ℓ^k` for `t = 1, 2, 3`.
pub fn unit_part_residue(z: &ZetaData, ell: u64, k: u32) -> Result<Residue, PadicError> {
    let m = check_modulus(ell, k)?;
    let degree = z.a.len() - 1 + z.b.len() - 1;
    let e = stabilization_exponent(ell, k, degree);
    let values: Vec<u64> = (1u32..=3)
        .map(|t| {
            let n = BigUint::one() + &e * t;
            (power_sum_mod(&z.a, &n, m) + m - power_sum_mod(&z.b, &n, m)) % m
        })
        .collect();
    if values.iter().any(|&v| v != values[0]) {
        return Err(PadicError::StabilizationFailure { modulus: m, values });
    }
    Ok(Residue { modulus: m, value: values[0] })
}

/// Per-modulus principal Euler characteristic. Away from `p` this is
/// `N_1 mod ℓ^k` (and must agree with the unit part); at `p` it is the unit
/// part. Composite moduli are assembled by CRT.
pub fn principal_chi(z: &ZetaData, moduli: &[u64]) -> Result<EulerValue, PadicError> {
    let (p, _) = prime_power(z.q).map_err(|_| PadicError::NotPrimePower(z.q))?;
    let n1 = power_sum(z, 1);
    let mut value = EulerValue::new();
    for &n in moduli {
        let mut parts = Vec::new();
        for (ell, k) in factor_small(n) {
            let unit = unit_part_residue(z, ell, k)?;
            if ell != p {
                let direct = Residue::new(n1.mod_floor(&BigInt::from(unit.modulus)).to_i128().unwrap(), unit.modulus);
                if direct != unit {
                    return Err(PadicError::StabilizationFailure { modulus: unit.modulus, values: vec![direct.value, unit.value] });
                }
            }
            parts.push(unit);
        }
        let r = crt(&parts);
        value.insert(n, r.value).expect("CRT of coprime parts is coherent");
    }
    Ok(value)
}

pub(crate) fn factor_small(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut k = 0;
            while n.is_multiple_of(d) {
                n /= d;
                k += 1;
            }
            out.push((d, k));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Combines residues with pairwise coprime moduli.
pub fn crt(parts: &[Residue]) -> Residue {
    let mut acc = Residue { modulus: 1, value: 0 };
    for r in parts {
        let (m1, m2) = (acc.modulus as i128, r.modulus as i128);
        let g = m1.extended_gcd(&m2);
        assert_eq!(g.gcd, 1, "moduli must be coprime");
        let m = m1 * m2;
        let x = (acc.value as i128 + (r.value as i128 - acc.value as i128) * g.x % m2 * m1).rem_euclid(m);
        acc = Residue { modulus: m as u64, value: x as u64 };
    }
    acc
}

/// `Σ 1/α_i − Σ 1/β_j`, exactly.
pub fn dual_chi(z: &ZetaData) -> Result<BigRational, PadicError> {
    let (p, _) = prime_power(z.q).map_err(|_| PadicError::NotPrimePower(z.q))?;
    let mut total = BigRational::zero();
    for (poly, sign) in [(&z.a, 1), (&z.b, -1)] {
        let d = poly.len() - 1;
        if d == 0 {
            continue;
        }
        // every α is an algebraic integer, so all are units at ℓ iff their
        // product ±c_d is
        let mut rest = poly[d].unsigned_abs();
        while rest % p == 0 {
            rest /= p;
        }
        if rest != 1 {
            let ell = factor_small(rest)[0].0;
            debug_assert!(root_valuations(poly, ell).unwrap().slopes.iter().any(|s| s.is_positive()));
            return Err(PadicError::NonUnitRoot { ell });
        }
        let inv_sum = BigRational::new(BigInt::from(-poly[d - 1]), BigInt::from(poly[d]));
        total += inv_sum * BigInt::from(sign);
    }
    Ok(total)
}

/// `v_p(Q(p^i)) >= i(2g − r)` where `Q` is the monic polynomial with roots
/// the `α_i` of the curve and `r` the number of unit roots at `p`.
pub fn p_power_divisibility(z: &ZetaData, p: u64, i: u32) -> Result<bool, PadicError> {
    let (pq, _) = prime_power(z.q).map_err(|_| PadicError::NotPrimePower(z.q))?;
    if pq != p {
        return Err(PadicError::PreconditionViolated(format!("q = {} is not a power of {p}", z.q)));
    }
    let two_g = (z.b.len() - 1) as u32;
    let threshold = BigInt::from(p).pow(two_g * i);
    if BigInt::from(z.q) <= threshold {
        return Err(PadicError::PreconditionViolated(format!("q = {} <= {p}^{}", z.q, two_g * i)));
    }
    let r = root_valuations(&z.b, p)?.unit_count() as i64;
    let x = BigInt::from(p).pow(i);
    // Q(x) = x^{2g} B(1/x) = Σ b_j x^{2g−j}
    let qx: BigInt = z.b.iter().enumerate().map(|(j, &b)| BigInt::from(b) * x.pow(two_g - j as u32)).sum();
    Ok(match valuation(&qx, p) {
        None => true,
        Some(v) => v >= i as i64 * (two_g as i64 - r),
    })
}

/// The root of `T² − aT + q` that is a `p`-adic unit, mod `p^s`.
pub fn unit_root(a: i64, q: u64, p: u64, s: u32) -> Result<Residue, PadicError> {
    let m = check_modulus(p, s)? as i128;
    if (a as i128).rem_euclid(p as i128) == 0 {
        return Err(PadicError::Supersingular);
    }
    let (a, q) = ((a as i128).rem_euclid(m), (q as i128).rem_euclid(m));
    // T² − aT ≡ T(T − a) mod p, so the unit root starts at a
    let mut beta = a % p as i128;
    let mut modulus = p as i128;
    while modulus < m {
        modulus = (modulus * modulus).min(m);
        let f = (beta * beta - a * beta + q).rem_euclid(modulus);
        let df = (2 * beta - a).rem_euclid(modulus);
        let inv = df.extended_gcd(&modulus).x.rem_euclid(modulus);
        beta = (beta - f * inv % modulus).rem_euclid(modulus);
    }
    Ok(Residue { modulus: m as u64, value: beta.rem_euclid(m) as u64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::count_elliptic;
    use crate::zeta::{fit_curve_lpoly, CountSeries};
    use proptest::prelude::*;

    fn rat(a: i64, b: i64) -> Ratio<i64> {
        Ratio::new(a, b)
    }

    #[test]
    fn newton_polygon_examples() {
        assert_eq!(newton_polygon(&[5, -2, 1], 5).unwrap().slopes, vec![rat(0, 1), rat(1, 1)]);
        assert_eq!(newton_polygon(&[5, 0, 1], 5).unwrap().slopes, vec![rat(1, 2), rat(1, 2)]);
        assert_eq!(newton_polygon(&[5, -2, 1], 3).unwrap().slopes, vec![rat(0, 1), rat(0, 1)]);
        assert_eq!(newton_polygon(&[0, 0], 3), Err(PadicError::ZeroPolynomial));
        // (T − 2)(T − 4)(T − 3) at 2: valuations 1, 2, 0
        assert_eq!(newton_polygon(&[-24, 26, -9, 1], 2).unwrap().slopes, vec![rat(0, 1), rat(1, 1), rat(2, 1)]);
    }

    #[test]
    fn unit_part_examples() {
        let gm = ZetaData::new(5, vec![1, -5], vec![1, -1]);
        assert_eq!(unit_part_residue(&gm, 3, 2).unwrap(), Residue { modulus: 9, value: 4 });
        let line = ZetaData::new(7, vec![1, -7], vec![1]);
        assert_eq!(unit_part_residue(&line, 3, 3).unwrap().value, 7);
        assert_eq!(unit_part_residue(&line, 7, 2).unwrap().value, 0);
    }

    #[test]
    fn unit_part_at_p_keeps_the_unit_root() {
        // y² = x³ + x over F_5 is ordinary: α ≡ unit root of T² − 2T + 5
        let e = ZetaData::curve(5, vec![1, -2, 5]);
        let u = unit_part_residue(&e, 5, 2).unwrap();
        let beta = unit_root(2, 5, 5, 2).unwrap();
        // roots of A: 1 and 5; only 1 survives
        assert_eq!(u.value, (1 + 25 - beta.value) % 25);
    }

    #[test]
    fn principal_chi_examples() {
        let e = ZetaData::curve(5, vec![1, -2, 5]);
        assert_eq!(principal_chi(&e, &[9]).unwrap().get(9), Some(4));
        let gm = ZetaData::new(5, vec![1, -5], vec![1, -1]);
        assert_eq!(principal_chi(&gm, &[4]).unwrap().get(4), Some(0));
        let empty = ZetaData::new(5, vec![1], vec![1]);
        let v = principal_chi(&empty, &[2, 3, 5, 6, 25]).unwrap();
        assert!(v.entries().values().all(|&x| x == 0));
        // 15 = 3·5 mixes an ℓ ≠ p part with the p part
        let v = principal_chi(&gm, &[15]).unwrap();
        // 4 mod 3 away from p; at 5 only the root 1 of B survives, giving −1
        assert_eq!(v.get(15), Some(4));
    }

    #[test]
    fn dual_chi_examples() {
        let e = ZetaData::curve(5, vec![1, -2, 5]);
        assert_eq!(dual_chi(&e).unwrap(), BigRational::new(4.into(), 5.into()));
        for q in [2u64, 3, 9, 11] {
            let p1 = ZetaData::curve(q, vec![1]);
            assert_eq!(dual_chi(&p1).unwrap(), BigRational::new((q + 1).into(), q.into()));
        }
        let bad = ZetaData::new(5, vec![1, -3], vec![1]);
        assert_eq!(dual_chi(&bad), Err(PadicError::NonUnitRoot { ell: 3 }));
    }

    #[test]
    fn p_power_divisibility_examples() {
        let e = fit_curve_lpoly(&CountSeries::new(5, vec![4]), 1).unwrap();
        assert_eq!(p_power_divisibility(&e, 5, 1), Err(PadicError::PreconditionViolated("q = 5 <= 5^2".into())));
        assert!(p_power_divisibility(&e.base_change(3), 5, 1).unwrap());
        let ss = ZetaData::curve(625, vec![1, 0, 625]);
        assert!(p_power_divisibility(&ss, 5, 1).unwrap());
        assert!(matches!(p_power_divisibility(&e, 3, 1), Err(PadicError::PreconditionViolated(_))));
    }

    #[test]
    fn unit_root_examples() {
        // 12² − 2·12 + 5 = 125
        assert_eq!(unit_root(2, 5, 5, 2).unwrap(), Residue { modulus: 25, value: 12 });
        assert_eq!(unit_root(1, 2, 2, 1).unwrap(), Residue { modulus: 2, value: 1 });
        assert_eq!(unit_root(0, 7, 7, 3), Err(PadicError::Supersingular));
        assert_eq!(unit_root(-6, 25, 5, 2).unwrap().value, 19);
    }

    #[test]
    fn elliptic_slopes() {
        for (a, q) in [([0, 0, 0, 1, 0], 5u64), ([0, 0, 0, 0, 1], 5), ([0, 0, 0, 1, 1], 7), ([0, 0, 0, 2, 1], 11), ([0, 0, 0, 3, 0], 13)] {
            let n1 = count_elliptic(a, q, 1).unwrap();
            let z = fit_curve_lpoly(&CountSeries::new(q, vec![n1]), 1).unwrap();
            let trace = z.b[1].abs();
            let np = root_valuations(&z.b, q).unwrap();
            let r = np.unit_count();
            assert_eq!(r == 1, trace as u64 % q != 0);
            assert!(np.slopes.iter().filter(|s| !s.is_zero()).all(|s| *s >= rat(1, 2)));
            for ell in [2u64, 3, 5, 7, 11, 13, 17, 19] {
                if ell != q {
                    assert!(root_valuations(&z.a, ell).unwrap().slopes.iter().all(|s| s.is_zero()));
                    assert!(root_valuations(&z.b, ell).unwrap().slopes.iter().all(|s| s.is_zero()));
                }
            }
        }
    }

    proptest! {
        #[test]
        fn hensel_root_divides(a in -40i64..40, pi in 0usize..4, s in 1u32..5) {
            let p = [2u64, 3, 5, 7][pi];
            prop_assume!(a.rem_euclid(p as i64) != 0);
            let q = p * p;
            let beta = unit_root(a, q, p, s).unwrap();
            let m = beta.modulus as i128;
            let b = beta.value as i128;
            prop_assert_eq!((b * b - a as i128 * b + q as i128).rem_euclid(m), 0);
            prop_assert!(b % p as i128 != 0);
        }

        #[test]
        fn unit_part_away_from_p_is_the_count(trace in -4i64..=4, li in 0usize..4, k in 1u32..3) {
            let q = 5u64;
            let ell = [2u64, 3, 7, 11][li];
            let z = ZetaData::curve(q, vec![1, -trace, q as i64]);
            let u = unit_part_residue(&z, ell, k).unwrap();
            let n1 = power_sum(&z, 1);
            prop_assert_eq!(BigInt::from(u.value), n1.mod_floor(&BigInt::from(u.modulus)));
        }

        #[test]
        fn crt_round_trip(x in 0u64..10_000, m1 in 2u64..50, m2 in 2u64..50) {
            prop_assume!(m1.gcd(&m2) == 1);
            let r = crt(&[Residue::new(x as i128, m1), Residue::new(x as i128, m2)]);
            prop_assert_eq!(r.value, x % (m1 * m2));
        }
    }
}
