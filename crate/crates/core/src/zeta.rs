//! Zeta data: the reciprocal roots `α_i`, `β_j` with
//! `N_n = Σ α_i^n − Σ β_j^n`, packed as integer polynomials
//! `A = Π (1 − α_i T)` and `B = Π (1 − β_j T)`, so that
//! `Z(T) = exp(Σ N_n Tⁿ/n) = B/A`.
//!
//! ```
//! use pfchi::zeta::{fit_curve_lpoly, power_sum, CountSeries};
//!
//! let z = fit_curve_lpoly(&CountSeries::new(5, vec![4]), 1).unwrap();
//! assert_eq!(z.b, vec![1, -2, 5]);
//! assert_eq!(power_sum(&z, 2), 32.into());
//! ```

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::geometry::{count_points, ConstructibleSpec, GeometryError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ZetaError {
    #[error("need at least {need} counts, have {have}")]
    InsufficientCounts { need: usize, have: usize },
    #[error("counts are not those of a genus-{g} curve: N_{n} predicted {predicted}, given {given}")]
    InconsistentCounts { g: usize, n: usize, predicted: String, given: String },
    #[error("no rational zeta function with deg A + deg B <= {bound} fits the counts")]
    NoRecurrence { bound: usize },
    #[error("fitted data predicts N_{n} = {predicted} but the count is {given}")]
    ValidationFailure { n: usize, predicted: String, given: String },
    #[error("coefficient {0} does not fit in 64 bits")]
    Overflow(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ZetaData {
    pub q: u64,
    /// Ascending coefficients, constant term 1.
    #[serde(rename = "A")]
    pub a: Vec<i64>,
    #[serde(rename = "B")]
    pub b: Vec<i64>,
}

/// `N_1, N_2, …` over `F_q, F_{q²}, …`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountSeries {
    pub q: u64,
    pub counts: Vec<u128>,
}

impl CountSeries {
    pub fn new(q: u64, counts: Vec<u128>) -> CountSeries {
        CountSeries { q, counts }
    }

    /// Counts `spec` over `F_{q^n}` for `n = 1..=upto`.
    pub fn of_spec(spec: &ConstructibleSpec, upto: u32) -> Result<CountSeries, ZetaError> {
        let counts = (1..=upto).map(|n| count_points(spec, n)).collect::<Result<_, _>>()?;
        Ok(CountSeries { q: spec.q(), counts })
    }
}

impl ZetaData {
    pub fn new(q: u64, a: Vec<i64>, b: Vec<i64>) -> ZetaData {
        ZetaData { q, a: trim(a), b: trim(b) }
    }

    /// `A = (1 − T)(1 − qT)` and the given `B`.
    pub fn curve(q: u64, b: Vec<i64>) -> ZetaData {
        ZetaData::new(q, vec![1, -(q as i64) - 1, q as i64], b)
    }

    /// Data of the same variety over `F_{q^r}`: each root is raised to the
    /// `r`-th power.
    pub fn base_change(&self, r: u32) -> ZetaData {
        ZetaData { q: self.q.pow(r), a: root_power(&self.a, r), b: root_power(&self.b, r) }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<ZetaData> {
        serde_json::from_str(text)
    }
}

fn trim(mut p: Vec<i64>) -> Vec<i64> {
    while p.len() > 1 && *p.last().unwrap() == 0 {
        p.pop();
    }
    p
}

/// Power sums `s_1..=s_upto` of the reciprocal roots of `1 + c_1 T + …`.
pub fn power_sums(poly: &[i64], upto: usize) -> Vec<BigInt> {
    let c: Vec<BigInt> = poly.iter().map(|&x| BigInt::from(x)).collect();
    let d = c.len() - 1;
    let mut s: Vec<BigInt> = vec![BigInt::zero()];
    for n in 1..=upto {
        let mut acc = BigInt::zero();
        for i in 1..=d.min(n - 1) {
            acc += &c[i] * &s[n - i];
        }
        if n <= d {
            acc += &c[n] * n;
        }
        s.push(-acc);
    }
    s.remove(0);
    s
}

/// `Σ α_i^n − Σ β_j^n`.
pub fn power_sum(z: &ZetaData, n: usize) -> BigInt {
    assert!(n >= 1, "power sums start at n = 1");
    let sa = power_sums(&z.a, n);
    let sb = power_sums(&z.b, n);
    &sa[n - 1] - &sb[n - 1]
}

/// Polynomial whose reciprocal roots are the `r`-th powers of those of `p`.
fn root_power(p: &[i64], r: u32) -> Vec<i64> {
    let d = p.len() - 1;
    let sums = power_sums(p, d * r as usize);
    let s: Vec<BigInt> = (1..=d).map(|k| sums[k * r as usize - 1].clone()).collect();
    from_power_sums(&s).into_iter().map(|c| c.to_i64().expect("base change coefficients fit in 64 bits")).collect()
}

/// Inverse Newton identities: the polynomial `1 + c_1 T + … + c_d T^d`
/// whose reciprocal roots have power sums `s_1..=s_d`.
fn from_power_sums(s: &[BigInt]) -> Vec<BigInt> {
    let mut c = vec![BigInt::one()];
    for n in 1..=s.len() {
        let mut acc = s[n - 1].clone();
        for i in 1..n {
            acc += &c[i] * &s[n - i - 1];
        }
        let (quot, rem) = (-acc).div_rem(&BigInt::from(n));
        debug_assert!(rem.is_zero());
        c.push(quot);
    }
    c
}

/// L-polynomial of a genus-`g` curve from `N_1..N_g`, completed by the
/// functional equation `b_{2g−i} = q^{g−i} b_i`; every supplied count is
/// checked against the result.
pub fn fit_curve_lpoly(counts: &CountSeries, g: usize) -> Result<ZetaData, ZetaError> {
    if counts.counts.len() < g {
        return Err(ZetaError::InsufficientCounts { need: g, have: counts.counts.len() });
    }
    let q = BigInt::from(counts.q);
    let s: Vec<BigInt> = (1..=g).map(|n| BigInt::one() + q.pow(n as u32) - BigInt::from(counts.counts[n - 1])).collect();
    // the Newton division must be exact for genuine curve data
    let mut b = vec![BigInt::one()];
    for n in 1..=g {
        let mut acc = s[n - 1].clone();
        for i in 1..n {
            acc += &b[i] * &s[n - i - 1];
        }
        let (quot, rem) = (-acc).div_rem(&BigInt::from(n));
        if !rem.is_zero() {
            return Err(ZetaError::InconsistentCounts {
                g,
                n,
                predicted: "a non-integral coefficient".into(),
                given: counts.counts[n - 1].to_string(),
            });
        }
        b.push(quot);
    }
    for i in (0..g).rev() {
        b.push(q.pow((g - i) as u32) * &b[i]);
    }
    let b = b.into_iter().map(to_i64).collect::<Result<Vec<_>, _>>()?;
    let z = ZetaData::curve(counts.q, b);
    for (n, given) in counts.counts.iter().enumerate() {
        let predicted = power_sum(&z, n + 1);
        if predicted != BigInt::from(*given) {
            return Err(ZetaError::InconsistentCounts { g, n: n + 1, predicted: predicted.to_string(), given: given.to_string() });
        }
    }
    Ok(z)
}

fn to_i64(x: BigInt) -> Result<i64, ZetaError> {
    x.to_i64().ok_or_else(|| ZetaError::Overflow(x.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FitOptions {
    /// Upper bound on `deg A + deg B`.
    pub degree_bound: usize,
    /// Counts held back from the fit and used only to check it.
    pub min_validation: usize,
}

impl FitOptions {
    pub fn new(degree_bound: usize) -> FitOptions {
        FitOptions { degree_bound, min_validation: 4 }
    }
}

/// Fits `B/A` to the counts with `deg A + deg B <= degree_bound`, keeping
/// four counts for validation.
pub fn fit_rational_zeta(counts: &CountSeries, degree_bound: usize) -> Result<ZetaData, ZetaError> {
    fit_rational_zeta_with(counts, FitOptions::new(degree_bound))
}

pub fn fit_rational_zeta_with(counts: &CountSeries, opts: FitOptions) -> Result<ZetaData, ZetaError> {
    let have = counts.counts.len();
    if have <= opts.min_validation {
        return Err(ZetaError::InsufficientCounts { need: opts.min_validation + 1, have });
    }
    let used = have - opts.min_validation;
    let series = zeta_series(&counts.counts[..used]);
    let (conn, len) = berlekamp_massey(&series);
    if len > opts.degree_bound + 1 {
        return Err(ZetaError::NoRecurrence { bound: opts.degree_bound });
    }
    if 2 * len > series.len() {
        // the recurrence is not yet determined by the data it was fitted to
        return Err(ZetaError::InsufficientCounts { need: 2 * len - 1 + opts.min_validation, have });
    }
    let a = rat_trim(conn);
    let numer = rat_trim(mul_trunc(&a, &series, len));
    if a.len() - 1 + numer.len() - 1 > opts.degree_bound {
        return Err(ZetaError::NoRecurrence { bound: opts.degree_bound });
    }
    let to_int = |p: Vec<BigRational>| -> Result<Vec<i64>, ZetaError> {
        p.into_iter()
            .map(|c| if c.is_integer() { to_i64(c.to_integer()) } else { Err(ZetaError::NoRecurrence { bound: opts.degree_bound }) })
            .collect()
    };
    let z = ZetaData::new(counts.q, to_int(a)?, to_int(numer)?);
    for (n, given) in counts.counts.iter().enumerate() {
        let predicted = power_sum(&z, n + 1);
        if predicted != BigInt::from(*given) {
            return Err(ZetaError::ValidationFailure { n: n + 1, predicted: predicted.to_string(), given: given.to_string() });
        }
    }
    Ok(z)
}

/// Coefficients `z_0..z_M` of `exp(Σ N_n Tⁿ/n)`.
fn zeta_series(counts: &[u128]) -> Vec<BigRational> {
    let mut z = vec![BigRational::one()];
    for n in 1..=counts.len() {
        let mut acc = BigRational::zero();
        for i in 1..=n {
            acc += BigRational::from_integer(BigInt::from(counts[i - 1])) * &z[n - i];
        }
        z.push(acc / BigRational::from_integer(BigInt::from(n)));
    }
    z
}

/// Shortest connection polynomial `C` (with `C_0 = 1`) such that
/// `Σ_i C_i s_{n−i} = 0` for all `n >= L`; returns `(C, L)`.
fn berlekamp_massey(s: &[BigRational]) -> (Vec<BigRational>, usize) {
    let mut c = vec![BigRational::one()];
    let mut b = vec![BigRational::one()];
    let mut l = 0usize;
    let mut m = 1usize;
    let mut last = BigRational::one();
    for n in 0..s.len() {
        let mut d = s[n].clone();
        for i in 1..=l.min(c.len() - 1) {
            d += &c[i] * &s[n - i];
        }
        if d.is_zero() {
            m += 1;
            continue;
        }
        let coef = &d / &last;
        let prev = c.clone();
        if c.len() < b.len() + m {
            c.resize(b.len() + m, BigRational::zero());
        }
        for (i, bi) in b.iter().enumerate() {
            c[i + m] -= &coef * bi;
        }
        if 2 * l <= n {
            l = n + 1 - l;
            b = prev;
            last = d;
            m = 1;
        } else {
            m += 1;
        }
    }
    c.truncate(l + 1);
    (c, l)
}

fn rat_trim(mut p: Vec<BigRational>) -> Vec<BigRational> {
    while p.len() > 1 && p.last().unwrap().is_zero() {
        p.pop();
    }
    p
}

fn mul_trunc(a: &[BigRational], b: &[BigRational], len: usize) -> Vec<BigRational> {
    (0..len)
        .map(|k| {
            let mut acc = BigRational::zero();
            for i in 0..=k.min(a.len() - 1) {
                if k - i < b.len() {
                    acc += &a[i] * &b[k - i];
                }
            }
            acc
        })
        .collect()
}

/// Exact functional equation and `|α|² = q` for every reciprocal root of
/// `B`, the latter numerically to 1e−9.
pub fn weil_check(z: &ZetaData, g: usize) -> bool {
    if z.b.len() != 2 * g + 1 || z.b[0] != 1 {
        return false;
    }
    let q = BigInt::from(z.q);
    for i in 0..=g {
        if BigInt::from(z.b[2 * g - i]) != q.pow((g - i) as u32) * z.b[i] {
            return false;
        }
    }
    if g == 0 {
        return true;
    }
    let roots = reciprocal_roots(&z.b);
    let qf = z.q as f64;
    roots.len() == 2 * g && roots.iter().all(|r| (r.norm_sqr() / qf - 1.0).abs() <= 1e-9)
}

/// Reciprocal roots of `1 + c_1 T + …`, i.e. the roots of the reversed
/// monic polynomial, with multiplicity.
pub fn reciprocal_roots(poly: &[i64]) -> Vec<Complex64> {
    let rev: Vec<BigRational> = poly.iter().rev().map(|&c| BigRational::from_integer(c.into())).collect();
    let mut out = Vec::new();
    // work on the squarefree parts so every root is simple
    let mut rest = monic(rev);
    while rest.len() > 1 {
        let g = rat_gcd(rest.clone(), derivative(&rest));
        let sqf = rat_div(&rest, &g);
        let sqf_f: Vec<f64> = sqf.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
        out.extend(simple_roots(&sqf_f));
        rest = g;
    }
    out
}

fn simple_roots(monic_asc: &[f64]) -> Vec<Complex64> {
    let d = monic_asc.len() - 1;
    if d == 0 {
        return Vec::new();
    }
    let mut comp = DMatrix::<f64>::zeros(d, d);
    for i in 1..d {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..d {
        comp[(i, d - 1)] = -monic_asc[i];
    }
    let eig = comp.complex_eigenvalues();
    let eval = |x: Complex64| -> (Complex64, Complex64) {
        let mut v = Complex64::new(0.0, 0.0);
        let mut dv = Complex64::new(0.0, 0.0);
        for &c in monic_asc.iter().rev() {
            dv = dv * x + v;
            v = v * x + c;
        }
        (v, dv)
    };
    eig.iter()
        .map(|&r0| {
            let mut r = r0;
            for _ in 0..50 {
                let (v, dv) = eval(r);
                if dv.norm() == 0.0 {
                    break;
                }
                let step = v / dv;
                r -= step;
                if step.norm() <= 1e-15 * r.norm().max(1.0) {
                    break;
                }
            }
            r
        })
        .collect()
}

fn monic(mut p: Vec<BigRational>) -> Vec<BigRational> {
    p = rat_trim(p);
    let lead = p.last().unwrap().clone();
    if !lead.is_zero() {
        for c in p.iter_mut() {
            *c = &*c / &lead;
        }
    }
    p
}

fn derivative(p: &[BigRational]) -> Vec<BigRational> {
    if p.len() <= 1 {
        return vec![BigRational::zero()];
    }
    p.iter().enumerate().skip(1).map(|(i, c)| c * BigRational::from_integer(i.into())).collect()
}

fn rat_divrem(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let b = rat_trim(b.to_vec());
    let db = b.len() - 1;
    let mut r = rat_trim(a.to_vec());
    if r.len() < b.len() {
        return (vec![BigRational::zero()], r);
    }
    let mut quot = vec![BigRational::zero(); r.len() - db];
    for shift in (0..quot.len()).rev() {
        let coef = &r[shift + db] / &b[db];
        if !coef.is_zero() {
            for (i, bi) in b.iter().enumerate() {
                r[i + shift] -= &coef * bi;
            }
        }
        quot[shift] = coef;
    }
    r.truncate(db.max(1));
    (quot, rat_trim(r))
}

fn rat_div(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    monic(rat_divrem(a, b).0)
}

fn rat_gcd(mut a: Vec<BigRational>, mut b: Vec<BigRational>) -> Vec<BigRational> {
    b = rat_trim(b);
    while !(b.len() == 1 && b[0].is_zero()) {
        let r = rat_divrem(&a, &b).1;
        a = b;
        b = r;
    }
    monic(a)
}

/// Rounds a trace bound `|a| <= 2√q` check into integers: `a² <= 4q`.
pub fn within_hasse(trace: i64, q: u64) -> bool {
    (trace as i128).pow(2) <= 4 * q as i128
}

/// The largest `n` with `q^{per_n · n} <= bound` (at least 1 when `q^{per_n} <= bound`).
pub fn feasible_degree(q: u64, per_n: u32, bound: u128) -> u32 {
    let mut n = 0;
    let step = (q as u128).pow(per_n);
    let mut size = 1u128;
    while let Some(next) = size.checked_mul(step).filter(|&s| s <= bound) {
        size = next;
        n += 1;
    }
    n
}
