//! `ℓ^k`-torsion of elliptic curves over finite fields and the Frobenius
//! action on it.
//!
//! Torsion points are located through division polynomials: the
//! `x`-coordinates of points of exact order `ℓ^k` are the roots of a
//! polynomial over `F_q` whose factorization tells which extension
//! `F_{q^m}` holds all of `E[ℓ^k]`. Only that extension is ever built, and
//! only the roots actually needed are extracted there.
//!
//! ```
//! use pfchi::torsion::{frob_matrix, torsion_basis};
//!
//! // y² = x³ + x over F_5: x³ + x splits, so E[2] is rational
//! let basis = torsion_basis([0, 0, 0, 1, 0], 2, 1, 5).unwrap();
//! assert_eq!(basis.ext_degree, 1);
//! let m = frob_matrix(&basis).unwrap();
//! assert_eq!(m.entries, vec![vec![1, 0], vec![0, 1]]);
//! ```

use std::collections::{BTreeSet, HashMap};
use std::sync::{Mutex, OnceLock};

use num_integer::Integer;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::euler::Report;
use crate::geometry::{count_elliptic, GeometryError, Weierstrass};
use crate::gf::upoly::{self, Poly};
use crate::gf::{is_prime, prime_power, Field, GfError};
use crate::logic::Tower;
use crate::padic::{unit_root, PadicError};
use crate::with_tower;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TorsionError {
    #[error("field too large: {what}")]
    TooLarge { what: String },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("singular Weierstrass equation (discriminant 0)")]
    SingularCurve,
    #[error("could not complete a basis of the {0}-torsion")]
    BasisNotFound(u64),
    #[error("the Frobenius image of a basis point is not a combination of the basis")]
    NotRepresentable,
    #[error(transparent)]
    Field(GfError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Padic(#[from] PadicError),
}

impl From<GfError> for TorsionError {
    fn from(e: GfError) -> Self {
        match e {
            GfError::TooLarge { what } => TorsionError::TooLarge { what },
            other => TorsionError::Field(other),
        }
    }
}

/// Generators of `E[ℓ^k]` inside `E(F_{q^m})`, as power-basis coordinates
/// of the tower `F_{q^m}` built on its least irreducible modulus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionBasis {
    pub curve: [i64; 5],
    pub q: u64,
    pub ell: u64,
    pub k: u32,
    pub ext_degree: u32,
    /// Two points for `ℓ ≠ p`; one or none for `ℓ = p`.
    pub generators: Vec<(Vec<u32>, Vec<u32>)>,
}

impl TorsionBasis {
    pub fn modulus(&self) -> u64 {
        self.ell.pow(self.k)
    }

    /// `r` with `E[ℓ^k] ≅ (Z/ℓ^k)^r`.
    pub fn rank(&self) -> usize {
        self.generators.len()
    }
}

/// Matrix of the `q`-power Frobenius on the basis, over `Z/ℓ^k`: column
/// `j` holds the coordinates of `φ(generator j)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrobMatrix {
    pub modulus: u64,
    pub entries: Vec<Vec<u64>>,
}

impl FrobMatrix {
    pub fn trace(&self) -> u64 {
        (0..self.entries.len()).map(|i| self.entries[i][i]).sum::<u64>() % self.modulus
    }

    pub fn det(&self) -> u64 {
        let n = self.modulus as i128;
        match self.entries.len() {
            0 => 1 % self.modulus,
            1 => self.entries[0][0],
            _ => {
                let e = |i: usize, j: usize| self.entries[i][j] as i128;
                (e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0)).rem_euclid(n) as u64
            }
        }
    }
}

fn tower(q: u64, m: u32) -> Result<Tower, TorsionError> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u32), Tower>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().unwrap().get(&(q, m)) {
        return Ok(t.clone());
    }
    let t = Tower::new(q, m)?;
    cache.lock().unwrap().insert((q, m), t.clone());
    Ok(t)
}

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x7057_1011)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Pt<E> {
    Inf,
    Aff(E, E),
}

/// Curve arithmetic over one concrete field.
struct Curve<'a, F: Field> {
    f: &'a F,
    a: [F::Elem; 5],
}

impl<'a, F: Field> Curve<'a, F> {
    fn new(f: &'a F, a: [i64; 5]) -> Self {
        Curve { f, a: a.map(|c| f.from_int(c)) }
    }

    fn neg(&self, p: &Pt<F::Elem>) -> Pt<F::Elem> {
        let f = self.f;
        let [a1, _, a3, _, _] = &self.a;
        match p {
            Pt::Inf => Pt::Inf,
            Pt::Aff(x, y) => Pt::Aff(x.clone(), f.sub(&f.neg(y), &f.add(&f.mul(a1, x), a3))),
        }
    }

    fn add(&self, p: &Pt<F::Elem>, q: &Pt<F::Elem>) -> Pt<F::Elem> {
        let f = self.f;
        let [a1, a2, a3, a4, _] = &self.a;
        let (x1, y1, x2, y2) = match (p, q) {
            (Pt::Inf, _) => return q.clone(),
            (_, Pt::Inf) => return p.clone(),
            (Pt::Aff(x1, y1), Pt::Aff(x2, y2)) => (x1, y1, x2, y2),
        };
        let lambda = if x1 == x2 {
            let denom = f.add(&f.add(&f.add(y1, y2), &f.mul(a1, x2)), a3);
            let Some(inv) = f.inv(&denom) else { return Pt::Inf };
            // tangent slope (3x² + 2a2x + a4 − a1y) / (2y + a1x + a3)
            let x2sq = f.mul(x1, x1);
            let num = f.sub(&f.add(&f.add(&f.mul(&f.from_int(3), &x2sq), &f.mul(&f.from_int(2), &f.mul(a2, x1))), a4), &f.mul(a1, y1));
            f.mul(&num, &inv)
        } else {
            f.mul(&f.sub(y2, y1), &f.inv(&f.sub(x2, x1)).expect("distinct x"))
        };
        let nu = f.sub(y1, &f.mul(&lambda, x1));
        let x3 = f.sub(&f.sub(&f.sub(&f.add(&f.mul(&lambda, &lambda), &f.mul(a1, &lambda)), a2), x1), x2);
        let y3 = f.sub(&f.sub(&f.neg(&f.mul(&f.add(&lambda, a1), &x3)), &nu), a3);
        Pt::Aff(x3, y3)
    }

    fn mul(&self, p: &Pt<F::Elem>, mut n: u64) -> Pt<F::Elem> {
        let mut acc = Pt::Inf;
        let mut base = p.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = self.add(&acc, &base);
            }
            n >>= 1;
            if n > 0 {
                base = self.add(&base, &base);
            }
        }
        acc
    }

    fn on_curve(&self, p: &Pt<F::Elem>) -> bool {
        let f = self.f;
        let [a1, a2, a3, a4, a6] = &self.a;
        match p {
            Pt::Inf => true,
            Pt::Aff(x, y) => {
                let lhs = f.add(&f.mul(y, y), &f.mul(y, &f.add(&f.mul(a1, x), a3)));
                let rhs = f.add(&f.add(&f.mul(&f.mul(x, x), &f.add(x, a2)), &f.mul(a4, x)), a6);
                lhs == rhs
            }
        }
    }

    fn frobenius(&self, p: &Pt<F::Elem>) -> Pt<F::Elem> {
        match p {
            Pt::Inf => Pt::Inf,
            Pt::Aff(x, y) => Pt::Aff(self.f.frobenius(x), self.f.frobenius(y)),
        }
    }

    /// `(b, c)` with the curve reading `y² + b·y = c` above `x`.
    fn fibre(&self, x: &F::Elem) -> (F::Elem, F::Elem) {
        let f = self.f;
        let [a1, a2, a3, a4, a6] = &self.a;
        let b = f.add(&f.mul(a1, x), a3);
        let c = f.add(&f.add(&f.mul(&f.mul(x, x), &f.add(x, a2)), &f.mul(a4, x)), a6);
        (b, c)
    }
}

/// The `x`-only division polynomials `f_n` (with `ψ_n = f_n` for odd `n`
/// and `ψ_n = ψ_2 f_n` for even `n`), and `F = ψ_2²`.
struct DivisionPolys<'a, F: Field> {
    f: &'a F,
    big_f: Poly<F::Elem>,
    memo: HashMap<u64, Poly<F::Elem>>,
}

impl<'a, F: Field> DivisionPolys<'a, F> {
    fn new(f: &'a F, a: [i64; 5]) -> Self {
        let [b2, b4, b6, b8] = Weierstrass { a }.b_invariants(f.characteristic()).map(|b| b as i64);
        let c = |v: i64| f.from_int(v);
        let big_f = upoly::from_ints(f, &[b6, 2 * b4, b2, 4]);
        let mut memo = HashMap::new();
        memo.insert(0, Vec::new());
        memo.insert(1, vec![f.one()]);
        memo.insert(2, vec![f.one()]);
        let mut f3 = vec![c(b8), c(3 * b6), c(3 * b4), c(b2), c(3)];
        upoly::trim(f, &mut f3);
        memo.insert(3, f3);
        let p = f.characteristic() as i64;
        let m = |x: i64, y: i64| ((x as i128 * y as i128).rem_euclid(p as i128)) as i64;
        let mut f4 = vec![c(m(b4, b8) - m(b6, b6)), c(m(b2, b8) - m(b4, b6)), c(10 * b8), c(10 * b6), c(5 * b4), c(b2), c(2)];
        upoly::trim(f, &mut f4);
        memo.insert(4, f4);
        DivisionPolys { f, big_f, memo }
    }

    fn get(&mut self, n: u64) -> Poly<F::Elem> {
        if let Some(p) = self.memo.get(&n) {
            return p.clone();
        }
        let f = self.f;
        let mul = |a: &[F::Elem], b: &[F::Elem]| upoly::mul(f, a, b);
        let out = if n % 2 == 1 {
            let m = (n - 1) / 2;
            let (fm2, fm, fm1, fm_1) = (self.get(m + 2), self.get(m), self.get(m + 1), self.get(m - 1));
            let left = mul(&fm2, &upoly::pow(f, &fm, 3));
            let right = mul(&fm_1, &upoly::pow(f, &fm1, 3));
            let f2 = mul(&self.big_f, &self.big_f);
            if m.is_multiple_of(2) {
                upoly::sub(f, &mul(&f2, &left), &right)
            } else {
                upoly::sub(f, &left, &mul(&f2, &right))
            }
        } else {
            let m = n / 2;
            let (fm, fm2, fm_1, fm_2, fm1) = (self.get(m), self.get(m + 2), self.get(m - 1), self.get(m - 2), self.get(m + 1));
            let inner = upoly::sub(f, &mul(&fm2, &mul(&fm_1, &fm_1)), &mul(&fm_2, &mul(&fm1, &fm1)));
            mul(&fm, &inner)
        };
        self.memo.insert(n, out.clone());
        out
    }

    /// Polynomial whose roots are the `x`-coordinates of the nonzero points
    /// killed by `n`, up to multiplicity (`n >= 2`).
    fn torsion_x(&mut self, n: u64) -> Poly<F::Elem> {
        match n {
            2 => self.big_f.clone(),
            _ if n.is_multiple_of(2) => {
                let fn_ = self.get(n);
                upoly::mul(self.f, &self.big_f, &fn_)
            }
            _ => self.get(n),
        }
    }

    /// Monic squarefree polynomial of the `x`-coordinates of points of exact order `ℓ^k`.
    fn exact_order_x(&mut self, ell: u64, k: u32) -> Poly<F::Elem> {
        let n = ell.pow(k);
        let all = upoly::radical(self.f, &self.torsion_x(n));
        if k == 1 {
            return all;
        }
        let lower = self.torsion_x(n / ell);
        let common = upoly::gcd(self.f, &all, &lower);
        upoly::monic(self.f, &upoly::divrem(self.f, &all, &common).0)
    }
}

/// `[F_q(x, y) : F_q(x)]` for `x` a root of the irreducible `g`: 1 when the
/// `y`-quadratic splits over `F_q[X]/(g)`, else 2.
fn y_degree<F: Field>(f: &F, a: [i64; 5], g: &[F::Elem]) -> u32 {
    let d = upoly::degree(g).unwrap() as u64;
    let curve = Curve::new(f, a);
    let xcls = upoly::rem(f, &upoly::x(f), g);
    let [a1, a2, a3, a4, a6] = &curve.a;
    let b = upoly::rem(f, &upoly::add(f, &upoly::scale(f, &xcls, a1), std::slice::from_ref(a3)), g);
    let x2 = upoly::mul_mod(f, &xcls, &xcls, g);
    let x3 = upoly::mul_mod(f, &x2, &xcls, g);
    let c = upoly::add(f, &upoly::add(f, &x3, &upoly::scale(f, &x2, a2)), &upoly::add(f, &upoly::scale(f, &xcls, a4), std::slice::from_ref(a6)));
    let c = upoly::rem(f, &c, g);
    let is_zero = |p: &Poly<F::Elem>| upoly::degree(p).is_none();
    if f.characteristic() == 2 {
        if is_zero(&b) {
            return 1;
        }
        // y = b·z with z² + z = c/b², solvable iff the absolute trace vanishes
        let binv = upoly::inv_mod(f, &b, g).expect("g irreducible and b nonzero");
        let u = upoly::mul_mod(f, &c, &upoly::mul_mod(f, &binv, &binv, g), g);
        let bits = (f.order().trailing_zeros() as u64) * d;
        let mut cur = u.clone();
        let mut acc = u;
        for _ in 1..bits {
            cur = upoly::mul_mod(f, &cur, &cur, g);
            acc = upoly::add(f, &acc, &cur);
        }
        return if is_zero(&acc) { 1 } else { 2 };
    }
    let disc = upoly::rem(f, &upoly::add(f, &upoly::mul(f, &b, &b), &upoly::scale(f, &c, &f.from_int(4))), g);
    if is_zero(&disc) {
        return 1;
    }
    // a square in F_{q^d} iff its norm to F_q is a square
    let q = f.order();
    let mut conj = disc.clone();
    let mut norm = disc;
    for _ in 1..d {
        conj = upoly::pow_mod(f, &conj, q, g);
        norm = upoly::mul_mod(f, &norm, &conj, g);
    }
    debug_assert!(upoly::degree(&norm) == Some(0));
    if f.quadratic_character(&norm[0]) == 1 {
        1
    } else {
        2
    }
}

struct Located {
    ext_degree: u32,
    /// Coefficients of each factor as `F_p`-coordinates over `F_q`.
    factor_coeffs: Vec<Vec<Vec<u32>>>,
}

/// Factors the exact-order polynomial over `F_q` and finds the smallest
/// extension containing every point of exact order `ℓ^k`.
fn locate(a: [i64; 5], ell: u64, k: u32, q: u64) -> Result<Located, TorsionError> {
    let base = tower(q, 1)?;
    with_tower!(&base, f => {
        let mut dp = DivisionPolys::new(f, a);
        let phi = dp.exact_order_x(ell, k);
        if upoly::degree(&phi).unwrap_or(0) == 0 {
            return Ok(Located { ext_degree: 1, factor_coeffs: Vec::new() });
        }
        let factors = upoly::factor(f, &phi, &mut rng())?;
        let mut m = 1u32;
        for (g, _) in &factors {
            let d = upoly::degree(g).unwrap() as u32;
            m = m.lcm(&(d * y_degree(f, a, g)));
        }
        Ok(Located {
            ext_degree: m,
            factor_coeffs: factors.iter().map(|(g, _)| g.iter().map(|c| f.coeffs(c)).collect()).collect(),
        })
    })
}

fn check_curve(a: [i64; 5], q: u64) -> Result<u64, TorsionError> {
    let (p, _) = prime_power(q)?;
    if (Weierstrass { a }).discriminant(p) == 0 {
        return Err(TorsionError::SingularCurve);
    }
    Ok(p)
}

/// A basis of `E[ℓ^k]` for `y² + a1xy + a3y = x³ + a2x² + a4x + a6` over
/// `F_q` (integer coefficients reduced mod `p`).
pub fn torsion_basis(a: [i64; 5], ell: u64, k: u32, q: u64) -> Result<TorsionBasis, TorsionError> {
    let p = check_curve(a, q)?;
    if !is_prime(ell) || k == 0 {
        return Err(TorsionError::PreconditionViolated(format!("{ell}^{k} is not a prime power above 1")));
    }
    let loc = locate(a, ell, k, q)?;
    let mut basis = TorsionBasis { curve: a, q, ell, k, ext_degree: loc.ext_degree, generators: Vec::new() };
    if loc.factor_coeffs.is_empty() {
        if ell == p {
            return Ok(basis);
        }
        return Err(TorsionError::BasisNotFound(ell.pow(k)));
    }
    let ext = tower(q, loc.ext_degree)?;
    let base_modulus: Vec<u32> = tower(q, 1)?.spec().modulus().to_vec();
    basis.generators = with_tower!(&ext, kf => find_generators(kf, a, ell, k, p, &loc.factor_coeffs, &base_modulus))?;
    Ok(basis)
}

fn find_generators<K: Field>(
    kf: &K,
    a: [i64; 5],
    ell: u64,
    k: u32,
    p: u64,
    factor_coeffs: &[Vec<Vec<u32>>],
    base_modulus: &[u32],
) -> Result<Vec<(Vec<u32>, Vec<u32>)>, TorsionError> {
    let m = kf.tower_degree();
    let n = ell.pow(k);
    let mut rng = rng();
    // F_q sits in K as the sort K_1; send its generator to the least root
    // of its modulus there
    let modulus_k: Poly<K::Elem> = base_modulus.iter().map(|&c| kf.from_int(c as i64)).collect();
    let rho = if base_modulus.len() == 2 {
        kf.neg(&modulus_k[0])
    } else {
        upoly::roots_in_sort(kf, &modulus_k, 1, &mut rng)?.into_iter().next().expect("F_q embeds in its extensions")
    };
    let embed = |coords: &[u32]| -> K::Elem {
        coords.iter().rev().fold(kf.zero(), |acc, &c| kf.add(&kf.mul(&acc, &rho), &kf.from_int(c as i64)))
    };
    let curve = Curve::new(kf, a);
    let point_over = |x: &K::Elem, rng: &mut ChaCha8Rng| -> Result<Pt<K::Elem>, TorsionError> {
        let (b, c) = curve.fibre(x);
        let quad = vec![kf.neg(&c), b, kf.one()];
        let ys = upoly::roots_in_sort(kf, &quad, m, rng)?;
        let y = ys.into_iter().next().ok_or(TorsionError::BasisNotFound(n))?;
        Ok(Pt::Aff(x.clone(), y))
    };
    let coords = |pt: &Pt<K::Elem>| match pt {
        Pt::Aff(x, y) => (kf.coeffs(x), kf.coeffs(y)),
        Pt::Inf => unreachable!("generators are affine"),
    };
    let roots_of = |g: &[Vec<u32>], rng: &mut ChaCha8Rng| -> Result<Vec<K::Elem>, TorsionError> {
        let gk: Poly<K::Elem> = g.iter().map(|c| embed(c)).collect();
        Ok(upoly::roots_in_sort(kf, &gk, m, rng)?)
    };

    let x0 = roots_of(&factor_coeffs[0], &mut rng)?.into_iter().next().ok_or(TorsionError::BasisNotFound(n))?;
    let first = point_over(&x0, &mut rng)?;
    debug_assert!(curve.on_curve(&first));
    if ell == p {
        return Ok(vec![coords(&first)]);
    }
    let mut excluded: BTreeSet<K::Elem> = BTreeSet::new();
    let exclude_multiples = |pt: &Pt<K::Elem>, excluded: &mut BTreeSet<K::Elem>| {
        for j in 1..n {
            if let Pt::Aff(x, _) = curve.mul(pt, j) {
                excluded.insert(x);
            }
        }
    };
    exclude_multiples(&first, &mut excluded);
    for g in factor_coeffs {
        for x in roots_of(g, &mut rng)? {
            if excluded.contains(&x) {
                continue;
            }
            let second = point_over(&x, &mut rng)?;
            if span(&curve, &first, &second, n).is_some() {
                return Ok(vec![coords(&first), coords(&second)]);
            }
            exclude_multiples(&second, &mut excluded);
        }
    }
    Err(TorsionError::BasisNotFound(n))
}

/// `iP + jQ ↦ (i, j)` if the `n²` combinations are distinct.
fn span<F: Field>(curve: &Curve<'_, F>, p: &Pt<F::Elem>, q: &Pt<F::Elem>, n: u64) -> Option<HashMap<Pt<F::Elem>, (u64, u64)>> {
    let mut table = HashMap::new();
    let mut row = Pt::Inf;
    for i in 0..n {
        let mut cur = row.clone();
        for j in 0..n {
            if table.insert(cur.clone(), (i, j)).is_some() {
                return None;
            }
            cur = curve.add(&cur, q);
        }
        row = curve.add(&row, p);
    }
    Some(table)
}

/// The Frobenius matrix on `basis` over `Z/ℓ^k`, after re-checking the
/// generators: each lies on the curve and has exact order `ℓ^k`, and for
/// two generators all `ℓ^{2k}` combinations are distinct.
pub fn frob_matrix(basis: &TorsionBasis) -> Result<FrobMatrix, TorsionError> {
    let n = basis.modulus();
    if basis.generators.is_empty() {
        return Ok(FrobMatrix { modulus: n, entries: Vec::new() });
    }
    let ext = tower(basis.q, basis.ext_degree)?;
    with_tower!(&ext, kf => {
        let curve = Curve::new(kf, basis.curve);
        let gens: Vec<Pt<_>> = basis.generators.iter().map(|(x, y)| Pt::Aff(kf.from_coeffs(x), kf.from_coeffs(y))).collect();
        for g in &gens {
            let exact = curve.mul(g, n) == Pt::Inf && curve.mul(g, n / basis.ell) != Pt::Inf;
            if !curve.on_curve(g) || !exact || curve.add(g, &curve.neg(g)) != Pt::Inf {
                return Err(TorsionError::BasisNotFound(n));
            }
        }
        let table: HashMap<Pt<_>, (u64, u64)> = match gens.as_slice() {
            [g] => {
                let mut t = HashMap::new();
                let mut cur = Pt::Inf;
                for i in 0..n {
                    t.insert(cur.clone(), (i, 0));
                    cur = curve.add(&cur, g);
                }
                t
            }
            [g, h] => span(&curve, g, h, n).ok_or(TorsionError::BasisNotFound(n))?,
            _ => unreachable!("at most two generators"),
        };
        let mut cols = Vec::new();
        for g in &gens {
            let (i, j) = *table.get(&curve.frobenius(g)).ok_or(TorsionError::NotRepresentable)?;
            cols.push(if gens.len() == 1 { vec![i] } else { vec![i, j] });
        }
        let d = cols.len();
        let entries = (0..d).map(|r| (0..d).map(|c| cols[c][r]).collect()).collect();
        Ok(FrobMatrix { modulus: n, entries })
    })
}

fn residue(x: i128, n: u64) -> u128 {
    x.rem_euclid(n as i128) as u128
}

/// Checks `|E(F_q)| ≡ 1 − Tr(φ | E[ℓ^k]) + q (mod ℓ^k)`, the trace against
/// `q + 1 − |E(F_q)|`, and `det ≡ q`.
pub fn verify_trace_count(a: [i64; 5], ell: u64, k: u32, q: u64) -> Result<Report, TorsionError> {
    let p = check_curve(a, q)?;
    if ell == p {
        return Err(TorsionError::PreconditionViolated(format!("{ell} divides q = {q}")));
    }
    let n = ell.pow(k);
    let count = count_elliptic(a, q, 1)? as i128;
    let basis = torsion_basis(a, ell, k, q)?;
    let m = frob_matrix(&basis)?;
    let (tr, det) = (m.trace() as i128, m.det() as i128);
    let q = q as i128;
    let mut report = Report::default();
    report.push(n, "count = 1 - trace + q", residue(count, n), residue(1 - tr + q, n));
    report.push(n, "trace = q + 1 - count", residue(tr, n), residue(q + 1 - count, n));
    report.push(n, "det = q", residue(det, n), residue(q, n));
    Ok(report)
}

/// The bad-characteristic version at `ℓ = p`, for `q = p^k` with `k >= s`.
/// Ordinary curves: `|E| ≡ 1 − β` for the unit root `β`, and `≡ 1 − λ` for
/// the Frobenius multiplier `λ` on a generator of `E[p^s]` when the field
/// holding it is small enough. Supersingular curves: `|E| ≡ 1 (mod p)`,
/// reading the trace on the rank-zero module as 0.
pub fn verify_trace_count_p(a: [i64; 5], p: u64, s: u32, q: u64) -> Result<Report, TorsionError> {
    let (pq, kq) = prime_power(q)?;
    if pq != p {
        return Err(TorsionError::PreconditionViolated(format!("q = {q} is not a power of {p}")));
    }
    if kq < s {
        return Err(TorsionError::PreconditionViolated(format!("q = {p}^{kq} with {kq} < s = {s}")));
    }
    check_curve(a, q)?;
    let n = p.pow(s);
    let count = count_elliptic(a, q, 1)? as i128;
    let trace = q as i128 + 1 - count;
    let mut report = Report::default();
    if trace.rem_euclid(p as i128) == 0 {
        // E[p] is trivial, so only the trace mod p is pinned down
        report.push(p, "supersingular: count = 1", residue(count, p), 1);
        return Ok(report);
    }
    let beta = unit_root(trace as i64, q, p, s)?;
    report.push(n, "ordinary: count = 1 - unit root", residue(count, n), residue(1 - beta.value as i128, n));
    match torsion_basis(a, p, s, q) {
        Ok(basis) => {
            let m = frob_matrix(&basis)?;
            let lambda = m.entries.first().map(|r| r[0] as i128).unwrap_or(0);
            report.push(n, "ordinary: rank 1", basis.rank() as u128, 1);
            report.push(n, "ordinary: count = 1 - multiplier", residue(count, n), residue(1 - lambda, n));
        }
        Err(TorsionError::TooLarge { .. }) => {}
        Err(e) => return Err(e),
    }
    Ok(report)
}
