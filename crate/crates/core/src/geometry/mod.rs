//! Constructible sets over `F_q` and exact point counts over `F_{q^n}`.
//!
//! ```
//! use pfchi::geometry::{count_points, legendre_surface};
//!
//! let s = legendre_surface(5).unwrap();
//! // q² - 2q + 1 + χ(-1), and -1 is a square mod 5
//! assert_eq!(count_points(&s, 1).unwrap(), 17);
//! ```

mod count;
mod elliptic;
mod poly;
mod spec;

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

pub use elliptic::{count_elliptic, weierstrass_count, Weierstrass};
pub use poly::MPoly;
pub use spec::{builtin, legendre_surface, weierstrass_projective, Ambient, ConstructibleSpec, BUILTINS};

use crate::gf::{Field, GfError};
use crate::logic::{ParseError, Tower};
use crate::with_tower;
use count::{Counter, FPoly, System};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeometryError {
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("the Frobenius is not allowed in polynomial equations")]
    Frobenius,
    #[error("projective equation {0} is not homogeneous")]
    NotHomogeneous(String),
    #[error("enumeration bound exceeded: {what}")]
    TooLarge { what: String },
    #[error("singular Weierstrass equation (discriminant 0)")]
    SingularCurve,
    #[error("unknown builtin family {0}")]
    UnknownBuiltin(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Field(GfError),
}

impl From<GfError> for GeometryError {
    fn from(e: GfError) -> Self {
        match e {
            GfError::TooLarge { what } => GeometryError::TooLarge { what },
            other => GeometryError::Field(other),
        }
    }
}

fn all_elements<F: Field>(f: &F, bound: u128) -> Result<Arc<Vec<F::Elem>>, GeometryError> {
    Ok(Arc::new(f.sort_elements(f.tower_degree(), bound)?))
}

/// `|V(F_{q^n})|`, exact.
pub fn count_points(spec: &ConstructibleSpec, n: u32) -> Result<u128, GeometryError> {
    count_points_with_bound(spec, n, crate::enumeration_bound())
}

pub fn count_points_with_bound(spec: &ConstructibleSpec, n: u32, bound: u128) -> Result<u128, GeometryError> {
    let tower = Tower::new(spec.q(), n)?;
    with_tower!(&tower, f => count_in(f, spec, bound))
}

/// `[|V(F_q)|, …, |V(F_{q^upto})|]`.
pub fn count_series(spec: &ConstructibleSpec, upto: u32) -> Result<Vec<u128>, GeometryError> {
    (1..=upto).map(|n| count_points(spec, n)).collect()
}

fn count_in<F: Field>(f: &F, spec: &ConstructibleSpec, bound: u128) -> Result<u128, GeometryError> {
    let elems = all_elements(f, bound)?;
    let nvars = spec.vars.len();
    let counter = Counter { f, elems, nvars, bound };
    let eqs: Vec<_> = spec.equations.iter().map(|m| FPoly::from_mpoly(f, m)).collect();
    let ineqs: Vec<_> = spec.inequations.iter().map(|m| FPoly::from_mpoly(f, m)).collect();
    let total = match spec.ambient {
        Ambient::Affine(m) => counter.count(System { eqs, ineqs, vars: (0..m).collect() })?,
        Ambient::Projective(m) => {
            // patch i: x_0 = … = x_{i-1} = 0, x_i = 1
            let mut total = 0;
            for i in 0..m {
                let fix = |g: &FPoly<F::Elem>| {
                    let mut g = g.clone();
                    for j in 0..i {
                        g = g.substitute(f, j, &f.zero());
                    }
                    g.substitute(f, i, &f.one())
                };
                let sys = System {
                    eqs: eqs.iter().map(fix).collect(),
                    ineqs: ineqs.iter().map(fix).collect(),
                    vars: (i + 1..m).collect(),
                };
                total += counter.count(sys)?;
            }
            total
        }
    };
    Ok(u128::try_from(total).expect("point counts are nonnegative"))
}

/// For the projection onto the variables `base`, maps each fibre size `k`
/// to the number of base points (in affine `base`-space over `F_{q^n}`)
/// whose fibre has exactly `k` points.
pub fn fiber_histogram(spec: &ConstructibleSpec, base: &[String], n: u32) -> Result<BTreeMap<u128, u128>, GeometryError> {
    if !matches!(spec.ambient, Ambient::Affine(_)) {
        return Err(GeometryError::Unsupported("fibre histograms of projective specs".into()));
    }
    let base_idx = spec.indices(base)?;
    let bound = crate::enumeration_bound();
    let tower = Tower::new(spec.q(), n)?;
    with_tower!(&tower, f => histogram_in(f, spec, &base_idx, bound))
}

fn histogram_in<F: Field>(f: &F, spec: &ConstructibleSpec, base_idx: &[usize], bound: u128) -> Result<BTreeMap<u128, u128>, GeometryError> {
    let elems = all_elements(f, bound)?;
    let nvars = spec.vars.len();
    let base_size = (elems.len() as u128)
        .checked_pow(base_idx.len() as u32)
        .filter(|&s| s <= bound)
        .ok_or_else(|| GeometryError::TooLarge { what: "base of the projection".into() })?;
    let fiber_vars: Vec<usize> = (0..nvars).filter(|i| !base_idx.contains(i)).collect();
    let eqs: Vec<_> = spec.equations.iter().map(|m| FPoly::from_mpoly(f, m)).collect();
    let ineqs: Vec<_> = spec.inequations.iter().map(|m| FPoly::from_mpoly(f, m)).collect();
    let counter = Counter { f, elems: elems.clone(), nvars, bound };
    let q = elems.len() as u128;
    let sizes: Result<Vec<u128>, GeometryError> = (0..base_size)
        .into_par_iter()
        .map(|mut idx| {
            let mut eqs = eqs.clone();
            let mut ineqs = ineqs.clone();
            for &v in base_idx {
                let x = &elems[(idx % q) as usize];
                idx /= q;
                eqs = eqs.iter().map(|g| g.substitute(f, v, x)).collect();
                ineqs = ineqs.iter().map(|g| g.substitute(f, v, x)).collect();
            }
            let c = counter.count(System { eqs, ineqs, vars: fiber_vars.clone() })?;
            Ok(c as u128)
        })
        .collect();
    let mut hist = BTreeMap::new();
    for s in sizes? {
        *hist.entry(s).or_insert(0) += 1;
    }
    Ok(hist)
}
