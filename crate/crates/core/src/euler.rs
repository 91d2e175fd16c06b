//! Finite coherent families of mod-`n` Euler characteristic values, and
//! checks of the Euler characteristic axioms on concrete sets.
//!
//! ```
//! use pfchi::euler::chi_hat_spec;
//! use pfchi::geometry::ConstructibleSpec;
//!
//! let s = ConstructibleSpec::affine(&["x"], 7).unwrap().equation("x^2 - 1").unwrap();
//! let v = chi_hat_spec(&s, &[2, 3, 6]).unwrap();
//! assert_eq!((v.get(2), v.get(3), v.get(6)), (Some(0), Some(2), Some(2)));
//! ```

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::geometry::{count_points, fiber_histogram, Ambient, ConstructibleSpec, GeometryError};
use crate::logic::{count_solutions, evaluate_sentence, EvalError, Formula, Quantifier, Term};
use crate::padic::{crt, factor_small, Residue};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EulerError {
    #[error("value {value} mod {modulus} contradicts {other} mod {other_modulus}")]
    Incoherent { modulus: u64, value: u64, other_modulus: u64, other: u64 },
    #[error("modulus must be at least 1")]
    ZeroModulus,
    #[error("the fibre-size system has no unique integral solution")]
    SingularSystem,
    #[error("class of fibre size {size}: solved {solved}, counted {counted}")]
    ClassMismatch { size: u128, solved: String, counted: u128 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Residues at finitely many moduli, coherent under divisibility.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EulerValue {
    entries: BTreeMap<u64, u64>,
}

impl EulerValue {
    pub fn new() -> EulerValue {
        EulerValue::default()
    }

    /// Reduces an exact count at every modulus.
    pub fn from_count(count: u128, moduli: &[u64]) -> Result<EulerValue, EulerError> {
        let mut v = EulerValue::new();
        for &n in moduli {
            if n == 0 {
                return Err(EulerError::ZeroModulus);
            }
            v.insert(n, (count % n as u128) as u64)?;
        }
        Ok(v)
    }

    /// Adds an entry, rejecting it if it disagrees with an entry at a
    /// divisor or multiple.
    pub fn insert(&mut self, modulus: u64, value: u64) -> Result<(), EulerError> {
        if modulus == 0 {
            return Err(EulerError::ZeroModulus);
        }
        let value = value % modulus;
        for (&m, &v) in &self.entries {
            let ok = if modulus.is_multiple_of(m) {
                value % m == v
            } else if m % modulus == 0 {
                v % modulus == value
            } else {
                true
            };
            if !ok {
                return Err(EulerError::Incoherent { modulus, value, other_modulus: m, other: v });
            }
        }
        self.entries.insert(modulus, value);
        Ok(())
    }

    pub fn get(&self, modulus: u64) -> Option<u64> {
        self.entries.get(&modulus).copied()
    }

    pub fn entries(&self) -> &BTreeMap<u64, u64> {
        &self.entries
    }

    pub fn is_coherent(&self) -> bool {
        self.entries.iter().all(|(&n, &v)| self.entries.iter().all(|(&m, &w)| n % m != 0 || v % m == w))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }
}

fn checked_value(count: u128, moduli: &[u64]) -> Result<EulerValue, EulerError> {
    let v = EulerValue::from_count(count, moduli)?;
    // composite entries must agree with the CRT of their prime-power parts
    for &n in moduli {
        let parts: Vec<Residue> = factor_small(n)
            .into_iter()
            .map(|(l, k)| {
                let m = l.pow(k);
                Residue { modulus: m, value: (count % m as u128) as u64 }
            })
            .collect();
        let joined = crt(&parts);
        if joined.value != v.get(n).unwrap() {
            return Err(EulerError::Incoherent { modulus: n, value: v.get(n).unwrap(), other_modulus: n, other: joined.value });
        }
    }
    Ok(v)
}

/// Euler values of `V(F_q)` at each modulus.
pub fn chi_hat_spec(spec: &ConstructibleSpec, moduli: &[u64]) -> Result<EulerValue, EulerError> {
    checked_value(count_points(spec, 1)?, moduli)
}

/// Euler values of the set defined by `f` with free variables `free`
/// (name and sort) over `Fr^q`.
pub fn chi_hat_formula(f: &Formula, free: &[(String, u32)], q: u64, moduli: &[u64]) -> Result<EulerValue, EulerError> {
    checked_value(count_solutions(f, free, q)?, moduli)
}

/// One line of an axiom report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub modulus: u64,
    pub check: String,
    pub lhs: u64,
    pub rhs: u64,
    pub pass: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Report {
    pub records: Vec<CheckRecord>,
}

impl Report {
    pub fn push(&mut self, modulus: u64, check: impl Into<String>, lhs: u128, rhs: u128) {
        let (l, r) = ((lhs % modulus as u128) as u64, (rhs % modulus as u128) as u64);
        self.records.push(CheckRecord { modulus, check: check.into(), lhs: l, rhs: r, pass: l == r });
    }

    pub fn record(&mut self, modulus: u64, check: impl Into<String>, pass: bool) {
        self.records.push(CheckRecord { modulus, check: check.into(), lhs: pass as u64, rhs: 1, pass });
    }

    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.pass)
    }

    pub fn extend(&mut self, other: Report) {
        self.records.extend(other.records);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }
}

/// A projection to check against the strong axiom: the set at `set` in the
/// corpus mapped onto the variables `base`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Projection {
    pub set: usize,
    pub base: Vec<String>,
}

/// Checks, at each modulus:
///
/// * additivity for the split of every set along its first coordinate,
/// * multiplicativity for every ordered pair of affine sets,
/// * the strong axiom `χ(X) = r·χ(Y)` for projections with constant fibre
///   size `r` over the image `Y`,
/// * uniqueness of the parity class, through the formula evaluator, for
///   sets in one variable,
/// * coherence of the resulting values across the moduli.
pub fn verify_axioms(sets: &[ConstructibleSpec], moduli: &[u64], projections: &[Projection]) -> Result<Report, EulerError> {
    let mut report = Report::default();
    let counts: Vec<u128> = sets.iter().map(|s| count_points(s, 1)).collect::<Result<_, _>>()?;
    for (s, &c) in sets.iter().zip(&counts) {
        let value = chi_hat_spec(s, moduli)?;
        for &n in moduli {
            report.record(n, "coherence", value.is_coherent());
        }
        if s.vars.is_empty() {
            continue;
        }
        let cut = s.poly(&s.vars[0])?;
        let (zero, nonzero) = s.split(&cut)?;
        let (a, b) = (count_points(&zero, 1)?, count_points(&nonzero, 1)?);
        for &n in moduli {
            report.push(n, "additivity", c, a + b);
        }
        if let (Ambient::Affine(1), Some(f)) = (s.ambient, spec_formula(s)) {
            let free = [(s.vars[0].clone(), 1)];
            for &n in moduli {
                let mut hits = 0;
                for k in 0..n {
                    let sentence = Formula::quant(Quantifier::Parity { n, k }, &s.vars[0], 1, f.clone());
                    if evaluate_sentence(&sentence, s.q())? {
                        hits += 1;
                    }
                }
                report.record(n, "unique parity class", hits == 1);
                report.push(n, "evaluator count", count_solutions(&f, &free, s.q())?, c);
            }
        }
    }
    for (i, x) in sets.iter().enumerate() {
        for (j, y) in sets.iter().enumerate() {
            if x.q() != y.q() || !matches!(x.ambient, Ambient::Affine(_)) || !matches!(y.ambient, Ambient::Affine(_)) {
                continue;
            }
            let prod = count_points(&x.product(y)?, 1)?;
            for &n in moduli {
                report.push(n, "multiplicativity", prod, counts[i] * counts[j]);
            }
        }
    }
    for pr in projections {
        let s = &sets[pr.set];
        let hist = fiber_histogram(s, &pr.base, 1)?;
        let sizes: Vec<u128> = hist.keys().copied().filter(|&k| k > 0).collect();
        let [r] = sizes.as_slice() else {
            // not a constant-fibre map; the strong axiom says nothing
            continue;
        };
        let image = hist[r];
        for &n in moduli {
            report.push(n, "strong fibration", counts[pr.set], r * image);
        }
    }
    Ok(report)
}

/// The conjunction of a one-variable affine spec as a formula.
fn spec_formula(s: &ConstructibleSpec) -> Option<Formula> {
    let term = |p: &crate::geometry::MPoly| crate::logic::parse_term(&p.render(&s.vars)).ok();
    let zero = Term::Int(0);
    let mut parts = Vec::new();
    for e in &s.equations {
        parts.push(Formula::eq(term(e)?, zero.clone()));
    }
    for e in &s.inequations {
        parts.push(Formula::not(Formula::eq(term(e)?, zero.clone())));
    }
    let v = Term::var(&s.vars[0]);
    Some(parts.into_iter().reduce(Formula::and).unwrap_or_else(|| Formula::eq(v.clone(), v)))
}

/// Solves `Σ_k x_k · k^r = c_r` for the class sizes `x_k`, given the fibre
/// sizes `k` that occur and the counts `c_r` of the `r`-fold fibre powers.
pub fn vandermonde_solve(sizes: &[u128], fiber_power_counts: &[(u32, u128)]) -> Result<BTreeMap<u128, u128>, EulerError> {
    let m = sizes.len();
    if m == 0 {
        return if fiber_power_counts.iter().all(|&(_, c)| c == 0) { Ok(BTreeMap::new()) } else { Err(EulerError::SingularSystem) };
    }
    if fiber_power_counts.len() < m {
        return Err(EulerError::SingularSystem);
    }
    let rat = |x: u128| BigRational::from_integer(BigInt::from(x));
    let mut rows: Vec<Vec<BigRational>> = fiber_power_counts
        .iter()
        .map(|&(r, c)| {
            let mut row: Vec<BigRational> = sizes.iter().map(|&k| BigRational::from_integer(BigInt::from(k).pow(r))).collect();
            row.push(rat(c));
            row
        })
        .collect();
    // Gauss–Jordan over Q
    let mut pivot_row = 0;
    for col in 0..m {
        let Some(pr) = (pivot_row..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            return Err(EulerError::SingularSystem);
        };
        rows.swap(pivot_row, pr);
        let inv = BigRational::one() / &rows[pivot_row][col];
        for x in rows[pivot_row].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot = rows[pivot_row].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != pivot_row && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, p) in row.iter_mut().zip(&pivot) {
                    *x -= &f * p;
                }
            }
        }
        pivot_row += 1;
    }
    // surplus equations must be consistent
    if rows[m..].iter().any(|row| !row[m].is_zero()) {
        return Err(EulerError::SingularSystem);
    }
    let mut out = BTreeMap::new();
    for (i, &k) in sizes.iter().enumerate() {
        let x = &rows[i][m];
        if !x.is_integer() || x.is_negative() {
            return Err(EulerError::SingularSystem);
        }
        out.insert(k, x.to_integer().to_u128().ok_or(EulerError::SingularSystem)?);
    }
    Ok(out)
}

/// Class sizes of a projection recovered from fibre-power counts and
/// checked against the directly counted histogram.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    /// Fibre size → number of base points with that fibre size.
    pub classes: BTreeMap<u128, u128>,
    /// `Σ x_k`, the size of the image.
    pub image: u128,
    /// `Σ k·x_k`, the size of the total space.
    pub total: u128,
}

/// Decomposes the projection of `spec` onto `base` by fibre size using the
/// fibre powers `r = 1..=max fibre size`, over `F_q`.
pub fn vandermonde_decompose(spec: &ConstructibleSpec, base: &[String]) -> Result<Decomposition, EulerError> {
    let hist = fiber_histogram(spec, base, 1)?;
    let sizes: Vec<u128> = hist.keys().copied().filter(|&k| k > 0).collect();
    let powers = (1..=sizes.len().max(1) as u32)
        .map(|r| Ok((r, count_points(&spec.fiber_power(base, r as usize)?, 1)?)))
        .collect::<Result<Vec<_>, EulerError>>()?;
    let classes = vandermonde_solve(&sizes, &powers)?;
    for (&k, &x) in &classes {
        if hist.get(&k) != Some(&x) {
            return Err(EulerError::ClassMismatch { size: k, solved: x.to_string(), counted: hist.get(&k).copied().unwrap_or(0) });
        }
    }
    let image = classes.values().sum();
    let total = classes.iter().map(|(k, x)| k * x).sum();
    Ok(Decomposition { classes, image, total })
}

/// A seeded corpus of small definable sets over `F_q` together with the
/// projections onto `x` worth testing against the strong axiom.
///
/// Sets come in a few shapes: zero sets in one variable, graphs and their
/// complements, double covers, and cylinders over a one-variable set, so
/// that both constant-fibre and non-constant-fibre maps occur.
pub fn corpus(q: u64, size: usize, seed: u64) -> Result<(Vec<ConstructibleSpec>, Vec<Projection>), EulerError> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ q);
    let poly = |var: &str, max_deg: u32, rng: &mut rand_chacha::ChaCha8Rng| {
        let deg = rng.gen_range(1..=max_deg);
        let mut terms = vec![format!("{var}^{deg}")];
        for e in (0..deg).rev() {
            let c: i64 = rng.gen_range(-2..=2);
            if c != 0 {
                terms.push(if e == 0 { format!("({c})") } else { format!("({c})*{var}^{e}") });
            }
        }
        terms.join(" + ")
    };
    let (mut sets, mut projections) = (Vec::new(), Vec::new());
    let x = vec!["x".to_string()];
    for i in 0..size {
        let g = poly("x", 3, &mut rng);
        let h = poly("x", 2, &mut rng);
        let s = match i % 6 {
            0 => ConstructibleSpec::affine(&["x"], q)?.equation(&g)?,
            1 => ConstructibleSpec::affine(&["x"], q)?.equation(&g)?.inequation(&h)?,
            2 => ConstructibleSpec::affine(&["x", "y"], q)?.equation(&format!("y - ({g})"))?.inequation(&h)?,
            3 => ConstructibleSpec::affine(&["x", "y"], q)?.inequation(&format!("y - ({g})"))?,
            4 => ConstructibleSpec::affine(&["x", "y"], q)?.equation(&format!("y^2 - ({g})"))?,
            _ => ConstructibleSpec::affine(&["x", "y", "z"], q)?.equation(&h)?.equation("y^2 - 1")?,
        };
        if i % 6 >= 2 {
            projections.push(Projection { set: sets.len(), base: x.clone() });
        }
        sets.push(s);
    }
    Ok((sets, projections))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::builtin;
    use crate::logic::parse;
    use proptest::prelude::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn chi_hat_examples() {
        let point = ConstructibleSpec::affine(&["x"], 5).unwrap().equation("x").unwrap();
        assert!(chi_hat_spec(&point, &[2, 3, 4, 6, 9]).unwrap().entries().values().all(|&v| v == 1));
        let empty = ConstructibleSpec::affine(&["x"], 5).unwrap().equation("1").unwrap();
        assert!(chi_hat_spec(&empty, &[2, 3, 4]).unwrap().entries().values().all(|&v| v == 0));
        let f = parse("x*x = 1").unwrap();
        let v = chi_hat_formula(&f, &[("x".into(), 1)], 7, &[2, 3, 6]).unwrap();
        assert_eq!(v.to_json(), r#"{"2":0,"3":2,"6":2}"#);
    }

    #[test]
    fn coherence_is_enforced() {
        let mut v = EulerValue::new();
        v.insert(6, 5).unwrap();
        assert!(v.insert(2, 1).is_ok());
        assert!(matches!(v.insert(3, 1), Err(EulerError::Incoherent { .. })));
        assert!(matches!(v.insert(12, 4), Err(EulerError::Incoherent { .. })));
        assert!(v.insert(12, 11).is_ok());
        assert!(v.is_coherent());
    }

    #[test]
    fn axiom_examples() {
        let gm = builtin("gm", 5).unwrap();
        let line = builtin("affine-line", 5).unwrap();
        let report = verify_axioms(&[gm, line], &[4], &[]).unwrap();
        assert!(report.passed());
        let prod = report.records.iter().find(|r| r.check == "multiplicativity").unwrap();
        assert_eq!((prod.lhs, prod.rhs), (0, 0));

        let cover = ConstructibleSpec::affine(&["x", "y"], 7).unwrap().equation("y^2 - 2").unwrap();
        let report = verify_axioms(&[cover], &[2, 3, 4, 5, 6, 9], &[Projection { set: 0, base: names(&["x"]) }]).unwrap();
        assert!(report.passed());
        assert!(report.records.iter().any(|r| r.check == "strong fibration"));

        assert!(verify_axioms(&[], &[2, 3], &[]).unwrap().records.is_empty());
    }

    #[test]
    fn corpus_passes_axioms() {
        let (sets, projections) = corpus(5, 12, 1).unwrap();
        assert_eq!(sets.len(), 12);
        let report = verify_axioms(&sets, &[2, 3, 4], &projections).unwrap();
        assert!(report.passed(), "{:?}", report.failures().collect::<Vec<_>>());
        assert!(report.records.iter().any(|r| r.check == "strong fibration"));
        assert_eq!(corpus(5, 12, 1).unwrap().0, sets);
    }

    #[test]
    fn parity_classes_through_the_evaluator() {
        let s = ConstructibleSpec::affine(&["x"], 7).unwrap().equation("x^3 - 1").unwrap().inequation("x - 2").unwrap();
        let report = verify_axioms(&[s], &[2, 3, 4, 5, 6, 9], &[]).unwrap();
        assert!(report.records.iter().any(|r| r.check == "unique parity class"));
        assert!(report.passed(), "{:?}", report.failures().collect::<Vec<_>>());
    }

    #[test]
    fn vandermonde_examples() {
        // squaring on F_7^*: three squares, each with two roots
        let sq = ConstructibleSpec::affine(&["x", "y"], 7).unwrap().equation("y^2 - x").unwrap().inequation("y").unwrap();
        let d = vandermonde_decompose(&sq, &names(&["x"])).unwrap();
        assert_eq!(d.classes, BTreeMap::from([(2, 3)]));
        assert_eq!(d.image, 3);
        let id = ConstructibleSpec::affine(&["x", "y"], 5).unwrap().equation("y - x").unwrap();
        assert_eq!(vandermonde_decompose(&id, &names(&["x"])).unwrap().classes, BTreeMap::from([(1, 5)]));
        let root = ConstructibleSpec::affine(&["x", "y"], 5).unwrap().equation("y^2 - x").unwrap();
        assert_eq!(vandermonde_solve(&[1, 2], &[(1, 5), (2, 9)]).unwrap(), BTreeMap::from([(1, 1), (2, 2)]));
        assert_eq!(vandermonde_decompose(&root, &names(&["x"])).unwrap().classes, BTreeMap::from([(1, 1), (2, 2)]));
        assert_eq!(vandermonde_solve(&[1, 2], &[(1, 5), (2, 8)]), Err(EulerError::SingularSystem));
    }

    #[test]
    fn equal_sets_get_equal_values() {
        let a = ConstructibleSpec::affine(&["x", "y"], 3).unwrap().equation("x^2").unwrap();
        let b = ConstructibleSpec::affine(&["x", "y"], 3).unwrap().equation("x").unwrap();
        for n in 1..=3 {
            assert_eq!(count_points(&a, n).unwrap(), count_points(&b, n).unwrap());
        }
        assert_eq!(chi_hat_spec(&a, &[2, 3, 4, 5, 6, 9]).unwrap(), chi_hat_spec(&b, &[2, 3, 4, 5, 6, 9]).unwrap());
    }

    proptest! {
        #[test]
        fn values_are_coherent(count in 0u128..1_000_000) {
            let v = checked_value(count, &[2, 3, 4, 5, 6, 9, 12, 36]).unwrap();
            prop_assert!(v.is_coherent());
            prop_assert_eq!(v.get(36).unwrap() % 4, v.get(4).unwrap());
        }

        #[test]
        fn vandermonde_recovers_classes(classes in prop::collection::btree_map(1u128..6, 0u128..50, 1..4)) {
            let sizes: Vec<u128> = classes.keys().copied().collect();
            let powers: Vec<(u32, u128)> = (1..=sizes.len() as u32)
                .map(|r| (r, classes.iter().map(|(k, x)| k.pow(r) * x).sum()))
                .collect();
            prop_assert_eq!(vandermonde_solve(&sizes, &powers).unwrap(), classes);
        }
    }
}
