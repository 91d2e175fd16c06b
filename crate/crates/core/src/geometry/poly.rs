use std::collections::BTreeMap;
use std::fmt;

use crate::logic::Term;

use super::GeometryError;

/// Sparse polynomial over `F_p` in a fixed list of variables, stored as
/// exponent vector → coefficient in `[0, p)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MPoly {
    nvars: usize,
    p: u64,
    terms: BTreeMap<Vec<u32>, u64>,
}

impl MPoly {
    pub fn zero(nvars: usize, p: u64) -> MPoly {
        MPoly { nvars, p, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, p: u64, c: i64) -> MPoly {
        let mut out = MPoly::zero(nvars, p);
        out.add_term(vec![0; nvars], c.rem_euclid(p as i64) as u64);
        out
    }

    pub fn var(nvars: usize, p: u64, i: usize) -> MPoly {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut out = MPoly::zero(nvars, p);
        out.add_term(e, 1);
        out
    }

    /// Builds a polynomial from a parsed term; `σ` is rejected.
    pub fn from_term(t: &Term, vars: &[String], p: u64) -> Result<MPoly, GeometryError> {
        let n = vars.len();
        Ok(match t {
            Term::Var(v) => {
                let i = vars.iter().position(|w| w == v).ok_or_else(|| GeometryError::UnknownVariable(v.clone()))?;
                MPoly::var(n, p, i)
            }
            Term::Int(c) => MPoly::constant(n, p, *c),
            Term::Add(a, b) => MPoly::from_term(a, vars, p)?.add(&MPoly::from_term(b, vars, p)?),
            Term::Sub(a, b) => MPoly::from_term(a, vars, p)?.sub(&MPoly::from_term(b, vars, p)?),
            Term::Mul(a, b) => MPoly::from_term(a, vars, p)?.mul(&MPoly::from_term(b, vars, p)?),
            Term::Neg(a) => MPoly::from_term(a, vars, p)?.neg(),
            Term::Pow(a, e) => MPoly::from_term(a, vars, p)?.pow(*e),
            Term::Sigma(..) | Term::SigmaInv(..) => return Err(GeometryError::Frobenius),
        })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], u64)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, e: Vec<u32>, c: u64) {
        let c = c % self.p;
        if c == 0 {
            return;
        }
        let entry = self.terms.entry(e);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = (*o.get() + c) % self.p;
                if s == 0 {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }

    pub fn neg(&self) -> MPoly {
        let mut out = MPoly::zero(self.nvars, self.p);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), self.p - c);
        }
        out
    }

    pub fn sub(&self, other: &MPoly) -> MPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &MPoly) -> MPoly {
        let mut out = MPoly::zero(self.nvars, self.p);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, (*ca as u128 * *cb as u128 % self.p as u128) as u64);
            }
        }
        out
    }

    pub fn pow(&self, mut e: u32) -> MPoly {
        let mut acc = MPoly::constant(self.nvars, self.p, 1);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|e| e.iter().sum::<u32>());
        match degs.next() {
            None => true,
            Some(d) => degs.all(|x| x == d),
        }
    }

    pub fn mentions(&self, i: usize) -> bool {
        self.terms.keys().any(|e| e[i] > 0)
    }

    /// Re-embeds into a larger variable list: variable `i` becomes `map[i]`.
    pub fn remap(&self, nvars: usize, map: &[usize]) -> MPoly {
        let mut out = MPoly::zero(nvars, self.p);
        for (e, c) in &self.terms {
            let mut ne = vec![0; nvars];
            for (i, &x) in e.iter().enumerate() {
                ne[map[i]] += x;
            }
            out.add_term(ne, *c);
        }
        out
    }

    pub fn render(&self, vars: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (e, c) in self.terms.iter().rev() {
            let mut factors = Vec::new();
            if *c != 1 || e.iter().all(|&x| x == 0) {
                factors.push(c.to_string());
            }
            for (i, &x) in e.iter().enumerate() {
                match x {
                    0 => {}
                    1 => factors.push(vars[i].clone()),
                    _ => factors.push(format!("{}^{}", vars[i], x)),
                }
            }
            parts.push(factors.join("*"));
        }
        parts.join(" + ")
    }
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (1..=self.nvars).map(|i| format!("x{i}")).collect();
        write!(f, "{}", self.render(&names))
    }
}
