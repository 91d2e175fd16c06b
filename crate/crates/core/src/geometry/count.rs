//! Exact point counting by enumeration, with two eliminations that replace
//! a full sum over a variable by a character sum over the others:
//!
//! * a variable `y` occurring only as `c·y²` in one equation contributes
//!   `1 + χ(-g/c)` solutions for the rest (one solution in characteristic 2);
//! * inside such a character sum, a variable `t` occurring linearly,
//!   constrained only by inequations in `t` alone, sums out exactly because
//!   `Σ_t χ(ut + w) = 0` when `u ≠ 0`.
//!
//! Variables that occur in no equation and only in inequations of their own
//! factor out as `|F| - #excluded`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rayon::prelude::*;

use crate::gf::Field;

use super::poly::MPoly;
use super::GeometryError;

/// Polynomial with coefficients in a concrete field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct FPoly<E> {
    terms: Vec<(Vec<u32>, E)>,
}

impl<E: Clone + Ord> FPoly<E> {
    pub(crate) fn from_mpoly<F: Field<Elem = E>>(f: &F, m: &MPoly) -> FPoly<E> {
        FPoly { terms: m.terms().map(|(e, c)| (e.to_vec(), f.from_int(c as i64))).collect() }
    }

    fn from_map<F: Field<Elem = E>>(f: &F, map: BTreeMap<Vec<u32>, E>) -> FPoly<E> {
        FPoly { terms: map.into_iter().filter(|(_, c)| !f.is_zero(c)).collect() }
    }

    fn mentions(&self, v: usize) -> bool {
        self.terms.iter().any(|(e, _)| e[v] > 0)
    }

    fn degree_in(&self, v: usize) -> u32 {
        self.terms.iter().map(|(e, _)| e[v]).max().unwrap_or(0)
    }

    fn vars(&self) -> BTreeSet<usize> {
        self.terms.iter().flat_map(|(e, _)| e.iter().enumerate().filter(|(_, &x)| x > 0).map(|(i, _)| i)).collect()
    }

    /// `Some(c)` if constant (`c` may be zero for the zero polynomial).
    fn as_constant<F: Field<Elem = E>>(&self, f: &F) -> Option<E> {
        match self.terms.as_slice() {
            [] => Some(f.zero()),
            [(e, c)] if e.iter().all(|&x| x == 0) => Some(c.clone()),
            _ => None,
        }
    }

    pub(crate) fn eval<F: Field<Elem = E>>(&self, f: &F, env: &[E]) -> E {
        let mut acc = f.zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &x) in e.iter().enumerate() {
                if x > 0 {
                    t = f.mul(&t, &f.pow(&env[i], x as u128));
                }
            }
            acc = f.add(&acc, &t);
        }
        acc
    }

    pub(crate) fn substitute<F: Field<Elem = E>>(&self, f: &F, v: usize, val: &E) -> FPoly<E> {
        let mut map: BTreeMap<Vec<u32>, E> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut ne = e.clone();
            let coef = if e[v] > 0 { f.mul(c, &f.pow(val, e[v] as u128)) } else { c.clone() };
            ne[v] = 0;
            let slot = map.entry(ne).or_insert_with(|| f.zero());
            *slot = f.add(slot, &coef);
        }
        FPoly::from_map(f, map)
    }

    /// Splits off the terms containing `v`: returns `(with, without)` where
    /// `with` has the `v` exponent reduced by `by`.
    fn split_on(&self, v: usize, by: u32) -> (FPoly<E>, FPoly<E>) {
        let mut with = Vec::new();
        let mut without = Vec::new();
        for (e, c) in &self.terms {
            if e[v] > 0 {
                let mut ne = e.clone();
                ne[v] -= by;
                with.push((ne, c.clone()));
            } else {
                without.push((e.clone(), c.clone()));
            }
        }
        (FPoly { terms: with }, FPoly { terms: without })
    }

    fn scale<F: Field<Elem = E>>(&self, f: &F, c: &E) -> FPoly<E> {
        FPoly { terms: self.terms.iter().map(|(e, x)| (e.clone(), f.mul(x, c))).filter(|(_, x)| !f.is_zero(x)).collect() }
    }
}

/// A system of equations and inequations over the enumeration field.
#[derive(Clone)]
pub(crate) struct System<E> {
    pub eqs: Vec<FPoly<E>>,
    pub ineqs: Vec<FPoly<E>>,
    /// Variables still to be summed over.
    pub vars: Vec<usize>,
}

pub(crate) struct Counter<'a, F: Field> {
    pub f: &'a F,
    pub elems: Arc<Vec<F::Elem>>,
    pub nvars: usize,
    pub bound: u128,
}

enum Normal<E> {
    Empty,
    Ok(System<E>),
}

impl<'a, F: Field> Counter<'a, F> {
    fn normalize(&self, mut s: System<F::Elem>) -> Normal<F::Elem> {
        let f = self.f;
        let mut eqs = Vec::new();
        for e in s.eqs.drain(..) {
            match e.as_constant(f) {
                Some(c) if f.is_zero(&c) => {}
                Some(_) => return Normal::Empty,
                None => eqs.push(e),
            }
        }
        let mut ineqs = Vec::new();
        for e in s.ineqs.drain(..) {
            match e.as_constant(f) {
                Some(c) if f.is_zero(&c) => return Normal::Empty,
                Some(_) => {}
                None => ineqs.push(e),
            }
        }
        Normal::Ok(System { eqs, ineqs, vars: s.vars })
    }

    fn field_size(&self) -> i128 {
        self.elems.len() as i128
    }

    /// Values of `t` excluded by inequations that mention only `t`, if every
    /// inequation mentioning `t` is of that kind.
    fn univariate_exclusions(&self, s: &System<F::Elem>, t: usize) -> Option<Vec<F::Elem>> {
        let own: Vec<&FPoly<F::Elem>> = s.ineqs.iter().filter(|g| g.mentions(t)).collect();
        if own.iter().any(|g| g.vars().len() > 1) {
            return None;
        }
        if own.is_empty() {
            return Some(Vec::new());
        }
        let mut env = vec![self.f.zero(); self.nvars];
        let excluded = self
            .elems
            .iter()
            .filter(|x| {
                env[t] = (*x).clone();
                own.iter().any(|g| self.f.is_zero(&g.eval(self.f, &env)))
            })
            .cloned()
            .collect();
        Some(excluded)
    }

    fn without_var(s: &System<F::Elem>, t: usize) -> System<F::Elem> {
        System {
            eqs: s.eqs.clone(),
            ineqs: s.ineqs.iter().filter(|g| !g.mentions(t)).cloned().collect(),
            vars: s.vars.iter().copied().filter(|&v| v != t).collect(),
        }
    }

    pub(crate) fn count(&self, s: System<F::Elem>) -> Result<i128, GeometryError> {
        let s = match self.normalize(s) {
            Normal::Empty => return Ok(0),
            Normal::Ok(s) => s,
        };
        if s.vars.is_empty() {
            return Ok(1);
        }
        // variables free of equations factor out
        for &t in &s.vars {
            if s.eqs.iter().any(|e| e.mentions(t)) {
                continue;
            }
            if let Some(ex) = self.univariate_exclusions(&s, t) {
                let rest = self.count(Self::without_var(&s, t))?;
                return Ok((self.field_size() - ex.len() as i128) * rest);
            }
        }
        if let Some((y, idx, g_over_c)) = self.quadratic_var(&s) {
            let mut rest = s.clone();
            rest.eqs.remove(idx);
            rest.vars.retain(|&v| v != y);
            let base = self.count(rest.clone())?;
            if self.f.characteristic() == 2 {
                return Ok(base);
            }
            let chi = self.char_sum(&g_over_c, rest)?;
            return Ok(base + chi);
        }
        self.brute(&s, &|_| 1)
    }

    /// Finds `y` appearing only as `c·y²` (constant `c`) in exactly one
    /// equation and in no inequation; returns `(y, equation index, -g/c)`.
    fn quadratic_var(&self, s: &System<F::Elem>) -> Option<(usize, usize, FPoly<F::Elem>)> {
        for &y in &s.vars {
            if s.ineqs.iter().any(|g| g.mentions(y)) {
                continue;
            }
            let holders: Vec<usize> = (0..s.eqs.len()).filter(|&i| s.eqs[i].mentions(y)).collect();
            let [idx] = holders.as_slice() else { continue };
            let e = &s.eqs[*idx];
            if e.terms.iter().any(|(ex, _)| ex[y] != 0 && ex[y] != 2) {
                continue;
            }
            let (with, without) = e.split_on(y, 2);
            let Some(c) = with.as_constant(self.f) else { continue };
            if self.f.is_zero(&c) {
                continue;
            }
            let minus_inv = self.f.neg(&self.f.inv(&c).expect("nonzero"));
            return Some((y, *idx, without.scale(self.f, &minus_inv)));
        }
        None
    }

    /// `Σ χ(G)` over the solutions of `s`.
    fn char_sum(&self, g: &FPoly<F::Elem>, s: System<F::Elem>) -> Result<i128, GeometryError> {
        let s = match self.normalize(s) {
            Normal::Empty => return Ok(0),
            Normal::Ok(s) => s,
        };
        if let Some(c) = g.as_constant(self.f) {
            let chi = self.f.quadratic_character(&c) as i128;
            return Ok(if chi == 0 { 0 } else { chi * self.count(s)? });
        }
        for &t in &s.vars {
            if s.eqs.iter().any(|e| e.mentions(t)) || g.degree_in(t) > 1 {
                continue;
            }
            let Some(excluded) = self.univariate_exclusions(&s, t) else { continue };
            let rest = Self::without_var(&s, t);
            if !g.mentions(t) {
                let inner = self.char_sum(g, rest)?;
                return Ok((self.field_size() - excluded.len() as i128) * inner);
            }
            let (u, w) = g.split_on(t, 1);
            let f = self.f;
            let free = self.field_size() - excluded.len() as i128;
            let weight = |env: &[F::Elem]| -> i128 {
                let uv = u.eval(f, env);
                let wv = w.eval(f, env);
                if f.is_zero(&uv) {
                    free * f.quadratic_character(&wv) as i128
                } else {
                    -excluded.iter().map(|r| f.quadratic_character(&f.add(&f.mul(&uv, r), &wv)) as i128).sum::<i128>()
                }
            };
            return self.brute(&rest, &weight);
        }
        let f = self.f;
        self.brute(&s, &|env| f.quadratic_character(&g.eval(f, env)) as i128)
    }

    /// `Σ weight(a)` over all assignments `a` of the system's variables that
    /// satisfy it.
    fn brute(&self, s: &System<F::Elem>, weight: &(dyn Fn(&[F::Elem]) -> i128 + Sync)) -> Result<i128, GeometryError> {
        let size = (self.elems.len() as u128)
            .checked_pow(s.vars.len() as u32)
            .filter(|&n| n <= self.bound)
            .ok_or_else(|| GeometryError::TooLarge {
                what: format!("{} variables over a field of {} elements exceed the bound {}", s.vars.len(), self.elems.len(), self.bound),
            })?;
        let _ = size;
        let env0 = vec![self.f.zero(); self.nvars];
        let Some((&first, rest)) = s.vars.split_first() else {
            return Ok(if self.satisfies(s, &env0) { weight(&env0) } else { 0 });
        };
        let total = self
            .elems
            .par_iter()
            .map(|x| {
                let mut env = env0.clone();
                env[first] = x.clone();
                self.brute_rest(s, rest, &mut env, weight)
            })
            .sum();
        Ok(total)
    }

    fn brute_rest(
        &self,
        s: &System<F::Elem>,
        rest: &[usize],
        env: &mut Vec<F::Elem>,
        weight: &(dyn Fn(&[F::Elem]) -> i128 + Sync),
    ) -> i128 {
        match rest.split_first() {
            None => {
                if self.satisfies(s, env) {
                    weight(env)
                } else {
                    0
                }
            }
            Some((&v, tail)) => {
                let mut total = 0;
                for x in self.elems.iter() {
                    env[v] = x.clone();
                    total += self.brute_rest(s, tail, env, weight);
                }
                total
            }
        }
    }

    fn satisfies(&self, s: &System<F::Elem>, env: &[F::Elem]) -> bool {
        s.eqs.iter().all(|e| self.f.is_zero(&e.eval(self.f, env))) && s.ineqs.iter().all(|e| !self.f.is_zero(&e.eval(self.f, env)))
    }
}
