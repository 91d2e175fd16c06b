use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::ast::{Formula, Quantifier, Term};
use super::EvalError;
use crate::gf::upoly::{self, Poly};
use crate::gf::{make_tower, prime_power, Field, FieldElement, FieldSpec, GfError, TableField, TABLE_LIMIT};

/// A concrete field `F_{q^N}`: logarithm tables when small, power basis otherwise.
#[derive(Debug, Clone)]
pub enum Tower {
    Table(TableField),
    Spec(FieldSpec),
}

impl Tower {
    pub fn new(q: u64, n: u32) -> Result<Tower, GfError> {
        let (p, k) = prime_power(q)?;
        let spec = make_tower(p, k, n)?;
        Ok(Tower::from_spec(spec))
    }

    pub fn from_spec(spec: FieldSpec) -> Tower {
        if spec.order() <= TABLE_LIMIT {
            Tower::Table(TableField::new(&spec).expect("order checked against the table limit"))
        } else {
            Tower::Spec(spec)
        }
    }

    pub fn spec(&self) -> &FieldSpec {
        match self {
            Tower::Table(t) => t.spec(),
            Tower::Spec(s) => s,
        }
    }
}

/// Runs `$body` with `$f` bound to the concrete field inside a [`Tower`].
#[macro_export]
#[doc(hidden)]
macro_rules! with_tower {
    ($tower:expr, $f:ident => $body:expr) => {
        match $tower {
            $crate::logic::Tower::Table($f) => $body,
            $crate::logic::Tower::Spec($f) => $body,
        }
    };
}

/// The Frobenius periodic field `Fr^q` truncated to the sorts dividing `N`.
#[derive(Debug, Clone)]
pub struct Model {
    q: u64,
    n: u32,
    tower: Tower,
    bound: u128,
    guards: bool,
}

fn lcm(a: u32, b: u32) -> u32 {
    a / num_integer::gcd(a, b) * b
}

impl Model {
    pub fn new(q: u64, n: u32) -> Result<Model, EvalError> {
        Ok(Model { q, n, tower: Tower::new(q, n)?, bound: crate::enumeration_bound(), guards: true })
    }

    /// The model whose tower degree is the lcm of every sort in `f` and in `free`.
    pub fn for_formula(f: &Formula, q: u64, free: &[(String, u32)]) -> Result<Model, EvalError> {
        let mut n = 1;
        for m in f.sorts().into_iter().chain(free.iter().map(|(_, m)| *m)) {
            if m == 0 {
                return Err(GfError::ZeroDegree.into());
            }
            n = lcm(n, m);
        }
        Model::new(q, n)
    }

    pub fn with_bound(mut self, bound: u128) -> Model {
        self.bound = bound.max(1);
        self
    }

    /// Disables the root-finding shortcut for equation-guarded quantifiers,
    /// forcing plain enumeration.
    pub fn without_guards(mut self) -> Model {
        self.guards = false;
        self
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn tower_degree(&self) -> u32 {
        self.n
    }

    pub fn tower(&self) -> &Tower {
        &self.tower
    }

    pub fn spec(&self) -> &FieldSpec {
        self.tower.spec()
    }

    /// Truth value of `f` under `assignment`, whose values are elements of [`Model::spec`].
    pub fn evaluate(&self, f: &Formula, assignment: &BTreeMap<String, FieldElement>) -> Result<bool, EvalError> {
        let names: Vec<String> = assignment.keys().cloned().collect();
        let compiled = compile(f, &names, self.n)?;
        with_tower!(&self.tower, field => {
            let env: Vec<_> = assignment.values().map(|v| to_elem(field, v)).collect();
            let ctx = Ctx::new(field, self, &compiled, &[]);
            ctx.eval(&compiled, &mut env.clone())
        })
    }

    /// `|{ā : Fr^q ⊨ f(ā)}|` with `ā` ranging over the given sorts.
    pub fn count_solutions(&self, f: &Formula, free: &[(String, u32)]) -> Result<u128, EvalError> {
        let names: Vec<String> = free.iter().map(|(v, _)| v.clone()).collect();
        let compiled = compile(f, &names, self.n)?;
        let mut size: u128 = 1;
        for (_, m) in free {
            crate::gf::check_sort(*m, self.n)?;
            size = (self.q as u128)
                .checked_pow(*m)
                .and_then(|s| s.checked_mul(size))
                .filter(|&s| s <= self.bound)
                .ok_or_else(|| EvalError::TooLarge { what: format!("{} free tuples exceed the bound {}", self.q, self.bound) })?;
        }
        let sorts: Vec<u32> = free.iter().map(|(_, m)| *m).collect();
        with_tower!(&self.tower, field => {
            let ctx = Ctx::new(field, self, &compiled, &sorts);
            ctx.count_tuples(&compiled, &sorts)
        })
    }
}

fn to_elem<F: Field>(f: &F, x: &FieldElement) -> F::Elem {
    f.from_coeffs(x.coeffs())
}

/// Evaluates a sentence over `Fr^q`.
pub fn evaluate_sentence(f: &Formula, q: u64) -> Result<bool, EvalError> {
    if let Some(v) = f.free_vars().into_iter().next() {
        return Err(EvalError::UnboundVariable(v));
    }
    Model::for_formula(f, q, &[])?.evaluate(f, &BTreeMap::new())
}

pub fn count_solutions(f: &Formula, free: &[(String, u32)], q: u64) -> Result<u128, EvalError> {
    Model::for_formula(f, q, free)?.count_solutions(f, free)
}

pub fn count_mod(f: &Formula, free: &[(String, u32)], q: u64, n: u64) -> Result<u64, EvalError> {
    if n == 0 {
        return Err(EvalError::BadModulus(n));
    }
    Ok((count_solutions(f, free, q)? % n as u128) as u64)
}

// Compiled form: variables resolved to stack slots, σ powers reduced mod N.

#[derive(Debug, Clone)]
enum CT {
    Var(usize),
    Int(i64),
    Add(Box<CT>, Box<CT>),
    Sub(Box<CT>, Box<CT>),
    Mul(Box<CT>, Box<CT>),
    Neg(Box<CT>),
    Pow(Box<CT>, u32),
    Sigma(Box<CT>, u64),
}

#[derive(Debug, Clone)]
enum CF {
    Eq(CT, CT),
    Not(Box<CF>),
    And(Box<CF>, Box<CF>),
    Or(Box<CF>, Box<CF>),
    Implies(Box<CF>, Box<CF>),
    Iff(Box<CF>, Box<CF>),
    Quant { q: Quantifier, sort: u32, body: Box<CF> },
}

fn compile(f: &Formula, free: &[String], n: u32) -> Result<CF, EvalError> {
    let mut scope: Vec<String> = free.to_vec();
    compile_f(f, &mut scope, n)
}

fn compile_f(f: &Formula, scope: &mut Vec<String>, n: u32) -> Result<CF, EvalError> {
    let b = |x: CF| Box::new(x);
    Ok(match f {
        Formula::Eq(a, c) => CF::Eq(compile_t(a, scope, n)?, compile_t(c, scope, n)?),
        Formula::Not(a) => CF::Not(b(compile_f(a, scope, n)?)),
        Formula::And(x, y) => CF::And(b(compile_f(x, scope, n)?), b(compile_f(y, scope, n)?)),
        Formula::Or(x, y) => CF::Or(b(compile_f(x, scope, n)?), b(compile_f(y, scope, n)?)),
        Formula::Implies(x, y) => CF::Implies(b(compile_f(x, scope, n)?), b(compile_f(y, scope, n)?)),
        Formula::Iff(x, y) => CF::Iff(b(compile_f(x, scope, n)?), b(compile_f(y, scope, n)?)),
        Formula::Quant { q, var, sort, body } => {
            crate::gf::check_sort(*sort, n)?;
            scope.push(var.clone());
            let body = compile_f(body, scope, n);
            scope.pop();
            CF::Quant { q: *q, sort: *sort, body: b(body?) }
        }
    })
}

fn compile_t(t: &Term, scope: &[String], n: u32) -> Result<CT, EvalError> {
    let b = |x: CT| Box::new(x);
    let n = n as u64;
    Ok(match t {
        Term::Var(v) => {
            let slot = scope.iter().rposition(|s| s == v).ok_or_else(|| EvalError::UnboundVariable(v.clone()))?;
            CT::Var(slot)
        }
        Term::Int(i) => CT::Int(*i),
        Term::Add(x, y) => CT::Add(b(compile_t(x, scope, n as u32)?), b(compile_t(y, scope, n as u32)?)),
        Term::Sub(x, y) => CT::Sub(b(compile_t(x, scope, n as u32)?), b(compile_t(y, scope, n as u32)?)),
        Term::Mul(x, y) => CT::Mul(b(compile_t(x, scope, n as u32)?), b(compile_t(y, scope, n as u32)?)),
        Term::Neg(x) => CT::Neg(b(compile_t(x, scope, n as u32)?)),
        Term::Pow(x, e) => CT::Pow(b(compile_t(x, scope, n as u32)?), *e),
        Term::Sigma(x, j) => CT::Sigma(b(compile_t(x, scope, n as u32)?), *j as u64 % n),
        Term::SigmaInv(x, j) => CT::Sigma(b(compile_t(x, scope, n as u32)?), (n - *j as u64 % n) % n),
    })
}

fn mentions(t: &CT, slot: usize) -> bool {
    match t {
        CT::Var(s) => *s == slot,
        CT::Int(_) => false,
        CT::Add(a, b) | CT::Sub(a, b) | CT::Mul(a, b) => mentions(a, slot) || mentions(b, slot),
        CT::Neg(a) | CT::Pow(a, _) | CT::Sigma(a, _) => mentions(a, slot),
    }
}

/// Largest polynomial degree the guarded-quantifier shortcut will build.
const GUARD_DEGREE_LIMIT: usize = 4096;

/// Below this sort size plain enumeration is cheaper than root finding.
const GUARD_MIN_SORT: u128 = 256;

const PARALLEL_MIN: usize = 4096;

type SortCache<E> = HashMap<u32, OnceLock<Result<Arc<Vec<E>>, GfError>>>;

struct Ctx<'a, F: Field> {
    f: &'a F,
    q: u128,
    bound: u128,
    guards: bool,
    sorts: SortCache<F::Elem>,
}

fn binder_sorts(g: &CF, out: &mut Vec<u32>) {
    match g {
        CF::Eq(..) => {}
        CF::Not(a) => binder_sorts(a, out),
        CF::And(a, b) | CF::Or(a, b) | CF::Implies(a, b) | CF::Iff(a, b) => {
            binder_sorts(a, out);
            binder_sorts(b, out);
        }
        CF::Quant { sort, body, .. } => {
            out.push(*sort);
            binder_sorts(body, out);
        }
    }
}

impl<'a, F: Field> Ctx<'a, F> {
    fn new(f: &'a F, model: &Model, g: &CF, extra: &[u32]) -> Self {
        let mut all = extra.to_vec();
        binder_sorts(g, &mut all);
        let sorts = all.into_iter().map(|m| (m, OnceLock::new())).collect();
        Ctx { f, q: model.q as u128, bound: model.bound, guards: model.guards, sorts }
    }

    fn sort(&self, m: u32) -> Result<Arc<Vec<F::Elem>>, EvalError> {
        let cell = self.sorts.get(&m).expect("sort registered at construction");
        cell.get_or_init(|| self.f.sort_elements(m, self.bound).map(Arc::new)).clone().map_err(EvalError::from)
    }

    fn term(&self, t: &CT, env: &[F::Elem]) -> F::Elem {
        let f = self.f;
        match t {
            CT::Var(s) => env[*s].clone(),
            CT::Int(i) => f.from_int(*i),
            CT::Add(a, b) => f.add(&self.term(a, env), &self.term(b, env)),
            CT::Sub(a, b) => f.sub(&self.term(a, env), &self.term(b, env)),
            CT::Mul(a, b) => f.mul(&self.term(a, env), &self.term(b, env)),
            CT::Neg(a) => f.neg(&self.term(a, env)),
            CT::Pow(a, e) => f.pow(&self.term(a, env), *e as u128),
            CT::Sigma(a, j) => f.sigma_pow(&self.term(a, env), *j),
        }
    }

    fn eval(&self, g: &CF, env: &mut Vec<F::Elem>) -> Result<bool, EvalError> {
        Ok(match g {
            CF::Eq(a, b) => self.term(a, env) == self.term(b, env),
            CF::Not(a) => !self.eval(a, env)?,
            CF::And(a, b) => self.eval(a, env)? && self.eval(b, env)?,
            CF::Or(a, b) => self.eval(a, env)? || self.eval(b, env)?,
            CF::Implies(a, b) => !self.eval(a, env)? || self.eval(b, env)?,
            CF::Iff(a, b) => self.eval(a, env)? == self.eval(b, env)?,
            CF::Quant { q, sort, body } => self.quant(*q, *sort, body, env)?,
        })
    }

    fn quant(&self, q: Quantifier, m: u32, body: &CF, env: &mut Vec<F::Elem>) -> Result<bool, EvalError> {
        if let Some((roots, rest)) = self.guarded(q, m, body, env)? {
            let mut hits = 0u64;
            for r in roots {
                env.push(r);
                let ok = match rest {
                    Some(rest) => self.eval(rest, env),
                    None => Ok(true),
                };
                env.pop();
                match (q, ok?) {
                    (Quantifier::Forall, false) => return Ok(false),
                    (Quantifier::Exists, true) => return Ok(true),
                    (_, true) => hits += 1,
                    _ => {}
                }
            }
            return Ok(match q {
                Quantifier::Forall => true,
                Quantifier::Exists => false,
                Quantifier::Parity { n, k } => hits % n == k,
            });
        }
        let elems = self.sort(m)?;
        let hits = self.count_over(&elems, body, env, q)?;
        Ok(match q {
            Quantifier::Forall => hits == elems.len() as u128,
            Quantifier::Exists => hits > 0,
            Quantifier::Parity { n, k } => hits % n as u128 == k as u128,
        })
    }

    /// Number of `x` in `elems` satisfying `body`. For `∃`/`∀` the count is
    /// only meaningful as "positive" / "everything", which allows early exit.
    fn count_over(&self, elems: &[F::Elem], body: &CF, env: &[F::Elem], q: Quantifier) -> Result<u128, EvalError> {
        if elems.len() >= PARALLEL_MIN {
            return elems
                .par_chunks(PARALLEL_MIN / 4)
                .map(|chunk| self.count_over_seq(chunk, body, env, q))
                .try_reduce(|| 0, |a, b| Ok(a + b));
        }
        self.count_over_seq(elems, body, env, q)
    }

    fn count_over_seq(&self, elems: &[F::Elem], body: &CF, env: &[F::Elem], q: Quantifier) -> Result<u128, EvalError> {
        let mut env = env.to_vec();
        let mut hits = 0u128;
        for x in elems {
            env.push(x.clone());
            let ok = self.eval(body, &mut env)?;
            env.pop();
            match (q, ok) {
                (Quantifier::Exists, true) => return Ok(hits + 1),
                (Quantifier::Forall, false) => return Ok(0),
                (_, true) => hits += 1,
                _ => {}
            }
        }
        if let Quantifier::Forall = q {
            // every element passed
            return Ok(elems.len() as u128);
        }
        Ok(hits)
    }

    /// If `body` is guarded by an equation in the bound variable, returns the
    /// equation's roots in `K_m` together with the remaining condition.
    #[allow(clippy::type_complexity)]
    fn guarded<'b>(
        &self,
        q: Quantifier,
        m: u32,
        body: &'b CF,
        env: &[F::Elem],
    ) -> Result<Option<(Vec<F::Elem>, Option<&'b CF>)>, EvalError> {
        if !self.guards || self.q.checked_pow(m).is_some_and(|s| s < GUARD_MIN_SORT) {
            return Ok(None);
        }
        let (eq, rest) = match (q, body) {
            (Quantifier::Forall, CF::Implies(a, b)) => (a.as_ref(), Some(b.as_ref())),
            (Quantifier::Forall, _) => return Ok(None),
            (_, CF::And(a, b)) => (a.as_ref(), Some(b.as_ref())),
            (_, eq @ CF::Eq(..)) => (eq, None),
            _ => return Ok(None),
        };
        let CF::Eq(a, b) = eq else { return Ok(None) };
        let slot = env.len();
        let (Some(pa), Some(pb)) = (self.poly(a, slot, env), self.poly(b, slot, env)) else {
            return Ok(None);
        };
        let diff = upoly::sub(self.f, &pa, &pb);
        if diff.is_empty() {
            return Ok(None);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x7072_6f6f_7473);
        let roots = upoly::roots_in_sort(self.f, &diff, m, &mut rng)?;
        Ok(Some((roots, rest)))
    }

    /// The term as a polynomial in the variable at `slot`, other variables
    /// taking their values from `env`.
    fn poly(&self, t: &CT, slot: usize, env: &[F::Elem]) -> Option<Poly<F::Elem>> {
        let f = self.f;
        if !mentions(t, slot) {
            return Some(upoly::constant(f, self.term(t, env)));
        }
        match t {
            CT::Var(_) => Some(upoly::x(f)),
            CT::Int(_) => unreachable!("constants do not mention the slot"),
            CT::Add(a, b) => Some(upoly::add(f, &self.poly(a, slot, env)?, &self.poly(b, slot, env)?)),
            CT::Sub(a, b) => Some(upoly::sub(f, &self.poly(a, slot, env)?, &self.poly(b, slot, env)?)),
            CT::Mul(a, b) => {
                let (pa, pb) = (self.poly(a, slot, env)?, self.poly(b, slot, env)?);
                if pa.len() + pb.len() > GUARD_DEGREE_LIMIT {
                    return None;
                }
                Some(upoly::mul(f, &pa, &pb))
            }
            CT::Neg(a) => Some(upoly::sub(f, &[], &self.poly(a, slot, env)?)),
            CT::Pow(a, e) => {
                let pa = self.poly(a, slot, env)?;
                if upoly::degree(&pa).unwrap_or(0).saturating_mul(*e as usize) > GUARD_DEGREE_LIMIT {
                    return None;
                }
                Some(upoly::pow(f, &pa, *e))
            }
            CT::Sigma(a, 0) => self.poly(a, slot, env),
            CT::Sigma(..) => None,
        }
    }

    fn count_tuples(&self, g: &CF, sorts: &[u32]) -> Result<u128, EvalError> {
        if sorts.is_empty() {
            return Ok(self.eval(g, &mut Vec::new())? as u128);
        }
        let first = self.sort(sorts[0])?;
        let rest = &sorts[1..];
        let work = |x: &F::Elem| -> Result<u128, EvalError> {
            let mut env = vec![x.clone()];
            self.count_rest(g, rest, &mut env)
        };
        if first.len() >= 64 {
            first.par_iter().map(work).try_reduce(|| 0, |a, b| Ok(a + b))
        } else {
            first.iter().map(work).try_fold(0u128, |a, b| Ok(a + b?))
        }
    }

    fn count_rest(&self, g: &CF, rest: &[u32], env: &mut Vec<F::Elem>) -> Result<u128, EvalError> {
        let Some((&m, tail)) = rest.split_first() else {
            return Ok(self.eval(g, env)? as u128);
        };
        let elems = self.sort(m)?;
        let mut total = 0;
        for x in elems.iter() {
            env.push(x.clone());
            total += self.count_rest(g, tail, env)?;
            env.pop();
        }
        Ok(total)
    }
}
