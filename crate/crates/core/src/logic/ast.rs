use std::collections::BTreeSet;
use std::fmt;

/// Terms of the ring language with the difference operator.
///
/// Variables carry no sort of their own; the sort is fixed by the binder or
/// by the caller's list of free variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    /// Image of an integer in the prime field.
    Int(i64),
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
    Mul(Box<Term>, Box<Term>),
    Neg(Box<Term>),
    Pow(Box<Term>, u32),
    /// `σ^j(t)`, `j ≥ 1`.
    Sigma(Box<Term>, u32),
    /// `σ^{-j}(t)`, resolved as `σ^{N-j}` in a tower of degree `N`.
    SigmaInv(Box<Term>, u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Exists,
    Forall,
    /// The number of witnesses is `≡ k (mod n)`.
    Parity { n: u64, k: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Quant { q: Quantifier, var: String, sort: u32, body: Box<Formula> },
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub(crate) fn vars_into(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Int(_) => {}
            Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) => {
                a.vars_into(out);
                b.vars_into(out);
            }
            Term::Neg(a) | Term::Pow(a, _) | Term::Sigma(a, _) | Term::SigmaInv(a, _) => a.vars_into(out),
        }
    }

    pub fn mentions(&self, name: &str) -> bool {
        match self {
            Term::Var(v) => v == name,
            Term::Int(_) => false,
            Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) => a.mentions(name) || b.mentions(name),
            Term::Neg(a) | Term::Pow(a, _) | Term::Sigma(a, _) | Term::SigmaInv(a, _) => a.mentions(name),
        }
    }

    pub fn has_sigma(&self) -> bool {
        match self {
            Term::Var(_) | Term::Int(_) => false,
            Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) => a.has_sigma() || b.has_sigma(),
            Term::Neg(a) | Term::Pow(a, _) => a.has_sigma(),
            Term::Sigma(..) | Term::SigmaInv(..) => true,
        }
    }

    fn swap_sigma(&self) -> Term {
        let b = |t: &Term| Box::new(t.swap_sigma());
        match self {
            Term::Var(_) | Term::Int(_) => self.clone(),
            Term::Add(x, y) => Term::Add(b(x), b(y)),
            Term::Sub(x, y) => Term::Sub(b(x), b(y)),
            Term::Mul(x, y) => Term::Mul(b(x), b(y)),
            Term::Neg(x) => Term::Neg(b(x)),
            Term::Pow(x, e) => Term::Pow(b(x), *e),
            Term::Sigma(x, j) => Term::SigmaInv(b(x), *j),
            Term::SigmaInv(x, j) => Term::Sigma(b(x), *j),
        }
    }

    fn rename(&self, from: &str, to: &str) -> Term {
        let b = |t: &Term| Box::new(t.rename(from, to));
        match self {
            Term::Var(v) if v == from => Term::Var(to.to_string()),
            Term::Var(_) | Term::Int(_) => self.clone(),
            Term::Add(x, y) => Term::Add(b(x), b(y)),
            Term::Sub(x, y) => Term::Sub(b(x), b(y)),
            Term::Mul(x, y) => Term::Mul(b(x), b(y)),
            Term::Neg(x) => Term::Neg(b(x)),
            Term::Pow(x, e) => Term::Pow(b(x), *e),
            Term::Sigma(x, j) => Term::Sigma(b(x), *j),
            Term::SigmaInv(x, j) => Term::SigmaInv(b(x), *j),
        }
    }
}

impl Formula {
    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    pub fn not(a: Formula) -> Formula {
        Formula::Not(Box::new(a))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn quant(q: Quantifier, var: &str, sort: u32, body: Formula) -> Formula {
        Formula::Quant { q, var: var.to_string(), sort, body: Box::new(body) }
    }

    /// Free variables, sorted by name.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.free_into(&mut Vec::new(), &mut out);
        out
    }

    fn free_into(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::Eq(a, b) => {
                let mut vs = BTreeSet::new();
                a.vars_into(&mut vs);
                b.vars_into(&mut vs);
                out.extend(vs.into_iter().filter(|v| !bound.contains(v)));
            }
            Formula::Not(a) => a.free_into(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.free_into(bound, out);
                b.free_into(bound, out);
            }
            Formula::Quant { var, body, .. } => {
                bound.push(var.clone());
                body.free_into(bound, out);
                bound.pop();
            }
        }
    }

    /// Every sort index mentioned by a binder.
    pub fn sorts(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.sorts_into(&mut out);
        out
    }

    fn sorts_into(&self, out: &mut BTreeSet<u32>) {
        match self {
            Formula::Eq(..) => {}
            Formula::Not(a) => a.sorts_into(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.sorts_into(out);
                b.sorts_into(out);
            }
            Formula::Quant { sort, body, .. } => {
                out.insert(*sort);
                body.sorts_into(out);
            }
        }
    }

    /// The same formula with `σ` and `σ^{-1}` exchanged everywhere.
    pub fn swap_sigma(&self) -> Formula {
        self.map_terms(&|t| t.swap_sigma())
    }

    fn map_terms(&self, g: &dyn Fn(&Term) -> Term) -> Formula {
        let b = |f: &Formula| Box::new(f.map_terms(g));
        match self {
            Formula::Eq(x, y) => Formula::Eq(g(x), g(y)),
            Formula::Not(x) => Formula::Not(b(x)),
            Formula::And(x, y) => Formula::And(b(x), b(y)),
            Formula::Or(x, y) => Formula::Or(b(x), b(y)),
            Formula::Implies(x, y) => Formula::Implies(b(x), b(y)),
            Formula::Iff(x, y) => Formula::Iff(b(x), b(y)),
            Formula::Quant { q, var, sort, body } => {
                Formula::Quant { q: *q, var: var.clone(), sort: *sort, body: b(body) }
            }
        }
    }

    /// Renames the variable bound by the outermost quantifier.
    ///
    /// Returns `None` if this is not a quantifier or `to` already occurs.
    pub fn rename_bound(&self, to: &str) -> Option<Formula> {
        let Formula::Quant { q, var, sort, body } = self else { return None };
        if body.free_vars().contains(to) || body.bound_names().contains(to) {
            return None;
        }
        let body = body.rename_free(var, to);
        Some(Formula::Quant { q: *q, var: to.to_string(), sort: *sort, body: Box::new(body) })
    }

    fn bound_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.bound_into(&mut out);
        out
    }

    fn bound_into(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Eq(..) => {}
            Formula::Not(a) => a.bound_into(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.bound_into(out);
                b.bound_into(out);
            }
            Formula::Quant { var, body, .. } => {
                out.insert(var.clone());
                body.bound_into(out);
            }
        }
    }

    fn rename_free(&self, from: &str, to: &str) -> Formula {
        match self {
            Formula::Quant { var, .. } if var == from => self.clone(),
            Formula::Quant { q, var, sort, body } => Formula::Quant {
                q: *q,
                var: var.clone(),
                sort: *sort,
                body: Box::new(body.rename_free(from, to)),
            },
            Formula::Eq(a, b) => Formula::Eq(a.rename(from, to), b.rename(from, to)),
            Formula::Not(a) => Formula::Not(Box::new(a.rename_free(from, to))),
            Formula::And(a, b) => Formula::And(Box::new(a.rename_free(from, to)), Box::new(b.rename_free(from, to))),
            Formula::Or(a, b) => Formula::Or(Box::new(a.rename_free(from, to)), Box::new(b.rename_free(from, to))),
            Formula::Implies(a, b) => {
                Formula::Implies(Box::new(a.rename_free(from, to)), Box::new(b.rename_free(from, to)))
            }
            Formula::Iff(a, b) => Formula::Iff(Box::new(a.rename_free(from, to)), Box::new(b.rename_free(from, to))),
        }
    }
}

// Term precedence: 1 sum, 2 product, 3 unary minus, 4 power, 5 primary.
fn term_prec(t: &Term) -> u8 {
    match t {
        Term::Add(..) | Term::Sub(..) => 1,
        Term::Mul(..) => 2,
        Term::Neg(..) => 3,
        Term::Pow(..) => 4,
        _ => 5,
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, t: &Term, min: u8) -> fmt::Result {
    let paren = term_prec(t) < min;
    if paren {
        write!(f, "(")?;
    }
    match t {
        Term::Var(v) => write!(f, "{v}")?,
        Term::Int(n) if *n < 0 => write!(f, "-{}", n.unsigned_abs())?,
        Term::Int(n) => write!(f, "{n}")?,
        Term::Add(a, b) => {
            write_term(f, a, 1)?;
            write!(f, " + ")?;
            write_term(f, b, 2)?;
        }
        Term::Sub(a, b) => {
            write_term(f, a, 1)?;
            write!(f, " - ")?;
            write_term(f, b, 2)?;
        }
        Term::Mul(a, b) => {
            write_term(f, a, 2)?;
            write!(f, "*")?;
            write_term(f, b, 3)?;
        }
        Term::Neg(a) => {
            write!(f, "-")?;
            write_term(f, a, 3)?;
        }
        Term::Pow(a, e) => {
            write_term(f, a, 5)?;
            write!(f, "^{e}")?;
        }
        Term::Sigma(a, j) | Term::SigmaInv(a, j) => {
            let name = if matches!(t, Term::Sigma(..)) { "s" } else { "s_inv" };
            for _ in 0..*j {
                write!(f, "{name}(")?;
            }
            write_term(f, a, 0)?;
            for _ in 0..*j {
                write!(f, ")")?;
            }
        }
    }
    if paren {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self, 0)
    }
}

// Formula precedence: 0 quantifier, 1 iff, 2 implies, 3 or, 4 and, 5 not/atom.
fn formula_prec(g: &Formula) -> u8 {
    match g {
        Formula::Quant { .. } => 0,
        Formula::Iff(..) => 1,
        Formula::Implies(..) => 2,
        Formula::Or(..) => 3,
        Formula::And(..) => 4,
        Formula::Not(..) | Formula::Eq(..) => 5,
    }
}

fn write_formula(f: &mut fmt::Formatter<'_>, g: &Formula, min: u8) -> fmt::Result {
    let paren = formula_prec(g) < min;
    if paren {
        write!(f, "(")?;
    }
    match g {
        Formula::Eq(a, b) => write!(f, "{a} = {b}")?,
        Formula::Not(inner) => match inner.as_ref() {
            Formula::Eq(a, b) => write!(f, "{a} != {b}")?,
            other => {
                write!(f, "!")?;
                write_formula(f, other, 5)?;
            }
        },
        Formula::And(a, b) => {
            write_formula(f, a, 4)?;
            write!(f, " & ")?;
            write_formula(f, b, 5)?;
        }
        Formula::Or(a, b) => {
            write_formula(f, a, 3)?;
            write!(f, " | ")?;
            write_formula(f, b, 4)?;
        }
        Formula::Implies(a, b) => {
            write_formula(f, a, 3)?;
            write!(f, " -> ")?;
            write_formula(f, b, 2)?;
        }
        Formula::Iff(a, b) => {
            write_formula(f, a, 1)?;
            write!(f, " <-> ")?;
            write_formula(f, b, 2)?;
        }
        Formula::Quant { q, var, sort, body } => {
            match q {
                Quantifier::Exists => write!(f, "exists ")?,
                Quantifier::Forall => write!(f, "forall ")?,
                Quantifier::Parity { n, k } => write!(f, "mu[{n},{k}] ")?,
            }
            write!(f, "{var}:K{sort}. ")?;
            write_formula(f, body, 0)?;
        }
    }
    if paren {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, self, 0)
    }
}
