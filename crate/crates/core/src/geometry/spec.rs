use std::fmt;

use crate::gf::{is_prime, prime_power};
use crate::logic::parse_term;

use super::poly::MPoly;
use super::GeometryError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ambient {
    /// Affine space with `m` coordinates.
    Affine(usize),
    /// Projective space with `m` homogeneous coordinates, i.e. `P^{m-1}`.
    Projective(usize),
}

impl Ambient {
    pub fn dim_vars(&self) -> usize {
        match self {
            Ambient::Affine(m) | Ambient::Projective(m) => *m,
        }
    }
}

/// A constructible set `{equations = 0, inequations != 0}` over `F_q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructibleSpec {
    pub ambient: Ambient,
    pub vars: Vec<String>,
    pub equations: Vec<MPoly>,
    pub inequations: Vec<MPoly>,
    p: u64,
    k: u32,
}

impl ConstructibleSpec {
    pub fn new(ambient: Ambient, vars: Vec<String>, q: u64) -> Result<ConstructibleSpec, GeometryError> {
        let (p, k) = prime_power(q)?;
        if vars.len() != ambient.dim_vars() {
            return Err(GeometryError::Format {
                line: 0,
                msg: format!("ambient has {} coordinates but {} variables are named", ambient.dim_vars(), vars.len()),
            });
        }
        if let Ambient::Projective(0) = ambient {
            return Err(GeometryError::Format { line: 0, msg: "projective space needs a coordinate".into() });
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(GeometryError::Format { line: 0, msg: format!("variable {v} named twice") });
            }
        }
        Ok(ConstructibleSpec { ambient, vars, equations: Vec::new(), inequations: Vec::new(), p, k })
    }

    pub fn affine(vars: &[&str], q: u64) -> Result<ConstructibleSpec, GeometryError> {
        ConstructibleSpec::new(Ambient::Affine(vars.len()), vars.iter().map(|s| s.to_string()).collect(), q)
    }

    pub fn projective(vars: &[&str], q: u64) -> Result<ConstructibleSpec, GeometryError> {
        ConstructibleSpec::new(Ambient::Projective(vars.len()), vars.iter().map(|s| s.to_string()).collect(), q)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn q(&self) -> u64 {
        self.p.pow(self.k)
    }

    pub fn poly(&self, text: &str) -> Result<MPoly, GeometryError> {
        let t = parse_term(text)?;
        MPoly::from_term(&t, &self.vars, self.p)
    }

    fn check(&self, f: &MPoly) -> Result<(), GeometryError> {
        if f.nvars() != self.vars.len() || f.characteristic() != self.p {
            return Err(GeometryError::Format { line: 0, msg: "polynomial does not match the variable list".into() });
        }
        if matches!(self.ambient, Ambient::Projective(_)) && !f.is_homogeneous() {
            return Err(GeometryError::NotHomogeneous(f.render(&self.vars)));
        }
        Ok(())
    }

    pub fn add_equation(&mut self, f: MPoly) -> Result<(), GeometryError> {
        self.check(&f)?;
        self.equations.push(f);
        Ok(())
    }

    pub fn add_inequation(&mut self, f: MPoly) -> Result<(), GeometryError> {
        self.check(&f)?;
        self.inequations.push(f);
        Ok(())
    }

    /// Adds `text = 0`.
    pub fn equation(mut self, text: &str) -> Result<ConstructibleSpec, GeometryError> {
        let f = self.poly(text)?;
        self.add_equation(f)?;
        Ok(self)
    }

    /// Adds `text != 0`.
    pub fn inequation(mut self, text: &str) -> Result<ConstructibleSpec, GeometryError> {
        let f = self.poly(text)?;
        self.add_inequation(f)?;
        Ok(self)
    }

    /// Parses the plain-text variety format.
    ///
    /// ```text
    /// # the Legendre family with the degenerate fibres removed
    /// ambient = affine 3
    /// vars = x, y, l
    /// base = 5^1
    /// y^2 - x*(x - 1)*(x - l) = 0
    /// l != 0
    /// l - 1 != 0
    /// ```
    pub fn parse(text: &str) -> Result<ConstructibleSpec, GeometryError> {
        let mut ambient = None;
        let mut vars = None;
        let mut base = None;
        let mut body = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let fmt_err = |msg: String| GeometryError::Format { line: line_no, msg };
            let header = line.split_once('=').filter(|(k, _)| {
                let k = k.trim();
                (k == "ambient" || k == "vars" || k == "base") && !k.ends_with('!')
            });
            if let Some((key, value)) = header {
                let value = value.trim();
                match key.trim() {
                    "ambient" => {
                        let mut it = value.split_whitespace();
                        let kind = it.next().unwrap_or("");
                        let m: usize = it
                            .next()
                            .and_then(|s| s.parse().ok())
                            .ok_or_else(|| fmt_err("expected `ambient = affine M` or `projective M`".into()))?;
                        ambient = Some(match kind {
                            "affine" => Ambient::Affine(m),
                            "projective" => Ambient::Projective(m),
                            other => return Err(fmt_err(format!("unknown ambient space {other:?}"))),
                        });
                    }
                    "vars" => {
                        vars = Some(value.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect::<Vec<_>>())
                    }
                    "base" => {
                        let q = match value.split_once('^') {
                            Some((p, k)) => {
                                let p: u64 = p.trim().parse().map_err(|_| fmt_err("bad base prime".into()))?;
                                let k: u32 = k.trim().parse().map_err(|_| fmt_err("bad base exponent".into()))?;
                                if !is_prime(p) {
                                    return Err(fmt_err(format!("{p} is not prime")));
                                }
                                p.checked_pow(k).ok_or_else(|| fmt_err("base field too large".into()))?
                            }
                            None => value.parse().map_err(|_| fmt_err("bad base field size".into()))?,
                        };
                        base = Some(q);
                    }
                    _ => unreachable!(),
                }
                continue;
            }
            body.push((line_no, line.to_string()));
        }
        let ambient = ambient.ok_or(GeometryError::Format { line: 0, msg: "missing `ambient =` header".into() })?;
        let vars = vars.ok_or(GeometryError::Format { line: 0, msg: "missing `vars =` header".into() })?;
        let q = base.ok_or(GeometryError::Format { line: 0, msg: "missing `base =` header".into() })?;
        let mut spec = ConstructibleSpec::new(ambient, vars, q)?;
        for (line_no, line) in body {
            let with_line = |e: GeometryError| match e {
                GeometryError::Format { msg, .. } => GeometryError::Format { line: line_no, msg },
                GeometryError::Parse(pe) => GeometryError::Format { line: line_no, msg: pe.to_string() },
                other => other,
            };
            let (lhs, rhs, neq) = if let Some((l, r)) = line.split_once("!=") {
                (l, r, true)
            } else if let Some((l, r)) = line.split_once('=') {
                (l, r, false)
            } else {
                return Err(GeometryError::Format { line: line_no, msg: "expected `poly = 0` or `poly != 0`".into() });
            };
            let f = spec.poly(lhs).map_err(with_line)?.sub(&spec.poly(rhs).map_err(with_line)?);
            if neq {
                spec.add_inequation(f).map_err(with_line)?;
            } else {
                spec.add_equation(f).map_err(with_line)?;
            }
        }
        Ok(spec)
    }

    /// Same point set over the base field `F_q'` of the same characteristic.
    pub fn with_base(&self, q: u64) -> Result<ConstructibleSpec, GeometryError> {
        let (p, k) = prime_power(q)?;
        if p != self.p {
            return Err(GeometryError::Format { line: 0, msg: format!("cannot move from characteristic {} to {p}", self.p) });
        }
        let mut out = self.clone();
        out.k = k;
        Ok(out)
    }

    /// `self ∩ {f = 0}` and `self ∩ {f != 0}`, a disjoint decomposition.
    pub fn split(&self, f: &MPoly) -> Result<(ConstructibleSpec, ConstructibleSpec), GeometryError> {
        let mut zero = self.clone();
        zero.add_equation(f.clone())?;
        let mut nonzero = self.clone();
        nonzero.add_inequation(f.clone())?;
        Ok((zero, nonzero))
    }

    /// The product `self × other` in affine space (variables of `other`
    /// are suffixed with `'` on a name clash).
    pub fn product(&self, other: &ConstructibleSpec) -> Result<ConstructibleSpec, GeometryError> {
        if self.p != other.p || self.k != other.k {
            return Err(GeometryError::Format { line: 0, msg: "products need a common base field".into() });
        }
        if !matches!(self.ambient, Ambient::Affine(_)) || !matches!(other.ambient, Ambient::Affine(_)) {
            return Err(GeometryError::Unsupported("products of projective specs".into()));
        }
        let mut vars = self.vars.clone();
        for v in &other.vars {
            let mut name = v.clone();
            while vars.contains(&name) {
                name.push('\'');
            }
            vars.push(name);
        }
        let n = vars.len();
        let left: Vec<usize> = (0..self.vars.len()).collect();
        let right: Vec<usize> = (self.vars.len()..n).collect();
        let mut out = ConstructibleSpec::new(Ambient::Affine(n), vars, self.q())?;
        out.equations = self.equations.iter().map(|f| f.remap(n, &left)).chain(other.equations.iter().map(|f| f.remap(n, &right))).collect();
        out.inequations =
            self.inequations.iter().map(|f| f.remap(n, &left)).chain(other.inequations.iter().map(|f| f.remap(n, &right))).collect();
        Ok(out)
    }

    /// The `r`-fold fibre power over the coordinate projection onto `base`:
    /// points are `(b, y_1, …, y_r)` with every `(b, y_i)` in the set.
    pub fn fiber_power(&self, base: &[String], r: usize) -> Result<ConstructibleSpec, GeometryError> {
        if !matches!(self.ambient, Ambient::Affine(_)) {
            return Err(GeometryError::Unsupported("fibre powers of projective specs".into()));
        }
        if r == 0 {
            return Err(GeometryError::Unsupported("fibre power of order zero".into()));
        }
        let base_idx = self.indices(base)?;
        let fiber_idx: Vec<usize> = (0..self.vars.len()).filter(|i| !base_idx.contains(i)).collect();
        let mut vars: Vec<String> = base_idx.iter().map(|&i| self.vars[i].clone()).collect();
        for copy in 1..=r {
            for &i in &fiber_idx {
                vars.push(format!("{}_{copy}", self.vars[i]));
            }
        }
        let n = vars.len();
        let mut out = ConstructibleSpec::new(Ambient::Affine(n), vars, self.q())?;
        for copy in 0..r {
            let mut map = vec![0; self.vars.len()];
            for (j, &i) in base_idx.iter().enumerate() {
                map[i] = j;
            }
            for (j, &i) in fiber_idx.iter().enumerate() {
                map[i] = base_idx.len() + copy * fiber_idx.len() + j;
            }
            for f in &self.equations {
                let g = f.remap(n, &map);
                if copy == 0 || fiber_idx.iter().any(|&i| f.mentions(i)) {
                    out.equations.push(g);
                }
            }
            for f in &self.inequations {
                let g = f.remap(n, &map);
                if copy == 0 || fiber_idx.iter().any(|&i| f.mentions(i)) {
                    out.inequations.push(g);
                }
            }
        }
        Ok(out)
    }

    pub(crate) fn indices(&self, names: &[String]) -> Result<Vec<usize>, GeometryError> {
        names
            .iter()
            .map(|v| self.vars.iter().position(|w| w == v).ok_or_else(|| GeometryError::UnknownVariable(v.clone())))
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let (kind, m) = match self.ambient {
            Ambient::Affine(m) => ("affine", m),
            Ambient::Projective(m) => ("projective", m),
        };
        s.push_str(&format!("ambient = {kind} {m}\nvars = {}\nbase = {}^{}\n", self.vars.join(", "), self.p, self.k));
        for f in &self.equations {
            s.push_str(&format!("{} = 0\n", f.render(&self.vars)));
        }
        for f in &self.inequations {
            s.push_str(&format!("{} != 0\n", f.render(&self.vars)));
        }
        s
    }
}

impl fmt::Display for ConstructibleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Named families available without writing a file.
pub fn builtin(name: &str, q: u64) -> Result<ConstructibleSpec, GeometryError> {
    match name {
        "legendre-surface" => legendre_surface(q),
        "gm" => ConstructibleSpec::affine(&["x"], q)?.inequation("x"),
        "affine-line" => ConstructibleSpec::affine(&["x"], q),
        "projective-line" => ConstructibleSpec::projective(&["x", "y"], q),
        other => Err(GeometryError::UnknownBuiltin(other.to_string())),
    }
}

pub const BUILTINS: [&str; 4] = ["legendre-surface", "gm", "affine-line", "projective-line"];

/// `{y² = x(x-1)(x-λ), λ ≠ 0, 1}` in affine 3-space.
pub fn legendre_surface(q: u64) -> Result<ConstructibleSpec, GeometryError> {
    ConstructibleSpec::affine(&["x", "y", "l"], q)?
        .equation("y^2 - x*(x - 1)*(x - l)")?
        .inequation("l")?
        .inequation("l - 1")
}

/// The projective closure of `y² + a1xy + a3y = x³ + a2x² + a4x + a6`.
pub fn weierstrass_projective(a: [i64; 5], q: u64) -> Result<ConstructibleSpec, GeometryError> {
    let [a1, a2, a3, a4, a6] = a;
    ConstructibleSpec::projective(&["x", "y", "z"], q)?.equation(&format!(
        "y^2*z + ({a1})*x*y*z + ({a3})*y*z^2 - x^3 - ({a2})*x^2*z - ({a4})*x*z^2 - ({a6})*z^3"
    ))
}
