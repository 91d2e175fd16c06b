//! Recursive-descent parser for formulas and terms.
//!
//! An opening parenthesis in atom position is ambiguous between a
//! parenthesized term and a parenthesized formula; the parser tries the
//! comparison reading first and backtracks.

use super::ast::{Formula, Quantifier, Term};
use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(u64),
    Mu,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Dot,
    Plus,
    Minus,
    Star,
    Caret,
    Eq,
    Neq,
    Bang,
    Amp,
    Bar,
    Arrow,
    DArrow,
    Eof,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let two = |s: &str| src[i..].starts_with(s);
        let tok = if two("<->") {
            i += 3;
            Tok::DArrow
        } else if two("->") {
            i += 2;
            Tok::Arrow
        } else if two("!=") {
            i += 2;
            Tok::Neq
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let v = src[start..i]
                .parse::<u64>()
                .map_err(|_| ParseError::Syntax { pos: start, msg: "integer literal too large".into() })?;
            Tok::Int(v)
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = &src[start..i];
            if word == "mu" {
                Tok::Mu
            } else {
                Tok::Ident(word.to_string())
            }
        } else {
            i += 1;
            match c {
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                b'[' => Tok::LBracket,
                b']' => Tok::RBracket,
                b',' => Tok::Comma,
                b':' => Tok::Colon,
                b'.' => Tok::Dot,
                b'+' => Tok::Plus,
                b'-' => Tok::Minus,
                b'*' => Tok::Star,
                b'^' => Tok::Caret,
                b'=' => Tok::Eq,
                b'!' => Tok::Bang,
                b'&' => Tok::Amp,
                b'|' => Tok::Bar,
                _ => {
                    let ch = src[start..].chars().next().unwrap();
                    return Err(ParseError::Syntax { pos: start, msg: format!("unexpected character {ch:?}") });
                }
            }
        };
        out.push((tok, start));
    }
    out.push((Tok::Eof, src.len()));
    Ok(out)
}

const KEYWORDS: [&str; 2] = ["exists", "forall"];

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(ParseError::Syntax { pos: self.offset(), msg: msg.into() })
    }

    fn expect(&mut self, t: Tok, what: &str) -> PResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn at_quantifier(&self) -> bool {
        match self.peek() {
            Tok::Mu => true,
            Tok::Ident(w) => KEYWORDS.contains(&w.as_str()),
            _ => false,
        }
    }

    fn formula(&mut self) -> PResult<Formula> {
        if self.at_quantifier() {
            self.quant()
        } else {
            self.iff()
        }
    }

    fn quant(&mut self) -> PResult<Formula> {
        let q = match self.bump() {
            Tok::Mu => {
                self.expect(Tok::LBracket, "'[' after mu")?;
                let n = self.int("modulus")?;
                self.expect(Tok::Comma, "','")?;
                let k = self.int("residue")?;
                self.expect(Tok::RBracket, "']'")?;
                if n < 2 {
                    return self.err("parity modulus must be at least 2");
                }
                if k >= n {
                    return self.err(format!("residue {k} is not reduced mod {n}"));
                }
                Quantifier::Parity { n, k }
            }
            Tok::Ident(w) if w == "exists" => Quantifier::Exists,
            Tok::Ident(w) if w == "forall" => Quantifier::Forall,
            _ => unreachable!("checked by at_quantifier"),
        };
        let var = self.var_name()?;
        self.expect(Tok::Colon, "':' before the sort")?;
        let sort = self.sort()?;
        self.expect(Tok::Dot, "'.' after the binder")?;
        let body = self.formula()?;
        Ok(Formula::Quant { q, var, sort, body: Box::new(body) })
    }

    fn int(&mut self, what: &str) -> PResult<u64> {
        match self.bump() {
            Tok::Int(v) => Ok(v),
            _ => {
                self.pos -= 1;
                self.err(format!("expected {what}"))
            }
        }
    }

    fn var_name(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(w) if !KEYWORDS.contains(&w.as_str()) => {
                self.bump();
                Ok(w)
            }
            _ => self.err("expected a variable name"),
        }
    }

    fn sort(&mut self) -> PResult<u32> {
        let pos = self.offset();
        let bad = |msg: &str| ParseError::Sort { pos, msg: msg.to_string() };
        match self.bump() {
            Tok::Ident(w) => {
                let digits = w.strip_prefix('K').ok_or_else(|| bad("sorts are written K<m>"))?;
                let m: u32 = digits.parse().map_err(|_| bad("sorts are written K<m>"))?;
                if m == 0 {
                    return Err(bad("sort index must be at least 1"));
                }
                Ok(m)
            }
            _ => Err(bad("expected a sort such as K1")),
        }
    }

    fn iff(&mut self) -> PResult<Formula> {
        let mut lhs = self.implies()?;
        while self.eat(&Tok::DArrow) {
            let rhs = self.implies()?;
            lhs = Formula::Iff(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> PResult<Formula> {
        let lhs = self.disj()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.implies()?;
            return Ok(Formula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disj(&mut self) -> PResult<Formula> {
        let mut lhs = self.conj()?;
        while self.eat(&Tok::Bar) {
            let rhs = self.conj()?;
            lhs = Formula::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> PResult<Formula> {
        let mut lhs = self.neg()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.neg()?;
            lhs = Formula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn neg(&mut self) -> PResult<Formula> {
        if self.eat(&Tok::Bang) {
            return Ok(Formula::Not(Box::new(self.neg()?)));
        }
        if self.at_quantifier() {
            return self.quant();
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<Formula> {
        let save = self.pos;
        let cmp_err = match self.comparison() {
            Ok(f) => return Ok(f),
            Err(e) => e,
        };
        self.pos = save;
        if self.eat(&Tok::LParen) {
            if let Ok(f) = self.formula() {
                if self.eat(&Tok::RParen) {
                    return Ok(f);
                }
            }
        }
        self.pos = save;
        Err(cmp_err)
    }

    fn comparison(&mut self) -> PResult<Formula> {
        let a = self.term()?;
        let neq = match self.peek() {
            Tok::Eq => false,
            Tok::Neq => true,
            _ => return self.err("expected '=' or '!='"),
        };
        self.bump();
        let b = self.term()?;
        let eq = Formula::Eq(a, b);
        Ok(if neq { Formula::Not(Box::new(eq)) } else { eq })
    }

    fn term(&mut self) -> PResult<Term> {
        let mut lhs = self.product()?;
        loop {
            if self.eat(&Tok::Plus) {
                lhs = Term::Add(Box::new(lhs), Box::new(self.product()?));
            } else if self.eat(&Tok::Minus) {
                lhs = Term::Sub(Box::new(lhs), Box::new(self.product()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product(&mut self) -> PResult<Term> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::Star) {
            lhs = Term::Mul(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Term> {
        if self.eat(&Tok::Minus) {
            return Ok(Term::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> PResult<Term> {
        let mut base = self.primary()?;
        while self.eat(&Tok::Caret) {
            let e = self.int("an exponent")?;
            let e = u32::try_from(e).map_err(|_| ParseError::Syntax { pos: self.offset(), msg: "exponent too large".into() })?;
            base = Term::Pow(Box::new(base), e);
        }
        Ok(base)
    }

    fn primary(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                let v = i64::try_from(v).map_err(|_| ParseError::Syntax { pos: self.offset(), msg: "integer literal too large".into() })?;
                Ok(Term::Int(v))
            }
            Tok::Ident(w) if (w == "s" || w == "s_inv") && *self.peek_at(1) == Tok::LParen => {
                self.bump();
                self.bump();
                let inner = self.term()?;
                self.expect(Tok::RParen, "')'")?;
                let inv = w == "s_inv";
                Ok(match (inner, inv) {
                    (Term::Sigma(t, j), false) => Term::Sigma(t, j + 1),
                    (Term::SigmaInv(t, j), true) => Term::SigmaInv(t, j + 1),
                    (t, false) => Term::Sigma(Box::new(t), 1),
                    (t, true) => Term::SigmaInv(Box::new(t), 1),
                })
            }
            Tok::Ident(w) if !KEYWORDS.contains(&w.as_str()) => {
                self.bump();
                Ok(Term::Var(w))
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(t)
            }
            _ => self.err("expected a term"),
        }
    }
}

pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        return p.err("unexpected trailing input");
    }
    Ok(f)
}

/// Parses a bare term (used for polynomial input).
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let t = p.term()?;
    if *p.peek() != Tok::Eof {
        return p.err("unexpected trailing input");
    }
    Ok(t)
}
