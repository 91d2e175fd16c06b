//! The multi-sorted language of periodic fields with counting quantifiers.
//!
//! Concrete syntax (whitespace-insensitive):
//!
//! ```text
//! formula ::= quant | iff
//! iff     ::= impl ("<->" impl)*
//! impl    ::= disj ("->" impl)?
//! disj    ::= conj ("|" conj)*
//! conj    ::= neg ("&" neg)*
//! neg     ::= "!" neg | quant | atom
//! atom    ::= term ("=" | "!=") term | "(" formula ")"
//! quant   ::= ("exists" | "forall" | "mu[" INT "," INT "]") VAR ":" SORT "." formula
//! term    ::= sums, products, unary minus, t^INT, s(t), s_inv(t), VAR, INT, (t)
//! SORT    ::= "K" INT
//! ```
//!
//! `mu[n,k] x:Km. φ` holds when the number of `x ∈ K_m` satisfying `φ` is
//! congruent to `k` mod `n`. `s` is the Frobenius `x ↦ x^q`; `s_inv` is its
//! inverse, realized as `σ^{N-1}` in a tower of degree `N`.
//!
//! ```
//! use pfchi::logic::{evaluate_sentence, parse};
//!
//! let five_mod = parse("mu[5,2] x:K1. x = x").unwrap();
//! assert!(evaluate_sentence(&five_mod, 7).unwrap());
//! assert!(!evaluate_sentence(&five_mod, 11).unwrap());
//! ```

mod ast;
mod eval;
mod parser;

pub use ast::{Formula, Quantifier, Term};
pub use eval::{count_mod, count_solutions, evaluate_sentence, Model, Tower};
pub use parser::{parse, parse_term};

use crate::gf::GfError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("bad sort at byte {pos}: {msg}")]
    Sort { pos: usize, msg: String },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { pos, .. } | ParseError::Sort { pos, .. } => *pos,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("enumeration bound exceeded: {what}")]
    TooLarge { what: String },
    #[error("modulus must be positive, got {0}")]
    BadModulus(u64),
    #[error(transparent)]
    Field(GfError),
}

impl From<GfError> for EvalError {
    fn from(e: GfError) -> Self {
        match e {
            GfError::TooLarge { what } => EvalError::TooLarge { what },
            other => EvalError::Field(other),
        }
    }
}

/// The sentence `mu[5,2] x:K1. x = x`: `q ≡ 2 (mod 5)`.
pub fn parity_sentence() -> Formula {
    parse("mu[5,2] x:K1. x = x").expect("fixed sentence parses")
}

/// A parity-free sentence equivalent to [`parity_sentence`] in every `Fr^q`:
/// the fifth roots of unity exist in `K_4` and Frobenius squares them.
pub fn parity_free_sentence() -> Formula {
    parse("5 != 0 & forall x:K4. (x^5 = 1 -> s(x) = x^2)").expect("fixed sentence parses")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn free(v: &[(&str, u32)]) -> Vec<(String, u32)> {
        v.iter().map(|(n, m)| (n.to_string(), *m)).collect()
    }

    #[test]
    fn parses_parity_sentence() {
        let f = parse("mu[5,2] x:K1. x = x").unwrap();
        assert_eq!(
            f,
            Formula::quant(Quantifier::Parity { n: 5, k: 2 }, "x", 1, Formula::eq(Term::var("x"), Term::var("x")))
        );
    }

    #[test]
    fn parses_parity_free_sentence() {
        let guard = Formula::eq(Term::Pow(Box::new(Term::var("x")), 5), Term::Int(1));
        let concl = Formula::eq(Term::Sigma(Box::new(Term::var("x")), 1), Term::Pow(Box::new(Term::var("x")), 2));
        let expected = Formula::and(
            Formula::not(Formula::eq(Term::Int(5), Term::Int(0))),
            Formula::quant(Quantifier::Forall, "x", 4, Formula::implies(guard, concl)),
        );
        assert_eq!(parity_free_sentence(), expected);
    }

    #[test]
    fn render_round_trips() {
        for src in [
            "exists x:K1. x = x",
            "mu[5,2] x:K1. x = x",
            "5 != 0 & forall x:K4. (x^5 = 1 -> s(x) = x^2)",
            "a = a -> b = c -> d = e",
            "!(exists y:K2. s(s(y)) = y) | x*(y + 1) - -x^3 = (x - y)^2",
            "(a = b <-> c = d) <-> e = f",
            "s_inv(x + 1) = s(s_inv(x))",
        ] {
            let f = parse(src).unwrap();
            assert_eq!(parse(&f.to_string()).unwrap(), f, "{src} -> {f}");
        }
        assert_eq!(parse("exists x:K1. x = x").unwrap().to_string(), "exists x:K1. x = x");
    }

    #[test]
    fn implication_is_right_associative() {
        let f = parse("a = a -> b = b -> c = c").unwrap();
        let Formula::Implies(_, rhs) = f else { panic!("expected an implication") };
        assert!(matches!(*rhs, Formula::Implies(..)));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let e = parse("exists x:K1. x = ").unwrap_err();
        assert!(matches!(e, ParseError::Syntax { pos: 17, .. }), "{e:?}");
        assert!(matches!(parse("exists x:L1. x = x"), Err(ParseError::Sort { pos: 9, .. })));
        assert!(matches!(parse("exists x:K0. x = x"), Err(ParseError::Sort { .. })));
        assert!(matches!(parse("mu[5,7] x:K1. x = x"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("x = x )"), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn parity_sentence_examples() {
        assert!(evaluate_sentence(&parity_sentence(), 7).unwrap());
        assert!(evaluate_sentence(&parity_free_sentence(), 7).unwrap());
        for q in [2u64, 3, 4, 5, 8, 9, 11, 13, 17, 25] {
            let a = evaluate_sentence(&parity_sentence(), q).unwrap();
            assert_eq!(a, evaluate_sentence(&parity_free_sentence(), q).unwrap(), "q = {q}");
            assert_eq!(a, q % 5 == 2, "q = {q}");
        }
    }

    #[test]
    fn parity_of_q() {
        let f = parse("mu[2,1] x:K1. x = x").unwrap();
        for q in [2u64, 3, 4, 5, 7, 8, 9] {
            assert_eq!(evaluate_sentence(&f, q).unwrap(), q % 2 == 1);
        }
    }

    #[test]
    fn inverse_frobenius_flips_parity_free_sentence() {
        for q in [2u64, 7, 17, 37] {
            assert!(evaluate_sentence(&parity_free_sentence(), q).unwrap());
            assert!(!evaluate_sentence(&parity_free_sentence().swap_sigma(), q).unwrap());
            assert_eq!(parity_sentence().swap_sigma(), parity_sentence());
        }
    }

    #[test]
    fn counts() {
        let f = parse("x*x = 1").unwrap();
        assert_eq!(count_solutions(&f, &free(&[("x", 1)]), 7).unwrap(), 2);
        assert_eq!(count_mod(&f, &free(&[("x", 1)]), 7, 2).unwrap(), 0);
        let f = parse("x = x").unwrap();
        assert_eq!(count_solutions(&f, &free(&[("x", 1)]), 9).unwrap(), 9);
        assert_eq!(count_mod(&f, &free(&[("x", 1)]), 7, 5).unwrap(), 2);
        let f = parse("exists y:K1. y*y = x").unwrap();
        assert_eq!(count_solutions(&f, &free(&[("x", 1)]), 5).unwrap(), 3);
        let f = parse("x = x + 1").unwrap();
        for n in [2, 3, 7] {
            assert_eq!(count_mod(&f, &free(&[("x", 1)]), 11, n).unwrap(), 0);
        }
    }

    #[test]
    fn char_two_has_no_half() {
        let f = parse("exists x:K1. x + x = 1").unwrap();
        assert!(!evaluate_sentence(&f, 4).unwrap());
    }

    #[test]
    fn unbound_and_too_large() {
        let f = parse("x = y").unwrap();
        assert_eq!(count_solutions(&f, &free(&[("x", 1)]), 5), Err(EvalError::UnboundVariable("y".into())));
        let f = parse("exists x:K3. s(x) = x + 1").unwrap();
        let model = Model::for_formula(&f, 101, &[]).unwrap().with_bound(1000);
        assert!(matches!(model.evaluate(&f, &BTreeMap::new()), Err(EvalError::TooLarge { .. })));
    }

    #[test]
    fn assignment_evaluation() {
        let f = parse("exists y:K2. y*y = x").unwrap();
        let model = Model::for_formula(&f, 3, &free(&[("x", 1)])).unwrap();
        for c in 0..3 {
            let mut a = BTreeMap::new();
            a.insert("x".to_string(), model.spec().element(&[c]));
            // every element of F_3 is a square in F_9
            assert!(model.evaluate(&f, &a).unwrap());
        }
    }

    #[test]
    fn guarded_quantifiers_match_enumeration() {
        let sentences = [
            "forall x:K2. (x^4 = 1 -> s(x) = x^3)",
            "exists x:K2. x^2 + x + 1 = 0",
            "exists x:K2. (x^3 = 2 & s(x) != x)",
            "mu[3,1] x:K2. x^8 = 1",
            "mu[4,0] x:K2. (x^2 = x + 1 & x != 0)",
            "forall y:K1. exists x:K2. (x*x = y & x = x)",
        ];
        for src in sentences {
            let f = parse(src).unwrap();
            for q in [17u64, 19, 23, 32] {
                let fast = Model::for_formula(&f, q, &[]).unwrap();
                let slow = fast.clone().without_guards();
                let empty = BTreeMap::new();
                assert_eq!(fast.evaluate(&f, &empty).unwrap(), slow.evaluate(&f, &empty).unwrap(), "{src} q={q}");
            }
        }
    }

    fn arb_term(vars: Vec<&'static str>) -> impl Strategy<Value = Term> {
        let leaf = prop_oneof![
            (0i64..20).prop_map(Term::Int),
            proptest::sample::select(vars).prop_map(Term::var),
        ];
        leaf.prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::Sub(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::Mul(Box::new(a), Box::new(b))),
                inner.clone().prop_map(|a| Term::Neg(Box::new(a))),
                (inner.clone(), 1u32..4).prop_map(|(a, e)| Term::Pow(Box::new(a), e)),
                inner.clone().prop_map(|a| match a {
                    Term::Sigma(..) => a,
                    a => Term::Sigma(Box::new(a), 1),
                }),
                inner.prop_map(|a| match a {
                    Term::SigmaInv(..) => a,
                    a => Term::SigmaInv(Box::new(a), 1),
                }),
            ]
        })
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let atom = (arb_term(vec!["x", "y", "z"]), arb_term(vec!["x", "y", "z"]), any::<bool>())
            .prop_map(|(a, b, neq)| if neq { Formula::not(Formula::eq(a, b)) } else { Formula::eq(a, b) });
        atom.prop_recursive(3, 16, 2, |inner| {
            let q = prop_oneof![
                Just(Quantifier::Exists),
                Just(Quantifier::Forall),
                (2u64..6).prop_flat_map(|n| (Just(n), 0..n)).prop_map(|(n, k)| Quantifier::Parity { n, k }),
            ];
            prop_oneof![
                inner.clone().prop_map(Formula::not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::Or(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::Iff(Box::new(a), Box::new(b))),
                (q, proptest::sample::select(vec!["x", "y", "z"]), 1u32..3, inner)
                    .prop_map(|(q, v, m, b)| Formula::quant(q, v, m, b)),
            ]
        })
    }

    /// Closes a formula by binding its free variables in K1.
    fn close(f: Formula) -> Formula {
        f.free_vars().into_iter().fold(f, |acc, v| Formula::quant(Quantifier::Exists, &v, 1, acc))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn render_then_parse_is_identity(f in arb_formula()) {
            let again = parse(&f.to_string());
            prop_assert_eq!(again, Ok(f.clone()), "rendered as {}", f);
        }

        #[test]
        fn exactly_one_parity_class(body in arb_formula(), n in 2u64..7, q in prop::sample::select(vec![2u64, 3, 4, 5])) {
            let body = close(body);
            let body = Formula::and(body, Formula::eq(Term::var("w"), Term::var("w")));
            let truths: Vec<bool> = (0..n)
                .map(|k| evaluate_sentence(&Formula::quant(Quantifier::Parity { n, k }, "w", 1, body.clone()), q).unwrap())
                .collect();
            prop_assert_eq!(truths.iter().filter(|&&t| t).count(), 1);
        }

        #[test]
        fn residues_are_coherent(body in arb_formula(), q in prop::sample::select(vec![3u64, 4, 5])) {
            let free_names: Vec<String> = body.free_vars().into_iter().collect();
            let fv: Vec<(String, u32)> = free_names.into_iter().map(|v| (v, 1)).collect();
            let c6 = count_mod(&body, &fv, q, 6).unwrap();
            prop_assert_eq!(c6 % 2, count_mod(&body, &fv, q, 2).unwrap());
            prop_assert_eq!(c6 % 3, count_mod(&body, &fv, q, 3).unwrap());
        }

        #[test]
        fn alpha_renaming_preserves_truth(body in arb_formula(), q in prop::sample::select(vec![2u64, 3, 5])) {
            let f = close(body);
            if let Some(g) = f.rename_bound("fresh") {
                prop_assert_eq!(evaluate_sentence(&f, q).unwrap(), evaluate_sentence(&g, q).unwrap());
            }
        }
    }
}
