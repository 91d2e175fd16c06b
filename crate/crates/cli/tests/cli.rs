use std::process::{Command, Output};

fn pfchi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pfchi")).args(args).env_remove("PFCHI_BOUND").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap().trim().to_string()
}

#[test]
fn eval_sentences_and_counts() {
    let o = pfchi(&["eval", "--q", "7", "--formula", "mu[5,2] x:K1. x = x"]);
    assert_eq!((o.status.code(), stdout(&o).as_str()), (Some(0), "true"));
    let o = pfchi(&["eval", "--q", "7", "--formula", "x*x = 1", "--free", "x:K1", "--count-mod", "2"]);
    assert_eq!(stdout(&o), "0");
    let o = pfchi(&["eval", "--q", "7", "--formula", "x*x = 1", "--free", "x:K1"]);
    assert_eq!(stdout(&o), "2");
    let o = pfchi(&["eval", "--q", "4", "--formula", "exists x:K1. x+x = 1"]);
    assert_eq!(stdout(&o), "false");
    let o = pfchi(&["--output", "json", "eval", "--q", "4", "--formula", "exists x:K1. x*x = x + 1"]);
    assert_eq!(stdout(&o), r#"{"value":true}"#);
}

#[test]
fn eval_exit_codes() {
    assert_eq!(pfchi(&["eval", "--q", "5", "--formula", "x + = 1"]).status.code(), Some(1));
    assert_eq!(pfchi(&["eval", "--q", "5", "--formula", "x = 1"]).status.code(), Some(2));
    assert_eq!(pfchi(&["eval", "--q", "6", "--formula", "0 = 0"]).status.code(), Some(2));
    let o = pfchi(&["--bound", "100", "eval", "--q", "7", "--formula", "exists x:K3. x = x"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn chi_of_curves_and_formulas() {
    let o = pfchi(&["chi", "--curve", "y^2 = x^3 + x", "--q", "5", "--moduli", "9"]);
    assert_eq!((o.status.code(), stdout(&o).as_str()), (Some(0), r#"{"9":4}"#));
    let o = pfchi(&["chi", "--curve", "y^2 = x^3 + x", "--q", "5", "--moduli", "9", "--direct"]);
    assert_eq!(stdout(&o), r#"{"9":4}"#);
    let o = pfchi(&["chi", "--formula", "x*x = 1", "--free", "x:K1", "--q", "7", "--moduli", "2,3,6"]);
    assert_eq!(stdout(&o), r#"{"2":0,"3":2,"6":2}"#);
    // at p only the unit roots survive: |G_m(F_{5^n})| = 5^n − 1 ≡ 4
    let o = pfchi(&["chi", "--builtin", "gm", "--q", "5", "--moduli", "5,10"]);
    assert_eq!(stdout(&o), r#"{"5":4,"10":4}"#);
}

#[test]
fn zeta_and_dual_chi() {
    let o = pfchi(&["zeta", "--curve", "y^2 = x^3 + x", "--q", "5"]);
    assert_eq!(stdout(&o), r#"{"q":5,"A":[1,-6,5],"B":[1,-2,5]}"#);
    let o = pfchi(&["dualchi", "--curve", "y^2 = x^3 + x", "--q", "5"]);
    assert_eq!(stdout(&o), "4/5");
    let o = pfchi(&["dualchi", "--builtin", "projective-line", "--q", "7"]);
    assert_eq!(stdout(&o), "8/7");
    let o = pfchi(&["zeta", "--curve", "y^2 = x^3", "--q", "5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = pfchi(&["zeta", "--builtin", "no-such-thing", "--q", "5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn dual_chi_of_the_legendre_surface() {
    // 13 ≡ 1 (mod 4): q⁻² − 2q⁻¹ + 2 from the fitted zeta function
    let o = pfchi(&["dualchi", "--builtin", "legendre-surface", "--q", "13"]);
    assert_eq!(stdout(&o), "313/169");
}

#[test]
fn verify_suites() {
    let o = pfchi(&["verify", "--suite", "trace-count", "--q-max", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).ends_with("0 failed: pass"));
    let o = pfchi(&["verify", "--suite", "trace-count-p", "--q-max", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = pfchi(&["verify", "--suite", "axioms", "--q-max", "5", "--size", "6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = pfchi(&["--output", "csv", "verify", "--suite", "p-divisibility", "--q-max", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("modulus,check,lhs,rhs,pass"));
}

#[test]
fn field_info() {
    let o = pfchi(&["--output", "json", "field", "--q", "9", "--n", "2"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!((v["p"].as_u64(), v["degree"].as_u64()), (Some(3), Some(4)));
    assert_eq!(pfchi(&["field", "--q", "12"]).status.code(), Some(2));
}
