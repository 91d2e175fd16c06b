use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use pfchi::euler::{chi_hat_formula, chi_hat_spec, corpus, verify_axioms, EulerError, Report};
use pfchi::geometry::{builtin, count_elliptic, ConstructibleSpec, GeometryError, Weierstrass};
use pfchi::gf::{prime_power, GfError};
use pfchi::logic::{count_mod, count_solutions, evaluate_sentence, parse, EvalError, Formula, ParseError, Tower};
use pfchi::padic::{dual_chi, p_power_divisibility, principal_chi, PadicError};
use pfchi::torsion::{verify_trace_count, verify_trace_count_p, TorsionError};
use pfchi::zeta::{feasible_degree, fit_curve_lpoly, fit_rational_zeta_with, CountSeries, FitOptions, ZetaData, ZetaError};

#[derive(Parser)]
#[command(name = "pfchi", version, about = "Counts, zeta functions and mod-n Euler characteristics over finite fields")]
struct Cli {
    /// Largest field or search space enumerated by brute force.
    #[arg(long, global = true, env = "PFCHI_BOUND")]
    bound: Option<u128>,
    #[arg(long, global = true, value_enum, default_value_t = Output::Text)]
    output: Output,
    /// Seed for randomized corpora.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a sentence, or count the solutions of a formula.
    Eval(EvalArgs),
    /// Fit the zeta function of a variety from its point counts.
    Zeta(VarietyArgs),
    /// Mod-n Euler characteristic of a variety or a formula.
    Chi(ChiArgs),
    /// Dual Euler characteristic of a variety, as an exact fraction.
    Dualchi(VarietyArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Describe the field tower used for F_{q^n}.
    Field(FieldArgs),
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    q: u64,
    #[arg(long, conflicts_with = "file", required_unless_present = "file")]
    formula: Option<String>,
    #[arg(long)]
    file: Option<PathBuf>,
    /// Free variables with their sorts, e.g. `x:K1,y:K2`.
    #[arg(long, value_delimiter = ',')]
    free: Vec<String>,
    #[arg(long)]
    count_mod: Option<u64>,
}

#[derive(Args)]
struct VarietyArgs {
    #[arg(long)]
    q: u64,
    /// legendre-surface, gm, affine-line or projective-line.
    #[arg(long, group = "variety")]
    builtin: Option<String>,
    /// A Weierstrass equation in x and y, e.g. `y^2 = x^3 + x`.
    #[arg(long, group = "variety")]
    curve: Option<String>,
    /// A constructible set in the text format.
    #[arg(long, group = "variety")]
    file: Option<PathBuf>,
    /// Fit an L-polynomial of this genus instead of a general rational function.
    #[arg(long)]
    genus: Option<usize>,
    /// Number of point counts N_1..N_n to use.
    #[arg(long)]
    counts_upto: Option<u32>,
    /// Bound on deg A + deg B for the rational fit.
    #[arg(long, default_value_t = 6)]
    degree_bound: usize,
    /// Counts beyond those the fit needs that must also be reproduced.
    #[arg(long, default_value_t = 0)]
    min_validation: usize,
}

#[derive(Args)]
struct ChiArgs {
    #[command(flatten)]
    variety: OptVariety,
    #[arg(long, value_delimiter = ',', required = true)]
    moduli: Vec<u64>,
    /// Reduce the count over F_q directly instead of going through the zeta function.
    #[arg(long)]
    direct: bool,
}

#[derive(Args)]
struct OptVariety {
    #[arg(long)]
    q: u64,
    #[arg(long, group = "source")]
    builtin: Option<String>,
    #[arg(long, group = "source")]
    curve: Option<String>,
    #[arg(long, group = "source")]
    file: Option<PathBuf>,
    #[arg(long, group = "source")]
    formula: Option<String>,
    #[arg(long, value_delimiter = ',')]
    free: Vec<String>,
    #[arg(long)]
    genus: Option<usize>,
    #[arg(long)]
    counts_upto: Option<u32>,
    #[arg(long, default_value_t = 6)]
    degree_bound: usize,
    #[arg(long, default_value_t = 0)]
    min_validation: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    /// Count against the Frobenius trace on 4-, 9- and 5-torsion.
    TraceCount,
    /// The same at the characteristic, over F_{p²}.
    TraceCountP,
    /// Euler characteristic axioms on a generated corpus.
    Axioms,
    /// p-adic divisibility of the L-polynomial at p^i.
    PDivisibility,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    /// Largest q in the sweep. The axiom corpus stops at 9; trace-count-p
    /// reads it as the largest p (at most 7) and works over F_{p²}.
    #[arg(long, default_value_t = 13)]
    q_max: u64,
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6,9")]
    moduli: Vec<u64>,
    /// Sets per field in the axiom corpus.
    #[arg(long, default_value_t = 18)]
    size: usize,
}

#[derive(Args)]
struct FieldArgs {
    #[arg(long)]
    q: u64,
    #[arg(long, default_value_t = 1)]
    n: u32,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Eval(String),
    #[error("{0}")]
    Resource(String),
    #[error("{0} check(s) failed")]
    Verification(usize),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 1,
            CliError::Eval(_) => 2,
            CliError::Resource(_) => 3,
            CliError::Verification(_) => 4,
        }
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<GfError> for CliError {
    fn from(e: GfError) -> Self {
        match e {
            GfError::TooLarge { .. } => CliError::Resource(e.to_string()),
            _ => CliError::Eval(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::TooLarge { .. } => CliError::Resource(e.to_string()),
            _ => CliError::Eval(e.to_string()),
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        use GeometryError::*;
        match e {
            Format { .. } | Parse(_) | UnknownVariable(_) | Frobenius | NotHomogeneous(_) | UnknownBuiltin(_) | Unsupported(_) => {
                CliError::Parse(e.to_string())
            }
            TooLarge { .. } => CliError::Resource(e.to_string()),
            SingularCurve | Field(_) => CliError::Eval(e.to_string()),
        }
    }
}

impl From<ZetaError> for CliError {
    fn from(e: ZetaError) -> Self {
        match e {
            ZetaError::Geometry(g) => g.into(),
            ZetaError::Overflow(_) => CliError::Resource(e.to_string()),
            _ => CliError::Eval(e.to_string()),
        }
    }
}

impl From<PadicError> for CliError {
    fn from(e: PadicError) -> Self {
        match e {
            PadicError::ModulusTooLarge(_) => CliError::Resource(e.to_string()),
            _ => CliError::Eval(e.to_string()),
        }
    }
}

impl From<EulerError> for CliError {
    fn from(e: EulerError) -> Self {
        match e {
            EulerError::Geometry(g) => g.into(),
            EulerError::Eval(v) => v.into(),
            _ => CliError::Eval(e.to_string()),
        }
    }
}

impl From<TorsionError> for CliError {
    fn from(e: TorsionError) -> Self {
        match e {
            TorsionError::TooLarge { .. } => CliError::Resource(e.to_string()),
            TorsionError::Geometry(g) => g.into(),
            _ => CliError::Eval(e.to_string()),
        }
    }
}

enum Variety {
    Curve(Weierstrass),
    Set(ConstructibleSpec),
}

struct FitParams {
    genus: Option<usize>,
    counts_upto: Option<u32>,
    degree_bound: usize,
    min_validation: usize,
}

fn load_variety(q: u64, builtin_name: Option<&str>, curve: Option<&str>, file: Option<&PathBuf>) -> Result<Variety, CliError> {
    if let Some(name) = builtin_name {
        return Ok(Variety::Set(builtin(name, q)?));
    }
    if let Some(eq) = curve {
        return Ok(Variety::Curve(Weierstrass::from_equation(eq, q)?));
    }
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        return Ok(Variety::Set(ConstructibleSpec::parse(&text)?.with_base(q)?));
    }
    Err(CliError::Parse("give one of --builtin, --curve or --file".into()))
}

fn fit(v: &Variety, q: u64, params: &FitParams) -> Result<ZetaData, CliError> {
    let bound = pfchi::enumeration_bound();
    let feasible = feasible_degree(q, 1, bound).min(8);
    match v {
        Variety::Curve(w) => {
            let genus = params.genus.unwrap_or(1);
            let upto = params.counts_upto.unwrap_or(feasible.min(4)).max(1);
            let counts = (1..=upto).map(|n| count_elliptic(w.a, q, n)).collect::<Result<Vec<_>, _>>()?;
            Ok(fit_curve_lpoly(&CountSeries::new(q, counts), genus)?)
        }
        Variety::Set(s) => {
            let upto = params.counts_upto.unwrap_or(feasible).max(1);
            let series = CountSeries::of_spec(s, upto)?;
            match params.genus {
                Some(g) => Ok(fit_curve_lpoly(&series, g)?),
                None => {
                    let opts = FitOptions { degree_bound: params.degree_bound, min_validation: params.min_validation };
                    Ok(fit_rational_zeta_with(&series, opts)?)
                }
            }
        }
    }
}

fn parse_free(free: &[String]) -> Result<Vec<(String, u32)>, CliError> {
    free.iter()
        .map(|item| {
            let bad = || CliError::Parse(format!("free variable {item:?} should look like x:K1"));
            let (name, sort) = item.split_once(':').ok_or_else(bad)?;
            let sort = sort.trim().strip_prefix('K').and_then(|n| n.parse::<u32>().ok()).filter(|&n| n >= 1).ok_or_else(bad)?;
            Ok((name.trim().to_string(), sort))
        })
        .collect()
}

fn emit(out: Output, text: String, value: Value) -> Result<(), CliError> {
    match out {
        Output::Text => println!("{text}"),
        Output::Json => println!("{value}"),
        Output::Csv => match &value {
            Value::Object(map) => {
                println!("key,value");
                for (k, v) in map {
                    println!("{k},{}", v.to_string().replace(',', ";"));
                }
            }
            other => println!("value\n{other}"),
        },
    }
    Ok(())
}

fn emit_report(out: Output, report: &Report) -> Result<(), CliError> {
    match out {
        Output::Json => println!("{}", json!({ "pass": report.passed(), "records": serde_json::from_str::<Value>(&report.to_json()).expect("report JSON") })),
        Output::Csv => {
            println!("modulus,check,lhs,rhs,pass");
            for r in &report.records {
                println!("{},\"{}\",{},{},{}", r.modulus, r.check.replace('"', "\"\""), r.lhs, r.rhs, r.pass);
            }
        }
        Output::Text => {
            for r in report.failures() {
                println!("FAIL mod {}: {} ({} vs {})", r.modulus, r.check, r.lhs, r.rhs);
            }
            let fails = report.failures().count();
            println!("{} checks, {} failed: {}", report.records.len(), fails, if fails == 0 { "pass" } else { "FAIL" });
        }
    }
    match report.failures().count() {
        0 => Ok(()),
        n => Err(CliError::Verification(n)),
    }
}

fn formula_from(formula: Option<&str>, file: Option<&PathBuf>) -> Result<Formula, CliError> {
    let text = match (formula, file) {
        (Some(t), _) => t.to_string(),
        (None, Some(path)) => std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?,
        (None, None) => return Err(CliError::Parse("give --formula or --file".into())),
    };
    Ok(parse(text.trim())?)
}

fn run_eval(a: &EvalArgs, out: Output) -> Result<(), CliError> {
    let f = formula_from(a.formula.as_deref(), a.file.as_ref())?;
    let free = parse_free(&a.free)?;
    let declared: std::collections::BTreeSet<String> = free.iter().map(|(n, _)| n.clone()).collect();
    if let Some(v) = f.free_vars().into_iter().find(|v| !declared.contains(v)) {
        return Err(CliError::Eval(format!("variable {v} is free but not declared with --free")));
    }
    match (free.is_empty(), a.count_mod) {
        (true, None) => {
            let t = evaluate_sentence(&f, a.q)?;
            emit(out, t.to_string(), json!({ "value": t }))
        }
        (_, Some(n)) => {
            let r = count_mod(&f, &free, a.q, n)?;
            emit(out, r.to_string(), json!({ "modulus": n, "value": r }))
        }
        (false, None) => {
            let c = count_solutions(&f, &free, a.q)?;
            emit(out, c.to_string(), json!({ "count": c.to_string() }))
        }
    }
}

fn run_zeta(a: &VarietyArgs, out: Output) -> Result<(), CliError> {
    let v = load_variety(a.q, a.builtin.as_deref(), a.curve.as_deref(), a.file.as_ref())?;
    let params = FitParams { genus: a.genus, counts_upto: a.counts_upto, degree_bound: a.degree_bound, min_validation: a.min_validation };
    let z = fit(&v, a.q, &params)?;
    let value: Value = serde_json::from_str(&z.to_json()).expect("zeta JSON");
    emit(out, z.to_json(), value)
}

fn run_dualchi(a: &VarietyArgs, out: Output) -> Result<(), CliError> {
    let v = load_variety(a.q, a.builtin.as_deref(), a.curve.as_deref(), a.file.as_ref())?;
    let params = FitParams { genus: a.genus, counts_upto: a.counts_upto, degree_bound: a.degree_bound, min_validation: a.min_validation };
    let z = fit(&v, a.q, &params)?;
    let d = dual_chi(&z)?;
    let text = format!("{}/{}", d.numer(), d.denom());
    emit(out, text.clone(), json!({ "value": text }))
}

fn run_chi(a: &ChiArgs, out: Output) -> Result<(), CliError> {
    let v = &a.variety;
    if a.moduli.contains(&0) {
        return Err(CliError::Parse("moduli must be positive".into()));
    }
    let value = if let Some(text) = &v.formula {
        let f = parse(text)?;
        chi_hat_formula(&f, &parse_free(&v.free)?, v.q, &a.moduli)?
    } else {
        let variety = load_variety(v.q, v.builtin.as_deref(), v.curve.as_deref(), v.file.as_ref())?;
        if a.direct {
            match &variety {
                Variety::Set(s) => chi_hat_spec(s, &a.moduli)?,
                Variety::Curve(w) => pfchi::euler::EulerValue::from_count(count_elliptic(w.a, v.q, 1)?, &a.moduli)?,
            }
        } else {
            let params = FitParams { genus: v.genus, counts_upto: v.counts_upto, degree_bound: v.degree_bound, min_validation: v.min_validation };
            principal_chi(&fit(&variety, v.q, &params)?, &a.moduli)?
        }
    };
    let json: Value = serde_json::from_str(&value.to_json()).expect("chi JSON");
    emit(out, value.to_json(), json)
}

fn prime_powers(lo: u64, hi: u64, pred: impl Fn(u64, u32) -> bool) -> Vec<u64> {
    (lo..=hi).filter(|&q| prime_power(q).map(|(p, k)| pred(p, k)).unwrap_or(false)).collect()
}

fn short_curves(q: u64) -> Result<Vec<[i64; 5]>, CliError> {
    let (p, _) = prime_power(q)?;
    let mut out = Vec::new();
    // coefficients range over F_p so they can be passed as integers
    for a in 0..p as i64 {
        for b in 0..p as i64 {
            let c = [0, 0, 0, a, b];
            if (Weierstrass { a: c }).discriminant(p) != 0 {
                out.push(c);
            }
        }
    }
    Ok(out)
}

fn run_verify(a: &VerifyArgs, seed: u64, out: Output) -> Result<(), CliError> {
    let mut report = Report::default();
    match a.suite {
        Suite::TraceCount => {
            for q in prime_powers(5, a.q_max, |p, k| p >= 5 && k == 1) {
                for c in short_curves(q)? {
                    for (ell, k) in [(2, 2), (3, 2), (5, 1)] {
                        if q % ell != 0 {
                            report.extend(verify_trace_count(c, ell, k, q)?);
                        }
                    }
                }
            }
        }
        Suite::TraceCountP => {
            for p in prime_powers(3, a.q_max.min(7), |_, k| k == 1) {
                for c in short_curves(p)? {
                    report.extend(verify_trace_count_p(c, p, 2, p * p)?);
                }
            }
        }
        Suite::Axioms => {
            for q in prime_powers(2, a.q_max.min(9), |_, _| true) {
                let (sets, projections) = corpus(q, a.size, seed)?;
                report.extend(verify_axioms(&sets, &a.moduli, &projections)?);
            }
        }
        Suite::PDivisibility => {
            for p in prime_powers(3, a.q_max, |_, k| k == 1) {
                for c in short_curves(p)?.into_iter().take(4) {
                    let z = fit_curve_lpoly(&CountSeries::new(p, vec![count_elliptic(c, p, 1)?]), 1)?;
                    for i in [1u32, 2] {
                        // base change until q > p^{2i}
                        let z = z.base_change(2 * i + 1);
                        report.record(p, format!("divisibility at p^{i} for {c:?}"), p_power_divisibility(&z, p, i)?);
                    }
                }
            }
        }
    }
    emit_report(out, &report)
}

fn run_field(a: &FieldArgs, out: Output) -> Result<(), CliError> {
    let (p, k) = prime_power(a.q)?;
    let tower = Tower::new(a.q, a.n)?;
    let spec = tower.spec();
    let modulus = spec.modulus();
    let text = format!(
        "F_{}^{} = F_{p}[t]/(m), p = {p}, [F_q : F_p] = {k}, degree {} over F_p\nm = {}",
        a.q,
        a.n,
        spec.degree(),
        render_poly(modulus)
    );
    emit(out, text, json!({ "q": a.q, "n": a.n, "p": p, "k": k, "degree": spec.degree(), "modulus": modulus }))
}

fn render_poly(coeffs: &[u32]) -> String {
    let mut terms = Vec::new();
    for (e, &c) in coeffs.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let mono = match e {
            0 => String::new(),
            1 => "t".into(),
            _ => format!("t^{e}"),
        };
        terms.push(match (c, e) {
            (_, 0) => c.to_string(),
            (1, _) => mono,
            _ => format!("{c}*{mono}"),
        });
    }
    terms.join(" + ")
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(b) = cli.bound {
        if b == 0 {
            return Err(CliError::Parse("--bound must be at least 1".into()));
        }
        // the library reads the bound from the environment
        std::env::set_var("PFCHI_BOUND", b.to_string());
    }
    match &cli.command {
        Command::Eval(a) => run_eval(a, cli.output),
        Command::Zeta(a) => run_zeta(a, cli.output),
        Command::Chi(a) => run_chi(a, cli.output),
        Command::Dualchi(a) => run_dualchi(a, cli.output),
        Command::Verify(a) => run_verify(a, cli.seed, cli.output),
        Command::Field(a) => run_field(a, cli.output),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, CliError::Verification(_)) {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.code())
        }
    }
}
