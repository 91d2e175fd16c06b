//! End-to-end acceptance run. Prints one line per criterion and exits
//! nonzero if a criterion fails for a reason other than a stated target
//! that the independent oracles here contradict.

use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;

use pfchi::euler::{corpus, vandermonde_decompose, verify_axioms};
use pfchi::geometry::{builtin, count_elliptic, count_points, fiber_histogram, Weierstrass};
use pfchi::gf::{is_prime, prime_power};
use pfchi::logic::{evaluate_sentence, parity_free_sentence, parity_sentence};
use pfchi::padic::{dual_chi, p_power_divisibility, root_valuations, unit_part_residue};
use pfchi::torsion::{verify_trace_count, verify_trace_count_p};
use pfchi::zeta::{fit_curve_lpoly, fit_rational_zeta_with, power_sum, CountSeries, FitOptions, ZetaData};

enum Verdict {
    Pass,
    Fail,
    /// The stated target is contradicted by an independent count; the
    /// observed values were confirmed against that count instead.
    TargetRefuted,
}

struct Outcome {
    verdict: Verdict,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { verdict: if pass { Verdict::Pass } else { Verdict::Fail }, detail }
}

fn primes(lo: u64, hi: u64) -> Vec<u64> {
    (lo..=hi).filter(|&n| is_prime(n)).collect()
}

/// `χ(a)` for the quadratic character of `F_p`, by Euler's criterion.
fn legendre_symbol(a: i64, p: u64) -> i64 {
    let a = a.rem_euclid(p as i64) as u64;
    if a == 0 {
        return 0;
    }
    let (mut base, mut e, mut acc) = (a as u128, (p - 1) / 2, 1u128);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p as u128;
        }
        base = base * base % p as u128;
        e >>= 1;
    }
    if acc == 1 {
        1
    } else {
        -1
    }
}

/// `|{(x, y, λ) ∈ F_p³ : y² = x(x−1)(x−λ), λ ≠ 0, 1}|` by three nested loops.
fn legendre_brute(p: u64) -> u128 {
    let p = p as i64;
    let mut squares = vec![0u128; p as usize];
    for y in 0..p {
        squares[(y * y % p) as usize] += 1;
    }
    let mut n = 0;
    for lambda in 2..p {
        for x in 0..p {
            n += squares[(x * (x - 1) % p * (x - lambda)).rem_euclid(p) as usize];
        }
    }
    n
}

/// Projective points of `y² = x³ + ax + b` over `F_p` by direct loops.
fn short_weierstrass_brute(a: i64, b: i64, p: u64) -> u128 {
    let p = p as i64;
    let mut n = 1;
    for x in 0..p {
        for y in 0..p {
            if (y * y - x * x * x - a * x - b).rem_euclid(p) == 0 {
                n += 1;
            }
        }
    }
    n
}

fn curve_zeta(a: [i64; 5], q: u64) -> ZetaData {
    let n1 = count_elliptic(a, q, 1).expect("nonsingular curve counts");
    fit_curve_lpoly(&CountSeries::new(q, vec![n1]), 1).expect("a genus-1 fit from one count")
}

fn nonsingular(a: [i64; 5], q: u64) -> bool {
    let (p, _) = prime_power(q).unwrap();
    (Weierstrass { a }).discriminant(p) != 0
}

fn short_curves(p: u64) -> Vec<[i64; 5]> {
    let mut out = Vec::new();
    for a in 0..p as i64 {
        for b in 0..p as i64 {
            let c = [0, 0, 0, a, b];
            if nonsingular(c, p) {
                out.push(c);
            }
        }
    }
    out
}

/// Everything later criteria reuse.
#[derive(Default)]
struct Corpus {
    /// `(curve, zeta)` for the curves of the dual-characteristic and trace criteria.
    curves: Vec<([i64; 5], ZetaData)>,
    /// Fitted zeta functions of the Legendre surface.
    legendre: Vec<ZetaData>,
}

fn criterion_1() -> Outcome {
    let (mut bad, mut checked) = (Vec::new(), 0);
    for q in (2..=200).filter(|&q| prime_power(q).is_ok()) {
        let t = evaluate_sentence(&parity_sentence(), q);
        let t2 = evaluate_sentence(&parity_free_sentence(), q);
        checked += 1;
        match (t, t2) {
            (Ok(a), Ok(b)) if a == b && a == (q % 5 == 2) => {}
            other => bad.push(format!("q={q}: {other:?}")),
        }
    }
    outcome(bad.is_empty(), format!("{checked} prime powers, mismatches: {bad:?}"))
}

fn criterion_2() -> Outcome {
    let (mut stated_misses, mut oracle_misses, mut n) = (0, Vec::new(), 0);
    for q in primes(3, 100) {
        let s = builtin("legendre-surface", q).unwrap();
        let got = count_points(&s, 1).unwrap();
        let qq = (q * q) as i128;
        let stated = if legendre_symbol(-1, q) == 1 { qq - q as i128 } else { qq - q as i128 - 2 };
        let brute = legendre_brute(q);
        let closed = qq - 2 * q as i128 + 1 + legendre_symbol(-1, q) as i128;
        n += 1;
        if got as i128 != stated {
            stated_misses += 1;
        }
        if got != brute || brute as i128 != closed {
            oracle_misses.push(q);
        }
    }
    let detail = format!(
        "{n} primes; stated q²−q / q²−q−2 matched at {} of {n}; library = triple-loop count = q²−2q+1+χ(−1) at all but {oracle_misses:?} (e.g. q=5: 17)",
        n - stated_misses
    );
    match (stated_misses, oracle_misses.is_empty()) {
        (0, true) => outcome(true, detail),
        (_, true) => Outcome { verdict: Verdict::TargetRefuted, detail },
        _ => outcome(false, detail),
    }
}

fn criterion_3(corpus: &mut Corpus) -> Outcome {
    // curves over fields up to 49, odd and even characteristic
    let candidates: [(u64, [i64; 5]); 16] = [
        (5, [0, 0, 0, 1, 0]),
        (7, [0, 0, 0, 1, 3]),
        (11, [0, 0, 0, 2, 5]),
        (13, [0, 0, 0, 1, 1]),
        (17, [0, 0, 0, 3, 7]),
        (23, [1, 2, 3, 4, 5]),
        (31, [0, 0, 0, 0, 1]),
        (41, [0, 0, 0, 5, 0]),
        (47, [0, 0, 0, 1, 2]),
        (4, [1, 0, 0, 0, 1]),
        (8, [1, 1, 0, 0, 1]),
        (16, [0, 0, 1, 1, 0]),
        (9, [0, 1, 0, 0, 1]),
        (27, [0, 1, 0, 2, 1]),
        (25, [0, 0, 0, 1, 0]),
        (49, [0, 0, 0, 3, 1]),
    ];
    let mut bad = Vec::new();
    let mut used = 0;
    for (q, a) in candidates {
        if !nonsingular(a, q) {
            continue;
        }
        used += 1;
        let n = count_elliptic(a, q, 1).unwrap();
        if is_prime(q) && a[..3] == [0, 0, 0] && short_weierstrass_brute(a[3], a[4], q) != n {
            bad.push(format!("count q={q} {a:?}"));
        }
        let z = curve_zeta(a, q);
        let expect = BigRational::new(BigInt::from(n), BigInt::from(q));
        match dual_chi(&z) {
            Ok(v) if v == expect => {}
            other => bad.push(format!("q={q} {a:?}: {other:?} vs {expect}")),
        }
        corpus.curves.push((a, z));
    }
    let curves_ok = used >= 10 && bad.is_empty();

    // the Legendre surface
    let mut notes = Vec::new();
    let (mut stated_hits, mut true_hits, mut fitted) = (0, 0, 0);
    for q in [13u64, 17, 29, 37] {
        let s = builtin("legendre-surface", q).unwrap();
        let mut counts = Vec::new();
        for n in 1..=6 {
            match count_points(&s, n) {
                Ok(c) => counts.push(c),
                Err(_) => break,
            }
        }
        let opts = FitOptions { degree_bound: 6, min_validation: 0 };
        let z = match fit_rational_zeta_with(&CountSeries::new(q, counts.clone()), opts) {
            Ok(z) => z,
            Err(e) => {
                notes.push(format!("q={q}: not fitted from the {} counts the enumeration bound allows ({e}; raise PFCHI_BOUND to fit)", counts.len()));
                continue;
            }
        };
        fitted += 1;
        let d = dual_chi(&z).unwrap();
        let qi = BigRational::new(BigInt::from(1), BigInt::from(q));
        let two = BigRational::from_integer(BigInt::from(2));
        let base = &qi * &qi - &qi;
        let stated = if legendre_symbol(-1, q) == 1 { base.clone() } else { &base - &two };
        let actual = &qi * &qi - &qi - &qi + if legendre_symbol(-1, q) == 1 { two.clone() } else { BigRational::from_integer(0.into()) };
        if d == stated {
            stated_hits += 1;
        }
        if d == actual {
            true_hits += 1;
        }
        notes.push(format!("q={q}: {d} (stated {stated})"));
        corpus.legendre.push(z);
    }
    let detail = format!(
        "{used} curves with dual χ = N/q{}; Legendre: {}; stated formula held {stated_hits}/{fitted}, q⁻²−2q⁻¹+1+χ(−1) held {true_hits}/{fitted}",
        if bad.is_empty() { String::new() } else { format!(", failures {bad:?}") },
        notes.join("; ")
    );
    if curves_ok && stated_hits == fitted && fitted == 4 {
        outcome(true, detail)
    } else if curves_ok && true_hits == fitted && fitted > 0 {
        Outcome { verdict: Verdict::TargetRefuted, detail }
    } else {
        outcome(false, detail)
    }
}

fn criteria_4_and_6(corpus: &mut Corpus) -> (Outcome, Outcome) {
    let (mut count_fail, mut det_fail, mut bases, mut errors) = (0, 0, 0, Vec::new());
    for q in [5u64, 7, 11, 13] {
        for c in short_curves(q) {
            for (ell, k) in [(2u64, 2u32), (3, 2), (5, 1)] {
                if q % ell == 0 {
                    continue;
                }
                match verify_trace_count(c, ell, k, q) {
                    Ok(r) => {
                        bases += 1;
                        count_fail += r.failures().filter(|x| x.check.starts_with("count") || x.check.starts_with("trace")).count();
                        det_fail += r.failures().filter(|x| x.check.starts_with("det")).count();
                    }
                    Err(e) => errors.push(format!("{c:?} F_{q} {ell}^{k}: {e}")),
                }
            }
            corpus.curves.push((c, curve_zeta(c, q)));
        }
    }
    let c4 = outcome(count_fail == 0 && errors.is_empty(), format!("{bases} torsion bases, {count_fail} congruence failures, errors {errors:?}"));
    let c6 = outcome(det_fail == 0 && errors.is_empty(), format!("{bases} determinants, {det_fail} ≢ q"));
    (c4, c6)
}

fn criterion_5() -> Outcome {
    let (mut ordinary, mut supersingular, mut fails, mut errors) = (0, 0, Vec::new(), Vec::new());
    for p in [3u64, 5, 7] {
        for c in short_curves(p) {
            match verify_trace_count_p(c, p, 2, p * p) {
                Ok(r) => {
                    if r.records.iter().any(|x| x.check.starts_with("supersingular")) {
                        supersingular += 1;
                    } else {
                        ordinary += 1;
                    }
                    fails.extend(r.failures().map(|x| format!("{c:?} p={p}: {}", x.check)));
                }
                Err(e) => errors.push(format!("{c:?} p={p}: {e}")),
            }
        }
    }
    outcome(
        fails.is_empty() && errors.is_empty() && ordinary > 0 && supersingular > 0,
        format!("{ordinary} ordinary, {supersingular} supersingular over F_{{p²}}; failures {fails:?}, errors {errors:?}"),
    )
}

fn criterion_7(corpus: &Corpus) -> Outcome {
    let (mut checked, mut bad) = (0, Vec::new());
    for z in corpus.curves.iter().map(|(_, z)| z).chain(&corpus.legendre) {
        for ell in primes(2, 19).into_iter().filter(|ell| z.q % ell != 0) {
            for poly in [&z.a, &z.b] {
                let np = root_valuations(poly, ell).unwrap();
                checked += 1;
                if np.unit_count() != np.slopes.len() {
                    bad.push(format!("q={} ℓ={ell} {poly:?}", z.q));
                }
            }
        }
    }
    outcome(bad.is_empty(), format!("{checked} Newton polygons, non-unit slopes: {bad:?}"))
}

fn criterion_8() -> Outcome {
    let (mut ordinary, mut supersingular, mut bad) = (0, 0, Vec::new());
    for p in [3u64, 5, 7, 11, 13] {
        for c in short_curves(p) {
            let z = curve_zeta(c, p);
            let trace = -z.b[1];
            let is_ordinary = trace.rem_euclid(p as i64) != 0;
            if (is_ordinary && ordinary >= 8) || (!is_ordinary && supersingular >= 6) {
                continue;
            }
            for i in [1u32, 2] {
                let zb = z.base_change(2 * i + 1);
                match p_power_divisibility(&zb, p, i) {
                    Ok(true) => {}
                    other => bad.push(format!("{c:?} p={p} i={i}: {other:?}")),
                }
            }
            if is_ordinary {
                ordinary += 1;
            } else {
                supersingular += 1;
            }
        }
    }
    outcome(bad.is_empty() && ordinary >= 5 && supersingular >= 3, format!("{ordinary} ordinary, {supersingular} supersingular, i ∈ {{1, 2}}; failures {bad:?}"))
}

fn criterion_9() -> Outcome {
    let moduli = [2u64, 3, 4, 5, 6, 9];
    let (mut sets, mut records, mut fails, mut decomps, mut bad) = (0, 0, Vec::new(), 0, Vec::new());
    for q in [3u64, 5, 7] {
        let (corpus, projections) = corpus(q, 18, 0).unwrap();
        sets += corpus.len();
        let report = verify_axioms(&corpus, &moduli, &projections).unwrap();
        records += report.records.len();
        fails.extend(report.failures().map(|r| format!("q={q} mod {}: {}", r.modulus, r.check)));
        for pr in &projections {
            let s = &corpus[pr.set];
            match vandermonde_decompose(s, &pr.base) {
                Ok(d) => {
                    decomps += 1;
                    let hist = fiber_histogram(s, &pr.base, 1).unwrap();
                    let image: u128 = hist.iter().filter(|(k, _)| **k > 0).map(|(_, v)| v).sum();
                    if d.total != count_points(s, 1).unwrap() || d.image != image {
                        bad.push(format!("q={q} set {}", pr.set));
                    }
                }
                Err(e) => bad.push(format!("q={q} set {}: {e}", pr.set)),
            }
        }
    }
    outcome(
        fails.is_empty() && bad.is_empty() && sets >= 50,
        format!("{sets} sets, {records} axiom checks, {decomps} decompositions; failures {fails:?} {bad:?}"),
    )
}

fn criterion_10(corpus: &Corpus) -> Outcome {
    let (mut checked, mut bad) = (0, Vec::new());
    let fits_bound = |q: u64, n: u32| (q as u128).checked_pow(2 * n).is_some_and(|v| v <= 10_000_000);
    for (a, z) in &corpus.curves {
        for n in (1..).take_while(|&n| fits_bound(z.q, n)) {
            let count = count_elliptic(*a, z.q, n).unwrap();
            checked += 1;
            if power_sum(z, n as usize) != BigInt::from(count) {
                bad.push(format!("{a:?} q={} n={n}", z.q));
            }
        }
    }
    for z in &corpus.legendre {
        let s = builtin("legendre-surface", z.q).unwrap();
        for n in (1..).take_while(|&n| fits_bound(z.q, n)) {
            checked += 1;
            if power_sum(z, n as usize) != BigInt::from(count_points(&s, n).unwrap()) {
                bad.push(format!("Legendre q={} n={n}", z.q));
            }
        }
        if power_sum(z, 1) != BigInt::from(legendre_brute(z.q)) {
            bad.push(format!("Legendre q={} vs triple loop", z.q));
        }
    }
    outcome(bad.is_empty(), format!("{checked} predicted counts; mismatches {bad:?}"))
}

fn criterion_11(corpus: &Corpus) -> Outcome {
    let (mut checked, mut bad) = (0, Vec::new());
    let moduli: Vec<(u64, u32)> = primes(2, 19).into_iter().map(|l| (l, 1)).chain([(2, 2), (2, 3), (3, 2), (5, 2), (7, 2)]).collect();
    for z in corpus.curves.iter().map(|(_, z)| z).chain(&corpus.legendre) {
        for &(ell, k) in &moduli {
            checked += 1;
            if let Err(e) = unit_part_residue(z, ell, k) {
                bad.push(format!("q={} {ell}^{k}: {e}", z.q));
            }
        }
    }
    outcome(bad.is_empty(), format!("{checked} residues, t = 1, 2, 3 disagreements: {bad:?}"))
}

fn main() -> ExitCode {
    let mut corpus = Corpus::default();
    let mut lines = Vec::new();
    let mut run = |id: &str, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        let secs = t.elapsed().as_secs_f64();
        let tag = match o.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::TargetRefuted => "FAIL (stated target refuted by independent count)",
        };
        println!("criterion {id:>2} {name}: {tag} [{secs:.1}s] {}", o.detail);
        lines.push(o.verdict);
    };
    run("1", "parity elimination", &mut criterion_1);
    run("2", "Legendre count formula", &mut criterion_2);
    run("3", "dual Euler characteristic", &mut || criterion_3(&mut corpus));
    // the determinants come out of the same torsion bases, so 6 reports 4's time
    let mut c6 = None;
    run("4", "trace congruence", &mut || {
        let (c4, det) = criteria_4_and_6(&mut corpus);
        c6 = Some(det);
        c4
    });
    run("5", "bad-characteristic congruence", &mut criterion_5);
    run("6", "determinant law", &mut || c6.take().unwrap());
    run("7", "unit slopes", &mut || criterion_7(&corpus));
    run("8", "p-adic divisibility at p^i", &mut criterion_8);
    run("9", "Euler axioms", &mut criterion_9);
    run("10", "zeta round trip", &mut || criterion_10(&corpus));
    run("11", "stabilization soundness", &mut || criterion_11(&corpus));
    if lines.iter().any(|v| matches!(v, Verdict::Fail)) {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
