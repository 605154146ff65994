//! Acceptance criteria 1-10. Runs without the libtest harness so that every
//! criterion prints one line whether or not it passes; exits non-zero if any fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use mplab_core::boundary::{barrier_sweep, equivalence_advisory, fichera_classify, Advisory, ComponentVerdict, FicheraStatus};
use mplab_core::certify::{best_lambda, verify, CertExpr, Certificate};
use mplab_core::domains::{Domain, Field, Grid};
use mplab_core::eigen::{blowup_eigenvalue, mu1_estimate, viscous_eigenvalue, BlowupOptions, EigenEstimate};
use mplab_core::lab::{self, Command, FixtureVerdict, RunConfig};
use mplab_core::mp::{mp_test, witness_check};
use mplab_core::operators::{check_degenerate_ellipticity, check_homogeneity, lookup, zoo, OperatorSpec};
use mplab_core::scheme::DiscreteScheme;

type Outcome = Result<String, String>;

const H1: f64 = 1.0 / 400.0;
const EPS_1D: [f64; 3] = [0.2, 0.1, 0.05];
const H2: f64 = 1.0 / 20.0;
const EPS_2D: [f64; 3] = [0.4, 0.2, 0.1];

fn entry(name: &str) -> (OperatorSpec, Domain) {
    let e = lookup(name).unwrap();
    (e.spec, e.domain_default)
}

fn scheme(name: &str, h: f64) -> DiscreteScheme {
    let (spec, domain) = entry(name);
    DiscreteScheme::new(spec, Arc::new(Grid::new(&domain, h).unwrap())).unwrap()
}

fn resolution(name: &str) -> (f64, &'static [f64]) {
    if entry(name).0.dim == 2 {
        (H2, &EPS_2D)
    } else {
        (H1, &EPS_1D)
    }
}

fn mu1(name: &str) -> EigenEstimate {
    let (spec, domain) = entry(name);
    let (h, eps) = resolution(name);
    mu1_estimate(&spec, &domain, h, eps, &BlowupOptions::default()).unwrap()
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_1() -> Outcome {
    let (spec, domain) = entry("half-drift-minus-identity");
    let mut detail = Vec::new();
    let mut ok = true;
    for n in [4.0, 22.0] {
        let best = best_lambda(&Certificate::new(CertExpr::Power { n }), &spec, &domain, 10_000).unwrap();
        ok &= (best - (n / 2.0 - 1.0)).abs() <= 1e-9;
        detail.push(format!("best_lambda(x^{n}) = {best}"));
    }
    let s = scheme("half-drift-minus-identity", H1);
    let cap = 1.0;
    let v = mp_test(&s, cap, 1e-3 * cap).unwrap();
    let w = v.witness.as_ref();
    ok &= !v.holds && w.is_some_and(|w| w.positive_part() > 0.1 * cap);
    let bump = Field::from_fn(s.grid().clone(), |x| x[0] * (1.0 - x[0]));
    let bump_ok = witness_check(&s, &bump, s.default_tol()).ok;
    ok &= bump_ok;
    detail.push(format!("mp holds = {}, witness max = {}, x(1-x) check = {bump_ok}", v.holds, v.max_positive_part));
    ensure(ok, detail.join("; "))
}

fn criterion_2() -> Outcome {
    let (spec, domain) = entry("double-drift");
    let mut ok = true;
    let mut detail = Vec::new();
    for eps in EPS_1D {
        let e = viscous_eigenvalue(&spec, &domain, H1, eps, &BlowupOptions::default()).unwrap();
        ok &= e.value >= 0.9;
        detail.push(format!("viscous({eps}) = {:.4}", e.value));
    }
    let m = mu1("double-drift");
    ok &= m.value <= 0.05;
    detail.push(format!("mu1 = {:.4}", m.value));
    let s = scheme("double-drift", H1);
    let v = mp_test(&s, 1.0, 1e-3).unwrap();
    let concentrated = v.witness.as_ref().is_some_and(|w| {
        let top = w.argmax();
        let rest = (0..w.values.len()).filter(|&i| i != top).map(|i| w.values[i]).fold(0.0, f64::max);
        s.grid().x(top)[0] == 0.0 && rest <= 0.1 * w.values[top]
    });
    ok &= !v.holds && concentrated;
    detail.push(format!("mp holds = {}, witness at x = 0: {concentrated}", v.holds));
    ensure(ok, detail.join("; "))
}

fn criterion_3() -> Outcome {
    let (sqrt_drift, unit) = entry("sqrt-drift");
    let (diffusion, _) = entry("degenerate-diffusion");
    let a = verify(&Certificate::new(CertExpr::TwoMinusSqrt), &sqrt_drift, &unit, 0.25, 10_000).unwrap();
    let b = verify(&Certificate::new(CertExpr::OnePlusSqrt), &diffusion, &unit, 0.125, 10_000).unwrap();
    let best = best_lambda(&Certificate::new(CertExpr::TwoMinusSqrt), &sqrt_drift, &unit, 10_000).unwrap();
    ensure(
        a.margin >= 0.0 && b.margin >= 0.0 && (best - 0.25).abs() <= 1e-6,
        format!("margins {:e}, {:e}; best_lambda(2 - sqrt x) = {best}", a.margin, b.margin),
    )
}

fn criterion_4() -> Outcome {
    let a = mu1("linear-drift");
    let b = mu1("quadratic-drift");
    let fa = lab::run_fixture("consistency-linear-drift", Default::default()).unwrap();
    let fb = lab::run_fixture("consistency-quadratic-drift", Default::default()).unwrap();
    ensure(
        a.value.abs() <= 0.05
            && b.value.abs() <= 0.05
            && fa.verdict == FixtureVerdict::BoundaryCase
            && fb.verdict == FixtureVerdict::BoundaryCase,
        format!(
            "mu1(-xu') = {:.4}, mu1(x^2u') = {:.4}; consistency verdicts `{}`, `{}`",
            a.value,
            b.value,
            fa.verdict.as_str(),
            fb.verdict.as_str()
        ),
    )
}

fn criterion_5() -> Outcome {
    let pi2 = PI * PI;
    let opts = BlowupOptions::default();
    let b1 = blowup_eigenvalue(&scheme("neg-laplacian-1d", H1), &opts).unwrap().value;
    let m1 = mu1("neg-laplacian-1d");
    let mut oracle_gap: f64 = 0.0;
    for r in &m1.diagnostics.table {
        oracle_gap = oracle_gap.max((r.value - pi2 / (1.0 + 2.0 * r.eps).powi(2)).abs() / pi2);
    }
    let b2 = blowup_eigenvalue(&scheme("neg-laplacian-2d", 1.0 / 80.0), &opts).unwrap().value;
    let e1 = (b1 - pi2).abs() / pi2;
    let em = (m1.value - pi2).abs() / pi2;
    let e2 = (b2 - 2.0 * pi2).abs() / (2.0 * pi2);
    ensure(
        e1 <= 0.02 && em <= 0.03 && e2 <= 0.03,
        format!(
            "1D blowup {b1:.4} ({:.2}%), mu1 {:.4} ({:.2}%, per-eps vs closed form within {:.2}%), 2D blowup {b2:.4} ({:.2}%)",
            100.0 * e1,
            m1.value,
            100.0 * em,
            100.0 * oracle_gap,
            100.0 * e2
        ),
    )
}

const CONSISTENCY: [&str; 7] = [
    "neg-laplacian-1d",
    "helmholtz-shift",
    "half-drift-minus-identity",
    "double-drift",
    "grushin-2",
    "neg-p1-2d",
    "eikonal-absorbing",
];

fn criterion_6() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for name in CONSISTENCY {
        let m = mu1(name);
        let v = mp_test(&scheme(name, resolution(name).0), 1.0, 1e-3).unwrap();
        let word = if m.lambda_lo > 0.0 {
            ok &= v.holds;
            "positive"
        } else if m.lambda_hi < 0.0 {
            ok &= !v.holds;
            "negative"
        } else {
            "undecided"
        };
        detail.push(format!("{name}: mu1 {word}, mp {}", if v.holds { "holds" } else { "fails" }));
    }
    ensure(ok, detail.join("; "))
}

fn criterion_7() -> Outcome {
    let tol = 0.05;
    let (spec, domain) = entry("neg-laplacian-1d");
    let grid = Arc::new(Grid::new(&domain, H1).unwrap());
    let opts = BlowupOptions { tol, ..BlowupOptions::default() };
    let base = blowup_eigenvalue(&DiscreteScheme::new(spec.clone(), grid.clone()).unwrap(), &opts).unwrap().value;
    let shifted = blowup_eigenvalue(&DiscreteScheme::new(spec.shift(5.0), grid).unwrap(), &opts).unwrap().value;
    let gap = (shifted - (base + 5.0)).abs();
    ensure(gap <= 2.0 * tol, format!("shifted {shifted:.4}, base + 5 = {:.4}, gap {gap:.2e}", base + 5.0))
}

fn criterion_8() -> Outcome {
    use ComponentVerdict::*;
    let table = [
        ("double-drift", [AllViolated, AllSatisfied]),
        ("linear-drift", [AllViolated, AllSatisfied]),
        ("neg-laplacian-1d", [AllSatisfied, AllSatisfied]),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, expected) in table {
        let (spec, domain) = entry(name);
        let r = fichera_classify(&spec, &domain, 64).unwrap();
        let got: Vec<ComponentVerdict> = r.components.iter().map(|c| c.verdict).collect();
        let band = domain.inradius() / 4.0;
        let barriers = r
            .samples
            .iter()
            .filter(|s| s.status == FicheraStatus::Satisfied)
            .all(|s| barrier_sweep(&spec, &domain, &s.xi, band, 200).unwrap().verified);
        let advisory = equivalence_advisory(&r);
        ok &= got == expected && barriers && advisory == Advisory::Mu1EqualsLambdaBar;
        detail.push(format!(
            "{name}: {} / barriers {barriers} / {}",
            got.iter().map(|v| v.as_str()).collect::<Vec<_>>().join(","),
            advisory.as_str()
        ));
    }
    ensure(ok, detail.join("; "))
}

fn criterion_9() -> Outcome {
    let mut failures = Vec::new();
    for e in zoo() {
        let ell = check_degenerate_ellipticity(&e.spec, 10_000, 1);
        let hom = check_homogeneity(&e.spec, 10_000, 1);
        if !ell.passed() || !hom.passed(1e-8) {
            failures.push(format!("{}: {} ellipticity violations, homogeneity error {:e}", e.name, ell.violation_count, hom.max_relative_error));
        }
        let s = DiscreteScheme::new(e.spec.clone(), Arc::new(Grid::new(&e.domain_default, e.default_h).unwrap())).unwrap();
        let m = s.check_monotonicity(1_000, 1);
        if !m.passed() {
            failures.push(format!("{}: {} monotonicity violations", e.name, m.violations));
        }
    }
    let mut fixtures: Vec<&str> = CONSISTENCY.to_vec();
    fixtures.extend(["linear-drift", "quadratic-drift"]);
    for name in &fixtures {
        let s = scheme(name, resolution(name).0);
        let a = mp_test(&s, 1.0, 1e-3).unwrap().holds;
        let b = mp_test(&s, 7.0, 7e-3).unwrap().holds;
        if a != b {
            failures.push(format!("{name}: cap 1 gives {a}, cap 7 gives {b}"));
        }
    }
    ensure(
        failures.is_empty(),
        if failures.is_empty() {
            format!("{} zoo operators sampled, {} fixtures cap-invariant", zoo().len(), fixtures.len())
        } else {
            failures.join("; ")
        },
    )
}

fn criterion_10() -> Outcome {
    let cfg = RunConfig { rng_seed: 11, ..RunConfig::default() };
    let a = lab::run(&cfg, Command::Paper).unwrap();
    let b = lab::run(&cfg, Command::Paper).unwrap();
    let dir = std::env::temp_dir().join(format!("mplab-acceptance-{}", std::process::id()));
    let pa = a.emit(lab::Format::Json, &dir.join("a"), "paper").unwrap();
    let pb = b.emit(lab::Format::Json, &dir.join("b"), "paper").unwrap();
    let same = std::fs::read(&pa[0]).unwrap() == std::fs::read(&pb[0]).unwrap();
    let _ = std::fs::remove_dir_all(&dir);
    ensure(
        same && a.to_deterministic_json().unwrap() == b.to_deterministic_json().unwrap(),
        format!("{} fixture records, byte-identical: {same}", a.records.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("lambda1 = +inf yet the MP fails", criterion_1),
        ("lambda* / mu1 sign split", criterion_2),
        ("sqrt certificates", criterion_3),
        ("knife-edge fixtures", criterion_4),
        ("sanity calibration", criterion_5),
        ("MP iff mu1 > 0 consistency", criterion_6),
        ("shift identity", criterion_7),
        ("Fichera fixtures", criterion_8),
        ("structural property suite", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(d) => println!("criterion {:>2} PASS  {name}: {d}", k + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {d}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
