use std::sync::Arc;

use mplab_core::certify::{best_lambda, verify, CertExpr, Certificate};
use mplab_core::domains::{Domain, Field, Grid};
use mplab_core::eigen::{blowup_eigenvalue, BlowupOptions};
use mplab_core::mp::{mp_test, witness_check};
use mplab_core::operators::lookup;
use mplab_core::scheme::DiscreteScheme;
use proptest::prelude::*;

const H: f64 = 1.0 / 100.0;

fn threshold(name: &str, domain: &Domain, shift: f64) -> (f64, f64) {
    let spec = lookup(name).unwrap().spec.shift(shift);
    let s = DiscreteScheme::new(spec, Arc::new(Grid::new(domain, H).unwrap())).unwrap();
    let e = blowup_eigenvalue(&s, &BlowupOptions::default()).unwrap();
    (e.value, e.width())
}

fn fixture() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec!["neg-laplacian-1d", "helmholtz-shift", "half-drift-minus-identity", "double-drift", "eikonal-absorbing"])
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn shifting_the_operator_shifts_the_threshold(name in fixture(), lambda0 in -3.0..20.0f64) {
        let unit = Domain::interval(0.0, 1.0);
        let (base, w0) = threshold(name, &unit, 0.0);
        let (shifted, w1) = threshold(name, &unit, lambda0);
        prop_assert!((shifted - (base + lambda0)).abs() <= w0 + w1 + 1e-9, "{} vs {}", shifted, base + lambda0);
    }

    #[test]
    fn thresholds_decrease_with_the_domain(
        name in fixture(),
        a in 0.0..0.3f64,
        b in 0.7..1.0f64,
        grow in 0.05..0.3f64,
    ) {
        let (small, w0) = threshold(name, &Domain::interval(a, b), 0.0);
        let (large, w1) = threshold(name, &Domain::interval(a - grow, b + grow), 0.0);
        prop_assert!(large <= small + w0 + w1, "{} on the larger domain vs {}", large, small);
    }

    #[test]
    fn mp_verdict_does_not_depend_on_the_cap(
        name in prop::sample::select(vec!["neg-laplacian-1d", "half-drift-minus-identity", "double-drift", "linear-drift", "eikonal-absorbing"]),
        cap in 0.01..100.0f64,
    ) {
        let e = lookup(name).unwrap();
        let s = DiscreteScheme::new(e.spec, Arc::new(Grid::new(&e.domain_default, 1.0 / 50.0).unwrap())).unwrap();
        let base = mp_test(&s, 1.0, 1e-3).unwrap();
        let scaled = mp_test(&s, cap, 1e-3 * cap).unwrap();
        prop_assert_eq!(base.holds, scaled.holds);
        if let (Some(u), Some(v)) = (base.witness, scaled.witness) {
            for (x, y) in u.values.iter().zip(&v.values) {
                prop_assert!((x * cap - y).abs() <= 1e-6 * cap);
            }
        }
    }

    #[test]
    fn positive_multiples_of_a_witness_are_witnesses(t in 0.1..10.0f64) {
        let e = lookup("half-drift-minus-identity").unwrap();
        let s = DiscreteScheme::new(e.spec, Arc::new(Grid::new(&e.domain_default, 1.0 / 50.0).unwrap())).unwrap();
        let u = Field::from_fn(s.grid().clone(), |x| t * x[0] * (1.0 - x[0]));
        prop_assert!(witness_check(&s, &u, 1e-9).ok);
    }

    #[test]
    fn certificates_are_scale_invariant(
        t in 0.05..20.0f64,
        which in 0usize..4,
    ) {
        let (name, expr) = [
            ("half-drift-minus-identity", CertExpr::Power { n: 6.0 }),
            ("sqrt-drift", CertExpr::TwoMinusSqrt),
            ("degenerate-diffusion", CertExpr::OnePlusSqrt),
            ("helmholtz-shift", CertExpr::Constant { c: 2.0 }),
        ][which].clone();
        let e = lookup(name).unwrap();
        let cert = Certificate::new(expr);
        let best = best_lambda(&cert, &e.spec, &e.domain_default, 400).unwrap();
        let best_t = best_lambda(&cert.clone().scaled(t), &e.spec, &e.domain_default, 400).unwrap();
        prop_assert!((best - best_t).abs() <= 1e-9 * (1.0 + best.abs()));
        let m = verify(&cert, &e.spec, &e.domain_default, best - 0.01, 400).unwrap();
        let m_t = verify(&cert.scaled(t), &e.spec, &e.domain_default, best - 0.01, 400).unwrap();
        prop_assert_eq!(m.valid, m_t.valid);
        prop_assert!((m_t.margin - t * m.margin).abs() <= 1e-9 * t * (1.0 + m.margin.abs()));
    }
}
