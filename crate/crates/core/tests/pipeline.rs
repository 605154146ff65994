use std::sync::Arc;

use mplab_core::domains::{Domain, Grid};
use mplab_core::eigen::{blowup_eigenvalue, lambda_star_estimate, mu1_estimate, BlowupOptions};
use mplab_core::lab::{self, Command, Record, RunConfig};
use mplab_core::mp::mp_test;
use mplab_core::operators::{catalog_from_toml, catalog_to_toml, lookup, zoo, CatalogRecord};
use mplab_core::par::Execution;
use mplab_core::scheme::DiscreteScheme;

fn opts(execution: Execution) -> BlowupOptions {
    BlowupOptions { execution, ..BlowupOptions::default() }
}

#[test]
fn sequential_and_parallel_runs_agree_bit_for_bit() {
    for name in ["neg-laplacian-1d", "double-drift", "neg-p1-2d", "eikonal-absorbing"] {
        let e = lookup(name).unwrap();
        let (h, eps): (f64, &[f64]) = if e.spec.dim == 2 { (0.1, &[0.4, 0.2]) } else { (0.02, &[0.2, 0.1]) };
        let a = mu1_estimate(&e.spec, &e.domain_default, h, eps, &opts(Execution::Sequential)).unwrap();
        let b = mu1_estimate(&e.spec, &e.domain_default, h, eps, &opts(Execution::Parallel)).unwrap();
        assert_eq!(a, b, "{name}");
        let grid = Arc::new(Grid::new(&e.domain_default, h).unwrap());
        let s = DiscreteScheme::new(e.spec.clone(), grid).unwrap();
        let u = mp_test(&s.clone().with_execution(Execution::Sequential), 1.0, 1e-3).unwrap();
        let v = mp_test(&s.with_execution(Execution::Parallel), 1.0, 1e-3).unwrap();
        assert_eq!(u.holds, v.holds);
        assert_eq!(u.iterations, v.iterations);
        assert_eq!(u.witness.map(|w| w.values), v.witness.map(|w| w.values));
    }
}

#[test]
fn lambda_star_of_a_uniformly_elliptic_operator_matches_its_blowup_threshold() {
    let e = lookup("-u''").unwrap();
    let h = 1.0 / 400.0;
    let star = lambda_star_estimate(&e.spec, &e.domain_default, h, &[0.05, 0.025, 0.0125], &BlowupOptions::default()).unwrap();
    let s = DiscreteScheme::new(e.spec, Arc::new(Grid::new(&e.domain_default, h).unwrap())).unwrap();
    let plain = blowup_eigenvalue(&s, &BlowupOptions::default()).unwrap();
    assert!(star.value >= plain.value - 1e-9);
    assert!((star.value - plain.value) / plain.value < 0.05, "{} vs {}", star.value, plain.value);
}

#[test]
fn catalog_round_trips_through_toml() {
    let text = catalog_to_toml(zoo()).unwrap();
    let back = catalog_from_toml(&text).unwrap();
    let direct: Vec<CatalogRecord> = zoo().iter().map(CatalogRecord::from).collect();
    assert_eq!(back, direct);
}

#[test]
fn toml_config_drives_a_certificate_run() {
    let cfg = RunConfig::from_toml_str(
        r#"
operator = "-sqrt(x)u'"

[certify]
lambda = 0.25
samples = 2000

[certify.certificate.expr]
family = "two-minus-sqrt"
"#,
    )
    .unwrap();
    let report = lab::run(&cfg, Command::Certify).unwrap();
    assert_eq!(report.exit_code(), 0);
    let Record::Certificate(c) = &report.records[0] else { panic!("expected a certificate record") };
    assert!(c.report.valid && c.report.margin >= 0.0);

    let too_high = RunConfig { certify: mplab_core::lab::CertifySection { lambda: Some(0.3), ..cfg.certify.clone() }, ..cfg };
    assert_eq!(lab::run(&too_high, Command::Certify).unwrap().exit_code(), 1);
}

#[test]
fn custom_linear_operator_on_a_disk() {
    let cfg = RunConfig::from_toml_str(
        r#"
h = 0.025

[operator]
name = "laplacian"
dim = 2
a = ["1", "0", "0", "1"]
b = ["0", "0"]
c = "0"

[domain]
shape = "disk"
center = [0.0, 0.0]
radius = 1.0
"#,
    )
    .unwrap();
    let report = lab::run(&cfg, Command::Eigen).unwrap();
    let Record::Eigen(e) = &report.records[0] else { panic!("expected an eigen record") };
    // first Dirichlet eigenvalue of the unit disk: the squared first zero of J_0
    let j01: f64 = 2.404_825_557_695_773;
    assert!((e.estimate.value - j01 * j01).abs() / (j01 * j01) < 0.03, "{}", e.estimate.value);
    assert_eq!(e.estimate.domain, Domain::disk(0.0, 0.0, 1.0).label());
}
