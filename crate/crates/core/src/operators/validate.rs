//! Randomized checks of degenerate ellipticity and homogeneity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Jet, OperatorSpec, Side, MAX_DIM};

/// At most this many violations are kept verbatim; the rest are only counted.
const KEPT_VIOLATIONS: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticityViolation {
    pub x: Vec<f64>,
    pub r: f64,
    pub p: Vec<f64>,
    /// `F(x,r,p,X+Y) - F(x,r,p,X)`, positive when violated.
    pub increase: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticityReport {
    pub operator: String,
    pub samples: usize,
    pub violation_count: usize,
    pub violations: Vec<EllipticityViolation>,
}

impl EllipticityReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityReport {
    pub operator: String,
    pub alpha: f64,
    pub samples: usize,
    pub max_relative_error: f64,
}

impl HomogeneityReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_relative_error <= tol
    }
}

fn random_jet(spec: &OperatorSpec, rng: &mut ChaCha8Rng) -> Jet {
    let n = spec.dim;
    let mut jet = Jet::zero(n);
    for i in 0..n {
        let (lo, hi) = spec.sample_box.get(i).copied().unwrap_or((-1.0, 1.0));
        jet.x[i] = rng.random_range(lo..=hi);
        jet.p[i] = rng.random_range(-2.0..2.0);
    }
    jet.r = rng.random_range(-2.0..2.0);
    jet.with_hess_sym(|_, _| rng.random_range(-2.0..2.0))
}

/// Draws jets and PSD increments `Y = M^T M` and checks `F(X+Y) <= F(X) + tol`.
pub fn check_degenerate_ellipticity(spec: &OperatorSpec, samples: usize, rng_seed: u64) -> EllipticityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let n = spec.dim;
    let mut report = EllipticityReport {
        operator: spec.name.clone(),
        samples,
        violation_count: 0,
        violations: Vec::new(),
    };
    for _ in 0..samples.max(1) {
        let jet = random_jet(spec, &mut rng);
        let mut m = [[0.0; MAX_DIM]; MAX_DIM];
        for row in m.iter_mut().take(n) {
            for v in row.iter_mut().take(n) {
                *v = rng.random_range(-1.0..1.0);
            }
        }
        let mut bumped = jet;
        for i in 0..n {
            for j in 0..n {
                bumped.hess[i][j] += (0..n).map(|k| m[k][i] * m[k][j]).sum::<f64>();
            }
        }
        for side in [Side::Sub, Side::Super] {
            let f0 = spec.eval_unchecked(&jet, side);
            let f1 = spec.eval_unchecked(&bumped, side);
            let increase = f1 - f0;
            if increase > 1e-10 * (1.0 + f0.abs().max(f1.abs())) {
                report.violation_count += 1;
                if report.violations.len() < KEPT_VIOLATIONS {
                    report.violations.push(EllipticityViolation {
                        x: jet.point().to_vec(),
                        r: jet.r,
                        p: jet.p[..n].to_vec(),
                        increase,
                    });
                }
                break;
            }
        }
    }
    report
}

/// Checks `F(tau jet) = tau^alpha F(jet)` for `tau` in `(0, 10]`.
pub fn check_homogeneity(spec: &OperatorSpec, samples: usize, rng_seed: u64) -> HomogeneityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples.max(1) {
        let jet = random_jet(spec, &mut rng);
        let tau: f64 = 10.0 * (1.0 - rng.random::<f64>());
        let scale = tau.powf(spec.alpha);
        let base = spec.eval_unchecked(&jet, Side::Sub);
        let scaled = spec.eval_unchecked(&jet.scaled(tau), Side::Sub);
        let err = (scaled - scale * base).abs() / (1.0 + base.abs() * scale);
        worst = worst.max(err);
    }
    HomogeneityReport { operator: spec.name.clone(), alpha: spec.alpha, samples, max_relative_error: worst }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::operators::zoo;

    #[test]
    fn laplacian_passes_and_its_negation_fails() {
        let lap = OperatorSpec::linear_from_strs("lap", 1, &["1"], &["0"], "0").unwrap();
        assert!(check_degenerate_ellipticity(&lap, 10_000, 1).passed());
        let rep = check_degenerate_ellipticity(&lap.negate(), 1000, 1);
        assert!(rep.violation_count > 0);
        assert!(rep.violations.len() <= KEPT_VIOLATIONS);
    }

    #[test]
    fn eikonal_with_wrong_degree_fails() {
        let e = OperatorSpec::eikonal("e", 1, Expr::Const(1.0), Expr::Const(1.0));
        assert!(check_homogeneity(&e, 1000, 3).passed(1e-8));
        assert!(!check_homogeneity(&e.with_alpha(2.0), 1000, 3).passed(1e-8));
    }

    #[test]
    fn linear_homogeneity_is_tight() {
        let f = OperatorSpec::linear_from_strs("l", 2, &["1", "x", "x", "2"], &["y", "1"], "x*y").unwrap();
        assert!(check_homogeneity(&f, 1000, 5).max_relative_error <= 1e-12);
    }

    #[test]
    fn every_zoo_operator_passes_both() {
        for e in zoo() {
            let ell = check_degenerate_ellipticity(&e.spec, 2000, 11);
            assert!(ell.passed(), "{}: {:?}", e.name, ell.violations.first());
            let hom = check_homogeneity(&e.spec, 2000, 11);
            assert!(hom.passed(1e-8), "{}: {}", e.name, hom.max_relative_error);
        }
    }

    #[test]
    fn reports_are_seed_deterministic() {
        let f = OperatorSpec::p_laplacian(1, 3.0).unwrap();
        assert_eq!(check_homogeneity(&f, 100, 9), check_homogeneity(&f, 100, 9));
    }
}
