//! Discrete maximum principle via the maximal subsolution below a cap.
//!
//! Starting from `u = cap` on free nodes, each Jacobi sweep lowers every node
//! to the largest `r` in `[0, u_i]` that satisfies its subsolution constraint
//! against the previous iterate. For a monotone scheme with `S(0) = 0`, `r = 0`
//! is always admissible, the sweeps never increase `u`, and the limit is the
//! largest discrete subsolution below the cap. The MP holds when that limit
//! vanishes.

use serde::{Deserialize, Serialize};

use crate::domains::{Field, NodeClass};
use crate::eigen;
use crate::error::{Error, Result};
use crate::par;
use crate::scheme::{BoundaryClause, DiscreteScheme, Verdict};

/// Tolerance used when none is given, relative to the cap.
pub const DEFAULT_RELATIVE_TOL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MpOptions {
    pub cap: f64,
    /// Positive parts at or below `10 tol` count as zero.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for MpOptions {
    fn default() -> Self {
        MpOptions { cap: 1.0, tol: DEFAULT_RELATIVE_TOL, max_sweeps: 2_000_000 }
    }
}

#[derive(Clone, Debug)]
pub struct MPVerdict {
    pub holds: bool,
    /// The limit field, present when the MP fails.
    pub witness: Option<Field>,
    pub max_positive_part: f64,
    pub iterations: usize,
}

/// Largest `r` in `[0, hi]` with `g(r) <= 0`, given `g(0) <= 0 < g(hi)`.
fn largest_feasible(g: impl Fn(f64) -> f64, hi: f64, affine: bool) -> f64 {
    let (mut a, mut ga) = (0.0, g(0.0));
    let (mut b, mut gb) = (hi, g(hi));
    if !(ga <= 0.0) {
        return 0.0;
    }
    if affine {
        let r = (hi * (-ga) / (gb - ga)).clamp(0.0, hi);
        for k in 0..4 {
            let t = r * (1.0 - 4e-16 * f64::powi(8.0, k));
            if g(t) <= 0.0 {
                return t;
            }
        }
    }
    // Illinois regula falsi, keeping g(a) <= 0 < g(b)
    let mut side = 0;
    for _ in 0..200 {
        if b - a <= 1e-15 * hi {
            break;
        }
        let c = (a * gb - b * ga) / (gb - ga);
        let c = if c > a && c < b { c } else { 0.5 * (a + b) };
        let gc = g(c);
        if gc <= 0.0 {
            a = c;
            ga = gc;
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        } else {
            b = c;
            gb = gc;
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        }
    }
    a
}

fn descend(s: &DiscreteScheme, i: usize, u: &[f64]) -> f64 {
    let grid = s.grid();
    let hi = u[i];
    if !grid.is_free(i) || hi <= 0.0 {
        return 0.0;
    }
    let band = grid.class(i) != NodeClass::Interior;
    if band && s.boundary_clause == BoundaryClause::StrictMax {
        return 0.0;
    }
    // for r > 0 the relaxed clause min(r, S) <= 0 reduces to S <= 0
    let vals = s.arm_values(i, u);
    let g = |r: f64| s.local_residual(i, r, &vals);
    if g(hi) <= 0.0 {
        return hi;
    }
    largest_feasible(g, hi, s.is_affine())
}

/// Decides the MP with explicit options. An exact solve at `λ = 0` settles the
/// holding case; otherwise the descent runs and yields the witness.
pub fn mp_test_with(s: &DiscreteScheme, opts: &MpOptions) -> Result<MPVerdict> {
    if !(opts.cap > 0.0 && opts.tol > 0.0 && opts.max_sweeps > 0) {
        return Err(Error::InvalidArgument(format!("invalid mp options {opts:?}")));
    }
    // a bounded solution of S(w) = 1 dominates every nonnegative subsolution:
    // at the maximum of u/w = t > 0, monotonicity gives S(u) >= t^α S(w) > 0
    if eigen::direct_feasibility(s, 0.0) == Some(true) {
        return Ok(MPVerdict { holds: true, witness: None, max_positive_part: 0.0, iterations: 0 });
    }
    descent(s, opts)
}

fn descent(s: &DiscreteScheme, opts: &MpOptions) -> Result<MPVerdict> {
    let grid = s.grid().clone();
    let n = grid.len();
    let mut u: Vec<f64> = (0..n).map(|i| if grid.is_free(i) { opts.cap } else { 0.0 }).collect();
    let mut next = vec![0.0; n];
    let threshold = 10.0 * opts.tol;
    for sweep in 1..=opts.max_sweeps {
        par::fill(s.execution, &mut next, |i| descend(s, i, &u));
        let mut change: f64 = 0.0;
        let mut max: f64 = 0.0;
        for i in 0..n {
            change = change.max(u[i] - next[i]);
            max = max.max(next[i]);
        }
        std::mem::swap(&mut u, &mut next);
        if max <= threshold {
            return Ok(MPVerdict { holds: true, witness: None, max_positive_part: max, iterations: sweep });
        }
        if change <= 1e-13 * opts.cap {
            return Ok(MPVerdict {
                holds: false,
                witness: Some(Field::new(grid, u)?),
                max_positive_part: max,
                iterations: sweep,
            });
        }
    }
    let max = u.iter().copied().fold(0.0, f64::max);
    Err(Error::NoConvergence {
        iterations: opts.max_sweeps,
        what: format!("maximal-subsolution descent for {} (current max {max:e})", s.spec().name),
    })
}

/// Decides the discrete MP from the maximal subsolution below `cap`.
pub fn mp_test(s: &DiscreteScheme, cap: f64, tol: f64) -> Result<MPVerdict> {
    mp_test_with(s, &MpOptions { cap, tol, ..MpOptions::default() })
}

/// Independent re-validation of a violation witness.
pub fn witness_check(s: &DiscreteScheme, u: &Field, tol: f64) -> Verdict {
    let mut v = s.is_subsolution(u, tol);
    v.ok = v.ok && u.max() > tol;
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{Domain, Grid};
    use crate::operators::lookup;
    use std::sync::Arc;

    fn scheme(name: &str, h: f64) -> DiscreteScheme {
        let e = lookup(name).unwrap();
        let grid = Arc::new(Grid::new(&e.domain_default, h).unwrap());
        DiscreteScheme::new(e.spec, grid).unwrap()
    }

    #[test]
    fn absorbing_laplacian_satisfies_mp() {
        let v = mp_test(&scheme("helmholtz-shift", 0.01), 1.0, 1e-3).unwrap();
        assert!(v.holds && v.witness.is_none() && v.max_positive_part <= 1e-2);
    }

    #[test]
    fn half_drift_fails_with_a_dominating_witness() {
        let s = scheme("half-drift-minus-identity", 0.01);
        let cap = 1.0;
        let v = mp_test(&s, cap, 1e-3).unwrap();
        assert!(!v.holds);
        let w = v.witness.unwrap();
        let tol = s.default_tol();
        assert!(witness_check(&s, &w, tol).ok);
        let grid = s.grid();
        for i in 0..grid.len() {
            let x = grid.x(i)[0];
            if grid.class(i) == NodeClass::Interior {
                assert!(w.values[i] + tol >= x * (1.0 - x) * cap / 0.25);
            }
        }
    }

    #[test]
    fn double_drift_witness_sits_at_the_origin() {
        let s = scheme("double-drift", 0.01);
        let v = mp_test(&s, 1.0, 1e-3).unwrap();
        assert!(!v.holds);
        let w = v.witness.unwrap();
        let top = w.argmax();
        assert_eq!(s.grid().x(top)[0], 0.0);
        assert_eq!(w.values[top], 1.0);
        let rest = w.values.iter().enumerate().filter(|&(i, _)| i != top).map(|(_, v)| *v).fold(0.0, f64::max);
        assert!(rest <= 1e-2, "{rest}");
    }

    #[test]
    fn grushin_satisfies_mp() {
        let v = mp_test(&scheme("grushin-2", 1.0 / 20.0), 1.0, 1e-3).unwrap();
        assert!(v.holds);
    }

    #[test]
    fn descent_is_monotone_and_cap_invariant() {
        for name in ["half-drift-minus-identity", "double-drift", "neg-laplacian-1d", "neg-p1-2d"] {
            let h = if name.ends_with("2d") { 0.1 } else { 0.02 };
            let s = scheme(name, h);
            let a = mp_test(&s, 1.0, 1e-3).unwrap();
            let b = mp_test(&s, 7.0, 7e-3).unwrap();
            assert_eq!(a.holds, b.holds, "{name}");
        }
    }

    #[test]
    fn direct_decision_agrees_with_descent() {
        for (name, h) in [("helmholtz-shift", 0.05), ("neg-laplacian-1d", 0.05), ("neg-p1-2d", 0.1), ("eikonal-absorbing", 0.05)] {
            let s = scheme(name, h);
            let fast = mp_test(&s, 1.0, 1e-3).unwrap();
            let slow = descent(&s, &MpOptions::default()).unwrap();
            assert_eq!(fast.holds, slow.holds, "{name}");
            assert!(fast.holds && fast.iterations == 0, "{name}");
        }
    }

    #[test]
    fn witness_check_examples() {
        let s = scheme("half-drift-minus-identity", 0.01);
        let tol = s.default_tol();
        let u = Field::from_fn(s.grid().clone(), |x| x[0] * (1.0 - x[0]));
        assert!(witness_check(&s, &u, tol).ok);
        let neg = Field::from_fn(s.grid().clone(), |_| -1.0);
        assert!(!witness_check(&s, &neg, tol).ok);
    }

    #[test]
    fn strict_clause_forces_zero_on_the_band() {
        let s = scheme("double-drift", 0.05).with_boundary_clause(BoundaryClause::StrictMax);
        let v = mp_test(&s, 1.0, 1e-3).unwrap();
        // the origin is a band node, so nothing survives
        assert!(v.holds);
    }

    #[test]
    fn options_are_validated() {
        let s = scheme("zero", 0.1);
        assert!(mp_test(&s, 0.0, 1e-3).is_err());
        let opts = MpOptions { max_sweeps: 1, ..MpOptions::default() };
        let grid = Arc::new(Grid::new(&Domain::interval(0.0, 1.0), 0.01).unwrap());
        let slow = DiscreteScheme::new(lookup("neg-laplacian-1d").unwrap().spec, grid).unwrap();
        assert!(matches!(descent(&slow, &opts), Err(Error::NoConvergence { .. })));
    }
}
