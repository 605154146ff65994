//! Eigenvalue estimators built on a boundedness criterion.
//!
//! A trial `λ` is *feasible* when `S(u) - λ u^α = 1` has a nonnegative
//! solution with `u = 0` outside the closed domain, i.e. when the monotone
//! iteration from `u = 0` stays bounded. The blowup threshold, the supremum of
//! feasible `λ`, is located by bisection. Affine schemes are decided by one
//! banded LU factorization: their Jacobian is a Z-matrix and all pivots are
//! positive exactly when it is a nonsingular M-matrix, which is exactly when
//! the iteration converges. Nonlinear schemes try Newton first and fall back
//! to the iteration itself.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::domains::{Domain, Field, Grid};
use crate::error::{Error, Result};
use crate::linalg::{min_real_eigenvalue, BandMatrix, Factorization};
use crate::operators::{signed_power, OperatorSpec};
use crate::par::{self, Execution};
use crate::scheme::DiscreteScheme;

/// Largest value the pointwise solve searches.
const R_MAX: f64 = 1e9;

/// Dense oracles are skipped above this many free nodes.
const DENSE_ORACLE_LIMIT: usize = 2500;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BlowupOptions {
    pub lambda_cap: f64,
    /// Target bracket width.
    pub tol: f64,
    pub divergence_threshold: f64,
    pub max_sweeps: usize,
    pub execution: Execution,
}

impl Default for BlowupOptions {
    fn default() -> Self {
        BlowupOptions {
            lambda_cap: 100.0,
            tol: 1e-3,
            divergence_threshold: 1e8,
            max_sweeps: 100_000,
            execution: Execution::default(),
        }
    }
}

impl BlowupOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_cap > 0.0 && self.tol > 0.0 && self.divergence_threshold > 0.0 && self.max_sweeps > 0) {
            return Err(Error::InvalidArgument(format!("invalid eigen options {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Blowup,
    InflatedBlowup,
    Viscous,
    Extrapolated,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Blowup => "blowup",
            Method::InflatedBlowup => "inflated-blowup",
            Method::Viscous => "viscous",
            Method::Extrapolated => "extrapolated",
        }
    }
}

/// One row of a per-eps table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsRow {
    pub eps: f64,
    pub value: f64,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Bisection steps (summed over runs for composite estimates).
    pub iterations: usize,
    /// Newton steps plus fixed-point sweeps over all trials.
    pub solver_steps: usize,
    pub h: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inflation_eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub viscous_eps: Option<f64>,
    /// Whether the trial at `lambda_hi` diverged (as opposed to hitting the cap).
    pub diverged: bool,
    pub capped: bool,
    /// Feasibility of `lambda_lo - 0.5` (spot check of monotonicity in `λ`).
    pub spot_check: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub table: Vec<EpsRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotone_in_eps: Option<bool>,
    /// Dense principal-eigenvalue oracle (linear viscous runs).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenEstimate {
    pub value: f64,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub method: Method,
    pub domain: String,
    pub diagnostics: Diagnostics,
}

impl EigenEstimate {
    pub fn width(&self) -> f64 {
        self.lambda_hi - self.lambda_lo
    }
}

/// Outcome of one feasibility trial.
#[derive(Clone, Debug)]
pub struct Trial {
    pub feasible: bool,
    pub steps: usize,
    /// Node at which a pointwise solve or a pivot failed, if any.
    pub blocking_node: Option<usize>,
    pub solution: Option<Vec<f64>>,
}

/// Result of running the monotone fixed-point iteration directly.
#[derive(Clone, Debug)]
pub struct PerronRun {
    pub field: Field,
    pub sweeps: usize,
    pub converged: bool,
    pub diverged: bool,
    /// `u^{k+1} >= u^k` held node-wise at every sweep.
    pub monotone: bool,
    pub blocking_node: Option<usize>,
}

/// Jacobian rows: diagonal and `(column, value)` pairs for each node.
struct Rows {
    diag: Vec<f64>,
    off: Vec<[(usize, f64); 8]>,
}

fn affine_rows(s: &DiscreteScheme) -> Result<Rows> {
    let grid = s.grid();
    let rows = par::map_range(s.execution, grid.len(), |i| {
        if !grid.is_free(i) {
            return (1.0, [(usize::MAX, 0.0); 8]);
        }
        let zero = [0.0; 8];
        let base = s.local_residual(i, 0.0, &zero);
        let diag = s.local_residual(i, 1.0, &zero) - base;
        let nodes = s.arm_nodes(i);
        let mut off = [(usize::MAX, 0.0); 8];
        for a in 0..8 {
            if let Some(j) = nodes[a] {
                let mut unit = zero;
                unit[a] = 1.0;
                off[a] = (j, s.local_residual(i, 0.0, &unit) - base);
            }
        }
        (diag, off)
    });
    let mut out = Rows { diag: Vec::with_capacity(rows.len()), off: Vec::with_capacity(rows.len()) };
    for (i, (d, off)) in rows.into_iter().enumerate() {
        for &(j, v) in &off {
            if j != usize::MAX && v > 1e-12 * (1.0 + d.abs()) {
                return Err(Error::NonMonotone(format!(
                    "positive off-diagonal {v:e} coupling node {i} to node {j}"
                )));
            }
        }
        out.diag.push(d);
        out.off.push(off);
    }
    Ok(out)
}

fn shift_of(s: &DiscreteScheme, i: usize, lambda: f64) -> f64 {
    if s.grid().is_free(i) {
        lambda
    } else {
        0.0
    }
}

fn affine_trial(s: &DiscreteScheme, rows: &Rows, lambda: f64) -> Trial {
    let n = s.grid().len();
    let mut m = BandMatrix::zeros(n, s.bandwidth());
    for i in 0..n {
        m.set(i, i, rows.diag[i] - shift_of(s, i, lambda));
        for &(j, v) in &rows.off[i] {
            if j != usize::MAX {
                m.add(i, j, v);
            }
        }
    }
    match m.factor_in_place() {
        Factorization::NonPositivePivot { row, .. } => {
            Trial { feasible: false, steps: 1, blocking_node: Some(row), solution: None }
        }
        Factorization::PositivePivots => {
            let mut u: Vec<f64> = (0..n).map(|i| if s.grid().is_free(i) { 1.0 } else { 0.0 }).collect();
            m.solve_factored(&mut u);
            // positive pivots already certify a bounded limit, however large
            let feasible = u.iter().all(|v| v.is_finite());
            Trial { feasible, steps: 1, blocking_node: None, solution: feasible.then_some(u) }
        }
    }
}

/// `G_i(u) = S_i(u) - λ σ(u_i) - 1` at free nodes, `u_i` at pinned ones.
fn g_node(s: &DiscreteScheme, i: usize, r: f64, vals: &[f64; 8], lambda: f64) -> f64 {
    if !s.grid().is_free(i) {
        return r;
    }
    s.local_residual(i, r, vals) - lambda * signed_power(r, s.spec().alpha) - 1.0
}

enum Newton {
    Converged(Vec<f64>, usize),
    /// The linearization at some iterate was not an M-matrix.
    NonPositivePivot { row: usize, steps: usize },
    Failed(usize),
}

fn newton_trial(s: &DiscreteScheme, lambda: f64) -> Newton {
    let grid = s.grid();
    let n = grid.len();
    let alpha = s.spec().alpha;
    let mut u = vec![0.0; n];
    for step in 1..=60 {
        let rows = par::map_range(s.execution, n, |i| {
            if !grid.is_free(i) {
                return (u[i], 1.0, [(usize::MAX, 0.0); 8]);
            }
            let vals = s.arm_values(i, &u);
            let nodes = s.arm_nodes(i);
            let mut off = [(usize::MAX, 0.0); 8];
            if let Some((res, l)) = s.local_linearization(i, u[i], &vals) {
                let g = res - lambda * signed_power(u[i], alpha) - 1.0;
                let shift = if alpha == 1.0 { lambda } else { lambda * alpha * u[i].abs().powf(alpha - 1.0) };
                for a in 0..8 {
                    if let Some(j) = nodes[a] {
                        off[a] = (j, l.v[a]);
                    }
                }
                return (g, l.r - shift, off);
            }
            let g = g_node(s, i, u[i], &vals, lambda);
            let d = 1e-7 * (1.0 + u[i].abs());
            let diag = (g_node(s, i, u[i] + d, &vals, lambda) - g) / d;
            for a in 0..8 {
                if let Some(j) = nodes[a] {
                    let mut v = vals;
                    let d = 1e-7 * (1.0 + v[a].abs());
                    v[a] += d;
                    off[a] = (j, (g_node(s, i, u[i], &v, lambda) - g) / d);
                }
            }
            (g, diag, off)
        });
        let gmax = rows.iter().map(|r| r.0.abs()).fold(0.0, f64::max);
        let umax = u.iter().copied().fold(0.0, f64::max);
        if gmax <= 1e-10 * (1.0 + umax) {
            let umin = u.iter().copied().fold(0.0, f64::min);
            return if umin >= -1e-9 * (1.0 + umax) { Newton::Converged(u, step) } else { Newton::Failed(step) };
        }
        let mut m = BandMatrix::zeros(n, s.bandwidth());
        let mut rhs = vec![0.0; n];
        for (i, (g, diag, off)) in rows.into_iter().enumerate() {
            m.set(i, i, diag);
            for (j, v) in off {
                if j != usize::MAX {
                    m.add(i, j, v);
                }
            }
            rhs[i] = g;
        }
        if let Factorization::NonPositivePivot { row, .. } = m.factor_in_place() {
            return Newton::NonPositivePivot { row, steps: step };
        }
        m.solve_factored(&mut rhs);
        for i in 0..n {
            u[i] -= rhs[i];
        }
        if !u.iter().all(|v| v.is_finite()) {
            return Newton::Failed(step);
        }
    }
    Newton::Failed(60)
}

/// Smallest `r >= r0` with `g(r) >= 0`, assuming `g` eventually crosses zero.
fn pointwise_up(g: impl Fn(f64) -> f64, r0: f64, affine: bool) -> Option<f64> {
    let g0 = g(r0);
    if g0 >= 0.0 {
        return Some(r0);
    }
    if affine {
        let slope = g(r0 + 1.0) - g0;
        if !(slope > 0.0) {
            return None;
        }
        let r = r0 - g0 / slope;
        return (r <= R_MAX).then_some(r);
    }
    let (mut a, mut ga) = (r0, g0);
    let mut step = 1e-3 * (1.0 + r0.abs());
    let (mut b, mut gb) = loop {
        let b = r0 + step;
        if b > R_MAX {
            return None;
        }
        let gb = g(b);
        if gb >= 0.0 {
            break (b, gb);
        }
        a = b;
        ga = gb;
        step *= 4.0;
    };
    // Illinois regula falsi, keeping g(b) >= 0
    let mut side = 0;
    for _ in 0..100 {
        if b - a <= 1e-13 * (1.0 + b.abs()) {
            break;
        }
        let c = (a * gb - b * ga) / (gb - ga);
        let c = if c > a && c < b { c } else { 0.5 * (a + b) };
        let gc = g(c);
        if gc >= 0.0 {
            b = c;
            gb = gc;
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        } else {
            a = c;
            ga = gc;
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        }
    }
    Some(b)
}

/// The monotone fixed-point iteration from `u = 0` (Jacobi sweeps).
pub fn perron_solve(s: &DiscreteScheme, lambda: f64, opts: &BlowupOptions) -> PerronRun {
    let grid = s.grid().clone();
    let n = grid.len();
    let affine = s.is_affine();
    let alpha = s.spec().alpha;
    let mut u = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut monotone = true;
    for sweep in 1..=opts.max_sweeps {
        par::fill(s.execution, &mut next, |i| {
            if !grid.is_free(i) {
                return 0.0;
            }
            let vals = s.arm_values(i, &u);
            let g = |r: f64| s.local_residual(i, r, &vals) - lambda * signed_power(r, alpha) - 1.0;
            pointwise_up(g, u[i], affine).unwrap_or(f64::INFINITY)
        });
        let blocking = next.iter().position(|v| !v.is_finite());
        let mut change: f64 = 0.0;
        let mut max: f64 = 0.0;
        for i in 0..n {
            if next[i] < u[i] {
                monotone = false;
            }
            change = change.max((next[i] - u[i]).abs());
            max = max.max(next[i]);
        }
        std::mem::swap(&mut u, &mut next);
        if blocking.is_some() || max > opts.divergence_threshold {
            return PerronRun {
                field: Field::diverged(grid, u),
                sweeps: sweep,
                converged: false,
                diverged: true,
                monotone,
                blocking_node: blocking,
            };
        }
        if change <= 1e-12 * (1.0 + max) {
            return PerronRun {
                field: Field::new(grid.clone(), u.clone()).unwrap_or_else(|_| Field::diverged(grid, u)),
                sweeps: sweep,
                converged: true,
                diverged: false,
                monotone,
                blocking_node: None,
            };
        }
    }
    PerronRun { field: Field::diverged(grid, u), sweeps: opts.max_sweeps, converged: false, diverged: false, monotone, blocking_node: None }
}

/// Decides one trial `λ`.
pub fn feasibility(s: &DiscreteScheme, lambda: f64, opts: &BlowupOptions) -> Result<Trial> {
    if s.is_affine() {
        let rows = affine_rows(s)?;
        return Ok(affine_trial(s, &rows, lambda));
    }
    Ok(nonlinear_trial(s, lambda, opts))
}

/// Trial decided without the iterative fallback, `None` when only Perron sweeps could tell.
pub(crate) fn direct_feasibility(s: &DiscreteScheme, lambda: f64) -> Option<bool> {
    if s.is_affine() {
        return affine_rows(s).ok().map(|rows| affine_trial(s, &rows, lambda).feasible);
    }
    match newton_trial(s, lambda) {
        Newton::Converged(..) => Some(true),
        Newton::NonPositivePivot { .. } if s.is_concave() => Some(false),
        _ => None,
    }
}

fn nonlinear_trial(s: &DiscreteScheme, lambda: f64, opts: &BlowupOptions) -> Trial {
    let steps = match newton_trial(s, lambda) {
        Newton::Converged(u, steps) => {
            return Trial { feasible: true, steps, blocking_node: None, solution: Some(u) };
        }
        // for concave schemes Newton is policy iteration: a policy whose matrix is
        // not an M-matrix bounds the threshold from above by its own eigenvalue
        Newton::NonPositivePivot { row, steps } if s.is_concave() => {
            return Trial { feasible: false, steps, blocking_node: Some(row), solution: None };
        }
        Newton::NonPositivePivot { steps, .. } | Newton::Failed(steps) => steps,
    };
    let run = perron_solve(s, lambda, opts);
    Trial {
        feasible: run.converged,
        steps: steps + run.sweeps,
        blocking_node: run.blocking_node,
        solution: run.converged.then_some(run.field.values),
    }
}

/// Blowup threshold of `scheme` by bisection on `[-cap, cap]`.
pub fn blowup_eigenvalue(s: &DiscreteScheme, opts: &BlowupOptions) -> Result<EigenEstimate> {
    opts.validate()?;
    let s = &s.clone().with_execution(opts.execution);
    let rows = if s.is_affine() { Some(affine_rows(s)?) } else { None };
    let mut steps = 0;
    let mut trial = |lambda: f64| -> Trial {
        let t = match &rows {
            Some(rows) => affine_trial(s, rows, lambda),
            None => nonlinear_trial(s, lambda, opts),
        };
        steps += t.steps;
        t
    };
    let cap = opts.lambda_cap;
    let grid = s.grid();
    let mut diag = Diagnostics {
        h: grid.h(),
        viscous_eps: (s.viscous_eps > 0.0).then_some(s.viscous_eps),
        ..Diagnostics::default()
    };
    let domain = grid.domain().label();
    let bottom = trial(-cap);
    if !bottom.feasible {
        let node = bottom.blocking_node.unwrap_or(0);
        return Err(Error::PointwiseInfeasible { node, x: grid.x(node)[..grid.dim()].to_vec() });
    }
    if trial(cap).feasible {
        diag.capped = true;
        diag.spot_check = true;
        diag.solver_steps = steps;
        diag.notes.push(format!("feasible at the cap {cap}; the threshold is at least the cap"));
        return Ok(EigenEstimate { value: cap, lambda_lo: cap, lambda_hi: cap, method: Method::Blowup, domain, diagnostics: diag });
    }
    let (mut lo, mut hi) = (-cap, cap);
    let mut iterations = 0;
    while hi - lo > opts.tol {
        let mid = 0.5 * (lo + hi);
        if trial(mid).feasible {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    diag.spot_check = lo - 0.5 <= -cap || trial(lo - 0.5).feasible;
    if !diag.spot_check {
        diag.notes.push(format!("lambda_lo - 0.5 = {} was not feasible", lo - 0.5));
    }
    diag.iterations = iterations;
    diag.solver_steps = steps;
    diag.diverged = true;
    Ok(EigenEstimate { value: 0.5 * (lo + hi), lambda_lo: lo, lambda_hi: hi, method: Method::Blowup, domain, diagnostics: diag })
}

fn quadratic_at_zero(e: [f64; 3], v: [f64; 3]) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        let mut w = 1.0;
        for j in 0..3 {
            if j != i {
                w *= -e[j] / (e[i] - e[j]);
            }
        }
        s += w * v[i];
    }
    s
}

fn linear_at_zero(e: &[f64], v: &[f64]) -> f64 {
    let n = e.len() as f64;
    let me = e.iter().sum::<f64>() / n;
    let mv = v.iter().sum::<f64>() / n;
    let sxx: f64 = e.iter().map(|x| (x - me) * (x - me)).sum();
    if sxx == 0.0 {
        return mv;
    }
    let sxy: f64 = e.iter().zip(v).map(|(x, y)| (x - me) * (y - mv)).sum();
    mv - sxy / sxx * me
}

fn check_eps_list(eps_list: &[f64]) -> Result<()> {
    if eps_list.is_empty()
        || eps_list.iter().any(|&e| !(e > 0.0))
        || eps_list.windows(2).any(|w| !(w[0] > w[1]))
    {
        return Err(Error::InvalidArgument(format!("eps list must be positive and strictly decreasing: {eps_list:?}")));
    }
    Ok(())
}

/// `μ1` as the limit of blowup thresholds on `Ω + B_eps`, extrapolated to `eps = 0`.
///
/// The extrapolant is the quadratic through the last three points; the
/// bracket is widened by its distance to the least-squares line and by the
/// largest per-eps bracket.
pub fn mu1_estimate(
    spec: &OperatorSpec,
    domain: &Domain,
    h: f64,
    eps_list: &[f64],
    opts: &BlowupOptions,
) -> Result<EigenEstimate> {
    check_eps_list(eps_list)?;
    let eps_min = *eps_list.last().expect("non-empty");
    if eps_min < 2.0 * h {
        return Err(Error::InvalidArgument(format!("h = {h} does not resolve eps = {eps_min} (need eps >= 2h)")));
    }
    let spec = Arc::new(spec.clone());
    let runs = par::map_slice(opts.execution, eps_list, |&eps| -> Result<EigenEstimate> {
        let grid = Arc::new(Grid::new(&domain.inflate(eps)?, h)?);
        let scheme = DiscreteScheme::from_shared(spec.clone(), grid)?;
        let mut est = blowup_eigenvalue(&scheme, opts)?;
        est.method = Method::InflatedBlowup;
        est.diagnostics.inflation_eps = Some(eps);
        Ok(est)
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let table: Vec<EpsRow> = eps_list
        .iter()
        .zip(&runs)
        .map(|(&eps, r)| EpsRow { eps, value: r.value, lambda_lo: r.lambda_lo, lambda_hi: r.lambda_hi, oracle: None })
        .collect();
    let width = runs.iter().map(EigenEstimate::width).fold(0.0, f64::max);
    // larger eps, larger domain, smaller threshold
    let monotone = table.windows(2).all(|w| w[0].value <= w[1].value + w[0].lambda_hi - w[0].lambda_lo + w[1].lambda_hi - w[1].lambda_lo);
    let k = table.len();
    let tail = &table[k.saturating_sub(3)..];
    let e: Vec<f64> = tail.iter().map(|r| r.eps).collect();
    let v: Vec<f64> = tail.iter().map(|r| r.value).collect();
    let lin = linear_at_zero(&e, &v);
    let value = if tail.len() == 3 { quadratic_at_zero([e[0], e[1], e[2]], [v[0], v[1], v[2]]) } else { lin };
    let capped = runs.iter().any(|r| r.diagnostics.capped);
    let spread = (value - lin).abs();
    let mut diagnostics = Diagnostics {
        iterations: runs.iter().map(|r| r.diagnostics.iterations).sum(),
        solver_steps: runs.iter().map(|r| r.diagnostics.solver_steps).sum(),
        h,
        diverged: runs.iter().all(|r| r.diagnostics.diverged),
        capped,
        spot_check: runs.iter().all(|r| r.diagnostics.spot_check),
        table,
        monotone_in_eps: Some(monotone),
        ..Diagnostics::default()
    };
    if !monotone {
        diagnostics.notes.push("per-eps values are not non-increasing in eps (under-resolution?)".into());
    }
    Ok(EigenEstimate {
        value,
        lambda_lo: value - spread - width,
        lambda_hi: value + spread + width,
        method: Method::Extrapolated,
        domain: domain.label(),
        diagnostics,
    })
}

/// Smallest real part of the spectrum of the affine scheme's Jacobian
/// restricted to free nodes.
pub fn dense_oracle(s: &DiscreteScheme) -> Result<Option<f64>> {
    if !s.is_affine() {
        return Ok(None);
    }
    let grid = s.grid();
    let free: Vec<usize> = (0..grid.len()).filter(|&i| grid.is_free(i)).collect();
    if free.len() > DENSE_ORACLE_LIMIT {
        return Ok(None);
    }
    let mut pos = vec![usize::MAX; grid.len()];
    for (k, &i) in free.iter().enumerate() {
        pos[i] = k;
    }
    let rows = affine_rows(s)?;
    let mut m = DMatrix::zeros(free.len(), free.len());
    for (k, &i) in free.iter().enumerate() {
        m[(k, k)] = rows.diag[i];
        for &(j, v) in &rows.off[i] {
            if j != usize::MAX && pos[j] != usize::MAX {
                m[(k, pos[j])] += v;
            }
        }
    }
    Ok(Some(min_real_eigenvalue(m)))
}

/// Blowup threshold of `-eps Δ + F` on the given domain.
pub fn viscous_eigenvalue(
    spec: &OperatorSpec,
    domain: &Domain,
    h: f64,
    eps: f64,
    opts: &BlowupOptions,
) -> Result<EigenEstimate> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("viscous eps must be > 0, got {eps}")));
    }
    let grid = Arc::new(Grid::new(domain, h)?);
    let scheme = DiscreteScheme::new(spec.clone(), grid)?.with_viscous_eps(eps);
    let mut est = blowup_eigenvalue(&scheme, opts)?;
    est.method = Method::Viscous;
    est.diagnostics.viscous_eps = Some(eps);
    est.diagnostics.oracle = dense_oracle(&scheme)?;
    Ok(est)
}

/// `λ*` proxy: the minimum of the viscous eigenvalues over the tail (last
/// three entries) of a decreasing eps sequence.
pub fn lambda_star_estimate(
    spec: &OperatorSpec,
    domain: &Domain,
    h: f64,
    eps_list: &[f64],
    opts: &BlowupOptions,
) -> Result<EigenEstimate> {
    check_eps_list(eps_list)?;
    let eps_min = *eps_list.last().expect("non-empty");
    if h > eps_min / 5.0 {
        return Err(Error::InvalidArgument(format!(
            "h = {h} does not resolve the boundary layer of eps = {eps_min} (need h <= eps/5)"
        )));
    }
    let runs = par::map_slice(opts.execution, eps_list, |&eps| viscous_eigenvalue(spec, domain, h, eps, opts));
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let table: Vec<EpsRow> = eps_list
        .iter()
        .zip(&runs)
        .map(|(&eps, r)| EpsRow {
            eps,
            value: r.value,
            lambda_lo: r.lambda_lo,
            lambda_hi: r.lambda_hi,
            oracle: r.diagnostics.oracle,
        })
        .collect();
    let tail = &runs[runs.len().saturating_sub(3)..];
    let best = tail
        .iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("non-empty tail");
    let diagnostics = Diagnostics {
        iterations: runs.iter().map(|r| r.diagnostics.iterations).sum(),
        solver_steps: runs.iter().map(|r| r.diagnostics.solver_steps).sum(),
        h,
        viscous_eps: best.diagnostics.viscous_eps,
        diverged: best.diagnostics.diverged,
        capped: best.diagnostics.capped,
        spot_check: runs.iter().all(|r| r.diagnostics.spot_check),
        table,
        oracle: best.diagnostics.oracle,
        ..Diagnostics::default()
    };
    Ok(EigenEstimate {
        value: best.value,
        lambda_lo: best.lambda_lo,
        lambda_hi: best.lambda_hi,
        method: Method::Viscous,
        domain: domain.label(),
        diagnostics,
    })
}
