//! Monotone finite-difference residuals `S_i(u) ≈ F[u](x_i)`.
//!
//! Nodes with `d >= 0` carry unknowns; everything outside the closed domain is
//! pinned to zero. A free node whose lattice neighbor lies outside gets a ghost
//! zero at the interpolated boundary crossing (Shortley–Weller), which keeps
//! second differences accurate on domains whose boundary misses the lattice.
//!
//! Each operator family gets its own stencil:
//!
//! - linear: second differences per axis, upwinded drift;
//! - eikonal: the monotone gradient norm `max(D+u, -D-u, 0)` per axis;
//! - Hessian-eigenvalue operators in 2D: second differences along the axes and
//!   both diagonals, with `eta_max ≈ max` and `eta_min ≈ min` over directions;
//! - the 1D p-Laplacian: `-(p-1) G^{p-2} u''` with a gradient estimate `G`
//!   chosen by the sign of `u''`.
//!
//! Anything else falls back to centered derivatives fed to `F` directly.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domains::{Field, Grid, NodeClass};
use crate::error::{Error, Result};
use crate::operators::{signed_power, Body, Jet, OperatorSpec, Side, GRADIENT_FLOOR};
use crate::par::{self, Execution};

/// Lattice offsets of the stencil arms: `+x, -x, +y, -y, +(1,1), -(1,1), +(1,-1), -(1,-1)`.
const DIRS: [(i64, i64); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1), (1, -1), (-1, 1)];

/// Smallest ghost fraction; keeps coefficients finite when a node sits on the boundary.
const THETA_MIN: f64 = 1e-3;

/// How a subsolution is tested at free boundary-band nodes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryClause {
    /// `min(u, S) <= 0`: the relaxed (viscosity) Dirichlet condition.
    #[default]
    RelaxedMin,
    /// `max(u, S) <= 0`: the literal reading.
    StrictMax,
}

#[derive(Clone, Copy, Debug)]
struct Arm {
    node: Option<usize>,
    theta: f64,
}

#[derive(Clone, Debug)]
pub struct DiscreteScheme {
    spec: Arc<OperatorSpec>,
    grid: Arc<Grid>,
    pub viscous_eps: f64,
    pub side: Side,
    pub boundary_clause: BoundaryClause,
    pub execution: Execution,
    arms: Vec<[Arm; 8]>,
    concave: bool,
}

/// Local stencil values at one node.
struct Ctx {
    dim: usize,
    x: [f64; 2],
    h: f64,
    r: f64,
    val: [f64; 8],
    theta: [f64; 8],
}

impl Ctx {
    fn step(&self, m: usize) -> f64 {
        if m < 2 {
            self.h
        } else {
            self.h * std::f64::consts::SQRT_2
        }
    }

    /// Forward difference along axis/diagonal `m`.
    fn d_plus(&self, m: usize) -> f64 {
        (self.val[2 * m] - self.r) / (self.theta[2 * m] * self.step(m))
    }

    fn d_minus(&self, m: usize) -> f64 {
        (self.r - self.val[2 * m + 1]) / (self.theta[2 * m + 1] * self.step(m))
    }

    fn centered(&self, m: usize) -> f64 {
        (self.val[2 * m] - self.val[2 * m + 1]) / ((self.theta[2 * m] + self.theta[2 * m + 1]) * self.step(m))
    }

    /// Second difference along direction `m` (0, 1 axes; 2, 3 diagonals).
    fn second(&self, m: usize) -> f64 {
        let (tp, tm) = (self.theta[2 * m], self.theta[2 * m + 1]);
        let s = self.step(m);
        2.0 / ((tp + tm) * s * s) * ((self.val[2 * m] - self.r) / tp - (self.r - self.val[2 * m + 1]) / tm)
    }

    fn cross(&self) -> f64 {
        (self.val[4] + self.val[5] - self.val[6] - self.val[7]) / (4.0 * self.h * self.h)
    }

    fn laplacian(&self) -> f64 {
        (0..self.dim).map(|m| self.second(m)).sum()
    }

    fn directional_extremes(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for m in 0..4 {
            let v = self.second(m);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    fn jet(&self) -> Jet {
        let mut jet = Jet::at(&self.x[..self.dim]).with_r(self.r);
        for k in 0..self.dim {
            jet.p[k] = self.centered(k);
            jet.hess[k][k] = self.second(k);
        }
        if self.dim == 2 {
            jet.hess[0][1] = self.cross();
            jet.hess[1][0] = jet.hess[0][1];
        }
        jet
    }
}

/// Derivative of a local quantity with respect to the center value and the arm values.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Lin {
    pub r: f64,
    pub v: [f64; 8],
}

impl Lin {
    fn scale(mut self, k: f64) -> Lin {
        self.r *= k;
        for v in &mut self.v {
            *v *= k;
        }
        self
    }

    fn add(mut self, o: Lin) -> Lin {
        self.r += o.r;
        for (v, w) in self.v.iter_mut().zip(o.v) {
            *v += w;
        }
        self
    }

    fn center(k: f64) -> Lin {
        Lin { r: k, v: [0.0; 8] }
    }
}

impl Ctx {
    fn d_plus_lin(&self, m: usize) -> Lin {
        let w = 1.0 / (self.theta[2 * m] * self.step(m));
        let mut l = Lin::center(-w);
        l.v[2 * m] = w;
        l
    }

    fn d_minus_lin(&self, m: usize) -> Lin {
        let w = 1.0 / (self.theta[2 * m + 1] * self.step(m));
        let mut l = Lin::center(w);
        l.v[2 * m + 1] = -w;
        l
    }

    fn second_lin(&self, m: usize) -> Lin {
        let (tp, tm) = (self.theta[2 * m], self.theta[2 * m + 1]);
        let s = self.step(m);
        let k = 2.0 / ((tp + tm) * s * s);
        let mut l = Lin::center(-k * (1.0 / tp + 1.0 / tm));
        l.v[2 * m] = k / tp;
        l.v[2 * m + 1] = k / tm;
        l
    }

    fn cross_lin(&self) -> Lin {
        let k = 1.0 / (4.0 * self.h * self.h);
        Lin { r: 0.0, v: [0.0, 0.0, 0.0, 0.0, k, k, -k, -k] }
    }

    fn laplacian_lin(&self) -> Lin {
        (0..self.dim).fold(Lin::default(), |acc, m| acc.add(self.second_lin(m)))
    }

    /// Direction indices attaining the smallest and largest second difference (first on ties).
    fn extreme_dirs(&self) -> (usize, usize) {
        let (mut lo, mut hi) = (0, 0);
        for m in 1..4 {
            if self.second(m) < self.second(lo) {
                lo = m;
            }
            if self.second(m) > self.second(hi) {
                hi = m;
            }
        }
        (lo, hi)
    }
}

/// Value and derivative of the active piece of [`family`], when an analytic
/// form is available.
fn family_lin(spec: &OperatorSpec, c: &Ctx, side: Side) -> Option<(f64, Lin)> {
    let dim = c.dim;
    let value = family(spec, c, side);
    let lin = match &spec.body {
        Body::Linear(coeffs) => {
            let at = coeffs.at(&c.x[..dim]);
            let mut l = Lin::center(-at.c);
            for k in 0..dim {
                l = l.add(c.second_lin(k).scale(-at.a[k][k]));
                let b = at.b[k];
                if b > 0.0 {
                    l = l.add(c.d_plus_lin(k).scale(-b));
                } else if b < 0.0 {
                    l = l.add(c.d_minus_lin(k).scale(-b));
                }
            }
            if dim == 2 && at.a[0][1] != 0.0 {
                l = l.add(c.cross_lin().scale(-2.0 * at.a[0][1]));
            }
            l
        }
        Body::Eikonal { b, c: c0 } => {
            let x = &c.x[..dim];
            let bx = b.eval(x);
            let sgn = if bx >= 0.0 { 1.0 } else { -1.0 };
            let mut pieces = Vec::with_capacity(dim);
            let mut norm2 = 0.0;
            for k in 0..dim {
                let cands = [
                    (sgn * c.d_plus(k), c.d_plus_lin(k).scale(sgn)),
                    (-sgn * c.d_minus(k), c.d_minus_lin(k).scale(-sgn)),
                    (0.0, Lin::default()),
                ];
                let best = cands.iter().fold(cands[2], |acc, &cand| if cand.0 > acc.0 { cand } else { acc });
                norm2 += best.0 * best.0;
                pieces.push(best);
            }
            let norm = norm2.sqrt();
            let mut l = Lin::center(-c0.eval(x));
            if norm > 0.0 {
                for (g, gl) in pieces {
                    l = l.add(gl.scale(-bx * g / norm));
                }
            }
            l
        }
        Body::TopEigenvalues { k } if dim <= 2 => {
            if *k == dim {
                c.laplacian_lin().scale(-1.0)
            } else {
                c.second_lin(c.extreme_dirs().1).scale(-1.0)
            }
        }
        Body::DegeneratePucciMax if dim <= 2 => {
            let mut l = Lin::default();
            if dim == 1 {
                if c.second(0) > 0.0 {
                    l = c.second_lin(0).scale(-1.0);
                }
            } else {
                let (lo, hi) = c.extreme_dirs();
                for m in [hi, lo] {
                    if c.second(m) > 0.0 {
                        l = l.add(c.second_lin(m).scale(-1.0));
                    }
                }
            }
            l
        }
        Body::PLaplacian { p } if dim == 1 && *p == 2.0 => c.second_lin(0).scale(-1.0),
        Body::InfinityLaplacian if dim == 1 => c.second_lin(0).scale(-1.0),
        Body::Shifted { inner, lambda } if spec.alpha == 1.0 => {
            family_lin(inner, c, side)?.1.add(Lin::center(*lambda))
        }
        Body::Negated(inner) => family_lin(inner, c, flip(side))?.1.scale(-1.0),
        _ => return None,
    };
    Some((value, lin))
}

/// Whether the family residual is concave in the node values, as a minimum
/// of affine pieces with a product structure over nodes.
fn concave_family(spec: &OperatorSpec, grid: &Grid) -> bool {
    let dim = grid.dim();
    match &spec.body {
        Body::Linear(_) => true,
        Body::Eikonal { b, .. } => (0..grid.len()).filter(|&i| grid.is_free(i)).all(|i| b.eval(&grid.x(i)[..dim]) >= 0.0),
        Body::TopEigenvalues { .. } | Body::DegeneratePucciMax => dim <= 2,
        Body::PLaplacian { p } => dim == 1 && *p == 2.0,
        Body::InfinityLaplacian => dim == 1,
        Body::Shifted { inner, .. } => spec.alpha == 1.0 && concave_family(inner, grid),
        Body::Negated(inner) => match &inner.body {
            Body::TopEigenvalues { k } => *k == dim,
            Body::PLaplacian { p } => dim == 1 && *p == 2.0,
            Body::InfinityLaplacian => dim == 1,
            Body::Linear(_) => true,
            _ => false,
        },
    }
}

fn flip(side: Side) -> Side {
    match side {
        Side::Sub => Side::Super,
        Side::Super => Side::Sub,
    }
}

fn family(spec: &OperatorSpec, c: &Ctx, side: Side) -> f64 {
    let dim = c.dim;
    match &spec.body {
        Body::Linear(coeffs) => {
            let at = coeffs.at(&c.x[..dim]);
            let mut s = -at.c * c.r;
            for k in 0..dim {
                s -= at.a[k][k] * c.second(k);
                let b = at.b[k];
                if b > 0.0 {
                    s -= b * c.d_plus(k);
                } else if b < 0.0 {
                    s -= b * c.d_minus(k);
                }
            }
            if dim == 2 && at.a[0][1] != 0.0 {
                s -= 2.0 * at.a[0][1] * c.cross();
            }
            s
        }
        Body::Eikonal { b, c: c0 } => {
            let x = &c.x[..dim];
            let bx = b.eval(x);
            let mut norm2 = 0.0;
            for k in 0..dim {
                let g = if bx >= 0.0 {
                    c.d_plus(k).max(-c.d_minus(k)).max(0.0)
                } else {
                    (-c.d_plus(k)).max(c.d_minus(k)).max(0.0)
                };
                norm2 += g * g;
            }
            -bx * norm2.sqrt() - c0.eval(x) * c.r
        }
        Body::TopEigenvalues { k } if dim <= 2 => {
            if *k == dim {
                -c.laplacian()
            } else {
                -c.directional_extremes().1
            }
        }
        Body::DegeneratePucciMax if dim <= 2 => {
            if dim == 1 {
                -c.second(0).max(0.0)
            } else {
                let (lo, hi) = c.directional_extremes();
                -(hi.max(0.0) + lo.max(0.0))
            }
        }
        Body::PLaplacian { p } if dim == 1 => {
            let l = c.second(0);
            let g = if l >= 0.0 {
                c.d_plus(0).max(-c.d_minus(0)).max(0.0)
            } else {
                (-c.d_plus(0)).max(c.d_minus(0)).max(0.0)
            };
            let weight = if *p == 2.0 { 1.0 } else { g.powf(p - 2.0) };
            -(p - 1.0) * weight * l
        }
        Body::InfinityLaplacian if dim <= 2 => {
            if dim == 1 {
                return -c.second(0);
            }
            let g = [c.centered(0), c.centered(1)];
            if g[0].hypot(g[1]) < GRADIENT_FLOOR {
                let (lo, hi) = c.directional_extremes();
                return match side {
                    Side::Sub => -hi,
                    Side::Super => -lo,
                };
            }
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let dirs = [[1.0, 0.0], [0.0, 1.0], [s, s], [s, -s]];
            let mut best = 0;
            let mut best_dot = -1.0;
            for (m, v) in dirs.iter().enumerate() {
                let dot = (g[0] * v[0] + g[1] * v[1]).abs();
                if dot > best_dot {
                    best_dot = dot;
                    best = m;
                }
            }
            -c.second(best)
        }
        Body::Shifted { inner, lambda } => family(inner, c, side) + lambda * signed_power(c.r, spec.alpha),
        Body::Negated(inner) => -family(inner, c, flip(side)),
        _ => spec.eval_unchecked(&c.jet(), side),
    }
}

/// Outcome of a sub- or supersolution test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub ok: bool,
    pub worst_node: Option<usize>,
    /// The most violating constraint value (compare against `tol`).
    pub worst_value: f64,
}

/// Per-node residual values: `S_i` at free nodes, `u_i` at pinned ones.
#[derive(Clone, Debug)]
pub struct Residual {
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub operator: String,
    pub trials: usize,
    pub violations: usize,
    /// Largest observed increase of a residual when a neighbor value was raised.
    pub max_increase: f64,
}

impl MonotonicityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

impl DiscreteScheme {
    pub fn new(spec: OperatorSpec, grid: Arc<Grid>) -> Result<DiscreteScheme> {
        Self::from_shared(Arc::new(spec), grid)
    }

    pub fn from_shared(spec: Arc<OperatorSpec>, grid: Arc<Grid>) -> Result<DiscreteScheme> {
        if spec.dim != grid.dim() {
            return Err(Error::DimensionMismatch { expected: grid.dim(), got: spec.dim });
        }
        let narms = if grid.dim() == 1 { 2 } else { 8 };
        let arms = (0..grid.len())
            .map(|i| {
                let mut arms = [Arm { node: None, theta: 1.0 }; 8];
                if !grid.is_free(i) {
                    return arms;
                }
                let di = grid.signed_distance(i);
                for (a, &(dx, dy)) in DIRS.iter().enumerate().take(narms) {
                    let Some(j) = grid.offset(i, dx, dy) else { continue };
                    if grid.is_free(j) {
                        arms[a] = Arm { node: Some(j), theta: 1.0 };
                    } else {
                        let dj = grid.signed_distance(j);
                        let theta = (di / (di - dj)).clamp(THETA_MIN, 1.0);
                        arms[a] = Arm { node: None, theta };
                    }
                }
                arms
            })
            .collect();
        let concave = spec.alpha == 1.0 && concave_family(&spec, &grid);
        Ok(DiscreteScheme {
            spec,
            grid,
            concave,
            viscous_eps: 0.0,
            side: Side::Sub,
            boundary_clause: BoundaryClause::RelaxedMin,
            execution: Execution::default(),
            arms,
        })
    }

    pub fn with_viscous_eps(mut self, eps: f64) -> Self {
        self.viscous_eps = eps;
        self
    }

    pub fn with_side(mut self, side: Side) -> Self {
        self.side = side;
        self
    }

    pub fn with_boundary_clause(mut self, clause: BoundaryClause) -> Self {
        self.boundary_clause = clause;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn spec(&self) -> &OperatorSpec {
        &self.spec
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// `10 h (1 + coefficient scale)`: first-order consistency.
    pub fn default_tol(&self) -> f64 {
        10.0 * self.grid.h() * (1.0 + self.spec.coefficient_scale() + self.viscous_eps)
    }

    /// Stencil neighbors of node `i` that carry values.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.arms[i].iter().filter_map(|a| a.node)
    }

    /// Whether the scheme is affine in `u` (so one Newton step is exact).
    pub fn is_affine(&self) -> bool {
        self.spec.is_affine()
    }

    /// Whether every node residual is a minimum of affine pieces in `u`
    /// (with degree-one homogeneity), so Newton's method is policy iteration.
    pub fn is_concave(&self) -> bool {
        self.concave
    }

    /// `S_i` with the center value replaced by `r` and neighbors read from `u`.
    /// At pinned nodes this is `r`.
    #[inline]
    pub fn node_residual(&self, i: usize, r: f64, u: &[f64]) -> f64 {
        if !self.grid.is_free(i) {
            return r;
        }
        let vals = self.arm_values(i, u);
        self.local_residual(i, r, &vals)
    }

    /// Neighbor values of node `i` in arm order (ghosts read as 0).
    #[inline]
    pub(crate) fn arm_values(&self, i: usize, u: &[f64]) -> [f64; 8] {
        let mut vals = [0.0; 8];
        for (v, a) in vals.iter_mut().zip(&self.arms[i]) {
            *v = a.node.map_or(0.0, |j| u[j]);
        }
        vals
    }

    /// Node ids behind each arm (`None` for ghosts and unused arms).
    pub(crate) fn arm_nodes(&self, i: usize) -> [Option<usize>; 8] {
        let mut out = [None; 8];
        for (o, a) in out.iter_mut().zip(&self.arms[i]) {
            *o = a.node;
        }
        out
    }

    /// `S_i` from explicit center and arm values; `i` must be free.
    #[inline]
    pub(crate) fn local_residual(&self, i: usize, r: f64, vals: &[f64; 8]) -> f64 {
        let ctx = self.ctx(i, r, vals);
        let mut s = family(&self.spec, &ctx, self.side);
        if self.viscous_eps != 0.0 {
            s -= self.viscous_eps * ctx.laplacian();
        }
        s
    }

    #[inline]
    fn ctx(&self, i: usize, r: f64, vals: &[f64; 8]) -> Ctx {
        let arms = &self.arms[i];
        let mut ctx = Ctx {
            dim: self.grid.dim(),
            x: self.grid.x(i),
            h: self.grid.h(),
            r,
            val: *vals,
            theta: [1.0; 8],
        };
        for a in 0..8 {
            ctx.theta[a] = arms[a].theta;
        }
        ctx
    }

    /// `S_i` and its derivative along the active piece; `None` when the
    /// family has no analytic linearization.
    pub(crate) fn local_linearization(&self, i: usize, r: f64, vals: &[f64; 8]) -> Option<(f64, Lin)> {
        let ctx = self.ctx(i, r, vals);
        let (mut s, mut l) = family_lin(&self.spec, &ctx, self.side)?;
        if self.viscous_eps != 0.0 {
            s -= self.viscous_eps * ctx.laplacian();
            l = l.add(ctx.laplacian_lin().scale(-self.viscous_eps));
        }
        Some((s, l))
    }

    /// Half-bandwidth of the node-ordered Jacobian.
    pub fn bandwidth(&self) -> usize {
        if self.grid.dim() == 1 {
            1
        } else {
            self.grid.shape()[0] + 1
        }
    }

    pub fn residual(&self, u: &Field) -> Residual {
        let values = par::map_range(self.execution, self.grid.len(), |i| {
            self.node_residual(i, u.values[i], &u.values)
        });
        Residual { values }
    }

    /// Constraint value whose sign decides the subsolution test at node `i`.
    pub(crate) fn sub_constraint(&self, i: usize, r: f64, u: &[f64]) -> f64 {
        if !self.grid.is_free(i) {
            return r;
        }
        let s = self.node_residual(i, r, u);
        match (self.grid.class(i), self.boundary_clause) {
            (NodeClass::Interior, _) => s,
            (_, BoundaryClause::RelaxedMin) => r.min(s),
            (_, BoundaryClause::StrictMax) => r.max(s),
        }
    }

    /// Interior `S_i <= tol`, boundary clause at free band nodes, `u <= tol` outside.
    pub fn is_subsolution(&self, u: &Field, tol: f64) -> Verdict {
        let vals = par::map_range(self.execution, self.grid.len(), |i| {
            self.sub_constraint(i, u.values[i], &u.values)
        });
        let mut worst = 0;
        for i in 0..vals.len() {
            if vals[i] > vals[worst] {
                worst = i;
            }
        }
        Verdict { ok: vals[worst] <= tol, worst_node: Some(worst), worst_value: vals[worst] }
    }

    /// `S_i(phi) - lambda phi_i^alpha >= -tol` at interior nodes.
    pub fn is_supersolution(&self, phi: &Field, lambda: f64, tol: f64) -> Result<Verdict> {
        let interior = self.grid.nodes_of(NodeClass::Interior);
        if let Some(&i) = interior.iter().find(|&&i| !(phi.values[i] > 0.0)) {
            return Err(Error::NonPositiveCertificate { x: self.grid.x(i)[..self.grid.dim()].to_vec(), value: phi.values[i] });
        }
        let alpha = self.spec.alpha;
        let margins = par::map_slice(self.execution, &interior, |&i| {
            self.node_residual(i, phi.values[i], &phi.values) - lambda * phi.values[i].powf(alpha)
        });
        let mut worst = 0;
        for k in 0..margins.len() {
            if margins[k] < margins[worst] {
                worst = k;
            }
        }
        Ok(Verdict {
            ok: margins[worst] >= -tol,
            worst_node: Some(interior[worst]),
            worst_value: margins[worst],
        })
    }

    /// Randomized check that raising a neighbor value never raises a residual.
    pub fn check_monotonicity(&self, trials: usize, seed: u64) -> MonotonicityReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let free: Vec<usize> = (0..self.grid.len()).filter(|&i| self.grid.is_free(i)).collect();
        let mut report = MonotonicityReport {
            operator: self.spec.name.clone(),
            trials,
            violations: 0,
            max_increase: 0.0,
        };
        let mut u = vec![0.0; self.grid.len()];
        for _ in 0..trials {
            for &i in &free {
                u[i] = rng.random_range(-1.0..1.0);
            }
            let i = free[rng.random_range(0..free.len())];
            let nbrs: Vec<usize> = self.neighbors(i).collect();
            if nbrs.is_empty() {
                continue;
            }
            let j = nbrs[rng.random_range(0..nbrs.len())];
            let delta = rng.random_range(1e-3..1.0);
            let before = self.node_residual(i, u[i], &u);
            u[j] += delta;
            let after = self.node_residual(i, u[i], &u);
            u[j] -= delta;
            let inc = after - before;
            report.max_increase = report.max_increase.max(inc);
            if inc > 1e-9 * (1.0 + before.abs() + after.abs()) {
                report.violations += 1;
            }
        }
        report
    }
}
