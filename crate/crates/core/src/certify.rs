//! Closed-form supersolution certificates.
//!
//! A certificate `φ > 0` with `F[φ] - λ φ^α >= 0` bounds a generalized
//! principal eigenvalue from below. Which one depends on where the inequality
//! and the positivity are known:
//!
//! | positivity / region                         | bounds |
//! |---------------------------------------------|--------|
//! | `φ > 0` in `Ω`                              | `λ1`   |
//! | `inf_Ω φ > 0`                               | `λ̄1`   |
//! | `φ > 0` and the inequality on `Ω' ⊃ Ω̄`      | `μ1`   |
//!
//! Derivatives are exact (forward mode through [`Expr`]); only the set of
//! points is finite.

use serde::{Deserialize, Serialize};

use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::operators::{Jet, OperatorSpec};
use crate::par::{self, Execution};

/// Samples on the boundary of the target are moved this far inward; the
/// eigenvalue definitions only quantify over the open domain.
pub const BOUNDARY_SHIFT: f64 = 1e-12;

/// Margins at or above `-MARGIN_TOL` count as non-negative.
pub const MARGIN_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CertExpr {
    /// `x^n`
    Power { n: f64 },
    /// `2 - sqrt(x)`
    TwoMinusSqrt,
    /// `1 + sqrt(x)`
    OnePlusSqrt,
    /// `k - |x|^2`
    Paraboloid { k: f64 },
    /// `1 - eps exp(sigma xi.x)`
    ExpTilt { eps: f64, sigma: f64, xi: Vec<f64> },
    Constant { c: f64 },
}

impl CertExpr {
    pub fn to_expr(&self, dim: usize) -> Expr {
        use Expr::*;
        let x = || Box::new(Var(0));
        match self {
            CertExpr::Power { n } => Pow(x(), *n),
            CertExpr::TwoMinusSqrt => Sub(Box::new(Const(2.0)), Box::new(Sqrt(x()))),
            CertExpr::OnePlusSqrt => Add(Box::new(Const(1.0)), Box::new(Sqrt(x()))),
            CertExpr::Paraboloid { k } => (0..dim).fold(Const(*k), |acc, i| Sub(Box::new(acc), Box::new(Pow(Box::new(Var(i)), 2.0)))),
            CertExpr::ExpTilt { eps, sigma, xi } => {
                let dot = xi
                    .iter()
                    .enumerate()
                    .take(dim)
                    .fold(Const(0.0), |acc, (i, &c)| Add(Box::new(acc), Box::new(Mul(Box::new(Const(c)), Box::new(Var(i))))));
                let e = Exp(Box::new(Mul(Box::new(Const(*sigma)), Box::new(dot))));
                Sub(Box::new(Const(1.0)), Box::new(Mul(Box::new(Const(*eps)), Box::new(e))))
            }
            CertExpr::Constant { c } => Const(*c),
        }
    }

    pub fn label(&self) -> String {
        match self {
            CertExpr::Power { n } => format!("power({n})"),
            CertExpr::TwoMinusSqrt => "two-minus-sqrt".into(),
            CertExpr::OnePlusSqrt => "one-plus-sqrt".into(),
            CertExpr::Paraboloid { k } => format!("paraboloid({k})"),
            CertExpr::ExpTilt { eps, sigma, xi } => format!("exp-tilt({eps},{sigma},{xi:?})"),
            CertExpr::Constant { c } => format!("constant({c})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub expr: CertExpr,
    /// Region on which the certificate is claimed valid; a region strictly
    /// containing the closed target is needed for a `μ1` bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_region: Option<Domain>,
    /// Positive factor multiplying the family expression.
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

fn is_one(v: &f64) -> bool {
    *v == 1.0
}

impl Certificate {
    pub fn new(expr: CertExpr) -> Certificate {
        Certificate { expr, declared_region: None, scale: 1.0 }
    }

    pub fn scaled(mut self, t: f64) -> Certificate {
        self.scale *= t;
        self
    }

    fn to_expr(&self, dim: usize) -> Expr {
        let e = self.expr.to_expr(dim);
        if self.scale == 1.0 {
            e
        } else {
            Expr::Mul(Box::new(Expr::Const(self.scale)), Box::new(e))
        }
    }

    pub fn declared_on(mut self, region: Domain) -> Certificate {
        self.declared_region = Some(region);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    #[serde(rename = "bounds-lambda1")]
    BoundsLambda1,
    #[serde(rename = "bounds-lambda-bar1")]
    BoundsLambdaBar1,
    #[serde(rename = "bounds-mu1")]
    BoundsMu1,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    pub certificate: String,
    pub operator: String,
    pub domain: String,
    pub lambda: f64,
    /// `min (F[φ] - λ φ^α)` over the target samples.
    pub margin: f64,
    pub valid: bool,
    pub classification: Classification,
    pub sample_count: usize,
    /// `min φ` over the (inward-shifted) target samples.
    pub positivity: f64,
    /// `min φ` over the closed target, boundary included.
    pub inf_bound: f64,
    pub worst_x: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Uniform points of a domain plus its boundary, the latter moved inward by `shift`.
pub fn sample_points(domain: &Domain, n: usize, shift: f64) -> Vec<Vec<f64>> {
    let mut pts = Vec::with_capacity(n + 64);
    match *domain {
        Domain::Interval { a, b } => {
            let (lo, hi) = (a + shift, b - shift);
            let m = n.max(2);
            for k in 0..m {
                pts.push(vec![lo + (hi - lo) * k as f64 / (m - 1) as f64]);
            }
            return pts;
        }
        _ => {}
    }
    let bbox = domain.bounding_box();
    let m = (n as f64).sqrt().ceil().max(2.0) as usize;
    for j in 0..m {
        for i in 0..m {
            let x = bbox[0].0 + (bbox[0].1 - bbox[0].0) * i as f64 / (m - 1) as f64;
            let y = bbox[1].0 + (bbox[1].1 - bbox[1].0) * j as f64 / (m - 1) as f64;
            if domain.signed_distance(&[x, y]) > shift {
                pts.push(vec![x, y]);
            }
        }
    }
    let nb = 4 * m;
    match *domain {
        Domain::Disk { center, radius } => {
            for k in 0..nb {
                let t = std::f64::consts::TAU * k as f64 / nb as f64;
                let r = radius - shift;
                pts.push(vec![center[0] + r * t.cos(), center[1] + r * t.sin()]);
            }
        }
        Domain::Rectangle { a, b, c, d, inflation: e } => {
            let e = e - shift;
            let side = nb / 4;
            // without rounding, edge runs stop short of the corners by the shift
            let s = if e < 0.0 { shift } else { 0.0 };
            for k in 0..=side {
                let t = k as f64 / side as f64;
                let (x, y) = (a + s + (b - a - 2.0 * s) * t, c + s + (d - c - 2.0 * s) * t);
                pts.push(vec![x, c - e]);
                pts.push(vec![x, d + e]);
                pts.push(vec![a - e, y]);
                pts.push(vec![b + e, y]);
            }
            if e > 0.0 {
                let corners = [(a, c, std::f64::consts::PI), (b, c, 1.5 * std::f64::consts::PI), (b, d, 0.0), (a, d, 0.5 * std::f64::consts::PI)];
                for (cx, cy, start) in corners {
                    for k in 1..side.max(2) {
                        let t = start + std::f64::consts::FRAC_PI_2 * k as f64 / side.max(2) as f64;
                        pts.push(vec![cx + e * t.cos(), cy + e * t.sin()]);
                    }
                }
            }
        }
        Domain::Interval { .. } => unreachable!(),
    }
    pts
}

struct Sampled {
    margin: f64,
    worst: usize,
    min_phi: f64,
}

fn evaluate(expr: &Expr, spec: &OperatorSpec, pts: &[Vec<f64>], lambda: f64) -> Result<Sampled> {
    let dim = spec.dim;
    let vals = par::map_slice(Execution::default(), pts, |x| -> Result<(f64, f64)> {
        let d = expr.eval_d2(x);
        if !d.v.is_finite() || !(d.v > 0.0) {
            return Err(Error::NonPositiveCertificate { x: x.clone(), value: d.v });
        }
        let p = &d.g[..dim];
        let mut hess = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                hess[i * dim + j] = d.h[i][j];
            }
        }
        if !p.iter().chain(&hess).all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument(format!("certificate derivatives are singular at {x:?}")));
        }
        let jet = Jet::new(x, d.v, p, &hess)?;
        let f = spec.eval(&jet)?;
        Ok((f - lambda * d.v.powf(spec.alpha), d.v))
    });
    let mut out = Sampled { margin: f64::INFINITY, worst: 0, min_phi: f64::INFINITY };
    for (k, v) in vals.into_iter().enumerate() {
        let (m, phi) = v?;
        if m < out.margin {
            out.margin = m;
            out.worst = k;
        }
        out.min_phi = out.min_phi.min(phi);
    }
    Ok(out)
}

fn check(spec: &OperatorSpec, target: &Domain, samples: usize) -> Result<()> {
    if samples < 100 {
        return Err(Error::InvalidArgument(format!("need at least 100 samples, got {samples}")));
    }
    if spec.dim != target.dim() {
        return Err(Error::DimensionMismatch { expected: target.dim(), got: spec.dim });
    }
    target.validate()
}

/// Checks `F[φ] - λ φ^α >= 0` at `samples` points of `target` and classifies the bound.
pub fn verify(cert: &Certificate, spec: &OperatorSpec, target: &Domain, lambda: f64, samples: usize) -> Result<CertReport> {
    check(spec, target, samples)?;
    let expr = cert.to_expr(spec.dim);
    let pts = sample_points(target, samples, BOUNDARY_SHIFT);
    let s = evaluate(&expr, spec, &pts, lambda)?;
    let closed = sample_points(target, samples, 0.0);
    let inf_bound = closed.iter().map(|x| expr.eval(x)).fold(f64::INFINITY, f64::min);
    let valid = s.margin >= -MARGIN_TOL;
    let mut notes = vec![format!("boundary samples moved inward by {BOUNDARY_SHIFT:e}")];
    let mut classification = if inf_bound > 0.0 { Classification::BoundsLambdaBar1 } else { Classification::BoundsLambda1 };
    if let Some(region) = &cert.declared_region {
        let contains = region.dim() == target.dim() && closed.iter().all(|x| region.signed_distance(x) > 0.0);
        if !contains {
            notes.push(format!("declared region {} does not strictly contain the closed target", region.label()));
        } else {
            match evaluate(&expr, spec, &sample_points(region, samples, BOUNDARY_SHIFT), lambda) {
                Ok(r) if r.margin >= -MARGIN_TOL => classification = Classification::BoundsMu1,
                Ok(r) => notes.push(format!("margin on the declared region is {:e}", r.margin)),
                Err(e) => notes.push(format!("declared region rejected: {e}")),
            }
        }
    }
    Ok(CertReport {
        certificate: cert.expr.label(),
        operator: spec.name.clone(),
        domain: target.label(),
        lambda,
        margin: s.margin,
        valid,
        classification,
        sample_count: pts.len(),
        positivity: s.min_phi,
        inf_bound,
        worst_x: pts[s.worst].clone(),
        notes,
    })
}

/// Largest `λ` the certificate supports on `target`: `min F[φ] / φ^α` over the
/// samples, which is where the margin (affine and decreasing in `λ`) vanishes.
pub fn best_lambda(cert: &Certificate, spec: &OperatorSpec, target: &Domain, samples: usize) -> Result<f64> {
    check(spec, target, samples)?;
    let expr = cert.to_expr(spec.dim);
    let pts = sample_points(target, samples, BOUNDARY_SHIFT);
    // margin at λ = 0 is F[φ]; divide pointwise by φ^α
    let ratios = par::map_slice(Execution::default(), &pts, |x| -> Result<f64> {
        let one = evaluate(&expr, spec, std::slice::from_ref(x), 0.0)?;
        Ok(one.margin / one.min_phi.powf(spec.alpha))
    });
    let mut best = f64::INFINITY;
    for r in ratios {
        best = best.min(r?);
    }
    Ok(best)
}
