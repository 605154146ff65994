//! The operator abstraction `F(x, r, p, X)`.
//!
//! An [`OperatorSpec`] is an immutable description of a degenerate elliptic
//! operator together with its homogeneity degree. Linear operators carry
//! their coefficient fields explicitly; everything else is one of a fixed set
//! of nonlinear families, which lets the finite-difference layer pick a
//! monotone discretization per family.

mod catalog;
mod validate;
mod zoo;

pub use catalog::{catalog_from_toml, catalog_to_toml, CatalogRecord};
pub use validate::{
    check_degenerate_ellipticity, check_homogeneity, EllipticityReport, EllipticityViolation,
    HomogeneityReport,
};
pub use zoo::{lookup, zoo, FactSource, Hypotheses, KnownFact, ZooEntry};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::linalg::sym_eigenvalues;

/// Largest space dimension a [`Jet`] can hold.
pub const MAX_DIM: usize = 3;

/// Gradients below this norm are treated as zero by the singular families.
pub const GRADIENT_FLOOR: f64 = 1e-12;

/// Arguments `(x, r, p, X)` of an operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub dim: usize,
    pub x: [f64; MAX_DIM],
    pub r: f64,
    pub p: [f64; MAX_DIM],
    pub hess: [[f64; MAX_DIM]; MAX_DIM],
}

impl Jet {
    /// Builds a jet; `hess` is row-major `dim x dim` and must be exactly symmetric.
    pub fn new(x: &[f64], r: f64, p: &[f64], hess: &[f64]) -> Result<Jet> {
        let dim = x.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidArgument(format!("jet dimension {dim} not in 1..={MAX_DIM}")));
        }
        if p.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
        }
        if hess.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: hess.len() });
        }
        let mut jet = Jet::zero(dim);
        jet.x[..dim].copy_from_slice(x);
        jet.r = r;
        jet.p[..dim].copy_from_slice(p);
        let mut asym: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                jet.hess[i][j] = hess[i * dim + j];
                asym = asym.max((hess[i * dim + j] - hess[j * dim + i]).abs());
            }
        }
        if asym > 0.0 {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(jet)
    }

    pub fn zero(dim: usize) -> Jet {
        Jet { dim, x: [0.0; MAX_DIM], r: 0.0, p: [0.0; MAX_DIM], hess: [[0.0; MAX_DIM]; MAX_DIM] }
    }

    pub fn at(x: &[f64]) -> Jet {
        let mut jet = Jet::zero(x.len());
        jet.x[..x.len()].copy_from_slice(x);
        jet
    }

    pub fn with_r(mut self, r: f64) -> Jet {
        self.r = r;
        self
    }

    pub fn with_p(mut self, p: &[f64]) -> Jet {
        self.p[..p.len()].copy_from_slice(p);
        self
    }

    /// Sets the Hessian from its upper triangle mirrored into the lower one.
    pub fn with_hess_sym(mut self, mut f: impl FnMut(usize, usize) -> f64) -> Jet {
        for i in 0..self.dim {
            for j in i..self.dim {
                let v = f(i, j);
                self.hess[i][j] = v;
                self.hess[j][i] = v;
            }
        }
        self
    }

    /// `(x, tau r, tau p, tau X)`.
    pub fn scaled(&self, tau: f64) -> Jet {
        let mut out = *self;
        out.r *= tau;
        for i in 0..self.dim {
            out.p[i] *= tau;
            for j in 0..self.dim {
                out.hess[i][j] *= tau;
            }
        }
        out
    }

    pub fn point(&self) -> &[f64] {
        &self.x[..self.dim]
    }

    fn grad_norm(&self) -> f64 {
        self.p[..self.dim].iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.hess[i][i]).sum()
    }

    /// `q^T X q` for a unit vector `q`.
    fn quad(&self, q: &[f64; MAX_DIM]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += q[i] * self.hess[i][j] * q[j];
            }
        }
        s
    }
}

/// Which semicontinuous envelope to use where an operator is singular.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    /// Upper envelope, used when testing subsolutions.
    #[default]
    Sub,
    /// Lower envelope, used when testing supersolutions.
    Super,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Linear,
    FirstOrder,
    FullyNonlinear,
}

/// Coefficients of `-Tr(A(x) X) - b(x).p - c(x) r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearCoeffs {
    /// Symmetric diffusion matrix, stored in full (`a[i][j] == a[j][i]`).
    pub a: Vec<Vec<Expr>>,
    pub b: Vec<Expr>,
    pub c: Expr,
}

/// Coefficients of a linear operator evaluated at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearAt {
    pub a: [[f64; MAX_DIM]; MAX_DIM],
    pub b: [f64; MAX_DIM],
    pub c: f64,
}

impl LinearCoeffs {
    pub fn new(a: Vec<Vec<Expr>>, b: Vec<Expr>, c: Expr) -> Result<Self> {
        let n = b.len();
        if n == 0 || n > MAX_DIM || a.len() != n || a.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidArgument("inconsistent linear coefficient shapes".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if a[i][j] != a[j][i] {
                    return Err(Error::InvalidArgument(format!("A is not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(LinearCoeffs { a, b, c })
    }

    /// Parses coefficient strings; `a` is row-major.
    pub fn parse(dim: usize, a: &[&str], b: &[&str], c: &str) -> Result<Self> {
        if a.len() != dim * dim || b.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: b.len() });
        }
        let a = (0..dim)
            .map(|i| (0..dim).map(|j| Expr::parse(a[i * dim + j])).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let b = b.iter().map(|s| Expr::parse(s)).collect::<Result<Vec<_>>>()?;
        LinearCoeffs::new(a, b, Expr::parse(c)?)
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn at(&self, x: &[f64]) -> LinearAt {
        let n = self.dim();
        let mut out = LinearAt { a: [[0.0; MAX_DIM]; MAX_DIM], b: [0.0; MAX_DIM], c: self.c.eval(x) };
        for i in 0..n {
            out.b[i] = self.b[i].eval(x);
            for j in i..n {
                let v = self.a[i][j].eval(x);
                out.a[i][j] = v;
                out.a[j][i] = v;
            }
        }
        out
    }

    fn map(&self, f: impl Fn(&Expr) -> Expr) -> LinearCoeffs {
        LinearCoeffs {
            a: self.a.iter().map(|row| row.iter().map(&f).collect()).collect(),
            b: self.b.iter().map(&f).collect(),
            c: f(&self.c),
        }
    }
}

impl LinearAt {
    pub fn apply(&self, dim: usize, jet: &Jet) -> f64 {
        let mut s = -self.c * jet.r;
        for i in 0..dim {
            s -= self.b[i] * jet.p[i];
            for j in 0..dim {
                s -= self.a[i][j] * jet.hess[i][j];
            }
        }
        s
    }
}

/// The structural family of an operator.
#[derive(Clone, Debug, PartialEq)]
pub enum Body {
    Linear(LinearCoeffs),
    /// `-b(x)|p| - c(x) r`.
    Eikonal { b: Expr, c: Expr },
    /// `-P_k(X)`: minus the sum of the `k` largest Hessian eigenvalues.
    TopEigenvalues { k: usize },
    /// `-M+_{0,1}(X) = -sum max(eta_i, 0)`.
    DegeneratePucciMax,
    /// `-div(|Du|^{p-2} Du)` in non-divergence form.
    PLaplacian { p: f64 },
    /// `-(p/|p|) X (p/|p|)`.
    InfinityLaplacian,
    /// `F + lambda * sign(r)|r|^alpha`.
    Shifted { inner: Box<OperatorSpec>, lambda: f64 },
    /// `-F`.
    Negated(Box<OperatorSpec>),
}

/// An immutable operator description.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSpec {
    pub name: String,
    pub dim: usize,
    /// Homogeneity degree: `F(x, t r, t p, t X) = t^alpha F(x, r, p, X)`.
    pub alpha: f64,
    pub body: Body,
    /// Box the validators draw sample points from (usually the default domain's).
    pub sample_box: Vec<(f64, f64)>,
}

/// `sign(r)|r|^alpha`.
#[inline]
pub fn signed_power(r: f64, alpha: f64) -> f64 {
    if alpha == 1.0 {
        r
    } else {
        r.signum() * r.abs().powf(alpha)
    }
}

impl OperatorSpec {
    fn build(name: &str, dim: usize, alpha: f64, body: Body) -> OperatorSpec {
        OperatorSpec { name: name.to_string(), dim, alpha, body, sample_box: vec![(-1.0, 1.0); dim] }
    }

    pub fn linear(name: &str, coeffs: LinearCoeffs) -> OperatorSpec {
        let dim = coeffs.dim();
        Self::build(name, dim, 1.0, Body::Linear(coeffs))
    }

    /// Linear operator from coefficient strings (row-major `a`).
    pub fn linear_from_strs(name: &str, dim: usize, a: &[&str], b: &[&str], c: &str) -> Result<OperatorSpec> {
        Ok(Self::linear(name, LinearCoeffs::parse(dim, a, b, c)?))
    }

    pub fn eikonal(name: &str, dim: usize, b: Expr, c: Expr) -> OperatorSpec {
        Self::build(name, dim, 1.0, Body::Eikonal { b, c })
    }

    pub fn top_eigenvalues(dim: usize, k: usize) -> Result<OperatorSpec> {
        if k == 0 || k > dim {
            return Err(Error::InvalidArgument(format!("P_k needs 1 <= k <= N, got k={k}, N={dim}")));
        }
        Ok(Self::build(&format!("neg-p{k}-{dim}d"), dim, 1.0, Body::TopEigenvalues { k }))
    }

    pub fn degenerate_pucci_max(dim: usize) -> OperatorSpec {
        Self::build(&format!("pucci-max-degenerate-{dim}d"), dim, 1.0, Body::DegeneratePucciMax)
    }

    /// p-Laplacian; only `p >= 2` is supported (the jet form is singular at `p = 0` otherwise).
    pub fn p_laplacian(dim: usize, p: f64) -> Result<OperatorSpec> {
        if !(p >= 2.0) {
            return Err(Error::Unsupported(format!("p-Laplacian with p = {p} < 2")));
        }
        Ok(Self::build(&format!("p-laplacian-{p}"), dim, p - 1.0, Body::PLaplacian { p }))
    }

    pub fn infinity_laplacian(dim: usize) -> OperatorSpec {
        Self::build(&format!("infinity-laplacian-{dim}d"), dim, 1.0, Body::InfinityLaplacian)
    }

    pub fn with_alpha(mut self, alpha: f64) -> OperatorSpec {
        self.alpha = alpha;
        self
    }

    pub fn with_name(mut self, name: &str) -> OperatorSpec {
        self.name = name.to_string();
        self
    }

    pub fn with_sample_box(mut self, sample_box: Vec<(f64, f64)>) -> OperatorSpec {
        self.sample_box = sample_box;
        self
    }

    pub fn kind(&self) -> Kind {
        match &self.body {
            Body::Linear(_) => Kind::Linear,
            Body::Eikonal { .. } => Kind::FirstOrder,
            Body::Shifted { inner, .. } | Body::Negated(inner) => inner.kind(),
            _ => Kind::FullyNonlinear,
        }
    }

    pub fn linear_part(&self) -> Option<&LinearCoeffs> {
        match &self.body {
            Body::Linear(c) => Some(c),
            _ => None,
        }
    }

    /// `F(jet)` on the subsolution side of any singularity.
    pub fn eval(&self, jet: &Jet) -> Result<f64> {
        self.eval_side(jet, Side::Sub)
    }

    pub fn eval_side(&self, jet: &Jet, side: Side) -> Result<f64> {
        if jet.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: jet.dim });
        }
        Ok(self.eval_unchecked(jet, side))
    }

    pub(crate) fn eval_unchecked(&self, jet: &Jet, side: Side) -> f64 {
        let n = self.dim;
        match &self.body {
            Body::Linear(c) => c.at(jet.point()).apply(n, jet),
            Body::Eikonal { b, c } => {
                let x = jet.point();
                -b.eval(x) * jet.grad_norm() - c.eval(x) * jet.r
            }
            Body::TopEigenvalues { k } => {
                let ev = sym_eigenvalues(&jet.hess, n);
                -ev[n - k..n].iter().sum::<f64>()
            }
            Body::DegeneratePucciMax => {
                let ev = sym_eigenvalues(&jet.hess, n);
                -ev[..n].iter().map(|e| e.max(0.0)).sum::<f64>()
            }
            Body::PLaplacian { p } => {
                let norm = jet.grad_norm();
                if *p == 2.0 {
                    return -jet.trace();
                }
                if norm < GRADIENT_FLOOR {
                    return 0.0;
                }
                let mut q = [0.0; MAX_DIM];
                for i in 0..n {
                    q[i] = jet.p[i] / norm;
                }
                -norm.powf(p - 2.0) * (jet.trace() + (p - 2.0) * jet.quad(&q))
            }
            Body::InfinityLaplacian => {
                let norm = jet.grad_norm();
                if norm < GRADIENT_FLOOR {
                    let ev = sym_eigenvalues(&jet.hess, n);
                    return match side {
                        Side::Sub => -ev[n - 1],
                        Side::Super => -ev[0],
                    };
                }
                let mut q = [0.0; MAX_DIM];
                for i in 0..n {
                    q[i] = jet.p[i] / norm;
                }
                -jet.quad(&q)
            }
            Body::Shifted { inner, lambda } => {
                inner.eval_unchecked(jet, side) + lambda * signed_power(jet.r, self.alpha)
            }
            Body::Negated(inner) => {
                let flipped = match side {
                    Side::Sub => Side::Super,
                    Side::Super => Side::Sub,
                };
                -inner.eval_unchecked(jet, flipped)
            }
        }
    }

    /// `F[u] + lambda0 sign(u)|u|^alpha`; linear operators stay linear.
    pub fn shift(&self, lambda0: f64) -> OperatorSpec {
        let name = format!("{}+({lambda0})u", self.name);
        match &self.body {
            Body::Linear(c) if self.alpha == 1.0 => {
                let mut coeffs = c.clone();
                coeffs.c = if lambda0 == 0.0 {
                    c.c.clone()
                } else if c.c.is_zero() {
                    Expr::Const(-lambda0)
                } else {
                    Expr::Sub(Box::new(c.c.clone()), Box::new(Expr::Const(lambda0)))
                };
                OperatorSpec { name, body: Body::Linear(coeffs), ..self.clone() }
            }
            _ => OperatorSpec {
                name,
                body: Body::Shifted { inner: Box::new(self.clone()), lambda: lambda0 },
                ..self.clone()
            },
        }
    }

    /// `-F`. Breaks degenerate ellipticity; used to exercise the validators.
    pub fn negate(&self) -> OperatorSpec {
        let name = format!("-({})", self.name);
        match &self.body {
            Body::Linear(c) => OperatorSpec {
                name,
                body: Body::Linear(c.map(|e| Expr::Neg(Box::new(e.clone())))),
                ..self.clone()
            },
            _ => OperatorSpec { name, body: Body::Negated(Box::new(self.clone())), ..self.clone() },
        }
    }

    /// Whether the operator is affine in `u` (linear body, `alpha = 1`).
    pub fn is_affine(&self) -> bool {
        self.alpha == 1.0
            && match &self.body {
                Body::Linear(_) => true,
                Body::Shifted { inner, .. } | Body::Negated(inner) => inner.is_affine(),
                _ => false,
            }
    }

    /// Rough magnitude of the coefficients over the sample box, used to scale
    /// default tolerances. Nonlinear families count as 1.
    pub fn coefficient_scale(&self) -> f64 {
        match &self.body {
            Body::Linear(c) => {
                let mut scale: f64 = 0.0;
                for x in box_probe_points(&self.sample_box) {
                    let at = c.at(&x);
                    scale = scale.max(at.c.abs());
                    for i in 0..self.dim {
                        scale = scale.max(at.b[i].abs());
                        for j in 0..self.dim {
                            scale = scale.max(at.a[i][j].abs());
                        }
                    }
                }
                scale
            }
            Body::Eikonal { b, c } => box_probe_points(&self.sample_box)
                .iter()
                .map(|x| b.eval(x).abs().max(c.eval(x).abs()))
                .fold(0.0, f64::max),
            Body::Shifted { inner, lambda } => inner.coefficient_scale().max(lambda.abs()),
            Body::Negated(inner) => inner.coefficient_scale(),
            _ => 1.0,
        }
    }
}

fn box_probe_points(b: &[(f64, f64)]) -> Vec<Vec<f64>> {
    let ticks = 9;
    let mut pts = vec![Vec::new()];
    for &(lo, hi) in b {
        let mut next = Vec::new();
        for p in &pts {
            for t in 0..ticks {
                let mut q = p.clone();
                q.push(lo + (hi - lo) * t as f64 / (ticks - 1) as f64);
                next.push(q);
            }
        }
        pts = next;
    }
    pts
}
