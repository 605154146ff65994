//! Fichera classification of boundary points and log-distance barriers for
//! linear operators.
//!
//! A boundary point `ξ` satisfies the Fichera condition when
//! `Dd·A·Dd > 0`, or `Dd·A·Dd = 0` and `Tr(A D²d) + b·Dd < 0`, with `d` the
//! distance to the boundary (positive inside). Distances and their first two
//! derivatives are taken in closed form for each shape.

use serde::{Deserialize, Serialize};

use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::operators::{Jet, LinearCoeffs, OperatorSpec};

/// Threshold for deciding `Dd·A·Dd = 0`.
pub const TOL_POS: f64 = 1e-9;

/// Barrier parameters tried by [`barrier_sweep`].
pub const DELTA_SWEEP: [f64; 6] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FicheraStatus {
    Satisfied,
    Violated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComponentVerdict {
    AllSatisfied,
    AllViolated,
    Mixed,
}

impl ComponentVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            ComponentVerdict::AllSatisfied => "all-satisfied",
            ComponentVerdict::AllViolated => "all-violated",
            ComponentVerdict::Mixed => "mixed",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Advisory {
    #[serde(rename = "mu1-equals-lambda-bar")]
    Mu1EqualsLambdaBar,
    Inconclusive,
}

impl Advisory {
    pub fn as_str(self) -> &'static str {
        match self {
            Advisory::Mu1EqualsLambdaBar => "mu1-equals-lambda-bar",
            Advisory::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FicheraSample {
    pub component: usize,
    pub xi: Vec<f64>,
    pub dad: f64,
    pub drift: f64,
    pub status: FicheraStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub id: usize,
    pub name: String,
    pub verdict: ComponentVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FicheraReport {
    pub operator: String,
    pub domain: String,
    pub samples: Vec<FicheraSample>,
    pub components: Vec<Component>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl FicheraReport {
    /// Status of the sample closest to `x`.
    pub fn status_near(&self, x: &[f64]) -> Option<FicheraStatus> {
        self.samples
            .iter()
            .min_by(|a, b| dist(&a.xi, x).total_cmp(&dist(&b.xi, x)))
            .map(|s| s.status)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarrierReport {
    pub point: Vec<f64>,
    pub delta: f64,
    pub band_width: f64,
    /// `min F[w]` over the band before rescaling.
    pub min_residual: f64,
    /// Factor applied to `w` so that `F[w] >= 1` (`1 / min_residual`), when verified.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    pub verified: bool,
    pub samples: usize,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Distance with gradient and Hessian at a point of the closed domain.
#[derive(Clone, Copy, Debug)]
struct DistJet {
    d: f64,
    g: [f64; 2],
    h: [[f64; 2]; 2],
}

fn round_part(x: &[f64], c: [f64; 2], radius: f64, sign: f64) -> DistJet {
    // d = sign * (radius - |x - c|)
    let v = [x[0] - c[0], x[1] - c[1]];
    let rho = v[0].hypot(v[1]);
    let n = [v[0] / rho, v[1] / rho];
    let mut h = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let id = if i == j { 1.0 } else { 0.0 };
            h[i][j] = -sign * (id - n[i] * n[j]) / rho;
        }
    }
    DistJet { d: sign * (radius - rho), g: [-sign * n[0], -sign * n[1]], h }
}

/// Closed-form distance jet. Near rectangle corners the nearest edge (or the
/// rounded corner arc of an inflated rectangle) is used.
fn distance_jet(domain: &Domain, x: &[f64]) -> DistJet {
    match *domain {
        Domain::Interval { a, b } => {
            if x[0] - a <= b - x[0] {
                DistJet { d: x[0] - a, g: [1.0, 0.0], h: [[0.0; 2]; 2] }
            } else {
                DistJet { d: b - x[0], g: [-1.0, 0.0], h: [[0.0; 2]; 2] }
            }
        }
        Domain::Disk { center, radius } => round_part(x, center, radius, 1.0),
        Domain::Rectangle { a, b, c, d, inflation: e } => {
            let outside_x = x[0] < a || x[0] > b;
            let outside_y = x[1] < c || x[1] > d;
            if e > 0.0 && outside_x && outside_y {
                let cx = if x[0] < a { a } else { b };
                let cy = if x[1] < c { c } else { d };
                let mut j = round_part(x, [cx, cy], e, 1.0);
                j.d = e - dist(x, &[cx, cy]);
                return j;
            }
            let edges = [(x[0] - a, [1.0, 0.0]), (b - x[0], [-1.0, 0.0]), (x[1] - c, [0.0, 1.0]), (d - x[1], [0.0, -1.0])];
            let (dd, g) = edges.iter().copied().fold((f64::INFINITY, [0.0; 2]), |acc, (v, g)| if v < acc.0 { (v, g) } else { acc });
            DistJet { d: dd + e, g, h: [[0.0; 2]; 2] }
        }
    }
}

/// Boundary samples grouped by component: `(component, name, points)`.
fn boundary_samples(domain: &Domain, n: usize, corner_exclusion: f64) -> Vec<(usize, String, Vec<Vec<f64>>)> {
    match *domain {
        Domain::Interval { a, b } => vec![(0, format!("x={a}"), vec![vec![a]]), (1, format!("x={b}"), vec![vec![b]])],
        Domain::Disk { center, radius } => {
            let pts = (0..n.max(4))
                .map(|k| {
                    let t = std::f64::consts::TAU * k as f64 / n.max(4) as f64;
                    vec![center[0] + radius * t.cos(), center[1] + radius * t.sin()]
                })
                .collect();
            vec![(0, "circle".into(), pts)]
        }
        Domain::Rectangle { a, b, c, d, inflation: e } => {
            // an odd count per edge puts a sample at each edge midpoint
            let m = (n / 4).max(3) | 1;
            let ex = if e > 0.0 { 0.0 } else { corner_exclusion };
            let run = |lo: f64, hi: f64| -> Vec<f64> {
                (0..m).map(|k| lo + ex + (hi - lo - 2.0 * ex) * k as f64 / (m - 1) as f64).collect()
            };
            let bottom: Vec<Vec<f64>> = run(a, b).into_iter().map(|x| vec![x, c - e]).collect();
            let top: Vec<Vec<f64>> = run(a, b).into_iter().map(|x| vec![x, d + e]).collect();
            let left: Vec<Vec<f64>> = run(c, d).into_iter().map(|y| vec![a - e, y]).collect();
            let right: Vec<Vec<f64>> = run(c, d).into_iter().map(|y| vec![b + e, y]).collect();
            if e > 0.0 {
                // smooth closed curve: one component
                let mut all = [bottom, right, top, left].concat();
                let corners = [(a, c, std::f64::consts::PI), (b, c, 1.5 * std::f64::consts::PI), (b, d, 0.0), (a, d, 0.5 * std::f64::consts::PI)];
                for (cx, cy, start) in corners {
                    for k in 1..m {
                        let t = start + std::f64::consts::FRAC_PI_2 * k as f64 / m as f64;
                        all.push(vec![cx + e * t.cos(), cy + e * t.sin()]);
                    }
                }
                vec![(0, "boundary".into(), all)]
            } else {
                vec![
                    (0, format!("y={c}"), bottom),
                    (1, format!("x={b}"), right),
                    (2, format!("y={d}"), top),
                    (3, format!("x={a}"), left),
                ]
            }
        }
    }
}

fn linear_of(spec: &OperatorSpec) -> Result<&LinearCoeffs> {
    spec.linear_part()
        .ok_or_else(|| Error::Unsupported(format!("{} is not linear; the Fichera condition needs (A, b)", spec.name)))
}

fn dad_and_drift(coeffs: &LinearCoeffs, domain: &Domain, xi: &[f64]) -> (f64, f64) {
    let dim = domain.dim();
    let at = coeffs.at(xi);
    let j = distance_jet(domain, xi);
    let mut dad = 0.0;
    let mut tr = 0.0;
    let mut bd = 0.0;
    for i in 0..dim {
        bd += at.b[i] * j.g[i];
        for k in 0..dim {
            dad += j.g[i] * at.a[i][k] * j.g[k];
            tr += at.a[i][k] * j.h[k][i];
        }
    }
    (dad, tr + bd)
}

/// Evaluates the Fichera condition on boundary samples and aggregates per component.
pub fn fichera_classify(spec: &OperatorSpec, domain: &Domain, n_samples: usize) -> Result<FicheraReport> {
    fichera_classify_with(spec, domain, n_samples, 1e-6)
}

/// As [`fichera_classify`], excluding `corner_exclusion` at each rectangle corner.
pub fn fichera_classify_with(spec: &OperatorSpec, domain: &Domain, n_samples: usize, corner_exclusion: f64) -> Result<FicheraReport> {
    let coeffs = linear_of(spec)?;
    domain.validate()?;
    if spec.dim != domain.dim() {
        return Err(Error::DimensionMismatch { expected: domain.dim(), got: spec.dim });
    }
    let mut samples = Vec::new();
    let mut components = Vec::new();
    for (id, name, pts) in boundary_samples(domain, n_samples, corner_exclusion) {
        let mut sat = 0;
        for xi in pts {
            let (dad, drift) = dad_and_drift(coeffs, domain, &xi);
            if dad < -TOL_POS {
                return Err(Error::InvalidArgument(format!("Dd.A.Dd = {dad:e} < 0 at {xi:?}: A is not positive semidefinite")));
            }
            let status = if dad > TOL_POS || drift < -TOL_POS { FicheraStatus::Satisfied } else { FicheraStatus::Violated };
            if status == FicheraStatus::Satisfied {
                sat += 1;
            }
            samples.push(FicheraSample { component: id, xi, dad, drift, status });
        }
        let total = samples.iter().filter(|s| s.component == id).count();
        let verdict = if sat == total {
            ComponentVerdict::AllSatisfied
        } else if sat == 0 {
            ComponentVerdict::AllViolated
        } else {
            ComponentVerdict::Mixed
        };
        components.push(Component { id, name, verdict });
    }
    let mut notes = Vec::new();
    if matches!(domain, Domain::Rectangle { inflation, .. } if *inflation == 0.0) {
        notes.push(format!("corners excluded (width {corner_exclusion:e}); each edge is its own component"));
    }
    Ok(FicheraReport { operator: spec.name.clone(), domain: domain.label(), samples, components, notes })
}

/// `μ1 = λ̄1` is guaranteed when no boundary component mixes both statuses.
pub fn equivalence_advisory(report: &FicheraReport) -> Advisory {
    if report.components.iter().any(|c| c.verdict == ComponentVerdict::Mixed) {
        Advisory::Inconclusive
    } else {
        Advisory::Mu1EqualsLambdaBar
    }
}

fn band_samples(domain: &Domain, xi: &[f64], band: f64, n: usize) -> Vec<Vec<f64>> {
    let shift = 1e-12;
    if domain.dim() == 1 {
        let inward = if domain.signed_distance(&[xi[0] + 1e-9]) > 0.0 { 1.0 } else { -1.0 };
        return (0..n.max(2))
            .map(|k| vec![xi[0] + inward * (shift + (band - shift) * k as f64 / (n.max(2) - 1) as f64)])
            .collect();
    }
    let m = (n as f64).sqrt().ceil().max(3.0) as usize;
    let mut pts = Vec::new();
    for j in 0..m {
        for i in 0..m {
            let x = [xi[0] - band + 2.0 * band * i as f64 / (m - 1) as f64, xi[1] - band + 2.0 * band * j as f64 / (m - 1) as f64];
            if domain.signed_distance(&x) > 0.0 && dist(&x, xi) < band {
                pts.push(x.to_vec());
            }
        }
    }
    // the inward normal ray, where the barrier is steepest
    let n_in = distance_jet(domain, &nudge_inside(domain, xi)).g;
    for k in 0..m {
        let t = shift + (band - shift) * k as f64 / m as f64;
        pts.push(vec![xi[0] + t * n_in[0], xi[1] + t * n_in[1]]);
    }
    pts
}

fn nudge_inside(domain: &Domain, xi: &[f64]) -> Vec<f64> {
    let c = domain.centroid();
    let r = dist(xi, &c);
    xi.iter().zip(&c).map(|(x, cc)| x + (cc - x) * 1e-9 / r.max(1e-300)).collect()
}

/// Checks `w = log(δ + d) - log δ` on `Ω ∩ B_band(ξ)`; accepted after rescaling when `min F[w] > 0`.
pub fn verify_log_barrier(spec: &OperatorSpec, domain: &Domain, xi: &[f64], delta: f64, band: f64, n_samples: usize) -> Result<BarrierReport> {
    let coeffs = linear_of(spec)?;
    if !(delta > 0.0) || !(band > 0.0) || band > domain.inradius() / 2.0 {
        return Err(Error::InvalidArgument(format!(
            "need delta > 0 and 0 < band <= inradius/2 = {}, got delta = {delta}, band = {band}",
            domain.inradius() / 2.0
        )));
    }
    if xi.len() != domain.dim() || domain.signed_distance(xi).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("{xi:?} is not a boundary point of {}", domain.label())));
    }
    let (dad, drift) = dad_and_drift(coeffs, domain, xi);
    if !(dad > TOL_POS || drift < -TOL_POS) {
        return Err(Error::InvalidArgument(format!(
            "Fichera condition violated at {xi:?} (dAd = {dad:e}, drift = {drift:e}); no barrier of this form exists"
        )));
    }
    let dim = domain.dim();
    let pts = band_samples(domain, xi, band, n_samples);
    let mut min_res = f64::INFINITY;
    for x in &pts {
        let j = distance_jet(domain, x);
        let s = delta + j.d;
        let w = s.ln() - delta.ln();
        let p: Vec<f64> = (0..dim).map(|i| j.g[i] / s).collect();
        let mut hess = vec![0.0; dim * dim];
        for i in 0..dim {
            for k in 0..dim {
                hess[i * dim + k] = j.h[i][k] / s - j.g[i] * j.g[k] / (s * s);
            }
        }
        // tiny asymmetry from the closed forms is symmetrized away
        for i in 0..dim {
            for k in 0..i {
                let avg = 0.5 * (hess[i * dim + k] + hess[k * dim + i]);
                hess[i * dim + k] = avg;
                hess[k * dim + i] = avg;
            }
        }
        let jet = Jet::new(x, w, &p, &hess)?;
        min_res = min_res.min(spec.eval(&jet)?);
    }
    let verified = min_res > TOL_POS;
    Ok(BarrierReport {
        point: xi.to_vec(),
        delta,
        band_width: band,
        min_residual: min_res,
        scale: verified.then(|| 1.0 / min_res),
        verified,
        samples: pts.len(),
    })
}

/// Tries each `δ` in [`DELTA_SWEEP`]; returns the first verified report, or the best one.
pub fn barrier_sweep(spec: &OperatorSpec, domain: &Domain, xi: &[f64], band: f64, n_samples: usize) -> Result<BarrierReport> {
    let mut best: Option<BarrierReport> = None;
    for &delta in &DELTA_SWEEP {
        let r = verify_log_barrier(spec, domain, xi, delta, band, n_samples)?;
        if r.verified {
            return Ok(r);
        }
        if best.as_ref().is_none_or(|b| r.min_residual > b.min_residual) {
            best = Some(r);
        }
    }
    Ok(best.expect("non-empty sweep"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::operators::{lookup, zoo};

    fn spec(name: &str) -> OperatorSpec {
        lookup(name).unwrap().spec
    }

    fn statuses(r: &FicheraReport) -> Vec<ComponentVerdict> {
        r.components.iter().map(|c| c.verdict).collect()
    }

    #[test]
    fn interval_fixtures() {
        use ComponentVerdict::*;
        let unit = Domain::interval(0.0, 1.0);
        let r = fichera_classify(&spec("double-drift"), &unit, 10).unwrap();
        assert_eq!(statuses(&r), vec![AllViolated, AllSatisfied]);
        assert_eq!((r.samples[0].dad, r.samples[0].drift), (0.0, 0.0));
        assert_eq!(r.samples[1].drift, -2.0);
        let r = fichera_classify(&spec("linear-drift"), &unit, 10).unwrap();
        assert_eq!(statuses(&r), vec![AllViolated, AllSatisfied]);
        assert_eq!(r.samples[1].drift, -1.0);
        let r = fichera_classify(&spec("neg-laplacian-1d"), &unit, 10).unwrap();
        assert_eq!(statuses(&r), vec![AllSatisfied, AllSatisfied]);
        for name in ["double-drift", "linear-drift", "neg-laplacian-1d"] {
            let r = fichera_classify(&spec(name), &unit, 10).unwrap();
            assert_eq!(equivalence_advisory(&r), Advisory::Mu1EqualsLambdaBar);
        }
    }

    #[test]
    fn anisotropic_square_has_a_violated_bottom_edge() {
        use ComponentVerdict::*;
        let r = fichera_classify(&spec("anisotropic-edge"), &Domain::rectangle(0.0, 1.0, 0.0, 1.0), 100).unwrap();
        assert_eq!(statuses(&r), vec![AllViolated, AllSatisfied, AllSatisfied, AllSatisfied]);
        assert_eq!(equivalence_advisory(&r), Advisory::Mu1EqualsLambdaBar);
    }

    #[test]
    fn grushin_bottom_edge_is_mixed() {
        let r = fichera_classify(&spec("grushin-2"), &Domain::rectangle(-1.0, 1.0, 0.0, 1.0), 100).unwrap();
        assert_eq!(r.components[0].verdict, ComponentVerdict::Mixed);
        assert_eq!(equivalence_advisory(&r), Advisory::Inconclusive);
    }

    #[test]
    fn disk_and_inflated_rectangle_are_single_components() {
        let lap = spec("neg-laplacian-2d");
        let r = fichera_classify(&lap, &Domain::disk(0.0, 0.0, 1.0), 64).unwrap();
        assert_eq!(statuses(&r), vec![ComponentVerdict::AllSatisfied]);
        let r = fichera_classify(&lap, &Domain::rectangle(0.0, 1.0, 0.0, 1.0).inflate(0.1).unwrap(), 64).unwrap();
        assert_eq!(r.components.len(), 1);
    }

    #[test]
    fn nonlinear_operators_are_rejected() {
        assert!(matches!(
            fichera_classify(&spec("neg-p1-2d"), &Domain::disk(0.0, 0.0, 1.0), 10),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn dad_is_nonnegative_and_scale_invariant() {
        for e in zoo() {
            let Some(l) = e.spec.linear_part() else { continue };
            let r = fichera_classify(&e.spec, &e.domain_default, 200).unwrap();
            assert!(r.samples.iter().all(|s| s.dad >= -1e-10), "{}", e.name);
            let triple = |v: &Expr| Expr::Mul(Box::new(Expr::Const(3.0)), Box::new(v.clone()));
            let scaled = LinearCoeffs::new(
                l.a.iter().map(|row| row.iter().map(triple).collect()).collect(),
                l.b.iter().map(triple).collect(),
                triple(&l.c),
            )
            .unwrap();
            let r3 = fichera_classify(&OperatorSpec::linear(&e.name, scaled), &e.domain_default, 200).unwrap();
            assert_eq!(statuses(&r), statuses(&r3), "{}", e.name);
        }
    }

    #[test]
    fn laplacian_barrier_closed_form() {
        let r = verify_log_barrier(&spec("neg-laplacian-1d"), &Domain::interval(0.0, 1.0), &[0.0], 0.1, 0.1, 1000).unwrap();
        assert!(r.verified);
        // F[w] = 1/(delta + x)^2 is smallest at the far end of the band
        assert!((r.min_residual - 25.0).abs() < 1e-9, "{}", r.min_residual);
        assert!((r.scale.unwrap() - 0.04).abs() < 1e-12);
    }

    #[test]
    fn drift_barrier_at_the_satisfied_end() {
        let s = spec("double-drift");
        let r = verify_log_barrier(&s, &Domain::interval(0.0, 1.0), &[1.0], 0.1, 0.1, 1000).unwrap();
        assert!(r.verified);
        assert!((r.min_residual - 2.0 * 0.9 / 0.2).abs() < 1e-9, "{}", r.min_residual);
        assert!(verify_log_barrier(&s, &Domain::interval(0.0, 1.0), &[0.0], 0.1, 0.1, 1000).is_err());
        assert!(verify_log_barrier(&s, &Domain::interval(0.0, 1.0), &[1.0], 0.1, 0.6, 1000).is_err());
    }

    #[test]
    fn two_dimensional_barriers() {
        let lap = spec("neg-laplacian-2d");
        let sq = Domain::rectangle(0.0, 1.0, 0.0, 1.0);
        assert!(barrier_sweep(&lap, &sq, &[0.5, 0.0], 0.1, 400).unwrap().verified);
        let disk = Domain::disk(0.0, 0.0, 1.0);
        assert!(barrier_sweep(&lap, &disk, &[0.0, 1.0], 0.1, 400).unwrap().verified);
        // the violated bottom edge of diag(1, y) admits no barrier
        assert!(verify_log_barrier(&spec("anisotropic-edge"), &sq, &[0.5, 0.0], 0.1, 0.1, 400).is_err());
        // its satisfied left edge does
        assert!(barrier_sweep(&spec("anisotropic-edge"), &sq, &[0.0, 0.5], 0.1, 400).unwrap().verified);
    }
}
