//! Bounded domains, their inflations `Ω + B_ε`, lattice grids and grid fields.
//!
//! Every grid lives on the lattice `h Z^N` anchored at the origin, so grids
//! built with the same `h` on nested or inflated domains share their nodes.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A bounded domain in one or two dimensions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Domain {
    Interval {
        a: f64,
        b: f64,
    },
    /// `(a, b) x (c, d)`, optionally inflated by `inflation` (rounded corners).
    Rectangle {
        a: f64,
        b: f64,
        c: f64,
        d: f64,
        #[serde(default, skip_serializing_if = "is_zero")]
        inflation: f64,
    },
    Disk {
        center: [f64; 2],
        radius: f64,
    },
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

impl Domain {
    pub fn interval(a: f64, b: f64) -> Domain {
        Domain::Interval { a, b }
    }

    pub fn rectangle(a: f64, b: f64, c: f64, d: f64) -> Domain {
        Domain::Rectangle { a, b, c, d, inflation: 0.0 }
    }

    pub fn disk(cx: f64, cy: f64, radius: f64) -> Domain {
        Domain::Disk { center: [cx, cy], radius }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            _ => 2,
        }
    }

    /// Checks that the parameters describe a non-empty domain.
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Domain::Interval { a, b } => a.is_finite() && b.is_finite() && a < b,
            Domain::Rectangle { a, b, c, d, inflation } => {
                [a, b, c, d, inflation].iter().all(|v| v.is_finite()) && a < b && c < d && inflation >= 0.0
            }
            Domain::Disk { center, radius } => center.iter().all(|v| v.is_finite()) && radius > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("degenerate domain {self:?}")))
        }
    }

    /// Signed distance to the boundary, positive inside.
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        match *self {
            Domain::Interval { a, b } => (x[0] - a).min(b - x[0]),
            Domain::Rectangle { a, b, c, d, inflation } => {
                let dx = (a - x[0]).max(x[0] - b);
                let dy = (c - x[1]).max(x[1] - d);
                let base = if dx <= 0.0 && dy <= 0.0 {
                    -dx.max(dy)
                } else {
                    -dx.max(0.0).hypot(dy.max(0.0))
                };
                base + inflation
            }
            Domain::Disk { center, radius } => radius - (x[0] - center[0]).hypot(x[1] - center[1]),
        }
    }

    /// `Ω + B_eps`, whose signed distance is `d + eps`.
    pub fn inflate(&self, eps: f64) -> Result<Domain> {
        if !(eps >= 0.0) {
            return Err(Error::InvalidArgument(format!("inflation must be >= 0, got {eps}")));
        }
        Ok(match *self {
            Domain::Interval { a, b } => Domain::Interval { a: a - eps, b: b + eps },
            Domain::Rectangle { a, b, c, d, inflation } => {
                Domain::Rectangle { a, b, c, d, inflation: inflation + eps }
            }
            Domain::Disk { center, radius } => Domain::Disk { center, radius: radius + eps },
        })
    }

    /// Axis-aligned bounding box, one `(lo, hi)` pair per axis.
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        match *self {
            Domain::Interval { a, b } => vec![(a, b)],
            Domain::Rectangle { a, b, c, d, inflation: e } => vec![(a - e, b + e), (c - e, d + e)],
            Domain::Disk { center, radius } => {
                vec![(center[0] - radius, center[0] + radius), (center[1] - radius, center[1] + radius)]
            }
        }
    }

    pub fn inradius(&self) -> f64 {
        match *self {
            Domain::Interval { a, b } => 0.5 * (b - a),
            Domain::Rectangle { a, b, c, d, inflation } => 0.5 * (b - a).min(d - c) + inflation,
            Domain::Disk { radius, .. } => radius,
        }
    }

    pub fn centroid(&self) -> Vec<f64> {
        self.bounding_box().iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.signed_distance(x) > 0.0
    }

    /// Short human-readable label used in reports.
    pub fn label(&self) -> String {
        match *self {
            Domain::Interval { a, b } => format!("({a},{b})"),
            Domain::Rectangle { a, b, c, d, inflation: 0.0 } => format!("({a},{b})x({c},{d})"),
            Domain::Rectangle { a, b, c, d, inflation } => format!("({a},{b})x({c},{d})+B_{inflation}"),
            Domain::Disk { center, radius } => format!("disk(({},{}),{radius})", center[0], center[1]),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeClass {
    Interior,
    Band,
    Exterior,
}

/// Uniform lattice over the bounding box of a domain plus a one-cell margin.
#[derive(Clone, Debug)]
pub struct Grid {
    domain: Domain,
    h: f64,
    dim: usize,
    /// Lattice index of node 0 per axis.
    origin: [i64; 2],
    /// Node count per axis (`shape[1] == 1` in 1D).
    shape: [usize; 2],
    sd: Vec<f64>,
    class: Vec<NodeClass>,
}

impl Grid {
    /// Builds the grid; fails when `h` exceeds the inradius or leaves no interior node.
    pub fn new(domain: &Domain, h: f64) -> Result<Grid> {
        domain.validate()?;
        let inradius = domain.inradius();
        if !(h > 0.0) || h > inradius {
            return Err(Error::GridTooCoarse { h, max_h: inradius });
        }
        let dim = domain.dim();
        let bbox = domain.bounding_box();
        let mut origin = [0i64; 2];
        let mut shape = [1usize; 2];
        for (k, &(lo, hi)) in bbox.iter().enumerate() {
            let first = (lo / h).floor() as i64 - 1;
            let last = (hi / h).ceil() as i64 + 1;
            origin[k] = first;
            shape[k] = (last - first + 1) as usize;
        }
        let n = shape[0] * shape[1];
        let mut grid = Grid { domain: domain.clone(), h, dim, origin, shape, sd: vec![0.0; n], class: vec![NodeClass::Exterior; n] };
        for i in 0..n {
            let x = grid.x(i);
            grid.sd[i] = domain.signed_distance(&x[..dim]);
        }
        // lattice coordinates are products k*h, so compare with a little slack
        let half = 0.5 * h * (1.0 - 1e-9);
        for i in 0..n {
            let d = grid.sd[i];
            grid.class[i] = if d >= half {
                NodeClass::Interior
            } else if d.abs() < half {
                NodeClass::Band
            } else {
                NodeClass::Exterior
            };
        }
        for i in 0..n {
            if grid.class[i] == NodeClass::Exterior
                && grid.neighbors8(i).any(|j| grid.class[j] == NodeClass::Interior)
            {
                grid.class[i] = NodeClass::Band;
            }
        }
        if !grid.class.contains(&NodeClass::Interior) {
            return Err(Error::GridTooCoarse { h, max_h: inradius });
        }
        Ok(grid)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.sd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sd.is_empty()
    }

    pub fn shape(&self) -> [usize; 2] {
        self.shape
    }

    #[inline]
    pub fn ij(&self, i: usize) -> (usize, usize) {
        (i % self.shape[0], i / self.shape[0])
    }

    /// Integer lattice coordinates of node `i`.
    pub fn lattice(&self, i: usize) -> [i64; 2] {
        let (a, b) = self.ij(i);
        [self.origin[0] + a as i64, self.origin[1] + b as i64]
    }

    /// Node at the given lattice coordinates, if inside the grid.
    pub fn find(&self, k: [i64; 2]) -> Option<usize> {
        let a = k[0] - self.origin[0];
        let b = k[1] - self.origin[1];
        if a < 0 || b < 0 || a >= self.shape[0] as i64 || b >= self.shape[1] as i64 {
            return None;
        }
        Some(b as usize * self.shape[0] + a as usize)
    }

    /// Node coordinates; the second entry is 0 in 1D.
    #[inline]
    pub fn x(&self, i: usize) -> [f64; 2] {
        let k = self.lattice(i);
        [k[0] as f64 * self.h, if self.dim == 2 { k[1] as f64 * self.h } else { 0.0 }]
    }

    pub fn signed_distance(&self, i: usize) -> f64 {
        self.sd[i]
    }

    pub fn class(&self, i: usize) -> NodeClass {
        self.class[i]
    }

    /// Nodes carrying unknowns: those in the closed domain (`d >= 0`).
    pub fn is_free(&self, i: usize) -> bool {
        self.sd[i] >= 0.0
    }

    /// Neighbor at lattice offset `(dx, dy)`.
    #[inline]
    pub fn offset(&self, i: usize, dx: i64, dy: i64) -> Option<usize> {
        let (a, b) = self.ij(i);
        let a = a as i64 + dx;
        let b = b as i64 + dy;
        if a < 0 || b < 0 || a >= self.shape[0] as i64 || b >= self.shape[1] as i64 {
            return None;
        }
        Some(b as usize * self.shape[0] + a as usize)
    }

    /// Axis and diagonal neighbors (two in 1D, eight in 2D).
    pub fn neighbors8(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let offs: &[(i64, i64)] = if self.dim == 1 {
            &[(-1, 0), (1, 0)]
        } else {
            &[(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)]
        };
        offs.iter().filter_map(move |&(dx, dy)| self.offset(i, dx, dy))
    }

    pub fn nodes_of(&self, class: NodeClass) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.class[i] == class).collect()
    }

    /// Grid on `Ω + B_eps` with the same lattice.
    pub fn inflated(&self, eps: f64) -> Result<Grid> {
        Grid::new(&self.domain.inflate(eps)?, self.h)
    }

    /// Nearest node to a point.
    pub fn nearest(&self, x: &[f64]) -> Option<usize> {
        let kx = (x[0] / self.h).round() as i64;
        let ky = if self.dim == 2 { (x[1] / self.h).round() as i64 } else { self.origin[1] };
        self.find([kx, ky])
    }
}

/// `build_grid` under its usual name.
pub fn build_grid(domain: &Domain, h: f64) -> Result<Grid> {
    Grid::new(domain, h)
}

/// Values on a grid.
#[derive(Clone, Debug)]
pub struct Field {
    grid: Arc<Grid>,
    pub values: Vec<f64>,
    /// Set by the blowup detector; a diverged field may hold non-finite values.
    pub diverged: bool,
}

impl Field {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Field> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite value at node {i}")));
        }
        Ok(Field { grid, values, diverged: false })
    }

    pub fn diverged(grid: Arc<Grid>, values: Vec<f64>) -> Field {
        Field { grid, values, diverged: true }
    }

    pub fn zeros(grid: Arc<Grid>) -> Field {
        let n = grid.len();
        Field { grid, values: vec![0.0; n], diverged: false }
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(&[f64]) -> f64) -> Field {
        let dim = grid.dim();
        let values = (0..grid.len()).map(|i| f(&grid.x(i)[..dim])).collect();
        Field { grid, values, diverged: false }
    }

    /// Indicator of a single node.
    pub fn indicator(grid: Arc<Grid>, node: usize) -> Field {
        let mut f = Field::zeros(grid);
        f.values[node] = 1.0;
        f
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }

    pub fn positive_part(&self) -> f64 {
        self.max().max(0.0)
    }

    pub fn is_positive_on(&self, class: NodeClass) -> bool {
        (0..self.grid.len()).all(|i| self.grid.class(i) != class || self.values[i] > 0.0)
    }

    pub fn is_bounded_by(&self, threshold: f64) -> bool {
        !self.diverged && self.values.iter().all(|v| v.abs() <= threshold)
    }

    /// CSV with columns `x[,y],class,value`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let dim = self.grid.dim();
        if dim == 1 {
            w.write_record(["x", "class", "value"])?;
        } else {
            w.write_record(["x", "y", "class", "value"])?;
        }
        for i in 0..self.grid.len() {
            let x = self.grid.x(i);
            let class = match self.grid.class(i) {
                NodeClass::Interior => "interior",
                NodeClass::Band => "band",
                NodeClass::Exterior => "exterior",
            };
            let mut rec = vec![format_sig(x[0])];
            if dim == 2 {
                rec.push(format_sig(x[1]));
            }
            rec.push(class.to_string());
            rec.push(format_sig(self.values[i]));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Formats with 12 significant digits, the fixed precision used by all reports.
pub fn format_sig(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{}", if v == 0.0 { 0.0 } else { v });
    }
    let rounded: f64 = format!("{v:.11e}").parse().unwrap_or(v);
    format!("{rounded}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coords(g: &Grid, class: NodeClass) -> Vec<Vec<f64>> {
        g.nodes_of(class).into_iter().map(|i| g.x(i)[..g.dim()].to_vec()).collect()
    }

    #[test]
    fn interval_quarter_grid() {
        let g = Grid::new(&Domain::interval(0.0, 1.0), 0.25).unwrap();
        assert_eq!(coords(&g, NodeClass::Interior), vec![vec![0.25], vec![0.5], vec![0.75]]);
        assert_eq!(coords(&g, NodeClass::Band), vec![vec![0.0], vec![1.0]]);
    }

    #[test]
    fn square_half_grid_has_one_interior_node() {
        let g = Grid::new(&Domain::rectangle(0.0, 1.0, 0.0, 1.0), 0.5).unwrap();
        assert_eq!(coords(&g, NodeClass::Interior), vec![vec![0.5, 0.5]]);
    }

    #[test]
    fn disk_interior_nodes_match_enumeration() {
        let h = 0.4;
        let g = Grid::new(&Domain::disk(0.0, 0.0, 1.0), h).unwrap();
        let mut expected = Vec::new();
        for j in -3i64..=3 {
            for i in -3i64..=3 {
                let (x, y) = (i as f64 * h, j as f64 * h);
                if x.hypot(y) <= 1.0 - 0.2 {
                    expected.push(vec![x, y]);
                }
            }
        }
        assert_eq!(coords(&g, NodeClass::Interior), expected);
    }

    #[test]
    fn coarse_grid_rejected() {
        assert!(matches!(
            Grid::new(&Domain::interval(0.0, 1.0), 0.6),
            Err(Error::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn inflate_examples() {
        assert_eq!(
            Domain::interval(0.0, 1.0).inflate(0.1).unwrap(),
            Domain::interval(-0.1, 1.1)
        );
        assert_eq!(Domain::disk(0.0, 0.0, 1.0).inflate(0.5).unwrap(), Domain::disk(0.0, 0.0, 1.5));
        let r = Domain::rectangle(0.0, 1.0, 0.0, 1.0).inflate(0.1).unwrap();
        assert!(r.contains(&[-0.05, -0.05]) && r.contains(&[1.05, 1.05]));
        assert!(!r.contains(&[-0.09, -0.09]));
        assert!(Domain::interval(0.0, 1.0).inflate(-0.1).is_err());
        assert_eq!(Domain::interval(0.0, 1.0).inflate(0.0).unwrap(), Domain::interval(0.0, 1.0));
    }

    #[test]
    fn edges_without_band_gaps() {
        let g = Grid::new(&Domain::disk(0.0, 0.0, 1.0), 0.1).unwrap();
        for i in g.nodes_of(NodeClass::Interior) {
            for j in g.neighbors8(i) {
                assert_ne!(g.class(j), NodeClass::Exterior);
            }
        }
    }

    #[test]
    fn field_validation_and_csv() {
        let g = Arc::new(Grid::new(&Domain::interval(0.0, 1.0), 0.25).unwrap());
        assert!(Field::new(g.clone(), vec![0.0; 2]).is_err());
        assert!(Field::new(g.clone(), vec![f64::NAN; g.len()]).is_err());
        let f = Field::from_fn(g.clone(), |x| x[0] * (1.0 - x[0]));
        assert_eq!(f.max(), 0.25);
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,class,value\n"));
        assert!(text.contains("0.5,interior,0.25"));
    }

    #[test]
    fn twelve_digit_formatting() {
        assert_eq!(format_sig(std::f64::consts::PI), "3.14159265359");
        assert_eq!(format_sig(0.1 + 0.2), "0.3");
        assert_eq!(format_sig(-2.0), "-2");
    }
}
