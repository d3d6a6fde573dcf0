//! Equilibrium census of polygons and triangle meshes relative to a
//! reference point.
//!
//! A cell carries an equilibrium when the foot of the perpendicular from the
//! reference point onto its affine hull lies in the open cell and the plane
//! through that foot orthogonal to the radius supports the cell's star from
//! the side of the reference point. Every defining inequality is evaluated as
//! a normalized slack (a sine or cosine); slacks within `tol` of zero mark the
//! cell as near-degenerate instead of guessing.

mod polygon;
mod polyhedron;

pub use polygon::classify_polygon;
pub use polyhedron::{classify_hull, classify_mesh, classify_patch, Polyhedron};

use serde::{Deserialize, Serialize};

use crate::discretize::Diagonal;
use crate::{EquilibriumKind, Error, Result, Vec3};

/// Default normalized-slack tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Cell carrying an equilibrium. Vertex ids refer to the classified
/// polygon or mesh; edge endpoints are sorted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "cell", rename_all = "lowercase")]
pub enum Carrier {
    Vertex { v: usize },
    Edge { a: usize, b: usize },
    Face { f: usize },
}

impl Carrier {
    pub fn kind(&self) -> EquilibriumKind {
        match self {
            Carrier::Vertex { .. } => EquilibriumKind::Unstable,
            Carrier::Edge { .. } => EquilibriumKind::Saddle,
            Carrier::Face { .. } => EquilibriumKind::Stable,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumPoint {
    pub kind: EquilibriumKind,
    pub carrier: Carrier,
    /// Foot of the perpendicular from the reference point onto the carrier.
    /// Plane curves use `z = 0`.
    pub location: Vec3,
    /// Smallest normalized slack among the defining strict inequalities.
    pub margin: f64,
    /// Real grid index of the carrier's anchor vertex (smallest `(j, i)`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_index: Option<[f64; 2]>,
    /// Real grid indices of all carrier vertices.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub carrier_indices: Vec<[f64; 2]>,
    /// Diagonal of the grid quad containing a face or diagonal-edge carrier.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagonal: Option<Diagonal>,
    /// Carrier touches the boundary of an open patch or curve; excluded from
    /// counts.
    pub boundary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NearDegenerate {
    pub carrier: Carrier,
    /// Signed slack closest to zero.
    pub slack: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Census {
    pub stable: usize,
    pub saddle: usize,
    pub unstable: usize,
}

impl Census {
    pub fn of<'a>(points: impl IntoIterator<Item = &'a EquilibriumPoint>) -> Census {
        let mut c = Census::default();
        for p in points {
            c.add(p.kind);
        }
        c
    }

    pub fn add(&mut self, kind: EquilibriumKind) {
        match kind {
            EquilibriumKind::Stable => self.stable += 1,
            EquilibriumKind::Saddle => self.saddle += 1,
            EquilibriumKind::Unstable => self.unstable += 1,
        }
    }

    /// `S + U - N`.
    pub fn index_sum(&self) -> i64 {
        self.stable as i64 + self.unstable as i64 - self.saddle as i64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSet {
    /// Counted equilibria, ordered by carrier.
    pub points: Vec<EquilibriumPoint>,
    /// Equilibria on boundary cells (not counted).
    pub boundary: Vec<EquilibriumPoint>,
    /// Cells whose classification was within tolerance of changing, sorted by
    /// carrier.
    pub near_degenerate: Vec<NearDegenerate>,
    pub counts: Census,
    /// Classified object is a closed curve or surface.
    pub closed: bool,
    /// Classified object is a plane curve.
    pub planar: bool,
}

impl EquilibriumSet {
    pub(crate) fn assemble(mut all: Vec<EquilibriumPoint>, mut near_degenerate: Vec<NearDegenerate>, closed: bool, planar: bool) -> Self {
        all.sort_by(|a, b| a.carrier.cmp(&b.carrier));
        near_degenerate.sort_by(|a, b| a.carrier.cmp(&b.carrier));
        let (boundary, points): (Vec<_>, Vec<_>) = all.into_iter().partition(|p| p.boundary);
        let counts = Census::of(&points);
        EquilibriumSet { points, boundary, near_degenerate, counts, closed, planar }
    }

    pub fn of_kind(&self, kind: EquilibriumKind) -> impl Iterator<Item = &EquilibriumPoint> {
        self.points.iter().filter(move |p| p.kind == kind)
    }
}

/// Index sum of a closed object: `S + U - N` for a surface (2 for a
/// sphere), `S - U` for a plane curve (0 for a circle).
pub fn poincare_hopf(eqs: &EquilibriumSet) -> Result<i64> {
    if !eqs.closed {
        return Err(Error::NotClosed);
    }
    if eqs.planar {
        Ok(eqs.counts.stable as i64 - eqs.counts.unstable as i64)
    } else {
        Ok(eqs.counts.index_sum())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    Supported,
    NotSupported,
    Degenerate,
}

/// Outcome of a batch of normalized slacks, each required to be positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Slacks {
    pub min: f64,
    /// Slack closest to zero.
    pub critical: f64,
}

impl Slacks {
    pub fn new() -> Self {
        Slacks { min: f64::INFINITY, critical: f64::INFINITY }
    }

    pub fn push(&mut self, s: f64) {
        self.min = self.min.min(s);
        if s.abs() < self.critical.abs() {
            self.critical = s;
        }
    }

    pub fn verdict(&self, tol: f64) -> Support {
        if self.min < -tol || self.min.is_nan() {
            Support::NotSupported
        } else if self.min <= tol {
            Support::Degenerate
        } else {
            Support::Supported
        }
    }
}

/// Normalized support slack of star vertex `x` at `q`:
/// `-⟨x - q, q - o⟩ / (|q - o| |x - q|)`.
pub(crate) fn support_slack(q: Vec3, x: Vec3, origin: Vec3) -> Option<f64> {
    let r = q - origin;
    let d = x - q;
    let norm = r.norm() * d.norm();
    (norm > 0.0).then(|| -d.dot(&r) / norm)
}

/// Whether the plane through `q` orthogonal to `q - origin` has every star
/// vertex strictly on the side of `origin`. Returns the verdict and the
/// smallest normalized slack.
pub fn support_test(q: Vec3, star: &[Vec3], origin: Vec3, tol: f64) -> Result<(Support, f64)> {
    if q == origin {
        return Err(Error::InvalidInput("support point coincides with the reference point".into()));
    }
    let mut slacks = Slacks::new();
    for &x in star {
        if let Some(s) = support_slack(q, x, origin) {
            slacks.push(s);
        }
    }
    if slacks.min == f64::INFINITY {
        return Err(Error::InvalidInput("empty star".into()));
    }
    Ok((slacks.verdict(tol), slacks.min))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_vertex_is_supported() {
        let q = Vec3::new(1.0, 1.0, 1.0);
        let star = [Vec3::new(-1.0, 1.0, 1.0), Vec3::new(1.0, -1.0, 1.0), Vec3::new(1.0, 1.0, -1.0)];
        let (s, margin) = support_test(q, &star, Vec3::zeros(), DEFAULT_TOL).unwrap();
        assert_eq!(s, Support::Supported);
        assert!(margin > 0.5);
    }

    #[test]
    fn flat_grid_vertex_is_degenerate() {
        let q = Vec3::new(0.0, 0.0, 1.0);
        let star = [Vec3::new(0.1, 0.0, 1.0), Vec3::new(0.0, 0.1, 1.0), Vec3::new(-0.1, 0.0, 1.0), Vec3::new(0.0, -0.1, 1.0)];
        assert_eq!(support_test(q, &star, Vec3::zeros(), DEFAULT_TOL).unwrap().0, Support::Degenerate);
    }

    #[test]
    fn saddle_star_is_not_supported() {
        let q = Vec3::new(0.0, 0.0, 1.0);
        let star = [Vec3::new(0.1, 0.0, 1.01), Vec3::new(0.0, 0.1, 0.99), Vec3::new(-0.1, 0.0, 1.01), Vec3::new(0.0, -0.1, 0.99)];
        assert_eq!(support_test(q, &star, Vec3::zeros(), DEFAULT_TOL).unwrap().0, Support::NotSupported);
    }

    #[test]
    fn support_errors() {
        assert!(support_test(Vec3::z(), &[], Vec3::zeros(), DEFAULT_TOL).is_err());
        assert!(support_test(Vec3::zeros(), &[Vec3::x()], Vec3::zeros(), DEFAULT_TOL).is_err());
    }

    #[test]
    fn open_sets_have_no_index_sum() {
        let set = EquilibriumSet::assemble(Vec::new(), Vec::new(), false, false);
        assert!(matches!(poincare_hopf(&set), Err(Error::NotClosed)));
    }
}
