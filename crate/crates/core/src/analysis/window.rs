use serde::{Deserialize, Serialize};

use crate::classify::{Carrier, Census, EquilibriumSet};
use crate::discretize::{PolygonalCurve, PolyhedralPatch};
use crate::{EquilibriumKind, Error, Result};

/// Equilibria of a grid patch counted in a square window of grid indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowCounts {
    /// Half-width of the window in index units.
    pub k: usize,
    pub center_index: [f64; 2],
    pub unstable: usize,
    pub saddle: usize,
    pub stable: usize,
    /// Near-degenerate cells inside the window; their status is undecided.
    pub near_degenerate: usize,
    pub boundary_safe: bool,
}

impl WindowCounts {
    pub fn census(&self) -> Census {
        Census { stable: self.stable, saddle: self.saddle, unstable: self.unstable }
    }
}

fn carrier_vertices(mesh: &crate::mesh::TriangleMesh, c: &Carrier) -> Vec<usize> {
    match *c {
        Carrier::Vertex { v } => vec![v],
        Carrier::Edge { a, b } => vec![a, b],
        Carrier::Face { f } => mesh.faces[f].to_vec(),
    }
}

/// Counts the equilibria having a carrier vertex with grid index `(i, j)`,
/// `|i - c_i| <= k` and `|j - c_j| <= k`.
///
/// The cells touching the window must lie in the patch interior, so that
/// every counted cell was classified with its full star.
pub fn window_counts(eqs: &EquilibriumSet, patch: &PolyhedralPatch, center: [f64; 2], k: usize) -> Result<WindowCounts> {
    let [i0, i1, j0, j1] = patch.index_bounds();
    let kf = k as f64;
    // one cell of margin: a counted vertex has all its neighbours inside
    let safe = center[0] - kf - 1.0 > i0 && center[0] + kf + 1.0 < i1 && center[1] - kf - 1.0 > j0 && center[1] + kf + 1.0 < j1;
    if !safe {
        return Err(Error::WindowTouchesBoundary { k, ci: center[0], cj: center[1] });
    }
    let inside = |v: usize| {
        let [i, j] = patch.grid[v];
        (i - center[0]).abs() <= kf && (j - center[1]).abs() <= kf
    };
    let in_window = |c: &Carrier| carrier_vertices(&patch.mesh, c).into_iter().any(inside);
    let mut census = Census::default();
    for p in eqs.points.iter().filter(|p| in_window(&p.carrier)) {
        census.add(p.kind);
    }
    let near_degenerate = eqs.near_degenerate.iter().filter(|n| in_window(&n.carrier)).count();
    Ok(WindowCounts {
        k,
        center_index: center,
        unstable: census.unstable,
        saddle: census.saddle,
        stable: census.stable,
        near_degenerate,
        boundary_safe: true,
    })
}

/// Equilibria of a polygon counted in a window of vertex indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveCounts {
    pub unstable: usize,
    pub stable: usize,
    pub near_degenerate: usize,
}

/// Plane-curve analogue of [`window_counts`]: equilibria with a carrier
/// vertex whose index is within `k` of `center`. Indices of closed curves
/// are compared modulo `n`.
pub fn counts_2d(eqs: &EquilibriumSet, curve: &PolygonalCurve, center: f64, k: usize) -> Result<CurveCounts> {
    let kf = k as f64;
    let period = curve.n as f64;
    if curve.closed {
        if 2.0 * kf + 3.0 > period {
            return Err(Error::WindowTouchesBoundary { k, ci: center, cj: 0.0 });
        }
    } else {
        let (lo, hi) = (curve.indices[0], curve.indices[curve.indices.len() - 1]);
        if center - kf - 1.0 <= lo || center + kf + 1.0 >= hi {
            return Err(Error::WindowTouchesBoundary { k, ci: center, cj: 0.0 });
        }
    }
    let dist = |x: f64| {
        let d = x - center;
        if curve.closed {
            let r = d.rem_euclid(period);
            r.min(period - r)
        } else {
            d.abs()
        }
    };
    let inside = |v: usize| dist(curve.indices[v]) <= kf;
    let in_window = |c: &Carrier| match *c {
        Carrier::Vertex { v } => inside(v),
        Carrier::Edge { a, b } => inside(a) || inside(b),
        Carrier::Face { .. } => false,
    };
    let mut out = CurveCounts { unstable: 0, stable: 0, near_degenerate: 0 };
    for p in eqs.points.iter().filter(|p| in_window(&p.carrier)) {
        match p.kind {
            EquilibriumKind::Unstable => out.unstable += 1,
            _ => out.stable += 1,
        }
    }
    out.near_degenerate = eqs.near_degenerate.iter().filter(|n| in_window(&n.carrier)).count();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::classify_patch;
    use crate::classify::DEFAULT_TOL;
    use crate::discretize::{discretize_curve, discretize_surface, discretize_surface_window};
    use crate::geometry::{Ellipse, QuadricPatch, Rect};
    use crate::Vec3;

    #[test]
    fn single_vertex_window_at_the_apex() {
        let q = QuadricPatch::graph(-1.0, 0.0, -1.0, 0.5).with_domain(Rect::new(-20.0 / 41.0, 21.0 / 41.0, -20.0 / 41.0, 21.0 / 41.0));
        let p = discretize_surface(&q, 41, (0.0, 0.0), Vec3::zeros()).unwrap();
        let eqs = classify_patch(&p, Vec3::zeros(), DEFAULT_TOL).unwrap();
        let w = window_counts(&eqs, &p, [0.0, 0.0], 0).unwrap();
        assert_eq!(w.unstable, 1);
        // everything else counted touches the apex vertex
        let apex = (0..p.grid.len()).find(|&v| p.grid[v] == [0.0, 0.0]).unwrap();
        let counted = eqs.points.iter().filter(|e| carrier_vertices(&p.mesh, &e.carrier).iter().any(|&v| p.grid[v] == [0.0, 0.0]));
        assert_eq!(counted.count(), w.unstable + w.saddle + w.stable);
        assert!(eqs.points.iter().any(|e| e.carrier == Carrier::Vertex { v: apex }));
    }

    #[test]
    fn counts_saturate_in_k() {
        let q = QuadricPatch::graph(-1.0, 0.0, -1.0, 0.5);
        for offset in [(0.31, 0.77), (0.5, 0.5), (0.05, 0.62)] {
            let p = discretize_surface_window(&q, 200, offset, Vec3::zeros(), [0.0, 0.0], 20.0).unwrap();
            let eqs = classify_patch(&p, Vec3::zeros(), DEFAULT_TOL).unwrap();
            let series: Vec<WindowCounts> = (0..=16).map(|k| window_counts(&eqs, &p, [0.0, 0.0], k).unwrap()).collect();
            for w in series.windows(2) {
                assert!(w[1].unstable >= w[0].unstable && w[1].saddle >= w[0].saddle && w[1].stable >= w[0].stable);
            }
            let last = series[16];
            assert!(series[8..].iter().all(|w| w.census() == last.census()));
            // an unstable flock: S + U - N = 1 whatever the translate
            assert_eq!(last.census().index_sum(), 1);
        }
    }

    #[test]
    fn window_must_stay_inside() {
        let q = QuadricPatch::graph(-1.0, 0.0, -1.0, 0.5);
        let p = discretize_surface_window(&q, 200, (0.3, 0.3), Vec3::zeros(), [0.0, 0.0], 5.0).unwrap();
        let eqs = classify_patch(&p, Vec3::zeros(), DEFAULT_TOL).unwrap();
        assert!(window_counts(&eqs, &p, [0.0, 0.0], 3).is_ok());
        assert!(matches!(window_counts(&eqs, &p, [0.0, 0.0], 5), Err(Error::WindowTouchesBoundary { .. })));
    }

    #[test]
    fn nearly_flat_curve_point() {
        // rho kappa = -0.01 at (1, 0): U in {0, 1}, S = 1
        let e = Ellipse::new(1.0, 10.0);
        for (n, off) in [(2000, 0.13), (4000, 0.71), (8000, 0.42)] {
            let poly = discretize_curve(&e, n, off).unwrap();
            let eqs = crate::classify::classify_polygon(&poly, crate::Vec2::zeros(), DEFAULT_TOL).unwrap();
            let c = counts_2d(&eqs, &poly, 0.0, 20).unwrap();
            assert!(c.unstable <= 1 && c.stable == 1, "{c:?}");
        }
    }

    #[test]
    fn curve_window_wraps_around() {
        let e = Ellipse::new(2.0, 1.0);
        let poly = discretize_curve(&e, 100, 0.5).unwrap();
        let eqs = crate::classify::classify_polygon(&poly, crate::Vec2::zeros(), DEFAULT_TOL).unwrap();
        // the equilibrium at t = 0 straddles the seam of the closed curve
        let c = counts_2d(&eqs, &poly, 0.0, 5).unwrap();
        assert!(c.unstable >= 1);
        assert!(counts_2d(&eqs, &poly, 0.0, 49).is_err());
    }
}
