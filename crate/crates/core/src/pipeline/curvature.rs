use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::geometry::FundamentalForms;
use crate::mesh::{Topology, TriangleMesh};
use crate::{Error, Result, Vec3};

/// RMS fit residual, relative to the neighborhood radius, above which an
/// estimate is flagged.
pub const LOW_CONFIDENCE_RESIDUAL: f64 = 1e-2;

/// Principal curvatures at a mesh vertex, signed against the outward normal
/// of the mesh: both are negative on a convex body.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureEstimate {
    pub at: Vec3,
    pub k1: f64,
    pub k2: f64,
    /// RMS height residual of the fit.
    pub fit_residual: f64,
    /// Largest distance from the vertex to a fitted neighbor.
    pub neighborhood_radius: f64,
    pub normal: Vec3,
    pub low_confidence: bool,
}

/// Area-weighted normal of the faces around `v`, unit length.
pub fn vertex_normal(mesh: &TriangleMesh, topo: &Topology, v: usize) -> Result<Vec3> {
    let n: Vec3 = topo.vertex_faces[v].iter().map(|&f| mesh.face_normal(f)).sum();
    let len = n.norm();
    if !(len > 0.0) {
        return Err(Error::Degenerate(format!("vertex {v} has no normal")));
    }
    Ok(n / len)
}

/// Fits `h = ½(a x² + 2b xy + c y²) + d x + e y` to the `ring`-neighborhood
/// of `vertex` in a tangent frame of its area-weighted normal.
pub fn estimate_curvatures(mesh: &TriangleMesh, vertex: usize, ring: usize) -> Result<CurvatureEstimate> {
    let topo = mesh.topology()?;
    estimate_curvatures_with(mesh, &topo, vertex, ring)
}

pub fn estimate_curvatures_with(mesh: &TriangleMesh, topo: &Topology, vertex: usize, ring: usize) -> Result<CurvatureEstimate> {
    if vertex >= mesh.vertices.len() {
        return Err(Error::InvalidInput(format!("vertex {vertex} out of range")));
    }
    let neighbors = topo.ring(vertex, ring);
    if neighbors.len() < 5 {
        return Err(Error::InvalidInput(format!("vertex {vertex} has {} neighbors within {ring} rings, need 5", neighbors.len())));
    }
    let p0 = mesh.vertices[vertex];
    let normal = vertex_normal(mesh, topo, vertex)?;
    let helper = if normal.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let t1 = helper.cross(&normal).normalize();
    let t2 = normal.cross(&t1);
    let local: Vec<(f64, f64, f64)> = neighbors
        .iter()
        .map(|&w| {
            let d = mesh.vertices[w] - p0;
            (d.dot(&t1), d.dot(&t2), d.dot(&normal))
        })
        .collect();
    let radius = neighbors.iter().map(|&w| (mesh.vertices[w] - p0).norm()).fold(0.0, f64::max);
    // columns scaled to comparable size
    let s = radius;
    let a = DMatrix::from_fn(local.len(), 5, |r, c| {
        let (x, y, _) = local[r];
        let (x, y) = (x / s, y / s);
        [0.5 * x * x, x * y, 0.5 * y * y, x, y][c]
    });
    let rhs = DVector::from_iterator(local.len(), local.iter().map(|l| l.2 / s));
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if !(svd.singular_values.min() > 1e-10 * smax) {
        return Err(Error::RankDeficient);
    }
    let coef = svd.solve(&rhs, 0.0).map_err(|_| Error::RankDeficient)?;
    let resid = (&a * &coef - &rhs).norm() * s / (local.len() as f64).sqrt();
    let (ca, cb, cc) = (coef[0] / s, coef[1] / s, coef[2] / s);
    let (cd, ce) = (coef[3], coef[4]);
    let w = (1.0 + cd * cd + ce * ce).sqrt();
    let forms = FundamentalForms::from_values(1.0 + cd * cd, cd * ce, 1.0 + ce * ce, ca / w, cb / w, cc / w);
    let (k1, k2) = forms.principal_curvatures()?;
    Ok(CurvatureEstimate {
        at: p0,
        k1,
        k2,
        fit_residual: resid,
        neighborhood_radius: radius,
        normal,
        low_confidence: !resid.is_finite() || resid > LOW_CONFIDENCE_RESIDUAL * radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::hull_of_samples;
    use crate::geometry::Ellipsoid;

    /// Grid mesh of `f` over `[-h m, h m]²`, counterclockwise seen from `+z`.
    fn graph_mesh(m: i64, h: f64, f: impl Fn(f64, f64) -> Vec3) -> (TriangleMesh, usize) {
        let side = (2 * m + 1) as usize;
        let mut vertices = Vec::new();
        for j in -m..=m {
            for i in -m..=m {
                vertices.push(f(i as f64 * h, j as f64 * h));
            }
        }
        let mut faces = Vec::new();
        for j in 0..side - 1 {
            for i in 0..side - 1 {
                let v = j * side + i;
                faces.push([v, v + 1, v + side + 1]);
                faces.push([v, v + side + 1, v + side]);
            }
        }
        (TriangleMesh::new(vertices, faces), (side * side) / 2)
    }

    #[test]
    fn plane() {
        let (m, c) = graph_mesh(4, 0.1, |x, y| Vec3::new(x, y, 0.0));
        let e = estimate_curvatures(&m, c, 2).unwrap();
        assert!(e.k1.abs() < 1e-8 && e.k2.abs() < 1e-8, "{e:?}");
        assert!(e.fit_residual < 1e-12 && !e.low_confidence);
        assert!((e.normal - Vec3::z()).norm() < 1e-12);
    }

    #[test]
    fn sphere() {
        let r = 2.0;
        let hull = hull_of_samples(&Ellipsoid::new(r, r, r).angular_samples(200, 100, (0.3, 0.55))).unwrap();
        let mesh = &hull.mesh;
        for target in [Vec3::new(r, 0.0, 0.0), Vec3::new(0.0, -r, 0.0), Vec3::new(0.0, 1.0, 3f64.sqrt())] {
            let v = (0..mesh.vertices.len()).min_by(|&a, &b| (mesh.vertices[a] - target).norm().total_cmp(&(mesh.vertices[b] - target).norm())).unwrap();
            let e = estimate_curvatures(mesh, v, 2).unwrap();
            assert!(e.k1 <= e.k2);
            for k in [e.k1, e.k2] {
                assert!((k + 1.0 / r).abs() < 0.02 / r, "{e:?}");
            }
            assert!(e.normal.dot(&mesh.vertices[v]) > 0.0);
        }
    }

    #[test]
    fn cylinder_patch() {
        let r = 1.5;
        let (m, c) = graph_mesh(6, 0.02, |x, y| {
            let t = x / r;
            Vec3::new(r * t.sin(), y, r * t.cos() - r)
        });
        let e = estimate_curvatures(&m, c, 2).unwrap();
        assert!((e.k1 + 1.0 / r).abs() < 0.05 / r, "{e:?}");
        assert!(e.k2.abs() < 0.05 / r, "{e:?}");
    }

    #[test]
    fn tilted_paraboloid() {
        // the sign follows the face winding, not the frame
        let (m, c) = graph_mesh(5, 0.01, |x, y| Vec3::new(x, y, 0.5 * (x * x + 4.0 * y * y)));
        let e = estimate_curvatures(&m, c, 2).unwrap();
        assert!((e.k1 - 1.0).abs() < 0.01 && (e.k2 - 4.0).abs() < 0.04, "{e:?}");
    }

    #[test]
    fn too_few_neighbors() {
        let (m, _) = graph_mesh(1, 0.1, |x, y| Vec3::new(x, y, 0.0));
        assert!(matches!(estimate_curvatures(&m, 0, 1), Err(Error::InvalidInput(_))));
        // all neighbors on one line
        let line = TriangleMesh::new(
            vec![Vec3::zeros(), Vec3::x(), Vec3::new(2.0, 0.0, 0.0), Vec3::new(3.0, 0.0, 0.0), Vec3::new(4.0, 0.0, 0.0), Vec3::new(5.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)],
            vec![[0, 1, 6], [1, 2, 6], [2, 3, 6], [3, 4, 6], [4, 5, 6]],
        );
        assert!(estimate_curvatures(&line, 6, 1).is_err());
    }
}
