use crate::mesh::TriangleMesh;
use crate::{Error, Result, Vec3};

/// Center of mass of the homogeneous solid bounded by a closed, outward
/// oriented mesh.
pub fn solid_centroid(mesh: &TriangleMesh) -> Result<Vec3> {
    let Some(first) = mesh.vertices.first() else {
        return Err(Error::InvalidInput("empty mesh".into()));
    };
    // the bounding-box center keeps the tetrahedra small
    let (lo, hi) = mesh.vertices.iter().fold((*first, *first), |(lo, hi), p| (lo.inf(p), hi.sup(p)));
    solid_centroid_about(mesh, 0.5 * (lo + hi))
}

/// Same as [`solid_centroid`], decomposing into tetrahedra with apex `apex`.
/// The result does not depend on `apex` up to rounding.
pub fn solid_centroid_about(mesh: &TriangleMesh, apex: Vec3) -> Result<Vec3> {
    mesh.ensure_watertight()?;
    let mut volume = 0.0;
    let mut moment = Vec3::zeros();
    for f in &mesh.faces {
        let [a, b, c] = f.map(|i| mesh.vertices[i] - apex);
        let v = a.dot(&b.cross(&c)) / 6.0;
        volume += v;
        moment += v * (a + b + c) / 4.0;
    }
    let scale = mesh.bbox_diagonal();
    if !(volume > 1e-12 * scale * scale * scale) {
        return Err(Error::Degenerate(format!("enclosed volume {volume:.3e} is not positive")));
    }
    Ok(apex + moment / volume)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::hull_of_samples;
    use crate::geometry::Ellipsoid;
    use crate::mesh::{cube, octahedron};
    use approx::assert_relative_eq;

    #[test]
    fn cube_and_tetrahedron() {
        let c = solid_centroid(&cube(Vec3::new(1.0, 2.0, 3.0), 0.5)).unwrap();
        assert_relative_eq!(c, Vec3::new(1.0, 2.0, 3.0), epsilon = 1e-14);
        let tetra = TriangleMesh::new(
            vec![Vec3::zeros(), Vec3::x(), Vec3::y(), Vec3::z()],
            vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]],
        );
        assert_relative_eq!(solid_centroid(&tetra).unwrap(), Vec3::repeat(0.25), epsilon = 1e-15);
    }

    #[test]
    fn apex_does_not_matter() {
        let m = octahedron(1.3).transformed(&nalgebra::Rotation3::from_euler_angles(0.3, -0.2, 1.1), Vec3::new(4.0, -1.0, 2.0), 1.0);
        let c0 = solid_centroid(&m).unwrap();
        for apex in [Vec3::zeros(), Vec3::new(100.0, -50.0, 7.0), m.vertices[3]] {
            assert_relative_eq!(solid_centroid_about(&m, apex).unwrap(), c0, epsilon = 1e-10);
        }
    }

    #[test]
    fn ellipsoid_center() {
        let e = Ellipsoid::new(1.25, 1.15, 1.0);
        let center = Vec3::new(0.3, -0.2, 0.9);
        let pts: Vec<Vec3> = e.angular_samples(120, 60, (0.37, 0.61)).into_iter().map(|p| p + center).collect();
        let hull = hull_of_samples(&pts).unwrap();
        let c = solid_centroid(&hull.mesh).unwrap();
        assert!((c - center).norm() < 1e-3 * 2.5, "{c}");
    }

    #[test]
    fn rejects_open_and_flat_meshes() {
        let mut m = cube(Vec3::zeros(), 1.0);
        m.faces.pop();
        assert!(matches!(solid_centroid(&m), Err(Error::NotWatertight { .. })));
        let inverted = TriangleMesh::new(cube(Vec3::zeros(), 1.0).vertices, cube(Vec3::zeros(), 1.0).faces.iter().map(|f| [f[0], f[2], f[1]]).collect());
        assert!(matches!(solid_centroid(&inverted), Err(Error::Degenerate(_))));
    }
}
