//! Polygonal and polyhedral approximations.

pub mod curve;
pub mod hull;
pub mod patch;

pub use curve::{discretize_curve, PolygonalCurve};
pub use hull::{hull_of_samples, ClosedHullMesh, Provenance};
pub use patch::{choose_diagonal, diagonal_volume, discretize_surface, discretize_surface_window, Diagonal, PatchMetadata, PolyhedralPatch};

use crate::Vec3;

/// Adaptive-precision orientation: positive when `d` lies below the plane of
/// `a, b, c` (counterclockwise seen from above), negative above, zero when
/// coplanar.
pub(crate) fn orient3d(a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> f64 {
    let p = |v: Vec3| robust::Coord3D { x: v.x, y: v.y, z: v.z };
    robust::orient3d(p(a), p(b), p(c), p(d))
}
