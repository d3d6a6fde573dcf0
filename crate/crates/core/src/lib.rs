//! Static equilibria of finely discretized convex curves and surfaces.
//!
//! A smooth convex body has finitely many generic equilibrium points relative
//! to an interior reference point (its center of gravity). An equidistant
//! polygonal or polyhedral approximation of the boundary replaces each of them
//! by a *flock* of discrete equilibria. The number of stable, saddle and
//! unstable points in a flock fluctuates around real-valued *imaginary
//! equilibrium indices* determined by the distance `rho` of the smooth
//! equilibrium and its principal curvatures.
//!
//! The crate is organised along the computation:
//!
//! - [`geometry`]: parametric curves and surfaces, derivative jets, fundamental
//!   forms, principal curvatures and the smooth equilibria themselves.
//! - [`discretize`]: equidistant polygons, triangulated grid patches with the
//!   volume-based diagonal rule, and convex hulls of point samples.
//! - [`classify`]: equilibrium census of polygons and triangle meshes.
//! - [`indices`]: imaginary indices, the explicit error bounds and the
//!   predicted lattice regions of each flock.
//! - [`analysis`]: windowed counts, flock clustering, lattice-point and
//!   equidistribution experiments and running averages over `n`.
//! - [`pipeline`]: loading OBJ/PLY meshes, solid centroids, curvature
//!   estimation and the per-flock report for scanned objects.

pub mod analysis;
pub mod classify;
pub mod discretize;
mod error;
pub mod geometry;
pub mod indices;
pub mod mesh;
pub mod pipeline;

pub use error::{Error, Result};

/// Point/vector in the plane.
pub type Vec2 = nalgebra::Vector2<f64>;
/// Point/vector in space.
pub type Vec3 = nalgebra::Vector3<f64>;

/// Type of an equilibrium point.
///
/// On a polyhedral surface stable points lie in faces, saddles on edges and
/// unstable points at vertices. On a polygon stable points lie on edges and
/// unstable points at vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EquilibriumKind {
    Stable,
    Saddle,
    Unstable,
}

impl std::fmt::Display for EquilibriumKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EquilibriumKind::Stable => write!(f, "stable"),
            EquilibriumKind::Saddle => write!(f, "saddle"),
            EquilibriumKind::Unstable => write!(f, "unstable"),
        }
    }
}
