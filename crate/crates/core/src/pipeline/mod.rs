//! Analysis of scanned or modelled closed meshes.

mod centroid;
mod curvature;
pub mod io;
mod report;

pub use centroid::{solid_centroid, solid_centroid_about};
pub use curvature::{estimate_curvatures, estimate_curvatures_with, vertex_normal, CurvatureEstimate, LOW_CONFIDENCE_RESIDUAL};
pub use io::{load_mesh, read_obj, read_ply, write_obj, write_ply, MeshFormat, PlyEncoding};
pub use report::{analyze_hull, pebble_report, FlockRow, HullStats, PebbleOptions, PebbleReport};
