//! Smooth curves and surfaces.

pub mod forms;
pub mod jet;
pub mod registry;
pub mod smooth;
pub mod surface;

pub use forms::{curvature_invariants, fundamental_forms, FundamentalForms};
pub use jet::{curve_jet, jet, CurveJet, Jet2};
pub use registry::{CurveSpec, SurfaceSpec};
pub use smooth::{
    classify_smooth, classify_smooth_2d, find_curve_equilibria, find_smooth_equilibria, signed_curvature, signed_curvature_about,
    CurveEquilibrium, SmoothEquilibrium, SmoothType, DEGENERACY_TOL,
};
pub use surface::{CubeChart, Ellipse, Ellipsoid, ParametricCurve, ParametricSurface, QuadricPatch, Rect, WithDomain};
