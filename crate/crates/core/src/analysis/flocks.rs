use serde::{Deserialize, Serialize};

use crate::classify::{Census, EquilibriumSet};
use crate::geometry::SmoothEquilibrium;
use crate::indices::{error_bounds, imaginary_indices_3d, ErrorBounds, ImaginaryIndices};
use crate::{Error, Result};

/// Discrete equilibria grouped around one smooth equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlockReport {
    pub smooth: SmoothEquilibrium,
    pub census: Census,
    /// Indices into `EquilibriumSet::points`.
    pub members: Vec<usize>,
    /// `None` for a degenerate smooth equilibrium.
    pub predicted: Option<ImaginaryIndices>,
    pub bounds: Option<ErrorBounds>,
    /// `|U - U*| <= Err_U`, `|N - N*| <= Err_N`, `|S - S*| <= Err_S`;
    /// only when the mesh ratio is admissible.
    pub within_bounds: Option<[bool; 3]>,
    /// Largest distance between two members.
    pub diameter: f64,
    /// Members almost equidistant from this and another smooth equilibrium.
    pub ambiguous: usize,
}

/// Assigns each discrete equilibrium to the nearest smooth one and attaches
/// predictions. `lambda` is the mesh ratio used for the error bounds.
pub fn cluster_flocks(eqs: &EquilibriumSet, smooth: &[SmoothEquilibrium], lambda: f64) -> Result<Vec<FlockReport>> {
    if smooth.is_empty() {
        return Err(Error::InvalidInput("no smooth equilibria to cluster around".into()));
    }
    let scale = smooth.iter().map(|s| s.rho).fold(0.0, f64::max);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); smooth.len()];
    let mut ambiguous = vec![0; smooth.len()];
    for (k, p) in eqs.points.iter().enumerate() {
        let mut d: Vec<(f64, usize)> = smooth.iter().enumerate().map(|(s, q)| ((p.location - q.position).norm(), s)).collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0));
        members[d[0].1].push(k);
        if d.len() > 1 && d[1].0 - d[0].0 <= 1e-9 * scale {
            ambiguous[d[0].1] += 1;
        }
    }
    smooth
        .iter()
        .zip(members)
        .zip(ambiguous)
        .map(|((s, members), ambiguous)| {
            let census = Census::of(members.iter().map(|&k| &eqs.points[k]));
            let mut diameter: f64 = 0.0;
            for (x, &a) in members.iter().enumerate() {
                for &b in &members[x + 1..] {
                    diameter = diameter.max((eqs.points[a].location - eqs.points[b].location).norm());
                }
            }
            let predicted = imaginary_indices_3d(s.rho, s.kappas.0, s.kappas.1).ok();
            let bounds = predicted.and_then(|_| error_bounds(&s.forms, s.rho, lambda).ok());
            let within_bounds = match (&predicted, &bounds) {
                (Some(i), Some(b)) if b.mesh_ratio_ok => Some([
                    (census.unstable as f64 - i.u_star).abs() <= b.err_u,
                    (census.saddle as f64 - i.n_star).abs() <= b.err_n,
                    (census.stable as f64 - i.s_star).abs() <= b.err_s,
                ]),
                _ => None,
            };
            Ok(FlockReport { smooth: s.clone(), census, members, predicted, bounds, within_bounds, diameter, ambiguous })
        })
        .collect()
}
