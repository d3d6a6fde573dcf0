use serde::{Deserialize, Serialize};

use crate::geometry::ParametricCurve;
use crate::{Error, Result, Vec2};

/// Polygon inscribed in a curve at equidistant parameters
/// `τ_k = τ1 + (k + offset) Δ`, `Δ = (τ2 - τ1)/n`.
///
/// Each vertex carries the real index `τ_k / Δ`, so a smooth equilibrium at
/// `τ = 0` sits at index 0 and indices of consecutive vertices differ by 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonalCurve {
    pub vertices: Vec<Vec2>,
    pub indices: Vec<f64>,
    pub params: Vec<f64>,
    /// The last vertex connects back to the first.
    pub closed: bool,
    pub offset: f64,
    pub n: usize,
    pub step: f64,
}

impl PolygonalCurve {
    pub fn edge_count(&self) -> usize {
        if self.closed {
            self.vertices.len()
        } else {
            self.vertices.len().saturating_sub(1)
        }
    }

    /// Endpoints of edge `k`.
    pub fn edge(&self, k: usize) -> (usize, usize) {
        (k, (k + 1) % self.vertices.len())
    }

    pub fn perimeter(&self) -> f64 {
        (0..self.edge_count())
            .map(|k| {
                let (a, b) = self.edge(k);
                (self.vertices[b] - self.vertices[a]).norm()
            })
            .sum()
    }
}

pub fn discretize_curve<C: ParametricCurve + ?Sized>(curve: &C, n: usize, offset: f64) -> Result<PolygonalCurve> {
    if n < 3 {
        return Err(Error::TooCoarse { n, min: 3 });
    }
    if !(0.0..1.0).contains(&offset) {
        return Err(Error::InvalidInput(format!("offset {offset} not in [0, 1)")));
    }
    let (t1, t2) = curve.interval();
    let closed = curve.is_closed();
    let step = (t2 - t1) / n as f64;
    // an open curve keeps every vertex inside [τ1, τ2]
    let count = if closed {
        n
    } else if offset == 0.0 {
        n + 1
    } else {
        n
    };
    let params: Vec<f64> = (0..count).map(|k| t1 + (k as f64 + offset) * step).collect();
    let vertices: Vec<Vec2> = params.iter().map(|&t| curve.eval(t)).collect();
    if let Some(k) = vertices.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
        return Err(Error::NonFinite(format!("curve vertex {k}")));
    }
    let scale = vertices.iter().map(|p| p.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let edges = if closed { count } else { count - 1 };
    for k in 0..edges {
        if (vertices[(k + 1) % count] - vertices[k]).norm() <= 1e-14 * scale {
            return Err(Error::CoincidentVertices { k });
        }
    }
    let indices = params.iter().map(|t| t / step).collect();
    Ok(PolygonalCurve { vertices, indices, params, closed, offset, n, step })
}
