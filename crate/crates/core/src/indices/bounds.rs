use serde::{Deserialize, Serialize};

use crate::geometry::FundamentalForms;
use crate::{Error, Result};

/// Explicit bounds on `|U - U*|`, `|S - S*|` and `|N - N*|` for a flock of
/// a grid patch with mesh ratio `lambda = Δv/Δu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBounds {
    pub err_u: f64,
    pub err_s: f64,
    pub err_n: f64,
    /// `(V_s, W_s)` for `s = 1..=12`.
    pub vw: [(f64, f64); 12],
    /// Mesh ratio admissible; otherwise the indices are only lower bounds.
    pub mesh_ratio_ok: bool,
}

/// `λ|M| <= |L|` and `λ|M| <= λ²|N|`: the grid steps in `u` and `v` are
/// comparable relative to the twist of the surface.
pub fn mesh_ratio_condition(f: &FundamentalForms, lambda: f64) -> bool {
    let lm = lambda * f.m.abs();
    lm <= f.l.abs() && lm <= lambda * lambda * f.n.abs()
}

fn spread((v, w): (f64, f64)) -> f64 {
    v.abs().max(w.abs()).max((v - w).abs()).max((v + w).abs())
}

pub fn error_bounds(f: &FundamentalForms, rho: f64, lambda: f64) -> Result<ErrorBounds> {
    if !(lambda > 0.0 && rho > 0.0) {
        return Err(Error::InvalidInput("rho and lambda must be positive".into()));
    }
    let FundamentalForms { e, f: ff, g, l, m, n, .. } = *f;
    let det = e * g - ff * ff;
    if !(det > 0.0) {
        return Err(Error::Degenerate("first fundamental form is not positive definite".into()));
    }
    let (gauss, mean_sum) = f.curvature_invariants()?;
    let prod = (1.0 + rho * mean_sum + rho * rho * gauss).abs();
    let den = lambda * det * prod;
    if !(den > 0.0) || !den.is_finite() || prod < crate::geometry::DEGENERACY_TOL {
        return Err(Error::Degenerate("(rho k1 + 1)(rho k2 + 1) vanishes".into()));
    }
    let lam = lambda;
    let lam2 = lam * lam;
    let (am, an, al) = (m.abs(), n.abs(), l.abs());
    let v5 = lam * (rho * (n * e - m * ff) + det);
    let v6 = ff + rho * m;
    let v7 = lam2 * rho * (n * ff - m * g);
    let v8 = lam * (g + rho * n);
    let vw = [
        (lam * rho * l * (g + rho * n), lam2 * rho * n * (ff + rho * m)),
        (rho * l * (ff + rho * m), lam * rho * n * (e + rho * l)),
        (lam2 * rho * (n * ff - m * g), lam * (det - rho * (m * ff - l * g))),
        (lam * (det - rho * (m * ff - n * e)), rho * (l * ff - m * e)),
        (v5, lam * rho * rho * (lam * an - am) * (m * e - l * ff)),
        (v6, rho * (lam * an - am) * (e + rho * l)),
        (v7, lam * rho * (al - lam * am) * (rho * (l * g - m * ff) + det)),
        (v8, rho * (al - lam * am) * (ff + rho * m)),
        (v5, lam * rho * rho * am * (m * e - l * ff)),
        (v6, rho * am * (e + rho * l)),
        (v7, lam2 * am * (rho * (l * g - m * ff) + det)),
        (v8, rho * lam * am * (ff + rho * m)),
    ];
    let sum = |r: std::ops::Range<usize>| vw[r].iter().map(|&p| spread(p)).sum::<f64>();
    Ok(ErrorBounds {
        err_u: 2.0 + sum(0..2) / den,
        err_s: 4.0 + 2.0 * sum(2..4) / den,
        err_n: 6.0 + sum(4..12) / den,
        vw,
        mesh_ratio_ok: mesh_ratio_condition(f, lambda),
    })
}
