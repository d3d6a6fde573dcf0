use super::{support_slack, Carrier, EquilibriumPoint, EquilibriumSet, NearDegenerate, Slacks, Support};
use crate::discretize::PolygonalCurve;
use crate::{EquilibriumKind, Result, Vec2, Vec3};

fn lift(p: Vec2) -> Vec3 {
    Vec3::new(p.x, p.y, 0.0)
}

/// Census of a polygon relative to `origin`.
///
/// Edge `[p_i, p_i+1]` carries a stable point when the foot of the
/// perpendicular from `origin` falls strictly inside it. Vertex `p_i` carries
/// an unstable point when both neighbours lie strictly on the origin side of
/// the line through `p_i` orthogonal to `p_i - origin`. On open curves the end
/// vertices are classified but flagged as boundary.
pub fn classify_polygon(poly: &PolygonalCurve, origin: Vec2, tol: f64) -> Result<EquilibriumSet> {
    let nv = poly.vertices.len();
    let o = lift(origin);
    let p = |k: usize| lift(poly.vertices[k]);
    let idx = |k: usize| [poly.indices[k], 0.0];
    let mut points = Vec::new();
    let mut near = Vec::new();

    for k in 0..poly.edge_count() {
        let (a, b) = poly.edge(k);
        let (pa, pb) = (p(a), p(b));
        let d = pb - pa;
        let mut slacks = Slacks::new();
        slacks.push(-(pa - o).dot(&d) / ((pa - o).norm() * d.norm()));
        slacks.push((pb - o).dot(&d) / ((pb - o).norm() * d.norm()));
        let carrier = Carrier::Edge { a: a.min(b), b: a.max(b) };
        match slacks.verdict(tol) {
            Support::Supported => {
                let t = -(pa - o).dot(&d) / d.norm_squared();
                let anchor = if poly.indices[a] <= poly.indices[b] { a } else { b };
                points.push(EquilibriumPoint {
                    kind: EquilibriumKind::Stable,
                    carrier,
                    location: pa + d * t,
                    margin: slacks.min,
                    grid_index: Some(idx(anchor)),
                    carrier_indices: vec![idx(a), idx(b)],
                    diagonal: None,
                    boundary: false,
                });
            }
            Support::Degenerate => near.push(NearDegenerate { carrier, slack: slacks.critical }),
            Support::NotSupported => {}
        }
    }

    for k in 0..nv {
        let neighbours: Vec<usize> = if poly.closed {
            vec![(k + nv - 1) % nv, (k + 1) % nv]
        } else {
            [k.checked_sub(1), (k + 1 < nv).then_some(k + 1)].into_iter().flatten().collect()
        };
        let boundary = neighbours.len() < 2;
        let mut slacks = Slacks::new();
        for &x in &neighbours {
            if let Some(s) = support_slack(p(k), p(x), o) {
                slacks.push(s);
            }
        }
        let carrier = Carrier::Vertex { v: k };
        match slacks.verdict(tol) {
            Support::Supported => points.push(EquilibriumPoint {
                kind: EquilibriumKind::Unstable,
                carrier,
                location: p(k),
                margin: slacks.min,
                grid_index: Some(idx(k)),
                carrier_indices: vec![idx(k)],
                diagonal: None,
                boundary,
            }),
            Support::Degenerate if !boundary => near.push(NearDegenerate { carrier, slack: slacks.critical }),
            _ => {}
        }
    }
    Ok(EquilibriumSet::assemble(points, near, poly.closed, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::DEFAULT_TOL;
    use crate::discretize::discretize_curve;
    use crate::geometry::Ellipse;

    #[test]
    fn square() {
        let sq = discretize_curve(&Ellipse::circle(1.0), 4, 0.5).unwrap();
        let eqs = classify_polygon(&sq, Vec2::zeros(), DEFAULT_TOL).unwrap();
        assert_eq!((eqs.counts.stable, eqs.counts.unstable), (4, 4));
        assert!(eqs.near_degenerate.is_empty());
        for p in eqs.of_kind(EquilibriumKind::Stable) {
            assert!((p.location.norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        }
    }

    #[test]
    fn regular_polygons() {
        for n in 3..40 {
            let poly = discretize_curve(&Ellipse::circle(2.0), n, 0.1).unwrap();
            let eqs = classify_polygon(&poly, Vec2::zeros(), DEFAULT_TOL).unwrap();
            assert_eq!((eqs.counts.stable, eqs.counts.unstable), (n, n));
        }
    }

    #[test]
    fn fine_ellipse_balances() {
        let poly = discretize_curve(&Ellipse::new(2.0, 1.0), 1000, 0.3).unwrap();
        let eqs = classify_polygon(&poly, Vec2::zeros(), DEFAULT_TOL).unwrap();
        assert_eq!(eqs.counts.stable, eqs.counts.unstable);
        assert!(eqs.counts.stable >= 2);
        assert_eq!(crate::classify::poincare_hopf(&eqs).unwrap(), 0);
    }

    #[test]
    fn stable_feet_are_orthogonal() {
        let poly = discretize_curve(&Ellipse::new(3.0, 1.0), 200, 0.77).unwrap();
        let o = Vec2::new(0.2, -0.1);
        let eqs = classify_polygon(&poly, o, DEFAULT_TOL).unwrap();
        for p in eqs.of_kind(EquilibriumKind::Stable) {
            let Carrier::Edge { a, b } = p.carrier else { panic!() };
            let d = lift(poly.vertices[b] - poly.vertices[a]);
            let r = p.location - lift(o);
            assert!(r.dot(&d).abs() <= 1e-9 * r.norm() * d.norm());
        }
    }
}
