use serde::{Deserialize, Serialize};

use super::jet::Jet2;
use crate::{Error, Result, Vec3};

/// First (`E, F, G`) and second (`L, M, N`) fundamental quantities at a
/// point, with the second form taken against the unit normal pointing away
/// from the reference point. With that orientation a convex surface has
/// `L, N <= 0` and `LN - M² >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FundamentalForms {
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub l: f64,
    pub m: f64,
    pub n: f64,
    pub normal: Vec3,
    /// `r_u x r_v` pointed towards the reference point and had to be flipped.
    pub flipped: bool,
}

impl FundamentalForms {
    /// Forms in a principal frame: `E = G = 1`, `F = M = 0`, `L = k1`, `N = k2`.
    pub fn principal(k1: f64, k2: f64) -> Self {
        FundamentalForms { e: 1.0, f: 0.0, g: 1.0, l: k1, m: 0.0, n: k2, normal: Vec3::z(), flipped: false }
    }

    /// Forms from raw numbers, normal `e_z`.
    pub fn from_values(e: f64, f: f64, g: f64, l: f64, m: f64, n: f64) -> Self {
        FundamentalForms { e, f, g, l, m, n, normal: Vec3::z(), flipped: false }
    }

    /// `EG - F²`.
    pub fn metric_det(&self) -> f64 {
        self.e * self.g - self.f * self.f
    }

    /// Same forms with the normal reversed.
    pub fn flip(&self) -> Self {
        FundamentalForms { l: -self.l, m: -self.m, n: -self.n, normal: -self.normal, flipped: !self.flipped, ..*self }
    }

    /// `(κ1 κ2, κ1 + κ2)`.
    pub fn curvature_invariants(&self) -> Result<(f64, f64)> {
        curvature_invariants(self)
    }

    /// Principal curvatures `(κ1, κ2)` with `κ1 <= κ2`.
    pub fn principal_curvatures(&self) -> Result<(f64, f64)> {
        let (gauss, mean_sum) = curvature_invariants(self)?;
        let disc = (mean_sum * mean_sum - 4.0 * gauss).max(0.0).sqrt();
        // avoid cancellation in the smaller-magnitude root
        let big = 0.5 * (mean_sum - mean_sum.signum() * disc);
        let small = if big != 0.0 { gauss / big } else { 0.5 * (mean_sum + disc) };
        let (k1, k2) = if big <= small { (big, small) } else { (small, big) };
        Ok((k1, k2))
    }

    /// Errors unless the second form is that of a locally convex surface
    /// seen from inside (`L, N <= 0`, `LN - M² >= 0`), up to `tol` relative.
    pub fn ensure_convex(&self, tol: f64) -> Result<()> {
        let scale = self.l.abs().max(self.n.abs()).max(self.m.abs());
        let slack = tol * scale;
        if self.l > slack || self.n > slack || self.l * self.n - self.m * self.m < -slack * scale {
            return Err(Error::Inconsistent(format!(
                "second fundamental form (L, M, N) = ({:.6e}, {:.6e}, {:.6e}) is not convex towards the reference point",
                self.l, self.m, self.n
            )));
        }
        Ok(())
    }
}

/// Fundamental forms of `jet` with the normal oriented away from `origin`.
pub fn fundamental_forms(j: &Jet2, origin: Vec3) -> Result<FundamentalForms> {
    let cross = j.ru.cross(&j.rv);
    let area = cross.norm();
    if !(area > 1e-12 * j.ru.norm() * j.rv.norm()) {
        return Err(Error::DegenerateTangent);
    }
    let mut normal = cross / area;
    let flipped = normal.dot(&(j.position - origin)) < 0.0;
    if flipped {
        normal = -normal;
    }
    Ok(FundamentalForms {
        e: j.ru.dot(&j.ru),
        f: j.ru.dot(&j.rv),
        g: j.rv.dot(&j.rv),
        l: normal.dot(&j.ruu),
        m: normal.dot(&j.ruv),
        n: normal.dot(&j.rvv),
        normal,
        flipped,
    })
}

/// Gaussian curvature `κ1 κ2 = (LN - M²)/(EG - F²)` and the sum
/// `κ1 + κ2 = (EN - 2FM + GL)/(EG - F²)`.
pub fn curvature_invariants(f: &FundamentalForms) -> Result<(f64, f64)> {
    let det = f.metric_det();
    if !(det > 0.0) {
        return Err(Error::InvalidInput(format!("first fundamental form is not positive definite (EG - F² = {det:e})")));
    }
    let gauss = (f.l * f.n - f.m * f.m) / det;
    let mean_sum = (f.e * f.n - 2.0 * f.f * f.m + f.g * f.l) / det;
    Ok((gauss, mean_sum))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::jet::jet;
    use crate::geometry::surface::{Ellipsoid, QuadricPatch};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn vec3() -> impl Strategy<Value = Vec3> {
        (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
    }

    fn random_jet() -> impl Strategy<Value = Jet2> {
        (vec3(), vec3(), vec3(), vec3(), vec3(), vec3()).prop_map(|(position, ru, rv, ruu, ruv, rvv)| Jet2 {
            position: position + Vec3::new(0.0, 0.0, 10.0),
            ru,
            rv,
            ruu,
            ruv,
            rvv,
        })
    }

    #[test]
    fn unit_sphere_north_pole() {
        let s = Ellipsoid::new(1.0, 1.0, 1.0);
        // the north pole of the lat-long chart is singular; use the equatorial
        // point, which is the north pole after relabelling axes
        let f = fundamental_forms(&jet(&s, 0.0, 0.0).unwrap(), Vec3::zeros()).unwrap();
        assert_relative_eq!(f.e, 1.0);
        assert_relative_eq!(f.g, 1.0);
        assert_relative_eq!(f.f, 0.0);
        assert_relative_eq!(f.l, -1.0);
        assert_relative_eq!(f.n, -1.0);
        assert_relative_eq!(f.m, 0.0);
        assert!(!f.flipped);
    }

    #[test]
    fn sphere_curvature_invariants() {
        for r in [0.5, 1.0, 3.0] {
            let s = Ellipsoid::new(r, r, r);
            let f = fundamental_forms(&jet(&s, 0.7, 0.3).unwrap(), Vec3::zeros()).unwrap();
            let (g, h) = f.curvature_invariants().unwrap();
            assert_relative_eq!(g, 1.0 / (r * r), max_relative = 1e-12);
            assert_relative_eq!(h, -2.0 / r, max_relative = 1e-12);
        }
    }

    #[test]
    fn plane_is_flat() {
        let p = QuadricPatch::graph(0.0, 0.0, 0.0, 1.0);
        let f = fundamental_forms(&jet(&p, 0.1, 0.2).unwrap(), Vec3::zeros()).unwrap();
        assert_eq!((f.l, f.m, f.n), (0.0, 0.0, 0.0));
        assert_eq!(f.curvature_invariants().unwrap(), (0.0, 0.0));
    }

    #[test]
    fn ellipsoid_middle_axis_endpoint() {
        // implicit-surface oracle: at (0, b, 0) the principal curvatures of
        // x²/a² + y²/b² + z²/c² = 1 are b/a² and b/c², negative here.
        let (a, b, c) = (1.25, 1.15, 1.0);
        let e = Ellipsoid::new(a, b, c);
        let f = fundamental_forms(&jet(&e, std::f64::consts::FRAC_PI_2, 0.0).unwrap(), Vec3::zeros()).unwrap();
        let (k1, k2) = f.principal_curvatures().unwrap();
        assert_relative_eq!(k1, -b / (c * c), max_relative = 1e-12);
        assert_relative_eq!(k2, -b / (a * a), max_relative = 1e-12);
        let (g, _) = f.curvature_invariants().unwrap();
        assert_relative_eq!(g, b * b / (a * a * c * c), max_relative = 1e-12);
    }

    #[test]
    fn quadric_patch_reproduces_its_forms() {
        let q = QuadricPatch { e: 2.0, f: 0.3, g: 0.7, l: -1.1, m: 0.2, n: -0.6, rho: 1.5, ..QuadricPatch::graph(0.0, 0.0, 0.0, 1.0) };
        let f = fundamental_forms(&jet(&q, 0.0, 0.0).unwrap(), Vec3::zeros()).unwrap();
        for (x, y) in [(f.e, 2.0), (f.f, 0.3), (f.g, 0.7), (f.l, -1.1), (f.m, 0.2), (f.n, -0.6)] {
            assert_relative_eq!(x, y, max_relative = 1e-12, epsilon = 1e-15);
        }
    }

    #[test]
    fn inward_facing_normal_is_flipped() {
        let j = Jet2 {
            position: Vec3::new(0.0, 0.0, 1.0),
            ru: Vec3::y(),
            rv: Vec3::x(),
            ruu: Vec3::new(0.0, 0.0, -1.0),
            ruv: Vec3::zeros(),
            rvv: Vec3::new(0.0, 0.0, -1.0),
        };
        let f = fundamental_forms(&j, Vec3::zeros()).unwrap();
        assert!(f.flipped);
        assert_relative_eq!(f.normal, Vec3::z());
        assert_eq!((f.l, f.n), (-1.0, -1.0));
    }

    #[test]
    fn degenerate_tangent_plane() {
        let j = Jet2 { position: Vec3::z(), ru: Vec3::x(), rv: Vec3::x() * 2.0, ruu: Vec3::zeros(), ruv: Vec3::zeros(), rvv: Vec3::zeros() };
        assert!(matches!(fundamental_forms(&j, Vec3::zeros()), Err(Error::DegenerateTangent)));
    }

    #[test]
    fn convexity_diagnostic() {
        assert!(FundamentalForms::principal(-1.0, -2.0).ensure_convex(1e-9).is_ok());
        assert!(FundamentalForms::principal(1.0, -2.0).ensure_convex(1e-9).is_err());
        assert!(FundamentalForms::from_values(1.0, 0.0, 1.0, -1.0, 2.0, -1.0).ensure_convex(1e-9).is_err());
    }

    proptest! {
        #[test]
        fn area_identity(j in random_jet()) {
            let cross = j.ru.cross(&j.rv).norm();
            prop_assume!(cross > 1e-3);
            let f = fundamental_forms(&j, Vec3::zeros()).unwrap();
            let scale = (f.e * f.g).max(1.0);
            prop_assert!((f.metric_det() - cross * cross).abs() <= 1e-12 * scale);
        }

        #[test]
        fn principal_curvatures_are_real(j in random_jet()) {
            prop_assume!(j.ru.cross(&j.rv).norm() > 1e-3);
            let f = fundamental_forms(&j, Vec3::zeros()).unwrap();
            let (g, h) = f.curvature_invariants().unwrap();
            let scale = 1.0f64.max(h * h).max(g.abs());
            prop_assert!(h * h - 4.0 * g >= -1e-9 * scale);
            let (k1, k2) = f.principal_curvatures().unwrap();
            prop_assert!(k1 <= k2);
            prop_assert!((k1 * k2 - g).abs() <= 1e-9 * scale);
            prop_assert!((k1 + k2 - h).abs() <= 1e-9 * scale.sqrt());
        }

        #[test]
        fn flipping_normal(j in random_jet()) {
            prop_assume!(j.ru.cross(&j.rv).norm() > 1e-3);
            let f = fundamental_forms(&j, Vec3::zeros()).unwrap();
            let g = f.flip();
            let (ga, ha) = f.curvature_invariants().unwrap();
            let (gb, hb) = g.curvature_invariants().unwrap();
            prop_assert_eq!((g.l, g.m, g.n), (-f.l, -f.m, -f.n));
            prop_assert!((ga - gb).abs() <= 1e-12 * ga.abs().max(1.0));
            prop_assert!((ha + hb).abs() <= 1e-12 * ha.abs().max(1.0));
        }
    }
}
