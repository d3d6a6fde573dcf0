use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::indices::{ConvexPolygon, LatticeCount};
use crate::{Error, Result, Vec2};

/// Bounded region of the plane.
pub trait PlaneRegion {
    fn contains(&self, p: Vec2) -> bool;
    /// `(x0, x1, y0, y1)`, or `None` when empty.
    fn bbox(&self) -> Option<(f64, f64, f64, f64)>;
    fn area(&self) -> f64;
}

impl PlaneRegion for ConvexPolygon {
    fn contains(&self, p: Vec2) -> bool {
        self.interior_slack(p) > 0.0
    }
    fn bbox(&self) -> Option<(f64, f64, f64, f64)> {
        ConvexPolygon::bbox(self)
    }
    fn area(&self) -> f64 {
        ConvexPolygon::area(self)
    }
}

/// Open disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Vec2,
    pub radius: f64,
}

impl PlaneRegion for Disk {
    fn contains(&self, p: Vec2) -> bool {
        (p - self.center).norm_squared() < self.radius * self.radius
    }
    fn bbox(&self) -> Option<(f64, f64, f64, f64)> {
        let (c, r) = (self.center, self.radius);
        Some((c.x - r, c.x + r, c.y - r, c.y + r))
    }
    fn area(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius
    }
}

/// Half-open axis-aligned box `[x0, x1) x [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Boxed {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl PlaneRegion for Boxed {
    fn contains(&self, p: Vec2) -> bool {
        p.x >= self.x0 && p.x < self.x1 && p.y >= self.y0 && p.y < self.y1
    }
    fn bbox(&self) -> Option<(f64, f64, f64, f64)> {
        Some((self.x0, self.x1, self.y0, self.y1))
    }
    fn area(&self) -> f64 {
        (self.x1 - self.x0).max(0.0) * (self.y1 - self.y0).max(0.0)
    }
}

/// Lattice points of `Z²` in `translation + region`, strict interior,
/// with points within 1e-12 of the boundary reported as hits.
pub fn lattice_count(region: &ConvexPolygon, translation: Vec2) -> LatticeCount {
    region.lattice_points(translation, 1e-12)
}

fn count_in<R: PlaneRegion + ?Sized>(region: &R, translation: Vec2) -> usize {
    let Some((x0, x1, y0, y1)) = region.bbox() else { return 0 };
    let mut count = 0;
    for i in (x0 + translation.x).floor() as i64..=(x1 + translation.x).ceil() as i64 {
        for j in (y0 + translation.y).floor() as i64..=(y1 + translation.y).ceil() as i64 {
            if region.contains(Vec2::new(i as f64, j as f64) - translation) {
                count += 1;
            }
        }
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Mean number of lattice points in `x + region` for `x` uniform in
/// `[0, 1)²`, with its standard error.
pub fn expected_count_mc<R: PlaneRegion + ?Sized>(region: &R, trials: usize, seed: u64) -> Result<McEstimate> {
    if trials < 100 {
        return Err(Error::InvalidInput(format!("need at least 100 trials, got {trials}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..trials {
        let t = Vec2::new(rng.gen::<f64>(), rng.gen::<f64>());
        let c = count_in(region, t) as f64;
        sum += c;
        sum2 += c * c;
    }
    let n = trials as f64;
    let mean = sum / n;
    let var = ((sum2 - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(McEstimate { mean, stderr: (var / n).sqrt(), trials, seed })
}

/// Continued-fraction check: `x` has at least `depth` partial quotients
/// before the remainder vanishes and none of them is huge.
pub fn looks_irrational(x: f64, depth: usize) -> bool {
    let mut r = x.fract().abs();
    for _ in 0..depth {
        if r < 1e-9 {
            return false;
        }
        let inv = 1.0 / r;
        if inv > 1e6 {
            return false;
        }
        r = inv.fract();
    }
    true
}

/// No small integer relation `p η1 + q η2 + r = 0` with `|p|, |q| <= bound`.
pub fn looks_independent(eta: (f64, f64), bound: i64) -> bool {
    for p in -bound..=bound {
        for q in -bound..=bound {
            if p == 0 && q == 0 {
                continue;
            }
            let s = p as f64 * eta.0 + q as f64 * eta.1;
            if (s - s.round()).abs() < 1e-9 * (1.0 + s.abs()) {
                return false;
            }
        }
    }
    true
}

/// Fraction of `k = 1..=n` with `(frac(k η1), frac(k η2))` in `region`.
pub fn equidistribution_fraction<R: PlaneRegion + ?Sized>(eta: (f64, f64), region: &R, n: usize) -> f64 {
    if !(looks_irrational(eta.0, 8) && looks_irrational(eta.1, 8) && looks_independent(eta, 20)) {
        log::warn!("offsets ({}, {}) do not look irrational and independent", eta.0, eta.1);
    }
    if n == 0 {
        return 0.0;
    }
    let hits = (1..=n)
        .filter(|&k| {
            let k = k as f64;
            region.contains(Vec2::new((k * eta.0).rem_euclid(1.0), (k * eta.1).rem_euclid(1.0)))
        })
        .count();
    hits as f64 / n as f64
}

/// Fraction of `k = 1..=n` with `frac(k η)` in `[a, b)`.
pub fn equidistribution_fraction_1d(eta: f64, interval: (f64, f64), n: usize) -> f64 {
    if !looks_irrational(eta, 8) {
        log::warn!("offset {eta} does not look irrational");
    }
    if n == 0 {
        return 0.0;
    }
    let hits = (1..=n)
        .filter(|&k| {
            let x = (k as f64 * eta).rem_euclid(1.0);
            x >= interval.0 && x < interval.1
        })
        .count();
    hits as f64 / n as f64
}
