use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::orient3d;
use crate::geometry::{ParametricSurface, Rect};
use crate::mesh::TriangleMesh;
use crate::{Error, Result, Vec3};

/// Diagonal of a grid quad `p_ij, p_i+1j, p_i+1j+1, p_ij+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Diagonal {
    /// `[p_ij, p_i+1j+1]`
    #[serde(rename = "E+")]
    Plus,
    /// `[p_i+1j, p_ij+1]`
    #[serde(rename = "E-")]
    Minus,
}

impl std::fmt::Display for Diagonal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Diagonal::Plus => write!(f, "E+"),
            Diagonal::Minus => write!(f, "E-"),
        }
    }
}

/// Sign of the triple products of consecutive corners seen from `origin`:
/// `+1` if the rays turn counterclockwise around the outward direction,
/// `-1` if clockwise. Errors when the rays are not in convex position.
pub fn ray_orientation(quad: &[Vec3; 4], origin: Vec3) -> std::result::Result<f64, String> {
    let mut sign = 0.0;
    for k in 0..4 {
        let (a, b, c) = (quad[k], quad[(k + 1) % 4], quad[(k + 2) % 4]);
        // ⟨a - o, (b - o) x (c - o)⟩ = -orient3d(o, a, b, c)
        let s = -orient3d(origin, a, b, c);
        if s == 0.0 {
            return Err(format!("rays through corners {k}, {}, {} are coplanar", (k + 1) % 4, (k + 2) % 4));
        }
        if sign == 0.0 {
            sign = s.signum();
        } else if s.signum() != sign {
            return Err("rays through the corners are not in convex position".into());
        }
    }
    Ok(sign)
}

/// Signed volume test deciding which diagonal makes the quad locally convex
/// as seen from `origin`. `quad` lists `p_ij, p_i+1j, p_i+1j+1, p_ij+1`.
///
/// `V = ⟨(p_i+1j - p_ij) x (p_ij+1 - p_ij), p_i+1j+1 - p_ij⟩`, multiplied by
/// the ray orientation, is positive when `p_i+1j+1` lies on the far side of
/// the plane through the other three corners; then `E+` is the convex choice.
/// Nearly coplanar quads get `E+`.
pub fn choose_diagonal(quad: &[Vec3; 4], origin: Vec3) -> Result<Diagonal> {
    let orientation = ray_orientation(quad, origin).map_err(|reason| Error::Quad { i: 0, j: 0, reason })?;
    Ok(diagonal_with_orientation(quad, origin, orientation))
}

fn diagonal_with_orientation(quad: &[Vec3; 4], origin: Vec3, orientation: f64) -> Diagonal {
    let [p00, p10, p11, p01] = *quad;
    let v = (p10 - p00).cross(&(p01 - p00)).dot(&(p11 - p00)) * orientation;
    let mean_edge = 0.25 * ((p10 - p00).norm() + (p11 - p10).norm() + (p01 - p11).norm() + (p00 - p01).norm());
    let distance = ((p00 + p10 + p11 + p01) * 0.25 - origin).norm();
    let tol = 1e-12 * mean_edge * mean_edge * distance;
    if v < -tol {
        Diagonal::Minus
    } else {
        Diagonal::Plus
    }
}

/// `V` as the four-term sum of triple products in origin-centred
/// coordinates. Agrees with the local determinant used by
/// [`choose_diagonal`] up to rounding.
pub fn diagonal_volume(quad: &[Vec3; 4], origin: Vec3) -> f64 {
    let [p00, p10, p11, p01] = quad.map(|p| p - origin);
    p00.dot(&p10.cross(&p11)) + p11.dot(&p01.cross(&p00)) - p00.dot(&p10.cross(&p01)) - p10.dot(&p11.cross(&p01))
}

/// Triangulated grid patch.
///
/// Grid vertex `(a, b)` (0-based within the patch) sits at parameters
/// `u = u1 + (a0 + a + η1) Δu`, `v = v1 + (b0 + b + η2) Δv` with
/// `Δu = (u2 - u1)/n`, `Δv = (v2 - v1)/n`. Its real grid index is
/// `(u/Δu, v/Δv)`, so a smooth equilibrium at parameters `(0, 0)` has index
/// `(0, 0)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyhedralPatch {
    pub mesh: TriangleMesh,
    /// Real grid index of each vertex.
    pub grid: Vec<[f64; 2]>,
    pub params: Vec<[f64; 2]>,
    /// Vertices per row and per column.
    pub dims: (usize, usize),
    /// Integer grid position of vertex `(0, 0)` in the full grid.
    pub origin_cell: (usize, usize),
    /// One entry per quad, row-major.
    pub diagonals: Vec<Diagonal>,
    /// `+1` if `r_u x r_v` points away from the reference point.
    pub orientation: f64,
    pub n: usize,
    pub offset: (f64, f64),
    pub lambda: f64,
    pub step: (f64, f64),
    pub domain: Rect,
}

/// Grid metadata written next to an exported patch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchMetadata {
    pub n: usize,
    pub offsets: [f64; 2],
    pub lambda: f64,
    pub domain: [f64; 4],
}

impl PolyhedralPatch {
    pub fn vertex(&self, a: usize, b: usize) -> usize {
        b * self.dims.0 + a
    }

    pub fn quad_count(&self) -> (usize, usize) {
        (self.dims.0 - 1, self.dims.1 - 1)
    }

    /// Grid vertex `(a, b)` relative to the patch, from a vertex id.
    pub fn cell_of(&self, v: usize) -> (usize, usize) {
        (v % self.dims.0, v / self.dims.0)
    }

    /// Real grid index bounds `(i_min, i_max, j_min, j_max)` of the vertices.
    pub fn index_bounds(&self) -> [f64; 4] {
        let first = self.grid[0];
        let last = self.grid[self.grid.len() - 1];
        [first[0], last[0], first[1], last[1]]
    }

    pub fn metadata(&self) -> PatchMetadata {
        let d = self.domain;
        PatchMetadata { n: self.n, offsets: [self.offset.0, self.offset.1], lambda: self.lambda, domain: [d.u1, d.u2, d.v1, d.v2] }
    }
}

fn check_offset(x: f64) -> Result<()> {
    if (0.0..1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("offset {x} not in [0, 1)")))
    }
}

/// Number of grid lines `u1 + (k + η)Δ`, `k >= 0`, inside `[u1, u2]`.
fn lines_in_domain(n: usize, offset: f64) -> usize {
    if offset == 0.0 {
        n + 1
    } else {
        n
    }
}

/// Real index `u1/Δ` of the first grid line before offsetting, snapped to the
/// nearest integer when within rounding of it so that parameter 0 lands on a
/// vertex exactly.
fn grid_base(u1: f64, step: f64) -> f64 {
    let base = u1 / step;
    if (base - base.round()).abs() <= 1e-9 * base.abs().max(1.0) {
        base.round()
    } else {
        base
    }
}

/// Triangulates the whole parameter domain at resolution `n`.
pub fn discretize_surface<S: ParametricSurface + ?Sized>(surface: &S, n: usize, offset: (f64, f64), origin: Vec3) -> Result<PolyhedralPatch> {
    check_offset(offset.0)?;
    check_offset(offset.1)?;
    let (na, nb) = (lines_in_domain(n, offset.0), lines_in_domain(n, offset.1));
    discretize_surface_range(surface, n, offset, origin, (0, na), (0, nb))
}

/// Triangulates only the grid vertices with real index within `radius` of
/// `center` (in index units), clipped to the domain. The grid is the one of
/// [`discretize_surface`]; only the extent differs.
pub fn discretize_surface_window<S: ParametricSurface + ?Sized>(
    surface: &S,
    n: usize,
    offset: (f64, f64),
    origin: Vec3,
    center: [f64; 2],
    radius: f64,
) -> Result<PolyhedralPatch> {
    check_offset(offset.0)?;
    check_offset(offset.1)?;
    if n < 3 {
        return Err(Error::TooCoarse { n, min: 3 });
    }
    let dom = surface.domain();
    let (du, dv) = (dom.width() / n as f64, dom.height() / n as f64);
    // grid line k has index u1/Δu + k + η
    let range = |base: f64, eta: f64, c: f64, total: usize| {
        let lo = (c - radius - base - eta).ceil().max(0.0) as usize;
        let hi = ((c + radius - base - eta).floor() + 1.0).clamp(0.0, total as f64) as usize;
        (lo.min(total), hi)
    };
    let ra = range(grid_base(dom.u1, du), offset.0, center[0], lines_in_domain(n, offset.0));
    let rb = range(grid_base(dom.v1, dv), offset.1, center[1], lines_in_domain(n, offset.1));
    discretize_surface_range(surface, n, offset, origin, ra, rb)
}

fn discretize_surface_range<S: ParametricSurface + ?Sized>(
    surface: &S,
    n: usize,
    offset: (f64, f64),
    origin: Vec3,
    ra: (usize, usize),
    rb: (usize, usize),
) -> Result<PolyhedralPatch> {
    if n < 3 {
        return Err(Error::TooCoarse { n, min: 3 });
    }
    let dom = surface.domain();
    if !dom.is_valid() {
        return Err(Error::InvalidInput("surface domain has non-positive side".into()));
    }
    let (na, nb) = (ra.1.saturating_sub(ra.0), rb.1.saturating_sub(rb.0));
    if na < 2 || nb < 2 {
        return Err(Error::InvalidInput("patch needs at least 2x2 vertices".into()));
    }
    let (du, dv) = (dom.width() / n as f64, dom.height() / n as f64);
    let (bu, bv) = (grid_base(dom.u1, du), grid_base(dom.v1, dv));
    let index: Vec<[f64; 2]> = (0..nb)
        .flat_map(|b| (0..na).map(move |a| (a, b)))
        .map(|(a, b)| [bu + (ra.0 + a) as f64 + offset.0, bv + (rb.0 + b) as f64 + offset.1])
        .collect();
    let params: Vec<[f64; 2]> = index.iter().map(|&[i, j]| [(i * du).clamp(dom.u1, dom.u2), (j * dv).clamp(dom.v1, dom.v2)]).collect();
    let vertices: Vec<Vec3> = params.par_iter().map(|&[u, v]| surface.eval(u, v)).collect();
    if let Some(k) = vertices.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
        return Err(Error::NonFinite(format!("surface vertex {k}")));
    }
    let grid = index;
    let id = |a: usize, b: usize| b * na + a;
    let quads: Vec<(usize, usize)> = (0..nb - 1).flat_map(|b| (0..na - 1).map(move |a| (a, b))).collect();
    let choices: Vec<Result<(f64, Diagonal)>> = quads
        .par_iter()
        .map(|&(a, b)| {
            let quad = [vertices[id(a, b)], vertices[id(a + 1, b)], vertices[id(a + 1, b + 1)], vertices[id(a, b + 1)]];
            let orientation = ray_orientation(&quad, origin).map_err(|reason| Error::Quad { i: ra.0 + a, j: rb.0 + b, reason })?;
            Ok((orientation, diagonal_with_orientation(&quad, origin, orientation)))
        })
        .collect();
    let mut diagonals = Vec::with_capacity(quads.len());
    let mut orientation = 0.0;
    for (k, c) in choices.into_iter().enumerate() {
        let (o, d) = c?;
        if orientation == 0.0 {
            orientation = o;
        } else if o != orientation {
            let (a, b) = quads[k];
            return Err(Error::Quad { i: ra.0 + a, j: rb.0 + b, reason: "grid orientation flips relative to the reference point".into() });
        }
        diagonals.push(d);
    }
    let mut faces = Vec::with_capacity(2 * quads.len());
    for (&(a, b), d) in quads.iter().zip(&diagonals) {
        let (p00, p10, p11, p01) = (id(a, b), id(a + 1, b), id(a + 1, b + 1), id(a, b + 1));
        let pair = match d {
            Diagonal::Plus => [[p00, p10, p11], [p11, p01, p00]],
            Diagonal::Minus => [[p00, p10, p01], [p10, p11, p01]],
        };
        for f in pair {
            faces.push(if orientation > 0.0 { f } else { [f[0], f[2], f[1]] });
        }
    }
    let mesh = TriangleMesh::new(vertices, faces);
    let scale = mesh.bbox_diagonal();
    for f in 0..mesh.faces.len() {
        if mesh.face_normal(f).norm() <= 1e-14 * scale * scale {
            return Err(Error::DegenerateTriangle { face: f });
        }
    }
    Ok(PolyhedralPatch {
        mesh,
        grid,
        params,
        dims: (na, nb),
        origin_cell: (ra.0, rb.0),
        diagonals,
        orientation,
        n,
        offset,
        lambda: dv / du,
        step: (du, dv),
        domain: dom,
    })
}
