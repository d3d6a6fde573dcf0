use rayon::prelude::*;

use super::{support_slack, Carrier, EquilibriumPoint, EquilibriumSet, NearDegenerate, Slacks, Support};
use crate::discretize::{orient3d, ClosedHullMesh, Diagonal, PolyhedralPatch};
use crate::mesh::{Topology, TriangleMesh};
use crate::{Error, Result, Vec3};

/// Anything [`classify_patch`] accepts.
#[derive(Debug, Clone, Copy)]
pub enum Polyhedron<'a> {
    Patch(&'a PolyhedralPatch),
    Closed(&'a ClosedHullMesh),
    Mesh(&'a TriangleMesh),
}

impl<'a> From<&'a PolyhedralPatch> for Polyhedron<'a> {
    fn from(p: &'a PolyhedralPatch) -> Self {
        Polyhedron::Patch(p)
    }
}

impl<'a> From<&'a ClosedHullMesh> for Polyhedron<'a> {
    fn from(p: &'a ClosedHullMesh) -> Self {
        Polyhedron::Closed(p)
    }
}

impl<'a> From<&'a TriangleMesh> for Polyhedron<'a> {
    fn from(p: &'a TriangleMesh) -> Self {
        Polyhedron::Mesh(p)
    }
}

/// Census of a grid patch, a closed hull or a bare mesh relative to
/// `origin`.
///
/// Vertices carry unstable points, non-flat edges saddles and faces stable
/// points. Boundary vertices and boundary edges of open meshes are
/// classified with their partial stars, flagged and left out of the counts.
/// When the foot of a stable point falls on an edge between two coplanar
/// faces it is reported once, on the face with the smaller index.
pub fn classify_patch<'a>(p: impl Into<Polyhedron<'a>>, origin: Vec3, tol: f64) -> Result<EquilibriumSet> {
    match p.into() {
        Polyhedron::Patch(patch) => classify_impl(&patch.mesh, origin, tol, Some((&patch.grid, &patch.diagonals))),
        Polyhedron::Closed(hull) => classify_impl(&hull.mesh, origin, tol, None),
        Polyhedron::Mesh(mesh) => classify_impl(mesh, origin, tol, None),
    }
}

pub fn classify_hull(hull: &ClosedHullMesh, origin: Vec3, tol: f64) -> Result<EquilibriumSet> {
    classify_patch(hull, origin, tol)
}

pub fn classify_mesh(mesh: &TriangleMesh, origin: Vec3, tol: f64) -> Result<EquilibriumSet> {
    classify_patch(mesh, origin, tol)
}

struct Ctx<'a> {
    mesh: &'a TriangleMesh,
    topo: Topology,
    origin: Vec3,
    tol: f64,
    normals: Vec<Vec3>,
    flat: Vec<bool>,
    grid: Option<(&'a [[f64; 2]], &'a [Diagonal])>,
}

enum Outcome {
    Point(EquilibriumPoint),
    Near(NearDegenerate),
    Nothing,
}

impl Ctx<'_> {
    fn p(&self, v: usize) -> Vec3 {
        self.mesh.vertices[v]
    }

    fn point(&self, carrier: Carrier, location: Vec3, margin: f64, vertices: &[usize], face: Option<usize>, boundary: bool) -> EquilibriumPoint {
        let (grid_index, carrier_indices, diagonal) = match self.grid {
            Some((grid, diagonals)) => {
                let idx: Vec<[f64; 2]> = vertices.iter().map(|&v| grid[v]).collect();
                let anchor = *idx.iter().min_by(|a, b| a[1].total_cmp(&b[1]).then(a[0].total_cmp(&b[0]))).unwrap();
                let diagonal = match carrier {
                    Carrier::Face { f } => Some(diagonals[f / 2]),
                    Carrier::Edge { .. } if idx[0][0] != idx[1][0] && idx[0][1] != idx[1][1] => face.map(|f| diagonals[f / 2]),
                    _ => None,
                };
                (Some(anchor), idx, diagonal)
            }
            None => (None, Vec::new(), None),
        };
        EquilibriumPoint { kind: carrier.kind(), carrier, location, margin, grid_index, carrier_indices, diagonal, boundary }
    }

    fn vertex(&self, v: usize) -> Outcome {
        let neighbours = &self.topo.vertex_neighbors[v];
        if neighbours.is_empty() {
            return Outcome::Nothing;
        }
        let boundary = self.topo.boundary_vertex[v];
        let q = self.p(v);
        let mut slacks = Slacks::new();
        for &x in neighbours {
            if let Some(s) = support_slack(q, self.p(x), self.origin) {
                slacks.push(s);
            }
        }
        let carrier = Carrier::Vertex { v };
        match slacks.verdict(self.tol) {
            Support::Supported => Outcome::Point(self.point(carrier, q, slacks.min, &[v], None, boundary)),
            Support::Degenerate if !boundary => Outcome::Near(NearDegenerate { carrier, slack: slacks.critical }),
            _ => Outcome::Nothing,
        }
    }

    fn edge(&self, e: usize) -> Outcome {
        if self.flat[e] {
            return Outcome::Nothing;
        }
        let edge = &self.topo.edges[e];
        let [a, b] = edge.v;
        let (pa, pb) = (self.p(a), self.p(b));
        let d = pb - pa;
        let (ra, rb) = (pa - self.origin, pb - self.origin);
        let mut slacks = Slacks::new();
        slacks.push(-ra.dot(&d) / (ra.norm() * d.norm()));
        slacks.push(rb.dot(&d) / (rb.norm() * d.norm()));
        let q = pa + d * (-ra.dot(&d) / d.norm_squared());
        for &c in &edge.opposite {
            if let Some(s) = support_slack(q, self.p(c), self.origin) {
                slacks.push(s);
            }
        }
        let boundary = edge.is_boundary();
        let carrier = Carrier::Edge { a, b };
        match slacks.verdict(self.tol) {
            Support::Supported => Outcome::Point(self.point(carrier, q, slacks.min, &[a, b], Some(edge.faces[0]), boundary)),
            Support::Degenerate if !boundary => Outcome::Near(NearDegenerate { carrier, slack: slacks.critical }),
            _ => Outcome::Nothing,
        }
    }

    fn coplanar(&self, f: usize, g: usize) -> bool {
        let (n, m) = (self.normals[f], self.normals[g]);
        n.dot(&m) > 0.0 && n.cross(&m).norm() <= self.tol
    }

    fn face(&self, f: usize) -> Outcome {
        let v = self.mesh.faces[f];
        let n = self.normals[f];
        let r = v.map(|i| self.p(i) - self.origin);
        let mut slacks = Slacks::new();
        let mut edge_slacks = [0.0; 3];
        for k in 0..3 {
            let c = r[k].cross(&r[(k + 1) % 3]);
            edge_slacks[k] = n.dot(&c) / c.norm();
            slacks.push(edge_slacks[k]);
        }
        let carrier = Carrier::Face { f };
        let foot = self.origin + n * n.dot(&r[0]);
        let point = |margin: f64| Outcome::Point(self.point(carrier, foot, margin, &v, Some(f), false));
        match slacks.verdict(self.tol) {
            Support::Supported => point(slacks.min),
            Support::NotSupported => Outcome::Nothing,
            Support::Degenerate => {
                let zero: Vec<usize> = (0..3).filter(|&k| edge_slacks[k].abs() <= self.tol).collect();
                let fe = self.topo.face_edges[f];
                let near = Outcome::Near(NearDegenerate { carrier, slack: slacks.critical });
                // the lowest-numbered face of the coplanar fan around the foot
                // claims it
                let owner = match zero.as_slice() {
                    [k] => {
                        let edge = &self.topo.edges[fe[*k]];
                        if !self.flat[fe[*k]] {
                            return near;
                        }
                        edge.faces.iter().copied().min()
                    }
                    [k1, k2] => {
                        // two edges through one corner: k2 == k1 + 1 or (0, 2)
                        let corner = if *k2 == *k1 + 1 { v[*k2] } else { v[0] };
                        let fan = &self.topo.vertex_faces[corner];
                        if self.topo.boundary_vertex[corner] || !fan.iter().all(|&g| self.coplanar(f, g)) {
                            return near;
                        }
                        fan.iter().copied().min()
                    }
                    _ => return near,
                };
                if owner == Some(f) {
                    let margin = (0..3).filter(|k| !zero.contains(k)).map(|k| edge_slacks[k]).fold(f64::INFINITY, f64::min);
                    point(margin)
                } else {
                    Outcome::Nothing
                }
            }
        }
    }
}

fn classify_impl(mesh: &TriangleMesh, origin: Vec3, tol: f64, grid: Option<(&[[f64; 2]], &[Diagonal])>) -> Result<EquilibriumSet> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    mesh.validate()?;
    let topo = mesh.topology()?;
    for (f, face) in mesh.faces.iter().enumerate() {
        let [a, b, c] = face.map(|i| mesh.vertices[i]);
        if orient3d(a, b, c, origin) <= 0.0 {
            return Err(Error::InvertedFace { face: f });
        }
    }
    let normals: Vec<Vec3> = (0..mesh.faces.len()).map(|f| mesh.face_normal(f).normalize()).collect();
    let flat = topo
        .edges
        .iter()
        .map(|e| match e.faces.as_slice() {
            &[f, g] => normals[f].dot(&normals[g]) > 0.0 && normals[f].cross(&normals[g]).norm() <= tol,
            _ => false,
        })
        .collect();
    let closed = topo.boundary_edge_count() == 0;
    let ctx = Ctx { mesh, topo, origin, tol, normals, flat, grid };

    let outcomes: Vec<Outcome> = (0..mesh.vertices.len())
        .into_par_iter()
        .map(|v| ctx.vertex(v))
        .chain((0..ctx.topo.edges.len()).into_par_iter().map(|e| ctx.edge(e)))
        .chain((0..mesh.faces.len()).into_par_iter().map(|f| ctx.face(f)))
        .collect();
    let mut points = Vec::new();
    let mut near = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Point(p) => points.push(p),
            Outcome::Near(n) => near.push(n),
            Outcome::Nothing => {}
        }
    }
    Ok(EquilibriumSet::assemble(points, near, closed, false))
}
