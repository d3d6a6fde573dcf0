//! Indexed triangle meshes and their edge/vertex adjacency.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec3};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    /// Counterclockwise when seen from outside.
    pub faces: Vec<[usize; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<String>,
}

/// An undirected edge with its incident faces (one on the boundary, two in
/// the interior) and the vertex of each face opposite to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub v: [usize; 2],
    pub faces: Vec<usize>,
    pub opposite: Vec<usize>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.faces.len() == 1
    }
}

#[derive(Debug, Clone)]
pub struct Topology {
    /// Sorted by vertex pair.
    pub edges: Vec<Edge>,
    edge_index: BTreeMap<(usize, usize), usize>,
    pub face_edges: Vec<[usize; 3]>,
    pub vertex_faces: Vec<Vec<usize>>,
    /// Sorted neighbor lists.
    pub vertex_neighbors: Vec<Vec<usize>>,
    pub boundary_vertex: Vec<bool>,
}

impl Topology {
    pub fn edge(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn boundary_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| e.is_boundary()).count()
    }

    /// Vertices within `ring` hops of `v`, excluding `v`, in BFS order.
    pub fn ring(&self, v: usize, ring: usize) -> Vec<usize> {
        let mut seen = vec![v];
        let mut frontier = vec![v];
        for _ in 0..ring {
            let mut next = Vec::new();
            for &x in &frontier {
                for &y in &self.vertex_neighbors[x] {
                    if !seen.contains(&y) {
                        seen.push(y);
                        next.push(y);
                    }
                }
            }
            frontier = next;
        }
        seen.remove(0);
        seen
    }
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Self {
        TriangleMesh { vertices, faces, units: None }
    }

    /// Unnormalized face normal `(b - a) x (c - a)`.
    pub fn face_normal(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.faces[f].map(|i| self.vertices[i]);
        (b - a).cross(&(c - a))
    }

    pub fn face_area(&self, f: usize) -> f64 {
        0.5 * self.face_normal(f).norm()
    }

    pub fn bbox_diagonal(&self) -> f64 {
        let Some(first) = self.vertices.first() else { return 0.0 };
        let (lo, hi) = self.vertices.iter().fold((*first, *first), |(lo, hi), p| (lo.inf(p), hi.sup(p)));
        (hi - lo).norm()
    }

    /// Checks index ranges, repeated corners and zero-area faces.
    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        for (i, p) in self.vertices.iter().enumerate() {
            if !p.iter().all(|c| c.is_finite()) {
                return Err(Error::NonFinite(format!("vertex {i}")));
            }
        }
        let scale = self.bbox_diagonal();
        for (fi, f) in self.faces.iter().enumerate() {
            if f.iter().any(|&i| i >= n) {
                return Err(Error::InvalidInput(format!("face {fi} references a missing vertex")));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] || self.face_normal(fi).norm() <= 1e-14 * scale * scale {
                return Err(Error::DegenerateTriangle { face: fi });
            }
        }
        Ok(())
    }

    /// Builds edge and vertex adjacency. Fails on edges shared by more than
    /// two faces or traversed in the same direction by both of their faces.
    pub fn topology(&self) -> Result<Topology> {
        let nv = self.vertices.len();
        let mut directed: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut edge_map: BTreeMap<(usize, usize), (Vec<usize>, Vec<usize>)> = BTreeMap::new();
        let mut vertex_faces = vec![Vec::new(); nv];
        for (fi, f) in self.faces.iter().enumerate() {
            for k in 0..3 {
                let (a, b, c) = (f[k], f[(k + 1) % 3], f[(k + 2) % 3]);
                if let Some(other) = directed.insert((a, b), fi) {
                    return Err(Error::NonManifold(format!("faces {other} and {fi} both traverse edge {a} -> {b}")));
                }
                let e = edge_map.entry((a.min(b), a.max(b))).or_default();
                e.0.push(fi);
                e.1.push(c);
                if e.0.len() > 2 {
                    return Err(Error::NonManifold(format!("edge ({a}, {b}) has more than two faces")));
                }
                vertex_faces[a].push(fi);
            }
        }
        let mut edges = Vec::with_capacity(edge_map.len());
        let mut edge_index = BTreeMap::new();
        let mut neighbors = vec![Vec::new(); nv];
        let mut boundary_vertex = vec![false; nv];
        for ((a, b), (faces, opposite)) in edge_map {
            edge_index.insert((a, b), edges.len());
            neighbors[a].push(b);
            neighbors[b].push(a);
            if faces.len() == 1 {
                boundary_vertex[a] = true;
                boundary_vertex[b] = true;
            }
            edges.push(Edge { v: [a, b], faces, opposite });
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        let face_edges = self
            .faces
            .iter()
            .map(|f| {
                let e = |a: usize, b: usize| edge_index[&(a.min(b), a.max(b))];
                [e(f[0], f[1]), e(f[1], f[2]), e(f[2], f[0])]
            })
            .collect();
        Ok(Topology { edges, edge_index, face_edges, vertex_faces, vertex_neighbors: neighbors, boundary_vertex })
    }

    /// `V - E + F`, counting only vertices used by some face.
    pub fn euler_characteristic(&self) -> Result<i64> {
        let t = self.topology()?;
        let used = t.vertex_faces.iter().filter(|f| !f.is_empty()).count();
        Ok(used as i64 - t.edges.len() as i64 + self.faces.len() as i64)
    }

    pub fn ensure_watertight(&self) -> Result<Topology> {
        let t = self.topology()?;
        let boundary_edges = t.boundary_edge_count();
        if boundary_edges > 0 || self.faces.is_empty() {
            return Err(Error::NotWatertight { boundary_edges });
        }
        Ok(t)
    }

    /// Signed enclosed volume (positive for outward-oriented closed meshes).
    pub fn signed_volume(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| {
                let [a, b, c] = f.map(|i| self.vertices[i]);
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }

    /// Applies `p -> r p + t` to every vertex.
    pub fn transformed(&self, rotation: &nalgebra::Rotation3<f64>, translation: Vec3, scale: f64) -> Self {
        TriangleMesh {
            vertices: self.vertices.iter().map(|p| rotation * p * scale + translation).collect(),
            faces: self.faces.clone(),
            units: self.units.clone(),
        }
    }
}

/// Axis-aligned cube `center ± half`, 12 outward triangles.
pub fn cube(center: Vec3, half: f64) -> TriangleMesh {
    let mut vertices = Vec::with_capacity(8);
    for i in 0..8 {
        let s = |bit: usize| if i & bit != 0 { half } else { -half };
        vertices.push(center + Vec3::new(s(1), s(2), s(4)));
    }
    let quads = [[0, 2, 3, 1], [4, 5, 7, 6], [0, 1, 5, 4], [2, 6, 7, 3], [0, 4, 6, 2], [1, 3, 7, 5]];
    let faces = quads.iter().flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]]).collect();
    TriangleMesh::new(vertices, faces)
}

/// Regular octahedron with vertices at `±r e_i`.
pub fn octahedron(r: f64) -> TriangleMesh {
    let vertices = vec![
        Vec3::new(r, 0.0, 0.0),
        Vec3::new(-r, 0.0, 0.0),
        Vec3::new(0.0, r, 0.0),
        Vec3::new(0.0, -r, 0.0),
        Vec3::new(0.0, 0.0, r),
        Vec3::new(0.0, 0.0, -r),
    ];
    let faces = vec![[0, 2, 4], [2, 1, 4], [1, 3, 4], [3, 0, 4], [2, 0, 5], [1, 2, 5], [3, 1, 5], [0, 3, 5]];
    TriangleMesh::new(vertices, faces)
}
