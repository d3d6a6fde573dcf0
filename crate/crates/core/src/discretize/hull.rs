//! Quickhull in three dimensions with exact orientation tests.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::orient3d;
use crate::mesh::TriangleMesh;
use crate::{Error, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    HullOfSamples,
    Loaded,
}

/// Closed outward-oriented triangle mesh.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClosedHullMesh {
    pub mesh: TriangleMesh,
    /// Input index of every hull vertex (for hulls of samples).
    pub source_index: Vec<usize>,
    pub provenance: Provenance,
}

impl ClosedHullMesh {
    /// Wraps an already closed mesh after checking it is watertight.
    pub fn from_mesh(mesh: TriangleMesh) -> Result<Self> {
        mesh.validate()?;
        mesh.ensure_watertight()?;
        let source_index = (0..mesh.vertices.len()).collect();
        Ok(ClosedHullMesh { mesh, source_index, provenance: Provenance::Loaded })
    }
}

struct Face {
    v: [usize; 3],
    alive: bool,
    outside: Vec<usize>,
    normal: Vec3,
    offset: f64,
}

impl Face {
    fn new(points: &[Vec3], v: [usize; 3]) -> Face {
        let [a, b, c] = v.map(|i| points[i]);
        let n = (b - a).cross(&(c - a));
        let normal = n / n.norm();
        Face { v, alive: true, outside: Vec::new(), normal, offset: normal.dot(&a) }
    }

    fn distance(&self, p: &Vec3) -> f64 {
        self.normal.dot(p) - self.offset
    }
}

fn above(points: &[Vec3], f: &[usize; 3], p: usize) -> bool {
    orient3d(points[f[0]], points[f[1]], points[f[2]], points[p]) < 0.0
}

/// Convex hull of a point set as an outward-oriented closed triangle mesh.
/// Points lying on the hull boundary but not at a corner are dropped, so
/// coplanar facets come out triangulated by their corner vertices only.
pub fn hull_of_samples(points: &[Vec3]) -> Result<ClosedHullMesh> {
    if points.len() < 4 {
        return Err(Error::Coplanar);
    }
    if points.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
        return Err(Error::NonFinite("hull input".into()));
    }
    let simplex = initial_simplex(points)?;
    let mut faces: Vec<Face> = Vec::new();
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    let [i0, i1, i2, i3] = simplex;
    for tri in [[i0, i1, i2], [i0, i3, i1], [i1, i3, i2], [i2, i3, i0]] {
        add_face(points, &mut faces, &mut edges, tri)?;
    }
    let mut pending: VecDeque<usize> = VecDeque::new();
    for p in 0..points.len() {
        if simplex.contains(&p) {
            continue;
        }
        if let Some(f) = (0..faces.len()).find(|&f| above(points, &faces[f].v, p)) {
            faces[f].outside.push(p);
        }
    }
    pending.extend(0..faces.len());

    while let Some(fi) = pending.pop_front() {
        if !faces[fi].alive || faces[fi].outside.is_empty() {
            continue;
        }
        let eye = *faces[fi].outside.iter().max_by(|&&a, &&b| faces[fi].distance(&points[a]).total_cmp(&faces[fi].distance(&points[b])).then(b.cmp(&a))).unwrap();

        // visible region by flood fill from fi
        let mut visible = vec![fi];
        let mut is_visible: HashMap<usize, bool> = HashMap::from([(fi, true)]);
        let mut horizon: Vec<(usize, usize)> = Vec::new();
        let mut k = 0;
        while k < visible.len() {
            let f = visible[k];
            k += 1;
            let v = faces[f].v;
            for e in 0..3 {
                let (a, b) = (v[e], v[(e + 1) % 3]);
                let nb = *edges.get(&(b, a)).ok_or_else(|| Error::NonManifold(format!("hull edge ({b}, {a}) has no twin")))?;
                let vis = *is_visible.entry(nb).or_insert_with(|| above(points, &faces[nb].v, eye));
                if vis {
                    if !visible.contains(&nb) {
                        visible.push(nb);
                    }
                } else {
                    horizon.push((a, b));
                }
            }
        }

        let mut orphans = Vec::new();
        for &f in &visible {
            faces[f].alive = false;
            orphans.append(&mut faces[f].outside);
            let v = faces[f].v;
            for e in 0..3 {
                edges.remove(&(v[e], v[(e + 1) % 3]));
            }
        }
        let first_new = faces.len();
        for (a, b) in horizon {
            add_face(points, &mut faces, &mut edges, [a, b, eye])?;
        }
        for p in orphans {
            if p == eye {
                continue;
            }
            if let Some(f) = (first_new..faces.len()).find(|&f| above(points, &faces[f].v, p)) {
                faces[f].outside.push(p);
            }
        }
        pending.extend(first_new..faces.len());
    }

    // compact, numbering hull vertices by input order
    let alive: Vec<&Face> = faces.iter().filter(|f| f.alive).collect();
    let mut used: Vec<usize> = alive.iter().flat_map(|f| f.v).collect();
    used.sort_unstable();
    used.dedup();
    let remap: HashMap<usize, usize> = used.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let mut out_faces: Vec<[usize; 3]> = alive.iter().map(|f| f.v.map(|i| remap[&i])).collect();
    // rotate each triangle to start at its smallest vertex and sort, for a
    // canonical output independent of insertion history
    for f in &mut out_faces {
        let k = (0..3).min_by_key(|&k| f[k]).unwrap();
        f.rotate_left(k);
    }
    out_faces.sort_unstable();
    let mesh = TriangleMesh::new(used.iter().map(|&i| points[i]).collect(), out_faces);
    mesh.ensure_watertight()?;
    Ok(ClosedHullMesh { mesh, source_index: used, provenance: Provenance::HullOfSamples })
}

fn add_face(points: &[Vec3], faces: &mut Vec<Face>, edges: &mut HashMap<(usize, usize), usize>, v: [usize; 3]) -> Result<()> {
    let id = faces.len();
    for e in 0..3 {
        let key = (v[e], v[(e + 1) % 3]);
        if edges.insert(key, id).is_some() {
            return Err(Error::NonManifold(format!("hull edge {key:?} used twice")));
        }
    }
    faces.push(Face::new(points, v));
    Ok(())
}

fn initial_simplex(points: &[Vec3]) -> Result<[usize; 4]> {
    let mut extremes = [0usize; 6];
    for (i, p) in points.iter().enumerate() {
        for axis in 0..3 {
            if p[axis] < points[extremes[2 * axis]][axis] {
                extremes[2 * axis] = i;
            }
            if p[axis] > points[extremes[2 * axis + 1]][axis] {
                extremes[2 * axis + 1] = i;
            }
        }
    }
    let mut best = (0.0, 0, 0);
    for &a in &extremes {
        for &b in &extremes {
            let d = (points[a] - points[b]).norm();
            if d > best.0 {
                best = (d, a, b);
            }
        }
    }
    let (diam, a, b) = best;
    if diam == 0.0 {
        return Err(Error::Coplanar);
    }
    let dir = (points[b] - points[a]) / diam;
    let (mut c, mut dc) = (usize::MAX, 0.0);
    for (i, p) in points.iter().enumerate() {
        let w = p - points[a];
        let d = (w - dir * w.dot(&dir)).norm();
        if d > dc {
            dc = d;
            c = i;
        }
    }
    if dc <= 1e-12 * diam {
        return Err(Error::Coplanar);
    }
    let normal = (points[b] - points[a]).cross(&(points[c] - points[a])).normalize();
    let (mut d, mut dd) = (usize::MAX, 0.0);
    for (i, p) in points.iter().enumerate() {
        let h = normal.dot(&(p - points[a])).abs();
        if h > dd {
            dd = h;
            d = i;
        }
    }
    if dd <= 1e-12 * diam || orient3d(points[a], points[b], points[c], points[d]) == 0.0 {
        return Err(Error::Coplanar);
    }
    // the fourth point must lie below the base (a, b, c)
    if orient3d(points[a], points[b], points[c], points[d]) > 0.0 {
        Ok([a, b, c, d])
    } else {
        Ok([a, c, b, d])
    }
}
