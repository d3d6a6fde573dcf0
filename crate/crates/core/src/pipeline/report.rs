use std::collections::VecDeque;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::centroid::solid_centroid;
use super::curvature::{estimate_curvatures_with, CurvatureEstimate};
use crate::classify::{classify_hull, Carrier, Census, EquilibriumSet, DEFAULT_TOL};
use crate::discretize::{hull_of_samples, ClosedHullMesh};
use crate::geometry::FundamentalForms;
use crate::indices::{error_bounds, imaginary_indices_3d, ErrorBounds, ImaginaryIndices};
use crate::mesh::{Topology, TriangleMesh};
use crate::{EquilibriumKind, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PebbleOptions {
    /// Ring size of the curvature fit.
    pub ring: usize,
    /// Equilibria whose carriers are at most this many edges apart share a
    /// flock.
    pub hop_threshold: usize,
    /// Classification tolerance.
    pub tol: f64,
}

impl Default for PebbleOptions {
    fn default() -> Self {
        PebbleOptions { ring: 2, hop_threshold: 3, tol: DEFAULT_TOL }
    }
}

/// One flock of the hull.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlockRow {
    pub flock: usize,
    /// Indices into the equilibrium list of the report.
    pub members: Vec<usize>,
    pub census: Census,
    /// Area-weighted mean of the member locations.
    pub representative: Vec3,
    pub rho: f64,
    /// Hull vertex closest to the representative point.
    pub vertex: usize,
    pub curvature: Option<CurvatureEstimate>,
    pub predicted: Option<ImaginaryIndices>,
    /// Bounds for a square grid aligned with the principal directions.
    pub bounds: Option<ErrorBounds>,
    /// `|U - U*| <= Err_U`, `|N - N*| <= Err_N`, `|S - S*| <= Err_S`.
    pub within_bounds: Option<[bool; 3]>,
    /// Why the row has no prediction.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HullStats {
    pub input_vertices: usize,
    pub hull_vertices: usize,
    pub hull_faces: usize,
    pub volume: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PebbleReport {
    pub options: PebbleOptions,
    pub centroid: Vec3,
    pub hull: HullStats,
    pub rows: Vec<FlockRow>,
    pub census: Census,
    /// `S + U - N` over the whole hull.
    pub poincare_hopf: i64,
    pub near_degenerate: usize,
    pub equilibria: EquilibriumSet,
}

/// Full analysis of a closed mesh: centroid of the solid, convex hull of the
/// vertices, equilibria of the hull relative to the centroid, flocks and
/// per-flock predictions from estimated curvatures.
pub fn pebble_report(mesh: &TriangleMesh, options: &PebbleOptions) -> Result<PebbleReport> {
    let centroid = solid_centroid(mesh)?;
    let hull = hull_of_samples(&mesh.vertices)?;
    analyze_hull(&hull, centroid, mesh.vertices.len(), options)
}

/// [`pebble_report`] on an already computed hull and reference point.
pub fn analyze_hull(hull: &ClosedHullMesh, centroid: Vec3, input_vertices: usize, options: &PebbleOptions) -> Result<PebbleReport> {
    let eqs = classify_hull(hull, centroid, options.tol)?;
    let mesh = &hull.mesh;
    let topo = mesh.ensure_watertight()?;
    let flocks = cluster_by_hops(mesh, &topo, &eqs, options.hop_threshold);
    let rows = flocks
        .into_iter()
        .enumerate()
        .map(|(id, members)| flock_row(id, members, mesh, &topo, &eqs, centroid, options))
        .collect();
    Ok(PebbleReport {
        options: *options,
        centroid,
        hull: HullStats { input_vertices, hull_vertices: mesh.vertices.len(), hull_faces: mesh.faces.len(), volume: mesh.signed_volume() },
        rows,
        census: eqs.counts,
        poincare_hopf: eqs.counts.index_sum(),
        near_degenerate: eqs.near_degenerate.len(),
        equilibria: eqs,
    })
}

fn carrier_vertices(mesh: &TriangleMesh, c: &Carrier) -> Vec<usize> {
    match *c {
        Carrier::Vertex { v } => vec![v],
        Carrier::Edge { a, b } => vec![a, b],
        Carrier::Face { f } => mesh.faces[f].to_vec(),
    }
}

/// Connected components of the relation "carriers within `hops` edges".
fn cluster_by_hops(mesh: &TriangleMesh, topo: &Topology, eqs: &EquilibriumSet, hops: usize) -> Vec<Vec<usize>> {
    let n = eqs.points.len();
    let mut owners: Vec<Vec<usize>> = vec![Vec::new(); mesh.vertices.len()];
    let verts: Vec<Vec<usize>> = eqs.points.iter().map(|p| carrier_vertices(mesh, &p.carrier)).collect();
    for (k, vs) in verts.iter().enumerate() {
        for &v in vs {
            owners[v].push(k);
        }
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut depth = vec![usize::MAX; mesh.vertices.len()];
    let mut touched = Vec::new();
    for k in 0..n {
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &v in &verts[k] {
            depth[v] = 0;
            touched.push(v);
            queue.push_back(v);
        }
        while let Some(v) = queue.pop_front() {
            for &other in &owners[v] {
                let (a, b) = (find(&mut parent, k), find(&mut parent, other));
                parent[a.max(b)] = a.min(b);
            }
            if depth[v] < hops {
                for &w in &topo.vertex_neighbors[v] {
                    if depth[w] == usize::MAX {
                        depth[w] = depth[v] + 1;
                        touched.push(w);
                        queue.push_back(w);
                    }
                }
            }
        }
        for v in touched.drain(..) {
            depth[v] = usize::MAX;
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for k in 0..n {
        let r = find(&mut parent, k);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(k);
    }
    groups
}

/// Mean area of the faces incident to the carrier.
fn carrier_weight(mesh: &TriangleMesh, topo: &Topology, c: &Carrier) -> f64 {
    let faces: Vec<usize> = match *c {
        Carrier::Vertex { v } => topo.vertex_faces[v].clone(),
        Carrier::Edge { a, b } => topo.edge(a, b).map(|e| topo.edges[e].faces.clone()).unwrap_or_default(),
        Carrier::Face { f } => vec![f],
    };
    if faces.is_empty() {
        return 1.0;
    }
    faces.iter().map(|&f| mesh.face_area(f)).sum::<f64>() / faces.len() as f64
}

fn flock_row(id: usize, members: Vec<usize>, mesh: &TriangleMesh, topo: &Topology, eqs: &EquilibriumSet, centroid: Vec3, options: &PebbleOptions) -> FlockRow {
    let census = Census::of(members.iter().map(|&k| &eqs.points[k]));
    let (mut sum, mut weight) = (Vec3::zeros(), 0.0);
    for &k in &members {
        let w = carrier_weight(mesh, topo, &eqs.points[k].carrier);
        sum += w * eqs.points[k].location;
        weight += w;
    }
    let representative = sum / weight;
    let rho = (representative - centroid).norm();
    let vertex = (0..mesh.vertices.len())
        .min_by(|&a, &b| (mesh.vertices[a] - representative).norm().total_cmp(&(mesh.vertices[b] - representative).norm()))
        .unwrap_or(0);
    let mut row = FlockRow { flock: id, members, census, representative, rho, vertex, curvature: None, predicted: None, bounds: None, within_bounds: None, note: None };
    let curvature = match estimate_curvatures_with(mesh, topo, vertex, options.ring) {
        Ok(c) => c,
        Err(e) => {
            row.note = Some(format!("curvature: {e}"));
            return row;
        }
    };
    row.curvature = Some(curvature);
    if curvature.low_confidence {
        row.note = Some("low-confidence curvature fit".into());
    }
    match imaginary_indices_3d(rho, curvature.k1, curvature.k2) {
        Ok(p) => {
            row.predicted = Some(p);
            let forms = FundamentalForms::principal(curvature.k1, curvature.k2);
            if let Ok(b) = error_bounds(&forms, rho, 1.0) {
                row.within_bounds = Some([
                    (census.unstable as f64 - p.u_star).abs() <= b.err_u,
                    (census.saddle as f64 - p.n_star).abs() <= b.err_n,
                    (census.stable as f64 - p.s_star).abs() <= b.err_s,
                ]);
                row.bounds = Some(b);
            }
        }
        Err(e) => row.note = Some(format!("no prediction: {e}")),
    }
    row
}

impl PebbleReport {
    /// Columns `flock,S*,S,U*,U,N*,N`; predictions are empty where missing.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["flock", "S*", "S", "U*", "U", "N*", "N"]).map_err(csv_err)?;
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_default();
        for r in &self.rows {
            let p = r.predicted.as_ref();
            w.write_record([
                r.flock.to_string(),
                opt(p.map(|p| p.s_star)),
                r.census.stable.to_string(),
                opt(p.map(|p| p.u_star)),
                r.census.unstable.to_string(),
                opt(p.map(|p| p.n_star)),
                r.census.saddle.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    /// The hull followed by one point element per equilibrium, grouped by
    /// type.
    pub fn write_overlay_obj<W: Write>(&self, hull: &TriangleMesh, mut out: W) -> Result<()> {
        writeln!(out, "o hull")?;
        super::io::write_obj(hull, &mut out)?;
        let base = hull.vertices.len();
        for p in &self.equilibria.points {
            writeln!(out, "v {} {} {}", p.location.x, p.location.y, p.location.z)?;
        }
        writeln!(out, "v {} {} {}", self.centroid.x, self.centroid.y, self.centroid.z)?;
        for kind in [EquilibriumKind::Stable, EquilibriumKind::Saddle, EquilibriumKind::Unstable] {
            writeln!(out, "g {kind}")?;
            for (k, p) in self.equilibria.points.iter().enumerate() {
                if p.kind == kind {
                    writeln!(out, "p {}", base + k + 1)?;
                }
            }
        }
        writeln!(out, "g centroid\np {}", base + self.equilibria.points.len() + 1)?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> crate::Error {
    crate::Error::Io(std::io::Error::other(e))
}
