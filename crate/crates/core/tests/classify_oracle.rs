//! Cross-checks the floating-point classifier against an exact re-derivation
//! of every cell's critical-point conditions in rational arithmetic.
//!
//! Each f64 vertex is converted to the rational number it represents, so the
//! oracle decides the exact mesh the classifier sees. Cells whose exact slack
//! is zero, or whose foot is within rounding of a flat edge, may go either
//! way; every other cell must agree.

use std::collections::{BTreeMap, BTreeSet};

use equiflock::classify::{classify_patch, Carrier, EquilibriumSet, DEFAULT_TOL};
use equiflock::discretize::{discretize_surface, hull_of_samples};
use equiflock::geometry::{Ellipsoid, QuadricPatch, Rect};
use equiflock::mesh::TriangleMesh;
use equiflock::{EquilibriumKind, Vec3};
use num::{BigRational, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Q = BigRational;

#[derive(Clone)]
struct P([Q; 3]);

impl P {
    fn of(v: Vec3) -> P {
        P([v.x, v.y, v.z].map(|c| Q::from_float(c).unwrap()))
    }
    fn sub(&self, o: &P) -> P {
        P([&self.0[0] - &o.0[0], &self.0[1] - &o.0[1], &self.0[2] - &o.0[2]])
    }
    fn add(&self, o: &P) -> P {
        P([&self.0[0] + &o.0[0], &self.0[1] + &o.0[1], &self.0[2] + &o.0[2]])
    }
    fn scale(&self, s: &Q) -> P {
        P([&self.0[0] * s, &self.0[1] * s, &self.0[2] * s])
    }
    fn dot(&self, o: &P) -> Q {
        &self.0[0] * &o.0[0] + &self.0[1] * &o.0[1] + &self.0[2] * &o.0[2]
    }
    fn cross(&self, o: &P) -> P {
        let [a, b, c] = &self.0;
        let [x, y, z] = &o.0;
        P([b * z - c * y, c * x - a * z, a * y - b * x])
    }
}

/// `Some(true)` all strict inequalities hold, `Some(false)` one fails,
/// `None` one is an exact equality.
fn all_positive(values: &[Q]) -> Option<bool> {
    if values.iter().any(|v| v.is_negative()) {
        Some(false)
    } else if values.iter().any(|v| v.is_zero()) {
        None
    } else {
        Some(true)
    }
}

struct Oracle {
    found: BTreeSet<Carrier>,
    ties: BTreeSet<Carrier>,
}

fn oracle(mesh: &TriangleMesh, origin: Vec3) -> Oracle {
    let o = P::of(origin);
    let pts: Vec<P> = mesh.vertices.iter().map(|&v| P::of(v)).collect();
    let mut edge_faces: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (f, face) in mesh.faces.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (face[k], face[(k + 1) % 3]);
            edge_faces.entry((a.min(b), a.max(b))).or_default().push(f);
        }
    }
    let opposite = |f: usize, a: usize, b: usize| *mesh.faces[f].iter().find(|&&v| v != a && v != b).unwrap();
    let mut neighbours: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); pts.len()];
    let mut on_boundary = vec![false; pts.len()];
    for (&(a, b), faces) in &edge_faces {
        neighbours[a].insert(b);
        neighbours[b].insert(a);
        if faces.len() == 1 {
            on_boundary[a] = true;
            on_boundary[b] = true;
        }
    }

    let mut found = BTreeSet::new();
    let mut ties = BTreeSet::new();
    let mut record = |c: Carrier, verdict: Option<bool>| match verdict {
        Some(true) => {
            found.insert(c);
        }
        Some(false) => {}
        None => {
            ties.insert(c);
        }
    };

    // vertex: the squared distance strictly decreases along every star edge
    for v in 0..pts.len() {
        if on_boundary[v] || neighbours[v].is_empty() {
            continue;
        }
        let r = pts[v].sub(&o);
        let vals: Vec<Q> = neighbours[v].iter().map(|&x| -pts[x].sub(&pts[v]).dot(&r)).collect();
        record(Carrier::Vertex { v }, all_positive(&vals));
    }

    // edge: the foot lies strictly inside the segment and both adjacent
    // faces drop towards the origin away from it
    for (&(a, b), faces) in &edge_faces {
        if faces.len() != 2 {
            continue;
        }
        let d = pts[b].sub(&pts[a]);
        let len2 = d.dot(&d);
        let t = -pts[a].sub(&o).dot(&d) / &len2;
        let foot = pts[a].add(&d.scale(&t));
        let r = foot.sub(&o);
        // a flat edge carries no saddle; flatness follows the classifier's
        // tolerance convention
        if coplanar(mesh, faces[0], faces[1]) {
            continue;
        }
        let mut vals = vec![t.clone(), Q::from_integer(1.into()) - t];
        for &f in faces {
            let c = opposite(f, a, b);
            vals.push(-pts[c].sub(&foot).dot(&r));
        }
        record(Carrier::Edge { a, b }, all_positive(&vals));
    }

    // face: barycentric coordinates of the orthogonal projection of the origin
    for (f, &face) in mesh.faces.iter().enumerate() {
        let n = face_normal(&pts, face);
        let [a, b, c] = face.map(|i| pts[i].clone());
        let h = a.sub(&o).dot(&n) / n.dot(&n);
        let foot = o.add(&n.scale(&h));
        let bary = [b.sub(&foot).cross(&c.sub(&foot)).dot(&n), c.sub(&foot).cross(&a.sub(&foot)).dot(&n), a.sub(&foot).cross(&b.sub(&foot)).dot(&n)];
        let mut verdict = all_positive(&bary);
        if verdict == Some(false) {
            // feet within rounding of an edge count as ties
            let total: Q = bary.iter().sum();
            let worst = bary.iter().min().unwrap() / total;
            if worst > Q::new((-1).into(), 1_000_000_000_000i64.into()) {
                verdict = None;
            }
        }
        record(Carrier::Face { f }, verdict);
    }
    Oracle { found, ties }
}

fn coplanar(mesh: &TriangleMesh, f: usize, g: usize) -> bool {
    let (n, m) = (mesh.face_normal(f).normalize(), mesh.face_normal(g).normalize());
    n.dot(&m) > 0.0 && n.cross(&m).norm() <= DEFAULT_TOL
}

fn face_normal(pts: &[P], face: [usize; 3]) -> P {
    let [a, b, c] = face.map(|i| pts[i].clone());
    b.sub(&a).cross(&c.sub(&a))
}

/// Asserts agreement and returns the number of cells the classifier left as
/// near-degenerate.
fn check(mesh: &TriangleMesh, origin: Vec3, eqs: &EquilibriumSet) -> usize {
    let exact = oracle(mesh, origin);
    let got: BTreeSet<Carrier> = eqs.points.iter().map(|p| p.carrier).collect();
    let near: BTreeSet<Carrier> = eqs.near_degenerate.iter().map(|n| n.carrier).collect();
    // a stable foot within rounding of an edge between tolerance-coplanar
    // faces may be claimed by either face
    let swapped = |c: &Carrier, other: &BTreeSet<Carrier>| match *c {
        Carrier::Face { f } => other.iter().any(|d| match *d {
            Carrier::Face { f: g } => mesh.faces[g].iter().any(|v| mesh.faces[f].contains(v)) && coplanar(mesh, f, g),
            _ => false,
        }),
        _ => false,
    };
    let only_got: BTreeSet<Carrier> = got.difference(&exact.found).copied().collect();
    let only_exact: BTreeSet<Carrier> = exact.found.difference(&got).copied().collect();
    for c in &only_got {
        assert!(exact.ties.contains(c) || swapped(c, &only_exact), "{c:?} reported but not critical");
    }
    for c in &only_exact {
        assert!(near.contains(c) || swapped(c, &only_got), "{c:?} critical but neither reported nor flagged");
    }
    for p in &eqs.points {
        assert_eq!(p.kind, p.carrier.kind());
    }
    near.len()
}

#[test]
fn quadric_patches_agree_with_exact_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut flagged = 0;
    for case in 0..40 {
        let l = -rng.gen_range(0.3..3.0);
        let nn = -rng.gen_range(0.3..3.0);
        let m = rng.gen_range(-0.25..0.25) * (l * nn as f64).sqrt();
        let rho = rng.gen_range(0.3..2.0);
        let n = [5, 6, 8, 9, 12][case % 5];
        let q = QuadricPatch::graph(l, m, nn, rho);
        let origin = Vec3::new(rng.gen_range(-0.02..0.02), rng.gen_range(-0.02..0.02), rng.gen_range(-0.05..0.05));
        let offset = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
        let p = discretize_surface(&q, n, offset, origin).unwrap();
        let eqs = classify_patch(&p, origin, DEFAULT_TOL).unwrap();
        flagged += check(&p.mesh, origin, &eqs);
    }
    assert_eq!(flagged, 0);
}

#[test]
fn apex_example_agrees_with_exact_oracle() {
    let q = QuadricPatch::graph(-1.0, 0.0, -1.0, 0.5).with_domain(Rect::new(-20.0 / 41.0, 21.0 / 41.0, -20.0 / 41.0, 21.0 / 41.0));
    let p = discretize_surface(&q, 41, (0.0, 0.0), Vec3::zeros()).unwrap();
    let eqs = classify_patch(&p, Vec3::zeros(), DEFAULT_TOL).unwrap();
    check(&p.mesh, Vec3::zeros(), &eqs);
    let unstable: Vec<_> = eqs.of_kind(EquilibriumKind::Unstable).collect();
    assert_eq!(unstable.len(), 1);
    assert_eq!(unstable[0].location, Vec3::new(0.0, 0.0, 0.5));
}

#[test]
fn hulls_agree_with_exact_oracle() {
    let e = Ellipsoid::new(1.25, 1.15, 1.0);
    let hull = hull_of_samples(&e.angular_samples(24, 12, (0.31, 0.17))).unwrap();
    let origin = Vec3::new(0.01, -0.02, 0.015);
    let eqs = classify_patch(&hull, origin, DEFAULT_TOL).unwrap();
    assert_eq!(check(&hull.mesh, origin, &eqs), 0);
    assert_eq!(equiflock::classify::poincare_hopf(&eqs).unwrap(), 2);
}

#[test]
fn cube_ties_are_flagged_or_resolved() {
    // face centres sit on the split diagonals, an exact tie for the oracle;
    // the classifier resolves each to one face
    let cube = equiflock::mesh::cube(Vec3::zeros(), 1.0);
    let eqs = classify_patch(&cube, Vec3::zeros(), DEFAULT_TOL).unwrap();
    check(&cube, Vec3::zeros(), &eqs);
    assert_eq!((eqs.counts.stable, eqs.counts.saddle, eqs.counts.unstable), (6, 12, 8));
}
