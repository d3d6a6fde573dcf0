use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use equiflock::analysis::{counts_2d, flock_counts_at, window_counts, AverageSeries, CurveCounts, SeriesRow, WindowCounts};
use equiflock::classify::{classify_patch, classify_polygon, poincare_hopf, Census, EquilibriumPoint};
use equiflock::discretize::{discretize_curve, discretize_surface_window};
use equiflock::geometry::{find_curve_equilibria, find_smooth_equilibria, CurveSpec, ParametricSurface, SmoothEquilibrium, SurfaceSpec};
use equiflock::indices::{error_bounds, imaginary_indices_2d, imaginary_indices_3d, ErrorBounds, ImaginaryIndices, ImaginaryIndices2d};
use equiflock::mesh::TriangleMesh;
use equiflock::pipeline::{load_mesh, pebble_report, write_obj, MeshFormat, PebbleOptions, PebbleReport};
use equiflock::{Vec2, Vec3};

use crate::config::RunConfig;

/// How a successful run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Clean,
    /// Near-degenerate cells were left out of the counts.
    Degenerate,
}

const SCHEMA: u32 = 1;

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn create_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating output directory {}", out.display()))
}

fn origin(cfg: &RunConfig) -> Vec3 {
    Vec3::from(cfg.origin)
}

#[derive(Debug, Serialize)]
struct SurfaceFlock {
    id: usize,
    chart: Option<usize>,
    params: [f64; 2],
    position: Vec3,
    rho: f64,
    kappas: (f64, f64),
    kind: String,
    lambda: f64,
    counts: WindowCounts,
    predicted: Option<ImaginaryIndices>,
    bounds: Option<ErrorBounds>,
    within_bounds: Option<[bool; 3]>,
}

#[derive(Debug, Serialize)]
struct SurfaceReport<'a> {
    schema: u32,
    config: &'a RunConfig,
    surface: String,
    flocks: Vec<SurfaceFlock>,
    census: Census,
    near_degenerate: usize,
}

/// Flocks of every smooth equilibrium, each counted on the grid of the chart
/// it was found in, in a window of half-width `K`.
pub fn analyze_surface(cfg: &RunConfig) -> Result<Status> {
    let spec: SurfaceSpec = cfg.surface.as_deref().unwrap_or_default().parse()?;
    let n = cfg.n.context("--n is required")?;
    let k = cfg.k.context("--K is required")?;
    let surface = spec.build();
    let o = origin(cfg);
    let smooth = find_smooth_equilibria(&surface, o, 8)?;
    if smooth.is_empty() {
        bail!("no equilibria found on {spec}");
    }
    let charts = surface.atlas();
    let chart_of = |eq: &SmoothEquilibrium| -> &dyn ParametricSurface {
        match (&charts, eq.chart) {
            (Some(c), Some(i)) => c[i].as_ref(),
            _ => surface.as_ref(),
        }
    };
    create_dir(&cfg.out)?;
    let mut flocks = Vec::new();
    let mut overlay: Vec<(TriangleMesh, Vec<EquilibriumPoint>)> = Vec::new();
    for (id, eq) in smooth.iter().enumerate() {
        let chart = chart_of(eq);
        let dom = chart.domain();
        let (du, dv) = (dom.width() / n as f64, dom.height() / n as f64);
        let center = [eq.params[0] / du, eq.params[1] / dv];
        let ctx = |e: equiflock::Error| anyhow::Error::from(e).context(format!("flock {id} at {:?}", eq.position));
        let patch = discretize_surface_window(chart, n, cfg.offsets, o, center, k as f64 + 3.0).map_err(ctx)?;
        let eqs = classify_patch(&patch, o, cfg.tol).map_err(ctx)?;
        let counts = window_counts(&eqs, &patch, center, k).map_err(ctx)?;
        let lambda = dv / du;
        let predicted = imaginary_indices_3d(eq.rho, eq.kappas.0, eq.kappas.1).ok();
        let bounds = predicted.and_then(|_| error_bounds(&eq.forms, eq.rho, lambda).ok());
        let within_bounds = match (&predicted, &bounds) {
            (Some(p), Some(b)) if b.mesh_ratio_ok => Some([
                (counts.unstable as f64 - p.u_star).abs() <= b.err_u,
                (counts.saddle as f64 - p.n_star).abs() <= b.err_n,
                (counts.stable as f64 - p.s_star).abs() <= b.err_s,
            ]),
            _ => None,
        };
        let inside: Vec<EquilibriumPoint> = eqs
            .points
            .iter()
            .filter(|p| p.carrier_indices.iter().any(|g| (g[0] - center[0]).abs() <= k as f64 && (g[1] - center[1]).abs() <= k as f64))
            .cloned()
            .collect();
        overlay.push((patch.mesh, inside));
        flocks.push(SurfaceFlock {
            id,
            chart: eq.chart,
            params: eq.params,
            position: eq.position,
            rho: eq.rho,
            kappas: eq.kappas,
            kind: eq.kind.to_string(),
            lambda,
            counts,
            predicted,
            bounds,
            within_bounds,
        });
    }
    let mut census = Census::default();
    let mut near_degenerate = 0;
    for f in &flocks {
        census.stable += f.counts.stable;
        census.saddle += f.counts.saddle;
        census.unstable += f.counts.unstable;
        near_degenerate += f.counts.near_degenerate;
    }
    write_census_csv(&cfg.out.join("census.csv"), &flocks)?;
    write_overlay(&cfg.out.join("overlay.obj"), &overlay)?;
    let report = SurfaceReport { schema: SCHEMA, config: cfg, surface: spec.to_string(), flocks, census, near_degenerate };
    write_json(&cfg.out.join("flocks.json"), &report)?;
    log::info!("{} flocks, census {:?}", report.flocks.len(), report.census);
    Ok(if near_degenerate > 0 { Status::Degenerate } else { Status::Clean })
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_default()
}

fn write_census_csv(path: &Path, flocks: &[SurfaceFlock]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["flock", "kind", "S*", "S", "U*", "U", "N*", "N", "near_degenerate"])?;
    for f in flocks {
        let p = f.predicted.as_ref();
        w.write_record([
            f.id.to_string(),
            f.kind.clone(),
            fmt_opt(p.map(|p| p.s_star)),
            f.counts.stable.to_string(),
            fmt_opt(p.map(|p| p.u_star)),
            f.counts.unstable.to_string(),
            fmt_opt(p.map(|p| p.n_star)),
            f.counts.saddle.to_string(),
            f.counts.near_degenerate.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One object per window patch, equilibrium markers as point elements.
fn write_overlay(path: &Path, parts: &[(TriangleMesh, Vec<EquilibriumPoint>)]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let mut base = 1;
    for (id, (mesh, points)) in parts.iter().enumerate() {
        writeln!(w, "o flock_{id}")?;
        for p in &mesh.vertices {
            writeln!(w, "v {} {} {}", p.x, p.y, p.z)?;
        }
        for f in &mesh.faces {
            writeln!(w, "f {} {} {}", f[0] + base, f[1] + base, f[2] + base)?;
        }
        base += mesh.vertices.len();
        for p in points {
            writeln!(w, "v {} {} {}", p.location.x, p.location.y, p.location.z)?;
        }
        for kind in ["stable", "saddle", "unstable"] {
            let ids: Vec<String> = points.iter().enumerate().filter(|(_, p)| p.kind.to_string() == kind).map(|(k, _)| (base + k).to_string()).collect();
            if !ids.is_empty() {
                writeln!(w, "g flock_{id}_{kind}\np {}", ids.join(" "))?;
            }
        }
        base += points.len();
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct CurveFlock {
    id: usize,
    t: f64,
    position: Vec2,
    rho: f64,
    kappa: f64,
    kind: String,
    counts: CurveCounts,
    predicted: Option<ImaginaryIndices2d>,
    /// Counts equal the floor or ceiling of the predicted indices.
    in_band: Option<bool>,
}

#[derive(Debug, Serialize)]
struct CurveReport<'a> {
    schema: u32,
    config: &'a RunConfig,
    curve: String,
    flocks: Vec<CurveFlock>,
    unstable: usize,
    stable: usize,
    /// `S - U` of the whole polygon.
    poincare_hopf: i64,
    near_degenerate: usize,
}

fn in_band(count: usize, target: f64) -> bool {
    let c = count as f64;
    c == target.floor() || c == target.ceil()
}

pub fn analyze_curve(cfg: &RunConfig) -> Result<Status> {
    let spec: CurveSpec = cfg.curve.as_deref().unwrap_or_default().parse()?;
    let n = cfg.n.context("--n is required")?;
    let k = cfg.k.context("--K is required")?;
    let curve = spec.build();
    let o = Vec2::new(cfg.origin[0], cfg.origin[1]);
    let poly = discretize_curve(&curve, n, cfg.offsets.0)?;
    let eqs = classify_polygon(&poly, o, cfg.tol)?;
    let smooth = find_curve_equilibria(&curve, o, 16)?;
    let mut flocks = Vec::new();
    for (id, eq) in smooth.iter().enumerate() {
        let counts = counts_2d(&eqs, &poly, eq.t / poly.step, k).with_context(|| format!("flock {id} at t = {}", eq.t))?;
        let predicted = imaginary_indices_2d(eq.rho, eq.kappa).ok();
        let in_band = predicted.map(|p| in_band(counts.unstable, p.u_star) && in_band(counts.stable, p.s_star));
        flocks.push(CurveFlock { id, t: eq.t, position: eq.position, rho: eq.rho, kappa: eq.kappa, kind: eq.kind.to_string(), counts, predicted, in_band });
    }
    create_dir(&cfg.out)?;
    let mut w = csv::Writer::from_path(cfg.out.join("census.csv"))?;
    w.write_record(["flock", "kind", "S*", "S", "U*", "U", "in_band"])?;
    for f in &flocks {
        let p = f.predicted.as_ref();
        w.write_record([
            f.id.to_string(),
            f.kind.clone(),
            fmt_opt(p.map(|p| p.s_star)),
            f.counts.stable.to_string(),
            fmt_opt(p.map(|p| p.u_star)),
            f.counts.unstable.to_string(),
            f.in_band.map(|b| b.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    let report = CurveReport {
        schema: SCHEMA,
        config: cfg,
        curve: spec.to_string(),
        flocks,
        unstable: eqs.counts.unstable,
        stable: eqs.counts.stable,
        poincare_hopf: poincare_hopf(&eqs)?,
        near_degenerate: eqs.near_degenerate.len(),
    };
    write_json(&cfg.out.join("curve.json"), &report)?;
    Ok(if report.near_degenerate > 0 { Status::Degenerate } else { Status::Clean })
}

#[derive(Debug, Serialize)]
struct SweepSummary<'a> {
    schema: u32,
    config: &'a RunConfig,
    flock: usize,
    equilibrium: SmoothEquilibrium,
    targets: ImaginaryIndices,
    rows: usize,
    last: Option<SeriesRow>,
    mean_identity: Option<f64>,
}

/// Resolutions computed between two checkpoints.
pub const CHECKPOINT_EVERY: usize = 100;

fn counts_from_row(r: &SeriesRow, k: usize) -> WindowCounts {
    WindowCounts { k, center_index: [0.0, 0.0], unstable: r.unstable, saddle: r.saddle, stable: r.stable, near_degenerate: r.near_degenerate, boundary_safe: true }
}

/// Counts one flock for every `n` of the range and writes the running means
/// to `cfg.out` (CSV) after every [`CHECKPOINT_EVERY`] resolutions. With
/// `resume`, rows already in `cfg.out` are kept and the sweep continues.
pub fn sweep(cfg: &RunConfig, flock: usize, resume: bool, stop_after: Option<usize>) -> Result<Status> {
    let spec: SurfaceSpec = cfg.surface.as_deref().unwrap_or_default().parse()?;
    let (n_min, n_max) = cfg.n_range.context("--n-min and --n-max are required")?;
    let k = cfg.k.context("--K is required")?;
    let surface = spec.build();
    let o = origin(cfg);
    let smooth = find_smooth_equilibria(&surface, o, 8)?;
    let Some(eq) = smooth.get(flock) else {
        bail!("flock {flock} does not exist ({} equilibria found)", smooth.len());
    };
    let charts = surface.atlas();
    let chart: &dyn ParametricSurface = match (&charts, eq.chart) {
        (Some(c), Some(i)) => c[i].as_ref(),
        _ => surface.as_ref(),
    };
    let targets = imaginary_indices_3d(eq.rho, eq.kappas.0, eq.kappas.1)?;
    let mut counts: Vec<(usize, WindowCounts)> = Vec::new();
    if resume && cfg.out.exists() {
        let rows = AverageSeries::read_rows(File::open(&cfg.out)?)?;
        for (i, r) in rows.iter().enumerate() {
            if r.n != n_min + i {
                bail!("checkpoint {} does not continue the range {n_min}..={n_max} at row {}", cfg.out.display(), i + 1);
            }
        }
        counts = rows.iter().map(|r| (r.n, counts_from_row(r, k))).collect();
        log::info!("resuming after {} rows", counts.len());
    }
    if let Some(parent) = cfg.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    let mut next = n_min + counts.len();
    let mut computed = 0;
    while next <= n_max {
        let end = (next + CHECKPOINT_EVERY - 1).min(n_max);
        let chunk: Vec<(usize, WindowCounts)> = (next..=end)
            .into_par_iter()
            .map(|n| flock_counts_at(chart, o, eq.params, k, n, cfg.offsets).map(|c| (n, c)))
            .collect::<equiflock::Result<_>>()?;
        counts.extend(chunk);
        computed += end - next + 1;
        next = end + 1;
        write_series(&cfg.out, &AverageSeries::from_counts(&counts, targets, cfg.offsets, k))?;
        if stop_after.is_some_and(|s| computed >= s) {
            break;
        }
    }
    let series = AverageSeries::from_counts(&counts, targets, cfg.offsets, k);
    write_series(&cfg.out, &series)?;
    let summary = SweepSummary { schema: SCHEMA, config: cfg, flock, equilibrium: eq.clone(), targets, rows: series.rows.len(), last: series.last().copied(), mean_identity: series.mean_identity() };
    write_json(&cfg.out.with_extension("json"), &summary)?;
    let degenerate = series.rows.iter().any(|r| r.near_degenerate > 0);
    Ok(if degenerate { Status::Degenerate } else { Status::Clean })
}

/// Writes through a temporary file so an interrupted run leaves the last
/// complete checkpoint in place.
fn write_series(path: &Path, series: &AverageSeries) -> Result<()> {
    let tmp = path.with_extension("csv.tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        series.write_csv(&mut w)?;
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct MeshReport<'a> {
    schema: u32,
    config: &'a RunConfig,
    report: &'a PebbleReport,
}

pub fn analyze_mesh(cfg: &RunConfig, format: Option<MeshFormat>, options: PebbleOptions) -> Result<Status> {
    let path = cfg.mesh.as_ref().context("--mesh is required")?;
    let mesh = load_mesh(path, format).with_context(|| format!("loading {}", path.display()))?;
    let report = pebble_report(&mesh, &options)?;
    create_dir(&cfg.out)?;
    report.write_csv(File::create(cfg.out.join("flocks.csv"))?)?;
    let hull = equiflock::discretize::hull_of_samples(&mesh.vertices)?;
    report.write_overlay_obj(&hull.mesh, BufWriter::new(File::create(cfg.out.join("overlay.obj"))?))?;
    let mut hull_file = BufWriter::new(File::create(cfg.out.join("hull.obj"))?);
    write_obj(&hull.mesh, &mut hull_file)?;
    hull_file.flush()?;
    write_json(&cfg.out.join("report.json"), &MeshReport { schema: SCHEMA, config: cfg, report: &report })?;
    log::info!("{} flocks, census {:?}, S + U - N = {}", report.rows.len(), report.census, report.poincare_hopf);
    Ok(if report.near_degenerate > 0 { Status::Degenerate } else { Status::Clean })
}
