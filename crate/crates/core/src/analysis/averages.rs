use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::window::{window_counts, WindowCounts};
use crate::classify::{classify_patch, DEFAULT_TOL};
use crate::discretize::discretize_surface_window;
use crate::geometry::{ParametricSurface, SmoothEquilibrium};
use crate::indices::{imaginary_indices_3d, ImaginaryIndices};
use crate::{Error, Result, Vec3};

/// One resolution of a sweep with the running means up to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub n: usize,
    pub unstable: usize,
    pub saddle: usize,
    pub stable: usize,
    pub near_degenerate: usize,
    pub mean_u: f64,
    pub mean_n: f64,
    pub mean_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageSeries {
    pub rows: Vec<SeriesRow>,
    pub targets: ImaginaryIndices,
    pub offsets: (f64, f64),
    pub k: usize,
}

impl AverageSeries {
    /// Builds the running means from per-resolution counts sorted by `n`.
    pub fn from_counts(counts: &[(usize, WindowCounts)], targets: ImaginaryIndices, offsets: (f64, f64), k: usize) -> Self {
        let (mut su, mut sn, mut ss) = (0.0, 0.0, 0.0);
        let rows = counts
            .iter()
            .enumerate()
            .map(|(idx, &(n, c))| {
                su += c.unstable as f64;
                sn += c.saddle as f64;
                ss += c.stable as f64;
                let m = (idx + 1) as f64;
                SeriesRow {
                    n,
                    unstable: c.unstable,
                    saddle: c.saddle,
                    stable: c.stable,
                    near_degenerate: c.near_degenerate,
                    mean_u: su / m,
                    mean_n: sn / m,
                    mean_s: ss / m,
                }
            })
            .collect();
        AverageSeries { rows, targets, offsets, k }
    }

    pub fn last(&self) -> Option<&SeriesRow> {
        self.rows.last()
    }

    /// Mean of `S + U - N` over the series.
    pub fn mean_identity(&self) -> Option<f64> {
        self.last().map(|r| r.mean_s + r.mean_u - r.mean_n)
    }

    /// CSV with header `n,unstable,saddle,stable,near_degenerate,mean_u,mean_n,mean_s`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads rows written by [`AverageSeries::write_csv`].
    pub fn read_rows<R: Read>(input: R) -> Result<Vec<SeriesRow>> {
        let mut r = csv::Reader::from_reader(input);
        r.deserialize().enumerate().map(|(k, row)| row.map_err(|e| Error::Parse { line: k + 2, msg: e.to_string() })).collect()
    }
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidInput(format!("{other:?}")),
    }
}

/// Window counts of the flock at parameter `center` for resolution `n`;
/// only the grid window around it is discretized.
pub fn flock_counts_at<S: ParametricSurface + Sync + ?Sized>(surface: &S, origin: Vec3, center: [f64; 2], k: usize, n: usize, offset: (f64, f64)) -> Result<WindowCounts> {
    let dom = surface.domain();
    let (du, dv) = (dom.width() / n as f64, dom.height() / n as f64);
    let ci = [center[0] / du, center[1] / dv];
    let at = |e: Error| Error::AtResolution { n, source: Box::new(e) };
    let patch = discretize_surface_window(surface, n, offset, origin, ci, k as f64 + 3.0).map_err(at)?;
    let eqs = classify_patch(&patch, origin, DEFAULT_TOL).map_err(at)?;
    window_counts(&eqs, &patch, ci, k).map_err(at)
}

/// Counts of the flock of `eq` for every `n` in `n_min..=n_max`, with
/// running means and the imaginary indices as targets. Resolutions run in
/// parallel; the result does not depend on scheduling.
pub fn running_averages<S: ParametricSurface + Sync + ?Sized>(
    surface: &S,
    origin: Vec3,
    eq: &SmoothEquilibrium,
    k: usize,
    n_min: usize,
    n_max: usize,
    offset: (f64, f64),
) -> Result<AverageSeries> {
    if n_min < 3 || n_max < n_min {
        return Err(Error::InvalidInput(format!("invalid resolution range {n_min}..={n_max}")));
    }
    let targets = imaginary_indices_3d(eq.rho, eq.kappas.0, eq.kappas.1)?;
    let counts: Vec<(usize, WindowCounts)> = (n_min..=n_max)
        .into_par_iter()
        .map(|n| flock_counts_at(surface, origin, eq.params, k, n, offset).map(|c| (n, c)))
        .collect::<Result<_>>()?;
    Ok(AverageSeries::from_counts(&counts, targets, offset, k))
}
