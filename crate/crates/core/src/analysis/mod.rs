//! Counting discrete equilibria near a smooth one and the experiments
//! around the imaginary indices: windowed counts, flock clustering,
//! lattice-point statistics, equidistribution and running averages over the
//! resolution.

mod averages;
mod flocks;
mod lattice;
mod window;

pub use averages::{flock_counts_at, running_averages, AverageSeries, SeriesRow};
pub use flocks::{cluster_flocks, FlockReport};
pub use lattice::{
    equidistribution_fraction, equidistribution_fraction_1d, expected_count_mc, lattice_count, looks_independent, looks_irrational, Boxed, Disk, McEstimate, PlaneRegion,
};
pub use window::{counts_2d, window_counts, CurveCounts, WindowCounts};
