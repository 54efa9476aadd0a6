//! Spectral embeddings for trajectory data.
//!
//! The crate provides PCA, classical MDS, Isomap and an entropy-adaptive
//! Isomap whose per-point neighborhood grows until the trajectory labels of
//! the neighbors are mixed enough. It also provides the diagnostics used to
//! judge such embeddings: neighborhood entropy, cross-trajectory mixing
//! tables and residual variance.
//!
//! ```no_run
//! use traj_manifold::{embed, synth};
//!
//! let spec = synth::ProcessSpec::new(synth::Family::SwissRollTrajectories, 6, 100);
//! let data = synth::generate(&spec).unwrap();
//! let out = embed::entropy_isomap(&data, 8, 0.3, 100, 3).unwrap();
//! println!("capped fraction: {}", out.report.cap_fraction);
//! ```

pub mod dataset;
pub mod embed;
pub mod error;
pub mod graph;
pub mod metrics;
pub mod synth;

#[cfg(feature = "cli")]
pub mod cli;

pub use dataset::{read_csv, write_csv, TrajectoryDataset};
pub use embed::{Embedding, Method};
pub use error::{Error, ErrorKind, Result};
pub use graph::{GeodesicMatrix, NeighborhoodGraph};
pub use metrics::{DistanceMatrix, EntropyValue, ResidualVariance};

/// Formats a real with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Maps `f` over `0..n`, in parallel when the `parallel` feature is on.
/// Output order never depends on scheduling.
pub(crate) fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
