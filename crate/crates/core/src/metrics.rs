//! Pairwise distances, neighborhood entropy and residual variance.

use ndarray::Array2;

use crate::dataset::TrajectoryDataset;
use crate::embed::Embedding;
use crate::error::{invalid_param, Error, Result};
use crate::graph::NeighborhoodGraph;
use crate::par_map;

/// Symmetric, zero-diagonal matrix of finite nonnegative dissimilarities.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    values: Array2<f64>,
}

impl DistanceMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let n = values.nrows();
        if values.ncols() != n {
            return Err(invalid_param(format!("distance matrix is {}x{}", n, values.ncols())));
        }
        for i in 0..n {
            if values[[i, i]] != 0.0 {
                return Err(invalid_param(format!("distance matrix diagonal entry {i} is nonzero")));
            }
            for j in 0..i {
                let v = values[[i, j]];
                if !v.is_finite() || v < 0.0 {
                    return Err(invalid_param(format!("distance ({i}, {j}) = {v} is not finite and nonnegative")));
                }
                if v != values[[j, i]] {
                    return Err(invalid_param(format!("distance matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(DistanceMatrix { values })
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[[i, j]]
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    /// Sub-matrix over `indices`, in the given order.
    pub fn restrict(&self, indices: &[usize]) -> DistanceMatrix {
        let m = indices.len();
        let values = Array2::from_shape_fn((m, m), |(a, b)| self.values[[indices[a], indices[b]]]);
        DistanceMatrix { values }
    }
}

/// Anything that can be read as an `n x n` table of dissimilarities.
pub trait Dissimilarity {
    fn size(&self) -> usize;
    fn dissimilarity(&self, i: usize, j: usize) -> f64;
}

impl Dissimilarity for DistanceMatrix {
    fn size(&self) -> usize {
        self.len()
    }

    fn dissimilarity(&self, i: usize, j: usize) -> f64 {
        self.values[[i, j]]
    }
}

/// Euclidean distances between all pairs of dataset points.
pub fn pairwise_distances(dataset: &TrajectoryDataset) -> Result<DistanceMatrix> {
    euclidean_distances(dataset.points())
}

/// Euclidean distances between all pairs of rows. Each entry is summed in
/// feature order, so `(i, j)` and `(j, i)` are bit-identical.
pub fn euclidean_distances(points: &Array2<f64>) -> Result<DistanceMatrix> {
    let n = points.nrows();
    let rows = par_map(n, |i| {
        let a = points.row(i);
        (0..n)
            .map(|j| {
                if i == j {
                    return 0.0;
                }
                let b = points.row(j);
                a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
            })
            .collect::<Vec<f64>>()
    });
    let mut values = Array2::zeros((n, n));
    for (i, row) in rows.into_iter().enumerate() {
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteDistance { i, j });
        }
        values.row_mut(i).assign(&ndarray::ArrayView1::from(&row));
    }
    Ok(DistanceMatrix { values })
}

/// Shannon entropy of a neighborhood's trajectory labels, in bits.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct EntropyValue(f64);

impl EntropyValue {
    pub const ZERO: EntropyValue = EntropyValue(0.0);

    pub fn bits(self) -> f64 {
        self.0
    }
}

/// Running label counts for a growing neighborhood.
#[derive(Debug, Clone, Default)]
pub(crate) struct LabelHistogram {
    counts: Vec<usize>,
    total: usize,
}

impl LabelHistogram {
    pub(crate) fn from_labels(labels: impl IntoIterator<Item = usize>) -> Self {
        let mut h = LabelHistogram::default();
        labels.into_iter().for_each(|l| h.add(l));
        h
    }

    pub(crate) fn add(&mut self, label: usize) {
        if label >= self.counts.len() {
            self.counts.resize(label + 1, 0);
        }
        self.counts[label] += 1;
        self.total += 1;
    }

    /// Entropy of the current counts. Terms are summed over the sorted
    /// nonzero counts, so the value depends only on the count multiset.
    pub(crate) fn entropy(&self) -> EntropyValue {
        entropy_of_counts(&self.counts, self.total)
    }
}

fn entropy_of_counts(counts: &[usize], total: usize) -> EntropyValue {
    let mut nonzero: Vec<usize> = counts.iter().copied().filter(|&c| c > 0).collect();
    if nonzero.len() <= 1 {
        return EntropyValue::ZERO;
    }
    nonzero.sort_unstable();
    let k = total as f64;
    let h: f64 = nonzero
        .iter()
        .map(|&c| {
            let p = c as f64 / k;
            -p * p.log2()
        })
        .sum();
    // Rounding can push the sum a few ulps past log2 of the support size.
    EntropyValue(h.clamp(0.0, (nonzero.len() as f64).log2()))
}

/// Entropy (bits) of the trajectory-label distribution of a neighborhood.
pub fn neighborhood_entropy(neighbor_trajectories: &[usize]) -> Result<EntropyValue> {
    if neighbor_trajectories.is_empty() {
        return Err(invalid_param("neighborhood is empty"));
    }
    Ok(LabelHistogram::from_labels(neighbor_trajectories.iter().copied()).entropy())
}

/// Entropy (bits) from per-trajectory neighbor counts.
pub fn entropy_from_counts(counts: &[usize]) -> Result<EntropyValue> {
    let total = counts.iter().sum();
    if total == 0 {
        return Err(invalid_param("neighborhood is empty"));
    }
    Ok(entropy_of_counts(counts, total))
}

/// Mean neighborhood entropy over the points of one trajectory.
pub fn trajectory_entropy(
    dataset: &TrajectoryDataset,
    graph: &NeighborhoodGraph,
    trajectory: usize,
) -> Result<EntropyValue> {
    if trajectory >= dataset.trajectory_count() {
        return Err(Error::UnknownTrajectory(trajectory));
    }
    if graph.len() != dataset.len() {
        return Err(invalid_param("graph does not cover the dataset"));
    }
    let pts = dataset.trajectory_points(trajectory);
    let sum: f64 = pts.iter().map(|&i| graph.entropy_at_k(i).bits()).sum();
    Ok(EntropyValue(sum / pts.len() as f64))
}

/// Residual variance as a function of embedding dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualVariance {
    pub per_dimension: Vec<(usize, f64)>,
}

impl ResidualVariance {
    pub fn at(&self, d: usize) -> Option<f64> {
        self.per_dimension.iter().find(|(dd, _)| *dd == d).map(|&(_, r)| r)
    }
}

/// Spectrum-based residual variance `1 - sum(top d) / sum(all)` for
/// `d = 1..=d_max`.
///
/// The spectrum must be nonincreasing. Negative entries within rounding of
/// zero are treated as zero.
pub fn residual_variance_pca(eigenvalues: &[f64], d_max: usize) -> Result<ResidualVariance> {
    let dim = eigenvalues.len();
    if d_max < 1 || d_max > dim {
        return Err(invalid_param(format!("d = {d_max} outside 1..={dim}")));
    }
    let scale = eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-10 * scale;
    if eigenvalues.iter().any(|v| !v.is_finite() || *v < -tol) {
        return Err(invalid_param("spectrum has negative or non-finite entries"));
    }
    if eigenvalues.windows(2).any(|w| w[1] > w[0] + tol) {
        return Err(invalid_param("spectrum is not sorted in nonincreasing order"));
    }
    let lambda: Vec<f64> = eigenvalues.iter().map(|v| v.max(0.0)).collect();
    // Suffix sums: tail[d] = sum of lambda[d..], so tail[dim] = 0 exactly.
    let mut tail = vec![0.0; dim + 1];
    for i in (0..dim).rev() {
        tail[i] = tail[i + 1] + lambda[i];
    }
    let total = tail[0];
    if total <= 0.0 {
        return Err(Error::Degenerate("spectrum is identically zero".into()));
    }
    Ok(ResidualVariance { per_dimension: (1..=d_max).map(|d| (d, tail[d] / total)).collect() })
}

/// Correlation-based residual variance `1 - rho(D_G, D_Y)^2` for each
/// prefix `d = 1..=embedding.dim()` of the embedding coordinates.
///
/// `geodesics` is indexed by original point index; only embedded points
/// take part, and each unordered pair is counted once.
pub fn residual_variance_isomap<G: Dissimilarity + ?Sized>(
    geodesics: &G,
    embedding: &Embedding,
) -> Result<ResidualVariance> {
    let idx = embedding.point_indices();
    let m = idx.len();
    if idx.iter().any(|&i| i >= geodesics.size()) {
        return Err(invalid_param("embedding refers to points outside the geodesic matrix"));
    }
    if m < 3 {
        return Err(Error::Degenerate(format!("{m} embedded points, correlation needs at least 3")));
    }
    let coords = embedding.coords();
    let mut target = Vec::with_capacity(m * (m - 1) / 2);
    for a in 0..m {
        for b in (a + 1)..m {
            let g = geodesics.dissimilarity(idx[a], idx[b]);
            if !g.is_finite() {
                return Err(Error::Degenerate(format!("geodesic ({}, {}) is not finite", idx[a], idx[b])));
            }
            target.push(g);
        }
    }
    let mut squared = vec![0.0; target.len()];
    let mut embedded = vec![0.0; target.len()];
    let mut out = Vec::with_capacity(embedding.dim());
    for d in 0..embedding.dim() {
        let col = coords.column(d);
        let mut p = 0;
        for a in 0..m {
            for b in (a + 1)..m {
                let diff = col[a] - col[b];
                squared[p] += diff * diff;
                embedded[p] = squared[p].sqrt();
                p += 1;
            }
        }
        let rho = pearson(&target, &embedded)
            .ok_or_else(|| Error::Degenerate("distance vector is constant, correlation undefined".into()))?;
        out.push((d + 1, (1.0 - rho * rho).clamp(0.0, 1.0)));
    }
    Ok(ResidualVariance { per_dimension: out })
}

/// Pearson correlation; `None` when either input has zero variance.
pub(crate) fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}
