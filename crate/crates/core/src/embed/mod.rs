//! Spectral embeddings: PCA, classical MDS, Isomap and entropy-adaptive Isomap.

mod eigen;

pub use eigen::{symmetric_eigen, SpectralResult};

use std::fmt;

use ndarray::{Array1, Array2, Axis};

use crate::dataset::TrajectoryDataset;
use crate::error::{invalid_param, Error, Result};
use crate::graph::{
    build_entropy_graph, build_knn_graph, connected_components, mixing_report, shortest_paths, GeodesicMatrix,
    MixingTable, NeighborhoodGraph,
};
use crate::metrics::{pairwise_distances, DistanceMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Pca,
    Mds,
    Isomap,
    EntropyIsomap,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Pca => "pca",
            Method::Mds => "mds",
            Method::Isomap => "isomap",
            Method::EntropyIsomap => "entropy-isomap",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Low-dimensional coordinates of a set of points.
///
/// Row `r` of `coords` belongs to dataset point `point_indices()[r]`. Points
/// left out because they were not connected to the embedded component are
/// listed in `excluded_points()`.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    coords: Array2<f64>,
    spectrum: Vec<f64>,
    method: Method,
    point_indices: Vec<usize>,
    excluded_points: Vec<usize>,
}

impl Embedding {
    pub fn coords(&self) -> &Array2<f64> {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.ncols()
    }

    pub fn len(&self) -> usize {
        self.coords.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.nrows() == 0
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// The leading `dim()` eigenvalues, unclamped.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum[..self.dim()]
    }

    /// Full spectrum of the decomposed matrix, nonincreasing and unclamped.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    /// Share of absolute spectral mass carried by negative eigenvalues.
    /// Nonzero when the input dissimilarities are not Euclidean.
    pub fn negative_mass_fraction(&self) -> f64 {
        let total: f64 = self.spectrum.iter().map(|v| v.abs()).sum();
        if total == 0.0 {
            return 0.0;
        }
        self.spectrum.iter().filter(|v| **v < 0.0).map(|v| -v).sum::<f64>() / total
    }

    pub fn point_indices(&self) -> &[usize] {
        &self.point_indices
    }

    pub fn excluded_points(&self) -> &[usize] {
        &self.excluded_points
    }

    /// The first `d` coordinates.
    pub fn truncated(&self, d: usize) -> Embedding {
        let d = d.min(self.dim());
        Embedding { coords: self.coords.slice(ndarray::s![.., ..d]).to_owned(), ..self.clone() }
    }
}

/// Classical (Torgerson) MDS of a distance matrix into `d` dimensions.
pub fn classical_mds(feature: &DistanceMatrix, d: usize) -> Result<Embedding> {
    let n = feature.len();
    mds_embedding(feature, d, Method::Mds, (0..n).collect(), Vec::new())
}

/// The double-centered Gram matrix `-1/2 J S J` of squared distances.
pub fn double_centered_gram(feature: &DistanceMatrix) -> Array2<f64> {
    let n = feature.len();
    let sq = feature.values().mapv(|x| x * x);
    let row_mean: Vec<f64> = sq.rows().into_iter().map(|r| r.sum() / n as f64).collect();
    let grand = row_mean.iter().sum::<f64>() / n as f64;
    // (r_i + r_j) is commutative, so the result is exactly symmetric.
    Array2::from_shape_fn((n, n), |(i, j)| -0.5 * ((sq[[i, j]] - (row_mean[i] + row_mean[j])) + grand))
}

fn mds_embedding(
    feature: &DistanceMatrix,
    d: usize,
    method: Method,
    point_indices: Vec<usize>,
    excluded_points: Vec<usize>,
) -> Result<Embedding> {
    let n = feature.len();
    if n < 2 {
        return Err(Error::Degenerate(format!("{n} points cannot be embedded")));
    }
    if d < 1 || d > n - 1 {
        return Err(invalid_param(format!("d = {d} outside 1..={}", n - 1)));
    }
    let gram = double_centered_gram(feature);
    let spectral = symmetric_eigen(&gram)?;
    let mut coords = Array2::zeros((n, d));
    for c in 0..d {
        let scale = spectral.eigenvalues[c].max(0.0).sqrt();
        coords.column_mut(c).assign(&(&spectral.eigenvectors.column(c) * scale));
    }
    Ok(Embedding { coords, spectrum: spectral.eigenvalues, method, point_indices, excluded_points })
}

/// Principal component analysis. Returns the embedding and the full
/// covariance spectrum (length `D`).
pub fn pca(dataset: &TrajectoryDataset, d: usize) -> Result<(Embedding, Vec<f64>)> {
    let n = dataset.len();
    let dim = dataset.dim();
    if d < 1 || d > n.min(dim) {
        return Err(invalid_param(format!("d = {d} outside 1..={}", n.min(dim))));
    }
    let x = dataset.points();
    let mean: Array1<f64> = x.mean_axis(Axis(0)).ok_or_else(|| Error::Degenerate("empty dataset".into()))?;
    let centered = x - &mean.insert_axis(Axis(0));
    let mut cov = centered.t().dot(&centered) / (n as f64 - 1.0);
    for i in 0..dim {
        for j in 0..i {
            let v = 0.5 * (cov[[i, j]] + cov[[j, i]]);
            cov[[i, j]] = v;
            cov[[j, i]] = v;
        }
    }
    let spectral = symmetric_eigen(&cov)?;
    let basis = spectral.eigenvectors.slice(ndarray::s![.., ..d]);
    let coords = centered.dot(&basis);
    let spectrum = spectral.eigenvalues;
    let embedding = Embedding {
        coords,
        spectrum: spectrum.clone(),
        method: Method::Pca,
        point_indices: (0..n).collect(),
        excluded_points: Vec::new(),
    };
    Ok((embedding, spectrum))
}

/// Result of a graph-based embedding.
#[derive(Debug, Clone)]
pub struct GraphEmbedding {
    pub embedding: Embedding,
    pub geodesics: GeodesicMatrix,
    pub graph: NeighborhoodGraph,
}

/// Embeds the geodesic distances of `graph` with classical MDS.
///
/// When the graph is disconnected only its largest component (ties go to
/// the one holding the smallest point index) is embedded; the other points
/// are reported as excluded.
pub fn embed_graph(graph: NeighborhoodGraph, d: usize, method: Method) -> Result<GraphEmbedding> {
    let geodesics = shortest_paths(&graph);
    let components = connected_components(&graph);
    let largest = components
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| a.len().cmp(&b.len()).then(ib.cmp(ia)))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Degenerate("graph has no points".into()))?;
    let kept = components[largest].clone();
    let mut excluded: Vec<usize> =
        components.iter().enumerate().filter(|&(i, _)| i != largest).flat_map(|(_, c)| c.iter().copied()).collect();
    excluded.sort_unstable();
    if !excluded.is_empty() {
        log::warn!(
            "neighborhood graph has {} components; embedding {} points, excluding {}",
            components.len(),
            kept.len(),
            excluded.len()
        );
    }
    if d + 1 > kept.len() {
        return Err(Error::Degenerate(format!(
            "largest connected component has {} points, too few for d = {d}",
            kept.len()
        )));
    }
    let feature = geodesics.restrict(&kept)?;
    let embedding = mds_embedding(&feature, d, method, kept, excluded)?;
    Ok(GraphEmbedding { embedding, geodesics, graph })
}

/// Standard Isomap with a `k`-nearest-neighbor graph.
pub fn isomap(dataset: &TrajectoryDataset, k: usize, d: usize) -> Result<GraphEmbedding> {
    let distances = pairwise_distances(dataset)?;
    isomap_with_distances(dataset, &distances, k, d)
}

pub fn isomap_with_distances(
    dataset: &TrajectoryDataset,
    distances: &DistanceMatrix,
    k: usize,
    d: usize,
) -> Result<GraphEmbedding> {
    let graph = build_knn_graph(dataset, distances, k)?;
    embed_graph(graph, d, Method::Isomap)
}

/// Per-point and per-trajectory diagnostics of an adaptive neighborhood graph.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub base_k: usize,
    pub max_extra: usize,
    pub threshold: f64,
    pub chosen_k: Vec<usize>,
    pub entropy_at_k: Vec<f64>,
    /// One series per trajectory, ordered by time index.
    pub entropy_vs_time: Vec<TrajectoryEntropySeries>,
    /// `(k, number of points whose neighborhood has exactly k members)` for
    /// every k in `base_k..=base_k + max_extra`.
    pub chosen_k_histogram: Vec<(usize, usize)>,
    pub mixing: MixingTable,
    /// Points whose neighborhood reached `base_k + max_extra` without
    /// meeting the threshold.
    pub capped_points: Vec<usize>,
    pub cap_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEntropySeries {
    pub trajectory: usize,
    /// `(point index, time value, entropy in bits, chosen k)`.
    pub points: Vec<(usize, f64, f64, usize)>,
}

impl DiagnosticsReport {
    pub fn from_graph(
        dataset: &TrajectoryDataset,
        graph: &NeighborhoodGraph,
        base_k: usize,
        max_extra: usize,
        threshold: f64,
    ) -> Result<Self> {
        let n = dataset.len();
        let chosen_k = graph.chosen_ks();
        let entropy_at_k: Vec<f64> = (0..n).map(|i| graph.entropy_at_k(i).bits()).collect();
        let cap = base_k + max_extra;
        let chosen_k_histogram = (base_k..=cap).map(|k| (k, chosen_k.iter().filter(|&&c| c == k).count())).collect();
        let capped_points: Vec<usize> = (0..n).filter(|&i| chosen_k[i] == cap && entropy_at_k[i] < threshold).collect();
        let entropy_vs_time = (0..dataset.trajectory_count())
            .map(|t| TrajectoryEntropySeries {
                trajectory: t,
                points: dataset
                    .trajectory_points(t)
                    .into_iter()
                    .map(|i| (i, dataset.time_of(i), entropy_at_k[i], chosen_k[i]))
                    .collect(),
            })
            .collect();
        Ok(DiagnosticsReport {
            base_k,
            max_extra,
            threshold,
            cap_fraction: capped_points.len() as f64 / n as f64,
            capped_points,
            mixing: mixing_report(dataset, graph)?,
            chosen_k,
            entropy_at_k,
            entropy_vs_time,
            chosen_k_histogram,
        })
    }

    /// Mean entropy over the points that met the threshold.
    pub fn mean_uncapped_entropy(&self) -> Option<f64> {
        let capped: std::collections::HashSet<_> = self.capped_points.iter().collect();
        let vals: Vec<f64> =
            (0..self.chosen_k.len()).filter(|i| !capped.contains(i)).map(|i| self.entropy_at_k[i]).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }
}

#[derive(Debug, Clone)]
pub struct EntropyIsomapOutput {
    pub embedding: Embedding,
    pub geodesics: GeodesicMatrix,
    pub graph: NeighborhoodGraph,
    pub report: DiagnosticsReport,
}

/// Isomap over entropy-adaptive neighborhoods: each point's neighborhood
/// grows from `k` (up to `k + max_extra`) until the entropy of its
/// neighbors' trajectory labels reaches `threshold` bits.
pub fn entropy_isomap(
    dataset: &TrajectoryDataset,
    k: usize,
    threshold: f64,
    max_extra: usize,
    d: usize,
) -> Result<EntropyIsomapOutput> {
    let distances = pairwise_distances(dataset)?;
    entropy_isomap_with_distances(dataset, &distances, k, threshold, max_extra, d)
}

pub fn entropy_isomap_with_distances(
    dataset: &TrajectoryDataset,
    distances: &DistanceMatrix,
    k: usize,
    threshold: f64,
    max_extra: usize,
    d: usize,
) -> Result<EntropyIsomapOutput> {
    let graph = build_entropy_graph(dataset, distances, k, threshold, max_extra)?;
    let report = DiagnosticsReport::from_graph(dataset, &graph, k, max_extra, threshold)?;
    let GraphEmbedding { embedding, geodesics, graph } = embed_graph(graph, d, Method::EntropyIsomap)?;
    Ok(EntropyIsomapOutput { embedding, geodesics, graph, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{euclidean_distances, residual_variance_isomap, residual_variance_pca};
    use ndarray::array;

    fn embedded_distance(e: &Embedding, a: usize, b: usize) -> f64 {
        let c = e.coords();
        c.row(a).iter().zip(c.row(b).iter()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    }

    #[test]
    fn zero_distances_embed_at_origin() {
        let d = DistanceMatrix::new(Array2::zeros((4, 4))).unwrap();
        let e = classical_mds(&d, 2).unwrap();
        assert!(e.coords().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn equilateral_triangle() {
        let d = DistanceMatrix::new(array![[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]]).unwrap();
        let e = classical_mds(&d, 2).unwrap();
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            assert!((embedded_distance(&e, a, b) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn mds_range_checks() {
        let d = DistanceMatrix::new(array![[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert!(classical_mds(&d, 2).is_err());
        assert!(classical_mds(&d, 0).is_err());
        assert!(classical_mds(&d, 1).is_ok());
    }

    #[test]
    fn negative_mass_for_non_euclidean_input() {
        // A 4-cycle with unit edges and diagonals of 2 is not Euclidean.
        let d = DistanceMatrix::new(array![
            [0.0, 1.0, 2.0, 1.0],
            [1.0, 0.0, 1.0, 2.0],
            [2.0, 1.0, 0.0, 1.0],
            [1.0, 2.0, 1.0, 0.0]
        ])
        .unwrap();
        let e = classical_mds(&d, 2).unwrap();
        assert!(e.negative_mass_fraction() > 0.0);
        assert!(e.spectrum().iter().any(|&l| l < 0.0));
    }

    #[test]
    fn pca_subspace_data() {
        let n = 30;
        let pts = Array2::from_shape_fn((n, 10), |(i, j)| {
            let (u, v) = ((i as f64 * 0.7).sin(), (i as f64 * 0.3).cos() * 2.0);
            match j {
                0 => u + v,
                3 => u - v,
                7 => 2.0 * u,
                _ => 0.0,
            }
        });
        let ds = TrajectoryDataset::from_labeled_points(pts, vec![0; n]).unwrap();
        let (_, spectrum) = pca(&ds, 2).unwrap();
        assert_eq!(spectrum.len(), 10);
        assert!(spectrum[2..].iter().all(|l| l.abs() <= 1e-10));
        let rv = residual_variance_pca(&spectrum, 2).unwrap();
        assert!(rv.at(2).unwrap() < 1e-12);
    }

    #[test]
    fn pca_repeated_point_is_degenerate() {
        let ds = TrajectoryDataset::from_labeled_points(Array2::from_elem((5, 3), 1.5), vec![0; 5]).unwrap();
        let (_, spectrum) = pca(&ds, 2).unwrap();
        assert!(spectrum.iter().all(|&l| l == 0.0));
        assert!(matches!(residual_variance_pca(&spectrum, 2), Err(Error::Degenerate(_))));
    }

    #[test]
    fn pca_scores_uncorrelated() {
        let mut s = 7u64;
        let pts = Array2::from_shape_fn((50, 6), |(_, j)| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * (j + 1) as f64
        });
        let ds = TrajectoryDataset::from_labeled_points(pts, vec![0; 50]).unwrap();
        let (e, _) = pca(&ds, 6).unwrap();
        let g = e.coords().t().dot(e.coords());
        for i in 0..6 {
            for j in 0..6 {
                if i != j {
                    assert!(g[[i, j]].abs() < 1e-8, "({i},{j}) = {}", g[[i, j]]);
                }
            }
        }
        assert!(pca(&ds, 7).is_err());
    }

    #[test]
    fn collinear_isomap() {
        let ds = TrajectoryDataset::from_labeled_points(array![[0.0], [1.0], [3.0]], vec![0; 3]).unwrap();
        let out = isomap(&ds, 1, 1).unwrap();
        assert_eq!(out.geodesics.get(0, 2), 3.0);
        assert!((embedded_distance(&out.embedding, 0, 2) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn disconnected_graph_keeps_largest_component() {
        let ds =
            TrajectoryDataset::from_labeled_points(array![[0.0], [1.0], [2.0], [100.0], [101.0]], vec![0; 5]).unwrap();
        let out = isomap(&ds, 1, 1).unwrap();
        assert_eq!(out.embedding.point_indices(), [0, 1, 2]);
        assert_eq!(out.embedding.excluded_points(), [3, 4]);
        let rv = residual_variance_isomap(&out.geodesics, &out.embedding).unwrap();
        assert!(rv.at(1).unwrap() < 1e-12);
    }

    #[test]
    fn residual_variance_scale_invariant() {
        let pts = Array2::from_shape_fn((12, 3), |(i, j)| ((i * 7 + j * 5) % 11) as f64);
        let d = euclidean_distances(&pts).unwrap();
        let e = classical_mds(&d, 2).unwrap();
        let mut scaled = e.clone();
        scaled.coords *= 3.5;
        let a = residual_variance_isomap(&d, &e).unwrap();
        let b = residual_variance_isomap(&d, &scaled).unwrap();
        for ((_, x), (_, y)) in a.per_dimension.iter().zip(&b.per_dimension) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
