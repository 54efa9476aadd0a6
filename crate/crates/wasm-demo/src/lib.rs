//! WebAssembly bindings for the browser demo in `www/`.
//!
//! The page generates a synthetic trajectory family, embeds it with one of
//! the four methods and plots the result, the neighborhood entropy of each
//! trajectory as a function of `k`, and the distribution of adaptive
//! neighborhood sizes.

use wasm_bindgen::prelude::*;

use traj_manifold::embed::{self, Method};
use traj_manifold::graph::build_knn_graph;
use traj_manifold::metrics::{
    pairwise_distances, residual_variance_isomap, residual_variance_pca, trajectory_entropy, DistanceMatrix,
};
use traj_manifold::synth::{self, Family, ProcessSpec};
use traj_manifold::TrajectoryDataset;

/// Embedding dimension used for plotting.
const PLOT_DIMS: usize = 2;

#[wasm_bindgen]
pub struct Demo {
    dataset: TrajectoryDataset,
    distances: DistanceMatrix,
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(family: &str, trajectories: usize, points: usize, noise: f64, seed: u64) -> Result<Demo, String> {
        let family: Family = family.parse().map_err(|e| format!("{e}"))?;
        let mut spec = ProcessSpec::new(family, trajectories, points);
        spec.noise_sigma = noise;
        spec.seed = seed;
        let dataset = synth::generate(&spec).map_err(|e| e.to_string())?;
        let distances = pairwise_distances(&dataset).map_err(|e| e.to_string())?;
        Ok(Demo { dataset, distances })
    }

    #[wasm_bindgen(js_name = pointCount)]
    pub fn point_count(&self) -> usize {
        self.dataset.len()
    }

    #[wasm_bindgen(js_name = trajectoryCount)]
    pub fn trajectory_count(&self) -> usize {
        self.dataset.trajectory_count()
    }

    /// Trajectory id of every point.
    pub fn labels(&self) -> Vec<u32> {
        self.dataset.trajectory_labels().iter().map(|&t| t as u32).collect()
    }

    /// Embeds the data in two dimensions. `method` is one of `pca`, `mds`,
    /// `isomap`, `entropy-isomap`.
    pub fn embed(&self, method: &str, k: usize, entropy: f64, max_extra: usize) -> Result<EmbedResult, String> {
        let method = match method {
            "pca" => Method::Pca,
            "mds" => Method::Mds,
            "isomap" => Method::Isomap,
            "entropy-isomap" => Method::EntropyIsomap,
            other => return Err(format!("unknown method '{other}'")),
        };
        self.embed_with(method, k, entropy, max_extra).map_err(|e| e.to_string())
    }

    /// Mean neighborhood entropy of each trajectory for `k = 1..=k_max`,
    /// flattened trajectory-major (`T * k_max` values).
    #[wasm_bindgen(js_name = entropyByK)]
    pub fn entropy_by_k(&self, k_max: usize) -> Result<Vec<f64>, String> {
        let t_count = self.dataset.trajectory_count();
        let k_max = k_max.min(self.dataset.len() - 1);
        let mut out = vec![0.0; t_count * k_max];
        for k in 1..=k_max {
            let graph = build_knn_graph(&self.dataset, &self.distances, k).map_err(|e| e.to_string())?;
            for t in 0..t_count {
                let h = trajectory_entropy(&self.dataset, &graph, t).map_err(|e| e.to_string())?;
                out[t * k_max + (k - 1)] = h.bits();
            }
        }
        Ok(out)
    }
}

impl Demo {
    fn embed_with(
        &self,
        method: Method,
        k: usize,
        entropy: f64,
        max_extra: usize,
    ) -> traj_manifold::Result<EmbedResult> {
        let n = self.dataset.len();
        let (embedding, residual, chosen_k, cap_fraction) = match method {
            Method::Pca => {
                let (e, spectrum) = embed::pca(&self.dataset, PLOT_DIMS)?;
                let r = residual_variance_pca(&spectrum, PLOT_DIMS)?.at(PLOT_DIMS);
                (e, r, vec![0; n], 0.0)
            }
            Method::Mds => {
                let e = embed::classical_mds(&self.distances, PLOT_DIMS)?;
                let r = residual_variance_isomap(&self.distances, &e)?.at(PLOT_DIMS);
                (e, r, vec![0; n], 0.0)
            }
            Method::Isomap => {
                let out = embed::isomap_with_distances(&self.dataset, &self.distances, k, PLOT_DIMS)?;
                let r = residual_variance_isomap(&out.geodesics, &out.embedding)?.at(PLOT_DIMS);
                (out.embedding, r, out.graph.chosen_ks(), 0.0)
            }
            Method::EntropyIsomap => {
                let out = embed::entropy_isomap_with_distances(
                    &self.dataset,
                    &self.distances,
                    k,
                    entropy,
                    max_extra,
                    PLOT_DIMS,
                )?;
                let r = residual_variance_isomap(&out.geodesics, &out.embedding)?.at(PLOT_DIMS);
                (out.embedding, r, out.report.chosen_k, out.report.cap_fraction)
            }
        };
        Ok(EmbedResult {
            coords: embedding.coords().iter().copied().collect(),
            points: embedding.point_indices().iter().map(|&i| i as u32).collect(),
            chosen_k: chosen_k.into_iter().map(|k| k as u32).collect(),
            residual_variance: residual.unwrap_or(f64::NAN),
            cap_fraction,
        })
    }
}

#[wasm_bindgen]
pub struct EmbedResult {
    coords: Vec<f64>,
    points: Vec<u32>,
    chosen_k: Vec<u32>,
    residual_variance: f64,
    cap_fraction: f64,
}

#[wasm_bindgen]
impl EmbedResult {
    /// Row-major `points().len() x 2` coordinates.
    pub fn coords(&self) -> Vec<f64> {
        self.coords.clone()
    }

    /// Dataset index of each embedded row.
    pub fn points(&self) -> Vec<u32> {
        self.points.clone()
    }

    /// Neighborhood size of every dataset point (0 for PCA and MDS).
    #[wasm_bindgen(js_name = chosenK)]
    pub fn chosen_k(&self) -> Vec<u32> {
        self.chosen_k.clone()
    }

    #[wasm_bindgen(getter, js_name = residualVariance)]
    pub fn residual_variance(&self) -> f64 {
        self.residual_variance
    }

    #[wasm_bindgen(getter, js_name = capFraction)]
    pub fn cap_fraction(&self) -> f64 {
        self.cap_fraction
    }
}
