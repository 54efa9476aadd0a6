//! Neighborhood graphs and geodesic distances.
//!
//! Neighbor lists are ranked by the total order
//! `(distance, trajectory id, time index, point index)`, which makes every
//! construction here reproducible regardless of evaluation order. Directed
//! neighbor lists are made undirected by union: an edge exists when either
//! endpoint lists the other.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, VecDeque};

use ndarray::Array2;

use crate::dataset::TrajectoryDataset;
use crate::error::{invalid_param, Error, Result};
use crate::metrics::{Dissimilarity, DistanceMatrix, EntropyValue, LabelHistogram};
use crate::par_map;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

/// Undirected edge with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodGraph {
    neighbors: Vec<Vec<Neighbor>>,
    entropy_at_k: Vec<EntropyValue>,
    edges: Vec<Edge>,
}

impl NeighborhoodGraph {
    /// Builds a graph from explicit neighbor lists; `labels` gives the
    /// trajectory of every point and is used to fill in neighborhood entropy.
    pub fn from_neighbor_lists(labels: &[usize], neighbors: Vec<Vec<Neighbor>>) -> Result<Self> {
        let n = neighbors.len();
        if labels.len() != n {
            return Err(invalid_param("one trajectory label per point is required"));
        }
        for (i, list) in neighbors.iter().enumerate() {
            for nb in list {
                if nb.index >= n || nb.index == i {
                    return Err(invalid_param(format!("point {i} lists invalid neighbor {}", nb.index)));
                }
                if !nb.distance.is_finite() || nb.distance < 0.0 {
                    return Err(invalid_param(format!("edge ({i}, {}) has weight {}", nb.index, nb.distance)));
                }
            }
        }
        let entropy_at_k = neighbors
            .iter()
            .map(|list| LabelHistogram::from_labels(list.iter().map(|nb| labels[nb.index])).entropy())
            .collect();
        Ok(Self::assemble(neighbors, entropy_at_k))
    }

    fn assemble(neighbors: Vec<Vec<Neighbor>>, entropy_at_k: Vec<EntropyValue>) -> Self {
        let mut edges: Vec<Edge> = neighbors
            .iter()
            .enumerate()
            .flat_map(|(i, list)| {
                list.iter().map(move |nb| Edge { a: i.min(nb.index), b: i.max(nb.index), weight: nb.distance })
            })
            .collect();
        edges.sort_by(|x, y| (x.a, x.b).cmp(&(y.a, y.b)).then(x.weight.total_cmp(&y.weight)));
        edges.dedup_by(|later, kept| later.a == kept.a && later.b == kept.b);
        NeighborhoodGraph { neighbors, entropy_at_k, edges }
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[Neighbor] {
        &self.neighbors[i]
    }

    pub fn chosen_k(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn chosen_ks(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    pub fn entropy_at_k(&self, i: usize) -> EntropyValue {
        self.entropy_at_k[i]
    }

    /// Undirected edges, sorted by `(a, b)`.
    pub fn symmetrized_edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Undirected adjacency lists, each sorted by neighbor index.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.len()];
        for e in &self.edges {
            adj[e.a].push((e.b, e.weight));
            adj[e.b].push((e.a, e.weight));
        }
        for list in &mut adj {
            list.sort_by_key(|&(j, _)| j);
        }
        adj
    }
}

fn neighbor_order(dataset: &TrajectoryDataset, row: &[f64], a: usize, b: usize) -> Ordering {
    row[a]
        .total_cmp(&row[b])
        .then_with(|| dataset.trajectory_of(a).cmp(&dataset.trajectory_of(b)))
        .then_with(|| dataset.time_index_of(a).cmp(&dataset.time_index_of(b)))
        .then_with(|| a.cmp(&b))
}

/// First `count` neighbors of `point` in ranked order. Callers check ranges.
fn ranked_neighbors(
    dataset: &TrajectoryDataset,
    distances: &DistanceMatrix,
    point: usize,
    count: usize,
) -> Vec<Neighbor> {
    let row = distances.values().row(point);
    let row = row.as_slice().map(|s| s.to_vec()).unwrap_or_else(|| row.to_vec());
    let mut candidates: Vec<usize> = (0..distances.len()).filter(|&j| j != point).collect();
    let cmp = |a: &usize, b: &usize| neighbor_order(dataset, &row, *a, *b);
    if count == 0 {
        return Vec::new();
    }
    if count < candidates.len() {
        candidates.select_nth_unstable_by(count - 1, cmp);
        candidates.truncate(count);
    }
    candidates.sort_unstable_by(cmp);
    candidates.into_iter().map(|j| Neighbor { index: j, distance: row[j] }).collect()
}

fn check_cover(dataset: &TrajectoryDataset, distances: &DistanceMatrix) -> Result<()> {
    if dataset.len() != distances.len() {
        return Err(invalid_param(format!(
            "distance matrix has {} points, dataset has {}",
            distances.len(),
            dataset.len()
        )));
    }
    Ok(())
}

fn check_count(n: usize, count: usize, what: &str) -> Result<()> {
    if count < 1 || count > n.saturating_sub(1) {
        return Err(invalid_param(format!("{what} = {count} outside 1..={}", n.saturating_sub(1))));
    }
    Ok(())
}

/// The `k` nearest other points of `point`, nearest first.
pub fn knn(dataset: &TrajectoryDataset, distances: &DistanceMatrix, point: usize, k: usize) -> Result<Vec<Neighbor>> {
    check_cover(dataset, distances)?;
    check_count(dataset.len(), k, "k")?;
    if point >= dataset.len() {
        return Err(invalid_param(format!("point {point} out of range")));
    }
    Ok(ranked_neighbors(dataset, distances, point, k))
}

/// Standard k-nearest-neighbor graph.
pub fn build_knn_graph(dataset: &TrajectoryDataset, distances: &DistanceMatrix, k: usize) -> Result<NeighborhoodGraph> {
    build_skip_graph(dataset, distances, k, 0)
}

/// Neighborhood of ranks `skip+1 ..= skip+k`: the `skip` nearest points are
/// passed over before neighbors are taken.
pub fn build_skip_graph(
    dataset: &TrajectoryDataset,
    distances: &DistanceMatrix,
    k: usize,
    skip: usize,
) -> Result<NeighborhoodGraph> {
    check_cover(dataset, distances)?;
    check_count(dataset.len(), k, "k")?;
    check_count(dataset.len(), k + skip, "k + skip")?;
    let labels = dataset.trajectory_labels();
    let lists = par_map(dataset.len(), |i| {
        let mut ranked = ranked_neighbors(dataset, distances, i, skip + k);
        ranked.drain(..skip);
        let h = LabelHistogram::from_labels(ranked.iter().map(|nb| labels[nb.index])).entropy();
        (ranked, h)
    });
    let (neighbors, entropy) = lists.into_iter().unzip();
    Ok(NeighborhoodGraph::assemble(neighbors, entropy))
}

/// Entropy-adaptive neighborhoods.
///
/// Each point starts from its `k` nearest neighbors and adds the next
/// nearest one at a time while the label entropy of its neighborhood is
/// below `threshold` and fewer than `k + max_extra` neighbors are held.
pub fn build_entropy_graph(
    dataset: &TrajectoryDataset,
    distances: &DistanceMatrix,
    k: usize,
    threshold: f64,
    max_extra: usize,
) -> Result<NeighborhoodGraph> {
    check_cover(dataset, distances)?;
    check_count(dataset.len(), k, "k")?;
    check_count(dataset.len(), k + max_extra, "k + max_extra")?;
    if !threshold.is_finite() || threshold < 0.0 {
        return Err(invalid_param(format!("entropy threshold {threshold} must be finite and nonnegative")));
    }
    let labels = dataset.trajectory_labels();
    let cap = k + max_extra;
    let lists = par_map(dataset.len(), |i| {
        let mut ranked = ranked_neighbors(dataset, distances, i, cap);
        let mut hist = LabelHistogram::from_labels(ranked[..k].iter().map(|nb| labels[nb.index]));
        let mut h = hist.entropy();
        let mut ki = k;
        while h.bits() < threshold && ki < cap {
            hist.add(labels[ranked[ki].index]);
            ki += 1;
            h = hist.entropy();
        }
        ranked.truncate(ki);
        (ranked, h)
    });
    let (neighbors, entropy) = lists.into_iter().unzip();
    Ok(NeighborhoodGraph::assemble(neighbors, entropy))
}

/// Keeps every `stride`-th point of each trajectory, starting from its first.
pub fn subsample(dataset: &TrajectoryDataset, stride: usize) -> Result<TrajectoryDataset> {
    if stride < 1 {
        return Err(invalid_param("stride must be at least 1"));
    }
    let keep: Vec<usize> = (0..dataset.len()).filter(|&i| dataset.time_index_of(i).is_multiple_of(stride)).collect();
    dataset.select(&keep)
}

/// All-pairs shortest path lengths; `f64::INFINITY` marks unreachable pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicMatrix {
    values: Array2<f64>,
}

impl GeodesicMatrix {
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

    /// Sub-matrix over `indices` as a distance matrix; fails if any pair
    /// among them is unreachable.
    pub fn restrict(&self, indices: &[usize]) -> Result<DistanceMatrix> {
        let m = indices.len();
        let values = Array2::from_shape_fn((m, m), |(a, b)| self.values[[indices[a], indices[b]]]);
        if let Some(((a, b), _)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Degenerate(format!("points {} and {} are not connected", indices[a], indices[b])));
        }
        DistanceMatrix::new(values)
    }
}

impl Dissimilarity for GeodesicMatrix {
    fn size(&self) -> usize {
        self.len()
    }

    fn dissimilarity(&self, i: usize, j: usize) -> f64 {
        self.values[[i, j]]
    }
}

#[derive(PartialEq)]
struct Dist(f64);

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn dijkstra(adj: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Reverse((Dist(0.0), source)));
    while let Some(Reverse((Dist(d), u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Reverse((Dist(nd), v)));
            }
        }
    }
    dist
}

/// Shortest-path lengths over the symmetrized edges, one Dijkstra run per
/// source. The two directed results for each pair are merged by taking the
/// smaller, so the output is exactly symmetric.
pub fn shortest_paths(graph: &NeighborhoodGraph) -> GeodesicMatrix {
    let adj = graph.adjacency();
    let n = graph.len();
    let rows = par_map(n, |s| dijkstra(&adj, s));
    let mut values = Array2::from_shape_fn((n, n), |(i, j)| rows[i][j]);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = values[[i, j]].min(values[[j, i]]);
            values[[i, j]] = v;
            values[[j, i]] = v;
        }
    }
    GeodesicMatrix { values }
}

/// Connected components of the symmetrized graph. Each component is sorted
/// ascending; components are ordered by their smallest member.
pub fn connected_components(graph: &NeighborhoodGraph) -> Vec<Vec<usize>> {
    let adj = graph.adjacency();
    let mut seen = vec![false; graph.len()];
    let mut out = Vec::new();
    for start in 0..graph.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                    queue.push_back(v);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Cross-trajectory neighbor counts: `counts[a][b]` is the number of
/// neighbors on trajectory `b` summed over all points of trajectory `a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixingTable {
    pub counts: Vec<Vec<usize>>,
}

impl MixingTable {
    pub fn off_diagonal_total(&self) -> usize {
        self.counts
            .iter()
            .enumerate()
            .map(|(a, row)| row.iter().enumerate().filter(|&(b, _)| b != a).map(|(_, c)| c).sum::<usize>())
            .sum()
    }

    pub fn is_diagonal(&self) -> bool {
        self.off_diagonal_total() == 0
    }
}

pub fn mixing_report(dataset: &TrajectoryDataset, graph: &NeighborhoodGraph) -> Result<MixingTable> {
    if graph.len() != dataset.len() {
        return Err(invalid_param("graph does not cover the dataset"));
    }
    let t = dataset.trajectory_count();
    let mut counts = vec![vec![0; t]; t];
    for i in 0..dataset.len() {
        let row = &mut counts[dataset.trajectory_of(i)];
        for nb in graph.neighbors(i) {
            row[dataset.trajectory_of(nb.index)] += 1;
        }
    }
    Ok(MixingTable { counts })
}
