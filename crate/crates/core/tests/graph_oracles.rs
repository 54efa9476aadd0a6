use ndarray::Array2;
use proptest::prelude::*;
use traj_manifold::graph::{
    build_entropy_graph, build_knn_graph, build_skip_graph, connected_components, knn, mixing_report, subsample,
};
use traj_manifold::metrics::{pairwise_distances, trajectory_entropy};
use traj_manifold::synth::{generate, Family, ProcessSpec, SplitMix64};
use traj_manifold::TrajectoryDataset;

fn random_dataset(seed: u64, n: usize, t: usize, dim: usize) -> TrajectoryDataset {
    let mut rng = SplitMix64::new(seed);
    let pts = Array2::from_shape_fn((n, dim), |_| (rng.next_f64() * 8.0).round() / 2.0);
    let labels = (0..n).map(|i| i % t).collect();
    TrajectoryDataset::from_labeled_points(pts, labels).unwrap()
}

/// Full sort under the documented tie order.
fn sorted_neighbors(ds: &TrajectoryDataset, d: &traj_manifold::DistanceMatrix, p: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..ds.len()).filter(|&j| j != p).collect();
    all.sort_by(|&a, &b| {
        d.get(p, a)
            .total_cmp(&d.get(p, b))
            .then(ds.trajectory_of(a).cmp(&ds.trajectory_of(b)))
            .then(ds.time_index_of(a).cmp(&ds.time_index_of(b)))
            .then(a.cmp(&b))
    });
    all
}

fn bits(labels: &[usize]) -> f64 {
    let t = labels.iter().max().map_or(0, |m| m + 1);
    let mut c = vec![0.0; t];
    for &l in labels {
        c[l] += 1.0;
    }
    let n = labels.len() as f64;
    c.iter().filter(|&&x| x > 0.0).map(|x| -(x / n) * (x / n).log2()).sum()
}

#[test]
fn knn_matches_full_sort_with_ties() {
    // coordinates on a half-unit lattice force many equal distances
    let ds = random_dataset(9, 50, 4, 2);
    let d = pairwise_distances(&ds).unwrap();
    for p in 0..ds.len() {
        let want = sorted_neighbors(&ds, &d, p);
        for k in [1, 5, 17, 49] {
            let got: Vec<usize> = knn(&ds, &d, p, k).unwrap().iter().map(|nb| nb.index).collect();
            assert_eq!(got, want[..k], "point {p}, k {k}");
        }
    }
}

#[test]
fn skip_graph_is_a_slice_of_the_ranking() {
    let ds = random_dataset(3, 40, 3, 3);
    let d = pairwise_distances(&ds).unwrap();
    let g = build_skip_graph(&ds, &d, 6, 4).unwrap();
    for p in 0..ds.len() {
        let want = &sorted_neighbors(&ds, &d, p)[4..10];
        let got: Vec<usize> = g.neighbors(p).iter().map(|nb| nb.index).collect();
        assert_eq!(got, want);
    }
}

#[test]
fn entropy_graph_matches_exhaustive_scan() {
    let ds = random_dataset(21, 60, 3, 2);
    let d = pairwise_distances(&ds).unwrap();
    let (k, m, thr) = (4, 20, 1.2);
    let g = build_entropy_graph(&ds, &d, k, thr, m).unwrap();
    for p in 0..ds.len() {
        let order = sorted_neighbors(&ds, &d, p);
        let labels: Vec<usize> = order.iter().map(|&j| ds.trajectory_of(j)).collect();
        let want = (k..=k + m).find(|&kk| bits(&labels[..kk]) >= thr).unwrap_or(k + m);
        assert_eq!(g.chosen_k(p), want, "point {p}");
        assert!((g.entropy_at_k(p).bits() - bits(&labels[..want])).abs() < 1e-12);
    }
}

#[test]
fn separated_trajectories_run_to_the_cap() {
    let xs: Vec<f64> = (0..20).map(|i| f64::from(i * 2)).chain((0..20).map(|i| f64::from(i * 2) + 100.0)).collect();
    let pts = Array2::from_shape_vec((40, 1), xs).unwrap();
    let labels: Vec<usize> = (0..40).map(|i| i / 20).collect();
    let ds = TrajectoryDataset::from_labeled_points(pts, labels).unwrap();
    let d = pairwise_distances(&ds).unwrap();
    let g = build_entropy_graph(&ds, &d, 2, 0.5, 10).unwrap();
    for p in 0..40 {
        assert_eq!(g.chosen_k(p), 12);
        assert_eq!(g.entropy_at_k(p).bits(), 0.0);
    }
}

#[test]
fn trajectory_entropy_is_flat_mean() {
    let ds = random_dataset(5, 45, 3, 2);
    let d = pairwise_distances(&ds).unwrap();
    let g = build_knn_graph(&ds, &d, 5).unwrap();
    for t in 0..3 {
        let pts = ds.trajectory_points(t);
        let want: f64 = pts
            .iter()
            .map(|&p| bits(&sorted_neighbors(&ds, &d, p)[..5].iter().map(|&j| ds.trajectory_of(j)).collect::<Vec<_>>()))
            .sum::<f64>()
            / pts.len() as f64;
        assert!((trajectory_entropy(&ds, &g, t).unwrap().bits() - want).abs() < 1e-12);
    }
    assert!(trajectory_entropy(&ds, &g, 3).is_err());
}

#[test]
fn mixing_table_recount() {
    let ds = random_dataset(8, 36, 4, 2);
    let d = pairwise_distances(&ds).unwrap();
    let g = build_entropy_graph(&ds, &d, 3, 1.0, 6).unwrap();
    let mut want = vec![vec![0usize; 4]; 4];
    for p in 0..ds.len() {
        for nb in g.neighbors(p) {
            want[ds.trajectory_of(p)][ds.trajectory_of(nb.index)] += 1;
        }
    }
    let table = mixing_report(&ds, &g).unwrap();
    assert_eq!(table.counts, want);
    let total: usize = want.iter().flatten().sum();
    let diag: usize = (0..4).map(|t| want[t][t]).sum();
    assert_eq!(table.off_diagonal_total(), total - diag);
}

#[test]
fn separated_clusters_form_two_components() {
    let mut rng = SplitMix64::new(2);
    let pts = Array2::from_shape_fn((30, 2), |(i, _)| rng.next_f64() + if i < 15 { 0.0 } else { 1000.0 });
    let ds = TrajectoryDataset::from_labeled_points(pts, vec![0; 30]).unwrap();
    let d = pairwise_distances(&ds).unwrap();
    let g = build_knn_graph(&ds, &d, 3).unwrap();
    let comps = connected_components(&g);
    assert_eq!(comps, vec![(0..15).collect::<Vec<_>>(), (15..30).collect()]);
}

#[test]
fn interleaved_pair_mixes_at_k2() {
    let ds = generate(&ProcessSpec::new(Family::InterleavedPair, 2, 100)).unwrap();
    let d = pairwise_distances(&ds).unwrap();
    let g = build_knn_graph(&ds, &d, 2).unwrap();
    for p in 0..ds.len() {
        let j = ds.time_index_of(p);
        if j > 0 && j + 1 < 100 {
            assert!(g.entropy_at_k(p).bits() >= 0.9, "point {p}");
        }
    }
}

#[test]
fn subsample_keeps_every_stride() {
    let ds = random_dataset(4, 30, 3, 2);
    let s = subsample(&ds, 3).unwrap();
    let kept: Vec<usize> = (0..ds.len()).filter(|&i| ds.time_index_of(i) % 3 == 0).collect();
    assert_eq!(s.len(), kept.len());
    for (row, &i) in kept.iter().enumerate() {
        assert_eq!(s.point(row), ds.point(i));
        assert_eq!(s.trajectory_of(row), ds.trajectory_of(i));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn knn_prefixes_nest(seed in any::<u64>(), k in 1usize..10) {
        let ds = random_dataset(seed, 24, 3, 2);
        let d = pairwise_distances(&ds).unwrap();
        let small = build_knn_graph(&ds, &d, k).unwrap();
        let big = build_knn_graph(&ds, &d, k + 3).unwrap();
        for p in 0..ds.len() {
            prop_assert_eq!(small.neighbors(p), &big.neighbors(p)[..k]);
        }
    }

    #[test]
    fn adaptive_graph_contains_knn(seed in any::<u64>(), k in 1usize..6, m in 0usize..8, thr in 0.0f64..1.6) {
        let ds = random_dataset(seed, 24, 3, 2);
        let d = pairwise_distances(&ds).unwrap();
        let base = build_knn_graph(&ds, &d, k).unwrap();
        let grown = build_entropy_graph(&ds, &d, k, thr, m).unwrap();
        for p in 0..ds.len() {
            let c = grown.chosen_k(p);
            prop_assert!(c >= k && c <= k + m);
            prop_assert_eq!(base.neighbors(p), &grown.neighbors(p)[..k]);
            prop_assert!(grown.entropy_at_k(p).bits() >= thr || c == k + m);
        }
    }

    #[test]
    fn higher_threshold_never_shrinks(seed in any::<u64>(), lo in 0.0f64..1.0, extra in 0.0f64..0.6) {
        let ds = random_dataset(seed, 24, 3, 2);
        let d = pairwise_distances(&ds).unwrap();
        let a = build_entropy_graph(&ds, &d, 3, lo, 10).unwrap();
        let b = build_entropy_graph(&ds, &d, 3, lo + extra, 10).unwrap();
        for p in 0..ds.len() {
            prop_assert!(b.chosen_k(p) >= a.chosen_k(p));
        }
    }

    #[test]
    fn graph_build_is_deterministic(seed in any::<u64>()) {
        let ds = random_dataset(seed, 30, 2, 3);
        let d = pairwise_distances(&ds).unwrap();
        let a = build_entropy_graph(&ds, &d, 3, 0.8, 5).unwrap();
        let b = build_entropy_graph(&ds, &d, 3, 0.8, 5).unwrap();
        prop_assert_eq!(a.symmetrized_edges(), b.symmetrized_edges());
    }
}
