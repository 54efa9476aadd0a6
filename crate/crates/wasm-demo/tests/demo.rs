use traj_manifold_wasm::Demo;

#[test]
fn embeds_with_every_method() {
    let demo = Demo::new("fan", 4, 30, 0.02, 1).unwrap();
    assert_eq!((demo.point_count(), demo.trajectory_count()), (120, 4));
    assert_eq!(demo.labels().len(), 120);
    for method in ["pca", "mds", "isomap", "entropy-isomap"] {
        let r = demo.embed(method, 6, 0.3, 20).unwrap();
        assert_eq!(r.coords().len(), 2 * r.points().len(), "{method}");
        assert_eq!(r.chosen_k().len(), 120);
        assert!(r.residual_variance().is_finite());
        assert!((0.0..=1.0).contains(&r.cap_fraction()));
    }
}

#[test]
fn adaptive_sizes_stay_in_range() {
    let demo = Demo::new("swissroll", 3, 40, 0.0, 0).unwrap();
    let r = demo.embed("entropy-isomap", 5, 0.5, 15).unwrap();
    assert!(r.chosen_k().iter().all(|&k| (5..=20).contains(&k)));
}

#[test]
fn entropy_curves_have_one_value_per_k() {
    let demo = Demo::new("interleaved", 2, 50, 0.0, 0).unwrap();
    let v = demo.entropy_by_k(10).unwrap();
    assert_eq!(v.len(), 20);
    assert!(v.iter().all(|h| (0.0..=1.0).contains(h)));
    assert!(v[1] >= 0.9);
}

#[test]
fn rejects_bad_input() {
    assert!(Demo::new("spiral", 2, 10, 0.0, 0).is_err());
    assert!(Demo::new("interleaved", 3, 10, 0.0, 0).is_err());
    let demo = Demo::new("fan", 2, 10, 0.0, 0).unwrap();
    assert!(demo.embed("tsne", 4, 0.3, 5).is_err());
}
