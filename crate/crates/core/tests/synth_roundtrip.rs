use proptest::prelude::*;
use traj_manifold::synth::{generate, Family, ProcessSpec};
use traj_manifold::{read_csv, write_csv};

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![Just(Family::SwissRollTrajectories), Just(Family::DivergingFan), Just(Family::InterleavedPair)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn export_is_deterministic_and_lossless(
        fam in family(),
        t in 1usize..5,
        m in 2usize..30,
        extra in 0usize..3,
        noise in 0.0f64..0.5,
        seed in any::<u64>(),
    ) {
        let t = if fam == Family::InterleavedPair { 2 } else { t };
        let spec = ProcessSpec {
            ambient_dim: fam.base_dim() + extra,
            noise_sigma: noise,
            seed,
            ..ProcessSpec::new(fam, t, m)
        };
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        let (mut ba, mut bb) = (Vec::new(), Vec::new());
        write_csv(&a, &mut ba).unwrap();
        write_csv(&b, &mut bb).unwrap();
        prop_assert_eq!(&ba, &bb);
        let back = read_csv(ba.as_slice()).unwrap();
        prop_assert_eq!(back, a);
        let reparsed = ProcessSpec::from_config_str(&spec.to_config_string()).unwrap();
        prop_assert_eq!(reparsed, spec);
    }
}
