use proptest::prelude::*;

use profilelab::encoders::{proportion_good, Criterion, Mode};
use profilelab::{EncodingEnsemble, JointDistribution, ProductSpace};

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    /// A trial's encoding depends on the seed and its index only.
    #[test]
    fn sampling_is_keyed(seed in any::<u64>(), trials in prop::collection::vec(0u64..1000, 1..20)) {
        let ensemble = EncodingEnsemble::new(ProductSpace::from_sizes(&[5, 7, 3]).unwrap(), vec![3, 2]).unwrap();
        let forward: Vec<_> = trials.iter().map(|&t| ensemble.sample(seed, t)).collect();
        let backward: Vec<_> = trials.iter().rev().map(|&t| ensemble.sample(seed, t)).collect();
        for (a, b) in forward.iter().zip(backward.iter().rev()) {
            prop_assert_eq!(a, b);
        }
        for f in &forward {
            prop_assert!(ensemble.encoding_from_tables(f.tables().to_vec()).is_ok());
        }
    }

    #[test]
    fn exact_count_in_range(index in 0u128..(3u128.pow(4) * 2u128.pow(3))) {
        let ensemble = EncodingEnsemble::new(ProductSpace::from_sizes(&[4, 3]).unwrap(), vec![3, 2]).unwrap();
        let f = ensemble.encoding_at(index);
        prop_assert_eq!(f.tables()[0].len(), 4);
        prop_assert!(f.tables()[0].iter().all(|&y| y < 3));
        prop_assert!(f.tables()[1].iter().all(|&y| y < 2));
    }
}

#[test]
fn monte_carlo_is_reproducible() {
    let d = JointDistribution::from_weights(
        ProductSpace::from_sizes(&[3, 3]).unwrap(),
        vec![4.0, 1.0, 0.0, 2.0, 3.0, 1.0, 0.5, 0.0, 2.0],
    )
    .unwrap();
    let ensemble = EncodingEnsemble::new(d.space().clone(), vec![2, 2]).unwrap();
    let criterion = Criterion::Typical { epsilon: 0.3, h: d.entropy() };
    let run = |seed| proportion_good(&d, &ensemble, criterion, Mode::MonteCarlo { trials: 3000, seed }).unwrap();
    assert_eq!(run(9), run(9));
    let exact = proportion_good(&d, &ensemble, criterion, Mode::Exact).unwrap();
    assert_eq!(exact.trials, 64);
    assert!(run(9).contains(exact.proportion), "{:?} vs {:?}", run(9), exact);
}
