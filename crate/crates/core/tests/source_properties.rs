use std::f64::consts::LN_2;

use proptest::prelude::*;

use profilelab::sources::total_variation;
use profilelab::{Caps, MarkovSource, Subset};

fn law(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 3 => 1e-3..1.0f64], len)
        .prop_filter("needs positive mass", |w| w.iter().any(|&x| x > 0.0))
        .prop_map(|w| {
            let s: f64 = w.iter().sum();
            w.into_iter().map(|x| x / s).collect()
        })
}

fn board(initial: Vec<f64>) -> MarkovSource {
    MarkovSource::screwed_board(8).unwrap().with_initial(initial).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 10, failure_persistence: None, ..ProptestConfig::default() })]

    /// Each step of the screwed board adds exactly 2 ln 2, whatever the law
    /// of the current state.
    #[test]
    fn screwed_board_steps_add_two_bits(initial in law(64)) {
        let src = board(initial);
        let curve = src.entropy_curve(12);
        for w in curve.windows(2) {
            prop_assert!((w[1] - w[0] - 2.0 * LN_2).abs() < 1e-9);
        }
    }

    /// The chain-rule curve agrees with the entropy of the explicit path law.
    #[test]
    fn chain_rule_matches_paths(initial in law(64)) {
        let src = board(initial);
        let curve = src.entropy_curve(4);
        for n in 1..=4 {
            let paths = src.active_horizon_distribution(n, &Caps::default()).unwrap();
            prop_assert!((paths.dist.entropy() - curve[n - 1]).abs() < 1e-9, "n = {}", n);
        }
    }

    #[test]
    fn brackets_are_monotone(initial in law(64)) {
        let src = MarkovSource::grid_board(8).unwrap().with_initial(initial).unwrap();
        let b = src.hidden_rate_brackets(Subset::singleton(0), 4).unwrap();
        for w in b.windows(2) {
            prop_assert!(w[1].lower >= w[0].lower - 1e-12);
            prop_assert!(w[1].upper <= w[0].upper + 1e-12);
        }
        for x in &b {
            prop_assert!(x.lower <= x.upper + 1e-12);
        }
    }

    /// When the observed coordinate is itself Markov the bracket is tight at
    /// every depth.
    #[test]
    fn markov_coordinate_brackets_are_tight(initial in law(64)) {
        let src = board(initial);
        for b in src.hidden_rate_brackets(Subset::singleton(1), 3).unwrap() {
            prop_assert!((b.upper - b.lower).abs() < 1e-9);
            prop_assert!((b.lower - 1.5 * LN_2).abs() < 1e-9);
        }
    }

    #[test]
    fn random_chains_agree_with_paths(rows in prop::collection::vec(law(4), 4), initial in law(4)) {
        let src = MarkovSource::new(
            profilelab::ProductSpace::from_sizes(&[2, 2]).unwrap(),
            rows,
            initial,
        ).unwrap();
        let curve = src.entropy_curve(4);
        for n in 1..=4 {
            let d = src.finite_horizon_distribution(n).unwrap();
            prop_assert!((d.entropy() - curve[n - 1]).abs() < 1e-9);
        }
    }
}

#[test]
fn periodic_cesaro_residual_halves() {
    for src in [
        MarkovSource::grid_board(8).unwrap(),
        MarkovSource::screwed_board(8)
            .unwrap()
            .with_initial((0..64).map(|i| if i == 9 { 1.0 } else { 0.0 }).collect())
            .unwrap(),
        MarkovSource::grid_board(4).unwrap(),
    ] {
        let tv = |n: usize| src.cesaro_mean(n).unwrap().tv_to_stationary.unwrap();
        let mut n = 64;
        while n <= 1024 {
            let (a, b) = (tv(n), tv(2 * n));
            if a > 1e-12 {
                let ratio = b / a;
                assert!((ratio - 0.5).abs() < 0.05, "n = {n}: {a} -> {b}");
            }
            n *= 2;
        }
    }
}

#[test]
fn cesaro_mean_converges_for_random_irreducible_chains() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let rows: Vec<Vec<f64>> = (0..5)
            .map(|_| {
                let w: Vec<f64> = (0..5).map(|_| rng.gen_range(0.01..1.0)).collect();
                let s: f64 = w.iter().sum();
                w.into_iter().map(|x| x / s).collect()
            })
            .collect();
        let src = MarkovSource::new(
            profilelab::ProductSpace::from_sizes(&[5]).unwrap(),
            rows,
            vec![1.0, 0.0, 0.0, 0.0, 0.0],
        )
        .unwrap();
        let pi = src.stationary_distribution().unwrap();
        let c = src.cesaro_mean(400).unwrap();
        assert!(total_variation(&c.mean, &pi) < 0.01);
    }
}
