use proptest::prelude::*;

use profilelab::bounds::{mixture_lemma_one, mixture_lemma_two};
use profilelab::dist::{entropy_of, fluctuation_of};
use profilelab::{JointDistribution, ProductSpace, Subset};

/// Weights with a fair share of exact zeros so supports vary.
fn weights(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => 1e-3..1.0f64], len)
        .prop_filter("needs positive mass", |w| w.iter().any(|&x| x > 0.0))
}

fn joint(max_coords: usize, max_size: usize) -> impl Strategy<Value = JointDistribution> {
    prop::collection::vec(1..=max_size, 1..=max_coords).prop_flat_map(|sizes| {
        let total: usize = sizes.iter().product();
        weights(total).prop_map(move |w| {
            JointDistribution::from_weights(ProductSpace::from_sizes(&sizes).unwrap(), w).unwrap()
        })
    })
}

fn pair(max_size: usize) -> impl Strategy<Value = JointDistribution> {
    (1..=max_size, 1..=max_size).prop_flat_map(|(a, b)| {
        weights(a * b).prop_map(move |w| {
            JointDistribution::from_weights(ProductSpace::from_sizes(&[a, b]).unwrap(), w).unwrap()
        })
    })
}

fn normalized(w: Vec<f64>) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 400, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn fluctuation_halves(d in joint(3, 4)) {
        let r = d.fluctuation_report();
        prop_assert!((r.m - 2.0 * r.m_plus).abs() < 1e-9);
        prop_assert!((r.m - 2.0 * r.m_minus).abs() < 1e-9);
        prop_assert!((r.m - r.m_plus - r.m_minus).abs() < 1e-12);
    }

    #[test]
    fn entropy_is_fluctuation_about_zero(d in joint(3, 4)) {
        prop_assert!((d.entropy() - d.fluctuation_at(0.0).total).abs() < 1e-9);
    }

    #[test]
    fn support_fluctuation_identities(d in joint(3, 4)) {
        let r = d.fluctuation_report();
        let support = d.mass().iter().filter(|&&p| p > 0.0).count() as f64;
        // KL(P || uniform on support) = ln #support - H
        let kl = support.ln() - d.entropy();
        prop_assert!((r.d - 2.0 * r.d_plus - kl).abs() < 1e-9);
        prop_assert!((r.kl_to_uniform_support - kl).abs() < 1e-9);
        prop_assert!(r.d_plus <= (-1.0f64).exp() + 1e-9);
        prop_assert!(r.m_rel >= 0.0 && r.m_rel <= 2.0 + 1e-12);
        if d.entropy() > 0.0 {
            prop_assert!(r.m_rel <= 2.0 * r.d_rel + 1e-9);
        }
    }

    #[test]
    fn fluctuation_is_convex_in_level(d in joint(2, 4), a in 0.0..4.0f64, b in 0.0..4.0f64, t in 0.0..1.0f64) {
        let m = |x: f64| d.fluctuation_at(x).total;
        let mid = t * a + (1.0 - t) * b;
        prop_assert!(m(mid) <= t * m(a) + (1.0 - t) * m(b) + 1e-9);
    }

    #[test]
    fn conditional_chain_rule(d in pair(4)) {
        let (x, y) = (Subset::singleton(0), Subset::singleton(1));
        let m_x_given_y = d.conditional_fluctuation(x, y, None).unwrap().total;
        let m_y = d.marginal(y).unwrap().mean_fluctuation();
        let m_xy = d.mean_fluctuation();
        prop_assert!(m_x_given_y <= m_y + m_xy + 1e-9);
        prop_assert!(m_xy <= m_y + m_x_given_y + 1e-9);
    }

    #[test]
    fn marginals_compose(d in joint(3, 3), a in 0u32..8, b in 0u32..8) {
        let k = d.k();
        let full = Subset::full(k).bits();
        let (i, j) = (Subset::from_bits(a & full), Subset::from_bits(b & full));
        let inner = i.intersection(j);
        let direct = d.marginal(inner).unwrap();
        let nested = d.marginal(i).unwrap().marginal(inner.relative_to(i)).unwrap();
        prop_assert_eq!(direct.mass().len(), nested.mass().len());
        for (p, q) in direct.mass().iter().zip(nested.mass()) {
            prop_assert!((p - q).abs() < 1e-12);
        }
        let total: f64 = d.mass().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixture_lemmas(
        (p1, p2) in (1usize..12).prop_flat_map(|n| (weights(n), weights(n))),
        eps in 0.0..1.0f64,
    ) {
        let (p1, p2) = (normalized(p1), normalized(p2));
        let one = mixture_lemma_one(&p1, &p2, eps).unwrap();
        prop_assert!(one.holds, "{:?}", one);
        let two = mixture_lemma_two(&p1, &p2, eps).unwrap();
        prop_assert!(two.holds, "{:?}", two);
    }

    #[test]
    fn free_functions_agree_with_methods(d in joint(2, 4), a in 0.0..3.0f64) {
        prop_assert!((entropy_of(d.mass()) - d.entropy()).abs() < 1e-15);
        prop_assert_eq!(fluctuation_of(d.mass(), a), d.fluctuation_at(a));
    }
}
