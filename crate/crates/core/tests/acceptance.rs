//! One test per acceptance criterion. Each prints a single line
//! `criterion N: PASS|FAIL <summary>` before asserting, so
//! `cargo test --test acceptance -- --nocapture --test-threads 1` gives the
//! whole scorecard in order.

use std::f64::consts::LN_2;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use profilelab::bounds::{
    conditional_encoding_bound, cor1_bound, cor2_absorption, mixture_lemma_one, mixture_lemma_two,
    small_atoms_check, thm1_bound, ConditionalInputs, SingleInputs,
};
use profilelab::encoders::{proportion_good, pushforward, Criterion, Mode};
use profilelab::experiment::{iid_fluctuation, run_experiment, ExperimentSpec, Schedule, SweepMode};
use profilelab::profiles::{convolve, entropy_profile, max_norm_distance};
use profilelab::sources::ProfileOptions;
use profilelab::{
    Caps, EncodingEnsemble, JointDistribution, MarkovSource, ProductSpace, ProfileVector, SourceSpec,
    SubProbability, Subset,
};

fn verdict(n: usize, pass: bool, elapsed: Duration, limit: Duration, summary: String) {
    let within = elapsed <= limit;
    println!(
        "criterion {n}: {} {summary} ({:.2} s, limit {} s)",
        if pass && within { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    assert!(pass, "criterion {n}: {summary}");
    assert!(within, "criterion {n} took {elapsed:?}, limit {limit:?}");
}

fn random_law(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..len)
        .map(|_| if rng.gen_bool(0.15) { 0.0 } else { rng.sample::<f64, _>(Exp1) })
        .collect();
    let s: f64 = w.iter().sum();
    if s == 0.0 {
        let mut point = vec![0.0; len];
        point[0] = 1.0;
        return point;
    }
    w.into_iter().map(|x| x / s).collect()
}

fn random_joint(rng: &mut ChaCha8Rng, sizes: &[usize]) -> JointDistribution {
    let space = ProductSpace::from_sizes(sizes).unwrap();
    let law = random_law(rng, space.total_size());
    JointDistribution::new(space, law).unwrap()
}

fn ln2_profile(values: [f64; 4]) -> ProfileVector {
    ProfileVector::new(2, values.iter().map(|v| v * LN_2).collect()).unwrap()
}

#[test]
fn criterion_01_prop1_exhaustive() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut checked, mut violations, mut worst) = (0u64, 0u64, f64::NEG_INFINITY);
    for _ in 0..50 {
        let sizes = [rng.gen_range(1..=3), rng.gen_range(1..=3)];
        let d = random_joint(&mut rng, &sizes);
        let ensemble = EncodingEnsemble::new(d.space().clone(), vec![2, 2]).unwrap();
        let cap = convolve(&entropy_profile(&d).unwrap(), ensemble.modular().profile()).unwrap();
        for f in ensemble.enumerate().unwrap() {
            let out = entropy_profile(&pushforward(&d, &f).unwrap()).unwrap();
            for s in Subset::all(2) {
                let excess = out.get(s) - cap.get(s);
                worst = worst.max(excess);
                if excess > 1e-9 {
                    violations += 1;
                }
            }
            checked += 1;
        }
    }
    verdict(
        1,
        violations == 0,
        start.elapsed(),
        Duration::from_secs(10),
        format!("Prop 1: {checked} encodings of 50 joints, {violations} violations, max excess {worst:.2e}"),
    );
}

#[test]
fn criterion_02_screwed_board() {
    let start = Instant::now();
    let board = MarkovSource::screwed_board(8).unwrap();
    let curve = board.entropy_curve(64);
    let joint_err = curve
        .iter()
        .enumerate()
        .map(|(i, h)| (h - i as f64 * 2.0 * LN_2).abs())
        .fold(0.0, f64::max);
    let coordinate = board.lump(Subset::singleton(0)).unwrap().expect("coordinate of the screwed board is Markov");
    let coord_err = coordinate
        .entropy_curve(64)
        .iter()
        .enumerate()
        .map(|(i, h)| (h - i as f64 * 1.5 * LN_2).abs())
        .fold(0.0, f64::max);
    let rates = board.process_profile(64, &ProfileOptions::default()).unwrap().rates_at(64).unwrap();
    let rate_err = max_norm_distance(&rates, &ln2_profile([0.0, 1.5, 1.5, 2.0])).unwrap();
    verdict(
        2,
        joint_err < 1e-9 && coord_err < 1e-9 && rate_err < 0.03,
        start.elapsed(),
        Duration::from_secs(5),
        format!(
            "screwed board: joint curve err {joint_err:.1e}, coordinate curve err {coord_err:.1e}, \
             rate err at n=64 {rate_err:.4} nats"
        ),
    );
}

#[test]
fn criterion_03_grid_board() {
    let start = Instant::now();
    let board = MarkovSource::grid_board(8).unwrap();
    let rate = board.entropy_rate().unwrap();
    let closed = (8.0 * 2f64.ln() + 72.0 * 3f64.ln() + 144.0 * 4f64.ln()) / 224.0;
    let brackets: Vec<_> = (2..=6)
        .map(|m| board.hidden_rate_bracket(Subset::singleton(0), m).unwrap())
        .collect();
    let monotone = brackets
        .windows(2)
        .all(|w| w[1].lower >= w[0].lower - 1e-12 && w[1].upper <= w[0].upper + 1e-12);
    let inside = brackets.iter().all(|b| b.lower > LN_2 && b.upper < 2.0 * LN_2 && b.lower <= b.upper);
    let last = brackets.last().unwrap();
    verdict(
        3,
        (rate - closed).abs() < 1e-12 && (rate / LN_2 - 1.8309).abs() < 5e-4 && monotone && inside,
        start.elapsed(),
        Duration::from_secs(60),
        format!(
            "grid board: rate {:.5} ln2, bracket at m=6 [{:.5}, {:.5}] ln2, monotone {monotone}, inside {inside}",
            rate / LN_2,
            last.lower / LN_2,
            last.upper / LN_2
        ),
    );
}

#[test]
fn criterion_04_convolution() {
    let start = Instant::now();
    let w = convolve(&ln2_profile([0.0, 1.5, 1.5, 2.0]), &ln2_profile([0.0, 1.0, 1.0, 2.0])).unwrap();
    let exact = w == ln2_profile([0.0, 1.0, 1.0, 2.0]);
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..10_000 {
        let k = rng.gen_range(1..=5);
        let random = |rng: &mut ChaCha8Rng| {
            let mut v: Vec<f64> = (0..1 << k).map(|_| rng.gen_range(0.0..10.0)).collect();
            v[0] = 0.0;
            ProfileVector::new(k, v).unwrap()
        };
        let (u, u2, v) = (random(&mut rng), random(&mut rng), random(&mut rng));
        let du = max_norm_distance(&u, &u2).unwrap();
        let left = max_norm_distance(&convolve(&u, &v).unwrap(), &convolve(&u2, &v).unwrap()).unwrap();
        let right = max_norm_distance(&convolve(&v, &u).unwrap(), &convolve(&v, &u2).unwrap()).unwrap();
        worst = worst.max(left - du).max(right - du);
    }
    verdict(
        4,
        exact && worst <= 1e-12,
        start.elapsed(),
        Duration::from_secs(10),
        format!("convolution: board example exact {exact}, Lipschitz worst excess {worst:.2e} over 10^4 pairs"),
    );
}

#[test]
fn criterion_05_fluctuation_identities() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut failures = Vec::new();
    for i in 0..1000 {
        let len = rng.gen_range(1..=40);
        let d = random_joint(&mut rng, &[len]);
        let r = d.fluctuation_report();
        let kl = (r.support_size as f64).ln() - r.entropy;
        let ok = (r.m - 2.0 * r.m_plus).abs() < 1e-9
            && (r.m - 2.0 * r.m_minus).abs() < 1e-9
            && (d.fluctuation_at(0.0).total - r.entropy).abs() < 1e-9
            && (r.d - 2.0 * r.d_plus - kl).abs() < 1e-9
            && r.d_plus <= (-1.0f64).exp() + 1e-9
            && (r.entropy == 0.0 || r.m_rel <= 2.0 * r.d_rel + 1e-9);
        if !ok {
            failures.push(format!("distribution {i}"));
        }
    }
    for i in 0..500 {
        let sizes = [rng.gen_range(1..=4), rng.gen_range(1..=4)];
        let d = random_joint(&mut rng, &sizes);
        let (x, y) = (Subset::singleton(0), Subset::singleton(1));
        let m_x_given_y = d.conditional_fluctuation(x, y, None).unwrap().total;
        let m_y = d.marginal(y).unwrap().mean_fluctuation();
        if m_x_given_y > m_y + d.mean_fluctuation() + 1e-9 {
            failures.push(format!("joint {i}"));
        }
    }
    for i in 0..1000 {
        let len = rng.gen_range(1..=30);
        let (p1, p2) = (random_law(&mut rng, len), random_law(&mut rng, len));
        let eps = rng.gen_range(0.0..1.0);
        if !mixture_lemma_one(&p1, &p2, eps).unwrap().holds || !mixture_lemma_two(&p1, &p2, eps).unwrap().holds {
            failures.push(format!("mixture {i}"));
        }
    }
    verdict(
        5,
        failures.is_empty(),
        start.elapsed(),
        Duration::from_secs(10),
        format!(
            "fluctuation identities: 1000 laws, 500 joints, 1000 mixtures, {} failures {:?}",
            failures.len(),
            failures.iter().take(3).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_06_small_atoms_grid() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let (mut cells, mut failures) = (0, 0);
    for points in 1..=8usize {
        for colors in [2usize, 3] {
            for eps in [0.25, 0.5, 1.0, 2.0] {
                cells += 1;
                for _ in 0..50 {
                    let total = rng.gen_range(0.05..=1.0);
                    let mass: Vec<f64> = random_law(&mut rng, points).into_iter().map(|p| p * total).collect();
                    let report = small_atoms_check(&SubProbability::new(mass).unwrap(), colors, eps).unwrap();
                    if report.proportion < report.bound.proportion_lower_bound || report.proportion.is_nan() {
                        failures += 1;
                    }
                }
            }
        }
    }
    verdict(
        6,
        failures == 0,
        start.elapsed(),
        Duration::from_secs(60),
        format!("small atoms: {cells} cells x 50 sub-probabilities, {failures} below the bound"),
    );
}

#[test]
fn criterion_07_iid_limits() {
    let start = Instant::now();
    let base = [0.7, 0.3];
    let h1 = -(0.7f64 * 0.7f64.ln() + 0.3 * 0.3f64.ln());
    let limit = (2f64.ln() - h1) / h1;
    let horizons: Vec<usize> = (4..=10).map(|e| 1 << e).collect();
    let reports: Vec<_> = horizons
        .iter()
        .map(|&n| iid_fluctuation(&base, n, &Caps::default()).unwrap())
        .collect();
    let d_rel = reports.last().unwrap().d_rel;
    let m_rel: Vec<f64> = reports.iter().map(|r| r.m_rel).collect();
    let decreasing = m_rel.windows(2).all(|w| w[1] < w[0]);
    verdict(
        7,
        (d_rel - limit).abs() < 0.02 && decreasing,
        start.elapsed(),
        Duration::from_secs(30),
        format!(
            "Bernoulli(0.3): D_rel(1024) = {d_rel:.5} vs limit {limit:.5}; M_rel decreasing {decreasing} \
             ({:.4} -> {:.4})",
            m_rel[0],
            m_rel[m_rel.len() - 1]
        ),
    );
}

#[test]
fn criterion_08_typicality_trend() {
    let start = Instant::now();
    let spec = ExperimentSpec {
        source: SourceSpec::Iid {
            alphabet_sizes: vec![2, 2],
            distribution: vec![0.25; 4],
        },
        horizons: vec![4, 6, 8, 10, 12],
        schedule: Schedule::Growth { c: 0.5 },
        ell: None,
        epsilon: 0.15,
        delta: None,
        trials: 200,
        seed: 2024,
        mode: SweepMode::MonteCarlo,
    };
    let report = run_experiment(&spec, &Caps::default()).unwrap();
    let rows: Vec<_> = report.rows.iter().map(|r| r.measurements.as_ref().expect("feasible")).collect();
    let medians: Vec<f64> = rows.iter().map(|m| m.distance.median).collect();
    let fluct = rows.last().unwrap().fluctuation.median;
    let non_increasing = medians.windows(2).all(|w| w[1] <= w[0]);
    let again = run_experiment(&spec, &Caps::default()).unwrap();
    let deterministic = again == report;
    verdict(
        8,
        non_increasing && medians[4] < 0.15 && fluct < 0.15 && deterministic,
        start.elapsed(),
        Duration::from_secs(300),
        format!(
            "fair-bit pair: median distance {:?}, median M'/n at n=12 {fluct:.4}, deterministic {deterministic}",
            medians.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_09_exact_vs_monte_carlo() {
    let start = Instant::now();
    let instances: Vec<(JointDistribution, Vec<usize>, f64)> = vec![
        (
            JointDistribution::new(ProductSpace::from_sizes(&[2, 2]).unwrap(), vec![0.4, 0.1, 0.2, 0.3]).unwrap(),
            vec![2, 2],
            0.3,
        ),
        (
            JointDistribution::from_weights(
                ProductSpace::from_sizes(&[3, 3]).unwrap(),
                vec![4.0, 1.0, 0.0, 2.0, 3.0, 1.0, 0.5, 0.0, 2.0],
            )
            .unwrap(),
            vec![2, 2],
            0.3,
        ),
        (
            JointDistribution::from_weights(
                ProductSpace::from_sizes(&[4, 3]).unwrap(),
                vec![5.0, 1.0, 1.0, 2.0, 0.5, 3.0, 1.0, 1.0, 4.0, 0.2, 2.0, 1.0],
            )
            .unwrap(),
            vec![3, 2],
            0.25,
        ),
    ];
    let mut lines = Vec::new();
    let mut pass = true;
    for (i, (d, outputs, eps)) in instances.iter().enumerate() {
        let ensemble = EncodingEnsemble::new(d.space().clone(), outputs.clone()).unwrap();
        let criterion = Criterion::Typical { epsilon: *eps, h: d.entropy() };
        let exact = proportion_good(d, &ensemble, criterion, Mode::Exact).unwrap();
        assert!(exact.trials <= 100_000);
        let inside = (0..100u64)
            .filter(|&rep| {
                let seed = 9_000 + 100 * i as u64 + rep;
                proportion_good(d, &ensemble, criterion, Mode::MonteCarlo { trials: 10_000, seed })
                    .unwrap()
                    .contains(exact.proportion)
            })
            .count();
        pass &= inside >= 99;
        lines.push(format!("instance {i}: exact {:.4} over {} encodings, {inside}/100 inside", exact.proportion, exact.trials));
    }
    verdict(9, pass, start.elapsed(), Duration::from_secs(300), format!("exact vs Monte Carlo: {}", lines.join("; ")));
}

#[test]
fn criterion_10_bound_algebra() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut specialization = 0.0f64;
    for _ in 0..200 {
        let single = SingleInputs {
            h_x: rng.gen_range(0.1..30.0),
            ln_b: rng.gen_range(0.1..30.0),
            m_x: rng.gen_range(0.0..5.0),
            t: rng.gen_range(0.1..10.0),
            r: rng.gen_range(0.05..0.95),
            delta: rng.gen_range(0.01..5.0),
        };
        let cond = ConditionalInputs {
            h_x_given_y: single.h_x,
            h_y: 0.0,
            ln_b: single.ln_b,
            m_x_given_y: single.m_x,
            m_y: 0.0,
            t1: single.t,
            t2: 1.0,
            r: single.r,
            s: 0.5,
            delta: single.delta,
        };
        let (a, b) = (cor1_bound(&single).unwrap(), conditional_encoding_bound(&cond).unwrap());
        for (x, y) in [
            (a.fluctuation_threshold, b.fluctuation_threshold),
            (a.gap_threshold, b.gap_threshold),
            (a.bound.exponent, b.bound.exponent),
        ] {
            specialization = specialization.max((x - y).abs() / x.abs().max(1.0));
        }
    }
    let absorption = (1..=100).all(|i| {
        let e = i as f64 / 100.0;
        let (a, b) = cor2_absorption(e);
        a <= 10.0 * e.sqrt() && b <= 5.0 * e.sqrt()
    });
    // 20 x 20 grid of (δ, H); δH grows with δ along each row
    let mut monotone = true;
    let grid: Vec<f64> = (0..20).map(|i| 0.01 + 0.01 * i as f64).collect();
    let hs: Vec<f64> = (0..20).map(|i| 50.0 + 50.0 * i as f64).collect();
    for w in grid.windows(2) {
        for &h in &hs {
            let lo = thm1_bound(2, 1, w[0], h, 693.0).unwrap();
            let hi = thm1_bound(2, 1, w[1], h, 693.0).unwrap();
            monotone &= hi.ln_tail <= lo.ln_tail && hi.proportion_lower_bound >= lo.proportion_lower_bound;
        }
    }
    let instance = thm1_bound(2, 1, 0.01, 1000.0, 693.0).unwrap();
    let near_one = !instance.vacuous && (instance.proportion_lower_bound - 1.0).abs() < 1e-12;
    verdict(
        10,
        specialization <= 1e-12 && absorption && monotone && near_one,
        start.elapsed(),
        Duration::from_secs(10),
        format!(
            "bound algebra: Cor 1 specialization err {specialization:.1e}, absorption {absorption}, \
             thm1 monotone {monotone}, (0.01, 1000) bound {} with ln tail {:.2}",
            instance.proportion_lower_bound, instance.ln_tail
        ),
    );
}
