//! Coordinate-wise encodings of the first `ℓ` coordinates.
//!
//! An encoding replaces coordinate `i < ℓ` by `f_i(x_i)` with
//! `f_i: A_i → B_i` and leaves the remaining coordinates untouched. The
//! ensemble of all such encodings carries the counting measure, which is
//! realized for sampling by drawing every table entry independently and
//! uniformly.
//!
//! Random streams are ChaCha8 seeded with the master seed through
//! `seed_from_u64` and switched to stream number `trial` with `set_stream`.
//! Table entries are drawn in coordinate order, symbol order, with
//! `gen_range(0..|B_i|)`. The same `(seed, trial)` therefore always yields the
//! same encoding regardless of how trials are scheduled.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{Caps, JointDistribution, ProductSpace};
use crate::error::{Error, Result};
use crate::profiles::{
    convolve, entropy_profile, max_norm_distance, profile_and_max_fluctuation, ModularProfile,
    ProfileVector,
};
use crate::subset::Subset;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Encoding {
    tables: Vec<Vec<u32>>,
    output_sizes: Vec<usize>,
}

impl Encoding {
    pub fn new(tables: Vec<Vec<u32>>, output_sizes: Vec<usize>) -> Result<Self> {
        if tables.len() != output_sizes.len() {
            return Err(Error::shape(format!(
                "{} tables for {} output alphabets",
                tables.len(),
                output_sizes.len()
            )));
        }
        for (i, (t, &b)) in tables.iter().zip(&output_sizes).enumerate() {
            if let Some(bad) = t.iter().find(|&&y| y as usize >= b) {
                return Err(Error::arg(format!(
                    "table {} maps to {bad}, outside an alphabet of size {b}",
                    i + 1
                )));
            }
        }
        Ok(Encoding {
            tables,
            output_sizes,
        })
    }

    /// The identity on the first `ell` coordinates of `space`.
    pub fn identity(space: &ProductSpace, ell: usize) -> Result<Self> {
        if ell > space.k() {
            return Err(Error::arg(format!(
                "cannot encode {ell} of {} coordinates",
                space.k()
            )));
        }
        let sizes = space.sizes()[..ell].to_vec();
        let tables = sizes.iter().map(|&a| (0..a as u32).collect()).collect();
        Encoding::new(tables, sizes)
    }

    /// Sends every symbol of coordinate `i < ℓ` to 0.
    pub fn constant(input_sizes: &[usize], output_sizes: Vec<usize>) -> Result<Self> {
        let tables = input_sizes.iter().map(|&a| vec![0; a]).collect();
        Encoding::new(tables, output_sizes)
    }

    pub fn ell(&self) -> usize {
        self.tables.len()
    }

    pub fn tables(&self) -> &[Vec<u32>] {
        &self.tables
    }

    pub fn output_sizes(&self) -> &[usize] {
        &self.output_sizes
    }

    /// Image of a symbol tuple.
    pub fn apply(&self, digits: &[usize]) -> Vec<usize> {
        digits
            .iter()
            .enumerate()
            .map(|(i, &x)| match self.tables.get(i) {
                Some(t) => t[x] as usize,
                None => x,
            })
            .collect()
    }

    /// Restriction to the coordinates in `subset` (in increasing order),
    /// acting on the marginal space of those coordinates. Encoded coordinates
    /// of the subset come first, so the result is again an encoding of a
    /// prefix.
    pub fn restrict(&self, subset: Subset) -> Encoding {
        let mut tables = Vec::new();
        let mut output_sizes = Vec::new();
        for i in subset.indices().take_while(|&i| i < self.ell()) {
            tables.push(self.tables[i].clone());
            output_sizes.push(self.output_sizes[i]);
        }
        Encoding {
            tables,
            output_sizes,
        }
    }
}

/// Number of encodings in an ensemble, exact while it fits in 128 bits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodingCount {
    pub exact: Option<u128>,
    pub ln: f64,
}

/// The set of all coordinate-wise encodings of the first `ℓ` coordinates of
/// `input` into alphabets of the given sizes.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodingEnsemble {
    input: ProductSpace,
    output_sizes: Vec<usize>,
    output: ProductSpace,
}

impl EncodingEnsemble {
    pub fn new(input: ProductSpace, output_sizes: Vec<usize>) -> Result<Self> {
        if output_sizes.len() > input.k() {
            return Err(Error::arg(format!(
                "cannot encode {} of {} coordinates",
                output_sizes.len(),
                input.k()
            )));
        }
        if output_sizes.iter().any(|&b| b == 0 || b > u32::MAX as usize) {
            return Err(Error::arg("output alphabet sizes must be in 1..2^32"));
        }
        let sizes: Vec<usize> = output_sizes
            .iter()
            .copied()
            .chain(input.sizes()[output_sizes.len()..].iter().copied())
            .collect();
        let output = ProductSpace::from_sizes(&sizes)?;
        Ok(EncodingEnsemble {
            input,
            output_sizes,
            output,
        })
    }

    pub fn input(&self) -> &ProductSpace {
        &self.input
    }

    pub fn output(&self) -> &ProductSpace {
        &self.output
    }

    pub fn ell(&self) -> usize {
        self.output_sizes.len()
    }

    pub fn output_sizes(&self) -> &[usize] {
        &self.output_sizes
    }

    pub fn modular(&self) -> ModularProfile {
        ModularProfile::new(self.output_sizes.clone()).expect("sizes validated on construction")
    }

    /// `∏_{i<ℓ} |B_i|^{|A_i|}`.
    pub fn total_count(&self) -> EncodingCount {
        let mut exact = Some(1u128);
        let mut ln = 0.0;
        for (&a, &b) in self.input.sizes().iter().zip(&self.output_sizes) {
            ln += a as f64 * (b as f64).ln();
            exact = exact.and_then(|e| {
                u32::try_from(a)
                    .ok()
                    .and_then(|a| (b as u128).checked_pow(a))
                    .and_then(|p| e.checked_mul(p))
            });
        }
        EncodingCount { exact, ln }
    }

    /// Independent uniform table entries from the `(seed, trial)` stream.
    pub fn sample(&self, seed: u64, trial: u64) -> Encoding {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        self.sample_with(&mut rng)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> Encoding {
        let tables = self
            .input
            .sizes()
            .iter()
            .zip(&self.output_sizes)
            .map(|(&a, &b)| (0..a).map(|_| rng.gen_range(0..b as u32)).collect())
            .collect();
        Encoding {
            tables,
            output_sizes: self.output_sizes.clone(),
        }
    }

    /// The `index`-th encoding in mixed-radix order, the last entry of the
    /// last table varying fastest.
    pub fn encoding_at(&self, mut index: u128) -> Encoding {
        let mut tables: Vec<Vec<u32>> = self
            .input
            .sizes()
            .iter()
            .take(self.ell())
            .map(|&a| vec![0; a])
            .collect();
        for (t, &b) in tables.iter_mut().zip(&self.output_sizes).rev() {
            for entry in t.iter_mut().rev() {
                *entry = (index % b as u128) as u32;
                index /= b as u128;
            }
        }
        Encoding {
            tables,
            output_sizes: self.output_sizes.clone(),
        }
    }

    /// Exact count when the ensemble may be enumerated under `caps`.
    pub fn enumerable_count(&self, caps: &Caps) -> Result<u128> {
        let count = self.total_count();
        match count.exact {
            Some(n) if n <= caps.max_encodings => Ok(n),
            Some(n) => Err(Error::capacity("encoding enumeration", n, caps.max_encodings)),
            None => Err(Error::capacity(
                "encoding enumeration",
                u128::MAX,
                caps.max_encodings,
            )),
        }
    }

    /// Every encoding exactly once, in mixed-radix order.
    pub fn enumerate(&self) -> Result<impl Iterator<Item = Encoding> + '_> {
        self.enumerate_with_caps(&Caps::default())
    }

    pub fn enumerate_with_caps(
        &self,
        caps: &Caps,
    ) -> Result<impl Iterator<Item = Encoding> + '_> {
        let n = self.enumerable_count(caps)?;
        Ok((0..n).map(move |i| self.encoding_at(i)))
    }

    pub fn encoding_from_tables(&self, tables: Vec<Vec<u32>>) -> Result<Encoding> {
        if tables.len() != self.ell() {
            return Err(Error::shape(format!(
                "{} tables for an ensemble encoding {} coordinates",
                tables.len(),
                self.ell()
            )));
        }
        for (i, (t, &a)) in tables.iter().zip(self.input.sizes()).enumerate() {
            if t.len() != a {
                return Err(Error::shape(format!(
                    "table {} has {} entries, alphabet has {a}",
                    i + 1,
                    t.len()
                )));
            }
        }
        Encoding::new(tables, self.output_sizes.clone())
    }

    fn check(&self, f: &Encoding) -> Result<()> {
        if f.output_sizes != self.output_sizes
            || f.tables
                .iter()
                .zip(self.input.sizes())
                .any(|(t, &a)| t.len() != a)
        {
            return Err(Error::shape("encoding does not belong to the ensemble"));
        }
        Ok(())
    }
}

/// Law of `f(X)`.
pub fn pushforward(dist: &JointDistribution, f: &Encoding) -> Result<JointDistribution> {
    let ensemble = EncodingEnsemble::new(dist.space().clone(), f.output_sizes.clone())?;
    ensemble.check(f)?;
    Ok(pushforward_unchecked(dist, f, ensemble.output))
}

fn pushforward_unchecked(
    dist: &JointDistribution,
    f: &Encoding,
    output: ProductSpace,
) -> JointDistribution {
    let in_sizes = dist.space().sizes();
    let k = in_sizes.len();
    let out_sizes = output.sizes();
    let mut out_strides = vec![1usize; k];
    for i in (0..k.saturating_sub(1)).rev() {
        out_strides[i] = out_strides[i + 1] * out_sizes[i + 1];
    }
    // contribution of symbol a at coordinate i to the output flat index
    let contrib: Vec<Vec<usize>> = (0..k)
        .map(|i| {
            (0..in_sizes[i])
                .map(|a| {
                    let y = f.tables.get(i).map_or(a, |t| t[a] as usize);
                    y * out_strides[i]
                })
                .collect()
        })
        .collect();
    let mut mass = vec![0.0; output.total_size()];
    let mut digits = vec![0usize; k];
    let mut current: usize = contrib.iter().map(|c| c[0]).sum();
    for &p in dist.mass() {
        mass[current] += p;
        for i in (0..k).rev() {
            let d = digits[i];
            if d + 1 < in_sizes[i] {
                current = current + contrib[i][d + 1] - contrib[i][d];
                digits[i] = d + 1;
                break;
            }
            current = current + contrib[i][0] - contrib[i][d];
            digits[i] = 0;
        }
    }
    JointDistribution::new(output, mass).unwrap_or_else(|_| unreachable!("mass is preserved"))
}

/// Which property of `f(X)` counts as success.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Criterion {
    /// `M'(f(X)) ≤ εH` and `‖H(f(X)) − H(X) * H(B)‖_max ≤ εH`.
    Typical { epsilon: f64, h: f64 },
    /// `M(f_i(X_i) | Y) ≤ max_fluctuation` and
    /// `|H(f_i(X_i) | Y) − min(H(X_i | Y), ln |B_i|)| ≤ max_gap`, where `Y`
    /// is the (unencoded or encoded) sub-vector on `given`.
    Conditional {
        target: usize,
        given: Subset,
        max_fluctuation: f64,
        max_gap: f64,
    },
}

/// Measurements taken on one encoding.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `M'(f(X))`, or `M(f(X_i)|Y)` for the conditional criterion.
    pub fluctuation: f64,
    /// Max-norm distance to the convolution, or the entropy gap for the
    /// conditional criterion.
    pub distance: f64,
    pub good: bool,
}

/// A criterion bound to a source and an ensemble, with everything that does
/// not depend on the encoding computed once.
#[derive(Clone, Debug)]
pub struct GoodnessTest<'a> {
    dist: &'a JointDistribution,
    ensemble: EncodingEnsemble,
    criterion: Criterion,
    target: Target,
}

#[derive(Clone, Debug)]
enum Target {
    Convolution(ProfileVector),
    Rate(f64),
}

impl<'a> GoodnessTest<'a> {
    pub fn new(
        dist: &'a JointDistribution,
        ensemble: &EncodingEnsemble,
        criterion: Criterion,
    ) -> Result<Self> {
        if dist.space() != ensemble.input() {
            return Err(Error::shape("distribution and ensemble spaces differ"));
        }
        let target = match criterion {
            Criterion::Typical { epsilon, h } => {
                if !(epsilon > 0.0 && epsilon <= 1.0) {
                    return Err(Error::arg(format!("epsilon {epsilon} outside (0, 1]")));
                }
                if h <= 0.0 {
                    return Err(Error::arg("H must be positive"));
                }
                let conv = convolve(&entropy_profile(dist)?, ensemble.modular().profile())?;
                Target::Convolution(conv)
            }
            Criterion::Conditional { target, given, .. } => {
                if target >= ensemble.ell() {
                    return Err(Error::arg(format!(
                        "coordinate {} is not encoded",
                        target + 1
                    )));
                }
                if given.contains(target) {
                    return Err(Error::arg("target coordinate is also conditioned on"));
                }
                given.check_within(dist.k())?;
                let h_cond = dist.conditional_entropy(Subset::singleton(target), given)?;
                let ln_b = (ensemble.output_sizes()[target] as f64).ln();
                Target::Rate(h_cond.min(ln_b))
            }
        };
        Ok(GoodnessTest {
            dist,
            ensemble: ensemble.clone(),
            criterion,
            target,
        })
    }

    pub fn ensemble(&self) -> &EncodingEnsemble {
        &self.ensemble
    }

    pub fn evaluate(&self, f: &Encoding) -> Result<Diagnostics> {
        self.ensemble.check(f)?;
        let image = pushforward_unchecked(self.dist, f, self.ensemble.output.clone());
        Ok(match (&self.criterion, &self.target) {
            (Criterion::Typical { epsilon, h }, Target::Convolution(conv)) => {
                let (profile, fluctuation) = profile_and_max_fluctuation(&image)?;
                let distance = max_norm_distance(&profile, conv)?;
                let bound = epsilon * h;
                Diagnostics {
                    fluctuation,
                    distance,
                    good: fluctuation <= bound && distance <= bound,
                }
            }
            (
                Criterion::Conditional {
                    target,
                    given,
                    max_fluctuation,
                    max_gap,
                },
                Target::Rate(rate),
            ) => {
                let cf = image.conditional_fluctuation(Subset::singleton(*target), *given, None)?;
                let gap = (cf.entropy - rate).abs();
                Diagnostics {
                    fluctuation: cf.total,
                    distance: gap,
                    good: cf.total <= *max_fluctuation && gap <= *max_gap,
                }
            }
            _ => unreachable!("target matches criterion"),
        })
    }
}

/// Checks the two typicality conditions for a single encoding.
pub fn good_encoding_test(
    dist: &JointDistribution,
    f: &Encoding,
    modular: &ModularProfile,
    epsilon: f64,
    h: f64,
) -> Result<Diagnostics> {
    let ensemble = EncodingEnsemble::new(dist.space().clone(), modular.sizes().to_vec())?;
    GoodnessTest::new(dist, &ensemble, Criterion::Typical { epsilon, h })?.evaluate(f)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Mode {
    Exact,
    MonteCarlo { trials: u64, seed: u64 },
}

/// Share of good encodings, exact or estimated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProportionEstimate {
    pub good: u64,
    pub trials: u64,
    pub proportion: f64,
    pub exact: bool,
    /// Wilson 95% interval for Monte Carlo estimates, the point itself when
    /// exact.
    pub lower: f64,
    pub upper: f64,
}

impl ProportionEstimate {
    pub fn exact(good: u64, total: u64) -> Self {
        let p = good as f64 / total as f64;
        ProportionEstimate {
            good,
            trials: total,
            proportion: p,
            exact: true,
            lower: p,
            upper: p,
        }
    }

    pub fn monte_carlo(good: u64, trials: u64) -> Self {
        let (lower, upper) = wilson_interval(good, trials, WILSON_Z95);
        ProportionEstimate {
            good,
            trials,
            proportion: good as f64 / trials as f64,
            exact: false,
            lower,
            upper,
        }
    }

    pub fn contains(&self, p: f64) -> bool {
        self.lower <= p && p <= self.upper
    }
}

/// Two-sided 95% normal quantile.
pub const WILSON_Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Proportion of encodings satisfying `criterion`.
pub fn proportion_good(
    dist: &JointDistribution,
    ensemble: &EncodingEnsemble,
    criterion: Criterion,
    mode: Mode,
) -> Result<ProportionEstimate> {
    proportion_good_with_caps(dist, ensemble, criterion, mode, &Caps::default())
}

pub fn proportion_good_with_caps(
    dist: &JointDistribution,
    ensemble: &EncodingEnsemble,
    criterion: Criterion,
    mode: Mode,
    caps: &Caps,
) -> Result<ProportionEstimate> {
    let test = GoodnessTest::new(dist, ensemble, criterion)?;
    match mode {
        Mode::Exact => {
            let total = ensemble.enumerable_count(caps)? as u64;
            let good = count_good(&test, total, |i| ensemble.encoding_at(i as u128))?;
            Ok(ProportionEstimate::exact(good, total))
        }
        Mode::MonteCarlo { trials, seed } => {
            if trials == 0 {
                return Err(Error::arg("at least one trial is required"));
            }
            let good = count_good(&test, trials, |t| ensemble.sample(seed, t))?;
            Ok(ProportionEstimate::monte_carlo(good, trials))
        }
    }
}

fn count_good(
    test: &GoodnessTest<'_>,
    n: u64,
    make: impl Fn(u64) -> Encoding + Sync,
) -> Result<u64> {
    (0..n)
        .into_par_iter()
        .map(|i| test.evaluate(&make(i)).map(|d| u64::from(d.good)))
        .try_reduce(|| 0, |a, b| Ok(a + b))
}
