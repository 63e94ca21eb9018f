//! Encoding sweeps over growing horizons and fluctuation trends.
//!
//! A sweep takes a source, a list of horizons `n` and an output-alphabet
//! schedule, and for every `n` measures how far the profiles of encoded
//! sources `f(X^(n))` sit from the convolution of `H(X^(n))` with the modular
//! profile of the output alphabets, together with the proportion of
//! encodings meeting both typicality conditions at level `εn`.
//!
//! Encodings act on the active alphabets of
//! [`MarkovSource::active_horizon_distribution`]. Row `n` draws trial `t`
//! from the ChaCha8 stream `t` keyed by [`row_seed`]`(seed, n)`, so reports
//! do not depend on thread scheduling.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{thm1_bound, thm1_delta, thm2_threshold, AsymptoticBound, BoundResult};
use crate::dist::{Caps, FluctuationReport, JointDistribution};
use crate::encoders::{pushforward, EncodingEnsemble, ProportionEstimate};
use crate::error::{Error, Result};
use crate::profiles::{
    convolve, entropy_profile_with_caps, max_norm_distance, profile_and_max_fluctuation, ModularProfile,
    ProfileFile, ProfileVector,
};
use crate::sources::SourceSpec;
use crate::subset::Subset;

/// Output alphabet sizes as a function of the horizon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum Schedule {
    /// Sizes listed per horizon.
    Explicit {
        #[serde(deserialize_with = "horizon_keys")]
        sizes: BTreeMap<usize, Vec<usize>>,
    },
    /// `2^⌈c n⌉` symbols for each of the `ell` encoded coordinates.
    Growth { c: f64 },
}

/// JSON object keys are strings, and the tagged-enum buffering does not
/// convert them back to integers on its own.
fn horizon_keys<'de, D: serde::Deserializer<'de>>(
    deserializer: D,
) -> std::result::Result<BTreeMap<usize, Vec<usize>>, D::Error> {
    let raw = BTreeMap::<String, Vec<usize>>::deserialize(deserializer)?;
    raw.into_iter()
        .map(|(k, v)| {
            k.trim()
                .parse()
                .map(|n| (n, v))
                .map_err(|_| serde::de::Error::custom(format!("horizon key {k:?} is not an integer")))
        })
        .collect()
}

impl Schedule {
    pub fn sizes(&self, n: usize, ell: usize) -> Result<Vec<usize>> {
        match self {
            Schedule::Explicit { sizes } => {
                let s = sizes
                    .get(&n)
                    .ok_or_else(|| Error::arg(format!("schedule has no sizes for n = {n}")))?;
                if s.len() != ell {
                    return Err(Error::shape(format!(
                        "schedule for n = {n} lists {} sizes, {ell} coordinates are encoded",
                        s.len()
                    )));
                }
                Ok(s.clone())
            }
            Schedule::Growth { c } => {
                if !(*c >= 0.0) {
                    return Err(Error::arg("growth rate must be non-negative"));
                }
                let bits = (c * n as f64 - 1e-9).ceil().max(0.0);
                if bits >= usize::BITS as f64 - 1.0 {
                    return Err(Error::capacity("output alphabet", u128::MAX, usize::MAX as u128));
                }
                Ok(vec![1usize << bits as u32; ell])
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// Every encoding of the (active) input alphabets.
    Exact,
    #[default]
    MonteCarlo,
}

fn default_trials() -> u64 {
    200
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub source: SourceSpec,
    pub horizons: Vec<usize>,
    pub schedule: Schedule,
    /// Number of leading coordinates encoded; all of them when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<usize>,
    pub epsilon: f64,
    /// Rate used for the asymptotic bound; half its admissibility threshold
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: SweepMode,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.horizons.is_empty() {
            return Err(Error::arg("at least one horizon is required"));
        }
        if self.horizons[0] == 0 || self.horizons.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::arg("horizons must be positive and strictly increasing"));
        }
        if self.trials == 0 {
            return Err(Error::arg("trials must be at least 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::arg(format!("epsilon {} outside (0, 1]", self.epsilon)));
        }
        if let Some(d) = self.delta {
            if !(d > 0.0) {
                return Err(Error::arg("delta must be positive"));
            }
        }
        Ok(())
    }
}

/// Seed of the random streams used for horizon `n`.
pub fn row_seed(seed: u64, n: usize) -> u64 {
    seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

impl Quantiles {
    /// Linear interpolation between order statistics.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let at = |q: f64| {
            let pos = q * (v.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
        };
        Some(Quantiles {
            min: v[0],
            q25: at(0.25),
            median: at(0.5),
            q75: at(0.75),
            max: v[v.len() - 1],
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub n: usize,
    pub feasible: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub output_sizes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measurements: Option<RowMeasurements>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowMeasurements {
    /// Sizes of the active input alphabets.
    pub active_sizes: Vec<usize>,
    /// `H(X^(n)) / n`.
    pub source_rates: ProfileFile,
    /// `ln |B^(n)| / n` on subsets of the encoded coordinates.
    pub output_rates: ProfileFile,
    /// `(H(X^(n)) / n) * (ln |B^(n)| / n)`.
    pub convolution: ProfileFile,
    /// `M'(X^(n)) / n`.
    pub source_fluctuation: f64,
    /// `‖H(f(X^(n))) / n − convolution‖_max` over the encodings tried.
    pub distance: Quantiles,
    /// `M'(f(X^(n))) / n` over the encodings tried.
    pub fluctuation: Quantiles,
    /// Per-subset median of `H(f(X^(n))) / n`.
    pub median_profile: ProfileFile,
    pub proportion: ProportionEstimate,
    pub thm1: BoundResult,
    pub thm1_hypotheses_hold: bool,
    pub thm2: AsymptoticBound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub rows: Vec<ExperimentRow>,
}

/// Runs every horizon of the sweep. Rows whose horizon exceeds a capacity
/// limit are marked infeasible and the sweep carries on.
pub fn run_experiment(spec: &ExperimentSpec, caps: &Caps) -> Result<ExperimentReport> {
    spec.validate()?;
    let source = spec.source.build()?;
    let k = source.k();
    let ell = spec.ell.unwrap_or(k);
    if ell > k {
        return Err(Error::arg(format!("ℓ = {ell} exceeds k = {k}")));
    }
    let mut rows = Vec::with_capacity(spec.horizons.len());
    for &n in &spec.horizons {
        let output_sizes = spec.schedule.sizes(n, ell)?;
        let outcome = source
            .active_horizon_distribution(n, caps)
            .and_then(|law| measure_row(spec, &law.dist, n, &output_sizes, caps));
        rows.push(match outcome {
            Ok(m) => ExperimentRow {
                n,
                feasible: true,
                error: None,
                output_sizes,
                measurements: Some(m),
            },
            Err(e @ Error::Capacity { .. }) => ExperimentRow {
                n,
                feasible: false,
                error: Some(e.to_string()),
                output_sizes,
                measurements: None,
            },
            Err(e) => return Err(e),
        });
    }
    Ok(ExperimentReport {
        spec: spec.clone(),
        rows,
    })
}

struct Trial {
    profile: ProfileVector,
    fluctuation: f64,
}

fn measure_row(
    spec: &ExperimentSpec,
    dist: &JointDistribution,
    n: usize,
    output_sizes: &[usize],
    caps: &Caps,
) -> Result<RowMeasurements> {
    let scale = 1.0 / n as f64;
    let (source_profile, source_m) = profile_and_max_fluctuation(dist)?;
    let ensemble = EncodingEnsemble::new(dist.space().clone(), output_sizes.to_vec())?;
    check_output_size(&ensemble, caps)?;
    let modular = ModularProfile::new(output_sizes.to_vec())?;
    let conv = convolve(&source_profile, modular.profile())?;

    let (count, exact) = match spec.mode {
        SweepMode::Exact => (ensemble.enumerable_count(caps)? as u64, true),
        SweepMode::MonteCarlo => (spec.trials, false),
    };
    let seed = row_seed(spec.seed, n);
    let trials: Vec<Trial> = (0..count)
        .into_par_iter()
        .map(|t| {
            let f = if exact {
                ensemble.encoding_at(t as u128)
            } else {
                ensemble.sample(seed, t)
            };
            let image = pushforward(dist, &f)?;
            let (profile, fluctuation) = profile_and_max_fluctuation(&image)?;
            Ok(Trial { profile, fluctuation })
        })
        .collect::<Result<_>>()?;

    let mut distances = Vec::with_capacity(trials.len());
    let mut fluctuations = Vec::with_capacity(trials.len());
    let mut good = 0u64;
    let limit = spec.epsilon * n as f64;
    for t in &trials {
        let d = max_norm_distance(&t.profile, &conv)?;
        if d <= limit && t.fluctuation <= limit {
            good += 1;
        }
        distances.push(d * scale);
        fluctuations.push(t.fluctuation * scale);
    }
    let median_profile = ProfileVector::from_fn(dist.k(), |s| {
        let vals: Vec<f64> = trials.iter().map(|t| t.profile.get(s) * scale).collect();
        Quantiles::of(&vals).map_or(0.0, |q| q.median)
    })?;
    let proportion = if exact {
        ProportionEstimate::exact(good, count)
    } else {
        ProportionEstimate::monte_carlo(good, count)
    };

    let ell = output_sizes.len();
    let h_total = source_profile.full();
    let thm1_delta_value = thm1_delta(spec.epsilon, ell);
    let thm1 = if h_total > 0.0 {
        thm1_bound(dist.k(), ell, thm1_delta_value, h_total, modular.total_log())?
    } else {
        BoundResult::from_exponent(f64::INFINITY, 0.0)
    };
    let prefix = dist.marginal(Subset::full(ell))?.entropy();
    let thm1_hypotheses_hold = h_total > prefix
        && h_total >= 2.0 * LN_2 / thm1_delta_value
        && h_total >= source_m / thm1_delta_value;

    let source_rates = source_profile.scale(scale);
    let output_rates = modular.profile().scale(scale);
    let thm2 = if source_rates.full() > 0.0 {
        let probe = thm2_threshold(&source_rates, &output_rates, spec.epsilon, 0.0, n)?;
        let delta = spec.delta.unwrap_or(probe.delta_threshold / 2.0);
        thm2_threshold(&source_rates, &output_rates, spec.epsilon, delta, n)?
    } else {
        AsymptoticBound {
            delta_threshold: 0.0,
            admissible: false,
            bound: BoundResult::from_exponent(f64::INFINITY, 0.0),
        }
    };

    Ok(RowMeasurements {
        active_sizes: dist.space().sizes().to_vec(),
        source_rates: source_rates.to_file(),
        output_rates: output_rates.to_file(),
        convolution: conv.scale(scale).to_file(),
        source_fluctuation: source_m * scale,
        distance: Quantiles::of(&distances).expect("at least one trial"),
        fluctuation: Quantiles::of(&fluctuations).expect("at least one trial"),
        median_profile: median_profile.to_file(),
        proportion,
        thm1,
        thm1_hypotheses_hold,
        thm2,
    })
}

fn check_output_size(ensemble: &EncodingEnsemble, caps: &Caps) -> Result<()> {
    caps.check_coords(ensemble.input().k())?;
    let out = ensemble.output().total_size();
    if out > caps.max_total_size {
        return Err(Error::capacity(
            "output space",
            out as u128,
            caps.max_total_size as u128,
        ));
    }
    Ok(())
}

/// Fluctuation trend request: a source and the horizons to evaluate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrendSpec {
    pub source: SourceSpec,
    pub horizons: Vec<usize>,
    /// Also report `M_rel(X_target^n | X_given^n)` from the explicit law.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditional: Option<ConditionalTrend>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionalTrend {
    pub target: Subset,
    pub given: Subset,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendMethod {
    /// Summation over type classes of an i.i.d. sequence.
    Types,
    /// Explicit law of the first `n` steps.
    Explicit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub n: usize,
    pub feasible: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<TrendMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entropy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_rel: Option<f64>,
    /// Only for i.i.d. sources.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_rel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditional_m_rel: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    pub spec: TrendSpec,
    /// `(ln #support − H) / H` of the single-step law, for i.i.d. sources.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_rel_limit: Option<f64>,
    pub rows: Vec<TrendRow>,
}

pub fn fluctuation_trend(spec: &TrendSpec, caps: &Caps) -> Result<TrendReport> {
    if spec.horizons.contains(&0) {
        return Err(Error::arg("horizons must be positive"));
    }
    let source = spec.source.build()?;
    if let Some(c) = spec.conditional {
        c.target.check_within(source.k())?;
        c.given.check_within(source.k())?;
        if !c.target.is_disjoint(c.given) {
            return Err(Error::arg("conditional target and given coordinates overlap"));
        }
    }
    let base = spec.source.iid_base().transpose()?;
    let d_rel_limit = base.as_ref().map(|b| {
        let r = b.fluctuation_report();
        if r.entropy > 0.0 {
            ((r.support_size as f64).ln() - r.entropy) / r.entropy
        } else {
            0.0
        }
    });
    let mut rows = Vec::with_capacity(spec.horizons.len());
    for &n in &spec.horizons {
        let row = (|| -> Result<TrendRow> {
            let mut row = TrendRow {
                n,
                feasible: true,
                error: None,
                method: None,
                entropy: None,
                m_rel: None,
                d_rel: None,
                conditional_m_rel: None,
            };
            let explicit = if base.is_none() || spec.conditional.is_some() {
                Some(source.active_horizon_distribution(n, caps)?.dist)
            } else {
                None
            };
            if let Some(b) = &base {
                let r = iid_fluctuation(b.mass(), n, caps)?;
                row.method = Some(TrendMethod::Types);
                row.entropy = Some(r.entropy);
                row.m_rel = Some(r.m_rel);
                row.d_rel = Some(r.d_rel);
            } else if let Some(d) = &explicit {
                let r = d.fluctuation_report();
                row.method = Some(TrendMethod::Explicit);
                row.entropy = Some(r.entropy);
                row.m_rel = Some(r.m_rel);
            }
            if let (Some(c), Some(d)) = (spec.conditional, &explicit) {
                row.conditional_m_rel = Some(d.conditional_fluctuation(c.target, c.given, None)?.relative);
            }
            Ok(row)
        })();
        rows.push(match row {
            Ok(r) => r,
            Err(e @ Error::Capacity { .. }) => TrendRow {
                n,
                feasible: false,
                error: Some(e.to_string()),
                method: None,
                entropy: None,
                m_rel: None,
                d_rel: None,
                conditional_m_rel: None,
            },
            Err(e) => return Err(e),
        });
    }
    Ok(TrendReport {
        spec: spec.clone(),
        d_rel_limit,
        rows,
    })
}

/// Fluctuation functionals of `n` i.i.d. copies of a law, summed over type
/// classes.
///
/// Atoms with equal probability are pooled: a sequence using class `j`
/// (probability `q_j`, multiplicity `m_j`) `c_j` times has information
/// `−Σ c_j ln q_j`, and the class-count vector `c` carries mass
/// `n! / Π c_j! · Π (m_j q_j)^{c_j}`.
pub fn iid_fluctuation(mass: &[f64], n: usize, caps: &Caps) -> Result<FluctuationReport> {
    let mut classes: Vec<(f64, usize)> = Vec::new();
    let mut atoms: Vec<f64> = mass.iter().copied().filter(|&p| p > crate::dist::ATOM_FLOOR).collect();
    atoms.sort_by(f64::total_cmp);
    for p in atoms {
        match classes.last_mut() {
            Some((q, m)) if (p - *q).abs() <= 1e-15 * q.max(1e-300) || p == *q => *m += 1,
            _ => classes.push((p, 1)),
        }
    }
    let r = classes.len();
    let count = binomial_u128(n + r - 1, r - 1);
    if count > caps.max_total_size as u128 {
        return Err(Error::capacity("type classes", count, caps.max_total_size as u128));
    }
    let support: usize = classes.iter().map(|c| c.1).sum();
    let h1: f64 = classes.iter().map(|&(q, m)| -(m as f64) * q * q.ln()).sum();
    let entropy = n as f64 * h1;
    let log_support = n as f64 * (support as f64).ln();

    let log_fact: Vec<f64> = std::iter::once(0.0)
        .chain((1..=n).scan(0.0, |acc, i| {
            *acc += (i as f64).ln();
            Some(*acc)
        }))
        .collect();
    let ln_q: Vec<f64> = classes.iter().map(|c| c.0.ln()).collect();
    let ln_mq: Vec<f64> = classes.iter().map(|&(q, m)| (m as f64 * q).ln()).collect();

    let mut m = [0.0f64; 2];
    let mut d = [0.0f64; 2];
    let mut counts = vec![0usize; r];
    for_each_composition(&mut counts, 0, n, &mut |counts| {
        let mut log_mass = log_fact[n];
        let mut info = 0.0;
        for j in 0..r {
            log_mass += counts[j] as f64 * ln_mq[j] - log_fact[counts[j]];
            info -= counts[j] as f64 * ln_q[j];
        }
        let w = log_mass.exp();
        let dm = info - entropy;
        m[usize::from(dm < 0.0)] += w * dm.abs();
        let dd = info - log_support;
        d[usize::from(dd < 0.0)] += w * dd.abs();
    });
    let m_total = m[0] + m[1];
    let d_total = d[0] + d[1];
    let (m_rel, d_rel) = if entropy > 0.0 {
        (m_total / entropy, d_total / entropy)
    } else {
        (0.0, 0.0)
    };
    Ok(FluctuationReport {
        entropy,
        m: m_total,
        m_plus: m[0],
        m_minus: m[1],
        d: d_total,
        d_plus: d[0],
        d_minus: d[1],
        m_rel,
        d_rel,
        kl_to_uniform_support: d_total - 2.0 * d[0],
        support_size: support.checked_pow(n as u32).unwrap_or(usize::MAX),
    })
}

/// Calls `visit` on every way of writing `total` as an ordered sum of
/// `counts.len()` non-negative parts.
fn for_each_composition(counts: &mut [usize], pos: usize, total: usize, visit: &mut impl FnMut(&[usize])) {
    if pos + 1 == counts.len() {
        counts[pos] = total;
        visit(counts);
        return;
    }
    for v in 0..=total {
        counts[pos] = v;
        for_each_composition(counts, pos + 1, total - v, visit);
    }
}

fn binomial_u128(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Entropy profile of a source's explicit law at horizon `n`, scaled by `1/n`.
pub fn scaled_profile(spec: &SourceSpec, n: usize, caps: &Caps) -> Result<ProfileVector> {
    let law = spec.build()?.active_horizon_distribution(n, caps)?;
    Ok(entropy_profile_with_caps(&law.dist, caps)?.scale(1.0 / n as f64))
}
