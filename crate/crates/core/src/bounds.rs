//! Closed-form proportion bounds and exhaustive checks of the lemmas small
//! enough to enumerate.
//!
//! Every bound has the shape `1 - C exp(E)` where `E` contains a doubly
//! exponential term. Evaluation stays in log space: `ln_tail = ln C + E` and
//! the bound is `-expm1(ln_tail)`, so `e^{δH}` overflowing to infinity just
//! drives the bound to exactly 1.
//!
//! The evaluators never check hypotheses. Separate checkers report each
//! hypothesis with the value it was compared against.

use std::f64::consts::LN_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{fluctuation_of, entropy_of, JointDistribution, SubProbability};
use crate::encoders::ProportionEstimate;
use crate::error::{Error, Result};
use crate::profiles::{ProfileFile, ProfileVector};
use crate::subset::Subset;

/// Largest domain [`small_atoms_check`] enumerates.
pub const SMALL_ATOMS_MAX_POINTS: usize = 12;
/// Largest number of colors [`small_atoms_check`] enumerates.
pub const SMALL_ATOMS_MAX_COLORS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    /// Argument of the outer `exp`, without the prefactor.
    #[serde(with = "crate::extended")]
    pub exponent: f64,
    /// `ln C` for the multiplicative prefactor `C` in front of the `exp`.
    pub log_prefactor: f64,
    /// `ln(1 - bound)`.
    #[serde(with = "crate::extended")]
    pub ln_tail: f64,
    #[serde(with = "crate::extended")]
    pub proportion_lower_bound: f64,
    /// The bound is at most zero and says nothing.
    pub vacuous: bool,
    /// The bound rounds to exactly 1 in double precision.
    pub saturated: bool,
}

impl BoundResult {
    pub fn from_exponent(exponent: f64, log_prefactor: f64) -> Self {
        let ln_tail = exponent + log_prefactor;
        let bound = if ln_tail.is_nan() {
            f64::NAN
        } else {
            -ln_tail.exp_m1()
        };
        BoundResult {
            exponent,
            log_prefactor,
            ln_tail,
            proportion_lower_bound: bound,
            vacuous: ln_tail >= 0.0,
            saturated: bound == 1.0,
        }
    }
}

/// `(ln 2 / 2) e^x`, infinite once it leaves the double range.
fn doubly_exponential(x: f64) -> f64 {
    (x + (LN_2 / 2.0).ln()).exp()
}

fn check_epsilon(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(Error::arg(format!("epsilon {eps} outside (0, 1]")))
    }
}

/// `(ε / 121)^(2^ℓ)`.
pub fn thm1_delta(epsilon: f64, ell: usize) -> f64 {
    (epsilon / 121.0).powf(2f64.powi(ell as i32))
}

/// `1 - ℓ 2^(k-1) exp(-(ln 2 / 2) e^{δH} + ln|B_1 .. B_ℓ| + 2H)`.
pub fn thm1_bound(k: usize, ell: usize, delta: f64, h: f64, output_log_size: f64) -> Result<BoundResult> {
    if ell > k || k == 0 {
        return Err(Error::arg(format!("need 1 ≤ k and ℓ ≤ k, got k = {k}, ℓ = {ell}")));
    }
    if !(delta > 0.0) || !(h > 0.0) {
        return Err(Error::arg("δ and H must be positive"));
    }
    let exponent = -doubly_exponential(delta * h) + output_log_size + 2.0 * h;
    let log_prefactor = if ell == 0 {
        f64::NEG_INFINITY
    } else {
        (ell as f64).ln() + (k - 1) as f64 * LN_2
    };
    Ok(BoundResult::from_exponent(exponent, log_prefactor))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub condition: String,
    /// Left-hand side of the condition.
    pub value: f64,
    /// Right-hand side of the condition.
    pub threshold: f64,
    pub holds: bool,
}

impl HypothesisCheck {
    fn at_least(condition: &str, value: f64, threshold: f64) -> Self {
        HypothesisCheck {
            condition: condition.to_string(),
            value,
            threshold,
            holds: value >= threshold,
        }
    }

    fn above(condition: &str, value: f64, threshold: f64) -> Self {
        HypothesisCheck {
            condition: condition.to_string(),
            value,
            threshold,
            holds: value > threshold,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub checks: Vec<HypothesisCheck>,
    pub all_hold: bool,
}

impl HypothesisReport {
    fn new(checks: Vec<HypothesisCheck>) -> Self {
        let all_hold = checks.iter().all(|c| c.holds);
        HypothesisReport { checks, all_hold }
    }
}

/// Hypotheses of the single-shot typicality bound: `H > H(X_1, .., X_ℓ)`,
/// `H ≥ 2 ln 2 / δ` and `H ≥ M'(X) / δ`, with `δ = (ε/121)^(2^ℓ)`.
///
/// The first condition compares against the joint entropy of the encoded
/// coordinates.
pub fn thm1_hypotheses(dist: &JointDistribution, ell: usize, epsilon: f64, h: f64) -> Result<HypothesisReport> {
    check_epsilon(epsilon)?;
    if ell > dist.k() {
        return Err(Error::arg(format!("ℓ = {ell} exceeds k = {}", dist.k())));
    }
    let delta = thm1_delta(epsilon, ell);
    let prefix = dist.marginal(Subset::full(ell))?.entropy();
    let m = dist.max_fluctuation()?;
    Ok(HypothesisReport::new(vec![
        HypothesisCheck::above("H > H(X_1..X_l)", h, prefix),
        HypothesisCheck::at_least("H >= 2 ln 2 / delta", h, 2.0 * LN_2 / delta),
        HypothesisCheck::at_least("H >= M'(X) / delta", h, m / delta),
    ]))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticBound {
    /// `(min(ε, h_full) / (121 h_full))^(2^ℓ)`.
    pub delta_threshold: f64,
    pub admissible: bool,
    /// `1 - exp(-e^{δn})`.
    pub bound: BoundResult,
}

/// Admissibility of `δ` and the asymptotic bound `1 - exp(-e^{δn})`, where
/// `ℓ` is the number of coordinates of the rate vector `b`. `ε` above 1 is
/// evaluated too, so the `min(ε, h_full)` branch can be reached when
/// `h_full > 1`.
pub fn thm2_threshold(
    h: &ProfileVector,
    b: &ProfileVector,
    epsilon: f64,
    delta: f64,
    n: usize,
) -> Result<AsymptoticBound> {
    if !(epsilon > 0.0) {
        return Err(Error::arg("epsilon must be positive"));
    }
    if b.k() > h.k() {
        return Err(Error::shape(format!(
            "output rates cover {} coordinates, source only {}",
            b.k(),
            h.k()
        )));
    }
    let h_full = h.full();
    if !(h_full > 0.0) {
        return Err(Error::domain("total entropy rate must be positive"));
    }
    let delta_threshold = (epsilon.min(h_full) / (121.0 * h_full)).powf(2f64.powi(b.k() as i32));
    let exponent = -(delta * n as f64).exp();
    Ok(AsymptoticBound {
        delta_threshold,
        admissible: delta < delta_threshold,
        bound: BoundResult::from_exponent(exponent, 0.0),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallAtomsReport {
    pub points: usize,
    pub colors: usize,
    pub epsilon: f64,
    pub max_atom: f64,
    pub good: u64,
    pub total: u64,
    pub proportion: f64,
    pub bound: BoundResult,
    pub pass: bool,
}

/// `1 - k exp(-(ε / (2kq)) ln(1 + ε))` with `q` the largest atom.
pub fn small_atoms_bound(colors: usize, epsilon: f64, max_atom: f64) -> BoundResult {
    let exponent = if max_atom > 0.0 {
        -(epsilon / (2.0 * colors as f64 * max_atom)) * epsilon.ln_1p()
    } else {
        f64::NEG_INFINITY
    };
    BoundResult::from_exponent(exponent, (colors as f64).ln())
}

/// Enumerates every coloring `f` of the atoms with `colors` colors and counts
/// those with `P(f^{-1}(j)) ≤ (1 + ε) / colors` for every color `j`.
pub fn small_atoms_check(p: &SubProbability, colors: usize, epsilon: f64) -> Result<SmallAtomsReport> {
    if colors == 0 {
        return Err(Error::arg("need at least one color"));
    }
    if !(epsilon > 0.0) {
        return Err(Error::arg("epsilon must be positive"));
    }
    let points = p.len();
    if points > SMALL_ATOMS_MAX_POINTS || colors > SMALL_ATOMS_MAX_COLORS {
        return Err(Error::capacity(
            "coloring enumeration",
            (colors as u128).saturating_pow(points as u32),
            (SMALL_ATOMS_MAX_COLORS as u128).pow(SMALL_ATOMS_MAX_POINTS as u32),
        ));
    }
    let total = (colors as u64).pow(points as u32);
    let limit = (1.0 + epsilon) / colors as f64 + 1e-12;
    let mass = p.mass();
    let good: u64 = (0..total)
        .into_par_iter()
        .map(|mut code| {
            let mut load = [0.0f64; SMALL_ATOMS_MAX_COLORS];
            for &m in mass {
                load[(code % colors as u64) as usize] += m;
                code /= colors as u64;
            }
            u64::from(load[..colors].iter().all(|&l| l <= limit))
        })
        .sum();
    let proportion = good as f64 / total as f64;
    let max_atom = p.max_atom();
    let bound = small_atoms_bound(colors, epsilon, max_atom);
    Ok(SmallAtomsReport {
        points,
        colors,
        epsilon,
        max_atom,
        good,
        total,
        proportion,
        pass: bound.vacuous || proportion >= bound.proportion_lower_bound,
        bound,
    })
}

/// Parameters of the conditional single-coordinate encoding bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionalInputs {
    /// `H(X | Y)`.
    pub h_x_given_y: f64,
    /// `H(Y)`.
    pub h_y: f64,
    /// `ln |B|`.
    pub ln_b: f64,
    /// `M(X | Y)`.
    pub m_x_given_y: f64,
    /// `M(Y)`.
    pub m_y: f64,
    pub t1: f64,
    pub t2: f64,
    pub r: f64,
    pub s: f64,
    pub delta: f64,
}

impl ConditionalInputs {
    /// Reads the entropies and fluctuations off a joint law, with `X` the
    /// coordinates in `x` and `Y` those in `y`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_joint(
        dist: &JointDistribution,
        x: Subset,
        y: Subset,
        ln_b: f64,
        t1: f64,
        t2: f64,
        r: f64,
        s: f64,
        delta: f64,
    ) -> Result<Self> {
        let cond = dist.conditional_fluctuation(x, y, None)?;
        let y_law = dist.marginal(y)?;
        Ok(ConditionalInputs {
            h_x_given_y: cond.entropy,
            h_y: y_law.entropy(),
            ln_b,
            m_x_given_y: cond.total,
            m_y: y_law.mean_fluctuation(),
            t1,
            t2,
            r,
            s,
            delta,
        })
    }

    fn validate(&self) -> Result<()> {
        if !(self.t1 > 0.0 && self.t2 > 0.0 && self.delta > 0.0) {
            return Err(Error::arg("t1, t2 and δ must be positive"));
        }
        if !(self.r > 0.0 && self.r < 1.0 && self.s > 0.0 && self.s < 1.0) {
            return Err(Error::arg("r and s must lie in (0, 1)"));
        }
        if self.ln_b < 0.0 || self.m_x_given_y < 0.0 || self.m_y < 0.0 || self.h_y < 0.0 {
            return Err(Error::arg("sizes, entropies and fluctuations must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodingBound {
    /// `min(H(X | Y), ln |B|)`.
    pub rate: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Allowed `M(f(X) | Y)`.
    pub fluctuation_threshold: f64,
    /// Allowed `|H(f(X) | Y) - rate|`.
    pub gap_threshold: f64,
    pub bound: BoundResult,
}

/// Thresholds `2γR + 2δ + 4 ln 2`, `γR + δ + 2 ln 2` and the bound
/// `1 - exp(-(ln 2 / 2) e^{δ + H(X|Y) - R - α^r t1} + ln|B| + H(Y) + β^s t2)`.
pub fn conditional_encoding_bound(inputs: &ConditionalInputs) -> Result<EncodingBound> {
    inputs.validate()?;
    let rate = inputs.h_x_given_y.min(inputs.ln_b);
    let alpha = inputs.m_x_given_y / inputs.t1;
    let beta = inputs.m_y / inputs.t2;
    let gamma = alpha.powf(1.0 - inputs.r) + beta.powf(1.0 - inputs.s);
    let inner = inputs.delta + inputs.h_x_given_y - rate - alpha.powf(inputs.r) * inputs.t1;
    let exponent = -doubly_exponential(inner) + inputs.ln_b + inputs.h_y + beta.powf(inputs.s) * inputs.t2;
    Ok(EncodingBound {
        rate,
        alpha,
        beta,
        gamma,
        fluctuation_threshold: 2.0 * gamma * rate + 2.0 * inputs.delta + 4.0 * LN_2,
        gap_threshold: gamma * rate + inputs.delta + 2.0 * LN_2,
        bound: BoundResult::from_exponent(exponent, 0.0),
    })
}

/// Parameters of the unconditional single-variable bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingleInputs {
    pub h_x: f64,
    pub ln_b: f64,
    pub m_x: f64,
    pub t: f64,
    pub r: f64,
    pub delta: f64,
}

/// Thresholds `2α^{1-r}R + 2δ + 4 ln 2`, `α^{1-r}R + δ + 2 ln 2` and the
/// bound `1 - exp(-(ln 2 / 2) e^{δ + H(X) - R - α^r t} + ln|B|)`.
pub fn cor1_bound(inputs: &SingleInputs) -> Result<EncodingBound> {
    if !(inputs.t > 0.0 && inputs.delta > 0.0) {
        return Err(Error::arg("t and δ must be positive"));
    }
    let rate = inputs.h_x.min(inputs.ln_b);
    let alpha = inputs.m_x / inputs.t;
    let gamma = alpha.powf(1.0 - inputs.r);
    let inner = inputs.delta + inputs.h_x - rate - alpha.powf(inputs.r) * inputs.t;
    let exponent = -doubly_exponential(inner) + inputs.ln_b;
    Ok(EncodingBound {
        rate,
        alpha,
        beta: 0.0,
        gamma,
        fluctuation_threshold: 2.0 * gamma * rate + 2.0 * inputs.delta + 4.0 * LN_2,
        gap_threshold: gamma * rate + inputs.delta + 2.0 * LN_2,
        bound: BoundResult::from_exponent(exponent, 0.0),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplifiedBound {
    /// `10 √ε H`.
    pub fluctuation_threshold: f64,
    /// `5 √ε H`.
    pub gap_threshold: f64,
    pub bound: BoundResult,
}

/// Thresholds `10√ε H`, `5√ε H` and the bound
/// `1 - exp(-(ln 2 / 2) e^{εH} + ln|B| + 2H)`.
///
/// Any positive `ε` is evaluated; `ε ≤ 1` is one of the hypotheses, checked
/// by [`simplified_hypotheses`].
pub fn simplified_encoding_bound(h: f64, epsilon: f64, ln_b: f64) -> Result<SimplifiedBound> {
    if !(epsilon > 0.0) {
        return Err(Error::arg("epsilon must be positive"));
    }
    if !(h > 0.0) {
        return Err(Error::arg("H must be positive"));
    }
    let exponent = -doubly_exponential(epsilon * h) + ln_b + 2.0 * h;
    Ok(SimplifiedBound {
        fluctuation_threshold: 10.0 * epsilon.sqrt() * h,
        gap_threshold: 5.0 * epsilon.sqrt() * h,
        bound: BoundResult::from_exponent(exponent, 0.0),
    })
}

/// Hypotheses of the simplified bound: `H ≥ H(X,Y)`, `H ≥ M(X,Y)/ε`,
/// `H ≥ M(Y)/ε` and `H ≥ 4 ln 2 / ε`.
pub fn simplified_hypotheses(
    dist: &JointDistribution,
    x: Subset,
    y: Subset,
    epsilon: f64,
    h: f64,
) -> Result<HypothesisReport> {
    if !(epsilon > 0.0) {
        return Err(Error::arg("epsilon must be positive"));
    }
    if !x.is_disjoint(y) {
        return Err(Error::arg("X and Y coordinates overlap"));
    }
    let xy = dist.marginal(x.union(y))?;
    let y_law = dist.marginal(y)?;
    Ok(HypothesisReport::new(vec![
        HypothesisCheck::at_least("1 >= eps", 1.0, epsilon),
        HypothesisCheck::at_least("H >= H(X,Y)", h, xy.entropy()),
        HypothesisCheck::at_least("H >= M(X,Y) / eps", h, xy.mean_fluctuation() / epsilon),
        HypothesisCheck::at_least("H >= M(Y) / eps", h, y_law.mean_fluctuation() / epsilon),
        HypothesisCheck::at_least("H >= 4 ln 2 / eps", h, 4.0 * LN_2 / epsilon),
    ]))
}

/// Left-hand sides, in units of `H`, of the two inequalities that fold the
/// constants of the conditional bound into `10√ε` and `5√ε`.
pub fn cor2_absorption(epsilon: f64) -> (f64, f64) {
    let r = epsilon.sqrt();
    let c = std::f64::consts::SQRT_2 + 1.0;
    (
        2.0 * c * r + 2.0 * (epsilon + r) + epsilon,
        c * r + (epsilon + r) + epsilon / 2.0,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureCheck {
    /// `M(P)` for the mixture `P = (1-ε) P' + ε P''`.
    pub fluctuation: f64,
    pub bound: f64,
    pub holds: bool,
}

fn mixture(p1: &[f64], p2: &[f64], epsilon: f64) -> Result<Vec<f64>> {
    if p1.len() != p2.len() {
        return Err(Error::shape("mixture components differ in length"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::arg(format!("mixture weight {epsilon} outside (0, 1)")));
    }
    Ok(p1
        .iter()
        .zip(p2)
        .map(|(a, b)| (1.0 - epsilon) * a + epsilon * b)
        .collect())
}

fn mean_fluctuation_of(p: &[f64]) -> f64 {
    fluctuation_of(p, entropy_of(p)).total
}

/// `M(P) ≤ 2ε(H(P'') + 2H(P')) + 2M(P') + 10 ln 2`.
pub fn mixture_lemma_one(p1: &[f64], p2: &[f64], epsilon: f64) -> Result<MixtureCheck> {
    let p = mixture(p1, p2, epsilon)?;
    let fluctuation = mean_fluctuation_of(&p);
    let bound = 2.0 * epsilon * (entropy_of(p2) + 2.0 * entropy_of(p1))
        + 2.0 * mean_fluctuation_of(p1)
        + 10.0 * LN_2;
    Ok(MixtureCheck {
        fluctuation,
        bound,
        holds: fluctuation <= bound,
    })
}

/// `M(P) ≤ 2(εH(P) + ln 2 + Σ_x P(x)(H(P) - i_{P'}(x))^+)`, terms with
/// `P'(x) = 0` contributing nothing.
pub fn mixture_lemma_two(p1: &[f64], p2: &[f64], epsilon: f64) -> Result<MixtureCheck> {
    let p = mixture(p1, p2, epsilon)?;
    let h = entropy_of(&p);
    let fluctuation = fluctuation_of(&p, h).total;
    let excess: f64 = p
        .iter()
        .zip(p1)
        .filter(|&(_, &q)| q > 0.0)
        .map(|(&px, &q)| px * (h + q.ln()).max(0.0))
        .sum();
    let bound = 2.0 * (epsilon * h + LN_2 + excess);
    Ok(MixtureCheck {
        fluctuation,
        bound,
        holds: fluctuation <= bound,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundComparison {
    pub empirical: ProportionEstimate,
    pub bound: BoundResult,
    /// Vacuous bounds pass; otherwise the exact proportion, or the upper end
    /// of the Monte Carlo interval, must reach the bound.
    pub pass: bool,
}

pub fn empirical_vs_bound(empirical: ProportionEstimate, bound: BoundResult) -> BoundComparison {
    let reach = if empirical.exact {
        empirical.proportion
    } else {
        empirical.upper
    };
    BoundComparison {
        empirical,
        bound,
        pass: bound.vacuous || reach >= bound.proportion_lower_bound,
    }
}

/// A bound evaluation requested from a file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "bound", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundRequest {
    Thm1 {
        k: usize,
        ell: usize,
        epsilon: f64,
        h: f64,
        /// `ln |B_1 × .. × B_ℓ|`.
        output_log_size: f64,
        /// Overrides `(ε/121)^(2^ℓ)`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta: Option<f64>,
    },
    Thm2 {
        h: ProfileFile,
        b: ProfileFile,
        epsilon: f64,
        delta: f64,
        n: usize,
    },
    SmallAtoms {
        masses: Vec<f64>,
        colors: usize,
        epsilon: f64,
    },
    Conditional(ConditionalInputs),
    Single(SingleInputs),
    Simplified {
        h: f64,
        epsilon: f64,
        ln_b: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoundOutcome {
    Plain(BoundResult),
    Asymptotic(AsymptoticBound),
    SmallAtoms(SmallAtomsReport),
    Encoding(EncodingBound),
    Simplified(SimplifiedBound),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub input: BoundRequest,
    pub result: BoundOutcome,
}

impl BoundRequest {
    pub fn evaluate(&self) -> Result<BoundReport> {
        let result = match self {
            BoundRequest::Thm1 {
                k,
                ell,
                epsilon,
                h,
                output_log_size,
                delta,
            } => {
                check_epsilon(*epsilon)?;
                let delta = delta.unwrap_or_else(|| thm1_delta(*epsilon, *ell));
                BoundOutcome::Plain(thm1_bound(*k, *ell, delta, *h, *output_log_size)?)
            }
            BoundRequest::Thm2 {
                h,
                b,
                epsilon,
                delta,
                n,
            } => BoundOutcome::Asymptotic(thm2_threshold(
                &ProfileVector::from_file(h)?,
                &ProfileVector::from_file(b)?,
                *epsilon,
                *delta,
                *n,
            )?),
            BoundRequest::SmallAtoms {
                masses,
                colors,
                epsilon,
            } => BoundOutcome::SmallAtoms(small_atoms_check(
                &SubProbability::new(masses.clone())?,
                *colors,
                *epsilon,
            )?),
            BoundRequest::Conditional(inputs) => BoundOutcome::Encoding(conditional_encoding_bound(inputs)?),
            BoundRequest::Single(inputs) => BoundOutcome::Encoding(cor1_bound(inputs)?),
            BoundRequest::Simplified { h, epsilon, ln_b } => {
                BoundOutcome::Simplified(simplified_encoding_bound(*h, *epsilon, *ln_b)?)
            }
        };
        Ok(BoundReport {
            input: self.clone(),
            result,
        })
    }
}
