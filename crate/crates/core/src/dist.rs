//! Exact finite joint distributions and the information functionals built on
//! them: entropy, mean fluctuation of the information function and its
//! one-sided parts, distances from the uniform law on the support, and the
//! conditional versions of all of these.
//!
//! All quantities are in nats.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subset::Subset;

/// Atoms lighter than this are treated as absent before any logarithm.
pub const ATOM_FLOOR: f64 = 1e-15;

/// Allowed deviation of the total mass from one.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Size limits for exact dense computation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Caps {
    /// Largest number of coordinates for subset-lattice sweeps (2^k work).
    pub max_coords: usize,
    /// Largest dense product space.
    pub max_total_size: usize,
    /// Largest encoding ensemble that may be enumerated exhaustively.
    pub max_encodings: u128,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_coords: 16,
            max_total_size: 1 << 26,
            max_encodings: 100_000_000,
        }
    }
}

impl Caps {
    pub(crate) fn check_coords(&self, k: usize) -> Result<()> {
        if k > self.max_coords {
            return Err(Error::capacity(
                "subset lattice",
                k as u128,
                self.max_coords as u128,
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    labels: Vec<String>,
}

impl Alphabet {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::arg("alphabet must contain at least one symbol"));
        }
        let mut sorted: Vec<&String> = labels.iter().collect();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::arg("alphabet labels must be unique"));
        }
        Ok(Alphabet { labels })
    }

    /// Alphabet `{0, 1, .., size-1}`.
    pub fn sized(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::arg("alphabet must contain at least one symbol"));
        }
        Ok(Alphabet {
            labels: (0..size).map(|i| i.to_string()).collect(),
        })
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// Finite product of alphabets with a fixed mixed-radix flat indexing in
/// which the first factor is the most significant digit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductSpace {
    factors: Vec<Alphabet>,
    sizes: Vec<usize>,
    strides: Vec<usize>,
    total: usize,
}

impl ProductSpace {
    pub fn new(factors: Vec<Alphabet>) -> Result<Self> {
        Self::with_caps(factors, &Caps::default())
    }

    pub fn with_caps(factors: Vec<Alphabet>, caps: &Caps) -> Result<Self> {
        if factors.len() > crate::subset::MAX_COORDS - 1 {
            return Err(Error::capacity(
                "coordinates",
                factors.len() as u128,
                (crate::subset::MAX_COORDS - 1) as u128,
            ));
        }
        let sizes: Vec<usize> = factors.iter().map(Alphabet::size).collect();
        let total = checked_product(&sizes, caps.max_total_size)?;
        let mut strides = vec![1usize; sizes.len()];
        for i in (0..sizes.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * sizes[i + 1];
        }
        Ok(ProductSpace {
            factors,
            sizes,
            strides,
            total,
        })
    }

    /// Product of plain integer alphabets.
    pub fn from_sizes(sizes: &[usize]) -> Result<Self> {
        Self::from_sizes_with_caps(sizes, &Caps::default())
    }

    pub fn from_sizes_with_caps(sizes: &[usize], caps: &Caps) -> Result<Self> {
        // Size check before materializing labels.
        checked_product(sizes, caps.max_total_size)?;
        let factors = sizes
            .iter()
            .map(|&s| Alphabet::sized(s))
            .collect::<Result<Vec<_>>>()?;
        Self::with_caps(factors, caps)
    }

    /// The one-point space with no coordinates.
    pub fn unit() -> Self {
        ProductSpace {
            factors: Vec::new(),
            sizes: Vec::new(),
            strides: Vec::new(),
            total: 1,
        }
    }

    pub fn k(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Alphabet] {
        &self.factors
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn total_size(&self) -> usize {
        self.total
    }

    pub fn flat_index(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.k() {
            return Err(Error::shape(format!(
                "tuple of length {} for a space with {} coordinates",
                digits.len(),
                self.k()
            )));
        }
        let mut idx = 0;
        for (i, (&d, &s)) in digits.iter().zip(&self.sizes).enumerate() {
            if d >= s {
                return Err(Error::arg(format!(
                    "symbol {d} out of range for coordinate {} of size {s}",
                    i + 1
                )));
            }
            idx = idx * s + d;
        }
        Ok(idx)
    }

    pub fn digits(&self, flat: usize) -> Vec<usize> {
        self.sizes
            .iter()
            .zip(&self.strides)
            .map(|(&s, &st)| (flat / st) % s)
            .collect()
    }

    pub fn digit(&self, flat: usize, coord: usize) -> usize {
        (flat / self.strides[coord]) % self.sizes[coord]
    }

    /// Sub-product over the coordinates in `subset`, in increasing order.
    pub fn subspace(&self, subset: Subset) -> Result<ProductSpace> {
        subset.check_within(self.k())?;
        let factors = subset.indices().map(|i| self.factors[i].clone()).collect();
        // A subspace is never larger than its parent.
        Self::with_caps(
            factors,
            &Caps {
                max_total_size: usize::MAX,
                ..Caps::default()
            },
        )
    }

    /// Flat index in `subspace(subset)` of every flat index of `self`, in
    /// order. Runs in amortized constant time per element.
    pub fn projected_indices(&self, subset: Subset) -> ProjectedIndices {
        let k = self.k();
        let mut sub_strides = vec![0usize; k];
        let mut stride = 1usize;
        for i in (0..k).rev() {
            if subset.contains(i) {
                sub_strides[i] = stride;
                stride *= self.sizes[i];
            }
        }
        ProjectedIndices {
            sizes: self.sizes.clone(),
            sub_strides,
            digits: vec![0; k],
            current: 0,
            remaining: self.total,
        }
    }
}

fn checked_product(sizes: &[usize], limit: usize) -> Result<usize> {
    let mut total: u128 = 1;
    for &s in sizes {
        if s == 0 {
            return Err(Error::arg("alphabet must contain at least one symbol"));
        }
        total = total.saturating_mul(s as u128);
    }
    if total > limit as u128 {
        return Err(Error::capacity("product space", total, limit as u128));
    }
    Ok(total as usize)
}

/// Odometer over a product space that tracks the projection onto a subset.
#[derive(Clone, Debug)]
pub struct ProjectedIndices {
    sizes: Vec<usize>,
    sub_strides: Vec<usize>,
    digits: Vec<usize>,
    current: usize,
    remaining: usize,
}

impl Iterator for ProjectedIndices {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let out = self.current;
        for i in (0..self.sizes.len()).rev() {
            self.digits[i] += 1;
            if self.digits[i] < self.sizes[i] {
                self.current += self.sub_strides[i];
                break;
            }
            self.digits[i] = 0;
            self.current -= (self.sizes[i] - 1) * self.sub_strides[i];
        }
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

impl ExactSizeIterator for ProjectedIndices {}

/// Mean absolute deviation of the information function from a reference
/// level, split into the parts above and below it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fluctuation {
    pub total: f64,
    pub plus: f64,
    pub minus: f64,
}

/// Entropy of a probability vector; atoms below [`ATOM_FLOOR`] are skipped.
///
/// Evaluated as `ln s - (1/s) sum p ln p` with `s` the total mass, so rounding
/// in `s` cannot give a point mass positive entropy.
pub fn entropy_of(mass: &[f64]) -> f64 {
    let (total, weighted) = mass
        .iter()
        .filter(|&&p| p > ATOM_FLOOR)
        .fold((0.0, 0.0), |(s, w), &p| (s + p, w + p * p.ln()));
    if total <= 0.0 {
        return 0.0;
    }
    (total.ln() - weighted / total).max(0.0)
}

/// `E|i - a|`, `E(i - a)^+` and `E(i - a)^-` for the information function
/// `i = -ln p` of a probability vector.
pub fn fluctuation_of(mass: &[f64], a: f64) -> Fluctuation {
    let mut plus = 0.0;
    let mut minus = 0.0;
    for &p in mass.iter().filter(|&&p| p > ATOM_FLOOR) {
        let dev = -p.ln() - a;
        if dev > 0.0 {
            plus += p * dev;
        } else {
            minus -= p * dev;
        }
    }
    Fluctuation {
        total: plus + minus,
        plus,
        minus,
    }
}

/// Every fluctuation functional of a single distribution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluctuationReport {
    pub entropy: f64,
    pub m: f64,
    pub m_plus: f64,
    pub m_minus: f64,
    /// Mean fluctuation about `ln #support`.
    pub d: f64,
    pub d_plus: f64,
    pub d_minus: f64,
    pub m_rel: f64,
    pub d_rel: f64,
    /// `D - 2 D+`, the divergence from the uniform law on the support.
    pub kl_to_uniform_support: f64,
    pub support_size: usize,
}

impl FluctuationReport {
    pub fn of_mass(mass: &[f64]) -> Self {
        let entropy = entropy_of(mass);
        let support_size = mass.iter().filter(|&&p| p > ATOM_FLOOR).count();
        let m = fluctuation_of(mass, entropy);
        let d = fluctuation_of(mass, (support_size as f64).ln());
        let (m_rel, d_rel) = if entropy > 0.0 {
            (m.total / entropy, d.total / entropy)
        } else {
            (0.0, 0.0)
        };
        FluctuationReport {
            entropy,
            m: m.total,
            m_plus: m.plus,
            m_minus: m.minus,
            d: d.total,
            d_plus: d.plus,
            d_minus: d.minus,
            m_rel,
            d_rel,
            kl_to_uniform_support: d.total - 2.0 * d.plus,
            support_size,
        }
    }
}

/// A probability measure on a finite product space, stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    space: ProductSpace,
    mass: Vec<f64>,
}

impl JointDistribution {
    pub fn new(space: ProductSpace, mass: Vec<f64>) -> Result<Self> {
        check_mass(&space, &mass)?;
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::arg(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(JointDistribution { space, mass })
    }

    /// Normalizes non-negative weights.
    pub fn from_weights(space: ProductSpace, weights: Vec<f64>) -> Result<Self> {
        check_mass(&space, &weights)?;
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::arg("weights must have positive total"));
        }
        let mass = weights.into_iter().map(|w| w / total).collect();
        Ok(JointDistribution { space, mass })
    }

    pub fn uniform(space: ProductSpace) -> Self {
        let n = space.total_size();
        JointDistribution {
            mass: vec![1.0 / n as f64; n],
            space,
        }
    }

    pub fn point_mass(space: ProductSpace, at: usize) -> Result<Self> {
        if at >= space.total_size() {
            return Err(Error::arg(format!("atom {at} outside the space")));
        }
        let mut mass = vec![0.0; space.total_size()];
        mass[at] = 1.0;
        Ok(JointDistribution { space, mass })
    }

    /// Draw from the flat Dirichlet distribution on the simplex.
    pub fn random<R: Rng + ?Sized>(space: ProductSpace, rng: &mut R) -> Self {
        let weights: Vec<f64> = (0..space.total_size())
            .map(|_| rng.sample::<f64, _>(Exp1))
            .collect();
        let total: f64 = weights.iter().sum();
        JointDistribution {
            mass: weights.into_iter().map(|w| w / total).collect(),
            space,
        }
    }

    pub fn space(&self) -> &ProductSpace {
        &self.space
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn k(&self) -> usize {
        self.space.k()
    }

    /// `(flat index, probability)` for every atom above [`ATOM_FLOOR`].
    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.mass
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, p)| p > ATOM_FLOOR)
    }

    pub fn support_size(&self) -> usize {
        self.support().count()
    }

    /// Law of the sub-vector of coordinates in `subset`. The empty subset
    /// gives the one-point distribution.
    pub fn marginal(&self, subset: Subset) -> Result<JointDistribution> {
        subset.check_within(self.k())?;
        if subset == Subset::full(self.k()) {
            return Ok(self.clone());
        }
        let space = self.space.subspace(subset)?;
        let mut mass = vec![0.0; space.total_size()];
        for (p, j) in self.mass.iter().zip(self.space.projected_indices(subset)) {
            mass[j] += p;
        }
        Ok(JointDistribution { space, mass })
    }

    /// `-ln p(x)` for each support point, in flat order.
    pub fn information_values(&self) -> Vec<f64> {
        self.support().map(|(_, p)| -p.ln()).collect()
    }

    pub fn entropy(&self) -> f64 {
        entropy_of(&self.mass)
    }

    pub fn fluctuation_at(&self, a: f64) -> Fluctuation {
        fluctuation_of(&self.mass, a)
    }

    /// Mean fluctuation about the entropy.
    pub fn mean_fluctuation(&self) -> f64 {
        self.fluctuation_at(self.entropy()).total
    }

    pub fn fluctuation_report(&self) -> FluctuationReport {
        FluctuationReport::of_mass(&self.mass)
    }

    /// Largest mean fluctuation over all coordinate marginals, the empty
    /// marginal counting as zero.
    pub fn max_fluctuation(&self) -> Result<f64> {
        self.max_fluctuation_with_caps(&Caps::default())
    }

    pub fn max_fluctuation_with_caps(&self, caps: &Caps) -> Result<f64> {
        caps.check_coords(self.k())?;
        let mut best = 0.0f64;
        for s in Subset::all(self.k()).skip(1) {
            best = best.max(self.marginal(s)?.mean_fluctuation());
        }
        Ok(best)
    }

    /// Values of `i_{X_I | X_J} = i_{X_I, X_J} - i_{X_J}` on the support of
    /// the joint law of `X_{I ∪ J}`.
    pub fn conditional_information(
        &self,
        target: Subset,
        given: Subset,
    ) -> Result<ConditionalInformation> {
        target.check_within(self.k())?;
        given.check_within(self.k())?;
        if !target.is_disjoint(given) {
            return Err(Error::arg(format!(
                "conditioning sets {{{target}}} and {{{given}}} overlap"
            )));
        }
        let union = target.union(given);
        let joint = self.marginal(union)?;
        let given_rel = given.relative_to(union);
        let cond = joint.marginal(given_rel)?;
        let points = joint
            .mass
            .iter()
            .zip(joint.space.projected_indices(given_rel))
            .enumerate()
            .filter(|&(_, (&p, _))| p > ATOM_FLOOR)
            .map(|(index, (&p, j))| InfoPoint {
                index,
                mass: p,
                value: -p.ln() + cond.mass[j].ln(),
            })
            .collect();
        Ok(ConditionalInformation { joint, points })
    }

    /// `H(X_I | X_J)`.
    pub fn conditional_entropy(&self, target: Subset, given: Subset) -> Result<f64> {
        Ok(self.conditional_information(target, given)?.entropy())
    }

    /// `E|i_{X_I|X_J} - a|` under the joint law, with `a` defaulting to the
    /// conditional entropy.
    pub fn conditional_fluctuation(
        &self,
        target: Subset,
        given: Subset,
        a: Option<f64>,
    ) -> Result<ConditionalFluctuation> {
        Ok(self.conditional_information(target, given)?.fluctuation(a))
    }
}

fn check_mass(space: &ProductSpace, mass: &[f64]) -> Result<()> {
    if mass.len() != space.total_size() {
        return Err(Error::shape(format!(
            "mass vector has {} entries, space has {}",
            mass.len(),
            space.total_size()
        )));
    }
    if let Some(bad) = mass.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::arg(format!("invalid probability {bad}")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InfoPoint {
    /// Flat index in the joint space of the target and conditioning coordinates.
    pub index: usize,
    pub mass: f64,
    pub value: f64,
}

/// The conditional information function together with the joint law it is
/// averaged against.
#[derive(Clone, Debug)]
pub struct ConditionalInformation {
    pub joint: JointDistribution,
    pub points: Vec<InfoPoint>,
}

impl ConditionalInformation {
    pub fn entropy(&self) -> f64 {
        self.points.iter().map(|p| p.mass * p.value).sum()
    }

    pub fn fluctuation(&self, a: Option<f64>) -> ConditionalFluctuation {
        let entropy = self.entropy();
        let a = a.unwrap_or(entropy);
        let mut plus = 0.0;
        let mut minus = 0.0;
        for p in &self.points {
            let dev = p.value - a;
            if dev > 0.0 {
                plus += p.mass * dev;
            } else {
                minus -= p.mass * dev;
            }
        }
        let total = plus + minus;
        ConditionalFluctuation {
            entropy,
            level: a,
            total,
            plus,
            minus,
            relative: if entropy > 0.0 { total / entropy } else { 0.0 },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalFluctuation {
    pub entropy: f64,
    /// Reference level the deviations are measured from.
    pub level: f64,
    pub total: f64,
    pub plus: f64,
    pub minus: f64,
    /// `total / entropy`, or zero for a degenerate conditional law.
    pub relative: f64,
}

/// A non-negative measure of total mass at most one.
#[derive(Clone, Debug, PartialEq)]
pub struct SubProbability {
    mass: Vec<f64>,
}

impl SubProbability {
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        if mass.is_empty() {
            return Err(Error::arg("sub-probability needs at least one atom"));
        }
        if let Some(bad) = mass.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::arg(format!("invalid mass {bad}")));
        }
        let total: f64 = mass.iter().sum();
        if total > 1.0 + NORMALIZATION_TOL {
            return Err(Error::arg(format!("total mass {total} exceeds 1")));
        }
        Ok(SubProbability { mass })
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn max_atom(&self) -> f64 {
        self.mass.iter().copied().fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::LN_2;

    fn bits2() -> ProductSpace {
        ProductSpace::from_sizes(&[2, 2]).unwrap()
    }

    fn three_quarters() -> JointDistribution {
        JointDistribution::new(ProductSpace::from_sizes(&[2]).unwrap(), vec![0.75, 0.25]).unwrap()
    }

    #[test]
    fn marginal_of_independent_bits_is_uniform() {
        let d = JointDistribution::uniform(bits2());
        let m = d.marginal(Subset::singleton(0)).unwrap();
        assert_eq!(m.mass(), &[0.5, 0.5]);
    }

    #[test]
    fn marginal_on_empty_set_is_point_mass() {
        let d = JointDistribution::new(bits2(), vec![0.4, 0.1, 0.1, 0.4]).unwrap();
        let m = d.marginal(Subset::EMPTY).unwrap();
        assert_eq!(m.mass(), &[1.0]);
        assert_eq!(m.entropy(), 0.0);
    }

    #[test]
    fn marginal_column_sums() {
        let d = JointDistribution::new(bits2(), vec![0.4, 0.1, 0.1, 0.4]).unwrap();
        let m = d.marginal(Subset::singleton(1)).unwrap();
        assert!((m.mass()[0] - 0.5).abs() < 1e-15);
        assert!((m.mass()[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn marginal_rejects_out_of_range() {
        let d = JointDistribution::uniform(bits2());
        assert!(matches!(
            d.marginal(Subset::singleton(2)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn marginal_follows_mixed_radix_order() {
        // space 2 x 3, first factor most significant
        let space = ProductSpace::from_sizes(&[2, 3]).unwrap();
        let d = JointDistribution::from_weights(space, vec![1., 2., 3., 4., 5., 6.]).unwrap();
        let first = d.marginal(Subset::singleton(0)).unwrap();
        assert!((first.mass()[0] - 6.0 / 21.0).abs() < 1e-15);
        let second = d.marginal(Subset::singleton(1)).unwrap();
        assert!((second.mass()[2] - 9.0 / 21.0).abs() < 1e-15);
    }

    #[test]
    fn information_values_examples() {
        let u = JointDistribution::uniform(ProductSpace::from_sizes(&[4]).unwrap());
        assert!(u
            .information_values()
            .iter()
            .all(|v| (v - 4f64.ln()).abs() < 1e-15));
        let d = three_quarters().information_values();
        assert!((d[0] - (4.0f64 / 3.0).ln()).abs() < 1e-15);
        assert!((d[1] - 4f64.ln()).abs() < 1e-15);
        let pm = JointDistribution::point_mass(ProductSpace::from_sizes(&[3]).unwrap(), 1).unwrap();
        assert_eq!(pm.information_values(), vec![0.0]);
    }

    #[test]
    fn entropy_examples() {
        let u = JointDistribution::uniform(ProductSpace::from_sizes(&[7]).unwrap());
        assert!((u.entropy() - 7f64.ln()).abs() < 1e-14);
        assert!((three_quarters().entropy() - 0.562_335_144_618_808_3).abs() < 1e-12);
        let pm = JointDistribution::point_mass(ProductSpace::from_sizes(&[3]).unwrap(), 0).unwrap();
        assert_eq!(pm.entropy(), 0.0);
    }

    #[test]
    fn fluctuation_of_skewed_bit() {
        let d = three_quarters();
        let f = d.fluctuation_at(d.entropy());
        assert!((f.total - 0.411_979_608_250_541_1).abs() < 1e-12);
        assert!((f.plus - 0.205_989_804_125_270_6).abs() < 1e-12);
        assert!((f.minus - 0.205_989_804_125_270_6).abs() < 1e-12);
        assert!((d.fluctuation_at(0.0).total - d.entropy()).abs() < 1e-15);
    }

    #[test]
    fn uniform_has_no_fluctuation() {
        let u = JointDistribution::uniform(ProductSpace::from_sizes(&[5, 3]).unwrap());
        assert!(u.mean_fluctuation() < 1e-12);
        let r = u.fluctuation_report();
        assert!(r.d.abs() < 1e-12);
        assert!(r.kl_to_uniform_support.abs() < 1e-12);
    }

    #[test]
    fn report_of_skewed_bit() {
        let r = three_quarters().fluctuation_report();
        assert!((r.d - 0.477_385_626_221_109_6).abs() < 1e-12);
        assert!((r.d_plus - 0.173_286_795_139_986_3).abs() < 1e-12);
        assert!((r.kl_to_uniform_support - 0.130_812_035_941_137).abs() < 1e-12);
        assert!((r.kl_to_uniform_support - (LN_2 - r.entropy)).abs() < 1e-12);
    }

    #[test]
    fn relative_fluctuation_dominated() {
        let d = JointDistribution::new(
            ProductSpace::from_sizes(&[3]).unwrap(),
            vec![0.5, 0.25, 0.25],
        )
        .unwrap();
        let r = d.fluctuation_report();
        assert!(r.m_rel <= 2.0 * r.d_rel);
    }

    #[test]
    fn degenerate_relative_values_are_zero() {
        let pm = JointDistribution::point_mass(ProductSpace::from_sizes(&[3]).unwrap(), 2).unwrap();
        let r = pm.fluctuation_report();
        assert_eq!(r.m_rel, 0.0);
        assert_eq!(r.d_rel, 0.0);
    }

    #[test]
    fn tiny_atoms_are_excluded() {
        let d = JointDistribution::new(
            ProductSpace::from_sizes(&[2]).unwrap(),
            vec![1.0 - 1e-16, 1e-16],
        )
        .unwrap();
        assert_eq!(d.support_size(), 1);
        assert!(d.fluctuation_report().d.is_finite());
    }

    #[test]
    fn conditional_information_independent_and_copy() {
        let d = JointDistribution::new(bits2(), vec![0.3 * 0.6, 0.3 * 0.4, 0.7 * 0.6, 0.7 * 0.4])
            .unwrap();
        let ci = d
            .conditional_information(Subset::singleton(0), Subset::singleton(1))
            .unwrap();
        for p in &ci.points {
            let x = ci.joint.space().digit(p.index, 0);
            let px = [0.3, 0.7][x];
            assert!((p.value + f64::ln(px)).abs() < 1e-12);
        }
        let m_x = d.marginal(Subset::singleton(0)).unwrap().mean_fluctuation();
        let cm = d
            .conditional_fluctuation(Subset::singleton(0), Subset::singleton(1), None)
            .unwrap();
        assert!((cm.total - m_x).abs() < 1e-12);

        let copy = JointDistribution::new(bits2(), vec![0.3, 0.0, 0.0, 0.7]).unwrap();
        let ci = copy
            .conditional_information(Subset::singleton(1), Subset::singleton(0))
            .unwrap();
        assert!(ci.points.iter().all(|p| p.value.abs() < 1e-15));
        assert_eq!(ci.fluctuation(None).total, 0.0);
    }

    #[test]
    fn conditional_rejects_overlap() {
        let d = JointDistribution::uniform(bits2());
        assert!(d
            .conditional_information(Subset::full(2), Subset::singleton(0))
            .is_err());
    }

    #[test]
    fn max_fluctuation_examples() {
        let u = JointDistribution::uniform(ProductSpace::from_sizes(&[2, 3]).unwrap());
        assert!(u.max_fluctuation().unwrap() < 1e-12);
        let single = three_quarters();
        assert_eq!(
            single.max_fluctuation().unwrap(),
            single.mean_fluctuation()
        );
        // (0.4, 0.1, 0.1, 0.4): both singletons are uniform; the pair has
        // information values ln 2.5 (mass .8) and ln 10 (mass .2).
        let d = JointDistribution::new(bits2(), vec![0.4, 0.1, 0.1, 0.4]).unwrap();
        let h = 0.8 * 2.5f64.ln() + 0.2 * 10f64.ln();
        let expected = 0.8 * (2.5f64.ln() - h).abs() + 0.2 * (10f64.ln() - h).abs();
        assert!((d.max_fluctuation().unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn max_fluctuation_respects_cap() {
        let d = JointDistribution::uniform(ProductSpace::from_sizes(&[2, 2, 2]).unwrap());
        let caps = Caps {
            max_coords: 2,
            ..Caps::default()
        };
        assert!(matches!(
            d.max_fluctuation_with_caps(&caps),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn space_capacity() {
        let caps = Caps {
            max_total_size: 100,
            ..Caps::default()
        };
        assert!(ProductSpace::from_sizes_with_caps(&[10, 10], &caps).is_ok());
        assert!(matches!(
            ProductSpace::from_sizes_with_caps(&[10, 11], &caps),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn rejects_unnormalized() {
        assert!(JointDistribution::new(bits2(), vec![0.25; 3]).is_err());
        assert!(JointDistribution::new(bits2(), vec![0.5, 0.5, 0.5, -0.5]).is_err());
        assert!(JointDistribution::new(bits2(), vec![0.3; 4]).is_err());
    }

    #[test]
    fn random_distribution_is_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = JointDistribution::random(ProductSpace::from_sizes(&[3, 4]).unwrap(), &mut rng);
        let s: f64 = d.mass().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sub_probability_bounds() {
        assert!(SubProbability::new(vec![0.5, 0.6]).is_err());
        let s = SubProbability::new(vec![0.1, 0.3]).unwrap();
        assert_eq!(s.max_atom(), 0.3);
        assert!((s.total() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn alphabet_labels_unique() {
        assert!(Alphabet::new(vec!["a".into(), "a".into()]).is_err());
        let a = Alphabet::new(vec!["x".into(), "y".into()]).unwrap();
        assert_eq!(a.index_of("y"), Some(1));
    }
}
