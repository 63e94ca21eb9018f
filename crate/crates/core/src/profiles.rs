//! Subset-indexed vectors: entropy profiles, modular profiles of output
//! alphabets and their convolution
//!
//! ```text
//! (u * v)_I = min_{J ⊆ I ∩ {0..ℓ-1}} u_{I \ J} + v_J
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dist::{Caps, JointDistribution};
use crate::error::{Error, Result};
use crate::subset::Subset;

/// Real vector indexed by the subsets of `{0, .., k-1}` (bitmask order).
/// The component at the empty set is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileVector {
    k: usize,
    values: Vec<f64>,
}

impl ProfileVector {
    pub fn new(k: usize, values: Vec<f64>) -> Result<Self> {
        if k >= crate::subset::MAX_COORDS {
            return Err(Error::capacity(
                "profile ground set",
                k as u128,
                (crate::subset::MAX_COORDS - 1) as u128,
            ));
        }
        if values.len() != 1 << k {
            return Err(Error::shape(format!(
                "profile over {k} coordinates needs {} values, got {}",
                1usize << k,
                values.len()
            )));
        }
        if values[0] != 0.0 {
            return Err(Error::arg("profile value at the empty set must be 0"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("profile values must be finite"));
        }
        Ok(ProfileVector { k, values })
    }

    /// Builds a profile from a function of the subset; the empty set is
    /// forced to zero.
    pub fn from_fn(k: usize, mut f: impl FnMut(Subset) -> f64) -> Result<Self> {
        let values = Subset::all(k)
            .map(|s| if s.is_empty() { 0.0 } else { f(s) })
            .collect();
        Self::new(k, values)
    }

    pub fn zero(k: usize) -> Self {
        ProfileVector {
            k,
            values: vec![0.0; 1 << k],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, s: Subset) -> f64 {
        self.values[s.bits() as usize]
    }

    /// Value on the full ground set.
    pub fn full(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn scale(&self, factor: f64) -> ProfileVector {
        ProfileVector {
            k: self.k,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Adds `c` to every component except the empty set.
    pub fn shift(&self, c: f64) -> ProfileVector {
        let mut values: Vec<f64> = self.values.iter().map(|v| v + c).collect();
        values[0] = 0.0;
        ProfileVector { k: self.k, values }
    }

    pub fn to_file(&self) -> ProfileFile {
        ProfileFile {
            k: self.k,
            values: Subset::all(self.k)
                .map(|s| (s.to_string(), self.get(s)))
                .collect(),
        }
    }

    pub fn from_file(file: &ProfileFile) -> Result<Self> {
        let k = file.k;
        if k >= crate::subset::MAX_COORDS {
            return Err(Error::arg(format!("profile ground set {k} is too large")));
        }
        let mut values = vec![f64::NAN; 1 << k];
        values[0] = 0.0;
        for (key, &v) in &file.values {
            let s: Subset = key.parse()?;
            s.check_within(k)?;
            values[s.bits() as usize] = v;
        }
        if let Some(missing) = values.iter().position(|v| v.is_nan()) {
            return Err(Error::arg(format!(
                "profile is missing subset \"{}\"",
                Subset::from_bits(missing as u32)
            )));
        }
        Self::new(k, values)
    }
}

/// JSON form of a profile: `{"k": 2, "values": {"": 0, "1": .., "2": .., "1,2": ..}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileFile {
    pub k: usize,
    pub values: BTreeMap<String, f64>,
}

/// Profile `I ↦ ln ∏_{i∈I} |B_i|` of a family of output alphabets.
#[derive(Clone, Debug, PartialEq)]
pub struct ModularProfile {
    sizes: Vec<usize>,
    profile: ProfileVector,
}

impl ModularProfile {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.contains(&0) {
            return Err(Error::arg("output alphabets must be non-empty"));
        }
        let logs: Vec<f64> = sizes.iter().map(|&s| (s as f64).ln()).collect();
        let profile = ProfileVector::from_fn(sizes.len(), |s| s.indices().map(|i| logs[i]).sum())?;
        Ok(ModularProfile { sizes, profile })
    }

    pub fn ell(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn profile(&self) -> &ProfileVector {
        &self.profile
    }

    /// `ln ∏_{i} |B_i|`.
    pub fn total_log(&self) -> f64 {
        self.profile.full()
    }
}

/// Entropy of every coordinate marginal.
pub fn entropy_profile(dist: &JointDistribution) -> Result<ProfileVector> {
    entropy_profile_with_caps(dist, &Caps::default())
}

pub fn entropy_profile_with_caps(dist: &JointDistribution, caps: &Caps) -> Result<ProfileVector> {
    caps.check_coords(dist.k())?;
    let mut values = vec![0.0; 1 << dist.k()];
    for s in Subset::all(dist.k()).skip(1) {
        values[s.bits() as usize] = dist.marginal(s)?.entropy();
    }
    ProfileVector::new(dist.k(), values)
}

/// Entropy profile together with the maximal mean fluctuation over all
/// marginals, sharing one marginalization per subset.
pub fn profile_and_max_fluctuation(dist: &JointDistribution) -> Result<(ProfileVector, f64)> {
    Caps::default().check_coords(dist.k())?;
    let mut values = vec![0.0; 1 << dist.k()];
    let mut max_fluct = 0.0f64;
    for s in Subset::all(dist.k()).skip(1) {
        let m = dist.marginal(s)?;
        let h = m.entropy();
        values[s.bits() as usize] = h;
        max_fluct = max_fluct.max(m.fluctuation_at(h).total);
    }
    Ok((ProfileVector::new(dist.k(), values)?, max_fluct))
}

/// Convolution `u * v` of a profile over `k` coordinates with a profile over
/// the first `ℓ ≤ k` coordinates, by direct submask minimization.
pub fn convolve(u: &ProfileVector, v: &ProfileVector) -> Result<ProfileVector> {
    if v.k > u.k {
        return Err(Error::arg(format!(
            "cannot convolve a profile over {} coordinates with one over {}",
            u.k, v.k
        )));
    }
    let encoded = Subset::full(v.k);
    let values = Subset::all(u.k)
        .map(|i| {
            i.intersection(encoded)
                .submasks()
                .map(|j| u.get(i.difference(j)) + v.get(j))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Ok(ProfileVector { k: u.k, values })
}

/// Lexicographically smallest minimizing split `J` for each component of
/// `u * v`, where subsets are compared as sorted index lists.
pub fn convolve_witnesses(u: &ProfileVector, v: &ProfileVector) -> Result<Vec<Subset>> {
    let w = convolve(u, v)?;
    let encoded = Subset::full(v.k);
    Ok(Subset::all(u.k)
        .map(|i| {
            let target = w.get(i);
            i.intersection(encoded)
                .submasks()
                .filter(|&j| u.get(i.difference(j)) + v.get(j) == target)
                .min_by_key(|j| j.indices().collect::<Vec<_>>())
                .unwrap_or(Subset::EMPTY)
        })
        .collect())
}

/// `max_I |u_I - v_I|`.
pub fn max_norm_distance(u: &ProfileVector, v: &ProfileVector) -> Result<f64> {
    if u.k != v.k {
        return Err(Error::shape(format!(
            "profiles over {} and {} coordinates",
            u.k, v.k
        )));
    }
    Ok(u.values
        .iter()
        .zip(&v.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}
