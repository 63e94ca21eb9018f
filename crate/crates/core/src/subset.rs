//! Subsets of coordinates stored as bitmasks.
//!
//! Coordinate `i` (zero-based) corresponds to bit `i`. The textual form used
//! in files and reports is one-based and comma separated, so the subset
//! holding the first and third coordinates is written `"1,3"` and the empty
//! set is `""`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest ground set a [`Subset`] can index.
pub const MAX_COORDS: usize = 32;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subset(u32);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub const fn from_bits(bits: u32) -> Self {
        Subset(bits)
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    /// The full set `{0, .., k-1}`.
    pub fn full(k: usize) -> Self {
        assert!(k <= MAX_COORDS, "ground set of {k} coordinates is too large");
        if k == MAX_COORDS {
            Subset(u32::MAX)
        } else {
            Subset((1u32 << k) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        assert!(i < MAX_COORDS);
        Subset(1 << i)
    }

    /// Builds a subset from zero-based coordinate indices.
    pub fn from_indices(indices: &[usize]) -> Self {
        indices
            .iter()
            .fold(Subset::EMPTY, |s, &i| s.union(Subset::singleton(i)))
    }

    pub fn contains(self, i: usize) -> bool {
        i < MAX_COORDS && self.0 & (1 << i) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Subset) -> Subset {
        Subset(self.0 | other.0)
    }

    pub fn intersection(self, other: Subset) -> Subset {
        Subset(self.0 & other.0)
    }

    pub fn difference(self, other: Subset) -> Subset {
        Subset(self.0 & !other.0)
    }

    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: Subset) -> bool {
        self.0 & other.0 == 0
    }

    /// Zero-based indices in increasing order.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    /// Re-expresses `self` in the coordinates of `superset`: bit `r` of the
    /// result is set when the `r`-th smallest element of `superset` belongs
    /// to `self`.
    pub fn relative_to(self, superset: Subset) -> Subset {
        debug_assert!(self.is_subset_of(superset));
        let mut out = 0u32;
        for (r, i) in superset.indices().enumerate() {
            if self.contains(i) {
                out |= 1 << r;
            }
        }
        Subset(out)
    }

    /// All submasks of `self`, starting with `self` and ending with the empty
    /// set.
    pub fn submasks(self) -> Submasks {
        Submasks {
            mask: self.0,
            next: Some(self.0),
        }
    }

    /// Every subset of a ground set of size `k`, in increasing bitmask order.
    pub fn all(k: usize) -> impl Iterator<Item = Subset> {
        assert!(k < MAX_COORDS);
        (0u32..(1u32 << k)).map(Subset)
    }

    /// Checks that every element lies below `k`.
    pub fn check_within(self, k: usize) -> Result<()> {
        if k < MAX_COORDS && self.0 >> k != 0 {
            return Err(Error::arg(format!(
                "subset {{{self}}} references a coordinate beyond k = {k}"
            )));
        }
        Ok(())
    }
}

/// Iterator over the submasks of a bitmask, in decreasing numeric order.
#[derive(Clone, Debug)]
pub struct Submasks {
    mask: u32,
    next: Option<u32>,
}

impl Iterator for Submasks {
    type Item = Subset;

    fn next(&mut self) -> Option<Subset> {
        let cur = self.next?;
        self.next = if cur == 0 {
            None
        } else {
            Some((cur - 1) & self.mask)
        };
        Some(Subset(cur))
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for i in self.indices() {
            if !first {
                f.write_str(",")?;
            }
            write!(f, "{}", i + 1)?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for Subset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Subset::EMPTY);
        }
        let mut out = Subset::EMPTY;
        for part in s.split(',') {
            let i: usize = part
                .trim()
                .parse()
                .map_err(|_| Error::arg(format!("bad coordinate {part:?} in subset {s:?}")))?;
            if i == 0 || i > MAX_COORDS {
                return Err(Error::arg(format!(
                    "coordinate {i} in subset {s:?} is out of range 1..={MAX_COORDS}"
                )));
            }
            out = out.union(Subset::singleton(i - 1));
        }
        Ok(out)
    }
}

impl serde::Serialize for Subset {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Subset {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
