//! Entropy profiles of finite multivariate sources and what coordinate-wise
//! encodings do to them.
//!
//! The crate computes exact entropy profiles and mean fluctuations of the
//! information function, the convolution of a profile with the modular
//! profile of a family of output alphabets, proportions of encodings whose
//! output profile sits close to that convolution, finite-state Markov source
//! models, and closed-form evaluations of the associated proportion bounds.

// `!(x > 0.0)` is the idiom that also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod dist;
pub mod encoders;
pub mod error;
pub mod experiment;
pub mod extended;
pub mod profiles;
pub mod sources;
pub mod subset;

pub use dist::{Alphabet, Caps, JointDistribution, ProductSpace, SubProbability};
pub use encoders::{Encoding, EncodingEnsemble};
pub use error::{Error, Result};
pub use profiles::{ModularProfile, ProfileVector};
pub use sources::{MarkovSource, SourceSpec};
pub use subset::Subset;
