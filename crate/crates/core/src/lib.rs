//! Evaluation toolkit for multi-granularity surgical workflow recognition.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure
//! computations. File formats, reports and the command line live in the
//! `misaw` companion crate.
//!
//! * [`vocab`] closed label sets for phases, steps and activity components.
//! * [`timeline`] interval annotations and frame-synchronous sequences.
//! * [`metrics`] balanced frame-by-frame and application-dependent scores.
//! * [`ranking`] score aggregation, imputation, ranking and stability.
//! * [`harmonize`] two-observer annotation merging.
//! * [`kinematics`] per-arm homogeneous transforms and series utilities.
//! * [`synth`] seeded generation of ground-truth/prediction pairs.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod harmonize;
pub mod kinematics;
pub mod metrics;
pub mod ranking;
pub mod synth;
pub mod text;
pub mod timeline;
pub mod vocab;

pub use error::{Error, Result};
pub use vocab::{Component, LabelVocabulary, Track, VocabularySet, IDLE};
