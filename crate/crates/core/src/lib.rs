//! Stanley sequences, modular sets and their characters.
//!
//! - [`seq`]: greedy generation of Stanley sequences with cover tracking.
//! - [`modsets`]: verification and exhaustive enumeration of modular sets.
//! - [`indep`]: independence certificates and character search.
//! - [`prover`]: symbolic case analysis showing that certain odd characters
//!   admit no modular set, with independently checkable traces.
//! - [`cache`]: JSON-lines store for enumeration results.

pub mod cache;
pub mod error;
pub mod indep;
pub mod modsets;
pub mod prover;
pub mod seq;

pub use error::{Error, Result};
pub use indep::IndependenceCertificate;
pub use modsets::{ModularSet, Verdict};
pub use seq::{GeneratorSet, SequencePrefix};

/// Growth ratios in double precision.
pub type GrowthDiagnostics64 = seq::GrowthDiagnostics<f64>;
/// Growth ratios in single precision.
pub type GrowthDiagnostics32 = seq::GrowthDiagnostics<f32>;

/// Characters that no modular set attains.
pub const FORBIDDEN_CHARACTERS: [u32; 6] = [1, 3, 5, 9, 11, 15];
