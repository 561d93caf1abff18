//! Concrete facts about the greedy sequence of a fixed small side.

use crate::indep;
use crate::seq::{self, GeneratorSet};

use super::trace::CertifiedCharacter;

/// Terms generated when fixing the small side.
pub const DISPATCH_TERMS: usize = 4096;
/// Highest level checked by the independence test.
pub const DISPATCH_LEVELS: u32 = 11;
/// Highest power of 3 tried when looking for a modulus.
pub const DISPATCH_POWERS: u32 = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct SequenceFacts {
    /// Membership of `0..=bound` in the sequence.
    pub small: Vec<bool>,
    pub character: Option<CertifiedCharacter>,
}

/// Generates `S(generators)` and certifies its character when possible.
///
/// `None` if the generators are not a valid 3-free set containing 0.
pub(crate) fn sequence_facts(generators: &[u64], bound: i64) -> Option<SequenceFacts> {
    let gens = GeneratorSet::new(generators.to_vec()).ok()?;
    let prefix = seq::generate(&gens, DISPATCH_TERMS.max(gens.len()), u64::MAX).ok()?;
    let small = (0..=bound as u64).map(|c| prefix.contains(c)).collect();
    let character = indep::detect_independence(prefix.terms(), DISPATCH_LEVELS)
        .ok()
        .flatten()
        .and_then(|cert| indep::find_modulus(&prefix, &cert, DISPATCH_POWERS).ok().flatten())
        .map(|ms| CertifiedCharacter { lambda: ms.lambda(), modulus: ms.modulus() });
    Some(SequenceFacts { small, character })
}
