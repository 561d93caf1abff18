//! Turning a symbolic candidate into a concrete modular set.

use serde::{Deserialize, Serialize};

use super::state::ConstraintState;
use super::term::Term;
use super::trace::{Contradiction, Status};
use crate::error::{Error, Result};
use crate::modsets::{self, ModularSet, Verdict};
use crate::seq::{self, GeneratorSet};

/// A consistent leaf with every cover obligation met.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateLeaf {
    pub lambda: u32,
    pub bound: i64,
    /// Small side generators; the whole set below `2N` is read off their sequence.
    pub generators: Vec<u64>,
    pub decided: Vec<(Term, Status)>,
}

impl CandidateLeaf {
    pub(crate) fn from_state(state: &ConstraintState) -> CandidateLeaf {
        let generators = state.generators.clone().unwrap_or_else(|| {
            state
                .members()
                .iter()
                .filter(|t| t.q == 0 && t.b >= 0)
                .map(|t| t.b as u64)
                .collect()
        });
        let mut generators = generators;
        generators.sort_unstable();
        CandidateLeaf {
            lambda: state.lambda() as u32,
            bound: state.bound(),
            generators,
            decided: state.decided(),
        }
    }

    /// Smallest `N` for which the symbolic reasoning is exact.
    pub fn min_n(&self) -> i64 {
        super::min_n(self.bound)
    }

    /// Rebuilds the leaf's state, failing if it is contradictory or leaves an obligation open.
    fn validate(&self) -> Result<()> {
        let bad = |why: String| Err(Error::Precondition(format!("not a candidate leaf: {why}")));
        let mut state = ConstraintState::init(self.lambda, self.bound)?;
        for &(t, s) in &self.decided {
            if !state.representable(t) {
                return bad(format!("{t} is outside the offset bound"));
            }
            match state.status(t) {
                Some(prev) if prev != s => return bad(format!("{t} is both in and out")),
                Some(_) => {}
                None => state.set(t, s),
            }
        }
        let (steps, contradiction) = state.propagate();
        if let Some(c) = contradiction {
            return bad(c.to_string());
        }
        if let Some(step) = steps.first() {
            return bad(format!("{} is still forced by {:?}", step.term, step.rule));
        }
        if !state.obligations_met(&state.obligations()) {
            return bad("an obligation is open".into());
        }
        if let Some(Contradiction::ModAp { x, y, z }) = first_progression(state.members(), self.bound) {
            return bad(format!("progression {x}, {y}, {z}"));
        }
        Ok(())
    }
}

fn first_progression(members: &[Term], bound: i64) -> Option<Contradiction> {
    for &x in members {
        for &y in members {
            if x != y {
                if let Some(z) = Term::ap_target(x, y, bound) {
                    if members.contains(&z) {
                        return Some(Contradiction::ModAp { x, y, z });
                    }
                }
            }
        }
    }
    None
}

/// Instantiates the leaf at `N = n`: the set is the leaf's sequence below `2n`,
/// which must agree with every decided term and verify with the right character.
pub fn concretize(leaf: &CandidateLeaf, n: i64) -> Result<Option<ModularSet>> {
    leaf.validate()?;
    if n < leaf.min_n() {
        return Err(Error::Precondition(format!("N = {n} is below {}", leaf.min_n())));
    }
    let terms = sequence_below(leaf, 2 * n as u64)?;
    Ok(instantiate(leaf, n, &terms))
}

fn sequence_below(leaf: &CandidateLeaf, limit: u64) -> Result<Vec<u64>> {
    let gens = GeneratorSet::new(leaf.generators.clone())?;
    if gens.largest() >= limit {
        return Ok(gens.elements().to_vec());
    }
    Ok(seq::generate(&gens, usize::MAX, limit - 1)?.terms().to_vec())
}

fn instantiate(leaf: &CandidateLeaf, n: i64, terms: &[u64]) -> Option<ModularSet> {
    let modulus = 2 * n as u64;
    let set = &terms[..terms.partition_point(|&t| t < modulus)];
    let top = n + (leaf.lambda as i64 - 1) / 2;
    if set.last().copied() != Some(top as u64) {
        return None;
    }
    let agrees = leaf
        .decided
        .iter()
        .all(|&(t, s)| set.binary_search(&(t.eval(n) as u64)).is_ok() == (s == Status::In));
    if !agrees {
        return None;
    }
    match modsets::verify_modular(set, modulus).ok()? {
        Verdict::Valid(ms) if ms.lambda() == leaf.lambda as i64 => Some(ms),
        _ => None,
    }
}

/// Default width of the range of `N` tried above the minimum.
pub fn default_window(min_n: i64) -> i64 {
    (3 * min_n).max(2000)
}

/// First `N` in `[min_n, min_n + window]` at which the leaf concretizes.
pub fn concretize_search(leaf: &CandidateLeaf, window: Option<i64>) -> Result<Option<ModularSet>> {
    leaf.validate()?;
    let lo = leaf.min_n();
    let hi = lo + window.unwrap_or_else(|| default_window(lo));
    let terms = sequence_below(leaf, 2 * hi as u64)?;
    Ok((lo..=hi).find_map(|n| instantiate(leaf, n, &terms)))
}
