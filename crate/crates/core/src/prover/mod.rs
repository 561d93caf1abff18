//! Symbolic case analysis for odd characters.
//!
//! A modular set with odd character `λ` has an even modulus `2N`. Residues
//! near `0`, `N` and `2N` are tracked as [`Term`]s, valid for every `N` at
//! least [`min_n`]. The search propagates membership rules, fixes the small
//! side through its greedy sequence once enough of it is known, and splits on
//! undecided terms. Every branch ends in a contradiction or a candidate.
//!
//! Moduli below `2·min_n` need no separate treatment: tensoring with the
//! modulus-3 set `{0, 1}` keeps the character and triples the modulus.

mod check;
mod concretize;
mod dispatch;
mod search;
mod state;
mod term;
mod trace;

use std::time::Duration;

use serde::Serialize;

pub use check::{check_trace, validate_trace, CheckError};
pub use concretize::{concretize, concretize_search, default_window, CandidateLeaf};
pub use dispatch::{DISPATCH_LEVELS, DISPATCH_POWERS, DISPATCH_TERMS};
pub use search::Exhausted;
pub use state::ConstraintState;
pub use term::{all_terms, ParseTermError, Region, Term};
pub use trace::{
    Branch, CertifiedCharacter, Contradiction, Node, ProofTrace, Rule, Status, Step, Terminal, TraceStats,
};

use crate::error::Result;
use crate::modsets::ModularSet;
use search::{Search, Stop};

/// Default offset bound for character `lambda`.
pub fn default_bound(lambda: u32) -> i64 {
    4 * lambda as i64
}

/// Smallest `N` for which terms with offsets up to `bound` stay distinct and ordered.
pub fn min_n(bound: i64) -> i64 {
    2 * bound + 4
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProverLimits {
    /// Offset bound; `None` uses [`default_bound`].
    pub bound: Option<i64>,
    pub max_depth: usize,
    pub max_nodes: usize,
    pub max_time: Duration,
    /// Width of the range of `N` tried for candidates; `None` uses [`default_window`].
    pub concretize_window: Option<i64>,
}

impl Default for ProverLimits {
    fn default() -> Self {
        ProverLimits {
            bound: None,
            max_depth: 40,
            max_nodes: 1_000_000,
            max_time: Duration::from_secs(120),
            concretize_window: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum ProofOutcome {
    /// Every leaf is a contradiction.
    Impossible { trace: ProofTrace, nodes: usize },
    /// A leaf survived. `witness` is its concrete set, if one was found.
    Candidate {
        trace: ProofTrace,
        nodes: usize,
        leaf: CandidateLeaf,
        witness: Option<ModularSet>,
    },
    /// A budget ran out; the partial trace is kept.
    Inconclusive { trace: ProofTrace, nodes: usize, exhausted: Exhausted },
}

impl ProofOutcome {
    pub fn trace(&self) -> &ProofTrace {
        match self {
            ProofOutcome::Impossible { trace, .. }
            | ProofOutcome::Candidate { trace, .. }
            | ProofOutcome::Inconclusive { trace, .. } => trace,
        }
    }

    pub fn is_impossible(&self) -> bool {
        matches!(self, ProofOutcome::Impossible { .. })
    }
}

/// Searches for a proof that no modular set has character `lambda`.
pub fn prove_character_impossible(lambda: u32, limits: &ProverLimits) -> Result<ProofOutcome> {
    let bound = limits.bound.unwrap_or_else(|| default_bound(lambda));
    let root_state = ConstraintState::init(lambda, bound)?;
    let mut search = Search::new(limits, &root_state);
    let work = root_state.members().to_vec();
    let root = search.explore(root_state, work, 0);
    let nodes = search.nodes;
    let stop = search.stop.take();
    let root = root.unwrap_or(Branch {
        nodes: Vec::new(),
        end: Terminal::Split { term: Term::ZERO, in_branch: None, out_branch: None },
    });
    let trace = ProofTrace { lambda, bound, root };
    Ok(match (stop, search.witness.take()) {
        (_, Some((leaf, ms))) => ProofOutcome::Candidate { trace, nodes, leaf, witness: Some(ms) },
        (Some(Stop::Exhausted(exhausted)), None) => ProofOutcome::Inconclusive { trace, nodes, exhausted },
        _ if !search.candidates.is_empty() => {
            let leaf = search.candidates.swap_remove(0);
            ProofOutcome::Candidate { trace, nodes, leaf, witness: None }
        }
        _ => ProofOutcome::Impossible { trace, nodes },
    })
}

/// Seeded state for character `lambda` with the default offset bound.
pub fn init_state(lambda: u32) -> Result<ConstraintState> {
    ConstraintState::init(lambda, default_bound(lambda))
}
