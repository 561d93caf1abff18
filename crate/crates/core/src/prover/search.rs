//! Backtracking search over case splits.

use std::collections::HashMap;
use std::rc::Rc;
use std::time::Instant;

use serde::Serialize;

use super::concretize::{self, CandidateLeaf};
use super::dispatch::{sequence_facts, SequenceFacts};
use super::state::{propagate, ConstraintState, Obligation};
use super::term::Term;
use super::trace::{Branch, Contradiction, Node, Status, Terminal};
use super::ProverLimits;
use crate::modsets::ModularSet;

/// Which budget ran out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exhausted {
    Nodes,
    Depth,
    Time,
}

pub(crate) enum Stop {
    Exhausted(Exhausted),
    Found,
}

pub(crate) struct Search<'a> {
    limits: &'a ProverLimits,
    obligations: Vec<Obligation>,
    started: Instant,
    pub nodes: usize,
    pub stop: Option<Stop>,
    cache: HashMap<Vec<u64>, Option<Rc<SequenceFacts>>>,
    pub candidates: Vec<CandidateLeaf>,
    pub witness: Option<(CandidateLeaf, ModularSet)>,
}

impl<'a> Search<'a> {
    pub fn new(limits: &'a ProverLimits, root: &ConstraintState) -> Self {
        Search {
            limits,
            obligations: root.obligations(),
            started: Instant::now(),
            nodes: 0,
            stop: None,
            cache: HashMap::new(),
            candidates: Vec::new(),
            witness: None,
        }
    }

    fn facts(&mut self, generators: &[u64], bound: i64) -> Option<Rc<SequenceFacts>> {
        self.cache
            .entry(generators.to_vec())
            .or_insert_with(|| sequence_facts(generators, bound).map(Rc::new))
            .clone()
    }

    /// Explores one branch; `None` if a budget stopped the search first.
    pub fn explore(&mut self, mut state: ConstraintState, mut work: Vec<Term>, depth: usize) -> Option<Branch> {
        if self.stop.is_some() {
            return None;
        }
        self.nodes += 1;
        if self.nodes > self.limits.max_nodes {
            self.stop = Some(Stop::Exhausted(Exhausted::Nodes));
            return None;
        }
        if self.started.elapsed() > self.limits.max_time {
            self.stop = Some(Stop::Exhausted(Exhausted::Time));
            return None;
        }
        let mut nodes = Vec::new();
        loop {
            let mut steps = Vec::new();
            let contradiction = propagate(&mut state, &self.obligations, std::mem::take(&mut work), &mut steps);
            if !steps.is_empty() {
                nodes.push(Node::Deduce { steps });
            }
            if let Some(reason) = contradiction {
                return Some(Branch { nodes, end: Terminal::Contradiction { reason } });
            }
            if state.generators.is_some() {
                break;
            }
            let Some(generators) = dispatch_ready(&state) else { break };
            let facts = self.facts(&generators, state.bound());
            state.generators = Some(generators.clone());
            let Some(facts) = facts else { break };
            nodes.push(Node::Dispatch { generators, character: facts.character });
            for (c, &member) in facts.small.iter().enumerate() {
                let t = Term::small(c as i64);
                let want = if member { Status::In } else { Status::Out };
                match state.status(t) {
                    Some(s) if s != want => {
                        return Some(Branch { nodes, end: Terminal::Contradiction { reason: Contradiction::Clash { term: t } } });
                    }
                    Some(_) => {}
                    None => {
                        state.set(t, want);
                        if member {
                            work.push(t);
                        }
                    }
                }
            }
            if let Some(ch) = facts.character {
                if ch.lambda != state.lambda() {
                    let reason = Contradiction::CharacterMismatch { found: ch.lambda };
                    return Some(Branch { nodes, end: Terminal::Contradiction { reason } });
                }
            }
        }
        let Some(term) = self.choose(&state) else {
            self.candidate(&state);
            return Some(Branch { nodes, end: Terminal::Candidate });
        };
        if depth >= self.limits.max_depth {
            self.stop = Some(Stop::Exhausted(Exhausted::Depth));
            return Some(Branch { nodes, end: Terminal::Split { term, in_branch: None, out_branch: None } });
        }
        let mut inside = state.clone();
        inside.set(term, Status::In);
        let in_branch = self.explore(inside, vec![term], depth + 1).map(Box::new);
        let mut outside = state;
        outside.set(term, Status::Out);
        let out_branch = self.explore(outside, Vec::new(), depth + 1).map(Box::new);
        Some(Branch { nodes, end: Terminal::Split { term, in_branch, out_branch } })
    }

    fn choose(&self, state: &ConstraintState) -> Option<Term> {
        if state.generators.is_none() {
            let high = (1..state.top()).map(Term::high);
            let small = (1..=state.bound()).map(Term::small);
            if let Some(t) = high.chain(small).find(|&t| state.status(t).is_none()) {
                return Some(t);
            }
        }
        state.first_open_obligation(&self.obligations)
    }

    fn candidate(&mut self, state: &ConstraintState) {
        let leaf = CandidateLeaf::from_state(state);
        match concretize::concretize_search(&leaf, self.limits.concretize_window) {
            Ok(Some(ms)) => {
                self.witness = Some((leaf, ms));
                self.stop = Some(Stop::Found);
            }
            _ => self.candidates.push(leaf),
        }
    }
}

/// Generators of the small side once every residue up to some member `≥ λ` is decided.
fn dispatch_ready(state: &ConstraintState) -> Option<Vec<u64>> {
    let mut generators = Vec::new();
    for c in 0..=state.bound() {
        match state.status(Term::small(c))? {
            Status::In => {
                generators.push(c as u64);
                if c >= state.lambda() {
                    return Some(generators);
                }
            }
            Status::Out => {}
        }
    }
    None
}
