//! Proof trees emitted by the prover.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::term::Term;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    In,
    Out,
}

impl Status {
    pub fn flipped(self) -> Status {
        match self {
            Status::In => Status::Out,
            Status::Out => Status::In,
        }
    }
}

/// Deduction rules.
///
/// - `R1`: the antipode of a member is not a member.
/// - `R2`: no three members form a progression modulo `2N`.
/// - `R3`: a small non-member below the character is covered modulo `2N`.
/// - `R4`: a small non-member at or above the character, or a residue `2N - c`,
///   is covered by an integer progression.
///
/// Cover obligations are never imposed on residues `N + e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    R1,
    R2,
    R3,
    R4,
}

/// One status assignment. For `R3`/`R4` the first premise is the cover target
/// and, when a unique witness pair forced the step, the next two are that pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub term: Term,
    pub status: Status,
    pub rule: Rule,
    pub premises: Vec<Term>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertifiedCharacter {
    pub lambda: i64,
    pub modulus: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Node {
    Deduce { steps: Vec<Step> },
    /// The small side is fixed by the greedy sequence of `generators`.
    Dispatch { generators: Vec<u64>, character: Option<CertifiedCharacter> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Contradiction {
    /// `2y - x ≡ z (mod 2N)` with all three members.
    ModAp { x: Term, y: Term, z: Term },
    /// A non-member with no remaining witness pair.
    Uncoverable { target: Term },
    /// The dispatched sequence disagrees with an earlier status of `term`.
    Clash { term: Term },
    /// The dispatched sequence has a different certified character.
    CharacterMismatch { found: i64 },
}

impl fmt::Display for Contradiction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Contradiction::ModAp { x, y, z } => write!(f, "progression {x}, {y}, {z} mod 2N"),
            Contradiction::Uncoverable { target } => write!(f, "{target} cannot be covered"),
            Contradiction::Clash { term } => write!(f, "dispatched sequence clashes at {term}"),
            Contradiction::CharacterMismatch { found } => write!(f, "sequence has character {found}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Terminal {
    /// Case split; a missing child was never explored.
    Split {
        term: Term,
        #[serde(rename = "in")]
        in_branch: Option<Box<Branch>>,
        #[serde(rename = "out")]
        out_branch: Option<Box<Branch>>,
    },
    Contradiction { reason: Contradiction },
    Candidate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Branch {
    pub nodes: Vec<Node>,
    pub end: Terminal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofTrace {
    pub lambda: u32,
    pub bound: i64,
    pub root: Branch,
}

/// Size statistics of a trace.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TraceStats {
    pub branches: usize,
    pub splits: usize,
    pub contradictions: usize,
    pub candidates: usize,
    pub steps: usize,
    pub dispatches: usize,
    pub depth: usize,
}

impl ProofTrace {
    pub fn stats(&self) -> TraceStats {
        let mut s = TraceStats::default();
        self.root.collect(&mut s, 0);
        s
    }

    /// True iff every leaf is a contradiction and every split is complete.
    pub fn all_contradictions(&self) -> bool {
        self.root.closed()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace serializes")
    }

    /// Parses a trace without a nesting limit.
    pub fn from_json(text: &str) -> serde_json::Result<ProofTrace> {
        let mut de = serde_json::Deserializer::from_str(text);
        de.disable_recursion_limit();
        let trace = ProofTrace::deserialize(&mut de)?;
        de.end()?;
        Ok(trace)
    }
}

impl Branch {
    fn collect(&self, s: &mut TraceStats, depth: usize) {
        s.branches += 1;
        s.depth = s.depth.max(depth);
        for node in &self.nodes {
            match node {
                Node::Deduce { steps } => s.steps += steps.len(),
                Node::Dispatch { .. } => s.dispatches += 1,
            }
        }
        match &self.end {
            Terminal::Split { in_branch, out_branch, .. } => {
                s.splits += 1;
                for child in [in_branch, out_branch].into_iter().flatten() {
                    child.collect(s, depth + 1);
                }
            }
            Terminal::Contradiction { .. } => s.contradictions += 1,
            Terminal::Candidate => s.candidates += 1,
        }
    }

    fn closed(&self) -> bool {
        match &self.end {
            Terminal::Split { in_branch: Some(a), out_branch: Some(b), .. } => a.closed() && b.closed(),
            Terminal::Split { .. } | Terminal::Candidate => false,
            Terminal::Contradiction { .. } => true,
        }
    }
}
