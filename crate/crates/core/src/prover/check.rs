//! Independent trace verification.
//!
//! Every step is re-derived from the statuses accumulated along its path.
//! Witness pairs are found by scanning all representable terms rather than
//! through the prover's closed-form lists.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::dispatch::sequence_facts;
use super::state::init_facts;
use super::term::{all_terms, Region, Term};
use super::trace::{Branch, CertifiedCharacter, Contradiction, Node, ProofTrace, Rule, Status, Step, Terminal};

/// The first invalid part of a trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckError {
    /// Slash-separated location, e.g. `root/out/in/node[2]/step[5]`.
    pub path: String,
    pub reason: String,
}

impl fmt::Display for CheckError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.reason)
    }
}

impl std::error::Error for CheckError {}

/// True iff the trace shows that no modular set has character `lambda`.
pub fn check_trace(trace: &ProofTrace, lambda: u32) -> bool {
    validate_trace(trace, lambda).is_ok()
}

/// Like [`check_trace`] but reports where the trace fails.
pub fn validate_trace(trace: &ProofTrace, lambda: u32) -> Result<(), CheckError> {
    let fail = |reason: String| Err(CheckError { path: "root".into(), reason });
    if trace.lambda != lambda {
        return fail(format!("trace is for character {} not {lambda}", trace.lambda));
    }
    if lambda % 2 == 0 {
        return fail("character must be odd".into());
    }
    if trace.bound < lambda as i64 {
        return fail(format!("offset bound {} is below the character", trace.bound));
    }
    let mut facts = Facts {
        lambda: lambda as i64,
        bound: trace.bound,
        status: BTreeMap::new(),
        clashes: BTreeSet::new(),
        characters: Vec::new(),
        dispatched: false,
    };
    for (t, s) in init_facts(lambda, trace.bound) {
        facts.status.entry(t).or_insert(s);
    }
    facts.check_branch(&trace.root, "root".into())
}

#[derive(Clone)]
struct Facts {
    lambda: i64,
    bound: i64,
    status: BTreeMap<Term, Status>,
    clashes: BTreeSet<Term>,
    characters: Vec<CertifiedCharacter>,
    dispatched: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Cover {
    Modular,
    Strict,
}

/// `2y - x ≡ z (mod 2N)` for every large `N`.
fn is_mod_ap(x: Term, y: Term, z: Term) -> bool {
    2 * y.b - x.b - z.b == 0 && (2 * y.n_coefficient() - x.n_coefficient() - z.n_coefficient()) % 2 == 0
}

/// `2y - x = z` as integers in `[0, 2N)`.
fn is_int_ap(x: Term, y: Term, z: Term) -> bool {
    2 * y.b - x.b == z.b && 2 * y.n_coefficient() - x.n_coefficient() == z.n_coefficient()
}

impl Facts {
    fn get(&self, t: Term) -> Option<Status> {
        self.status.get(&t).copied()
    }

    fn top(&self) -> i64 {
        (self.lambda - 1) / 2
    }

    fn in_range(&self, t: Term) -> bool {
        t.b.abs() <= self.bound
    }

    /// Which cover a target needs, if the rules impose one on it.
    fn scope(&self, t: Term) -> Option<(Cover, Rule)> {
        match t.region() {
            Region::Small if t.b >= 1 && t.b <= self.bound => {
                Some(if t.b < self.lambda { (Cover::Modular, Rule::R3) } else { (Cover::Strict, Rule::R4) })
            }
            Region::Negative if -t.b <= self.bound - 2 * self.top() => Some((Cover::Strict, Rule::R4)),
            _ => None,
        }
    }

    /// Pairs `x < y` of non-excluded terms other than the target that reach it.
    fn possible_pairs(&self, target: Term, cover: Cover) -> Vec<(Term, Term)> {
        let mut pairs = Vec::new();
        for y in all_terms(self.bound) {
            let b = 2 * y.b - target.b;
            let m = 2 * y.n_coefficient() - target.n_coefficient();
            let x = match (cover, m.rem_euclid(2), m) {
                (Cover::Modular, 1, _) | (Cover::Strict, _, 1) => Term::high(b),
                (Cover::Modular, _, _) | (Cover::Strict, _, 0 | 2) => Term { q: 0, b },
                _ => continue,
            };
            let shape_ok = match cover {
                Cover::Modular => true,
                Cover::Strict => x.n_coefficient() == m,
            };
            let hits = match cover {
                Cover::Modular => is_mod_ap(x, y, target),
                Cover::Strict => is_int_ap(x, y, target),
            };
            if shape_ok
                && hits
                && self.in_range(x)
                && x < y
                && x != target
                && y != target
                && self.get(x) != Some(Status::Out)
                && self.get(y) != Some(Status::Out)
            {
                pairs.push((x, y));
            }
        }
        pairs
    }

    fn check_step(&self, step: &Step) -> Result<(), String> {
        let t = step.term;
        if !self.in_range(t) {
            return Err(format!("{t} is outside the offset bound"));
        }
        if let Some(s) = self.get(t) {
            return Err(format!("{t} is already {s:?}"));
        }
        let p = &step.premises;
        match step.rule {
            Rule::R1 => {
                if step.status != Status::Out || p.len() != 1 {
                    return Err("R1 concludes a single exclusion from one premise".into());
                }
                if self.get(p[0]) != Some(Status::In) || p[0].antipode() != t {
                    return Err(format!("{t} is not the antipode of a member {}", p[0]));
                }
            }
            Rule::R2 => {
                if step.status != Status::Out || p.len() != 2 {
                    return Err("R2 concludes an exclusion from two premises".into());
                }
                let (a, b) = (p[0], p[1]);
                if a == b || self.get(a) != Some(Status::In) || self.get(b) != Some(Status::In) {
                    return Err("R2 premises must be two distinct members".into());
                }
                let perms = [(a, b, t), (b, a, t), (a, t, b), (b, t, a), (t, a, b), (t, b, a)];
                if !perms.iter().any(|&(x, y, z)| x != y && is_mod_ap(x, y, z)) {
                    return Err(format!("{a}, {b}, {t} do not form a progression"));
                }
            }
            Rule::R3 | Rule::R4 => {
                if step.status != Status::In || p.is_empty() {
                    return Err("cover rules conclude membership from a target".into());
                }
                let target = p[0];
                let Some((cover, rule)) = self.scope(target) else {
                    return Err(format!("{target} carries no cover obligation"));
                };
                if rule != step.rule {
                    return Err(format!("{target} is covered under {rule:?}"));
                }
                let pairs = self.possible_pairs(target, cover);
                match (self.get(target), p.len()) {
                    (None, 1) => {
                        if t != target || !pairs.is_empty() {
                            return Err(format!("{target} still has a witness pair"));
                        }
                    }
                    (Some(Status::Out), 3) => {
                        if pairs != [(p[1], p[2])] {
                            return Err(format!("({}, {}) is not the only witness pair for {target}", p[1], p[2]));
                        }
                        if t != p[1] && t != p[2] {
                            return Err(format!("{t} is not in the witness pair"));
                        }
                    }
                    _ => return Err(format!("malformed cover step for {target}")),
                }
            }
        }
        Ok(())
    }

    fn dispatch(&mut self, generators: &[u64], character: Option<CertifiedCharacter>) -> Result<(), String> {
        if self.dispatched {
            return Err("small side dispatched twice".into());
        }
        let Some(&last) = generators.last() else {
            return Err("no generators".into());
        };
        if (last as i64) < self.lambda || last as i64 > self.bound {
            return Err(format!("largest generator {last} is not between the character and the bound"));
        }
        let members: Vec<u64> = (0..=last).filter(|&c| self.get(Term::small(c as i64)) == Some(Status::In)).collect();
        if members != generators {
            return Err(format!("generators {generators:?} differ from members {members:?}"));
        }
        if let Some(c) = (0..=last).find(|&c| self.get(Term::small(c as i64)).is_none()) {
            return Err(format!("{c} is undecided"));
        }
        let Some(facts) = sequence_facts(generators, self.bound) else {
            return Err("generators are not a 3-free set containing 0".into());
        };
        if facts.character != character {
            return Err(format!("recorded character {character:?} but the sequence gives {:?}", facts.character));
        }
        for (c, &member) in facts.small.iter().enumerate() {
            let t = Term::small(c as i64);
            let want = if member { Status::In } else { Status::Out };
            match self.get(t) {
                Some(s) if s != want => {
                    self.clashes.insert(t);
                }
                Some(_) => {}
                None => {
                    self.status.insert(t, want);
                }
            }
        }
        self.characters.extend(character);
        self.dispatched = true;
        Ok(())
    }

    fn check_contradiction(&self, c: &Contradiction) -> Result<(), String> {
        match *c {
            Contradiction::ModAp { x, y, z } => {
                if [x, y, z].iter().any(|&t| self.get(t) != Some(Status::In)) {
                    return Err(format!("{x}, {y}, {z} are not all members"));
                }
                if x == y || !is_mod_ap(x, y, z) {
                    return Err(format!("{x}, {y}, {z} is not a progression"));
                }
            }
            Contradiction::Uncoverable { target } => {
                if self.get(target) != Some(Status::Out) {
                    return Err(format!("{target} is not excluded"));
                }
                let Some((cover, _)) = self.scope(target) else {
                    return Err(format!("{target} carries no cover obligation"));
                };
                if !self.possible_pairs(target, cover).is_empty() {
                    return Err(format!("{target} still has a witness pair"));
                }
            }
            Contradiction::Clash { term } => {
                if !self.clashes.contains(&term) {
                    return Err(format!("no dispatch clashed at {term}"));
                }
            }
            Contradiction::CharacterMismatch { found } => {
                if found == self.lambda || !self.characters.iter().any(|ch| ch.lambda == found) {
                    return Err(format!("no dispatch certified character {found}"));
                }
            }
        }
        Ok(())
    }

    fn check_branch(&mut self, branch: &Branch, path: String) -> Result<(), CheckError> {
        let err = |path: String, reason: String| Err(CheckError { path, reason });
        for (i, node) in branch.nodes.iter().enumerate() {
            match node {
                Node::Deduce { steps } => {
                    for (j, step) in steps.iter().enumerate() {
                        if let Err(reason) = self.check_step(step) {
                            return err(format!("{path}/node[{i}]/step[{j}]"), reason);
                        }
                        self.status.insert(step.term, step.status);
                    }
                }
                Node::Dispatch { generators, character } => {
                    if let Err(reason) = self.dispatch(generators, *character) {
                        return err(format!("{path}/node[{i}]"), reason);
                    }
                }
            }
        }
        match &branch.end {
            Terminal::Candidate => err(format!("{path}/end"), "candidate leaf".into()),
            Terminal::Contradiction { reason } => match self.check_contradiction(reason) {
                Ok(()) => Ok(()),
                Err(why) => err(format!("{path}/end"), why),
            },
            Terminal::Split { term, in_branch, out_branch } => {
                if !self.in_range(*term) || self.get(*term).is_some() {
                    return err(format!("{path}/end"), format!("cannot split on {term}"));
                }
                let (Some(a), Some(b)) = (in_branch, out_branch) else {
                    return err(format!("{path}/end"), format!("split on {term} is missing a case"));
                };
                let mut inside = self.clone();
                inside.status.insert(*term, Status::In);
                inside.check_branch(a, format!("{path}/in"))?;
                self.status.insert(*term, Status::Out);
                self.check_branch(b, format!("{path}/out"))
            }
        }
    }
}
