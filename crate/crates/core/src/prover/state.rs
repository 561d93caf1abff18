//! Constraint state and propagation.

use std::collections::VecDeque;

use super::term::{Region, Term};
use super::trace::{Contradiction, Rule, Status, Step};
use crate::error::{Error, Result};

/// A residue that must be covered unless it is a member.
#[derive(Debug, Clone)]
pub(crate) struct Obligation {
    pub target: Term,
    pub rule: Rule,
    /// Every `(x, y)` with `x < y ≤ max` and `2y - x` hitting the target, minus pairs through the target itself.
    pub witnesses: Vec<(Term, Term)>,
}

/// Status of every representable term for one odd character.
#[derive(Debug, Clone)]
pub struct ConstraintState {
    lambda: i64,
    bound: i64,
    status: Vec<Option<Status>>,
    members: Vec<Term>,
    pub(crate) generators: Option<Vec<u64>>,
}

fn ceil_half(v: i64) -> i64 {
    v.div_euclid(2) + v.rem_euclid(2)
}

impl ConstraintState {
    /// Seeds the facts implied by the character: `0` and the maximum `N + (λ-1)/2`
    /// are members, everything above the maximum is not, nor is the antipode of `0`.
    ///
    /// For `λ = 1` the maximum is the antipode of `0`; the clash surfaces on the
    /// first propagation.
    pub fn init(lambda: u32, bound: i64) -> Result<ConstraintState> {
        if lambda == 0 {
            return Err(Error::ZeroCharacter);
        }
        if lambda % 2 == 0 {
            return Err(Error::EvenCharacter(lambda));
        }
        let lambda = lambda as i64;
        if bound < lambda {
            return Err(Error::Precondition(format!("offset bound {bound} is below the character {lambda}")));
        }
        let mut state = ConstraintState {
            lambda,
            bound,
            status: vec![None; 4 * bound as usize + 2],
            members: Vec::new(),
            generators: None,
        };
        for (t, s) in init_facts(lambda as u32, bound) {
            state.set(t, s);
        }
        Ok(state)
    }

    pub fn lambda(&self) -> i64 {
        self.lambda
    }

    pub fn bound(&self) -> i64 {
        self.bound
    }

    /// Offset of the maximum above `N`.
    pub fn top(&self) -> i64 {
        (self.lambda - 1) / 2
    }

    pub fn representable(&self, t: Term) -> bool {
        t.b.abs() <= self.bound
    }

    fn index(&self, t: Term) -> usize {
        let b = self.bound;
        (match t.region() {
            Region::Small => t.b,
            Region::High => 2 * b + 1 + t.b,
            Region::Negative => 4 * b + 2 + t.b,
        }) as usize
    }

    pub fn status(&self, t: Term) -> Option<Status> {
        self.status[self.index(t)]
    }

    pub fn members(&self) -> &[Term] {
        &self.members
    }

    pub fn decided(&self) -> Vec<(Term, Status)> {
        super::term::all_terms(self.bound)
            .filter_map(|t| self.status(t).map(|s| (t, s)))
            .collect()
    }

    pub(crate) fn set(&mut self, t: Term, s: Status) {
        let i = self.index(t);
        debug_assert!(self.status[i].is_none());
        self.status[i] = Some(s);
        if s == Status::In {
            self.members.push(t);
        }
    }

    pub(crate) fn obligations(&self) -> Vec<Obligation> {
        let (lambda, bound, top) = (self.lambda, self.bound, self.top());
        let mut out = Vec::new();
        for c in 1..=bound {
            let target = Term::small(c);
            let mut witnesses: Vec<(Term, Term)> =
                (ceil_half(c)..c).map(|y| (Term::small(2 * y - c), Term::small(y))).collect();
            let rule = if c < lambda {
                witnesses.extend((ceil_half(c)..=top).map(|e| (Term::small(2 * e - c), Term::high(e))));
                Rule::R3
            } else {
                Rule::R4
            };
            witnesses.retain(|&(x, y)| x != target && y != target);
            out.push(Obligation { target, rule, witnesses });
        }
        for c in 1..=bound - 2 * top {
            let target = Term::negative(c);
            let witnesses = (ceil_half(-c)..=top).map(|e| (Term::small(2 * e + c), Term::high(e))).collect();
            out.push(Obligation { target, rule: Rule::R4, witnesses });
        }
        out
    }

    fn possible(&self, pair: (Term, Term)) -> bool {
        self.status(pair.0) != Some(Status::Out) && self.status(pair.1) != Some(Status::Out)
    }

    fn satisfied(&self, pair: (Term, Term)) -> bool {
        self.status(pair.0) == Some(Status::In) && self.status(pair.1) == Some(Status::In)
    }

    /// Adds a fact and propagates to a fixpoint from scratch.
    pub fn assume(&mut self, t: Term, s: Status) -> Result<()> {
        if !self.representable(t) {
            return Err(Error::Precondition(format!("{t} is outside the offset bound")));
        }
        if self.status(t).is_some() {
            return Err(Error::Precondition(format!("{t} is already decided")));
        }
        self.set(t, s);
        Ok(())
    }

    /// Runs every rule to a fixpoint, treating all members as new.
    pub fn propagate(&mut self) -> (Vec<Step>, Option<Contradiction>) {
        let obligations = self.obligations();
        let mut steps = Vec::new();
        let work = self.members.clone();
        let contradiction = propagate(self, &obligations, work, &mut steps);
        (steps, contradiction)
    }

    pub(crate) fn first_open_obligation(&self, obligations: &[Obligation]) -> Option<Term> {
        for ob in obligations {
            if self.status(ob.target) == Some(Status::In) {
                continue;
            }
            if ob.witnesses.iter().any(|&p| self.satisfied(p)) {
                continue;
            }
            for &(x, y) in &ob.witnesses {
                if self.possible((x, y)) {
                    for m in [x, y] {
                        if self.status(m).is_none() {
                            return Some(m);
                        }
                    }
                }
            }
        }
        None
    }

    /// Every obligation whose target is not a member has a witness pair of members.
    pub(crate) fn obligations_met(&self, obligations: &[Obligation]) -> bool {
        obligations.iter().all(|ob| {
            self.status(ob.target) == Some(Status::In) || ob.witnesses.iter().any(|&p| self.satisfied(p))
        })
    }
}

/// Facts fixed by the character alone.
pub(crate) fn init_facts(lambda: u32, bound: i64) -> Vec<(Term, Status)> {
    let top = (lambda as i64 - 1) / 2;
    let mut facts = vec![(Term::ZERO, Status::In), (Term::high(top), Status::In)];
    if top != 0 {
        facts.push((Term::high(0), Status::Out));
    }
    facts.extend((top + 1..=bound).map(|e| (Term::high(e), Status::Out)));
    facts.extend((1..=bound).map(|c| (Term::negative(c), Status::Out)));
    facts
}

/// Applies R1 and R2 to each new member, then cover obligations with unit
/// forcing, until nothing changes. Stops at the first contradiction.
pub(crate) fn propagate(
    state: &mut ConstraintState,
    obligations: &[Obligation],
    work: Vec<Term>,
    steps: &mut Vec<Step>,
) -> Option<Contradiction> {
    let bound = state.bound;
    let mut queue: VecDeque<Term> = work.into();
    'outer: loop {
        while let Some(t) = queue.pop_front() {
            let a = t.antipode();
            match state.status(a) {
                Some(Status::In) => return Some(Contradiction::ModAp { x: t, y: a, z: t }),
                Some(Status::Out) => {}
                None => {
                    state.set(a, Status::Out);
                    steps.push(Step { term: a, status: Status::Out, rule: Rule::R1, premises: vec![t] });
                }
            }
            let members = state.members.clone();
            for &u in &members {
                if u == t {
                    continue;
                }
                for (x, y) in [(t, u), (u, t)] {
                    let Some(z) = Term::ap_target(x, y, bound) else { continue };
                    if z == x || z == y {
                        continue;
                    }
                    match state.status(z) {
                        Some(Status::In) => return Some(Contradiction::ModAp { x, y, z }),
                        Some(Status::Out) => {}
                        None => {
                            state.set(z, Status::Out);
                            steps.push(Step { term: z, status: Status::Out, rule: Rule::R2, premises: vec![x, y] });
                        }
                    }
                }
                if t.q == u.q && (t.b + u.b) % 2 == 0 {
                    let m = (t.b + u.b) / 2;
                    for q in 0..2 {
                        let mid = Term::canon(q, m, bound).expect("midpoint stays in range");
                        if mid == t || mid == u {
                            continue;
                        }
                        match state.status(mid) {
                            Some(Status::In) => return Some(Contradiction::ModAp { x: t, y: mid, z: u }),
                            Some(Status::Out) => {}
                            None => {
                                state.set(mid, Status::Out);
                                steps.push(Step {
                                    term: mid,
                                    status: Status::Out,
                                    rule: Rule::R2,
                                    premises: vec![t, u],
                                });
                            }
                        }
                    }
                }
            }
        }
        for ob in obligations {
            let target = ob.target;
            let current = state.status(target);
            if current == Some(Status::In) {
                continue;
            }
            let mut possible = ob.witnesses.iter().copied().filter(|&p| state.possible(p));
            let first = possible.next();
            let unique = first.is_some() && possible.next().is_none();
            match (current, first) {
                (None, None) => {
                    state.set(target, Status::In);
                    steps.push(Step { term: target, status: Status::In, rule: ob.rule, premises: vec![target] });
                    queue.push_back(target);
                    continue 'outer;
                }
                (Some(Status::Out), None) => return Some(Contradiction::Uncoverable { target }),
                (Some(Status::Out), Some((x, y))) if unique => {
                    let mut forced = false;
                    for m in [x, y] {
                        if state.status(m).is_none() {
                            state.set(m, Status::In);
                            steps.push(Step { term: m, status: Status::In, rule: ob.rule, premises: vec![target, x, y] });
                            queue.push_back(m);
                            forced = true;
                        }
                    }
                    if forced {
                        continue 'outer;
                    }
                }
                _ => {}
            }
        }
        return None;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_examples() {
        let s = ConstraintState::init(5, 20).unwrap();
        assert_eq!(s.status(Term::high(2)), Some(Status::In));
        assert_eq!(s.status(Term::high(3)), Some(Status::Out));
        assert_eq!(s.status(Term::negative(4)), Some(Status::Out));
        assert_eq!(s.status(Term::high(0)), Some(Status::Out));
        let s = ConstraintState::init(15, 60).unwrap();
        assert_eq!(s.status(Term::high(7)), Some(Status::In));
        assert_eq!(ConstraintState::init(4, 16).unwrap_err(), Error::EvenCharacter(4));
    }

    #[test]
    fn character_one_fails_immediately() {
        let mut s = ConstraintState::init(1, 4).unwrap();
        let (_, c) = s.propagate();
        assert_eq!(c, Some(Contradiction::ModAp { x: Term::ZERO, y: Term::high(0), z: Term::ZERO }));
    }

    #[test]
    fn character_three_leaves_one_uncovered() {
        let mut s = ConstraintState::init(3, 12).unwrap();
        let (_, c) = s.propagate();
        assert_eq!(c, Some(Contradiction::Uncoverable { target: Term::small(1) }));
    }

    #[test]
    fn character_five_without_n_plus_one() {
        let mut s = ConstraintState::init(5, 20).unwrap();
        s.assume(Term::high(1), Status::Out).unwrap();
        let (steps, c) = s.propagate();
        let forced = |t: Term| steps.iter().find(|st| st.term == t).unwrap();
        let one = forced(Term::small(1));
        assert_eq!((one.status, one.rule, one.premises[0]), (Status::In, Rule::R3, Term::small(2)));
        let five = forced(Term::small(5));
        assert_eq!((five.status, five.rule, five.premises.clone()), (Status::In, Rule::R4, vec![Term::small(5)]));
        assert!(matches!(c, Some(Contradiction::Uncoverable { .. })));
    }
}
