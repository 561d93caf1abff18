#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::Rng;
use stanley::prover::{Branch, Node, ProofTrace, Terminal};

/// Literal definition: contains 0, no `x ≠ y` in the set with `2y - x ≡ z` for a
/// member `z`, and every other residue is `2y - x` mod `n` for members `x < y`.
pub fn literally_modular(set: &[u64], n: u64) -> bool {
    if !set.contains(&0) {
        return false;
    }
    let member = |r: u64| set.contains(&r);
    for &x in set {
        for &y in set {
            if x != y && member((2 * y + 2 * n - x) % n) {
                return false;
            }
        }
    }
    (0..n).filter(|&r| !member(r)).all(|r| {
        set.iter().any(|&x| set.iter().any(|&y| x < y && (2 * y + n - x) % n == r))
    })
}

/// Every subset of `0..n` containing 0 that satisfies [`literally_modular`], in lexicographic order.
pub fn brute_force_modular_sets(n: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    for mask in 0u64..(1 << (n - 1)) {
        let set: Vec<u64> = std::iter::once(0).chain((1..n).filter(|i| mask >> (i - 1) & 1 == 1)).collect();
        if literally_modular(&set, n) {
            out.push(set);
        }
    }
    out.sort();
    out
}

/// Kinds of single-node damage applied to a trace.
#[derive(Debug, Clone, Copy)]
pub enum Mutation {
    FlipStep(usize),
    DropChild(usize, bool),
    Relabel(usize),
}

#[derive(Default, Debug)]
pub struct Sites {
    pub steps: usize,
    pub splits: usize,
    pub leaves: usize,
}

pub fn sites(trace: &ProofTrace) -> Sites {
    fn walk(b: &Branch, s: &mut Sites) {
        for n in &b.nodes {
            if let Node::Deduce { steps } = n {
                s.steps += steps.len();
            }
        }
        match &b.end {
            Terminal::Split { in_branch, out_branch, .. } => {
                s.splits += 1;
                for c in [in_branch, out_branch].into_iter().flatten() {
                    walk(c, s);
                }
            }
            Terminal::Contradiction { .. } => s.leaves += 1,
            Terminal::Candidate => {}
        }
    }
    let mut s = Sites::default();
    walk(&trace.root, &mut s);
    s
}

pub fn random_mutation(s: &Sites, rng: &mut StdRng) -> Mutation {
    loop {
        match rng.gen_range(0..3) {
            0 if s.steps > 0 => return Mutation::FlipStep(rng.gen_range(0..s.steps)),
            1 if s.splits > 0 => return Mutation::DropChild(rng.gen_range(0..s.splits), rng.gen()),
            2 if s.leaves > 0 => return Mutation::Relabel(rng.gen_range(0..s.leaves)),
            _ => {}
        }
    }
}

/// Applies `m` in place; the counters walk the tree in the same order as [`sites`].
pub fn apply(trace: &mut ProofTrace, m: Mutation) {
    fn walk(b: &mut Branch, m: Mutation, seen: &mut Sites) -> bool {
        for n in &mut b.nodes {
            if let Node::Deduce { steps } = n {
                for st in steps.iter_mut() {
                    if let Mutation::FlipStep(i) = m {
                        if i == seen.steps {
                            st.status = st.status.flipped();
                            return true;
                        }
                    }
                    seen.steps += 1;
                }
            }
        }
        match &mut b.end {
            Terminal::Split { in_branch, out_branch, .. } => {
                if let Mutation::DropChild(i, side) = m {
                    if i == seen.splits {
                        if side {
                            *in_branch = None;
                        } else {
                            *out_branch = None;
                        }
                        return true;
                    }
                }
                seen.splits += 1;
                for c in [in_branch, out_branch].into_iter().flatten() {
                    if walk(c, m, seen) {
                        return true;
                    }
                }
                false
            }
            end @ Terminal::Contradiction { .. } => {
                if let Mutation::Relabel(i) = m {
                    if i == seen.leaves {
                        *end = Terminal::Candidate;
                        return true;
                    }
                }
                seen.leaves += 1;
                false
            }
            Terminal::Candidate => false,
        }
    }
    assert!(walk(&mut trace.root, m, &mut Sites::default()), "mutation site {m:?} not found");
}
