//! Modular sets: verification, cover analysis, tensor products and exhaustive enumeration.
//!
//! Residues `x != y` and `z` form a progression modulo `N` when `2y - x ≡ z`.
//! The order of `x` and `y` is unconstrained here (so `0, N/2, 0` counts),
//! while a cover requires `x < y`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seq::{self, GeneratorSet};

/// Largest modulus the bitmask enumerator can represent.
pub const HARD_MAX_MODULUS: u64 = 128;
pub const DEFAULT_MAX_MODULUS: u64 = 60;

/// A verified modular set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ModularSet {
    modulus: u64,
    elements: Vec<u64>,
    lambda: i64,
    omega: Option<u64>,
}

impl ModularSet {
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn lambda(&self) -> i64 {
        self.lambda
    }

    pub fn omega(&self) -> Option<u64> {
        self.omega
    }

    pub fn largest(&self) -> u64 {
        *self.elements.last().unwrap()
    }

    pub fn record(&self) -> ModularRecord {
        ModularRecord {
            modulus: self.modulus,
            elements: self.elements.clone(),
            lambda: self.lambda,
            omega: self.omega,
        }
    }
}

/// Unverified wire form, `{"modulus":9,"elements":[0,3,5,8],"lambda":8,"omega":4}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModularRecord {
    pub modulus: u64,
    pub elements: Vec<u64>,
    pub lambda: i64,
    pub omega: Option<u64>,
}

impl ModularRecord {
    /// Re-verifies the record; the stored character and omega must match.
    pub fn verify(&self) -> Result<ModularSet> {
        match verify_modular(&self.elements, self.modulus)? {
            Verdict::Valid(ms) if ms.lambda == self.lambda && ms.omega == self.omega => Ok(ms),
            Verdict::Valid(ms) => Err(Error::Precondition(format!(
                "stored lambda/omega {}/{:?} differ from computed {}/{:?}",
                self.lambda, self.omega, ms.lambda, ms.omega
            ))),
            Verdict::Invalid(v) => Err(Error::Precondition(format!("not a modular set: {v}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Violation {
    /// `2y - x ≡ z (mod N)` with all three in the set.
    ModAp { x: u64, y: u64, z: u64 },
    /// A non-member that no pair covers modulo `N`.
    Uncovered { residue: u64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::ModAp { x, y, z } => write!(f, "mod-AP x={x} y={y} z={z}"),
            Violation::Uncovered { residue } => write!(f, "residue {residue} is not mod-covered"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Valid(ModularSet),
    Invalid(Violation),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid(_))
    }

    pub fn valid(self) -> Option<ModularSet> {
        match self {
            Verdict::Valid(ms) => Some(ms),
            Verdict::Invalid(_) => None,
        }
    }
}

fn canonical_input(elements: &[u64], modulus: u64) -> Result<Vec<u64>> {
    if modulus == 0 {
        return Err(Error::ZeroModulus);
    }
    let mut sorted = elements.to_vec();
    sorted.sort_unstable();
    if let Some(&e) = sorted.iter().find(|&&e| e >= modulus) {
        return Err(Error::ElementOutOfRange { element: e, modulus });
    }
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicateElement(w[0]));
    }
    if sorted.first() != Some(&0) {
        return Err(Error::MissingZero);
    }
    Ok(sorted)
}

/// Checks every modular-set condition for `elements` modulo `modulus`.
pub fn verify_modular(elements: &[u64], modulus: u64) -> Result<Verdict> {
    let elements = canonical_input(elements, modulus)?;
    let n = modulus;
    let mut member = vec![false; n as usize];
    for &e in &elements {
        member[e as usize] = true;
    }
    for &x in &elements {
        for &y in &elements {
            if x != y {
                let z = (2 * y + n - x) % n;
                if member[z as usize] {
                    return Ok(Verdict::Invalid(Violation::ModAp { x, y, z }));
                }
            }
        }
    }
    let report = cover_statuses(&elements, n);
    if let Some(r) = report.iter().position(|s| *s == ResidueStatus::Uncovered) {
        return Ok(Verdict::Invalid(Violation::Uncovered { residue: r as u64 }));
    }
    let omega = omega_of(&report);
    let lambda = 2 * *elements.last().unwrap() as i64 - n as i64 + 1;
    Ok(Verdict::Valid(ModularSet { modulus: n, elements, lambda, omega }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum ResidueStatus {
    Member,
    /// Integer witness `2y - x = z`.
    Covered { x: u64, y: u64 },
    /// Only `2y - x ≡ z (mod N)` holds.
    ModCoveredOnly { x: u64, y: u64 },
    Uncovered,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverReport {
    pub modulus: u64,
    pub statuses: Vec<ResidueStatus>,
    pub omega: Option<u64>,
}

fn cover_statuses(sorted: &[u64], n: u64) -> Vec<ResidueStatus> {
    let mut integer = vec![None; n as usize];
    let mut modular = vec![None; n as usize];
    // pairs visited in lexicographic order, so each first witness is minimal
    for (i, &x) in sorted.iter().enumerate() {
        for &y in &sorted[i + 1..] {
            let raw = 2 * y - x;
            let slot = if raw < n { &mut integer[raw as usize] } else { &mut modular[(raw % n) as usize] };
            slot.get_or_insert((x, y));
        }
    }
    let mut statuses: Vec<ResidueStatus> = integer
        .into_iter()
        .zip(modular)
        .map(|w| match w {
            (Some((x, y)), _) => ResidueStatus::Covered { x, y },
            (None, Some((x, y))) => ResidueStatus::ModCoveredOnly { x, y },
            (None, None) => ResidueStatus::Uncovered,
        })
        .collect();
    for &e in sorted {
        statuses[e as usize] = ResidueStatus::Member;
    }
    statuses
}

fn omega_of(statuses: &[ResidueStatus]) -> Option<u64> {
    statuses
        .iter()
        .rposition(|s| matches!(s, ResidueStatus::ModCoveredOnly { .. }))
        .map(|r| r as u64)
}

/// Classifies every residue of a verified set.
pub fn cover_report(ms: &ModularSet) -> CoverReport {
    let statuses = cover_statuses(&ms.elements, ms.modulus);
    let omega = omega_of(&statuses);
    CoverReport { modulus: ms.modulus, statuses, omega }
}

/// `A ⊗ B = A + N·B`, a modular set modulo `N·M` with character `λ(A) + N·λ(B)`.
pub fn tensor(a: &ModularSet, b: &ModularSet) -> Result<ModularSet> {
    let n = a.modulus;
    let elements: Vec<u64> = b
        .elements
        .iter()
        .flat_map(|&y| a.elements.iter().map(move |&x| x + n * y))
        .collect();
    let product = match verify_modular(&elements, n * b.modulus)? {
        Verdict::Valid(ms) => ms,
        Verdict::Invalid(v) => return Err(Error::TensorInvariant(format!("product is not modular: {v}"))),
    };
    let expected = a.lambda + n as i64 * b.lambda;
    if product.lambda != expected {
        return Err(Error::TensorInvariant(format!(
            "character {} differs from {expected}",
            product.lambda
        )));
    }
    Ok(product)
}

/// Resource limits for enumeration.
#[derive(Debug, Clone, Copy)]
pub struct EnumerationLimits {
    pub max_modulus: u64,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        EnumerationLimits { max_modulus: DEFAULT_MAX_MODULUS }
    }
}

impl EnumerationLimits {
    fn admit(&self, modulus: u64) -> Result<()> {
        let max = self.max_modulus.min(HARD_MAX_MODULUS);
        if modulus > max {
            return Err(Error::BudgetExceeded { modulus, max });
        }
        Ok(())
    }
}

type Mask = u128;

struct Enumerator {
    n: u64,
    full: Mask,
}

#[derive(Clone, Copy)]
struct Node {
    members: Mask,
    /// Residues whose addition would close a progression.
    blocked: Mask,
    /// Residues `2y - x mod N` over member pairs `x < y`.
    covered: Mask,
    last: u64,
}

impl Enumerator {
    fn bit(r: u64) -> Mask {
        1 << r
    }

    fn add(&self, node: &Node, y: u64) -> Node {
        let n = self.n;
        let mut next = *node;
        next.members |= Self::bit(y);
        next.last = y;
        if n % 2 == 0 {
            next.blocked |= Self::bit((y + n / 2) % n);
        }
        let mut m = node.members;
        while m != 0 {
            let x = m.trailing_zeros() as u64;
            m &= m - 1;
            let c = (2 * y + n - x) % n;
            next.covered |= Self::bit(c);
            next.blocked |= Self::bit(c) | Self::bit((2 * x + n - y) % n);
            let s = x + y;
            if n % 2 == 1 {
                next.blocked |= Self::bit(s * (n + 1) / 2 % n);
            } else if s % 2 == 0 {
                next.blocked |= Self::bit(s / 2 % n) | Self::bit((s / 2 + n / 2) % n);
            }
        }
        next
    }

    /// Sound prune: each skipped, uncovered residue below the frontier must be coverable by a future pair.
    fn hopeless(&self, node: &Node, open: Mask) -> bool {
        let n = self.n;
        let decided = if node.last + 1 >= 128 { Mask::MAX } else { (Self::bit(node.last + 1)) - 1 };
        let mut pending = decided & !node.members & !node.covered;
        let pool = node.members | open;
        while pending != 0 {
            let z = pending.trailing_zeros() as u64;
            pending &= pending - 1;
            let mut ys = open;
            let mut ok = false;
            while ys != 0 {
                let y = ys.trailing_zeros() as u64;
                ys &= ys - 1;
                let x = (2 * y + n - z) % n;
                if x < y && pool >> x & 1 == 1 {
                    ok = true;
                    break;
                }
            }
            if !ok {
                return true;
            }
        }
        false
    }

    fn open(&self, node: &Node) -> Mask {
        let above = if node.last + 1 >= 128 { 0 } else { !((Self::bit(node.last + 1)) - 1) };
        above & self.full & !node.blocked & !node.members
    }

    fn walk(&self, node: Node, out: &mut Vec<Vec<u64>>) {
        if (node.members | node.covered) == self.full {
            out.push(Self::elements(node.members));
        }
        let open = self.open(&node);
        if self.hopeless(&node, open) {
            return;
        }
        let mut candidates = open;
        while candidates != 0 {
            let y = candidates.trailing_zeros() as u64;
            candidates &= candidates - 1;
            self.walk(self.add(&node, y), out);
        }
    }

    fn elements(mut m: Mask) -> Vec<u64> {
        let mut v = Vec::with_capacity(m.count_ones() as usize);
        while m != 0 {
            v.push(m.trailing_zeros() as u64);
            m &= m - 1;
        }
        v
    }
}

/// All modular sets modulo `modulus`, sorted lexicographically.
pub fn enumerate_modular_sets(modulus: u64, limits: &EnumerationLimits) -> Result<Vec<ModularSet>> {
    if modulus == 0 {
        return Err(Error::ZeroModulus);
    }
    limits.admit(modulus)?;
    let full = if modulus == 128 { Mask::MAX } else { (1 << modulus) - 1 };
    let e = Enumerator { n: modulus, full };
    let root = e.add(&Node { members: 0, blocked: 0, covered: 0, last: 0 }, 0);
    let mut raw = Vec::new();
    if (root.members | root.covered) == full {
        raw.push(vec![0]);
    }
    let open = e.open(&root);
    if !e.hopeless(&root, open) {
        let branches: Vec<u64> = Enumerator::elements(open);
        let found: Vec<Vec<Vec<u64>>> = branches
            .par_iter()
            .map(|&y| {
                let mut out = Vec::new();
                e.walk(e.add(&root, y), &mut out);
                out
            })
            .collect();
        raw.extend(found.into_iter().flatten());
    }
    let mut sets: Vec<ModularSet> = raw
        .into_iter()
        .map(|els| {
            verify_modular(&els, modulus)
                .expect("enumerated elements are in range")
                .valid()
                .expect("enumerated sets satisfy every modular condition")
        })
        .collect();
    sets.sort_by(|a, b| a.elements.cmp(&b.elements));
    Ok(sets)
}

/// Characters of all modular sets with modulus up to `max_modulus`.
pub fn character_table(max_modulus: u64, limits: &EnumerationLimits) -> Result<BTreeMap<i64, Vec<ModularSet>>> {
    limits.admit(max_modulus)?;
    let mut table: BTreeMap<i64, Vec<ModularSet>> = BTreeMap::new();
    for n in 1..=max_modulus {
        for ms in enumerate_modular_sets(n, limits)? {
            table.entry(ms.lambda).or_default().push(ms);
        }
    }
    for rows in table.values_mut() {
        rows.sort_by(|a, b| (a.modulus, &a.elements).cmp(&(b.modulus, &b.elements)));
    }
    Ok(table)
}

/// Outcome of re-deriving a modular set from its restricted generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictionCheck {
    /// Elements up to and including the first one above omega.
    pub generators: Vec<u64>,
    /// The greedy sequence of `generators`, cut at the modulus.
    pub reproduced: Vec<u64>,
}

impl RestrictionCheck {
    pub fn holds(&self, ms: &ModularSet) -> bool {
        self.reproduced == ms.elements
    }
}

/// Regenerates `ms` from its elements up to the first one exceeding omega.
pub fn restriction_check(ms: &ModularSet) -> RestrictionCheck {
    let k = match ms.omega {
        None => 0,
        Some(w) => ms.elements.iter().position(|&e| e > w).expect("max exceeds omega"),
    };
    let generators = ms.elements[..=k].to_vec();
    let gens = GeneratorSet::new(generators.clone()).expect("modular sets are 3-free");
    let prefix = seq::generate(&gens, usize::MAX, ms.modulus - 1).expect("generators lie below the modulus");
    RestrictionCheck { generators, reproduced: prefix.terms().to_vec() }
}
