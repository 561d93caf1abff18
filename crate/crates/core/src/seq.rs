//! Greedy Stanley sequence generation.
//!
//! A [`SequencePrefix`] keeps the generated terms together with a cover sieve:
//! bit `z` is set once some pair `x < y` of terms satisfies `2y - x = z`.
//! Covers always point upward (`2y - x > y`), so the cover status of every
//! value up to the last term is final.

use num_traits::{Float, FromPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Returns the first 3-term progression `(x, y, z)` with `x + z = 2y` in `sorted`.
///
/// The slice must be sorted and duplicate-free.
pub fn find_progression(sorted: &[u64]) -> Option<(u64, u64, u64)> {
    for (j, &y) in sorted.iter().enumerate() {
        for &x in &sorted[..j] {
            let z = 2 * y - x;
            if sorted[j + 1..].binary_search(&z).is_ok() {
                return Some((x, y, z));
            }
        }
    }
    None
}

/// True iff no three elements of `xs` form an arithmetic progression.
pub fn is_three_free(xs: &[u64]) -> bool {
    let mut sorted = xs.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    find_progression(&sorted).is_none()
}

/// A finite 3-free set of non-negative integers containing 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct GeneratorSet {
    elements: Vec<u64>,
}

impl GeneratorSet {
    /// Canonicalizes `elements` (sorting) and validates it.
    pub fn new(mut elements: Vec<u64>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::EmptyGenerators);
        }
        elements.sort_unstable();
        if let Some(w) = elements.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateElement(w[0]));
        }
        if elements[0] != 0 {
            return Err(Error::MissingZero);
        }
        if let Some((x, y, z)) = find_progression(&elements) {
            return Err(Error::NotThreeFree { x, y, z });
        }
        Ok(GeneratorSet { elements })
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn largest(&self) -> u64 {
        *self.elements.last().expect("generator sets are non-empty")
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl<'de> Deserialize<'de> for GeneratorSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let elements = Vec::<u64>::deserialize(d)?;
        GeneratorSet::new(elements).map_err(serde::de::Error::custom)
    }
}

/// Growable bit vector indexed by value.
#[derive(Debug, Clone, Default)]
struct CoverSieve {
    words: Vec<u64>,
}

impl CoverSieve {
    fn set(&mut self, z: u64) {
        let w = (z / 64) as usize;
        if w >= self.words.len() {
            let len = (w + 1).max(self.words.len() * 2);
            self.words.resize(len, 0);
        }
        self.words[w] |= 1 << (z % 64);
    }

    fn get(&self, z: u64) -> bool {
        let w = (z / 64) as usize;
        w < self.words.len() && self.words[w] >> (z % 64) & 1 == 1
    }
}

/// A finite run of a Stanley sequence and its cover sieve.
#[derive(Debug, Clone)]
pub struct SequencePrefix {
    generators: GeneratorSet,
    terms: Vec<u64>,
    cover: CoverSieve,
}

impl SequencePrefix {
    /// The prefix consisting of the generators only.
    pub fn from_generators(generators: &GeneratorSet) -> Self {
        let mut prefix = SequencePrefix {
            generators: generators.clone(),
            terms: Vec::with_capacity(generators.len()),
            cover: CoverSieve::default(),
        };
        for &g in generators.elements() {
            prefix.push(g);
        }
        prefix
    }

    fn push(&mut self, y: u64) {
        for &x in &self.terms {
            self.cover.set(2 * y - x);
        }
        self.terms.push(y);
    }

    /// Smallest admissible candidate above the last term.
    fn next_candidate(&self) -> u64 {
        let mut a = self.last() + 1;
        while self.cover.get(a) {
            a += 1;
        }
        a
    }

    /// Appends greedy terms until `count` terms exist or the next term would exceed `value_limit`.
    pub fn extend(&mut self, count: usize, value_limit: u64) {
        while self.terms.len() < count {
            let a = self.next_candidate();
            if a > value_limit {
                break;
            }
            self.push(a);
        }
    }

    /// Appends greedy terms until the last term is at least `value`.
    pub fn extend_past(&mut self, value: u64) {
        while self.last() < value {
            let a = self.next_candidate();
            self.push(a);
        }
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.generators
    }

    pub fn terms(&self) -> &[u64] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn last(&self) -> u64 {
        *self.terms.last().expect("prefixes hold at least one generator")
    }

    /// Largest value whose cover status can no longer change.
    pub fn horizon(&self) -> u64 {
        self.last()
    }

    pub fn contains(&self, v: u64) -> bool {
        self.terms.binary_search(&v).is_ok()
    }

    /// Lexicographically smallest pair `x < y` of terms with `2y - x = z`.
    pub fn covered(&self, z: u64) -> Result<Option<(u64, u64)>> {
        if z > self.horizon() {
            return Err(Error::BeyondHorizon { value: z, horizon: self.horizon() });
        }
        if !self.cover.get(z) {
            return Ok(None);
        }
        for &x in self.terms.iter().take_while(|&&x| x < z) {
            if (x + z) % 2 == 0 && self.contains((x + z) / 2) {
                return Ok(Some((x, (x + z) / 2)));
            }
        }
        unreachable!("cover bit {z} set without a witness")
    }

    /// Serializable view: `{"generators":[…],"terms":[…]}`.
    pub fn to_record(&self) -> PrefixRecord {
        PrefixRecord {
            generators: self.generators.elements().to_vec(),
            terms: self.terms.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefixRecord {
    pub generators: Vec<u64>,
    pub terms: Vec<u64>,
}

/// Greedy extension of `gens`, stopping at `count_limit` terms or before the first term above `value_limit`.
///
/// Pass `u64::MAX` for an unbounded value limit.
pub fn generate(gens: &GeneratorSet, count_limit: usize, value_limit: u64) -> Result<SequencePrefix> {
    if count_limit < gens.len() {
        return Err(Error::CountLimitTooSmall { limit: count_limit, generators: gens.len() });
    }
    if value_limit < gens.largest() {
        return Err(Error::ValueLimitTooSmall { limit: value_limit, max: gens.largest() });
    }
    let mut prefix = SequencePrefix::from_generators(gens);
    prefix.extend(count_limit, value_limit);
    Ok(prefix)
}

/// Convenience wrapper: the first `count` terms of `S(elements)`.
pub fn stanley_terms(elements: &[u64], count: usize) -> Result<Vec<u64>> {
    let gens = GeneratorSet::new(elements.to_vec())?;
    Ok(generate(&gens, count.max(gens.len()), u64::MAX)?.terms)
}

/// Integers that are neither terms nor covered.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OmittedSummary {
    pub omitted: Vec<u64>,
    /// Largest omitted value; `None` sorts below every integer.
    pub omega: Option<u64>,
    pub final_up_to: u64,
}

/// Exact omitted set below `bound`.
pub fn omitted_set(gens: &GeneratorSet, bound: u64) -> Result<OmittedSummary> {
    if bound < gens.largest() {
        return Err(Error::ValueLimitTooSmall { limit: bound, max: gens.largest() });
    }
    let mut prefix = SequencePrefix::from_generators(gens);
    prefix.extend_past(bound);
    let omitted: Vec<u64> = (0..bound)
        .filter(|&z| !prefix.contains(z) && !prefix.cover.get(z))
        .collect();
    Ok(OmittedSummary { omega: omitted.last().copied(), omitted, final_up_to: bound })
}

/// `omega < lambda`, with an absent omega counting as minus infinity.
pub fn omega_below(omega: Option<u64>, lambda: i64) -> bool {
    match omega {
        None => true,
        Some(w) => (w as i64) < lambda,
    }
}

/// Raw growth ratios at one index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthSample<F> {
    pub n: usize,
    pub term: u64,
    /// `a_n / n^{log2 3}`
    pub ratio_type1: F,
    /// `a_n ln n / n^2`
    pub ratio_type2: F,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthDiagnostics<F> {
    pub samples: Vec<GrowthSample<F>>,
}

/// Measures growth at the given indices. No classification is attempted.
pub fn growth_diagnostics<F: Float + FromPrimitive>(
    prefix: &SequencePrefix,
    sample_points: &[usize],
) -> Result<GrowthDiagnostics<F>> {
    let three = F::from_u8(3).unwrap();
    let samples = sample_points
        .iter()
        .map(|&n| {
            if n < 2 || n >= prefix.len() {
                return Err(Error::SampleOutOfRange { index: n, len: prefix.len() });
            }
            let term = prefix.terms[n];
            let a = F::from_u64(term).unwrap();
            let nf = F::from_usize(n).unwrap();
            // n^{log2 3} == 3^{log2 n}; the latter is exact at powers of two
            Ok(GrowthSample {
                n,
                term,
                ratio_type1: a / three.powf(nf.log2()),
                ratio_type2: a * nf.ln() / (nf * nf),
            })
        })
        .collect::<Result<_>>()?;
    Ok(GrowthDiagnostics { samples })
}
