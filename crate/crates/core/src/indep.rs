//! Independence certificates.
//!
//! A sequence is independent when, from some level `κ` on, every block
//! `a_{2^k..2^{k+1}}` repeats the first `2^k` terms shifted by `a_{2^k}`, and
//! `a_{2^k} = 2·a_{2^k - 1} - λ + 1`. Only finitely many levels can ever be
//! checked, so a certificate means "consistent up to `verified_through`".

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modsets::{self, ModularSet, Verdict};
use crate::seq::{self, GeneratorSet, SequencePrefix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndependenceCertificate {
    pub kappa: u32,
    pub lambda: i64,
    pub rho: u64,
    pub verified_through: u32,
}

impl std::fmt::Display for IndependenceCertificate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "kappa={} lambda={} rho={} (consistent up to k={})",
            self.kappa, self.lambda, self.rho, self.verified_through
        )
    }
}

/// Number of terms needed to check levels up to `k_max`.
pub fn required_terms(k_max: u32) -> usize {
    1usize << (k_max + 1)
}

/// Finds the minimal `κ ≤ k_max` for which both recursions hold through `k_max`.
pub fn detect_independence(terms: &[u64], k_max: u32) -> Result<Option<IndependenceCertificate>> {
    let needed = required_terms(k_max);
    if terms.len() < needed {
        return Err(Error::PrefixTooShort { needed, have: terms.len() });
    }
    let levels = k_max as usize + 1;
    let mut repeats = vec![false; levels];
    let mut lambdas = vec![0i64; levels];
    for k in 0..levels {
        let p = 1usize << k;
        repeats[k] = (0..p).all(|i| terms[p + i] == terms[p] + terms[i]);
        lambdas[k] = 2 * terms[p - 1] as i64 + 1 - terms[p] as i64;
    }
    // walk down from k_max while the suffix of levels stays consistent
    let mut kappa = None;
    for k in (0..levels).rev() {
        if !repeats[k] || lambdas[k] != lambdas[k_max as usize] {
            break;
        }
        kappa = Some(k);
    }
    Ok(kappa.and_then(|k| {
        let lambda = lambdas[k];
        (lambda >= 0).then(|| IndependenceCertificate {
            kappa: k as u32,
            lambda,
            rho: terms[1 << k],
            verified_through: k_max,
        })
    }))
}

/// Smallest `ℓ ≤ l_max` such that the prefix below `3^ℓ·ρ` is a modular set regenerating the prefix.
pub fn find_modulus(
    prefix: &SequencePrefix,
    cert: &IndependenceCertificate,
    l_max: u32,
) -> Result<Option<ModularSet>> {
    let terms = prefix.terms();
    let top = 3u64
        .checked_pow(l_max)
        .and_then(|p| p.checked_mul(cert.rho))
        .ok_or_else(|| Error::Precondition("modulus overflows".into()))?;
    if prefix.last() < top {
        return Err(Error::Precondition(format!(
            "prefix ends at {} but must pass {top}",
            prefix.last()
        )));
    }
    for l in 0..=l_max {
        let modulus = 3u64.pow(l) * cert.rho;
        let cut = terms.partition_point(|&t| t < modulus);
        let Verdict::Valid(ms) = modsets::verify_modular(&terms[..cut], modulus)? else {
            continue;
        };
        if !modsets::restriction_check(&ms).holds(&ms) {
            continue;
        }
        let gens = GeneratorSet::new(ms.elements().to_vec())?;
        let regenerated = seq::generate(&gens, terms.len().max(gens.len()), u64::MAX)?;
        if regenerated.terms()[..terms.len()] == *terms {
            return Ok(Some(ms));
        }
    }
    Ok(None)
}

/// Omega of the prefix's generators against the certified character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OmegaCheck {
    pub omega: Option<u64>,
    pub lambda: i64,
    pub holds: bool,
}

pub fn omega_lambda_check(prefix: &SequencePrefix, cert: &IndependenceCertificate) -> Result<OmegaCheck> {
    let gens = prefix.generators();
    let bound = (3 * cert.rho).max(gens.largest());
    let summary = seq::omitted_set(gens, bound)?;
    Ok(OmegaCheck {
        omega: summary.omega,
        lambda: cert.lambda,
        holds: seq::omega_below(summary.omega, cert.lambda),
    })
}

#[derive(Debug, Clone, Copy)]
pub struct SearchLimits {
    pub max_generator_bound: u64,
    pub max_depth: u32,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { max_generator_bound: 24, max_depth: 12 }
    }
}

/// A generator set whose sequence is certified at the searched depth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CharacterHit {
    pub generators: GeneratorSet,
    pub certificate: IndependenceCertificate,
}

/// 3-free sets in `[0, bound]` containing 0 that are not the greedy
/// extension of their own prefix; every Stanley sequence with generators in
/// range is produced by exactly one of them.
pub fn minimal_generator_sets(bound: u64) -> Vec<GeneratorSet> {
    fn walk(bound: u64, set: &mut Vec<u64>, cover: &mut Vec<bool>, minimal: bool, out: &mut Vec<GeneratorSet>) {
        if minimal {
            out.push(GeneratorSet::new(set.clone()).expect("walk keeps sets 3-free"));
        }
        let last = *set.last().unwrap();
        let greedy_next = (last + 1..).find(|&a| !cover[a as usize]).unwrap();
        for y in last + 1..=bound {
            if cover[y as usize] {
                continue;
            }
            let marks: Vec<usize> = set.iter().map(|&x| (2 * y - x) as usize).filter(|&z| !cover[z]).collect();
            for &z in &marks {
                cover[z] = true;
            }
            set.push(y);
            walk(bound, set, cover, y != greedy_next, out);
            set.pop();
            for &z in &marks {
                cover[z] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut cover = vec![false; 2 * bound as usize + 2];
    walk(bound, &mut vec![0], &mut cover, true, &mut out);
    out.sort();
    out
}

/// Certified characters of every sequence generated inside `[0, bound]`.
pub fn character_search(
    bound: u64,
    k_max: u32,
    limits: &SearchLimits,
) -> Result<BTreeMap<i64, Vec<CharacterHit>>> {
    if bound > limits.max_generator_bound {
        return Err(Error::BudgetExceeded { modulus: bound, max: limits.max_generator_bound });
    }
    if k_max > limits.max_depth {
        return Err(Error::BudgetExceeded { modulus: k_max as u64, max: limits.max_depth as u64 });
    }
    let count = required_terms(k_max);
    let hits: Vec<(Vec<u64>, CharacterHit)> = minimal_generator_sets(bound)
        .into_par_iter()
        .filter_map(|g| {
            let prefix = seq::generate(&g, count.max(g.len()), u64::MAX).ok()?;
            let certificate = detect_independence(prefix.terms(), k_max).ok()??;
            Some((prefix.terms()[..count].to_vec(), CharacterHit { generators: g, certificate }))
        })
        .collect();
    // sequences agreeing on the checked prefix count once; keep the smallest generator set
    let mut by_prefix: HashMap<Vec<u64>, CharacterHit> = HashMap::new();
    for (key, hit) in hits {
        by_prefix
            .entry(key)
            .and_modify(|h| {
                if hit.generators < h.generators {
                    *h = hit.clone();
                }
            })
            .or_insert(hit);
    }
    let mut table: BTreeMap<i64, Vec<CharacterHit>> = BTreeMap::new();
    for hit in by_prefix.into_values() {
        table.entry(hit.certificate.lambda).or_default().push(hit);
    }
    for rows in table.values_mut() {
        rows.sort_by(|a, b| a.generators.cmp(&b.generators));
    }
    Ok(table)
}

/// Generator sets in `[0, bound]` whose sequences certify character `target`.
pub fn search_by_character(
    target: i64,
    bound: u64,
    k_max: u32,
    limits: &SearchLimits,
) -> Result<Vec<GeneratorSet>> {
    let mut table = character_search(bound, k_max, limits)?;
    Ok(table
        .remove(&target)
        .unwrap_or_default()
        .into_iter()
        .map(|h| h.generators)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prefix(g: &[u64], n: usize) -> SequencePrefix {
        seq::generate(&GeneratorSet::new(g.to_vec()).unwrap(), n, u64::MAX).unwrap()
    }

    #[test]
    fn s0_certificate() {
        let p = prefix(&[0], 1 << 10);
        let c = detect_independence(p.terms(), 9).unwrap().unwrap();
        assert_eq!((c.kappa, c.lambda, c.rho, c.verified_through), (0, 0, 1, 9));
        // mechanical check of the closed form a_{2^k} = 3^k, a_{2^k - 1} = (3^k - 1)/2
        for k in 0..10 {
            assert_eq!(p.terms()[1 << k], 3u64.pow(k));
            assert_eq!(p.terms()[(1 << k) - 1], (3u64.pow(k) - 1) / 2);
        }
    }

    #[test]
    fn too_short() {
        let p = prefix(&[0], 100);
        assert_eq!(detect_independence(p.terms(), 9), Err(Error::PrefixTooShort { needed: 1024, have: 100 }));
    }

    #[test]
    fn character_24() {
        let p = prefix(&[0, 1, 9, 10, 15], 1 << 9);
        let c = detect_independence(p.terms(), 8).unwrap().unwrap();
        assert_eq!(c.lambda, 24);
    }

    #[test]
    fn s04_not_certified() {
        let p = prefix(&[0, 4], 1 << 11);
        assert_eq!(detect_independence(p.terms(), 10).unwrap(), None);
    }

    #[test]
    fn moduli() {
        let p = prefix(&[0], 1 << 10);
        let c = detect_independence(p.terms(), 9).unwrap().unwrap();
        let m = find_modulus(&p, &c, 2).unwrap().unwrap();
        assert_eq!((m.modulus(), m.elements()), (1, &[0][..]));

        let p = prefix(&[0, 3, 5], 1 << 10);
        let c = detect_independence(p.terms(), 9).unwrap().unwrap();
        let m = find_modulus(&p, &c, 2).unwrap().unwrap();
        assert_eq!((m.modulus(), m.elements(), m.lambda()), (9, &[0, 3, 5, 8][..], 8));

        let p = prefix(&[0, 2, 3, 9, 11], 1 << 12);
        let c = detect_independence(p.terms(), 11).unwrap().unwrap();
        let m = find_modulus(&p, &c, 4).unwrap().unwrap();
        assert_eq!(m.lambda(), 20);
        assert_eq!(c.lambda, 20);
    }

    #[test]
    fn omega_checks() {
        let p = prefix(&[0], 1 << 10);
        let c = detect_independence(p.terms(), 9).unwrap().unwrap();
        assert!(omega_lambda_check(&p, &c).unwrap().holds);

        let p = prefix(&[0, 3, 5], 1 << 10);
        let c = detect_independence(p.terms(), 9).unwrap().unwrap();
        let check = omega_lambda_check(&p, &c).unwrap();
        assert_eq!((check.omega, check.holds), (Some(4), true));

        let p = prefix(&[0, 1, 5], 64);
        for lambda in 0..=4 {
            let fake = IndependenceCertificate { kappa: 0, lambda, rho: 1, verified_through: 0 };
            assert!(!omega_lambda_check(&p, &fake).unwrap().holds);
        }
    }

    #[test]
    fn minimal_sets_are_unique_representatives() {
        let sets = minimal_generator_sets(10);
        let mut seen = std::collections::HashSet::new();
        for g in &sets {
            let p = seq::generate(g, 64, u64::MAX).unwrap();
            assert!(seen.insert(p.terms().to_vec()), "duplicate sequence for {:?}", g);
        }
        assert!(sets.contains(&GeneratorSet::new(vec![0, 3, 5]).unwrap()));
        assert!(!sets.contains(&GeneratorSet::new(vec![0, 3, 5, 8]).unwrap()));
    }

    #[test]
    fn search_examples() {
        let lim = SearchLimits::default();
        let g = |v: &[u64]| GeneratorSet::new(v.to_vec()).unwrap();
        assert!(search_by_character(8, 10, 8, &lim).unwrap().contains(&g(&[0, 3, 5])));
        assert!(search_by_character(0, 10, 8, &lim).unwrap().contains(&g(&[0])));
        assert!(search_by_character(5, 20, 8, &lim).unwrap().is_empty());
        assert!(search_by_character(24, 16, 8, &lim).unwrap().contains(&g(&[0, 1, 9, 10, 15])));
        assert!(matches!(search_by_character(0, 25, 8, &lim), Err(Error::BudgetExceeded { .. })));
    }
}
