//! Residues modulo `2N` written as `q·N + b` for a symbolic large `N`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A residue `q·N + b (mod 2N)` with `q ∈ {0, 1}`.
///
/// `(0, b)` with `b < 0` stands for `2N + b`. Ordering follows the integer
/// order of the represented residues once `N` exceeds twice the offset bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Term {
    pub q: u8,
    pub b: i64,
}

/// Where a term sits in `[0, 2N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Region {
    /// `b`, with `b ≥ 0`.
    Small,
    /// `N + b`.
    High,
    /// `2N + b`, with `b < 0`.
    Negative,
}

impl Term {
    pub const ZERO: Term = Term { q: 0, b: 0 };

    pub const fn small(c: i64) -> Term {
        Term { q: 0, b: c }
    }

    pub const fn high(e: i64) -> Term {
        Term { q: 1, b: e }
    }

    /// `2N - c`.
    pub const fn negative(c: i64) -> Term {
        Term { q: 0, b: -c }
    }

    /// Reduces the `N` coefficient mod 2; `None` when `|b|` exceeds `bound`.
    pub fn canon(q: i64, b: i64, bound: i64) -> Option<Term> {
        (b.abs() <= bound).then(|| Term { q: q.rem_euclid(2) as u8, b })
    }

    pub fn region(self) -> Region {
        match (self.q, self.b >= 0) {
            (1, _) => Region::High,
            (_, true) => Region::Small,
            _ => Region::Negative,
        }
    }

    /// Coefficient of `N` in the integer this term denotes inside `[0, 2N)`.
    pub fn n_coefficient(self) -> i64 {
        match self.region() {
            Region::Small => 0,
            Region::High => 1,
            Region::Negative => 2,
        }
    }

    /// `2y - x`, reduced.
    pub fn ap_target(x: Term, y: Term, bound: i64) -> Option<Term> {
        Term::canon(2 * y.q as i64 - x.q as i64, 2 * y.b - x.b, bound)
    }

    /// The residue `N` away.
    pub fn antipode(self) -> Term {
        Term { q: 1 - self.q, b: self.b }
    }

    /// The integer in `[0, 2N)` this term denotes at `N = n`.
    pub fn eval(self, n: i64) -> i64 {
        self.n_coefficient() * n + self.b
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.region(), self.b).cmp(&(other.region(), other.b))
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.region(), self.b) {
            (Region::Small, c) => write!(f, "{c}"),
            (Region::High, 0) => write!(f, "N"),
            (Region::High, e) if e > 0 => write!(f, "N+{e}"),
            (Region::High, e) => write!(f, "N-{}", -e),
            (Region::Negative, c) => write!(f, "2N-{}", -c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse term {0:?}: expected c, N, N+c, N-c or 2N-c")]
pub struct ParseTermError(String);

impl FromStr for Term {
    type Err = ParseTermError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseTermError(s.to_string());
        let num = |t: &str| -> Result<i64, ParseTermError> {
            if t.is_empty() || !t.bytes().all(|c| c.is_ascii_digit()) {
                return Err(err());
            }
            t.parse().map_err(|_| err())
        };
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("2N-") {
            let c = num(rest)?;
            return if c > 0 { Ok(Term::negative(c)) } else { Err(err()) };
        }
        if s == "N" {
            return Ok(Term::high(0));
        }
        if let Some(rest) = s.strip_prefix("N+") {
            return Ok(Term::high(num(rest)?));
        }
        if let Some(rest) = s.strip_prefix("N-") {
            return Ok(Term::high(-num(rest)?));
        }
        Ok(Term::small(num(s)?))
    }
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Term {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Every representable term with `|b| ≤ bound`, in increasing order.
pub fn all_terms(bound: i64) -> impl Iterator<Item = Term> {
    (0..=bound)
        .map(Term::small)
        .chain((-bound..=bound).map(Term::high))
        .chain((-bound..0).map(|b| Term { q: 0, b }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canon_examples() {
        let x = Term::small(3);
        let y = Term::high(2);
        assert_eq!(Term::ap_target(x, y, 20), Some(Term::small(1)));
        assert_eq!(Term::ap_target(Term::ZERO, Term::high(0), 20), Some(Term::ZERO));
        let t = Term::ap_target(Term::small(2), Term::negative(4), 20).unwrap();
        assert_eq!(t, Term::negative(10));
        assert_eq!(t.eval(50), (2 * (100 - 4) - 2) % 100);
        assert_eq!(Term::canon(0, 21, 20), None);
    }

    #[test]
    fn text_round_trip() {
        for t in all_terms(5) {
            let s = t.to_string();
            assert_eq!(s.parse::<Term>().unwrap(), t, "{s}");
        }
        assert_eq!(Term::high(-3).to_string(), "N-3");
        assert_eq!(Term::negative(7).to_string(), "2N-7");
        assert!("2N-0".parse::<Term>().is_err());
        assert!("N+-1".parse::<Term>().is_err());
        assert!("x".parse::<Term>().is_err());
    }

    #[test]
    fn ordering_matches_values() {
        let terms: Vec<Term> = all_terms(6).collect();
        assert!(terms.windows(2).all(|w| w[0] < w[1]));
        assert!(terms.windows(2).all(|w| w[0].eval(16) < w[1].eval(16)));
        assert_eq!(terms.len(), 4 * 6 + 2);
    }
}
