//! Append-only JSON-lines store of enumeration results.
//!
//! Each modular set is one line, `{"modulus":9,"elements":[0,3,5,8],"lambda":8,"omega":4}`.
//! After the sets of a modulus comes a marker line `{"modulus":9,"count":7}`, so
//! moduli with no sets are remembered too. A modulus is only served from the
//! cache when its marker count matches the number of records that re-verify.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modsets::{ModularRecord, ModularSet};

#[derive(Debug, Serialize, Deserialize)]
struct Marker {
    modulus: u64,
    count: usize,
}

#[derive(Debug)]
pub struct EnumerationCache {
    path: PathBuf,
    complete: BTreeMap<u64, Vec<ModularSet>>,
    warnings: Vec<String>,
}

fn io(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

impl EnumerationCache {
    /// Loads `path` if it exists. Bad lines are skipped and reported in [`warnings`](Self::warnings).
    pub fn open(path: impl Into<PathBuf>) -> Result<EnumerationCache> {
        let path = path.into();
        let mut cache = EnumerationCache { path, complete: BTreeMap::new(), warnings: Vec::new() };
        let file = match File::open(&cache.path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(cache),
            Err(e) => return Err(io(&cache.path, e)),
        };
        let mut records: BTreeMap<u64, BTreeSet<Vec<u64>>> = BTreeMap::new();
        let mut sets: BTreeMap<(u64, Vec<u64>), ModularSet> = BTreeMap::new();
        let mut markers: BTreeMap<u64, usize> = BTreeMap::new();
        let mut damaged: BTreeSet<u64> = BTreeSet::new();
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| io(&cache.path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let lineno = lineno + 1;
            if let Ok(m) = serde_json::from_str::<Marker>(&line) {
                markers.insert(m.modulus, m.count);
                continue;
            }
            let record: ModularRecord = match serde_json::from_str(&line) {
                Ok(r) => r,
                Err(e) => {
                    cache.warnings.push(format!("line {lineno}: unreadable record skipped ({e})"));
                    continue;
                }
            };
            match record.verify() {
                Ok(ms) => {
                    records.entry(ms.modulus()).or_default().insert(ms.elements().to_vec());
                    sets.insert((ms.modulus(), ms.elements().to_vec()), ms);
                }
                Err(e) => {
                    damaged.insert(record.modulus);
                    cache.warnings.push(format!("line {lineno}: record for modulus {} rejected ({e})", record.modulus));
                }
            }
        }
        for (modulus, count) in markers {
            let found = records.get(&modulus).map_or(0, BTreeSet::len);
            if found != count {
                cache.warnings.push(format!(
                    "modulus {modulus}: marker expects {count} sets, {found} verified; will recompute"
                ));
                continue;
            }
            if damaged.contains(&modulus) && found == 0 && count == 0 {
                cache.warnings.push(format!("modulus {modulus}: only rejected records; will recompute"));
                continue;
            }
            let list = records
                .get(&modulus)
                .into_iter()
                .flatten()
                .map(|els| sets[&(modulus, els.clone())].clone())
                .collect();
            cache.complete.insert(modulus, list);
        }
        Ok(cache)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Verified sets for a fully cached modulus.
    pub fn get(&self, modulus: u64) -> Option<&[ModularSet]> {
        self.complete.get(&modulus).map(Vec::as_slice)
    }

    pub fn moduli(&self) -> impl Iterator<Item = u64> + '_ {
        self.complete.keys().copied()
    }

    /// Appends every set of `modulus` followed by its marker.
    pub fn insert(&mut self, modulus: u64, sets: &[ModularSet]) -> Result<()> {
        if let Some(bad) = sets.iter().find(|s| s.modulus() != modulus) {
            return Err(Error::Precondition(format!("set {:?} has modulus {}", bad.elements(), bad.modulus())));
        }
        let mut text = String::new();
        for ms in sets {
            text.push_str(&serde_json::to_string(&ms.record()).expect("record serializes"));
            text.push('\n');
        }
        text.push_str(&serde_json::to_string(&Marker { modulus, count: sets.len() }).expect("marker serializes"));
        text.push('\n');
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(|e| io(&self.path, e))?;
        file.write_all(text.as_bytes()).map_err(|e| io(&self.path, e))?;
        let mut sorted = sets.to_vec();
        sorted.sort_by(|a, b| a.elements().cmp(b.elements()));
        self.complete.insert(modulus, sorted);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modsets::{enumerate_modular_sets, EnumerationLimits};

    fn temp_path(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("stanley-cache-{}-{name}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("c.jsonl");
        let _ = std::fs::remove_file(&p);
        p
    }

    #[test]
    fn round_trip_and_empty_moduli() {
        let path = temp_path("round");
        let mut cache = EnumerationCache::open(&path).unwrap();
        for n in 1..=9 {
            let sets = enumerate_modular_sets(n, &EnumerationLimits::default()).unwrap();
            cache.insert(n, &sets).unwrap();
        }
        let again = EnumerationCache::open(&path).unwrap();
        assert!(again.warnings().is_empty());
        assert_eq!(again.get(2), Some(&[][..]));
        let nine: Vec<Vec<u64>> = again.get(9).unwrap().iter().map(|s| s.elements().to_vec()).collect();
        assert!(nine.contains(&vec![0, 3, 5, 8]));
        assert_eq!(again.get(3).unwrap().len(), 2);
        assert_eq!(again.get(10), None);
    }

    #[test]
    fn tampered_record_is_rejected() {
        let path = temp_path("tamper");
        let mut cache = EnumerationCache::open(&path).unwrap();
        let sets = enumerate_modular_sets(9, &EnumerationLimits::default()).unwrap();
        cache.insert(9, &sets).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let bad = text.replace(r#""elements":[0,3,5,8],"lambda":8"#, r#""elements":[0,3,5,8],"lambda":6"#);
        assert_ne!(bad, text);
        std::fs::write(&path, bad + "not json\n").unwrap();
        let loaded = EnumerationCache::open(&path).unwrap();
        assert_eq!(loaded.get(9), None);
        assert_eq!(loaded.warnings().len(), 3);
    }
}
