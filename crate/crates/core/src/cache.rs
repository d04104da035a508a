//! On-disk table of `G̃` structure constants.
//!
//! One file per (torus, degree): every unordered pair `a < b` of basis keys
//! from `basis_up_to(max_degree)` with `[a, b]` reduced modulo filtration
//! degree `> max_degree`. The file carries a SHA-256 of its entries; a
//! mismatch discards the file and recomputes.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cyclo::CycloNum;
use crate::error::{Error, Result};
use crate::expr;
use crate::gtilde::{self, GElement, GKey};
use crate::torus::{TorusSpec, TorusSpecFile};

pub const CACHE_ENV: &str = "QTL_CACHE_DIR";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub a: String,
    pub b: String,
    /// `(key, coefficient)` pairs of `[a, b]`.
    pub bracket: Vec<(String, CycloNum)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheFile {
    pub torus: TorusSpecFile,
    pub max_degree: usize,
    pub checksum: String,
    pub entries: Vec<CacheEntry>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CacheStatus {
    Hit,
    Created,
    /// The stored checksum did not match; the table was rebuilt.
    Recomputed,
}

#[derive(Clone, Debug)]
pub struct StructureConstants {
    pub status: CacheStatus,
    pub path: PathBuf,
    pub file: CacheFile,
}

/// `dir` if given, else `$QTL_CACHE_DIR`, else `.qtl-cache`.
pub fn resolve_dir(dir: Option<&Path>) -> PathBuf {
    match dir {
        Some(d) => d.to_path_buf(),
        None => std::env::var_os(CACHE_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".qtl-cache")),
    }
}

pub fn cache_path(dir: &Path, spec: &TorusSpec, max_degree: usize) -> PathBuf {
    let k: Vec<String> = spec.k().iter().map(ToString::to_string).collect();
    dir.join(format!(
        "gtilde-d{}-z{}-k{}-L{}-deg{}.json",
        spec.d(),
        spec.z(),
        if k.is_empty() { "none".into() } else { k.join("_") },
        spec.order(),
        max_degree
    ))
}

fn checksum(entries: &[CacheEntry]) -> String {
    let text = serde_json::to_string(entries).expect("entries serialize");
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn compute_table(spec: &TorusSpec, max_degree: usize) -> Result<Vec<CacheEntry>> {
    let basis = gtilde::basis_up_to(spec, max_degree);
    let one = CycloNum::one(spec.field());
    let pairs: Vec<(usize, usize)> =
        (0..basis.len()).flat_map(|i| (i + 1..basis.len()).map(move |j| (i, j))).collect();
    pairs
        .par_iter()
        .map(|&(i, j)| {
            let a = GElement::single(basis[i].clone(), one.clone());
            let b = GElement::single(basis[j].clone(), one.clone());
            let c = gtilde::bracket_g(spec, &a, &b, max_degree + 1)?;
            Ok(CacheEntry {
                a: basis[i].to_string(),
                b: basis[j].to_string(),
                bracket: c.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            })
        })
        .collect()
}

fn load(path: &Path, spec: &TorusSpec, max_degree: usize) -> Result<CacheFile> {
    let file: CacheFile = crate::io::read_json(path)?;
    if file.torus != spec.to_file() || file.max_degree != max_degree || checksum(&file.entries) != file.checksum {
        return Err(Error::CacheChecksum(path.display().to_string()));
    }
    Ok(file)
}

/// Loads the table for `(spec, max_degree)` from `dir`, computing and
/// writing it when absent or corrupt.
pub fn structure_constants(spec: &TorusSpec, max_degree: usize, dir: &Path) -> Result<StructureConstants> {
    let path = cache_path(dir, spec, max_degree);
    let status = if path.exists() {
        match load(&path, spec, max_degree) {
            Ok(file) => return Ok(StructureConstants { status: CacheStatus::Hit, path, file }),
            Err(Error::CacheChecksum(_) | Error::Json(_)) => CacheStatus::Recomputed,
            Err(e) => return Err(e),
        }
    } else {
        CacheStatus::Created
    };
    let entries = compute_table(spec, max_degree)?;
    let file = CacheFile { torus: spec.to_file(), max_degree, checksum: checksum(&entries), entries };
    std::fs::create_dir_all(dir)?;
    crate::io::write_json(&path, &file)?;
    Ok(StructureConstants { status, path, file })
}

impl StructureConstants {
    pub fn len(&self) -> usize {
        self.file.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.file.entries.is_empty()
    }

    /// Parses an entry back into keys and a bracket value.
    pub fn entry(&self, spec: &TorusSpec, idx: usize) -> Result<(GKey, GKey, GElement)> {
        let e = &self.file.entries[idx];
        let key = |s: &str| -> Result<GKey> {
            let el = expr::parse_g(spec, s)?;
            let k = el.keys().next().cloned();
            k.ok_or_else(|| Error::Parse(format!("empty key `{s}`")))
        };
        let mut c = GElement::zero();
        for (k, v) in &e.bracket {
            c.add_term(key(k)?, v);
        }
        Ok((key(&e.a)?, key(&e.b)?, c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hit_and_recompute() {
        let t = TorusSpec::new(2, 1, vec![2], None).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let first = structure_constants(&t, 2, dir.path()).unwrap();
        assert_eq!(first.status, CacheStatus::Created);
        let bytes = std::fs::read(&first.path).unwrap();
        let second = structure_constants(&t, 2, dir.path()).unwrap();
        assert_eq!(second.status, CacheStatus::Hit);
        assert_eq!(std::fs::read(&second.path).unwrap(), bytes);

        let mut tampered: CacheFile = crate::io::read_json(&first.path).unwrap();
        let idx = tampered.entries.iter().position(|e| !e.bracket.is_empty()).unwrap();
        tampered.entries[idx].bracket[0].1 = CycloNum::from_int(t.field(), 7);
        crate::io::write_json(&first.path, &tampered).unwrap();
        assert!(matches!(load(&first.path, &t, 2), Err(Error::CacheChecksum(_))));
        let third = structure_constants(&t, 2, dir.path()).unwrap();
        assert_eq!(third.status, CacheStatus::Recomputed);
        assert_eq!(std::fs::read(&third.path).unwrap(), bytes);

        let n = gtilde::basis_up_to(&t, 2).len();
        assert_eq!(third.len(), n * (n - 1) / 2);
        let (a, b, c) = third.entry(&t, 5).unwrap();
        let one = CycloNum::one(t.field());
        let direct =
            gtilde::bracket_g(&t, &GElement::single(a, one.clone()), &GElement::single(b, one), 3).unwrap();
        assert_eq!(c, direct);
    }
}
