//! On-disk class number cache.
//!
//! Format: a `tcm-cache-v1` header line, then one `D,h,w` line per
//! fundamental discriminant, sorted by `|D|`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use tcm_core::quad::{class_number, class_number_dirichlet, fundamental_discriminants, unit_count};
use tcm_core::Discriminant;

use crate::error::CliError;

pub const HEADER: &str = "tcm-cache-v1";
pub const DEFAULT_PATH: &str = "./tcm-cache-v1.csv";
pub const DEFAULT_CAP: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassNumberCache {
    entries: BTreeMap<u64, (Discriminant, u64, u32)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Loaded,
    Built,
    /// The file existed but could not be parsed.
    Rebuilt,
}

impl CacheStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CacheStatus::Loaded => "loaded",
            CacheStatus::Built => "built",
            CacheStatus::Rebuilt => "rebuilt",
        }
    }
}

impl ClassNumberCache {
    /// Class numbers of every fundamental `|D| <= cap`, by form counting.
    pub fn build(cap: u64) -> Self {
        let entries = fundamental_discriminants(cap)
            .into_iter()
            .map(|d| (d.abs(), (d, class_number(d), unit_count(d))))
            .collect();
        ClassNumberCache { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_abs_disc(&self) -> u64 {
        self.entries.keys().next_back().copied().unwrap_or(0)
    }

    pub fn get(&self, d: Discriminant) -> Option<(u64, u32)> {
        self.entries.get(&d.abs()).map(|&(_, h, w)| (h, w))
    }

    /// Cached class number, or a fresh computation for uncached `D`.
    pub fn class_number(&self, d: Discriminant) -> u64 {
        self.get(d).map_or_else(|| class_number(d), |(h, _)| h)
    }

    pub fn set(&mut self, d: Discriminant, h: u64, w: u32) {
        self.entries.insert(d.abs(), (d, h, w));
    }

    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(16 * self.entries.len() + 16);
        s.push_str(HEADER);
        s.push('\n');
        for (d, h, w) in self.entries.values() {
            let _ = writeln!(s, "{d},{h},{w}");
        }
        s
    }

    /// Parses the file format; any structural problem is an `Err` with a
    /// description.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut lines = text.lines();
        match lines.next() {
            Some(HEADER) => {}
            other => return Err(format!("bad header {other:?}")),
        }
        let mut entries = BTreeMap::new();
        for (i, line) in lines.enumerate() {
            let bad = || format!("line {}: malformed entry {line:?}", i + 2);
            let fields: Vec<&str> = line.split(',').collect();
            let [d, h, w] = fields[..] else {
                return Err(bad());
            };
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            let h: u64 = h.trim().parse().map_err(|_| bad())?;
            let w: u32 = w.trim().parse().map_err(|_| bad())?;
            let d = Discriminant::fundamental(d).map_err(|e| format!("line {}: {e}", i + 2))?;
            if entries.insert(d.abs(), (d, h, w)).is_some() {
                return Err(format!("line {}: duplicate discriminant {d}", i + 2));
            }
        }
        Ok(ClassNumberCache { entries })
    }

    /// Checks every entry against the character-sum class number and the
    /// unit count.
    pub fn validate(&self) -> Result<(), CliError> {
        for &(d, h, w) in self.entries.values() {
            let expected = class_number_dirichlet(d)?;
            if h != expected {
                return Err(CliError::CacheIntegrity(format!(
                    "h({d}) cached as {h}, class number formula gives {expected}"
                )));
            }
            if w != unit_count(d) {
                return Err(CliError::CacheIntegrity(format!(
                    "w({d}) cached as {w}, expected {}",
                    unit_count(d)
                )));
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Loads and validates the cache at `path`, building it for `|D| <= cap`
/// when the file is missing or unparseable.
pub fn cache_io(path: &Path, cap: u64) -> Result<(ClassNumberCache, CacheStatus), CliError> {
    match std::fs::read_to_string(path) {
        Ok(text) => match ClassNumberCache::parse(&text) {
            Ok(cache) => {
                cache.validate()?;
                Ok((cache, CacheStatus::Loaded))
            }
            Err(why) => {
                eprintln!(
                    "warning: cache {} is corrupt ({why}); rebuilding",
                    path.display()
                );
                let cache = ClassNumberCache::build(cap);
                cache.save(path)?;
                Ok((cache, CacheStatus::Rebuilt))
            }
        },
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            let cache = ClassNumberCache::build(cap);
            cache.save(path)?;
            Ok((cache, CacheStatus::Built))
        }
        Err(e) => Err(e.into()),
    }
}

/// Read-only use: validated cache if the file exists, otherwise `None`.
pub fn load_existing(path: &Path) -> Result<Option<ClassNumberCache>, CliError> {
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(path)?;
    match ClassNumberCache::parse(&text) {
        Ok(cache) => {
            cache.validate()?;
            Ok(Some(cache))
        }
        Err(why) => {
            eprintln!("warning: ignoring corrupt cache {} ({why})", path.display());
            Ok(None)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let cache = ClassNumberCache::build(200);
        let text = cache.to_text();
        assert!(text.starts_with("tcm-cache-v1\n-3,1,6\n-4,1,4\n-7,1,2\n"));
        assert_eq!(ClassNumberCache::parse(&text).unwrap(), cache);
        cache.validate().unwrap();
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(ClassNumberCache::parse("").is_err());
        assert!(ClassNumberCache::parse("tcm-cache-v0\n").is_err());
        assert!(ClassNumberCache::parse("tcm-cache-v1\n-4,1\n").is_err());
        assert!(ClassNumberCache::parse("tcm-cache-v1\n-12,1,2\n").is_err());
        assert!(ClassNumberCache::parse("tcm-cache-v1\n-4,1,4\n-4,1,4\n").is_err());
    }

    #[test]
    fn tampered_entry_fails_validation() {
        let mut cache = ClassNumberCache::build(100);
        cache.set(Discriminant::new(-23).unwrap(), 4, 2);
        let err = cache.validate().unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn io_builds_loads_and_rebuilds() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        let (built, status) = cache_io(&path, 500).unwrap();
        assert_eq!(status, CacheStatus::Built);
        let (loaded, status) = cache_io(&path, 500).unwrap();
        assert_eq!((status, &loaded), (CacheStatus::Loaded, &built));
        std::fs::write(&path, "not a cache").unwrap();
        let (_, status) = cache_io(&path, 500).unwrap();
        assert_eq!(status, CacheStatus::Rebuilt);
    }
}
