//! On-disk store of constant tables, one file per (N, K, digits).

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use dickman::furry::FurryTable;

pub const CACHE_ENV: &str = "DICKMAN_CACHE_DIR";
const DEFAULT_DIR: &str = ".dickman-cache";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Entry {
    pub n: usize,
    pub k: usize,
    pub digits: u32,
}

impl Entry {
    pub fn file_name(&self) -> String {
        format!("furry-N{}-K{}-D{}.txt", self.n, self.k, self.digits)
    }

    fn from_file_name(name: &str) -> Option<Entry> {
        let core = name.strip_prefix("furry-")?.strip_suffix(".txt")?;
        let mut parts = core.split('-');
        let n = parts.next()?.strip_prefix('N')?.parse().ok()?;
        let k = parts.next()?.strip_prefix('K')?.parse().ok()?;
        let digits = parts.next()?.strip_prefix('D')?.parse().ok()?;
        parts.next().is_none().then_some(Entry { n, k, digits })
    }
}

/// What an evaluation needs from a table.
#[derive(Debug, Clone, Copy)]
pub struct Need {
    pub n: usize,
    pub k: usize,
    pub digits: u32,
}

pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    /// Flag first, then the environment, then `./.dickman-cache`.
    pub fn resolve(flag: Option<PathBuf>) -> Cache {
        let dir = flag
            .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_DIR));
        Cache { dir }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn entries(&self) -> Vec<Entry> {
        let Ok(rd) = fs::read_dir(&self.dir) else {
            return Vec::new();
        };
        let mut out: Vec<Entry> = rd
            .filter_map(|e| e.ok())
            .filter_map(|e| Entry::from_file_name(&e.file_name().to_string_lossy()))
            .collect();
        out.sort_by_key(|e| (e.n, e.k, e.digits));
        out
    }

    /// Cheapest table covering `need`; tables short only in K come last.
    pub fn find(&self, need: Need) -> Option<Entry> {
        let usable = self
            .entries()
            .into_iter()
            .filter(|e| e.n >= need.n && e.digits >= need.digits);
        usable.min_by_key(|e| (e.k < need.k, e.n * e.digits as usize, e.k))
    }

    pub fn load(&self, e: Entry) -> Result<FurryTable> {
        let path = self.dir.join(e.file_name());
        let f = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
        let t = FurryTable::read_from(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))?;
        if t.n_max() != e.n || t.k_max() != e.k || t.digits() != e.digits {
            bail!("{} holds N={} K={} DIGITS={}, not what its name says", path.display(), t.n_max(), t.k_max(), t.digits());
        }
        Ok(t)
    }

    /// Writes to a temporary name and renames, so readers never see a partial file.
    pub fn store(&self, t: &FurryTable) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir).with_context(|| format!("creating {}", self.dir.display()))?;
        let e = Entry {
            n: t.n_max(),
            k: t.k_max(),
            digits: t.digits(),
        };
        let path = self.dir.join(e.file_name());
        let tmp = self.dir.join(format!(".{}.{}.tmp", e.file_name(), std::process::id()));
        {
            let mut w = BufWriter::new(File::create(&tmp)?);
            t.write_to(&mut w)?;
            w.flush()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(path)
    }
}

pub fn build_hint(need: Need) -> String {
    format!(
        "run `dickman table build --n {} --k {} --digits {}` (or pass --build-missing)",
        need.n, need.k, need.digits
    )
}
