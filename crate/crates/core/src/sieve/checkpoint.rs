//! Append-only record of completed census segments.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use super::{Counts, SieveRange};
use crate::error::{Error, Result};

const MAGIC: &str = "SIEVECKPT";
const VERSION: u32 = 1;

/// Counts of one finished segment `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentRecord {
    pub start: u128,
    pub end: u128,
    pub counts: Counts,
}

impl SegmentRecord {
    /// `SEG <start> <end> <survivors> <c0> <c1> <c2>`
    pub fn to_line(&self) -> String {
        let c = &self.counts;
        format!("SEG {} {} {} {} {} {}", self.start, self.end, c.survivors, c.c0, c.c1, c.c2)
    }

    pub fn parse(line: &str, lineno: usize) -> Result<Self> {
        let bad = |reason: &str| Error::Parse {
            line: lineno,
            reason: reason.to_string(),
        };
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 7 || f[0] != "SEG" {
            return Err(bad("expected SEG <start> <end> <survivors> <c0> <c1> <c2>"));
        }
        let int = |s: &str| s.parse::<u128>().map_err(|_| bad("bad integer"));
        let cnt = |s: &str| s.parse::<u64>().map_err(|_| bad("bad count"));
        let counts = Counts {
            survivors: cnt(f[3])?,
            c0: cnt(f[4])?,
            c1: cnt(f[5])?,
            c2: cnt(f[6])?,
            c_higher: 0,
        };
        if counts.survivors != counts.c0 + counts.c1 + counts.c2 {
            return Err(bad("survivors differ from c0 + c1 + c2"));
        }
        Ok(SegmentRecord {
            start: int(f[1])?,
            end: int(f[2])?,
            counts,
        })
    }
}

fn header(range: &SieveRange) -> String {
    format!("{MAGIC} {VERSION} n1={} n2={} B={}", range.n1(), range.n2(), range.bound())
}

/// Checkpoint file bound to one range. Appends are serialized and flushed.
pub struct Checkpoint {
    path: PathBuf,
    completed: Vec<SegmentRecord>,
    file: Mutex<File>,
}

impl Checkpoint {
    /// Opens or creates the file; an existing one must belong to the same range.
    pub fn open(path: &Path, range: &SieveRange) -> Result<Self> {
        let want = header(range);
        let mut completed = Vec::new();
        if path.exists() {
            let reader = BufReader::new(File::open(path)?);
            let mut lines = reader.lines();
            match lines.next() {
                Some(first) => {
                    let first = first?;
                    if first.trim() != want {
                        return Err(Error::Config(format!(
                            "checkpoint {} belongs to another run: found '{}', expected '{}'",
                            path.display(),
                            first.trim(),
                            want
                        )));
                    }
                }
                None => {}
            }
            for (i, line) in lines.enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec = SegmentRecord::parse(&line, i + 2)?;
                let off = rec.start.checked_sub(range.n1());
                let aligned = off.is_some_and(|o| o % super::SEGMENT_BITS as u128 == 0)
                    && rec.start <= range.n2()
                    && range.segment(((rec.start - range.n1()) / super::SEGMENT_BITS as u128) as u64).1 == rec.end;
                if !aligned {
                    return Err(Error::Parse {
                        line: i + 2,
                        reason: "segment bounds do not match the range".into(),
                    });
                }
                if completed.iter().any(|r: &SegmentRecord| r.start == rec.start) {
                    return Err(Error::Parse {
                        line: i + 2,
                        reason: "duplicate segment".into(),
                    });
                }
                completed.push(rec);
            }
        }
        let fresh = !path.exists() || std::fs::metadata(path)?.len() == 0;
        let mut file = OpenOptions::new().create(true).append(true).open(path)?;
        if fresh {
            writeln!(file, "{want}")?;
            file.flush()?;
        }
        Ok(Checkpoint {
            path: path.to_path_buf(),
            completed,
            file: Mutex::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Segments recorded before this run.
    pub fn completed(&self) -> &[SegmentRecord] {
        &self.completed
    }

    pub fn append(&self, rec: &SegmentRecord) -> Result<()> {
        let mut f = self.file.lock().map_err(|_| Error::Io("checkpoint lock poisoned".into()))?;
        writeln!(f, "{}", rec.to_line())?;
        f.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::super::{census_with, CensusOptions};
    use super::*;

    #[test]
    fn resume_reuses_recorded_segments() {
        let dir = std::env::temp_dir().join(format!("ckpt-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.ckpt");
        let _ = std::fs::remove_file(&path);
        let range = SieveRange::ending_at(10_000_000_000, 2 * super::super::SEGMENT_BITS as u128 + 5).unwrap();
        let opts = CensusOptions {
            checkpoint: Some(path.clone()),
            ..Default::default()
        };
        let first = census_with(&range, &opts).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("SIEVECKPT 1 "));
        // drop the last segment and fake the first one: resume must trust the file
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        let rec0 = SegmentRecord::parse(&lines[1], 2).unwrap();
        lines.truncate(2);
        let mut rec = rec0;
        rec.counts.c0 += 1;
        rec.counts.survivors += 1;
        lines[1] = rec.to_line();
        std::fs::write(&path, lines.join("\n") + "\n").unwrap();
        let resumed = census_with(&range, &opts).unwrap();
        assert_eq!(resumed.c0, first.c0 + 1);
        assert_eq!(resumed.c1, first.c1);

        let other = SieveRange::ending_at(20_000_000_000, 1000).unwrap();
        assert!(Checkpoint::open(&path, &other).is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn record_parsing() {
        let r = SegmentRecord::parse("SEG 10 20 5 3 1 1", 1).unwrap();
        assert_eq!(r.to_line(), "SEG 10 20 5 3 1 1");
        assert!(SegmentRecord::parse("SEG 10 20 5 3 1 0", 1).is_err());
        assert!(SegmentRecord::parse("SEG 10 20", 1).is_err());
    }
}
