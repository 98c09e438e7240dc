//! Output staging, digests, timestamps and the run manifest.
//!
//! Every command writes its outputs to temporary names and renames them in
//! one pass only after the whole run has succeeded, so a nonzero exit never
//! leaves partial files behind. The manifest goes last and records a sha256
//! digest of each committed file.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct OutputRecord {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub threads: usize,
    pub started_at: String,
    pub finished_at: String,
    pub duration_ms: u128,
    pub config: serde_json::Value,
    pub outputs: Vec<OutputRecord>,
}

/// Staged output files, committed atomically or cleaned up on drop.
pub struct OutputStage {
    dir: PathBuf,
    staged: Vec<(PathBuf, String, OutputRecord)>,
    committed: bool,
}

impl OutputStage {
    pub fn new(dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(OutputStage {
            dir: dir.to_path_buf(),
            staged: Vec::new(),
            committed: false,
        })
    }

    /// Stages one output file from in-memory bytes.
    pub fn add(&mut self, name: &str, bytes: &[u8]) -> std::io::Result<()> {
        let tmp = self
            .dir
            .join(format!(".{}.tmp-{}", name, std::process::id()));
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        let mut hasher = Sha256::new();
        hasher.update(bytes);
        let digest = hasher.finalize();
        let record = OutputRecord {
            path: name.to_string(),
            bytes: bytes.len(),
            sha256: hex(&digest),
        };
        self.staged.push((tmp, name.to_string(), record));
        Ok(())
    }

    /// Renames every staged file into place and writes the manifest last.
    pub fn commit(mut self, manifest: ManifestDraft) -> std::io::Result<Vec<OutputRecord>> {
        let mut records = Vec::with_capacity(self.staged.len());
        for (tmp, name, record) in self.staged.drain(..) {
            fs::rename(tmp, self.dir.join(&name))?;
            records.push(record);
        }
        self.committed = true;
        let finished = SystemTime::now();
        let full = RunManifest {
            command: manifest.command,
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: manifest.seed,
            threads: manifest.threads,
            started_at: iso8601(manifest.started_at),
            finished_at: iso8601(finished),
            duration_ms: finished
                .duration_since(manifest.started_at)
                .unwrap_or(Duration::ZERO)
                .as_millis(),
            config: manifest.config,
            outputs: records,
        };
        let body = serde_json::to_vec_pretty(&full).expect("manifest serializes");
        let tmp = self
            .dir
            .join(format!(".manifest.json.tmp-{}", std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&body)?;
            f.write_all(b"\n")?;
            f.sync_all()?;
        }
        fs::rename(tmp, self.dir.join("manifest.json"))?;
        Ok(full.outputs)
    }
}

impl Drop for OutputStage {
    fn drop(&mut self) {
        if !self.committed {
            for (tmp, _, _) in &self.staged {
                let _ = fs::remove_file(tmp);
            }
        }
    }
}

pub struct ManifestDraft {
    pub command: String,
    pub seed: u64,
    pub threads: usize,
    pub started_at: SystemTime,
    pub config: serde_json::Value,
}

fn hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

/// UTC ISO-8601 with millisecond precision, e.g. 2026-08-08T12:34:56.789Z.
pub fn iso8601(t: SystemTime) -> String {
    let d = t.duration_since(UNIX_EPOCH).unwrap_or(Duration::ZERO);
    let secs = d.as_secs();
    let millis = d.subsec_millis();
    let days = (secs / 86_400) as i64;
    let rem = secs % 86_400;
    let (h, m, s) = (rem / 3600, (rem % 3600) / 60, rem % 60);
    let (year, month, day) = civil_from_days(days);
    format!("{year:04}-{month:02}-{day:02}T{h:02}:{m:02}:{s:02}.{millis:03}Z")
}

/// Days since 1970-01-01 to (year, month, day), Gregorian.
fn civil_from_days(z: i64) -> (i64, u32, u32) {
    let z = z + 719_468;
    let era = if z >= 0 { z } else { z - 146_096 } / 146_097;
    let doe = (z - era * 146_097) as u64;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe as i64 + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let m = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    (if m <= 2 { y + 1 } else { y }, m, d)
}

/// A CSV buffer with comma separators, '.' decimals and LF line endings.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        let mut buf = String::new();
        buf.push_str(header);
        buf.push('\n');
        Csv { buf }
    }

    pub fn row(&mut self, fields: &[CsvField]) {
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            match f {
                CsvField::Int(v) => self.buf.push_str(&v.to_string()),
                CsvField::Float(v) => self.buf.push_str(&format_float(*v)),
            }
        }
        self.buf.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf.into_bytes()
    }
}

pub enum CsvField {
    Int(i64),
    Float(f64),
}

/// Shortest round-trip float formatting; the decimal separator is always '.'.
pub fn format_float(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iso8601_known_instants() {
        assert_eq!(iso8601(UNIX_EPOCH), "1970-01-01T00:00:00.000Z");
        let t = UNIX_EPOCH + Duration::from_millis(1_700_000_000_123);
        // 2023-11-14T22:13:20.123Z
        assert_eq!(iso8601(t), "2023-11-14T22:13:20.123Z");
        let t = UNIX_EPOCH + Duration::from_secs(951_782_400); // 2000-02-29
        assert_eq!(iso8601(t), "2000-02-29T00:00:00.000Z");
    }

    #[test]
    fn csv_rows_and_floats() {
        let mut csv = Csv::new("a,b");
        csv.row(&[CsvField::Int(1), CsvField::Float(0.5)]);
        csv.row(&[CsvField::Int(-2), CsvField::Float(1.0 / 3.0)]);
        let text = String::from_utf8(csv.into_bytes()).unwrap();
        assert_eq!(text, "a,b\n1,0.5\n-2,0.3333333333333333\n");
    }

    #[test]
    fn stage_cleans_up_on_drop() {
        let dir = std::env::temp_dir().join(format!("fbmzero-stage-{}", std::process::id()));
        {
            let mut stage = OutputStage::new(&dir).unwrap();
            stage.add("file.csv", b"data").unwrap();
            // dropped without commit
        }
        assert!(!dir.join("file.csv").exists());
        assert!(fs::read_dir(&dir).unwrap().next().is_none());
        fs::remove_dir_all(&dir).unwrap();
    }
}
