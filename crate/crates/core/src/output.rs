//! Run-record CSV files and output-directory locking.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::adapt::StepRecord;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "step,dofs,eta,eta1,eta2,eta3,energy_error,iterations,rejections,wall_ms";

/// One CSV row; floats carry 17 significant digits, a missing energy error
/// is an empty field.
pub fn format_row(r: &StepRecord) -> String {
    let err = r.energy_error.map(|e| format!("{e:.16e}")).unwrap_or_default();
    format!(
        "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{},{:.16e}",
        r.step, r.dofs, r.eta, r.eta1, r.eta2, r.eta3, err, r.iterations, r.rejections, r.wall_ms
    )
}

/// Append-only CSV writer, flushed after every row.
pub struct RecordWriter {
    out: BufWriter<File>,
}

impl RecordWriter {
    pub fn create(path: &Path) -> io::Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{CSV_HEADER}")?;
        out.flush()?;
        Ok(Self { out })
    }

    pub fn append(&mut self, record: &StepRecord) -> io::Result<()> {
        writeln!(self.out, "{}", format_row(record))?;
        self.out.flush()
    }
}

fn field<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Parse(format!("line {line}: bad field {s:?}")))
}

/// Parses a CSV written by [`RecordWriter`]. `converged` is not stored and
/// reads back as `true`.
pub fn read_record_csv(text: &str) -> Result<Vec<StepRecord>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Parse("unexpected CSV header".into()));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, line)| {
            let n = n + 2;
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 10 {
                return Err(Error::Parse(format!("line {n}: expected 10 fields")));
            }
            Ok(StepRecord {
                step: field(f[0], n)?,
                dofs: field(f[1], n)?,
                eta: field(f[2], n)?,
                eta1: field(f[3], n)?,
                eta2: field(f[4], n)?,
                eta3: field(f[5], n)?,
                energy_error: if f[6].is_empty() {
                    None
                } else {
                    Some(field(f[6], n)?)
                },
                iterations: field(f[7], n)?,
                rejections: field(f[8], n)?,
                converged: true,
                wall_ms: field(f[9], n)?,
            })
        })
        .collect()
}

/// Presence-file lock on an output directory, released on drop.
#[derive(Debug)]
pub struct DirLock {
    path: PathBuf,
}

impl DirLock {
    /// Creates `dir` if needed and takes the lock; fails if `dir/.lock`
    /// already exists.
    pub fn acquire(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        let path = dir.join(".lock");
        OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
            .map_err(|e| {
                if e.kind() == io::ErrorKind::AlreadyExists {
                    io::Error::new(e.kind(), format!("{} is locked by another run", dir.display()))
                } else {
                    e
                }
            })?;
        Ok(Self { path })
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}
