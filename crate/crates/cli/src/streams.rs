//! Point-stream parsing: one point per line, comma-separated decimals in
//! [0,1). Blank lines and `#` comments are skipped.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use haarthin_core::{CandidateSource, Error as CoreError, PointSet};

/// Parses one candidate line; reports the axis count on mismatch.
pub fn parse_point_line(line: &str, dim: usize) -> Result<Vec<f64>> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != dim {
        bail!(
            "expected {dim} comma-separated coordinates, found {}",
            fields.len()
        );
    }
    let mut point = Vec::with_capacity(dim);
    for field in fields {
        let value: f64 = field
            .trim()
            .parse()
            .map_err(|_| anyhow!("coordinate {:?} is not a number", field.trim()))?;
        if !(0.0..1.0).contains(&value) {
            bail!("coordinate {value} is outside [0,1)");
        }
        point.push(value);
    }
    Ok(point)
}

fn is_content(line: &str) -> bool {
    let trimmed = line.trim();
    !trimmed.is_empty() && !trimmed.starts_with('#')
}

/// Reads a whole point file into memory (used by the disc/bias commands).
pub fn read_point_set(reader: impl Read, dim: usize, label: &str) -> Result<PointSet> {
    let mut points = PointSet::new(dim);
    for (index, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.with_context(|| format!("reading {label}"))?;
        if !is_content(&line) {
            continue;
        }
        let point =
            parse_point_line(&line, dim).with_context(|| format!("{label}:{}", index + 1))?;
        points
            .push(&point)
            .map_err(|e| anyhow!("{label}:{}: {e}", index + 1))?;
    }
    Ok(points)
}

pub fn read_point_file(path: &Path, dim: usize) -> Result<PointSet> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_point_set(file, dim, &path.display().to_string())
}

/// Streaming candidate source over a point file; reopened per run so every
/// replication consumes the same stream from the start.
pub struct FileSource {
    path: PathBuf,
    dim: usize,
    lines: std::io::Lines<BufReader<File>>,
    line_no: u64,
    /// Detail for the last parse failure (the core error is unit-like).
    pub last_error: Option<String>,
}

impl FileSource {
    pub fn open(path: &Path, dim: usize) -> Result<Self> {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        Ok(FileSource {
            path: path.to_path_buf(),
            dim,
            lines: BufReader::new(file).lines(),
            line_no: 0,
            last_error: None,
        })
    }

    pub fn reopen(&mut self) -> Result<()> {
        *self = FileSource::open(&self.path, self.dim)?;
        Ok(())
    }
}

impl CandidateSource for FileSource {
    fn dim(&self) -> usize {
        self.dim
    }

    fn next_point(&mut self, out: &mut [f64]) -> Result<bool, CoreError> {
        loop {
            let line = match self.lines.next() {
                None => return Ok(false),
                Some(Err(e)) => {
                    self.last_error = Some(format!("{}: {e}", self.path.display()));
                    return Err(CoreError::SourceFailure);
                }
                Some(Ok(line)) => line,
            };
            self.line_no += 1;
            if !is_content(&line) {
                continue;
            }
            match parse_point_line(&line, self.dim) {
                Ok(point) => {
                    out.copy_from_slice(&point);
                    return Ok(true);
                }
                Err(e) => {
                    self.last_error =
                        Some(format!("{}:{}: {e}", self.path.display(), self.line_no));
                    return Err(CoreError::SourceFailure);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    #[test]
    fn parses_points_and_reports_lines() {
        let ps = read_point_set(Cursor::new("0.1,0.2\n\n# note\n0.3,0.4\n"), 2, "test").unwrap();
        assert_eq!(ps.len(), 2);
        assert_eq!(ps.get(1), &[0.3, 0.4]);

        let err = read_point_set(Cursor::new("0.5,abc\n"), 2, "test").unwrap_err();
        assert!(format!("{err:#}").contains("test:1"), "{err:#}");

        let err = read_point_set(Cursor::new("0.5\n"), 2, "test").unwrap_err();
        assert!(format!("{err:#}").contains("expected 2"), "{err:#}");

        let err = read_point_set(Cursor::new("0.5,1.5\n"), 2, "test").unwrap_err();
        assert!(format!("{err:#}").contains("outside"), "{err:#}");
    }
}
