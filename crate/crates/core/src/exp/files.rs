//! CSV files for episode records and curve summaries.
//!
//! Every file starts with a `# config_hash=<hex>` line, then a header row,
//! then data rows. Floats use Rust's shortest round-trip formatting.

use std::fmt::Write as _;
use std::path::Path;

use crate::sac::EpisodeRecord;
use crate::{Error, Result};

pub const RECORDS_HEADER: &str = "episode,step,return";
pub const SUMMARY_HEADER: &str = "episode,mean,stderr,stderr_undefined";

/// Per-episode statistics across runs of one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSummary {
    pub config_hash: String,
    pub runs: usize,
    pub mean: Vec<f64>,
    /// Sample standard deviation over `√runs`; 0 for a single run.
    pub stderr: Vec<f64>,
}

impl CurveSummary {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn records_csv(config_hash: &str, records: &[EpisodeRecord]) -> String {
    let mut s = format!("# config_hash={config_hash}\n{RECORDS_HEADER}\n");
    for r in records {
        writeln!(s, "{},{},{}", r.episode, r.step, r.ret).unwrap();
    }
    s
}

pub fn write_records(path: &Path, config_hash: &str, records: &[EpisodeRecord]) -> Result<()> {
    write_file(path, &records_csv(config_hash, records))
}

fn parse_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_owned(),
        msg: msg.into(),
    }
}

/// Splits off the hash line, checks the header and returns the hash line
/// and the data rows.
fn split_csv(path: &Path, text: &str, header: &str) -> Result<(String, Vec<csv::StringRecord>)> {
    let (first, body) = text.split_once('\n').unwrap_or((text, ""));
    if first.is_empty() {
        return Err(parse_err(path, "empty file"));
    }
    let hash_line = first
        .strip_prefix("# config_hash=")
        .ok_or_else(|| parse_err(path, "missing config_hash line"))?
        .to_owned();
    let mut reader = csv::ReaderBuilder::new().from_reader(body.as_bytes());
    let found = reader
        .headers()
        .map_err(|e| parse_err(path, e.to_string()))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if found != header {
        return Err(parse_err(path, format!("expected header {header:?}, found {found:?}")));
    }
    let rows = reader
        .records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| parse_err(path, e.to_string()))?;
    Ok((hash_line, rows))
}

fn field<T: std::str::FromStr>(path: &Path, row: &csv::StringRecord, i: usize, col: usize) -> Result<T> {
    row.get(col)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| parse_err(path, format!("bad field {col} on data row {i}")))
}

fn check_width(path: &Path, row: &csv::StringRecord, i: usize, width: usize) -> Result<()> {
    if row.len() != width {
        return Err(parse_err(path, format!("data row {i} has {} fields, expected {width}", row.len())));
    }
    Ok(())
}

pub fn read_records(path: &Path) -> Result<(String, Vec<EpisodeRecord>)> {
    let text = read_file(path)?;
    let (hash, rows) = split_csv(path, &text, RECORDS_HEADER)?;
    let mut out = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        check_width(path, row, i, 3)?;
        out.push(EpisodeRecord {
            episode: field(path, row, i, 0)?,
            step: field(path, row, i, 1)?,
            ret: field(path, row, i, 2)?,
        });
    }
    Ok((hash.trim().to_owned(), out))
}

pub fn summary_csv(summary: &CurveSummary) -> String {
    let mut s = format!(
        "# config_hash={} runs={}\n{SUMMARY_HEADER}\n",
        summary.config_hash, summary.runs
    );
    let flag = u8::from(summary.runs < 2);
    for (i, (m, e)) in summary.mean.iter().zip(&summary.stderr).enumerate() {
        writeln!(s, "{i},{m},{e},{flag}").unwrap();
    }
    s
}

pub fn write_summary(path: &Path, summary: &CurveSummary) -> Result<()> {
    write_file(path, &summary_csv(summary))
}

pub fn read_summary(path: &Path) -> Result<CurveSummary> {
    let text = read_file(path)?;
    let (hash_line, rows) = split_csv(path, &text, SUMMARY_HEADER)?;
    let mut tokens = hash_line.split_whitespace();
    let config_hash = tokens.next().unwrap_or_default().to_owned();
    let runs = tokens
        .find_map(|t| t.strip_prefix("runs="))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| parse_err(path, "missing runs= on hash line"))?;
    let mut mean = Vec::with_capacity(rows.len());
    let mut stderr = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        check_width(path, row, i, 4)?;
        let episode: usize = field(path, row, i, 0)?;
        if episode != i {
            return Err(parse_err(path, format!("episode {episode} out of order")));
        }
        mean.push(field(path, row, i, 1)?);
        stderr.push(field(path, row, i, 2)?);
        let _flag: u8 = field(path, row, i, 3)?;
    }
    Ok(CurveSummary {
        config_hash,
        runs,
        mean,
        stderr,
    })
}
