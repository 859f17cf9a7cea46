//! Persistence: a plain-text fiducial file (diff-able, one component per
//! line) and an append-only JSON-lines catalog for full solution records.
//! Both formats carry a schema tag and round-trip binary64 values bitwise via
//! shortest-representation decimals.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Result, SicError};

pub const CATALOG_SCHEMA: u32 = 1;
const FIDUCIAL_MAGIC: &str = "sicfid";
const FIDUCIAL_VERSION: u32 = 1;

/// Serialized form of a symplectic pair [F|p].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorRepr {
    pub modulus: u64,
    pub f: [[u64; 2]; 2],
    pub p: [u64; 2],
}

/// Everything worth keeping about one found fiducial. The vector itself is
/// the ground truth; the remaining fields are derived annotations plus the
/// provenance needed to replay the search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub schema: u32,
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub entries: Vec<(f64, f64)>,
    pub cost_gap: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stabilizer_order: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stabilizer_generators: Vec<GeneratorRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zauner_class: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fingerprint_digest: Option<String>,
    pub seed: u64,
    pub trial: usize,
    pub timestamp: u64,
}

impl SolutionRecord {
    pub fn new(d: usize, entries: &[C64], cost_gap: f64, seed: u64, trial: usize) -> Self {
        SolutionRecord {
            schema: CATALOG_SCHEMA,
            d,
            label: None,
            entries: entries.iter().map(|z| (z.re, z.im)).collect(),
            cost_gap,
            stabilizer_order: None,
            stabilizer_generators: Vec::new(),
            zauner_class: None,
            fingerprint_digest: None,
            seed,
            trial,
            timestamp: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|t| t.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn vector(&self) -> Vec<C64> {
        self.entries.iter().map(|&(re, im)| C64::new(re, im)).collect()
    }
}

fn io_err(path: &Path, source: std::io::Error) -> SicError {
    SicError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn format_err(path: &Path, line: usize, msg: impl Into<String>) -> SicError {
    SicError::Format {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Writes the vector as text: `sicfid 1`, `d <N>`, optional `# label <text>`,
/// then one `<re> <im>` line per component. Rust's shortest-round-trip float
/// formatting makes the read-back bitwise exact.
pub fn write_fiducial(record: &SolutionRecord, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("{FIDUCIAL_MAGIC} {FIDUCIAL_VERSION}\n"));
    out.push_str(&format!("d {}\n", record.d));
    if let Some(label) = &record.label {
        out.push_str(&format!("# label {label}\n"));
    }
    for &(re, im) in &record.entries {
        if !re.is_finite() || !im.is_finite() {
            return Err(SicError::Format {
                path: path.to_path_buf(),
                line: 0,
                msg: "non-finite component".into(),
            });
        }
        out.push_str(&format!("{re} {im}\n"));
    }
    let mut f = File::create(path).map_err(|e| io_err(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| io_err(path, e))
}

pub fn read_fiducial(path: &Path) -> Result<SolutionRecord> {
    let f = File::open(path).map_err(|e| io_err(path, e))?;
    let mut lines = BufReader::new(f).lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| format_err(path, 1, "empty file"))?;
    let header = header.map_err(|e| io_err(path, e))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(FIDUCIAL_MAGIC) {
        return Err(format_err(path, 1, "missing format tag"));
    }
    let version: u32 = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| format_err(path, 1, "missing format version"))?;
    if version != FIDUCIAL_VERSION {
        return Err(SicError::UnknownSchema(version));
    }

    let (_, dim_line) = lines
        .next()
        .ok_or_else(|| format_err(path, 2, "missing dimension line"))?;
    let dim_line = dim_line.map_err(|e| io_err(path, e))?;
    let d: usize = dim_line
        .strip_prefix("d ")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| format_err(path, 2, "expected `d <N>`"))?;

    let mut label = None;
    let mut entries = Vec::with_capacity(d);
    for (idx, line) in lines {
        let line = line.map_err(|e| io_err(path, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(text) = rest.trim_start().strip_prefix("label ") {
                label = Some(text.to_string());
            }
            continue;
        }
        let mut parts = line.split_whitespace();
        let parse = |s: Option<&str>| -> Option<f64> { s.and_then(|t| t.parse().ok()) };
        let (re, im) = match (parse(parts.next()), parse(parts.next()), parts.next()) {
            (Some(re), Some(im), None) => (re, im),
            _ => return Err(format_err(path, idx + 1, "expected `<re> <im>`")),
        };
        if !re.is_finite() || !im.is_finite() {
            return Err(format_err(path, idx + 1, "non-finite component"));
        }
        entries.push((re, im));
    }
    if entries.len() != d {
        return Err(format_err(
            path,
            0,
            format!("expected {d} components, found {}", entries.len()),
        ));
    }
    Ok(SolutionRecord {
        schema: CATALOG_SCHEMA,
        d,
        label,
        entries,
        cost_gap: 0.0,
        stabilizer_order: None,
        stabilizer_generators: Vec::new(),
        zauner_class: None,
        fingerprint_digest: None,
        seed: 0,
        trial: 0,
        timestamp: 0,
    })
}

/// Appends one JSON line; the file is an order-preserving, resumable log.
pub fn catalog_append(record: &SolutionRecord, path: &Path) -> Result<()> {
    let mut line = serde_json::to_string(record)
        .map_err(|e| SicError::Internal(format!("serialize record: {e}")))?;
    line.push('\n');
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| io_err(path, e))?;
    f.write_all(line.as_bytes()).map_err(|e| io_err(path, e))
}

/// Reads every record in the catalog. An empty file is an empty catalog; an
/// unknown schema version is an error, never silently reinterpreted.
pub fn catalog_read(path: &Path) -> Result<Vec<SolutionRecord>> {
    let f = File::open(path).map_err(|e| io_err(path, e))?;
    let mut records = Vec::new();
    for (idx, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: SolutionRecord = serde_json::from_str(&line)
            .map_err(|e| format_err(path, idx + 1, format!("bad record: {e}")))?;
        if record.schema != CATALOG_SCHEMA {
            return Err(SicError::UnknownSchema(record.schema));
        }
        records.push(record);
    }
    Ok(records)
}
