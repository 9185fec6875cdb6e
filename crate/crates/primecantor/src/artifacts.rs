//! Run artifacts: CSV emission with a bundled reader, the reproducibility
//! manifest, and the key=value config file.
//!
//! Every CSV a command writes is re-parseable by `read_csv`; reruns with the
//! same manifest inputs produce byte-identical CSV (the manifest's wall-time
//! field is the only thing that varies). All floats print with 17 significant
//! digits so regression diffs are meaningful.

use crate::error::{Error, Result};
use crate::util::fmt17;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Schema identifiers, versioned in the manifest.
pub const SCHEMA_GAPS: &str = "gaps-v1:n,p_n,d_n";
pub const SCHEMA_RECORDS: &str = "rk-records-v1:n,p_n,d_n,window_min,normalized";
pub const SCHEMA_CRAMER: &str = "cramer-records-v1:seed,n,p_n,d_n,window_min,normalized";
pub const SCHEMA_HOHEISEL: &str = "hoheisel-v1:a,h,count,ratio";
pub const SCHEMA_SCAN: &str = "scan-v1:r,value,lower_band,upper_band";
pub const SCHEMA_TAIL: &str = "tail-v1:r,value,lower_band,upper_band,ratio";
pub const SCHEMA_ANNULUS: &str = "annulus-v1:r,ratio,annulus_normalized,tail_normalized,empty";
pub const SCHEMA_SERIES: &str = "series-v1:index,term,ln_term,ln_partial_sum";

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub crate_version: String,
    pub schema: String,
    pub config: BTreeMap<String, String>,
    pub seeds: Vec<u64>,
    pub truncation: Option<u64>,
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn new(command: &str, schema: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            argv: std::env::args().collect(),
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            schema: schema.to_string(),
            config: BTreeMap::new(),
            seeds: vec![],
            truncation: None,
            outputs: vec![],
            wall_time_s: 0.0,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Parse(format!("manifest serialization: {e}")))?;
        f.write_all(json.as_bytes())?;
        f.write_all(b"\n")?;
        Ok(())
    }
}

/// A cell in a CSV row.
#[derive(Debug, Clone)]
pub enum Cell {
    Int(i64),
    UInt(u64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::UInt(v) => v.to_string(),
            Cell::Float(v) => fmt17(*v),
            Cell::Text(s) => {
                debug_assert!(!s.contains(','), "CSV cells must not contain commas");
                s.clone()
            }
        }
    }
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<Cell>]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        let line: Vec<String> = row.iter().map(Cell::render).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Bundled reader: header plus string cells.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse(format!("{}: empty CSV", path.display())))?
        .split(',')
        .map(str::to_string)
        .collect::<Vec<_>>();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<String> = line.split(',').map(str::to_string).collect();
        if cells.len() != header.len() {
            return Err(Error::Parse(format!(
                "{}: row {} has {} cells, header has {}",
                path.display(),
                i + 2,
                cells.len(),
                header.len()
            )));
        }
        rows.push(cells);
    }
    Ok((header, rows))
}

/// Flat key=value config; '#' starts a comment. Flags override file values;
/// precedence is documented in the README.
pub fn parse_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn parse_config_str(text: &str) -> std::result::Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value, got {raw:?}", i + 1))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// Accept integers in plain or scientific form ("100000", "1e8", "2.5e6").
pub fn parse_u64_flag(s: &str) -> std::result::Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = s.parse().map_err(|e| format!("{s:?}: {e}"))?;
    if !(f.is_finite() && f >= 0.0 && f < 1.8e19) {
        return Err(format!("{s:?} out of unsigned range"));
    }
    if (f.fract()).abs() > 1e-6 {
        return Err(format!("{s:?} is not an integer"));
    }
    Ok(f.round() as u64)
}

/// Resolve an output path under the output directory.
pub fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
