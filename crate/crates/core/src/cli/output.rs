//! Output staging: checksummed files, tables, the run manifest and state
//! snapshots.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{hex, Derived, TableFormat};
use crate::error::{Error, Result};
use crate::params::{Species, UnitSystem};
use crate::propagator::{Grid, MatterState};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Path relative to the output directory, `/`-separated.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

/// Writes files under one output directory and records each in a manifest.
#[derive(Debug)]
pub struct Artifacts {
    root: PathBuf,
    files: Vec<ManifestEntry>,
}

impl Artifacts {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| Error::Io(format!("{}: {e}", root.display())))?;
        let meta = fs::metadata(root).map_err(|e| Error::Io(format!("{}: {e}", root.display())))?;
        if meta.permissions().readonly() {
            return Err(Error::Io(format!("{}: output directory is not writable", root.display())));
        }
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::Io(format!("{}: {e}", parent.display())))?;
        }
        fs::write(&path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.files.retain(|f| f.path != rel);
        self.files.push(ManifestEntry {
            path: rel.to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn write_table(&mut self, stem: &str, table: &Table, format: TableFormat) -> Result<String> {
        let (name, body) = match format {
            TableFormat::Csv => (format!("{stem}.csv"), table.to_csv()),
            TableFormat::Json => (format!("{stem}.json"), table.to_json()),
        };
        self.write(&name, body.as_bytes())?;
        Ok(name)
    }

    /// Adopts another staging area's entries under `prefix/`.
    pub fn absorb(&mut self, prefix: &str, other: Artifacts) {
        for mut f in other.files {
            f.path = format!("{prefix}/{}", f.path);
            self.files.push(f);
        }
    }

    pub fn into_files(mut self) -> Vec<ManifestEntry> {
        self.files.sort_by(|a, b| a.path.cmp(&b.path));
        self.files
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}
impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Column-named table written as CSV or as a JSON array of objects.
/// Floats use the shortest representation that round-trips.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(v) => format!("{v:?}"),
                    Cell::Int(v) => v.to_string(),
                    Cell::Text(s) => s.clone(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = serde_json::Map::new();
                for (name, c) in self.columns.iter().zip(row) {
                    let v = match c {
                        // non-finite values become null
                        Cell::Num(v) => serde_json::Number::from_f64(*v)
                            .map(serde_json::Value::Number)
                            .unwrap_or(serde_json::Value::Null),
                        Cell::Int(v) => serde_json::Value::from(*v),
                        Cell::Text(s) => serde_json::Value::from(s.clone()),
                    };
                    obj.insert(name.clone(), v);
                }
                serde_json::Value::Object(obj)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&rows).expect("table serializes");
        s.push('\n');
        s
    }
}

/// Internal-unit parameters a run actually used.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedParameters {
    pub units: UnitSystem,
    pub species: [Species; 2],
    pub densities: [f64; 2],
    pub envelope_width: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub packet_width: Option<f64>,
}

/// Contents of `summary.json`. Carries no timestamps or absolute paths, so
/// identical inputs produce identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    /// False when the run was interrupted; the listed files are partial.
    pub complete: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameters: Option<ResolvedParameters>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derived: Option<Derived>,
    pub warnings: Vec<String>,
    pub files: Vec<ManifestEntry>,
}

impl RunSummary {
    pub fn new(command: &str) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_hash: None,
            complete: true,
            parameters: None,
            derived: None,
            warnings: Vec::new(),
            files: Vec::new(),
        }
    }

    /// Writes `summary.json` listing every file staged in `artifacts`.
    pub fn finish(mut self, artifacts: Artifacts) -> Result<Self> {
        let root = artifacts.root().to_path_buf();
        self.files = artifacts.into_files();
        let mut body = serde_json::to_string_pretty(&self).expect("summary serializes");
        body.push('\n');
        let path = root.join("summary.json");
        fs::write(&path, body).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Ok(self)
    }

    /// Files whose contents no longer match the manifest.
    pub fn verify(&self, root: &Path) -> Vec<String> {
        self.files
            .iter()
            .filter(|f| match fs::read(root.join(&f.path)) {
                Ok(b) => sha256_hex(&b) != f.sha256 || b.len() as u64 != f.bytes,
                Err(_) => true,
            })
            .map(|f| f.path.clone())
            .collect()
    }
}

/// Sidecar header for a state snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub points: usize,
    pub spacing: f64,
    pub components: usize,
    pub byte_order: String,
    /// `re, im` pairs, component 1 then component 2.
    pub layout: String,
    pub z: f64,
}

const LAYOUT: &str = "component-major, interleaved re/im float64";

impl SnapshotHeader {
    pub fn for_state(state: &MatterState) -> Self {
        Self {
            points: state.grid.points(),
            spacing: state.grid.spacing(),
            components: 2,
            byte_order: "little".into(),
            layout: LAYOUT.into(),
            z: state.z,
        }
    }
}

pub fn snapshot_csv(state: &MatterState) -> String {
    let mut t = Table::new(["y", "re_psi1", "im_psi1", "re_psi2", "im_psi2"]);
    for (i, y) in state.grid.positions().into_iter().enumerate() {
        let a = state.amplitudes[0][i];
        let b = state.amplitudes[1][i];
        t.push(vec![y.into(), a.re.into(), a.im.into(), b.re.into(), b.im.into()]);
    }
    t.to_csv()
}

pub fn snapshot_binary(state: &MatterState) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 * state.grid.points());
    for comp in &state.amplitudes {
        for a in comp {
            out.extend_from_slice(&a.re.to_le_bytes());
            out.extend_from_slice(&a.im.to_le_bytes());
        }
    }
    out
}

pub fn header_json(state: &MatterState) -> String {
    let mut s = serde_json::to_string_pretty(&SnapshotHeader::for_state(state)).expect("header serializes");
    s.push('\n');
    s
}

fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Loads a snapshot written by `simulate`: a `.bin` file with its `.json`
/// header, or a `.csv` file (header optional, used for the exact spacing
/// and z when present).
pub fn load_snapshot(path: &Path) -> Result<MatterState> {
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", path.display()));
    let header: Option<SnapshotHeader> = match fs::read_to_string(sidecar(path)) {
        Ok(s) if sidecar(path) != path => Some(
            serde_json::from_str(&s).map_err(|e| Error::Parse(format!("{}: {e}", sidecar(path).display())))?,
        ),
        _ => None,
    };
    let is_binary = path.extension().is_some_and(|e| e == "bin");
    if is_binary {
        let h = header.ok_or_else(|| Error::Io(format!("{}: missing .json header", path.display())))?;
        if h.components != 2 || h.byte_order != "little" {
            return Err(Error::Parse(format!("{}: unsupported snapshot header", path.display())));
        }
        let bytes = fs::read(path).map_err(io)?;
        if bytes.len() != 32 * h.points {
            return Err(Error::Parse(format!(
                "{}: expected {} bytes, found {}",
                path.display(),
                32 * h.points,
                bytes.len()
            )));
        }
        let vals: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        let comp = |j: usize| -> Vec<Complex64> {
            vals[2 * j * h.points..2 * (j + 1) * h.points]
                .chunks_exact(2)
                .map(|p| Complex64::new(p[0], p[1]))
                .collect()
        };
        let grid = Grid::new(h.points, h.spacing)?;
        return MatterState::from_amplitudes(grid, [comp(0), comp(1)], h.z);
    }
    let text = fs::read_to_string(path).map_err(io)?;
    let mut ys = Vec::new();
    let mut amps = [Vec::new(), Vec::new()];
    for (lineno, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let vals: std::result::Result<Vec<f64>, _> = line.split(',').map(|v| v.trim().parse::<f64>()).collect();
        let vals = match vals {
            Ok(v) if v.len() == 5 => v,
            _ => {
                return Err(Error::Parse(format!(
                    "{}: line {}: expected 5 numbers",
                    path.display(),
                    lineno + 1
                )))
            }
        };
        ys.push(vals[0]);
        amps[0].push(Complex64::new(vals[1], vals[2]));
        amps[1].push(Complex64::new(vals[3], vals[4]));
    }
    let (spacing, z) = match &header {
        Some(h) => (h.spacing, h.z),
        None if ys.len() >= 2 => ((ys[ys.len() - 1] - ys[0]) / (ys.len() - 1) as f64, 0.0),
        None => return Err(Error::Parse(format!("{}: too few rows", path.display()))),
    };
    let grid = Grid::new(ys.len(), spacing)?;
    MatterState::from_amplitudes(grid, amps, z)
}
