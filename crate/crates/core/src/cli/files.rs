//! Plot-ready grid files.
//!
//! CSV: one file per (source, kind, d) with `#`-prefixed metadata lines and a
//! `delta,value,count` table. JSON: one document per command holding the same
//! rows for every grid.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, OutputFormat};
use crate::analytic::{ConditionalGrid, GridKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Analytic,
    Simulated,
}

impl Source {
    fn name(self) -> &'static str {
        match self {
            Source::Analytic => "analytic",
            Source::Simulated => "simulated",
        }
    }
}

fn kind_name(kind: GridKind) -> &'static str {
    match kind {
        GridKind::Prob => "prob",
        GridKind::Density => "density",
    }
}

fn parse_kind(s: &str) -> Option<GridKind> {
    match s {
        "prob" => Some(GridKind::Prob),
        "density" => Some(GridKind::Density),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub delta: f64,
    pub value: f64,
    pub count: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    pub d: u32,
    pub kind: GridKind,
    pub rows: Vec<Row>,
}

/// The JSON document written by `analytic` and `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDocument {
    pub command: String,
    pub source: Source,
    pub config: ExperimentConfig,
    #[serde(default)]
    pub extra: serde_json::Map<String, serde_json::Value>,
    pub grids: Vec<GridRecord>,
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

impl GridRecord {
    pub fn from_grid(grid: &ConditionalGrid) -> Self {
        let rows = grid
            .delta_bins
            .iter()
            .zip(&grid.values)
            .enumerate()
            .map(|(i, (&delta, &value))| Row {
                delta: round6(delta),
                value,
                count: grid.counts.as_ref().map(|c| c[i]),
            })
            .collect();
        Self { d: grid.d, kind: grid.kind, rows }
    }

    pub fn into_grid(self) -> ConditionalGrid {
        let counts = self
            .rows
            .iter()
            .map(|r| r.count)
            .collect::<Option<Vec<u64>>>();
        ConditionalGrid {
            d: self.d,
            kind: self.kind,
            delta_bins: self.rows.iter().map(|r| r.delta).collect(),
            values: self.rows.iter().map(|r| r.value).collect(),
            counts,
        }
    }
}

pub fn csv_path(dir: &Path, source: Source, kind: GridKind, d: u32) -> PathBuf {
    dir.join(format!("{}_{}_d{d}.csv", source.name(), kind_name(kind)))
}

pub fn json_path(dir: &Path, source: Source) -> PathBuf {
    dir.join(format!("{}.json", source.name()))
}

fn metadata_lines(command: &str, config: &ExperimentConfig, extra: &[(String, String)]) -> Result<String> {
    let mut out = format!("# hopdist {command}\n# config: {}\n", serde_json::to_string(config)?);
    for (k, v) in extra {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    Ok(out)
}

fn write_csv_grid(
    path: &Path,
    command: &str,
    source: Source,
    config: &ExperimentConfig,
    extra: &[(String, String)],
    grid: &ConditionalGrid,
) -> Result<()> {
    let mut meta = extra.to_vec();
    meta.push(("source".into(), source.name().into()));
    meta.push(("kind".into(), kind_name(grid.kind).into()));
    meta.push(("d".into(), grid.d.to_string()));
    let mut buf = metadata_lines(command, config, &meta)?.into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["delta", "value", "count"])?;
        for (i, (delta, value)) in grid.delta_bins.iter().zip(&grid.values).enumerate() {
            let count = grid
                .counts
                .as_ref()
                .map(|c| c[i].to_string())
                .unwrap_or_default();
            w.write_record([format!("{delta:.6}"), value.to_string(), count])?;
        }
        w.flush()?;
    }
    fs::File::create(path)?.write_all(&buf)?;
    Ok(())
}

/// Write every grid in the configured format; returns the paths written.
pub fn write_grids(
    dir: &Path,
    command: &str,
    source: Source,
    config: &ExperimentConfig,
    extra: &[(String, String)],
    grids: &[ConditionalGrid],
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    match config.format {
        OutputFormat::Csv => grids
            .iter()
            .map(|g| {
                let path = csv_path(dir, source, g.kind, g.d);
                write_csv_grid(&path, command, source, config, extra, g).map(|_| path)
            })
            .collect(),
        OutputFormat::Json => {
            let doc = GridDocument {
                command: command.into(),
                source,
                config: config.clone(),
                extra: extra
                    .iter()
                    .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
                    .collect(),
                grids: grids.iter().map(GridRecord::from_grid).collect(),
            };
            let path = json_path(dir, source);
            write_json(&path, &doc)?;
            Ok(vec![path])
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn format_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format { path: path.to_path_buf(), reason: reason.into() }
}

/// Read one CSV grid file written by [`write_grids`].
pub fn read_csv_grid(path: &Path) -> Result<ConditionalGrid> {
    let text = fs::read_to_string(path)?;
    let mut d = None;
    let mut kind = None;
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        let body = line.trim_start_matches('#').trim();
        if let Some(v) = body.strip_prefix("d:") {
            d = v.trim().parse::<u32>().ok();
        } else if let Some(v) = body.strip_prefix("kind:") {
            kind = parse_kind(v.trim());
        }
    }
    let d = d.ok_or_else(|| format_err(path, "missing `# d:` metadata"))?;
    let kind = kind.ok_or_else(|| format_err(path, "missing `# kind:` metadata"))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or("").trim();
        let delta = field(0).parse::<f64>().map_err(|e| format_err(path, e.to_string()))?;
        let value = field(1).parse::<f64>().map_err(|e| format_err(path, e.to_string()))?;
        let count = match field(2) {
            "" => None,
            c => Some(c.parse::<u64>().map_err(|e| format_err(path, e.to_string()))?),
        };
        rows.push(Row { delta, value, count });
    }
    Ok(GridRecord { d, kind, rows }.into_grid())
}

/// Load every grid of `kind` from `dir`, from either the JSON document or
/// the per-d CSV files.
pub fn load_grids(dir: &Path, source: Source, kind: GridKind) -> Result<Vec<ConditionalGrid>> {
    let json = json_path(dir, source);
    if json.exists() {
        let doc: GridDocument = serde_json::from_str(&fs::read_to_string(&json)?)?;
        return Ok(doc
            .grids
            .into_iter()
            .filter(|g| g.kind == kind)
            .map(GridRecord::into_grid)
            .collect());
    }
    let prefix = format!("{}_{}_d", source.name(), kind_name(kind));
    let mut grids = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if name.starts_with(&prefix) && name.ends_with(".csv") {
            grids.push(read_csv_grid(&path)?);
        }
    }
    grids.sort_by_key(|g| g.d);
    Ok(grids)
}

/// The configuration embedded in the output of `source` under `dir`, if any.
pub fn dir_config(dir: &Path, source: Source) -> Option<ExperimentConfig> {
    let json = json_path(dir, source);
    if json.exists() {
        return read_config(&json).ok();
    }
    let prefix = format!("{}_", source.name());
    fs::read_dir(dir)
        .ok()?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with(&prefix) && n.ends_with(".csv"))
        })
        .min()
        .and_then(|p| read_config(&p).ok())
}

/// Extract the embedded experiment configuration from an output file (CSV
/// header line or JSON `config` key) or from a bare configuration JSON file.
pub fn read_config(path: &Path) -> Result<ExperimentConfig> {
    let file = fs::File::open(path)?;
    let mut first = String::new();
    BufReader::new(file).read_line(&mut first)?;
    if first.starts_with('#') {
        let text = fs::read_to_string(path)?;
        let line = text
            .lines()
            .take_while(|l| l.starts_with('#'))
            .find_map(|l| l.trim_start_matches('#').trim().strip_prefix("config:").map(str::to_owned))
            .ok_or_else(|| format_err(path, "no `# config:` header line"))?;
        return Ok(serde_json::from_str(line.trim())?);
    }
    let value: serde_json::Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    match value.get("config") {
        Some(cfg) => Ok(serde_json::from_value(cfg.clone())?),
        None => Ok(serde_json::from_value(value)?),
    }
}
