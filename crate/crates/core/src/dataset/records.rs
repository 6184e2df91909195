//! Line-delimited record files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::engine::Trajectory;
use crate::instance::{is_hitting_set, HittingSetInstance, Solution};
use crate::numfmt::to_json_line;
use crate::oracle::OptimalSolution;
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

/// Records checked on read beyond what deserialisation guarantees.
pub trait Record: Serialize + DeserializeOwned {
    fn check(&self) -> std::result::Result<(), String>;
}

/// One training example: instance, recorded trajectory and optional optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub schema: u32,
    pub split: Split,
    pub instance: HittingSetInstance,
    pub trajectory: Trajectory,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimal: Option<OptimalSolution>,
}

impl Record for DatasetRecord {
    fn check(&self) -> std::result::Result<(), String> {
        if self.schema != SCHEMA_VERSION {
            return Err(format!(
                "schema version {} (expected {SCHEMA_VERSION})",
                self.schema
            ));
        }
        let (n, m) = (self.instance.n_elements(), self.instance.n_sets());
        if self.trajectory.steps.is_empty() {
            return Err("trajectory has no steps".into());
        }
        for (i, s) in self.trajectory.steps.iter().enumerate() {
            if s.x.len() != n || s.r.len() != n || s.delta.len() != m {
                return Err(format!("trajectory step {i} does not match the instance shape"));
            }
            if s.x.iter().any(|&v| v > 1) {
                return Err(format!("trajectory step {i} has a non-binary x"));
            }
        }
        if let Some(opt) = &self.optimal {
            match is_hitting_set(&self.instance, &opt.chosen) {
                Ok(true) => {}
                Ok(false) => return Err("stored optimum is not a hitting set".into()),
                Err(e) => return Err(e.to_string()),
            }
        }
        Ok(())
    }
}

/// A solution produced by some solver for one instance, keyed by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub schema: u32,
    pub id: String,
    /// Producer, e.g. `pd`, `pd-uniform`, `cover`, `exact`, `model`.
    pub source: String,
    pub chosen: Vec<usize>,
    pub weight: f64,
    /// Node count of the generating graph.
    pub size: usize,
    pub dataset_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<String>,
    #[serde(default)]
    pub cleanup_used: bool,
    pub feasible: bool,
}

impl Default for SolutionRecord {
    fn default() -> Self {
        Self {
            schema: SCHEMA_VERSION,
            id: String::new(),
            source: String::new(),
            chosen: Vec::new(),
            weight: 0.0,
            size: 0,
            dataset_seed: 0,
            status: None,
            cleanup_used: false,
            feasible: false,
        }
    }
}

impl SolutionRecord {
    /// Record for `solution`, taking size and seed from the instance metadata
    /// (falling back to the element count and 0).
    pub fn new(instance: &HittingSetInstance, source: &str, solution: &Solution) -> Result<Self> {
        let meta = instance.meta();
        Ok(Self {
            id: instance.id().to_string(),
            source: source.to_string(),
            chosen: solution.chosen.clone(),
            weight: solution.weight,
            size: meta
                .get("size")
                .and_then(|v| v.as_u64())
                .map_or(instance.n_elements(), |v| v as usize),
            dataset_seed: meta.get("dataset_seed").and_then(|v| v.as_u64()).unwrap_or(0),
            feasible: is_hitting_set(instance, &solution.chosen)?,
            ..Self::default()
        })
    }
}

impl Record for SolutionRecord {
    fn check(&self) -> std::result::Result<(), String> {
        if self.schema != SCHEMA_VERSION {
            return Err(format!(
                "schema version {} (expected {SCHEMA_VERSION})",
                self.schema
            ));
        }
        Ok(())
    }
}

impl Record for HittingSetInstance {
    fn check(&self) -> std::result::Result<(), String> {
        Ok(())
    }
}

pub fn write_records<T: Serialize>(mut out: impl Write, records: &[T]) -> Result<()> {
    for rec in records {
        out.write_all(to_json_line(rec)?.as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads one record per non-blank line; errors name the 1-based line.
pub fn read_records<T: Record>(input: impl BufRead) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: T = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        rec.check().map_err(|message| Error::Parse {
            line: line_no,
            message,
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_records_file<T: Serialize>(path: impl AsRef<Path>, records: &[T]) -> Result<()> {
    write_records(BufWriter::new(File::create(path)?), records)
}

pub fn read_records_file<T: Record>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    read_records(BufReader::new(File::open(path)?))
}
