//! Meta-evaluation datasets: one human matrix plus named metric matrices.
//!
//! On disk a dataset is a JSON manifest pointing at one CSV per matrix:
//!
//! ```json
//! {"human": {"path": "human.csv", "scale": [1, 5]},
//!  "metrics": [{"name": "bleu", "path": "bleu.csv"}]}
//! ```
//!
//! Matrix CSVs carry input ids in the header row and system ids in the first
//! column. Relative paths resolve against the manifest's directory.

use std::collections::HashSet;
use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{normalize_01, Scale, ScoreMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct MetricScores {
    pub name: String,
    pub scores: ScoreMatrix,
    pub scale: Option<Scale>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetaEvalDataset {
    human: ScoreMatrix,
    human_scale: Option<Scale>,
    metrics: Vec<MetricScores>,
}

impl MetaEvalDataset {
    pub fn new(
        human: ScoreMatrix,
        human_scale: Option<Scale>,
        metrics: Vec<MetricScores>,
    ) -> Result<Self> {
        if metrics.is_empty() {
            return Err(Error::InvalidDataset("at least one metric is required".into()));
        }
        let mut names = HashSet::new();
        for metric in &metrics {
            if !names.insert(metric.name.as_str()) {
                return Err(Error::InvalidDataset(format!(
                    "duplicate metric name {:?}",
                    metric.name
                )));
            }
            check_aligned(&human, &metric.scores, &format!("metric {:?}", metric.name))?;
        }
        Ok(Self {
            human,
            human_scale,
            metrics,
        })
    }

    /// Dataset from unscaled matrices, e.g. synthetic data.
    pub fn from_matrices(
        human: ScoreMatrix,
        metrics: impl IntoIterator<Item = (String, ScoreMatrix)>,
    ) -> Result<Self> {
        let metrics = metrics
            .into_iter()
            .map(|(name, scores)| MetricScores {
                name,
                scores,
                scale: None,
            })
            .collect();
        Self::new(human, None, metrics)
    }

    pub fn human(&self) -> &ScoreMatrix {
        &self.human
    }

    pub fn human_scale(&self) -> Option<Scale> {
        self.human_scale
    }

    pub fn metrics(&self) -> &[MetricScores] {
        &self.metrics
    }

    pub fn metric(&self, name: &str) -> Option<&MetricScores> {
        self.metrics.iter().find(|m| m.name == name)
    }

    pub fn metric_names(&self) -> Vec<&str> {
        self.metrics.iter().map(|m| m.name.as_str()).collect()
    }

    pub fn n_systems(&self) -> usize {
        self.human.n_systems()
    }

    pub fn n_inputs(&self) -> usize {
        self.human.n_inputs()
    }

    pub fn n_metrics(&self) -> usize {
        self.metrics.len()
    }

    /// Copy keeping only the metrics at `indices`, in that order.
    pub fn select_metrics(&self, indices: &[usize]) -> Result<Self> {
        let metrics = indices
            .iter()
            .map(|&i| {
                self.metrics.get(i).cloned().ok_or_else(|| {
                    Error::InvalidDataset(format!("metric index {i} out of range"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.human.clone(), self.human_scale, metrics)
    }

    /// Maps every matrix with a declared scale onto `[0, 1]`; matrices
    /// without one are kept as they are.
    pub fn normalized(&self) -> Result<Self> {
        let norm = |m: &ScoreMatrix, scale: Option<Scale>| match scale {
            Some(s) => normalize_01(m, Some(s)),
            None => Ok(m.clone()),
        };
        let unit = |scale: Option<Scale>| scale.map(|_| Scale { lo: 0.0, hi: 1.0 });
        let metrics = self
            .metrics
            .iter()
            .map(|m| {
                Ok(MetricScores {
                    name: m.name.clone(),
                    scores: norm(&m.scores, m.scale)?,
                    scale: unit(m.scale),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(
            norm(&self.human, self.human_scale)?,
            unit(self.human_scale),
            metrics,
        )
    }
}

fn check_aligned(human: &ScoreMatrix, other: &ScoreMatrix, context: &str) -> Result<()> {
    if human.n_systems() != other.n_systems() || human.n_inputs() != other.n_inputs() {
        return Err(Error::DimensionMismatch {
            context: context.to_string(),
            expected_rows: human.n_systems(),
            expected_cols: human.n_inputs(),
            rows: other.n_systems(),
            cols: other.n_inputs(),
        });
    }
    if !human.is_aligned_with(other) {
        return Err(Error::IdMismatch {
            context: context.to_string(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixEntry {
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<Scale>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricEntry {
    pub name: String,
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<Scale>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub human: MatrixEntry,
    pub metrics: Vec<MetricEntry>,
}

/// Reads and validates the dataset described by the manifest at `path`.
pub fn load_dataset(manifest_path: impl AsRef<Path>) -> Result<MetaEvalDataset> {
    let manifest_path = manifest_path.as_ref();
    let file = File::open(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let manifest: Manifest =
        serde_json::from_reader(std::io::BufReader::new(file)).map_err(|source| {
            Error::Manifest {
                path: manifest_path.to_path_buf(),
                source,
            }
        })?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new(""));
    let resolve = |p: &Path| base.join(p);

    let human_path = resolve(&manifest.human.path);
    let human = read_matrix_csv(&human_path)?;
    let mut metrics = Vec::with_capacity(manifest.metrics.len());
    for entry in &manifest.metrics {
        let path = resolve(&entry.path);
        let scores = read_matrix_csv(&path)?;
        check_aligned(&human, &scores, &path.display().to_string())?;
        metrics.push(MetricScores {
            name: entry.name.clone(),
            scores,
            scale: entry.scale,
        });
    }
    let dataset = MetaEvalDataset::new(human, manifest.human.scale, metrics)?;
    if let Some(scale) = dataset.human_scale {
        check_scale(dataset.human(), scale, &human_path)?;
    }
    for (entry, metric) in manifest.metrics.iter().zip(dataset.metrics()) {
        if let Some(scale) = metric.scale {
            check_scale(&metric.scores, scale, &resolve(&entry.path))?;
        }
    }
    Ok(dataset)
}

fn check_scale(m: &ScoreMatrix, scale: Scale, path: &Path) -> Result<()> {
    normalize_01(m, Some(scale))
        .map(|_| ())
        .map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
}

/// Parses one matrix CSV.
pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<ScoreMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(std::io::BufReader::new(file));
    let parse_err = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };

    let mut records = reader.records();
    let header = records
        .next()
        .ok_or_else(|| parse_err("empty file".into()))?
        .map_err(csv_err)?;
    let input_ids: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let width = header.len();

    let mut system_ids = Vec::new();
    let mut values = Vec::new();
    for (row, record) in records.enumerate() {
        let record = record.map_err(csv_err)?;
        let line = row + 2;
        if record.len() != width {
            return Err(parse_err(format!(
                "line {line}: expected {width} fields, found {}",
                record.len()
            )));
        }
        system_ids.push(record[0].to_string());
        for (col, cell) in record.iter().enumerate().skip(1) {
            if cell.is_empty() {
                return Err(parse_err(format!(
                    "line {line}: missing score for input {:?}",
                    input_ids[col - 1]
                )));
            }
            let v: f64 = cell.parse().map_err(|_| {
                parse_err(format!("line {line}: non-numeric cell {cell:?}"))
            })?;
            if !v.is_finite() {
                return Err(parse_err(format!("line {line}: non-finite cell {cell:?}")));
            }
            values.push(v);
        }
    }
    ScoreMatrix::new(system_ids, input_ids, values).map_err(|e| parse_err(e.to_string()))
}

/// Writes `m` in the format [`read_matrix_csv`] accepts.
///
/// Values use the shortest decimal form that parses back to the same bits.
pub fn write_matrix_csv(m: &ScoreMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(std::iter::once("system").chain(m.input_ids().iter().map(String::as_str)))
        .map_err(csv_err)?;
    for (i, id) in m.system_ids().iter().enumerate() {
        let mut record = vec![id.clone()];
        record.extend(m.row(i).iter().map(|v| v.to_string()));
        w.write_record(&record).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes every matrix plus a `manifest.json` into `dir`; returns the
/// manifest path.
pub fn save_dataset(dataset: &MetaEvalDataset, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_matrix_csv(dataset.human(), dir.join("human.csv"))?;
    let mut metrics = Vec::new();
    for (k, metric) in dataset.metrics().iter().enumerate() {
        let file = PathBuf::from(format!("metric_{k:03}.csv"));
        write_matrix_csv(&metric.scores, dir.join(&file))?;
        metrics.push(MetricEntry {
            name: metric.name.clone(),
            path: file,
            scale: metric.scale,
        });
    }
    let manifest = Manifest {
        human: MatrixEntry {
            path: "human.csv".into(),
            scale: dataset.human_scale(),
        },
        metrics,
    };
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
