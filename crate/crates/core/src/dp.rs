//! Discriminative power: the mean permutation-test p-value over all metric
//! pairs under one measure. Smaller values mean the measure separates
//! metrics more sharply.

use std::path::Path;

use crate::dataset::MetaEvalDataset;
use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::numeric;
use crate::sigtest::{pairwise_pvalues, PValueMatrix, PermTestConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct DPReport {
    pub measure: Measure,
    /// In `[0, 1]`; lower is more discriminative.
    pub dp_value: f64,
    pub pair_pvalues: PValueMatrix,
    /// All `K(K-1)/2` pair p-values, sorted descending.
    pub curve: Vec<f64>,
}

impl DPReport {
    pub fn pair_count(&self) -> usize {
        self.curve.len()
    }

    pub fn degenerate_pairs(&self) -> Vec<(&str, &str)> {
        self.pair_pvalues.degenerate_pairs()
    }
}

pub fn discriminative_power(
    dataset: &MetaEvalDataset,
    measure: Measure,
    cfg: PermTestConfig,
) -> Result<DPReport> {
    let pair_pvalues = pairwise_pvalues(dataset, measure, cfg)?;
    let mut curve = pair_pvalues.upper_triangle();
    let dp_value = numeric::mean(curve.iter().copied()).expect("K >= 2 gives at least one pair");
    curve.sort_by(|a, b| b.total_cmp(a));
    Ok(DPReport {
        measure,
        dp_value,
        pair_pvalues,
        curve,
    })
}

/// Writes the descending p-value curve as `pair_rank,p_value` rows.
pub fn curve_export(report: &DPReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["pair_rank", "p_value"]).map_err(csv_err)?;
    for (rank, p) in report.curve.iter().enumerate() {
        w.write_record([(rank + 1).to_string(), p.to_string()])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a curve written by [`curve_export`].
pub fn read_curve(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.records()
        .map(|rec| {
            let rec = rec.map_err(csv_err)?;
            rec.get(1)
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| Error::Parse {
                    path: path.to_path_buf(),
                    message: format!("bad curve row {:?}", rec),
                })
        })
        .collect()
}
