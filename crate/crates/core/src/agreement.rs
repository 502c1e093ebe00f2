//! Agreement between the metric rankings that two measures induce, as
//! Kendall tau-b between the per-metric measure values.

use std::path::Path;

use rayon::prelude::*;

use crate::corrcoef::kendall_tau_b;
use crate::dataset::MetaEvalDataset;
use crate::error::{Error, Result};
use crate::measures::{evaluate_all, Measure};

#[derive(Debug, Clone, PartialEq)]
pub struct AgreementMatrix {
    pub measures: Vec<Measure>,
    taus: Vec<Option<f64>>,
}

impl AgreementMatrix {
    pub fn len(&self) -> usize {
        self.measures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measures.is_empty()
    }

    /// `None` where the agreement is undefined.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.taus[i * self.len() + j]
    }

    /// CSV with measure tokens as header row and first column; undefined
    /// cells are empty.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let csv_err = |source| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        let tokens: Vec<String> = self.measures.iter().map(Measure::token).collect();
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(std::iter::once("measure").chain(tokens.iter().map(String::as_str)))
            .map_err(csv_err)?;
        for (i, token) in tokens.iter().enumerate() {
            let mut record = vec![token.clone()];
            record.extend(
                (0..self.len()).map(|j| self.get(i, j).map_or(String::new(), |t| t.to_string())),
            );
            w.write_record(&record).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

fn require_pairs(dataset: &MetaEvalDataset) -> Result<()> {
    if dataset.n_metrics() < 2 {
        return Err(Error::InvalidDataset(format!(
            "ranking agreement needs at least 2 metrics, got {}",
            dataset.n_metrics()
        )));
    }
    Ok(())
}

fn measure_vector(dataset: &MetaEvalDataset, measure: Measure) -> Result<Vec<f64>> {
    Ok(evaluate_all(dataset, measure)?
        .into_iter()
        .map(|(_, r)| r.value)
        .collect())
}

/// Kendall tau-b between the metric score vectors under `m1` and `m2`.
pub fn ranking_agreement(dataset: &MetaEvalDataset, m1: Measure, m2: Measure) -> Result<f64> {
    require_pairs(dataset)?;
    let a = measure_vector(dataset, m1)?;
    let b = measure_vector(dataset, m2)?;
    kendall_tau_b(&a, &b)?
        .value()
        .ok_or_else(|| Error::DegenerateAgreement(format!("{m1} vs {m2}: all metrics tie")))
}

/// Pairwise agreements over all twelve measures.
pub fn agreement_heatmap(dataset: &MetaEvalDataset) -> Result<AgreementMatrix> {
    agreement_heatmap_for(dataset, &Measure::all())
}

/// Pairwise agreements over `measures`. Measure vectors are computed once;
/// a measure undefined for any metric leaves its row and column unset.
pub fn agreement_heatmap_for(
    dataset: &MetaEvalDataset,
    measures: &[Measure],
) -> Result<AgreementMatrix> {
    require_pairs(dataset)?;
    let vectors: Vec<Option<Vec<f64>>> = measures
        .par_iter()
        .map(|&m| match measure_vector(dataset, m) {
            Ok(v) => Ok(Some(v)),
            Err(Error::AllGroupsUndefined { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;

    let n = measures.len();
    let mut taus = vec![None; n * n];
    for i in 0..n {
        for j in i..n {
            let tau = match (&vectors[i], &vectors[j]) {
                (Some(a), Some(b)) => kendall_tau_b(a, b)?.value(),
                _ => None,
            };
            taus[i * n + j] = tau;
            taus[j * n + i] = tau;
        }
    }
    Ok(AgreementMatrix {
        measures: measures.to_vec(),
        taus,
    })
}
