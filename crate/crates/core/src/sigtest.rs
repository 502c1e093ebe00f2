//! Perm-Both paired permutation test on the difference of two metrics'
//! correlation with human scores.
//!
//! Each iteration swaps every cell `(i, j)` between the two metric matrices
//! with probability 1/2 and recomputes the difference; the p-value is the
//! fraction of iterations whose absolute difference strictly exceeds the
//! observed one.

use std::path::Path;

use rand::RngCore;
use rayon::prelude::*;

use crate::dataset::MetaEvalDataset;
use crate::error::{Error, Result};
use crate::matrix::{MatrixView, ScoreMatrix};
use crate::measures::{measure_value, Measure};
use crate::seed::{derive_seed, rng_for};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PermTestConfig {
    pub iterations: usize,
    pub seed: u64,
}

impl PermTestConfig {
    pub const DEFAULT_ITERATIONS: usize = 1000;

    pub fn new(iterations: usize, seed: u64) -> Result<Self> {
        if iterations == 0 {
            return Err(Error::InvalidParameter("iterations must be at least 1".into()));
        }
        Ok(Self { iterations, seed })
    }

    pub fn with_seed(seed: u64) -> Self {
        Self {
            iterations: Self::DEFAULT_ITERATIONS,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PermTestResult {
    /// `C(X, Z) - C(Y, Z)`.
    pub delta: f64,
    pub p_value: f64,
    pub exceed_count: usize,
    pub iterations: usize,
    /// Set when `delta == 0`; strict exceedance then forces `p = 0`, which
    /// must not be read as significance.
    pub degenerate: bool,
}

/// Runs the test for metrics `x` and `y` against human scores `z`.
pub fn perm_both(
    x: &ScoreMatrix,
    y: &ScoreMatrix,
    z: &ScoreMatrix,
    measure: Measure,
    cfg: PermTestConfig,
) -> Result<PermTestResult> {
    if !x.is_aligned_with(z) || !y.is_aligned_with(z) {
        return Err(Error::IdMismatch {
            context: "permutation test".into(),
        });
    }
    perm_both_view(x.view(), y.view(), z.view(), measure, cfg)
}

pub fn perm_both_view(
    x: MatrixView<'_>,
    y: MatrixView<'_>,
    z: MatrixView<'_>,
    measure: Measure,
    cfg: PermTestConfig,
) -> Result<PermTestResult> {
    if cfg.iterations == 0 {
        return Err(Error::InvalidParameter("iterations must be at least 1".into()));
    }
    if !x.same_shape(&z) || !y.same_shape(&z) {
        return Err(Error::DimensionMismatch {
            context: "permutation test".into(),
            expected_rows: z.rows(),
            expected_cols: z.cols(),
            rows: x.rows(),
            cols: x.cols(),
        });
    }
    let delta = measure_value(measure, x, z)? - measure_value(measure, y, z)?;
    let threshold = delta.abs();
    let (rows, cols) = (z.rows(), z.cols());

    let outcomes: Vec<Result<bool>> = (0..cfg.iterations)
        .into_par_iter()
        .map(|t| {
            let (xs, ys) = swap_cells(x.data(), y.data(), cfg.seed, t);
            let xs = MatrixView::new_unchecked(rows, cols, &xs);
            let ys = MatrixView::new_unchecked(rows, cols, &ys);
            let d = measure_value(measure, xs, z)
                .and_then(|a| Ok(a - measure_value(measure, ys, z)?))
                .map_err(|e| Error::PermutationUndefined {
                    context: measure.token(),
                    iteration: t,
                    source: Box::new(e),
                })?;
            Ok(d.abs() > threshold)
        })
        .collect();

    let mut exceed_count = 0;
    for outcome in outcomes {
        exceed_count += usize::from(outcome?);
    }
    Ok(PermTestResult {
        delta,
        p_value: exceed_count as f64 / cfg.iterations as f64,
        exceed_count,
        iterations: cfg.iterations,
        degenerate: delta == 0.0,
    })
}

/// Iteration `t`'s swapped copies. Bit `k` of the stream decides cell `k`,
/// so exchanging the roles of `x` and `y` exchanges the outputs.
fn swap_cells(x: &[f64], y: &[f64], seed: u64, t: usize) -> (Vec<f64>, Vec<f64>) {
    let mut rng = rng_for(seed, &[t as u64]);
    let mut xs = Vec::with_capacity(x.len());
    let mut ys = Vec::with_capacity(y.len());
    let mut bits = 0u64;
    for (k, (&a, &b)) in x.iter().zip(y).enumerate() {
        if k % 64 == 0 {
            bits = rng.next_u64();
        }
        if bits & 1 == 1 {
            xs.push(b);
            ys.push(a);
        } else {
            xs.push(a);
            ys.push(b);
        }
        bits >>= 1;
    }
    (xs, ys)
}

/// Seed for the ordered pair `(i, j)`, `i < j`, of metric indices.
pub fn pair_seed(master: u64, i: usize, j: usize) -> u64 {
    derive_seed(master, &[i as u64, j as u64])
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairResult {
    pub first: usize,
    pub second: usize,
    pub result: PermTestResult,
}

/// Symmetric `K x K` p-value matrix with an unset diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct PValueMatrix {
    pub names: Vec<String>,
    pub pairs: Vec<PairResult>,
    entries: Vec<Option<f64>>,
}

impl PValueMatrix {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.entries[i * self.len() + j]
    }

    /// Upper-triangle p-values in pair order `(0,1), (0,2), ..., (K-2,K-1)`.
    pub fn upper_triangle(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.result.p_value).collect()
    }

    pub fn degenerate_pairs(&self) -> Vec<(&str, &str)> {
        self.pairs
            .iter()
            .filter(|p| p.result.degenerate)
            .map(|p| (self.names[p.first].as_str(), self.names[p.second].as_str()))
            .collect()
    }

    /// CSV with metric names as header row and first column; the diagonal is
    /// left empty.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let csv_err = |source| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(std::iter::once("metric").chain(self.names.iter().map(String::as_str)))
            .map_err(csv_err)?;
        for (i, name) in self.names.iter().enumerate() {
            let mut record = vec![name.clone()];
            record.extend((0..self.len()).map(|j| self.get(i, j).map_or(String::new(), |p| p.to_string())));
            w.write_record(&record).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Runs [`perm_both`] on every metric pair of `dataset`.
pub fn pairwise_pvalues(
    dataset: &MetaEvalDataset,
    measure: Measure,
    cfg: PermTestConfig,
) -> Result<PValueMatrix> {
    let k = dataset.n_metrics();
    if k < 2 {
        return Err(Error::InvalidDataset(format!(
            "pairwise tests need at least 2 metrics, got {k}"
        )));
    }
    let metrics = dataset.metrics();
    let z = dataset.human();
    let index_pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .collect();

    let results: Vec<Result<PairResult>> = index_pairs
        .par_iter()
        .map(|&(i, j)| {
            let pair_cfg = PermTestConfig {
                iterations: cfg.iterations,
                seed: pair_seed(cfg.seed, i, j),
            };
            perm_both(&metrics[i].scores, &metrics[j].scores, z, measure, pair_cfg)
                .map(|result| PairResult {
                    first: i,
                    second: j,
                    result,
                })
                .map_err(|e| Error::Pair {
                    first: metrics[i].name.clone(),
                    second: metrics[j].name.clone(),
                    source: Box::new(e),
                })
        })
        .collect();

    let mut entries = vec![None; k * k];
    let mut pairs = Vec::with_capacity(results.len());
    for r in results {
        let pair = r?;
        entries[pair.first * k + pair.second] = Some(pair.result.p_value);
        entries[pair.second * k + pair.first] = Some(pair.result.p_value);
        pairs.push(pair);
    }
    Ok(PValueMatrix {
        names: metrics.iter().map(|m| m.name.clone()).collect(),
        pairs,
        entries,
    })
}
