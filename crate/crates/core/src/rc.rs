//! Ranking consistency: how stable the metric ranking induced by a measure is
//! across random halves of the inputs.
//!
//! Each iteration splits the input columns into halves of sizes `floor(M/2)`
//! and `M - floor(M/2)`, evaluates the measure for every metric on each half,
//! and correlates the two resulting metric score vectors with Kendall tau-b.
//! Iterations where a half-measure or the tau is undefined are skipped and
//! counted.

use std::path::Path;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

use crate::corrcoef::kendall_tau_b;
use crate::dataset::MetaEvalDataset;
use crate::error::{Error, Result};
use crate::matrix::{MatrixView, ScoreMatrix};
use crate::measures::{measure_value, Measure};
use crate::numeric;
use crate::seed::rng_for;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RCConfig {
    pub iterations: usize,
    pub seed: u64,
}

impl RCConfig {
    pub const DEFAULT_ITERATIONS: usize = 1000;

    pub fn new(iterations: usize, seed: u64) -> Result<Self> {
        if iterations == 0 {
            return Err(Error::InvalidParameter("iterations must be at least 1".into()));
        }
        Ok(Self { iterations, seed })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RCReport {
    pub measure: Measure,
    /// Mean tau over defined iterations.
    pub rc_value: f64,
    /// One entry per iteration; `None` where the iteration was skipped.
    pub per_iteration_taus: Vec<Option<f64>>,
    pub undefined_iterations: usize,
}

impl RCReport {
    pub fn iterations(&self) -> usize {
        self.per_iteration_taus.len()
    }

    /// Writes `iteration,tau` rows; skipped iterations have an empty tau.
    pub fn write_taus_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let csv_err = |source| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(["iteration", "tau"]).map_err(csv_err)?;
        for (t, tau) in self.per_iteration_taus.iter().enumerate() {
            w.write_record([t.to_string(), tau.map_or(String::new(), |v| v.to_string())])
                .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Uniformly random split of `0..m` into sorted halves of sizes
/// `floor(m/2)` and `m - floor(m/2)`.
pub fn split_halves<R: Rng + ?Sized>(m: usize, rng: &mut R) -> (Vec<usize>, Vec<usize>) {
    let mut first = index::sample(rng, m, m / 2).into_vec();
    first.sort_unstable();
    let mut in_first = vec![false; m];
    for &j in &first {
        in_first[j] = true;
    }
    let second = (0..m).filter(|&j| !in_first[j]).collect();
    (first, second)
}

fn gather_columns(m: &ScoreMatrix, cols: &[usize]) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.n_systems() * cols.len());
    for i in 0..m.n_systems() {
        let row = m.row(i);
        out.extend(cols.iter().map(|&j| row[j]));
    }
    out
}

pub fn ranking_consistency(
    dataset: &MetaEvalDataset,
    measure: Measure,
    cfg: RCConfig,
) -> Result<RCReport> {
    let k = dataset.n_metrics();
    if k < 2 {
        return Err(Error::InvalidDataset(format!(
            "ranking consistency needs at least 2 metrics, got {k}"
        )));
    }
    if cfg.iterations == 0 {
        return Err(Error::InvalidParameter("iterations must be at least 1".into()));
    }
    let n = dataset.n_systems();
    let m = dataset.n_inputs();

    let outcomes: Vec<Result<Option<f64>>> = (0..cfg.iterations)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_for(cfg.seed, &[t as u64]);
            let (first, second) = split_halves(m, &mut rng);
            let halves = [&first, &second].map(|cols| {
                let human = gather_columns(dataset.human(), cols);
                let values: Vec<Result<f64>> = dataset
                    .metrics()
                    .iter()
                    .map(|metric| {
                        let x = gather_columns(&metric.scores, cols);
                        measure_value(
                            measure,
                            MatrixView::new_unchecked(n, cols.len(), &x),
                            MatrixView::new_unchecked(n, cols.len(), &human),
                        )
                    })
                    .collect();
                values
            });
            let mut rankings = Vec::with_capacity(2);
            for half in halves {
                let mut scores = Vec::with_capacity(k);
                for v in half {
                    match v {
                        Ok(v) => scores.push(v),
                        Err(Error::AllGroupsUndefined { .. }) => return Ok(None),
                        Err(e) => return Err(e),
                    }
                }
                rankings.push(scores);
            }
            Ok(kendall_tau_b(&rankings[0], &rankings[1])?.value())
        })
        .collect();

    let mut per_iteration_taus = Vec::with_capacity(cfg.iterations);
    for outcome in outcomes {
        per_iteration_taus.push(outcome?);
    }
    let undefined_iterations = per_iteration_taus.iter().filter(|t| t.is_none()).count();
    let rc_value = numeric::mean(per_iteration_taus.iter().flatten().copied()).ok_or(
        Error::AllIterationsUndefined {
            iterations: cfg.iterations,
        },
    )?;
    Ok(RCReport {
        measure,
        rc_value,
        per_iteration_taus,
        undefined_iterations,
    })
}
