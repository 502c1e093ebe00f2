//! Monte-Carlo study of how score granularity affects each measure.
//!
//! Continuous metric/human scores are generated per system from a bivariate
//! normal whose means are themselves drawn from a system-level bivariate
//! normal, with a per-system correlation drawn from a normal truncated to
//! `[-1, 1]`. Each outer iteration generates one pair of `N x M` matrices;
//! each inner iteration draws fresh thresholds for both sides, discretizes
//! and evaluates every requested measure.

mod estimate;
mod sampling;

use std::ops::RangeInclusive;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{MatrixView, ScoreMatrix};
use crate::measures::{measure_value, Measure};
use crate::numeric::KahanSum;
use crate::seed::{rng_for, SimRng};

pub use estimate::{estimate_params, EstimatedParams};
pub use sampling::{
    discretize, sample_bivariate_normal, sample_truncated_normal, TRUNCATION_ATTEMPTS,
};
use sampling::{bivariate_unchecked, discretize_into};

/// Bounds of the per-system correlation distribution.
pub const RHO_ITEM_BOUNDS: (f64, f64) = (-1.0, 1.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationParams {
    pub mu_m: f64,
    pub mu_h: f64,
    pub sigma_m: f64,
    pub sigma_h: f64,
    pub rho_sys: f64,
    pub mu_rho_item: f64,
    /// Zero gives every system exactly `mu_rho_item`.
    pub sigma_rho_item: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "G_m")]
    pub g_m: usize,
    #[serde(rename = "G_h")]
    pub g_h: usize,
    #[serde(rename = "T1")]
    pub t1: usize,
    #[serde(rename = "T2")]
    pub t2: usize,
    pub seed: u64,
    /// Per-system within-system stds; `sigma_m`/`sigma_h` for every system
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_m_i: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_h_i: Option<Vec<f64>>,
    /// Draw metric and human thresholds from one shared uniform stream
    /// instead of independently.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub common_thresholds: bool,
}

impl Default for SimulationParams {
    /// Settings typical of a summarization dataset with 16 systems and 100
    /// inputs, averaged 5-point human scores (`G_h = 13`).
    fn default() -> Self {
        Self {
            mu_m: 0.47,
            mu_h: 0.65,
            sigma_m: 0.16,
            sigma_h: 0.14,
            rho_sys: 0.92,
            mu_rho_item: 0.35,
            sigma_rho_item: 0.14,
            n: 16,
            m: 100,
            g_m: 13,
            g_h: 13,
            t1: 100,
            t2: 100,
            seed: 0,
            sigma_m_i: None,
            sigma_h_i: None,
            common_thresholds: false,
        }
    }
}

impl SimulationParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        for (name, v) in [
            ("mu_m", self.mu_m),
            ("mu_h", self.mu_h),
            ("mu_rho_item", self.mu_rho_item),
        ] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite"));
            }
        }
        for (name, v) in [("sigma_m", self.sigma_m), ("sigma_h", self.sigma_h)] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.sigma_rho_item.is_finite() && self.sigma_rho_item >= 0.0) {
            return bad(format!(
                "sigma_rho_item must be non-negative, got {}",
                self.sigma_rho_item
            ));
        }
        if !(-1.0..=1.0).contains(&self.rho_sys) {
            return bad(format!("rho_sys must lie in [-1, 1], got {}", self.rho_sys));
        }
        if self.sigma_rho_item == 0.0 && !(-1.0..=1.0).contains(&self.mu_rho_item) {
            return bad("mu_rho_item must lie in [-1, 1] when sigma_rho_item is 0".into());
        }
        if self.n < 2 || self.m < 2 {
            return bad(format!("need N, M >= 2, got {}x{}", self.n, self.m));
        }
        if self.g_m < 2 || self.g_h < 2 {
            return bad(format!("granularities must be >= 2, got G_m={} G_h={}", self.g_m, self.g_h));
        }
        if self.t1 == 0 || self.t2 == 0 {
            return bad("T1 and T2 must be at least 1".into());
        }
        for (name, per) in [("sigma_m_i", &self.sigma_m_i), ("sigma_h_i", &self.sigma_h_i)] {
            if let Some(v) = per {
                if v.len() != self.n {
                    return bad(format!("{name} has {} entries for N = {}", v.len(), self.n));
                }
                if v.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                    return bad(format!("{name} entries must be positive"));
                }
            }
        }
        Ok(())
    }

    fn within_sigma(&self, i: usize) -> (f64, f64) {
        (
            self.sigma_m_i.as_ref().map_or(self.sigma_m, |v| v[i]),
            self.sigma_h_i.as_ref().map_or(self.sigma_h, |v| v[i]),
        )
    }
}

/// Continuous metric and human matrices (row-major `N x M`) for one outer
/// iteration.
fn sample_continuous(params: &SimulationParams, rng: &mut SimRng) -> Result<(Vec<f64>, Vec<f64>)> {
    let (n, m) = (params.n, params.m);
    let mut x = Vec::with_capacity(n * m);
    let mut z = Vec::with_capacity(n * m);
    for i in 0..n {
        let (mu_mi, mu_hi) = bivariate_unchecked(
            params.mu_m,
            params.mu_h,
            params.sigma_m,
            params.sigma_h,
            params.rho_sys,
            rng,
        );
        let rho_i = sample_truncated_normal(
            params.mu_rho_item,
            params.sigma_rho_item,
            RHO_ITEM_BOUNDS.0,
            RHO_ITEM_BOUNDS.1,
            rng,
        )?;
        let (s_m, s_h) = params.within_sigma(i);
        for _ in 0..m {
            let (a, b) = bivariate_unchecked(mu_mi, mu_hi, s_m, s_h, rho_i, rng);
            x.push(a);
            z.push(b);
        }
    }
    Ok((x, z))
}

/// One continuous draw of the metric and human score matrices.
pub fn generate(params: &SimulationParams) -> Result<(ScoreMatrix, ScoreMatrix)> {
    params.validate()?;
    let mut rng = rng_for(params.seed, &[]);
    let (x, z) = sample_continuous(params, &mut rng)?;
    Ok((
        ScoreMatrix::from_values(params.n, params.m, x)?,
        ScoreMatrix::from_values(params.n, params.m, z)?,
    ))
}

/// Sorted thresholds for both sides, uniform on `mu -/+ sigma`.
fn sample_thresholds(params: &SimulationParams, rng: &mut SimRng) -> (Vec<f64>, Vec<f64>) {
    let scaled = |mu: f64, sigma: f64, u: f64| (mu - sigma) + 2.0 * sigma * u;
    let (cm, ch) = (params.g_m - 1, params.g_h - 1);
    let (mut tm, mut th): (Vec<f64>, Vec<f64>) = if params.common_thresholds {
        let u: Vec<f64> = (0..cm.max(ch)).map(|_| rng.random()).collect();
        (
            u[..cm].iter().map(|&u| scaled(params.mu_m, params.sigma_m, u)).collect(),
            u[..ch].iter().map(|&u| scaled(params.mu_h, params.sigma_h, u)).collect(),
        )
    } else {
        let tm = (0..cm)
            .map(|_| scaled(params.mu_m, params.sigma_m, rng.random()))
            .collect();
        let th = (0..ch)
            .map(|_| scaled(params.mu_h, params.sigma_h, rng.random()))
            .collect();
        (tm, th)
    };
    tm.sort_by(f64::total_cmp);
    th.sort_by(f64::total_cmp);
    (tm, th)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureSummary {
    pub measure: Measure,
    /// Mean over defined evaluations; `None` when none was defined.
    pub mean: Option<f64>,
    pub defined: usize,
    pub undefined: usize,
}

/// Runs the simulation and returns one summary per requested measure, in
/// request order.
pub fn simulate(params: &SimulationParams, measures: &[Measure]) -> Result<Vec<MeasureSummary>> {
    params.validate()?;
    if measures.is_empty() {
        return Err(Error::InvalidParameter("no measures requested".into()));
    }
    let (n, m) = (params.n, params.m);
    let per_outer: Vec<Result<Vec<Option<f64>>>> = (0..params.t1)
        .into_par_iter()
        .map(|outer| {
            let mut rng = rng_for(params.seed, &[outer as u64]);
            let (x, z) = sample_continuous(params, &mut rng)?;
            let mut xd = Vec::with_capacity(x.len());
            let mut zd = Vec::with_capacity(z.len());
            let mut values = Vec::with_capacity(params.t2 * measures.len());
            for _ in 0..params.t2 {
                let (tm, th) = sample_thresholds(params, &mut rng);
                discretize_into(&x, &tm, &mut xd);
                discretize_into(&z, &th, &mut zd);
                let xv = MatrixView::new_unchecked(n, m, &xd);
                let zv = MatrixView::new_unchecked(n, m, &zd);
                for &measure in measures {
                    values.push(match measure_value(measure, xv, zv) {
                        Ok(v) => Some(v),
                        Err(Error::AllGroupsUndefined { .. }) => None,
                        Err(e) => return Err(e),
                    });
                }
            }
            Ok(values)
        })
        .collect();

    let mut sums = vec![KahanSum::new(); measures.len()];
    let mut defined = vec![0usize; measures.len()];
    for outer in per_outer {
        for (k, v) in outer?.into_iter().enumerate() {
            if let Some(v) = v {
                sums[k % measures.len()].add(v);
                defined[k % measures.len()] += 1;
            }
        }
    }
    let total = params.t1 * params.t2;
    Ok(measures
        .iter()
        .enumerate()
        .map(|(k, &measure)| MeasureSummary {
            measure,
            mean: (defined[k] > 0).then(|| sums[k].total() / defined[k] as f64),
            defined: defined[k],
            undefined: total - defined[k],
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub g_m: usize,
    pub summary: MeasureSummary,
}

/// Runs [`simulate`] for every metric granularity in `g_m`, reusing the seed
/// so every cell sees the same continuous draws.
pub fn sweep_metric_granularity(
    params: &SimulationParams,
    g_m: RangeInclusive<usize>,
    measures: &[Measure],
) -> Result<Vec<SweepRow>> {
    if g_m.is_empty() {
        return Err(Error::InvalidParameter("empty G_m sweep".into()));
    }
    let mut rows = Vec::new();
    for g in g_m {
        let p = SimulationParams {
            g_m: g,
            ..params.clone()
        };
        rows.extend(
            simulate(&p, measures)?
                .into_iter()
                .map(|summary| SweepRow { g_m: g, summary }),
        );
    }
    Ok(rows)
}

/// Writes `G_m,measure,mean_value` rows; undefined means are empty.
pub fn write_sweep_csv(rows: &[SweepRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["G_m", "measure", "mean_value"])
        .map_err(csv_err)?;
    for row in rows {
        w.write_record([
            row.g_m.to_string(),
            row.summary.measure.token(),
            row.summary.mean.map_or(String::new(), |v| v.to_string()),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
