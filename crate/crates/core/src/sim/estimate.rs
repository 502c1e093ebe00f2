use serde::{Deserialize, Serialize};

use crate::corrcoef::CoefKind;
use crate::dataset::MetaEvalDataset;
use crate::error::{Error, Result};
use crate::matrix::ScoreMatrix;
use crate::measures::{evaluate, evaluate_detailed, Grouping, Measure};
use crate::numeric;

use super::SimulationParams;

/// Generative-model parameters estimated from one metric of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatedParams {
    /// Identity of the source dataset, e.g. its manifest path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    pub metric: String,
    pub mu_m: f64,
    pub mu_h: f64,
    pub sigma_m: f64,
    pub sigma_h: f64,
    pub rho_sys: f64,
    pub mu_rho_item: f64,
    pub sigma_rho_item: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    /// Distinct values observed in the metric and human matrices.
    #[serde(rename = "G_m")]
    pub g_m: usize,
    #[serde(rename = "G_h")]
    pub g_h: usize,
    /// Systems skipped because a row was constant.
    pub degenerate_rows: usize,
}

impl EstimatedParams {
    pub fn to_simulation_params(&self, t1: usize, t2: usize, seed: u64) -> SimulationParams {
        SimulationParams {
            mu_m: self.mu_m,
            mu_h: self.mu_h,
            sigma_m: self.sigma_m,
            sigma_h: self.sigma_h,
            rho_sys: self.rho_sys,
            mu_rho_item: self.mu_rho_item,
            sigma_rho_item: self.sigma_rho_item,
            n: self.n,
            m: self.m,
            g_m: self.g_m.max(2),
            g_h: self.g_h.max(2),
            t1,
            t2,
            seed,
            ..SimulationParams::default()
        }
    }
}

/// Grand mean and mean within-system sample std.
fn location_spread(m: &ScoreMatrix) -> (f64, f64) {
    let mean = numeric::mean(m.values().iter().copied()).expect("non-empty");
    let spread = numeric::mean(
        (0..m.n_systems()).map(|i| numeric::sample_std(m.row(i)).expect("M >= 2")),
    )
    .expect("N >= 2");
    (mean, spread)
}

/// Estimates the simulation parameters from the human scores and the metric
/// named `metric_name`.
///
/// Matrices with a declared scale are normalized to `[0, 1]` first; the
/// others are taken as already normalized. The system correlation is the
/// system-level Pearson measure, the per-system correlation mean is the
/// item-level Pearson measure and its spread is the sample std of the
/// per-system Pearson coefficients.
pub fn estimate_params(dataset: &MetaEvalDataset, metric_name: &str) -> Result<EstimatedParams> {
    let normalized = dataset.normalized()?;
    let metric = normalized.metric(metric_name).ok_or_else(|| {
        Error::InvalidParameter(format!("no metric named {metric_name:?}"))
    })?;
    let x = &metric.scores;
    let z = normalized.human();

    let (mu_m, sigma_m) = location_spread(x);
    let (mu_h, sigma_h) = location_spread(z);
    let rho_sys = evaluate(Measure::new(Grouping::System, CoefKind::Pearson), x, z)?.value;
    let item = evaluate_detailed(Measure::new(Grouping::Item, CoefKind::Pearson), x, z)?;
    let per_system: Vec<f64> = item
        .per_group
        .as_deref()
        .unwrap_or_default()
        .iter()
        .filter_map(|r| r.value())
        .collect();
    let sigma_rho_item = numeric::sample_std(&per_system).ok_or_else(|| {
        Error::AllGroupsUndefined {
            measure: "per-system pearson spread".into(),
            groups: item.group_count,
        }
    })?;

    Ok(EstimatedParams {
        dataset: None,
        metric: metric_name.to_string(),
        mu_m,
        mu_h,
        sigma_m,
        sigma_h,
        rho_sys,
        mu_rho_item: item.value,
        sigma_rho_item,
        n: z.n_systems(),
        m: z.n_inputs(),
        g_m: x.distinct_values(),
        g_h: z.distinct_values(),
        degenerate_rows: item.undefined_group_count,
    })
}
