use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Value};

use metacorr::agreement::agreement_heatmap_for;
use metacorr::dp::{curve_export, discriminative_power};
use metacorr::matrix::tie_ratio;
use metacorr::rc::{ranking_consistency, RCConfig};
use metacorr::sigtest::PermTestConfig;
use metacorr::sim::{estimate_params, sweep_metric_granularity, write_sweep_csv, SimulationParams};
use metacorr::{load_dataset, Error, Measure, MetaEvalDataset, Result};

use crate::args::*;

const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Validate(a) => validate(a),
        Command::Measures(a) => {
            let workers = a.common.workers;
            with_workers(workers, || measures(a))
        }
        Command::Dp(a) => {
            let workers = a.common.workers;
            timed(&a.out.clone(), workers, || dp(a))
        }
        Command::Rc(a) => {
            let workers = a.run.common.workers;
            timed(&a.run.out.clone(), workers, || rc(a))
        }
        Command::Agreement(a) => {
            let workers = a.common.workers;
            timed(&a.out.clone(), workers, || agreement(a))
        }
        Command::Simulate(a) => {
            let workers = a.common.workers;
            timed(&a.out.clone(), workers, || simulate(a))
        }
        Command::Estimate(a) => estimate(a),
    }
}

fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(Error::InvalidParameter("--workers must be at least 1".into()));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;
    pool.install(f)
}

/// Runs `f` on the worker pool, then records wall time next to its reports.
/// Timing lives apart from `run.json` so reports stay byte-identical.
fn timed(out: &Path, workers: Option<usize>, f: impl FnOnce() -> Result<()> + Send) -> Result<()> {
    let start = Instant::now();
    with_workers(workers, f)?;
    let timing = json!({
        "wall_time_secs": start.elapsed().as_secs_f64(),
        "workers": workers.unwrap_or_else(rayon::current_num_threads),
    });
    write_json(&out.join("timing.json"), &timing)
}

fn create_out(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn tokens(measures: &[Measure]) -> Vec<String> {
    measures.iter().map(Measure::token).collect()
}

fn write_run_manifest(out: &Path, command: &str, mut fields: Value) -> Result<()> {
    let obj = fields.as_object_mut().expect("object");
    obj.insert("command".into(), json!(command));
    obj.insert("version".into(), json!(VERSION));
    write_json(&out.join("run.json"), &fields)
}

fn load(manifest: &Path) -> Result<MetaEvalDataset> {
    load_dataset(manifest)
}

fn validate(a: ValidateArgs) -> Result<()> {
    let ds = load(&a.manifest)?;
    let mut rows = vec![("human".to_string(), ds.human())];
    rows.extend(ds.metrics().iter().map(|m| (m.name.clone(), &m.scores)));
    if a.json {
        let matrices: Vec<Value> = rows
            .iter()
            .map(|(name, m)| {
                json!({
                    "name": name,
                    "tie_ratio": tie_ratio(m),
                    "distinct_values": m.distinct_values(),
                })
            })
            .collect();
        let summary = json!({
            "N": ds.n_systems(),
            "M": ds.n_inputs(),
            "K": ds.n_metrics(),
            "matrices": matrices,
        });
        println!("{}", serde_json::to_string_pretty(&summary).expect("serializable"));
    } else {
        println!("systems (N): {}", ds.n_systems());
        println!("inputs (M):  {}", ds.n_inputs());
        println!("metrics (K): {}", ds.n_metrics());
        println!("{:<24} {:>10} {:>16}", "matrix", "tie_ratio", "distinct_values");
        for (name, m) in rows {
            println!("{:<24} {:>10.6} {:>16}", name, tie_ratio(m), m.distinct_values());
        }
    }
    Ok(())
}

fn measures_table(ds: &MetaEvalDataset, measures: &[Measure]) -> Result<String> {
    let rows: Vec<Vec<String>> = ds
        .metrics()
        .par_iter()
        .map(|metric| {
            measures
                .iter()
                .map(|&m| match metacorr::evaluate(m, &metric.scores, ds.human()) {
                    Ok(r) => Ok(r.value.to_string()),
                    Err(Error::AllGroupsUndefined { .. }) => Ok("undef".to_string()),
                    Err(e) => Err(e),
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<String> = std::iter::once("metric".to_string()).chain(tokens(measures)).collect();
    w.write_record(&header).expect("in-memory write");
    for (metric, cells) in ds.metrics().iter().zip(rows) {
        w.write_record(std::iter::once(metric.name.clone()).chain(cells))
            .expect("in-memory write");
    }
    Ok(String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8"))
}

fn measures(a: MeasuresArgs) -> Result<()> {
    let list = Measure::parse_list(&a.common.measures)?;
    let ds = load(&a.manifest)?;
    let table = measures_table(&ds, &list)?;
    match a.out {
        Some(out) => {
            create_out(&out)?;
            write_text(&out.join("measures.csv"), &table)?;
            write_run_manifest(
                &out,
                "measures",
                json!({ "manifest": a.manifest, "measures": tokens(&list) }),
            )
        }
        None => {
            print!("{table}");
            Ok(())
        }
    }
}

fn dp(a: StochasticArgs) -> Result<()> {
    let list = Measure::parse_list(&a.common.measures)?;
    let cfg = PermTestConfig::new(a.iterations, a.seed)?;
    let ds = load(&a.manifest)?;
    create_out(&a.out)?;
    let mut summary = String::from("measure,dp_value,pairs,degenerate_pairs\n");
    for &m in &list {
        let report = discriminative_power(&ds, m, cfg)?;
        let token = m.token();
        report
            .pair_pvalues
            .write_csv(a.out.join(format!("dp_{token}_pvalues.csv")))?;
        curve_export(&report, a.out.join(format!("dp_{token}_curve.csv")))?;
        let degenerate = report.degenerate_pairs();
        for (x, y) in &degenerate {
            eprintln!("warning: {token}: metrics {x:?} and {y:?} have identical correlation; p = 0 is not significance");
        }
        summary.push_str(&format!(
            "{token},{},{},{}\n",
            report.dp_value,
            report.pair_count(),
            degenerate.len()
        ));
    }
    write_text(&a.out.join("dp_summary.csv"), &summary)?;
    write_run_manifest(
        &a.out,
        "dp",
        json!({
            "manifest": a.manifest,
            "measures": tokens(&list),
            "seed": a.seed,
            "iterations": a.iterations,
            "orientation": "lower dp_value means stronger discriminative power",
        }),
    )
}

fn rc(a: RcArgs) -> Result<()> {
    let run = a.run;
    let list = Measure::parse_list(&run.common.measures)?;
    let cfg = RCConfig::new(run.iterations, run.seed)?;
    let ds = load(&run.manifest)?;
    create_out(&run.out)?;
    let mut summary = String::from("measure,rc_value,iterations,undefined_iterations\n");
    for &m in &list {
        let report = ranking_consistency(&ds, m, cfg)?;
        if a.dump_taus {
            report.write_taus_csv(run.out.join(format!("rc_{}_taus.csv", m.token())))?;
        }
        summary.push_str(&format!(
            "{},{},{},{}\n",
            m.token(),
            report.rc_value,
            report.iterations(),
            report.undefined_iterations
        ));
    }
    write_text(&run.out.join("rc_summary.csv"), &summary)?;
    write_run_manifest(
        &run.out,
        "rc",
        json!({
            "manifest": run.manifest,
            "measures": tokens(&list),
            "seed": run.seed,
            "iterations": run.iterations,
            "orientation": "higher rc_value means more consistent rankings",
        }),
    )
}

fn agreement(a: AgreementArgs) -> Result<()> {
    let list = Measure::parse_list(&a.common.measures)?;
    let ds = load(&a.manifest)?;
    create_out(&a.out)?;
    agreement_heatmap_for(&ds, &list)?.write_csv(a.out.join("agreement.csv"))?;
    write_run_manifest(
        &a.out,
        "agreement",
        json!({ "manifest": a.manifest, "measures": tokens(&list) }),
    )
}

fn parse_range(s: &str) -> Result<std::ops::RangeInclusive<usize>> {
    let bad = || Error::InvalidParameter(format!("expected a range like 2..15, got {s:?}"));
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    let hi = hi.strip_prefix('=').unwrap_or(hi);
    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
    let hi: usize = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok(lo..=hi)
}

fn load_params(path: &Option<PathBuf>) -> Result<SimulationParams> {
    match path {
        None => Ok(SimulationParams::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            serde_json::from_str(&text).map_err(|source| Error::Manifest {
                path: p.clone(),
                source,
            })
        }
    }
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let list = Measure::parse_list(&a.common.measures)?;
    let mut params = load_params(&a.params)?;
    params.seed = a.seed;
    if let Some(gh) = a.gh {
        params.g_h = gh;
    }
    if let Some(t) = a.iterations {
        params.t1 = t;
        params.t2 = t;
    }
    let range = match &a.sweep_gm {
        Some(s) => parse_range(s)?,
        None => params.g_m..=params.g_m,
    };
    params.validate()?;
    create_out(&a.out)?;
    let rows = sweep_metric_granularity(&params, range.clone(), &list)?;
    write_sweep_csv(&rows, a.out.join("sweep.csv"))?;
    let undefined: Vec<Value> = rows
        .iter()
        .filter(|r| r.summary.undefined > 0)
        .map(|r| json!({ "G_m": r.g_m, "measure": r.summary.measure, "undefined": r.summary.undefined }))
        .collect();
    write_run_manifest(
        &a.out,
        "simulate",
        json!({
            "params": params,
            "sweep_gm": [range.start(), range.end()],
            "measures": tokens(&list),
            "undefined_evaluations": undefined,
        }),
    )
}

fn estimate(a: EstimateArgs) -> Result<()> {
    let ds = load(&a.manifest)?;
    let names: Vec<String> = match &a.metric {
        Some(name) => vec![name.clone()],
        None => ds.metric_names().into_iter().map(String::from).collect(),
    };
    let mut estimates = Vec::with_capacity(names.len());
    for name in &names {
        let mut e = estimate_params(&ds, name)?;
        e.dataset = Some(a.manifest.display().to_string());
        if e.degenerate_rows > 0 {
            eprintln!("warning: {name}: {} constant rows skipped", e.degenerate_rows);
        }
        estimates.push(e);
    }
    match a.out {
        Some(out) => {
            create_out(&out)?;
            write_json(&out.join("estimates.json"), &estimates)
        }
        None => {
            println!("{}", serde_json::to_string_pretty(&estimates).expect("serializable"));
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::parse_range;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("2..15").unwrap(), 2..=15);
        assert_eq!(parse_range("5..=5").unwrap(), 5..=5);
        assert!(parse_range("15..2").is_err());
        assert!(parse_range("2-15").is_err());
    }
}
