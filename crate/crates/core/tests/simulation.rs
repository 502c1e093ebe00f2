mod common;

use approx::assert_abs_diff_eq;
use metacorr::seed::rng_for;
use metacorr::sim::{
    discretize, estimate_params, generate, sample_bivariate_normal, sample_truncated_normal,
    simulate, sweep_metric_granularity, write_sweep_csv, SimulationParams,
};
use metacorr::{CoefKind, Grouping, Measure, MetaEvalDataset, ScoreMatrix};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

const GP: Measure = Measure::new(Grouping::Global, CoefKind::Pearson);

fn sample_corr(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}

#[test]
fn bivariate_draws_have_requested_moments() {
    for (rho, tol) in [(0.0, 0.02), (0.92, 0.01)] {
        let mut rng = rng_for(3, &[1]);
        let (xs, ys): (Vec<f64>, Vec<f64>) = (0..100_000)
            .map(|_| sample_bivariate_normal(0.47, 0.65, 0.16, 0.14, rho, &mut rng).unwrap())
            .unzip();
        assert_abs_diff_eq!(sample_corr(&xs, &ys), rho, epsilon = tol);
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert_abs_diff_eq!(mean(&xs), 0.47, epsilon = 0.005);
        assert_abs_diff_eq!(mean(&ys), 0.65, epsilon = 0.005);
    }
}

#[test]
fn truncated_normal_mean_matches_closed_form() {
    let (mu, sigma, lo, hi) = (0.35, 0.14, -1.0, 1.0);
    let std = Normal::new(0.0, 1.0).unwrap();
    let (a, b) = ((lo - mu) / sigma, (hi - mu) / sigma);
    let expected = mu + sigma * (std.pdf(a) - std.pdf(b)) / (std.cdf(b) - std.cdf(a));

    let mut rng = rng_for(11, &[]);
    let draws: Vec<f64> = (0..100_000)
        .map(|_| sample_truncated_normal(mu, sigma, lo, hi, &mut rng).unwrap())
        .collect();
    assert!(draws.iter().all(|d| (lo..=hi).contains(d)));
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    assert_abs_diff_eq!(mean, expected, epsilon = 0.005);

    // A window far in the tail shifts the mean towards the window.
    let (lo, hi) = (0.7, 1.0);
    let (a, b) = ((lo - mu) / sigma, (hi - mu) / sigma);
    let expected = mu + sigma * (std.pdf(a) - std.pdf(b)) / (std.cdf(b) - std.cdf(a));
    let draws: Vec<f64> = (0..20_000)
        .map(|_| sample_truncated_normal(mu, sigma, lo, hi, &mut rng).unwrap())
        .collect();
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    assert_abs_diff_eq!(mean, expected, epsilon = 0.005);
}

fn bucket_scan(v: f64, thresholds: &[f64]) -> f64 {
    for (k, t) in thresholds.iter().enumerate() {
        if v <= *t {
            return (k + 1) as f64;
        }
    }
    (thresholds.len() + 1) as f64
}

#[test]
fn discretize_matches_linear_scan() {
    let mut rng = rng_for(5, &[]);
    let mut thresholds: Vec<f64> = (0..12).map(|_| rng.random_range(0.51..0.79)).collect();
    thresholds.sort_by(f64::total_cmp);
    let mut values: Vec<f64> = (0..400).map(|_| rng.random_range(0.3..1.0)).collect();
    values.extend_from_slice(&thresholds);
    let m = common::matrix(4, values.len() / 4, values);
    let d = discretize(&m, &thresholds).unwrap();
    for (v, b) in m.values().iter().zip(d.values()) {
        assert_eq!(*b, bucket_scan(*v, &thresholds));
        assert!((1.0..=13.0).contains(b));
    }
    assert!(discretize(&m, &[0.5, 0.4]).is_err());
}

proptest! {
    #[test]
    fn discretize_preserves_weak_order(
        values in prop::collection::vec(-3.0f64..3.0, 8),
        mut thresholds in prop::collection::btree_set(-300i32..300, 1..20)
            .prop_map(|s| s.into_iter().map(|t| t as f64 / 100.0).collect::<Vec<_>>()),
    ) {
        thresholds.sort_by(f64::total_cmp);
        let m = common::matrix(2, 4, values.clone());
        let d = discretize(&m, &thresholds).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                if values[i] <= values[j] {
                    prop_assert!(d.values()[i] <= d.values()[j]);
                }
            }
        }
    }
}

#[test]
fn perfect_metric_limit() {
    let params = SimulationParams {
        mu_m: 0.5,
        mu_h: 0.5,
        sigma_m: 0.15,
        sigma_h: 0.15,
        rho_sys: 1.0,
        mu_rho_item: 1.0,
        sigma_rho_item: 0.0,
        n: 8,
        m: 30,
        g_m: 7,
        g_h: 7,
        t1: 5,
        t2: 5,
        seed: 2,
        common_thresholds: true,
        ..SimulationParams::default()
    };
    for s in simulate(&params, &Measure::all()).unwrap() {
        assert_abs_diff_eq!(s.mean.unwrap(), 1.0, epsilon = 1e-12);
    }
}

/// Straightforward restatement of the sampling procedure for Global-Pearson
/// with its own generator and its own normal draws.
fn oracle_global_pearson(p: &SimulationParams, seed: u64) -> f64 {
    let mut rng = StdRng::seed_from_u64(seed);
    let normal = move |rng: &mut StdRng| {
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    let mut total = 0.0;
    let mut count = 0.0;
    for _ in 0..p.t1 {
        let mut x = Vec::new();
        let mut z = Vec::new();
        for _ in 0..p.n {
            let (a, b) = (normal(&mut rng), normal(&mut rng));
            let mi = p.mu_m + p.sigma_m * a;
            let hi = p.mu_h + p.sigma_h * (p.rho_sys * a + (1.0 - p.rho_sys.powi(2)).sqrt() * b);
            let rho = loop {
                let r = p.mu_rho_item + p.sigma_rho_item * normal(&mut rng);
                if (-1.0..=1.0).contains(&r) {
                    break r;
                }
            };
            for _ in 0..p.m {
                let (a, b) = (normal(&mut rng), normal(&mut rng));
                x.push(mi + p.sigma_m * a);
                z.push(hi + p.sigma_h * (rho * a + (1.0 - rho * rho).sqrt() * b));
            }
        }
        for _ in 0..p.t2 {
            let thresholds = |g: usize, mu: f64, s: f64, rng: &mut StdRng| {
                let mut t: Vec<f64> = (0..g - 1).map(|_| rng.random_range(mu - s..mu + s)).collect();
                t.sort_by(f64::total_cmp);
                t
            };
            let tm = thresholds(p.g_m, p.mu_m, p.sigma_m, &mut rng);
            let th = thresholds(p.g_h, p.mu_h, p.sigma_h, &mut rng);
            let xd: Vec<f64> = x.iter().map(|&v| bucket_scan(v, &tm)).collect();
            let zd: Vec<f64> = z.iter().map(|&v| bucket_scan(v, &th)).collect();
            let r = sample_corr(&xd, &zd);
            if r.is_finite() {
                total += r;
                count += 1.0;
            }
        }
    }
    total / count
}

#[test]
fn simulation_matches_independent_oracle() {
    let params = SimulationParams {
        t1: 60,
        t2: 40,
        seed: 19,
        ..SimulationParams::default()
    };
    let ours = simulate(&params, &[GP]).unwrap()[0].mean.unwrap();
    let oracle = oracle_global_pearson(&params, 19);
    assert_abs_diff_eq!(ours, oracle, epsilon = 0.03);
}

#[test]
fn item_correlation_concentrates_on_its_mean() {
    let params = SimulationParams {
        m: 10_000,
        sigma_rho_item: 0.0,
        ..SimulationParams::default()
    };
    let (x, z) = generate(&params).unwrap();
    let item = metacorr::evaluate(Measure::new(Grouping::Item, CoefKind::Pearson), &x, &z).unwrap();
    assert_abs_diff_eq!(item.value, params.mu_rho_item, epsilon = 0.01);
}

#[test]
fn simulation_is_reproducible_and_bounded() {
    let params = SimulationParams {
        n: 6,
        m: 20,
        t1: 8,
        t2: 4,
        seed: 23,
        ..SimulationParams::default()
    };
    let a = simulate(&params, &Measure::all()).unwrap();
    assert_eq!(a, simulate(&params, &Measure::all()).unwrap());
    for s in &a {
        assert_eq!(s.defined + s.undefined, 32);
        if let Some(v) = s.mean {
            assert!((-1.0..=1.0).contains(&v));
        }
    }
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| simulate(&params, &Measure::all()).unwrap());
    assert_eq!(a, one);
    assert_eq!(generate(&params).unwrap(), generate(&params).unwrap());
}

#[test]
fn sweep_rows_and_csv() {
    let params = SimulationParams {
        n: 6,
        m: 20,
        t1: 3,
        t2: 3,
        seed: 1,
        ..SimulationParams::default()
    };
    let rows = sweep_metric_granularity(&params, 2..=4, &[GP]).unwrap();
    assert_eq!(rows.iter().map(|r| r.g_m).collect::<Vec<_>>(), vec![2, 3, 4]);
    let direct = simulate(&SimulationParams { g_m: 3, ..params.clone() }, &[GP]).unwrap();
    assert_eq!(rows[1].summary, direct[0]);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    write_sweep_csv(&rows, &path).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("G_m,measure,mean_value\n2,global-pearson,"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn estimating_human_against_itself() {
    let z = common::uniform_matrix(8, 30, 31);
    let ds = MetaEvalDataset::from_matrices(z.clone(), [("h".to_string(), z)]).unwrap();
    let est = estimate_params(&ds, "h").unwrap();
    assert_abs_diff_eq!(est.rho_sys, 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(est.mu_rho_item, 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(est.sigma_rho_item, 0.0, epsilon = 1e-12);
    assert_eq!((est.n, est.m), (8, 30));
    assert!(estimate_params(&ds, "missing").is_err());
}

#[test]
fn closed_loop_estimation() {
    let truth = SimulationParams {
        m: 1000,
        seed: 41,
        ..SimulationParams::default()
    };
    let (x, z) = generate(&truth).unwrap();
    let ds = MetaEvalDataset::from_matrices(z, [("x".to_string(), x)]).unwrap();
    let est = estimate_params(&ds, "x").unwrap();
    assert_abs_diff_eq!(est.mu_rho_item, truth.mu_rho_item, epsilon = 0.1);
    assert_abs_diff_eq!(est.sigma_m, truth.sigma_m, epsilon = 0.02);
    assert_abs_diff_eq!(est.mu_m, truth.mu_m, epsilon = 0.15);
    let back = est.to_simulation_params(10, 10, 5);
    assert_eq!((back.n, back.m, back.t1, back.seed), (16, 1000, 10, 5));
    let _: ScoreMatrix = generate(&back).unwrap().0;
}
