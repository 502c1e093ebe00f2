#![allow(dead_code)]

use metacorr::seed::rng_for;
use metacorr::{MetaEvalDataset, ScoreMatrix};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn noise(rows: usize, cols: usize, sigma: f64, seed: u64) -> Vec<f64> {
    let mut rng = rng_for(seed, &[0xfeed]);
    (0..rows * cols)
        .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

pub fn matrix(rows: usize, cols: usize, values: Vec<f64>) -> ScoreMatrix {
    ScoreMatrix::from_values(rows, cols, values).unwrap()
}

pub fn plus(a: &ScoreMatrix, b: &[f64]) -> ScoreMatrix {
    a.with_values(a.values().iter().zip(b).map(|(x, y)| x + y).collect())
        .unwrap()
}

/// Human = standard normal noise; metric k = human + noise of scale
/// `sigmas[k]`.
pub fn noisy_dataset(rows: usize, cols: usize, sigmas: &[f64], seed: u64) -> MetaEvalDataset {
    let human = matrix(rows, cols, noise(rows, cols, 1.0, seed));
    let metrics = sigmas
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            let e = noise(rows, cols, s, seed.wrapping_mul(31).wrapping_add(k as u64 + 1));
            (format!("m{k}"), plus(&human, &e))
        })
        .collect::<Vec<_>>();
    MetaEvalDataset::from_matrices(human, metrics).unwrap()
}

/// Human and every metric are independent standard normal noise.
pub fn pure_noise_dataset(rows: usize, cols: usize, k: usize, seed: u64) -> MetaEvalDataset {
    let human = matrix(rows, cols, noise(rows, cols, 1.0, seed));
    let metrics = (0..k)
        .map(|i| {
            (
                format!("m{i}"),
                matrix(rows, cols, noise(rows, cols, 1.0, seed ^ (0x1000 + i as u64))),
            )
        })
        .collect::<Vec<_>>();
    MetaEvalDataset::from_matrices(human, metrics).unwrap()
}

pub fn uniform_matrix(rows: usize, cols: usize, seed: u64) -> ScoreMatrix {
    let mut rng = rng_for(seed, &[0xbeef]);
    matrix(rows, cols, (0..rows * cols).map(|_| rng.random::<f64>()).collect())
}
