//! Pearson, Spearman and Kendall tau-b on paired real vectors.
//!
//! Degenerate inputs (a constant side, fewer than two points) produce
//! [`CoefResult::Undefined`] rather than NaN so that callers decide how to
//! aggregate them.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::KahanSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefKind {
    Pearson,
    Spearman,
    #[serde(rename = "kendall")]
    KendallTauB,
}

impl CoefKind {
    pub const ALL: [CoefKind; 3] = [CoefKind::Pearson, CoefKind::Spearman, CoefKind::KendallTauB];

    pub fn token(self) -> &'static str {
        match self {
            CoefKind::Pearson => "pearson",
            CoefKind::Spearman => "spearman",
            CoefKind::KendallTauB => "kendall",
        }
    }

    pub fn compute(self, x: &[f64], y: &[f64]) -> Result<CoefResult, CoefError> {
        match self {
            CoefKind::Pearson => pearson(x, y),
            CoefKind::Spearman => spearman(x, y),
            CoefKind::KendallTauB => kendall_tau_b(x, y),
        }
    }
}

impl fmt::Display for CoefKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Degeneracy {
    ConstantX,
    ConstantY,
    TooShort,
}

impl fmt::Display for Degeneracy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Degeneracy::ConstantX => "constant-x",
            Degeneracy::ConstantY => "constant-y",
            Degeneracy::TooShort => "too-short",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoefResult {
    Value(f64),
    Undefined(Degeneracy),
}

impl CoefResult {
    pub fn value(self) -> Option<f64> {
        match self {
            CoefResult::Value(v) => Some(v),
            CoefResult::Undefined(_) => None,
        }
    }

    pub fn is_defined(self) -> bool {
        matches!(self, CoefResult::Value(_))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoefError {
    #[error("length mismatch: {x} vs {y}")]
    LengthMismatch { x: usize, y: usize },
    #[error("non-finite value at position {index}")]
    NonFinite { index: usize },
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<Option<Degeneracy>, CoefError> {
    if x.len() != y.len() {
        return Err(CoefError::LengthMismatch {
            x: x.len(),
            y: y.len(),
        });
    }
    if let Some(index) = x
        .iter()
        .zip(y)
        .position(|(a, b)| !a.is_finite() || !b.is_finite())
    {
        return Err(CoefError::NonFinite { index });
    }
    if x.len() < 2 {
        return Ok(Some(Degeneracy::TooShort));
    }
    if is_constant(x) {
        return Ok(Some(Degeneracy::ConstantX));
    }
    if is_constant(y) {
        return Ok(Some(Degeneracy::ConstantY));
    }
    Ok(None)
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|&a| a == v[0])
}

#[inline]
fn clamp_unit(r: f64) -> f64 {
    r.clamp(-1.0, 1.0)
}

/// Pearson's product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<CoefResult, CoefError> {
    if let Some(d) = check_pair(x, y)? {
        return Ok(CoefResult::Undefined(d));
    }
    Ok(pearson_unchecked(x, y))
}

fn pearson_unchecked(x: &[f64], y: &[f64]) -> CoefResult {
    let n = x.len() as f64;
    let mx = x.iter().copied().collect::<KahanSum>().total() / n;
    let my = y.iter().copied().collect::<KahanSum>().total() / n;
    let (mut sxy, mut sxx, mut syy) = (KahanSum::new(), KahanSum::new(), KahanSum::new());
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy.add(dx * dy);
        sxx.add(dx * dx);
        syy.add(dy * dy);
    }
    let (sxx, syy) = (sxx.total(), syy.total());
    // Non-constant input can still underflow to a zero sum of squares.
    if sxx <= 0.0 {
        return CoefResult::Undefined(Degeneracy::ConstantX);
    }
    if syy <= 0.0 {
        return CoefResult::Undefined(Degeneracy::ConstantY);
    }
    CoefResult::Value(clamp_unit(sxy.total() / (sxx * syy).sqrt()))
}

fn cmp_f64(a: &f64, b: &f64) -> Ordering {
    a.partial_cmp(b).expect("finite values")
}

/// Ranks 1..n, ties receiving the mean of the positions they occupy.
pub fn fractional_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| cmp_f64(&x[a], &x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && x[order[end]] == x[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Spearman's rho as Pearson correlation of fractional ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<CoefResult, CoefError> {
    if let Some(d) = check_pair(x, y)? {
        return Ok(CoefResult::Undefined(d));
    }
    Ok(pearson_unchecked(&fractional_ranks(x), &fractional_ranks(y)))
}

/// Kendall's tau-b, `(C - D) / sqrt((n0 - n1)(n0 - n2))`.
///
/// Counts are obtained in O(n log n) with Knight's merge-sort scheme: sort by
/// `(x, y)`, then count the inversions a stable merge sort on `y` performs.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<CoefResult, CoefError> {
    if let Some(d) = check_pair(x, y)? {
        return Ok(CoefResult::Undefined(d));
    }
    let counts = kendall_counts(x, y);
    let dx = counts.total_pairs - counts.x_ties;
    let dy = counts.total_pairs - counts.y_ties;
    // check_pair has excluded all-tied sides, so dx, dy > 0.
    let numerator = counts.concordant_minus_discordant() as f64;
    Ok(CoefResult::Value(clamp_unit(
        numerator / ((dx as f64) * (dy as f64)).sqrt(),
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct KendallCounts {
    total_pairs: u64,
    x_ties: u64,
    y_ties: u64,
    joint_ties: u64,
    swaps: u64,
}

impl KendallCounts {
    fn concordant_minus_discordant(&self) -> i64 {
        self.total_pairs as i64 - self.x_ties as i64 - self.y_ties as i64
            + self.joint_ties as i64
            - 2 * self.swaps as i64
    }
}

fn tie_pairs(run: u64) -> u64 {
    run * (run - 1) / 2
}

fn kendall_counts(x: &[f64], y: &[f64]) -> KendallCounts {
    let n = x.len() as u64;
    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| cmp_f64(&a.0, &b.0).then_with(|| cmp_f64(&a.1, &b.1)));

    let mut x_ties = 0;
    let mut joint_ties = 0;
    let mut x_run = 1u64;
    let mut xy_run = 1u64;
    for w in pairs.windows(2) {
        if w[1].0 == w[0].0 {
            x_run += 1;
            if w[1].1 == w[0].1 {
                xy_run += 1;
            } else {
                joint_ties += tie_pairs(xy_run);
                xy_run = 1;
            }
        } else {
            x_ties += tie_pairs(x_run);
            joint_ties += tie_pairs(xy_run);
            x_run = 1;
            xy_run = 1;
        }
    }
    x_ties += tie_pairs(x_run);
    joint_ties += tie_pairs(xy_run);

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let swaps = count_inversions(&mut ys);

    let mut y_ties = 0;
    let mut y_run = 1u64;
    for w in ys.windows(2) {
        if w[1] == w[0] {
            y_run += 1;
        } else {
            y_ties += tie_pairs(y_run);
            y_run = 1;
        }
    }
    y_ties += tie_pairs(y_run);

    KendallCounts {
        total_pairs: tie_pairs(n),
        x_ties,
        y_ties,
        joint_ties,
        swaps,
    }
}

/// Bottom-up merge sort of `v`, returning the number of strict inversions.
fn count_inversions(v: &mut Vec<f64>) -> u64 {
    let n = v.len();
    let mut buf = vec![0.0; n];
    let mut swaps = 0u64;
    let mut width = 1;
    while width < n {
        let mut lo = 0;
        while lo < n {
            let mid = (lo + width).min(n);
            let hi = (lo + 2 * width).min(n);
            let (mut i, mut j, mut k) = (lo, mid, lo);
            while i < mid && j < hi {
                if v[j] < v[i] {
                    buf[k] = v[j];
                    swaps += (mid - i) as u64;
                    j += 1;
                } else {
                    buf[k] = v[i];
                    i += 1;
                }
                k += 1;
            }
            buf[k..k + (mid - i)].copy_from_slice(&v[i..mid]);
            k += mid - i;
            buf[k..k + (hi - j)].copy_from_slice(&v[j..hi]);
            lo = hi;
        }
        std::mem::swap(v, &mut buf);
        width *= 2;
    }
    swaps
}
