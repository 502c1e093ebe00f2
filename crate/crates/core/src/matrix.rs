//! Score matrices: one row per system, one column per input.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Borrowed row-major view over `rows * cols` scores.
///
/// Unlike [`ScoreMatrix`] a view carries no identifiers and may have a single
/// row or column, which is what split halves and structural checks need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixView<'a> {
    rows: usize,
    cols: usize,
    data: &'a [f64],
}

impl<'a> MatrixView<'a> {
    pub fn new(rows: usize, cols: usize, data: &'a [f64]) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidMatrix(format!("empty shape {rows}x{cols}")));
        }
        if rows.checked_mul(cols) != Some(data.len()) {
            return Err(Error::InvalidMatrix(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub(crate) fn new_unchecked(rows: usize, cols: usize, data: &'a [f64]) -> Self {
        debug_assert_eq!(rows * cols, data.len());
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &'a [f64] {
        self.data
    }

    pub fn row(&self, i: usize) -> &'a [f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn same_shape(&self, other: &MatrixView<'_>) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    system_ids: Vec<String>,
    input_ids: Vec<String>,
    values: Vec<f64>,
}

impl ScoreMatrix {
    /// Builds a matrix from row-major `values`.
    pub fn new(system_ids: Vec<String>, input_ids: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let (n, m) = (system_ids.len(), input_ids.len());
        if n < 2 || m < 2 {
            return Err(Error::InvalidMatrix(format!(
                "need at least 2 systems and 2 inputs, got {n}x{m}"
            )));
        }
        if values.len() != n * m {
            return Err(Error::InvalidMatrix(format!(
                "{} values cannot fill a {n}x{m} matrix",
                values.len()
            )));
        }
        check_unique("system", &system_ids)?;
        check_unique("input", &input_ids)?;
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix(format!(
                "non-finite value {} at ({}, {})",
                values[k],
                system_ids[k / m],
                input_ids[k % m]
            )));
        }
        Ok(Self {
            system_ids,
            input_ids,
            values,
        })
    }

    /// Builds a matrix with generated ids `s1..sN` and `d1..dM`.
    pub fn from_values(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        Self::new(
            (1..=rows).map(|i| format!("s{i}")).collect(),
            (1..=cols).map(|j| format!("d{j}")).collect(),
            values,
        )
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidMatrix("ragged rows".into()));
        }
        Self::from_values(rows.len(), cols, rows.concat())
    }

    pub fn n_systems(&self) -> usize {
        self.system_ids.len()
    }

    pub fn n_inputs(&self) -> usize {
        self.input_ids.len()
    }

    pub fn system_ids(&self) -> &[String] {
        &self.system_ids
    }

    pub fn input_ids(&self) -> &[String] {
        &self.input_ids
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, system: usize, input: usize) -> f64 {
        self.values[system * self.n_inputs() + input]
    }

    pub fn row(&self, system: usize) -> &[f64] {
        let m = self.n_inputs();
        &self.values[system * m..(system + 1) * m]
    }

    pub fn view(&self) -> MatrixView<'_> {
        MatrixView::new_unchecked(self.n_systems(), self.n_inputs(), &self.values)
    }

    /// Same shape and identical id lists.
    pub fn is_aligned_with(&self, other: &ScoreMatrix) -> bool {
        self.system_ids == other.system_ids && self.input_ids == other.input_ids
    }

    /// Copy with the same ids and new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.system_ids.clone(), self.input_ids.clone(), values)
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Number of distinct score values.
    pub fn distinct_values(&self) -> usize {
        let mut sorted = self.values.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup_by(|a, b| a == b);
        sorted.len()
    }
}

fn check_unique(what: &str, ids: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::InvalidMatrix(format!("duplicate {what} id {id:?}")));
        }
    }
    Ok(())
}

/// Declared bounds of a score scale, e.g. `(1, 5)` for a 5-point Likert scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Scale {
    pub lo: f64,
    pub hi: f64,
}

impl From<[f64; 2]> for Scale {
    fn from([lo, hi]: [f64; 2]) -> Self {
        Scale { lo, hi }
    }
}

impl From<Scale> for [f64; 2] {
    fn from(s: Scale) -> Self {
        [s.lo, s.hi]
    }
}

/// Affine map onto `[0, 1]`.
///
/// With a declared scale, `lo -> 0` and `hi -> 1`; otherwise the empirical
/// minimum and maximum are used.
pub fn normalize_01(m: &ScoreMatrix, scale: Option<Scale>) -> Result<ScoreMatrix> {
    let (lo, hi) = match scale {
        Some(Scale { lo, hi }) => {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidParameter(format!(
                    "scale bounds must satisfy lo < hi, got ({lo}, {hi})"
                )));
            }
            let (min, max) = m.min_max();
            if min < lo || max > hi {
                return Err(Error::InvalidParameter(format!(
                    "values span [{min}, {max}], outside the declared scale ({lo}, {hi})"
                )));
            }
            (lo, hi)
        }
        None => {
            let (min, max) = m.min_max();
            if min == max {
                return Err(Error::InvalidParameter(
                    "constant matrix has zero range; cannot normalize".into(),
                ));
            }
            (min, max)
        }
    };
    let range = hi - lo;
    m.with_values(m.values().iter().map(|v| (v - lo) / range).collect())
}

/// Fraction of unordered pairs of flattened entries holding equal values.
pub fn tie_ratio(m: &ScoreMatrix) -> f64 {
    tie_ratio_of(m.values())
}

/// [`tie_ratio`] over a plain slice; zero below two values.
pub fn tie_ratio_of(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = sorted.len() as u64;
    let mut tied = 0u64;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as u64;
        tied += t * (t - 1) / 2;
        i = j;
    }
    tied as f64 / (n * (n - 1) / 2) as f64
}

/// Raw scale size and annotator count behind an averaged score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GranularitySpec {
    scale_points: u32,
    annotators: u32,
}

impl GranularitySpec {
    pub fn new(scale_points: u32, annotators: u32) -> Result<Self> {
        if scale_points < 2 {
            return Err(Error::InvalidParameter(format!(
                "scale_points must be at least 2, got {scale_points}"
            )));
        }
        if annotators < 1 {
            return Err(Error::InvalidParameter("annotators must be at least 1".into()));
        }
        Ok(Self {
            scale_points,
            annotators,
        })
    }

    pub fn scale_points(&self) -> u32 {
        self.scale_points
    }

    pub fn annotators(&self) -> u32 {
        self.annotators
    }
}

/// Number of distinct values an average of `annotators` scores can take.
pub fn granularity(spec: &GranularitySpec) -> u64 {
    u64::from(spec.annotators) * u64::from(spec.scale_points - 1) + 1
}
