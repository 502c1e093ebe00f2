//! The twelve grouped correlation measures: a grouping strategy composed
//! with a coefficient.
//!
//! | grouping | vectors correlated                                  |
//! |----------|-----------------------------------------------------|
//! | global   | the two flattened `N*M` matrices                    |
//! | input    | column `j` of each matrix, averaged over `M` inputs |
//! | item     | row `i` of each matrix, averaged over `N` systems   |
//! | system   | the two length-`N` vectors of row means             |
//!
//! Groups whose coefficient is undefined (a constant row or column) are
//! skipped in the input/item averages and counted in the result.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corrcoef::{CoefKind, CoefResult};
use crate::dataset::MetaEvalDataset;
use crate::error::{Error, Result};
use crate::matrix::{MatrixView, ScoreMatrix};
use crate::numeric::KahanSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grouping {
    Global,
    Input,
    Item,
    System,
}

impl Grouping {
    pub const ALL: [Grouping; 4] = [
        Grouping::Global,
        Grouping::Input,
        Grouping::Item,
        Grouping::System,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Grouping::Global => "global",
            Grouping::Input => "input",
            Grouping::Item => "item",
            Grouping::System => "system",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Measure {
    pub grouping: Grouping,
    pub coef: CoefKind,
}

impl Measure {
    pub const fn new(grouping: Grouping, coef: CoefKind) -> Self {
        Self { grouping, coef }
    }

    /// All twelve measures, grouping-major.
    pub fn all() -> Vec<Measure> {
        Grouping::ALL
            .iter()
            .flat_map(|&g| CoefKind::ALL.iter().map(move |&c| Measure::new(g, c)))
            .collect()
    }

    /// Lowercase `<grouping>-<coef>` token, e.g. `system-kendall`.
    pub fn token(&self) -> String {
        format!("{}-{}", self.grouping.token(), self.coef.token())
    }

    /// Parses a comma-separated token list; `all` expands to every measure.
    pub fn parse_list(list: &str) -> Result<Vec<Measure>> {
        let mut out = Vec::new();
        for token in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            if token == "all" {
                out.extend(Measure::all());
            } else {
                out.push(token.parse()?);
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidParameter("empty measure list".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.grouping.token(), self.coef.token())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unknown measure {s:?}"));
        let (g, c) = s.split_once('-').ok_or_else(bad)?;
        let grouping = Grouping::ALL
            .into_iter()
            .find(|x| x.token() == g)
            .ok_or_else(bad)?;
        let coef = CoefKind::ALL
            .into_iter()
            .find(|x| x.token() == c)
            .ok_or_else(bad)?;
        Ok(Measure::new(grouping, coef))
    }
}

impl Serialize for Measure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.token())
    }
}

impl<'de> Deserialize<'de> for Measure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureResult {
    pub measure: Measure,
    /// Mean over defined groups.
    pub value: f64,
    pub group_count: usize,
    pub undefined_group_count: usize,
    pub per_group: Option<Vec<CoefResult>>,
}

/// Evaluates `measure` on two aligned score matrices.
pub fn evaluate(measure: Measure, x: &ScoreMatrix, z: &ScoreMatrix) -> Result<MeasureResult> {
    check_alignment(x, z)?;
    run(measure, x.view(), z.view(), false)
}

/// Like [`evaluate`], also returning every group's coefficient.
pub fn evaluate_detailed(
    measure: Measure,
    x: &ScoreMatrix,
    z: &ScoreMatrix,
) -> Result<MeasureResult> {
    check_alignment(x, z)?;
    run(measure, x.view(), z.view(), true)
}

/// Evaluates on identifier-free views of equal shape.
pub fn evaluate_view(
    measure: Measure,
    x: MatrixView<'_>,
    z: MatrixView<'_>,
) -> Result<MeasureResult> {
    check_shape(&x, &z)?;
    run(measure, x, z, false)
}

/// Just the measure value; fails when every group is undefined.
pub fn measure_value(measure: Measure, x: MatrixView<'_>, z: MatrixView<'_>) -> Result<f64> {
    check_shape(&x, &z)?;
    run(measure, x, z, false).map(|r| r.value)
}

/// Evaluates `measure` for every metric against the human scores.
pub fn evaluate_all(
    dataset: &MetaEvalDataset,
    measure: Measure,
) -> Result<Vec<(String, MeasureResult)>> {
    dataset
        .metrics()
        .par_iter()
        .map(|m| Ok((m.name.clone(), evaluate(measure, &m.scores, dataset.human())?)))
        .collect()
}

fn check_alignment(x: &ScoreMatrix, z: &ScoreMatrix) -> Result<()> {
    check_shape(&x.view(), &z.view())?;
    if !x.is_aligned_with(z) {
        return Err(Error::IdMismatch {
            context: "measure evaluation".into(),
        });
    }
    Ok(())
}

fn check_shape(x: &MatrixView<'_>, z: &MatrixView<'_>) -> Result<()> {
    if !x.same_shape(z) {
        return Err(Error::DimensionMismatch {
            context: "measure evaluation".into(),
            expected_rows: z.rows(),
            expected_cols: z.cols(),
            rows: x.rows(),
            cols: x.cols(),
        });
    }
    Ok(())
}

fn row_means(m: &MatrixView<'_>) -> Vec<f64> {
    (0..m.rows())
        .map(|i| m.row(i).iter().copied().collect::<KahanSum>().total() / m.cols() as f64)
        .collect()
}

fn run(
    measure: Measure,
    x: MatrixView<'_>,
    z: MatrixView<'_>,
    keep_groups: bool,
) -> Result<MeasureResult> {
    let coef = measure.coef;
    let mut acc = KahanSum::new();
    let mut defined = 0usize;
    let mut groups = if keep_groups { Some(Vec::new()) } else { None };
    let mut record = |r: CoefResult| {
        if let CoefResult::Value(v) = r {
            acc.add(v);
            defined += 1;
        }
        if let Some(g) = groups.as_mut() {
            g.push(r);
        }
    };

    let group_count = match measure.grouping {
        Grouping::Global => {
            record(coef.compute(x.data(), z.data())?);
            1
        }
        Grouping::Input => {
            let (rows, cols) = (x.rows(), x.cols());
            let mut xs = vec![0.0; rows];
            let mut zs = vec![0.0; rows];
            for j in 0..cols {
                for i in 0..rows {
                    xs[i] = x.data()[i * cols + j];
                    zs[i] = z.data()[i * cols + j];
                }
                record(coef.compute(&xs, &zs)?);
            }
            cols
        }
        Grouping::Item => {
            for i in 0..x.rows() {
                record(coef.compute(x.row(i), z.row(i))?);
            }
            x.rows()
        }
        Grouping::System => {
            record(coef.compute(&row_means(&x), &row_means(&z))?);
            1
        }
    };

    if defined == 0 {
        return Err(Error::AllGroupsUndefined {
            measure: measure.token(),
            groups: group_count,
        });
    }
    Ok(MeasureResult {
        measure,
        value: acc.total() / defined as f64,
        group_count,
        undefined_group_count: group_count - defined,
        per_group: groups,
    })
}
