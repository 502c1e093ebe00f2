mod common;

use approx::assert_abs_diff_eq;
use metacorr::agreement::{agreement_heatmap, agreement_heatmap_for, ranking_agreement};
use metacorr::rc::{ranking_consistency, RCConfig};
use metacorr::{evaluate, CoefKind, Error, Grouping, Measure, MetaEvalDataset, ScoreMatrix};

const GP: Measure = Measure::new(Grouping::Global, CoefKind::Pearson);

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn tau_b_oracle(a: &[f64], b: &[f64]) -> f64 {
    let (mut c, mut d, mut ta, mut tb) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let s = sign(a[i] - a[j]) * sign(b[i] - b[j]);
            if a[i] == a[j] {
                ta += 1.0;
            }
            if b[i] == b[j] {
                tb += 1.0;
            }
            if s > 0.0 {
                c += 1.0;
            } else if s < 0.0 {
                d += 1.0;
            }
        }
    }
    let n0 = (a.len() * (a.len() - 1) / 2) as f64;
    (c - d) / ((n0 - ta) * (n0 - tb)).sqrt()
}

fn permuted(ds: &MetaEvalDataset, order: &[usize]) -> MetaEvalDataset {
    let metrics: Vec<(String, ScoreMatrix)> = order
        .iter()
        .map(|&i| (ds.metrics()[i].name.clone(), ds.metrics()[i].scores.clone()))
        .collect();
    MetaEvalDataset::from_matrices(ds.human().clone(), metrics).unwrap()
}

#[test]
fn identical_metrics_have_no_defined_iteration() {
    let z = common::uniform_matrix(6, 10, 1);
    let x = common::uniform_matrix(6, 10, 2);
    let ds = MetaEvalDataset::from_matrices(z, [("a".into(), x.clone()), ("b".into(), x)]).unwrap();
    let err = ranking_consistency(&ds, GP, RCConfig::new(20, 0).unwrap()).unwrap_err();
    assert!(matches!(err, Error::AllIterationsUndefined { iterations: 20 }), "{err}");
}

#[test]
fn separated_metrics_rank_consistently() {
    let ds = common::noisy_dataset(16, 100, &[0.05, 0.4, 1.0, 2.0], 4);
    let rep = ranking_consistency(&ds, GP, RCConfig::new(50, 4).unwrap()).unwrap();
    assert_eq!(rep.iterations(), 50);
    assert_eq!(rep.undefined_iterations, 0);
    assert!(rep.rc_value >= 0.9, "{}", rep.rc_value);
    assert!(rep.per_iteration_taus.iter().all(|t| t.is_some_and(|t| (-1.0..=1.0).contains(&t))));
}

#[test]
fn rc_is_reproducible_and_order_invariant() {
    let ds = common::noisy_dataset(8, 30, &[0.5, 0.7, 1.0, 1.5, 3.0], 5);
    let cfg = RCConfig::new(40, 17).unwrap();
    let base = ranking_consistency(&ds, GP, cfg).unwrap();
    assert_eq!(ranking_consistency(&ds, GP, cfg).unwrap(), base);
    let shuffled = ranking_consistency(&permuted(&ds, &[3, 0, 4, 2, 1]), GP, cfg).unwrap();
    assert_eq!(shuffled.rc_value.to_bits(), base.rc_value.to_bits());
    let other = ranking_consistency(&ds, GP, RCConfig::new(40, 18).unwrap()).unwrap();
    assert_ne!(other.per_iteration_taus, base.per_iteration_taus);
}

#[test]
fn agreement_with_itself_is_one() {
    let ds = common::noisy_dataset(6, 12, &[0.2, 0.9, 2.0, 5.0], 6);
    for m in Measure::all() {
        assert_abs_diff_eq!(ranking_agreement(&ds, m, m).unwrap(), 1.0, epsilon = 1e-12);
    }
}

#[test]
fn affine_copies_tie_under_pearson() {
    let z = common::uniform_matrix(6, 12, 7);
    let x = common::uniform_matrix(6, 12, 8);
    let metrics = [(1.0, 0.0), (2.0, 3.0), (0.5, -1.0)].map(|(a, b)| {
        (
            format!("a{a}b{b}"),
            x.with_values(x.values().iter().map(|v| a * v + b).collect()).unwrap(),
        )
    });
    let ds = MetaEvalDataset::from_matrices(z, metrics).unwrap();
    let err = ranking_agreement(&ds, GP, Measure::new(Grouping::Item, CoefKind::Spearman)).unwrap_err();
    assert!(matches!(err, Error::DegenerateAgreement(_)), "{err}");
}

#[test]
fn agreement_matches_composed_oracle() {
    let ds = common::noisy_dataset(6, 12, &[0.2, 0.5, 0.9, 2.0, 5.0, 9.0], 9);
    let per_measure = |m: Measure| -> Vec<f64> {
        ds.metrics()
            .iter()
            .map(|x| evaluate(m, &x.scores, ds.human()).unwrap().value)
            .collect()
    };
    let heat = agreement_heatmap(&ds).unwrap();
    let all = Measure::all();
    for (i, &a) in all.iter().enumerate() {
        for (j, &b) in all.iter().enumerate() {
            let expected = tau_b_oracle(&per_measure(a), &per_measure(b));
            let direct = ranking_agreement(&ds, a, b).unwrap();
            assert_abs_diff_eq!(direct, expected, epsilon = 1e-12);
            assert_eq!(heat.get(i, j).unwrap().to_bits(), direct.to_bits());
        }
    }
}

#[test]
fn heatmap_structure_and_order_invariance() {
    let ds = common::noisy_dataset(5, 9, &[0.3, 0.6, 1.2, 2.5], 10);
    let heat = agreement_heatmap(&ds).unwrap();
    assert_eq!(heat.len(), 12);
    for i in 0..12 {
        assert_eq!(heat.get(i, i), Some(1.0));
        for j in 0..12 {
            assert_eq!(heat.get(i, j), heat.get(j, i));
        }
    }
    let reordered = agreement_heatmap(&permuted(&ds, &[2, 3, 1, 0])).unwrap();
    for i in 0..12 {
        for j in 0..12 {
            assert_abs_diff_eq!(
                reordered.get(i, j).unwrap(),
                heat.get(i, j).unwrap(),
                epsilon = 1e-12
            );
        }
    }
    let subset = [GP, Measure::new(Grouping::System, CoefKind::KendallTauB)];
    let small = agreement_heatmap_for(&ds, &subset).unwrap();
    assert_eq!(small.get(0, 1), heat.get(0, 11));
}

#[test]
fn undefined_measure_leaves_unset_cells() {
    // Each system row of the human matrix is constant, so item-level
    // correlations never exist.
    let z = common::matrix(3, 4, vec![1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0, 3.0, 3.0, 3.0, 3.0]);
    let metrics = (0..3).map(|k| (format!("m{k}"), common::uniform_matrix(3, 4, 40 + k)));
    let ds = MetaEvalDataset::from_matrices(z, metrics).unwrap();
    let heat = agreement_heatmap(&ds).unwrap();
    let item = Measure::all().iter().position(|m| m.grouping == Grouping::Item).unwrap();
    assert_eq!(heat.get(item, item), None);
    assert_eq!(heat.get(item, 0), None);
    assert!(heat.get(0, 0).is_some());
}
