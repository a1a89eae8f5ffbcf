use std::collections::HashSet;

use proptest::prelude::*;
use rhythmsvm::label::RhythmLabel;
use rhythmsvm::rng::{seeded, shuffle};
use rhythmsvm::tune::{partition, N_FOLDS};

fn labels_from(counts: [usize; 3]) -> Vec<RhythmLabel> {
    let mut out = Vec::new();
    for (i, &n) in counts.iter().enumerate() {
        out.extend(std::iter::repeat(RhythmLabel::from_index(i).unwrap()).take(n));
    }
    shuffle(&mut out, &mut seeded(1));
    out
}

proptest! {
    #[test]
    fn parts_cover_exactly_once(a in 10usize..80, b in 10usize..80, c in 10usize..80, seed in any::<u64>()) {
        let labels = labels_from([a, b, c]);
        let n = labels.len();
        let plan = partition(&labels, seed).unwrap();
        let mut seen = HashSet::new();
        for i in plan.tr.iter().chain(&plan.v).chain(plan.folds.iter().flatten()) {
            prop_assert!(seen.insert(*i), "index {} twice", i);
        }
        prop_assert_eq!(seen.len(), n);
        let held = (n as f64 / 3.0).round() as usize;
        prop_assert_eq!(plan.tr.len() + plan.v.len(), held);
        prop_assert_eq!(plan.tr.len(), (0.7 * held as f64).round() as usize);
        prop_assert_eq!(plan.folds.len(), N_FOLDS);
        let sizes: Vec<usize> = plan.folds.iter().map(Vec::len).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn folds_are_stratified(a in 30usize..90, b in 30usize..90, seed in any::<u64>()) {
        let labels = labels_from([a, b, 0]);
        let plan = partition(&labels, seed).unwrap();
        let share = a as f64 / (a + b) as f64;
        for fold in &plan.folds {
            let sr = fold.iter().filter(|&&i| labels[i] == RhythmLabel::SR).count() as f64;
            // within two items of the global share
            prop_assert!((sr - share * fold.len() as f64).abs() <= 2.0);
        }
        for class in [RhythmLabel::SR, RhythmLabel::VT] {
            let counts: Vec<usize> = plan.folds.iter().map(|f| f.iter().filter(|&&i| labels[i] == class).count()).collect();
            prop_assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
        }
    }

    #[test]
    fn same_seed_same_plan(seed in any::<u64>()) {
        let labels = labels_from([40, 40, 40]);
        prop_assert_eq!(partition(&labels, seed).unwrap(), partition(&labels, seed).unwrap());
    }

    #[test]
    fn training_folds_exclude_held_out(seed in any::<u64>(), k in 0usize..N_FOLDS) {
        let labels = labels_from([30, 30, 30]);
        let plan = partition(&labels, seed).unwrap();
        let train: HashSet<usize> = plan.training_folds(k).into_iter().collect();
        prop_assert!(plan.folds[k].iter().all(|i| !train.contains(i)));
        let others: usize = (0..N_FOLDS).filter(|&j| j != k).map(|j| plan.folds[j].len()).sum();
        prop_assert_eq!(train.len(), others);
    }
}

#[test]
fn rejects_small_or_single_class_sets() {
    assert!(partition(&labels_from([10, 10, 9]), 0).is_err());
    assert!(partition(&labels_from([60, 0, 0]), 0).is_err());
}

#[test]
fn every_class_of_ten_or_more_fits() {
    let mut failures = Vec::new();
    for a in 10..=40 {
        for b in 10..=40 {
            for c in [0, 10, 11, 17, 25, 40] {
                if a + b + c < 30 {
                    continue;
                }
                for seed in 0..2 {
                    if partition(&labels_from([a, b, c]), seed).is_err() {
                        failures.push((a, b, c, seed));
                    }
                }
            }
        }
    }
    assert!(failures.is_empty(), "{} failures, first {:?}", failures.len(), &failures[..failures.len().min(5)]);
}
