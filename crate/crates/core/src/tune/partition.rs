//! Stratified split into a held-out third (Tr/V) and five CV folds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::RhythmLabel;
use crate::rng::{seeded, shuffle};

pub const N_FOLDS: usize = 5;
pub const MIN_ITEMS: usize = 30;
pub const HELD_OUT_FRACTION: f64 = 1.0 / 3.0;
pub const TRAIN_FRACTION: f64 = 0.7;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionPlan {
    pub tr: Vec<usize>,
    pub v: Vec<usize>,
    pub folds: Vec<Vec<usize>>,
    pub seed: u64,
}

impl PartitionPlan {
    /// Indices of every fold except `k`.
    pub fn training_folds(&self, k: usize) -> Vec<usize> {
        self.folds
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != k)
            .flat_map(|(_, f)| f.iter().copied())
            .collect()
    }
}

/// Items are shuffled within each class and interleaved by their relative
/// position in the class, so every prefix holds each class in proportion.
/// The first third is held out and split 70% Tr, 30% V within each class;
/// the rest is dealt into the folds class by class. Any set of at least 30
/// items whose classes each hold at least ten succeeds.
pub fn partition(labels: &[RhythmLabel], seed: u64) -> Result<PartitionPlan> {
    let n = labels.len();
    if n < MIN_ITEMS {
        return Err(Error::InsufficientData(format!(
            "partition needs at least {MIN_ITEMS} items, got {n}"
        )));
    }
    let mut rng = seeded(seed);
    let mut keyed: Vec<(f64, usize, usize)> = Vec::with_capacity(n);
    let present: Vec<RhythmLabel> = RhythmLabel::ALL.into_iter().filter(|l| labels.contains(l)).collect();
    if present.len() < 2 {
        return Err(Error::InsufficientData("partition needs at least two classes".into()));
    }
    for &class in &present {
        let mut idx: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
        shuffle(&mut idx, &mut rng);
        let m = idx.len() as f64;
        for (r, i) in idx.into_iter().enumerate() {
            keyed.push(((r as f64 + 0.5) / m, class.index(), i));
        }
    }
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let order: Vec<usize> = keyed.into_iter().map(|(_, _, i)| i).collect();

    let held = (n as f64 * HELD_OUT_FRACTION).round() as usize;
    let n_tr = (held as f64 * TRAIN_FRACTION).round() as usize;
    let (tr, v) = split_held(&order[..held], labels, &present, n_tr);
    // one counter across classes keeps both fold sizes and per-class
    // counts within one of each other
    let mut folds = vec![Vec::new(); N_FOLDS];
    let mut j = 0;
    for &class in &present {
        for &i in order[held..].iter().filter(|&&i| labels[i] == class) {
            folds[j % N_FOLDS].push(i);
            j += 1;
        }
    }

    for (name, part) in [("Tr", &tr), ("V", &v)].into_iter().chain(folds.iter().map(|f| ("fold", f))) {
        for &class in &present {
            if !part.iter().any(|&i| labels[i] == class) {
                return Err(Error::InsufficientData(format!(
                    "class {class} too small to stratify: a {name} set lacks it"
                )));
            }
        }
    }
    Ok(PartitionPlan { tr, v, folds, seed })
}

/// Splits the held-out items into `n_tr` training items and the rest,
/// giving each class its share of Tr by largest remainder (ties to the
/// lower class index). Held-out order is kept within both parts.
fn split_held(held: &[usize], labels: &[RhythmLabel], present: &[RhythmLabel], n_tr: usize) -> (Vec<usize>, Vec<usize>) {
    let counts: Vec<usize> = present.iter().map(|&c| held.iter().filter(|&&i| labels[i] == c).count()).collect();
    let total = held.len();
    let mut take: Vec<usize> = counts.iter().map(|&h| h * n_tr / total).collect();
    let remainder: Vec<usize> = counts.iter().map(|&h| h * n_tr % total).collect();
    let mut by_remainder: Vec<usize> = (0..present.len()).collect();
    by_remainder.sort_by(|&a, &b| remainder[b].cmp(&remainder[a]).then(a.cmp(&b)));
    let short = n_tr - take.iter().sum::<usize>();
    for &c in by_remainder.iter().take(short) {
        take[c] += 1;
    }
    let mut tr = Vec::with_capacity(n_tr);
    let mut v = Vec::with_capacity(held.len() - n_tr);
    let mut seen = vec![0; present.len()];
    for &i in held {
        let c = present.iter().position(|&p| p == labels[i]).unwrap();
        if seen[c] < take[c] {
            tr.push(i);
        } else {
            v.push(i);
        }
        seen[c] += 1;
    }
    (tr, v)
}
