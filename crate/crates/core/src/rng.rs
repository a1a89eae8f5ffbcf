//! Seeded randomness shared by every stochastic step.
//!
//! All draws come from ChaCha8 seeded with `seed_from_u64`, and indices are
//! drawn as `u64` so the streams do not depend on the platform's pointer
//! width. Shuffles are Fisher-Yates from the back; subsets are the first
//! `k` slots of a partial Fisher-Yates from the front.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform index in `0..upper`. `upper` must be nonzero.
pub fn uniform_index(rng: &mut SeededRng, upper: usize) -> usize {
    rng.gen_range(0..upper as u64) as usize
}

pub fn shuffle<T>(items: &mut [T], rng: &mut SeededRng) {
    for i in (1..items.len()).rev() {
        let j = uniform_index(rng, i + 1);
        items.swap(i, j);
    }
}

/// Uniform `k`-subset without replacement, in draw order.
pub fn sample_without_replacement<T: Clone>(
    items: &[T],
    k: usize,
    rng: &mut SeededRng,
) -> Vec<T> {
    let mut idx: Vec<usize> = (0..items.len()).collect();
    let k = k.min(items.len());
    for i in 0..k {
        let j = i + uniform_index(rng, items.len() - i);
        idx.swap(i, j);
    }
    idx[..k].iter().map(|&i| items[i].clone()).collect()
}

/// Standard normal draw (Box-Muller).
pub fn normal(rng: &mut SeededRng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_streams() {
        let mut a = seeded(7);
        let mut b = seeded(7);
        let mut xs: Vec<u32> = (0..50).collect();
        let mut ys = xs.clone();
        shuffle(&mut xs, &mut a);
        shuffle(&mut ys, &mut b);
        assert_eq!(xs, ys);
        let mut sorted = xs.clone();
        sorted.sort();
        assert_eq!(sorted, (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn subset_is_distinct() {
        let mut rng = seeded(1);
        let items: Vec<usize> = (0..20).collect();
        let mut s = sample_without_replacement(&items, 8, &mut rng);
        s.sort();
        s.dedup();
        assert_eq!(s.len(), 8);
    }
}
