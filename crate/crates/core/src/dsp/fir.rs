//! Windowed-sinc FIR design (Hamming window) and delay-compensated filtering.

use std::f64::consts::PI;

/// Hamming transition-width constant: Δf ≈ 3.3·fs / N.
const HAMMING_TRANSITION: f64 = 3.3;

/// Odd tap count whose Hamming transition band is at most `transition_hz`,
/// with a 10% margin.
pub fn taps_for_transition(fs: f64, transition_hz: f64) -> usize {
    let n = (1.1 * HAMMING_TRANSITION * fs / transition_hz).ceil() as usize;
    n / 2 * 2 + 1
}

fn hamming(n: usize, len: usize) -> f64 {
    if len == 1 {
        return 1.0;
    }
    0.54 - 0.46 * (2.0 * PI * n as f64 / (len - 1) as f64).cos()
}

/// Low-pass windowed sinc with -6 dB point at `cutoff_hz`, scaled to unit DC gain.
pub fn lowpass_taps(num_taps: usize, cutoff_hz: f64, fs: f64) -> Vec<f64> {
    assert!(num_taps % 2 == 1, "linear-phase design needs an odd tap count");
    let fc = cutoff_hz / fs;
    let mid = (num_taps / 2) as f64;
    let mut taps: Vec<f64> = (0..num_taps)
        .map(|n| {
            let t = n as f64 - mid;
            let sinc = if t == 0.0 {
                2.0 * fc
            } else {
                (2.0 * PI * fc * t).sin() / (PI * t)
            };
            sinc * hamming(n, num_taps)
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

/// High-pass by spectral inversion of [`lowpass_taps`]; DC gain is zero.
pub fn highpass_taps(num_taps: usize, cutoff_hz: f64, fs: f64) -> Vec<f64> {
    let mut taps = lowpass_taps(num_taps, cutoff_hz, fs);
    taps.iter_mut().for_each(|t| *t = -*t);
    taps[num_taps / 2] += 1.0;
    taps
}

/// Sample `j` of `x` continued past both ends by odd reflection about the
/// end samples. Linear in `x`, and exact for constants and straight lines.
#[inline]
pub(crate) fn extended(x: &[f64], j: isize) -> f64 {
    let n = x.len() as isize;
    if j < 0 {
        let k = (-j).min(n - 1);
        2.0 * x[0] - x[k as usize]
    } else if j >= n {
        let k = (2 * (n - 1) - j).max(0);
        2.0 * x[(n - 1) as usize] - x[k as usize]
    } else {
        x[j as usize]
    }
}

/// Convolves with a symmetric odd-length FIR and removes its group delay,
/// so the output has the input's length and alignment.
pub fn filter_zero_phase(x: &[f64], taps: &[f64]) -> Vec<f64> {
    if x.is_empty() {
        return Vec::new();
    }
    let half = (taps.len() / 2) as isize;
    let n = x.len() as isize;
    (0..n)
        .map(|i| {
            let mut acc = 0.0;
            // inner range avoids the extension branch for the bulk of the signal
            if i - half >= 0 && i + half < n {
                let base = (i - half) as usize;
                for (k, t) in taps.iter().enumerate() {
                    acc += t * x[base + taps.len() - 1 - k];
                }
            } else {
                for (k, t) in taps.iter().enumerate() {
                    acc += t * extended(x, i + half - k as isize);
                }
            }
            acc
        })
        .collect()
}

/// Magnitude of the frequency response at `freq_hz`.
pub fn gain_at(taps: &[f64], freq_hz: f64, fs: f64) -> f64 {
    let w = 2.0 * PI * freq_hz / fs;
    let (re, im) = taps
        .iter()
        .enumerate()
        .fold((0.0, 0.0), |(re, im), (n, t)| {
            (re + t * (w * n as f64).cos(), im - t * (w * n as f64).sin())
        });
    (re * re + im * im).sqrt()
}
