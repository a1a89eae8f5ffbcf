use std::cell::RefCell;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// `|DFT(x)[k]|` for `k = 0 .. N/2 - 1`. DC is kept and the Nyquist bin is
/// dropped, so the output has exactly `N/2` entries.
pub fn magnitude_spectrum(segment: &[f64]) -> Result<Vec<f64>> {
    let n = segment.len();
    if n == 0 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "magnitude spectrum needs an even, nonzero length (got {n})"
        )));
    }
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n));
    let mut buf: Vec<Complex<f64>> = segment.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft.process(&mut buf);
    Ok(buf[..n / 2].iter().map(|c| c.norm()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft_magnitude(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n / 2)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (t, v) in x.iter().enumerate() {
                    let w = -2.0 * std::f64::consts::PI * (k * t) as f64 / n as f64;
                    re += v * w.cos();
                    im += v * w.sin();
                }
                (re * re + im * im).sqrt()
            })
            .collect()
    }

    #[test]
    fn dims_and_constant() {
        assert_eq!(magnitude_spectrum(&vec![0.1; 400]).unwrap().len(), 200);
        let s = magnitude_spectrum(&vec![-1.5; 50]).unwrap();
        assert!((s[0] - 75.0).abs() < 1e-9);
        assert!(s[1..].iter().all(|v| v.abs() < 1e-9));
        assert!(magnitude_spectrum(&[1.0, 2.0, 3.0]).is_err());
        assert!(magnitude_spectrum(&[]).is_err());
    }

    #[test]
    fn matches_direct_dft() {
        let x: Vec<f64> = (0..100).map(|i| ((i * i) % 17) as f64 - 8.0).collect();
        let fast = magnitude_spectrum(&x).unwrap();
        let slow = naive_dft_magnitude(&x);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn circular_shift_and_sign() {
        let x: Vec<f64> = (0..400).map(|i| (i as f64 * 0.37).sin() + (i % 7) as f64).collect();
        let mut shifted = x.clone();
        shifted.rotate_right(17);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let a = magnitude_spectrum(&x).unwrap();
        let b = magnitude_spectrum(&shifted).unwrap();
        let c = magnitude_spectrum(&neg).unwrap();
        for i in 0..a.len() {
            assert!((a[i] - b[i]).abs() < 1e-9);
            assert!((a[i] - c[i]).abs() < 1e-9);
        }
    }
}
