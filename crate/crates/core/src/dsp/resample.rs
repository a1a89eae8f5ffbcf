//! Polyphase rational resampler: upsample by `up`, low-pass, keep every
//! `down`-th sample. Only the output phases are ever computed.

use super::fir::{extended, lowpass_taps, taps_for_transition};

#[derive(Debug, Clone)]
pub struct RationalResampler {
    up: usize,
    down: usize,
    /// Prototype filter at the intermediate rate, gain `up`.
    taps: Vec<f64>,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl RationalResampler {
    /// Resampler from `fs_in` to `fs_out`, anti-aliasing cutoff `cutoff_hz`
    /// and transition width `transition_hz` at the intermediate rate.
    pub fn new(fs_in: u32, fs_out: u32, cutoff_hz: f64, transition_hz: f64) -> Self {
        let g = gcd(fs_in as usize, fs_out as usize);
        let up = fs_out as usize / g;
        let down = fs_in as usize / g;
        let fs_mid = (fs_in as usize * up) as f64;
        let n = taps_for_transition(fs_mid, transition_hz);
        let mut taps = lowpass_taps(n, cutoff_hz, fs_mid);
        // each polyphase branch gets exact unit DC gain
        for phase in 0..up {
            let sum: f64 = taps.iter().skip(phase).step_by(up).sum();
            taps.iter_mut().skip(phase).step_by(up).for_each(|t| *t /= sum);
        }
        RationalResampler { up, down, taps }
    }

    pub fn ratio(&self) -> (usize, usize) {
        (self.up, self.down)
    }

    pub fn output_len(&self, input_len: usize) -> usize {
        (input_len * self.up).div_ceil(self.down)
    }

    pub fn process(&self, x: &[f64]) -> Vec<f64> {
        if x.is_empty() {
            return Vec::new();
        }
        if self.up == 1 && self.down == 1 {
            return x.to_vec();
        }
        let up = self.up as isize;
        let delay = (self.taps.len() / 2) as isize;
        (0..self.output_len(x.len()))
            .map(|m| {
                // position on the zero-stuffed grid aligned with output sample m
                let t = m as isize * self.down as isize + delay;
                let first = t.rem_euclid(up) as usize;
                let mut acc = 0.0;
                let mut k = first;
                while k < self.taps.len() {
                    let j = (t - k as isize) / up;
                    acc += self.taps[k] * extended(x, j);
                    k += self.up;
                }
                acc
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios() {
        assert_eq!(RationalResampler::new(250, 100, 48.0, 8.0).ratio(), (2, 5));
        assert_eq!(RationalResampler::new(360, 100, 48.0, 8.0).ratio(), (5, 18));
        assert_eq!(RationalResampler::new(100, 100, 48.0, 8.0).ratio(), (1, 1));
    }

    #[test]
    fn constant_preserved() {
        let r = RationalResampler::new(250, 100, 48.0, 8.0);
        let y = r.process(&[2.0; 500]);
        assert_eq!(y.len(), 200);
        assert!(y.iter().all(|v| (v - 2.0).abs() < 1e-9));
    }
}
