//! Synthetic SR, VT and VF-like traces with known labels.
//!
//! The generators give the learning pipeline a separable three-class
//! problem. They are not physiological models.
//!
//! * SR: a narrow biphasic spike and a low broad bump per beat, 50–100 bpm.
//! * VT: a smooth asymmetric periodic wave, 150–250 per minute.
//! * VF: white noise band-passed into 3–8 Hz with a slow random amplitude
//!   envelope. `rate` sets the band centre in deflections per minute.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dsp::{filter_zero_phase, lowpass_taps, taps_for_transition};
use crate::error::{Error, Result};
use crate::ingest::{AnnotatedRecord, Annotation, SUPPORTED_RATES};
use crate::label::RhythmLabel;
use crate::rng::{normal, seeded, uniform_index, SeededRng};

pub const SR_RATE: (f64, f64) = (50.0, 100.0);
pub const VT_RATE: (f64, f64) = (150.0, 250.0);
/// 3–8 Hz.
pub const VF_RATE: (f64, f64) = (180.0, 480.0);
pub const VF_BAND_HZ: (f64, f64) = (3.0, 8.0);
const VF_HALF_BAND_HZ: f64 = 1.5;
const VF_TRANSITION_HZ: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub class: RhythmLabel,
    pub fs: u32,
    pub duration_s: f64,
    pub seed: u64,
    /// Beats (SR), cycles (VT) or band-centre deflections (VF) per minute.
    pub rate: f64,
    /// Standard deviation of additive white noise.
    pub noise: f64,
}

pub fn rate_range(class: RhythmLabel) -> (f64, f64) {
    match class {
        RhythmLabel::SR => SR_RATE,
        RhythmLabel::VT => VT_RATE,
        RhythmLabel::VF => VF_RATE,
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if !SUPPORTED_RATES.contains(&self.fs) {
            return Err(Error::UnsupportedRate(self.fs));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(Error::InvalidArgument(format!("duration must be positive, got {}", self.duration_s)));
        }
        let (lo, hi) = rate_range(self.class);
        if !(lo..=hi).contains(&self.rate) {
            return Err(Error::InvalidArgument(format!(
                "{} rate {} outside {lo}..={hi} per minute",
                self.class, self.rate
            )));
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(Error::InvalidArgument(format!("noise level must be >= 0, got {}", self.noise)));
        }
        Ok(())
    }

    fn n_samples(&self) -> usize {
        (self.duration_s * f64::from(self.fs)).round() as usize
    }

    fn record_id(&self) -> String {
        format!("syn-{}-{}", self.class.as_str().to_lowercase(), self.seed)
    }
}

fn expect_class(spec: &SynthSpec, class: RhythmLabel) -> Result<()> {
    if spec.class != class {
        return Err(Error::InvalidArgument(format!(
            "spec is for {}, generator is for {class}",
            spec.class
        )));
    }
    spec.validate()
}

fn gaussian(t: f64, centre: f64, width: f64) -> f64 {
    let z = (t - centre) / width;
    (-0.5 * z * z).exp()
}

/// Sample position within the current period. Exact when the period is a
/// whole number of samples.
fn phase_samples(n: usize, offset: usize, period: f64) -> f64 {
    let m = (n + offset) as f64;
    m - (m / period).floor() * period
}

fn add_noise(x: &mut [f64], level: f64, rng: &mut SeededRng) {
    if level > 0.0 {
        for v in x.iter_mut() {
            *v += level * normal(rng);
        }
    }
}

fn finish(spec: &SynthSpec, samples: Vec<f64>) -> Result<AnnotatedRecord> {
    let n = samples.len();
    AnnotatedRecord::new(
        spec.record_id(),
        spec.fs,
        samples,
        vec![Annotation {
            start: 0,
            end: n,
            label: spec.class,
        }],
    )
}

fn sr_beat(tau: f64, amp: f64) -> f64 {
    amp * (gaussian(tau, 0.10, 0.015) - 0.4 * gaussian(tau, 0.13, 0.015)) + 0.25 * amp * gaussian(tau, 0.35, 0.06)
}

pub fn gen_sr(spec: &SynthSpec) -> Result<AnnotatedRecord> {
    expect_class(spec, RhythmLabel::SR)?;
    let mut rng = seeded(spec.seed);
    let fs = f64::from(spec.fs);
    let period = fs * 60.0 / spec.rate;
    let beat_s = period / fs;
    let offset = uniform_index(&mut rng, period.floor().max(1.0) as usize);
    let amp = rng.gen_range(0.8..1.2);
    let mut x: Vec<f64> = (0..spec.n_samples())
        .map(|n| {
            let tau = phase_samples(n, offset, period) / fs;
            sr_beat(tau, amp) + sr_beat(tau + beat_s, amp) + sr_beat(tau - beat_s, amp)
        })
        .collect();
    add_noise(&mut x, spec.noise, &mut rng);
    finish(spec, x)
}

pub fn gen_vt(spec: &SynthSpec) -> Result<AnnotatedRecord> {
    expect_class(spec, RhythmLabel::VT)?;
    let mut rng = seeded(spec.seed);
    let period = f64::from(spec.fs) * 60.0 / spec.rate;
    let offset = uniform_index(&mut rng, period.floor().max(1.0) as usize);
    let amp = rng.gen_range(0.8..1.2);
    let skew = rng.gen_range(0.3..0.6);
    let mut x: Vec<f64> = (0..spec.n_samples())
        .map(|n| {
            let phi = 2.0 * PI * phase_samples(n, offset, period) / period;
            amp * (phi.sin() + skew * (2.0 * phi + 0.8).sin() + 0.15 * (3.0 * phi + 1.9).sin())
        })
        .collect();
    add_noise(&mut x, spec.noise, &mut rng);
    finish(spec, x)
}

pub fn gen_vf(spec: &SynthSpec) -> Result<AnnotatedRecord> {
    expect_class(spec, RhythmLabel::VF)?;
    let mut rng = seeded(spec.seed);
    let fs = f64::from(spec.fs);
    let centre = spec.rate / 60.0;
    let lo = (centre - VF_HALF_BAND_HZ).max(VF_BAND_HZ.0 + VF_TRANSITION_HZ);
    let hi = (centre + VF_HALF_BAND_HZ).min(VF_BAND_HZ.1 - VF_TRANSITION_HZ);
    let taps_n = taps_for_transition(fs, VF_TRANSITION_HZ);
    let low = lowpass_taps(taps_n, lo, fs);
    let taps: Vec<f64> = lowpass_taps(taps_n, hi, fs).iter().zip(&low).map(|(h, l)| h - l).collect();
    let n = spec.n_samples();
    let white: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
    let band = filter_zero_phase(&white, &taps);
    let rms = (band.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt().max(f64::MIN_POSITIVE);
    let envelope: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| (rng.gen_range(0.1..0.5), rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.05..0.15)))
        .collect();
    let mut x: Vec<f64> = band
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let t = i as f64 / fs;
            let env: f64 = 1.0 + envelope.iter().map(|(f, p, a)| a * (2.0 * PI * f * t + p).sin()).sum::<f64>();
            v / rms * env
        })
        .collect();
    add_noise(&mut x, spec.noise, &mut rng);
    finish(spec, x)
}

pub fn generate(spec: &SynthSpec) -> Result<AnnotatedRecord> {
    match spec.class {
        RhythmLabel::SR => gen_sr(spec),
        RhythmLabel::VT => gen_vt(spec),
        RhythmLabel::VF => gen_vf(spec),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub n_per_class: usize,
    pub seed: u64,
    pub fs: u32,
    pub duration_s: f64,
    pub noise: f64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            n_per_class: 10,
            seed: 0,
            fs: 250,
            duration_s: 20.0,
            noise: 0.05,
        }
    }
}

/// `n_per_class` records of each class with rates drawn uniformly from the
/// class range, in SR, VT, VF order.
pub fn gen_corpus(corpus: &CorpusSpec) -> Result<Vec<AnnotatedRecord>> {
    let mut rng = seeded(corpus.seed);
    let mut specs = Vec::with_capacity(3 * corpus.n_per_class);
    for class in RhythmLabel::ALL {
        let (lo, hi) = rate_range(class);
        for _ in 0..corpus.n_per_class {
            specs.push(SynthSpec {
                class,
                fs: corpus.fs,
                duration_s: corpus.duration_s,
                seed: rng.gen(),
                rate: rng.gen_range(lo..=hi),
                noise: corpus.noise,
            });
        }
    }
    specs
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut r = generate(s)?;
            r.record_id = format!("syn{i:04}-{}", s.class.as_str().to_lowercase());
            Ok(r)
        })
        .collect()
}
