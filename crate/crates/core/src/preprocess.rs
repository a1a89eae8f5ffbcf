//! Record conditioning: 49 Hz low-pass, resampling to 100 Hz, 0.5 Hz
//! high-pass, energy normalization, windowing and class balancing.
//!
//! Per record the order is fixed: [`lowpass49`] → [`resample_to_100`] →
//! [`highpass05`] → [`normalize_energy`] → [`segment`].

use serde::{Deserialize, Serialize};

use crate::dsp::{filter_zero_phase, highpass_taps, lowpass_taps, taps_for_transition, RationalResampler};
use crate::error::{Error, Result};
use crate::ingest::{AnnotatedRecord, Annotation};
use crate::label::RhythmLabel;
use crate::rng;

/// Working sampling rate after resampling.
pub const TARGET_FS: u32 = 100;

/// Low-pass band edges in Hz.
pub const LOWPASS_PASS_HZ: f64 = 40.0;
pub const LOWPASS_STOP_HZ: f64 = 49.0;
/// Baseline-wander high-pass cutoff in Hz.
pub const HIGHPASS_CUTOFF_HZ: f64 = 0.5;
const HIGHPASS_TAPS: usize = 1001;

/// Anti-aliasing filter of the resampler, at the intermediate rate.
const RESAMPLE_CUTOFF_HZ: f64 = 48.0;
const RESAMPLE_TRANSITION_HZ: f64 = 8.0;

/// Window lengths accepted by [`segment`], in seconds.
pub const WINDOW_LENGTHS_S: [f64; 7] = [0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0];

/// A record on the 100 Hz grid. Annotations are remapped to that grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanRecord {
    pub record_id: String,
    pub samples: Vec<f64>,
    pub annotations: Vec<Annotation>,
}

impl CleanRecord {
    pub fn fs(&self) -> u32 {
        TARGET_FS
    }

    /// Re-wraps as an [`AnnotatedRecord`] at 100 Hz, for writing to disk.
    pub fn to_annotated(&self) -> AnnotatedRecord {
        AnnotatedRecord {
            record_id: self.record_id.clone(),
            fs: TARGET_FS,
            samples: self.samples.clone(),
            annotations: self.annotations.clone(),
        }
    }
}

/// A fixed-length window of clean signal carrying one rhythm label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSegment {
    pub samples: Vec<f64>,
    pub label: RhythmLabel,
    pub record_id: String,
    /// Start index on the 100 Hz grid of the source record.
    pub start: usize,
}

fn lowpass_design(fs: u32) -> Result<Vec<f64>> {
    if fs != 250 && fs != 360 {
        return Err(Error::UnsupportedRate(fs));
    }
    let fs = f64::from(fs);
    let n = taps_for_transition(fs, LOWPASS_STOP_HZ - LOWPASS_PASS_HZ);
    Ok(lowpass_taps(n, 0.5 * (LOWPASS_PASS_HZ + LOWPASS_STOP_HZ), fs))
}

/// Taps of the 49 Hz low-pass used at `fs` (250 or 360 Hz).
pub fn lowpass49_taps(fs: u32) -> Result<Vec<f64>> {
    lowpass_design(fs)
}

/// Taps of the 0.5 Hz high-pass used at 100 Hz.
pub fn highpass05_taps() -> Vec<f64> {
    highpass_taps(HIGHPASS_TAPS, HIGHPASS_CUTOFF_HZ, f64::from(TARGET_FS))
}

/// Linear-phase low-pass with passband edge 40 Hz and stopband edge 49 Hz.
pub fn lowpass49(samples: &[f64], fs: u32) -> Result<Vec<f64>> {
    let taps = lowpass_design(fs)?;
    Ok(filter_zero_phase(samples, &taps))
}

/// Linear-phase 0.5 Hz high-pass at 100 Hz; exact zero DC gain.
pub fn highpass05(samples: &[f64], fs: u32) -> Result<Vec<f64>> {
    if fs != TARGET_FS {
        return Err(Error::UnsupportedRate(fs));
    }
    Ok(filter_zero_phase(samples, &highpass05_taps()))
}

/// Rational resampling to 100 Hz: 2/5 from 250 Hz, 5/18 from 360 Hz,
/// identity from 100 Hz. Output length is `ceil(len·100/fs_in)`.
pub fn resample_to_100(samples: &[f64], fs_in: u32) -> Result<Vec<f64>> {
    match fs_in {
        100 => Ok(samples.to_vec()),
        250 | 360 => {
            let r = RationalResampler::new(fs_in, TARGET_FS, RESAMPLE_CUTOFF_HZ, RESAMPLE_TRANSITION_HZ);
            Ok(r.process(samples))
        }
        other => Err(Error::UnsupportedRate(other)),
    }
}

/// Scales the whole record uniformly so that Σx² equals the sample count.
pub fn normalize_energy(mut record: CleanRecord) -> Result<CleanRecord> {
    let energy: f64 = record.samples.iter().map(|v| v * v).sum();
    if energy == 0.0 {
        return Err(Error::InvalidRecord(format!(
            "record {} is all zeros and cannot be normalized",
            record.record_id
        )));
    }
    let scale = (record.samples.len() as f64 / energy).sqrt();
    record.samples.iter_mut().for_each(|v| *v *= scale);
    Ok(record)
}

/// Maps annotations from `fs` to the 100 Hz grid, shrinking each interval
/// to whole output samples that lie inside the original span.
fn remap_annotations(annotations: &[Annotation], fs: u32, len: usize) -> Vec<Annotation> {
    let fs = fs as usize;
    let t = TARGET_FS as usize;
    annotations
        .iter()
        .filter_map(|a| {
            let start = (a.start * t).div_ceil(fs);
            let end = (a.end * t / fs).min(len);
            (start < end).then_some(Annotation {
                start,
                end,
                label: a.label,
            })
        })
        .collect()
}

/// Runs filtering, resampling and normalization on one record.
pub fn clean_record(record: &AnnotatedRecord) -> Result<CleanRecord> {
    record.validate()?;
    let filtered = match record.fs {
        TARGET_FS => record.samples.clone(),
        fs => lowpass49(&record.samples, fs)?,
    };
    let resampled = resample_to_100(&filtered, record.fs)?;
    let detrended = highpass05(&resampled, TARGET_FS)?;
    let annotations = remap_annotations(&record.annotations, record.fs, detrended.len());
    normalize_energy(CleanRecord {
        record_id: record.record_id.clone(),
        samples: detrended,
        annotations,
    })
}

/// Number of 100 Hz samples in a window of `window_s` seconds.
pub fn window_samples(window_s: f64) -> Result<usize> {
    if !WINDOW_LENGTHS_S.contains(&window_s) {
        return Err(Error::InvalidArgument(format!(
            "window length {window_s} s not in {WINDOW_LENGTHS_S:?}"
        )));
    }
    Ok((window_s * f64::from(TARGET_FS)).round() as usize)
}

/// Cuts non-overlapping windows inside each annotation interval. Tails that
/// do not fill a window are dropped.
pub fn segment(record: &CleanRecord, window_s: f64) -> Result<Vec<LabeledSegment>> {
    Ok(segment_samples(record, window_samples(window_s)?))
}

/// [`segment`] with the window given in samples and no restriction on its
/// length.
pub fn segment_samples(record: &CleanRecord, len: usize) -> Vec<LabeledSegment> {
    if len == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for a in &record.annotations {
        let count = a.len() / len;
        for w in 0..count {
            let start = a.start + w * len;
            out.push(LabeledSegment {
                samples: record.samples[start..start + len].to_vec(),
                label: a.label,
                record_id: record.record_id.clone(),
                start,
            });
        }
    }
    out
}

/// Sub-samples every class to the smallest class count, then shuffles.
///
/// Per class (in SR, VT, VF order) a uniform subset without replacement is
/// drawn, then the concatenation is shuffled; both use one ChaCha8 stream
/// seeded with `seed`.
pub fn balance_classes(segments: Vec<LabeledSegment>, seed: u64) -> Result<Vec<LabeledSegment>> {
    balance_among(segments, &RhythmLabel::ALL, seed)
}

/// [`balance_classes`] restricted to `classes`; other labels are dropped.
pub fn balance_among(
    segments: Vec<LabeledSegment>,
    classes: &[RhythmLabel],
    seed: u64,
) -> Result<Vec<LabeledSegment>> {
    let mut by_class: [Vec<LabeledSegment>; 3] = Default::default();
    for s in segments {
        by_class[s.label.index()].push(s);
    }
    for &label in classes {
        if by_class[label.index()].is_empty() {
            return Err(Error::MissingClass(label));
        }
    }
    let min = classes.iter().map(|l| by_class[l.index()].len()).min().unwrap_or(0);

    let mut rng = rng::seeded(seed);
    let mut out = Vec::with_capacity(classes.len() * min);
    for label in RhythmLabel::ALL.iter().filter(|l| classes.contains(l)) {
        out.extend(rng::sample_without_replacement(&by_class[label.index()], min, &mut rng));
    }
    rng::shuffle(&mut out, &mut rng);
    Ok(out)
}

/// Cleans and segments many records, then balances the pooled segments.
pub fn build_segments(
    records: &[AnnotatedRecord],
    window_s: f64,
    seed: u64,
) -> Result<Vec<LabeledSegment>> {
    use rayon::prelude::*;
    let per_record: Vec<Vec<LabeledSegment>> = records
        .par_iter()
        .map(|r| clean_record(r).and_then(|c| segment(&c, window_s)))
        .collect::<Result<_>>()?;
    balance_classes(per_record.into_iter().flatten().collect(), seed)
}
