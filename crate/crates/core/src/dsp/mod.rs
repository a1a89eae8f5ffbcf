//! Linear-phase FIR filtering and rational-ratio resampling.

pub mod fir;
pub mod resample;

pub use fir::{filter_zero_phase, highpass_taps, lowpass_taps, taps_for_transition};
pub use resample::RationalResampler;
