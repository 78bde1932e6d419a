//! Frame-level acoustic features: MFCC, LPC and LPCC.
//!
//! Every kind shares the same front end: pre-emphasis over the whole signal,
//! framing, and a Hamming window per frame. MFCC then goes through the
//! magnitude spectrum, mel filterbank, log and DCT; LPC solves the
//! autocorrelation normal equations; LPCC converts the LPC model to cepstra.

mod config;
mod framing;
mod lpc;
mod sequence;
mod spectrum;

pub use config::{FeatureConfig, FeatureKind, FrameConfig};
pub use framing::{
    frame_count, frame_energy, frame_signal, hamming_window, pre_emphasize, WindowVector,
};
pub use lpc::{autocorrelation, lpc, lpcc, LpcResult};
pub use sequence::{extract_features, FeatureExtractor, FeatureSequence};
pub use spectrum::{
    build_mel_filterbank, delta_features, dft_magnitude, hz_to_mel, mel_to_hz, mfcc_frame,
    mfcc_from_power, MelFilterbank, SpectrumAnalyzer, LOG_FLOOR,
};
