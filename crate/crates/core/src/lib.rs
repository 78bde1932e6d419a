//! Query-by-singing/humming retrieval engine.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`audio_io`] reads PCM WAV audio, isolates the center-panned lead vocal of
//!    stereo mixes, downmixes to mono and resamples to 8 kHz.
//! 2. [`features`] turns the clip into frame-level MFCC, LPC or LPCC sequences.
//! 3. [`similarity`] compares sequences with a time-normalized Euclidean distance,
//!    k-nearest-neighbour voting, or dynamic time warping, and ranks a corpus.
//! 4. [`eval`] excerpts queries, sweeps a retrieval grid and reports Top-X,
//!    mean-of-accuracy and mean reciprocal rank.
//!
//! [`corpus`] glues the first two stages into song ingestion and persists the
//! resulting feature store on disk.

pub mod audio_io;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod similarity;

pub use audio_io::AudioClip;
pub use corpus::{FeatureStore, SongRecord};
pub use error::{Error, Result};
pub use eval::{EvalReport, RankSample};
pub use features::{FeatureConfig, FeatureKind, FeatureSequence, FrameConfig};
pub use similarity::{DistanceMeasure, MeasureKind, RankedList};
