//! Audio input and pre-processing.
//!
//! Songs enter the engine as PCM WAV files. Stereo mixes first go through
//! center extraction (the lead vocal is usually panned to the middle), are then
//! downmixed to mono and finally resampled to the 8 kHz working rate.

mod resample;
mod separation;
mod wav;

pub use resample::{resample, resampling_filter};
pub use separation::{extract_center_vocal, SEPARATION_FRAME, SEPARATION_HOP};
pub use wav::{read_wav, read_wav_bytes, wav_bytes_f32, write_wav_f32, write_wav_i16};

use crate::error::{Error, Result};

/// Working sample rate of every feature extractor.
pub const WORKING_RATE_HZ: u32 = 8000;

/// PCM audio held as one sample array per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    channels: Vec<Vec<f32>>,
    sample_rate_hz: u32,
}

impl AudioClip {
    /// Builds a clip, checking the channel-count, length and finiteness invariants.
    pub fn new(channels: Vec<Vec<f32>>, sample_rate_hz: u32) -> Result<Self> {
        if channels.is_empty() || channels.len() > 2 {
            return Err(Error::Argument(format!(
                "a clip needs 1 or 2 channels, got {}",
                channels.len()
            )));
        }
        if sample_rate_hz == 0 {
            return Err(Error::Argument("sample rate must be positive".into()));
        }
        let len = channels[0].len();
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::Argument("channels have different lengths".into()));
        }
        if channels.iter().flatten().any(|s| !s.is_finite()) {
            return Err(Error::Argument("clip contains non-finite samples".into()));
        }
        Ok(Self {
            channels,
            sample_rate_hz,
        })
    }

    pub fn mono(samples: Vec<f32>, sample_rate_hz: u32) -> Result<Self> {
        Self::new(vec![samples], sample_rate_hz)
    }

    pub fn stereo(left: Vec<f32>, right: Vec<f32>, sample_rate_hz: u32) -> Result<Self> {
        Self::new(vec![left, right], sample_rate_hz)
    }

    pub fn channels(&self) -> &[Vec<f32>] {
        &self.channels
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    /// Number of samples per channel.
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration_secs(&self) -> f64 {
        self.len() as f64 / self.sample_rate_hz as f64
    }

    /// Samples of the first channel; for mono clips, the whole signal.
    pub fn samples(&self) -> &[f32] {
        &self.channels[0]
    }

    pub fn into_channels(self) -> Vec<Vec<f32>> {
        self.channels
    }
}

/// Averages the two channels of a stereo clip; mono clips come back unchanged.
pub fn downmix_to_mono(clip: &AudioClip) -> AudioClip {
    match clip.channels.as_slice() {
        [left, right] => {
            let mixed = left
                .iter()
                .zip(right)
                .map(|(&l, &r)| ((l as f64 + r as f64) / 2.0) as f32)
                .collect();
            AudioClip {
                channels: vec![mixed],
                sample_rate_hz: clip.sample_rate_hz,
            }
        }
        _ => clip.clone(),
    }
}

/// Full pre-processing chain used by ingestion and querying: center extraction
/// for stereo input, downmix, then resampling to [`WORKING_RATE_HZ`].
///
/// Each stage is skipped when it would be a no-op (mono input, input already at
/// the working rate).
pub fn preprocess(clip: &AudioClip) -> Result<AudioClip> {
    let mono = if clip.channel_count() == 2 {
        extract_center_vocal(clip)?
    } else {
        clip.clone()
    };
    let mono = downmix_to_mono(&mono);
    if mono.sample_rate_hz() == WORKING_RATE_HZ {
        Ok(mono)
    } else {
        resample(&mono, WORKING_RATE_HZ)
    }
}
