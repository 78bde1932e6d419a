//! Frame-level feature sequences and the extraction pipeline.

use std::collections::BTreeMap;

use super::config::{FeatureConfig, FeatureKind};
use super::framing::{frame_energy, frame_signal, hamming_window, pre_emphasize, WindowVector};
use super::lpc::{autocorrelation, levinson_durbin, lpcc, LpcResult};
use super::spectrum::{
    build_mel_filterbank, delta_features, floored_ln, mfcc_from_power, MelFilterbank,
    SpectrumAnalyzer,
};
use crate::audio_io::AudioClip;
use crate::error::{Error, Result};

/// A `frames x dim` matrix of per-frame feature vectors, stored row-major as
/// `f32` (the on-disk precision, so persisted sequences reload bit-exactly).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSequence {
    kind: FeatureKind,
    frames: usize,
    dim: usize,
    data: Vec<f32>,
    config: FeatureConfig,
}

impl FeatureSequence {
    pub fn new(
        kind: FeatureKind,
        dim: usize,
        data: Vec<f32>,
        config: FeatureConfig,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Argument("feature dimension must be positive".into()));
        }
        if data.is_empty() || !data.len().is_multiple_of(dim) {
            return Err(Error::Argument(format!(
                "{} values do not form whole frames of dimension {dim}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument(
                "feature matrix contains non-finite values".into(),
            ));
        }
        Ok(Self {
            kind,
            frames: data.len() / dim,
            dim,
            data,
            config,
        })
    }

    pub fn from_rows(kind: FeatureKind, rows: &[Vec<f64>], config: FeatureConfig) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Argument("rows have different dimensions".into()));
        }
        let data = rows.iter().flatten().map(|&v| v as f32).collect();
        Self::new(kind, dim, data, config)
    }

    pub fn kind(&self) -> FeatureKind {
        self.kind
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.config
    }

    /// Row-major values.
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn row(&self, t: usize) -> &[f32] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f32]> {
        self.data.chunks_exact(self.dim)
    }

    /// Contiguous block of `len` frames starting at `start`.
    pub fn slice_frames(&self, start: usize, len: usize) -> Result<Self> {
        if len == 0 || start + len > self.frames {
            return Err(Error::Argument(format!(
                "frames {start}..{} out of range for a {}-frame sequence",
                start + len,
                self.frames
            )));
        }
        Ok(Self {
            data: self.data[start * self.dim..(start + len) * self.dim].to_vec(),
            frames: len,
            ..self.clone()
        })
    }
}

/// Precomputed window, transform and filterbank for one configuration.
#[derive(Debug, Clone)]
pub struct FeatureExtractor {
    config: FeatureConfig,
    window: WindowVector,
    analyzer: SpectrumAnalyzer,
    bank: MelFilterbank,
}

impl FeatureExtractor {
    pub fn new(config: FeatureConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            window: hamming_window(config.frame.frame_len)?,
            analyzer: SpectrumAnalyzer::new(config.fft_size)?,
            bank: build_mel_filterbank(
                config.num_filters,
                config.fft_size,
                config.frame.sample_rate_hz,
            )?,
            config,
        })
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.config
    }

    pub fn filterbank(&self) -> &MelFilterbank {
        &self.bank
    }

    pub fn extract(&self, clip: &AudioClip, kind: FeatureKind) -> Result<FeatureSequence> {
        let mut all = self.extract_kinds(clip, &[kind])?;
        Ok(all.remove(&kind).expect("requested kind is extracted"))
    }

    pub fn extract_all(&self, clip: &AudioClip) -> Result<BTreeMap<FeatureKind, FeatureSequence>> {
        self.extract_kinds(clip, &FeatureKind::ALL)
    }

    fn windowed_frames(&self, clip: &AudioClip) -> Result<Vec<Vec<f64>>> {
        if clip.channel_count() != 1 {
            return Err(Error::Argument(
                "feature extraction expects a mono clip; downmix first".into(),
            ));
        }
        let expected = self.config.frame.sample_rate_hz;
        if clip.sample_rate_hz() != expected {
            return Err(Error::Configuration(format!(
                "clip is at {} Hz but features are configured for {expected} Hz; resample first",
                clip.sample_rate_hz()
            )));
        }
        if clip.is_empty() {
            return Err(Error::Argument(
                "cannot extract features from an empty clip".into(),
            ));
        }
        let signal: Vec<f64> = clip.samples().iter().map(|&s| s as f64).collect();
        let emphasized = pre_emphasize(&signal, self.config.frame.pre_emphasis_alpha)?;
        Ok(frame_signal(&emphasized, &self.config.frame)?
            .iter()
            .map(|f| self.window.apply(f))
            .collect())
    }

    fn extract_kinds(
        &self,
        clip: &AudioClip,
        kinds: &[FeatureKind],
    ) -> Result<BTreeMap<FeatureKind, FeatureSequence>> {
        let frames = self.windowed_frames(clip)?;
        let mut out = BTreeMap::new();
        for &kind in kinds {
            let rows = match kind {
                FeatureKind::Mfcc => self.mfcc_rows(&frames)?,
                FeatureKind::Lpc | FeatureKind::Lpcc => {
                    let models = frames
                        .iter()
                        .map(|f| self.lpc_model(f))
                        .collect::<Result<Vec<_>>>()?;
                    if kind == FeatureKind::Lpc {
                        models
                            .iter()
                            .map(|m| m.coefficients[..self.config.lpc_dim].to_vec())
                            .collect()
                    } else {
                        models
                            .iter()
                            .map(|m| {
                                lpcc(m, self.config.lpcc_count)[1..=self.config.lpcc_dim].to_vec()
                            })
                            .collect()
                    }
                }
            };
            out.insert(kind, FeatureSequence::from_rows(kind, &rows, self.config)?);
        }
        Ok(out)
    }

    fn mfcc_rows(&self, frames: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let mut rows = Vec::with_capacity(frames.len());
        for frame in frames {
            let power: Vec<f64> = self
                .analyzer
                .magnitude(frame)?
                .into_iter()
                .map(|m| m * m)
                .collect();
            let mut row = mfcc_from_power(&power, &self.bank, self.config.num_ceps);
            if self.config.mfcc_extended {
                row.push(floored_ln(frame_energy(frame)));
            }
            rows.push(row);
        }
        if self.config.mfcc_extended {
            let delta = delta_features(&rows);
            let double = delta_features(&delta);
            for ((row, d), dd) in rows.iter_mut().zip(delta).zip(double) {
                row.extend(d);
                row.extend(dd);
            }
        }
        Ok(rows)
    }

    /// LPC model of one windowed frame. Frames whose normal equations turn
    /// numerically singular keep the model of the highest order solved,
    /// padded with zero coefficients.
    fn lpc_model(&self, frame: &[f64]) -> Result<LpcResult> {
        let order = self.config.lpc_order;
        let r = autocorrelation(frame, order)?;
        if r[0] == 0.0 {
            return Ok(LpcResult {
                coefficients: vec![0.0; order],
                gain: 0.0,
                order,
                degenerate: true,
            });
        }
        let sol = levinson_durbin(&r, order);
        Ok(LpcResult {
            coefficients: sol.coefficients,
            gain: sol.error,
            order,
            degenerate: false,
        })
    }
}

/// Extracts one feature kind from a mono clip at the configured sample rate.
pub fn extract_features(
    clip: &AudioClip,
    kind: FeatureKind,
    config: &FeatureConfig,
) -> Result<FeatureSequence> {
    FeatureExtractor::new(*config)?.extract(clip, kind)
}
