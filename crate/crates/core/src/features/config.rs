use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which acoustic representation a [`FeatureSequence`](super::FeatureSequence) holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FeatureKind {
    #[serde(rename = "MFCC")]
    Mfcc,
    #[serde(rename = "LPC")]
    Lpc,
    #[serde(rename = "LPCC")]
    Lpcc,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 3] = [FeatureKind::Mfcc, FeatureKind::Lpc, FeatureKind::Lpcc];

    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Mfcc => "MFCC",
            FeatureKind::Lpc => "LPC",
            FeatureKind::Lpcc => "LPCC",
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "MFCC" => Ok(FeatureKind::Mfcc),
            "LPC" => Ok(FeatureKind::Lpc),
            "LPCC" => Ok(FeatureKind::Lpcc),
            _ => Err(Error::Argument(format!(
                "unknown feature kind '{s}' (valid: MFCC, LPC, LPCC)"
            ))),
        }
    }
}

/// Framing parameters shared by every feature kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameConfig {
    /// Samples per frame (default 200, 25 ms at 8 kHz).
    pub frame_len: usize,
    /// Samples between successive frame starts (default 80, 10 ms).
    pub hop: usize,
    pub pre_emphasis_alpha: f64,
    pub sample_rate_hz: u32,
}

impl Default for FrameConfig {
    fn default() -> Self {
        Self {
            frame_len: 200,
            hop: 80,
            pre_emphasis_alpha: 0.97,
            sample_rate_hz: 8000,
        }
    }
}

impl FrameConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sample_rate_hz == 0 {
            return Err(Error::Configuration("sample rate must be positive".into()));
        }
        if self.hop == 0 || self.hop > self.frame_len {
            return Err(Error::Configuration(format!(
                "hop must satisfy 0 < hop <= frame_len (hop {}, frame_len {})",
                self.hop, self.frame_len
            )));
        }
        let ms = self.frame_len as f64 * 1000.0 / self.sample_rate_hz as f64;
        if !(10.0..=30.0).contains(&ms) {
            return Err(Error::Configuration(format!(
                "frame of {} samples is {ms:.2} ms at {} Hz; frames must span 10 to 30 ms",
                self.frame_len, self.sample_rate_hz
            )));
        }
        if !(0.0..1.0).contains(&self.pre_emphasis_alpha) {
            return Err(Error::Configuration(format!(
                "pre-emphasis coefficient {} outside [0, 1)",
                self.pre_emphasis_alpha
            )));
        }
        Ok(())
    }
}

/// Complete extraction configuration. Stored in the feature store manifest so
/// queries are always processed like the songs they are matched against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub frame: FrameConfig,
    pub fft_size: usize,
    pub num_filters: usize,
    /// MFCC cepstra kept per frame (c_1..c_n; c_0 is never part of the vector).
    pub num_ceps: usize,
    /// Append log energy, deltas and double deltas (12 -> 39 dims by default).
    pub mfcc_extended: bool,
    pub lpc_order: usize,
    /// Leading predictor coefficients kept for retrieval.
    pub lpc_dim: usize,
    /// Number of cepstra computed by the LPC-to-cepstrum recursion.
    pub lpcc_count: usize,
    /// Leading cepstra (from c_1) kept for retrieval.
    pub lpcc_dim: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            frame: FrameConfig::default(),
            fft_size: 256,
            num_filters: 26,
            num_ceps: 12,
            mfcc_extended: false,
            lpc_order: 14,
            lpc_dim: 12,
            lpcc_count: 21,
            lpcc_dim: 12,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        self.frame.validate()?;
        if !self.fft_size.is_power_of_two() || self.fft_size < self.frame.frame_len {
            return Err(Error::Configuration(format!(
                "fft size {} must be a power of two no smaller than the frame ({})",
                self.fft_size, self.frame.frame_len
            )));
        }
        if self.num_filters < 2 {
            return Err(Error::Configuration("need at least 2 mel filters".into()));
        }
        if self.num_ceps == 0 || self.num_ceps > self.num_filters {
            return Err(Error::Configuration(format!(
                "cepstra count {} must be in 1..={}",
                self.num_ceps, self.num_filters
            )));
        }
        if self.lpc_order == 0 || self.lpc_order >= self.frame.frame_len {
            return Err(Error::Configuration(format!(
                "LPC order {} must be in 1..{}",
                self.lpc_order, self.frame.frame_len
            )));
        }
        if self.lpc_dim == 0 || self.lpc_dim > self.lpc_order {
            return Err(Error::Configuration(format!(
                "LPC retrieval dimension {} must be in 1..={}",
                self.lpc_dim, self.lpc_order
            )));
        }
        if self.lpcc_dim == 0 || self.lpcc_dim > self.lpcc_count {
            return Err(Error::Configuration(format!(
                "LPCC retrieval dimension {} must be in 1..={}",
                self.lpcc_dim, self.lpcc_count
            )));
        }
        Ok(())
    }

    /// Vector dimension produced for `kind`.
    pub fn dim(&self, kind: FeatureKind) -> usize {
        match kind {
            FeatureKind::Mfcc if self.mfcc_extended => 3 * (self.num_ceps + 1),
            FeatureKind::Mfcc => self.num_ceps,
            FeatureKind::Lpc => self.lpc_dim,
            FeatureKind::Lpcc => self.lpcc_dim,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        FeatureConfig::default().validate().unwrap();
        assert_eq!(FeatureConfig::default().dim(FeatureKind::Mfcc), 12);
        let ext = FeatureConfig {
            mfcc_extended: true,
            ..Default::default()
        };
        assert_eq!(ext.dim(FeatureKind::Mfcc), 39);
    }

    #[test]
    fn frame_duration_window() {
        let mut c = FrameConfig::default();
        c.frame_len = 79; // 9.875 ms
        assert!(c.validate().is_err());
        c.frame_len = 80;
        c.hop = 80;
        c.validate().unwrap();
        c.frame_len = 240;
        c.validate().unwrap();
        c.frame_len = 241;
        assert!(c.validate().is_err());
    }

    #[test]
    fn hop_bounds() {
        let mut c = FrameConfig::default();
        c.hop = 0;
        assert!(c.validate().is_err());
        c.hop = 201;
        assert!(c.validate().is_err());
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("lpcc".parse::<FeatureKind>().unwrap(), FeatureKind::Lpcc);
        assert!("chroma".parse::<FeatureKind>().is_err());
    }
}
