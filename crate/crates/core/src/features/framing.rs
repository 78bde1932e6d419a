//! Pre-emphasis, framing, windowing and frame energy.

use std::f64::consts::PI;

use super::config::FrameConfig;
use crate::error::{Error, Result};

/// First-order high-pass `y[n] = x[n] - alpha * x[n-1]`, with `y[0] = x[0]`.
pub fn pre_emphasize(signal: &[f64], alpha: f64) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Argument(format!(
            "pre-emphasis coefficient {alpha} outside [0, 1)"
        )));
    }
    let mut out = Vec::with_capacity(signal.len());
    let mut prev = None;
    for &x in signal {
        out.push(match prev {
            Some(p) => x - alpha * p,
            None => x,
        });
        prev = Some(x);
    }
    Ok(out)
}

/// Number of frames [`frame_signal`] emits for a signal of `len` samples.
pub fn frame_count(len: usize, frame_len: usize, hop: usize) -> usize {
    if len < frame_len {
        1
    } else {
        (len - frame_len) / hop + 1
    }
}

/// Splits a signal into frames starting at multiples of `hop`.
///
/// Only frames that fit entirely are emitted, except that a signal shorter than
/// one frame yields a single zero-padded frame.
pub fn frame_signal(signal: &[f64], config: &FrameConfig) -> Result<Vec<Vec<f64>>> {
    if signal.is_empty() {
        return Err(Error::Argument("cannot frame an empty signal".into()));
    }
    let (len, hop) = (config.frame_len, config.hop);
    if len == 0 || hop == 0 {
        return Err(Error::Argument(
            "frame length and hop must be positive".into(),
        ));
    }
    if signal.len() < len {
        let mut frame = signal.to_vec();
        frame.resize(len, 0.0);
        return Ok(vec![frame]);
    }
    Ok((0..frame_count(signal.len(), len, hop))
        .map(|i| signal[i * hop..i * hop + len].to_vec())
        .collect())
}

/// Hamming window weights `0.54 - 0.46 cos(2 pi n / (N - 1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowVector {
    weights: Vec<f64>,
}

impl WindowVector {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Pointwise product with a frame of the same length.
    pub fn apply(&self, frame: &[f64]) -> Vec<f64> {
        debug_assert_eq!(frame.len(), self.weights.len());
        frame
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| x * w)
            .collect()
    }
}

pub fn hamming_window(n: usize) -> Result<WindowVector> {
    if n < 2 {
        return Err(Error::Argument(format!("window length {n} < 2")));
    }
    let denom = (n - 1) as f64;
    let weights = (0..n)
        .map(|i| 0.54 - 0.46 * (2.0 * PI * i as f64 / denom).cos())
        .collect();
    Ok(WindowVector { weights })
}

/// Sum of squared samples.
pub fn frame_energy(frame: &[f64]) -> f64 {
    frame.iter().map(|x| x * x).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(frame_len: usize, hop: usize) -> FrameConfig {
        FrameConfig {
            frame_len,
            hop,
            ..Default::default()
        }
    }

    #[test]
    fn pre_emphasis_cases() {
        let x = [0.3, -0.2, 0.9];
        assert_eq!(pre_emphasize(&x, 0.0).unwrap(), x.to_vec());
        let y = pre_emphasize(&[1.0, 1.0, 1.0], 0.97).unwrap();
        for (a, b) in y.iter().zip([1.0, 0.03, 0.03]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(
            pre_emphasize(&[1.0, 0.0, 0.0], 0.97).unwrap(),
            vec![1.0, -0.97, 0.0]
        );
        assert!(pre_emphasize(&x, 1.0).is_err());
        assert!(pre_emphasize(&x, -0.1).is_err());
        assert!(pre_emphasize(&[], 0.5).unwrap().is_empty());
    }

    #[test]
    fn framing_cases() {
        let s: Vec<f64> = (0..360).map(|i| i as f64).collect();
        assert_eq!(frame_signal(&s[..200], &cfg(200, 80)).unwrap().len(), 1);
        let frames = frame_signal(&s, &cfg(200, 80)).unwrap();
        assert_eq!(frames.len(), 3);
        assert_eq!(
            frames.iter().map(|f| f[0]).collect::<Vec<_>>(),
            vec![0.0, 80.0, 160.0]
        );
        assert!(frames.iter().all(|f| f.len() == 200));

        let short = vec![1.0; 50];
        let frames = frame_signal(&short, &cfg(200, 80)).unwrap();
        assert_eq!(frames.len(), 1);
        assert!(frames[0][..50].iter().all(|&v| v == 1.0));
        assert!(frames[0][50..].iter().all(|&v| v == 0.0));

        assert!(frame_signal(&[], &cfg(200, 80)).is_err());
    }

    #[test]
    fn frame_count_formula() {
        for len in 200..1000 {
            let s = vec![0.0; len];
            let n = frame_signal(&s, &cfg(200, 80)).unwrap().len();
            assert_eq!(n, (len - 200) / 80 + 1);
            assert_eq!(n, frame_count(len, 200, 80));
        }
    }

    #[test]
    fn hamming_shape() {
        for n in [2usize, 3, 64, 199, 200, 201, 256] {
            let w = hamming_window(n).unwrap();
            let w = w.weights();
            assert!((w[0] - 0.08).abs() < 1e-12);
            assert!((w[n - 1] - 0.08).abs() < 1e-12);
            for i in 0..n {
                assert!((w[i] - w[n - 1 - i]).abs() < 1e-12);
            }
            if n % 2 == 1 {
                assert!((w[(n - 1) / 2] - 1.0).abs() < 1e-12);
                assert!(w.iter().all(|&v| v <= 1.0 + 1e-12));
            }
        }
        assert!(hamming_window(1).is_err());
    }

    #[test]
    fn hamming_matches_formula_pointwise() {
        for n in [64usize, 200, 256] {
            let w = hamming_window(n).unwrap();
            for (i, &v) in w.weights().iter().enumerate() {
                let expected = 0.54 - 0.46 * (2.0 * PI * i as f64 / (n as f64 - 1.0)).cos();
                assert!((v - expected).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn energy_cases() {
        assert_eq!(frame_energy(&[0.0; 8]), 0.0);
        assert_eq!(frame_energy(&[1.0, -1.0, 1.0]), 3.0);
        let f = [0.1, -0.7, 0.25];
        let scaled: Vec<f64> = f.iter().map(|x| x * 3.0).collect();
        assert!((frame_energy(&scaled) - 9.0 * frame_energy(&f)).abs() < 1e-12);
    }
}
