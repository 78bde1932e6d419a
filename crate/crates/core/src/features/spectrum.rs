//! Magnitude spectrum, mel filterbank and the MFCC frame transform.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Floor applied before every logarithm of an energy, so silence maps to a
/// finite constant instead of minus infinity.
pub const LOG_FLOOR: f64 = 1e-10;

pub(crate) fn floored_ln(x: f64) -> f64 {
    x.max(LOG_FLOOR).ln()
}

/// Reusable forward transform producing the one-sided magnitude spectrum.
#[derive(Clone)]
pub struct SpectrumAnalyzer {
    fft: Arc<dyn Fft<f64>>,
    size: usize,
}

impl SpectrumAnalyzer {
    pub fn new(fft_size: usize) -> Result<Self> {
        if !fft_size.is_power_of_two() || fft_size < 2 {
            return Err(Error::Argument(format!(
                "fft size {fft_size} is not a power of two"
            )));
        }
        let fft = FftPlanner::new().plan_fft_forward(fft_size);
        Ok(Self {
            fft,
            size: fft_size,
        })
    }

    pub fn fft_size(&self) -> usize {
        self.size
    }

    /// `|X[k]|` for `k = 0..=fft_size/2`, zero-padding the frame.
    pub fn magnitude(&self, frame: &[f64]) -> Result<Vec<f64>> {
        if frame.len() > self.size {
            return Err(Error::Argument(format!(
                "frame of {} samples exceeds fft size {}",
                frame.len(),
                self.size
            )));
        }
        let mut buf: Vec<Complex<f64>> = frame.iter().map(|&x| Complex::new(x, 0.0)).collect();
        buf.resize(self.size, Complex::new(0.0, 0.0));
        self.fft.process(&mut buf);
        Ok(buf[..=self.size / 2].iter().map(|c| c.norm()).collect())
    }
}

impl std::fmt::Debug for SpectrumAnalyzer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectrumAnalyzer")
            .field("size", &self.size)
            .finish()
    }
}

/// One-sided DFT magnitude of a (windowed) frame zero-padded to `fft_size`.
pub fn dft_magnitude(frame: &[f64], fft_size: usize) -> Result<Vec<f64>> {
    SpectrumAnalyzer::new(fft_size)?.magnitude(frame)
}

/// Mel scale `2595 log10(1 + f / 700)`.
pub fn hz_to_mel(hz: f64) -> Result<f64> {
    if !(hz >= 0.0) {
        return Err(Error::Argument(format!("frequency {hz} Hz is negative")));
    }
    Ok(2595.0 * (1.0 + hz / 700.0).log10())
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular filters equally spaced on the mel scale between 0 Hz and Nyquist.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    num_filters: usize,
    fft_size: usize,
    sample_rate_hz: u32,
    /// `num_filters` rows of `fft_size/2 + 1` weights.
    weights: Vec<Vec<f64>>,
    /// Unsnapped center frequency of each filter.
    centers_hz: Vec<f64>,
    /// Snapped FFT-bin boundaries, `num_filters + 2` of them.
    boundary_bins: Vec<usize>,
}

impl MelFilterbank {
    pub fn num_filters(&self) -> usize {
        self.num_filters
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn centers_hz(&self) -> &[f64] {
        &self.centers_hz
    }

    pub fn boundary_bins(&self) -> &[usize] {
        &self.boundary_bins
    }

    /// Filter outputs `e_m = sum_k w[m][k] * power[k]`.
    pub fn energies(&self, power: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .map(|row| row.iter().zip(power).map(|(w, p)| w * p).sum())
            .collect()
    }
}

pub fn build_mel_filterbank(
    num_filters: usize,
    fft_size: usize,
    sample_rate_hz: u32,
) -> Result<MelFilterbank> {
    if num_filters < 2 {
        return Err(Error::Configuration(format!(
            "need at least 2 mel filters, got {num_filters}"
        )));
    }
    if !fft_size.is_power_of_two() || fft_size < 2 {
        return Err(Error::Configuration(format!(
            "fft size {fft_size} is not a power of two"
        )));
    }
    if sample_rate_hz == 0 {
        return Err(Error::Configuration("sample rate must be positive".into()));
    }
    let nyquist = sample_rate_hz as f64 / 2.0;
    let top_mel = hz_to_mel(nyquist)?;
    let step = top_mel / (num_filters + 1) as f64;
    let points_hz: Vec<f64> = (0..num_filters + 2)
        .map(|i| mel_to_hz(i as f64 * step))
        .collect();
    let half = fft_size / 2;
    let boundary_bins: Vec<usize> = points_hz
        .iter()
        .map(|&f| ((f * fft_size as f64 / sample_rate_hz as f64).round() as usize).min(half))
        .collect();
    if let Some(w) = boundary_bins.windows(2).position(|w| w[0] >= w[1]) {
        return Err(Error::Configuration(format!(
            "{num_filters} mel filters do not fit {fft_size}-point spectra at {sample_rate_hz} Hz \
             (boundaries {} and {} share FFT bin {})",
            w,
            w + 1,
            boundary_bins[w]
        )));
    }

    let weights = (0..num_filters)
        .map(|m| {
            let (lo, mid, hi) = (boundary_bins[m], boundary_bins[m + 1], boundary_bins[m + 2]);
            let mut row = vec![0.0; half + 1];
            for (k, w) in row.iter_mut().enumerate().take(hi + 1).skip(lo) {
                *w = if k <= mid {
                    (k - lo) as f64 / (mid - lo) as f64
                } else {
                    (hi - k) as f64 / (hi - mid) as f64
                };
            }
            row
        })
        .collect();

    Ok(MelFilterbank {
        num_filters,
        fft_size,
        sample_rate_hz,
        weights,
        centers_hz: points_hz[1..=num_filters].to_vec(),
        boundary_bins,
    })
}

/// DCT-II of the floored log filterbank energies, coefficients `c_1..c_num_ceps`.
///
/// `power` is the one-sided power spectrum `|X[k]|^2`.
pub fn mfcc_from_power(power: &[f64], bank: &MelFilterbank, num_ceps: usize) -> Vec<f64> {
    let log_e: Vec<f64> = bank.energies(power).into_iter().map(floored_ln).collect();
    let m = log_e.len() as f64;
    (1..=num_ceps)
        .map(|j| {
            log_e
                .iter()
                .enumerate()
                .map(|(i, &e)| e * (PI * j as f64 * (i as f64 + 0.5) / m).cos())
                .sum()
        })
        .collect()
}

/// MFCC vector of one pre-emphasized, windowed frame.
pub fn mfcc_frame(frame: &[f64], bank: &MelFilterbank, num_ceps: usize) -> Result<Vec<f64>> {
    if num_ceps > bank.num_filters() {
        return Err(Error::Argument(format!(
            "{num_ceps} cepstra requested from {} filters",
            bank.num_filters()
        )));
    }
    let power: Vec<f64> = dft_magnitude(frame, bank.fft_size())?
        .into_iter()
        .map(|m| m * m)
        .collect();
    Ok(mfcc_from_power(&power, bank, num_ceps))
}

/// Per-coefficient central difference `(c[t+1] - c[t-1]) / 2`, replicating the
/// first and last frame at the boundaries.
pub fn delta_features(coeffs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let t = coeffs.len();
    (0..t)
        .map(|i| {
            let next = &coeffs[(i + 1).min(t - 1)];
            let prev = &coeffs[i.saturating_sub(1)];
            next.iter().zip(prev).map(|(a, b)| (a - b) / 2.0).collect()
        })
        .collect()
}
