//! Center-channel (lead vocal) extraction from stereo mixes.
//!
//! Works per STFT bin on the mid signal `M = (L+R)/2` and side signal
//! `S = (L-R)/2`: the side magnitude is subtracted from the mid magnitude and
//! the mid phase kept, `V = max(|M| - |S|, 0) * M/|M|`. Content panned hard to
//! one side or out of phase between channels shows up in `S` and is removed.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::AudioClip;
use crate::error::{Error, Result};

pub const SEPARATION_FRAME: usize = 1024;
pub const SEPARATION_HOP: usize = 256;

/// Estimates the center-panned content of a stereo clip as a mono clip of the
/// same length and rate.
pub fn extract_center_vocal(clip: &AudioClip) -> Result<AudioClip> {
    let [left, right] = clip.channels() else {
        return Err(Error::Argument(
            "center extraction needs a stereo clip; mono input should skip separation".into(),
        ));
    };
    let n = SEPARATION_FRAME;
    let hop = SEPARATION_HOP;
    let len = left.len();
    if len == 0 {
        return AudioClip::mono(Vec::new(), clip.sample_rate_hz());
    }

    // Pad so every input sample is covered by n/hop frames.
    let lead = n - hop;
    let padded_len = lead + len + n;
    let frames = (padded_len - n) / hop + 1;
    let at = |ch: &[f32], i: usize| -> f64 {
        i.checked_sub(lead)
            .and_then(|k| ch.get(k))
            .map_or(0.0, |&v| v as f64)
    };

    // periodic Hann
    let window: Vec<f64> = (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect();

    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);

    let mut out = vec![0.0f64; padded_len];
    let mut norm = vec![0.0f64; padded_len];
    let mut mid = vec![Complex::new(0.0, 0.0); n];
    let mut side = vec![Complex::new(0.0, 0.0); n];

    for f in 0..frames {
        let start = f * hop;
        for i in 0..n {
            let l = at(left, start + i);
            let r = at(right, start + i);
            mid[i] = Complex::new(window[i] * (l + r) / 2.0, 0.0);
            side[i] = Complex::new(window[i] * (l - r) / 2.0, 0.0);
        }
        forward.process(&mut mid);
        forward.process(&mut side);
        for (m, s) in mid.iter_mut().zip(&side) {
            let mag = m.norm();
            let kept = (mag - s.norm()).max(0.0);
            *m = if mag > 0.0 {
                *m * (kept / mag)
            } else {
                Complex::new(0.0, 0.0)
            };
        }
        inverse.process(&mut mid);
        for i in 0..n {
            out[start + i] += mid[i].re / n as f64;
            norm[start + i] += window[i];
        }
    }

    let samples = (0..len)
        .map(|k| {
            let w = norm[lead + k];
            if w > 1e-8 {
                (out[lead + k] / w) as f32
            } else {
                0.0
            }
        })
        .collect();
    AudioClip::mono(samples, clip.sample_rate_hz())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(freq: f64, amp: f64, rate: u32, len: usize) -> Vec<f32> {
        (0..len)
            .map(|i| (amp * (2.0 * PI * freq * i as f64 / rate as f64).sin()) as f32)
            .collect()
    }

    fn rms(x: &[f32]) -> f64 {
        (x.iter().map(|&v| (v as f64).powi(2)).sum::<f64>() / x.len() as f64).sqrt()
    }

    /// Amplitude of a tone at `freq`, by correlation against quadrature references.
    fn tone_amplitude(x: &[f32], freq: f64, rate: u32) -> f64 {
        let (mut c, mut s) = (0.0, 0.0);
        for (i, &v) in x.iter().enumerate() {
            let ph = 2.0 * PI * freq * i as f64 / rate as f64;
            c += v as f64 * ph.cos();
            s += v as f64 * ph.sin();
        }
        2.0 * (c * c + s * s).sqrt() / x.len() as f64
    }

    #[test]
    fn mono_input_is_rejected() {
        let clip = AudioClip::mono(vec![0.0; 10], 8000).unwrap();
        assert!(matches!(
            extract_center_vocal(&clip),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn silence_stays_silent() {
        let clip = AudioClip::stereo(vec![0.0; 3000], vec![0.0; 3000], 8000).unwrap();
        let out = extract_center_vocal(&clip).unwrap();
        assert_eq!(out.len(), 3000);
        assert!(out.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pure_center_is_preserved() {
        let v: Vec<f32> = sine(440.0, 0.5, 8000, 8000)
            .iter()
            .zip(sine(1250.0, 0.2, 8000, 8000))
            .map(|(a, b)| a + b)
            .collect();
        let clip = AudioClip::stereo(v.clone(), v.clone(), 8000).unwrap();
        let out = extract_center_vocal(&clip).unwrap();
        assert_eq!(out.len(), v.len());
        let err: Vec<f32> = out.samples().iter().zip(&v).map(|(a, b)| a - b).collect();
        let edge = SEPARATION_FRAME;
        let rel = rms(&err[edge..v.len() - edge]) / rms(&v[edge..v.len() - edge]);
        assert!(rel <= 0.05, "relative error {rel}");
    }

    #[test]
    fn anti_phase_content_is_removed() {
        let s = sine(700.0, 0.5, 8000, 8000);
        let neg: Vec<f32> = s.iter().map(|x| -x).collect();
        let clip = AudioClip::stereo(s.clone(), neg, 8000).unwrap();
        let out = extract_center_vocal(&clip).unwrap();
        assert!(rms(out.samples()) <= 0.01 * rms(&s));
    }

    #[test]
    fn separates_center_from_side_tones() {
        let rate = 8000;
        let len = 16000;
        let v = sine(500.0, 0.4, rate, len);
        let s = sine(1800.0, 0.4, rate, len);
        let left: Vec<f32> = v.iter().zip(&s).map(|(a, b)| a + b).collect();
        let right: Vec<f32> = v.iter().zip(&s).map(|(a, b)| a - b).collect();
        let clip = AudioClip::stereo(left, right, rate).unwrap();
        let out = extract_center_vocal(&clip).unwrap();
        let interior = &out.samples()[SEPARATION_FRAME..len - SEPARATION_FRAME];
        let v_in = tone_amplitude(&v[SEPARATION_FRAME..len - SEPARATION_FRAME], 500.0, rate);
        let v_out = tone_amplitude(interior, 500.0, rate);
        let s_out = tone_amplitude(interior, 1800.0, rate);
        let v_db = 20.0 * (v_out / v_in).log10();
        assert!(v_db.abs() <= 1.0, "center tone moved by {v_db} dB");
        assert!(s_out <= 0.1 * 0.4, "side tone left at amplitude {s_out}");
    }
}
