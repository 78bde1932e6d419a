use std::f64::consts::PI;

use proptest::prelude::*;
use qbsh_core::audio_io::{
    downmix_to_mono, preprocess, read_wav, resample, write_wav_f32, write_wav_i16, WORKING_RATE_HZ,
};
use qbsh_core::AudioClip;

fn tone(freq: f64, rate: u32, secs: f64, amp: f64) -> Vec<f32> {
    let n = (rate as f64 * secs).round() as usize;
    (0..n)
        .map(|i| (amp * (2.0 * PI * freq * i as f64 / rate as f64).sin()) as f32)
        .collect()
}

/// Frequency (Hz, 1 Hz steps) with the largest direct-sum DFT magnitude over
/// the first `rate` samples.
fn peak_hz(x: &[f32], rate: u32) -> usize {
    let x = &x[..rate as usize];
    let mut best = (0, 0.0);
    for f in 1..rate as usize / 2 {
        // Goertzel recurrence for bin f of an N = rate point DFT
        let w = 2.0 * PI * f as f64 / rate as f64;
        let coeff = 2.0 * w.cos();
        let (mut s1, mut s2) = (0.0f64, 0.0f64);
        for &v in x {
            let s = v as f64 + coeff * s1 - s2;
            s2 = s1;
            s1 = s;
        }
        let power = s1 * s1 + s2 * s2 - coeff * s1 * s2;
        if power > best.1 {
            best = (f, power);
        }
    }
    best.0
}

#[test]
fn wav_sine_roundtrip_keeps_its_peak() {
    let dir = tempfile::tempdir().unwrap();
    let clip = AudioClip::mono(tone(440.0, 8000, 1.0, 0.5), 8000).unwrap();
    for name in ["f.wav", "i.wav"] {
        let path = dir.path().join(name);
        if name == "f.wav" {
            write_wav_f32(&path, &clip).unwrap();
        } else {
            write_wav_i16(&path, &clip).unwrap();
        }
        let back = read_wav(&path).unwrap();
        assert_eq!(back.len(), 8000);
        assert_eq!(back.sample_rate_hz(), 8000);
        assert_eq!(peak_hz(back.samples(), 8000), 440);
    }
}

#[test]
fn resampling_keeps_tone_peaks() {
    for source in [16000, 22050, 44100, 48000] {
        for freq in [100.0, 440.0, 1234.0, 2500.0, 3150.0] {
            let clip = AudioClip::mono(tone(freq, source, 1.2, 0.5), source).unwrap();
            let out = resample(&clip, 8000).unwrap();
            let peak = peak_hz(&out.samples()[400..], 8000);
            assert!(
                peak.abs_diff(freq as usize) <= 1,
                "{source} Hz source, {freq} Hz: peak {peak}"
            );
        }
    }
}

#[test]
fn resampling_zero_is_zero() {
    let clip = AudioClip::mono(vec![0.0; 44100], 44100).unwrap();
    let out = resample(&clip, 8000).unwrap();
    assert_eq!(out.len(), 8000);
    assert!(out.samples().iter().all(|&v| v == 0.0));
}

#[test]
fn stereo_pipeline_keeps_center_and_lands_at_working_rate() {
    let voice = tone(660.0, 44100, 1.0, 0.4);
    let side = tone(200.0, 44100, 1.0, 0.3);
    let left: Vec<f32> = voice.iter().zip(&side).map(|(v, s)| v + s).collect();
    let right: Vec<f32> = voice.iter().zip(&side).map(|(v, s)| v - s).collect();
    let out = preprocess(&AudioClip::stereo(left, right, 44100).unwrap()).unwrap();
    assert_eq!(out.sample_rate_hz(), WORKING_RATE_HZ);
    assert_eq!(out.channel_count(), 1);
    assert_eq!(out.len(), 8000);
    assert_eq!(peak_hz(out.samples(), 8000), 660);
}

proptest! {
    #[test]
    fn downmix_is_linear(
        pairs in proptest::collection::vec((-1.0f32..1.0, -1.0f32..1.0, -1.0f32..1.0, -1.0f32..1.0), 1..64),
        a in -2.0f32..2.0,
        b in -2.0f32..2.0,
    ) {
        let clip = |f: &dyn Fn(&(f32, f32, f32, f32)) -> (f32, f32)| {
            let (l, r): (Vec<f32>, Vec<f32>) = pairs.iter().map(f).unzip();
            AudioClip::stereo(l, r, 8000).unwrap()
        };
        let x = clip(&|p| (p.0, p.1));
        let y = clip(&|p| (p.2, p.3));
        let combined = clip(&|p| (a * p.0 + b * p.2, a * p.1 + b * p.3));
        let lhs = downmix_to_mono(&combined);
        let (dx, dy) = (downmix_to_mono(&x), downmix_to_mono(&y));
        for ((l, px), py) in lhs.samples().iter().zip(dx.samples()).zip(dy.samples()) {
            prop_assert!((l - (a * px + b * py)).abs() <= 1e-5);
        }
    }
}
