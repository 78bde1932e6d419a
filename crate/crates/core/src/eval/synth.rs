//! Seeded synthetic song corpus for desk-scale experiments.
//!
//! Each song is a monophonic melody sung by a harmonic "voice" with its own
//! spectral envelope (power-law roll-off plus three formants) and vibrato. Queries re-render a
//! song with a different tempo, vibrato phase and additive white noise, the way
//! a hummed rendition differs from the recording.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::audio_io::AudioClip;
use crate::error::Result;

const NOTE_DURATIONS: [f64; 4] = [0.15, 0.25, 0.35, 0.5];
const ATTACK_SECS: f64 = 0.015;
const RELEASE_SECS: f64 = 0.03;
/// Noise floor of the reference recordings, in dB below the voice.
pub const RECORDING_SNR_DB: f64 = 35.0;
/// Highest partial frequency rendered; stays below the 4 kHz working Nyquist.
const MAX_PARTIAL_HZ: f64 = 3800.0;

#[derive(Debug, Clone, PartialEq)]
struct Note {
    /// MIDI pitch.
    pitch: f64,
    secs: f64,
}

/// Parameters of one synthetic song.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSong {
    pub song_id: String,
    pub title: String,
    notes: Vec<Note>,
    /// Relative amplitude of partial `h + 1`.
    partials: Vec<f64>,
    /// (center Hz, bandwidth Hz, peak boost) per formant.
    formants: Vec<(f64, f64, f64)>,
    /// Partial amplitude falls off as `h^-rolloff`.
    rolloff: f64,
    vibrato_hz: f64,
    vibrato_semitones: f64,
    level: f64,
    noise_seed: u64,
}

/// How a hummed query deviates from the original.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryPerturbation {
    /// Tempo factor drawn uniformly from `1 +- max_tempo_deviation`.
    pub max_tempo_deviation: f64,
    /// Signal-to-noise ratio of added white Gaussian noise; `None` adds none.
    pub snr_db: Option<f64>,
}

impl Default for QueryPerturbation {
    fn default() -> Self {
        Self {
            max_tempo_deviation: 0.1,
            snr_db: Some(20.0),
        }
    }
}

fn midi_to_hz(pitch: f64) -> f64 {
    440.0 * 2f64.powf((pitch - 69.0) / 12.0)
}

impl SynthSong {
    /// Draws a song of roughly `duration_secs` seconds.
    pub fn random(song_id: impl Into<String>, duration_secs: f64, rng: &mut impl Rng) -> Self {
        let song_id = song_id.into();
        // pentatonic-ish steps keep melodies singable
        const STEPS: [f64; 7] = [-5.0, -3.0, -2.0, 0.0, 2.0, 3.0, 5.0];
        let root = rng.random_range(48.0..64.0);
        let mut pitch = root;
        let mut notes = Vec::new();
        let mut total = 0.0;
        while total < duration_secs {
            let secs = NOTE_DURATIONS[rng.random_range(0..NOTE_DURATIONS.len())];
            notes.push(Note { pitch, secs });
            total += secs;
            pitch = (pitch + STEPS[rng.random_range(0..STEPS.len())]).clamp(root - 9.0, root + 9.0);
        }
        let scale = duration_secs / total;
        notes.iter_mut().for_each(|n| n.secs *= scale);

        let partials = (0..24).map(|_| rng.random_range(0.3..1.0)).collect();
        Self {
            title: format!("Synthetic {song_id}"),
            song_id,
            notes,
            partials,
            formants: [(300.0, 900.0), (900.0, 2300.0), (2300.0, 3500.0)]
                .iter()
                .map(|&(lo, hi)| {
                    (
                        rng.random_range(lo..hi),
                        rng.random_range(80.0..300.0),
                        rng.random_range(2.0..8.0),
                    )
                })
                .collect(),
            rolloff: rng.random_range(0.5..1.1),
            vibrato_hz: rng.random_range(4.0..7.0),
            vibrato_semitones: rng.random_range(0.05..0.3),
            level: rng.random_range(0.25..0.5),
            noise_seed: rng.random(),
        }
    }

    pub fn duration_secs(&self) -> f64 {
        self.notes.iter().map(|n| n.secs).sum()
    }

    fn partial_gain(&self, index: usize, freq: f64) -> f64 {
        let boost: f64 = self
            .formants
            .iter()
            .map(|&(center, width, gain)| 1.0 + gain * (-((freq - center) / width).powi(2)).exp())
            .product();
        self.partials[index] * ((index + 1) as f64).powf(-self.rolloff) * boost
    }

    /// Mono rendering with note durations divided by `tempo`.
    fn render_samples(&self, rate: u32, tempo: f64, vibrato_phase: f64) -> Vec<f64> {
        let rate_f = rate as f64;
        let total: usize = self
            .notes
            .iter()
            .map(|n| (n.secs / tempo * rate_f).round() as usize)
            .sum();
        let mut out = Vec::with_capacity(total);
        let mut phases = vec![0.0f64; self.partials.len()];
        let mut t_global = 0usize;
        for note in &self.notes {
            let len = (note.secs / tempo * rate_f).round() as usize;
            let attack = (ATTACK_SECS * rate_f) as usize;
            let release = (RELEASE_SECS * rate_f) as usize;
            for i in 0..len {
                let t = t_global as f64 / rate_f;
                let vib =
                    self.vibrato_semitones * (2.0 * PI * self.vibrato_hz * t + vibrato_phase).sin();
                let f0 = midi_to_hz(note.pitch + vib);
                let env = if i < attack {
                    i as f64 / attack as f64
                } else if i + release > len {
                    (len - i) as f64 / release as f64
                } else {
                    1.0
                };
                let mut v = 0.0;
                for (h, phase) in phases.iter_mut().enumerate() {
                    let f = f0 * (h + 1) as f64;
                    if f >= MAX_PARTIAL_HZ.min(rate_f * 0.45) {
                        break;
                    }
                    *phase = (*phase + 2.0 * PI * f / rate_f) % (2.0 * PI);
                    v += self.partial_gain(h, f) * phase.sin();
                }
                out.push(v * env);
                t_global += 1;
            }
        }
        let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if peak > 0.0 {
            out.iter_mut().for_each(|v| *v *= self.level / peak);
        }
        out
    }

    /// The reference recording: nominal tempo over a faint noise floor.
    pub fn render(&self, rate: u32) -> Result<AudioClip> {
        let s = self.recording(rate);
        AudioClip::mono(s.into_iter().map(|v| v as f32).collect(), rate)
    }

    fn recording(&self, rate: u32) -> Vec<f64> {
        let mut s = self.render_samples(rate, 1.0, 0.0);
        add_noise(
            &mut s,
            RECORDING_SNR_DB,
            &mut ChaCha8Rng::seed_from_u64(self.noise_seed),
        );
        s
    }

    /// A hummed rendition: tempo, vibrato phase and noise drawn from `seed`.
    pub fn render_query(
        &self,
        rate: u32,
        perturbation: &QueryPerturbation,
        seed: u64,
    ) -> Result<AudioClip> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = perturbation.max_tempo_deviation;
        let tempo = if d > 0.0 {
            rng.random_range(1.0 - d..=1.0 + d)
        } else {
            1.0
        };
        let phase = rng.random_range(0.0..2.0 * PI);
        let mut s = self.render_samples(rate, tempo, phase);
        if let Some(snr) = perturbation.snr_db {
            add_noise(&mut s, snr, &mut rng);
        }
        AudioClip::mono(s.into_iter().map(|v| v as f32).collect(), rate)
    }

    /// Stereo mix with the voice panned center and a side-panned accompaniment
    /// (a low drone in the left channel, phase-inverted in the right).
    pub fn render_stereo_mix(&self, rate: u32) -> Result<AudioClip> {
        let voice = self.recording(rate);
        let root = midi_to_hz(self.notes[0].pitch - 12.0);
        let mut left = Vec::with_capacity(voice.len());
        let mut right = Vec::with_capacity(voice.len());
        for (i, v) in voice.iter().enumerate() {
            let t = i as f64 / rate as f64;
            let drone =
                0.15 * (2.0 * PI * root * t).sin() + 0.05 * (2.0 * PI * 3.0 * root * t).sin();
            left.push((v + drone) as f32);
            right.push((v - drone) as f32);
        }
        AudioClip::stereo(left, right, rate)
    }
}

/// Adds white Gaussian noise `snr_db` below the mean power of `signal`.
fn add_noise(signal: &mut [f64], snr_db: f64, rng: &mut impl Rng) {
    let power = signal.iter().map(|v| v * v).sum::<f64>() / signal.len().max(1) as f64;
    let sigma = (power / 10f64.powf(snr_db / 10.0)).sqrt();
    let noise = Normal::new(0.0, sigma).expect("finite noise level");
    signal.iter_mut().for_each(|v| *v += noise.sample(rng));
}

/// `count` songs with ids `song0000`, `song0001`, ... drawn from `seed`.
pub fn synth_songs(count: usize, duration_secs: f64, seed: u64) -> Vec<SynthSong> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| SynthSong::random(format!("song{i:04}"), duration_secs, &mut rng))
        .collect()
}

/// Seed of the query rendition of song `index` under corpus seed `seed`.
pub fn query_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(0x2545_F491_4F6C_DD1D) ^ (index as u64).wrapping_add(0xA5A5_0000)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_generation() {
        let a = synth_songs(3, 2.0, 5);
        let b = synth_songs(3, 2.0, 5);
        assert_eq!(a, b);
        assert_eq!(a[0].render(8000).unwrap(), b[0].render(8000).unwrap());
        let p = QueryPerturbation::default();
        assert_eq!(
            a[1].render_query(8000, &p, 9).unwrap(),
            b[1].render_query(8000, &p, 9).unwrap()
        );
        assert_ne!(
            a[1].render_query(8000, &p, 9).unwrap(),
            a[1].render_query(8000, &p, 10).unwrap()
        );
    }

    #[test]
    fn duration_and_level() {
        let song = &synth_songs(1, 3.0, 1)[0];
        assert!((song.duration_secs() - 3.0).abs() < 1e-9);
        let clip = song.render(8000).unwrap();
        assert!((clip.len() as i64 - 24000).abs() < 20);
        let peak = clip.samples().iter().fold(0.0f32, |m, v| m.max(v.abs()));
        assert!(peak <= 0.5 + 1e-6 && peak > 0.2);
    }

    #[test]
    fn tempo_changes_length() {
        let song = &synth_songs(1, 3.0, 2)[0];
        let p = QueryPerturbation {
            max_tempo_deviation: 0.1,
            snr_db: None,
        };
        let base = song.render(8000).unwrap().len() as f64;
        for seed in 0..10 {
            let len = song.render_query(8000, &p, seed).unwrap().len() as f64;
            assert!(len >= base / 1.1 - 20.0 && len <= base / 0.9 + 20.0);
        }
    }

    #[test]
    fn noise_matches_requested_snr() {
        let song = &synth_songs(1, 2.0, 3)[0];
        let clean = QueryPerturbation {
            max_tempo_deviation: 0.0,
            snr_db: None,
        };
        let noisy = QueryPerturbation {
            max_tempo_deviation: 0.0,
            snr_db: Some(20.0),
        };
        let a = song.render_query(8000, &clean, 4).unwrap();
        let b = song.render_query(8000, &noisy, 4).unwrap();
        let sig: f64 = a.samples().iter().map(|&v| (v as f64).powi(2)).sum();
        let err: f64 = a
            .samples()
            .iter()
            .zip(b.samples())
            .map(|(&x, &y)| (x as f64 - y as f64).powi(2))
            .sum();
        let snr = 10.0 * (sig / err).log10();
        assert!((snr - 20.0).abs() < 0.5, "{snr}");
    }

    #[test]
    fn stereo_mix_center_is_voice() {
        let song = &synth_songs(1, 1.0, 6)[0];
        let mix = song.render_stereo_mix(16000).unwrap();
        let voice = song.render(16000).unwrap();
        let mid: Vec<f32> = mix.channels()[0]
            .iter()
            .zip(&mix.channels()[1])
            .map(|(l, r)| (l + r) / 2.0)
            .collect();
        for (m, v) in mid.iter().zip(voice.samples()) {
            assert!((m - v).abs() < 1e-6);
        }
    }
}
