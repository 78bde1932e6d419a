//! Minimal RIFF/WAVE codec: 16-bit integer PCM and 32-bit IEEE float, one or
//! two channels, little-endian.

use std::fs;
use std::path::Path;

use super::AudioClip;
use crate::error::{Error, Result};

const TAG_PCM: u16 = 0x0001;
const TAG_FLOAT: u16 = 0x0003;
const TAG_EXTENSIBLE: u16 = 0xFFFE;

fn encoding_name(tag: u16) -> &'static str {
    match tag {
        0x0001 => "integer PCM",
        0x0002 => "Microsoft ADPCM",
        0x0003 => "IEEE float",
        0x0006 => "A-law",
        0x0007 => "mu-law",
        0x0011 => "IMA ADPCM",
        0x0031 => "GSM 6.10",
        0x0050 => "MPEG",
        0x0055 => "MPEG layer 3",
        _ => "unknown",
    }
}

struct FmtChunk {
    tag: u16,
    channels: u16,
    sample_rate: u32,
    block_align: u16,
    bits: u16,
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

fn parse_fmt(body: &[u8]) -> Result<FmtChunk> {
    if body.len() < 16 {
        return Err(Error::Format(format!(
            "fmt chunk is {} bytes, need at least 16",
            body.len()
        )));
    }
    let mut tag = u16_at(body, 0);
    if tag == TAG_EXTENSIBLE {
        // cbSize(2) validBits(2) channelMask(4) then the sub-format GUID whose
        // first two bytes carry the real format tag.
        if body.len() < 26 {
            return Err(Error::Format(
                "truncated WAVE_FORMAT_EXTENSIBLE fmt chunk".into(),
            ));
        }
        tag = u16_at(body, 24);
    }
    Ok(FmtChunk {
        tag,
        channels: u16_at(body, 2),
        sample_rate: u32_at(body, 4),
        block_align: u16_at(body, 12),
        bits: u16_at(body, 14),
    })
}

/// Decodes a WAV file held in memory.
pub fn read_wav_bytes(bytes: &[u8]) -> Result<AudioClip> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::Format("missing RIFF/WAVE header".into()));
    }
    let mut fmt = None;
    let mut data = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let start = pos + 8;
        let end = start
            .checked_add(size)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| {
                Error::Format(format!(
                    "chunk '{}' claims {size} bytes past end of file",
                    String::from_utf8_lossy(id)
                ))
            })?;
        match id {
            b"fmt " => fmt = Some(parse_fmt(&bytes[start..end])?),
            b"data" => data = Some(&bytes[start..end]),
            _ => {}
        }
        // chunks are word aligned
        pos = end + (size & 1);
    }
    let fmt = fmt.ok_or_else(|| Error::Format("no fmt chunk".into()))?;
    let data = data.ok_or_else(|| Error::Format("no data chunk".into()))?;

    let supported = matches!((fmt.tag, fmt.bits), (TAG_PCM, 16) | (TAG_FLOAT, 32));
    if !supported {
        return Err(Error::UnsupportedFormat(format!(
            "{} ({} bits per sample, format tag {:#06x}); only 16-bit integer PCM and 32-bit float are accepted",
            encoding_name(fmt.tag),
            fmt.bits,
            fmt.tag
        )));
    }
    if fmt.channels == 0 || fmt.channels > 2 {
        return Err(Error::UnsupportedFormat(format!(
            "{} channels; only mono and stereo are accepted",
            fmt.channels
        )));
    }
    if fmt.sample_rate == 0 {
        return Err(Error::Format("sample rate of 0 Hz".into()));
    }
    let channels = fmt.channels as usize;
    let width = fmt.bits as usize / 8;
    if fmt.block_align as usize != channels * width {
        return Err(Error::Format(format!(
            "block align {} does not match {channels} channels of {width} bytes",
            fmt.block_align
        )));
    }
    if data.len() % (channels * width) != 0 {
        return Err(Error::Format("data chunk ends mid-frame".into()));
    }

    let frames = data.len() / (channels * width);
    let mut out = vec![Vec::with_capacity(frames); channels];
    for (i, sample) in data.chunks_exact(width).enumerate() {
        let value = if fmt.tag == TAG_PCM {
            i16::from_le_bytes([sample[0], sample[1]]) as f32 / 32768.0
        } else {
            let v = f32::from_le_bytes([sample[0], sample[1], sample[2], sample[3]]);
            if !v.is_finite() {
                return Err(Error::Format(format!(
                    "non-finite float sample at index {i}"
                )));
            }
            v
        };
        out[i % channels].push(value);
    }
    AudioClip::new(out, fmt.sample_rate)
}

/// Reads a 16-bit PCM or 32-bit float WAV file into a clip.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioClip> {
    read_wav_bytes(&fs::read(path)?)
}

fn encode(
    clip: &AudioClip,
    tag: u16,
    bits: u16,
    mut put: impl FnMut(f32, &mut Vec<u8>),
) -> Vec<u8> {
    let channels = clip.channel_count() as u16;
    let block_align = channels * bits / 8;
    let data_len = clip.len() * block_align as usize;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&tag.to_le_bytes());
    out.extend_from_slice(&channels.to_le_bytes());
    out.extend_from_slice(&clip.sample_rate_hz().to_le_bytes());
    out.extend_from_slice(&(clip.sample_rate_hz() * block_align as u32).to_le_bytes());
    out.extend_from_slice(&block_align.to_le_bytes());
    out.extend_from_slice(&bits.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for n in 0..clip.len() {
        for ch in clip.channels() {
            put(ch[n], &mut out);
        }
    }
    if data_len % 2 == 1 {
        out.push(0);
    }
    out
}

/// Encodes a clip as a 32-bit float WAV image.
pub fn wav_bytes_f32(clip: &AudioClip) -> Vec<u8> {
    encode(clip, TAG_FLOAT, 32, |s, out| {
        out.extend_from_slice(&s.to_le_bytes())
    })
}

pub fn write_wav_f32(path: impl AsRef<Path>, clip: &AudioClip) -> Result<()> {
    fs::write(path, wav_bytes_f32(clip))?;
    Ok(())
}

/// Writes 16-bit PCM, rounding to the nearest step of 1/32768 and clipping to
/// the representable range.
pub fn write_wav_i16(path: impl AsRef<Path>, clip: &AudioClip) -> Result<()> {
    let bytes = encode(clip, TAG_PCM, 16, |s, out| {
        let q = (s as f64 * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        out.extend_from_slice(&q.to_le_bytes());
    });
    fs::write(path, bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pcm16_bytes(samples: &[i16], channels: u16, rate: u32) -> Vec<u8> {
        let data_len = samples.len() * 2;
        let mut b = Vec::new();
        b.extend_from_slice(b"RIFF");
        b.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
        b.extend_from_slice(b"WAVEfmt ");
        b.extend_from_slice(&16u32.to_le_bytes());
        b.extend_from_slice(&1u16.to_le_bytes());
        b.extend_from_slice(&channels.to_le_bytes());
        b.extend_from_slice(&rate.to_le_bytes());
        b.extend_from_slice(&(rate * 2 * channels as u32).to_le_bytes());
        b.extend_from_slice(&(2 * channels).to_le_bytes());
        b.extend_from_slice(&16u16.to_le_bytes());
        b.extend_from_slice(b"data");
        b.extend_from_slice(&(data_len as u32).to_le_bytes());
        for s in samples {
            b.extend_from_slice(&s.to_le_bytes());
        }
        b
    }

    #[test]
    fn pcm16_normalization() {
        let clip = read_wav_bytes(&pcm16_bytes(&[16384, -32768, 0], 1, 8000)).unwrap();
        assert_eq!(clip.samples(), &[0.5, -1.0, 0.0]);
        assert_eq!(clip.sample_rate_hz(), 8000);
    }

    #[test]
    fn pcm16_stereo_deinterleaves() {
        let clip = read_wav_bytes(&pcm16_bytes(&[100, -100, 200, -200], 2, 44100)).unwrap();
        assert_eq!(clip.channel_count(), 2);
        assert_eq!(clip.channels()[0], vec![100.0 / 32768.0, 200.0 / 32768.0]);
        assert_eq!(clip.channels()[1], vec![-100.0 / 32768.0, -200.0 / 32768.0]);
    }

    #[test]
    fn rejects_garbage_header() {
        assert!(matches!(
            read_wav_bytes(b"not a wav file at all"),
            Err(Error::Format(_))
        ));
        let mut b = pcm16_bytes(&[1, 2, 3], 1, 8000);
        b.truncate(b.len() - 2);
        assert!(matches!(read_wav_bytes(&b), Err(Error::Format(_))));
    }

    #[test]
    fn names_unsupported_encodings() {
        // rewrite the format tag to MS ADPCM
        let mut b = pcm16_bytes(&[0; 4], 1, 8000);
        b[20..22].copy_from_slice(&2u16.to_le_bytes());
        match read_wav_bytes(&b) {
            Err(Error::UnsupportedFormat(msg)) => assert!(msg.contains("ADPCM"), "{msg}"),
            other => panic!("expected unsupported-format error, got {other:?}"),
        }
        // 24-bit integer PCM
        let mut b = pcm16_bytes(&[0; 6], 1, 8000);
        b[34..36].copy_from_slice(&24u16.to_le_bytes());
        b[32..34].copy_from_slice(&3u16.to_le_bytes());
        match read_wav_bytes(&b) {
            Err(Error::UnsupportedFormat(msg)) => assert!(msg.contains("24 bits"), "{msg}"),
            other => panic!("expected unsupported-format error, got {other:?}"),
        }
    }

    #[test]
    fn skips_unknown_chunks() {
        let base = pcm16_bytes(&[16384], 1, 8000);
        let mut b = base[..12].to_vec();
        b.extend_from_slice(b"LIST");
        b.extend_from_slice(&3u32.to_le_bytes());
        b.extend_from_slice(&[1, 2, 3, 0]);
        b.extend_from_slice(&base[12..]);
        assert_eq!(read_wav_bytes(&b).unwrap().samples(), &[0.5]);
    }

    proptest! {
        #[test]
        fn float_roundtrip_is_bit_exact(samples in proptest::collection::vec(-4.0f32..4.0, 1..64), stereo: bool) {
            let clip = if stereo {
                let right: Vec<f32> = samples.iter().map(|s| -s * 0.5).collect();
                AudioClip::stereo(samples.clone(), right, 22050).unwrap()
            } else {
                AudioClip::mono(samples.clone(), 22050).unwrap()
            };
            let back = read_wav_bytes(&wav_bytes_f32(&clip)).unwrap();
            prop_assert_eq!(back, clip);
        }

        #[test]
        fn pcm16_roundtrip_within_one_step(samples in proptest::collection::vec(-1.0f32..=1.0, 1..64)) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("x.wav");
            let clip = AudioClip::mono(samples, 8000).unwrap();
            write_wav_i16(&path, &clip).unwrap();
            let back = read_wav(&path).unwrap();
            for (a, b) in clip.samples().iter().zip(back.samples()) {
                prop_assert!((a - b).abs() <= 1.0 / 32768.0);
            }
        }
    }
}
