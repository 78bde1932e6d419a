use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureSequence;

/// Which part of a query survives excerpting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ExcerptMode {
    /// Leading frames, as when humming from the start of a melody.
    #[default]
    Prefix,
    /// A contiguous block at a seeded uniform offset.
    RandomSegment,
}

/// Frames kept from `frames` at `proportion` percent: `ceil(frames * p / 100)`.
pub fn excerpt_len(frames: usize, proportion: u32) -> usize {
    (frames * proportion as usize).div_ceil(100)
}

/// Keeps `proportion` percent (1..=100) of the frames.
pub fn make_excerpt(
    features: &FeatureSequence,
    proportion: u32,
    mode: ExcerptMode,
    seed: u64,
) -> Result<FeatureSequence> {
    if !(1..=100).contains(&proportion) {
        return Err(Error::Argument(format!(
            "excerpt proportion {proportion}% outside 1..=100"
        )));
    }
    let len = excerpt_len(features.frames(), proportion);
    if len == 0 {
        return Err(Error::Argument("excerpt would be empty".into()));
    }
    let start = match mode {
        ExcerptMode::Prefix => 0,
        ExcerptMode::RandomSegment => {
            ChaCha8Rng::seed_from_u64(seed).random_range(0..=features.frames() - len)
        }
    };
    features.slice_frames(start, len)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{FeatureConfig, FeatureKind};

    fn ramp(frames: usize) -> FeatureSequence {
        let data = (0..frames * 2).map(|v| v as f32).collect();
        FeatureSequence::new(FeatureKind::Lpcc, 2, data, FeatureConfig::default()).unwrap()
    }

    #[test]
    fn full_excerpt_is_identity() {
        let s = ramp(37);
        for mode in [ExcerptMode::Prefix, ExcerptMode::RandomSegment] {
            assert_eq!(make_excerpt(&s, 100, mode, 9).unwrap(), s);
        }
    }

    #[test]
    fn prefix_sixty_percent() {
        let s = ramp(100);
        let e = make_excerpt(&s, 60, ExcerptMode::Prefix, 0).unwrap();
        assert_eq!(e.frames(), 60);
        assert_eq!(e.row(59), s.row(59));
        assert_eq!(excerpt_len(7, 60), 5);
        assert_eq!(excerpt_len(1, 1), 1);
    }

    #[test]
    fn random_segment_is_seeded() {
        let s = ramp(200);
        let a = make_excerpt(&s, 60, ExcerptMode::RandomSegment, 42).unwrap();
        let b = make_excerpt(&s, 60, ExcerptMode::RandomSegment, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.frames(), 120);
        let starts: std::collections::HashSet<u32> = (0..20)
            .map(|seed| {
                make_excerpt(&s, 60, ExcerptMode::RandomSegment, seed)
                    .unwrap()
                    .row(0)[0] as u32
            })
            .collect();
        assert!(starts.len() > 1);
    }

    #[test]
    fn bad_proportions() {
        let s = ramp(10);
        assert!(make_excerpt(&s, 0, ExcerptMode::Prefix, 0).is_err());
        assert!(make_excerpt(&s, 101, ExcerptMode::Prefix, 0).is_err());
    }
}
