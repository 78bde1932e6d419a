//! Sequence distances and ranked retrieval.
//!
//! Two base distances are provided: a Euclidean distance applied after
//! linearly resampling both sequences to a common length, and unnormalized
//! dynamic time warping with a squared-Euclidean local cost. Corpus ranking
//! sorts by distance with ties broken by ascending song id; k-nearest-neighbour
//! ranking reorders song groups by their votes among the k closest records.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::SongRecord;
use crate::error::{Error, Result};
use crate::features::FeatureSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MeasureKind {
    #[serde(rename = "ED")]
    Ed,
    #[serde(rename = "KNN")]
    Knn,
    #[serde(rename = "DTW")]
    Dtw,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 3] = [MeasureKind::Ed, MeasureKind::Knn, MeasureKind::Dtw];

    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::Ed => "ED",
            MeasureKind::Knn => "KNN",
            MeasureKind::Dtw => "DTW",
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "ED" => Ok(MeasureKind::Ed),
            "KNN" | "K-NN" => Ok(MeasureKind::Knn),
            "DTW" => Ok(MeasureKind::Dtw),
            _ => Err(Error::Argument(format!(
                "unknown measure '{s}' (valid: ED, KNN, DTW)"
            ))),
        }
    }
}

/// A distance measure and its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceMeasure {
    pub kind: MeasureKind,
    /// Neighbours consulted by kNN voting.
    pub k: usize,
    /// Common length for the Euclidean distance (also the kNN base distance).
    pub t_norm: usize,
    /// Sakoe-Chiba half-width for DTW; `None` means unconstrained.
    pub band: Option<usize>,
    /// Divide the DTW distance by `n + m`.
    pub dtw_normalize: bool,
}

impl DistanceMeasure {
    pub fn new(kind: MeasureKind) -> Self {
        Self {
            kind,
            k: 3,
            t_norm: 100,
            band: None,
            dtw_normalize: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::Configuration("k must be at least 1".into()));
        }
        if self.t_norm < 2 {
            return Err(Error::Configuration(
                "normalization length must be at least 2".into(),
            ));
        }
        if self.band == Some(0) {
            return Err(Error::Configuration(
                "DTW band half-width must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// The distance used to score a single pair; kNN scores with the
    /// Euclidean distance and differs only in how the ranking is assembled.
    pub fn distance(&self, q: &FeatureSequence, c: &FeatureSequence) -> Result<f64> {
        match self.kind {
            MeasureKind::Ed | MeasureKind::Knn => sequence_ed(q, c, self.t_norm),
            MeasureKind::Dtw => {
                let d = dtw_banded(q, c, self.band)?;
                Ok(if self.dtw_normalize {
                    d / (q.frames() + c.frames()) as f64
                } else {
                    d
                })
            }
        }
    }
}

impl Default for DistanceMeasure {
    fn default() -> Self {
        Self::new(MeasureKind::Dtw)
    }
}

/// Squared Euclidean distance between two vectors.
pub fn euclidean_sq(x: &[f32], p: &[f32]) -> Result<f64> {
    if x.len() != p.len() {
        return Err(Error::Argument(format!(
            "dimension mismatch: {} vs {}",
            x.len(),
            p.len()
        )));
    }
    Ok(sq_dist(x, p))
}

#[inline]
fn sq_dist(x: &[f32], p: &[f32]) -> f64 {
    x.iter()
        .zip(p)
        .map(|(&a, &b)| {
            let d = a as f64 - b as f64;
            d * d
        })
        .sum()
}

fn check_compatible(q: &FeatureSequence, c: &FeatureSequence) -> Result<()> {
    if q.kind() != c.kind() {
        return Err(Error::Argument(format!(
            "cannot compare {} features with {} features",
            q.kind(),
            c.kind()
        )));
    }
    if q.dim() != c.dim() {
        return Err(Error::Argument(format!(
            "cannot compare {}-dimensional with {}-dimensional features",
            q.dim(),
            c.dim()
        )));
    }
    Ok(())
}

/// Per-coefficient linear interpolation to exactly `t_norm` frames, sampling
/// the input at positions `t * (T-1) / (t_norm-1)`.
pub fn time_normalize(seq: &FeatureSequence, t_norm: usize) -> Result<FeatureSequence> {
    if t_norm < 2 {
        return Err(Error::Argument(
            "normalization length must be at least 2".into(),
        ));
    }
    if seq.frames() == t_norm {
        return Ok(seq.clone());
    }
    let rows = normalized_rows(seq, t_norm);
    FeatureSequence::new(
        seq.kind(),
        seq.dim(),
        rows.into_iter().flatten().map(|v| v as f32).collect(),
        *seq.config(),
    )
}

fn normalized_rows(seq: &FeatureSequence, t_norm: usize) -> Vec<Vec<f64>> {
    let last = (seq.frames() - 1) as f64;
    (0..t_norm)
        .map(|t| {
            let pos = t as f64 * last / (t_norm - 1) as f64;
            let i = (pos.floor() as usize).min(seq.frames() - 1);
            let frac = pos - i as f64;
            let a = seq.row(i);
            if frac == 0.0 {
                a.iter().map(|&v| v as f64).collect()
            } else {
                let b = seq.row(i + 1);
                a.iter()
                    .zip(b)
                    .map(|(&x, &y)| x as f64 + frac * (y as f64 - x as f64))
                    .collect()
            }
        })
        .collect()
}

/// Sum over frames of the squared Euclidean distance after normalizing both
/// sequences to `t_norm` frames.
pub fn sequence_ed(q: &FeatureSequence, c: &FeatureSequence, t_norm: usize) -> Result<f64> {
    check_compatible(q, c)?;
    if t_norm < 2 {
        return Err(Error::Argument(
            "normalization length must be at least 2".into(),
        ));
    }
    let qn = time_normalize(q, t_norm)?;
    let cn = time_normalize(c, t_norm)?;
    Ok(qn.rows().zip(cn.rows()).map(|(a, b)| sq_dist(a, b)).sum())
}

/// Unconstrained dynamic time warping distance `D(n, m)`.
pub fn dtw(q: &FeatureSequence, c: &FeatureSequence) -> Result<f64> {
    dtw_banded(q, c, None)
}

/// Dynamic time warping with an optional Sakoe-Chiba band `|i - j| <= band`.
///
/// `D(i,j) = d(i,j) + min(D(i-1,j-1), D(i-1,j), D(i,j-1))` with
/// `D(1,1) = d(1,1)` and squared Euclidean local cost.
pub fn dtw_banded(q: &FeatureSequence, c: &FeatureSequence, band: Option<usize>) -> Result<f64> {
    check_compatible(q, c)?;
    let (n, m) = (q.frames(), c.frames());
    if let Some(w) = band {
        if w == 0 {
            return Err(Error::Configuration(
                "DTW band half-width must be at least 1".into(),
            ));
        }
        if n.abs_diff(m) > w {
            return Err(Error::Configuration(format!(
                "band half-width {w} cannot connect sequences of {n} and {m} frames"
            )));
        }
    }
    let w = band.unwrap_or(usize::MAX);

    // two rolling rows over the c axis
    let mut prev = vec![f64::INFINITY; m];
    let mut cur = vec![f64::INFINITY; m];
    for i in 0..n {
        let qi = q.row(i);
        let lo = i.saturating_sub(w);
        let hi = i.saturating_add(w).min(m - 1);
        cur.fill(f64::INFINITY);
        for j in lo..=hi {
            let cost = sq_dist(qi, c.row(j));
            let best = match (i, j) {
                (0, 0) => 0.0,
                (0, _) => cur[j - 1],
                (_, 0) => prev[0],
                _ => prev[j - 1].min(prev[j]).min(cur[j - 1]),
            };
            cur[j] = best + cost;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m - 1])
}

/// One retrieval result entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub song_id: String,
    pub distance: f64,
}

/// Corpus songs ordered for one query.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    pub query_id: String,
    pub entries: Vec<RankedEntry>,
    pub measure: DistanceMeasure,
}

impl RankedList {
    /// 1-based position of `song_id`, if present.
    pub fn rank_of(&self, song_id: &str) -> Option<usize> {
        self.entries
            .iter()
            .position(|e| e.song_id == song_id)
            .map(|p| p + 1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn song_ids(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.song_id.as_str()).collect()
    }
}

fn entry_order(a: &RankedEntry, b: &RankedEntry) -> Ordering {
    a.distance
        .total_cmp(&b.distance)
        .then_with(|| a.song_id.cmp(&b.song_id))
}

/// Sorts scored songs ascending by distance, ties by song id.
pub fn order_by_distance(mut entries: Vec<RankedEntry>) -> Vec<RankedEntry> {
    entries.sort_by(entry_order);
    entries
}

/// kNN reordering of a distance-sorted list.
///
/// The first `k` entries vote for their group. Voted groups come first, by
/// votes descending, then by their closest member's distance (then group
/// name); each group lists all its members in distance order. Songs of groups
/// that received no vote follow in distance order.
pub fn knn_order(
    sorted: Vec<RankedEntry>,
    group_of: impl Fn(&str) -> String,
    k: usize,
) -> Result<Vec<RankedEntry>> {
    if k == 0 || k > sorted.len() {
        return Err(Error::Argument(format!(
            "k = {k} must be between 1 and the corpus size {}",
            sorted.len()
        )));
    }
    let groups: Vec<String> = sorted.iter().map(|e| group_of(&e.song_id)).collect();
    // votes and closest distance per voted group
    let mut votes: HashMap<&str, (usize, f64)> = HashMap::new();
    for (e, g) in sorted.iter().zip(&groups).take(k) {
        let slot = votes.entry(g.as_str()).or_insert((0, e.distance));
        slot.0 += 1;
    }
    let mut voted: Vec<(&str, usize, f64)> =
        votes.into_iter().map(|(g, (v, d))| (g, v, d)).collect();
    voted.sort_by(|a, b| {
        b.1.cmp(&a.1)
            .then_with(|| a.2.total_cmp(&b.2))
            .then_with(|| a.0.cmp(b.0))
    });
    let position: HashMap<&str, usize> = voted.iter().enumerate().map(|(i, g)| (g.0, i)).collect();

    let mut keyed: Vec<(usize, usize, RankedEntry)> = sorted
        .iter()
        .zip(&groups)
        .enumerate()
        .map(|(i, (e, g))| {
            (
                position.get(g.as_str()).copied().unwrap_or(usize::MAX),
                i,
                e.clone(),
            )
        })
        .collect();
    keyed.sort_by_key(|(group_pos, i, _)| (*group_pos, *i));
    Ok(keyed.into_iter().map(|(_, _, e)| e).collect())
}

fn score_corpus(
    query: &FeatureSequence,
    corpus: &[SongRecord],
    measure: &DistanceMeasure,
) -> Result<Vec<RankedEntry>> {
    if corpus.is_empty() {
        return Err(Error::Argument(
            "cannot rank against an empty corpus".into(),
        ));
    }
    measure.validate()?;
    corpus
        .par_iter()
        .map(|rec| {
            let feats = rec.features.get(&query.kind()).ok_or_else(|| {
                Error::Data(format!(
                    "song '{}' has no {} features",
                    rec.song_id,
                    query.kind()
                ))
            })?;
            Ok(RankedEntry {
                song_id: rec.song_id.clone(),
                distance: measure.distance(query, feats)?,
            })
        })
        .collect()
}

/// Scores the query against every song and sorts ascending.
///
/// kNN measures are ranked by their Euclidean base distance here; use
/// [`knn_rank`] (or [`rank`]) for voting.
pub fn rank_all(
    query_id: &str,
    query: &FeatureSequence,
    corpus: &[SongRecord],
    measure: &DistanceMeasure,
) -> Result<RankedList> {
    Ok(RankedList {
        query_id: query_id.to_string(),
        entries: order_by_distance(score_corpus(query, corpus, measure)?),
        measure: *measure,
    })
}

/// kNN ranking: the `k` closest records under `base` vote by song group.
pub fn knn_rank(
    query_id: &str,
    query: &FeatureSequence,
    corpus: &[SongRecord],
    k: usize,
    base: &DistanceMeasure,
) -> Result<RankedList> {
    if k == 0 || k > corpus.len() {
        return Err(Error::Argument(format!(
            "k = {k} must be between 1 and the corpus size {}",
            corpus.len()
        )));
    }
    let groups: HashMap<&str, &str> = corpus
        .iter()
        .map(|r| (r.song_id.as_str(), r.group_key()))
        .collect();
    let sorted = order_by_distance(score_corpus(query, corpus, base)?);
    let entries = knn_order(sorted, |id| groups[id].to_string(), k)?;
    Ok(RankedList {
        query_id: query_id.to_string(),
        entries,
        measure: DistanceMeasure {
            kind: MeasureKind::Knn,
            k,
            ..*base
        },
    })
}

/// Ranks with whichever procedure `measure.kind` calls for.
pub fn rank(
    query_id: &str,
    query: &FeatureSequence,
    corpus: &[SongRecord],
    measure: &DistanceMeasure,
) -> Result<RankedList> {
    match measure.kind {
        MeasureKind::Knn => knn_rank(query_id, query, corpus, measure.k, measure),
        _ => rank_all(query_id, query, corpus, measure),
    }
}
