//! Retrieval sweeps over feature kind x measure x excerpt x database size.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::excerpt::{make_excerpt, ExcerptMode};
use super::metrics::{mean_of_accuracy, mean_reciprocal_rank, top_x_hit_rate, RankSample};
use crate::audio_io::AudioClip;
use crate::corpus::{ingest_clip, FeatureStore, SongRecord};
use crate::error::{Error, Result};
use crate::features::{FeatureConfig, FeatureKind, FeatureSequence};
use crate::similarity::{knn_order, order_by_distance, DistanceMeasure, MeasureKind, RankedEntry};

pub const CSV_HEADER: &str =
    "feature,measure,excerpt_pct,db_size,n_queries,top10,top20,top30,moa,mrr";

/// A query with its known target.
#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub query_id: String,
    pub target_id: String,
    pub features: BTreeMap<FeatureKind, FeatureSequence>,
}

impl Query {
    /// Uses a stored song's own features as the query.
    pub fn from_record(record: &SongRecord) -> Self {
        Self {
            query_id: record.song_id.clone(),
            target_id: record.song_id.clone(),
            features: record.features.clone(),
        }
    }

    /// Runs the ingestion pipeline on query audio.
    pub fn from_clip(
        query_id: &str,
        target_id: &str,
        clip: &AudioClip,
        config: &FeatureConfig,
    ) -> Result<Self> {
        let record = ingest_clip(clip, query_id, "", 0, config)?;
        Ok(Self {
            query_id: query_id.to_string(),
            target_id: target_id.to_string(),
            features: record.features,
        })
    }
}

/// The parameter grid of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub kinds: Vec<FeatureKind>,
    pub measures: Vec<DistanceMeasure>,
    /// Excerpt proportions in percent.
    pub excerpts: Vec<u32>,
    pub db_sizes: Vec<usize>,
    pub mode: ExcerptMode,
}

impl Grid {
    /// All kinds and measures, excerpts 60..=100 step 10, the whole store.
    pub fn full(store_size: usize) -> Self {
        Self {
            kinds: FeatureKind::ALL.to_vec(),
            measures: MeasureKind::ALL
                .iter()
                .map(|&k| DistanceMeasure::new(k))
                .collect(),
            excerpts: vec![60, 70, 80, 90, 100],
            db_sizes: vec![store_size],
            mode: ExcerptMode::Prefix,
        }
    }

    pub fn cell_count(&self) -> usize {
        self.kinds.len() * self.measures.len() * self.excerpts.len() * self.db_sizes.len()
    }
}

/// Metrics of one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub kind: FeatureKind,
    pub measure: MeasureKind,
    pub excerpt_pct: u32,
    pub db_size: usize,
    pub n_queries: usize,
    pub top10: f64,
    pub top20: f64,
    pub top30: f64,
    pub moa: f64,
    pub mrr: f64,
    pub samples: Vec<RankSample>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalReport {
    pub cells: Vec<CellReport>,
}

impl EvalReport {
    /// CSV with one row per cell; metric columns are percentages with six
    /// decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6}",
                c.kind,
                c.measure,
                c.excerpt_pct,
                c.db_size,
                c.n_queries,
                100.0 * c.top10,
                100.0 * c.top20,
                100.0 * c.top30,
                100.0 * c.moa,
                100.0 * c.mrr
            );
        }
        out
    }

    pub fn cell(
        &self,
        kind: FeatureKind,
        measure: MeasureKind,
        excerpt_pct: u32,
        db_size: usize,
    ) -> Option<&CellReport> {
        self.cells.iter().find(|c| {
            c.kind == kind
                && c.measure == measure
                && c.excerpt_pct == excerpt_pct
                && c.db_size == db_size
        })
    }
}

/// Per-query seed for random-segment excerpts; independent of feature kind so
/// every kind sees the same segment.
fn excerpt_seed(seed: u64, query_index: usize, pct: u32) -> u64 {
    seed ^ (query_index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((pct as u64) << 48)
}

/// Sub-database for a target: the first `n` ids, with the target swapped into
/// the last slot when it is not among them.
fn sub_database<'a>(sorted_ids: &[&'a str], n: usize, target: &'a str) -> Vec<&'a str> {
    let mut ids = sorted_ids[..n].to_vec();
    if !ids.contains(&target) {
        ids[n - 1] = target;
    }
    ids
}

/// Runs every grid cell and collects metrics in grid order
/// (kind, measure, excerpt, database size).
pub fn run_experiment(
    store: &FeatureStore,
    queries: &[Query],
    grid: &Grid,
    seed: u64,
) -> Result<EvalReport> {
    if queries.is_empty() {
        return Err(Error::Argument("no queries".into()));
    }
    for q in queries {
        if !store.contains(&q.target_id) {
            return Err(Error::Configuration(format!(
                "query '{}' targets '{}', which is not in the store",
                q.query_id, q.target_id
            )));
        }
        if let Some(kind) = grid.kinds.iter().find(|k| !q.features.contains_key(k)) {
            return Err(Error::Data(format!(
                "query '{}' has no {kind} features",
                q.query_id
            )));
        }
    }
    for &n in &grid.db_sizes {
        if n < 1 {
            return Err(Error::Argument("database size must be at least 1".into()));
        }
        if n > store.len() {
            return Err(Error::Configuration(format!(
                "database size {n} exceeds the {} stored songs",
                store.len()
            )));
        }
    }
    if let Some(p) = grid.excerpts.iter().find(|p| !(1..=100).contains(*p)) {
        return Err(Error::Argument(format!(
            "excerpt proportion {p}% outside 1..=100"
        )));
    }
    for m in &grid.measures {
        m.validate()?;
        if m.kind == MeasureKind::Knn {
            if let Some(&n) = grid.db_sizes.iter().find(|&&n| m.k > n) {
                return Err(Error::Argument(format!(
                    "k = {} exceeds database size {n}",
                    m.k
                )));
            }
        }
    }

    let sorted_ids = store.sorted_ids();
    let groups: HashMap<&str, &str> = store
        .records()
        .iter()
        .map(|r| (r.song_id.as_str(), r.group_key()))
        .collect();
    let subsets: Vec<Vec<Vec<&str>>> = grid
        .db_sizes
        .iter()
        .map(|&n| {
            queries
                .iter()
                .map(|q| sub_database(&sorted_ids, n, &q.target_id))
                .collect()
        })
        .collect();

    let mut cells = Vec::with_capacity(grid.cell_count());
    for &kind in &grid.kinds {
        let corpus: Vec<(&str, &FeatureSequence)> = store
            .records()
            .iter()
            .map(|r| {
                r.features
                    .get(&kind)
                    .map(|f| (r.song_id.as_str(), f))
                    .ok_or_else(|| {
                        Error::Data(format!("song '{}' has no {kind} features", r.song_id))
                    })
            })
            .collect::<Result<_>>()?;

        for measure in &grid.measures {
            for &pct in &grid.excerpts {
                // distances from every query to every stored song
                let distances: Vec<HashMap<&str, f64>> = queries
                    .par_iter()
                    .enumerate()
                    .map(|(qi, q)| {
                        let excerpt = make_excerpt(
                            &q.features[&kind],
                            pct,
                            grid.mode,
                            excerpt_seed(seed, qi, pct),
                        )?;
                        corpus
                            .iter()
                            .map(|&(id, f)| Ok((id, measure.distance(&excerpt, f)?)))
                            .collect()
                    })
                    .collect::<Result<_>>()?;

                for (size_idx, &n) in grid.db_sizes.iter().enumerate() {
                    let samples = queries
                        .iter()
                        .enumerate()
                        .map(|(qi, q)| {
                            let entries: Vec<RankedEntry> = subsets[size_idx][qi]
                                .iter()
                                .map(|&id| RankedEntry {
                                    song_id: id.to_string(),
                                    distance: distances[qi][id],
                                })
                                .collect();
                            let mut ordered = order_by_distance(entries);
                            if measure.kind == MeasureKind::Knn {
                                ordered =
                                    knn_order(ordered, |id| groups[id].to_string(), measure.k)?;
                            }
                            let rank = ordered
                                .iter()
                                .position(|e| e.song_id == q.target_id)
                                .expect("target is always in its sub-database")
                                + 1;
                            Ok(RankSample::new(&q.query_id, &q.target_id, rank))
                        })
                        .collect::<Result<Vec<_>>>()?;

                    let moa = if n >= 2 {
                        mean_of_accuracy(&samples, n)?
                    } else {
                        1.0
                    };
                    cells.push(CellReport {
                        kind,
                        measure: measure.kind,
                        excerpt_pct: pct,
                        db_size: n,
                        n_queries: samples.len(),
                        top10: top_x_hit_rate(&samples, 10)?,
                        top20: top_x_hit_rate(&samples, 20)?,
                        top30: top_x_hit_rate(&samples, 30)?,
                        moa,
                        mrr: mean_reciprocal_rank(&samples)?,
                        samples,
                    });
                }
            }
        }
    }
    Ok(EvalReport { cells })
}
