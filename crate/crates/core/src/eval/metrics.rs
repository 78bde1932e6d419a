//! Retrieval quality metrics over the rank of each query's target.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where one query's target landed in its ranked list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankSample {
    pub query_id: String,
    pub target_song_id: String,
    /// 1-based.
    pub rank: usize,
}

impl RankSample {
    pub fn new(
        query_id: impl Into<String>,
        target_song_id: impl Into<String>,
        rank: usize,
    ) -> Self {
        Self {
            query_id: query_id.into(),
            target_song_id: target_song_id.into(),
            rank,
        }
    }
}

fn check_ranks(samples: &[RankSample]) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::Argument("no rank samples".into()));
    }
    if let Some(s) = samples.iter().find(|s| s.rank == 0) {
        return Err(Error::Argument(format!(
            "query '{}' has rank 0",
            s.query_id
        )));
    }
    Ok(())
}

/// Fraction of queries whose target ranks at `x` or better.
pub fn top_x_hit_rate(samples: &[RankSample], x: usize) -> Result<f64> {
    check_ranks(samples)?;
    let hits = samples.iter().filter(|s| s.rank <= x).count();
    Ok(hits as f64 / samples.len() as f64)
}

/// Mean over queries of `(N - rank) / (N - 1)` for a database of `db_size`
/// songs: 1 when every target ranks first, 0.5 for uniformly random ranks.
pub fn mean_of_accuracy(samples: &[RankSample], db_size: usize) -> Result<f64> {
    check_ranks(samples)?;
    if db_size < 2 {
        return Err(Error::Argument(format!(
            "mean of accuracy needs a database of at least 2 songs, got {db_size}"
        )));
    }
    if let Some(s) = samples.iter().find(|s| s.rank > db_size) {
        return Err(Error::Argument(format!(
            "query '{}' has rank {} in a database of {db_size}",
            s.query_id, s.rank
        )));
    }
    let sum: usize = samples.iter().map(|s| db_size - s.rank).sum();
    Ok(sum as f64 / ((db_size - 1) * samples.len()) as f64)
}

/// Mean of `1 / rank`.
pub fn mean_reciprocal_rank(samples: &[RankSample]) -> Result<f64> {
    check_ranks(samples)?;
    let sum: f64 = samples.iter().map(|s| 1.0 / s.rank as f64).sum();
    Ok(sum / samples.len() as f64)
}
