//! Retrieval evaluation: query excerpts, experiment sweeps, metrics, and a
//! synthetic corpus to run them on.

mod excerpt;
mod experiment;
mod metrics;
pub mod synth;

pub use excerpt::{excerpt_len, make_excerpt, ExcerptMode};
pub use experiment::{run_experiment, CellReport, EvalReport, Grid, Query, CSV_HEADER};
pub use metrics::{mean_of_accuracy, mean_reciprocal_rank, top_x_hit_rate, RankSample};
