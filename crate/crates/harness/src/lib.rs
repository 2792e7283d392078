//! Experiment harness: human judgment ingestion and scoring, posterior
//! tables, model-human correlation with bootstrap intervals, grid-search
//! fitting, sensitivity tables and synthetic participant cohorts.

pub mod fit;
pub mod judgments;
pub mod stats;
pub mod synth;
pub mod table;

use std::path::PathBuf;

use btom::inference::InferenceError;
use btom::stimulus::StimulusError;
use thiserror::Error;

/// (stimulus id, judgment point, goal label)
pub type Key = (String, usize, String);

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("unknown stimulus `{0}`")]
    UnknownStimulus(String),
    #[error("stimulus `{stimulus}` has no judgment point {point}")]
    UnknownPoint { stimulus: String, point: usize },
    #[error("stimulus `{stimulus}` has no goal `{goal}`")]
    UnknownGoal { stimulus: String, goal: String },
    #[error("empty selection for {stimulus} at point {point}")]
    EmptySelection { stimulus: String, point: usize },
    #[error("probabilities for {stimulus} at point {point} ({source_name}) sum to {sum}")]
    Unnormalised {
        stimulus: String,
        point: usize,
        source_name: String,
        sum: f64,
    },
    #[error("model table has no entry for {0:?}")]
    MissingEntry(Key),
    #[error("correlation needs at least 3 paired values, got {0}")]
    TooShort(usize),
    #[error("vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("correlation is undefined: one input has zero variance")]
    ZeroVariance,
    #[error("bootstrap needs at least 3 participants, got {0}")]
    TooFewParticipants(usize),
    #[error("parameter grid has no cells for {0}")]
    EmptyGrid(String),
    #[error("{0}")]
    Synthesis(String),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error(transparent)]
    Stimulus(#[from] StimulusError),
}

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}
