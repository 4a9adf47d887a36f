//! Checkpoint persistence: parameters with optimizer state, the model and
//! loss configuration, normalization statistics, and the seed. A later
//! process can resume training or predict from this alone.
//!
//! Checkpoints are JSON; f64 values are written in shortest round-trip form,
//! so a save/load cycle is bit-exact.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::loss::LossConfig;
use crate::model::ModelConfig;
use crate::numeric::{AdamConfig, ParamStore};
use crate::repr::NormStats;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("unsupported checkpoint format {0}")]
    Format(u32),
}

pub const FORMAT: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: u32,
    pub tool_version: String,
    pub seed: u64,
    pub trained_steps: u64,
    pub trained_epochs: u64,
    pub config: ModelConfig,
    pub adam: AdamConfig,
    pub loss: LossConfig,
    pub stats: NormStats,
    pub ordering: Vec<usize>,
    pub frame_rate: f64,
    pub unit: String,
    pub params: ParamStore,
}

pub fn save(path: &Path, checkpoint: &Checkpoint) -> Result<(), CheckpointError> {
    let file = File::create(path)?;
    serde_json::to_writer(BufWriter::new(file), checkpoint)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Checkpoint, CheckpointError> {
    let file = File::open(path)?;
    let checkpoint: Checkpoint = serde_json::from_reader(BufReader::new(file))?;
    if checkpoint.format != FORMAT {
        return Err(CheckpointError::Format(checkpoint.format));
    }
    Ok(checkpoint)
}
