//! Dataset handling: the sequence text format, dataset descriptors,
//! synthetic generators, trivial baselines, window slicing, and the MPJPE
//! metric.

mod baseline;
mod dataset;
mod descriptor;
mod metrics;
mod synth;
mod textio;
mod window;

pub use baseline::{baseline_constant_velocity, baseline_zero_velocity};
pub use dataset::{Dataset, Split};
pub use descriptor::{DatasetDescriptor, SplitLists};
pub use metrics::mpjpe;
pub use synth::{gen_constant_velocity, gen_sinusoid_chain, generate, GeneratorSpec};
pub use textio::{load_sequence, save_sequence, write_sequence};
pub use window::{split_window, window_starts};

use thiserror::Error;

use crate::repr::ReprError;

#[derive(Debug, Error)]
pub enum DataError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },
    #[error("descriptor: {0}")]
    Descriptor(String),
    #[error("generator spec: {0}")]
    GeneratorSpec(String),
    #[error("horizon {horizon} outside 1..={max}")]
    HorizonOutOfRange { horizon: usize, max: usize },
    #[error("prediction shape {pred:?} does not match ground truth {gt:?}")]
    ShapeMismatch { pred: Vec<usize>, gt: Vec<usize> },
    #[error(transparent)]
    Repr(#[from] ReprError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
