//! Deep state-space model for human motion prediction.
//!
//! The pipeline takes an observed window of 3-D joint positions, splits it
//! into per-axis position and velocity tensors, encodes those with densely
//! connected convolutional blocks into an initial system state, and then
//! rolls a recursive decoder forward: each step predicts the next velocity,
//! integrates it into a pose, and updates a sparse feature memory. Training
//! minimizes an attention-weighted squared error over both velocities and
//! positions, optimized with Adam on a from-scratch reverse-mode tape.
//!
//! Modules:
//! - [`numeric`]: arrays, tape autodiff, parameter store, Adam.
//! - [`repr`]: motion sequences, per-axis skeletal tensors, normalization.
//! - [`dccm`]: the densely connected convolutional block.
//! - [`encoder`]: state initialization from an observed window.
//! - [`decoder`]: the recursive predictor with sparse feature memory.
//! - [`loss`]: attention-weighted multi-horizon regression loss.
//! - [`data`]: dataset files, synthetic generators, baselines, MPJPE.
//! - [`model`], [`train`], [`checkpoint`]: assembly, optimization loop, and
//!   persistence.

pub mod checkpoint;
pub mod data;
pub mod dccm;
pub mod decoder;
pub mod encoder;
pub mod loss;
pub mod model;
pub mod numeric;
pub mod repr;
pub mod train;

pub use model::{DeepSsm, Integration, ModelConfig};
pub use numeric::{AdamConfig, Array, ParamStore, Tape};
pub use repr::{JointOrdering, MotionSequence, NormStats, SkeletalTensors};
