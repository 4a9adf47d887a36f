//! Full model assembly: configuration, parameter construction, and the
//! window-level forward passes used by training and prediction.
//!
//! The model operates in a standardized coordinate space: windows are
//! normalized with statistics fitted on training data, the decoder rolls out
//! in that space, and predictions are mapped back to data units on the way
//! out.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decoder::{self, DecoderConfig, DecoderError, Observation, Rollout};
use crate::encoder::{self, EncoderConfig, EncoderError};
use crate::loss::{self, LossConfig, LossError, LossNodes};
use crate::numeric::{
    build_store, build_zero_store, Array, BoundParams, NumericError, ParamSpec, ParamStore, Tape,
};
use crate::repr::{self, JointOrdering, MotionSequence, NormStats, ReprError};

pub use crate::decoder::Integration;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Encoder(#[from] EncoderError),
    #[error(transparent)]
    Decoder(#[from] DecoderError),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Repr(#[from] ReprError),
}

/// Everything that fixes the network's shape and wiring.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub joints: usize,
    /// Observed window length T₁.
    pub input_frames: usize,
    /// Largest prediction horizon T₂ the decoder supports.
    pub max_horizon: usize,
    /// Feature channel width N.
    pub channels: usize,
    pub leaky_slope: f64,
    /// Encode each coordinate axis separately through shared sub-branches.
    pub xyz_split: bool,
    pub pose_branch: bool,
    pub velocity_branch: bool,
    /// Start the rollout from the last observed frame difference instead of
    /// the zero velocity.
    pub use_observed_v0: bool,
    pub integration: Integration,
}

impl ModelConfig {
    /// Defaults for a desk-scale run: 10 observed frames, 25-step horizon,
    /// 32 channels, both branches with the coordinate split, zero initial
    /// velocity, consistent integration.
    pub fn new(joints: usize) -> Self {
        ModelConfig {
            joints,
            input_frames: 10,
            max_horizon: 25,
            channels: 32,
            leaky_slope: 0.2,
            xyz_split: true,
            pose_branch: true,
            velocity_branch: true,
            use_observed_v0: false,
            integration: Integration::Consistent,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.joints == 0 {
            return Err(ModelError::Config("joints must be ≥ 1".into()));
        }
        if self.input_frames == 0 {
            return Err(ModelError::Config("input_frames must be ≥ 1".into()));
        }
        if self.max_horizon == 0 {
            return Err(ModelError::Config("max_horizon must be ≥ 1".into()));
        }
        if self.channels == 0 {
            return Err(ModelError::Config("channels must be ≥ 1".into()));
        }
        if !(self.leaky_slope > 0.0 && self.leaky_slope < 1.0) {
            return Err(ModelError::Config("leaky_slope must lie in (0, 1)".into()));
        }
        if !self.pose_branch && !self.velocity_branch {
            return Err(ModelError::Config(
                "at least one of the pose and velocity branches must stay enabled".into(),
            ));
        }
        Ok(())
    }

    pub fn encoder(&self) -> EncoderConfig {
        EncoderConfig {
            channels: self.channels,
            slope: self.leaky_slope,
            xyz_split: self.xyz_split,
            pose_branch: self.pose_branch,
            velocity_branch: self.velocity_branch,
        }
    }

    pub fn decoder(&self) -> DecoderConfig {
        DecoderConfig {
            channels: self.channels,
            joints: self.joints,
            frames: self.input_frames,
            max_horizon: self.max_horizon,
            slope: self.leaky_slope,
            integration: self.integration,
        }
    }

    pub fn param_specs(&self) -> Result<Vec<ParamSpec>, ModelError> {
        self.validate()?;
        let mut specs = encoder::param_specs(&self.encoder())?;
        specs.extend(decoder::param_specs(&self.decoder()));
        Ok(specs)
    }
}

/// A configured network with its parameters.
pub struct DeepSsm {
    pub config: ModelConfig,
    pub params: ParamStore,
}

impl DeepSsm {
    /// Seeded uniform initialization.
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self, ModelError> {
        let specs = config.param_specs()?;
        Ok(DeepSsm {
            params: build_store(&specs, seed)?,
            config,
        })
    }

    /// All-zero parameters; the decoder then emits exactly its head bias.
    pub fn zeroed(config: ModelConfig) -> Result<Self, ModelError> {
        let specs = config.param_specs()?;
        Ok(DeepSsm {
            params: build_zero_store(&specs)?,
            config,
        })
    }

    /// Build the forward graph for one normalized input window and roll the
    /// decoder out to `horizon`.
    pub fn forward_window(
        &self,
        tape: &mut Tape,
        bp: &BoundParams,
        input_norm: &MotionSequence,
        ordering: &JointOrdering,
        horizon: usize,
    ) -> Result<Rollout, ModelError> {
        if input_norm.frames() != self.config.input_frames {
            return Err(ModelError::Config(format!(
                "window has {} frames, model expects {}",
                input_norm.frames(),
                self.config.input_frames
            )));
        }
        let state = encoder::init_state(
            tape,
            bp,
            input_norm,
            ordering,
            &self.config.encoder(),
            self.config.use_observed_v0,
        )?;
        Ok(decoder::rollout(
            tape,
            bp,
            state,
            horizon,
            &self.config.decoder(),
        )?)
    }

    /// Forward pass plus the combined loss against a raw target window.
    /// Input and target are normalized with `stats`; the returned nodes live
    /// on `tape`.
    #[allow(clippy::too_many_arguments)]
    pub fn window_loss_graph(
        &self,
        tape: &mut Tape,
        bp: &BoundParams,
        input_raw: &MotionSequence,
        target_raw: &MotionSequence,
        stats: &NormStats,
        ordering: &JointOrdering,
        loss_cfg: &LossConfig,
    ) -> Result<LossNodes, ModelError> {
        let input = repr::normalize(input_raw, stats);
        let target = repr::normalize(target_raw, stats);
        let rollout = self.forward_window(tape, bp, &input, ordering, target.frames())?;
        let anchor = input.last_pose_array();
        let poses: Vec<_> = rollout.steps.iter().map(|s| s.pose).collect();
        let velocities: Vec<_> = rollout.steps.iter().map(|s| s.velocity).collect();
        Ok(loss::total_loss_graph(
            tape,
            &poses,
            &velocities,
            &target,
            &anchor,
            loss_cfg,
        )?)
    }

    /// Predict `horizon` future observations from the last observed window
    /// of a raw sequence, in the sequence's own units.
    pub fn predict(
        &self,
        input_raw: &MotionSequence,
        horizon: usize,
        stats: &NormStats,
        ordering: &JointOrdering,
    ) -> Result<Vec<Observation>, ModelError> {
        let t1 = self.config.input_frames;
        if input_raw.frames() < t1 {
            return Err(ModelError::Config(format!(
                "input has {} frames, model needs at least {t1}",
                input_raw.frames()
            )));
        }
        let window = input_raw.window(input_raw.frames() - t1, t1);
        let input = repr::normalize(&window, stats);
        let mut tape = Tape::new();
        let bp = BoundParams::bind(&mut tape, &self.params);
        let rollout = self.forward_window(&mut tape, &bp, &input, ordering, horizon)?;
        Ok(rollout
            .observations(&tape)
            .into_iter()
            .map(|o| Observation {
                pose: repr::denormalize_pose(&o.pose, stats),
                velocity: repr::denormalize_velocity(&o.velocity, stats),
            })
            .collect())
    }

    /// Stack predicted poses as a (horizon, J, 3) array for metrics.
    pub fn predict_poses(
        &self,
        input_raw: &MotionSequence,
        horizon: usize,
        stats: &NormStats,
        ordering: &JointOrdering,
    ) -> Result<Array, ModelError> {
        let obs = self.predict(input_raw, horizon, stats, ordering)?;
        let joints = self.config.joints;
        let mut data = Vec::with_capacity(horizon * joints * 3);
        for o in &obs {
            data.extend_from_slice(o.pose.data());
        }
        Ok(Array::new(vec![horizon, joints, 3], data)?)
    }
}
