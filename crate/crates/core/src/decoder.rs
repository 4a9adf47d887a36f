//! Recursive decoder: one step maps the system state to the next velocity
//! observation, integrates it into a pose, and updates the feature memory.
//!
//! The historical feature memory runs through two 3×3 convolutions with
//! rectifiers; the previous velocity is tiled into a single-channel map and
//! embedded with one convolution, so the simpler signal gets the shallower
//! path. The two paths fuse by elementwise summation, a post-fusion
//! convolution produces the step feature `h(t)`, and a fully connected head
//! reads the velocity off it.
//!
//! Memory update: odd steps pass `h(t)` straight through and remember it;
//! even steps concatenate every remembered odd-step feature with
//! `h(t) + h0` and mix them with two 3×3 convolutions. The first of those
//! convolutions is stored as one kernel block per input slot, sized for the
//! maximum horizon fixed at construction; early even steps simply leave the
//! slots of not-yet-produced odd features unused.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoder::SystemState;
use crate::numeric::{Array, BoundParams, NodeId, NumericError, ParamSpec, Tape};

#[derive(Debug, Error)]
pub enum DecoderError {
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error("horizon {requested} exceeds the model maximum {max}")]
    HorizonTooLong { requested: usize, max: usize },
    #[error("memory update at step {step} expected {expected} odd-step features, found {found}")]
    MissingHistory {
        step: usize,
        expected: usize,
        found: usize,
    },
    #[error("step index must be ≥ 1")]
    BadStep,
}

/// How the integrated pose advances from step to step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Integration {
    /// `pose(t) = pose(t−1) + velocity(t)`: the pose moves by the velocity
    /// decoded at this step, matching the first-difference velocity
    /// definition. Default.
    Consistent,
    /// `pose(t) = pose(t−1) + velocity(t−1)`: the lagged-velocity variant
    /// kept for comparison; the first step repeats the last observed pose.
    PaperLiteral,
}

#[derive(Clone, Copy, Debug)]
pub struct DecoderConfig {
    pub channels: usize,
    pub joints: usize,
    /// Width of the feature maps (the observed-window length).
    pub frames: usize,
    /// Largest horizon a rollout may request; fixes the memory kernel size.
    pub max_horizon: usize,
    pub slope: f64,
    pub integration: Integration,
}

impl DecoderConfig {
    /// Input slots of the first memory convolution: one per odd step that can
    /// exist below the maximum horizon, plus one for the fused current step.
    pub fn memory_slots(&self) -> usize {
        self.max_horizon.div_ceil(2) + 1
    }
}

fn conv_spec(specs: &mut Vec<ParamSpec>, name: &str, n: usize, in_c: usize, fan_in: usize) {
    specs.push(ParamSpec::new(
        format!("dec.{name}.kernel"),
        vec![n, in_c, 3, 3],
        fan_in,
    ));
    specs.push(ParamSpec::new(format!("dec.{name}.bias"), vec![n], fan_in));
}

pub fn param_specs(cfg: &DecoderConfig) -> Vec<ParamSpec> {
    let n = cfg.channels;
    let mut specs = Vec::new();
    conv_spec(&mut specs, "hist0", n, n, n * 9);
    conv_spec(&mut specs, "hist1", n, n, n * 9);
    conv_spec(&mut specs, "vel", n, 1, 9);
    conv_spec(&mut specs, "post", n, n, n * 9);

    let head_in = n * cfg.joints * cfg.frames;
    let head_out = cfg.joints * 3;
    specs.push(ParamSpec::new(
        "dec.head.weight",
        vec![head_out, head_in],
        head_in,
    ));
    specs.push(ParamSpec::new("dec.head.bias", vec![head_out], head_in));

    // the sliced maximal kernel of the first memory convolution, one block
    // per input slot
    let slots = cfg.memory_slots();
    let mem_fan = slots * n * 9;
    for k in 0..slots {
        specs.push(ParamSpec::new(
            format!("dec.mem.block{k}.kernel"),
            vec![n, n, 3, 3],
            mem_fan,
        ));
    }
    specs.push(ParamSpec::new("dec.mem.bias", vec![n], mem_fan));
    conv_spec(&mut specs, "mem.out", n, n, n * 9);
    specs
}

/// One state-to-observation transition: returns the step feature `h(t)` and
/// the decoded velocity.
pub fn decode_step(
    tape: &mut Tape,
    bp: &BoundParams,
    state: &SystemState,
    t: usize,
    cfg: &DecoderConfig,
) -> Result<(NodeId, NodeId), DecoderError> {
    if t == 0 {
        return Err(DecoderError::BadStep);
    }
    let conv = |tape: &mut Tape, name: &str, input: NodeId| -> Result<NodeId, NumericError> {
        let kernel = bp.get(&format!("dec.{name}.kernel"))?;
        let bias = bp.get(&format!("dec.{name}.bias"))?;
        tape.conv2d(input, kernel, bias)
    };

    let mut hist = conv(tape, "hist0", state.feature)?;
    hist = tape.leaky_relu(hist, cfg.slope)?;
    hist = conv(tape, "hist1", hist)?;
    hist = tape.leaky_relu(hist, cfg.slope)?;

    let vmap = tape.tile_frames(state.vel_prev, cfg.frames)?;
    let vproj = conv(tape, "vel", vmap)?;

    let fused = tape.add(hist, vproj)?;
    let h_t = conv(tape, "post", fused)?;

    let weight = bp.get("dec.head.weight")?;
    let bias = bp.get("dec.head.bias")?;
    let flat = tape.fully_connected(h_t, weight, bias)?;
    let v_t = tape.reshape(flat, vec![cfg.joints, 3])?;
    Ok((h_t, v_t))
}

/// What one memory update did, for inspection and tests.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MemoryUpdate {
    /// Odd step: the feature memory is `h(t)` itself.
    Passthrough { step: usize },
    /// Even step: the listed odd-step features were concatenated with
    /// `h(t) + h0` and mixed by the memory convolutions.
    Fused {
        step: usize,
        odd_members: Vec<usize>,
    },
}

/// Advance the feature memory after step `t` produced `h_t`.
pub fn update_memory(
    tape: &mut Tape,
    bp: &BoundParams,
    odd_history: &mut Vec<(usize, NodeId)>,
    h_t: NodeId,
    h0: NodeId,
    t: usize,
    cfg: &DecoderConfig,
) -> Result<(NodeId, MemoryUpdate), DecoderError> {
    if t == 0 {
        return Err(DecoderError::BadStep);
    }
    if t % 2 == 1 {
        odd_history.push((t, h_t));
        return Ok((h_t, MemoryUpdate::Passthrough { step: t }));
    }

    let expected = t / 2;
    if odd_history.len() != expected {
        return Err(DecoderError::MissingHistory {
            step: t,
            expected,
            found: odd_history.len(),
        });
    }

    let fused_current = tape.add(h_t, h0)?;
    let zero_bias = tape.constant(Array::zeros(&[cfg.channels]));
    let slots = cfg.memory_slots();

    // Equivalent to one convolution over the channel concatenation of all
    // members, with the maximal kernel sliced to the present slots: absent
    // odd-step slots contribute nothing.
    let mut acc: Option<NodeId> = None;
    let mut odd_members = Vec::with_capacity(expected);
    for (slot, &(step, node)) in odd_history.iter().enumerate() {
        let kernel = bp.get(&format!("dec.mem.block{slot}.kernel"))?;
        let term = tape.conv2d(node, kernel, zero_bias)?;
        acc = Some(match acc {
            Some(prev) => tape.add(prev, term)?,
            None => term,
        });
        odd_members.push(step);
    }
    let last_kernel = bp.get(&format!("dec.mem.block{}.kernel", slots - 1))?;
    let main_bias = bp.get("dec.mem.bias")?;
    let current_term = tape.conv2d(fused_current, last_kernel, main_bias)?;
    let mixed = match acc {
        Some(prev) => tape.add(prev, current_term)?,
        None => current_term,
    };

    let out_kernel = bp.get("dec.mem.out.kernel")?;
    let out_bias = bp.get("dec.mem.out.bias")?;
    let feature = tape.conv2d(mixed, out_kernel, out_bias)?;
    Ok((feature, MemoryUpdate::Fused { step: t, odd_members }))
}

/// Exact pose advance: previous pose plus a velocity.
pub fn integrate_pose(
    tape: &mut Tape,
    pose_prev: NodeId,
    velocity: NodeId,
) -> Result<NodeId, NumericError> {
    tape.add(pose_prev, velocity)
}

/// Node handles for one emitted step.
#[derive(Clone, Copy, Debug)]
pub struct StepNodes {
    pub step: usize,
    pub pose: NodeId,
    pub velocity: NodeId,
    /// The intermediate feature `h(t)`.
    pub feature: NodeId,
}

/// One predicted pose and velocity, (J, 3) each.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub pose: Array,
    pub velocity: Array,
}

pub struct Rollout {
    pub steps: Vec<StepNodes>,
    pub schedule: Vec<MemoryUpdate>,
    pub final_state: SystemState,
}

impl Rollout {
    pub fn observations(&self, tape: &Tape) -> Vec<Observation> {
        self.steps
            .iter()
            .map(|s| Observation {
                pose: tape.value(s.pose).clone(),
                velocity: tape.value(s.velocity).clone(),
            })
            .collect()
    }
}

/// Run the decoder for `horizon` steps from an initial state.
pub fn rollout(
    tape: &mut Tape,
    bp: &BoundParams,
    mut state: SystemState,
    horizon: usize,
    cfg: &DecoderConfig,
) -> Result<Rollout, DecoderError> {
    if horizon == 0 {
        return Err(DecoderError::BadStep);
    }
    if horizon > cfg.max_horizon {
        return Err(DecoderError::HorizonTooLong {
            requested: horizon,
            max: cfg.max_horizon,
        });
    }
    let mut steps = Vec::with_capacity(horizon);
    let mut schedule = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        let (h_t, v_t) = decode_step(tape, bp, &state, t, cfg)?;
        let pose = match cfg.integration {
            Integration::Consistent => integrate_pose(tape, state.pose_prev, v_t)?,
            Integration::PaperLiteral => integrate_pose(tape, state.pose_prev, state.vel_prev)?,
        };
        let (feature, update) =
            update_memory(tape, bp, &mut state.odd_history, h_t, state.h0, t, cfg)?;
        schedule.push(update);
        steps.push(StepNodes {
            step: t,
            pose,
            velocity: v_t,
            feature: h_t,
        });
        state.pose_prev = pose;
        state.vel_prev = v_t;
        state.feature = feature;
    }
    Ok(Rollout {
        steps,
        schedule,
        final_state: state,
    })
}
