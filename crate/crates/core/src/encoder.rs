//! State initialization: encode an observed window into the initial system
//! state.
//!
//! The pose branch runs each per-axis position tensor through a shared
//! two-block stack (the three axes reuse the same parameter nodes, so the
//! sharing is structural), concatenates the three coordinate-level maps, and
//! fuses them with one joint-level block. The velocity branch mirrors this on
//! the velocity tensors. Branch outputs are concatenated on channels and
//! mixed by a 3×3 convolution plus leaky rectifier into the initial feature
//! map `h0`, which seeds the decoder's feature memory.
//!
//! With the coordinate split disabled, each branch instead consumes one
//! 3-channel map whose channels are the x/y/z tensors. Either branch can be
//! dropped for ablation, but not both.

use thiserror::Error;

use crate::dccm::{self, DccmConfig};
use crate::numeric::{Array, BoundParams, NodeId, NumericError, ParamSpec, Tape};
use crate::repr::{self, JointOrdering, MotionSequence, ReprError, SkeletalTensors};

#[derive(Debug, Error)]
pub enum EncoderError {
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Repr(#[from] ReprError),
    #[error("at least one of the pose and velocity branches must be enabled")]
    NoBranches,
}

/// Encoder layout switches.
#[derive(Clone, Copy, Debug)]
pub struct EncoderConfig {
    pub channels: usize,
    pub slope: f64,
    /// Feed each coordinate axis through the shared sub-branch separately.
    pub xyz_split: bool,
    pub pose_branch: bool,
    pub velocity_branch: bool,
}

impl EncoderConfig {
    fn dccm(&self) -> DccmConfig {
        DccmConfig {
            channels: self.channels,
            slope: self.slope,
        }
    }

    fn branch_count(&self) -> usize {
        usize::from(self.pose_branch) + usize::from(self.velocity_branch)
    }
}

/// System state threaded through the decoder: the previous observation, the
/// feature memory, the odd-step feature history, and the initial features.
pub struct SystemState {
    /// Previous predicted pose, (J, 3).
    pub pose_prev: NodeId,
    /// Previous predicted velocity, (J, 3).
    pub vel_prev: NodeId,
    /// Feature memory from the previous step.
    pub feature: NodeId,
    /// Intermediate decoder features kept from odd steps, with their step
    /// index.
    pub odd_history: Vec<(usize, NodeId)>,
    /// Encoder output that seeds the memory.
    pub h0: NodeId,
}

pub fn param_specs(cfg: &EncoderConfig) -> Result<Vec<ParamSpec>, EncoderError> {
    if cfg.branch_count() == 0 {
        return Err(EncoderError::NoBranches);
    }
    let n = cfg.channels;
    let block = cfg.dccm();
    let sub_in = if cfg.xyz_split { 1 } else { 3 };
    let joint_in = if cfg.xyz_split { 3 * n } else { n };
    let mut specs = Vec::new();
    for branch in ["pose", "vel"] {
        let enabled = match branch {
            "pose" => cfg.pose_branch,
            _ => cfg.velocity_branch,
        };
        if !enabled {
            continue;
        }
        specs.extend(dccm::param_specs(&format!("enc.{branch}.sub0"), sub_in, &block));
        specs.extend(dccm::param_specs(&format!("enc.{branch}.sub1"), n, &block));
        specs.extend(dccm::param_specs(
            &format!("enc.{branch}.joint"),
            joint_in,
            &block,
        ));
    }
    let fuse_in = cfg.branch_count() * n;
    specs.push(ParamSpec::new(
        "enc.fuse.kernel",
        vec![n, fuse_in, 3, 3],
        fuse_in * 9,
    ));
    specs.push(ParamSpec::new("enc.fuse.bias", vec![n], fuse_in * 9));
    Ok(specs)
}

fn axis_map(tape: &mut Tape, tensor: &Array) -> Result<NodeId, NumericError> {
    let (j, t) = tensor.dims2()?;
    let id = tape.constant(tensor.reshaped(vec![1, j, t])?);
    Ok(id)
}

fn run_branch(
    tape: &mut Tape,
    bp: &BoundParams,
    prefix: &str,
    tensors: &[Array; 3],
    cfg: &EncoderConfig,
) -> Result<NodeId, NumericError> {
    let block = cfg.dccm();
    let coordinate_maps: Vec<NodeId> = if cfg.xyz_split {
        let mut maps = Vec::with_capacity(3);
        for tensor in tensors {
            let mut x = axis_map(tape, tensor)?;
            x = dccm::forward(tape, bp, &format!("{prefix}.sub0"), x, &block)?;
            x = dccm::forward(tape, bp, &format!("{prefix}.sub1"), x, &block)?;
            maps.push(x);
        }
        maps
    } else {
        let (j, t) = tensors[0].dims2()?;
        let mut data = Vec::with_capacity(3 * j * t);
        for tensor in tensors {
            data.extend_from_slice(tensor.data());
        }
        let stacked = tape.constant(Array::new(vec![3, j, t], data)?);
        let mut x = dccm::forward(tape, bp, &format!("{prefix}.sub0"), stacked, &block)?;
        x = dccm::forward(tape, bp, &format!("{prefix}.sub1"), x, &block)?;
        vec![x]
    };
    let joint_in = if coordinate_maps.len() == 1 {
        coordinate_maps[0]
    } else {
        tape.concat_channels(&coordinate_maps)?
    };
    dccm::forward(tape, bp, &format!("{prefix}.joint"), joint_in, &block)
}

/// Encode the six skeletal tensors into the initial feature map `h0`.
pub fn encode(
    tape: &mut Tape,
    bp: &BoundParams,
    tensors: &SkeletalTensors,
    cfg: &EncoderConfig,
) -> Result<NodeId, EncoderError> {
    if cfg.branch_count() == 0 {
        return Err(EncoderError::NoBranches);
    }
    let mut branch_outputs = Vec::with_capacity(2);
    if cfg.pose_branch {
        branch_outputs.push(run_branch(tape, bp, "enc.pose", &tensors.positions, cfg)?);
    }
    if cfg.velocity_branch {
        branch_outputs.push(run_branch(tape, bp, "enc.vel", &tensors.velocities, cfg)?);
    }
    let cat = tape.concat_channels(&branch_outputs)?;
    let kernel = bp.get("enc.fuse.kernel")?;
    let bias = bp.get("enc.fuse.bias")?;
    let fused = tape.conv2d(cat, kernel, bias)?;
    Ok(tape.leaky_relu(fused, cfg.slope)?)
}

/// Build the initial system state from an observed window.
///
/// The previous pose is the window's last frame; the previous velocity is the
/// zero vector unless `use_observed_v0` asks for the last observed frame
/// difference; the feature memory starts at `h0`.
pub fn init_state(
    tape: &mut Tape,
    bp: &BoundParams,
    window: &MotionSequence,
    ordering: &JointOrdering,
    cfg: &EncoderConfig,
    use_observed_v0: bool,
) -> Result<SystemState, EncoderError> {
    let tensors = repr::build_skeletal_representation(window, ordering)?;
    let h0 = encode(tape, bp, &tensors, cfg)?;
    let pose_prev = tape.constant(window.last_pose_array());
    let joints = window.joints();
    let v0 = if use_observed_v0 && window.frames() >= 2 {
        let t = window.frames() - 1;
        let mut data = Vec::with_capacity(joints * 3);
        for j in 0..joints {
            for a in 0..3 {
                data.push(window.at(t, j, a) - window.at(t - 1, j, a));
            }
        }
        Array::new(vec![joints, 3], data)?
    } else {
        Array::zeros(&[joints, 3])
    };
    let vel_prev = tape.constant(v0);
    Ok(SystemState {
        pose_prev,
        vel_prev,
        feature: h0,
        odd_history: Vec::new(),
        h0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{build_store, build_zero_store, BoundParams};

    fn cfg() -> EncoderConfig {
        EncoderConfig {
            channels: 3,
            slope: 0.2,
            xyz_split: true,
            pose_branch: true,
            velocity_branch: true,
        }
    }

    fn random_window(joints: usize, frames: usize, seed: u64) -> MotionSequence {
        let mut rng = crate::numeric::rng_for(seed, "encoder.window");
        let data = (0..frames * joints * 3)
            .map(|_| crate::numeric::unit_f64(&mut rng) * 2.0 - 1.0)
            .collect();
        MotionSequence::new(joints, 25.0, "mm", data).unwrap()
    }

    #[test]
    fn h0_spatial_extents_follow_input() {
        for &(j, t) in &[(2usize, 4usize), (5, 10), (3, 7)] {
            let c = cfg();
            let store = build_store(&param_specs(&c).unwrap(), 3).unwrap();
            let window = random_window(j, t, 17 + j as u64);
            let mut tape = Tape::new();
            let bp = BoundParams::bind(&mut tape, &store);
            let state = init_state(
                &mut tape,
                &bp,
                &window,
                &JointOrdering::identity(j),
                &c,
                false,
            )
            .unwrap();
            assert_eq!(tape.value(state.h0).shape(), &[3, j, t]);
            assert_eq!(tape.value(state.pose_prev).shape(), &[j, 3]);
            assert_eq!(tape.value(state.vel_prev).shape(), &[j, 3]);
            assert!(state.odd_history.is_empty());
        }
    }

    #[test]
    fn init_state_uses_last_pose_and_zero_velocity() {
        let c = cfg();
        let store = build_store(&param_specs(&c).unwrap(), 3).unwrap();
        let pose = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let window = MotionSequence::new(2, 25.0, "mm", pose.repeat(4)).unwrap();
        let mut tape = Tape::new();
        let bp = BoundParams::bind(&mut tape, &store);
        let state = init_state(
            &mut tape,
            &bp,
            &window,
            &JointOrdering::identity(2),
            &c,
            false,
        )
        .unwrap();
        assert_eq!(tape.value(state.pose_prev).data(), &pose);
        assert!(tape.value(state.vel_prev).data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn observed_v0_takes_last_difference() {
        let c = cfg();
        let store = build_store(&param_specs(&c).unwrap(), 3).unwrap();
        let window =
            MotionSequence::new(1, 25.0, "mm", vec![0.0, 0.0, 0.0, 2.0, -1.0, 0.5]).unwrap();
        let mut tape = Tape::new();
        let bp = BoundParams::bind(&mut tape, &store);
        let state = init_state(
            &mut tape,
            &bp,
            &window,
            &JointOrdering::identity(1),
            &c,
            true,
        )
        .unwrap();
        assert_eq!(tape.value(state.vel_prev).data(), &[2.0, -1.0, 0.5]);
    }

    #[test]
    fn zero_input_with_zero_parameters_gives_zero_h0() {
        let c = cfg();
        let store = build_zero_store(&param_specs(&c).unwrap()).unwrap();
        let window = MotionSequence::new(2, 25.0, "mm", vec![0.0; 2 * 3 * 5]).unwrap();
        let tensors =
            repr::build_skeletal_representation(&window, &JointOrdering::identity(2)).unwrap();
        let mut tape = Tape::new();
        let bp = BoundParams::bind(&mut tape, &store);
        let h0 = encode(&mut tape, &bp, &tensors, &c).unwrap();
        assert!(tape.value(h0).data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sub_branches_share_weights_structurally() {
        // swapping two coordinate tensors permutes the coordinate-level maps
        // identically, so the concatenation blocks swap but keep their values
        let c = EncoderConfig {
            velocity_branch: false,
            ..cfg()
        };
        let store = build_store(&param_specs(&c).unwrap(), 23).unwrap();
        let window = random_window(2, 5, 31);
        let ordering = JointOrdering::identity(2);
        let tensors = repr::build_skeletal_representation(&window, &ordering).unwrap();

        let branch_maps = |t: &SkeletalTensors| {
            let mut tape = Tape::new();
            let bp = BoundParams::bind(&mut tape, &store);
            let block = DccmConfig {
                channels: c.channels,
                slope: c.slope,
            };
            let mut maps = Vec::new();
            for tensor in &t.positions {
                let mut x = axis_map(&mut tape, tensor).unwrap();
                x = dccm::forward(&mut tape, &bp, "enc.pose.sub0", x, &block).unwrap();
                x = dccm::forward(&mut tape, &bp, "enc.pose.sub1", x, &block).unwrap();
                maps.push(tape.value(x).clone());
            }
            maps
        };

        let base = branch_maps(&tensors);
        let mut swapped = tensors.clone();
        swapped.positions.swap(0, 2);
        let permuted = branch_maps(&swapped);
        assert_eq!(base[0], permuted[2]);
        assert_eq!(base[2], permuted[0]);
        assert_eq!(base[1], permuted[1]);
    }

    #[test]
    fn both_branches_disabled_is_rejected() {
        let c = EncoderConfig {
            pose_branch: false,
            velocity_branch: false,
            ..cfg()
        };
        assert!(matches!(param_specs(&c), Err(EncoderError::NoBranches)));
    }

    #[test]
    fn encode_is_deterministic() {
        let c = cfg();
        let store = build_store(&param_specs(&c).unwrap(), 3).unwrap();
        let window = random_window(3, 6, 41);
        let run = || {
            let mut tape = Tape::new();
            let bp = BoundParams::bind(&mut tape, &store);
            let state = init_state(
                &mut tape,
                &bp,
                &window,
                &JointOrdering::identity(3),
                &c,
                false,
            )
            .unwrap();
            tape.value(state.h0).clone()
        };
        assert_eq!(run(), run());
    }
}
