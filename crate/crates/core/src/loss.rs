//! Attention-weighted multi-horizon regression loss.
//!
//! Per-step weights start at `2(T₂ − t + 1)` and are normalized to sum to
//! one, so early steps weigh more and the weights strictly decrease. The
//! weighted squared joint error is computed once over velocities and once
//! over positions, combined as `λ₁·L_v + λ₂·L_p`. Disabling the
//! attention profile replaces the weights with the uniform `1/T₂`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decoder::Observation;
use crate::numeric::{Array, NodeId, NumericError, Tape};
use crate::repr::MotionSequence;

#[derive(Debug, Error)]
pub enum LossError {
    #[error("horizon must be ≥ 1")]
    EmptyHorizon,
    #[error("prediction horizon {pred} does not match ground truth {gt}")]
    HorizonMismatch { pred: usize, gt: usize },
    #[error("prediction shape {pred:?} does not match ground truth {gt:?}")]
    ShapeMismatch { pred: Vec<usize>, gt: Vec<usize> },
    #[error("weights cover {weights} steps, arrays have {steps}")]
    WeightsLength { weights: usize, steps: usize },
    #[error("at least one of λ₁ and λ₂ must be positive")]
    ZeroLambdas,
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// Normalized per-step weights: strictly decreasing, positive, summing to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct AtplWeights {
    values: Vec<f64>,
}

impl AtplWeights {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Decreasing attention weights for a horizon: `α_t ∝ 2(T₂ − t + 1)`,
/// normalized to sum to one.
pub fn atpl_weights(horizon: usize) -> Result<AtplWeights, LossError> {
    if horizon == 0 {
        return Err(LossError::EmptyHorizon);
    }
    let raw: Vec<f64> = (1..=horizon)
        .map(|t| 2.0 * (horizon - t + 1) as f64)
        .collect();
    let sum: f64 = raw.iter().sum();
    Ok(AtplWeights {
        values: raw.into_iter().map(|w| w / sum).collect(),
    })
}

/// Uniform weights `1/T₂`, used when the attention profile is disabled.
pub fn uniform_weights(horizon: usize) -> Result<AtplWeights, LossError> {
    if horizon == 0 {
        return Err(LossError::EmptyHorizon);
    }
    Ok(AtplWeights {
        values: vec![1.0 / horizon as f64; horizon],
    })
}

/// Weighted squared error over (T₂, J, 3) stacks:
/// `(1/J) Σ_t α_t Σ_j ‖pred_j(t) − gt_j(t)‖²`.
pub fn atpl(pred: &Array, gt: &Array, weights: &AtplWeights) -> Result<f64, LossError> {
    if pred.shape() != gt.shape() {
        return Err(LossError::ShapeMismatch {
            pred: pred.shape().to_vec(),
            gt: gt.shape().to_vec(),
        });
    }
    let shape = pred.shape();
    if shape.len() != 3 || shape[2] != 3 {
        return Err(LossError::ShapeMismatch {
            pred: shape.to_vec(),
            gt: gt.shape().to_vec(),
        });
    }
    let (steps, joints) = (shape[0], shape[1]);
    if weights.len() != steps {
        return Err(LossError::WeightsLength {
            weights: weights.len(),
            steps,
        });
    }
    let stride = joints * 3;
    let mut total = 0.0;
    for (t, &w) in weights.values().iter().enumerate() {
        let p = &pred.data()[t * stride..(t + 1) * stride];
        let g = &gt.data()[t * stride..(t + 1) * stride];
        let mut step_sq = 0.0;
        for (pv, gv) in p.iter().zip(g) {
            let d = pv - gv;
            step_sq += d * d;
        }
        total += w * step_sq;
    }
    Ok(total * (1.0 / joints as f64))
}

/// Loss term mix. The attention flag swaps the decreasing weights for the
/// uniform profile.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LossConfig {
    pub lambda_velocity: f64,
    pub lambda_position: f64,
    pub atpl_enabled: bool,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            lambda_velocity: 3.0,
            lambda_position: 1.0,
            atpl_enabled: true,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<(), LossError> {
        if self.lambda_velocity < 0.0 || self.lambda_position < 0.0 {
            return Err(LossError::ZeroLambdas);
        }
        if self.lambda_velocity + self.lambda_position <= 0.0 {
            return Err(LossError::ZeroLambdas);
        }
        Ok(())
    }

    pub fn weights(&self, horizon: usize) -> Result<AtplWeights, LossError> {
        if self.atpl_enabled {
            atpl_weights(horizon)
        } else {
            uniform_weights(horizon)
        }
    }
}

/// Velocity, position, and combined loss values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossBreakdown {
    pub total: f64,
    pub velocity: f64,
    pub position: f64,
}

/// Ground-truth velocities by first differences, anchored at the last
/// observed pose.
fn target_velocities(gt_future: &MotionSequence, anchor: &Array) -> Vec<Array> {
    let mut out = Vec::with_capacity(gt_future.frames());
    let mut prev = anchor.clone();
    for t in 0..gt_future.frames() {
        let pose = gt_future.pose_array(t);
        let vel = crate::numeric::ops::sub(&pose, &prev).expect("pose shapes match");
        out.push(vel);
        prev = pose;
    }
    out
}

fn stack_steps(arrays: &[Array]) -> Array {
    let (j, _) = arrays[0].dims2().expect("per-step arrays are (J, 3)");
    let mut data = Vec::with_capacity(arrays.len() * j * 3);
    for a in arrays {
        data.extend_from_slice(a.data());
    }
    Array::new(vec![arrays.len(), j, 3], data).expect("stacked steps are (T, J, 3)")
}

/// Combined loss over a rollout's observations.
///
/// `anchor` is the last observed pose; it anchors the first ground-truth
/// velocity so both loss terms target the same trajectory.
pub fn total_loss(
    observations: &[Observation],
    gt_future: &MotionSequence,
    anchor: &Array,
    cfg: &LossConfig,
) -> Result<LossBreakdown, LossError> {
    cfg.validate()?;
    let horizon = observations.len();
    if horizon == 0 {
        return Err(LossError::EmptyHorizon);
    }
    if gt_future.frames() != horizon {
        return Err(LossError::HorizonMismatch {
            pred: horizon,
            gt: gt_future.frames(),
        });
    }
    let weights = cfg.weights(horizon)?;

    let pred_poses: Vec<Array> = observations.iter().map(|o| o.pose.clone()).collect();
    let pred_vels: Vec<Array> = observations.iter().map(|o| o.velocity.clone()).collect();
    let gt_poses: Vec<Array> = (0..horizon).map(|t| gt_future.pose_array(t)).collect();
    let gt_vels = target_velocities(gt_future, anchor);

    let velocity = atpl(&stack_steps(&pred_vels), &stack_steps(&gt_vels), &weights)?;
    let position = atpl(&stack_steps(&pred_poses), &stack_steps(&gt_poses), &weights)?;
    Ok(LossBreakdown {
        total: cfg.lambda_velocity * velocity + cfg.lambda_position * position,
        velocity,
        position,
    })
}

/// Node handles for the loss terms of one sample or batch.
#[derive(Clone, Copy, Debug)]
pub struct LossNodes {
    pub total: NodeId,
    pub velocity: NodeId,
    pub position: NodeId,
}

fn atpl_graph(
    tape: &mut Tape,
    preds: &[NodeId],
    targets: &[Array],
    weights: &AtplWeights,
    joints: usize,
) -> Result<NodeId, LossError> {
    if preds.len() != targets.len() {
        return Err(LossError::HorizonMismatch {
            pred: preds.len(),
            gt: targets.len(),
        });
    }
    if weights.len() != preds.len() {
        return Err(LossError::WeightsLength {
            weights: weights.len(),
            steps: preds.len(),
        });
    }
    let mut total: Option<NodeId> = None;
    for ((&pred, target), &w) in preds.iter().zip(targets).zip(weights.values()) {
        let gt = tape.constant(target.clone());
        let diff = tape.sub(pred, gt)?;
        let sq = tape.sum_squares(diff);
        let term = tape.scale(sq, w);
        total = Some(match total {
            Some(acc) => tape.add(acc, term)?,
            None => term,
        });
    }
    let total = total.ok_or(LossError::EmptyHorizon)?;
    Ok(tape.scale(total, 1.0 / joints as f64))
}

/// Graph form of [`total_loss`] over per-step pose and velocity nodes.
/// Produces the same values as the plain form on identical inputs.
pub fn total_loss_graph(
    tape: &mut Tape,
    pose_nodes: &[NodeId],
    velocity_nodes: &[NodeId],
    gt_future: &MotionSequence,
    anchor: &Array,
    cfg: &LossConfig,
) -> Result<LossNodes, LossError> {
    cfg.validate()?;
    let horizon = pose_nodes.len();
    if horizon == 0 {
        return Err(LossError::EmptyHorizon);
    }
    if gt_future.frames() != horizon || velocity_nodes.len() != horizon {
        return Err(LossError::HorizonMismatch {
            pred: horizon,
            gt: gt_future.frames(),
        });
    }
    let weights = cfg.weights(horizon)?;
    let joints = gt_future.joints();
    let gt_poses: Vec<Array> = (0..horizon).map(|t| gt_future.pose_array(t)).collect();
    let gt_vels = target_velocities(gt_future, anchor);

    let velocity = atpl_graph(tape, velocity_nodes, &gt_vels, &weights, joints)?;
    let position = atpl_graph(tape, pose_nodes, &gt_poses, &weights, joints)?;
    let v_term = tape.scale(velocity, cfg.lambda_velocity);
    let p_term = tape.scale(position, cfg.lambda_position);
    let total = tape.add(v_term, p_term)?;
    Ok(LossNodes {
        total,
        velocity,
        position,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_single_step() {
        assert_eq!(atpl_weights(1).unwrap().values(), &[1.0]);
    }

    #[test]
    fn weights_four_steps_exact() {
        // raw 8, 6, 4, 2 normalize to 0.4, 0.3, 0.2, 0.1
        assert_eq!(atpl_weights(4).unwrap().values(), &[0.4, 0.3, 0.2, 0.1]);
    }

    #[test]
    fn weights_decrease_and_sum_to_one() {
        for horizon in 1..=100 {
            let w = atpl_weights(horizon).unwrap();
            for pair in w.values().windows(2) {
                assert!(pair[0] > pair[1], "not decreasing at horizon {horizon}");
            }
            assert!(w.values().iter().all(|&v| v > 0.0));
            let sum: f64 = w.values().iter().sum();
            assert!((sum - 1.0).abs() <= 1e-12, "sum {sum} at horizon {horizon}");
        }
    }

    #[test]
    fn weights_reject_zero_horizon() {
        assert!(matches!(atpl_weights(0), Err(LossError::EmptyHorizon)));
    }

    #[test]
    fn atpl_zero_for_perfect_prediction() {
        let a = Array::new(vec![2, 1, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let w = atpl_weights(2).unwrap();
        assert_eq!(atpl(&a, &a, &w).unwrap(), 0.0);
    }

    #[test]
    fn atpl_hand_evaluated_single_joint() {
        // one joint, one step, error (3, 4, 0): α₁ · 25 = 25
        let pred = Array::new(vec![1, 1, 3], vec![3.0, 4.0, 0.0]).unwrap();
        let gt = Array::zeros(&[1, 1, 3]);
        let w = atpl_weights(1).unwrap();
        assert_eq!(atpl(&pred, &gt, &w).unwrap(), 25.0);
    }

    #[test]
    fn atpl_rejects_shape_mismatch() {
        let a = Array::zeros(&[2, 1, 3]);
        let b = Array::zeros(&[2, 2, 3]);
        let w = atpl_weights(2).unwrap();
        assert!(matches!(
            atpl(&a, &b, &w),
            Err(LossError::ShapeMismatch { .. })
        ));
    }

    fn obs_from(poses: &[Array], vels: &[Array]) -> Vec<Observation> {
        poses
            .iter()
            .zip(vels)
            .map(|(p, v)| Observation {
                pose: p.clone(),
                velocity: v.clone(),
            })
            .collect()
    }

    #[test]
    fn perfect_prediction_gives_zero_total() {
        let gt = MotionSequence::new(1, 25.0, "mm", vec![1.0, 0.0, 0.0, 2.0, 0.0, 0.0]).unwrap();
        let anchor = Array::new(vec![1, 3], vec![0.0, 0.0, 0.0]).unwrap();
        let poses = vec![gt.pose_array(0), gt.pose_array(1)];
        let vels = vec![
            Array::new(vec![1, 3], vec![1.0, 0.0, 0.0]).unwrap(),
            Array::new(vec![1, 3], vec![1.0, 0.0, 0.0]).unwrap(),
        ];
        let out = total_loss(
            &obs_from(&poses, &vels),
            &gt,
            &anchor,
            &LossConfig::default(),
        )
        .unwrap();
        assert_eq!(out.total, 0.0);
    }

    #[test]
    fn lambda_ratio_combines_unit_terms() {
        // one joint, one step; velocity error and position error both norm² 1
        let gt = MotionSequence::new(1, 25.0, "mm", vec![0.0, 0.0, 0.0]).unwrap();
        let anchor = Array::zeros(&[1, 3]);
        let poses = vec![Array::new(vec![1, 3], vec![1.0, 0.0, 0.0]).unwrap()];
        let vels = vec![Array::new(vec![1, 3], vec![0.0, 1.0, 0.0]).unwrap()];
        let out = total_loss(
            &obs_from(&poses, &vels),
            &gt,
            &anchor,
            &LossConfig::default(),
        )
        .unwrap();
        assert_eq!(out.velocity, 1.0);
        assert_eq!(out.position, 1.0);
        assert_eq!(out.total, 4.0);
    }

    #[test]
    fn scaling_lambdas_scales_total_linearly() {
        let gt = MotionSequence::new(1, 25.0, "mm", vec![0.5, -0.5, 2.0]).unwrap();
        let anchor = Array::zeros(&[1, 3]);
        let poses = vec![Array::new(vec![1, 3], vec![1.0, 0.25, 0.0]).unwrap()];
        let vels = vec![Array::new(vec![1, 3], vec![0.5, 1.0, 0.0]).unwrap()];
        let obs = obs_from(&poses, &vels);
        let base = LossConfig::default();
        let scaled = LossConfig {
            lambda_velocity: base.lambda_velocity * 2.0,
            lambda_position: base.lambda_position * 2.0,
            ..base
        };
        let a = total_loss(&obs, &gt, &anchor, &base).unwrap();
        let b = total_loss(&obs, &gt, &anchor, &scaled).unwrap();
        assert!((b.total - 2.0 * a.total).abs() <= 1e-12);
    }

    #[test]
    fn config_rejects_zero_lambdas() {
        let cfg = LossConfig {
            lambda_velocity: 0.0,
            lambda_position: 0.0,
            atpl_enabled: true,
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn horizon_mismatch_is_rejected() {
        let gt = MotionSequence::new(1, 25.0, "mm", vec![0.0; 6]).unwrap();
        let anchor = Array::zeros(&[1, 3]);
        let poses = vec![Array::zeros(&[1, 3])];
        let vels = vec![Array::zeros(&[1, 3])];
        assert!(matches!(
            total_loss(&obs_from(&poses, &vels), &gt, &anchor, &LossConfig::default()),
            Err(LossError::HorizonMismatch { pred: 1, gt: 2 })
        ));
    }

    #[test]
    fn graph_and_plain_forms_agree() {
        let mut rng = crate::numeric::rng_for(19, "loss.compare");
        let mut rand_arr = |label: u64| {
            let _ = label;
            Array::new(
                vec![2, 3],
                (0..6)
                    .map(|_| crate::numeric::unit_f64(&mut rng) * 4.0 - 2.0)
                    .collect(),
            )
            .unwrap()
        };
        let horizon = 4;
        let gt_positions: Vec<f64> = (0..horizon * 2 * 3)
            .map(|i| (i as f64 * 0.37).sin())
            .collect();
        let gt = MotionSequence::new(2, 25.0, "mm", gt_positions).unwrap();
        let anchor = rand_arr(0);
        let poses: Vec<Array> = (0..horizon).map(|i| rand_arr(i as u64)).collect();
        let vels: Vec<Array> = (0..horizon).map(|i| rand_arr(10 + i as u64)).collect();
        let cfg = LossConfig::default();

        let plain = total_loss(&obs_from(&poses, &vels), &gt, &anchor, &cfg).unwrap();

        let mut tape = Tape::new();
        let pose_nodes: Vec<NodeId> = poses.iter().map(|p| tape.constant(p.clone())).collect();
        let vel_nodes: Vec<NodeId> = vels.iter().map(|v| tape.constant(v.clone())).collect();
        let nodes =
            total_loss_graph(&mut tape, &pose_nodes, &vel_nodes, &gt, &anchor, &cfg).unwrap();
        assert_eq!(tape.value(nodes.total).scalar_value(), plain.total);
        assert_eq!(tape.value(nodes.velocity).scalar_value(), plain.velocity);
        assert_eq!(tape.value(nodes.position).scalar_value(), plain.position);
    }

    #[test]
    fn uniform_and_attention_agree_for_constant_step_error() {
        // identical per-step errors make both profiles average the same value
        let horizon = 5;
        let pred = Array::filled(&[horizon, 1, 3], 0.5);
        let gt = Array::zeros(&[horizon, 1, 3]);
        let a = atpl(&pred, &gt, &atpl_weights(horizon).unwrap()).unwrap();
        let u = atpl(&pred, &gt, &uniform_weights(horizon).unwrap()).unwrap();
        assert!((a - u).abs() <= 1e-12);
    }
}
