//! Motion sequences and the per-axis skeletal representation.
//!
//! A sequence of J-joint 3-D poses becomes six joints × frames tensors: the
//! positions split per coordinate axis and their first-difference velocities,
//! with the velocity at the first frame fixed to zero. Rows follow a
//! configurable joint ordering so that joints of one limb sit next to each
//! other; the conventional ordering walks the skeleton depth-first (pelvis,
//! spine, head, then each leg and arm as a contiguous run).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::Array;

#[derive(Debug, Error)]
pub enum ReprError {
    #[error("sequence data length {got} is not frames × {joints} joints × 3")]
    BadLength { got: usize, joints: usize },
    #[error("sequence must have at least one frame")]
    Empty,
    #[error("non-finite coordinate at frame {frame}, joint {joint}")]
    NonFinite { frame: usize, joint: usize },
    #[error("joint ordering of length {got} does not match {joints} joints")]
    OrderingLength { got: usize, joints: usize },
    #[error("joint ordering is not a permutation: index {0} repeated or out of range")]
    OrderingNotBijective(usize),
}

/// Ordered 3-D joint positions at a fixed frame rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionSequence {
    joints: usize,
    frame_rate: f64,
    unit: String,
    /// frames × joints × 3, row-major.
    positions: Vec<f64>,
}

impl MotionSequence {
    pub fn new(
        joints: usize,
        frame_rate: f64,
        unit: impl Into<String>,
        positions: Vec<f64>,
    ) -> Result<Self, ReprError> {
        if joints == 0 || positions.is_empty() || !positions.len().is_multiple_of(joints * 3) {
            return Err(ReprError::BadLength {
                got: positions.len(),
                joints,
            });
        }
        let seq = MotionSequence {
            joints,
            frame_rate,
            unit: unit.into(),
            positions,
        };
        for t in 0..seq.frames() {
            for j in 0..seq.joints {
                for a in 0..3 {
                    if !seq.at(t, j, a).is_finite() {
                        return Err(ReprError::NonFinite { frame: t, joint: j });
                    }
                }
            }
        }
        Ok(seq)
    }

    pub fn joints(&self) -> usize {
        self.joints
    }

    pub fn frames(&self) -> usize {
        self.positions.len() / (self.joints * 3)
    }

    pub fn frame_rate(&self) -> f64 {
        self.frame_rate
    }

    pub fn unit(&self) -> &str {
        &self.unit
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn at(&self, frame: usize, joint: usize, axis: usize) -> f64 {
        self.positions[(frame * self.joints + joint) * 3 + axis]
    }

    /// One frame as a flat J × 3 slice.
    pub fn pose(&self, frame: usize) -> &[f64] {
        let stride = self.joints * 3;
        &self.positions[frame * stride..(frame + 1) * stride]
    }

    /// One frame as a (J, 3) array.
    pub fn pose_array(&self, frame: usize) -> Array {
        Array::new(vec![self.joints, 3], self.pose(frame).to_vec())
            .expect("frame slice has J×3 values")
    }

    pub fn last_pose_array(&self) -> Array {
        self.pose_array(self.frames() - 1)
    }

    /// Contiguous sub-range of frames as a new sequence.
    pub fn window(&self, start: usize, len: usize) -> MotionSequence {
        let stride = self.joints * 3;
        MotionSequence {
            joints: self.joints,
            frame_rate: self.frame_rate,
            unit: self.unit.clone(),
            positions: self.positions[start * stride..(start + len) * stride].to_vec(),
        }
    }

    /// Frames stacked as a (T, J, 3) array.
    pub fn as_array(&self) -> Array {
        Array::new(
            vec![self.frames(), self.joints, 3],
            self.positions.clone(),
        )
        .expect("positions sized as T×J×3")
    }
}

/// Bijective row order for the tensor layout.
///
/// `order[row]` is the source joint placed at that row. Contiguous limb
/// chains (trunk first, then each limb) keep local body structure local in
/// the joint axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointOrdering(Vec<usize>);

impl JointOrdering {
    pub fn new(order: Vec<usize>) -> Result<Self, ReprError> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &j in &order {
            if j >= n || seen[j] {
                return Err(ReprError::OrderingNotBijective(j));
            }
            seen[j] = true;
        }
        Ok(JointOrdering(order))
    }

    pub fn identity(joints: usize) -> Self {
        JointOrdering((0..joints).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Source joint stored at `row`.
    pub fn source(&self, row: usize) -> usize {
        self.0[row]
    }
}

/// The six joints × frames tensors: positions and velocities per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct SkeletalTensors {
    /// Positions along x, y, z; each (J, T).
    pub positions: [Array; 3],
    /// Velocities along x, y, z; each (J, T), first column zero.
    pub velocities: [Array; 3],
}

impl SkeletalTensors {
    pub fn joints(&self) -> usize {
        self.positions[0].shape()[0]
    }

    pub fn frames(&self) -> usize {
        self.positions[0].shape()[1]
    }
}

/// First differences with a zero first frame, as a (T, J, 3) array.
pub fn compute_velocities(seq: &MotionSequence) -> Array {
    let (t_len, j_len) = (seq.frames(), seq.joints());
    let mut data = vec![0.0; t_len * j_len * 3];
    for t in 1..t_len {
        for j in 0..j_len {
            for a in 0..3 {
                data[(t * j_len + j) * 3 + a] = seq.at(t, j, a) - seq.at(t - 1, j, a);
            }
        }
    }
    Array::new(vec![t_len, j_len, 3], data).expect("velocity buffer sized as T×J×3")
}

/// Split a sequence into the six per-axis tensors under a joint ordering.
pub fn build_skeletal_representation(
    seq: &MotionSequence,
    ordering: &JointOrdering,
) -> Result<SkeletalTensors, ReprError> {
    if ordering.len() != seq.joints() {
        return Err(ReprError::OrderingLength {
            got: ordering.len(),
            joints: seq.joints(),
        });
    }
    let (t_len, j_len) = (seq.frames(), seq.joints());
    let vel = compute_velocities(seq);
    let mut positions = [
        Array::zeros(&[j_len, t_len]),
        Array::zeros(&[j_len, t_len]),
        Array::zeros(&[j_len, t_len]),
    ];
    let mut velocities = positions.clone();
    for axis in 0..3 {
        let p = positions[axis].data_mut();
        for (row, p_row) in p.chunks_mut(t_len).enumerate() {
            let src = ordering.source(row);
            for (t, slot) in p_row.iter_mut().enumerate() {
                *slot = seq.at(t, src, axis);
            }
        }
        let v = velocities[axis].data_mut();
        for (row, v_row) in v.chunks_mut(t_len).enumerate() {
            let src = ordering.source(row);
            for (t, slot) in v_row.iter_mut().enumerate() {
                *slot = vel.at(&[t, src, axis]);
            }
        }
    }
    Ok(SkeletalTensors {
        positions,
        velocities,
    })
}

/// Per-axis standardization statistics fitted on training data.
///
/// An axis whose spread is zero is flagged and passed through unchanged by
/// both directions of the transform.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mean: [f64; 3],
    pub std: [f64; 3],
    pub passthrough: [bool; 3],
}

impl NormStats {
    /// Identity transform.
    pub fn identity() -> Self {
        NormStats {
            mean: [0.0; 3],
            std: [1.0; 3],
            passthrough: [true; 3],
        }
    }

    /// Fit per-axis mean and standard deviation over every joint and frame of
    /// the given sequences.
    pub fn fit<'a>(seqs: impl IntoIterator<Item = &'a MotionSequence>) -> Self {
        let mut count = 0u64;
        let mut sum = [0.0; 3];
        let mut sum_sq = [0.0; 3];
        for seq in seqs {
            for t in 0..seq.frames() {
                for j in 0..seq.joints() {
                    for a in 0..3 {
                        let v = seq.at(t, j, a);
                        sum[a] += v;
                        sum_sq[a] += v * v;
                    }
                }
            }
            count += (seq.frames() * seq.joints()) as u64;
        }
        let mut stats = NormStats {
            mean: [0.0; 3],
            std: [1.0; 3],
            passthrough: [false; 3],
        };
        if count == 0 {
            return NormStats::identity();
        }
        let n = count as f64;
        for a in 0..3 {
            let mean = sum[a] / n;
            let var = (sum_sq[a] / n - mean * mean).max(0.0);
            let std = var.sqrt();
            if std == 0.0 {
                stats.passthrough[a] = true;
                stats.mean[a] = 0.0;
                stats.std[a] = 1.0;
            } else {
                stats.mean[a] = mean;
                stats.std[a] = std;
            }
        }
        stats
    }

    pub fn norm_coord(&self, axis: usize, v: f64) -> f64 {
        if self.passthrough[axis] {
            v
        } else {
            (v - self.mean[axis]) / self.std[axis]
        }
    }

    pub fn denorm_coord(&self, axis: usize, v: f64) -> f64 {
        if self.passthrough[axis] {
            v
        } else {
            v * self.std[axis] + self.mean[axis]
        }
    }

    /// Velocities transform without the mean shift.
    pub fn denorm_velocity(&self, axis: usize, v: f64) -> f64 {
        if self.passthrough[axis] {
            v
        } else {
            v * self.std[axis]
        }
    }
}

fn map_coords(seq: &MotionSequence, f: impl Fn(usize, f64) -> f64) -> MotionSequence {
    let mut positions = seq.positions().to_vec();
    for (i, v) in positions.iter_mut().enumerate() {
        *v = f(i % 3, *v);
    }
    MotionSequence::new(seq.joints(), seq.frame_rate(), seq.unit(), positions)
        .expect("transform keeps length and finiteness")
}

pub fn normalize(seq: &MotionSequence, stats: &NormStats) -> MotionSequence {
    map_coords(seq, |axis, v| stats.norm_coord(axis, v))
}

pub fn denormalize(seq: &MotionSequence, stats: &NormStats) -> MotionSequence {
    map_coords(seq, |axis, v| stats.denorm_coord(axis, v))
}

/// Map a normalized (J, 3) pose back to data units.
pub fn denormalize_pose(pose: &Array, stats: &NormStats) -> Array {
    let mut out = pose.clone();
    for (i, v) in out.data_mut().iter_mut().enumerate() {
        *v = stats.denorm_coord(i % 3, *v);
    }
    out
}

/// Map a normalized (J, 3) velocity back to data units.
pub fn denormalize_velocity(vel: &Array, stats: &NormStats) -> Array {
    let mut out = vel.clone();
    for (i, v) in out.data_mut().iter_mut().enumerate() {
        *v = stats.denorm_velocity(i % 3, *v);
    }
    out
}

/// Normalize a raw (J, 3) pose.
pub fn normalize_pose(pose: &Array, stats: &NormStats) -> Array {
    let mut out = pose.clone();
    for (i, v) in out.data_mut().iter_mut().enumerate() {
        *v = stats.norm_coord(i % 3, *v);
    }
    out
}
