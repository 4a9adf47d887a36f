//! Shared helpers for the integration suites: finite-difference gradient
//! checking and independent scalar-loop oracles.
//!
//! The oracles are deliberate re-transcriptions of the operation definitions
//! with plain nested loops; they never call into the implementation paths
//! they verify.

#![allow(dead_code)]

use deepssm_core::loss::{LossConfig, LossNodes};
use deepssm_core::numeric::{rng_for, unit_f64, Array, BoundParams, NodeId, ParamStore, Tape};
use deepssm_core::repr::{JointOrdering, MotionSequence, NormStats};
use deepssm_core::{DeepSsm, ModelConfig};

pub const FD_STEP: f64 = 1e-5;
pub const FD_TOL: f64 = 1e-4;

/// Guarded relative error: |a − n| / max(|a|, |n|, 1e-4). The guard keeps
/// near-zero gradients from amplifying finite-difference noise.
pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-4)
}

pub fn random_array(shape: &[usize], seed: u64, label: &str) -> Array {
    let mut rng = rng_for(seed, label);
    let len = shape.iter().product();
    Array::new(
        shape.to_vec(),
        (0..len).map(|_| unit_f64(&mut rng) * 2.0 - 1.0).collect(),
    )
    .unwrap()
}

fn with_element(a: &Array, index: usize, value: f64) -> Array {
    let mut data = a.data().to_vec();
    data[index] = value;
    Array::new(a.shape().to_vec(), data).unwrap()
}

/// Check analytic gradients of a scalar-producing graph against central
/// finite differences, for every element of every input array.
pub fn fd_check_inputs<F>(inputs: &[Array], build: F, context: &str)
where
    F: Fn(&mut Tape, &[NodeId]) -> NodeId,
{
    let eval = |arrays: &[Array]| -> f64 {
        let mut tape = Tape::new();
        let ids: Vec<NodeId> = arrays.iter().map(|a| tape.constant(a.clone())).collect();
        let out = build(&mut tape, &ids);
        tape.value(out).scalar_value()
    };

    let mut tape = Tape::new();
    let ids: Vec<NodeId> = inputs.iter().map(|a| tape.constant(a.clone())).collect();
    let out = build(&mut tape, &ids);
    let grads = tape.backward(out).expect("scalar output");

    for (k, input) in inputs.iter().enumerate() {
        let zeros = Array::zeros(input.shape());
        let analytic = grads.wrt(ids[k]).unwrap_or(&zeros);
        for i in 0..input.len() {
            let x = input.data()[i];
            let mut plus = inputs.to_vec();
            plus[k] = with_element(input, i, x + FD_STEP);
            let mut minus = inputs.to_vec();
            minus[k] = with_element(input, i, x - FD_STEP);
            let numeric = (eval(&plus) - eval(&minus)) / (2.0 * FD_STEP);
            let a = analytic.data()[i];
            assert!(
                rel_err(a, numeric) <= FD_TOL,
                "{context}: input {k} element {i}: analytic {a} vs finite difference {numeric}"
            );
        }
    }
}

/// The toy network used by the end-to-end gradient check: 2 joints, 4
/// observed frames, a 3-step horizon, 4 channels.
pub fn toy_config() -> ModelConfig {
    ModelConfig {
        input_frames: 4,
        max_horizon: 3,
        channels: 4,
        ..ModelConfig::new(2)
    }
}

pub struct ToyProblem {
    pub model: DeepSsm,
    pub input: MotionSequence,
    pub target: MotionSequence,
    pub stats: NormStats,
    pub ordering: JointOrdering,
    pub loss: LossConfig,
}

pub fn toy_problem(config: ModelConfig, seed: u64) -> ToyProblem {
    let joints = config.joints;
    let t1 = config.input_frames;
    let t2 = config.max_horizon;
    let model = DeepSsm::new(config, seed).unwrap();
    let mut rng = rng_for(seed, "toy.data");
    let mut frames = |n: usize| -> MotionSequence {
        let data = (0..n * joints * 3)
            .map(|_| unit_f64(&mut rng) * 2.0 - 1.0)
            .collect();
        MotionSequence::new(joints, 25.0, "mm", data).unwrap()
    };
    ToyProblem {
        input: frames(t1),
        target: frames(t2),
        stats: NormStats::identity(),
        ordering: JointOrdering::identity(joints),
        model,
        loss: LossConfig::default(),
    }
}

impl ToyProblem {
    pub fn loss_nodes(&self, tape: &mut Tape, store: &ParamStore) -> LossNodes {
        let model = DeepSsm {
            config: self.model.config.clone(),
            params: store.clone(),
        };
        let bp = BoundParams::bind(tape, store);
        model
            .window_loss_graph(
                tape,
                &bp,
                &self.input,
                &self.target,
                &self.stats,
                &self.ordering,
                &self.loss,
            )
            .unwrap()
    }

    pub fn loss_value(&self, store: &ParamStore) -> f64 {
        let mut tape = Tape::new();
        let nodes = self.loss_nodes(&mut tape, store);
        tape.value(nodes.total).scalar_value()
    }
}

/// Central finite differences over every parameter element of the toy
/// problem, compared against the tape's gradients. Returns the number of
/// elements checked.
pub fn toy_fd_check(problem: &ToyProblem) -> usize {
    let mut store = problem.model.params.clone();
    let mut tape = Tape::new();
    let nodes = problem.loss_nodes(&mut tape, &store);
    let grads = tape.backward(nodes.total).expect("scalar loss");

    let paths: Vec<String> = store.paths().map(str::to_string).collect();
    let mut checked = 0;
    for path in &paths {
        let base = store.get(path).unwrap().clone();
        // memory slots for odd steps beyond the horizon never enter the
        // graph; their gradient is identically zero and perturbing them must
        // not move the loss
        let analytic = match grads.param(path) {
            Some(g) => g.clone(),
            None => {
                let x = base.data()[0];
                store.set(path, with_element(&base, 0, x + 1.0)).unwrap();
                let moved = problem.loss_value(&store);
                store.set(path, base.clone()).unwrap();
                assert_eq!(
                    moved,
                    problem.loss_value(&store),
                    "{path} has no gradient but perturbing it moves the loss"
                );
                checked += base.len();
                continue;
            }
        };
        for i in 0..base.len() {
            let x = base.data()[i];
            store.set(path, with_element(&base, i, x + FD_STEP)).unwrap();
            let up = problem.loss_value(&store);
            store.set(path, with_element(&base, i, x - FD_STEP)).unwrap();
            let down = problem.loss_value(&store);
            store.set(path, base.clone()).unwrap();
            let numeric = (up - down) / (2.0 * FD_STEP);
            let a = analytic.data()[i];
            assert!(
                rel_err(a, numeric) <= FD_TOL,
                "{path}[{i}]: analytic {a} vs finite difference {numeric}"
            );
            checked += 1;
        }
    }
    checked
}

// ── Independent scalar-loop oracles ─────────────────────────────────────

/// Direct convolution transcription: stride 1, zero same padding.
pub fn oracle_conv2d(input: &Array, kernel: &Array, bias: &Array) -> Array {
    let (in_c, h, w) = (input.shape()[0], input.shape()[1], input.shape()[2]);
    let (out_c, kh, kw) = (kernel.shape()[0], kernel.shape()[2], kernel.shape()[3]);
    let (ph, pw) = (kh / 2, kw / 2);
    let mut data = Vec::with_capacity(out_c * h * w);
    for co in 0..out_c {
        for y in 0..h {
            for x in 0..w {
                let mut acc = bias.data()[co];
                for ci in 0..in_c {
                    for ky in 0..kh {
                        for kx in 0..kw {
                            let iy = y as isize + ky as isize - ph as isize;
                            let ix = x as isize + kx as isize - pw as isize;
                            if iy < 0 || ix < 0 || iy >= h as isize || ix >= w as isize {
                                continue;
                            }
                            acc += kernel.at(&[co, ci, ky, kx])
                                * input.at(&[ci, iy as usize, ix as usize]);
                        }
                    }
                }
                data.push(acc);
            }
        }
    }
    Array::new(vec![out_c, h, w], data).unwrap()
}

/// Direct affine-map transcription over the flattened input.
pub fn oracle_fully_connected(x: &Array, weight: &Array, bias: &Array) -> Array {
    let (rows, cols) = (weight.shape()[0], weight.shape()[1]);
    let mut data = Vec::with_capacity(rows);
    for r in 0..rows {
        let mut acc = bias.data()[r];
        for c in 0..cols {
            acc += weight.at(&[r, c]) * x.data()[c];
        }
        data.push(acc);
    }
    Array::new(vec![rows], data).unwrap()
}

/// Direct weighted squared-error transcription:
/// `(1/J) Σ_t w_t Σ_j ‖pred − gt‖²` over (T, J, 3) stacks.
pub fn oracle_atpl(pred: &Array, gt: &Array, weights: &[f64]) -> f64 {
    let (steps, joints) = (pred.shape()[0], pred.shape()[1]);
    let mut total = 0.0;
    for (t, w) in weights.iter().enumerate().take(steps) {
        let mut step_sum = 0.0;
        for j in 0..joints {
            let mut sq = 0.0;
            for a in 0..3 {
                let d = pred.at(&[t, j, a]) - gt.at(&[t, j, a]);
                sq += d * d;
            }
            step_sum += sq;
        }
        total += w * step_sum;
    }
    total / joints as f64
}

/// Direct mean per-joint Euclidean error transcription at one horizon
/// (1-based).
pub fn oracle_mpjpe(pred: &Array, gt: &Array, horizon: usize) -> f64 {
    let joints = pred.shape()[1];
    let t = horizon - 1;
    let mut acc = 0.0;
    for j in 0..joints {
        let mut sq = 0.0;
        for a in 0..3 {
            let d = pred.at(&[t, j, a]) - gt.at(&[t, j, a]);
            sq += d * d;
        }
        acc += sq.sqrt();
    }
    acc / joints as f64
}
