//! The optimization loop: batched window sampling, loss graph construction,
//! reverse sweep, and Adam updates.

use thiserror::Error;

use crate::data::{split_window, window_starts};
use crate::loss::LossConfig;
use crate::model::{DeepSsm, ModelError};
use crate::numeric::{rng_for, AdamConfig, BoundParams, Tape};
use crate::repr::{JointOrdering, MotionSequence, NormStats};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("loss became non-finite at step {step}")]
    NonFiniteLoss { step: u64 },
    #[error("no training windows: every sequence is shorter than input+horizon frames")]
    NoWindows,
    #[error("batch size and stride must be ≥ 1")]
    BadSettings,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Copy, Debug)]
pub struct TrainSettings {
    pub batch_size: usize,
    pub stride: usize,
    /// Prediction horizon trained against (≤ the model's maximum).
    pub horizon: usize,
    pub seed: u64,
    pub adam: AdamConfig,
    pub loss: LossConfig,
}

/// Loss values of one optimization step (batch means).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepStats {
    pub step: u64,
    pub total: f64,
    pub velocity: f64,
    pub position: f64,
}

/// Aggregated loss values over one pass through the training windows.
#[derive(Clone, Copy, Debug)]
pub struct EpochStats {
    pub epoch: u64,
    pub steps: u64,
    pub total: f64,
    pub velocity: f64,
    pub position: f64,
}

pub struct Trainer {
    model: DeepSsm,
    sequences: Vec<MotionSequence>,
    windows: Vec<(usize, usize)>,
    ordering: JointOrdering,
    stats: NormStats,
    settings: TrainSettings,
    queue: Vec<(usize, usize)>,
    epochs_started: u64,
    step: u64,
}

impl Trainer {
    pub fn new(
        model: DeepSsm,
        train_sequences: Vec<MotionSequence>,
        ordering: JointOrdering,
        settings: TrainSettings,
    ) -> Result<Self, TrainError> {
        let stats = NormStats::fit(&train_sequences);
        Self::with_stats(model, train_sequences, ordering, settings, stats, 0, 0)
    }

    /// Rebuild a trainer around restored parameters and statistics; step and
    /// epoch counters continue where the checkpoint left off.
    pub fn with_stats(
        model: DeepSsm,
        train_sequences: Vec<MotionSequence>,
        ordering: JointOrdering,
        settings: TrainSettings,
        stats: NormStats,
        step: u64,
        epochs_started: u64,
    ) -> Result<Self, TrainError> {
        if settings.batch_size == 0 || settings.stride == 0 {
            return Err(TrainError::BadSettings);
        }
        settings.loss.validate().map_err(ModelError::from)?;
        let t1 = model.config.input_frames;
        let mut windows = Vec::new();
        for (i, seq) in train_sequences.iter().enumerate() {
            for start in window_starts(seq.frames(), t1, settings.horizon, settings.stride) {
                windows.push((i, start));
            }
        }
        if windows.is_empty() {
            return Err(TrainError::NoWindows);
        }
        Ok(Trainer {
            model,
            sequences: train_sequences,
            windows,
            ordering,
            stats,
            settings,
            queue: Vec::new(),
            epochs_started,
            step,
        })
    }

    pub fn stats(&self) -> &NormStats {
        &self.stats
    }

    pub fn model(&self) -> &DeepSsm {
        &self.model
    }

    pub fn into_model(self) -> (DeepSsm, NormStats) {
        (self.model, self.stats)
    }

    pub fn trained_steps(&self) -> u64 {
        self.step
    }

    pub fn epochs_started(&self) -> u64 {
        self.epochs_started
    }

    pub fn window_count(&self) -> usize {
        self.windows.len()
    }

    pub fn steps_per_epoch(&self) -> u64 {
        self.windows.len().div_ceil(self.settings.batch_size) as u64
    }

    fn refill_queue(&mut self) {
        let mut order = self.windows.clone();
        let mut rng = rng_for(
            self.settings.seed,
            &format!("train.shuffle.{}", self.epochs_started),
        );
        // Fisher-Yates
        for i in (1..order.len()).rev() {
            let j = (crate::numeric::unit_f64(&mut rng) * (i + 1) as f64) as usize;
            order.swap(i, j.min(i));
        }
        order.reverse();
        self.queue = order;
        self.epochs_started += 1;
    }

    /// One batch: build the loss graph, backpropagate, and apply Adam.
    pub fn step(&mut self) -> Result<StepStats, TrainError> {
        if self.queue.is_empty() {
            self.refill_queue();
        }
        let take = self.settings.batch_size.min(self.queue.len());
        let batch: Vec<(usize, usize)> = self.queue.split_off(self.queue.len() - take);

        let mut tape = Tape::new();
        let bp = BoundParams::bind(&mut tape, &self.model.params);
        let mut totals = Vec::with_capacity(take);
        let mut vels = Vec::with_capacity(take);
        let mut poss = Vec::with_capacity(take);
        for &(seq_idx, start) in &batch {
            let (input, target) = split_window(
                &self.sequences[seq_idx],
                start,
                self.model.config.input_frames,
                self.settings.horizon,
            );
            let nodes = self.model.window_loss_graph(
                &mut tape,
                &bp,
                &input,
                &target,
                &self.stats,
                &self.ordering,
                &self.settings.loss,
            )?;
            totals.push(nodes.total);
            vels.push(nodes.velocity);
            poss.push(nodes.position);
        }
        let mean = |tape: &mut Tape, nodes: &[crate::numeric::NodeId]| {
            let mut acc = nodes[0];
            for &n in &nodes[1..] {
                acc = tape.add(acc, n).expect("scalar add");
            }
            tape.scale(acc, 1.0 / nodes.len() as f64)
        };
        let total_node = mean(&mut tape, &totals);
        let velocity_node = mean(&mut tape, &vels);
        let position_node = mean(&mut tape, &poss);

        self.step += 1;
        let total = tape.value(total_node).scalar_value();
        if !total.is_finite() {
            return Err(TrainError::NonFiniteLoss { step: self.step });
        }
        let stats = StepStats {
            step: self.step,
            total,
            velocity: tape.value(velocity_node).scalar_value(),
            position: tape.value(position_node).scalar_value(),
        };

        let grads = tape.backward(total_node).map_err(ModelError::from)?;
        self.model
            .params
            .adam_step(&grads, &self.settings.adam)
            .map_err(ModelError::from)?;
        Ok(stats)
    }

    /// One pass over all training windows.
    pub fn epoch(&mut self) -> Result<EpochStats, TrainError> {
        let steps = self.steps_per_epoch();
        let epoch = self.epochs_started + 1;
        let mut sum = (0.0, 0.0, 0.0);
        for _ in 0..steps {
            let s = self.step()?;
            sum.0 += s.total;
            sum.1 += s.velocity;
            sum.2 += s.position;
        }
        let n = steps as f64;
        Ok(EpochStats {
            epoch,
            steps,
            total: sum.0 / n,
            velocity: sum.1 / n,
            position: sum.2 / n,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_constant_velocity;
    use crate::model::ModelConfig;

    fn tiny_trainer(seed: u64) -> Trainer {
        let config = ModelConfig {
            input_frames: 5,
            max_horizon: 3,
            channels: 2,
            ..ModelConfig::new(2)
        };
        let model = DeepSsm::new(config, seed).unwrap();
        let seqs = vec![gen_constant_velocity(2, 20, &[[1.0, 0.0, 0.0]; 2], 3).unwrap()];
        let settings = TrainSettings {
            batch_size: 4,
            stride: 1,
            horizon: 3,
            seed,
            adam: AdamConfig::default(),
            loss: LossConfig::default(),
        };
        Trainer::new(model, seqs, JointOrdering::identity(2), settings).unwrap()
    }

    #[test]
    fn steps_are_reproducible_per_seed() {
        let mut a = tiny_trainer(11);
        let mut b = tiny_trainer(11);
        for _ in 0..5 {
            let sa = a.step().unwrap();
            let sb = b.step().unwrap();
            assert_eq!(sa.total.to_bits(), sb.total.to_bits());
            assert_eq!(sa.velocity.to_bits(), sb.velocity.to_bits());
            assert_eq!(sa.position.to_bits(), sb.position.to_bits());
        }
    }

    #[test]
    fn different_seeds_differ() {
        let mut a = tiny_trainer(11);
        let mut b = tiny_trainer(12);
        assert_ne!(a.step().unwrap().total, b.step().unwrap().total);
    }

    #[test]
    fn epoch_runs_expected_step_count() {
        let mut t = tiny_trainer(4);
        let windows = t.window_count() as u64;
        let before = t.trained_steps();
        let stats = t.epoch().unwrap();
        assert_eq!(stats.steps, windows.div_ceil(4));
        assert_eq!(t.trained_steps(), before + stats.steps);
    }

    #[test]
    fn early_steps_descend_on_linear_motion() {
        // full-batch steps at the default learning rate; a handful of
        // non-decreasing steps is tolerated
        let seqs = vec![gen_constant_velocity(2, 15, &[[3.0, 4.0, 0.0]; 2], 1).unwrap()];
        let config = ModelConfig {
            input_frames: 6,
            max_horizon: 4,
            channels: 4,
            ..ModelConfig::new(2)
        };
        let model = DeepSsm::new(config, 1).unwrap();
        let settings = TrainSettings {
            batch_size: 6,
            stride: 1,
            horizon: 4,
            seed: 1,
            adam: AdamConfig::default(),
            loss: LossConfig::default(),
        };
        let mut trainer = Trainer::new(model, seqs, JointOrdering::identity(2), settings).unwrap();
        assert_eq!(trainer.window_count(), 6);
        let mut prev = f64::INFINITY;
        let mut non_decreasing = 0;
        for _ in 0..50 {
            let s = trainer.step().unwrap();
            if s.total >= prev {
                non_decreasing += 1;
            }
            prev = s.total;
        }
        assert!(non_decreasing <= 5, "{non_decreasing} non-decreasing steps");
    }

    #[test]
    fn non_finite_loss_aborts_with_step_number() {
        let mut trainer = tiny_trainer(2);
        // blow up one kernel so the first forward pass overflows
        let path = trainer
            .model()
            .params
            .paths()
            .find(|p| p.ends_with("head.weight"))
            .unwrap()
            .to_string();
        let shape = trainer.model().params.get(&path).unwrap().shape().to_vec();
        trainer
            .model
            .params
            .set(&path, crate::numeric::Array::filled(&shape, 1e300))
            .unwrap();
        match trainer.step() {
            Err(TrainError::NonFiniteLoss { step: 1 }) => {}
            other => panic!("expected a non-finite loss abort, got {other:?}"),
        }
    }

    #[test]
    fn no_windows_is_an_error() {
        let config = ModelConfig {
            input_frames: 30,
            max_horizon: 30,
            channels: 2,
            ..ModelConfig::new(2)
        };
        let model = DeepSsm::new(config, 0).unwrap();
        let seqs = vec![gen_constant_velocity(2, 20, &[[1.0, 0.0, 0.0]; 2], 3).unwrap()];
        let settings = TrainSettings {
            batch_size: 2,
            stride: 1,
            horizon: 30,
            seed: 0,
            adam: AdamConfig::default(),
            loss: LossConfig::default(),
        };
        assert!(matches!(
            Trainer::new(model, seqs, JointOrdering::identity(2), settings),
            Err(TrainError::NoWindows)
        ));
    }
}

