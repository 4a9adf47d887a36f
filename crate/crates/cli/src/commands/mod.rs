//! Subcommand implementations.

pub mod ablate;
pub mod evaluate;
pub mod gendata;
pub mod predict;
pub mod train;

use std::path::{Path, PathBuf};

use clap::Args;
use deepssm_core::data::{Dataset, GeneratorSpec, Split};
use deepssm_core::repr::{JointOrdering, MotionSequence, NormStats};
use deepssm_core::DeepSsm;

use crate::config::{parse_integration, RunConfig};
use crate::error::CliError;

/// Shared configuration flags; values given here override the `--config`
/// file.
#[derive(Args, Clone, Debug)]
pub struct ConfigArgs {
    /// Flat `key = value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dataset descriptor path or generator spec (`gen:const-vel,...`).
    #[arg(long)]
    pub dataset: Option<String>,
    /// Observed window length.
    #[arg(long)]
    pub t1: Option<usize>,
    /// Prediction horizon.
    #[arg(long)]
    pub t2: Option<usize>,
    /// Feature channel width.
    #[arg(long)]
    pub channels: Option<usize>,
    #[arg(long = "learning-rate")]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long = "batch-size")]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Velocity-loss weight.
    #[arg(long)]
    pub lambda1: Option<f64>,
    /// Position-loss weight.
    #[arg(long)]
    pub lambda2: Option<f64>,
    /// Training window stride.
    #[arg(long)]
    pub stride: Option<usize>,
    /// Feed all three axes into one sub-branch instead of splitting.
    #[arg(long = "no-xyz-split")]
    pub no_xyz_split: bool,
    #[arg(long = "no-pose-branch")]
    pub no_pose_branch: bool,
    #[arg(long = "no-velocity-branch")]
    pub no_velocity_branch: bool,
    /// Drop the position loss term.
    #[arg(long = "no-Lp")]
    pub no_lp: bool,
    /// Drop the velocity loss term.
    #[arg(long = "no-Lv")]
    pub no_lv: bool,
    /// Use uniform instead of decreasing step weights.
    #[arg(long = "no-ATPL")]
    pub no_atpl: bool,
    /// Pose update rule: consistent | paper-literal.
    #[arg(long)]
    pub integration: Option<String>,
    /// Start the rollout from the last observed frame difference.
    #[arg(long = "use-observed-v0")]
    pub use_observed_v0: bool,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.dataset {
            cfg.dataset = v.clone();
        }
        if let Some(v) = self.t1 {
            cfg.t1 = v;
        }
        if let Some(v) = self.t2 {
            cfg.t2 = v;
        }
        if let Some(v) = self.channels {
            cfg.channels = v;
        }
        if let Some(v) = self.learning_rate {
            cfg.learning_rate = v;
        }
        if let Some(v) = self.epochs {
            cfg.epochs = v;
        }
        if let Some(v) = self.batch_size {
            cfg.batch_size = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.lambda1 {
            cfg.lambda1 = v;
        }
        if let Some(v) = self.lambda2 {
            cfg.lambda2 = v;
        }
        if let Some(v) = self.stride {
            cfg.stride = v;
        }
        if self.no_xyz_split {
            cfg.no_xyz_split = true;
        }
        if self.no_pose_branch {
            cfg.no_pose_branch = true;
        }
        if self.no_velocity_branch {
            cfg.no_velocity_branch = true;
        }
        if self.no_lp {
            cfg.no_lp = true;
        }
        if self.no_lv {
            cfg.no_lv = true;
        }
        if self.no_atpl {
            cfg.no_atpl = true;
        }
        if let Some(v) = &self.integration {
            cfg.integration = parse_integration(v)?;
        }
        if self.use_observed_v0 {
            cfg.use_observed_v0 = true;
        }
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        Ok(cfg)
    }
}

/// A descriptor path loads files from disk; a `gen:` spec synthesizes the
/// dataset from the seed.
pub fn resolve_dataset(arg: &str, seed: u64) -> Result<Dataset, CliError> {
    if arg.starts_with("gen:") {
        let spec = GeneratorSpec::parse(arg)?;
        Ok(Dataset::from_generator(&spec, seed)?)
    } else {
        Ok(Dataset::load(Path::new(arg))?)
    }
}

pub fn parse_horizons(text: &str) -> Result<Vec<usize>, CliError> {
    let horizons: Vec<usize> = text
        .split(',')
        .map(|h| h.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::usage(format!("bad horizon list {text:?}: {e}")))?;
    if horizons.is_empty() || horizons.contains(&0) {
        return Err(CliError::usage("horizons must be positive step indices"));
    }
    Ok(horizons)
}

/// Per-sequence mean MPJPE columns plus the final average row.
pub struct EvalRows {
    pub rows: Vec<(String, Vec<f64>)>,
}

impl EvalRows {
    pub fn average(&self) -> Vec<f64> {
        let cols = self.rows[0].1.len();
        let mut avg = vec![0.0; cols];
        for (_, values) in &self.rows {
            for (a, v) in avg.iter_mut().zip(values) {
                *a += v;
            }
        }
        for a in &mut avg {
            *a /= self.rows.len() as f64;
        }
        avg
    }
}

/// Something that maps an observed window to a (horizon, J, 3) pose stack.
pub enum Predictor<'a> {
    Model {
        model: &'a DeepSsm,
        stats: &'a NormStats,
        ordering: &'a JointOrdering,
    },
    ZeroVelocity,
    ConstantVelocity,
}

impl Predictor<'_> {
    fn predict(
        &self,
        input: &MotionSequence,
        horizon: usize,
    ) -> Result<deepssm_core::Array, CliError> {
        match self {
            Predictor::Model {
                model,
                stats,
                ordering,
            } => Ok(model.predict_poses(input, horizon, stats, ordering)?),
            Predictor::ZeroVelocity => {
                Ok(deepssm_core::data::baseline_zero_velocity(input, horizon))
            }
            Predictor::ConstantVelocity => {
                Ok(deepssm_core::data::baseline_constant_velocity(input, horizon))
            }
        }
    }

    pub fn from_baseline_name(name: &str) -> Result<Predictor<'static>, CliError> {
        match name {
            "zero" => Ok(Predictor::ZeroVelocity),
            "const" => Ok(Predictor::ConstantVelocity),
            other => Err(CliError::usage(format!(
                "unknown baseline {other:?} (expected zero or const)"
            ))),
        }
    }
}

/// Evaluate a predictor over every window of every test-split sequence:
/// one row per sequence with the mean MPJPE at each horizon.
pub fn evaluate_split(
    predictor: &Predictor,
    dataset: &Dataset,
    split: Split,
    t1: usize,
    horizons: &[usize],
    stride: usize,
) -> Result<EvalRows, CliError> {
    let max_h = *horizons.iter().max().expect("non-empty horizons");
    let sequences = dataset.split(split);
    if sequences.is_empty() {
        return Err(CliError::new("dataset", "the requested split is empty"));
    }
    let mut rows = Vec::with_capacity(sequences.len());
    for (id, seq) in sequences {
        let starts = deepssm_core::data::window_starts(seq.frames(), t1, max_h, stride);
        if starts.is_empty() {
            return Err(CliError::new(
                "dataset",
                format!("sequence {id:?} is too short for {t1}+{max_h} frames"),
            ));
        }
        let mut sums = vec![0.0; horizons.len()];
        for &start in &starts {
            let (input, target) = deepssm_core::data::split_window(seq, start, t1, max_h);
            let pred = predictor.predict(&input, max_h)?;
            let errs = deepssm_core::data::mpjpe(&pred, &target.as_array(), horizons)?;
            for (s, e) in sums.iter_mut().zip(&errs) {
                *s += e;
            }
        }
        for s in &mut sums {
            *s /= starts.len() as f64;
        }
        rows.push((id.to_string(), sums));
    }
    Ok(EvalRows { rows })
}
