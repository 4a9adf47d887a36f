//! Run configuration: a flat `key = value` file format plus command-line
//! overrides. The file keys are exactly the flag names, so a manifest written
//! by one run can be fed back as the config of another.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use deepssm_core::loss::LossConfig;
use deepssm_core::model::{Integration, ModelConfig};
use deepssm_core::numeric::AdamConfig;

use crate::error::CliError;

#[derive(Clone, Debug)]
pub struct RunConfig {
    /// Dataset descriptor path or a `gen:` generator spec.
    pub dataset: String,
    pub t1: usize,
    pub t2: usize,
    pub channels: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub stride: usize,
    pub no_xyz_split: bool,
    pub no_pose_branch: bool,
    pub no_velocity_branch: bool,
    pub no_lp: bool,
    pub no_lv: bool,
    pub no_atpl: bool,
    pub integration: Integration,
    pub use_observed_v0: bool,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: String::new(),
            t1: 10,
            t2: 25,
            channels: 32,
            learning_rate: 1e-4,
            epochs: 10,
            batch_size: 16,
            seed: 0,
            lambda1: 3.0,
            lambda2: 1.0,
            stride: 1,
            no_xyz_split: false,
            no_pose_branch: false,
            no_velocity_branch: false,
            no_lp: false,
            no_lv: false,
            no_atpl: false,
            integration: Integration::Consistent,
            use_observed_v0: false,
            out: PathBuf::from("out"),
        }
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool, CliError> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(CliError::config(format!(
            "key {key}: expected true or false, got {other:?}"
        ))),
    }
}

pub fn parse_integration(value: &str) -> Result<Integration, CliError> {
    match value {
        "consistent" => Ok(Integration::Consistent),
        "paper-literal" => Ok(Integration::PaperLiteral),
        other => Err(CliError::config(format!(
            "integration must be consistent or paper-literal, got {other:?}"
        ))),
    }
}

pub fn integration_name(i: Integration) -> &'static str {
    match i {
        Integration::Consistent => "consistent",
        Integration::PaperLiteral => "paper-literal",
    }
}

impl RunConfig {
    /// Apply one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let num = |k: &str, v: &str| -> Result<usize, CliError> {
            v.parse()
                .map_err(|e| CliError::config(format!("key {k}: {e}")))
        };
        let float = |k: &str, v: &str| -> Result<f64, CliError> {
            v.parse()
                .map_err(|e| CliError::config(format!("key {k}: {e}")))
        };
        match key {
            "dataset" => self.dataset = value.to_string(),
            "t1" => self.t1 = num(key, value)?,
            "t2" => self.t2 = num(key, value)?,
            "channels" => self.channels = num(key, value)?,
            "learning-rate" => self.learning_rate = float(key, value)?,
            "epochs" => self.epochs = num(key, value)?,
            "batch-size" => self.batch_size = num(key, value)?,
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|e| CliError::config(format!("key seed: {e}")))?
            }
            "lambda1" => self.lambda1 = float(key, value)?,
            "lambda2" => self.lambda2 = float(key, value)?,
            "stride" => self.stride = num(key, value)?,
            "no-xyz-split" => self.no_xyz_split = parse_bool(key, value)?,
            "no-pose-branch" => self.no_pose_branch = parse_bool(key, value)?,
            "no-velocity-branch" => self.no_velocity_branch = parse_bool(key, value)?,
            "no-Lp" => self.no_lp = parse_bool(key, value)?,
            "no-Lv" => self.no_lv = parse_bool(key, value)?,
            "no-ATPL" => self.no_atpl = parse_bool(key, value)?,
            "integration" => self.integration = parse_integration(value)?,
            "use-observed-v0" => self.use_observed_v0 = parse_bool(key, value)?,
            "out" => self.out = PathBuf::from(value),
            other => return Err(CliError::config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let mut config = RunConfig::default();
        for (idx, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed.split_once('=').ok_or_else(|| {
                CliError::config(format!(
                    "{}:{}: expected key = value",
                    path.display(),
                    idx + 1
                ))
            })?;
            config.set(key.trim(), value.trim())?;
        }
        Ok(config)
    }

    /// Render in the same flat format `load` reads.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dataset = {}", self.dataset);
        let _ = writeln!(s, "t1 = {}", self.t1);
        let _ = writeln!(s, "t2 = {}", self.t2);
        let _ = writeln!(s, "channels = {}", self.channels);
        let _ = writeln!(s, "learning-rate = {}", self.learning_rate);
        let _ = writeln!(s, "epochs = {}", self.epochs);
        let _ = writeln!(s, "batch-size = {}", self.batch_size);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "lambda1 = {}", self.lambda1);
        let _ = writeln!(s, "lambda2 = {}", self.lambda2);
        let _ = writeln!(s, "stride = {}", self.stride);
        let _ = writeln!(s, "no-xyz-split = {}", self.no_xyz_split);
        let _ = writeln!(s, "no-pose-branch = {}", self.no_pose_branch);
        let _ = writeln!(s, "no-velocity-branch = {}", self.no_velocity_branch);
        let _ = writeln!(s, "no-Lp = {}", self.no_lp);
        let _ = writeln!(s, "no-Lv = {}", self.no_lv);
        let _ = writeln!(s, "no-ATPL = {}", self.no_atpl);
        let _ = writeln!(s, "integration = {}", integration_name(self.integration));
        let _ = writeln!(s, "use-observed-v0 = {}", self.use_observed_v0);
        let _ = writeln!(s, "out = {}", self.out.display());
        s
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.dataset.is_empty() {
            return Err(CliError::config("dataset is required"));
        }
        if self.no_pose_branch && self.no_velocity_branch {
            return Err(CliError::validation(
                "no-pose-branch and no-velocity-branch cannot both be set: no input path remains",
            ));
        }
        if self.no_lp && self.no_lv {
            return Err(CliError::validation(
                "no-Lp and no-Lv cannot both be set: the loss would vanish",
            ));
        }
        if self.batch_size == 0 || self.stride == 0 || self.t1 == 0 || self.t2 == 0 {
            return Err(CliError::config(
                "t1, t2, batch-size, and stride must be ≥ 1",
            ));
        }
        Ok(())
    }

    pub fn model_config(&self, joints: usize) -> ModelConfig {
        ModelConfig {
            joints,
            input_frames: self.t1,
            max_horizon: self.t2,
            channels: self.channels,
            leaky_slope: 0.2,
            xyz_split: !self.no_xyz_split,
            pose_branch: !self.no_pose_branch,
            velocity_branch: !self.no_velocity_branch,
            use_observed_v0: self.use_observed_v0,
            integration: self.integration,
        }
    }

    pub fn loss_config(&self) -> LossConfig {
        LossConfig {
            lambda_velocity: if self.no_lv { 0.0 } else { self.lambda1 },
            lambda_position: if self.no_lp { 0.0 } else { self.lambda2 },
            atpl_enabled: !self.no_atpl,
        }
    }

    pub fn adam_config(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            ..AdamConfig::default()
        }
    }
}
