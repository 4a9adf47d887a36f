use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::Args;
use deepssm_core::checkpoint;
use deepssm_core::data::{load_sequence, write_sequence};
use deepssm_core::repr::MotionSequence;
use deepssm_core::DeepSsm;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::manifest::write_manifest;

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Observed sequence file; the last T₁ frames form the input window.
    #[arg(long)]
    pub input: PathBuf,
    /// Number of future frames to predict (defaults to the model maximum).
    #[arg(long)]
    pub t2: Option<usize>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

pub fn run(args: &PredictArgs) -> Result<(), CliError> {
    let ck = checkpoint::load(&args.checkpoint)?;
    let horizon = args.t2.unwrap_or(ck.config.max_horizon);
    if horizon == 0 || horizon > ck.config.max_horizon {
        return Err(CliError::validation(format!(
            "t2 {horizon} outside the model maximum {}",
            ck.config.max_horizon
        )));
    }
    let input = load_sequence(&args.input)?;
    let model = DeepSsm {
        config: ck.config.clone(),
        params: ck.params,
    };
    let ordering = deepssm_core::repr::JointOrdering::new(ck.ordering.clone())
        .map_err(|e| CliError::new("checkpoint", e.to_string()))?;
    let observations = model.predict(&input, horizon, &ck.stats, &ordering)?;

    let joints = model.config.joints;
    let mut positions = Vec::with_capacity(horizon * joints * 3);
    for o in &observations {
        positions.extend_from_slice(o.pose.data());
    }
    let predicted = MotionSequence::new(joints, ck.frame_rate, ck.unit.clone(), positions)
        .map_err(|e| CliError::new("model", e.to_string()))?;

    // keep the observed window in the file for traceability
    let t1 = model.config.input_frames;
    let window = input.window(input.frames() - t1, t1);
    let mut comments = Vec::with_capacity(t1);
    for frame in 0..t1 {
        let line: Vec<String> = window.pose(frame).iter().map(|v| v.to_string()).collect();
        comments.push(format!("input {}: {}", frame, line.join(" ")));
    }

    fs::create_dir_all(&args.out)?;
    let mut cfg = RunConfig {
        t2: horizon,
        out: args.out.clone(),
        ..RunConfig::default()
    };
    cfg.dataset = args.input.display().to_string();
    write_manifest(
        &args.out,
        "predict",
        &cfg,
        &[("checkpoint", args.checkpoint.display().to_string())],
    )?;

    let path = args.out.join("prediction.txt");
    let mut w = BufWriter::new(File::create(&path)?);
    write_sequence(&mut w, &predicted, &comments)?;
    w.flush()?;
    println!("wrote {} predicted frames to {}", horizon, path.display());
    Ok(())
}
