use std::fs;

use clap::Args;
use deepssm_core::data::Split;
use deepssm_core::repr::MotionSequence;
use deepssm_core::train::{TrainSettings, Trainer};
use deepssm_core::DeepSsm;

use super::{evaluate_split, parse_horizons, resolve_dataset, ConfigArgs, Predictor};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::manifest::write_manifest;
use crate::table::Table;

#[derive(Args, Debug)]
pub struct AblateArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Comma-separated prediction steps to report.
    #[arg(long, default_value = "2,4,8,10,14,25")]
    pub horizons: String,
}

/// The nine component-removal configurations: each toggles one or two flags
/// off the shared base; the last row is the unmodified model.
pub const ROWS: [(&str, &[&str]); 9] = [
    ("#1 no-xyz-split", &["no-xyz-split"]),
    ("#2 no-pose-branch", &["no-pose-branch"]),
    ("#3 no-velocity-branch", &["no-velocity-branch"]),
    ("#4 no-Lp", &["no-Lp"]),
    ("#5 no-Lv", &["no-Lv"]),
    ("#6 no-ATPL", &["no-ATPL"]),
    ("#7 no-pose-branch no-Lp", &["no-pose-branch", "no-Lp"]),
    ("#8 no-velocity-branch no-Lv", &["no-velocity-branch", "no-Lv"]),
    ("#9 full", &[]),
];

fn apply_flags(base: &RunConfig, flags: &[&str]) -> Result<RunConfig, CliError> {
    let mut cfg = base.clone();
    for flag in flags {
        cfg.set(flag, "true")?;
    }
    Ok(cfg)
}

/// Train and evaluate one configuration; returns the per-horizon averages.
fn run_row(cfg: &RunConfig, horizons: &[usize]) -> Result<Vec<f64>, CliError> {
    cfg.validate()?;
    let dataset = resolve_dataset(&cfg.dataset, cfg.seed)?;
    let train_sequences: Vec<MotionSequence> = dataset
        .split(Split::Train)
        .into_iter()
        .map(|(_, s)| s.clone())
        .collect();
    let ordering = dataset.descriptor.joint_ordering();
    let model = DeepSsm::new(cfg.model_config(dataset.descriptor.joints), cfg.seed)?;
    let settings = TrainSettings {
        batch_size: cfg.batch_size,
        stride: cfg.stride,
        horizon: cfg.t2,
        seed: cfg.seed,
        adam: cfg.adam_config(),
        loss: cfg.loss_config(),
    };
    let mut trainer = Trainer::new(model, train_sequences, ordering.clone(), settings)?;
    for _ in 0..cfg.epochs {
        trainer.epoch()?;
    }
    let (model, stats) = trainer.into_model();
    let predictor = Predictor::Model {
        model: &model,
        stats: &stats,
        ordering: &ordering,
    };
    let rows = evaluate_split(
        &predictor,
        &dataset,
        Split::Test,
        cfg.t1,
        horizons,
        cfg.stride,
    )?;
    Ok(rows.average())
}

pub fn run(args: &AblateArgs) -> Result<(), CliError> {
    let base = args.config.resolve()?;
    base.validate()?;
    let horizons = parse_horizons(&args.horizons)?;
    if horizons.iter().any(|&h| h > base.t2) {
        return Err(CliError::validation(format!(
            "horizons {:?} exceed t2 {}",
            horizons, base.t2
        )));
    }

    fs::create_dir_all(&base.out)?;
    write_manifest(
        &base.out,
        "ablate",
        &base,
        &[("horizons", args.horizons.clone())],
    )?;

    let mut header = vec!["configuration".to_string()];
    header.extend(horizons.iter().map(|h| h.to_string()));
    header.push("average".to_string());
    let mut table = Table::new(header);

    for (label, flags) in ROWS {
        let cfg = apply_flags(&base, flags)?;
        let averages = run_row(&cfg, &horizons)?;
        let mean = averages.iter().sum::<f64>() / averages.len() as f64;
        let mut values = averages;
        values.push(mean);
        table.push_row(label, &values);
        println!("{label}: mean MPJPE {mean:.6}");
    }

    let rendered = table.render();
    print!("{rendered}");
    fs::write(base.out.join("ablation.tsv"), rendered)?;
    Ok(())
}
