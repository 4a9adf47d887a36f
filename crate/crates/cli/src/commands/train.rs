use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::Args;
use deepssm_core::checkpoint::{self, Checkpoint};
use deepssm_core::data::Split;
use deepssm_core::repr::MotionSequence;
use deepssm_core::train::{TrainSettings, Trainer};
use deepssm_core::DeepSsm;

use super::{resolve_dataset, ConfigArgs};
use crate::error::CliError;
use crate::manifest::write_manifest;

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Continue training from a checkpoint for `epochs` more epochs.
    #[arg(long)]
    pub resume: Option<PathBuf>,
}

pub fn run(args: &TrainArgs) -> Result<(), CliError> {
    let cfg = args.config.resolve()?;
    cfg.validate()?;
    cfg.loss_config()
        .validate()
        .map_err(|e| CliError::validation(e.to_string()))?;

    let dataset = resolve_dataset(&cfg.dataset, cfg.seed)?;
    let train_sequences: Vec<MotionSequence> = dataset
        .split(Split::Train)
        .into_iter()
        .map(|(_, s)| s.clone())
        .collect();
    if train_sequences.is_empty() {
        return Err(CliError::new("dataset", "the train split is empty"));
    }
    let ordering = dataset.descriptor.joint_ordering();

    fs::create_dir_all(&cfg.out)?;
    write_manifest(&cfg.out, "train", &cfg, &[])?;

    let settings = TrainSettings {
        batch_size: cfg.batch_size,
        stride: cfg.stride,
        horizon: cfg.t2,
        seed: cfg.seed,
        adam: cfg.adam_config(),
        loss: cfg.loss_config(),
    };

    let mut trainer = match &args.resume {
        Some(path) => {
            let ck = checkpoint::load(path)?;
            if ck.config.joints != dataset.descriptor.joints {
                return Err(CliError::new(
                    "checkpoint",
                    format!(
                        "checkpoint was trained on {} joints, dataset has {}",
                        ck.config.joints, dataset.descriptor.joints
                    ),
                ));
            }
            let model = DeepSsm {
                config: ck.config.clone(),
                params: ck.params,
            };
            Trainer::with_stats(
                model,
                train_sequences,
                ordering,
                settings,
                ck.stats,
                ck.trained_steps,
                ck.trained_epochs,
            )?
        }
        None => {
            let model = DeepSsm::new(cfg.model_config(dataset.descriptor.joints), cfg.seed)?;
            Trainer::new(model, train_sequences, ordering, settings)?
        }
    };

    let log_path = cfg.out.join("train_log.tsv");
    let mut log = BufWriter::new(File::create(&log_path)?);
    writeln!(log, "epoch\ttotal\tvelocity\tposition")?;
    for _ in 0..cfg.epochs {
        let stats = trainer.epoch()?;
        writeln!(
            log,
            "{}\t{}\t{}\t{}",
            stats.epoch, stats.total, stats.velocity, stats.position
        )?;
        log.flush()?;
        println!(
            "epoch {}: loss {:.6} (velocity {:.6}, position {:.6})",
            stats.epoch, stats.total, stats.velocity, stats.position
        );
    }

    let trained_steps = trainer.trained_steps();
    let trained_epochs = trainer.epochs_started();
    let (model, stats) = trainer.into_model();
    let ckpt = Checkpoint {
        format: checkpoint::FORMAT,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        trained_steps,
        trained_epochs,
        config: model.config.clone(),
        adam: cfg.adam_config(),
        loss: cfg.loss_config(),
        stats,
        ordering: dataset.descriptor.ordering.clone(),
        frame_rate: dataset.descriptor.frame_rate,
        unit: dataset.descriptor.unit.clone(),
        params: model.params,
    };
    let ckpt_path = cfg.out.join("checkpoint.json");
    checkpoint::save(&ckpt_path, &ckpt)?;
    println!(
        "saved checkpoint to {} after {trained_steps} steps",
        ckpt_path.display()
    );
    Ok(())
}
