use std::fs;
use std::path::PathBuf;

use clap::Args;
use deepssm_core::checkpoint;
use deepssm_core::data::Split;
use deepssm_core::repr::JointOrdering;
use deepssm_core::DeepSsm;

use super::{evaluate_split, parse_horizons, resolve_dataset, EvalRows, Predictor};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::manifest::write_manifest;
use crate::table::Table;

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Model checkpoint; omit to evaluate baselines only.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Dataset descriptor path or `gen:` spec.
    #[arg(long)]
    pub dataset: String,
    /// Baseline columns to add: zero and/or const.
    #[arg(long)]
    pub baseline: Vec<String>,
    /// Comma-separated prediction steps to report.
    #[arg(long, default_value = "2,4,8,10,14,25")]
    pub horizons: String,
    /// Window stride over each test sequence.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    /// Observed window length for baseline-only runs (a checkpoint's own
    /// window length takes precedence).
    #[arg(long, default_value_t = 10)]
    pub t1: usize,
    /// Seed for `gen:` datasets (must match the training run).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

pub fn run(args: &EvaluateArgs) -> Result<(), CliError> {
    if args.checkpoint.is_none() && args.baseline.is_empty() {
        return Err(CliError::usage(
            "nothing to evaluate: give --checkpoint and/or --baseline",
        ));
    }
    let horizons = parse_horizons(&args.horizons)?;
    let dataset = resolve_dataset(&args.dataset, args.seed)?;

    struct Column {
        suffix: Option<&'static str>,
        rows: EvalRows,
    }
    let mut columns: Vec<Column> = Vec::new();

    let loaded = match &args.checkpoint {
        Some(path) => {
            let ck = checkpoint::load(path)?;
            let max_h = *horizons.iter().max().unwrap();
            if max_h > ck.config.max_horizon {
                return Err(CliError::validation(format!(
                    "horizon {max_h} beyond the model maximum {}",
                    ck.config.max_horizon
                )));
            }
            let ordering = JointOrdering::new(ck.ordering.clone())
                .map_err(|e| CliError::new("checkpoint", e.to_string()))?;
            let model = DeepSsm {
                config: ck.config.clone(),
                params: ck.params.clone(),
            };
            Some((model, ck.stats.clone(), ordering, ck.config.input_frames))
        }
        None => None,
    };

    // baselines see the same observed window the model does
    let t1 = loaded.as_ref().map(|(_, _, _, t1)| *t1).unwrap_or(args.t1);

    if let Some((model, stats, ordering, _)) = &loaded {
        let predictor = Predictor::Model {
            model,
            stats,
            ordering,
        };
        columns.push(Column {
            suffix: None,
            rows: evaluate_split(&predictor, &dataset, Split::Test, t1, &horizons, args.stride)?,
        });
    }
    for name in &args.baseline {
        let predictor = Predictor::from_baseline_name(name)?;
        let suffix = match name.as_str() {
            "zero" => "zero",
            _ => "const",
        };
        columns.push(Column {
            suffix: Some(suffix),
            rows: evaluate_split(&predictor, &dataset, Split::Test, t1, &horizons, args.stride)?,
        });
    }

    let mut header = vec!["sequence".to_string()];
    for column in &columns {
        for h in &horizons {
            header.push(match column.suffix {
                None => h.to_string(),
                Some(sfx) => format!("{h}:{sfx}"),
            });
        }
    }
    let mut table = Table::new(header);
    let row_ids: Vec<String> = columns[0].rows.rows.iter().map(|(id, _)| id.clone()).collect();
    for (i, id) in row_ids.iter().enumerate() {
        let mut values = Vec::new();
        for column in &columns {
            values.extend_from_slice(&column.rows.rows[i].1);
        }
        table.push_row(id, &values);
    }
    let mut avg = Vec::new();
    for column in &columns {
        avg.extend_from_slice(&column.rows.average());
    }
    table.push_row("average", &avg);

    let rendered = table.render();
    print!("{rendered}");

    fs::create_dir_all(&args.out)?;
    let cfg = RunConfig {
        dataset: args.dataset.clone(),
        seed: args.seed,
        stride: args.stride,
        out: args.out.clone(),
        ..RunConfig::default()
    };
    let mut extra = vec![("horizons", args.horizons.clone())];
    if let Some(p) = &args.checkpoint {
        extra.push(("checkpoint", p.display().to_string()));
    }
    if !args.baseline.is_empty() {
        extra.push(("baselines", args.baseline.join(",")));
    }
    write_manifest(&args.out, "evaluate", &cfg, &extra)?;
    fs::write(args.out.join("evaluation.tsv"), rendered)?;
    Ok(())
}
