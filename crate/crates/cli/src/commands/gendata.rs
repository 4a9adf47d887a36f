use std::fs;
use std::path::PathBuf;

use clap::Args;
use deepssm_core::data::{generate, save_sequence, DatasetDescriptor, GeneratorSpec, SplitLists};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::manifest::write_manifest;

#[derive(Args, Debug)]
pub struct GenDataArgs {
    /// Generator spec, e.g. `gen:const-vel,joints=4,frames=120,sequences=8`
    /// or `gen:sinusoid,joints=5,frames=200,sequences=6,freq=0.5,amp=100`.
    #[arg(long)]
    pub spec: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

pub fn run(args: &GenDataArgs) -> Result<(), CliError> {
    let spec = GeneratorSpec::parse(&args.spec)?;
    let sequences = generate(&spec, args.seed)?;
    fs::create_dir_all(&args.out)?;

    for (id, seq) in &sequences {
        save_sequence(&args.out.join(format!("{id}.txt")), seq)?;
    }

    let split_at = spec.sequences - spec.test_count;
    let descriptor = DatasetDescriptor {
        name: format!("gen-{}", spec.kind_name()),
        joints: spec.joints,
        frame_rate: 25.0,
        unit: "mm".into(),
        ordering: (0..spec.joints).collect(),
        splits: SplitLists {
            train: sequences[..split_at].iter().map(|(id, _)| id.clone()).collect(),
            validation: vec![],
            test: sequences[split_at..].iter().map(|(id, _)| id.clone()).collect(),
        },
    };
    let descriptor_path = args.out.join("dataset.json");
    descriptor.save(&descriptor_path)?;

    let cfg = RunConfig {
        dataset: args.spec.clone(),
        seed: args.seed,
        out: args.out.clone(),
        ..RunConfig::default()
    };
    write_manifest(&args.out, "gen-data", &cfg, &[])?;
    println!(
        "wrote {} sequences and {}",
        sequences.len(),
        descriptor_path.display()
    );
    Ok(())
}
