//! Every command writes a manifest into its output directory: the resolved
//! configuration, the seed, and the tool version, which is enough to
//! reproduce the run exactly.

use std::fs;
use std::path::Path;

use crate::config::RunConfig;
use crate::error::CliError;

pub fn write_manifest(
    out_dir: &Path,
    command: &str,
    config: &RunConfig,
    extra: &[(&str, String)],
) -> Result<(), CliError> {
    fs::create_dir_all(out_dir)?;
    let mut text = String::new();
    text.push_str(&format!("command = {command}\n"));
    text.push_str(&format!("version = {}\n", env!("CARGO_PKG_VERSION")));
    for (key, value) in extra {
        text.push_str(&format!("{key} = {value}\n"));
    }
    text.push_str(&config.render());
    fs::write(out_dir.join("manifest.txt"), text)?;
    Ok(())
}
