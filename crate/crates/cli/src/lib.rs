//! Command-line experiments: configuration, orchestration and result files.

pub mod config;
pub mod exit;
pub mod experiments;
pub mod manifest;
pub mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::Result;

use config::ExperimentConfig;
use experiments::{Command, Outcome};
use manifest::{manifest_path, sha256_hex, RunManifest};
use output::{write_atomic, DirLock};

/// Where a run left its files, and what it found.
#[derive(Debug)]
pub struct RunReport {
    pub data_path: PathBuf,
    pub manifest_path: PathBuf,
    pub manifest: RunManifest,
    pub outcome: Outcome,
}

/// Run `command` under `cfg` in the current thread pool and write the data
/// file with its manifest into the output directory.
pub fn execute(command: Command, cfg: &ExperimentConfig) -> Result<RunReport> {
    let _lock = DirLock::acquire(&cfg.output_dir)?;
    let start = Instant::now();
    let outcome = experiments::run(command, cfg)?;
    let bytes = outcome.table.render(cfg.format).into_bytes();
    let data_path = cfg
        .output_dir
        .join(format!("{}.{}", command.name(), cfg.format.extension()));
    write_atomic(&data_path, &bytes)?;

    let mut parameters = BTreeMap::new();
    for (k, v) in cfg.parameters() {
        parameters.insert(k.to_string(), v);
    }
    let manifest = RunManifest {
        command: command.name().to_string(),
        parameters,
        zero_file_digest: outcome.zero_digest.clone(),
        table_limit: outcome.table_limit,
        wall_time_ms: start.elapsed().as_millis() as u64,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        threads: rayon::current_num_threads(),
        result_digest: sha256_hex(&bytes),
    };
    let manifest_path = manifest_path(&data_path);
    write_atomic(&manifest_path, manifest.to_json()?.as_bytes())?;
    Ok(RunReport {
        data_path,
        manifest_path,
        manifest,
        outcome,
    })
}
