//! Pipeline commands behind the `originality` binary: synthesize a corpus,
//! compute descriptors into a cache, and analyze a corpus.
//!
//! Exit codes: 0 success, 2 input or configuration error, 3 analysis
//! finished but at least one comparison was degenerate.

pub mod config;

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;
use tracing::{info, warn};

use originality::corpus::{generate_synthetic, load_descriptors, load_metadata, save_descriptors, DescriptorCache};
use originality::{describe_mesh, emit_plot_data, parse_stl, render_report, run_analysis, AnalysisReport};

pub use config::{RunConfig, Settings};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flag, config file or parameter combination.
    #[error("configuration error: {0}")]
    Config(String),
    /// Unreadable or malformed input file.
    #[error("input error: {0}")]
    Input(String),
    /// Descriptor cache built with other parameters.
    #[error("parameter mismatch: {0}")]
    ParamMismatch(String),
    #[error("output error: {0}")]
    Output(String),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;

impl CliError {
    /// Every error maps to the input/config code; degenerate analyses are
    /// not errors and get their code from [`analysis_exit_code`].
    pub fn exit_code(&self) -> i32 {
        EXIT_INPUT
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))
}

/// Writes a synthetic corpus to `out`.
pub fn cmd_synth(config: &RunConfig) -> Result<PathBuf, CliError> {
    let out = RunConfig::require(&config.out, "out")?;
    let corpus = generate_synthetic(&config.synthetic).map_err(|e| CliError::Config(e.to_string()))?;
    corpus.write_to(&out).map_err(|e| CliError::Output(e.to_string()))?;
    info!(designs = corpus.designs.len(), dir = %out.display(), "synthetic corpus written");
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DescribeSummary {
    pub computed: usize,
    pub skipped: usize,
    pub failed: usize,
    /// Rows in the cache after the run.
    pub total: usize,
}

impl std::fmt::Display for DescribeSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "computed={} skipped={} failed={}", self.computed, self.skipped, self.failed)
    }
}

fn load_cache(path: &Path) -> Result<DescriptorCache, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    load_descriptors(BufReader::new(file)).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {jobs} worker threads: {e}")))
}

/// Computes descriptors for every metadata row not already in the cache.
///
/// Mesh paths are resolved against the metadata file's directory. A mesh
/// that cannot be read or described is logged and counted, and does not stop
/// the batch. The run fails only when the cache ends up empty.
pub fn cmd_describe(config: &RunConfig) -> Result<DescribeSummary, CliError> {
    let metadata_path = RunConfig::require(&config.metadata, "metadata")?;
    let cache_path = RunConfig::require(&config.cache, "cache")?;
    let records = load_metadata(&read(&metadata_path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", metadata_path.display())))?;
    let base_dir = metadata_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let params = config.descriptor;

    let mut cache = if cache_path.exists() {
        let existing = load_cache(&cache_path)?;
        existing.require_params(&params).map_err(|e| {
            CliError::ParamMismatch(format!("{e}; use another cache path or matching flags"))
        })?;
        existing
    } else {
        DescriptorCache::new(params)
    };

    let todo: Vec<_> = records.iter().filter(|r| !cache.contains(&r.id)).collect();
    let skipped = records.len() - todo.len();
    let results: Vec<(String, Result<_, String>)> = pool(config.jobs)?.install(|| {
        todo.par_iter()
            .map(|r| {
                let path = base_dir.join(&r.mesh_path);
                let result = fs::read(&path)
                    .map_err(|e| format!("cannot read {}: {e}", path.display()))
                    .and_then(|bytes| parse_stl(&bytes).map_err(|e| format!("{}: {e}", path.display())))
                    .and_then(|mesh| describe_mesh(&mesh, &params).map_err(|e| format!("{}: {e}", path.display())));
                (r.id.clone(), result)
            })
            .collect()
    });

    let (mut computed, mut failed) = (0, 0);
    for (id, result) in results {
        match result.map(|d| cache.insert(id.clone(), d).map_err(|e| e.to_string())) {
            Ok(Ok(())) => computed += 1,
            Ok(Err(e)) | Err(e) => {
                warn!(design = %id, "descriptor failed: {e}");
                failed += 1;
            }
        }
    }
    let summary = DescribeSummary { computed, skipped, failed, total: cache.len() };
    if cache.is_empty() {
        return Err(CliError::Input(format!("no descriptor could be computed ({summary})")));
    }
    let file = fs::File::create(&cache_path)
        .map_err(|e| CliError::Output(format!("cannot write {}: {e}", cache_path.display())))?;
    save_descriptors(&cache, BufWriter::new(file)).map_err(|e| CliError::Output(e.to_string()))?;
    info!(%summary, cache = %cache_path.display(), "descriptor cache written");
    Ok(summary)
}

/// Runs the analysis and writes the report and plot CSV. Returns the report
/// so callers can pick the exit code with [`analysis_exit_code`].
pub fn cmd_analyze(config: &RunConfig) -> Result<AnalysisReport, CliError> {
    let metadata_path = RunConfig::require(&config.metadata, "metadata")?;
    let cache_path = RunConfig::require(&config.cache, "cache")?;
    let report_path = RunConfig::require(&config.report, "report")?;
    let plot_path = RunConfig::require(&config.plot, "plot")?;
    let records = load_metadata(&read(&metadata_path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", metadata_path.display())))?;
    let cache = load_cache(&cache_path)?;

    let cached = cache.params();
    let wanted = &config.descriptor;
    let differs: Vec<String> = config
        .explicit_descriptor_keys
        .iter()
        .filter_map(|key| {
            let (have, want) = match *key {
                "grid" => (cached.grid.to_string(), wanted.grid.to_string()),
                "radii" => (cached.radii.to_string(), wanted.radii.to_string()),
                "degree" => (cached.degree.to_string(), wanted.degree.to_string()),
                "bandwidth" => (cached.bandwidth.to_string(), wanted.bandwidth.to_string()),
                "density" => (cached.density.to_string(), wanted.density.to_string()),
                "seed" => (cached.seed.to_string(), wanted.seed.to_string()),
                _ => return None,
            };
            (have != want).then(|| format!("{key}: cache has {have}, requested {want}"))
        })
        .collect();
    if !differs.is_empty() {
        return Err(CliError::ParamMismatch(format!("{} ({})", cache_path.display(), differs.join(", "))));
    }

    let descriptors: BTreeMap<_, _> = cache.into_entries();
    let report =
        run_analysis(records, &descriptors, &config.analysis).map_err(|e| CliError::Input(e.to_string()))?;
    for w in &report.warnings {
        warn!("{w}");
    }
    write(&report_path, render_report(&report).as_bytes())?;
    write(&plot_path, emit_plot_data(&report).as_bytes())?;
    Ok(report)
}

pub fn analysis_exit_code(report: &AnalysisReport) -> i32 {
    if report.has_degenerate() {
        EXIT_DEGENERATE
    } else {
        EXIT_OK
    }
}
