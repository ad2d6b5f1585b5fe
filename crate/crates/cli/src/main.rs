use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tracing::error;
use tracing_subscriber::EnvFilter;

use originality_cli::{analysis_exit_code, cmd_analyze, cmd_describe, cmd_synth, CliError, RunConfig, Settings};

#[derive(Parser)]
#[command(name = "originality", version, about = "Shape-descriptor originality analysis for remix corpora")]
struct Cli {
    /// File of `key = value` lines; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Log filter for standard error, e.g. `info` or `originality=debug`.
    #[arg(long, global = true, default_value = "warn")]
    log_level: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus with known ground truth.
    Synth {
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        synth: SynthFlags,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compute shape descriptors into a cache file.
    Describe {
        #[arg(long)]
        metadata: Option<PathBuf>,
        #[arg(long)]
        cache: Option<PathBuf>,
        #[command(flatten)]
        descriptor: DescriptorFlags,
        /// Worker threads (0 = one per core).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Score originality, run the four comparisons, write report and plot CSV.
    Analyze {
        #[arg(long)]
        metadata: Option<PathBuf>,
        #[arg(long)]
        cache: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        plot: Option<PathBuf>,
        #[command(flatten)]
        descriptor: DescriptorFlags,
        /// parent-min, nearest-neighbor or hybrid.
        #[arg(long)]
        mode: Option<String>,
        /// l2 or l1.
        #[arg(long)]
        metric: Option<String>,
        #[arg(long)]
        confidence: Option<f64>,
        /// none or log1p, applied to likes and makes before testing.
        #[arg(long)]
        transform: Option<String>,
    },
}

#[derive(Args)]
struct DescriptorFlags {
    /// Voxel grid size n (even).
    #[arg(long)]
    grid: Option<usize>,
    /// Concentric spheres R (default n/2).
    #[arg(long)]
    radii: Option<usize>,
    /// Maximum harmonic degree L.
    #[arg(long)]
    degree: Option<usize>,
    /// Sphere sampling bandwidth B (at least L+1).
    #[arg(long)]
    bandwidth: Option<usize>,
    /// Surface samples per unit normalized area.
    #[arg(long)]
    density: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SynthFlags {
    #[arg(long)]
    designs: Option<usize>,
    #[arg(long)]
    remix_fraction: Option<f64>,
    #[arg(long)]
    original_fraction: Option<f64>,
    #[arg(long)]
    perturbation: Option<f64>,
    #[arg(long)]
    anisotropy: Option<f64>,
    #[arg(long)]
    second_parent_probability: Option<f64>,
    #[arg(long)]
    likes_base: Option<f64>,
    #[arg(long)]
    likes_original_effect: Option<f64>,
    #[arg(long)]
    likes_inherited_effect: Option<f64>,
    #[arg(long)]
    likes_dispersion: Option<f64>,
    #[arg(long)]
    makes_base: Option<f64>,
    #[arg(long)]
    makes_original_effect: Option<f64>,
    #[arg(long)]
    makes_inherited_effect: Option<f64>,
    #[arg(long)]
    makes_dispersion: Option<f64>,
}

impl DescriptorFlags {
    fn apply(self, s: &mut Settings) {
        s.set_opt("grid", self.grid);
        s.set_opt("radii", self.radii);
        s.set_opt("degree", self.degree);
        s.set_opt("bandwidth", self.bandwidth);
        s.set_opt("density", self.density);
        s.set_opt("seed", self.seed);
    }
}

impl SynthFlags {
    fn apply(self, s: &mut Settings) {
        s.set_opt("designs", self.designs);
        s.set_opt("remix_fraction", self.remix_fraction);
        s.set_opt("original_fraction", self.original_fraction);
        s.set_opt("perturbation", self.perturbation);
        s.set_opt("anisotropy", self.anisotropy);
        s.set_opt("second_parent_probability", self.second_parent_probability);
        s.set_opt("likes_base", self.likes_base);
        s.set_opt("likes_original_effect", self.likes_original_effect);
        s.set_opt("likes_inherited_effect", self.likes_inherited_effect);
        s.set_opt("likes_dispersion", self.likes_dispersion);
        s.set_opt("makes_base", self.makes_base);
        s.set_opt("makes_original_effect", self.makes_original_effect);
        s.set_opt("makes_inherited_effect", self.makes_inherited_effect);
        s.set_opt("makes_dispersion", self.makes_dispersion);
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let file = match &cli.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    let mut flags = Settings::default();
    enum Which {
        Synth,
        Describe,
        Analyze,
    }
    let which = match cli.command {
        Command::Synth { out, synth, seed } => {
            flags.set_opt("out", out.map(|p| p.display().to_string()));
            flags.set_opt("seed", seed);
            synth.apply(&mut flags);
            Which::Synth
        }
        Command::Describe { metadata, cache, descriptor, jobs } => {
            flags.set_opt("metadata", metadata.map(|p| p.display().to_string()));
            flags.set_opt("cache", cache.map(|p| p.display().to_string()));
            flags.set_opt("jobs", jobs);
            descriptor.apply(&mut flags);
            Which::Describe
        }
        Command::Analyze { metadata, cache, report, plot, descriptor, mode, metric, confidence, transform } => {
            for (key, path) in [("metadata", metadata), ("cache", cache), ("report", report), ("plot", plot)] {
                flags.set_opt(key, path.map(|p| p.display().to_string()));
            }
            flags.set_opt("mode", mode);
            flags.set_opt("metric", metric);
            flags.set_opt("confidence", confidence);
            flags.set_opt("transform", transform);
            descriptor.apply(&mut flags);
            Which::Analyze
        }
    };
    let config = RunConfig::resolve(&file.merged(flags))?;
    match which {
        Which::Synth => cmd_synth(&config).map(|_| 0),
        Which::Describe => {
            let summary = cmd_describe(&config)?;
            println!("{summary}");
            Ok(0)
        }
        Which::Analyze => cmd_analyze(&config).map(|report| analysis_exit_code(&report)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let filter = EnvFilter::try_new(&cli.log_level).unwrap_or_else(|_| EnvFilter::new("warn"));
    tracing_subscriber::fmt().with_env_filter(filter).with_writer(std::io::stderr).init();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            error!("{e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
