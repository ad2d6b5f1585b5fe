//! Run configuration: defaults, `key=value` config files, and flag overrides.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use originality::analysis::{AnalysisConfig, OriginalityMode, OutcomeTransform};
use originality::corpus::{OutcomeModel, SyntheticConfig};
use originality::{DescriptorParams, Metric};

use crate::CliError;

/// Every key a config file or flag may set. Flags use the same names with
/// `-` in place of `_`.
pub const KEYS: &[&str] = &[
    "grid",
    "radii",
    "degree",
    "bandwidth",
    "density",
    "seed",
    "mode",
    "metric",
    "confidence",
    "transform",
    "jobs",
    "metadata",
    "cache",
    "report",
    "plot",
    "out",
    "designs",
    "remix_fraction",
    "original_fraction",
    "perturbation",
    "anisotropy",
    "second_parent_probability",
    "likes_base",
    "likes_original_effect",
    "likes_inherited_effect",
    "likes_dispersion",
    "makes_base",
    "makes_original_effect",
    "makes_inherited_effect",
    "makes_dispersion",
];

const DESCRIPTOR_KEYS: &[&str] = &["grid", "radii", "degree", "bandwidth", "density", "seed"];

/// Raw settings keyed by canonical (snake_case) name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

fn canonical(key: &str) -> String {
    key.trim().replace('-', "_").to_ascii_lowercase()
}

impl Settings {
    /// Parses `key = value` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let mut settings = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split_once('#').map_or(raw, |(before, _)| before).trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("{origin}:{}: expected `key = value`, found `{}`", i + 1, raw.trim()))
            })?;
            settings
                .set(key, value.trim())
                .map_err(|e| CliError::Config(format!("{origin}:{}: {e}", i + 1)))?;
        }
        Ok(settings)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Settings::parse(&text, &path.display().to_string())
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<(), String> {
        let key = canonical(key);
        if !KEYS.contains(&key.as_str()) {
            return Err(format!("unknown setting `{key}`"));
        }
        self.values.insert(key, value.into());
        Ok(())
    }

    /// Sets `key` when `value` is present.
    pub fn set_opt<T: Display>(&mut self, key: &str, value: Option<T>) {
        if let Some(v) = value {
            self.set(key, v.to_string()).expect("flag names are known keys");
        }
    }

    /// `other` wins on conflicts.
    pub fn merged(mut self, other: Settings) -> Settings {
        self.values.extend(other.values);
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|e| CliError::Config(format!("{key} = `{v}`: {e}"))))
            .transpose()
    }

    fn or<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        Ok(self.parsed(key)?.unwrap_or(default))
    }
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub descriptor: DescriptorParams,
    /// Descriptor settings given explicitly (not defaulted); `analyze` checks
    /// only these against the cache.
    pub explicit_descriptor_keys: Vec<&'static str>,
    pub analysis: AnalysisConfig,
    pub synthetic: SyntheticConfig,
    pub jobs: usize,
    pub metadata: Option<PathBuf>,
    pub cache: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn resolve(settings: &Settings) -> Result<RunConfig, CliError> {
        let defaults = DescriptorParams::default();
        let grid = settings.or("grid", defaults.grid)?;
        let descriptor = DescriptorParams {
            grid,
            radii: settings.or("radii", grid / 2)?,
            degree: settings.or("degree", defaults.degree)?,
            bandwidth: settings.or("bandwidth", defaults.bandwidth)?,
            density: settings.or("density", defaults.density)?,
            seed: settings.or("seed", defaults.seed)?,
        };
        descriptor.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let explicit_descriptor_keys =
            DESCRIPTOR_KEYS.iter().copied().filter(|k| settings.get(k).is_some()).collect();

        let analysis = AnalysisConfig {
            mode: settings.or("mode", OriginalityMode::default())?,
            metric: settings.or("metric", Metric::default())?,
            confidence: settings.or("confidence", 0.95)?,
            transform: settings.or("transform", OutcomeTransform::default())?,
        };
        if !(analysis.confidence > 0.0 && analysis.confidence < 1.0) {
            return Err(CliError::Config(format!("confidence {} must lie in (0, 1)", analysis.confidence)));
        }

        let sd = SyntheticConfig::default();
        let outcome = |prefix: &str, d: OutcomeModel| -> Result<OutcomeModel, CliError> {
            Ok(OutcomeModel {
                base: settings.or(&format!("{prefix}_base"), d.base)?,
                original_effect: settings.or(&format!("{prefix}_original_effect"), d.original_effect)?,
                inherited_effect: settings.or(&format!("{prefix}_inherited_effect"), d.inherited_effect)?,
                dispersion: settings.or(&format!("{prefix}_dispersion"), d.dispersion)?,
            })
        };
        let synthetic = SyntheticConfig {
            n_designs: settings.or("designs", sd.n_designs)?,
            remix_fraction: settings.or("remix_fraction", sd.remix_fraction)?,
            original_fraction: settings.or("original_fraction", sd.original_fraction)?,
            perturbation: settings.or("perturbation", sd.perturbation)?,
            anisotropy: settings.or("anisotropy", sd.anisotropy)?,
            second_parent_probability: settings.or("second_parent_probability", sd.second_parent_probability)?,
            likes: outcome("likes", sd.likes)?,
            makes: outcome("makes", sd.makes)?,
            seed: settings.or("seed", sd.seed)?,
        };

        let jobs = settings.or("jobs", 0usize)?;
        let path = |key: &str| settings.get(key).map(PathBuf::from);
        Ok(RunConfig {
            descriptor,
            explicit_descriptor_keys,
            analysis,
            synthetic,
            jobs,
            metadata: path("metadata"),
            cache: path("cache"),
            report: path("report"),
            plot: path("plot"),
            out: path("out"),
        })
    }

    /// Convenience for library callers: defaults plus `pairs`.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<RunConfig, CliError> {
        let mut settings = Settings::default();
        for (k, v) in pairs {
            settings.set(k, v).map_err(CliError::Config)?;
        }
        RunConfig::resolve(&settings)
    }

    pub(crate) fn require(path: &Option<PathBuf>, key: &str) -> Result<PathBuf, CliError> {
        path.clone().ok_or_else(|| CliError::Config(format!("missing required setting `{key}`")))
    }
}
