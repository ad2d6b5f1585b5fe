//! Originality scores, the mean split, the four Welch comparisons, and the
//! text report and plot data built from them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use rayon::prelude::*;
use thiserror::Error;

use crate::corpus::{build_graph, classify, CorpusError, DesignRecord, InheritanceClass, RemixGraph};
use crate::descriptor::{DescriptorError, Metric, ShapeDescriptor};
use crate::stats::{mean_interval, summarize, welch_test, GroupSummary, StatsError, WelchResult};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("no descriptor for design `{0}`")]
    NoDescriptor(String),
    #[error("design `{0}` has no parent with a descriptor")]
    NoParents(String),
    #[error("originality needs at least 2 designs with descriptors")]
    SingletonCorpus,
    #[error("the mean split needs at least 2 scores, got {0}")]
    TooFewScores(usize),
    #[error("confidence {0} must lie in (0, 1)")]
    InvalidConfidence(f64),
    #[error(transparent)]
    Descriptor(#[from] DescriptorError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// What a design's originality distance is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum OriginalityMode {
    /// Closest parent.
    ParentMin,
    /// Closest other design, earlier ones only when timestamps allow.
    NearestNeighbor,
    /// Parent-min for inherited designs, nearest-neighbor for standalone ones.
    #[default]
    Hybrid,
}

impl std::str::FromStr for OriginalityMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "parent-min" | "parent" => Ok(OriginalityMode::ParentMin),
            "nearest-neighbor" | "nearest" | "nn" => Ok(OriginalityMode::NearestNeighbor),
            "hybrid" => Ok(OriginalityMode::Hybrid),
            other => Err(format!("unknown originality mode `{other}` (expected parent-min, nearest-neighbor or hybrid)")),
        }
    }
}

impl fmt::Display for OriginalityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OriginalityMode::ParentMin => "parent-min",
            OriginalityMode::NearestNeighbor => "nearest-neighbor",
            OriginalityMode::Hybrid => "hybrid",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OriginalityScore {
    pub design_id: String,
    pub distance: f64,
    /// The rule actually applied: `ParentMin` or `NearestNeighbor`.
    pub mode_used: OriginalityMode,
    /// Id of the design at the minimum distance.
    pub closest: String,
    /// Nearest-neighbor search was meant to look only at earlier designs but
    /// found none, so it used every other design.
    pub unrestricted_fallback: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoringOptions {
    pub mode: OriginalityMode,
    pub metric: Metric,
    /// Restrict nearest-neighbor candidates to strictly earlier timestamps.
    pub prior_only: bool,
}

impl Default for ScoringOptions {
    fn default() -> Self {
        ScoringOptions { mode: OriginalityMode::Hybrid, metric: Metric::L2, prior_only: true }
    }
}

fn closest<'a>(
    target: &ShapeDescriptor,
    candidates: impl Iterator<Item = (&'a str, &'a ShapeDescriptor)>,
    metric: Metric,
) -> Result<Option<(f64, &'a str)>, DescriptorError> {
    let mut best: Option<(f64, &str)> = None;
    for (id, d) in candidates {
        let dist = metric.distance(target, d)?;
        // Strict comparison keeps the first (smallest id) of tied candidates.
        if best.is_none_or(|(b, _)| dist < b) {
            best = Some((dist, id));
        }
    }
    Ok(best)
}

/// Scores one design. Parents without descriptors are ignored; a hybrid
/// score falls back to nearest-neighbor when none remain.
pub fn originality_score(
    id: &str,
    descriptors: &BTreeMap<String, ShapeDescriptor>,
    graph: &RemixGraph,
    options: &ScoringOptions,
) -> Result<OriginalityScore, AnalysisError> {
    let own = descriptors.get(id).ok_or_else(|| AnalysisError::NoDescriptor(id.to_string()))?;
    if descriptors.len() < 2 {
        return Err(AnalysisError::SingletonCorpus);
    }
    let parents: Vec<(&str, &ShapeDescriptor)> = graph
        .parents(id)
        .iter()
        .filter_map(|p| descriptors.get_key_value(p).map(|(k, d)| (k.as_str(), d)))
        .collect();
    let use_parents = match options.mode {
        OriginalityMode::ParentMin => {
            if parents.is_empty() {
                return Err(AnalysisError::NoParents(id.to_string()));
            }
            true
        }
        OriginalityMode::Hybrid => !parents.is_empty(),
        OriginalityMode::NearestNeighbor => false,
    };
    if use_parents {
        let (distance, near) = closest(own, parents.into_iter(), options.metric)?.expect("non-empty parents");
        return Ok(OriginalityScore {
            design_id: id.to_string(),
            distance,
            mode_used: OriginalityMode::ParentMin,
            closest: near.to_string(),
            unrestricted_fallback: false,
        });
    }

    let others = || descriptors.iter().filter(|(k, _)| k.as_str() != id).map(|(k, d)| (k.as_str(), d));
    let own_time = graph.record(id).and_then(|r| r.timestamp);
    let mut fallback = false;
    let mut best = None;
    if let (true, Some(t)) = (options.prior_only, own_time) {
        let earlier = others().filter(|(k, _)| graph.record(k).and_then(|r| r.timestamp).is_some_and(|u| u < t));
        best = closest(own, earlier, options.metric)?;
        fallback = best.is_none();
    }
    if best.is_none() {
        best = closest(own, others(), options.metric)?;
    }
    let (distance, near) = best.expect("at least one other descriptor");
    Ok(OriginalityScore {
        design_id: id.to_string(),
        distance,
        mode_used: OriginalityMode::NearestNeighbor,
        closest: near.to_string(),
        unrestricted_fallback: fallback,
    })
}

/// Scores every id in `ids` in parallel; output follows `ids` order.
pub fn score_designs(
    ids: &[&str],
    descriptors: &BTreeMap<String, ShapeDescriptor>,
    graph: &RemixGraph,
    options: &ScoringOptions,
) -> Vec<Result<OriginalityScore, AnalysisError>> {
    ids.par_iter().map(|id| originality_score(id, descriptors, graph, options)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OriginalityPartition {
    /// Arithmetic mean of all scores.
    pub threshold: f64,
    pub original_ids: BTreeSet<String>,
    pub imitative_ids: BTreeSet<String>,
}

/// Splits at the mean distance: strictly above is original, the rest
/// (including ties) imitative.
pub fn partition_by_mean(scores: &[OriginalityScore]) -> Result<OriginalityPartition, AnalysisError> {
    if scores.len() < 2 {
        return Err(AnalysisError::TooFewScores(scores.len()));
    }
    let threshold = scores.iter().map(|s| s.distance).sum::<f64>() / scores.len() as f64;
    let (original, imitative): (Vec<_>, Vec<_>) = scores.iter().partition(|s| s.distance > threshold);
    Ok(OriginalityPartition {
        threshold,
        original_ids: original.into_iter().map(|s| s.design_id.clone()).collect(),
        imitative_ids: imitative.into_iter().map(|s| s.design_id.clone()).collect(),
    })
}

/// Optional transform applied to likes and makes before testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutcomeTransform {
    #[default]
    Identity,
    Log1p,
}

impl OutcomeTransform {
    fn apply(&self, count: u64) -> f64 {
        match self {
            OutcomeTransform::Identity => count as f64,
            OutcomeTransform::Log1p => (count as f64).ln_1p(),
        }
    }
}

impl std::str::FromStr for OutcomeTransform {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "identity" => Ok(OutcomeTransform::Identity),
            "log1p" => Ok(OutcomeTransform::Log1p),
            other => Err(format!("unknown outcome transform `{other}` (expected none or log1p)")),
        }
    }
}

impl fmt::Display for OutcomeTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutcomeTransform::Identity => "none",
            OutcomeTransform::Log1p => "log1p",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisConfig {
    pub mode: OriginalityMode,
    pub metric: Metric,
    pub confidence: f64,
    pub transform: OutcomeTransform,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            mode: OriginalityMode::Hybrid,
            metric: Metric::L2,
            confidence: 0.95,
            transform: OutcomeTransform::Identity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Originality,
    Inheritance,
}

impl Dimension {
    pub fn name(&self) -> &'static str {
        match self {
            Dimension::Originality => "originality",
            Dimension::Inheritance => "inheritance",
        }
    }

    fn labels(&self) -> (&'static str, &'static str) {
        match self {
            Dimension::Originality => ("Original", "Imitative"),
            Dimension::Inheritance => ("Inherited", "Standalone"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Likes,
    Makes,
}

impl Outcome {
    pub fn name(&self) -> &'static str {
        match self {
            Outcome::Likes => "likes",
            Outcome::Makes => "makes",
        }
    }

    fn of(&self, r: &DesignRecord) -> u64 {
        match self {
            Outcome::Likes => r.likes,
            Outcome::Makes => r.makes,
        }
    }

    fn title(&self) -> &'static str {
        match self {
            Outcome::Likes => "Popularity (likes)",
            Outcome::Makes => "Practicality (makes)",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupStats {
    pub label: &'static str,
    pub n: usize,
    /// Absent when `n < 2`.
    pub summary: Option<GroupSummary>,
    /// Confidence interval of the group mean.
    pub interval: Option<(f64, f64)>,
}

/// Why a comparison produced no test.
#[derive(Debug, Clone, PartialEq)]
pub enum Degenerate {
    EmptyGroup { group: &'static str, n: usize },
    Stats(StatsError),
}

impl fmt::Display for Degenerate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degenerate::EmptyGroup { group, n } => write!(f, "group {group} has n={n} (need at least 2)"),
            Degenerate::Stats(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub dimension: Dimension,
    pub outcome: Outcome,
    pub first: GroupStats,
    pub second: GroupStats,
    /// Welch test of `first - second`.
    pub result: Result<WelchResult, Degenerate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotRow {
    pub comparison: &'static str,
    pub group: &'static str,
    pub outcome: &'static str,
    pub n: usize,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport {
    pub config: AnalysisConfig,
    pub n_records: usize,
    /// Designs that had descriptors and entered the analysis.
    pub n_analyzed: usize,
    pub n_missing_descriptors: usize,
    pub scores: Vec<OriginalityScore>,
    pub partition: OriginalityPartition,
    pub classes: BTreeMap<String, InheritanceClass>,
    /// In order: originality x likes, originality x makes, inheritance x
    /// likes, inheritance x makes.
    pub comparisons: Vec<Comparison>,
    pub plot_rows: Vec<PlotRow>,
    pub warnings: Vec<String>,
}

impl AnalysisReport {
    pub fn has_degenerate(&self) -> bool {
        self.comparisons.iter().any(|c| c.result.is_err())
    }

    pub fn comparison(&self, dimension: Dimension, outcome: Outcome) -> &Comparison {
        self.comparisons
            .iter()
            .find(|c| c.dimension == dimension && c.outcome == outcome)
            .expect("all four comparisons are present")
    }
}

fn group_stats(label: &'static str, values: &[f64], confidence: f64) -> GroupStats {
    let summary = summarize(values).ok();
    let interval = summary.as_ref().and_then(|s| mean_interval(s, confidence).ok());
    GroupStats { label, n: values.len(), summary, interval }
}

fn compare(
    dimension: Dimension,
    outcome: Outcome,
    groups: (&BTreeSet<&str>, &BTreeSet<&str>),
    graph: &RemixGraph,
    config: &AnalysisConfig,
) -> Comparison {
    let values = |ids: &BTreeSet<&str>| -> Vec<f64> {
        ids.iter()
            .map(|id| config.transform.apply(outcome.of(graph.record(id).expect("id from graph"))))
            .collect()
    };
    let (la, lb) = dimension.labels();
    let first = group_stats(la, &values(groups.0), config.confidence);
    let second = group_stats(lb, &values(groups.1), config.confidence);
    let result = match (&first.summary, &second.summary) {
        (Some(a), Some(b)) => welch_test(a, b, config.confidence).map_err(Degenerate::Stats),
        (None, _) => Err(Degenerate::EmptyGroup { group: la, n: first.n }),
        (_, None) => Err(Degenerate::EmptyGroup { group: lb, n: second.n }),
    };
    Comparison { dimension, outcome, first, second, result }
}

/// Scores, splits and tests the corpus.
///
/// The analyzed population is the set of designs that have descriptors;
/// inheritance classes come from the full remix graph. Nearest-neighbor
/// scoring looks only at earlier designs when every analyzed design has a
/// timestamp, and at all other designs otherwise.
pub fn run_analysis(
    records: Vec<DesignRecord>,
    descriptors: &BTreeMap<String, ShapeDescriptor>,
    config: &AnalysisConfig,
) -> Result<AnalysisReport, AnalysisError> {
    if !(config.confidence > 0.0 && config.confidence < 1.0) {
        return Err(AnalysisError::InvalidConfidence(config.confidence));
    }
    let n_records = records.len();
    let (graph, graph_warnings) = build_graph(records)?;
    let mut warnings: Vec<String> = graph_warnings.iter().map(|w| w.to_string()).collect();
    let classes = classify(&graph);

    let population: Vec<&str> = graph.ids().filter(|id| descriptors.contains_key(*id)).collect();
    let n_missing = graph.len() - population.len();
    if n_missing > 0 {
        warnings.push(format!("{n_missing} design(s) have no descriptor and were dropped"));
    }
    let extra = descriptors.keys().filter(|k| graph.record(k).is_none()).count();
    if extra > 0 {
        warnings.push(format!("{extra} descriptor(s) have no metadata row and were ignored"));
    }
    if population.len() < 2 {
        return Err(AnalysisError::SingletonCorpus);
    }
    let analyzed: BTreeMap<String, ShapeDescriptor> =
        population.iter().map(|id| (id.to_string(), descriptors[*id].clone())).collect();

    let prior_only = population.iter().all(|id| graph.record(id).is_some_and(|r| r.timestamp.is_some()));
    if !prior_only && config.mode != OriginalityMode::ParentMin {
        warnings.push("timestamps missing; nearest-neighbor scores use all other designs".to_string());
    }
    let options = ScoringOptions { mode: config.mode, metric: config.metric, prior_only };
    let mut scores = Vec::with_capacity(population.len());
    let mut unscored = 0;
    for result in score_designs(&population, &analyzed, &graph, &options) {
        match result {
            Ok(s) => scores.push(s),
            Err(AnalysisError::NoParents(_)) => unscored += 1,
            Err(e) => return Err(e),
        }
    }
    if unscored > 0 {
        warnings.push(format!("{unscored} design(s) without scorable parents were left out of the originality split"));
    }
    let fallbacks = scores.iter().filter(|s| s.unrestricted_fallback).count();
    if fallbacks > 0 {
        warnings.push(format!(
            "{fallbacks} design(s) have no earlier design; their nearest neighbor was taken over all designs"
        ));
    }
    let partition = partition_by_mean(&scores)?;

    fn as_refs(set: &BTreeSet<String>) -> BTreeSet<&str> {
        set.iter().map(String::as_str).collect()
    }
    let original = as_refs(&partition.original_ids);
    let imitative = as_refs(&partition.imitative_ids);
    let inherited: BTreeSet<&str> =
        population.iter().copied().filter(|id| classes[*id] == InheritanceClass::Inherited).collect();
    let standalone: BTreeSet<&str> =
        population.iter().copied().filter(|id| classes[*id] == InheritanceClass::Standalone).collect();

    let mut comparisons = Vec::with_capacity(4);
    for (dimension, groups) in
        [(Dimension::Originality, (&original, &imitative)), (Dimension::Inheritance, (&inherited, &standalone))]
    {
        for outcome in [Outcome::Likes, Outcome::Makes] {
            comparisons.push(compare(dimension, outcome, groups, &graph, config));
        }
    }
    let plot_rows = comparisons
        .iter()
        .flat_map(|c| {
            [&c.first, &c.second].into_iter().filter_map(move |g| {
                let (summary, (lo, hi)) = (g.summary?, g.interval?);
                Some(PlotRow {
                    comparison: c.dimension.name(),
                    group: g.label,
                    outcome: c.outcome.name(),
                    n: g.n,
                    mean: summary.mean,
                    ci_low: lo.min(summary.mean),
                    ci_high: hi.max(summary.mean),
                })
            })
        })
        .collect();

    Ok(AnalysisReport {
        config: *config,
        n_records,
        n_analyzed: population.len(),
        n_missing_descriptors: n_missing,
        scores,
        partition,
        classes,
        comparisons,
        plot_rows,
        warnings,
    })
}

/// R-style p-value text.
fn format_p(p: f64) -> String {
    if p < 2.2e-16 {
        "< 2.2e-16".to_string()
    } else if p >= 1e-3 {
        format!("{p:.4}")
    } else {
        let s = format!("{p:.3e}");
        // Rust prints `1.234e-5`; pad the exponent to two digits.
        match s.split_once("e-") {
            Some((m, e)) if e.len() == 1 => format!("{m}e-0{e}"),
            _ => s,
        }
    }
}

fn format_confidence(c: f64) -> String {
    let pct = c * 100.0;
    if (pct - pct.round()).abs() < 1e-9 {
        format!("{}%", pct.round())
    } else {
        format!("{pct}%")
    }
}

/// Plain-text report: a header, then one block per comparison in the order
/// t, df, p-value, C.I., and the two group means.
pub fn render_report(report: &AnalysisReport) -> String {
    let mut out = String::new();
    let cfg = &report.config;
    let p = &report.partition;
    let count = |class| report.classes.iter().filter(|(id, c)| **c == class && report_has(report, id)).count();
    writeln!(out, "Originality analysis").unwrap();
    writeln!(out, "designs: {} in metadata, {} analyzed, {} without descriptor", report.n_records, report.n_analyzed, report.n_missing_descriptors).unwrap();
    writeln!(
        out,
        "originality mode: {}, metric: {}, outcome transform: {}",
        cfg.mode, cfg.metric, cfg.transform
    )
    .unwrap();
    writeln!(
        out,
        "mean-split threshold: {:.6} ({} original, {} imitative)",
        p.threshold,
        p.original_ids.len(),
        p.imitative_ids.len()
    )
    .unwrap();
    writeln!(
        out,
        "inheritance: {} inherited, {} standalone",
        count(InheritanceClass::Inherited),
        count(InheritanceClass::Standalone)
    )
    .unwrap();

    let ci_label = format!("{} C.I.", format_confidence(cfg.confidence));
    for c in &report.comparisons {
        let dim = match c.dimension {
            Dimension::Originality => "Originality",
            Dimension::Inheritance => "Inheritance",
        };
        writeln!(out).unwrap();
        write!(
            out,
            "{dim} x {} - Welch Two Sample t-test ({} n={}, {} n={})",
            c.outcome.title(),
            c.first.label,
            c.first.n,
            c.second.label,
            c.second.n
        )
        .unwrap();
        let mu = |g: &GroupStats| g.summary.map(|s| format!("{:.4}", s.mean)).unwrap_or_else(|| "NA".into());
        let rows: [(String, String); 6] = match &c.result {
            Ok(r) => [
                ("t".into(), format!("{:.4}", r.t)),
                ("df".into(), format!("{:.2}", r.df)),
                ("p-value".into(), format_p(r.p_two_sided)),
                (ci_label.clone(), format!("[{:.4}, {:.4}]", r.ci_low, r.ci_high)),
                (format!("μ ({})", c.first.label), mu(&c.first)),
                (format!("μ ({})", c.second.label), mu(&c.second)),
            ],
            Err(reason) => {
                write!(out, " DEGENERATE: {reason}").unwrap();
                [
                    ("t".into(), "NA".into()),
                    ("df".into(), "NA".into()),
                    ("p-value".into(), "NA".into()),
                    (ci_label.clone(), "NA".into()),
                    (format!("μ ({})", c.first.label), mu(&c.first)),
                    (format!("μ ({})", c.second.label), mu(&c.second)),
                ]
            }
        };
        writeln!(out).unwrap();
        for (label, value) in rows {
            let pad = 18usize.saturating_sub(label.chars().count());
            writeln!(out, "  {label}{}{value}", " ".repeat(pad)).unwrap();
        }
    }
    if !report.warnings.is_empty() {
        writeln!(out).unwrap();
        writeln!(out, "warnings:").unwrap();
        for w in &report.warnings {
            writeln!(out, "  - {w}").unwrap();
        }
    }
    out
}

fn report_has(report: &AnalysisReport, id: &str) -> bool {
    report.partition.original_ids.contains(id)
        || report.partition.imitative_ids.contains(id)
        || report.scores.iter().any(|s| s.design_id == id)
}

/// CSV of per-group means and their confidence intervals; groups with
/// fewer than two designs are omitted.
pub fn emit_plot_data(report: &AnalysisReport) -> String {
    let mut out = String::from("comparison,group,outcome,n,mean,ci_low,ci_high\n");
    for r in &report.plot_rows {
        writeln!(out, "{},{},{},{},{},{},{}", r.comparison, r.group, r.outcome, r.n, r.mean, r.ci_low, r.ci_high)
            .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::DescriptorParams;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn params(width: usize) -> DescriptorParams {
        DescriptorParams { grid: 8, radii: 1, degree: width - 1, bandwidth: width, density: 1.0, seed: 0 }
    }

    fn desc(values: &[f64]) -> ShapeDescriptor {
        ShapeDescriptor::from_energies(params(values.len()), values.to_vec()).unwrap()
    }

    fn rec(id: &str, likes: u64, makes: u64, parents: &[&str]) -> DesignRecord {
        DesignRecord::new(id, likes, makes, parents)
    }

    fn score(id: &str, d: f64) -> OriginalityScore {
        OriginalityScore {
            design_id: id.into(),
            distance: d,
            mode_used: OriginalityMode::NearestNeighbor,
            closest: String::new(),
            unrestricted_fallback: false,
        }
    }

    fn one_d() -> (BTreeMap<String, ShapeDescriptor>, RemixGraph) {
        let descs = BTreeMap::from([
            ("A".to_string(), desc(&[0.0])),
            ("B".to_string(), desc(&[3.0])),
            ("C".to_string(), desc(&[4.0])),
        ]);
        let (graph, _) = build_graph(vec![rec("A", 0, 0, &[]), rec("B", 0, 0, &[]), rec("C", 0, 0, &["B"])]).unwrap();
        (descs, graph)
    }

    #[test]
    fn hybrid_hand_arithmetic() {
        let (descs, graph) = one_d();
        let opts = ScoringOptions::default();
        let c = originality_score("C", &descs, &graph, &opts).unwrap();
        assert_eq!((c.distance, c.mode_used, c.closest.as_str()), (1.0, OriginalityMode::ParentMin, "B"));
        let a = originality_score("A", &descs, &graph, &opts).unwrap();
        assert_eq!((a.distance, a.mode_used), (3.0, OriginalityMode::NearestNeighbor));
    }

    #[test]
    fn mode_errors() {
        let (descs, graph) = one_d();
        let parent_min = ScoringOptions { mode: OriginalityMode::ParentMin, ..ScoringOptions::default() };
        assert!(matches!(originality_score("A", &descs, &graph, &parent_min), Err(AnalysisError::NoParents(_))));
        assert!(matches!(
            originality_score("Z", &descs, &graph, &parent_min),
            Err(AnalysisError::NoDescriptor(_))
        ));
        let single = BTreeMap::from([("A".to_string(), desc(&[0.0]))]);
        assert!(matches!(
            originality_score("A", &single, &graph, &ScoringOptions::default()),
            Err(AnalysisError::SingletonCorpus)
        ));
    }

    #[test]
    fn identical_child_scores_zero() {
        let descs = BTreeMap::from([("p".to_string(), desc(&[1.0, 2.0])), ("c".to_string(), desc(&[1.0, 2.0]))]);
        let (graph, _) = build_graph(vec![rec("p", 0, 0, &[]), rec("c", 0, 0, &["p"])]).unwrap();
        assert_eq!(originality_score("c", &descs, &graph, &ScoringOptions::default()).unwrap().distance, 0.0);
    }

    #[test]
    fn nearest_neighbor_matches_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let ids: Vec<String> = (0..5).map(|i| format!("x{i}")).collect();
            let raw: Vec<Vec<f64>> = (0..5).map(|_| (0..6).map(|_| rng.random_range(0.0..1.0)).collect()).collect();
            let descs: BTreeMap<String, ShapeDescriptor> =
                ids.iter().cloned().zip(raw.iter().map(|v| desc(v))).collect();
            let (graph, _) = build_graph(ids.iter().map(|i| rec(i, 0, 0, &[])).collect()).unwrap();
            let opts = ScoringOptions { mode: OriginalityMode::NearestNeighbor, ..ScoringOptions::default() };
            for (i, id) in ids.iter().enumerate() {
                let mut brute = f64::INFINITY;
                for (j, other) in raw.iter().enumerate() {
                    if i != j {
                        let d: f64 = raw[i].iter().zip(other).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                        brute = brute.min(d);
                    }
                }
                let s = originality_score(id, &descs, &graph, &opts).unwrap();
                assert!((s.distance - brute).abs() <= 1e-15 * brute.max(1.0));
            }
        }
    }

    #[test]
    fn nearest_neighbor_respects_time_order() {
        let descs = BTreeMap::from([
            ("old".to_string(), desc(&[0.0])),
            ("mid".to_string(), desc(&[10.0])),
            ("new".to_string(), desc(&[1.0])),
        ]);
        let mut recs = vec![rec("old", 0, 0, &[]), rec("mid", 0, 0, &[]), rec("new", 0, 0, &[])];
        for (r, t) in recs.iter_mut().zip([1, 2, 3]) {
            r.timestamp = Some(t);
        }
        let (graph, _) = build_graph(recs).unwrap();
        let opts = ScoringOptions { mode: OriginalityMode::NearestNeighbor, ..ScoringOptions::default() };
        // `mid` may only look at `old`, not at the later and closer `new`.
        let mid = originality_score("mid", &descs, &graph, &opts).unwrap();
        assert_eq!((mid.distance, mid.closest.as_str()), (10.0, "old"));
        let old = originality_score("old", &descs, &graph, &opts).unwrap();
        assert!(old.unrestricted_fallback);
        assert_eq!(old.distance, 1.0);
        let free = ScoringOptions { prior_only: false, ..opts };
        assert_eq!(originality_score("mid", &descs, &graph, &free).unwrap().distance, 9.0);
    }

    #[test]
    fn parents_without_descriptors_are_skipped() {
        let descs = BTreeMap::from([("a".to_string(), desc(&[0.0])), ("c".to_string(), desc(&[2.0]))]);
        let (graph, _) = build_graph(vec![rec("a", 0, 0, &[]), rec("b", 0, 0, &[]), rec("c", 0, 0, &["b"])]).unwrap();
        let s = originality_score("c", &descs, &graph, &ScoringOptions::default()).unwrap();
        assert_eq!(s.mode_used, OriginalityMode::NearestNeighbor);
        let pm = ScoringOptions { mode: OriginalityMode::ParentMin, ..ScoringOptions::default() };
        assert!(matches!(originality_score("c", &descs, &graph, &pm), Err(AnalysisError::NoParents(_))));
    }

    #[test]
    fn mean_split_examples() {
        let scores: Vec<_> = [1.0, 2.0, 3.0, 6.0].iter().enumerate().map(|(i, d)| score(&format!("s{i}"), *d)).collect();
        let p = partition_by_mean(&scores).unwrap();
        assert_eq!(p.threshold, 3.0);
        assert_eq!(p.original_ids, BTreeSet::from(["s3".to_string()]));
        assert_eq!(p.imitative_ids.len(), 3);

        let flat: Vec<_> = (0..5).map(|i| score(&format!("f{i}"), 0.7)).collect();
        let p = partition_by_mean(&flat).unwrap();
        assert!(p.original_ids.is_empty());
        assert_eq!(p.imitative_ids.len(), 5);

        assert!(matches!(partition_by_mean(&scores[..1]), Err(AnalysisError::TooFewScores(1))));
    }

    proptest! {
        #[test]
        fn mean_split_partitions_exactly(ds in proptest::collection::vec(0.0f64..100.0, 2..100)) {
            let scores: Vec<_> = ds.iter().enumerate().map(|(i, d)| score(&format!("s{i:03}"), *d)).collect();
            let p = partition_by_mean(&scores).unwrap();
            prop_assert_eq!(p.original_ids.len() + p.imitative_ids.len(), scores.len());
            prop_assert!(p.original_ids.is_disjoint(&p.imitative_ids));
            for s in &scores {
                if p.original_ids.contains(&s.design_id) {
                    prop_assert!(s.distance > p.threshold);
                } else {
                    prop_assert!(p.imitative_ids.contains(&s.design_id));
                    prop_assert!(s.distance <= p.threshold);
                }
            }
        }

        #[test]
        fn uniform_scaling_keeps_partition(
            raw in proptest::collection::vec(proptest::collection::vec(0.0f64..10.0, 3), 4..20),
            exponent in -20i32..20,
        ) {
            // Powers of two scale every intermediate exactly.
            let c = 2f64.powi(exponent);
            let ids: Vec<String> = (0..raw.len()).map(|i| format!("d{i:02}")).collect();
            let (graph, _) = build_graph(ids.iter().map(|i| rec(i, 0, 0, &[])).collect()).unwrap();
            let base: BTreeMap<String, ShapeDescriptor> = ids.iter().cloned().zip(raw.iter().map(|v| desc(v))).collect();
            let scaled: BTreeMap<String, ShapeDescriptor> = base.iter().map(|(k, d)| (k.clone(), d.scaled(c))).collect();
            let opts = ScoringOptions::default();
            let id_refs: Vec<&str> = ids.iter().map(String::as_str).collect();
            let s1: Vec<_> = score_designs(&id_refs, &base, &graph, &opts).into_iter().map(Result::unwrap).collect();
            let s2: Vec<_> = score_designs(&id_refs, &scaled, &graph, &opts).into_iter().map(Result::unwrap).collect();
            for (a, b) in s1.iter().zip(&s2) {
                prop_assert_eq!(a.distance * c, b.distance);
            }
            let (p1, p2) = (partition_by_mean(&s1).unwrap(), partition_by_mean(&s2).unwrap());
            prop_assert_eq!(p1.original_ids, p2.original_ids);
            prop_assert_eq!(p1.threshold * c, p2.threshold);
        }
    }

    fn small_corpus() -> (Vec<DesignRecord>, BTreeMap<String, ShapeDescriptor>) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let mut recs = Vec::new();
        let mut descs = BTreeMap::new();
        for i in 0..30 {
            let id = format!("d{i:02}");
            let parents: Vec<String> = if i >= 10 {
                vec![format!("d{:02}", i % 10)]
            } else {
                vec![]
            };
            let mut r = rec(&id, rng.random_range(0..40), rng.random_range(0..5), &[]);
            r.parent_ids = parents;
            recs.push(r);
            descs.insert(id, desc(&[rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)]));
        }
        (recs, descs)
    }

    #[test]
    fn four_blocks_share_one_partition() {
        let (recs, descs) = small_corpus();
        let report = run_analysis(recs, &descs, &AnalysisConfig::default()).unwrap();
        assert_eq!(report.comparisons.len(), 4);
        assert!(!report.has_degenerate());
        let n_orig = report.partition.original_ids.len();
        for c in &report.comparisons {
            let (a, b) = (c.first.n, c.second.n);
            assert_eq!(a + b, 30);
            match c.dimension {
                Dimension::Originality => assert_eq!(a, n_orig),
                Dimension::Inheritance => assert_eq!((a, b), (20, 10)),
            }
        }
        for row in &report.plot_rows {
            assert!(row.ci_low <= row.mean && row.mean <= row.ci_high);
        }
        let text = render_report(&report);
        for label in ["t ", "df ", "p-value ", "95% C.I. ", "μ (Original) ", "μ (Imitative) ", "μ (Inherited) ", "μ (Standalone) "] {
            assert!(text.contains(&format!("  {label}")), "missing {label}");
        }
        assert_eq!(text, render_report(&run_analysis(small_corpus().0, &descs, &AnalysisConfig::default()).unwrap()));
    }

    #[test]
    fn all_inherited_is_degenerate_only_on_inheritance() {
        // Everything remixes `root`, which has a metadata row but no descriptor.
        let (recs, descs) = small_corpus();
        let mut recs: Vec<DesignRecord> = recs
            .into_iter()
            .map(|mut r| {
                r.parent_ids = vec!["root".into()];
                r
            })
            .collect();
        recs.push(rec("root", 1, 1, &[]));
        let report = run_analysis(recs, &descs, &AnalysisConfig::default()).unwrap();
        assert_eq!(report.n_missing_descriptors, 1);
        assert!(report.has_degenerate());
        for c in &report.comparisons {
            match c.dimension {
                Dimension::Originality => assert!(c.result.is_ok()),
                Dimension::Inheritance => {
                    assert_eq!(c.result, Err(Degenerate::EmptyGroup { group: "Standalone", n: 0 }))
                }
            }
        }
        let text = render_report(&report);
        assert_eq!(text.matches("DEGENERATE").count(), 2);
        assert!(!emit_plot_data(&report).contains("Standalone"));
    }

    #[test]
    fn plot_interval_examples() {
        let g = group_stats("x", &[0.0, 2.0], 0.95);
        let (lo, hi) = g.interval.unwrap();
        assert!((hi - 1.0 - 12.706204736174705).abs() < 1e-9);
        assert!((1.0 - lo - 12.706204736174705).abs() < 1e-9);
        let c = group_stats("y", &[5.0; 4], 0.95);
        assert_eq!(c.interval, Some((5.0, 5.0)));
    }

    #[test]
    fn p_value_formatting() {
        assert_eq!(format_p(1e-20), "< 2.2e-16");
        assert_eq!(format_p(2.66e-6), "2.660e-06");
        assert_eq!(format_p(0.10753), "0.1075");
        assert_eq!(format_p(1.0), "1.0000");
        assert_eq!(format_confidence(0.95), "95%");
        assert_eq!(format_confidence(0.975), "97.5%");
    }
}
