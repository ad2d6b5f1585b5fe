//! Originality analysis for remix networks of 3D designs.
//!
//! The crate turns triangle meshes into rotation-invariant spherical-harmonic
//! descriptors, scores each design by its descriptor distance to its parents
//! or nearest neighbors, splits designs at the mean score into original and
//! imitative sets, and compares likes and makes across those sets (and
//! across standalone vs inherited designs) with Welch two-sample t-tests.
//!
//! Pipeline, bottom-up:
//!
//! * [`mesh`]: STL parsing and rigid transforms
//! * [`sampling`]: surface samples, normalization, voxel grid, sphere restriction
//! * [`harmonics`]: real spherical harmonics and energy decomposition
//! * [`descriptor`]: descriptor assembly and distances
//! * [`corpus`]: metadata, remix graph, descriptor cache, synthetic corpora
//! * [`stats`]: Welch test and Student-t special functions
//! * [`analysis`]: originality scores, mean split, report and plot data

pub mod analysis;
pub mod corpus;
pub mod descriptor;
pub mod harmonics;
pub mod mesh;
pub mod primitives;
pub mod sampling;
pub mod stats;

/// 3D point or vector in model units.
pub type Vec3 = nalgebra::Vector3<f64>;

pub use analysis::{
    emit_plot_data, originality_score, partition_by_mean, render_report, run_analysis, AnalysisConfig,
    AnalysisError, AnalysisReport, OriginalityMode, OriginalityPartition, OriginalityScore,
};
pub use corpus::{
    build_graph, classify, generate_synthetic, load_descriptors, load_metadata, save_descriptors,
    CorpusError, DesignRecord, InheritanceClass, RemixGraph, SyntheticConfig,
};
pub use descriptor::{
    build_descriptor, describe_mesh, descriptor_distance, DescriptorError, DescriptorParams, Metric,
    ShapeDescriptor,
};
pub use mesh::{parse_stl, write_binary_stl, MeshError, Triangle, TriangleMesh};
pub use stats::{summarize, welch_test, GroupSummary, StatsError, WelchResult};
