//! Design metadata, the remix graph, descriptor caches and synthetic corpora.

mod cache;
mod graph;
mod metadata;
mod synth;

use thiserror::Error;

use crate::descriptor::{DescriptorError, DescriptorParams};
use crate::mesh::MeshError;

pub use cache::{load_descriptors, save_descriptors, DescriptorCache};
pub use graph::{build_graph, classify, GraphWarning, InheritanceClass, RemixGraph};
pub use metadata::{load_metadata, write_metadata, DesignRecord, METADATA_HEADER};
pub use synth::{
    generate_synthetic, Family, OutcomeModel, SyntheticConfig, SyntheticCorpus, SyntheticDesign, TrueClass,
};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("bad metadata header: expected `{expected}`, found `{found}`")]
    BadHeader { expected: String, found: String },
    #[error("metadata line {line}: {message}")]
    RowParseError { line: u64, message: String },
    #[error("duplicate design id `{0}`")]
    DuplicateId(String),
    #[error("remix cycle detected: {}", .0.join(" -> "))]
    CycleDetected(Vec<String>),
    #[error("not a descriptor cache: {0}")]
    BadMagic(String),
    #[error("malformed descriptor cache header: {0}")]
    BadCacheHeader(String),
    #[error("descriptor parameters differ: cache has {cache}, requested {requested}")]
    ParamMismatch { cache: DescriptorParams, requested: DescriptorParams },
    #[error("descriptor cache line {line}: expected {expected} values, found {found}")]
    RaggedRow { line: usize, expected: usize, found: usize },
    #[error("descriptor cache line {line}: {message}")]
    BadValue { line: usize, message: String },
    #[error("design id `{0}` cannot be stored (empty or contains a comma or line break)")]
    InvalidId(String),
    #[error("invalid synthetic corpus configuration: {0}")]
    ConfigError(String),
    #[error(transparent)]
    Descriptor(#[from] DescriptorError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
