use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use super::CorpusError;
use crate::descriptor::{DescriptorParams, ShapeDescriptor};

const MAGIC: &str = "SHDESC";
const VERSION: &str = "1";

/// Descriptors keyed by design id, all computed with the same parameters.
///
/// On disk: a header line `SHDESC 1 n=.. R=.. L=.. B=.. density=.. seed=..`
/// followed by one `id,e_1,...,e_{R(L+1)}` row per design, sorted by id.
/// Energies are written with 17 significant digits so they reload exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorCache {
    params: DescriptorParams,
    entries: BTreeMap<String, ShapeDescriptor>,
}

impl DescriptorCache {
    pub fn new(params: DescriptorParams) -> Self {
        DescriptorCache { params, entries: BTreeMap::new() }
    }

    pub fn params(&self) -> &DescriptorParams {
        &self.params
    }

    pub fn entries(&self) -> &BTreeMap<String, ShapeDescriptor> {
        &self.entries
    }

    pub fn into_entries(self) -> BTreeMap<String, ShapeDescriptor> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entries.contains_key(id)
    }

    /// Adds or replaces one descriptor.
    pub fn insert(&mut self, id: impl Into<String>, descriptor: ShapeDescriptor) -> Result<(), CorpusError> {
        let id = id.into();
        check_id(&id)?;
        if descriptor.params() != &self.params {
            return Err(CorpusError::ParamMismatch { cache: self.params, requested: *descriptor.params() });
        }
        self.entries.insert(id, descriptor);
        Ok(())
    }

    /// Fails with `ParamMismatch` unless the cache was built with `params`.
    pub fn require_params(&self, params: &DescriptorParams) -> Result<(), CorpusError> {
        if &self.params == params {
            Ok(())
        } else {
            Err(CorpusError::ParamMismatch { cache: self.params, requested: *params })
        }
    }
}

fn check_id(id: &str) -> Result<(), CorpusError> {
    if id.is_empty() || id.contains([',', '\n', '\r']) || id.trim() != id {
        Err(CorpusError::InvalidId(id.to_string()))
    } else {
        Ok(())
    }
}

fn header_line(params: &DescriptorParams) -> String {
    format!("{MAGIC} {VERSION} {params}")
}

pub fn save_descriptors(cache: &DescriptorCache, mut out: impl Write) -> Result<(), CorpusError> {
    writeln!(out, "{}", header_line(&cache.params))?;
    let mut line = String::new();
    for (id, d) in &cache.entries {
        check_id(id)?;
        line.clear();
        line.push_str(id);
        for e in d.energies() {
            use std::fmt::Write as _;
            write!(line, ",{e:.16e}").expect("writing to a String");
        }
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

fn parse_header(line: &str) -> Result<DescriptorParams, CorpusError> {
    let mut tokens = line.split_whitespace();
    if tokens.next() != Some(MAGIC) {
        return Err(CorpusError::BadMagic(line.chars().take(40).collect()));
    }
    match tokens.next() {
        Some(VERSION) => {}
        other => return Err(CorpusError::BadMagic(format!("unsupported version {other:?}"))),
    }
    let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
    for tok in tokens {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| CorpusError::BadCacheHeader(format!("token `{tok}` is not key=value")))?;
        if fields.insert(k, v).is_some() {
            return Err(CorpusError::BadCacheHeader(format!("repeated key `{k}`")));
        }
    }
    let mut take = |key: &str| {
        fields.remove(key).ok_or_else(|| CorpusError::BadCacheHeader(format!("missing `{key}`")))
    };
    let int = |key: &str, v: &str| {
        v.parse::<usize>().map_err(|e| CorpusError::BadCacheHeader(format!("{key}={v}: {e}")))
    };
    let grid = int("n", take("n")?)?;
    let radii = int("R", take("R")?)?;
    let degree = int("L", take("L")?)?;
    let bandwidth = int("B", take("B")?)?;
    let density_text = take("density")?;
    let density = density_text
        .parse::<f64>()
        .map_err(|e| CorpusError::BadCacheHeader(format!("density={density_text}: {e}")))?;
    let seed_text = take("seed")?;
    let seed = seed_text
        .parse::<u64>()
        .map_err(|e| CorpusError::BadCacheHeader(format!("seed={seed_text}: {e}")))?;
    if let Some(k) = fields.keys().next() {
        return Err(CorpusError::BadCacheHeader(format!("unknown key `{k}`")));
    }
    let params = DescriptorParams { grid, radii, degree, bandwidth, density, seed };
    params.validate()?;
    Ok(params)
}

pub fn load_descriptors(input: impl BufRead) -> Result<DescriptorCache, CorpusError> {
    let mut lines = input.lines();
    let header = match lines.next() {
        Some(line) => line?,
        None => return Err(CorpusError::BadMagic("empty file".into())),
    };
    let params = parse_header(header.trim_end_matches('\r'))?;
    let width = params.len();
    let mut cache = DescriptorCache::new(params);
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let id = fields.next().unwrap_or_default().to_string();
        let values: Vec<&str> = fields.collect();
        if values.len() != width {
            return Err(CorpusError::RaggedRow { line: line_no, expected: width, found: values.len() });
        }
        let energies = values
            .iter()
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| CorpusError::BadValue { line: line_no, message: format!("`{v}`: {e}") })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let descriptor = ShapeDescriptor::from_energies(params, energies)
            .map_err(|e| CorpusError::BadValue { line: line_no, message: e.to_string() })?;
        if cache.contains(&id) {
            return Err(CorpusError::DuplicateId(id));
        }
        cache.insert(id, descriptor)?;
    }
    Ok(cache)
}
