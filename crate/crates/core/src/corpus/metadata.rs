use super::CorpusError;

pub const METADATA_HEADER: [&str; 6] = ["id", "mesh_path", "likes", "makes", "parents", "timestamp"];

/// One design and its outcomes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignRecord {
    pub id: String,
    pub mesh_path: String,
    /// Popularity.
    pub likes: u64,
    /// Practicality: number of recorded prints.
    pub makes: u64,
    pub parent_ids: Vec<String>,
    /// Epoch seconds.
    pub timestamp: Option<i64>,
}

impl DesignRecord {
    pub fn new(id: impl Into<String>, likes: u64, makes: u64, parents: &[&str]) -> Self {
        let id = id.into();
        DesignRecord {
            mesh_path: format!("{id}.stl"),
            id,
            likes,
            makes,
            parent_ids: parents.iter().map(|p| p.to_string()).collect(),
            timestamp: None,
        }
    }
}

/// Reads the `id,mesh_path,likes,makes,parents,timestamp` CSV (RFC 4180
/// quoting). `parents` is a `;`-separated id list.
pub fn load_metadata(csv_bytes: &[u8]) -> Result<Vec<DesignRecord>, CorpusError> {
    let csv_bytes = csv_bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(csv_bytes);
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(csv_bytes);
    let header = reader.headers().map_err(|e| CorpusError::BadHeader {
        expected: METADATA_HEADER.join(","),
        found: e.to_string(),
    })?;
    if header.iter().ne(METADATA_HEADER.iter().copied()) {
        return Err(CorpusError::BadHeader {
            expected: METADATA_HEADER.join(","),
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }

    let mut seen = std::collections::HashSet::new();
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| CorpusError::RowParseError {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let fail = |message: String| CorpusError::RowParseError { line, message };
        let id = row[0].trim().to_string();
        if id.is_empty() {
            return Err(fail("empty id".into()));
        }
        let count = |field: usize, name: &str| {
            row[field]
                .trim()
                .parse::<u64>()
                .map_err(|e| fail(format!("{name} `{}`: {e}", &row[field])))
        };
        let likes = count(2, "likes")?;
        let makes = count(3, "makes")?;
        let parent_ids: Vec<String> = row[4]
            .split(';')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(String::from)
            .collect();
        if parent_ids.contains(&id) {
            return Err(fail(format!("design `{id}` lists itself as a parent")));
        }
        let timestamp = match row[5].trim() {
            "" => None,
            t => Some(t.parse::<i64>().map_err(|e| fail(format!("timestamp `{t}`: {e}")))?),
        };
        if !seen.insert(id.clone()) {
            return Err(CorpusError::DuplicateId(id));
        }
        records.push(DesignRecord {
            id,
            mesh_path: row[1].trim().to_string(),
            likes,
            makes,
            parent_ids,
            timestamp,
        });
    }
    Ok(records)
}

pub fn write_metadata(records: &[DesignRecord]) -> Result<Vec<u8>, CorpusError> {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let csv_err = |e: csv::Error| CorpusError::Io(std::io::Error::other(e));
    writer.write_record(METADATA_HEADER).map_err(csv_err)?;
    for r in records {
        let likes = r.likes.to_string();
        let makes = r.makes.to_string();
        let parents = r.parent_ids.join(";");
        let ts = r.timestamp.map(|t| t.to_string()).unwrap_or_default();
        writer
            .write_record([r.id.as_str(), &r.mesh_path, &likes, &makes, &parents, &ts])
            .map_err(csv_err)?;
    }
    writer.into_inner().map_err(|e| CorpusError::Io(std::io::Error::other(e.to_string())))
}
