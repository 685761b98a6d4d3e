use std::collections::HashSet;
use std::path::{Path, PathBuf};

use super::{HarnessError, Order, SessionRecord};

pub const MANIFEST_HEADER: [&str; 6] = [
    "subject_id",
    "order",
    "rec1",
    "rec2",
    "rec3",
    "anger_rating",
];

/// Reads and validates a study manifest. Relative recording paths are
/// resolved against the manifest's directory.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<SessionRecord>, HarnessError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_manifest(&text, base)
}

/// Parses manifest text; `base` anchors relative paths.
///
/// Lines starting with `#` are comments. Every recording must exist.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<SessionRecord>, HarnessError> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header_line = |rdr: &csv::Reader<&[u8]>| rdr.position().line().max(1);
    let header = rdr
        .headers()
        .map_err(|e| HarnessError::Manifest {
            line: 1,
            msg: e.to_string(),
        })?
        .clone();
    if header.iter().ne(MANIFEST_HEADER) {
        return Err(HarnessError::Manifest {
            line: header_line(&rdr),
            msg: format!(
                "header must be exactly {:?}, got {:?}",
                MANIFEST_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| HarnessError::Manifest {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            msg: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let err = |msg: String| HarnessError::Manifest { line, msg };
        if rec.len() != MANIFEST_HEADER.len() {
            return Err(err(format!(
                "expected {} columns, found {}",
                MANIFEST_HEADER.len(),
                rec.len()
            )));
        }
        let subject_id = rec[0].to_string();
        if subject_id.is_empty() {
            return Err(err("empty subject_id".into()));
        }
        let order: Order = rec[1].parse().map_err(err)?;
        let anger_rating: u8 = match rec[5].parse::<i64>() {
            Ok(v @ 1..=5) => v as u8,
            _ => {
                return Err(err(format!(
                    "anger_rating {:?} is not an integer in 1..=5",
                    &rec[5]
                )))
            }
        };
        let mut recordings: [PathBuf; 3] = Default::default();
        for (slot, raw) in recordings.iter_mut().zip([&rec[2], &rec[3], &rec[4]]) {
            if raw.is_empty() {
                return Err(err("empty recording path".into()));
            }
            let p = Path::new(raw);
            let resolved = if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            };
            if !resolved.is_file() {
                return Err(err(format!(
                    "recording {} does not exist",
                    resolved.display()
                )));
            }
            *slot = resolved;
        }
        if !seen.insert(subject_id.clone()) {
            return Err(err(format!("duplicate subject_id {subject_id:?}")));
        }
        out.push(SessionRecord {
            subject_id,
            order,
            recordings,
            anger_rating,
        });
    }
    Ok(out)
}
