//! Delimited rating-triple loader: one `<user><delim><item><delim><rating>`
//! per line, UTF-8, LF or CRLF, optional header line.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use elicit_core::dataset::{Dataset, RatingTriple};
use elicit_core::error::DatasetError;
use thiserror::Error;

use crate::config::FileFormat;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    Malformed { path: PathBuf, line: usize, reason: String },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// Load a dataset from a delimited triple file. User and item tokens are
/// interned to dense internal ids in order of first appearance.
pub fn load_dataset(
    path: &Path,
    format: &FileFormat,
    rating_scale: u32,
) -> Result<Dataset, LoadError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| LoadError::Io { path: path.to_path_buf(), source })?;
    let malformed = |line: usize, reason: String| LoadError::Malformed {
        path: path.to_path_buf(),
        line,
        reason,
    };

    let mut users: HashMap<String, u32> = HashMap::new();
    let mut items: HashMap<String, u32> = HashMap::new();
    let mut user_labels = Vec::new();
    let mut item_labels = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut triples = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if format.has_header && idx == 0 {
            continue;
        }
        let line = raw_line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(format.delimiter).collect();
        if fields.len() != 3 {
            return Err(malformed(
                line_no,
                format!("expected 3 fields separated by {:?}, got {}", format.delimiter, fields.len()),
            ));
        }
        let user_tok = fields[0].trim();
        let item_tok = fields[1].trim();
        let rating: u32 = fields[2]
            .trim()
            .parse()
            .map_err(|_| malformed(line_no, format!("rating '{}' is not an integer", fields[2].trim())))?;
        if user_tok.is_empty() || item_tok.is_empty() {
            return Err(malformed(line_no, "empty user or item field".into()));
        }
        if rating < 1 || rating > rating_scale {
            return Err(malformed(
                line_no,
                format!("rating {rating} outside [1, {rating_scale}]"),
            ));
        }
        let user = *users.entry(user_tok.to_string()).or_insert_with(|| {
            user_labels.push(user_tok.to_string());
            (user_labels.len() - 1) as u32
        });
        let item = *items.entry(item_tok.to_string()).or_insert_with(|| {
            item_labels.push(item_tok.to_string());
            (item_labels.len() - 1) as u32
        });
        if !seen.insert((user, item)) {
            return Err(malformed(
                line_no,
                format!("duplicate (user, item) pair ({user_tok}, {item_tok})"),
            ));
        }
        triples.push(RatingTriple { user, item, rating });
    }

    Ok(Dataset::from_triples(triples, rating_scale, user_labels, item_labels)?)
}

/// Write a dataset back out in the same delimited format, using the
/// original user/item labels.
pub fn save_dataset(
    path: &Path,
    dataset: &Dataset,
    delimiter: char,
) -> Result<(), std::io::Error> {
    let mut out = String::new();
    for t in dataset.triples() {
        out.push_str(dataset.user_label(t.user));
        out.push(delimiter);
        out.push_str(dataset.item_label(t.item));
        out.push(delimiter);
        out.push_str(&t.rating.to_string());
        out.push('\n');
    }
    std::fs::write(path, out)
}
