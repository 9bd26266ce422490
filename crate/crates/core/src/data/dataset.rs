use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use super::catalog::{PromptCatalog, PromptId};

pub const MIN_RATING: f64 = 1.0;
pub const MAX_RATING: f64 = 5.0;

/// Header row written by [`save_dataset`].
pub const CSV_HEADER: [&str; 3] = ["prompt_a", "prompt_b", "rating"];

/// Why a single observation was rejected.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecordError {
    #[error("rating {0} is outside [1, 5]")]
    OutOfRange(f64),
    #[error("rating {0:?} is not a number")]
    NotNumeric(String),
    #[error("a prompt cannot be rated against itself")]
    SelfRating,
    #[error("prompt text is empty")]
    EmptyPrompt,
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}")]
    Csv {
        line: u64,
        #[source]
        source: csv::Error,
    },
    #[error("line {line}: expected 3 columns, found {found}")]
    ColumnCount { line: u64, found: usize },
    #[error("line {line}")]
    Record {
        line: u64,
        #[source]
        source: RecordError,
    },
    #[error("invalid generator config: {0}")]
    Generator(String),
}

impl DataError {
    /// 1-based line number of the offending row, when the error concerns one.
    pub fn line(&self) -> Option<u64> {
        match self {
            DataError::Csv { line, .. } | DataError::ColumnCount { line, .. } | DataError::Record { line, .. } => Some(*line),
            _ => None,
        }
    }
}

/// Checks that `rating` is a finite value in `[1, 5]`.
pub fn validate_rating(rating: f64) -> Result<f64, RecordError> {
    if rating.is_finite() && (MIN_RATING..=MAX_RATING).contains(&rating) {
        Ok(rating)
    } else {
        Err(RecordError::OutOfRange(rating))
    }
}

/// Rounds to the two decimals used by the CSV format, going through the
/// same formatting path as the writer so persisted and in-memory values agree.
pub fn round_rating(rating: f64) -> f64 {
    format!("{rating:.2}").parse().expect("formatted float parses")
}

/// One directed observation: `context` rated `target` with `rating`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatingRecord {
    pub context: PromptId,
    pub target: PromptId,
    pub rating: f64,
}

/// Raw rows plus the catalog of every prompt they mention.
///
/// Duplicate `(context, target)` pairs are kept; they are only collapsed
/// when a [`RatingMatrix`](super::RatingMatrix) is built.
#[derive(Debug, Clone, Default)]
pub struct RatingDataset {
    pub catalog: PromptCatalog,
    pub records: Vec<RatingRecord>,
}

impl RatingDataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Validates and appends a row given by prompt text, registering unseen
    /// prompts (context first, then target).
    pub fn push(&mut self, context: &str, target: &str, rating: f64) -> Result<RatingRecord, RecordError> {
        let rating = validate_rating(rating)?;
        let context_key = super::catalog::normalize(context);
        let target_key = super::catalog::normalize(target);
        if context_key.is_empty() || target_key.is_empty() {
            return Err(RecordError::EmptyPrompt);
        }
        if context_key == target_key {
            return Err(RecordError::SelfRating);
        }
        let context = self.catalog.intern(context).ok_or(RecordError::EmptyPrompt)?;
        let target = self.catalog.intern(target).ok_or(RecordError::EmptyPrompt)?;
        let record = RatingRecord { context, target, rating };
        self.records.push(record);
        Ok(record)
    }

    /// A dataset holding the selected records and the full catalog, so ids
    /// stay comparable across subsets.
    pub fn subset(&self, indices: &[usize]) -> RatingDataset {
        RatingDataset {
            catalog: self.catalog.clone(),
            records: indices.iter().map(|&i| self.records[i]).collect(),
        }
    }
}

/// Parses the three-column CSV format. The first row is a header and is
/// skipped whatever its labels are.
pub fn read_dataset<R: Read>(reader: R) -> Result<RatingDataset, DataError> {
    let mut csv = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
    let mut dataset = RatingDataset::new();
    let mut row = csv::StringRecord::new();
    loop {
        let line = csv.position().line() + 1;
        match csv.read_record(&mut row) {
            Ok(false) => break,
            Ok(true) => {}
            Err(source) => {
                let line = source.position().map_or(line, |p| p.line());
                return Err(DataError::Csv { line, source });
            }
        }
        let line = row.position().map_or(line, |p| p.line());
        if row.len() != 3 {
            return Err(DataError::ColumnCount { line, found: row.len() });
        }
        let raw = row[2].trim();
        let rating: f64 = raw.parse().map_err(|_| DataError::Record {
            line,
            source: RecordError::NotNumeric(raw.to_owned()),
        })?;
        dataset
            .push(&row[0], &row[1], rating)
            .map_err(|source| DataError::Record { line, source })?;
    }
    Ok(dataset)
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<RatingDataset, DataError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| DataError::Io {
        path: path.to_owned(),
        source,
    })?;
    read_dataset(std::io::BufReader::new(file))
}

/// Writes the header and one row per record, ratings with two decimals.
pub fn write_dataset<W: Write>(dataset: &RatingDataset, writer: W) -> Result<(), csv::Error> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(CSV_HEADER)?;
    for record in &dataset.records {
        csv.write_record([
            dataset.catalog.text(record.context),
            dataset.catalog.text(record.target),
            &format!("{:.2}", record.rating),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

pub fn save_dataset(dataset: &RatingDataset, path: impl AsRef<Path>) -> Result<(), DataError> {
    let path = path.as_ref();
    let io_err = |source| DataError::Io {
        path: path.to_owned(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    write_dataset(dataset, std::io::BufWriter::new(file)).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => io_err(source),
        other => io_err(std::io::Error::other(format!("{other:?}"))),
    })
}

/// Appends one row to a dataset file, writing the header first when the
/// file is new or empty.
pub fn append_record(path: impl AsRef<Path>, context: &str, target: &str, rating: f64) -> Result<(), DataError> {
    let path = path.as_ref();
    let io_err = |source| DataError::Io {
        path: path.to_owned(),
        source,
    };
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = std::fs::OpenOptions::new().create(true).append(true).open(path).map_err(io_err)?;
    let mut csv = csv::Writer::from_writer(file);
    let rating = format!("{rating:.2}");
    let result = (|| {
        if fresh {
            csv.write_record(CSV_HEADER)?;
        }
        csv.write_record([context, target, rating.as_str()])?;
        csv.flush().map_err(csv::Error::from)
    })();
    result.map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => io_err(source),
        other => io_err(std::io::Error::other(format!("{other:?}"))),
    })
}
