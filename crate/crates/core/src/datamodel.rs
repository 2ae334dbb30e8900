//! Labeled embedding datasets and their on-disk format.
//!
//! A dataset on disk is three files sharing a prefix:
//!
//! - `<prefix>.oodb.json`: UTF-8 JSON header ([`DatasetHeader`]).
//! - `<prefix>.oodb.bin`: payload of 32-bit little-endian floats. The
//!   `n_samples × dim` embedding block comes first, row-major, followed by
//!   the `n_samples × n_classes` logit block when `has_logits` is set.
//! - `<prefix>.labels.csv`: columns `index,label,class_name`, one row per sample.
//!
//! The header checksum is FNV-1a (64-bit) over the raw payload bytes, written
//! as 16 lowercase hex digits.
//!
//! A plain CSV file with `dim` feature columns and a final `label` column is
//! accepted as an alternative input.

use std::fs;
use std::hash::Hasher;
use std::path::{Path, PathBuf};

use fnv::FnvHasher;
use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const HEADER_SUFFIX: &str = ".oodb.json";
pub const PAYLOAD_SUFFIX: &str = ".oodb.bin";
pub const LABELS_SUFFIX: &str = ".labels.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTag {
    Train,
    Test,
}

/// Coordinate layout of a two-factor synthetic dataset: the first `d1`
/// columns carry factor 1, the next `d2` columns factor 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoFactorLayout {
    pub d1: usize,
    pub d2: usize,
}

/// Embeddings, optional logits and class labels for one split.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    embeddings: Array2<f32>,
    logits: Option<Array2<f32>>,
    labels: Vec<usize>,
    class_names: Vec<String>,
    split: SplitTag,
    layout: Option<TwoFactorLayout>,
}

impl LabeledDataset {
    /// Builds a dataset, checking every container invariant.
    pub fn new(
        embeddings: Array2<f32>,
        logits: Option<Array2<f32>>,
        labels: Vec<usize>,
        class_names: Vec<String>,
        split: SplitTag,
    ) -> Result<Self> {
        let n_classes = class_names.len();
        if n_classes < 2 {
            return Err(Error::InvalidDataset(format!(
                "need at least 2 classes, got {n_classes}"
            )));
        }
        let n = embeddings.nrows();
        if labels.len() != n {
            return Err(Error::InvalidDataset(format!(
                "{n} embedding rows but {} labels",
                labels.len()
            )));
        }
        if let Some(l) = &logits {
            if l.nrows() != n {
                return Err(Error::InvalidDataset(format!(
                    "{n} embedding rows but {} logit rows",
                    l.nrows()
                )));
            }
            if l.ncols() != n_classes {
                return Err(Error::InvalidDataset(format!(
                    "{} logit columns for {n_classes} classes",
                    l.ncols()
                )));
            }
        }
        for (row, &label) in labels.iter().enumerate() {
            if label >= n_classes {
                return Err(Error::LabelOutOfRange {
                    row,
                    label,
                    n_classes,
                });
            }
        }
        check_finite(embeddings.view(), 0)?;
        if let Some(l) = &logits {
            check_finite(l.view(), embeddings.ncols())?;
        }
        Ok(Self {
            embeddings,
            logits,
            labels,
            class_names,
            split,
            layout: None,
        })
    }

    pub(crate) fn with_layout(mut self, layout: Option<TwoFactorLayout>) -> Self {
        self.layout = layout;
        self
    }

    pub fn n_samples(&self) -> usize {
        self.embeddings.nrows()
    }

    pub fn dim(&self) -> usize {
        self.embeddings.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn embeddings(&self) -> ArrayView2<'_, f32> {
        self.embeddings.view()
    }

    pub fn logits(&self) -> Option<ArrayView2<'_, f32>> {
        self.logits.as_ref().map(|l| l.view())
    }

    pub fn has_logits(&self) -> bool {
        self.logits.is_some()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn split(&self) -> SplitTag {
        self.split
    }

    pub fn layout(&self) -> Option<TwoFactorLayout> {
        self.layout
    }

    pub fn embedding_row(&self, i: usize) -> ArrayView1<'_, f32> {
        self.embeddings.row(i)
    }

    /// Gathers the given embedding rows into a fresh `f64` matrix.
    pub fn embeddings_f64(&self, rows: &[usize]) -> Array2<f64> {
        self.embeddings.select(Axis(0), rows).mapv(f64::from)
    }

    /// Gathers the given logit rows, if logits are present.
    pub fn logits_f64(&self, rows: &[usize]) -> Option<Array2<f64>> {
        self.logits
            .as_ref()
            .map(|l| l.select(Axis(0), rows).mapv(f64::from))
    }

    /// Swaps the logits, re-checking shape and finiteness.
    pub(crate) fn with_logits(self, logits: Option<Array2<f32>>) -> Result<Self> {
        let layout = self.layout;
        Ok(Self::new(self.embeddings, logits, self.labels, self.class_names, self.split)?.with_layout(layout))
    }

    /// Keeps only the columns in `range`; labels and logits are unchanged.
    pub(crate) fn project_columns(&self, range: std::ops::Range<usize>) -> Self {
        Self {
            embeddings: self
                .embeddings
                .slice(ndarray::s![.., range])
                .to_owned(),
            logits: self.logits.clone(),
            labels: self.labels.clone(),
            class_names: self.class_names.clone(),
            split: self.split,
            layout: None,
        }
    }

    /// Checksum of the payload this dataset would be written with.
    pub fn checksum(&self) -> u64 {
        payload_checksum(&self.payload_bytes())
    }

    fn payload_bytes(&self) -> Vec<u8> {
        let n_vals = self.embeddings.len() + self.logits.as_ref().map_or(0, |l| l.len());
        let mut bytes = Vec::with_capacity(n_vals * 4);
        for v in self.embeddings.iter() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        if let Some(l) = &self.logits {
            for v in l.iter() {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
        }
        bytes
    }
}

fn check_finite(m: ArrayView2<'_, f32>, col_offset: usize) -> Result<()> {
    for ((row, col), v) in m.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite {
                row,
                col: col + col_offset,
            });
        }
    }
    Ok(())
}

/// Sidecar header describing a binary payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetHeader {
    pub schema_version: u32,
    pub n_samples: usize,
    pub dim: usize,
    pub n_classes: usize,
    pub has_logits: bool,
    pub byte_order: String,
    pub value_width: u32,
    pub checksum: String,
    pub split: SplitTag,
    pub class_names: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub two_factor: Option<TwoFactorLayout>,
}

impl DatasetHeader {
    /// Payload length implied by the declared sizes.
    pub fn expected_payload_len(&self) -> Option<u64> {
        let emb = (self.n_samples as u64).checked_mul(self.dim as u64)?;
        let logits = if self.has_logits {
            (self.n_samples as u64).checked_mul(self.n_classes as u64)?
        } else {
            0
        };
        emb.checked_add(logits)?.checked_mul(4)
    }

    pub fn checksum_value(&self) -> Option<u64> {
        if self.checksum.len() != 16 {
            return None;
        }
        u64::from_str_radix(&self.checksum, 16).ok()
    }
}

/// FNV-1a, 64-bit.
pub fn payload_checksum(bytes: &[u8]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(bytes);
    h.finish()
}

fn strip_suffix<'a>(path: &'a Path, suffix: &str) -> Option<&'a str> {
    path.to_str().and_then(|s| s.strip_suffix(suffix))
}

/// Paths of the three sidecar files for a prefix.
pub fn sidecar_paths(prefix: &str) -> (PathBuf, PathBuf, PathBuf) {
    (
        PathBuf::from(format!("{prefix}{HEADER_SUFFIX}")),
        PathBuf::from(format!("{prefix}{PAYLOAD_SUFFIX}")),
        PathBuf::from(format!("{prefix}{LABELS_SUFFIX}")),
    )
}

/// Loads a dataset from a `.oodb.json` header, a bare prefix, or a feature CSV.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let path = path.as_ref();
    if let Some(prefix) = strip_suffix(path, HEADER_SUFFIX) {
        return load_sidecar(prefix);
    }
    if path.extension().is_some_and(|e| e == "csv") {
        return load_feature_csv(path, SplitTag::Train);
    }
    let prefix = path.to_string_lossy().into_owned();
    if Path::new(&format!("{prefix}{HEADER_SUFFIX}")).exists() {
        return load_sidecar(&prefix);
    }
    Err(Error::InvalidArgument(format!(
        "{} is neither a {HEADER_SUFFIX} header, a dataset prefix, nor a .csv file",
        path.display()
    )))
}

fn load_sidecar(prefix: &str) -> Result<LabeledDataset> {
    let (header_path, payload_path, labels_path) = sidecar_paths(prefix);
    let header_text =
        fs::read_to_string(&header_path).map_err(|e| Error::io(&header_path, e))?;
    let header: DatasetHeader =
        serde_json::from_str(&header_text).map_err(|e| Error::MalformedHeader {
            path: header_path.clone(),
            reason: e.to_string(),
        })?;
    let malformed = |reason: String| Error::MalformedHeader {
        path: header_path.clone(),
        reason,
    };
    if header.schema_version != SCHEMA_VERSION {
        return Err(malformed(format!(
            "unsupported schema_version {}",
            header.schema_version
        )));
    }
    if header.byte_order != "little" {
        return Err(malformed(format!(
            "byte_order must be \"little\", got {:?}",
            header.byte_order
        )));
    }
    if header.value_width != 32 {
        return Err(malformed(format!(
            "value_width must be 32, got {}",
            header.value_width
        )));
    }
    if header.class_names.len() != header.n_classes {
        return Err(malformed(format!(
            "n_classes is {} but {} class names are listed",
            header.n_classes,
            header.class_names.len()
        )));
    }
    if let Some(layout) = header.two_factor {
        if layout.d1 + layout.d2 != header.dim {
            return Err(malformed(format!(
                "two_factor layout {}+{} does not match dim {}",
                layout.d1, layout.d2, header.dim
            )));
        }
    }
    let declared = header
        .checksum_value()
        .ok_or_else(|| malformed(format!("checksum {:?} is not 16 hex digits", header.checksum)))?;
    let expected_len = header
        .expected_payload_len()
        .ok_or_else(|| malformed("declared sizes overflow".into()))?;

    let payload = fs::read(&payload_path).map_err(|e| Error::io(&payload_path, e))?;
    if payload.len() as u64 != expected_len {
        return Err(Error::SizeMismatch {
            expected: expected_len,
            actual: payload.len() as u64,
        });
    }
    let actual = payload_checksum(&payload);
    if actual != declared {
        return Err(Error::ChecksumMismatch {
            expected: declared,
            actual,
        });
    }

    let floats: Vec<f32> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    let n_emb = header.n_samples * header.dim;
    let embeddings = Array2::from_shape_vec((header.n_samples, header.dim), floats[..n_emb].to_vec())
        .map_err(|e| malformed(e.to_string()))?;
    let logits = if header.has_logits {
        Some(
            Array2::from_shape_vec(
                (header.n_samples, header.n_classes),
                floats[n_emb..].to_vec(),
            )
            .map_err(|e| malformed(e.to_string()))?,
        )
    } else {
        None
    };

    let labels = read_labels_csv(&labels_path, &header.class_names)?;
    if labels.len() != header.n_samples {
        return Err(Error::InvalidDataset(format!(
            "{} lists {} labels for {} samples",
            labels_path.display(),
            labels.len(),
            header.n_samples
        )));
    }
    Ok(
        LabeledDataset::new(embeddings, logits, labels, header.class_names, header.split)?
            .with_layout(header.two_factor),
    )
}

fn csv_line(record: &csv::StringRecord) -> usize {
    record.position().map_or(0, |p| p.line() as usize)
}

fn read_labels_csv(path: &Path, class_names: &[String]) -> Result<Vec<usize>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let expected = ["index", "label", "class_name"];
    if headers.len() != 3 || headers.iter().zip(expected).any(|(a, b)| a != b) {
        return Err(Error::Parse {
            line: 1,
            col: 1,
            reason: format!("labels header must be index,label,class_name, got {headers:?}"),
        });
    }
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = csv_line(&record);
        let row = labels.len();
        let index: usize = parse_field(&record, 0, line)?;
        if index != row {
            return Err(Error::Parse {
                line,
                col: 1,
                reason: format!("expected index {row}, found {index}"),
            });
        }
        let label: usize = parse_field(&record, 1, line)?;
        if label >= class_names.len() {
            return Err(Error::LabelOutOfRange {
                row,
                label,
                n_classes: class_names.len(),
            });
        }
        let name = record.get(2).unwrap_or_default();
        if name != class_names[label] {
            return Err(Error::Parse {
                line,
                col: 3,
                reason: format!(
                    "class_name {name:?} does not match header name {:?} for label {label}",
                    class_names[label]
                ),
            });
        }
        labels.push(label);
    }
    Ok(labels)
}

fn parse_field<T: std::str::FromStr>(record: &csv::StringRecord, col: usize, line: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let raw = record.get(col).ok_or_else(|| Error::Parse {
        line,
        col: col + 1,
        reason: "missing field".into(),
    })?;
    raw.trim().parse().map_err(|e: T::Err| Error::Parse {
        line,
        col: col + 1,
        reason: format!("{raw:?}: {e}"),
    })
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            line,
            col: 0,
            reason: format!("{other:?}"),
        },
    }
}

/// Reads a feature CSV: a header row, `dim` feature columns, then `label`.
///
/// Classes are named `class_0 .. class_{k-1}` where `k` is one past the
/// largest label seen. Non-finite values are reported by 0-based sample row
/// and feature column.
pub fn load_feature_csv(path: &Path, split: SplitTag) -> Result<LabeledDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.len() < 2 || headers.get(headers.len() - 1).map(str::trim) != Some("label") {
        return Err(Error::Parse {
            line: 1,
            col: headers.len(),
            reason: "last column must be named `label`".into(),
        });
    }
    let dim = headers.len() - 1;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = csv_line(&record);
        let row = labels.len();
        for col in 0..dim {
            let v: f32 = parse_field(&record, col, line)?;
            if !v.is_finite() {
                return Err(Error::NonFinite { row, col });
            }
            values.push(v);
        }
        labels.push(parse_field::<usize>(&record, dim, line)?);
    }
    let n = labels.len();
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let class_names = (0..n_classes).map(|c| format!("class_{c}")).collect();
    let embeddings = Array2::from_shape_vec((n, dim), values)
        .map_err(|e| Error::InvalidDataset(e.to_string()))?;
    LabeledDataset::new(embeddings, None, labels, class_names, split)
}

/// Writes the three sidecar files for `prefix` and returns the header.
pub fn write_dataset(dataset: &LabeledDataset, prefix: &str) -> Result<DatasetHeader> {
    let (header_path, payload_path, labels_path) = sidecar_paths(prefix);
    let payload = dataset.payload_bytes();
    let header = DatasetHeader {
        schema_version: SCHEMA_VERSION,
        n_samples: dataset.n_samples(),
        dim: dataset.dim(),
        n_classes: dataset.n_classes(),
        has_logits: dataset.has_logits(),
        byte_order: "little".into(),
        value_width: 32,
        checksum: format!("{:016x}", payload_checksum(&payload)),
        split: dataset.split(),
        class_names: dataset.class_names().to_vec(),
        two_factor: dataset.layout(),
    };
    fs::write(&payload_path, &payload).map_err(|e| Error::io(&payload_path, e))?;
    let mut text = serde_json::to_string_pretty(&header)?;
    text.push('\n');
    fs::write(&header_path, text).map_err(|e| Error::io(&header_path, e))?;

    let mut writer = csv::Writer::from_path(&labels_path).map_err(|e| csv_error(&labels_path, e))?;
    writer
        .write_record(["index", "label", "class_name"])
        .map_err(|e| csv_error(&labels_path, e))?;
    for (i, &label) in dataset.labels().iter().enumerate() {
        writer
            .write_record([
                i.to_string(),
                label.to_string(),
                dataset.class_names()[label].clone(),
            ])
            .map_err(|e| csv_error(&labels_path, e))?;
    }
    writer.flush().map_err(|e| Error::io(&labels_path, e))?;
    Ok(header)
}

/// Checks that two datasets share embedding dimension and class vocabulary.
pub fn validate_pair(train: &LabeledDataset, test: &LabeledDataset) -> Result<()> {
    if train.dim() != test.dim() {
        return Err(Error::DimensionMismatch {
            expected: train.dim(),
            actual: test.dim(),
        });
    }
    let (a, b) = (train.class_names(), test.class_names());
    for i in 0..a.len().max(b.len()) {
        let left = a.get(i).cloned().unwrap_or_default();
        let right = b.get(i).cloned().unwrap_or_default();
        if left != right || i >= a.len() || i >= b.len() {
            return Err(Error::ClassMismatch {
                index: i,
                left,
                right,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|c| format!("c{c}")).collect()
    }

    fn tiny() -> LabeledDataset {
        LabeledDataset::new(
            array![[0.0f32, 1.0], [2.0, 3.0], [4.0, 5.0]],
            None,
            vec![0, 1, 1],
            names(2),
            SplitTag::Train,
        )
        .unwrap()
    }

    #[test]
    fn minimal_file_loads() {
        let dir = tempfile::tempdir().unwrap();
        let prefix = dir.path().join("tiny").to_string_lossy().into_owned();
        write_dataset(&tiny(), &prefix).unwrap();
        assert_eq!(fs::metadata(format!("{prefix}{PAYLOAD_SUFFIX}")).unwrap().len(), 24);
        let back = load_dataset(format!("{prefix}{HEADER_SUFFIX}")).unwrap();
        assert_eq!(back.n_samples(), 3);
        assert_eq!(back, tiny());
        // bare prefix works too
        assert_eq!(load_dataset(&prefix).unwrap(), tiny());
    }

    #[test]
    fn truncated_payload_is_size_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let prefix = dir.path().join("tiny").to_string_lossy().into_owned();
        write_dataset(&tiny(), &prefix).unwrap();
        let bin = format!("{prefix}{PAYLOAD_SUFFIX}");
        let bytes = fs::read(&bin).unwrap();
        fs::write(&bin, &bytes[..bytes.len() - 4]).unwrap();
        let err = load_dataset(&prefix).unwrap_err();
        assert!(
            matches!(err, Error::SizeMismatch { expected: 24, actual: 20 }),
            "{err}"
        );
    }

    #[test]
    fn flipped_payload_byte_is_checksum_failure() {
        let dir = tempfile::tempdir().unwrap();
        let prefix = dir.path().join("tiny").to_string_lossy().into_owned();
        write_dataset(&tiny(), &prefix).unwrap();
        let bin = format!("{prefix}{PAYLOAD_SUFFIX}");
        let mut bytes = fs::read(&bin).unwrap();
        bytes[5] ^= 0x40;
        fs::write(&bin, &bytes).unwrap();
        assert!(matches!(
            load_dataset(&prefix).unwrap_err(),
            Error::ChecksumMismatch { .. }
        ));
    }

    #[test]
    fn csv_nan_names_row() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("feat.csv");
        let mut text = String::from("f0,f1,label\n");
        for i in 0..8 {
            if i == 5 {
                text.push_str("1.0,NaN,1\n");
            } else {
                text.push_str(&format!("{i}.0,0.5,{}\n", i % 2));
            }
        }
        fs::write(&path, text).unwrap();
        let err = load_dataset(&path).unwrap_err();
        assert!(matches!(err, Error::NonFinite { row: 5, col: 1 }), "{err}");
    }

    #[test]
    fn csv_ingestion() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("feat.csv");
        fs::write(&path, "a,b,c,label\n1,2,3,0\n4,5,6,2\n").unwrap();
        let ds = load_dataset(&path).unwrap();
        assert_eq!(ds.dim(), 3);
        assert_eq!(ds.n_classes(), 3);
        assert_eq!(ds.labels(), &[0, 2]);
        assert_eq!(ds.class_names()[2], "class_2");
    }

    #[test]
    fn csv_parse_error_has_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("feat.csv");
        fs::write(&path, "a,label\n1,0\nxyz,1\n").unwrap();
        let err = load_dataset(&path).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, col: 1, .. }), "{err}");
    }

    #[test]
    fn label_out_of_range() {
        let err = LabeledDataset::new(
            array![[0.0f32], [1.0]],
            None,
            vec![0, 2],
            names(2),
            SplitTag::Test,
        )
        .unwrap_err();
        assert!(matches!(err, Error::LabelOutOfRange { row: 1, label: 2, n_classes: 2 }));
    }

    #[test]
    fn single_class_rejected() {
        assert!(LabeledDataset::new(array![[0.0f32]], None, vec![0], names(1), SplitTag::Test).is_err());
    }

    #[test]
    fn logits_round_trip() {
        let ds = LabeledDataset::new(
            array![[0.0f32, 1.0], [2.0, 3.0]],
            Some(array![[1.0f32, -1.0], [0.25, 0.5]]),
            vec![1, 0],
            names(2),
            SplitTag::Test,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let prefix = dir.path().join("lg").to_string_lossy().into_owned();
        let header = write_dataset(&ds, &prefix).unwrap();
        assert!(header.has_logits);
        assert_eq!(header.expected_payload_len(), Some(32));
        assert_eq!(load_dataset(&prefix).unwrap(), ds);
    }

    fn with_dim(dim: usize, classes: Vec<String>) -> LabeledDataset {
        LabeledDataset::new(Array2::zeros((2, dim)), None, vec![0, 1], classes, SplitTag::Train).unwrap()
    }

    #[test]
    fn pair_validation() {
        assert!(validate_pair(&with_dim(128, names(3)), &with_dim(128, names(3))).is_ok());
        assert!(matches!(
            validate_pair(&with_dim(128, names(3)), &with_dim(64, names(3))),
            Err(Error::DimensionMismatch { expected: 128, actual: 64 })
        ));
        let mut permuted = names(3);
        permuted.swap(0, 1);
        assert!(matches!(
            validate_pair(&with_dim(8, names(3)), &with_dim(8, permuted)),
            Err(Error::ClassMismatch { index: 0, .. })
        ));
        assert!(validate_pair(&with_dim(8, names(3)), &with_dim(8, names(4))).is_err());
    }
}
