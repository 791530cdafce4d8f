//! Feature dataset persistence.
//!
//! Two formats carry the same content:
//!
//! * CSV with header `label,f0,f1,…,f{n-1}`; the label column holds class names,
//!   collected in first-appearance order.
//! * `RNF1` binary, all integers little-endian:
//!
//! ```text
//! "RNF1"                      4 bytes magic
//! N, n, m                     u64 each
//! m × (len: u32, UTF-8 name)  class-name table
//! N × u32                     labels
//! N × n × f64                 features, row-major, IEEE-754
//! crc32                       u32, CRC-32 (IEEE) of every preceding byte
//! ```

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rnn::LabelEncoding;

pub const BINARY_MAGIC: &[u8; 4] = b"RNF1";
pub const BINARY_FORMAT_VERSION: u32 = 1;

/// Where a sample came from, when the producer recorded it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleSource {
    pub id: String,
    pub origin: PathBuf,
}

/// `N × n` features with one class label per row.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureDataset {
    pub x: Matrix,
    pub labels: Vec<usize>,
    pub encoding: LabelEncoding,
    pub sources: Option<Vec<SampleSource>>,
}

impl FeatureDataset {
    pub fn new(x: Matrix, labels: Vec<usize>, encoding: LabelEncoding) -> Result<Self> {
        if labels.len() != x.rows() {
            return Err(Error::contract(format!(
                "{} labels for {} feature rows",
                labels.len(),
                x.rows()
            )));
        }
        encoding.check_labels(&labels)?;
        Ok(Self {
            x,
            labels,
            encoding,
            sources: None,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.x.rows()
    }

    pub fn n_features(&self) -> usize {
        self.x.cols()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.encoding.class_count()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }
}

/// Header facts of a binary dataset file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetManifest {
    pub version: u32,
    pub n_samples: u64,
    pub n_features: u64,
    pub class_names: Vec<String>,
    pub checksum: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DatasetFormat {
    Csv,
    Binary,
}

impl DatasetFormat {
    /// `.csv` selects CSV; anything else is binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => DatasetFormat::Csv,
            _ => DatasetFormat::Binary,
        }
    }
}

pub fn save_dataset(path: &Path, ds: &FeatureDataset, format: DatasetFormat) -> Result<()> {
    match format {
        DatasetFormat::Csv => save_features_csv(path, ds),
        DatasetFormat::Binary => save_features_binary(path, ds),
    }
}

/// Loads either format, sniffing the magic bytes.
pub fn load_dataset(path: &Path) -> Result<FeatureDataset> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(BINARY_MAGIC) {
        decode_binary(path, &bytes).map(|(ds, _)| ds)
    } else {
        parse_csv(path, &bytes)
    }
}

pub fn load_features_csv(path: &Path) -> Result<FeatureDataset> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_csv(path, &bytes)
}

fn parse_csv(path: &Path, bytes: &[u8]) -> Result<FeatureDataset> {
    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(bytes);
    let mut records = reader.records();

    let header = match records.next() {
        Some(r) => r.map_err(|e| parse_err(1, e.to_string()))?,
        None => return Err(parse_err(1, "empty file".into())),
    };
    if header.get(0) != Some("label") {
        return Err(parse_err(1, "header must start with `label`".into()));
    }
    let n = header.len() - 1;
    if n == 0 {
        return Err(parse_err(1, "no feature columns".into()));
    }
    for (j, name) in header.iter().skip(1).enumerate() {
        if name != format!("f{j}") {
            return Err(parse_err(
                1,
                format!("column {} is `{name}`, expected `f{j}`", j + 1),
            ));
        }
    }

    let mut names: Vec<String> = Vec::new();
    let mut labels = Vec::new();
    let mut values = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != n + 1 {
            return Err(parse_err(
                line,
                format!("expected {} fields, found {}", n + 1, rec.len()),
            ));
        }
        let name = &rec[0];
        if name.is_empty() {
            return Err(parse_err(line, "empty label".into()));
        }
        let label = match names.iter().position(|c| c == name) {
            Some(i) => i,
            None => {
                names.push(name.to_string());
                names.len() - 1
            }
        };
        labels.push(label);
        for (j, field) in rec.iter().skip(1).enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| parse_err(line, format!("f{j}: `{field}` is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("f{j}: non-finite value `{field}`")));
            }
            values.push(v);
        }
    }
    if labels.is_empty() {
        return Err(parse_err(2, "no data rows".into()));
    }
    let encoding = LabelEncoding::new(names).map_err(|e| Error::InvalidData {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let x = Matrix::new(labels.len(), n, values)?;
    FeatureDataset::new(x, labels, encoding)
}

pub fn save_features_csv(path: &Path, ds: &FeatureDataset) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let to_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::InvalidData {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    };
    let mut header = vec!["label".to_string()];
    header.extend((0..ds.n_features()).map(|j| format!("f{j}")));
    w.write_record(&header).map_err(to_err)?;
    let mut row = Vec::with_capacity(ds.n_features() + 1);
    for (i, &l) in ds.labels.iter().enumerate() {
        row.clear();
        row.push(ds.encoding.class_names()[l].clone());
        // `{:?}` is the shortest representation that parses back to the same f64.
        row.extend(ds.x.row(i).iter().map(|v| format!("{v:?}")));
        w.write_record(&row).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn encode_binary(ds: &FeatureDataset) -> Vec<u8> {
    let (rows, cols) = ds.x.shape();
    let mut buf = Vec::with_capacity(40 + rows * (4 + 8 * cols));
    buf.extend_from_slice(BINARY_MAGIC);
    buf.extend_from_slice(&(rows as u64).to_le_bytes());
    buf.extend_from_slice(&(cols as u64).to_le_bytes());
    buf.extend_from_slice(&(ds.encoding.class_count() as u64).to_le_bytes());
    for name in ds.encoding.class_names() {
        buf.extend_from_slice(&(name.len() as u32).to_le_bytes());
        buf.extend_from_slice(name.as_bytes());
    }
    for &l in &ds.labels {
        buf.extend_from_slice(&(l as u32).to_le_bytes());
    }
    for v in ds.x.as_slice() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let crc = crc32fast::hash(&buf);
    buf.extend_from_slice(&crc.to_le_bytes());
    buf
}

pub fn save_features_binary(path: &Path, ds: &FeatureDataset) -> Result<()> {
    let bytes = encode_binary(ds);
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&bytes).map_err(|e| Error::io(path, e))
}

pub fn load_features_binary(path: &Path) -> Result<FeatureDataset> {
    load_features_binary_with_manifest(path).map(|(ds, _)| ds)
}

pub fn load_features_binary_with_manifest(
    path: &Path,
) -> Result<(FeatureDataset, DatasetManifest)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_binary(path, &bytes)
}

struct Cursor<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(self.truncated(len as u64)),
        }
    }

    fn truncated(&self, more: u64) -> Error {
        Error::Truncated {
            path: self.path.to_path_buf(),
            needed: (self.pos as u64).saturating_add(more),
            found: self.bytes.len() as u64,
        }
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode_binary(path: &Path, bytes: &[u8]) -> Result<(FeatureDataset, DatasetManifest)> {
    let invalid = |message: String| Error::InvalidData {
        path: path.to_path_buf(),
        message,
    };
    if bytes.len() >= 4 && &bytes[..4] != BINARY_MAGIC {
        return Err(Error::BadMagic {
            path: path.to_path_buf(),
        });
    }
    let mut cur = Cursor {
        path,
        bytes,
        pos: 0,
    };
    cur.take(4)?;
    let n_samples = cur.u64()?;
    let n_features = cur.u64()?;
    let n_classes = cur.u64()?;

    let mut names = Vec::new();
    for _ in 0..n_classes {
        let len = cur.u32()? as usize;
        let raw = cur.take(len)?;
        let name = std::str::from_utf8(raw)
            .map_err(|e| invalid(format!("class name {} is not UTF-8: {e}", names.len())))?;
        names.push(name.to_string());
    }

    // Total payload size is known now; check it before walking the body.
    let body = n_samples
        .checked_mul(4)
        .and_then(|l| {
            n_samples
                .checked_mul(n_features)
                .and_then(|c| c.checked_mul(8))
                .and_then(|f| f.checked_add(l))
        })
        .and_then(|b| b.checked_add(4))
        .ok_or_else(|| invalid(format!("header sizes {n_samples}×{n_features} overflow")))?;
    let needed = (cur.pos as u64).saturating_add(body);
    if (bytes.len() as u64) < needed {
        return Err(cur.truncated(body));
    }
    if (bytes.len() as u64) > needed {
        return Err(invalid(format!(
            "{} trailing bytes after checksum",
            bytes.len() as u64 - needed
        )));
    }

    let payload_end = bytes.len() - 4;
    let stored = u32::from_le_bytes(bytes[payload_end..].try_into().unwrap());
    let computed = crc32fast::hash(&bytes[..payload_end]);
    if stored != computed {
        return Err(Error::Checksum {
            path: path.to_path_buf(),
            stored,
            computed,
        });
    }

    let (n, d) = (n_samples as usize, n_features as usize);
    let labels: Vec<usize> = cur
        .take(n * 4)?
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()) as usize)
        .collect();
    let values: Vec<f64> = cur
        .take(n * d * 8)?
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();

    if n == 0 || d == 0 {
        return Err(invalid(format!(
            "empty dataset ({n} samples × {d} features)"
        )));
    }
    let encoding = LabelEncoding::new(names.clone()).map_err(|e| invalid(e.to_string()))?;
    let x = Matrix::new(n, d, values).map_err(|e| invalid(e.to_string()))?;
    let ds = FeatureDataset::new(x, labels, encoding).map_err(|e| invalid(e.to_string()))?;
    let manifest = DatasetManifest {
        version: BINARY_FORMAT_VERSION,
        n_samples,
        n_features,
        class_names: names,
        checksum: stored,
    };
    Ok((ds, manifest))
}
