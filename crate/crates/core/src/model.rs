//! Data containers, configuration and the seeding contract shared by every
//! detector in the crate.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column name used for labels when none is given.
pub const DEFAULT_LABEL_COLUMN: &str = "label";

/// Dense row-major matrix of `n` points in `d` dimensions with optional
/// binary labels (1 = anomaly).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    values: Vec<f64>,
    n: usize,
    d: usize,
    labels: Option<Vec<u8>>,
    feature_names: Option<Vec<String>>,
}

impl Dataset {
    /// Builds a dataset from row-major values, checking every invariant.
    pub fn new(values: Vec<f64>, n: usize, d: usize) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidDataset(format!(
                "need n >= 1 and d >= 1, got n={n}, d={d}"
            )));
        }
        if values.len() != n * d {
            return Err(Error::InvalidDataset(format!(
                "{} values cannot form a {n}x{d} matrix",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite value at row {}, column {}",
                pos / d,
                pos % d
            )));
        }
        Ok(Dataset {
            values,
            n,
            d,
            labels: None,
            feature_names: None,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(n * d);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != d {
                return Err(Error::RaggedRow {
                    row: i + 1,
                    expected: d,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::new(values, n, d)
    }

    pub fn with_labels(mut self, labels: Vec<u8>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::InvalidDataset(format!(
                "{} labels for {} points",
                labels.len(),
                self.n
            )));
        }
        if let Some(i) = labels.iter().position(|&l| l > 1) {
            return Err(Error::BadLabel {
                row: i + 1,
                value: labels[i].to_string(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.d {
            return Err(Error::InvalidDataset(format!(
                "{} feature names for {} columns",
                names.len(),
                self.d
            )));
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.d)
    }

    /// Row-major backing storage.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[u8]> {
        self.labels.as_deref()
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// Column values of feature `j`.
    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows().map(move |r| r[j])
    }

    /// Header names, falling back to `f0..f{d-1}`.
    pub fn header(&self) -> Vec<String> {
        match &self.feature_names {
            Some(names) => names.clone(),
            None => (0..self.d).map(|j| format!("f{j}")).collect(),
        }
    }
}

/// Per-feature min-max scaling fitted on one dataset and replayable on any
/// later point. Constant columns map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    mins: Vec<f64>,
    spans: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(data: &Dataset) -> Self {
        let mut mins = vec![f64::INFINITY; data.d()];
        let mut maxs = vec![f64::NEG_INFINITY; data.d()];
        for row in data.rows() {
            for (j, &v) in row.iter().enumerate() {
                mins[j] = mins[j].min(v);
                maxs[j] = maxs[j].max(v);
            }
        }
        let spans = mins.iter().zip(&maxs).map(|(lo, hi)| hi - lo).collect();
        MinMaxScaler { mins, spans }
    }

    pub fn dim(&self) -> usize {
        self.mins.len()
    }

    pub fn transform_point(&self, x: &[f64], out: &mut [f64]) {
        for (j, (o, &v)) in out.iter_mut().zip(x).enumerate() {
            let span = self.spans[j];
            *o = if span > 0.0 {
                (v - self.mins[j]) / span
            } else {
                0.0
            };
        }
    }

    pub fn transform(&self, data: &Dataset) -> Dataset {
        let mut values = vec![0.0; data.values.len()];
        for (src, dst) in data.rows().zip(values.chunks_exact_mut(data.d)) {
            self.transform_point(src, dst);
        }
        Dataset {
            values,
            n: data.n,
            d: data.d,
            labels: data.labels.clone(),
            feature_names: data.feature_names.clone(),
        }
    }
}

/// Maps every feature column onto [0, 1]; constant columns become 0.
pub fn minmax_normalize(data: &Dataset) -> Dataset {
    MinMaxScaler::fit(data).transform(data)
}

/// ISER hyperparameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IserConfig {
    /// Subset size sampled for each partitioning.
    pub psi: usize,
    /// Number of partitionings.
    pub t: usize,
    pub seed: u64,
    /// Min-max scale features before partitioning (off by default).
    pub normalize: bool,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for IserConfig {
    fn default() -> Self {
        IserConfig {
            psi: 16,
            t: 200,
            seed: 0,
            normalize: false,
            execution: Execution::Parallel,
        }
    }
}

// Execution mode does not affect results, so it is not part of equality.
impl PartialEq for IserConfig {
    fn eq(&self, other: &Self) -> bool {
        (self.psi, self.t, self.seed, self.normalize)
            == (other.psi, other.t, other.seed, other.normalize)
    }
}

impl Eq for IserConfig {}

impl IserConfig {
    pub fn new(psi: usize, t: usize, seed: u64) -> Self {
        IserConfig {
            psi,
            t,
            seed,
            ..Default::default()
        }
    }

    pub fn with_normalize(mut self, normalize: bool) -> Self {
        self.normalize = normalize;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.psi < 2 {
            return Err(Error::InvalidParameter(format!(
                "psi must be at least 2, got {}",
                self.psi
            )));
        }
        if self.t == 0 {
            return Err(Error::InvalidParameter("t must be at least 1".into()));
        }
        Ok(())
    }
}

/// Whether ensemble members and batch rows are processed on the rayon pool.
/// Both modes produce identical results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Evaluates `f(0..len)` and returns the results in index order.
    pub fn map_indexed<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Execution::Sequential => (0..len).map(f).collect(),
            Execution::Parallel => (0..len).into_par_iter().map(f).collect(),
        }
    }
}

/// One independent random stream derived from a master seed.
///
/// The stream is ChaCha8 keyed by `master_seed` (expanded through the
/// generator's `seed_from_u64`) with the ChaCha stream id set to
/// `stream_index`. Distinct indices never share output, and the sequence for
/// a given pair does not depend on which thread or in which order it is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        RngStream {
            master_seed,
            stream_index,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// SplitMix64 finalizer applied to `seed ^ salt`-style combinations; used to
/// give separate model components (partitionings, trees, repeats) unrelated
/// master seeds.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed
        .wrapping_add(salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn parse_cell(raw: &str, row: usize, column: &str) -> Result<f64> {
    let v: f64 = raw.trim().parse().map_err(|_| Error::NonNumeric {
        row,
        column: column.to_string(),
        value: raw.to_string(),
    })?;
    if !v.is_finite() {
        return Err(Error::NonFinite {
            row,
            column: column.to_string(),
            value: raw.to_string(),
        });
    }
    Ok(v)
}

/// Column names of a headered CSV file.
pub fn read_csv_header(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file);
    Ok(reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect())
}

/// Reads a headered CSV of numeric features. Rows in error messages are
/// 1-based data records (the header is not counted).
pub fn ingest_csv(path: impl AsRef<Path>, label_column: Option<&str>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file);
    let header: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    let label_idx = match label_column {
        Some(name) => Some(
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingLabelColumn(name.to_string()))?,
        ),
        None => None,
    };
    let feature_idx: Vec<usize> = (0..header.len())
        .filter(|&j| Some(j) != label_idx)
        .collect();
    let names: Vec<String> = feature_idx.iter().map(|&j| header[j].clone()).collect();

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut n = 0;
    for record in reader.records() {
        let record = record?;
        let row = n + 1;
        if record.len() != header.len() {
            return Err(Error::RaggedRow {
                row,
                expected: header.len(),
                found: record.len(),
            });
        }
        for &j in &feature_idx {
            values.push(parse_cell(&record[j], row, &header[j])?);
        }
        if let Some(j) = label_idx {
            let raw = record[j].trim();
            let label = match raw.parse::<f64>() {
                Ok(0.0) => 0,
                Ok(1.0) => 1,
                _ => {
                    return Err(Error::BadLabel {
                        row,
                        value: raw.to_string(),
                    })
                }
            };
            labels.push(label);
        }
        n += 1;
    }

    let data = Dataset::new(values, n, names.len())?.with_feature_names(names)?;
    if label_idx.is_some() {
        data.with_labels(labels)
    } else {
        Ok(data)
    }
}

/// Writes the dataset as CSV with a `label` column when labels are present.
/// Floats use the shortest representation that parses back to the same value.
pub fn write_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::with_capacity(data.values.len() * 12);
    let mut header = data.header();
    if data.labels.is_some() {
        header.push(DEFAULT_LABEL_COLUMN.to_string());
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for (i, row) in data.rows().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&v.to_string());
        }
        if let Some(labels) = &data.labels {
            out.push(',');
            out.push_str(&labels[i].to_string());
        }
        out.push('\n');
    }
    write_file(path, out.as_bytes())
}

/// Creates or truncates `path` and writes `bytes`.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn write_tmp(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn ingest_with_labels() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tmp(&dir, "a.csv", "f0,f1,label\n0,0,0\n1,1,0\n9,9,1\n");
        let data = ingest_csv(&p, Some("label")).unwrap();
        assert_eq!((data.n(), data.d()), (3, 2));
        assert_eq!(data.labels(), Some(&[0u8, 0, 1][..]));
        assert_eq!(data.row(2), &[9.0, 9.0]);
        assert_eq!(data.feature_names().unwrap(), &["f0", "f1"]);

        let again = ingest_csv(&p, Some("label")).unwrap();
        assert_eq!(data, again);
    }

    #[test]
    fn ingest_reports_bad_cell() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tmp(&dir, "a.csv", "f0,f1,label\n0,0,0\n1,abc,0\n");
        match ingest_csv(&p, Some("label")) {
            Err(Error::NonNumeric { row, column, value }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "f1");
                assert_eq!(value, "abc");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ingest_errors() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            ingest_csv(dir.path().join("missing.csv"), None),
            Err(Error::Io { .. })
        ));
        let p = write_tmp(&dir, "b.csv", "f0,label\n0,2\n");
        assert!(matches!(
            ingest_csv(&p, Some("label")),
            Err(Error::BadLabel { row: 1, .. })
        ));
        assert!(matches!(
            ingest_csv(&p, Some("class")),
            Err(Error::MissingLabelColumn(_))
        ));
        let p = write_tmp(&dir, "c.csv", "f0,f1\n1,inf\n");
        assert!(matches!(ingest_csv(&p, None), Err(Error::NonFinite { .. })));
        let p = write_tmp(&dir, "d.csv", "f0,f1\n");
        assert!(matches!(
            ingest_csv(&p, None),
            Err(Error::InvalidDataset(_))
        ));
    }

    #[test]
    fn ingest_without_label_keeps_all_columns() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tmp(&dir, "a.csv", "a,label,b\n1,0,2\n3,1,4\n");
        let data = ingest_csv(&p, None).unwrap();
        assert_eq!(data.d(), 3);
        assert!(data.labels().is_none());
        let data = ingest_csv(&p, Some("label")).unwrap();
        assert_eq!(data.row(1), &[3.0, 4.0]);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let mut rng = RngStream::new(5, 0).rng();
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|_| (0..3).map(|_| rng.random_range(-1e6..1e6) / 7.0).collect())
            .collect();
        let labels = (0..50).map(|i| (i % 7 == 0) as u8).collect();
        let data = Dataset::from_rows(&rows)
            .unwrap()
            .with_labels(labels)
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("rt.csv");
        write_csv(&data, &p).unwrap();
        let back = ingest_csv(&p, Some("label")).unwrap();
        assert_eq!(back.values(), data.values());
        assert_eq!(back.labels(), data.labels());
    }

    #[test]
    fn normalize_examples() {
        let data =
            Dataset::from_rows(&[[2.0, 5.0, 0.0], [4.0, 5.0, 0.25], [6.0, 5.0, 1.0]]).unwrap();
        let norm = minmax_normalize(&data);
        assert_eq!(norm.column(0).collect::<Vec<_>>(), vec![0.0, 0.5, 1.0]);
        assert_eq!(norm.column(1).collect::<Vec<_>>(), vec![0.0, 0.0, 0.0]);
        assert_eq!(norm.column(2).collect::<Vec<_>>(), vec![0.0, 0.25, 1.0]);
        assert_eq!(minmax_normalize(&norm), norm);
    }

    #[test]
    fn config_validation() {
        assert!(IserConfig::new(1, 10, 0).validate().is_err());
        assert!(IserConfig::new(2, 0, 0).validate().is_err());
        assert!(IserConfig::new(2, 1, 0).validate().is_ok());
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let draw = |s: RngStream| -> Vec<u64> {
            let mut r = s.rng();
            (0..16).map(|_| r.random()).collect()
        };
        assert_eq!(draw(RngStream::new(9, 3)), draw(RngStream::new(9, 3)));
        assert_ne!(draw(RngStream::new(9, 3)), draw(RngStream::new(9, 4)));
        assert_ne!(draw(RngStream::new(9, 3)), draw(RngStream::new(10, 3)));
    }

    #[test]
    fn map_indexed_is_order_preserving() {
        let seq = Execution::Sequential.map_indexed(100, |i| i * i);
        let par = Execution::Parallel.map_indexed(100, |i| i * i);
        assert_eq!(seq, par);
    }
}
