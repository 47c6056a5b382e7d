//! Dataset loading and partitioning: IDX image and label files, labeled
//! CSV, synthetic Gaussian mixtures, and the deterministic IID and
//! label-sorted node splits used by the task simulations.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng;
use crate::types::DenseVector;

/// Labeled rows: one feature vector and one class index per example.
#[derive(Debug, Clone)]
pub struct Dataset {
    rows: Vec<DenseVector>,
    labels: Vec<usize>,
}

impl Dataset {
    /// Builds a dataset after checking rows and labels line up and share
    /// a single feature dimension.
    pub fn new(rows: Vec<DenseVector>, labels: Vec<usize>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                found: labels.len(),
            });
        }
        if rows.is_empty() {
            return Err(Error::Empty("dataset rows"));
        }
        let d = rows[0].dim();
        for row in &rows {
            if row.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: row.dim(),
                });
            }
        }
        Ok(Self { rows, labels })
    }

    pub fn rows(&self) -> &[DenseVector] {
        &self.rows
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Feature dimension shared by every row.
    pub fn dim(&self) -> usize {
        self.rows[0].dim()
    }

    /// Number of distinct classes, taken as max label + 1.
    pub fn class_count(&self) -> usize {
        self.labels.iter().copied().max().map_or(0, |m| m + 1)
    }

    fn subset(&self, indices: &[usize]) -> Result<Self> {
        let rows = indices.iter().map(|&i| self.rows[i].clone()).collect();
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Self::new(rows, labels)
    }
}

const IDX_IMAGE_MAGIC: u32 = 2051;
const IDX_LABEL_MAGIC: u32 = 2049;

fn idx_err(path: &Path, detail: impl Into<String>) -> Error {
    Error::IdxFormat {
        path: path.display().to_string(),
        detail: detail.into(),
    }
}

fn read_u32_be(bytes: &[u8], offset: usize, path: &Path, what: &str) -> Result<u32> {
    let slice = bytes
        .get(offset..offset + 4)
        .ok_or_else(|| idx_err(path, format!("file too short to hold {what}")))?;
    Ok(u32::from_be_bytes(slice.try_into().expect("four bytes")))
}

/// Loads an IDX image file and its companion label file, scaling pixel
/// bytes to [0, 1]. Both headers, the byte lengths, and the two counts
/// are checked before any row is built.
pub fn load_idx(images: &Path, labels: &Path) -> Result<Dataset> {
    let img_bytes = std::fs::read(images)?;
    let magic = read_u32_be(&img_bytes, 0, images, "magic number")?;
    if magic != IDX_IMAGE_MAGIC {
        return Err(idx_err(
            images,
            format!("expected image magic {IDX_IMAGE_MAGIC}, found {magic}"),
        ));
    }
    let count = read_u32_be(&img_bytes, 4, images, "image count")? as usize;
    let rows = read_u32_be(&img_bytes, 8, images, "row count")? as usize;
    let cols = read_u32_be(&img_bytes, 12, images, "column count")? as usize;
    let pixels = rows
        .checked_mul(cols)
        .and_then(|p| p.checked_mul(count))
        .ok_or_else(|| idx_err(images, "image dimensions overflow"))?;
    if img_bytes.len() != 16 + pixels {
        return Err(idx_err(
            images,
            format!("expected {} bytes, found {}", 16 + pixels, img_bytes.len()),
        ));
    }

    let lbl_bytes = std::fs::read(labels)?;
    let magic = read_u32_be(&lbl_bytes, 0, labels, "magic number")?;
    if magic != IDX_LABEL_MAGIC {
        return Err(idx_err(
            labels,
            format!("expected label magic {IDX_LABEL_MAGIC}, found {magic}"),
        ));
    }
    let lbl_count = read_u32_be(&lbl_bytes, 4, labels, "label count")? as usize;
    if lbl_bytes.len() != 8 + lbl_count {
        return Err(idx_err(
            labels,
            format!("expected {} bytes, found {}", 8 + lbl_count, lbl_bytes.len()),
        ));
    }
    if lbl_count != count {
        return Err(idx_err(
            labels,
            format!("{lbl_count} labels for {count} images"),
        ));
    }
    if count == 0 {
        return Err(idx_err(images, "file holds no images"));
    }

    let dim = rows * cols;
    let data_rows = (0..count)
        .map(|i| {
            let start = 16 + i * dim;
            let values = img_bytes[start..start + dim]
                .iter()
                .map(|&b| f64::from(b) / 255.0)
                .collect();
            DenseVector::new(values)
        })
        .collect::<Result<Vec<_>>>()?;
    let data_labels = lbl_bytes[8..].iter().map(|&b| b as usize).collect();
    Dataset::new(data_rows, data_labels)
}

/// Loads a headed CSV whose last column is an integer class label and
/// whose remaining columns are numeric features.
pub fn load_csv(path: &Path) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() < 2 {
            return Err(Error::Data(format!(
                "csv row {line} has {} columns, need at least 2",
                record.len()
            )));
        }
        let mut values = Vec::with_capacity(record.len() - 1);
        for field in record.iter().take(record.len() - 1) {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::Data(format!("csv row {line}: feature {field:?} is not numeric"))
            })?;
            values.push(v);
        }
        let raw = record[record.len() - 1].trim();
        let label: f64 = raw
            .parse()
            .map_err(|_| Error::Data(format!("csv row {line}: label {raw:?} is not numeric")))?;
        if label < 0.0 || label.fract() != 0.0 {
            return Err(Error::Data(format!(
                "csv row {line}: label {raw:?} is not a non-negative integer"
            )));
        }
        rows.push(DenseVector::new(values)?);
        labels.push(label as usize);
    }
    Dataset::new(rows, labels)
}

/// Block sizes for splitting `total` items into `parts` groups, with the
/// remainder spread one extra item each over the leading groups.
fn block_sizes(total: usize, parts: usize) -> Vec<usize> {
    let base = total / parts;
    let rem = total % parts;
    (0..parts).map(|i| base + usize::from(i < rem)).collect()
}

/// Splits rows uniformly at random into `n` near-equal parts.
pub fn split_iid(data: &Dataset, n: usize, seed: u64) -> Result<Vec<Dataset>> {
    if n == 0 {
        return Err(Error::Empty("node count"));
    }
    if n > data.len() {
        return Err(Error::Config(format!(
            "cannot split {} rows across {n} nodes",
            data.len()
        )));
    }
    let mut indices: Vec<usize> = (0..data.len()).collect();
    indices.shuffle(&mut rng::stream(seed, "split"));
    cut_into_parts(data, &indices, n)
}

/// Splits rows so each node sees few classes: rows are sorted by label,
/// cut into `2n` shards, and each node receives two randomly drawn shards.
pub fn split_noniid(data: &Dataset, n: usize, seed: u64) -> Result<Vec<Dataset>> {
    if n == 0 {
        return Err(Error::Empty("node count"));
    }
    if data.len() < 2 * n {
        return Err(Error::Config(format!(
            "label-sorted split needs at least {} rows for {n} nodes, have {}",
            2 * n,
            data.len()
        )));
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.sort_by_key(|&i| (data.labels[i], i));

    let sizes = block_sizes(data.len(), 2 * n);
    let mut shards = Vec::with_capacity(2 * n);
    let mut offset = 0;
    for size in sizes {
        shards.push(&order[offset..offset + size]);
        offset += size;
    }

    let mut shard_ids: Vec<usize> = (0..2 * n).collect();
    shard_ids.shuffle(&mut rng::stream(seed, "split"));

    let mut parts = Vec::with_capacity(n);
    for i in 0..n {
        let mut indices: Vec<usize> = Vec::new();
        indices.extend_from_slice(shards[shard_ids[2 * i]]);
        indices.extend_from_slice(shards[shard_ids[2 * i + 1]]);
        parts.push(data.subset(&indices)?);
    }
    Ok(parts)
}

fn cut_into_parts(data: &Dataset, indices: &[usize], n: usize) -> Result<Vec<Dataset>> {
    let sizes = block_sizes(indices.len(), n);
    let mut parts = Vec::with_capacity(n);
    let mut offset = 0;
    for size in sizes {
        parts.push(data.subset(&indices[offset..offset + size])?);
        offset += size;
    }
    Ok(parts)
}

/// Holds out a random fraction of rows for evaluation; returns
/// (train, held_out). The fraction must leave both sides nonempty.
pub fn split_holdout(data: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(0.0..1.0).contains(&fraction) || fraction <= 0.0 {
        return Err(Error::Config(format!(
            "holdout fraction must lie strictly between 0 and 1, got {fraction}"
        )));
    }
    let held = ((data.len() as f64) * fraction).round() as usize;
    if held == 0 || held >= data.len() {
        return Err(Error::Config(format!(
            "holdout fraction {fraction} leaves an empty side for {} rows",
            data.len()
        )));
    }
    let mut indices: Vec<usize> = (0..data.len()).collect();
    indices.shuffle(&mut rng::stream(seed, "holdout"));
    let train = data.subset(&indices[held..])?;
    let test = data.subset(&indices[..held])?;
    Ok((train, test))
}

/// Synthesizes a Gaussian mixture: component means are drawn as scaled
/// unit directions, labels cycle through the components, and each row is
/// its component mean plus standard normal noise.
pub fn synth_gaussian_mixture(
    n_rows: usize,
    d: usize,
    components: usize,
    separation: f64,
    seed: u64,
) -> Result<Dataset> {
    if n_rows == 0 {
        return Err(Error::Empty("row count"));
    }
    if d == 0 {
        return Err(Error::Empty("feature dimension"));
    }
    if components == 0 {
        return Err(Error::Empty("component count"));
    }
    if !separation.is_finite() || separation < 0.0 {
        return Err(Error::Config(format!(
            "separation must be finite and non-negative, got {separation}"
        )));
    }
    let mut stream = rng::stream(seed, "mixture");
    let means: Vec<Vec<f64>> = (0..components)
        .map(|_| {
            let raw: Vec<f64> = (0..d).map(|_| stream.sample(StandardNormal)).collect();
            let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                raw
            } else {
                raw.iter().map(|v| separation * v / norm).collect()
            }
        })
        .collect();
    let mut rows = Vec::with_capacity(n_rows);
    let mut labels = Vec::with_capacity(n_rows);
    for r in 0..n_rows {
        let c = r % components;
        let values = means[c]
            .iter()
            .map(|&m| m + stream.sample::<f64, _>(StandardNormal))
            .collect();
        rows.push(DenseVector::new(values)?);
        labels.push(c);
    }
    Dataset::new(rows, labels)
}

/// Draws the per-node target vectors for the quadratic case study.
pub fn synth_case_study_targets(n: usize, d: usize, seed: u64) -> Result<Vec<DenseVector>> {
    if n == 0 {
        return Err(Error::Empty("node count"));
    }
    if d == 0 {
        return Err(Error::Empty("target dimension"));
    }
    let mut stream = rng::stream(seed, "targets");
    (0..n)
        .map(|_| DenseVector::new((0..d).map(|_| stream.sample(StandardNormal)).collect()))
        .collect()
}
