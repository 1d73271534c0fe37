use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::vector::norm;

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// Labelled binary-classification data with a known bound on row norms.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Vec<f64>,
    labels: Vec<f64>,
    dim: usize,
    radius: f64,
}

impl Dataset {
    /// `points` is row-major `n × dim`; labels must be ±1 and every row norm
    /// must be at most `radius`.
    pub fn new(points: Vec<f64>, labels: Vec<f64>, dim: usize, radius: f64) -> Result<Self> {
        if dim == 0 || labels.is_empty() {
            return Err(Error::InvalidInput("dataset must be non-empty".into()));
        }
        if points.len() != labels.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: labels.len() * dim,
                found: points.len(),
            });
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidInput(format!("radius must be positive, got {radius}")));
        }
        crate::vector::check_finite(&points, "dataset points")?;
        if let Some(i) = labels.iter().position(|y| y.abs() != 1.0) {
            return Err(Error::InvalidInput(format!("label {i} is {}, expected ±1", labels[i])));
        }
        let data = Dataset {
            points,
            labels,
            dim,
            radius,
        };
        if let Some(i) = (0..data.len()).find(|&i| norm(data.point(i)) > radius) {
            return Err(Error::InvalidInput(format!("row {i} exceeds radius {radius}")));
        }
        Ok(data)
    }

    /// Build from unbounded rows by dividing every row by `max_norm / radius`.
    pub fn rescaled(points: Vec<f64>, labels: Vec<f64>, dim: usize, radius: f64) -> Result<Self> {
        let mut points = points;
        if dim > 0 {
            let max_norm = points.chunks(dim).map(norm).fold(0.0, f64::max);
            if max_norm > 0.0 && max_norm.is_finite() {
                let mut scale = radius / max_norm;
                // Rounding can leave the largest row a hair above the radius.
                while points.chunks(dim).any(|r| {
                    let scaled: Vec<f64> = r.iter().map(|v| v * scale).collect();
                    norm(&scaled) > radius
                }) {
                    scale *= 1.0 - 2.0 * f64::EPSILON;
                }
                points.iter_mut().for_each(|v| *v *= scale);
            }
        }
        Dataset::new(points, labels, dim, radius)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> f64 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn max_row_norm(&self) -> f64 {
        self.points.chunks(self.dim).map(norm).fold(0.0, f64::max)
    }
}

/// Two Gaussian blobs centred at `±(margin/2)·e₁`, labels alternating
/// `+1, −1, …`, rescaled so the largest row has norm `radius`.
pub fn gen_synthetic_dataset(
    n: usize,
    d: usize,
    radius: f64,
    margin: f64,
    rng: &mut RngStream,
) -> Result<Dataset> {
    if n < 2 || d == 0 {
        return Err(Error::InvalidInput(format!("need n >= 2 and d >= 1, got n={n}, d={d}")));
    }
    if !(radius > 0.0 && radius.is_finite()) || !(margin >= 0.0 && margin.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "need radius > 0 and margin >= 0, got radius={radius}, margin={margin}"
        )));
    }
    let mut points = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let y = if i % 2 == 0 { 1.0 } else { -1.0 };
        for j in 0..d {
            let centre = if j == 0 { 0.5 * margin * y } else { 0.0 };
            points.push(centre + rng.standard_normal());
        }
        labels.push(y);
    }
    Dataset::rescaled(points, labels, d, radius)
}

fn read_u32_be(bytes: &[u8], offset: usize, what: &str) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Format(format!("{what}: truncated header")))
}

/// Parse an IDX image file; returns `(count, rows·cols, pixels)`.
pub fn read_idx_images(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let magic = read_u32_be(bytes, 0, "images")?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::Format(format!(
            "images: bad magic number {magic:#010x}, expected {IDX_IMAGES_MAGIC:#010x}"
        )));
    }
    let n = read_u32_be(bytes, 4, "images")? as usize;
    let rows = read_u32_be(bytes, 8, "images")? as usize;
    let cols = read_u32_be(bytes, 12, "images")? as usize;
    let len = n * rows * cols;
    let body = &bytes[16..];
    if body.len() < len {
        return Err(Error::Format(format!(
            "images: truncated file, header promises {len} bytes but {} remain",
            body.len()
        )));
    }
    Ok((n, rows * cols, body[..len].to_vec()))
}

pub fn read_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let magic = read_u32_be(bytes, 0, "labels")?;
    if magic != IDX_LABELS_MAGIC {
        return Err(Error::Format(format!(
            "labels: bad magic number {magic:#010x}, expected {IDX_LABELS_MAGIC:#010x}"
        )));
    }
    let n = read_u32_be(bytes, 4, "labels")? as usize;
    let body = &bytes[8..];
    if body.len() < n {
        return Err(Error::Format(format!(
            "labels: truncated file, header promises {n} labels but {} remain",
            body.len()
        )));
    }
    Ok(body[..n].to_vec())
}

/// Load the two chosen digits from a pair of IDX files as a ±1 dataset
/// (`digit_a` → +1). Pixels are scaled by 1/255 and then globally rescaled to
/// the radius.
pub fn load_idx_dataset(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
    digit_a: u8,
    digit_b: u8,
    radius: f64,
) -> Result<Dataset> {
    if digit_a == digit_b {
        return Err(Error::InvalidInput(format!("digits must differ, both are {digit_a}")));
    }
    let (n, pixels, data) = read_idx_images(&fs::read(images_path)?)?;
    let labels = read_idx_labels(&fs::read(labels_path)?)?;
    if labels.len() != n {
        return Err(Error::Format(format!(
            "count mismatch: {n} images but {} labels",
            labels.len()
        )));
    }
    if pixels == 0 {
        return Err(Error::Format("images have zero pixels".into()));
    }
    let mut points = Vec::new();
    let mut ys = Vec::new();
    for (i, &label) in labels.iter().enumerate() {
        let y = if label == digit_a {
            1.0
        } else if label == digit_b {
            -1.0
        } else {
            continue;
        };
        points.extend(data[i * pixels..(i + 1) * pixels].iter().map(|&p| p as f64 / 255.0));
        ys.push(y);
    }
    for (digit, y) in [(digit_a, 1.0), (digit_b, -1.0)] {
        if !ys.contains(&y) {
            return Err(Error::InvalidInput(format!("no samples of digit {digit}")));
        }
    }
    Dataset::rescaled(points, ys, pixels, radius)
}
