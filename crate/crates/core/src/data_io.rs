//! Datasets (LIBSVM text format and synthetic generators) and CSV output.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::rng::stream_rng;
use crate::{Error, Result};

/// Dense labelled data with binary labels in `{0, 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    dim: usize,
    features: Vec<f64>,
    labels: Vec<u8>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, dim: usize, features: Vec<f64>, labels: Vec<u8>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", "must be at least 1"));
        }
        if features.len() != labels.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: labels.len() * dim,
                got: features.len(),
            });
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("features", "must be finite"));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::invalid("labels", format!("expected 0 or 1, got {bad}")));
        }
        Ok(Self {
            name: name.into(),
            dim,
            features,
            labels,
        })
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

    pub fn features(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn subset(&self, indices: &[usize], name: impl Into<String>) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.features(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            name: name.into(),
            dim: self.dim,
            features,
            labels,
        }
    }

    /// Stratified split: within each class, a seeded shuffle puts
    /// `round(train_fraction · class size)` items in the training part.
    pub fn stratified_split(&self, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
        if !(0.0..=1.0).contains(&train_fraction) {
            return Err(Error::invalid("train_fraction", "must lie in [0, 1]"));
        }
        let mut rng = stream_rng(seed, 0);
        let mut train = Vec::new();
        let mut test = Vec::new();
        for class in [0u8, 1] {
            let mut idx: Vec<usize> = (0..self.len()).filter(|&i| self.labels[i] == class).collect();
            idx.shuffle(&mut rng);
            let cut = (train_fraction * idx.len() as f64).round() as usize;
            train.extend_from_slice(&idx[..cut]);
            test.extend_from_slice(&idx[cut..]);
        }
        train.sort_unstable();
        test.sort_unstable();
        Ok((
            self.subset(&train, format!("{}-train", self.name)),
            self.subset(&test, format!("{}-test", self.name)),
        ))
    }

    /// Affine map of every feature column onto `[-1, 1]`; constant columns map to 0.
    pub fn scaled_to_unit_box(&self) -> Dataset {
        let mut out = self.clone();
        for c in 0..self.dim {
            let col = (0..self.len()).map(|i| self.features[i * self.dim + c]);
            let (lo, hi) = col.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
            for i in 0..self.len() {
                let v = &mut out.features[i * self.dim + c];
                *v = if hi > lo { 2.0 * (*v - lo) / (hi - lo) - 1.0 } else { 0.0 };
            }
        }
        out
    }
}

/// Parses LIBSVM sparse text (`<label> <index>:<value> ...`, 1-based ascending
/// indices). Labels `-1`/`0` map to 0 and `+1` to 1; absent features are 0.
pub fn parse_libsvm<R: BufRead>(reader: R, expected_dim: Option<usize>) -> Result<Dataset> {
    let mut rows: Vec<(u8, Vec<(usize, f64)>)> = Vec::new();
    let mut max_index = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let line_no = lineno + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let perr = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a token");
        let label_val: f64 = label_tok
            .parse()
            .map_err(|_| perr(format!("non-numeric label `{label_tok}`")))?;
        let label = if label_val == 1.0 {
            1
        } else if label_val == -1.0 || label_val == 0.0 {
            0
        } else {
            return Err(perr(format!("unknown label value `{label_tok}`")));
        };
        let mut entries = Vec::new();
        let mut last = 0usize;
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| perr(format!("expected index:value, got `{tok}`")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| perr(format!("non-numeric index `{idx}`")))?;
            if idx < 1 {
                return Err(perr("feature indices are 1-based".into()));
            }
            if idx <= last {
                return Err(perr(format!("index {idx} is not ascending")));
            }
            let val: f64 = val
                .parse()
                .map_err(|_| perr(format!("non-numeric value `{val}`")))?;
            if !val.is_finite() {
                return Err(perr(format!("non-finite value `{val}`")));
            }
            last = idx;
            entries.push((idx, val));
        }
        max_index = max_index.max(last);
        rows.push((label, entries));
    }
    if rows.is_empty() {
        return Err(Error::Empty("LIBSVM input"));
    }
    let dim = match expected_dim {
        Some(d) if d < max_index => {
            return Err(Error::invalid(
                "expected_dim",
                format!("data uses feature index {max_index} > {d}"),
            ))
        }
        Some(d) => d,
        None => max_index,
    };
    let dim = dim.max(1);
    let mut features = vec![0.0; rows.len() * dim];
    let mut labels = Vec::with_capacity(rows.len());
    for (r, (label, entries)) in rows.into_iter().enumerate() {
        for (idx, val) in entries {
            features[r * dim + idx - 1] = val;
        }
        labels.push(label);
    }
    Dataset::new("libsvm", dim, features, labels)
}

pub fn load_libsvm(path: &Path, expected_dim: Option<usize>) -> Result<Dataset> {
    let file = fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut data = parse_libsvm(std::io::BufReader::new(file), expected_dim)?;
    if let Some(stem) = path.file_stem() {
        data.name = stem.to_string_lossy().into_owned();
    }
    Ok(data)
}

/// Inverse of [`parse_libsvm`]: labels written as `+1` / `-1`, zero features omitted.
pub fn to_libsvm(data: &Dataset) -> String {
    let mut out = String::new();
    for i in 0..data.len() {
        out.push_str(if data.label(i) == 1 { "+1" } else { "-1" });
        for (k, v) in data.features(i).iter().enumerate() {
            if *v != 0.0 {
                write!(out, " {}:{}", k + 1, v).expect("write to String");
            }
        }
        out.push('\n');
    }
    out
}

/// Draws `n` points from `½ N(θ0², 1) + ½ N((θ0 + θ1)², 1)`.
pub fn generate_quadratic_mixture_data(theta0: f64, theta1: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    let mut rng = stream_rng(seed, 0);
    let means = [theta0 * theta0, (theta0 + theta1) * (theta0 + theta1)];
    Ok((0..n)
        .map(|_| {
            let mean = means[usize::from(rng.random::<bool>())];
            let z: f64 = rng.sample(StandardNormal);
            mean + z
        })
        .collect())
}

/// Synthetic stand-in for the two-feature "fourclass" problem: 862 points
/// uniform on `[-1, 1]²`; class 1 occupies four disjoint discs of unequal
/// radius, so the classes are not linearly separable.
pub fn synthetic_fourclass(seed: u64) -> Dataset {
    const DISCS: [(f64, f64, f64); 4] = [
        (-0.55, 0.5, 0.3),
        (0.45, 0.55, 0.36),
        (-0.4, -0.5, 0.36),
        (0.55, -0.45, 0.3),
    ];
    let mut rng = stream_rng(seed, 0);
    let n = 862;
    let mut features = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let x: f64 = rng.random_range(-1.0..1.0);
        let y: f64 = rng.random_range(-1.0..1.0);
        let inside = DISCS
            .iter()
            .any(|&(cx, cy, r)| (x - cx).powi(2) + (y - cy).powi(2) <= r * r);
        features.extend_from_slice(&[x, y]);
        labels.push(u8::from(inside));
    }
    Dataset::new("fourclass-synthetic", 2, features, labels).expect("generated data is valid")
}

/// Renders named columns as CSV text: header row, then one row per index,
/// numbers in shortest round-trip form.
pub fn csv_string(columns: &[(&str, &[f64])]) -> Result<String> {
    let rows = columns.first().map_or(0, |(_, c)| c.len());
    if let Some((name, col)) = columns.iter().find(|(_, c)| c.len() != rows) {
        return Err(Error::invalid(
            "columns",
            format!("column `{name}` has {} rows, expected {rows}", col.len()),
        ));
    }
    let mut out = String::new();
    let header: Vec<&str> = columns.iter().map(|(n, _)| *n).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for r in 0..rows {
        for (k, (_, col)) in columns.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            write!(out, "{}", col[r]).expect("write to String");
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_csv(columns: &[(&str, &[f64])], path: &Path) -> Result<()> {
    let text = csv_string(columns)?;
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = fs::File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    w.write_all(text.as_bytes()).map_err(io_err)?;
    w.flush().map_err(io_err)
}

/// Reads a numeric CSV written by [`write_csv`] into `(header, columns)`.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(&text)
}

pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines().enumerate();
    let header: Vec<String> = match lines.next() {
        Some((_, h)) => h.split(',').map(|s| s.trim().to_owned()).collect(),
        None => return Err(Error::Empty("CSV input")),
    };
    let mut columns = vec![Vec::new(); header.len()];
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected {} fields, got {}", header.len(), fields.len()),
            });
        }
        for (col, f) in columns.iter_mut().zip(fields) {
            col.push(f.trim().parse().map_err(|_| Error::Parse {
                line: i + 1,
                message: format!("non-numeric field `{f}`"),
            })?);
        }
    }
    Ok((header, columns))
}
