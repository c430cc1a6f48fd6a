//! Labelled binary-classification data in dense, features-as-columns layout.
//!
//! A [`Dataset`] stores the data matrix `X` with shape `n x q` (one column per
//! sample) and labels in `{-1, +1}`. Data is read from the LIBSVM text format:
//!
//! ```text
//! +1 1:0.5 3:-2.0
//! -1 2:1.0
//! ```
//!
//! Indices are 1-based and must be strictly increasing within a line. Missing
//! features are zero. Labels `0` are read as `-1`, so files using `{0, 1}`
//! labels load unchanged.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::projection::Projection;

/// Dense binary-classification dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: DMatrix<f64>,
    labels: DVector<f64>,
}

impl Dataset {
    /// Builds a dataset from an `n x q` feature matrix and `q` labels.
    pub fn new(features: DMatrix<f64>, labels: DVector<f64>) -> Result<Self> {
        if features.nrows() == 0 || features.ncols() == 0 {
            return Err(Error::Shape(format!(
                "dataset needs n >= 1 and q >= 1, got {}x{}",
                features.nrows(),
                features.ncols()
            )));
        }
        if labels.len() != features.ncols() {
            return Err(Error::Shape(format!(
                "{} labels for {} samples",
                labels.len(),
                features.ncols()
            )));
        }
        if let Some(i) = labels.iter().position(|&y| y != 1.0 && y != -1.0) {
            return Err(Error::Label {
                line: i + 1,
                label: labels[i],
            });
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("feature matrix contains NaN or Inf".into()));
        }
        Ok(Self { features, labels })
    }

    /// Feature dimension `n`.
    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    /// Number of samples `q`.
    pub fn q(&self) -> usize {
        self.features.ncols()
    }

    /// The `n x q` data matrix; column `i` is sample `i`.
    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn labels(&self) -> &DVector<f64> {
        &self.labels
    }
}

/// Parses LIBSVM text.
///
/// `n_features` forces the feature dimension, which lets files whose trailing
/// features never appear align with a larger model. It must be at least the
/// largest index present.
pub fn parse_libsvm(text: &str, n_features: Option<usize>) -> Result<Dataset> {
    let mut samples: Vec<(f64, Vec<(usize, f64)>)> = Vec::new();
    let mut max_index = 0usize;

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a token");
        let label: f64 = label_tok.parse().map_err(|e| Error::Parse {
            line: line_no,
            token: label_tok.to_string(),
            reason: format!("{e}"),
        })?;
        let label = if label == 1.0 {
            1.0
        } else if label == -1.0 || label == 0.0 {
            -1.0
        } else {
            return Err(Error::Label {
                line: line_no,
                label,
            });
        };

        let mut entries = Vec::new();
        let mut last = 0usize;
        for tok in tokens {
            let (idx_str, val_str) = tok.split_once(':').ok_or_else(|| Error::Parse {
                line: line_no,
                token: tok.to_string(),
                reason: "expected `index:value`".into(),
            })?;
            let idx: usize = idx_str.parse().map_err(|e| Error::Parse {
                line: line_no,
                token: tok.to_string(),
                reason: format!("bad index: {e}"),
            })?;
            let val: f64 = val_str.parse().map_err(|e| Error::Parse {
                line: line_no,
                token: tok.to_string(),
                reason: format!("bad value: {e}"),
            })?;
            if idx == 0 {
                return Err(Error::Format {
                    line: line_no,
                    reason: "feature indices are 1-based".into(),
                });
            }
            if idx <= last {
                return Err(Error::Format {
                    line: line_no,
                    reason: format!("index {idx} does not increase past {last}"),
                });
            }
            if !val.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    token: tok.to_string(),
                    reason: "value is not finite".into(),
                });
            }
            last = idx;
            entries.push((idx, val));
        }
        max_index = max_index.max(last);
        samples.push((label, entries));
    }

    if samples.is_empty() {
        return Err(Error::Format {
            line: 0,
            reason: "no samples found".into(),
        });
    }
    let n = match n_features {
        Some(n) if n < max_index => {
            return Err(Error::Format {
                line: 0,
                reason: format!("feature index {max_index} exceeds forced dimension {n}"),
            })
        }
        Some(0) => {
            return Err(Error::Format {
                line: 0,
                reason: "forced feature dimension must be positive".into(),
            })
        }
        Some(n) => n,
        // A file with no feature tokens at all still gets one (zero) feature.
        None => max_index.max(1),
    };

    let q = samples.len();
    let mut features = DMatrix::zeros(n, q);
    let mut labels = DVector::zeros(q);
    for (i, (label, entries)) in samples.into_iter().enumerate() {
        labels[i] = label;
        for (idx, val) in entries {
            features[(idx - 1, i)] = val;
        }
    }
    Dataset::new(features, labels)
}

/// Reads and parses a LIBSVM file.
pub fn read_libsvm(path: impl AsRef<Path>, n_features: Option<usize>) -> Result<Dataset> {
    let text = fs::read_to_string(path)?;
    parse_libsvm(&text, n_features)
}

/// Writes a dataset in LIBSVM format with 17 significant digits per value.
///
/// Zero entries are omitted, so trailing all-zero features are only recovered
/// by passing the dimension back to [`parse_libsvm`].
pub fn serialize_libsvm(d: &Dataset) -> String {
    let mut out = String::new();
    for (i, col) in d.features.column_iter().enumerate() {
        out.push_str(if d.labels[i] > 0.0 { "+1" } else { "-1" });
        for (j, &v) in col.iter().enumerate() {
            if v != 0.0 {
                let _ = write!(out, " {}:{:.16e}", j + 1, v);
            }
        }
        out.push('\n');
    }
    out
}

/// Maps every sample through the projection: returns the dataset with features
/// `S X` (shape `t x q`) and the same labels.
pub fn reduce_features(d: &Dataset, s: &Projection) -> Result<Dataset> {
    let m = s.matrix();
    if m.ncols() != d.n() {
        return Err(Error::Shape(format!(
            "projection is {}x{} but dataset has n = {}",
            m.nrows(),
            m.ncols(),
            d.n()
        )));
    }
    Ok(Dataset {
        features: m * &d.features,
        labels: d.labels.clone(),
    })
}
