//! Dataset ingestion: libsvm text files, per-agent partitioning, and a
//! synthetic sparse-hyperplane generator for desk-scale experiments.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense sample matrix plus `±1` labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Array1<f64>,
}

impl Dataset {
    /// Labels must be exactly `+1` or `-1` and features finite.
    pub fn new(features: Array2<f64>, labels: Array1<f64>) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::DimensionMismatch {
                context: "dataset rows vs labels",
                expected: features.nrows(),
                got: labels.len(),
            });
        }
        if labels.iter().any(|&b| b != 1.0 && b != -1.0) {
            return Err(Error::InvalidParameter(
                "labels must be +1 or -1".to_string(),
            ));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "features must be finite".to_string(),
            ));
        }
        Ok(Dataset { features, labels })
    }

    pub fn samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &Array1<f64> {
        &self.labels
    }

    fn take_rows(&self, rows: &[usize]) -> Dataset {
        let d = self.dim();
        let mut features = Array2::zeros((rows.len(), d));
        let mut labels = Array1::zeros(rows.len());
        for (out, &r) in rows.iter().enumerate() {
            features.row_mut(out).assign(&self.features.row(r));
            labels[out] = self.labels[r];
        }
        Dataset { features, labels }
    }
}

/// How samples are distributed across agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionScheme {
    /// Split in file order; the first `n mod m` agents get one extra row.
    /// The seed is unused.
    Contiguous,
    /// Shuffle rows with the seed, then deal them out cyclically.
    RoundRobin,
}

/// Read a sparse libsvm text file (`label idx:val idx:val ...`, 1-based
/// indices) into a dense dataset. Labels `0` and `1` are remapped to
/// `-1`/`+1`; the final dimension is the larger of `d_hint` and the
/// largest index seen.
pub fn read_libsvm(path: &Path, d_hint: Option<usize>) -> Result<Dataset> {
    let display = path.display().to_string();
    let file = File::open(path).map_err(|e| Error::Parse {
        path: display.clone(),
        line: 0,
        message: e.to_string(),
    })?;
    let reader = BufReader::new(file);

    let mut rows: Vec<(f64, Vec<(usize, f64)>)> = Vec::new();
    let mut max_index = 0usize;
    let mut remapped = 0usize;

    for (line_no, line) in reader.lines().enumerate() {
        let line_no = line_no + 1;
        let line = line.map_err(|e| Error::Parse {
            path: display.clone(),
            line: line_no,
            message: e.to_string(),
        })?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label_token = tokens.next().expect("non-empty line has a first token");
        let raw_label: f64 = label_token.parse().map_err(|_| Error::Parse {
            path: display.clone(),
            line: line_no,
            message: format!("bad label {label_token:?}"),
        })?;
        let label = if raw_label == 1.0 {
            1.0
        } else if raw_label == -1.0 {
            -1.0
        } else if raw_label == 0.0 {
            remapped += 1;
            -1.0
        } else {
            return Err(Error::Parse {
                path: display.clone(),
                line: line_no,
                message: format!("unsupported label {raw_label}; expected -1, 0, or +1"),
            });
        };
        let mut entries = Vec::new();
        for token in tokens {
            let (idx, val) = token.split_once(':').ok_or_else(|| Error::Parse {
                path: display.clone(),
                line: line_no,
                message: format!("expected idx:val, got {token:?}"),
            })?;
            let idx: usize = idx.parse().map_err(|_| Error::Parse {
                path: display.clone(),
                line: line_no,
                message: format!("bad feature index {idx:?}"),
            })?;
            if idx == 0 {
                return Err(Error::Parse {
                    path: display.clone(),
                    line: line_no,
                    message: "feature indices are 1-based".to_string(),
                });
            }
            let val: f64 = val.parse().map_err(|_| Error::Parse {
                path: display.clone(),
                line: line_no,
                message: format!("bad feature value {val:?}"),
            })?;
            max_index = max_index.max(idx);
            entries.push((idx - 1, val));
        }
        rows.push((label, entries));
    }

    if rows.is_empty() {
        return Err(Error::EmptyDataset(display));
    }
    if remapped > 0 {
        log::info!("{display}: remapped {remapped} labels 0 -> -1");
    }

    let d = max_index.max(d_hint.unwrap_or(0));
    let mut features = Array2::zeros((rows.len(), d));
    let mut labels = Array1::zeros(rows.len());
    for (r, (label, entries)) in rows.into_iter().enumerate() {
        labels[r] = label;
        for (c, v) in entries {
            features[(r, c)] = v;
        }
    }
    Dataset::new(features, labels)
}

/// Split a dataset across `m` agents as evenly as possible.
pub fn partition(
    data: &Dataset,
    m: usize,
    scheme: PartitionScheme,
    seed: u64,
) -> Result<Vec<Dataset>> {
    if m == 0 {
        return Err(Error::InvalidParameter("partition needs m >= 1".to_string()));
    }
    let n = data.samples();
    if n < m {
        return Err(Error::EmptyDataset(format!(
            "{n} samples cannot cover {m} agents"
        )));
    }
    let order: Vec<usize> = match scheme {
        PartitionScheme::Contiguous => (0..n).collect(),
        PartitionScheme::RoundRobin => {
            let mut order: Vec<usize> = (0..n).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            order.shuffle(&mut rng);
            order
        }
    };
    let mut per_agent: Vec<Vec<usize>> = vec![Vec::new(); m];
    match scheme {
        PartitionScheme::Contiguous => {
            let base = n / m;
            let extra = n % m;
            let mut next = 0usize;
            for (i, bucket) in per_agent.iter_mut().enumerate() {
                let take = base + usize::from(i < extra);
                bucket.extend_from_slice(&order[next..next + take]);
                next += take;
            }
        }
        PartitionScheme::RoundRobin => {
            for (pos, &row) in order.iter().enumerate() {
                per_agent[pos % m].push(row);
            }
        }
    }
    Ok(per_agent.iter().map(|rows| data.take_rows(rows)).collect())
}

/// Synthetic per-agent logistic data: features i.i.d. `N(0, 1/d)`, labels
/// from a sparse ground-truth hyperplane with 10% label flips.
/// Deterministic in the seed.
pub fn synth_logistic(m: usize, n_per_agent: usize, d: usize, seed: u64) -> Vec<Dataset> {
    assert!(m >= 1 && n_per_agent >= 1 && d >= 1, "sizes must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Sparse hyperplane: about one in five coordinates active.
    let support = (d / 5).max(1);
    let mut coords: Vec<usize> = (0..d).collect();
    coords.shuffle(&mut rng);
    let mut hyperplane = Array1::zeros(d);
    for &c in coords.iter().take(support) {
        hyperplane[c] = rng.sample::<f64, _>(StandardNormal);
    }

    let scale = 1.0 / (d as f64).sqrt();
    (0..m)
        .map(|_| {
            let features = Array2::from_shape_fn((n_per_agent, d), |_| {
                scale * rng.sample::<f64, _>(StandardNormal)
            });
            let labels = Array1::from_shape_fn(n_per_agent, |i| {
                let margin = features.row(i).dot(&hyperplane);
                let clean = if margin >= 0.0 { 1.0 } else { -1.0 };
                if rng.random_bool(0.1) {
                    -clean
                } else {
                    clean
                }
            });
            Dataset::new(features, labels).expect("generated data is valid")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(contents: &str) -> std::path::PathBuf {
        let mut path = std::env::temp_dir();
        let unique = format!(
            "odapg-libsvm-{}-{}.txt",
            std::process::id(),
            contents.len()
        );
        path.push(unique);
        let mut f = File::create(&path).unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        path
    }

    #[test]
    fn parses_basic_lines() {
        let path = write_temp("+1 1:0.5 3:2\n0 1:1\n");
        let data = read_libsvm(&path, Some(3)).unwrap();
        assert_eq!(data.samples(), 2);
        assert_eq!(data.dim(), 3);
        assert_eq!(data.features().row(0).to_vec(), vec![0.5, 0.0, 2.0]);
        assert_eq!(data.labels()[0], 1.0);
        // 0 labels remap to -1.
        assert_eq!(data.labels()[1], -1.0);
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn dimension_grows_past_hint() {
        let path = write_temp("-1 5:1.5\n");
        let data = read_libsvm(&path, Some(2)).unwrap();
        assert_eq!(data.dim(), 5);
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn reports_parse_errors_with_line_numbers() {
        let path = write_temp("+1 1:0.5\n+1 broken\n");
        match read_libsvm(&path, None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn rejects_unsupported_labels_and_empty_files() {
        let path = write_temp("3 1:1\n");
        assert!(matches!(read_libsvm(&path, None), Err(Error::Parse { .. })));
        std::fs::remove_file(path).ok();

        let path = write_temp("\n\n");
        assert!(matches!(
            read_libsvm(&path, None),
            Err(Error::EmptyDataset(_))
        ));
        std::fs::remove_file(path).ok();
    }

    fn toy_dataset(n: usize) -> Dataset {
        let features = Array2::from_shape_fn((n, 2), |(i, j)| (i * 2 + j) as f64);
        let labels = Array1::from_shape_fn(n, |i| if i % 2 == 0 { 1.0 } else { -1.0 });
        Dataset::new(features, labels).unwrap()
    }

    #[test]
    fn contiguous_partition_sizes() {
        let data = toy_dataset(10);
        let parts = partition(&data, 3, PartitionScheme::Contiguous, 0).unwrap();
        let sizes: Vec<usize> = parts.iter().map(|p| p.samples()).collect();
        assert_eq!(sizes, vec![4, 3, 3]);
        // File order is preserved.
        assert_eq!(parts[0].features().row(0).to_vec(), vec![0.0, 1.0]);
        assert_eq!(parts[1].features().row(0).to_vec(), vec![8.0, 9.0]);
    }

    #[test]
    fn round_robin_partition_covers_all_rows() {
        let data = toy_dataset(11);
        let parts = partition(&data, 4, PartitionScheme::RoundRobin, 9).unwrap();
        let total: usize = parts.iter().map(|p| p.samples()).sum();
        assert_eq!(total, 11);
        let same = partition(&data, 4, PartitionScheme::RoundRobin, 9).unwrap();
        assert_eq!(parts, same);
        let other = partition(&data, 4, PartitionScheme::RoundRobin, 10).unwrap();
        assert_ne!(parts, other);
    }

    #[test]
    fn partition_rejects_too_few_samples() {
        let data = toy_dataset(2);
        assert!(matches!(
            partition(&data, 5, PartitionScheme::Contiguous, 0),
            Err(Error::EmptyDataset(_))
        ));
    }

    #[test]
    fn synth_is_deterministic_and_labeled() {
        let a = synth_logistic(2, 3, 4, 1);
        let b = synth_logistic(2, 3, 4, 1);
        assert_eq!(a, b);
        for part in &a {
            assert_eq!(part.samples(), 3);
            assert_eq!(part.dim(), 4);
            for &l in part.labels() {
                assert!(l == 1.0 || l == -1.0);
            }
        }
        let c = synth_logistic(2, 3, 4, 2);
        assert_ne!(a, c);
    }
}
