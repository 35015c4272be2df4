//! Tabular regression data: ingestion, splitting, and fold generation.

use std::path::Path;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// An immutable feature matrix plus response vector.
///
/// All entries are finite; the row count of `features` equals the response
/// length. Construction validates both, so downstream fitting code never
/// re-checks.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>, // row-major, n_rows * n_features
    response: Vec<f64>,
    feature_names: Vec<String>,
    response_name: String,
    n_rows: usize,
    n_features: usize,
}

impl Dataset {
    pub fn new(
        features: Vec<f64>,
        n_features: usize,
        response: Vec<f64>,
        feature_names: Vec<String>,
        response_name: String,
    ) -> Result<Self> {
        if n_features == 0 {
            return Err(Error::invalid_data("need at least one feature"));
        }
        if features.len() % n_features != 0 {
            return Err(Error::invalid_data(
                "feature buffer length is not a multiple of the feature count",
            ));
        }
        let n_rows = features.len() / n_features;
        if n_rows < 2 {
            return Err(Error::invalid_data("need at least two rows"));
        }
        if response.len() != n_rows {
            return Err(Error::invalid_data(format!(
                "response length {} does not match row count {}",
                response.len(),
                n_rows
            )));
        }
        if feature_names.len() != n_features {
            return Err(Error::invalid_data("feature name count mismatch"));
        }
        if let Some(v) = features.iter().chain(response.iter()).find(|v| !v.is_finite()) {
            return Err(Error::invalid_data(format!("non-finite value {v} in dataset")));
        }
        Ok(Dataset {
            features,
            response,
            feature_names,
            response_name,
            n_rows,
            n_features,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn response_name(&self) -> &str {
        &self.response_name
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn value(&self, row: usize, feature: usize) -> f64 {
        self.features[row * self.n_features + feature]
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    /// Response values at `indices`, in order.
    pub fn gather_response(&self, indices: &[usize]) -> Vec<f64> {
        indices.iter().map(|&i| self.response[i]).collect()
    }

    /// A new dataset containing `indices` rows, in order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        Dataset {
            features,
            response: self.gather_response(indices),
            feature_names: self.feature_names.clone(),
            response_name: self.response_name.clone(),
            n_rows: indices.len(),
            n_features: self.n_features,
        }
    }

    /// Replace the response vector (used by residual fitting and tests).
    pub fn with_response(&self, response: Vec<f64>) -> Result<Dataset> {
        Dataset::new(
            self.features.clone(),
            self.n_features,
            response,
            self.feature_names.clone(),
            self.response_name.clone(),
        )
    }

    /// Load a dataset from an RFC-4180-style CSV file.
    ///
    /// `target_column` names the response column when `header` is true; with
    /// no header row it is the 0-based column index. The target column is
    /// removed from the features and stored as the response. Cells must all
    /// parse as finite reals; the first offending cell is reported by row and
    /// column.
    pub fn load_csv(path: impl AsRef<Path>, target_column: &str, header: bool) -> Result<Dataset> {
        let path = path.as_ref();
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(header)
            .flexible(false)
            .from_path(path)?;

        let column_names: Vec<String> = if header {
            reader
                .headers()?
                .iter()
                .map(|h| h.trim().to_string())
                .collect()
        } else {
            Vec::new()
        };

        let mut records: Vec<csv::StringRecord> = Vec::new();
        for rec in reader.records() {
            records.push(rec?);
        }
        if records.len() < 2 {
            return Err(Error::invalid_data(format!(
                "{}: need at least 2 data rows, found {}",
                path.display(),
                records.len()
            )));
        }
        let n_cols = records[0].len();
        let column_names = if header {
            column_names
        } else {
            (0..n_cols).map(|j| j.to_string()).collect()
        };

        let target_idx = column_names
            .iter()
            .position(|c| c == target_column)
            .ok_or_else(|| {
                Error::invalid_data(format!(
                    "target column {target_column:?} not found among {column_names:?}"
                ))
            })?;
        if n_cols < 2 {
            return Err(Error::invalid_data("need at least one feature column"));
        }

        let n_features = n_cols - 1;
        let mut features = Vec::with_capacity(records.len() * n_features);
        let mut response = Vec::with_capacity(records.len());
        for (r, rec) in records.iter().enumerate() {
            if rec.len() != n_cols {
                return Err(Error::invalid_data(format!(
                    "row {}: expected {} fields, found {}",
                    r + 1,
                    n_cols,
                    rec.len()
                )));
            }
            for (c, cell) in rec.iter().enumerate() {
                let parsed: f64 = cell.trim().parse().map_err(|_| Error::InvalidCell {
                    row: r + 1,
                    column: column_names[c].clone(),
                    value: cell.to_string(),
                })?;
                if !parsed.is_finite() {
                    return Err(Error::InvalidCell {
                        row: r + 1,
                        column: column_names[c].clone(),
                        value: cell.to_string(),
                    });
                }
                if c == target_idx {
                    response.push(parsed);
                } else {
                    features.push(parsed);
                }
            }
        }

        let feature_names: Vec<String> = column_names
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != target_idx)
            .map(|(_, n)| n.clone())
            .collect();
        Dataset::new(
            features,
            n_features,
            response,
            feature_names,
            column_names[target_idx].clone(),
        )
    }

    /// Write the dataset as CSV with a header row.
    ///
    /// Values are printed with 17 significant digits so `load_csv` recovers
    /// them bit-exactly.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut writer = csv::Writer::from_path(path.as_ref())?;
        let mut head: Vec<&str> = self.feature_names.iter().map(|s| s.as_str()).collect();
        head.push(&self.response_name);
        writer.write_record(&head)?;
        for i in 0..self.n_rows {
            let mut rec: Vec<String> = self.row(i).iter().map(|v| format!("{v:.16e}")).collect();
            rec.push(format!("{:.16e}", self.response[i]));
            writer.write_record(&rec)?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Disjoint train/test row indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Three disjoint parts in ratio 2:1:1 covering all rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreeWaySplit {
    pub z1: Vec<usize>,
    pub z2: Vec<usize>,
    pub z3: Vec<usize>,
}

/// Uniformly random train/test partition with `|test| = round(n * test_fraction)`.
pub fn shuffle_split(n: usize, test_fraction: f64, rng: &mut ChaCha8Rng) -> Result<SplitIndices> {
    if !(0.0..1.0).contains(&test_fraction) || test_fraction == 0.0 {
        return Err(Error::invalid_param(format!(
            "test_fraction must lie in (0,1), got {test_fraction}"
        )));
    }
    if n < 2 {
        return Err(Error::invalid_param("need n >= 2 to split"));
    }
    let n_test = (n as f64 * test_fraction).round() as usize;
    if n_test == 0 || n - n_test < 2 {
        return Err(Error::invalid_param(format!(
            "degenerate split: n={n}, test={n_test}"
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let test = perm[..n_test].to_vec();
    let train = perm[n_test..].to_vec();
    Ok(SplitIndices { train, test })
}

/// `k` cross-validation folds whose test parts partition `0..n`.
///
/// Fold sizes differ by at most one; each fold's train part is the
/// complement of its test part.
pub fn kfold_indices(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Result<Vec<SplitIndices>> {
    if k < 2 || k > n {
        return Err(Error::invalid_param(format!(
            "fold count {k} out of range for n={n}"
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        let test = perm[start..start + size].to_vec();
        let mut train = Vec::with_capacity(n - size);
        train.extend_from_slice(&perm[..start]);
        train.extend_from_slice(&perm[start + size..]);
        folds.push(SplitIndices { train, test });
        start += size;
    }
    Ok(folds)
}

/// Random permutation cut into parts of size `ceil(n/2)`, `ceil((n - |z1|)/2)`,
/// and the remainder (the 2:1:1 rule, rounding in favor of z1 then z2).
pub fn three_way_split(n: usize, rng: &mut ChaCha8Rng) -> Result<ThreeWaySplit> {
    let n1 = n.div_ceil(2);
    let n2 = (n - n1).div_ceil(2);
    let n3 = n - n1 - n2;
    if n1 < 2 || n2 < 2 || n3 < 2 {
        return Err(Error::invalid_param(format!(
            "n={n} is too small for a 2:1:1 split with at least 2 rows per part"
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    Ok(ThreeWaySplit {
        z1: perm[..n1].to_vec(),
        z2: perm[n1..n1 + n2].to_vec(),
        z3: perm[n1 + n2..].to_vec(),
    })
}

/// Friedman's first synthetic regression benchmark.
///
/// Ten uniform features on [0,1]; the mean function uses the first five,
/// plus Gaussian noise with standard deviation `noise_sd`. Used by tests and
/// benches that need a nonlinear target with known structure.
pub fn friedman1(n: usize, noise_sd: f64, seed: u64) -> Dataset {
    use rand::Rng;
    let mut rng = crate::rng::rng_from_seed(seed);
    let p = 10;
    let mut features = Vec::with_capacity(n * p);
    let mut response = Vec::with_capacity(n);
    for _ in 0..n {
        let x: Vec<f64> = (0..p).map(|_| rng.random::<f64>()).collect();
        let mean = 10.0 * (std::f64::consts::PI * x[0] * x[1]).sin()
            + 20.0 * (x[2] - 0.5).powi(2)
            + 10.0 * x[3]
            + 5.0 * x[4];
        // Box-Muller from two uniforms keeps the generator stack small here.
        let (u1, u2): (f64, f64) = (rng.random(), rng.random());
        let z = (-2.0 * u1.max(f64::MIN_POSITIVE).ln()).sqrt()
            * (2.0 * std::f64::consts::PI * u2).cos();
        features.extend_from_slice(&x);
        response.push(mean + noise_sd * z);
    }
    let names = (0..p).map(|j| format!("x{j}")).collect();
    Dataset::new(features, p, response, names, "y".to_string()).expect("synthetic data is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn load_small_csv() {
        let f = write_temp("a,b,y\n1,2,3\n4,5,6\n7,8,9\n0,1,2\n");
        let ds = Dataset::load_csv(f.path(), "y", true).unwrap();
        assert_eq!(ds.n_rows(), 4);
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.response(), &[3.0, 6.0, 9.0, 2.0]);
        assert_eq!(ds.row(1), &[4.0, 5.0]);
        assert_eq!(ds.feature_names(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn load_rejects_na_cell_with_location() {
        let f = write_temp("a,b,y\n1,2,3\n4,NA,6\n");
        let err = Dataset::load_csv(f.path(), "y", true).unwrap_err();
        match err {
            Error::InvalidCell { row, column, value } => {
                assert_eq!(row, 2);
                assert_eq!(column, "b");
                assert_eq!(value, "NA");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn load_rejects_missing_target() {
        let f = write_temp("a,b\n1,2\n3,4\n");
        assert!(matches!(
            Dataset::load_csv(f.path(), "y", true),
            Err(Error::InvalidData(_))
        ));
    }

    #[test]
    fn load_rejects_single_row() {
        let f = write_temp("a,y\n1,2\n");
        assert!(Dataset::load_csv(f.path(), "y", true).is_err());
    }

    #[test]
    fn load_without_header_uses_column_indices() {
        let f = write_temp("1,2,3\n4,5,6\n");
        let ds = Dataset::load_csv(f.path(), "2", false).unwrap();
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.response(), &[3.0, 6.0]);
    }

    #[test]
    fn save_load_round_trips_bit_exactly() {
        let ds = friedman1(23, 1.0, 7);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.csv");
        ds.save_csv(&path).unwrap();
        let back = Dataset::load_csv(&path, "y", true).unwrap();
        assert_eq!(ds, back);
    }

    #[test]
    fn shuffle_split_sizes_and_determinism() {
        let mut rng = rng_from_seed(5);
        let s = shuffle_split(10, 0.2, &mut rng).unwrap();
        assert_eq!(s.test.len(), 2);
        assert_eq!(s.train.len(), 8);
        let s2 = shuffle_split(10, 0.2, &mut rng_from_seed(5)).unwrap();
        assert_eq!(s, s2);
        let s3 = shuffle_split(100, 0.25, &mut rng_from_seed(1)).unwrap();
        assert_eq!(s3.test.len(), 25);
    }

    #[test]
    fn shuffle_split_rejects_degenerate() {
        assert!(shuffle_split(2, 0.4, &mut rng_from_seed(0)).is_err());
        assert!(shuffle_split(10, 0.0, &mut rng_from_seed(0)).is_err());
    }

    #[test]
    fn kfold_partitions_exactly() {
        let folds = kfold_indices(10, 5, &mut rng_from_seed(3)).unwrap();
        let mut seen: Vec<usize> = folds.iter().flat_map(|f| f.test.clone()).collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..10).collect::<Vec<_>>());
        for f in &folds {
            assert_eq!(f.test.len(), 2);
            assert_eq!(f.train.len(), 8);
        }
    }

    #[test]
    fn kfold_uneven_sizes() {
        let folds = kfold_indices(7, 5, &mut rng_from_seed(3)).unwrap();
        let mut sizes: Vec<usize> = folds.iter().map(|f| f.test.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 1, 1, 2, 2]);
    }

    #[test]
    fn kfold_leave_one_out() {
        let folds = kfold_indices(5, 5, &mut rng_from_seed(9)).unwrap();
        assert!(folds.iter().all(|f| f.test.len() == 1));
    }

    #[test]
    fn three_way_sizes() {
        let s = three_way_split(8, &mut rng_from_seed(1)).unwrap();
        assert_eq!((s.z1.len(), s.z2.len(), s.z3.len()), (4, 2, 2));
        let s = three_way_split(9, &mut rng_from_seed(1)).unwrap();
        assert_eq!((s.z1.len(), s.z2.len(), s.z3.len()), (5, 2, 2));
        let s = three_way_split(442, &mut rng_from_seed(1)).unwrap();
        assert_eq!((s.z1.len(), s.z2.len(), s.z3.len()), (221, 111, 110));
        assert!(three_way_split(7, &mut rng_from_seed(1)).is_err());
    }
}
