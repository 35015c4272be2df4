//! Checks against the committed benchmark datasets.

use std::path::PathBuf;

use isle::dataset::Dataset;
use isle::ensemble::{fit_f0, Loss};

fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../data/{name}"))
}

#[test]
fn boston_loads_with_expected_shape() {
    let data = Dataset::load_csv(data_path("boston.csv"), "medv", true).unwrap();
    assert_eq!(data.n_rows(), 506);
    assert_eq!(data.n_features(), 13);
    assert_eq!(data.response_name(), "medv");
    assert_eq!(data.feature_names()[0], "crim");
    assert_eq!(data.feature_names()[12], "lstat");
}

#[test]
fn diabetes_loads_with_expected_shape() {
    let data = Dataset::load_csv(data_path("diabetes.csv"), "y", true).unwrap();
    assert_eq!(data.n_rows(), 442);
    assert_eq!(data.n_features(), 10);
    assert_eq!(data.feature_names()[0], "age");
}

#[test]
fn constant_fit_matches_independent_mean_on_diabetes() {
    let data = Dataset::load_csv(data_path("diabetes.csv"), "y", true).unwrap();
    let f0 = fit_f0(data.response(), Loss::SquaredError).unwrap();
    let mut total = 0.0;
    for v in data.response() {
        total += v;
    }
    let oracle = total / data.n_rows() as f64;
    assert!((f0 - oracle).abs() <= 1e-12 * oracle.abs());
}
