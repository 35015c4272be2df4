//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with its measured values (visible with `--nocapture`).
//!
//! Run with `cargo test -p isle-cli --test acceptance`.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use isle::arm::{arm_weights, ArmConfig, CandidateModel};
use isle::bench::{run_bench_on, BenchConfig, ModelLabel, OverrideMap};
use isle::dataset::{friedman1, Dataset};
use isle::ensemble::{generate_ensemble, Basis, EnsembleMode, EnsembleParams, Loss};
use isle::postprocess::{
    coordinate_descent, lambda_path, standardize_basis, PenaltyKind, PenaltySpec, Standardization,
};
use isle::rng::rng_from_seed;
use isle::tree::{fit_tree, TreeParams};
use isle::Predictor;
use rand::Rng;

fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../data/{name}"))
}

fn boston() -> Dataset {
    Dataset::load_csv(data_path("boston.csv"), "medv", true).unwrap()
}

fn diabetes() -> Dataset {
    Dataset::load_csv(data_path("diabetes.csv"), "y", true).unwrap()
}

fn bench_config(data: &str, target: &str, roster: Vec<ModelLabel>, timing: bool) -> BenchConfig {
    BenchConfig {
        data: data_path(data),
        target: target.to_string(),
        header: true,
        test_fraction: 0.25,
        n_repeats: 10,
        seed: 0,
        roster,
        overrides: OverrideMap::new(),
        timing,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn random_instance(seed: u64) -> (Basis, Standardization, Vec<f64>) {
    let mut rng = rng_from_seed(seed);
    let n = rng.random_range(10..=40usize);
    let m = rng.random_range(2..=10usize);
    let cols: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect())
        .collect();
    let y: Vec<f64> = (0..n)
        .map(|i| {
            let signal: f64 = cols.iter().take(3).map(|c| c[i]).sum();
            signal + rng.random::<f64>() - 0.5
        })
        .collect();
    let (basis, std) = standardize_basis(&Basis::from_columns(cols));
    (basis, std, y)
}

/// Gaussian elimination with partial pivoting (independent ridge oracle).
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Criterion 1: on 50 random instances the lasso solution satisfies the
/// stationarity conditions within 10*tol; a pure quadratic penalty matches
/// the ridge closed form within 1e-6; alpha = 0 matches the lasso within
/// 1e-8. Runtime under 10 s.
#[test]
fn c1_solver_correctness() {
    let start = Instant::now();
    let tol = 1e-7;
    for seed in 0..50u64 {
        let (basis, std, y) = random_instance(1000 + seed);
        let n = basis.n_rows();
        let m = basis.n_cols();
        let path = lambda_path(&basis, &std, &y, 0.0, None, 10, 1e-3).unwrap();
        let lambda = path[(seed as usize) % 8 + 1]; // vary the penalty level

        let lasso = coordinate_descent(
            &basis,
            &std,
            &y,
            &PenaltySpec::plain(PenaltyKind::Lasso, lambda, 0.0),
            None,
            tol,
            10_000,
        )
        .unwrap();
        assert!(lasso.converged, "instance {seed} did not converge");

        // independent stationarity check from the reported fit
        let beta = lasso.standardized_coefficients();
        let b0 = lasso.standardized_intercept();
        let r: Vec<f64> = (0..n)
            .map(|i| y[i] - b0 - (0..m).map(|k| beta[k] * basis.value(i, k)).sum::<f64>())
            .collect();
        for k in 0..m {
            let g = 2.0 * dot(basis.column(k), &r);
            if beta[k] == 0.0 {
                assert!(
                    g.abs() <= lambda + 10.0 * tol,
                    "instance {seed}: zero-coordinate violation {:+e}",
                    g.abs() - lambda
                );
            } else {
                assert!(
                    (g - lambda * beta[k].signum()).abs() <= 10.0 * tol,
                    "instance {seed}: active-coordinate violation {:+e}",
                    (g - lambda * beta[k].signum()).abs()
                );
            }
        }

        // alpha = 1 (pure quadratic) against the ridge closed form
        let ridge_lambda = 2.0 + (seed as f64) / 10.0;
        let ridge = coordinate_descent(
            &basis,
            &std,
            &y,
            &PenaltySpec::plain(PenaltyKind::ElasticNet, ridge_lambda, 1.0),
            None,
            1e-9,
            50_000,
        )
        .unwrap();
        let beta_ridge = ridge.standardized_coefficients();
        let y_mean = y.iter().sum::<f64>() / n as f64;
        let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
        let mut gram = vec![vec![0.0; m]; m];
        let mut rhs = vec![0.0; m];
        for i in 0..m {
            for j in 0..m {
                gram[i][j] = dot(basis.column(i), basis.column(j));
            }
            gram[i][i] += ridge_lambda;
            rhs[i] = dot(basis.column(i), &yc);
        }
        let closed_form = solve_linear(gram, rhs);
        for k in 0..m {
            assert!(
                (beta_ridge[k] - closed_form[k]).abs() <= 1e-6,
                "instance {seed}: ridge mismatch at {k}"
            );
        }

        // alpha = 0 elastic net equals the lasso
        let enet0 = coordinate_descent(
            &basis,
            &std,
            &y,
            &PenaltySpec::plain(PenaltyKind::ElasticNet, lambda, 0.0),
            None,
            tol,
            10_000,
        )
        .unwrap();
        for (a, b) in enet0.coefficients.iter().zip(lasso.coefficients.iter()) {
            assert!((a - b).abs() <= 1e-8, "instance {seed}: alpha=0 mismatch");
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    println!("criterion 1 (solver correctness): PASS in {elapsed:?}");
}

// exhaustive greedy oracle for small trees
enum OracleNode {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: Box<OracleNode>,
        right: Box<OracleNode>,
    },
}

impl OracleNode {
    fn predict(&self, x: &[f64]) -> f64 {
        match self {
            OracleNode::Leaf(v) => *v,
            OracleNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if x[*feature] <= *threshold {
                    left.predict(x)
                } else {
                    right.predict(x)
                }
            }
        }
    }
}

fn sse(rows: &[usize], y: &[f64]) -> f64 {
    let mean = rows.iter().map(|&i| y[i]).sum::<f64>() / rows.len() as f64;
    rows.iter().map(|&i| (y[i] - mean) * (y[i] - mean)).sum()
}

fn oracle_grow(rows: &[usize], data: &Dataset, y: &[f64], depth_left: usize) -> OracleNode {
    let mean = rows.iter().map(|&i| y[i]).sum::<f64>() / rows.len() as f64;
    let all_equal = rows.iter().all(|&i| y[i] == y[rows[0]]);
    if depth_left == 0 || rows.len() < 2 || all_equal {
        return OracleNode::Leaf(mean);
    }
    let parent = sse(rows, y);
    let mut best: Option<(f64, usize, f64)> = None;
    for f in 0..data.n_features() {
        let mut xs: Vec<f64> = rows.iter().map(|&i| data.value(i, f)).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        for w in xs.windows(2) {
            let threshold = 0.5 * (w[0] + w[1]);
            let left: Vec<usize> = rows
                .iter()
                .copied()
                .filter(|&i| data.value(i, f) <= threshold)
                .collect();
            let right: Vec<usize> = rows
                .iter()
                .copied()
                .filter(|&i| data.value(i, f) > threshold)
                .collect();
            if left.is_empty() || right.is_empty() {
                continue;
            }
            let gain = parent - sse(&left, y) - sse(&right, y);
            // strict improvement keeps the smallest feature and threshold
            if best.map_or(true, |(g, _, _)| gain > g) {
                best = Some((gain, f, threshold));
            }
        }
    }
    match best {
        Some((gain, feature, threshold)) if gain > 0.0 => {
            let left_rows: Vec<usize> = rows
                .iter()
                .copied()
                .filter(|&i| data.value(i, feature) <= threshold)
                .collect();
            let right_rows: Vec<usize> = rows
                .iter()
                .copied()
                .filter(|&i| data.value(i, feature) > threshold)
                .collect();
            OracleNode::Split {
                feature,
                threshold,
                left: Box::new(oracle_grow(&left_rows, data, y, depth_left - 1)),
                right: Box::new(oracle_grow(&right_rows, data, y, depth_left - 1)),
            }
        }
        _ => OracleNode::Leaf(mean),
    }
}

/// Criterion 2: on 30 random small instances the fitted tree's training SSE
/// equals an exhaustive greedy oracle's exactly. Runtime under 5 s.
#[test]
fn c2_tree_oracle_equivalence() {
    let start = Instant::now();
    for seed in 0..30u64 {
        let mut rng = rng_from_seed(2000 + seed);
        let n = rng.random_range(4..=12usize);
        let p = rng.random_range(1..=3usize);
        let depth = rng.random_range(1..=2usize);
        let features: Vec<f64> = (0..n * p).map(|_| rng.random::<f64>()).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let names = (0..p).map(|j| format!("x{j}")).collect();
        let data = Dataset::new(features, p, y.clone(), names, "y".into()).unwrap();

        let rows: Vec<usize> = (0..n).collect();
        let tree = fit_tree(
            &data,
            &rows,
            &y,
            &TreeParams::default().with_max_depth(depth),
            &mut rng_from_seed(seed),
        )
        .unwrap();
        let oracle = oracle_grow(&rows, &data, &y, depth);

        let tree_sse: f64 = (0..n)
            .map(|i| (y[i] - tree.predict_row(data.row(i))).powi(2))
            .sum();
        let oracle_sse: f64 = (0..n)
            .map(|i| (y[i] - oracle.predict(data.row(i))).powi(2))
            .sum();
        assert_eq!(
            tree_sse, oracle_sse,
            "instance {seed} (n={n}, p={p}, depth={depth})"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    println!("criterion 2 (tree oracle equivalence): PASS in {elapsed:?}");
}

/// Criterion 3: boosting with full row samples never increases training MSE
/// at any step, for shrinkage 0.05, 0.5, and 1.0. Runtime under 30 s.
#[test]
fn c3_mart_monotonicity() {
    let start = Instant::now();
    let data = friedman1(500, 1.0, 77);
    let y = data.response();
    for nu in [0.05, 0.5, 1.0] {
        let params = EnsembleParams {
            n_trees: 100,
            shrinkage: nu,
            subsample_fraction: 1.0,
            tree_params: TreeParams {
                max_depth: Some(2),
                min_samples_leaf: 1,
                max_terminal_nodes: None,
                feature_subsample: None,
            },
            loss: Loss::SquaredError,
            mode: EnsembleMode::Mart,
            seed: 31,
        };
        let ensemble = generate_ensemble(&data, &params).unwrap();
        let mut fit = vec![ensemble.f0(); data.n_rows()];
        let mut prev = f64::INFINITY;
        for (step, tree) in ensemble.trees().iter().enumerate() {
            for i in 0..data.n_rows() {
                fit[i] += nu * tree.predict_row(data.row(i));
            }
            let mse = isle::mean_squared_error(y, &fit);
            assert!(
                mse <= prev + 1e-10,
                "nu={nu}: training MSE rose at step {step}: {mse} > {prev}"
            );
            prev = mse;
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    println!("criterion 3 (boosting monotonicity): PASS in {elapsed:?}");
}

/// Criterion 4: post-processing recovery at Boston scale, 10 repeats.
#[test]
fn c4_boston_postprocessing_recovery() {
    let start = Instant::now();
    let data = boston();
    let config = bench_config(
        "boston.csv",
        "medv",
        vec![ModelLabel::Rf2, ModelLabel::RfLasso],
        false,
    );
    let report = run_bench_on(&data, &config, "boston").unwrap();
    let rf2 = report.summary_for(ModelLabel::Rf2).unwrap().mean_mse;
    let rf_lasso = report.summary_for(ModelLabel::RfLasso).unwrap().mean_mse;
    assert!(
        rf_lasso < 0.6 * rf2,
        "mean MSE {rf_lasso:.3} not below 0.6 x {rf2:.3}"
    );
    assert!(
        (6.0..=14.0).contains(&rf_lasso),
        "mean MSE {rf_lasso:.3} outside [6, 14]"
    );
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(180), "took {elapsed:?}");
    println!(
        "criterion 4 (Boston recovery): PASS in {elapsed:?} — RF2 {rf2:.2}, RF_lasso {rf_lasso:.2}"
    );
}

/// Criterion 5: post-processing trend at Diabetes scale, 10 repeats.
#[test]
fn c5_diabetes_trend() {
    let start = Instant::now();
    let data = diabetes();
    let config = bench_config(
        "diabetes.csv",
        "y",
        vec![ModelLabel::Mart2, ModelLabel::MartLasso],
        false,
    );
    let report = run_bench_on(&data, &config, "diabetes").unwrap();
    let mart2 = report.summary_for(ModelLabel::Mart2).unwrap().mean_mse;
    let mart_lasso = report.summary_for(ModelLabel::MartLasso).unwrap().mean_mse;
    assert!(
        mart_lasso < mart2,
        "mean MSE {mart_lasso:.1} not below MART2 {mart2:.1}"
    );
    assert!(
        (2700.0..=3900.0).contains(&mart_lasso),
        "mean MSE {mart_lasso:.1} outside [2700, 3900]"
    );
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(180), "took {elapsed:?}");
    println!(
        "criterion 5 (Diabetes trend): PASS in {elapsed:?} — MART2 {mart2:.1}, MART_lasso {mart_lasso:.1}"
    );
}

/// Criterion 6: fixed-setting generation plus penalized refit fits in less
/// than half the wall-clock of the grid-tuned baselines (ratios only;
/// absolute seconds are hardware-dependent).
#[test]
fn c6_speed_ratios() {
    let data = boston();
    let mut config = bench_config(
        "boston.csv",
        "medv",
        vec![
            ModelLabel::Rf1,
            ModelLabel::RfLasso,
            ModelLabel::Mart1,
            ModelLabel::MartLasso,
        ],
        true,
    );
    config.n_repeats = 2;
    let report = run_bench_on(&data, &config, "boston").unwrap();
    let secs =
        |label: ModelLabel| report.summary_for(label).unwrap().mean_seconds;
    let rf1 = secs(ModelLabel::Rf1);
    let rf_lasso = secs(ModelLabel::RfLasso);
    let mart1 = secs(ModelLabel::Mart1);
    let mart_lasso = secs(ModelLabel::MartLasso);
    assert!(
        rf_lasso < 0.5 * rf1,
        "RF_lasso {rf_lasso:.2}s not under half of RF1 {rf1:.2}s"
    );
    assert!(
        mart_lasso < 0.5 * mart1,
        "MART_lasso {mart_lasso:.2}s not under half of MART1 {mart1:.2}s"
    );
    println!(
        "criterion 6 (speed ratios): PASS — RF_lasso/RF1 {:.3}, MART_lasso/MART1 {:.3}",
        rf_lasso / rf1,
        mart_lasso / mart1
    );
}

struct ConstPredictor(f64);
impl Predictor for ConstPredictor {
    fn predict_row(&self, _x: &[f64]) -> f64 {
        self.0
    }
}

struct LinePredictor {
    intercept: f64,
    slope: f64,
}
impl Predictor for LinePredictor {
    fn predict_row(&self, x: &[f64]) -> f64 {
        self.intercept + self.slope * x[0]
    }
}

fn mean_candidate(label: &str) -> CandidateModel {
    CandidateModel::new(label, |data: &Dataset, rows: &[usize], _seed| {
        let y = data.gather_response(rows);
        Ok(Box::new(ConstPredictor(y.iter().sum::<f64>() / y.len() as f64))
            as Box<dyn Predictor>)
    })
}

fn line_candidate(label: &str) -> CandidateModel {
    CandidateModel::new(label, |data: &Dataset, rows: &[usize], _seed| {
        let n = rows.len() as f64;
        let xm = rows.iter().map(|&i| data.value(i, 0)).sum::<f64>() / n;
        let ym = rows.iter().map(|&i| data.response()[i]).sum::<f64>() / n;
        let sxy: f64 = rows
            .iter()
            .map(|&i| (data.value(i, 0) - xm) * (data.response()[i] - ym))
            .sum();
        let sxx: f64 = rows
            .iter()
            .map(|&i| (data.value(i, 0) - xm) * (data.value(i, 0) - xm))
            .sum();
        let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        Ok(Box::new(LinePredictor {
            intercept: ym - slope * xm,
            slope,
        }) as Box<dyn Predictor>)
    })
}

fn scaled_candidate(label: &str, scale: f64) -> CandidateModel {
    CandidateModel::new(label, move |data: &Dataset, rows: &[usize], _seed| {
        let y = data.gather_response(rows);
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        Ok(Box::new(ConstPredictor(mean * scale)) as Box<dyn Predictor>)
    })
}

fn line_data(n: usize, noise: f64, seed: u64) -> Dataset {
    let mut rng = rng_from_seed(seed);
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let xi: f64 = rng.random::<f64>() * 4.0 - 2.0;
        let (u1, u2): (f64, f64) = (rng.random(), rng.random());
        let z = (-2.0 * u1.max(f64::MIN_POSITIVE).ln()).sqrt()
            * (2.0 * std::f64::consts::PI * u2).cos();
        x.push(xi);
        y.push(xi + noise * z);
    }
    Dataset::new(x, 1, y, vec!["x".into()], "y".into()).unwrap()
}

/// Criterion 7: mixing-weight invariants over 100 random configurations,
/// exact even split for identical candidates, and the dominant-model
/// Monte Carlo check. Runtime under 60 s.
#[test]
fn c7_arm_invariants() {
    let start = Instant::now();

    // convexity over random configurations
    for seed in 0..100u64 {
        let mut rng = rng_from_seed(3000 + seed);
        let n = rng.random_range(20..=80usize);
        let j = rng.random_range(1..=4usize);
        let data = line_data(n, 0.5, seed);
        let models: Vec<CandidateModel> = (0..j)
            .map(|k| scaled_candidate(&format!("m{k}"), 0.5 + rng.random::<f64>()))
            .collect();
        let config = ArmConfig {
            n_outer: rng.random_range(1..=5usize),
            ..ArmConfig::for_response(data.response())
        };
        let w = arm_weights(&models, &data, &config, seed).unwrap();
        assert!(w.weights.iter().all(|v| *v >= 0.0), "seed {seed}");
        assert!(
            (w.weights.iter().sum::<f64>() - 1.0).abs() <= 1e-12,
            "seed {seed}: weights sum {}",
            w.weights.iter().sum::<f64>()
        );
        for row in &w.per_iteration_shares {
            assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    // byte-identical candidates split exactly evenly
    for seed in [5u64, 17, 130] {
        let data = line_data(60, 0.5, seed);
        let config = ArmConfig::for_response(data.response());
        let w = arm_weights(
            &[mean_candidate("a"), mean_candidate("b")],
            &data,
            &config,
            seed,
        )
        .unwrap();
        assert!((w.weights[0] - 0.5).abs() <= 1e-12);
        assert!((w.weights[1] - 0.5).abs() <= 1e-12);
    }

    // the true-form model dominates the constant fit
    let mut dominated = 0;
    for seed in 0..20u64 {
        let data = line_data(60, 0.1, 400 + seed);
        let config = ArmConfig::for_response(data.response());
        let w = arm_weights(
            &[line_candidate("line"), mean_candidate("mean")],
            &data,
            &config,
            seed,
        )
        .unwrap();
        if w.weights[0] > 0.9 {
            dominated += 1;
        }
    }
    assert!(dominated >= 19, "dominant model won only {dominated}/20 seeds");

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    println!("criterion 7 (mixing invariants): PASS in {elapsed:?} — dominance {dominated}/20");
}

/// Criterion 8: at Diabetes scale the mixed model is within 5% of its best
/// component over 10 repeats. Runtime under 15 min.
#[test]
fn c8_arm_desk_scale() {
    let start = Instant::now();
    let data = diabetes();
    let config = bench_config(
        "diabetes.csv",
        "y",
        vec![ModelLabel::RfLasso, ModelLabel::MartLasso, ModelLabel::ArmLasso],
        false,
    );
    let report = run_bench_on(&data, &config, "diabetes").unwrap();
    let rf_lasso = report.summary_for(ModelLabel::RfLasso).unwrap().mean_mse;
    let mart_lasso = report.summary_for(ModelLabel::MartLasso).unwrap().mean_mse;
    let arm_lasso = report.summary_for(ModelLabel::ArmLasso).unwrap().mean_mse;
    let best_component = rf_lasso.min(mart_lasso);
    assert!(
        arm_lasso <= 1.05 * best_component,
        "ARM_lasso {arm_lasso:.1} above 1.05 x best component {best_component:.1}"
    );
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(900), "took {elapsed:?}");
    println!(
        "criterion 8 (mixing at desk scale): PASS in {elapsed:?} — ARM {arm_lasso:.1} vs components ({rf_lasso:.1}, {mart_lasso:.1})"
    );
}

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_isle"))
        .args(args)
        .output()
        .expect("binary runs")
}

/// Criterion 9: train, post, and bench produce byte-identical output files
/// across two consecutive runs with fixed seeds.
#[test]
fn c9_cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let boston_path = data_path("boston.csv");
    let boston = boston_path.to_str().unwrap();

    let model_path = |run: usize| dir.path().join(format!("model{run}.json"));
    let post_path = |run: usize| dir.path().join(format!("post{run}.json"));
    let report_path = |run: usize| dir.path().join(format!("report{run}.csv"));

    let bench_cfg = dir.path().join("bench.json");
    std::fs::write(
        &bench_cfg,
        format!(
            "{{\"data\": \"{boston}\", \"target\": \"medv\", \"n_repeats\": 2, \"seed\": 3, \"roster\": [\"RF2\", \"MART2\"], \"timing\": false}}"
        ),
    )
    .unwrap();

    for run in 0..2 {
        let out = run_cli(&[
            "train", "--data", boston, "--target", "medv", "--model", "rf", "--mode", "isle",
            "--seed", "5", "--out", model_path(run).to_str().unwrap(),
        ]);
        assert!(out.status.success(), "train failed: {out:?}");

        let out = run_cli(&[
            "post", "--model", model_path(run).to_str().unwrap(), "--data", boston, "--target",
            "medv", "--penalty", "lasso", "--n-lambdas", "40", "--seed", "5", "--out",
            post_path(run).to_str().unwrap(),
        ]);
        assert!(out.status.success(), "post failed: {out:?}");

        let out = run_cli(&[
            "bench", "--config", bench_cfg.to_str().unwrap(), "--out",
            report_path(run).to_str().unwrap(),
        ]);
        assert!(out.status.success(), "bench failed: {out:?}");
    }

    for (a, b, what) in [
        (model_path(0), model_path(1), "train model"),
        (post_path(0), post_path(1), "post model"),
        (report_path(0), report_path(1), "bench report"),
    ] {
        let ba = std::fs::read(a).unwrap();
        let bb = std::fs::read(b).unwrap();
        assert_eq!(ba, bb, "{what} files differ between runs");
    }
    println!("criterion 9 (CLI determinism): PASS — train/post/bench outputs byte-identical");
}
