//! Grid tuning of the baseline ensembles by k-fold cross-validation.
//!
//! The conventional random forest tunes only the per-node feature count;
//! the boosted baseline tunes tree depth, tree count, and shrinkage. Grid
//! points and folds are independent tasks; the result table is assembled
//! in grid order regardless of scheduling.

use serde::{Deserialize, Serialize};

use crate::dataset::{kfold_indices, Dataset, SplitIndices};
use crate::ensemble::{
    generate_ensemble, Ensemble, EnsembleMode, EnsembleParams, Loss,
};
use crate::error::{Error, Result};
use crate::rng;
use crate::tree::TreeParams;

/// Candidate values per tunable parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningGrid {
    /// Feature-subsample sizes for the random forest.
    pub rf_m: Vec<usize>,
    pub mart_depth: Vec<usize>,
    pub mart_n_trees: Vec<usize>,
    pub mart_nu: Vec<f64>,
}

impl TuningGrid {
    /// Default grids: `m` spread over `{ceil(p/5), ceil(p/3), ceil(p/2), p}`
    /// and a small depth/count/shrinkage product for the boosted baseline.
    pub fn default_for(n_features: usize) -> TuningGrid {
        let p = n_features;
        let mut rf_m: Vec<usize> = [p.div_ceil(5), p.div_ceil(3), p.div_ceil(2), p]
            .into_iter()
            .map(|m| m.clamp(1, p))
            .collect();
        rf_m.sort_unstable();
        rf_m.dedup();
        TuningGrid {
            rf_m,
            mart_depth: vec![2, 4, 6],
            mart_n_trees: vec![100, 300],
            mart_nu: vec![0.01, 0.1],
        }
    }

    fn validate(&self, mode: EnsembleMode, n_features: usize) -> Result<()> {
        match mode {
            EnsembleMode::Rf => {
                if self.rf_m.is_empty() {
                    return Err(Error::invalid_param("empty feature-subsample grid"));
                }
                if self.rf_m.iter().any(|&m| m == 0 || m > n_features) {
                    return Err(Error::invalid_param("feature-subsample value out of range"));
                }
            }
            EnsembleMode::Mart => {
                if self.mart_depth.is_empty()
                    || self.mart_n_trees.is_empty()
                    || self.mart_nu.is_empty()
                {
                    return Err(Error::invalid_param("empty boosting grid"));
                }
                if self.mart_nu.iter().any(|&nu| !(0.0 < nu && nu <= 1.0)) {
                    return Err(Error::invalid_param("shrinkage grid value out of (0,1]"));
                }
            }
        }
        Ok(())
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneRecord {
    pub params: EnsembleParams,
    pub mean_mse: f64,
}

/// Tuning outcome: the winning parameters and the full table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningResult {
    pub best_params: EnsembleParams,
    pub cv_table: Vec<TuneRecord>,
}

/// Row-subsample fraction used while tuning the boosted baseline.
pub const MART_BASELINE_ETA: f64 = 0.5;
/// Row-subsample fraction of the tuned random forest: the distinct-row
/// count a bootstrap sample is expected to contain.
pub const RF_BASELINE_ETA: f64 = 0.632;
/// Tree count of the tuned random forest (the conventional forest default).
pub const RF_BASELINE_N_TREES: usize = 500;

/// Grid points for a mode, in deterministic grid order.
fn grid_points(mode: EnsembleMode, grid: &TuningGrid, seed: u64) -> Vec<EnsembleParams> {
    match mode {
        EnsembleMode::Rf => grid
            .rf_m
            .iter()
            .map(|&m| EnsembleParams {
                n_trees: RF_BASELINE_N_TREES,
                shrinkage: 0.0,
                subsample_fraction: RF_BASELINE_ETA,
                tree_params: TreeParams {
                    max_depth: None,
                    min_samples_leaf: 5,
                    max_terminal_nodes: None,
                    feature_subsample: Some(m),
                },
                loss: Loss::SquaredError,
                mode: EnsembleMode::Rf,
                seed,
            })
            .collect(),
        EnsembleMode::Mart => {
            let mut points = Vec::new();
            for &depth in &grid.mart_depth {
                for &n_trees in &grid.mart_n_trees {
                    for &nu in &grid.mart_nu {
                        points.push(EnsembleParams {
                            n_trees,
                            shrinkage: nu,
                            subsample_fraction: MART_BASELINE_ETA,
                            tree_params: TreeParams {
                                max_depth: Some(depth),
                                min_samples_leaf: 1,
                                max_terminal_nodes: None,
                                feature_subsample: None,
                            },
                            loss: Loss::SquaredError,
                            mode: EnsembleMode::Mart,
                            seed,
                        });
                    }
                }
            }
            points
        }
    }
}

/// Fit one fold's ensemble for a grid point. The fold model depends only on
/// the training rows and the derived seed.
pub(crate) fn fit_fold_ensemble(
    data: &Dataset,
    params: &EnsembleParams,
    train: &[usize],
    fold_seed: u64,
) -> Result<Ensemble> {
    let train_data = data.subset(train);
    let params = EnsembleParams {
        seed: fold_seed,
        ..params.clone()
    };
    generate_ensemble(&train_data, &params)
}

fn fold_validation_mse(
    data: &Dataset,
    params: &EnsembleParams,
    fold: &SplitIndices,
    fold_seed: u64,
) -> Result<f64> {
    let ensemble = fit_fold_ensemble(data, params, &fold.train, fold_seed)?;
    let preds = ensemble.predict_rows(data, &fold.test);
    let y = data.gather_response(&fold.test);
    Ok(crate::mean_squared_error(&y, &preds))
}

/// Exhaustive grid search by k-fold cross-validation.
///
/// Ties resolve to the simpler model: fewer trees, then shallower depth,
/// then smaller shrinkage, then fewer subsampled features.
pub fn tune(
    data: &Dataset,
    mode: EnsembleMode,
    grid: &TuningGrid,
    k: usize,
    seed: u64,
) -> Result<TuningResult> {
    grid.validate(mode, data.n_features())?;
    let points = grid_points(mode, grid, seed);
    let folds = kfold_indices(data.n_rows(), k, &mut rng::rng_from_seed(seed))?;

    let tasks: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..folds.len()).map(move |f| (p, f)))
        .collect();
    let mses: Vec<f64> = crate::exec::try_map_indexed(tasks.len(), |t| {
        let (p, f) = tasks[t];
        let fold_seed = rng::mix_seed(rng::mix_seed(seed, p as u64), f as u64);
        fold_validation_mse(data, &points[p], &folds[f], fold_seed)
    })?;

    let cv_table: Vec<TuneRecord> = points
        .iter()
        .enumerate()
        .map(|(p, params)| {
            let mean = (0..folds.len())
                .map(|f| mses[p * folds.len() + f])
                .sum::<f64>()
                / folds.len() as f64;
            TuneRecord {
                params: params.clone(),
                mean_mse: mean,
            }
        })
        .collect();

    let simplicity_key = |p: &EnsembleParams| {
        (
            p.n_trees,
            p.tree_params.max_depth.unwrap_or(usize::MAX),
            p.shrinkage,
            p.tree_params
                .feature_subsample
                .unwrap_or(data.n_features()),
        )
    };
    let best = cv_table
        .iter()
        .min_by(|a, b| {
            let ka = simplicity_key(&a.params);
            let kb = simplicity_key(&b.params);
            a.mean_mse
                .total_cmp(&b.mean_mse)
                .then_with(|| ka.0.cmp(&kb.0))
                .then_with(|| ka.1.cmp(&kb.1))
                .then_with(|| ka.2.total_cmp(&kb.2))
                .then_with(|| ka.3.cmp(&kb.3))
        })
        .expect("nonempty grid");

    Ok(TuningResult {
        best_params: best.params.clone(),
        cv_table,
    })
}

/// CSV rendering of a tuning table.
pub fn tune_table_csv(result: &TuningResult) -> String {
    let mut out = String::from("n_trees,depth,nu,feature_subsample,mean_mse\n");
    for r in &result.cv_table {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.params.n_trees,
            r.params
                .tree_params
                .max_depth
                .map_or("unlimited".to_string(), |d| d.to_string()),
            r.params.shrinkage,
            r.params
                .tree_params
                .feature_subsample
                .map_or("all".to_string(), |m| m.to_string()),
            r.mean_mse
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::friedman1;

    #[test]
    fn single_point_grid_is_selected() {
        let ds = friedman1(80, 1.0, 1);
        let grid = TuningGrid {
            rf_m: vec![3],
            ..TuningGrid::default_for(10)
        };
        let result = tune(&ds, EnsembleMode::Rf, &grid, 3, 5).unwrap();
        assert_eq!(result.cv_table.len(), 1);
        assert_eq!(
            result.best_params.tree_params.feature_subsample,
            Some(3)
        );
    }

    #[test]
    fn table_cardinality_is_grid_product() {
        let ds = friedman1(60, 1.0, 2);
        let grid = TuningGrid {
            rf_m: vec![2, 5, 10],
            mart_depth: vec![2, 4],
            mart_n_trees: vec![20],
            mart_nu: vec![0.05, 0.2],
        };
        let rf = tune(&ds, EnsembleMode::Rf, &grid, 3, 7).unwrap();
        assert_eq!(rf.cv_table.len(), 3);
        let mart = tune(&ds, EnsembleMode::Mart, &grid, 3, 7).unwrap();
        assert_eq!(mart.cv_table.len(), 2 * 1 * 2);
    }

    #[test]
    fn best_is_the_table_argmin() {
        let ds = friedman1(80, 1.0, 3);
        let grid = TuningGrid {
            rf_m: vec![1, 10],
            ..TuningGrid::default_for(10)
        };
        let result = tune(&ds, EnsembleMode::Rf, &grid, 4, 11).unwrap();
        let min = result
            .cv_table
            .iter()
            .map(|r| r.mean_mse)
            .fold(f64::INFINITY, f64::min);
        let best_row = result
            .cv_table
            .iter()
            .find(|r| r.params == result.best_params)
            .unwrap();
        assert_eq!(best_row.mean_mse, min);
    }

    #[test]
    fn tuning_is_deterministic() {
        let ds = friedman1(60, 1.0, 4);
        let grid = TuningGrid {
            rf_m: vec![2, 4],
            ..TuningGrid::default_for(10)
        };
        let a = tune(&ds, EnsembleMode::Rf, &grid, 3, 9).unwrap();
        let b = tune(&ds, EnsembleMode::Rf, &grid, 3, 9).unwrap();
        assert_eq!(a, b);
    }

    /// Poisoning a fold's validation responses must not change the model
    /// trained for that fold.
    #[test]
    fn fold_models_ignore_validation_rows() {
        let ds = friedman1(50, 1.0, 6);
        let grid = TuningGrid {
            rf_m: vec![3],
            ..TuningGrid::default_for(10)
        };
        let seed = 21;
        let k = 3;
        let params = &grid_points(EnsembleMode::Rf, &grid, seed)[0];
        let folds = kfold_indices(ds.n_rows(), k, &mut rng::rng_from_seed(seed)).unwrap();
        for (f, fold) in folds.iter().enumerate() {
            let fold_seed = rng::mix_seed(rng::mix_seed(seed, 0), f as u64);
            let clean = fit_fold_ensemble(&ds, params, &fold.train, fold_seed).unwrap();
            let mut poisoned_y = ds.response().to_vec();
            for &i in &fold.test {
                poisoned_y[i] = 1e6;
            }
            let poisoned = ds.with_response(poisoned_y).unwrap();
            let refit = fit_fold_ensemble(&poisoned, params, &fold.train, fold_seed).unwrap();
            assert_eq!(clean, refit, "fold {f} model changed");
        }
    }
}
