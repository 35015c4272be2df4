//! Hyperparameter selection for the penalized basis fits.
//!
//! The lambda path is solved per fold with warm starts; folds and
//! (alpha, gamma) grid combinations are independent tasks. For the adaptive
//! penalties the pilot is cross-validated first, its coefficients fix the
//! weights, and the weighted problem is cross-validated over
//! (lambda, gamma[, alpha]).

use serde::{Deserialize, Serialize};

use crate::dataset::kfold_indices;
use crate::ensemble::Basis;
use crate::error::{Error, Result};
use crate::rng;

use super::solver::{
    adaptive_weights, lambda_path, resolve_penalty, solve_standardized, std_fit_to_penalized,
    GramWorkspace, PenaltyKind, PenaltySpec, PenalizedFit, Standardization, StdFit,
};

/// Iteration cap for the warm-started path solves inside CV folds. The
/// selected hyperparameters are insensitive at this precision; only the
/// final refit pays for the full budget and the stationarity check.
const FOLD_MAX_ITER: usize = 200;

/// Cross-validation settings for penalty selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub n_folds: usize,
    pub n_lambdas: usize,
    pub lambda_min_ratio: f64,
    pub alpha_grid: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            n_folds: 5,
            n_lambdas: 100,
            lambda_min_ratio: 1e-3,
            alpha_grid: vec![0.1, 0.3, 0.5, 0.7, 0.9],
            gamma_grid: vec![0.5, 1.0, 2.0],
            tol: 1e-7,
            max_iter: 10_000,
        }
    }
}

/// One grid point of the cross-validation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvRecord {
    pub kind: PenaltyKind,
    pub lambda: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub mean_mse: f64,
    pub sd_mse: f64,
}

/// Render CV records as a CSV table.
pub fn cv_table_csv(records: &[CvRecord]) -> String {
    let mut out = String::from("kind,lambda,alpha,gamma,mean_mse,sd_mse\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.kind.as_str(),
            r.lambda,
            r.alpha,
            r.gamma,
            r.mean_mse,
            r.sd_mse
        ));
    }
    out
}

struct GridCombo {
    alpha: f64,
    gamma: f64,
    weights: Option<Vec<f64>>,
    path: Vec<f64>,
}

fn build_combos(
    basis: &Basis,
    std: &Standardization,
    y: &[f64],
    kind: PenaltyKind,
    pilot: Option<&PenalizedFit>,
    cfg: &CvConfig,
) -> Result<Vec<GridCombo>> {
    let alphas: Vec<f64> = if kind.uses_alpha() {
        cfg.alpha_grid.clone()
    } else {
        vec![0.0]
    };
    let gammas: Vec<f64> = if kind.is_adaptive() {
        cfg.gamma_grid.clone()
    } else {
        vec![0.0]
    };
    if alphas.is_empty() || gammas.is_empty() {
        return Err(Error::invalid_param("empty hyperparameter grid"));
    }
    let pilot_std = match (kind.is_adaptive(), pilot) {
        (true, Some(p)) => Some(p.standardized_coefficients()),
        (true, None) => {
            return Err(Error::invalid_param(
                "adaptive penalties need a pilot fit for their weights",
            ))
        }
        (false, _) => None,
    };

    let mut combos = Vec::with_capacity(alphas.len() * gammas.len());
    for &gamma in &gammas {
        let weights = pilot_std.as_ref().map(|c| adaptive_weights(c, gamma));
        for &alpha in &alphas {
            let path = lambda_path(
                basis,
                std,
                y,
                alpha,
                weights.as_deref(),
                cfg.n_lambdas,
                cfg.lambda_min_ratio,
            )?;
            combos.push(GridCombo {
                alpha,
                gamma,
                weights: weights.clone(),
                path,
            });
        }
    }
    Ok(combos)
}

fn spec_for(kind: PenaltyKind, combo: &GridCombo, lambda: f64) -> PenaltySpec {
    PenaltySpec {
        kind,
        lambda,
        alpha: combo.alpha,
        gamma: combo.gamma,
        adaptive_weights: combo.weights.clone(),
    }
}

/// Training-side view of one fold, shared by every grid combination.
struct FoldData {
    train_basis: Basis,
    train_ws: GramWorkspace,
    train_y: Vec<f64>,
    test: Vec<usize>,
}

impl FoldData {
    fn new(basis: &Basis, y: &[f64], fold: &crate::dataset::SplitIndices) -> FoldData {
        let train_basis = basis.gather_rows(&fold.train);
        let train_ws = GramWorkspace::new(&train_basis);
        FoldData {
            train_basis,
            train_ws,
            train_y: fold.train.iter().map(|&i| y[i]).collect(),
            test: fold.test.clone(),
        }
    }
}

/// Validation MSE per lambda for one fold of one grid combination.
fn fold_path_mse(
    basis: &Basis,
    std: &Standardization,
    y: &[f64],
    kind: PenaltyKind,
    combo: &GridCombo,
    fold: &FoldData,
    cfg: &CvConfig,
) -> Result<Vec<f64>> {
    let mut warm: Option<StdFit> = None;
    let mut out = Vec::with_capacity(combo.path.len());
    for &lambda in &combo.path {
        let spec = spec_for(kind, combo, lambda);
        let pen = resolve_penalty(&spec, std, basis.n_cols())?;
        let fit = solve_standardized(
            &fold.train_basis,
            &fold.train_ws,
            &fold.train_y,
            &pen,
            warm.as_ref(),
            cfg.tol,
            cfg.max_iter.min(FOLD_MAX_ITER),
            None,
            None,
        )?;
        let sse: f64 = fold
            .test
            .iter()
            .map(|&i| {
                let pred = fit.intercept
                    + fit
                        .beta
                        .iter()
                        .enumerate()
                        .filter(|(_, b)| **b != 0.0)
                        .map(|(m, b)| b * basis.value(i, m))
                        .sum::<f64>();
                (y[i] - pred) * (y[i] - pred)
            })
            .sum();
        out.push(sse / fold.test.len() as f64);
        warm = Some(fit);
    }
    Ok(out)
}

/// Select the best penalty by k-fold cross-validation and refit on all rows.
///
/// Grid ties resolve to the larger lambda, then the smaller alpha, then the
/// smaller gamma. The returned fit carries the winning spec; the full table
/// has one record per (lambda, alpha, gamma) point.
pub fn cv_select(
    basis: &Basis,
    std: &Standardization,
    y: &[f64],
    kind: PenaltyKind,
    pilot: Option<&PenalizedFit>,
    cfg: &CvConfig,
    seed: u64,
) -> Result<(PenalizedFit, Vec<CvRecord>)> {
    if cfg.n_folds < 2 {
        return Err(Error::invalid_param("need at least 2 folds"));
    }
    let n = basis.n_rows();
    if y.len() != n {
        return Err(Error::invalid_data("response length mismatch"));
    }
    let combos = build_combos(basis, std, y, kind, pilot, cfg)?;
    let folds = kfold_indices(n, cfg.n_folds, &mut rng::rng_from_seed(seed))?;
    let fold_data: Vec<FoldData> = crate::exec::map_indexed(folds.len(), |f| {
        FoldData::new(basis, y, &folds[f])
    });

    // one task per (combo, fold); results land in deterministic order
    let tasks: Vec<(usize, usize)> = (0..combos.len())
        .flat_map(|c| (0..folds.len()).map(move |f| (c, f)))
        .collect();
    let results: Vec<Vec<f64>> = crate::exec::try_map_indexed(tasks.len(), |t| {
        let (c, f) = tasks[t];
        fold_path_mse(basis, std, y, kind, &combos[c], &fold_data[f], cfg)
    })?;

    let k = folds.len() as f64;
    let mut records = Vec::new();
    for (c, combo) in combos.iter().enumerate() {
        for (l, &lambda) in combo.path.iter().enumerate() {
            let fold_mses: Vec<f64> = (0..folds.len())
                .map(|f| results[c * folds.len() + f][l])
                .collect();
            let mean = fold_mses.iter().sum::<f64>() / k;
            let var = fold_mses.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / k;
            records.push(CvRecord {
                kind,
                lambda,
                alpha: combo.alpha,
                gamma: combo.gamma,
                mean_mse: mean,
                sd_mse: var.sqrt(),
            });
        }
    }

    let best = records
        .iter()
        .min_by(|a, b| {
            a.mean_mse
                .total_cmp(&b.mean_mse)
                .then_with(|| b.lambda.total_cmp(&a.lambda))
                .then_with(|| a.alpha.total_cmp(&b.alpha))
                .then_with(|| a.gamma.total_cmp(&b.gamma))
        })
        .expect("nonempty grid")
        .clone();

    // warm-started descent on the full data down to the winning lambda;
    // only the winning solve pays for the tight stationarity check
    let combo = combos
        .iter()
        .find(|c| c.alpha == best.alpha && c.gamma == best.gamma)
        .expect("combo for best record");
    let full_ws = GramWorkspace::new(basis);
    let mut warm: Option<StdFit> = None;
    let mut final_fit: Option<StdFit> = None;
    for &lambda in &combo.path {
        if lambda < best.lambda {
            break;
        }
        let spec = spec_for(kind, combo, lambda);
        let pen = resolve_penalty(&spec, std, basis.n_cols())?;
        let at_best = lambda == best.lambda;
        let kkt_slack = if at_best { Some(5.0 * cfg.tol) } else { None };
        let max_iter = if at_best {
            cfg.max_iter
        } else {
            cfg.max_iter.min(FOLD_MAX_ITER)
        };
        let fit = solve_standardized(
            basis,
            &full_ws,
            y,
            &pen,
            warm.as_ref(),
            cfg.tol,
            max_iter,
            kkt_slack,
            None,
        )?;
        warm = Some(fit.clone());
        if at_best {
            final_fit = Some(fit);
            break;
        }
    }
    let final_fit = final_fit.ok_or_else(|| {
        Error::invalid_data("winning lambda missing from its own path")
    })?;
    let best_spec = spec_for(kind, combo, best.lambda);
    Ok((
        std_fit_to_penalized(&final_fit, &best_spec, std),
        records,
    ))
}

/// Result of a two-stage adaptive fit.
#[derive(Debug, Clone)]
pub struct AdaptiveFit {
    pub fit: PenalizedFit,
    pub pilot: PenalizedFit,
    pub pilot_records: Vec<CvRecord>,
    pub records: Vec<CvRecord>,
}

/// Fit an adaptive penalty: cross-validate the pilot (lasso or elastic
/// net), fix weights from its coefficients, then cross-validate the
/// weighted problem over (lambda, gamma[, alpha]).
///
/// A pilot that selects the all-zero model pins every weight, so the
/// adaptive stage degenerates to the intercept-only fit (detectable as
/// zero nonzero coefficients on the result).
pub fn fit_adaptive(
    basis: &Basis,
    std: &Standardization,
    y: &[f64],
    kind: PenaltyKind,
    cfg: &CvConfig,
    seed: u64,
) -> Result<AdaptiveFit> {
    let pilot_kind = kind
        .pilot_kind()
        .ok_or_else(|| Error::invalid_param("fit_adaptive requires an adaptive penalty kind"))?;
    let (pilot, pilot_records) = cv_select(
        basis,
        std,
        y,
        pilot_kind,
        None,
        cfg,
        rng::mix_seed(seed, 0),
    )?;

    if pilot.n_nonzero() == 0 {
        let n = y.len();
        let mean = y.iter().sum::<f64>() / n as f64;
        let spec = PenaltySpec {
            kind,
            lambda: pilot.spec.lambda,
            alpha: if kind.uses_alpha() { pilot.spec.alpha } else { 0.0 },
            gamma: cfg.gamma_grid.first().copied().unwrap_or(0.0),
            adaptive_weights: Some(vec![f64::INFINITY; basis.n_cols()]),
        };
        let objective: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
        let fit = PenalizedFit {
            intercept: mean,
            coefficients: vec![0.0; basis.n_cols()],
            spec,
            standardization: std.clone(),
            objective_value: objective,
            converged: true,
            n_sweeps: 0,
        };
        return Ok(AdaptiveFit {
            fit,
            pilot,
            pilot_records,
            records: Vec::new(),
        });
    }

    let (fit, records) = cv_select(
        basis,
        std,
        y,
        kind,
        Some(&pilot),
        cfg,
        rng::mix_seed(seed, 1),
    )?;
    Ok(AdaptiveFit {
        fit,
        pilot,
        pilot_records,
        records,
    })
}
