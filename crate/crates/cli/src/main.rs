//! Command line interface: train ensembles, post-process them with
//! penalized fits, combine fitted models by likelihood mixing, predict,
//! and run the benchmark harness.
//!
//! Every subcommand takes a `--seed`; identical flags and seed produce
//! byte-identical output files. Exit codes: 0 success, 1 runtime failure,
//! 2 usage or config error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use isle::arm::{arm_weights, ArmConfig};
use isle::bench::{emit_report, run_bench, BenchConfig, ReportFormat};
use isle::dataset::Dataset;
use isle::ensemble::{generate_ensemble, EnsembleMode, EnsembleParams};
use isle::model_io::{ArmModelFile, EnsembleModelFile, ModelEnvelope, ModelKind, PostModelFile};
use isle::postprocess::{post_process, CvConfig, FrozenPenalty, PenaltyKind};
use isle::tuner::{tune, TuningGrid};
use isle::Predictor;

#[derive(Parser)]
#[command(
    name = "isle",
    version,
    about = "Tree ensembles with penalized post-processing and model mixing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a tree ensemble and write it as a model file.
    Train(TrainArgs),
    /// Predict with a model file; writes one prediction per input row.
    Predict(PredictArgs),
    /// Penalized post-processing of a trained ensemble.
    Post(PostArgs),
    /// Combine fitted models with adaptive-mixing weights.
    Arm(ArmArgs),
    /// Run the benchmark harness from a JSON config.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelFamily {
    Rf,
    Mart,
}

#[derive(Clone, Copy, ValueEnum)]
enum TrainMode {
    /// Fixed fast-generation settings.
    Isle,
    /// Grid-tuned by 5-fold cross-validation.
    Tuned,
}

#[derive(Clone, Copy, ValueEnum)]
enum PenaltyArg {
    Lasso,
    Alasso,
    Enet,
    Aenet,
}

impl PenaltyArg {
    fn kind(self) -> PenaltyKind {
        match self {
            PenaltyArg::Lasso => PenaltyKind::Lasso,
            PenaltyArg::Alasso => PenaltyKind::AdaptiveLasso,
            PenaltyArg::Enet => PenaltyKind::ElasticNet,
            PenaltyArg::Aenet => PenaltyKind::AdaptiveElasticNet,
        }
    }

    fn short_name(self) -> &'static str {
        match self {
            PenaltyArg::Lasso => "lasso",
            PenaltyArg::Alasso => "alasso",
            PenaltyArg::Enet => "enet",
            PenaltyArg::Aenet => "aenet",
        }
    }
}

#[derive(Args)]
struct DataArgs {
    /// CSV file with the training data.
    #[arg(long)]
    data: PathBuf,
    /// Response column name (or 0-based index with --no-header).
    #[arg(long)]
    target: String,
    /// The CSV has no header row; columns are addressed by index.
    #[arg(long)]
    no_header: bool,
}

impl DataArgs {
    fn load(&self) -> isle::Result<Dataset> {
        Dataset::load_csv(&self.data, &self.target, !self.no_header)
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Ensemble family.
    #[arg(long, value_enum)]
    model: ModelFamily,
    /// Generation mode.
    #[arg(long, value_enum, default_value = "isle")]
    mode: TrainMode,
    /// Number of trees (default: 200 below 1000 rows, 500 otherwise).
    #[arg(long)]
    trees: Option<usize>,
    /// Maximum tree depth.
    #[arg(long)]
    depth: Option<usize>,
    /// Row subsample fraction per tree.
    #[arg(long)]
    eta: Option<f64>,
    /// Shrinkage (mart only).
    #[arg(long)]
    nu: Option<f64>,
    /// Features drawn per split node (rf only).
    #[arg(long)]
    m: Option<usize>,
    /// Minimum rows per leaf.
    #[arg(long)]
    min_leaf: Option<usize>,
    /// Label recorded in the model file.
    #[arg(long)]
    label: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output model file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    /// Model file written by train, post, or arm.
    #[arg(long)]
    model: PathBuf,
    /// CSV file to predict on.
    #[arg(long)]
    data: PathBuf,
    /// Response column to separate (enables MSE reporting).
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    no_header: bool,
    /// Output CSV of predictions.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PostArgs {
    /// Trained ensemble model file.
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    /// Penalty kind.
    #[arg(long, value_enum)]
    penalty: PenaltyArg,
    /// Cross-validation folds.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(2..))]
    folds: u64,
    /// Lambda grid size.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(2..))]
    n_lambdas: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output model file.
    #[arg(long)]
    out: PathBuf,
    /// Also write the cross-validation table as CSV.
    #[arg(long)]
    cv_table: Option<PathBuf>,
}

#[derive(Args)]
struct ArmArgs {
    /// Comma-separated fitted model files to combine.
    #[arg(long, value_delimiter = ',', required = true)]
    models: Vec<PathBuf>,
    #[command(flatten)]
    data: DataArgs,
    /// Outer mixing iterations.
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    iters: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output manifest file.
    #[arg(long)]
    out: PathBuf,
    /// Weights report CSV (default: <out>.weights.csv).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// JSON benchmark configuration.
    #[arg(long)]
    config: PathBuf,
    /// Write the per-repeat rows as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Post(args) => cmd_post(args),
        Command::Arm(args) => cmd_arm(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn training_mse(model: &dyn Predictor, data: &Dataset) -> f64 {
    let all: Vec<usize> = (0..data.n_rows()).collect();
    let preds = model.predict_rows(data, &all);
    isle::mean_squared_error(data.response(), &preds)
}

fn cmd_train(args: TrainArgs) -> anyhow::Result<ExitCode> {
    let data = args.data.load()?;
    let (n, p) = (data.n_rows(), data.n_features());
    let start = Instant::now();

    let params = match (args.model, args.mode) {
        (ModelFamily::Rf, TrainMode::Isle) => {
            let mut params = EnsembleParams::isle_rf(n, p, args.seed);
            apply_train_overrides(&mut params, &args);
            params
        }
        (ModelFamily::Mart, TrainMode::Isle) => {
            let mut params = EnsembleParams::isle_mart(n, args.seed);
            apply_train_overrides(&mut params, &args);
            params
        }
        (family, TrainMode::Tuned) => {
            let mode = match family {
                ModelFamily::Rf => EnsembleMode::Rf,
                ModelFamily::Mart => EnsembleMode::Mart,
            };
            let grid = TuningGrid::default_for(p);
            let mut best =
                tune(&data, mode, &grid, 5, isle::rng::mix_seed(args.seed, 0))?.best_params;
            if let (EnsembleMode::Rf, Some(trees)) = (mode, args.trees) {
                best.n_trees = trees;
            }
            best.seed = isle::rng::mix_seed(args.seed, 1);
            best
        }
    };

    let ensemble = generate_ensemble(&data, &params)?;
    let seconds = start.elapsed().as_secs_f64();
    let mse = training_mse(&ensemble, &data);

    let label = args.label.clone().unwrap_or_else(|| {
        let family = match args.model {
            ModelFamily::Rf => "rf",
            ModelFamily::Mart => "mart",
        };
        let mode = match args.mode {
            TrainMode::Isle => "isle",
            TrainMode::Tuned => "tuned",
        };
        format!("{family}_{mode}")
    });

    println!("label={label}");
    println!("trees={}", ensemble.n_trees());
    println!(
        "depth={}",
        params
            .tree_params
            .max_depth
            .map_or("unlimited".to_string(), |d| d.to_string())
    );
    println!("train_mse={mse}");
    println!("fit_seconds={seconds:.3}");

    let envelope = ModelEnvelope::new(ModelKind::Ensemble(EnsembleModelFile {
        label,
        feature_names: data.feature_names().to_vec(),
        params,
        ensemble,
    }));
    envelope.save(&args.out)?;
    println!("out={}", args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn apply_train_overrides(params: &mut EnsembleParams, args: &TrainArgs) {
    if let Some(trees) = args.trees {
        params.n_trees = trees;
    }
    if let Some(depth) = args.depth {
        params.tree_params.max_depth = Some(depth);
    }
    if let Some(eta) = args.eta {
        params.subsample_fraction = eta;
    }
    if let Some(nu) = args.nu {
        params.shrinkage = nu;
    }
    if let Some(m) = args.m {
        params.tree_params.feature_subsample = Some(m);
    }
    if let Some(min_leaf) = args.min_leaf {
        params.tree_params.min_samples_leaf = min_leaf;
    }
}

fn cmd_post(args: PostArgs) -> anyhow::Result<ExitCode> {
    let envelope = ModelEnvelope::load(&args.model)?;
    let (base_label, base_params, ensemble) = match envelope.model {
        ModelKind::Ensemble(file) => (file.label, file.params, file.ensemble),
        _ => anyhow::bail!("post-processing expects an ensemble model file"),
    };
    let data = args.data.load()?;
    let kind = args.penalty.kind();
    let cfg = CvConfig {
        n_folds: args.folds as usize,
        n_lambdas: args.n_lambdas as usize,
        ..CvConfig::default()
    };

    let start = Instant::now();
    let out = post_process(ensemble, &data, kind, &cfg, args.seed)?;
    let seconds = start.elapsed().as_secs_f64();

    let fit = &out.model.fit;
    println!("penalty={}", kind.as_str());
    println!("lambda={}", fit.spec.lambda);
    println!("alpha={}", fit.spec.alpha);
    println!("gamma={}", fit.spec.gamma);
    if let Some(pilot) = &out.pilot {
        println!("pilot_lambda={}", pilot.spec.lambda);
        println!("pilot_alpha={}", pilot.spec.alpha);
        if pilot.n_nonzero() == 0 {
            eprintln!("warning: pilot selected the all-zero model; fit is intercept-only");
        }
    }
    println!("nonzero_coefficients={}", fit.n_nonzero());
    println!("cv_mse={}", out.cv_mse);
    println!("fit_seconds={seconds:.3}");

    if let Some(path) = &args.cv_table {
        let mut records = out.pilot_records.clone();
        records.extend(out.cv_records.iter().cloned());
        std::fs::write(path, isle::postprocess::cv_table_csv(&records))?;
        println!("cv_table={}", path.display());
    }

    let frozen = FrozenPenalty::from_fit(fit, out.pilot.as_ref(), &cfg);
    let envelope = ModelEnvelope::new(ModelKind::Post(PostModelFile {
        label: format!("{base_label}_{}", args.penalty.short_name()),
        feature_names: data.feature_names().to_vec(),
        base_params,
        frozen,
        model: out.model,
    }));
    envelope.save(&args.out)?;
    println!("out={}", args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_arm(args: ArmArgs) -> anyhow::Result<ExitCode> {
    let data = args.data.load()?;
    let envelopes: Vec<ModelEnvelope> = args
        .models
        .iter()
        .map(ModelEnvelope::load)
        .collect::<isle::Result<_>>()?;
    let candidates: Vec<_> = envelopes
        .iter()
        .map(|e| e.candidate())
        .collect::<isle::Result<_>>()?;

    let config = ArmConfig {
        n_outer: args.iters as usize,
        ..ArmConfig::for_response(data.response())
    };
    let start = Instant::now();
    let weights = arm_weights(&candidates, &data, &config, args.seed)?;
    let seconds = start.elapsed().as_secs_f64();

    println!("iterations={}", config.n_outer);
    for (label, w) in weights.labels.iter().zip(weights.weights.iter()) {
        println!("weight_{label}={w}");
    }
    println!("fit_seconds={seconds:.3}");

    let report_path = args
        .report
        .clone()
        .unwrap_or_else(|| args.out.with_extension("weights.csv"));
    std::fs::write(&report_path, weights.to_csv())?;
    println!("report={}", report_path.display());

    let label = format!("arm({})", weights.labels.join("+"));
    let envelope = ModelEnvelope::new(ModelKind::Arm(ArmModelFile {
        label,
        weights,
        components: envelopes.into_iter().map(|e| e.model).collect(),
    }));
    envelope.save(&args.out)?;
    println!("out={}", args.out.display());
    Ok(ExitCode::SUCCESS)
}

/// Load a prediction CSV: with a target column the full dataset loader
/// applies; without one, all columns are features.
fn load_prediction_rows(
    path: &Path,
    target: Option<&str>,
    header: bool,
) -> anyhow::Result<(Vec<Vec<f64>>, Option<Vec<f64>>)> {
    if let Some(target) = target {
        let data = Dataset::load_csv(path, target, header)?;
        let rows = (0..data.n_rows()).map(|i| data.row(i).to_vec()).collect();
        return Ok((rows, Some(data.response().to_vec())));
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(header).from_path(path)?;
    let mut rows = Vec::new();
    for (r, rec) in reader.records().enumerate() {
        let rec = rec?;
        let row: Vec<f64> = rec
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                cell.trim().parse::<f64>().map_err(|_| {
                    anyhow::anyhow!("invalid value {cell:?} at row {}, column {}", r + 1, c)
                })
            })
            .collect::<anyhow::Result<_>>()?;
        rows.push(row);
    }
    Ok((rows, None))
}

fn cmd_predict(args: PredictArgs) -> anyhow::Result<ExitCode> {
    let envelope = ModelEnvelope::load(&args.model)?;
    let predictor = envelope.predictor();
    let (rows, response) =
        load_prediction_rows(&args.data, args.target.as_deref(), !args.no_header)?;
    if let Some(names) = envelope.feature_names() {
        if let Some(first) = rows.first() {
            anyhow::ensure!(
                first.len() == names.len(),
                "model expects {} features, data has {}",
                names.len(),
                first.len()
            );
        }
    }

    let preds: Vec<f64> = rows.iter().map(|r| predictor.predict_row(r)).collect();
    let mut out = String::from("prediction\n");
    for p in &preds {
        out.push_str(&format!("{p}\n"));
    }
    std::fs::write(&args.out, out)?;

    println!("model={}", envelope.label());
    println!("rows={}", preds.len());
    if let Some(y) = response {
        println!("mse={}", isle::mean_squared_error(&y, &preds));
    }
    println!("out={}", args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(args: BenchArgs) -> anyhow::Result<ExitCode> {
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read config {}: {e}", args.config.display());
            return Ok(ExitCode::from(2));
        }
    };
    let config: BenchConfig = match serde_json::from_str(&text) {
        Ok(c) => c,
        Err(e) => {
            // the JSON error carries the parse line and column
            eprintln!("error: invalid config {}: {e}", args.config.display());
            return Ok(ExitCode::from(2));
        }
    };
    if let Err(e) = config.validate() {
        eprintln!("error: invalid config: {e}");
        return Ok(ExitCode::from(2));
    }

    let report = run_bench(&config)?;
    print!("{}", emit_report(&report, ReportFormat::Text));
    if let Some(out) = &args.out {
        std::fs::write(out, emit_report(&report, ReportFormat::Csv))?;
        println!("out={}", out.display());
    }
    Ok(ExitCode::SUCCESS)
}
