//! Command-line pipeline: extract labeled datasets from edit scripts, split
//! them, train and inspect models, rank predictions, and evaluate.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use treemend::ast::parse_ast_document;
use treemend::crf::{build_admissible_sets, parse_model, serialize_model, top_k, Model};
use treemend::edit::{load_edit_script, EditScript};
use treemend::features::FeatureVocabulary;
use treemend::learn::{train, TrainConfig};
use treemend::pipeline::{
    baseline_rank, build_baseline, evaluate, parse_baseline, prepare_dataset, serialize_baseline,
    split_dataset, BaselineModel, EvalReport,
};
use treemend::transform::{
    labeling_stats, parse_labeled_example, serialize_labeled_example, TransformLabeling,
};
use treemend::Ast;

#[derive(Parser)]
#[command(name = "treemend", version, about = "Repair-transform mining and prediction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract labeled examples from edit-script documents.
    Extract(ExtractArgs),
    /// Split a labeled dataset into train and test manifests.
    Split(SplitArgs),
    /// Train a model from a training manifest.
    Train(TrainArgs),
    /// Rank transform labelings for a tree under a trained model.
    Predict(PredictArgs),
    /// Build or query the label-frequency baseline.
    #[command(subcommand)]
    Baseline(BaselineCommand),
    /// Evaluate a model or baseline on a test manifest.
    Evaluate(EvaluateArgs),
}

#[derive(Args)]
struct ExtractArgs {
    /// Edit-script JSON files or directories of them.
    #[arg(required = true)]
    scripts: Vec<PathBuf>,
    /// Directory for the labeled-example files.
    #[arg(long)]
    out_dir: PathBuf,
    /// Maximum number of root edit operations per script.
    #[arg(long, default_value_t = 10)]
    threshold: usize,
}

#[derive(Args)]
struct SplitArgs {
    /// Directory of labeled-example files.
    #[arg(long)]
    data_dir: PathBuf,
    /// Output training manifest.
    #[arg(long, default_value = "train.json")]
    out_train: PathBuf,
    /// Output test manifest.
    #[arg(long, default_value = "test.json")]
    out_test: PathBuf,
    /// Test examples per single-transform slice.
    #[arg(long, default_value_t = 300)]
    per_transform: usize,
    /// Test examples from the multiple-transform slice.
    #[arg(long, default_value_t = 1000)]
    multiple: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Default hyperparameters recorded in the training manifest.
    #[command(flatten)]
    hyper: HyperArgs,
}

#[derive(Args, Clone, Copy)]
struct HyperArgs {
    /// Regularization denominator.
    #[arg(long, default_value_t = 500.0)]
    delta2: f64,
    /// Distribution-aware prior magnitude.
    #[arg(long, default_value_t = 0.5)]
    q: f64,
    /// Gradient-evaluation budget.
    #[arg(long, default_value_t = 200)]
    iters: u32,
}

#[derive(Args)]
struct TrainArgs {
    /// Training manifest: {"train": [files...], "config": {...}}.
    #[arg(long)]
    manifest: PathBuf,
    /// Output model file.
    #[arg(long, default_value = "model.json")]
    out: PathBuf,
    /// Output training log (one JSON record per gradient evaluation).
    #[arg(long)]
    log: Option<PathBuf>,
    /// Override the manifest's hyperparameters.
    #[arg(long)]
    delta2: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    iters: Option<u32>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Tree document to predict for.
    #[arg(long)]
    ast: PathBuf,
    /// Number of ranked labelings.
    #[arg(long, default_value_t = 3)]
    k: usize,
}

#[derive(Subcommand)]
enum BaselineCommand {
    /// Estimate baseline tuples from labeled examples.
    Build(BaselineBuildArgs),
    /// Rank labelings for a tree under a baseline file.
    Rank(BaselineRankArgs),
}

#[derive(Args)]
struct BaselineBuildArgs {
    /// Training manifest or directory of labeled examples.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "baseline.json")]
    out: PathBuf,
}

#[derive(Args)]
struct BaselineRankArgs {
    #[arg(long)]
    baseline: PathBuf,
    #[arg(long)]
    ast: PathBuf,
    #[arg(long, default_value_t = 3)]
    k: usize,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Trained model file (mutually exclusive with --baseline).
    #[arg(long, conflicts_with = "baseline")]
    model: Option<PathBuf>,
    /// Baseline file.
    #[arg(long)]
    baseline: Option<PathBuf>,
    /// Test manifest ({"test": [files...]}) or directory of examples.
    #[arg(long)]
    test: PathBuf,
    /// Machine-readable report destination.
    #[arg(long)]
    report: Option<PathBuf>,
}

// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize, Default)]
struct ManifestConfig {
    delta2: Option<f64>,
    q: Option<f64>,
    iters: Option<u32>,
}

#[derive(Serialize, Deserialize)]
struct TrainManifest {
    train: Vec<String>,
    #[serde(default)]
    config: ManifestConfig,
}

#[derive(Serialize, Deserialize)]
struct TestManifest {
    test: Vec<String>,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Extract(args) => extract(args),
        Command::Split(args) => split(args),
        Command::Train(args) => run_train(args),
        Command::Predict(args) => predict(args),
        Command::Baseline(BaselineCommand::Build(args)) => baseline_build(args),
        Command::Baseline(BaselineCommand::Rank(args)) => baseline_rank_cmd(args),
        Command::Evaluate(args) => run_evaluate(args),
    }
}

fn json_files(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .with_context(|| format!("reading {}", path.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    files.sort();
    Ok(files)
}

fn load_script(path: &Path) -> Result<EditScript> {
    let bytes = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let mut script = load_edit_script(&bytes, |rel| {
        let target = dir.join(rel);
        let bytes = fs::read_to_string(&target).map_err(treemend::Error::Io)?;
        parse_ast_document(&bytes)
    })
    .with_context(|| format!("parsing {}", path.display()))?;
    script.before.source_id = path.display().to_string();
    Ok(script)
}

fn load_example(path: &Path) -> Result<TransformLabeling> {
    let bytes = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut example =
        parse_labeled_example(&bytes).with_context(|| format!("parsing {}", path.display()))?;
    example.ast.source_id = path.display().to_string();
    Ok(example)
}

fn load_examples_from(paths: &[PathBuf]) -> Result<Vec<TransformLabeling>> {
    paths.iter().map(|p| load_example(p)).collect()
}

/// Manifest paths resolve relative to the manifest's directory.
fn resolve_manifest_paths(manifest: &Path, entries: &[String]) -> Vec<PathBuf> {
    let base = manifest.parent().unwrap_or(Path::new("."));
    entries
        .iter()
        .map(|entry| {
            let p = PathBuf::from(entry);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        })
        .collect()
}

fn extract(args: ExtractArgs) -> Result<()> {
    let mut script_files = Vec::new();
    for input in &args.scripts {
        script_files.extend(json_files(input)?);
    }
    if script_files.is_empty() {
        bail!("no script files found");
    }
    let scripts: Vec<EditScript> =
        script_files.iter().map(|p| load_script(p)).collect::<Result<_>>()?;
    let (dataset, skipped) = prepare_dataset(&scripts, args.threshold);
    fs::create_dir_all(&args.out_dir)?;
    for (example, source) in dataset.iter().zip(
        script_files
            .iter()
            .enumerate()
            .filter(|(i, _)| !skipped.iter().any(|s| s.index == *i))
            .map(|(_, p)| p),
    ) {
        let stem = source.file_stem().unwrap_or_default().to_string_lossy();
        let out = args.out_dir.join(format!("{stem}.labeled.json"));
        fs::write(&out, serialize_labeled_example(example))?;
    }
    for skip in &skipped {
        log::warn!("skipped {} (#{}): {}", skip.source_id, skip.index, skip.reason);
    }
    let stats = labeling_stats(dataset.iter());
    println!("extracted {} examples ({} skipped)", dataset.len(), skipped.len());
    println!("{:<18} {:>8}", "transform", "count");
    for (t, n) in &stats.per_transform {
        println!("{:<18} {:>8}", t.name(), n);
    }
    println!("{:<18} {:>8}", "single", stats.single);
    println!("{:<18} {:>8}", "multiple", stats.multiple);
    Ok(())
}

fn split(args: SplitArgs) -> Result<()> {
    let files = json_files(&args.data_dir)?;
    let data = load_examples_from(&files)?;
    let (train_idx, test_idx) =
        split_dataset(&data, args.per_transform, args.multiple, args.seed);
    let rel = |idx: &[usize]| -> Vec<String> {
        idx.iter().map(|i| files[*i].display().to_string()).collect()
    };
    let manifest = TrainManifest {
        train: rel(&train_idx),
        config: ManifestConfig {
            delta2: Some(args.hyper.delta2),
            q: Some(args.hyper.q),
            iters: Some(args.hyper.iters),
        },
    };
    fs::write(&args.out_train, serde_json::to_string_pretty(&manifest)?)?;
    fs::write(
        &args.out_test,
        serde_json::to_string_pretty(&TestManifest { test: rel(&test_idx) })?,
    )?;
    println!("train: {} examples -> {}", train_idx.len(), args.out_train.display());
    println!("test:  {} examples -> {}", test_idx.len(), args.out_test.display());
    Ok(())
}

fn run_train(args: TrainArgs) -> Result<()> {
    let bytes = fs::read_to_string(&args.manifest)
        .with_context(|| format!("reading {}", args.manifest.display()))?;
    let manifest: TrainManifest = serde_json::from_str(&bytes)
        .with_context(|| format!("parsing {}", args.manifest.display()))?;
    let paths = resolve_manifest_paths(&args.manifest, &manifest.train);
    let data = load_examples_from(&paths)?;
    if data.is_empty() {
        bail!("training manifest lists no examples");
    }
    let config = TrainConfig {
        delta2: args.delta2.or(manifest.config.delta2).unwrap_or(500.0),
        q: args.q.or(manifest.config.q).unwrap_or(0.5),
        max_grad_evals: args.iters.or(manifest.config.iters).unwrap_or(200),
        ..TrainConfig::default()
    };
    let vocab = FeatureVocabulary::build(&data);
    let admissible = build_admissible_sets(&data);
    println!(
        "training on {} examples, {} features (delta2={}, q={}, iters={})",
        data.len(),
        vocab.feature_count(),
        config.delta2,
        config.q,
        config.max_grad_evals
    );
    let outcome = train(&data, vocab, admissible, config)?;
    fs::write(&args.out, serialize_model(&outcome.model))?;
    if let Some(log_path) = &args.log {
        let mut lines = String::new();
        for record in &outcome.log {
            lines.push_str(&serde_json::to_string(record)?);
            lines.push('\n');
        }
        fs::write(log_path, lines)?;
    }
    if let Some(last) = outcome.log.last() {
        println!(
            "finished after {} evaluations: objective {:.6}, grad norm {:.3e}",
            last.eval, last.objective, last.grad_norm
        );
    }
    println!("model -> {}", args.out.display());
    Ok(())
}

#[derive(Serialize)]
struct RankedPrediction {
    labels: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    probability: Option<f64>,
}

fn ranked_to_json(ranked: &[(TransformLabeling, Option<f64>)]) -> Result<String> {
    let rows: Vec<RankedPrediction> = ranked
        .iter()
        .map(|(labeling, p)| RankedPrediction {
            labels: labeling
                .labels
                .iter()
                .map(|(pos, t)| (pos.to_string(), t.name().to_owned()))
                .collect(),
            probability: *p,
        })
        .collect();
    Ok(serde_json::to_string_pretty(&rows)?)
}

fn predict(args: PredictArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let ast = load_ast(&args.ast)?;
    let ranked = top_k(&ast, &model, args.k)?;
    let rows: Vec<(TransformLabeling, Option<f64>)> =
        ranked.into_iter().map(|(l, p)| (l, Some(p))).collect();
    println!("{}", ranked_to_json(&rows)?);
    Ok(())
}

fn baseline_build(args: BaselineBuildArgs) -> Result<()> {
    let paths = if args.data.extension().is_some_and(|e| e == "json") && args.data.is_file() {
        let bytes = fs::read_to_string(&args.data)?;
        let manifest: TrainManifest = serde_json::from_str(&bytes)
            .with_context(|| format!("parsing {}", args.data.display()))?;
        resolve_manifest_paths(&args.data, &manifest.train)
    } else {
        json_files(&args.data)?
    };
    let data = load_examples_from(&paths)?;
    let baseline = build_baseline(&data);
    fs::write(&args.out, serialize_baseline(&baseline))?;
    println!("baseline with {} tuples -> {}", baseline.tuples.len(), args.out.display());
    Ok(())
}

fn baseline_rank_cmd(args: BaselineRankArgs) -> Result<()> {
    let bytes = fs::read_to_string(&args.baseline)?;
    let baseline: BaselineModel = parse_baseline(&bytes)?;
    let ast = load_ast(&args.ast)?;
    let ranked = baseline_rank(&ast, &baseline, args.k);
    let rows: Vec<(TransformLabeling, Option<f64>)> =
        ranked.into_iter().map(|l| (l, None)).collect();
    println!("{}", ranked_to_json(&rows)?);
    Ok(())
}

fn run_evaluate(args: EvaluateArgs) -> Result<()> {
    let test_paths = if args.test.is_dir() {
        json_files(&args.test)?
    } else {
        let bytes = fs::read_to_string(&args.test)?;
        let manifest: TestManifest = serde_json::from_str(&bytes)
            .with_context(|| format!("parsing {}", args.test.display()))?;
        resolve_manifest_paths(&args.test, &manifest.test)
    };
    let test = load_examples_from(&test_paths)?;
    let report: EvalReport = match (&args.model, &args.baseline) {
        (Some(model_path), None) => {
            let model = load_model(model_path)?;
            let mut predictor = |ast: &Ast, k: usize| {
                Ok(top_k(ast, &model, k)?.into_iter().map(|(l, _)| l).collect())
            };
            evaluate(&test, &mut predictor, &[1, 3])?
        }
        (None, Some(baseline_path)) => {
            let bytes = fs::read_to_string(baseline_path)?;
            let baseline = parse_baseline(&bytes)?;
            let mut predictor =
                |ast: &Ast, k: usize| Ok(baseline_rank(ast, &baseline, k));
            evaluate(&test, &mut predictor, &[1, 3])?
        }
        _ => bail!("exactly one of --model or --baseline is required"),
    };
    print!("{}", report.table());
    if let Some(path) = &args.report {
        fs::write(path, serde_json::to_string_pretty(&report)?)?;
        println!("report -> {}", path.display());
    }
    Ok(())
}

fn load_model(path: &Path) -> Result<Model> {
    let bytes = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_model(&bytes)?)
}

fn load_ast(path: &Path) -> Result<Ast> {
    let bytes = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let ast = parse_ast_document(&bytes)?;
    Ok(ast.with_source_id(path.display().to_string()))
}
