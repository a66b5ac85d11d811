//! `hemoprior` command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input or configuration, 2 a computation
//! that is undefined or degenerate on the given data.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "hemoprior",
    version,
    about = "Analytic blood priors, video-level splits and evaluation statistics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute prior maps and the five-channel input for every image in a directory.
    Prior(PriorArgs),
    /// Assign source videos to train/val/test and copy frames into split folders.
    Split(SplitArgs),
    /// Evaluate one prediction dump.
    Eval(EvalArgs),
    /// Paired comparison of two prediction dumps on the same frames.
    Compare(CompareArgs),
    /// Aggregate per-seed reports into a cross-seed table.
    Sweep(SweepArgs),
    /// Compare best and last checkpoints across training arms.
    Audit(AuditArgs),
    /// Training-free blood vs normal separation by the centre-area prior mean.
    Zeroshot(ZeroshotArgs),
}

#[derive(Args, Debug, Serialize)]
struct PriorParamArgs {
    /// Sigmoid slope (defaults: 4 for v1, 6 for v2).
    #[arg(long)]
    alpha: Option<f64>,
    /// Red-green pivot for v2.
    #[arg(long)]
    pivot: Option<f64>,
    /// Fluence length as a fraction of the frame diagonal.
    #[arg(long = "lambda-scale")]
    lambda_scale: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Percentile rule for the per-frame clip: linear or nearest-rank.
    #[arg(long, default_value = "linear")]
    percentile: String,
}

#[derive(Args, Debug, Serialize)]
struct PriorArgs {
    #[arg(long, env = "HEMOPRIOR_FRAMES")]
    input: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
    #[arg(
        long = "physics_prior_version",
        alias = "physics-prior-version",
        default_value = "v1"
    )]
    physics_prior_version: String,
    #[command(flatten)]
    params: PriorParamArgs,
}

#[derive(Args, Debug, Serialize)]
struct SplitArgs {
    /// Directory of `<class name>/<video>_<frame>.<ext>` images.
    #[arg(long, env = "KVASIR_RAW")]
    source: PathBuf,
    #[arg(long, env = "KVASIR_DATA")]
    #[serde(skip)]
    out: PathBuf,
    #[arg(long, default_value = "0.70,0.15,0.15")]
    ratios: String,
    /// Only write the manifest and reports; do not copy frames.
    #[arg(long)]
    dry_run: bool,
    /// Defaults to `<out>/split_manifest.json`.
    #[arg(long = "manifest-out")]
    #[serde(skip)]
    manifest_out: Option<PathBuf>,
    /// Defaults to `<out>/split_fingerprint.txt`.
    #[arg(long = "fingerprint-out")]
    #[serde(skip)]
    fingerprint_out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct EvalArgs {
    /// CSV or JSONL prediction dump.
    #[arg(long)]
    pred: PathBuf,
    #[arg(long = "score-kind")]
    score_kind: String,
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
    /// `default` (11 evaluable classes), `all`, or a list of class names / indices.
    #[arg(long, default_value = "default")]
    evaluable: String,
    #[arg(long, default_value = "json,csv,md,svg")]
    formats: String,
    /// Bootstrap resamples for per-class AUC intervals; 0 disables them.
    #[arg(long, default_value_t = 1000)]
    bootstrap: usize,
    #[arg(long = "bootstrap-seed", default_value_t = 0)]
    bootstrap_seed: u64,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// `class` (preserve class counts) or `uniform`.
    #[arg(long, default_value = "class")]
    stratify: String,
    /// Arm label recorded for `sweep`.
    #[arg(long)]
    arm: Option<String>,
    /// Training-seed label recorded for `sweep`.
    #[arg(long)]
    seed: Option<u64>,
    /// Split fingerprint (hex) or a file containing it.
    #[arg(long)]
    fingerprint: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct CompareArgs {
    #[arg(long = "pred-a")]
    pred_a: PathBuf,
    #[arg(long = "pred-b")]
    pred_b: PathBuf,
    #[arg(long = "score-kind", default_value = "logits")]
    score_kind: String,
    /// Score kind of the second dump when it differs from the first.
    #[arg(long = "score-kind-b")]
    score_kind_b: Option<String>,
    #[arg(long = "bonferroni-m", default_value_t = 11)]
    bonferroni_m: usize,
    #[arg(long, default_value = "default")]
    evaluable: String,
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
    #[arg(long, default_value = "json,csv,md")]
    formats: String,
    #[arg(long)]
    fingerprint: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct SweepArgs {
    /// Directory of per-seed eval reports and/or seed summary files.
    #[arg(long)]
    reports: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
    #[arg(long, default_value = "macro_auc_evaluable")]
    metric: String,
    #[arg(long, default_value = "rgb")]
    baseline: String,
    #[arg(long, default_value = "json,csv,md")]
    formats: String,
}

#[derive(Args, Debug, Serialize)]
struct AuditArgs {
    #[arg(long)]
    best: PathBuf,
    #[arg(long)]
    last: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
    #[arg(long, default_value = "json,csv,md")]
    formats: String,
}

#[derive(Args, Debug, Serialize)]
struct ZeroshotArgs {
    #[arg(long)]
    blood: PathBuf,
    #[arg(long)]
    normal: PathBuf,
    /// v1, v2 or both.
    #[arg(long, default_value = "both")]
    version: String,
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
    #[command(flatten)]
    params: PriorParamArgs,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use hemoprior::Error;
    match err.downcast_ref::<Error>() {
        Some(Error::Undefined(_) | Error::Degenerate(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Prior(a) => commands::prior(a),
        Command::Split(a) => commands::split(a),
        Command::Eval(a) => commands::eval(a),
        Command::Compare(a) => commands::compare(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Audit(a) => commands::audit(a),
        Command::Zeroshot(a) => commands::zeroshot(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
