//! The `xdvae` command-line tool: `prepare | train | eval | ablate`.
//!
//! Every command writes a `run.json` manifest next to its outputs recording
//! the command line, the effective configuration, a SHA-256 fingerprint of
//! the input bundle and the artifacts written. Exit codes: 0 ok, 1 usage,
//! 2 data error, 3 numeric failure.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::data::{
    apply_split, attach_aux, binarize_and_filter, build_loo_split, cold_start_split, load_aux_vectors,
    load_bundle, load_item_labels, load_ratings, parse_label_list, save_bundle, split_domains,
    BundleStats, DatasetBundle, HoldOutPolicy, LeaveOneOutSplit, RatingFormat, BUNDLE_MANIFEST,
};
use crate::eval::{self, parse_ks, MetricsReport};
use crate::model::{AuxAttach, EarlyStop, InferenceMode, ModelConfig, Variant};
use crate::train::{self, load_checkpoint, save_checkpoint, SuiteVariant, TrainHistory};
use crate::{Error, Result};

pub const RUN_MANIFEST: &str = "run.json";

#[derive(Debug, Parser)]
#[command(name = "xdvae", version, about = "Cross-domain recommendation with linked VAEs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a dataset bundle and leave-one-out split from raw ratings.
    Prepare(PrepareArgs),
    /// Train one model variant on a bundle.
    Train(TrainArgs),
    /// Evaluate a checkpoint under one protocol.
    Eval(EvalArgs),
    /// Train and evaluate several variants (or β values) on shared splits.
    Ablate(AblateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    MovielensDat,
    Csv,
}

impl From<FormatArg> for RatingFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::MovielensDat => RatingFormat::MovielensDat,
            FormatArg::Csv => RatingFormat::Csv,
        }
    }
}

#[derive(Debug, Args)]
pub struct PrepareArgs {
    /// Rating log (`ratings.dat` or `user,item,rating,timestamp` CSV).
    #[arg(long)]
    pub ratings: PathBuf,
    /// Item labels (`movies.dat` or `item,labels` CSV).
    #[arg(long)]
    pub items: PathBuf,
    #[arg(long, value_enum, default_value = "movielens-dat")]
    pub format: FormatArg,
    /// Comma- or `|`-separated labels routed to the source domain.
    #[arg(long, default_value = "Action")]
    pub source_labels: String,
    #[arg(long, default_value = "Comedy,Drama,Fantasy,Romance")]
    pub target_labels: String,
    /// Ratings at or above this value count as positives.
    #[arg(long, default_value_t = 4)]
    pub min_rating: u8,
    #[arg(long, default_value_t = 2)]
    pub min_target_positives: usize,
    #[arg(long, value_enum, default_value = "random")]
    pub holdout: HoldOutArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Optional per-user vectors, headerless CSV `user,v1,...,vd`.
    #[arg(long)]
    pub aux: Option<PathBuf>,
    #[arg(long, default_value_t = crate::data::DEFAULT_AUX_DIM)]
    pub aux_dim: usize,
    /// Output bundle directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HoldOutArg {
    Random,
    Latest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    Movielens,
    Amazon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProtocolArg {
    Standard,
    Degrade,
    Coldstart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Mean,
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AttachArg {
    Both,
    Source,
    Target,
}

/// Hyperparameter flags shared by `train` and `ablate`. Unset flags fall back
/// to the `--config` file, then to the preset.
#[derive(Debug, Clone, Default, Args)]
pub struct ModelFlags {
    #[arg(long, value_enum)]
    pub preset: Option<PresetArg>,
    /// JSON file with any subset of the model configuration fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub lambda_reg: Option<f64>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub latent_dim: Option<usize>,
    /// Encoder hidden widths, e.g. `256` or `512,256` (decoders mirror them).
    #[arg(long)]
    pub dims: Option<String>,
    /// Auxiliary sub-encoder widths, e.g. `128`.
    #[arg(long)]
    pub aux_dims: Option<String>,
    #[arg(long, value_enum)]
    pub aux_attach: Option<AttachArg>,
    /// Treat `z_T` as a constant in the cold-start mapping loss.
    #[arg(long)]
    pub map_stop_gradient: bool,
    /// Stop when the epoch loss has not improved by 1e-4 for 10 epochs.
    #[arg(long)]
    pub early_stop: bool,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long, default_value = "generic")]
    pub variant: String,
    #[command(flatten)]
    pub model: ModelFlags,
    /// Test-user fraction for cold-start training.
    #[arg(long, default_value_t = 0.1)]
    pub cold_fraction: f64,
    /// Output directory (model.xdv, history.json, run.json).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Checkpoint written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long, default_value = "5,10,20,50")]
    pub ks: String,
    #[arg(long, value_enum, default_value = "standard")]
    pub protocol: ProtocolArg,
    #[arg(long, default_value = "1.0,0.75,0.5,0.25,0.0")]
    pub fractions: String,
    #[arg(long, default_value_t = 0.1)]
    pub cold_fraction: f64,
    #[arg(long, value_enum, default_value = "mean")]
    pub mode: ModeArg,
    /// Output directory (metrics.json, metrics.csv, run.json).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long, default_value = "generic,single,single0,merged,merged0,no-mmd")]
    pub variants: String,
    /// Train the generic model at each β instead of the variant list.
    #[arg(long)]
    pub beta_sweep: Option<String>,
    #[command(flatten)]
    pub model: ModelFlags,
    #[arg(long, default_value = "5,10,20,50")]
    pub ks: String,
    /// Output directory (ablation.json, ablation.csv, run.json).
    #[arg(long)]
    pub out: PathBuf,
}

/// Provenance record written beside every command's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: Vec<String>,
    pub config_path: Option<PathBuf>,
    pub config: Value,
    pub dataset_fingerprint: Option<String>,
    pub seeds: BTreeMap<String, u64>,
    pub artifacts: Vec<PathBuf>,
}

impl RunManifest {
    fn new(command: &[String]) -> Self {
        RunManifest {
            tool: "xdvae".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.to_vec(),
            config_path: None,
            config: Value::Null,
            dataset_fingerprint: None,
            seeds: BTreeMap::new(),
            artifacts: Vec::new(),
        }
    }

    fn write(&self, dir: &Path) -> Result<()> {
        fs::write(dir.join(RUN_MANIFEST), serde_json::to_vec_pretty(self)?)?;
        Ok(())
    }
}

/// JSON outputs are wrapped with the name of the manifest that produced them.
#[derive(Debug, Serialize, Deserialize)]
pub struct Tagged<T> {
    pub manifest: String,
    #[serde(flatten)]
    pub body: T,
}

fn write_tagged<T: Serialize>(path: &Path, body: T) -> Result<()> {
    let tagged = Tagged {
        manifest: RUN_MANIFEST.into(),
        body,
    };
    fs::write(path, serde_json::to_vec_pretty(&tagged)?)?;
    Ok(())
}

/// SHA-256 over the bundle's files in a fixed order.
pub fn bundle_fingerprint(dir: &Path) -> Result<String> {
    let mut hasher = Sha256::new();
    for name in [BUNDLE_MANIFEST, "source.rows", "target.rows", "aux.f64", "split.json"] {
        let path = dir.join(name);
        if path.exists() {
            hasher.update(name.as_bytes());
            hasher.update(crate::error::read_file(path)?);
        }
    }
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

fn parse_widths(raw: &str) -> Result<Vec<usize>> {
    raw.split([',', '-'])
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse()
                .map_err(|_| Error::invalid(format!("width `{p}` is not an integer")))
        })
        .collect()
}

fn parse_floats(raw: &str, what: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse()
                .map_err(|_| Error::invalid(format!("{what} `{p}` is not a number")))
        })
        .collect()
}

fn merge_json(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                merge_json(b.entry(k).or_insert(Value::Null), v);
            }
        }
        (b, o) => *b = o,
    }
}

/// Preset, then config file, then flags.
pub fn resolve_config(variant: Variant, flags: &ModelFlags) -> Result<ModelConfig> {
    let preset = match flags.preset.unwrap_or(PresetArg::Movielens) {
        PresetArg::Movielens => ModelConfig::movielens(variant),
        PresetArg::Amazon => ModelConfig::amazon(variant),
    };
    let mut value = serde_json::to_value(&preset)?;
    if let Some(path) = &flags.config {
        let file: Value = serde_json::from_slice(&crate::error::read_file(path)?)
            .map_err(|e| Error::invalid(format!("config file {}: {e}", path.display())))?;
        if !file.is_object() {
            return Err(Error::invalid("config file must hold a JSON object"));
        }
        merge_json(&mut value, file);
    }
    let mut config: ModelConfig = serde_json::from_value(value)
        .map_err(|e| Error::invalid(format!("config: {e}")))?;
    config.variant = variant;
    if let Some(v) = flags.beta {
        config.beta = v;
    }
    if let Some(v) = flags.lambda_reg {
        config.lambda_reg = v;
    }
    if let Some(v) = flags.lr {
        config.lr = v;
    }
    if let Some(v) = flags.batch_size {
        config.batch_size = v;
    }
    if let Some(v) = flags.epochs {
        config.epochs = v;
    }
    if let Some(v) = flags.latent_dim {
        config.latent_dim = v;
    }
    if let Some(raw) = &flags.dims {
        let widths = parse_widths(raw)?;
        config.source_hidden = widths.clone();
        config.target_hidden = widths;
    }
    if let Some(raw) = &flags.aux_dims {
        config.aux_hidden = parse_widths(raw)?;
    }
    if let Some(a) = flags.aux_attach {
        config.aux_attach = match a {
            AttachArg::Both => AuxAttach::Both,
            AttachArg::Source => AuxAttach::Source,
            AttachArg::Target => AuxAttach::Target,
        };
    }
    if flags.map_stop_gradient {
        config.map_stop_gradient = true;
    }
    if flags.early_stop {
        config.early_stop = Some(EarlyStop::default());
    }
    if let Some(v) = flags.seed {
        config.seed = v;
    }
    config.validate()?;
    Ok(config)
}

fn load_split_bundle(dir: &Path) -> Result<(DatasetBundle, LeaveOneOutSplit)> {
    let (full, split) = load_bundle(dir)?;
    let split = split.ok_or_else(|| Error::BundleFormat("bundle has no leave-one-out split".into()))?;
    Ok((full, split))
}

fn seeds_for(seed: u64) -> BTreeMap<String, u64> {
    [
        crate::seed::INIT,
        crate::seed::SHUFFLE,
        crate::seed::EPS,
        crate::seed::NEGATIVES,
        crate::seed::SPLIT,
        crate::seed::COLD_SPLIT,
        crate::seed::DEGRADE,
    ]
    .iter()
    .map(|name| (name.to_string(), crate::seed::derive(seed, name)))
    .chain(std::iter::once(("seed".to_string(), seed)))
    .collect()
}

pub fn format_stats(stats: &BundleStats) -> String {
    format!(
        "{:<8} {:>7} {:>8} {:>13} {:>10}\n{:<8} {:>7} {:>8} {:>13} {:>9.2}%\n{:<8} {:>7} {:>8} {:>13} {:>9.2}%\n",
        "domain",
        "users",
        "items",
        "interactions",
        "sparsity",
        "source",
        stats.users,
        stats.source_items,
        stats.source_positives,
        100.0 * stats.source_sparsity,
        "target",
        stats.users,
        stats.target_items,
        stats.target_positives,
        100.0 * stats.target_sparsity,
    )
}

pub fn cmd_prepare(args: &PrepareArgs, argv: &[String]) -> Result<BundleStats> {
    let source_labels = parse_label_list(&args.source_labels);
    let target_labels = parse_label_list(&args.target_labels);
    if source_labels.is_empty() || target_labels.is_empty() {
        return Err(Error::invalid("source and target label sets must be non-empty"));
    }
    let overlap: BTreeSet<_> = source_labels.intersection(&target_labels).collect();
    if !overlap.is_empty() {
        return Err(Error::invalid(format!(
            "labels {overlap:?} appear in both source and target sets"
        )));
    }
    let format = RatingFormat::from(args.format);
    let log = load_ratings(&args.ratings, format)?;
    let labels = load_item_labels(&args.items, format)?;
    let (src, tgt) = split_domains(&log, &labels, &source_labels, &target_labels)?;
    if src.is_empty() || tgt.is_empty() {
        return Err(Error::NoSurvivingUsers);
    }
    let mut bundle = binarize_and_filter(&src, &tgt, args.min_rating, args.min_target_positives)?;
    bundle.provenance.source_labels = source_labels.into_iter().collect();
    bundle.provenance.target_labels = target_labels.into_iter().collect();
    bundle.provenance.seed = Some(args.seed);
    bundle.provenance.dropped_items = {
        let kept = bundle.source.n_items() + bundle.target.n_items();
        let referenced: BTreeSet<&str> = log.iter().map(|it| it.item.as_str()).collect();
        referenced.len().saturating_sub(kept)
    };
    if let Some(path) = &args.aux {
        let vectors = load_aux_vectors(path, args.aux_dim)?;
        attach_aux(&mut bundle, &vectors, args.aux_dim);
    }
    let policy = match args.holdout {
        HoldOutArg::Random => HoldOutPolicy::Random,
        HoldOutArg::Latest => HoldOutPolicy::Latest,
    };
    let (split, _) = build_loo_split(&bundle, args.seed, policy)?;
    save_bundle(&args.out, &bundle, Some(&split))?;

    let mut manifest = RunManifest::new(argv);
    manifest.config = serde_json::json!({
        "ratings": args.ratings,
        "items": args.items,
        "format": format,
        "source_labels": bundle.provenance.source_labels,
        "target_labels": bundle.provenance.target_labels,
        "min_rating": args.min_rating,
        "min_target_positives": args.min_target_positives,
        "holdout": policy,
        "aux": args.aux,
        "aux_dim": args.aux_dim,
    });
    manifest.seeds = seeds_for(args.seed);
    manifest.dataset_fingerprint = Some(bundle_fingerprint(&args.out)?);
    manifest.artifacts = vec![args.out.join(BUNDLE_MANIFEST)];
    manifest.write(&args.out)?;
    Ok(bundle.stats())
}

#[derive(Debug, Serialize)]
struct HistoryFile<'a> {
    history: &'a TrainHistory,
    #[serde(skip_serializing_if = "Option::is_none")]
    cold_split: Option<&'a crate::data::ColdStartSplit>,
}

pub fn cmd_train(args: &TrainArgs, argv: &[String]) -> Result<TrainHistory> {
    let variant: Variant = args.variant.parse()?;
    let config = resolve_config(variant, &args.model)?;
    let (full, split) = load_split_bundle(&args.bundle)?;
    let (params, history, cold) = if variant == Variant::ColdStart {
        let cold = cold_start_split(full.m(), args.cold_fraction, config.seed)?;
        let (p, h) = train::train_on_users(&full, &config, &cold.train_users)?;
        (p, h, Some(cold))
    } else {
        let training = apply_split(&full, &split)?;
        let (p, h) = train::train(&training, &config)?;
        (p, h, None)
    };
    fs::create_dir_all(&args.out)?;
    let model_path = args.out.join("model.xdv");
    let history_path = args.out.join("history.json");
    save_checkpoint(&params, &config, &model_path)?;
    write_tagged(
        &history_path,
        HistoryFile {
            history: &history,
            cold_split: cold.as_ref(),
        },
    )?;
    let mut manifest = RunManifest::new(argv);
    manifest.config_path = args.model.config.clone();
    manifest.config = serde_json::to_value(&config)?;
    manifest.dataset_fingerprint = Some(bundle_fingerprint(&args.bundle)?);
    manifest.seeds = seeds_for(config.seed);
    manifest.artifacts = vec![model_path, history_path];
    manifest.write(&args.out)?;
    Ok(history)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MetricsFile {
    pub reports: Vec<MetricsReport>,
}

pub fn cmd_eval(args: &EvalArgs, argv: &[String]) -> Result<Vec<MetricsReport>> {
    let ks = parse_ks(&args.ks)?;
    let mode = match args.mode {
        ModeArg::Mean => InferenceMode::Mean,
        ModeArg::Sample => InferenceMode::Sample,
    };
    let (params, config) = load_checkpoint(&args.model)?;
    let (full, split) = load_split_bundle(&args.bundle)?;
    let reports = match args.protocol {
        ProtocolArg::Standard => {
            if params.variant == Variant::ColdStart {
                return Err(Error::invalid(
                    "cold-start models are evaluated with --protocol coldstart",
                ));
            }
            vec![eval::evaluate(&params, &split, &apply_split(&full, &split)?, &ks, mode)?]
        }
        ProtocolArg::Degrade => {
            let fractions = parse_floats(&args.fractions, "fraction")?;
            if params.variant == Variant::ColdStart {
                return Err(Error::invalid("degradation protocol does not apply to cold-start models"));
            }
            eval::evaluate_degraded(&params, &split, &apply_split(&full, &split)?, &fractions, &ks, mode)?
        }
        ProtocolArg::Coldstart => {
            let cold = cold_start_split(full.m(), args.cold_fraction, config.seed)?;
            vec![eval::evaluate_cold_start(&params, &cold, &full, &ks, mode)?]
        }
    };
    fs::create_dir_all(&args.out)?;
    let json = args.out.join("metrics.json");
    let csv = args.out.join("metrics.csv");
    write_tagged(&json, MetricsFile { reports: reports.clone() })?;
    eval::write_csv(&reports, &csv)?;
    let mut manifest = RunManifest::new(argv);
    manifest.config = serde_json::to_value(&config)?;
    manifest.dataset_fingerprint = Some(bundle_fingerprint(&args.bundle)?);
    manifest.seeds = seeds_for(config.seed);
    manifest.artifacts = vec![json, csv];
    manifest.write(&args.out)?;
    Ok(reports)
}

/// One trained-and-evaluated arm of an ablation run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AblationRow {
    pub label: String,
    pub beta: f64,
    pub report: MetricsReport,
    pub final_loss: Option<crate::losses::LossBreakdown>,
}

pub fn cmd_ablate(args: &AblateArgs, argv: &[String]) -> Result<Vec<AblationRow>> {
    let ks = parse_ks(&args.ks)?;
    let base = resolve_config(Variant::Generic, &args.model)?;
    let (full, split) = load_split_bundle(&args.bundle)?;
    let training = apply_split(&full, &split)?;
    let arms: Vec<(String, ModelConfig)> = match &args.beta_sweep {
        Some(raw) => parse_floats(raw, "beta")?
            .into_iter()
            .map(|b| (format!("beta={b}"), ModelConfig { beta: b, ..base.clone() }))
            .collect(),
        None => args
            .variants
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                let v: SuiteVariant = s.parse()?;
                Ok((v.to_string(), v.config(&base)))
            })
            .collect::<Result<_>>()?,
    };
    if arms.is_empty() {
        return Err(Error::invalid("nothing to ablate"));
    }
    let mut rows = Vec::new();
    for (label, config) in &arms {
        let (params, history) = train::train(&training, config)?;
        let mut report = eval::evaluate(&params, &split, &training, &ks, config.inference)?;
        report.variant = label.clone();
        rows.push(AblationRow {
            label: label.clone(),
            beta: config.beta,
            report,
            final_loss: history.final_loss().copied(),
        });
    }
    fs::create_dir_all(&args.out)?;
    let json = args.out.join("ablation.json");
    let csv = args.out.join("ablation.csv");
    write_tagged(&json, serde_json::json!({ "rows": rows }))?;
    let reports: Vec<MetricsReport> = rows.iter().map(|r| r.report.clone()).collect();
    eval::write_csv(&reports, &csv)?;
    let mut manifest = RunManifest::new(argv);
    manifest.config_path = args.model.config.clone();
    manifest.config = serde_json::json!({
        "base": base,
        "arms": arms.iter().map(|(l, c)| serde_json::json!({"label": l, "config": c})).collect::<Vec<_>>(),
    });
    manifest.dataset_fingerprint = Some(bundle_fingerprint(&args.bundle)?);
    manifest.seeds = seeds_for(base.seed);
    manifest.artifacts = vec![json, csv];
    manifest.write(&args.out)?;
    Ok(rows)
}

pub fn format_reports(reports: &[MetricsReport]) -> String {
    let mut out = String::new();
    let mut ks: Vec<usize> = reports.iter().flat_map(|r| r.metrics.iter().map(|m| m.k)).collect();
    ks.sort_unstable();
    ks.dedup();
    out.push_str(&format!("{:<18}", "model"));
    for k in &ks {
        out.push_str(&format!(" {:>8} {:>8}", format!("HR@{k}"), format!("NDCG@{k}")));
    }
    out.push('\n');
    for r in reports {
        let label = match r.fraction {
            Some(f) => format!("{} ({f})", r.variant),
            None => r.variant.clone(),
        };
        out.push_str(&format!("{label:<18}"));
        for &k in &ks {
            match (r.hr(k), r.ndcg(k)) {
                (Some(h), Some(n)) => out.push_str(&format!(" {h:>8.4} {n:>8.4}")),
                _ => out.push_str(&format!(" {:>8} {:>8}", "-", "-")),
            }
        }
        out.push('\n');
    }
    out
}

fn dispatch(cli: &Cli, argv: &[String]) -> Result<()> {
    match &cli.command {
        Command::Prepare(a) => {
            let stats = cmd_prepare(a, argv)?;
            print!("{}", format_stats(&stats));
        }
        Command::Train(a) => {
            let h = cmd_train(a, argv)?;
            for w in &h.warnings {
                eprintln!("warning: {w}");
            }
            match h.final_loss() {
                Some(l) => println!(
                    "epochs {}  total {:.4}  recon_S {:.4}  recon_T {:.4}  kl_S {:.4}  kl_T {:.4}  reg {:.4}  mmd {:.6}  map {:.6}",
                    h.epochs.len(),
                    l.total,
                    l.recon_source,
                    l.recon_target,
                    l.kl_source,
                    l.kl_target,
                    l.reg,
                    l.mmd,
                    l.map_loss
                ),
                None => println!("epochs 0  (initial parameters saved)"),
            }
        }
        Command::Eval(a) => print!("{}", format_reports(&cmd_eval(a, argv)?)),
        Command::Ablate(a) => {
            let rows = cmd_ablate(a, argv)?;
            let reports: Vec<MetricsReport> = rows.into_iter().map(|r| r.report).collect();
            print!("{}", format_reports(&reports));
        }
    }
    Ok(())
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let argv: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(&cli, &argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
