//! Acceptance checks, one printed line per criterion.
//!
//! `acceptance_summary` always runs: it evaluates every criterion that needs
//! no external data and reports the MovieLens-1M criteria as BLOCKED when the
//! data set is missing. The MovieLens criteria themselves are `#[ignore]`d
//! because they train full-size models; run them with
//!
//! ```text
//! XDVAE_ML1M_DIR=/path/to/ml-1m cargo test --release --test acceptance -- --ignored --nocapture
//! ```
//!
//! Without the data they fail with a BLOCKED message rather than pass.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use xdvae::cli::{self, PrepareArgs};
use xdvae::data::{
    apply_split, build_loo_split, cold_start_split, load_bundle, save_bundle, BundleStats,
    DatasetBundle, HoldOutPolicy, LeaveOneOutSplit,
};
use xdvae::eval::{self, hit_ratio, ndcg, rank_test_item, RankOutcome};
use xdvae::model::{forward_loss, predict_batch, sample_noise, Batch, InferenceMode, ModelDims};
use xdvae::nn::{finite_diff_check, ParamSet};
use xdvae::synthetic::{generate, SyntheticSpec};
use xdvae::train::{self, load_checkpoint, save_checkpoint, SuiteVariant};
use xdvae::{seed, ModelConfig, ModelParams, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    Blocked,
    NotRun,
}

struct Line {
    id: u8,
    name: &'static str,
    status: Status,
    detail: String,
}

impl Line {
    fn new(id: u8, name: &'static str, ok: bool, detail: String) -> Self {
        let status = if ok { Status::Pass } else { Status::Fail };
        Line { id, name, status, detail }
    }

    fn print(&self) {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Blocked => "BLOCKED",
            Status::NotRun => "NOT RUN",
        };
        // straight to stdout so the report shows without --nocapture
        let line = format!("[{tag:>7}] {:>2}. {}: {}\n", self.id, self.name, self.detail);
        let _ = std::io::stdout().lock().write_all(line.as_bytes());
    }

    /// Prints, then panics unless the criterion passed.
    fn enforce(self) {
        self.print();
        assert_eq!(self.status, Status::Pass, "criterion {} {}: {}", self.id, self.name, self.detail);
    }
}

// ---------------------------------------------------------------------------
// MovieLens-1M access

const ML1M_ENV: &str = "XDVAE_ML1M_DIR";
const SEEDS: [u64; 3] = [0, 1, 2];

fn ml1m_dir() -> Option<PathBuf> {
    let candidates = [
        std::env::var_os(ML1M_ENV).map(PathBuf::from),
        Some(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/ml-1m")),
    ];
    candidates
        .into_iter()
        .flatten()
        .find(|d| d.join("ratings.dat").is_file() && d.join("movies.dat").is_file())
}

fn blocked_reason() -> String {
    format!("MovieLens-1M not found (set {ML1M_ENV} to a directory with ratings.dat and movies.dat)")
}

fn require_ml1m(id: u8, name: &'static str) -> PathBuf {
    match ml1m_dir() {
        Some(d) => d,
        None => {
            let line = Line {
                id,
                name,
                status: Status::Blocked,
                detail: blocked_reason(),
            };
            line.print();
            panic!("BLOCKED: criterion {id} {name}: {}", blocked_reason());
        }
    }
}

fn prepare_args(ratings_dir: &Path, out: &Path, seed_value: u64) -> PrepareArgs {
    PrepareArgs {
        ratings: ratings_dir.join("ratings.dat"),
        items: ratings_dir.join("movies.dat"),
        format: cli::FormatArg::MovielensDat,
        source_labels: "Action".into(),
        target_labels: "Comedy,Drama,Fantasy,Romance".into(),
        min_rating: 4,
        min_target_positives: 2,
        holdout: cli::HoldOutArg::Random,
        seed: seed_value,
        aux: None,
        aux_dim: xdvae::data::DEFAULT_AUX_DIM,
        out: out.to_path_buf(),
    }
}

struct Ml1m {
    full: DatasetBundle,
    stats: BundleStats,
}

fn ml1m() -> &'static Ml1m {
    static CELL: OnceLock<Ml1m> = OnceLock::new();
    CELL.get_or_init(|| {
        let dir = ml1m_dir().expect("checked by caller");
        let tmp = tempfile::tempdir().unwrap();
        let stats = cli::cmd_prepare(&prepare_args(&dir, tmp.path(), 0), &[]).unwrap();
        let (full, _) = load_bundle(tmp.path()).unwrap();
        Ml1m { full, stats }
    })
}

struct SeedData {
    split: LeaveOneOutSplit,
    training: DatasetBundle,
}

fn seed_data() -> &'static Vec<SeedData> {
    static CELL: OnceLock<Vec<SeedData>> = OnceLock::new();
    CELL.get_or_init(|| {
        SEEDS
            .iter()
            .map(|&s| {
                let (split, training) = build_loo_split(&ml1m().full, s, HoldOutPolicy::Random).unwrap();
                SeedData { split, training }
            })
            .collect()
    })
}

/// HR@10 and NDCG@10 of a configuration on one seed's split.
fn standard_run(config: &ModelConfig, data: &SeedData) -> (ModelParams, f64, f64) {
    let (params, _) = train::train(&data.training, config).unwrap();
    let r = eval::evaluate(&params, &data.split, &data.training, &[10], config.inference).unwrap();
    (params, r.hr(10).unwrap(), r.ndcg(10).unwrap())
}

struct GenericRun {
    params: ModelParams,
    hr: f64,
    ndcg: f64,
}

fn generic_runs() -> &'static Vec<GenericRun> {
    static CELL: OnceLock<Vec<GenericRun>> = OnceLock::new();
    CELL.get_or_init(|| {
        SEEDS
            .iter()
            .zip(seed_data())
            .map(|(&s, data)| {
                let config = ModelConfig {
                    seed: s,
                    ..ModelConfig::movielens(Variant::Generic)
                };
                let (params, hr, ndcg) = standard_run(&config, data);
                GenericRun { params, hr, ndcg }
            })
            .collect()
    })
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.into_iter().collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn mean_hr_for(variant: SuiteVariant) -> f64 {
    if variant == SuiteVariant::Generic {
        return mean(generic_runs().iter().map(|r| r.hr));
    }
    mean(SEEDS.iter().zip(seed_data()).map(|(&s, data)| {
        let base = ModelConfig {
            seed: s,
            ..ModelConfig::movielens(Variant::Generic)
        };
        standard_run(&variant.config(&base), data).1
    }))
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

// ---------------------------------------------------------------------------
// Criteria

fn criterion_1_lines(stats: &BundleStats) -> Line {
    let rel = |x: usize, t: f64| (x as f64 - t).abs() / t <= 0.02;
    let pp = |x: f64, t: f64| (100.0 * x - t).abs() <= 0.5;
    let checks = [
        ("m", rel(stats.users, 1348.0)),
        ("n_S", rel(stats.source_items, 300.0)),
        ("n_T", rel(stats.target_items, 2262.0)),
        ("source interactions", rel(stats.source_positives, 52_158.0)),
        ("target interactions", rel(stats.target_positives, 150_615.0)),
        ("source sparsity", pp(stats.source_sparsity, 52.26)),
        ("target sparsity", pp(stats.target_sparsity, 95.06)),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    Line::new(
        1,
        "MovieLens pipeline statistics",
        failed.is_empty(),
        format!(
            "m={} n_S={} n_T={} |S|={} |T|={} sparsity {:.2}%/{:.2}%{}",
            stats.users,
            stats.source_items,
            stats.target_items,
            stats.source_positives,
            stats.target_positives,
            100.0 * stats.source_sparsity,
            100.0 * stats.target_sparsity,
            if failed.is_empty() {
                String::new()
            } else {
                format!(" (out of tolerance: {})", failed.join(", "))
            }
        ),
    )
}

fn criterion_2() -> Line {
    const M: usize = 8;
    let dims = ModelDims {
        n_source: 6,
        n_target: 8,
        aux_dim: Some(4),
    };
    let mut rng = seed::rng(2, "acceptance-gradcheck");
    let bin = |r: usize, c: usize, rng: &mut rand_chacha::ChaCha8Rng| {
        Array2::from_shape_fn((r, c), |_| if rng.random_bool(0.4) { 1.0 } else { 0.0 })
    };
    let batch = Batch {
        source: bin(M, 6, &mut rng),
        target: bin(M, 8, &mut rng),
        aux: Some(Array2::from_shape_fn((M, 4), |_| rng.sample::<f64, _>(StandardNormal))),
    };
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for variant in Variant::ALL {
        let cfg = ModelConfig {
            latent_dim: 3,
            source_hidden: vec![5],
            target_hidden: vec![5],
            aux_hidden: vec![4],
            seed: 11,
            ..ModelConfig::movielens(variant)
        };
        let mut params = ModelParams::init(&cfg, dims).unwrap();
        for t in params.tensors_mut() {
            for x in t.data.iter_mut() {
                *x += 0.2 * rng.sample::<f64, _>(StandardNormal);
            }
        }
        let noise = sample_noise(&params, M, &mut rng);
        let grads = forward_loss(&params, &cfg, &batch, &noise, true).unwrap().grads.unwrap();
        let loss = |p: &ModelParams| forward_loss(p, &cfg, &batch, &noise, false).unwrap().loss.total;
        // h = 1e-4: the check is rounding-limited below that, not truncation-limited
        let report = finite_diff_check(loss, &params, &grads, 1e-4);
        worst = worst.max(report.max_relative_error);
        detail.push(format!("{variant} {:.1e}", report.max_relative_error));
    }
    Line::new(
        2,
        "gradient correctness",
        worst < 1e-4,
        format!("max relative error {worst:.2e} < 1e-4 ({})", detail.join(", ")),
    )
}

fn brute_rank(scores: &[f64], ids: &[u32], test: usize) -> usize {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(ids[a].cmp(&ids[b])));
    order.iter().position(|&c| c == test).unwrap() + 1
}

fn brute_metrics(ranks: &[usize], k: usize) -> (f64, f64) {
    let mut hits = 0usize;
    let mut gain = 0.0f64;
    for &r in ranks {
        if r <= k {
            hits += 1;
            gain += std::f64::consts::LN_2 / ((r + 1) as f64).ln();
        }
    }
    (hits as f64 / ranks.len() as f64, gain / ranks.len() as f64)
}

fn criterion_3() -> Line {
    let mut rng = seed::rng(3, "acceptance-metrics");
    let mut mismatches = 0usize;
    for _ in 0..1000 {
        let users = rng.random_range(1..40);
        let mut lib_outcomes = Vec::new();
        let mut brute_ranks = Vec::new();
        for user in 0..users {
            let mut ids: Vec<u32> = (0..1000).collect();
            ids.shuffle(&mut rng);
            ids.truncate(100);
            // Coarse scores force plenty of ties.
            let scores: Vec<f64> = (0..100).map(|_| rng.random_range(0..8) as f64).collect();
            let test = rng.random_range(0..100);
            let rank = rank_test_item(&scores, &ids, test).unwrap();
            lib_outcomes.push(RankOutcome { user, rank });
            brute_ranks.push(brute_rank(&scores, &ids, test));
        }
        if lib_outcomes.iter().zip(&brute_ranks).any(|(o, &b)| o.rank != b) {
            mismatches += 1;
            continue;
        }
        for k in [1, 5, 10, 20, 50, 100] {
            let (h, n) = brute_metrics(&brute_ranks, k);
            if hit_ratio(&lib_outcomes, k).to_bits() != h.to_bits() || ndcg(&lib_outcomes, k).to_bits() != n.to_bits() {
                mismatches += 1;
                break;
            }
        }
    }
    const SIMULATED: usize = 100_000;
    let ids: Vec<u32> = (0..100).collect();
    let outcomes: Vec<RankOutcome> = (0..SIMULATED)
        .map(|user| {
            let scores: Vec<f64> = (0..100).map(|_| rng.random::<f64>()).collect();
            let test = rng.random_range(0..100);
            RankOutcome {
                user,
                rank: rank_test_item(&scores, &ids, test).unwrap(),
            }
        })
        .collect();
    let hr10 = hit_ratio(&outcomes, 10);
    Line::new(
        3,
        "metric oracle equivalence",
        mismatches == 0 && within(hr10, 0.10, 0.01),
        format!("{mismatches} mismatches over 1000 outcome sets; random-scorer HR@10 {hr10:.4} over {SIMULATED} users"),
    )
}

fn synthetic_ratings(dir: &Path) {
    let data = generate(&SyntheticSpec {
        users: 120,
        seed: 9,
        ..SyntheticSpec::default()
    })
    .unwrap();
    data.write_movielens(dir).unwrap();
}

fn run_cli(args: &[&str]) {
    let mut argv = vec!["xdvae"];
    argv.extend_from_slice(args);
    assert_eq!(cli::run(argv.clone()), 0, "command failed: {argv:?}");
}

fn same_files(a: &Path, b: &Path, names: &[&str]) -> Vec<String> {
    names
        .iter()
        .filter(|n| fs::read(a.join(n)).unwrap() != fs::read(b.join(n)).unwrap())
        .map(|n| n.to_string())
        .collect()
}

fn pipeline_once(raw: &Path, out: &Path) {
    let s = |p: &Path| p.to_str().unwrap().to_string();
    let bundle = out.join("bundle");
    let ratings = raw.join("ratings.dat");
    let items = raw.join("movies.dat");
    run_cli(&["prepare", "--ratings", &s(&ratings), "--items", &s(&items), "--seed", "4", "--out", &s(&bundle)]);
    for variant in ["generic", "cold-start"] {
        let model_dir = out.join(variant);
        run_cli(&[
            "train", "--bundle", &s(&bundle), "--variant", variant, "--epochs", "3", "--dims", "32",
            "--latent-dim", "8", "--seed", "4", "--out", &s(&model_dir),
        ]);
        let protocol = if variant == "generic" { "degrade" } else { "coldstart" };
        run_cli(&[
            "eval", "--model", &s(&model_dir.join("model.xdv")), "--bundle", &s(&bundle), "--protocol", protocol,
            "--mode", "sample", "--out", &s(&model_dir.join("eval")),
        ]);
    }
    run_cli(&[
        "ablate", "--bundle", &s(&bundle), "--variants", "generic,merged0", "--epochs", "2", "--dims", "16",
        "--latent-dim", "4", "--out", &s(&out.join("ablate")),
    ]);
}

fn criterion_9() -> Line {
    let tmp = tempfile::tempdir().unwrap();
    let raw = tmp.path().join("raw");
    synthetic_ratings(&raw);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    pipeline_once(&raw, &a);
    pipeline_once(&raw, &b);
    let mut differing = Vec::new();
    let bundle_files = ["manifest.json", "source.rows", "target.rows", "split.json"];
    differing.extend(same_files(&a.join("bundle"), &b.join("bundle"), &bundle_files));
    for v in ["generic", "cold-start"] {
        differing.extend(same_files(&a.join(v), &b.join(v), &["model.xdv"]));
        differing.extend(same_files(&a.join(v).join("eval"), &b.join(v).join("eval"), &["metrics.json", "metrics.csv"]));
    }
    differing.extend(same_files(&a.join("ablate"), &b.join("ablate"), &["ablation.json", "ablation.csv"]));
    Line::new(
        9,
        "determinism",
        differing.is_empty(),
        if differing.is_empty() {
            "prepare, train, eval and ablate outputs bit-identical across two runs".into()
        } else {
            format!("differing files: {}", differing.join(", "))
        },
    )
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn criterion_10() -> Line {
    let tmp = tempfile::tempdir().unwrap();
    let data = generate(&SyntheticSpec {
        users: 80,
        aux_dim: Some(6),
        seed: 10,
        ..SyntheticSpec::default()
    })
    .unwrap();
    let (split, training) = build_loo_split(&data.bundle, 10, HoldOutPolicy::Random).unwrap();
    let (first, second) = (tmp.path().join("b1"), tmp.path().join("b2"));
    save_bundle(&first, &data.bundle, Some(&split)).unwrap();
    let (loaded, loaded_split) = load_bundle(&first).unwrap();
    save_bundle(&second, &loaded, loaded_split.as_ref()).unwrap();
    let bundle_ok = dir_bytes(&first) == dir_bytes(&second) && apply_split(&loaded, &split).unwrap() == training;

    let mut ckpt_ok = true;
    for variant in Variant::ALL {
        let cfg = ModelConfig {
            latent_dim: 4,
            source_hidden: vec![8],
            target_hidden: vec![8],
            aux_hidden: vec![5],
            epochs: 1,
            ..ModelConfig::movielens(variant)
        };
        let (params, _) = train::train(&training, &cfg).unwrap();
        let (p1, p2) = (tmp.path().join("m1.xdv"), tmp.path().join("m2.xdv"));
        save_checkpoint(&params, &cfg, &p1).unwrap();
        let (lp, lc) = load_checkpoint(&p1).unwrap();
        save_checkpoint(&lp, &lc, &p2).unwrap();
        ckpt_ok &= fs::read(&p1).unwrap() == fs::read(&p2).unwrap() && lc == cfg;
    }
    Line::new(
        10,
        "format round-trips",
        bundle_ok && ckpt_ok,
        format!(
            "bundle save/load/save identical: {bundle_ok}; checkpoint save/load/save identical for all variants: {ckpt_ok}"
        ),
    )
}

/// The cold-start half of criterion 7 that needs no data: scores do not
/// depend on the user's target row at all.
fn cold_start_invariant() -> Line {
    let data = generate(&SyntheticSpec {
        users: 60,
        seed: 7,
        ..SyntheticSpec::default()
    })
    .unwrap();
    let bundle = &data.bundle;
    let cfg = ModelConfig {
        latent_dim: 6,
        source_hidden: vec![16],
        target_hidden: vec![16],
        epochs: 2,
        ..ModelConfig::movielens(Variant::ColdStart)
    };
    let cold = cold_start_split(bundle.m(), 0.2, 7).unwrap();
    let (params, _) = train::train_on_users(bundle, &cfg, &cold.train_users).unwrap();
    let users = &cold.test_users;
    let source = bundle.source.dense(users);
    let target = bundle.target.dense(users);
    let zeros = Array2::zeros(target.raw_dim());
    let mut identical = true;
    for mode in [InferenceMode::Mean, InferenceMode::Sample] {
        let score = |t: Option<&Array2<f64>>| {
            predict_batch(&params, Some(source.view()), t.map(|t| t.view()), None, mode, &mut seed::rng(1, "inv"))
                .unwrap()
        };
        let with_row = score(Some(&target));
        let zeroed = score(Some(&zeros));
        let absent = score(None);
        identical &= with_row.iter().zip(&zeroed).zip(&absent).all(|((a, b), c)| {
            a.to_bits() == b.to_bits() && a.to_bits() == c.to_bits()
        });
    }
    Line::new(
        7,
        "cold-start invariant (target row zeroed)",
        identical,
        format!("scores bit-identical with the target row present, zeroed or absent: {identical}"),
    )
}

#[test]
fn acceptance_summary() {
    let mut lines = vec![criterion_2(), criterion_3(), cold_start_invariant(), criterion_9(), criterion_10()];
    let have_data = ml1m_dir().is_some();
    if have_data {
        lines.push(criterion_1_lines(&ml1m().stats));
    }
    let blocked: &[(u8, &str)] = if have_data {
        &[]
    } else {
        &[(1, "MovieLens pipeline statistics")]
    };
    for &(id, name) in blocked {
        lines.push(Line {
            id,
            name,
            status: Status::Blocked,
            detail: blocked_reason(),
        });
    }
    let expensive: [(u8, &str); 5] = [
        (4, "MovieLens headline HR@10 / NDCG@10"),
        (5, "ablation ordering"),
        (6, "beta sensitivity"),
        (7, "cold-start HR@10 / NDCG@10"),
        (8, "degradation monotonicity"),
    ];
    for (id, name) in expensive {
        lines.push(Line {
            id,
            name,
            status: if have_data { Status::NotRun } else { Status::Blocked },
            detail: if have_data {
                "trains full-size models; run with --ignored".into()
            } else {
                blocked_reason()
            },
        });
    }
    lines.sort_by_key(|l| l.id);
    let _ = std::io::stdout().lock().write_all(b"\n");
    for l in &lines {
        l.print();
    }
    let failed: Vec<u8> = lines.iter().filter(|l| l.status == Status::Fail).map(|l| l.id).collect();
    assert!(failed.is_empty(), "criteria failed: {failed:?}");
}

#[test]
#[ignore = "needs MovieLens-1M"]
fn criterion_01_movielens_statistics() {
    require_ml1m(1, "MovieLens pipeline statistics");
    criterion_1_lines(&ml1m().stats).enforce();
}

#[test]
#[ignore = "needs MovieLens-1M; trains three full-size models"]
fn criterion_04_movielens_headline() {
    require_ml1m(4, "MovieLens headline HR@10 / NDCG@10");
    let runs = generic_runs();
    let hr = mean(runs.iter().map(|r| r.hr));
    let nd = mean(runs.iter().map(|r| r.ndcg));
    Line::new(
        4,
        "MovieLens headline HR@10 / NDCG@10",
        within(hr, 0.7930, 0.04) && within(nd, 0.5084, 0.04),
        format!("mean over seeds {SEEDS:?}: HR@10 {hr:.4} (0.7930 ± 0.04), NDCG@10 {nd:.4} (0.5084 ± 0.04)"),
    )
    .enforce();
}

#[test]
#[ignore = "needs MovieLens-1M; trains eighteen full-size models"]
fn criterion_05_ablation_ordering() {
    require_ml1m(5, "ablation ordering");
    let hr: Vec<(SuiteVariant, f64)> = SuiteVariant::ALL.iter().map(|&v| (v, mean_hr_for(v))).collect();
    let get = |v: SuiteVariant| hr.iter().find(|x| x.0 == v).unwrap().1;
    let (g, s, s0, m, m0, n) = (
        get(SuiteVariant::Generic),
        get(SuiteVariant::Single),
        get(SuiteVariant::Single0),
        get(SuiteVariant::Merged),
        get(SuiteVariant::Merged0),
        get(SuiteVariant::NoMmd),
    );
    let gain = (g - n) / n;
    let ok = g > s && s > m && s > s0 && m > m0 && (0.0..=0.08).contains(&gain);
    Line::new(
        5,
        "ablation ordering",
        ok,
        format!(
            "HR@10 generic {g:.4} single {s:.4} merged {m:.4} single0 {s0:.4} merged0 {m0:.4} no-mmd {n:.4}; MMD gain {:.2}%",
            100.0 * gain
        ),
    )
    .enforce();
}

#[test]
#[ignore = "needs MovieLens-1M; trains six full-size models"]
fn criterion_06_beta_sensitivity() {
    require_ml1m(6, "beta sensitivity");
    let at15 = mean(generic_runs().iter().map(|r| r.hr));
    let at0 = mean(SEEDS.iter().zip(seed_data()).map(|(&s, data)| {
        let cfg = ModelConfig {
            beta: 0.0,
            seed: s,
            ..ModelConfig::movielens(Variant::Generic)
        };
        standard_run(&cfg, data).1
    }));
    Line::new(
        6,
        "beta sensitivity",
        at15 - at0 >= 0.01,
        format!("HR@10 at beta 15 {at15:.4}, at beta 0 {at0:.4}, margin {:.4} (needs >= 0.01)", at15 - at0),
    )
    .enforce();
}

#[test]
#[ignore = "needs MovieLens-1M; trains three full-size models"]
fn criterion_07_cold_start() {
    require_ml1m(7, "cold-start HR@10 / NDCG@10");
    let full = &ml1m().full;
    let mut hr = Vec::new();
    let mut nd = Vec::new();
    for &s in &SEEDS {
        let cfg = ModelConfig {
            seed: s,
            ..ModelConfig::movielens(Variant::ColdStart)
        };
        let cold = cold_start_split(full.m(), 0.1, s).unwrap();
        let (params, _) = train::train_on_users(full, &cfg, &cold.train_users).unwrap();
        let r = eval::evaluate_cold_start(&params, &cold, full, &[10], cfg.inference).unwrap();
        hr.push(r.hr(10).unwrap());
        nd.push(r.ndcg(10).unwrap());
    }
    let (hr, nd) = (mean(hr), mean(nd));
    Line::new(
        7,
        "cold-start HR@10 / NDCG@10",
        within(hr, 0.5801, 0.05) && within(nd, 0.3236, 0.05),
        format!("mean over seeds {SEEDS:?}: HR@10 {hr:.4} (0.5801 ± 0.05), NDCG@10 {nd:.4} (0.3236 ± 0.05)"),
    )
    .enforce();
}

#[test]
#[ignore = "needs MovieLens-1M; trains three full-size models"]
fn criterion_08_degradation_monotone() {
    require_ml1m(8, "degradation monotonicity");
    let fractions = [1.0, 0.75, 0.5, 0.25, 0.0];
    let mut curve = vec![0.0; fractions.len()];
    for (run, data) in generic_runs().iter().zip(seed_data()) {
        let reports = eval::evaluate_degraded(
            &run.params,
            &data.split,
            &data.training,
            &fractions,
            &[10],
            InferenceMode::Mean,
        )
        .unwrap();
        for (c, r) in curve.iter_mut().zip(&reports) {
            *c += r.hr(10).unwrap() / SEEDS.len() as f64;
        }
    }
    let ok = curve.windows(2).all(|w| w[1] <= w[0] + 0.01);
    let shown: Vec<String> = fractions.iter().zip(&curve).map(|(f, h)| format!("{f}: {h:.4}")).collect();
    Line::new(8, "degradation monotonicity", ok, format!("mean HR@10 by fraction kept {}", shown.join(", ")))
        .enforce();
}
