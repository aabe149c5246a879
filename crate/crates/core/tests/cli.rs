//! End-to-end runs of the `prepare | train | eval | ablate` commands.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;
use xdvae::cli::{self, RunManifest};
use xdvae::data::load_bundle;
use xdvae::synthetic::{generate, SyntheticSpec};
use xdvae::train::load_checkpoint;

fn s(p: &Path) -> String {
    p.to_str().unwrap().to_string()
}

fn run(args: &[&str]) -> i32 {
    let mut argv = vec!["xdvae"];
    argv.extend_from_slice(args);
    cli::run(argv)
}

struct Fixture {
    _tmp: tempfile::TempDir,
    root: PathBuf,
    bundle: PathBuf,
}

fn prepared() -> Fixture {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().to_path_buf();
    let data = generate(&SyntheticSpec {
        users: 90,
        aux_dim: Some(8),
        seed: 31,
        ..SyntheticSpec::default()
    })
    .unwrap();
    data.write_movielens(root.join("raw")).unwrap();
    let bundle = root.join("bundle");
    let code = run(&[
        "prepare",
        "--ratings",
        &s(&root.join("raw/ratings.dat")),
        "--items",
        &s(&root.join("raw/movies.dat")),
        "--aux",
        &s(&root.join("raw/aux.csv")),
        "--aux-dim",
        "8",
        "--holdout",
        "latest",
        "--out",
        &s(&bundle),
    ]);
    assert_eq!(code, 0);
    Fixture { _tmp: tmp, root, bundle }
}

fn read_json(p: &Path) -> Value {
    serde_json::from_slice(&fs::read(p).unwrap()).unwrap()
}

const SMALL: [&str; 6] = ["--epochs", "2", "--dims", "16", "--latent-dim", "4"];

#[test]
fn prepare_train_eval_round_trip() {
    let f = prepared();
    let (bundle, split) = load_bundle(&f.bundle).unwrap();
    assert!(split.is_some());
    assert_eq!(bundle.aux.as_ref().unwrap().dim(), 8);

    let model_dir = f.root.join("aux-model");
    let b = s(&f.bundle);
    let out = s(&model_dir);
    let mut args = vec!["train", "--bundle", &b, "--variant", "aux"];
    args.extend_from_slice(&SMALL);
    args.extend_from_slice(&["--beta", "5", "--out", &out]);
    assert_eq!(run(&args), 0);

    let (params, config) = load_checkpoint(model_dir.join("model.xdv")).unwrap();
    assert_eq!(config.beta, 5.0);
    assert_eq!(config.epochs, 2);
    assert_eq!(params.latent_dim(), 4);

    let manifest: RunManifest = serde_json::from_slice(&fs::read(model_dir.join("run.json")).unwrap()).unwrap();
    assert_eq!(manifest.command[1], "train");
    assert_eq!(manifest.config["beta"], 5.0);
    assert_eq!(manifest.dataset_fingerprint, Some(cli::bundle_fingerprint(&f.bundle).unwrap()));
    assert_eq!(manifest.artifacts.len(), 2);
    let history = read_json(&model_dir.join("history.json"));
    assert_eq!(history["manifest"], "run.json");
    assert_eq!(history["history"]["epochs"].as_array().unwrap().len(), 2);

    let eval_dir = f.root.join("aux-eval");
    assert_eq!(
        run(&[
            "eval",
            "--model",
            &s(&model_dir.join("model.xdv")),
            "--bundle",
            &s(&f.bundle),
            "--ks",
            "1,10",
            "--out",
            &s(&eval_dir),
        ]),
        0
    );
    let metrics = read_json(&eval_dir.join("metrics.json"));
    let report = &metrics["reports"][0];
    assert_eq!(report["variant"], "aux");
    assert_eq!(report["m_evaluated"], bundle.m());
    let csv = fs::read_to_string(eval_dir.join("metrics.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "variant,protocol,K,HR,NDCG,m,seed");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("aux,standard,1,"));
}

#[test]
fn cold_start_and_degradation_protocols() {
    let f = prepared();
    let b = s(&f.bundle);
    let cold = s(&f.root.join("cold"));
    let mut args = vec!["train", "--bundle", &b, "--variant", "cold-start", "--cold-fraction", "0.2", "--out", &cold];
    args.extend_from_slice(&SMALL);
    assert_eq!(run(&args), 0);
    let history = read_json(&f.root.join("cold/history.json"));
    let test_users = history["cold_split"]["test_users"].as_array().unwrap().len();
    assert_eq!(test_users, 18);
    assert_eq!(history["history"]["users_seen"], history["cold_split"]["train_users"]);
    assert_eq!(history["history"]["users_seen"].as_array().unwrap().len(), 72);

    let model = s(&f.root.join("cold/model.xdv"));
    let out = s(&f.root.join("cold-eval"));
    // a cold-start model has no standard or degradation protocol
    assert_eq!(run(&["eval", "--model", &model, "--bundle", &b, "--out", &out]), 1);
    assert_eq!(run(&["eval", "--model", &model, "--bundle", &b, "--protocol", "degrade", "--out", &out]), 1);
    assert_eq!(
        run(&["eval", "--model", &model, "--bundle", &b, "--protocol", "coldstart", "--cold-fraction", "0.2", "--out", &out]),
        0
    );
    let m = read_json(&f.root.join("cold-eval/metrics.json"));
    assert_eq!(m["reports"][0]["protocol"], "cold-start");
    assert!(m["reports"][0]["m_evaluated"].as_u64().unwrap() as usize >= 2 * test_users);

    let gen = s(&f.root.join("gen"));
    let mut args = vec!["train", "--bundle", &b, "--out", &gen];
    args.extend_from_slice(&SMALL);
    assert_eq!(run(&args), 0);
    let out = s(&f.root.join("deg"));
    let model = s(&f.root.join("gen/model.xdv"));
    assert_eq!(
        run(&["eval", "--model", &model, "--bundle", &b, "--protocol", "degrade", "--fractions", "1,0.5,0", "--out", &out]),
        0
    );
    let csv = fs::read_to_string(f.root.join("deg/metrics.csv")).unwrap();
    assert!(csv.contains("generic,degrade@0.5,10,"));
    assert_eq!(csv.lines().count(), 1 + 3 * 4);
}

#[test]
fn ablate_writes_one_row_per_arm() {
    let f = prepared();
    let b = s(&f.bundle);
    let out = s(&f.root.join("abl"));
    let mut args = vec!["ablate", "--bundle", &b, "--ks", "10", "--out", &out];
    args.extend_from_slice(&SMALL);
    assert_eq!(run(&args), 0);
    let rows = read_json(&f.root.join("abl/ablation.json"));
    let labels: Vec<&str> = rows["rows"].as_array().unwrap().iter().map(|r| r["label"].as_str().unwrap()).collect();
    assert_eq!(labels, ["generic", "single", "single0", "merged", "merged0", "no-mmd"]);
    assert_eq!(rows["rows"][2]["beta"], 0.0);

    let out = s(&f.root.join("sweep"));
    let mut args = vec!["ablate", "--bundle", &b, "--beta-sweep", "0,15", "--ks", "10", "--out", &out];
    args.extend_from_slice(&SMALL);
    assert_eq!(run(&args), 0);
    let rows = read_json(&f.root.join("sweep/ablation.json"));
    assert_eq!(rows["rows"].as_array().unwrap().len(), 2);
    assert_eq!(rows["rows"][1]["beta"], 15.0);
}

#[test]
fn exit_codes() {
    let f = prepared();
    let b = s(&f.bundle);
    let out = s(&f.root.join("x"));
    assert_eq!(run(&["--help"]), 0);
    assert_eq!(run(&["train", "--bundle", &b]), 1);
    assert_eq!(run(&["train", "--bundle", &b, "--variant", "bogus", "--out", &out]), 1);
    // overlapping labels are refused before any file is read
    assert_eq!(
        run(&["prepare", "--ratings", "/missing", "--items", "/missing", "--source-labels", "Drama", "--out", &out]),
        1
    );
    assert_eq!(run(&["prepare", "--ratings", "/missing", "--items", "/missing", "--out", &out]), 2);
    assert_eq!(run(&["eval", "--model", "/missing.xdv", "--bundle", &b, "--out", &out]), 2);
    let mut args = vec!["train", "--bundle", &b, "--lr", "1e300", "--out", &out];
    args.extend_from_slice(&SMALL);
    assert_eq!(run(&args), 3);
}
