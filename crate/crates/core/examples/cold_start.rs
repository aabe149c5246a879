//! Recommending to users with no target-domain history: a learned map from
//! the source latent stands in for the target latent.

use ndarray::Array2;
use xdvae::data::cold_start_split;
use xdvae::eval::evaluate_cold_start;
use xdvae::model::{predict_batch, InferenceMode};
use xdvae::synthetic::{generate, SyntheticSpec};
use xdvae::train::train_on_users;
use xdvae::{seed, ModelConfig, Variant};

fn main() -> anyhow::Result<()> {
    let data = generate(&SyntheticSpec {
        users: 400,
        ..SyntheticSpec::default()
    })?;
    let bundle = &data.bundle;
    let split = cold_start_split(bundle.m(), 0.1, 0)?;
    println!("{} training users, {} cold users", split.train_users.len(), split.test_users.len());

    let config = ModelConfig {
        epochs: 30,
        ..ModelConfig::movielens(Variant::ColdStart)
    };
    let (params, history) = train_on_users(bundle, &config, &split.train_users)?;
    println!("final mapping loss {:.5}", history.final_loss().map_or(0.0, |l| l.map_loss));

    let report = evaluate_cold_start(&params, &split, bundle, &[5, 10, 20], InferenceMode::Mean)?;
    println!("{} test interactions", report.m_evaluated);
    for row in &report.metrics {
        println!("HR@{:<3} {:.4}  NDCG@{:<3} {:.4}", row.k, row.hr, row.k, row.ndcg);
    }

    // Scores come from the source row alone; the target row is never read.
    let source = bundle.source.dense(&split.test_users);
    let target = bundle.target.dense(&split.test_users);
    let zeros = Array2::zeros(target.raw_dim());
    let rng = || seed::rng(0, "example");
    let a = predict_batch(&params, Some(source.view()), Some(target.view()), None, InferenceMode::Mean, &mut rng())?;
    let b = predict_batch(&params, Some(source.view()), Some(zeros.view()), None, InferenceMode::Mean, &mut rng())?;
    println!("scores identical with the target row zeroed: {}", a == b);
    Ok(())
}
