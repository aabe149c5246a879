//! How much the linked model leans on target history: score users while
//! keeping only a fraction of their training target positives.

use xdvae::cli::format_reports;
use xdvae::data::{build_loo_split, HoldOutPolicy};
use xdvae::eval::evaluate_degraded;
use xdvae::model::InferenceMode;
use xdvae::synthetic::{generate, SyntheticSpec};
use xdvae::train::train;
use xdvae::{ModelConfig, Variant};

fn main() -> anyhow::Result<()> {
    let data = generate(&SyntheticSpec {
        users: 400,
        target_density: 0.08,
        ..SyntheticSpec::default()
    })?;
    let (split, training) = build_loo_split(&data.bundle, 0, HoldOutPolicy::Random)?;
    let config = ModelConfig {
        epochs: 30,
        ..ModelConfig::movielens(Variant::Generic)
    };
    let (params, _) = train(&training, &config)?;
    let fractions = [1.0, 0.75, 0.5, 0.25, 0.0];
    let reports = evaluate_degraded(&params, &split, &training, &fractions, &[10], InferenceMode::Mean)?;
    print!("{}", format_reports(&reports));
    Ok(())
}
