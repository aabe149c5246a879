//! Saving and restoring a trained model. Parameters are stored as f32, so
//! the round trip is exact from the first save onwards.

use xdvae::data::{build_loo_split, HoldOutPolicy};
use xdvae::eval::evaluate;
use xdvae::synthetic::{generate, SyntheticSpec};
use xdvae::train::{load_checkpoint, save_checkpoint, train};
use xdvae::{ModelConfig, Variant};

fn main() -> anyhow::Result<()> {
    let data = generate(&SyntheticSpec::default())?;
    let (split, training) = build_loo_split(&data.bundle, 0, HoldOutPolicy::Random)?;
    let config = ModelConfig {
        epochs: 5,
        ..ModelConfig::movielens(Variant::Generic)
    };
    let (params, _) = train(&training, &config)?;

    let dir = tempfile::tempdir()?;
    let first = dir.path().join("model.xdv");
    let second = dir.path().join("again.xdv");
    save_checkpoint(&params, &config, &first)?;
    let (restored, restored_config) = load_checkpoint(&first)?;
    save_checkpoint(&restored, &restored_config, &second)?;
    println!("checkpoint size {} bytes", std::fs::metadata(&first)?.len());
    println!("save/load/save byte-identical: {}", std::fs::read(&first)? == std::fs::read(&second)?);

    let a = evaluate(&params, &split, &training, &[10], config.inference)?;
    let b = evaluate(&restored, &split, &training, &[10], config.inference)?;
    println!("HR@10 in memory {:.4}, restored {:.4}", a.hr(10).unwrap(), b.hr(10).unwrap());
    Ok(())
}
