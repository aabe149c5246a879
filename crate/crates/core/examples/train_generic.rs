//! Trains the linked model on a leave-one-out training bundle and prints the
//! per-epoch loss components.

use xdvae::data::{build_loo_split, HoldOutPolicy};
use xdvae::synthetic::{generate, SyntheticSpec};
use xdvae::train::train;
use xdvae::{ModelConfig, Variant};

fn main() -> anyhow::Result<()> {
    let data = generate(&SyntheticSpec::default())?;
    let (_, training) = build_loo_split(&data.bundle, 0, HoldOutPolicy::Random)?;
    let config = ModelConfig {
        epochs: 20,
        ..ModelConfig::movielens(Variant::Generic)
    };
    let (params, history) = train(&training, &config)?;
    println!("epoch      total    recon_S    recon_T     kl_S     kl_T      mmd");
    for e in &history.epochs {
        let l = &e.loss;
        println!(
            "{:>5} {:>10.3} {:>10.3} {:>10.3} {:>8.3} {:>8.3} {:>8.5}",
            e.epoch, l.total, l.recon_source, l.recon_target, l.kl_source, l.kl_target, l.mmd
        );
    }
    for w in &history.warnings {
        println!("warning: {w}");
    }
    println!("{} parameters", xdvae::nn::ParamSet::num_scalars(&params));
    Ok(())
}
