//! Sensitivity to β, the extra weight on observed interactions in the
//! reconstruction loss.

use xdvae::data::{build_loo_split, HoldOutPolicy};
use xdvae::eval::evaluate;
use xdvae::synthetic::{generate, SyntheticSpec};
use xdvae::train::train;
use xdvae::{ModelConfig, Variant};

fn main() -> anyhow::Result<()> {
    let data = generate(&SyntheticSpec {
        users: 400,
        ..SyntheticSpec::default()
    })?;
    let (split, training) = build_loo_split(&data.bundle, 0, HoldOutPolicy::Random)?;
    println!("{:>6} {:>8} {:>8}", "beta", "HR@10", "NDCG@10");
    for beta in [0.0, 1.0, 5.0, 15.0, 40.0] {
        let config = ModelConfig {
            beta,
            epochs: 25,
            ..ModelConfig::movielens(Variant::Generic)
        };
        let (params, _) = train(&training, &config)?;
        let r = evaluate(&params, &split, &training, &[10], config.inference)?;
        println!("{beta:>6} {:>8.4} {:>8.4}", r.hr(10).unwrap(), r.ndcg(10).unwrap());
    }
    Ok(())
}
