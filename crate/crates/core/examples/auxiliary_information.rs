//! Dense per-user side vectors fed through a sub-encoder into both domain
//! encoders, compared with the same model without them.

use xdvae::data::{build_loo_split, HoldOutPolicy};
use xdvae::eval::evaluate;
use xdvae::model::AuxAttach;
use xdvae::synthetic::{generate, SyntheticSpec};
use xdvae::train::train;
use xdvae::{ModelConfig, Variant};

fn main() -> anyhow::Result<()> {
    let data = generate(&SyntheticSpec {
        users: 400,
        aux_dim: Some(32),
        ..SyntheticSpec::default()
    })?;
    let (split, training) = build_loo_split(&data.bundle, 0, HoldOutPolicy::Random)?;
    let runs = [
        ("generic", Variant::Generic, AuxAttach::Both),
        ("aux (both)", Variant::Aux, AuxAttach::Both),
        ("aux (target)", Variant::Aux, AuxAttach::Target),
    ];
    for (label, variant, attach) in runs {
        let config = ModelConfig {
            epochs: 25,
            aux_attach: attach,
            ..ModelConfig::movielens(variant)
        };
        let (params, _) = train(&training, &config)?;
        let r = evaluate(&params, &split, &training, &[10], config.inference)?;
        println!("{label:<14} HR@10 {:.4}  NDCG@10 {:.4}", r.hr(10).unwrap(), r.ndcg(10).unwrap());
    }
    Ok(())
}
