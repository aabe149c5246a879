//! Compares analytic gradients of every variant against central finite
//! differences on a tiny instance with frozen reparametrisation noise.

use ndarray::Array2;
use rand::Rng;
use xdvae::model::{forward_loss, sample_noise, Batch, ModelDims};
use xdvae::nn::{finite_diff_check, ParamSet};
use xdvae::{seed, ModelConfig, ModelParams, Variant};

fn main() -> anyhow::Result<()> {
    let users = 8;
    let dims = ModelDims {
        n_source: 6,
        n_target: 8,
        aux_dim: Some(4),
    };
    let mut rng = seed::rng(0, "gradient-check-example");
    let mut binary = |c: usize| Array2::from_shape_fn((users, c), |_| f64::from(u8::from(rng.random_bool(0.4))));
    let batch = Batch {
        source: binary(6),
        target: binary(8),
        aux: Some(Array2::from_shape_fn((users, 4), |(i, j)| ((i * 4 + j) as f64).sin())),
    };
    for variant in Variant::ALL {
        let config = ModelConfig {
            latent_dim: 3,
            source_hidden: vec![5],
            target_hidden: vec![5],
            aux_hidden: vec![4],
            ..ModelConfig::movielens(variant)
        };
        let params = ModelParams::init(&config, dims)?;
        let noise = sample_noise(&params, users, &mut seed::rng(1, "noise"));
        let grads = forward_loss(&params, &config, &batch, &noise, true)?
            .grads
            .expect("gradients requested");
        let loss = |p: &ModelParams| forward_loss(p, &config, &batch, &noise, false).map(|o| o.loss.total).unwrap();
        let report = finite_diff_check(loss, &params, &grads, 1e-4);
        println!(
            "{:<10} {:>4} parameters  max relative error {:.2e} ({})",
            variant.as_str(),
            params.num_scalars(),
            report.max_relative_error,
            report.worst_tensor
        );
        anyhow::ensure!(report.max_relative_error < 1e-4, "{variant}: gradient mismatch");
    }
    Ok(())
}
