//! The ablation suite: the linked model against a target-only VAE, a single
//! VAE over both domains, their β = 0 versions and the model without MMD.

use xdvae::cli::format_reports;
use xdvae::data::{build_loo_split, HoldOutPolicy};
use xdvae::eval::evaluate;
use xdvae::synthetic::{generate, SyntheticSpec};
use xdvae::train::{run_variant_suite, SuiteVariant};
use xdvae::{ModelConfig, Variant};

fn main() -> anyhow::Result<()> {
    let data = generate(&SyntheticSpec {
        users: 400,
        ..SyntheticSpec::default()
    })?;
    let (split, training) = build_loo_split(&data.bundle, 0, HoldOutPolicy::Random)?;
    let base = ModelConfig {
        epochs: 25,
        ..ModelConfig::movielens(Variant::Generic)
    };
    let runs = run_variant_suite(&training, &base, &SuiteVariant::ALL)?;
    let mut reports = Vec::new();
    for run in &runs {
        let mut r = evaluate(&run.params, &split, &training, &[10], run.config.inference)?;
        r.variant = run.variant.to_string();
        reports.push(r);
    }
    print!("{}", format_reports(&reports));
    Ok(())
}
