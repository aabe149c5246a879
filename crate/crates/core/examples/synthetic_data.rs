//! Generates a planted-preference rating log and writes it in MovieLens
//! layout (`ratings.dat`, `movies.dat`, `aux.csv`).
//!
//! cargo run --example synthetic_data -- /tmp/xdvae-synth

use xdvae::synthetic::{generate, SyntheticSpec};

fn main() -> anyhow::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "synthetic-ml".into());
    let data = generate(&SyntheticSpec {
        users: 500,
        aux_dim: Some(32),
        ..SyntheticSpec::default()
    })?;
    data.write_movielens(&out)?;
    let stats = data.bundle.stats();
    println!("{} raw ratings written to {out}", data.interactions.len());
    println!("{}", serde_json::to_string_pretty(&stats)?);
    Ok(())
}
