//! Raw ratings to a persisted bundle: genre split, binarisation, user
//! filtering and a leave-one-out split.
//!
//! cargo run --example prepare_bundle -- [ml-dir] [out-dir]
//!
//! Without arguments a synthetic log is used.

use std::collections::BTreeSet;
use std::path::PathBuf;

use xdvae::cli::format_stats;
use xdvae::data::{
    binarize_and_filter, build_loo_split, load_bundle, load_item_labels, load_ratings, save_bundle,
    split_domains, HoldOutPolicy, RatingFormat,
};
use xdvae::synthetic::{generate, SyntheticSpec};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let tmp = tempfile::tempdir()?;
    let raw = match args.next() {
        Some(dir) => PathBuf::from(dir),
        None => {
            generate(&SyntheticSpec::default())?.write_movielens(tmp.path())?;
            tmp.path().to_path_buf()
        }
    };
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| tmp.path().join("bundle"));

    let log = load_ratings(raw.join("ratings.dat"), RatingFormat::MovielensDat)?;
    let labels = load_item_labels(raw.join("movies.dat"), RatingFormat::MovielensDat)?;
    let source: BTreeSet<String> = ["Action".to_string()].into();
    let target: BTreeSet<String> = ["Comedy", "Drama", "Fantasy", "Romance"].map(String::from).into();
    let (s, t) = split_domains(&log, &labels, &source, &target)?;
    println!("{} ratings: {} source, {} target", log.len(), s.len(), t.len());

    let bundle = binarize_and_filter(&s, &t, 4, 2)?;
    print!("{}", format_stats(&bundle.stats()));

    let (split, training) = build_loo_split(&bundle, 0, HoldOutPolicy::Random)?;
    println!(
        "held out {} target positives; {} remain for training",
        split.users.len(),
        training.stats().target_positives
    );
    save_bundle(&out, &bundle, Some(&split))?;
    let (reloaded, reloaded_split) = load_bundle(&out)?;
    assert_eq!(reloaded, bundle);
    assert_eq!(reloaded_split.as_ref(), Some(&split));
    println!("bundle saved to {} and reloaded intact", out.display());
    Ok(())
}
