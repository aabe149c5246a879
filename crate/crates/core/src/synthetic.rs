//! Seeded generator for small cross-domain datasets with shared user taste.
//!
//! Each user has a latent taste vector used in both domains, so source
//! behaviour carries information about target behaviour. Positives are drawn
//! with Gumbel top-k over `taste · item_factor`, and a few low ratings are
//! mixed in so that binarisation has something to discard.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::data::{attach_aux, binarize_and_filter, DatasetBundle, Interaction};
use crate::seed;
use crate::Result;

pub const SOURCE_GENRE: &str = "Action";
pub const TARGET_GENRES: [&str; 4] = ["Comedy", "Drama", "Fantasy", "Romance"];
/// Assigned to a few extra items that the genre split must drop.
pub const DROPPED_GENRE: &str = "Thriller";

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub users: usize,
    pub source_items: usize,
    pub target_items: usize,
    pub factors: usize,
    /// Mean fraction of source items a user likes.
    pub source_density: f64,
    pub target_density: f64,
    /// Sharpness of preferences; 0 makes choices uniform.
    pub signal: f64,
    pub aux_dim: Option<usize>,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            users: 200,
            source_items: 60,
            target_items: 240,
            factors: 4,
            source_density: 0.2,
            target_density: 0.05,
            signal: 3.0,
            aux_dim: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    /// Raw rating log over both domains plus dropped-genre items.
    pub interactions: Vec<Interaction>,
    pub item_labels: HashMap<String, BTreeSet<String>>,
    pub aux_vectors: Option<HashMap<String, Vec<f64>>>,
    /// The log already split, binarised and filtered (aux attached if any).
    pub bundle: DatasetBundle,
}

fn gumbel_top_k<R: Rng>(scores: &[f64], k: usize, rng: &mut R) -> Vec<usize> {
    let mut keyed: Vec<(f64, usize)> = scores
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let u: f64 = rng.random_range(f64::EPSILON..1.0);
            (s - (-u.ln()).ln(), i)
        })
        .collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    keyed.into_iter().take(k).map(|(_, i)| i).collect()
}

pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticData> {
    let mut rng = seed::rng(spec.seed, "synthetic");
    let f = spec.factors.max(1);
    let scale = spec.signal / (f as f64).sqrt();
    let mut vectors = |n: usize| -> Vec<Vec<f64>> {
        (0..n).map(|_| (0..f).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()).collect()
    };
    let users = vectors(spec.users);
    let source_f = vectors(spec.source_items);
    let target_f = vectors(spec.target_items);

    let mut item_labels = HashMap::new();
    for i in 0..spec.source_items {
        item_labels.insert(format!("s{i}"), BTreeSet::from([SOURCE_GENRE.to_string()]));
    }
    for i in 0..spec.target_items {
        let genre = TARGET_GENRES[i % TARGET_GENRES.len()];
        item_labels.insert(format!("t{i}"), BTreeSet::from([genre.to_string()]));
    }
    item_labels.insert("x0".into(), BTreeSet::from([DROPPED_GENRE.to_string()]));
    item_labels.insert(
        "x1".into(),
        BTreeSet::from([SOURCE_GENRE.to_string(), TARGET_GENRES[0].to_string()]),
    );

    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut interactions = Vec::new();
    let mut clock = 1_000_000i64;
    for (u, taste) in users.iter().enumerate() {
        let user = (u + 1).to_string();
        for (prefix, items, density, min) in [
            ("s", &source_f, spec.source_density, 1usize),
            ("t", &target_f, spec.target_density, 2usize),
        ] {
            let scores: Vec<f64> = items.iter().map(|v| scale * dot(taste, v)).collect();
            let mean = density * items.len() as f64;
            let k = ((mean * rng.random_range(0.5..1.5)).round() as usize)
                .clamp(min.min(items.len()), items.len());
            let mut picked = gumbel_top_k(&scores, k, &mut rng);
            // A couple of disliked items, rated low.
            let lows = gumbel_top_k(&scores.iter().map(|s| -s).collect::<Vec<_>>(), 2, &mut rng);
            picked.sort_unstable();
            for &i in &picked {
                clock += rng.random_range(1..600);
                interactions.push(Interaction {
                    user: user.clone(),
                    item: format!("{prefix}{i}"),
                    rating: rng.random_range(4..=5),
                    timestamp: Some(clock),
                });
            }
            for i in lows.into_iter().filter(|i| picked.binary_search(i).is_err()) {
                clock += rng.random_range(1..600);
                interactions.push(Interaction {
                    user: user.clone(),
                    item: format!("{prefix}{i}"),
                    rating: rng.random_range(1..=3),
                    timestamp: Some(clock),
                });
            }
        }
        if u % 7 == 0 {
            interactions.push(Interaction {
                user: user.clone(),
                item: format!("x{}", u % 2),
                rating: 5,
                timestamp: Some(clock),
            });
        }
    }

    let aux_vectors = spec.aux_dim.map(|d| {
        let proj: Vec<Vec<f64>> = (0..d)
            .map(|_| (0..f).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        let noise = Normal::new(0.0, 0.3).expect("valid sigma");
        users
            .iter()
            .enumerate()
            .map(|(u, taste)| {
                let v = proj.iter().map(|row| dot(row, taste) + noise.sample(&mut rng)).collect();
                ((u + 1).to_string(), v)
            })
            .collect::<HashMap<_, _>>()
    });

    let source_labels = BTreeSet::from([SOURCE_GENRE.to_string()]);
    let target_labels: BTreeSet<String> = TARGET_GENRES.iter().map(|s| s.to_string()).collect();
    let (src, tgt) = crate::data::split_domains(&interactions, &item_labels, &source_labels, &target_labels)?;
    let mut bundle = binarize_and_filter(&src, &tgt, 4, 2)?;
    bundle.provenance.source_labels = source_labels.into_iter().collect();
    bundle.provenance.target_labels = target_labels.into_iter().collect();
    bundle.provenance.seed = Some(spec.seed);
    if let (Some(vectors), Some(d)) = (&aux_vectors, spec.aux_dim) {
        attach_aux(&mut bundle, vectors, d);
    }
    Ok(SyntheticData {
        interactions,
        item_labels,
        aux_vectors,
        bundle,
    })
}

impl SyntheticData {
    /// Writes `ratings.dat`, `movies.dat` and, with aux vectors, `aux.csv`
    /// in MovieLens layout.
    pub fn write_movielens(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let mut ratings = String::new();
        for it in &self.interactions {
            writeln!(ratings, "{}::{}::{}::{}", it.user, it.item, it.rating, it.timestamp.unwrap_or(0)).unwrap();
        }
        fs::write(dir.join("ratings.dat"), ratings)?;
        let mut items: Vec<(&String, &BTreeSet<String>)> = self.item_labels.iter().collect();
        items.sort_by(|a, b| a.0.cmp(b.0));
        let mut movies = String::new();
        for (id, labels) in items {
            let genres: Vec<&str> = labels.iter().map(String::as_str).collect();
            writeln!(movies, "{id}::Item {id} (2000)::{}", genres.join("|")).unwrap();
        }
        fs::write(dir.join("movies.dat"), movies)?;
        if let Some(vectors) = &self.aux_vectors {
            let mut keys: Vec<&String> = vectors.keys().collect();
            keys.sort_by(|a, b| crate::data::natural_cmp(a, b));
            let mut out = String::new();
            for k in keys {
                let vals: Vec<String> = vectors[k].iter().map(|x| format!("{x}")).collect();
                writeln!(out, "{k},{}", vals.join(",")).unwrap();
            }
            fs::write(dir.join("aux.csv"), out)?;
        }
        Ok(())
    }
}
