use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::domains::DatasetBundle;
use crate::seed;
use crate::{Error, Result};

pub const NUM_NEGATIVES: usize = 99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HoldOutPolicy {
    #[default]
    Random,
    /// Largest timestamp; ties go to the lowest item index.
    Latest,
}

impl std::str::FromStr for HoldOutPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(HoldOutPolicy::Random),
            "latest" => Ok(HoldOutPolicy::Latest),
            _ => Err(Error::invalid(format!("unknown hold-out policy `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserHoldOut {
    pub held_out: u32,
    pub negatives: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeaveOneOutSplit {
    pub seed: u64,
    pub policy: HoldOutPolicy,
    /// Indexed like the bundle's user index.
    pub users: Vec<UserHoldOut>,
}

/// Draws `k` distinct items outside `positives`, uniformly without replacement.
pub fn sample_negatives<R: Rng + ?Sized>(
    positives: &[u32],
    n_items: usize,
    k: usize,
    rng: &mut R,
) -> Result<Vec<u32>> {
    let mut taken = vec![false; n_items];
    for &p in positives {
        if let Some(slot) = taken.get_mut(p as usize) {
            *slot = true;
        }
    }
    let pool: Vec<u32> = (0..n_items as u32).filter(|&i| !taken[i as usize]).collect();
    if pool.len() < k {
        return Err(Error::InsufficientNegatives {
            requested: k,
            available: pool.len(),
        });
    }
    Ok(index::sample(rng, pool.len(), k)
        .into_iter()
        .map(|i| pool[i])
        .collect())
}

/// Holds out one target positive per user and freezes 99 negatives for it.
/// Returns the split and a copy of the bundle with the held-out items removed.
pub fn build_loo_split(
    bundle: &DatasetBundle,
    seed_value: u64,
    policy: HoldOutPolicy,
) -> Result<(LeaveOneOutSplit, DatasetBundle)> {
    let target = &bundle.target;
    let mut pick_rng = seed::rng(seed_value, seed::SPLIT);
    let mut neg_rng = seed::rng(seed_value, seed::NEGATIVES);
    let mut users = Vec::with_capacity(target.n_users());
    let mut train_rows = Vec::with_capacity(target.n_users());
    for (u, row) in target.rows.iter().enumerate() {
        if row.len() < 2 {
            return Err(Error::TooFewPositives {
                user: target.user_index[u].clone(),
                count: row.len(),
                required: 2,
            });
        }
        let pos = match policy {
            HoldOutPolicy::Random => pick_rng.random_range(0..row.len()),
            HoldOutPolicy::Latest => {
                let ts = &target.timestamps[u];
                if ts.iter().all(Option::is_none) {
                    return Err(Error::invalid(format!(
                        "user `{}` has no timestamps; `latest` hold-out needs them",
                        target.user_index[u]
                    )));
                }
                // max_by_key keeps the last maximum; scan in reverse for the first.
                let (idx, _) = ts
                    .iter()
                    .enumerate()
                    .rev()
                    .max_by_key(|(_, t)| **t)
                    .expect("row is nonempty");
                idx
            }
        };
        let held_out = row[pos];
        let negatives = sample_negatives(row, target.n_items(), NUM_NEGATIVES, &mut neg_rng)?;
        let mut train = row.clone();
        train.remove(pos);
        train_rows.push(train);
        users.push(UserHoldOut {
            held_out,
            negatives,
        });
    }
    let training = DatasetBundle {
        source: bundle.source.clone(),
        target: target.with_rows(train_rows),
        aux: bundle.aux.clone(),
        provenance: {
            let mut p = bundle.provenance.clone();
            p.seed = Some(seed_value);
            p
        },
    };
    Ok((
        LeaveOneOutSplit {
            seed: seed_value,
            policy,
            users,
        },
        training,
    ))
}

/// Training copy of `full`: each user's held-out target item removed.
pub fn apply_split(full: &DatasetBundle, split: &LeaveOneOutSplit) -> Result<DatasetBundle> {
    if split.users.len() != full.m() {
        return Err(Error::shape(format!(
            "split covers {} users, bundle has {}",
            split.users.len(),
            full.m()
        )));
    }
    let mut rows = Vec::with_capacity(full.m());
    for (u, (row, h)) in full.target.rows.iter().zip(&split.users).enumerate() {
        let pos = row.binary_search(&h.held_out).map_err(|_| {
            Error::invalid(format!(
                "held-out item {} is not a positive of user `{}`",
                h.held_out, full.target.user_index[u]
            ))
        })?;
        let mut train = row.clone();
        train.remove(pos);
        rows.push(train);
    }
    Ok(DatasetBundle {
        source: full.source.clone(),
        target: full.target.with_rows(rows),
        aux: full.aux.clone(),
        provenance: {
            let mut p = full.provenance.clone();
            p.seed = Some(split.seed);
            p
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColdStartSplit {
    pub train_users: Vec<usize>,
    pub test_users: Vec<usize>,
    pub fraction: f64,
    pub seed: u64,
}

/// Random user partition with `round(fraction·m)` test users, kept within
/// `1..m` whenever `m ≥ 2`.
pub fn cold_start_split(m: usize, fraction: f64, seed_value: u64) -> Result<ColdStartSplit> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid(format!(
            "cold-start fraction must lie in (0, 1), got {fraction}"
        )));
    }
    if m < 2 {
        return Err(Error::invalid("cold-start split needs at least two users"));
    }
    let n_test = ((fraction * m as f64).round() as usize).clamp(1, m - 1);
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut seed::rng(seed_value, seed::COLD_SPLIT));
    let mut test_users = order[..n_test].to_vec();
    let mut train_users = order[n_test..].to_vec();
    test_users.sort_unstable();
    train_users.sort_unstable();
    Ok(ColdStartSplit {
        train_users,
        test_users,
        fraction,
        seed: seed_value,
    })
}

/// Keeps `⌈fraction_kept·|row|⌉` uniformly chosen positives per row.
/// Fractions outside `[0, 1]` are clamped.
pub fn degrade_target_rows(rows: &[Vec<u32>], fraction_kept: f64, seed_value: u64) -> Vec<Vec<u32>> {
    let f = fraction_kept.clamp(0.0, 1.0);
    if f == 1.0 {
        return rows.to_vec();
    }
    let mut rng = seed::rng(seed_value, seed::DEGRADE);
    rows.iter()
        .map(|row| {
            // Tolerance guards products like 0.1·30 = 3.0000000000000004.
            let keep = ((f * row.len() as f64) - 1e-9).ceil().max(0.0) as usize;
            let keep = keep.min(row.len());
            let mut kept: Vec<u32> = index::sample(&mut rng, row.len(), keep)
                .into_iter()
                .map(|i| row[i])
                .collect();
            kept.sort_unstable();
            kept
        })
        .collect()
}
