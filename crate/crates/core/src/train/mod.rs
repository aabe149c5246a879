//! Mini-batch training, checkpoints and the ablation suite.

mod checkpoint;
mod suite;

use std::time::Instant;

use ndarray::Axis;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::DatasetBundle;
use crate::losses::LossBreakdown;
use crate::model::{forward_loss, sample_noise, Batch, ModelConfig, ModelDims, ModelParams, Variant};
use crate::nn::{adam_step, AdamState, ParamSet};
use crate::seed;
use crate::{Error, Result};

pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use suite::{run_variant_suite, SuiteRun, SuiteVariant};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    /// Batch-size-weighted mean over the epoch.
    pub loss: LossBreakdown,
    pub batches: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub seed: u64,
    pub config: ModelConfig,
    pub epochs: Vec<EpochRecord>,
    pub early_stopped_at: Option<usize>,
    /// Sorted bundle indices of every user that appeared in a batch.
    pub users_seen: Vec<usize>,
    pub warnings: Vec<String>,
}

impl TrainHistory {
    pub fn final_loss(&self) -> Option<&LossBreakdown> {
        self.epochs.last().map(|e| &e.loss)
    }
}

/// Model dimensions implied by a bundle.
pub fn dims_for(bundle: &DatasetBundle) -> ModelDims {
    ModelDims {
        n_source: bundle.source.n_items(),
        n_target: bundle.target.n_items(),
        aux_dim: bundle.aux.as_ref().map(|a| a.dim()),
    }
}

/// Trains on every user of `bundle`.
pub fn train(bundle: &DatasetBundle, config: &ModelConfig) -> Result<(ModelParams, TrainHistory)> {
    let users: Vec<usize> = (0..bundle.m()).collect();
    train_on_users(bundle, config, &users)
}

/// Trains on the listed users only (cold-start training excludes test users).
pub fn train_on_users(
    bundle: &DatasetBundle,
    config: &ModelConfig,
    users: &[usize],
) -> Result<(ModelParams, TrainHistory)> {
    config.validate()?;
    if config.variant == Variant::Aux && bundle.aux.is_none() {
        return Err(Error::invalid("aux variant needs a bundle with auxiliary vectors"));
    }
    if let Some(&bad) = users.iter().find(|&&u| u >= bundle.m()) {
        return Err(Error::invalid(format!("user index {bad} out of range")));
    }
    let mut params = ModelParams::init(config, dims_for(bundle))?;
    let mut history = TrainHistory {
        seed: config.seed,
        config: config.clone(),
        epochs: Vec::new(),
        early_stopped_at: None,
        users_seen: Vec::new(),
        warnings: Vec::new(),
    };
    if config.epochs == 0 || users.is_empty() {
        return Ok((params, history));
    }

    let mut adam = AdamState::new(&params, config.lr);
    let mut shuffle_rng = seed::rng(config.seed, seed::SHUFFLE);
    let mut eps_rng = seed::rng(config.seed, seed::EPS);
    let mut seen = vec![false; bundle.m()];
    let mut order = users.to_vec();
    let mut best = f64::INFINITY;
    let mut stale = 0usize;

    for epoch in 1..=config.epochs {
        let started = Instant::now();
        order.shuffle(&mut shuffle_rng);
        let mut epoch_loss = LossBreakdown::default();
        let mut batches = 0;
        for (b, chunk) in order.chunks(config.batch_size).enumerate() {
            let batch = Batch {
                source: bundle.source.dense(chunk),
                target: bundle.target.dense(chunk),
                aux: bundle.aux.as_ref().map(|a| a.values.select(Axis(0), chunk)),
            };
            let noise = sample_noise(&params, chunk.len(), &mut eps_rng);
            let out = forward_loss(&params, config, &batch, &noise, true)?;
            let context = || format!("epoch {epoch}, batch {}", b + 1);
            if !out.loss.is_finite() {
                return Err(Error::NonFinite {
                    what: "loss".into(),
                    context: context(),
                });
            }
            let grads = out.grads.expect("requested gradients");
            if let Some(name) = grads.first_non_finite() {
                return Err(Error::NonFinite {
                    what: format!("gradient {name}"),
                    context: context(),
                });
            }
            adam_step(&mut params, &grads, &mut adam)?;
            epoch_loss.accumulate(&out.loss, chunk.len() as f64 / order.len() as f64);
            for &u in chunk {
                seen[u] = true;
            }
            batches += 1;
        }
        if let Some(name) = params.first_non_finite() {
            return Err(Error::NonFinite {
                what: format!("parameter {name}"),
                context: format!("after epoch {epoch}"),
            });
        }
        let total = epoch_loss.total;
        history.epochs.push(EpochRecord {
            epoch,
            loss: epoch_loss,
            batches,
            seconds: started.elapsed().as_secs_f64(),
        });
        if let Some(rule) = config.early_stop {
            if best - total > rule.min_delta {
                best = total;
                stale = 0;
            } else {
                stale += 1;
                if stale >= rule.patience {
                    history.early_stopped_at = Some(epoch);
                    break;
                }
            }
        }
    }

    let totals: Vec<f64> = history.epochs.iter().map(|e| e.loss.total).collect();
    if totals.len() >= 5 {
        let tail = &totals[totals.len() - 5..];
        if tail[4] > tail[0] {
            history.warnings.push(format!(
                "training loss rose over the final 5 epochs ({:.4} -> {:.4})",
                tail[0], tail[4]
            ));
        }
    }
    history.users_seen = (0..bundle.m()).filter(|&u| seen[u]).collect();
    Ok((params, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{generate, SyntheticSpec};

    fn toy_config(variant: Variant) -> ModelConfig {
        ModelConfig {
            latent_dim: 3,
            source_hidden: vec![5],
            target_hidden: vec![5],
            aux_hidden: vec![4],
            batch_size: 3,
            lr: 0.01,
            epochs: 50,
            seed: 4,
            ..ModelConfig::movielens(variant)
        }
    }

    fn toy_bundle() -> DatasetBundle {
        generate(&SyntheticSpec {
            users: 8,
            source_items: 6,
            target_items: 8,
            aux_dim: Some(4),
            ..SyntheticSpec::default()
        })
        .unwrap()
        .bundle
    }

    #[test]
    fn zero_epochs_returns_init() {
        let b = toy_bundle();
        let cfg = ModelConfig { epochs: 0, ..toy_config(Variant::Generic) };
        let (params, history) = train(&b, &cfg).unwrap();
        assert_eq!(params, ModelParams::init(&cfg, dims_for(&b)).unwrap());
        assert!(history.epochs.is_empty());
    }

    #[test]
    fn toy_loss_decreases_for_every_variant() {
        let b = toy_bundle();
        for variant in Variant::ALL {
            let (_, h) = train(&b, &toy_config(variant)).unwrap();
            assert_eq!(h.epochs.len(), 50);
            let first = h.epochs[0].loss.total;
            let last = h.epochs[49].loss.total;
            assert!(first > last, "{variant}: {first} -> {last}");
            assert_eq!(h.epochs[0].batches, 3, "partial batch kept");
        }
    }

    #[test]
    fn training_is_bit_deterministic() {
        let b = toy_bundle();
        let cfg = ModelConfig { epochs: 5, ..toy_config(Variant::Generic) };
        let (p1, h1) = train(&b, &cfg).unwrap();
        let (p2, h2) = train(&b, &cfg).unwrap();
        assert_eq!(p1, p2);
        let losses = |h: &TrainHistory| h.epochs.iter().map(|e| e.loss).collect::<Vec<_>>();
        assert_eq!(losses(&h1), losses(&h2));
    }

    #[test]
    fn subset_training_only_sees_listed_users() {
        let b = toy_bundle();
        let cfg = ModelConfig { epochs: 2, ..toy_config(Variant::ColdStart) };
        let (_, h) = train_on_users(&b, &cfg, &[0, 2, 5]).unwrap();
        assert_eq!(h.users_seen, vec![0, 2, 5]);
    }

    #[test]
    fn early_stop_triggers_on_plateau() {
        let b = toy_bundle();
        let cfg = ModelConfig {
            epochs: 200,
            early_stop: Some(crate::model::EarlyStop { patience: 3, min_delta: 1e9 }),
            ..toy_config(Variant::Generic)
        };
        let (_, h) = train(&b, &cfg).unwrap();
        assert_eq!(h.early_stopped_at, Some(4));
        assert_eq!(h.epochs.len(), 4);
    }

    #[test]
    fn divergence_is_reported_with_context() {
        let b = toy_bundle();
        let cfg = ModelConfig { lr: 1e300, epochs: 3, ..toy_config(Variant::Generic) };
        match train(&b, &cfg) {
            Err(Error::NonFinite { context, .. }) => assert!(context.contains("epoch"), "{context}"),
            other => panic!("expected a non-finite abort, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn aux_variant_requires_vectors() {
        let mut b = toy_bundle();
        b.aux = None;
        assert!(matches!(train(&b, &toy_config(Variant::Aux)), Err(Error::InvalidArgument(_))));
    }
}
