use ndarray::{Array2, Axis};

use super::metrics::{hit_ratio, ndcg, rank_among, rank_test_item, RankOutcome};
use super::report::{MetricRow, MetricsReport};
use crate::data::{
    degrade_target_rows, dense_rows, sample_negatives, AuxMatrix, ColdStartSplit, DatasetBundle,
    LeaveOneOutSplit, NUM_NEGATIVES,
};
use crate::model::{predict_batch, InferenceMode, ModelParams, Variant};
use crate::seed;
use crate::{Error, Result};

pub const DEFAULT_KS: [usize; 4] = [5, 10, 20, 50];
const SCORE_CHUNK: usize = 256;

fn check_dims(params: &ModelParams, bundle: &DatasetBundle) -> Result<()> {
    let d = params.dims;
    if d.n_source != bundle.source.n_items() || d.n_target != bundle.target.n_items() {
        return Err(Error::shape(format!(
            "model expects {}x{} items, bundle has {}x{}",
            d.n_source,
            d.n_target,
            bundle.source.n_items(),
            bundle.target.n_items()
        )));
    }
    if params.variant == Variant::Aux && bundle.aux.is_none() {
        return Err(Error::invalid("aux model needs a bundle with auxiliary vectors"));
    }
    Ok(())
}

/// Target scores for `users`, computed in chunks. `target_rows = None`
/// scores from the source side only.
fn score_users(
    params: &ModelParams,
    bundle: &DatasetBundle,
    target_rows: Option<&[Vec<u32>]>,
    users: &[usize],
    mode: InferenceMode,
    seed_value: u64,
) -> Result<Array2<f64>> {
    let mut rng = seed::rng(seed_value, seed::EVAL_EPS);
    let n_t = bundle.target.n_items();
    let mut out = Array2::zeros((users.len(), n_t));
    for (c, chunk) in users.chunks(SCORE_CHUNK).enumerate() {
        let source = bundle.source.dense(chunk);
        let target = target_rows.map(|rows| dense_rows(rows, chunk, n_t));
        let aux = bundle.aux.as_ref().map(|a: &AuxMatrix| a.values.select(Axis(0), chunk));
        let scores = predict_batch(
            params,
            Some(source.view()),
            target.as_ref().map(|t| t.view()),
            aux.as_ref().map(|a| a.view()),
            mode,
            &mut rng,
        )?;
        let start = c * SCORE_CHUNK;
        out.slice_mut(ndarray::s![start..start + chunk.len(), ..]).assign(&scores);
    }
    Ok(out)
}

/// Ranks each user's held-out item against its frozen negatives, feeding the
/// model the given target rows.
pub fn rank_users(
    params: &ModelParams,
    split: &LeaveOneOutSplit,
    bundle: &DatasetBundle,
    target_rows: &[Vec<u32>],
    mode: InferenceMode,
    seed_value: u64,
) -> Result<Vec<RankOutcome>> {
    check_dims(params, bundle)?;
    if split.users.len() != bundle.m() || target_rows.len() != bundle.m() {
        return Err(Error::shape("split, rows and bundle cover different user counts"));
    }
    let users: Vec<usize> = (0..bundle.m()).collect();
    let scores = score_users(params, bundle, Some(target_rows), &users, mode, seed_value)?;
    split
        .users
        .iter()
        .enumerate()
        .map(|(u, h)| {
            let ids: Vec<u32> = std::iter::once(h.held_out).chain(h.negatives.iter().copied()).collect();
            let row = scores.row(u);
            let cand: Vec<f64> = ids.iter().map(|&i| row[i as usize]).collect();
            Ok(RankOutcome {
                user: u,
                rank: rank_test_item(&cand, &ids, 0)?,
            })
        })
        .collect()
}

fn report(
    params: &ModelParams,
    protocol: &str,
    fraction: Option<f64>,
    seed_value: u64,
    outcomes: &[RankOutcome],
    ks: &[usize],
) -> MetricsReport {
    MetricsReport {
        variant: params.variant.to_string(),
        protocol: protocol.into(),
        fraction,
        seed: seed_value,
        m_evaluated: outcomes.len(),
        metrics: ks
            .iter()
            .map(|&k| MetricRow {
                k,
                hr: hit_ratio(outcomes, k),
                ndcg: ndcg(outcomes, k),
            })
            .collect(),
    }
}

/// Standard leave-one-out evaluation. `bundle` holds the training rows (held-out
/// items removed).
pub fn evaluate(
    params: &ModelParams,
    split: &LeaveOneOutSplit,
    bundle: &DatasetBundle,
    ks: &[usize],
    mode: InferenceMode,
) -> Result<MetricsReport> {
    let outcomes = rank_users(params, split, bundle, &bundle.target.rows, mode, split.seed)?;
    Ok(report(params, "standard", None, split.seed, &outcomes, ks))
}

/// One report per fraction of training target positives kept at scoring time.
pub fn evaluate_degraded(
    params: &ModelParams,
    split: &LeaveOneOutSplit,
    bundle: &DatasetBundle,
    fractions: &[f64],
    ks: &[usize],
    mode: InferenceMode,
) -> Result<Vec<MetricsReport>> {
    if !params.variant.uses_target_input() {
        return Err(Error::invalid(format!(
            "degradation protocol needs a model that reads target rows, got {}",
            params.variant
        )));
    }
    fractions
        .iter()
        .map(|&f| {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::invalid(format!("fraction {f} outside [0, 1]")));
            }
            let rows = degrade_target_rows(&bundle.target.rows, f, split.seed);
            let outcomes = rank_users(params, split, bundle, &rows, mode, split.seed)?;
            Ok(report(params, "degrade", Some(f), split.seed, &outcomes, ks))
        })
        .collect()
}

/// Cold-start protocol: every target positive of every test user is ranked
/// against 99 fresh negatives, scoring from the source row alone. Metrics are
/// averaged over interactions.
pub fn evaluate_cold_start(
    params: &ModelParams,
    split: &ColdStartSplit,
    bundle: &DatasetBundle,
    ks: &[usize],
    mode: InferenceMode,
) -> Result<MetricsReport> {
    if params.variant != Variant::ColdStart {
        return Err(Error::invalid(format!(
            "cold-start protocol needs a cold-start model, got {}",
            params.variant
        )));
    }
    check_dims(params, bundle)?;
    let scores = score_users(params, bundle, None, &split.test_users, mode, split.seed)?;
    let mut rng = seed::rng(split.seed, seed::COLD_NEGATIVES);
    let n_t = bundle.target.n_items();
    let mut outcomes = Vec::new();
    for (r, &u) in split.test_users.iter().enumerate() {
        let positives = &bundle.target.rows[u];
        let row = scores.row(r);
        for &p in positives {
            let negatives = sample_negatives(positives, n_t, NUM_NEGATIVES, &mut rng)?;
            let ids: Vec<u32> = std::iter::once(p).chain(negatives).collect();
            let cand: Vec<f64> = ids.iter().map(|&i| row[i as usize]).collect();
            outcomes.push(RankOutcome {
                user: u,
                rank: rank_among(&cand, &ids, 0)?,
            });
        }
    }
    if outcomes.is_empty() {
        return Err(Error::invalid("cold-start split has no test interactions"));
    }
    Ok(report(params, "cold-start", None, split.seed, &outcomes, ks))
}
