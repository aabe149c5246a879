use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One held-out item plus 99 negatives.
pub const NUM_CANDIDATES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankOutcome {
    pub user: usize,
    /// 1-based position of the held-out item among the candidates.
    pub rank: usize,
}

/// 1-based rank of `scores[test]`. Ties go to the candidate with the smaller
/// item id.
pub fn rank_test_item(scores: &[f64], item_ids: &[u32], test: usize) -> Result<usize> {
    if scores.len() != NUM_CANDIDATES || item_ids.len() != NUM_CANDIDATES {
        return Err(Error::invalid(format!(
            "expected {NUM_CANDIDATES} candidates, got {} scores and {} ids",
            scores.len(),
            item_ids.len()
        )));
    }
    rank_among(scores, item_ids, test)
}

/// Same rule for any candidate count.
pub(crate) fn rank_among(scores: &[f64], item_ids: &[u32], test: usize) -> Result<usize> {
    let s = *scores
        .get(test)
        .ok_or_else(|| Error::invalid(format!("test index {test} out of range")))?;
    if scores.iter().any(|x| x.is_nan()) {
        return Err(Error::NonFinite {
            what: "score".into(),
            context: "ranking".into(),
        });
    }
    let id = item_ids[test];
    let ahead = scores
        .iter()
        .zip(item_ids)
        .enumerate()
        .filter(|&(c, (&sc, &ic))| c != test && (sc > s || (sc == s && ic < id)))
        .count();
    Ok(1 + ahead)
}

/// Fraction of outcomes ranked within the top `k`.
pub fn hit_ratio(outcomes: &[RankOutcome], k: usize) -> f64 {
    if outcomes.is_empty() {
        return 0.0;
    }
    outcomes.iter().filter(|o| o.rank <= k).count() as f64 / outcomes.len() as f64
}

/// Mean of `ln 2 / ln(rank + 1)` over outcomes within the top `k`, zero for
/// the rest.
pub fn ndcg(outcomes: &[RankOutcome], k: usize) -> f64 {
    if outcomes.is_empty() {
        return 0.0;
    }
    // fold from +0.0: `Sum` starts at -0.0, which would print as "-0"
    let sum = outcomes
        .iter()
        .filter(|o| o.rank <= k)
        .map(|o| std::f64::consts::LN_2 / ((o.rank + 1) as f64).ln())
        .fold(0.0, |acc, g| acc + g);
    sum / outcomes.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ids() -> Vec<u32> {
        (0..100).collect()
    }

    #[test]
    fn no_hits_give_positive_zero() {
        let o = [RankOutcome { user: 0, rank: 40 }];
        assert_eq!(ndcg(&o, 10).to_bits(), 0.0f64.to_bits());
        assert_eq!(format!("{:.6}", ndcg(&o, 10)), "0.000000");
    }

    fn outcomes(ranks: &[usize]) -> Vec<RankOutcome> {
        ranks.iter().enumerate().map(|(user, &rank)| RankOutcome { user, rank }).collect()
    }

    #[test]
    fn extremes() {
        let mut scores = vec![0.5; 100];
        scores[3] = 0.9;
        assert_eq!(rank_test_item(&scores, &ids(), 3).unwrap(), 1);
        scores[3] = 0.1;
        assert_eq!(rank_test_item(&scores, &ids(), 3).unwrap(), 100);
    }

    #[test]
    fn ties_break_by_item_id() {
        let scores = vec![0.5; 100];
        assert_eq!(rank_test_item(&scores, &ids(), 0).unwrap(), 1);
        assert_eq!(rank_test_item(&scores, &ids(), 41).unwrap(), 42);
        let mut rev: Vec<u32> = ids();
        rev.reverse();
        assert_eq!(rank_test_item(&scores, &rev, 0).unwrap(), 100);
    }

    #[test]
    fn candidate_count_checked() {
        assert!(rank_test_item(&[0.1; 99], &[0; 99], 0).is_err());
    }

    #[test]
    fn hit_ratio_examples() {
        assert!((hit_ratio(&outcomes(&[1, 15, 7]), 10) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(hit_ratio(&outcomes(&[1, 2, 3]), 5), 1.0);
        assert_eq!(hit_ratio(&outcomes(&[100, 57, 1]), 100), 1.0);
    }

    #[test]
    fn ndcg_examples() {
        assert_eq!(ndcg(&outcomes(&[1]), 10), 1.0);
        assert!((ndcg(&outcomes(&[3]), 10) - 0.5).abs() < 1e-15);
        assert!((ndcg(&outcomes(&[1, 3]), 2) - 0.5).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn metric_invariants(ranks in proptest::collection::vec(1usize..=100, 1..200)) {
            let o = outcomes(&ranks);
            let ks = [1, 5, 10, 20, 50, 100];
            for w in ks.windows(2) {
                prop_assert!(hit_ratio(&o, w[0]) <= hit_ratio(&o, w[1]));
                prop_assert!(ndcg(&o, w[0]) <= ndcg(&o, w[1]));
            }
            for k in ks {
                prop_assert!(ndcg(&o, k) <= hit_ratio(&o, k) + 1e-15);
            }
            prop_assert_eq!(hit_ratio(&o, 100), 1.0);
        }
    }
}
