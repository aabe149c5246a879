//! Ingestion, domain split and leave-one-out split checked against a
//! straightforward recomputation from the raw rating log.

use std::collections::{BTreeMap, BTreeSet};

use xdvae::data::{
    apply_split, build_loo_split, degrade_target_rows, load_item_labels, load_ratings, split_domains,
    binarize_and_filter, DatasetBundle, HoldOutPolicy, RatingFormat, NUM_NEGATIVES,
};
use xdvae::synthetic::{generate, SyntheticData, SyntheticSpec, SOURCE_GENRE, TARGET_GENRES};

fn data() -> SyntheticData {
    generate(&SyntheticSpec {
        users: 150,
        seed: 21,
        ..SyntheticSpec::default()
    })
    .unwrap()
}

type Pairs = BTreeSet<(String, String)>;

/// Positive (user, item) pairs per domain after all filtering rules.
fn oracle(d: &SyntheticData) -> (Pairs, Pairs) {
    let mut source = Pairs::new();
    let mut target = Pairs::new();
    for it in d.interactions.iter().filter(|it| it.rating >= 4) {
        let labels = &d.item_labels[&it.item];
        let s = labels.contains(SOURCE_GENRE);
        let t = TARGET_GENRES.iter().any(|g| labels.contains(*g));
        let pair = (it.user.clone(), it.item.clone());
        match (s, t) {
            (true, false) => source.insert(pair),
            (false, true) => target.insert(pair),
            _ => false,
        };
    }
    let count = |p: &Pairs| {
        let mut m: BTreeMap<String, usize> = BTreeMap::new();
        for (u, _) in p {
            *m.entry(u.clone()).or_default() += 1;
        }
        m
    };
    let (sc, tc) = (count(&source), count(&target));
    let keep = |u: &String| sc.get(u).copied().unwrap_or(0) >= 1 && tc.get(u).copied().unwrap_or(0) >= 2;
    source.retain(|(u, _)| keep(u));
    target.retain(|(u, _)| keep(u));
    (source, target)
}

fn pairs(b: &DatasetBundle, target: bool) -> Pairs {
    let m = if target { &b.target } else { &b.source };
    m.rows
        .iter()
        .enumerate()
        .flat_map(|(u, row)| {
            row.iter()
                .map(move |&i| (m.user_index[u].clone(), m.item_index[i as usize].clone()))
        })
        .collect()
}

#[test]
fn bundle_matches_recomputed_positives() {
    let d = data();
    let (src, tgt) = oracle(&d);
    assert_eq!(pairs(&d.bundle, false), src);
    assert_eq!(pairs(&d.bundle, true), tgt);
    let stats = d.bundle.stats();
    assert_eq!(stats.source_positives, src.len());
    assert_eq!(stats.target_positives, tgt.len());
    let users: BTreeSet<&String> = tgt.iter().map(|p| &p.0).collect();
    assert_eq!(stats.users, users.len());
    let dense = 1.0 - tgt.len() as f64 / (stats.users * stats.target_items) as f64;
    assert!((stats.target_sparsity - dense).abs() < 1e-12);
    assert!(!d.bundle.source.item_index.iter().any(|i| i.starts_with('x')));
    assert!(!d.bundle.target.item_index.iter().any(|i| i.starts_with('x')));
}

#[test]
fn files_on_disk_give_the_same_bundle() {
    let d = data();
    let dir = tempfile::tempdir().unwrap();
    d.write_movielens(dir.path()).unwrap();
    let log = load_ratings(dir.path().join("ratings.dat"), RatingFormat::MovielensDat).unwrap();
    let labels = load_item_labels(dir.path().join("movies.dat"), RatingFormat::MovielensDat).unwrap();
    let s: BTreeSet<String> = [SOURCE_GENRE.to_string()].into();
    let t: BTreeSet<String> = TARGET_GENRES.iter().map(|g| g.to_string()).collect();
    let (src, tgt) = split_domains(&log, &labels, &s, &t).unwrap();
    let b = binarize_and_filter(&src, &tgt, 4, 2).unwrap();
    assert_eq!(b.source, d.bundle.source);
    assert_eq!(b.target, d.bundle.target);
}

#[test]
fn leave_one_out_invariants() {
    let d = data();
    for policy in [HoldOutPolicy::Random, HoldOutPolicy::Latest] {
        let (split, train) = build_loo_split(&d.bundle, 5, policy).unwrap();
        assert_eq!(apply_split(&d.bundle, &split).unwrap(), train);
        assert_eq!(train.source, d.bundle.source);
        for (u, h) in split.users.iter().enumerate() {
            let full = &d.bundle.target.rows[u];
            assert!(full.contains(&h.held_out));
            let mut expected = full.clone();
            expected.retain(|&i| i != h.held_out);
            assert_eq!(train.target.rows[u], expected);
            assert_eq!(h.negatives.len(), NUM_NEGATIVES);
            let distinct: BTreeSet<u32> = h.negatives.iter().copied().collect();
            assert_eq!(distinct.len(), NUM_NEGATIVES);
            assert!(distinct.iter().all(|n| full.binary_search(n).is_err()));
            if policy == HoldOutPolicy::Latest {
                let ts = &d.bundle.target.timestamps[u];
                let pos = full.iter().position(|&i| i == h.held_out).unwrap();
                assert_eq!(ts[pos], ts.iter().copied().max().unwrap());
            }
        }
    }
}

#[test]
fn degradation_keeps_ceiling_of_fraction() {
    let d = data();
    let rows = &d.bundle.target.rows;
    for f in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let kept = degrade_target_rows(rows, f, 3);
        for (full, k) in rows.iter().zip(&kept) {
            let want = (f * full.len() as f64).ceil() as usize;
            assert_eq!(k.len(), want, "fraction {f}, row of {}", full.len());
            assert!(k.iter().all(|i| full.contains(i)));
        }
    }
}
