use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::aux::AuxMatrix;
use super::ratings::Interaction;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainTag {
    Source,
    Target,
}

/// Binary user×item matrix stored as sorted per-user positive lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainMatrix {
    pub domain: DomainTag,
    pub user_index: Vec<String>,
    pub item_index: Vec<String>,
    /// Sorted ascending, no duplicates.
    pub rows: Vec<Vec<u32>>,
    /// Parallel to `rows`; `None` where the log had no timestamp.
    pub timestamps: Vec<Vec<Option<i64>>>,
}

impl DomainMatrix {
    pub fn n_items(&self) -> usize {
        self.item_index.len()
    }

    pub fn n_users(&self) -> usize {
        self.rows.len()
    }

    pub fn num_positives(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Fraction of zero cells.
    pub fn sparsity(&self) -> f64 {
        let cells = (self.n_users() * self.n_items()) as f64;
        if cells == 0.0 {
            return 1.0;
        }
        1.0 - self.num_positives() as f64 / cells
    }

    /// Dense 0/1 rows for the given users, in the given order.
    pub fn dense(&self, users: &[usize]) -> Array2<f64> {
        dense_rows(&self.rows, users, self.n_items())
    }

    /// Replaces the positive lists, dropping timestamps that no longer apply.
    pub fn with_rows(&self, rows: Vec<Vec<u32>>) -> DomainMatrix {
        let timestamps = rows
            .iter()
            .zip(self.rows.iter().zip(&self.timestamps))
            .map(|(new, (old, ts))| {
                new.iter()
                    .map(|item| old.binary_search(item).ok().and_then(|pos| ts[pos]))
                    .collect()
            })
            .collect();
        DomainMatrix {
            domain: self.domain,
            user_index: self.user_index.clone(),
            item_index: self.item_index.clone(),
            rows,
            timestamps,
        }
    }

    pub(crate) fn subset(&self, users: &[usize]) -> DomainMatrix {
        DomainMatrix {
            domain: self.domain,
            user_index: users.iter().map(|&u| self.user_index[u].clone()).collect(),
            item_index: self.item_index.clone(),
            rows: users.iter().map(|&u| self.rows[u].clone()).collect(),
            timestamps: users.iter().map(|&u| self.timestamps[u].clone()).collect(),
        }
    }
}

pub(crate) fn dense_rows(rows: &[Vec<u32>], users: &[usize], n_items: usize) -> Array2<f64> {
    let mut out = Array2::zeros((users.len(), n_items));
    for (r, &u) in users.iter().enumerate() {
        for &item in &rows[u] {
            out[[r, item as usize]] = 1.0;
        }
    }
    out
}

/// Settings that produced a bundle.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub threshold: u8,
    pub min_target_positives: usize,
    #[serde(default)]
    pub source_labels: Vec<String>,
    #[serde(default)]
    pub target_labels: Vec<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub dropped_items: usize,
    #[serde(default)]
    pub aux_missing_users: usize,
    #[serde(default)]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetBundle {
    pub source: DomainMatrix,
    pub target: DomainMatrix,
    pub aux: Option<AuxMatrix>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BundleStats {
    pub users: usize,
    pub source_items: usize,
    pub target_items: usize,
    pub source_positives: usize,
    pub target_positives: usize,
    pub source_sparsity: f64,
    pub target_sparsity: f64,
}

impl DatasetBundle {
    pub fn m(&self) -> usize {
        self.source.user_index.len()
    }

    pub fn stats(&self) -> BundleStats {
        BundleStats {
            users: self.m(),
            source_items: self.source.n_items(),
            target_items: self.target.n_items(),
            source_positives: self.source.num_positives(),
            target_positives: self.target.num_positives(),
            source_sparsity: self.source.sparsity(),
            target_sparsity: self.target.sparsity(),
        }
    }

    /// Checks the structural invariants that every persisted bundle satisfies.
    pub fn validate(&self) -> Result<()> {
        if self.source.user_index != self.target.user_index {
            return Err(Error::BundleFormat("source and target user indices differ".into()));
        }
        for m in [&self.source, &self.target] {
            if m.rows.len() != m.user_index.len() || m.timestamps.len() != m.rows.len() {
                return Err(Error::BundleFormat("row count does not match user index".into()));
            }
            for (row, ts) in m.rows.iter().zip(&m.timestamps) {
                if row.len() != ts.len() {
                    return Err(Error::BundleFormat("timestamp list length mismatch".into()));
                }
                if row.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::BundleFormat("row not strictly sorted".into()));
                }
                if row.last().is_some_and(|&i| i as usize >= m.n_items()) {
                    return Err(Error::BundleFormat("item index out of range".into()));
                }
            }
        }
        if let Some(aux) = &self.aux {
            if aux.values.nrows() != self.m() {
                return Err(Error::BundleFormat("aux row count does not match users".into()));
            }
        }
        Ok(())
    }

    /// Restriction to `users` (indices into this bundle), keeping item indices.
    pub fn subset(&self, users: &[usize]) -> DatasetBundle {
        DatasetBundle {
            source: self.source.subset(users),
            target: self.target.subset(users),
            aux: self.aux.as_ref().map(|a| a.subset(users)),
            provenance: self.provenance.clone(),
        }
    }
}

/// Orders keys numerically when both parse as integers, numeric keys first.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

/// Routes interactions by item label. Items carrying labels from both sets,
/// or from neither, are dropped with their interactions.
pub fn split_domains(
    interactions: &[Interaction],
    item_labels: &HashMap<String, BTreeSet<String>>,
    source_labels: &BTreeSet<String>,
    target_labels: &BTreeSet<String>,
) -> Result<(Vec<Interaction>, Vec<Interaction>)> {
    if let Some(shared) = source_labels.intersection(target_labels).next() {
        return Err(Error::invalid(format!(
            "label `{shared}` appears in both source and target label sets"
        )));
    }
    let unknown: BTreeSet<&str> = interactions
        .iter()
        .filter(|it| !item_labels.contains_key(&it.item))
        .map(|it| it.item.as_str())
        .collect();
    if !unknown.is_empty() {
        let mut keys: Vec<String> = unknown.into_iter().map(str::to_string).collect();
        keys.sort_by(|a, b| natural_cmp(a, b));
        return Err(Error::UnknownItems(keys));
    }
    let mut source = Vec::new();
    let mut target = Vec::new();
    for it in interactions {
        let labels = &item_labels[&it.item];
        let in_source = !labels.is_disjoint(source_labels);
        let in_target = !labels.is_disjoint(target_labels);
        match (in_source, in_target) {
            (true, false) => source.push(it.clone()),
            (false, true) => target.push(it.clone()),
            _ => {}
        }
    }
    Ok((source, target))
}

/// user → item → latest timestamp among positive ratings.
type PositiveMap<'a> = HashMap<&'a str, BTreeMap<&'a str, Option<i64>>>;

fn positives(list: &[Interaction], threshold: u8) -> PositiveMap<'_> {
    let mut map: PositiveMap = HashMap::new();
    for it in list.iter().filter(|it| it.rating >= threshold) {
        let slot = map
            .entry(it.user.as_str())
            .or_default()
            .entry(it.item.as_str())
            .or_insert(it.timestamp);
        *slot = (*slot).max(it.timestamp);
    }
    map
}

fn build_matrix(
    domain: DomainTag,
    users: &[&str],
    positives: &PositiveMap<'_>,
) -> DomainMatrix {
    let mut items: Vec<&str> = users
        .iter()
        .flat_map(|u| positives[u].keys().copied())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    items.sort_by(|a, b| natural_cmp(a, b));
    let index: HashMap<&str, u32> = items
        .iter()
        .enumerate()
        .map(|(i, &k)| (k, i as u32))
        .collect();
    let mut rows = Vec::with_capacity(users.len());
    let mut timestamps = Vec::with_capacity(users.len());
    for u in users {
        let mut entries: Vec<(u32, Option<i64>)> =
            positives[u].iter().map(|(k, &ts)| (index[k], ts)).collect();
        entries.sort_unstable_by_key(|e| e.0);
        rows.push(entries.iter().map(|e| e.0).collect());
        timestamps.push(entries.iter().map(|e| e.1).collect());
    }
    DomainMatrix {
        domain,
        user_index: users.iter().map(|u| u.to_string()).collect(),
        item_index: items.into_iter().map(str::to_string).collect(),
        rows,
        timestamps,
    }
}

/// Binarizes at `threshold` and keeps users with at least one source
/// positive and `min_target_positives` target positives.
pub fn binarize_and_filter(
    source: &[Interaction],
    target: &[Interaction],
    threshold: u8,
    min_target_positives: usize,
) -> Result<DatasetBundle> {
    if source.is_empty() || target.is_empty() {
        return Err(Error::invalid("both domains need at least one interaction"));
    }
    let src = positives(source, threshold);
    let tgt = positives(target, threshold);
    let mut users: Vec<&str> = src
        .keys()
        .copied()
        .filter(|u| tgt.get(u).is_some_and(|row| row.len() >= min_target_positives.max(1)))
        .collect();
    if users.is_empty() {
        return Err(Error::NoSurvivingUsers);
    }
    users.sort_by(|a, b| natural_cmp(a, b));
    let source = build_matrix(DomainTag::Source, &users, &src);
    let target = build_matrix(DomainTag::Target, &users, &tgt);
    Ok(DatasetBundle {
        source,
        target,
        aux: None,
        provenance: Provenance {
            threshold,
            min_target_positives,
            ..Provenance::default()
        },
    })
}
