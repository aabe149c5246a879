//! Rating ingestion and dataset construction.
//!
//! The usual flow is
//! [`load_ratings`] → [`split_domains`] → [`binarize_and_filter`] →
//! [`build_loo_split`], with [`save_bundle`] persisting the result.

mod aux;
mod domains;
mod ratings;
mod splits;
mod store;

pub(crate) use domains::dense_rows;
pub use aux::{attach_aux, load_aux_vectors, AuxMatrix, DEFAULT_AUX_DIM};
pub use domains::{
    binarize_and_filter, natural_cmp, split_domains, BundleStats, DatasetBundle, DomainMatrix,
    DomainTag, Provenance,
};
pub use ratings::{load_item_labels, load_ratings, parse_label_list, Interaction, RatingFormat};
pub use splits::{
    apply_split, build_loo_split, cold_start_split, degrade_target_rows, sample_negatives, ColdStartSplit,
    HoldOutPolicy, LeaveOneOutSplit, UserHoldOut, NUM_NEGATIVES,
};
pub use store::{load_bundle, save_bundle, BUNDLE_MANIFEST};
