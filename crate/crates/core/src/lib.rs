//! Cross-domain collaborative filtering with two variational autoencoders
//! linked at the latent layer.
//!
//! A source-domain VAE and a target-domain VAE are trained jointly. The
//! target decoder reads the concatenation of both latent vectors, so
//! knowledge flows from the (denser) source domain into the (sparser) target
//! domain but never the other way. Training minimises a reconstruction loss
//! that up-weights observed interactions, the usual KL term, an L2 penalty
//! and a linear MMD term pulling the two latent batch means together.
//!
//! The crate is organised bottom-up:
//!
//! - [`data`]: rating ingestion, domain split, binarisation, leave-one-out
//!   and cold-start splits, bundle persistence.
//! - [`nn`]: dense layers, Glorot init, Adam, finite-difference checking.
//! - [`losses`]: every scalar objective and its composition per variant.
//! - [`model`]: parameters, forward/backward passes and scoring for all
//!   model variants (generic, ablations, cold-start, auxiliary input).
//! - [`train`]: the mini-batch loop, checkpoints and the variant suite.
//! - [`eval`]: HR@K / NDCG@K under leave-one-out and the degradation and
//!   cold-start protocols.
//! - [`cli`]: the `prepare | train | eval | ablate` commands.
//!
//! Runnable walkthroughs of each capability live in `examples/`.

pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod losses;
pub mod model;
pub mod nn;
pub mod seed;
pub mod synthetic;
pub mod train;

pub use error::{Error, Result};
pub use model::{ModelConfig, ModelParams, Variant};
