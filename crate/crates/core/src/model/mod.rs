//! Model variants built from per-domain VAE encoders and decoders.
//!
//! - **Generic**: source and target VAEs; the target decoder reads
//!   `[z_S ; z_T]`, the source decoder reads `z_S` only.
//! - **NoMmd**: Generic without the MMD alignment term.
//! - **Single**: a target-only VAE.
//! - **Merged**: one VAE over the concatenated `[r_S ; r_T]` input.
//! - **ColdStart**: the target decoder reads `tanh(W' z_S + b')`, tied to
//!   `z_T` by a mapping loss during training, so predictions need no target
//!   history.
//! - **Aux**: Generic with a sub-encoder for dense per-user side vectors,
//!   concatenated into the last hidden layer of the domain encoders.

mod config;
mod forward;
mod ops;
mod params;

pub use config::{AuxAttach, EarlyStop, InferenceMode, ModelConfig, ModelDims, Variant};
pub use forward::{forward_loss, predict_batch, sample_noise, Batch, ForwardOutput, Noise};
pub use ops::{
    decode_source, decode_target_cold, decode_target_generic, encode, encode_with_aux,
    map_latent, merge_latents, predict_scores, LatentState,
};
pub use params::{DecoderStack, EncoderStack, GradBundle, ModelParams};
