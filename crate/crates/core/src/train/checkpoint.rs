//! `XDV1` checkpoints: magic, u32 LE header length, JSON header, then every
//! tensor as little-endian `f32`, row-major, in header order.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{ModelConfig, ModelDims, ModelParams, Variant};
use crate::nn::ParamSet;
use crate::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"XDV1";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format_version: u32,
    variant: Variant,
    dims: ModelDims,
    seed: u64,
    config: ModelConfig,
    tensors: Vec<TensorEntry>,
}

pub fn save_checkpoint(params: &ModelParams, config: &ModelConfig, path: impl AsRef<Path>) -> Result<()> {
    if config.variant != params.variant {
        return Err(Error::Checkpoint(format!(
            "config variant {} differs from model variant {}",
            config.variant, params.variant
        )));
    }
    let tensors = params.tensors();
    let header = Header {
        format_version: CHECKPOINT_VERSION,
        variant: params.variant,
        dims: params.dims,
        seed: config.seed,
        config: config.clone(),
        tensors: tensors
            .iter()
            .map(|t| TensorEntry {
                name: t.name.clone(),
                shape: t.shape.clone(),
            })
            .collect(),
    };
    let json = serde_json::to_vec(&header)?;
    let n_values: usize = tensors.iter().map(|t| t.data.len()).sum();
    let mut out = Vec::with_capacity(8 + json.len() + 4 * n_values);
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for t in &tensors {
        for &x in t.data {
            out.extend_from_slice(&(x as f32).to_le_bytes());
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Loads a checkpoint; values come back as the `f64` images of the stored
/// `f32`s.
pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(ModelParams, ModelConfig)> {
    let bytes = crate::error::read_file(path)?;
    if bytes.len() < 8 || &bytes[..4] != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint("not an XDV1 checkpoint (bad magic)".into()));
    }
    let header_len = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let header_bytes = bytes
        .get(8..8 + header_len)
        .ok_or_else(|| Error::Checkpoint("truncated header".into()))?;
    let header: Header = serde_json::from_slice(header_bytes)
        .map_err(|e| Error::Checkpoint(format!("corrupt header: {e}")))?;
    if header.format_version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported format version {} (expected {CHECKPOINT_VERSION})",
            header.format_version
        )));
    }
    if header.config.variant != header.variant {
        return Err(Error::Checkpoint("header variant disagrees with its config".into()));
    }
    let mut params = ModelParams::init(&header.config, header.dims)
        .map_err(|e| Error::Checkpoint(format!("header describes an invalid model: {e}")))?;
    {
        let mut slots = params.tensors_mut();
        let expected: Vec<(&str, &[usize])> =
            slots.iter().map(|t| (t.name.as_str(), t.shape.as_slice())).collect();
        let declared: Vec<(&str, &[usize])> = header
            .tensors
            .iter()
            .map(|t| (t.name.as_str(), t.shape.as_slice()))
            .collect();
        if expected != declared {
            return Err(Error::Checkpoint(format!(
                "tensor list does not match a {} model with the declared dims",
                header.variant
            )));
        }
        let mut pos = 8 + header_len;
        let needed: usize = slots.iter().map(|t| t.data.len() * 4).sum();
        if bytes.len() != pos + needed {
            return Err(Error::Checkpoint(format!(
                "payload is {} bytes, header declares {needed}",
                bytes.len() - pos
            )));
        }
        for slot in slots.iter_mut() {
            for x in slot.data.iter_mut() {
                *x = f32::from_le_bytes(bytes[pos..pos + 4].try_into().unwrap()) as f64;
                pos += 4;
            }
        }
    }
    if let Some(name) = params.first_non_finite() {
        return Err(Error::Checkpoint(format!("non-finite values in {name}")));
    }
    Ok((params, header.config))
}
