//! Single-user versions of the model building blocks.

use ndarray::{Array2, ArrayView2};
use rand::Rng;

use super::config::InferenceMode;
use super::forward::{decoder_forward, encoder_forward, predict_batch};
use super::params::{DecoderStack, EncoderStack, ModelParams};
use crate::nn::{forward_chain, DenseLayer};
use crate::{Error, Result};

/// Posterior parameters, noise and sample for one user in one domain.
/// `z = mu + exp(0.5 logvar) * eps` elementwise.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentState {
    pub mu: Vec<f64>,
    pub logvar: Vec<f64>,
    pub eps: Vec<f64>,
    pub z: Vec<f64>,
}

fn row(v: &[f64]) -> Array2<f64> {
    Array2::from_shape_vec((1, v.len()), v.to_vec()).expect("1 x n")
}

fn first_row(m: Array2<f64>) -> Vec<f64> {
    m.row(0).to_vec()
}

fn latent_from(enc: &EncoderStack, r: &[f64], aux: Option<&Array2<f64>>, eps: &[f64]) -> Result<LatentState> {
    if eps.len() != enc.latent_dim() {
        return Err(Error::shape(format!(
            "noise has {} entries, latent width is {}",
            eps.len(),
            enc.latent_dim()
        )));
    }
    let pass = encoder_forward(enc, row(r), aux, row(eps))?;
    Ok(LatentState {
        mu: first_row(pass.mu),
        logvar: first_row(pass.logvar),
        eps: eps.to_vec(),
        z: first_row(pass.z),
    })
}

pub fn encode(enc: &EncoderStack, r: &[f64], eps: &[f64]) -> Result<LatentState> {
    latent_from(enc, r, None, eps)
}

/// Encodes with the sub-encoder output of `aux` concatenated to the last
/// hidden layer before the μ / log σ² heads.
pub fn encode_with_aux(
    enc: &EncoderStack,
    sub_encoder: &[DenseLayer],
    r: &[f64],
    aux: Option<&[f64]>,
    eps: &[f64],
) -> Result<LatentState> {
    let aux = aux.ok_or_else(|| Error::invalid("auxiliary vector missing"))?;
    let expected = sub_encoder.first().map(DenseLayer::input_dim);
    if expected != Some(aux.len()) {
        return Err(Error::shape(format!(
            "auxiliary vector has {} entries, sub-encoder expects {expected:?}",
            aux.len()
        )));
    }
    let acts = forward_chain(sub_encoder, row(aux))?;
    latent_from(enc, r, acts.last(), eps)
}

fn decode(dec: &DecoderStack, z: &[f64]) -> Result<Vec<f64>> {
    Ok(first_row(decoder_forward(dec, row(z))?.pop().unwrap()))
}

pub fn decode_source(dec: &DecoderStack, z_source: &[f64]) -> Result<Vec<f64>> {
    decode(dec, z_source)
}

/// `[z_S ; z_T]`, source first.
pub fn merge_latents(z_source: &[f64], z_target: &[f64]) -> Result<Vec<f64>> {
    if z_source.len() != z_target.len() {
        return Err(Error::shape(format!(
            "latent widths {} and {} differ",
            z_source.len(),
            z_target.len()
        )));
    }
    Ok(z_source.iter().chain(z_target).copied().collect())
}

/// Target reconstruction from the merged `2L` latent.
pub fn decode_target_generic(dec: &DecoderStack, z_merged: &[f64]) -> Result<Vec<f64>> {
    if !z_merged.len().is_multiple_of(2) || z_merged.len() != dec.input_dim() {
        return Err(Error::shape(format!(
            "generic target decoder takes a {}-wide merged latent, got {}",
            dec.input_dim(),
            z_merged.len()
        )));
    }
    decode(dec, z_merged)
}

/// `tanh(W' z_S + b')`
pub fn map_latent(map: Option<&DenseLayer>, z_source: &[f64]) -> Result<Vec<f64>> {
    let map = map.ok_or_else(|| Error::invalid("model has no latent map (not a cold-start model)"))?;
    Ok(first_row(map.forward(&row(z_source).view())?))
}

/// Target reconstruction from the mapped `L`-wide latent.
pub fn decode_target_cold(dec: &DecoderStack, z_mapped: &[f64]) -> Result<Vec<f64>> {
    decode(dec, z_mapped)
}

/// Scores over all target items for one user. See [`predict_batch`].
pub fn predict_scores<R: Rng + ?Sized>(
    params: &ModelParams,
    source: Option<&[f64]>,
    target: Option<&[f64]>,
    aux: Option<&[f64]>,
    mode: InferenceMode,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let s = source.map(row);
    let t = target.map(row);
    let a = aux.map(row);
    let out = predict_batch(
        params,
        s.as_ref().map(ArrayView2::from),
        t.as_ref().map(ArrayView2::from),
        a.as_ref().map(ArrayView2::from),
        mode,
        rng,
    )?;
    Ok(first_row(out))
}
