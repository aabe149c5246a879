//! Batched forward passes with hand-written backpropagation.

use ndarray::{concatenate, s, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;

use super::config::{InferenceMode, ModelConfig, Variant};
use super::params::{DecoderStack, EncoderStack, GradBundle, ModelParams};
use crate::losses::{self, LossBreakdown, LossComponents};
use crate::nn::{backward_chain, forward_chain};
use crate::{Error, Result};

/// Dense rows for one mini-batch. Unused inputs (e.g. `source` for Single)
/// may be empty matrices.
#[derive(Debug, Clone)]
pub struct Batch {
    pub source: Array2<f64>,
    pub target: Array2<f64>,
    pub aux: Option<Array2<f64>>,
}

impl Batch {
    pub fn rows(&self) -> usize {
        self.target.nrows().max(self.source.nrows())
    }
}

/// Reparametrisation noise for one batch.
#[derive(Debug, Clone)]
pub struct Noise {
    pub source: Option<Array2<f64>>,
    pub target: Array2<f64>,
}

impl Noise {
    pub fn zeros(params: &ModelParams, rows: usize) -> Self {
        Noise {
            source: params
                .source_encoder
                .as_ref()
                .map(|e| Array2::zeros((rows, e.latent_dim()))),
            target: Array2::zeros((rows, params.target_encoder.latent_dim())),
        }
    }
}

/// Standard-normal noise, source block first then target, row-major.
pub fn sample_noise<R: Rng + ?Sized>(params: &ModelParams, rows: usize, rng: &mut R) -> Noise {
    let mut draw = |cols: usize| {
        Array2::from_shape_simple_fn((rows, cols), || rng.sample::<f64, _>(StandardNormal))
    };
    let source = params
        .source_encoder
        .as_ref()
        .map(|e| draw(e.latent_dim()));
    let target = draw(params.target_encoder.latent_dim());
    Noise { source, target }
}

#[derive(Debug, Clone)]
pub struct ForwardOutput {
    pub loss: LossBreakdown,
    pub grads: Option<GradBundle>,
    /// `r̂_S` (linked variants only).
    pub source_reconstruction: Option<Array2<f64>>,
    /// `r̂_T`; for Merged the target columns of the joint output.
    pub target_reconstruction: Array2<f64>,
}

pub(crate) struct EncoderPass {
    acts: Vec<Array2<f64>>,
    head_in: Array2<f64>,
    pub(crate) mu: Array2<f64>,
    pub(crate) logvar: Array2<f64>,
    std: Array2<f64>,
    eps: Array2<f64>,
    pub(crate) z: Array2<f64>,
}

pub(crate) fn encoder_forward(
    enc: &EncoderStack,
    x: Array2<f64>,
    aux: Option<&Array2<f64>>,
    eps: Array2<f64>,
) -> Result<EncoderPass> {
    if x.ncols() != enc.input_dim() {
        return Err(Error::shape(format!(
            "encoder expects {} inputs, got {}",
            enc.input_dim(),
            x.ncols()
        )));
    }
    let aux_cols = aux.map_or(0, |a| a.ncols());
    if aux_cols != enc.aux_width() {
        return Err(Error::shape(format!(
            "encoder heads expect {} auxiliary columns, got {aux_cols}",
            enc.aux_width()
        )));
    }
    let acts = forward_chain(&enc.hidden, x)?;
    let last = acts.last().unwrap();
    let head_in = match aux {
        Some(a) => concatenate![Axis(1), last.view(), a.view()],
        None => last.clone(),
    };
    let mu = enc.mu_head.forward(&head_in.view())?;
    let logvar = enc.logvar_head.forward(&head_in.view())?;
    if eps.shape() != mu.shape() {
        return Err(Error::shape(format!(
            "noise shape {:?} differs from latent shape {:?}",
            eps.shape(),
            mu.shape()
        )));
    }
    let std = logvar.mapv(|v| (0.5 * v).exp());
    let z = &mu + &(&std * &eps);
    Ok(EncoderPass {
        acts,
        head_in,
        mu,
        logvar,
        std,
        eps,
        z,
    })
}

/// Backpropagates `dz` (plus direct μ / log σ² gradients) through an encoder.
/// Returns the gradient w.r.t. the auxiliary head inputs, if any.
fn encoder_backward(
    enc: &EncoderStack,
    pass: &EncoderPass,
    dz: &Array2<f64>,
    mut dmu: Array2<f64>,
    mut dlogvar: Array2<f64>,
    grads: &mut EncoderStack,
) -> Option<Array2<f64>> {
    dmu += dz;
    // ∂z/∂logvar = 0.5 σ ε
    dlogvar += &(dz * &pass.std * &pass.eps * 0.5);
    let head_in = pass.head_in.view();
    let mut dh = enc
        .mu_head
        .backward_preactivation(&head_in, &dmu, &mut grads.mu_head, true)
        .unwrap();
    dh += &enc
        .logvar_head
        .backward_preactivation(&head_in, &dlogvar, &mut grads.logvar_head, true)
        .unwrap();
    let h = enc.hidden_output_dim();
    let d_aux = (enc.aux_width() > 0).then(|| dh.slice(s![.., h..]).to_owned());
    if !enc.hidden.is_empty() {
        let d_last = dh.slice(s![.., ..h]).to_owned();
        backward_chain(&enc.hidden, &pass.acts, d_last, &mut grads.hidden, false);
    }
    d_aux
}

pub(crate) fn decoder_forward(dec: &DecoderStack, z: Array2<f64>) -> Result<Vec<Array2<f64>>> {
    if z.ncols() != dec.input_dim() {
        return Err(Error::shape(format!(
            "decoder expects a {}-wide latent, got {}",
            dec.input_dim(),
            z.ncols()
        )));
    }
    forward_chain(&dec.layers, z)
}

/// `grad_logits` is w.r.t. the sigmoid pre-activation; returns `∂/∂z`.
fn decoder_backward(
    dec: &DecoderStack,
    acts: &[Array2<f64>],
    grad_logits: Array2<f64>,
    grads: &mut DecoderStack,
) -> Array2<f64> {
    let n = dec.layers.len();
    let d_prev = dec.layers[n - 1]
        .backward_preactivation(&acts[n - 1].view(), &grad_logits, &mut grads.layers[n - 1], true)
        .unwrap();
    backward_chain(&dec.layers[..n - 1], &acts[..n], d_prev, &mut grads.layers[..n - 1], true)
        .unwrap()
}

fn check_rows(name: &str, m: &Array2<f64>, rows: usize, cols: usize) -> Result<()> {
    if m.nrows() != rows || m.ncols() != cols {
        return Err(Error::shape(format!(
            "{name}: expected {rows}x{cols}, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

fn aux_features(params: &ModelParams, aux: Option<&Array2<f64>>, rows: usize) -> Result<Option<Vec<Array2<f64>>>> {
    match &params.aux_encoder {
        None => Ok(None),
        Some(layers) => {
            let aux = aux.ok_or_else(|| Error::invalid("aux model needs auxiliary vectors"))?;
            check_rows("aux", aux, rows, layers[0].input_dim())?;
            Ok(Some(forward_chain(layers, aux.clone())?))
        }
    }
}

/// Loss (and optionally gradients) of one batch under fixed noise.
///
/// The variant comes from `params`; `config` supplies β, λ and the
/// cold-start stop-gradient switch.
pub fn forward_loss(
    params: &ModelParams,
    config: &ModelConfig,
    batch: &Batch,
    noise: &Noise,
    with_grads: bool,
) -> Result<ForwardOutput> {
    let beta = config.beta;
    let lambda = config.lambda_reg;
    let variant = params.variant;
    let rows = batch.rows();
    if rows == 0 {
        return Err(Error::shape("empty batch"));
    }
    let n_s = params.dims.n_source;
    let n_t = params.dims.n_target;
    check_rows("target rows", &batch.target, rows, n_t)?;
    if variant != Variant::Single {
        check_rows("source rows", &batch.source, rows, n_s)?;
    }
    let reg = losses::l2_reg(params, lambda);
    let mut grads = with_grads.then(|| GradBundle::zeros_for(params));

    let out = match variant {
        Variant::Single => {
            let pt = encoder_forward(&params.target_encoder, batch.target.clone(), None, noise.target.clone())?;
            let acts = decoder_forward(&params.target_decoder, pt.z.clone())?;
            let r_hat = acts.last().unwrap();
            let comps = LossComponents {
                recon_target: Some(losses::masked_recon(batch.target.view(), r_hat.view(), beta)?),
                kl_target: Some(losses::kl_divergence(pt.mu.view(), pt.logvar.view())?),
                reg: Some(reg),
                ..Default::default()
            };
            if let Some(g) = grads.as_mut() {
                let gl = losses::masked_recon_logit_grad(batch.target.view(), r_hat.view(), beta);
                let dz = decoder_backward(&params.target_decoder, &acts, gl, &mut g.0.target_decoder);
                let (dmu, dlv) = losses::kl_grad(pt.mu.view(), pt.logvar.view());
                encoder_backward(&params.target_encoder, &pt, &dz, dmu, dlv, &mut g.0.target_encoder);
            }
            ForwardOutput {
                loss: losses::compose_total(variant, &comps)?,
                grads: None,
                source_reconstruction: None,
                target_reconstruction: acts.into_iter().last().unwrap(),
            }
        }
        Variant::Merged => {
            let x = concatenate![Axis(1), batch.source.view(), batch.target.view()];
            let pj = encoder_forward(&params.target_encoder, x, None, noise.target.clone())?;
            let acts = decoder_forward(&params.target_decoder, pj.z.clone())?;
            let r_hat = acts.last().unwrap();
            let hat_s = r_hat.slice(s![.., ..n_s]);
            let hat_t = r_hat.slice(s![.., n_s..]);
            let comps = LossComponents {
                recon_source: Some(losses::masked_recon(batch.source.view(), hat_s, beta)?),
                recon_target: Some(losses::masked_recon(batch.target.view(), hat_t, beta)?),
                kl_target: Some(losses::kl_divergence(pj.mu.view(), pj.logvar.view())?),
                reg: Some(reg),
                ..Default::default()
            };
            if let Some(g) = grads.as_mut() {
                let gs = losses::masked_recon_logit_grad(batch.source.view(), hat_s, beta);
                let gt = losses::masked_recon_logit_grad(batch.target.view(), hat_t, beta);
                let gl = concatenate![Axis(1), gs, gt];
                let dz = decoder_backward(&params.target_decoder, &acts, gl, &mut g.0.target_decoder);
                let (dmu, dlv) = losses::kl_grad(pj.mu.view(), pj.logvar.view());
                encoder_backward(&params.target_encoder, &pj, &dz, dmu, dlv, &mut g.0.target_encoder);
            }
            ForwardOutput {
                loss: losses::compose_total(variant, &comps)?,
                grads: None,
                source_reconstruction: None,
                target_reconstruction: r_hat.slice(s![.., n_s..]).to_owned(),
            }
        }
        Variant::Generic | Variant::NoMmd | Variant::ColdStart | Variant::Aux => {
            linked_forward(params, config, batch, noise, reg, grads.as_mut())?
        }
    };

    let mut out = out;
    if let Some(mut g) = grads {
        losses::l2_reg_grad(params, lambda, &mut g);
        out.grads = Some(g);
    }
    Ok(out)
}

fn linked_forward(
    params: &ModelParams,
    config: &ModelConfig,
    batch: &Batch,
    noise: &Noise,
    reg: f64,
    grads: Option<&mut GradBundle>,
) -> Result<ForwardOutput> {
    let beta = config.beta;
    let variant = params.variant;
    let rows = batch.rows();
    let l = params.target_encoder.latent_dim();
    let enc_s = params.source_encoder.as_ref().unwrap();
    let dec_s = params.source_decoder.as_ref().unwrap();
    let eps_s = noise
        .source
        .clone()
        .ok_or_else(|| Error::shape("linked model needs source noise"))?;

    let aux_pass = aux_features(params, batch.aux.as_ref(), rows)?;
    let aux_out = aux_pass.as_ref().map(|acts| acts.last().unwrap());
    let attach = params.aux_attach;

    let ps = encoder_forward(enc_s, batch.source.clone(), aux_out.filter(|_| attach.source()), eps_s)?;
    let pt = encoder_forward(
        &params.target_encoder,
        batch.target.clone(),
        aux_out.filter(|_| attach.target()),
        noise.target.clone(),
    )?;

    let dec_s_acts = decoder_forward(dec_s, ps.z.clone())?;
    let (dec_in, mapped) = match variant {
        Variant::ColdStart => {
            let map = params.map_layer.as_ref().unwrap();
            let m = map.forward(&ps.z.view())?;
            (m.clone(), Some(m))
        }
        _ => (concatenate![Axis(1), ps.z.view(), pt.z.view()], None),
    };
    let dec_t_acts = decoder_forward(&params.target_decoder, dec_in)?;
    let hat_s = dec_s_acts.last().unwrap();
    let hat_t = dec_t_acts.last().unwrap();

    let mmd = losses::mmd_linear(ps.z.view(), pt.z.view())?;
    let comps = LossComponents {
        recon_source: Some(losses::masked_recon(batch.source.view(), hat_s.view(), beta)?),
        recon_target: Some(losses::masked_recon(batch.target.view(), hat_t.view(), beta)?),
        kl_source: Some(losses::kl_divergence(ps.mu.view(), ps.logvar.view())?),
        kl_target: Some(losses::kl_divergence(pt.mu.view(), pt.logvar.view())?),
        reg: Some(reg),
        mmd: Some(mmd),
        map_loss: mapped
            .as_ref()
            .map(|m| losses::mapping_loss(m.view(), pt.z.view()))
            .transpose()?,
    };

    if let Some(g) = grads {
        let g = &mut g.0;
        let gl_s = losses::masked_recon_logit_grad(batch.source.view(), hat_s.view(), beta);
        let mut dz_s = decoder_backward(dec_s, &dec_s_acts, gl_s, g.source_decoder.as_mut().unwrap());
        let gl_t = losses::masked_recon_logit_grad(batch.target.view(), hat_t.view(), beta);
        let d_in = decoder_backward(&params.target_decoder, &dec_t_acts, gl_t, &mut g.target_decoder);
        let mut dz_t = Array2::zeros(pt.z.raw_dim());
        match &mapped {
            Some(m) => {
                let map = params.map_layer.as_ref().unwrap();
                let mg = losses::mapping_grad(m.view(), pt.z.view());
                let dmap = d_in + &mg;
                if !config.map_stop_gradient {
                    dz_t -= &mg;
                }
                let pre = map.preactivation_grad(m, dmap);
                dz_s += &map
                    .backward_preactivation(&ps.z.view(), &pre, g.map_layer.as_mut().unwrap(), true)
                    .unwrap();
            }
            None => {
                dz_s += &d_in.slice(s![.., ..l]);
                dz_t += &d_in.slice(s![.., l..]);
            }
        }
        if variant != Variant::NoMmd {
            let (gs, gt) = losses::mmd_grad(ps.z.view(), pt.z.view());
            dz_s += &gs;
            dz_t += &gt;
        }
        let (dmu_s, dlv_s) = losses::kl_grad(ps.mu.view(), ps.logvar.view());
        let (dmu_t, dlv_t) = losses::kl_grad(pt.mu.view(), pt.logvar.view());
        let daux_s = encoder_backward(enc_s, &ps, &dz_s, dmu_s, dlv_s, g.source_encoder.as_mut().unwrap());
        let daux_t = encoder_backward(&params.target_encoder, &pt, &dz_t, dmu_t, dlv_t, &mut g.target_encoder);
        if let (Some(layers), Some(acts)) = (&params.aux_encoder, &aux_pass) {
            let daux = match (daux_s, daux_t) {
                (Some(a), Some(b)) => Some(a + b),
                (a, b) => a.or(b),
            };
            if let Some(daux) = daux {
                backward_chain(layers, acts, daux, g.aux_encoder.as_mut().unwrap(), false);
            }
        }
    }

    Ok(ForwardOutput {
        loss: losses::compose_total(variant, &comps)?,
        grads: None,
        source_reconstruction: Some(dec_s_acts.into_iter().last().unwrap()),
        target_reconstruction: dec_t_acts.into_iter().last().unwrap(),
    })
}

/// Target-domain scores (sigmoid outputs) for a batch of users.
///
/// Which inputs are required depends on the variant: ColdStart reads only
/// `source` (any `target` is ignored), Single only `target`, the others
/// both. In [`InferenceMode::Mean`] `z = μ` and `rng` is not touched.
pub fn predict_batch<R: Rng + ?Sized>(
    params: &ModelParams,
    source: Option<ArrayView2<f64>>,
    target: Option<ArrayView2<f64>>,
    aux: Option<ArrayView2<f64>>,
    mode: InferenceMode,
    rng: &mut R,
) -> Result<Array2<f64>> {
    let variant = params.variant;
    let need = |m: Option<ArrayView2<f64>>, what: &str| {
        m.map(|v| v.to_owned())
            .ok_or_else(|| Error::invalid(format!("{variant} model needs {what} rows for scoring")))
    };
    let rows = match (variant, source, target) {
        (Variant::Single, _, Some(t)) => t.nrows(),
        (_, Some(s), _) if variant != Variant::Single => s.nrows(),
        _ => return Err(Error::invalid(format!("{variant} model: missing input rows"))),
    };
    let noise = match mode {
        InferenceMode::Mean => Noise::zeros(params, rows),
        InferenceMode::Sample => sample_noise(params, rows, rng),
    };
    let n_s = params.dims.n_source;
    match variant {
        Variant::Single => {
            let t = need(target, "target")?;
            check_rows("target rows", &t, rows, params.dims.n_target)?;
            let pt = encoder_forward(&params.target_encoder, t, None, noise.target)?;
            Ok(decoder_forward(&params.target_decoder, pt.z)?.pop().unwrap())
        }
        Variant::Merged => {
            let s = need(source, "source")?;
            let t = need(target, "target")?;
            check_rows("target rows", &t, rows, params.dims.n_target)?;
            let x = concatenate![Axis(1), s.view(), t.view()];
            let pj = encoder_forward(&params.target_encoder, x, None, noise.target)?;
            let out = decoder_forward(&params.target_decoder, pj.z)?.pop().unwrap();
            Ok(out.slice(s![.., n_s..]).to_owned())
        }
        Variant::Generic | Variant::NoMmd | Variant::ColdStart | Variant::Aux => {
            let s = need(source, "source")?;
            let aux_pass = aux_features(params, aux.map(|a| a.to_owned()).as_ref(), rows)?;
            let aux_out = aux_pass.as_ref().map(|acts| acts.last().unwrap());
            let attach = params.aux_attach;
            let enc_s = params.source_encoder.as_ref().unwrap();
            let ps = encoder_forward(enc_s, s, aux_out.filter(|_| attach.source()), noise.source.unwrap())?;
            let dec_in = if variant == Variant::ColdStart {
                params.map_layer.as_ref().unwrap().forward(&ps.z.view())?
            } else {
                let t = need(target, "target")?;
                check_rows("target rows", &t, rows, params.dims.n_target)?;
                let pt = encoder_forward(
                    &params.target_encoder,
                    t,
                    aux_out.filter(|_| attach.target()),
                    noise.target,
                )?;
                concatenate![Axis(1), ps.z.view(), pt.z.view()]
            };
            Ok(decoder_forward(&params.target_decoder, dec_in)?.pop().unwrap())
        }
    }
}
