use rand::Rng;

use super::config::{AuxAttach, ModelConfig, ModelDims, Variant};
use crate::nn::{Activation, DenseLayer, ParamSet, TensorMut, TensorRef};
use crate::{seed, Error, Result};

/// Tanh hidden stack followed by parallel identity heads for μ and log σ².
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderStack {
    pub hidden: Vec<DenseLayer>,
    pub mu_head: DenseLayer,
    pub logvar_head: DenseLayer,
}

impl EncoderStack {
    fn new<R: Rng + ?Sized>(
        input_dim: usize,
        hidden: &[usize],
        extra_head_inputs: usize,
        latent: usize,
        rng: &mut R,
    ) -> Self {
        let mut layers = Vec::with_capacity(hidden.len());
        let mut width = input_dim;
        for &h in hidden {
            layers.push(DenseLayer::new(width, h, Activation::Tanh, rng));
            width = h;
        }
        let head_in = width + extra_head_inputs;
        EncoderStack {
            hidden: layers,
            mu_head: DenseLayer::new(head_in, latent, Activation::Identity, rng),
            logvar_head: DenseLayer::new(head_in, latent, Activation::Identity, rng),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.hidden
            .first()
            .map_or(self.mu_head.input_dim(), DenseLayer::input_dim)
    }

    pub fn latent_dim(&self) -> usize {
        self.mu_head.output_dim()
    }

    /// Width of the last hidden layer (the input width when there is none).
    pub fn hidden_output_dim(&self) -> usize {
        self.hidden
            .last()
            .map_or(self.input_dim(), DenseLayer::output_dim)
    }

    /// Columns of the head input beyond the hidden stack, fed by the
    /// auxiliary sub-encoder.
    pub fn aux_width(&self) -> usize {
        self.mu_head.input_dim() - self.hidden_output_dim()
    }

    fn zeros_like(&self) -> Self {
        EncoderStack {
            hidden: self.hidden.iter().map(DenseLayer::zeros_like).collect(),
            mu_head: self.mu_head.zeros_like(),
            logvar_head: self.logvar_head.zeros_like(),
        }
    }

    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<TensorRef<'a>>) {
        for (i, layer) in self.hidden.iter().enumerate() {
            push_layer(layer, &format!("{prefix}.hidden.{i}"), out);
        }
        push_layer(&self.mu_head, &format!("{prefix}.mu"), out);
        push_layer(&self.logvar_head, &format!("{prefix}.logvar"), out);
    }

    fn collect_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<TensorMut<'a>>) {
        for (i, layer) in self.hidden.iter_mut().enumerate() {
            push_layer_mut(layer, &format!("{prefix}.hidden.{i}"), out);
        }
        push_layer_mut(&mut self.mu_head, &format!("{prefix}.mu"), out);
        push_layer_mut(&mut self.logvar_head, &format!("{prefix}.logvar"), out);
    }
}

/// Tanh hidden stack ending in a sigmoid output layer.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderStack {
    /// Hidden layers followed by the sigmoid output layer.
    pub layers: Vec<DenseLayer>,
}

impl DecoderStack {
    fn new<R: Rng + ?Sized>(input_dim: usize, hidden: &[usize], output_dim: usize, rng: &mut R) -> Self {
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut width = input_dim;
        for &h in hidden {
            layers.push(DenseLayer::new(width, h, Activation::Tanh, rng));
            width = h;
        }
        layers.push(DenseLayer::new(width, output_dim, Activation::Sigmoid, rng));
        DecoderStack { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().output_dim()
    }

    fn zeros_like(&self) -> Self {
        DecoderStack {
            layers: self.layers.iter().map(DenseLayer::zeros_like).collect(),
        }
    }

    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<TensorRef<'a>>) {
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let name = if i == last {
                format!("{prefix}.output")
            } else {
                format!("{prefix}.hidden.{i}")
            };
            push_layer(layer, &name, out);
        }
    }

    fn collect_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<TensorMut<'a>>) {
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter_mut().enumerate() {
            let name = if i == last {
                format!("{prefix}.output")
            } else {
                format!("{prefix}.hidden.{i}")
            };
            push_layer_mut(layer, &name, out);
        }
    }
}

fn push_layer<'a>(layer: &'a DenseLayer, prefix: &str, out: &mut Vec<TensorRef<'a>>) {
    out.extend(layer.tensors().into_iter().map(|mut t| {
        t.name = format!("{prefix}.{}", t.name);
        t
    }));
}

fn push_layer_mut<'a>(layer: &'a mut DenseLayer, prefix: &str, out: &mut Vec<TensorMut<'a>>) {
    out.extend(layer.tensors_mut().into_iter().map(|mut t| {
        t.name = format!("{prefix}.{}", t.name);
        t
    }));
}

/// Every trainable tensor of one model.
///
/// For [`Variant::Single`] only the target stacks exist. For
/// [`Variant::Merged`] the target stacks are the joint VAE over
/// `[r_S ; r_T]` and reconstruct both domains.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub variant: Variant,
    pub dims: ModelDims,
    pub source_encoder: Option<EncoderStack>,
    pub target_encoder: EncoderStack,
    pub source_decoder: Option<DecoderStack>,
    pub target_decoder: DecoderStack,
    /// Cold-start latent map `z'_T = tanh(W' z_S + b')`.
    pub map_layer: Option<DenseLayer>,
    /// Auxiliary sub-encoder (tanh layers).
    pub aux_encoder: Option<Vec<DenseLayer>>,
    pub aux_attach: AuxAttach,
}

impl ModelParams {
    /// Glorot weights and zero biases drawn from the config's `init` stream.
    pub fn init(config: &ModelConfig, dims: ModelDims) -> Result<Self> {
        let mut rng = seed::rng(config.seed, seed::INIT);
        Self::init_with(config, dims, &mut rng)
    }

    pub fn init_with<R: Rng + ?Sized>(config: &ModelConfig, dims: ModelDims, rng: &mut R) -> Result<Self> {
        config.validate()?;
        if dims.n_source == 0 || dims.n_target == 0 {
            return Err(Error::shape("item counts must be positive"));
        }
        let l = config.latent_dim;
        let variant = config.variant;
        let aux_width = match variant {
            Variant::Aux => {
                let d = dims
                    .aux_dim
                    .ok_or_else(|| Error::invalid("aux variant needs an auxiliary dimension"))?;
                if d == 0 {
                    return Err(Error::invalid("auxiliary dimension must be >= 1"));
                }
                *config.aux_hidden.last().expect("validated non-empty")
            }
            _ => 0,
        };
        let reversed = |h: &[usize]| h.iter().rev().copied().collect::<Vec<_>>();

        let params = match variant {
            Variant::Single => {
                let target_encoder = EncoderStack::new(dims.n_target, &config.target_hidden, 0, l, rng);
                let target_decoder = DecoderStack::new(l, &reversed(&config.target_hidden), dims.n_target, rng);
                ModelParams {
                    variant,
                    dims,
                    source_encoder: None,
                    target_encoder,
                    source_decoder: None,
                    target_decoder,
                    map_layer: None,
                    aux_encoder: None,
                    aux_attach: config.aux_attach,
                }
            }
            Variant::Merged => {
                let hidden: Vec<usize> = config.target_hidden.iter().map(|h| 2 * h).collect();
                let n = dims.n_source + dims.n_target;
                let target_encoder = EncoderStack::new(n, &hidden, 0, 2 * l, rng);
                let target_decoder = DecoderStack::new(2 * l, &reversed(&hidden), n, rng);
                ModelParams {
                    variant,
                    dims,
                    source_encoder: None,
                    target_encoder,
                    source_decoder: None,
                    target_decoder,
                    map_layer: None,
                    aux_encoder: None,
                    aux_attach: config.aux_attach,
                }
            }
            Variant::Generic | Variant::NoMmd | Variant::ColdStart | Variant::Aux => {
                let attach = config.aux_attach;
                let src_extra = if attach.source() { aux_width } else { 0 };
                let tgt_extra = if attach.target() { aux_width } else { 0 };
                let source_encoder =
                    EncoderStack::new(dims.n_source, &config.source_hidden, src_extra, l, rng);
                let target_encoder =
                    EncoderStack::new(dims.n_target, &config.target_hidden, tgt_extra, l, rng);
                let source_decoder =
                    DecoderStack::new(l, &reversed(&config.source_hidden), dims.n_source, rng);
                let dec_in = if variant == Variant::ColdStart { l } else { 2 * l };
                let target_decoder =
                    DecoderStack::new(dec_in, &reversed(&config.target_hidden), dims.n_target, rng);
                let map_layer = (variant == Variant::ColdStart)
                    .then(|| DenseLayer::new(l, l, Activation::Tanh, rng));
                let aux_encoder = (variant == Variant::Aux).then(|| {
                    let mut width = dims.aux_dim.unwrap();
                    config
                        .aux_hidden
                        .iter()
                        .map(|&h| {
                            let layer = DenseLayer::new(width, h, Activation::Tanh, rng);
                            width = h;
                            layer
                        })
                        .collect()
                });
                ModelParams {
                    variant,
                    dims,
                    source_encoder: Some(source_encoder),
                    target_encoder,
                    source_decoder: Some(source_decoder),
                    target_decoder,
                    map_layer,
                    aux_encoder,
                    aux_attach: attach,
                }
            }
        };
        params.check_schema()?;
        Ok(params)
    }

    pub fn zeros_like(&self) -> Self {
        ModelParams {
            variant: self.variant,
            dims: self.dims,
            source_encoder: self.source_encoder.as_ref().map(EncoderStack::zeros_like),
            target_encoder: self.target_encoder.zeros_like(),
            source_decoder: self.source_decoder.as_ref().map(DecoderStack::zeros_like),
            target_decoder: self.target_decoder.zeros_like(),
            map_layer: self.map_layer.as_ref().map(DenseLayer::zeros_like),
            aux_encoder: self
                .aux_encoder
                .as_ref()
                .map(|layers| layers.iter().map(DenseLayer::zeros_like).collect()),
            aux_attach: self.aux_attach,
        }
    }

    pub fn latent_dim(&self) -> usize {
        match self.variant {
            Variant::Merged => self.target_encoder.latent_dim() / 2,
            _ => self.target_encoder.latent_dim(),
        }
    }

    /// Checks that the stacks present and their widths agree with the
    /// variant tag.
    pub fn check_schema(&self) -> Result<()> {
        let v = self.variant;
        let fail = |msg: String| Err(Error::shape(format!("{v} model: {msg}")));
        let linked = v.is_linked();
        if self.source_encoder.is_some() != linked || self.source_decoder.is_some() != linked {
            return fail("source stacks present iff the variant is linked".into());
        }
        if self.map_layer.is_some() != (v == Variant::ColdStart) {
            return fail("map layer present iff cold-start".into());
        }
        if self.aux_encoder.is_some() != (v == Variant::Aux) {
            return fail("aux sub-encoder present iff aux".into());
        }
        let l = self.target_encoder.latent_dim();
        let n_t = self.dims.n_target;
        let n_s = self.dims.n_source;
        match v {
            Variant::Merged => {
                if self.target_encoder.input_dim() != n_s + n_t
                    || self.target_decoder.output_dim() != n_s + n_t
                {
                    return fail("joint VAE width must be n_S + n_T".into());
                }
                if self.target_decoder.input_dim() != l {
                    return fail("decoder input must equal latent width".into());
                }
            }
            Variant::Single => {
                if self.target_encoder.input_dim() != n_t || self.target_decoder.output_dim() != n_t {
                    return fail("target widths must be n_T".into());
                }
                if self.target_decoder.input_dim() != l {
                    return fail("decoder input must equal latent width".into());
                }
            }
            _ => {
                let enc_s = self.source_encoder.as_ref().unwrap();
                let dec_s = self.source_decoder.as_ref().unwrap();
                if enc_s.input_dim() != n_s || dec_s.output_dim() != n_s || dec_s.input_dim() != l {
                    return fail("source VAE widths inconsistent".into());
                }
                if enc_s.latent_dim() != l {
                    return fail("source and target latent widths differ".into());
                }
                if self.target_encoder.input_dim() != n_t || self.target_decoder.output_dim() != n_t {
                    return fail("target widths must be n_T".into());
                }
                let want = if v == Variant::ColdStart { l } else { 2 * l };
                if self.target_decoder.input_dim() != want {
                    return fail(format!(
                        "target decoder input is {}, expected {want}",
                        self.target_decoder.input_dim()
                    ));
                }
                if let Some(map) = &self.map_layer {
                    if map.input_dim() != l || map.output_dim() != l {
                        return fail("map layer must be L x L".into());
                    }
                }
                let aux_out = self
                    .aux_encoder
                    .as_ref()
                    .and_then(|layers| layers.last())
                    .map_or(0, DenseLayer::output_dim);
                if let Some(layers) = &self.aux_encoder {
                    if Some(layers[0].input_dim()) != self.dims.aux_dim {
                        return fail("sub-encoder input width differs from aux dimension".into());
                    }
                }
                let expect_s = if self.aux_attach.source() { aux_out } else { 0 };
                let expect_t = if self.aux_attach.target() { aux_out } else { 0 };
                if enc_s.aux_width() != expect_s || self.target_encoder.aux_width() != expect_t {
                    return fail("head input widths disagree with the aux attachment".into());
                }
            }
        }
        Ok(())
    }
}

impl ParamSet for ModelParams {
    fn tensors(&self) -> Vec<TensorRef<'_>> {
        let mut out = Vec::new();
        if let Some(enc) = &self.source_encoder {
            enc.collect("source_encoder", &mut out);
        }
        self.target_encoder.collect("target_encoder", &mut out);
        if let Some(dec) = &self.source_decoder {
            dec.collect("source_decoder", &mut out);
        }
        self.target_decoder.collect("target_decoder", &mut out);
        if let Some(map) = &self.map_layer {
            push_layer(map, "map", &mut out);
        }
        if let Some(layers) = &self.aux_encoder {
            for (i, layer) in layers.iter().enumerate() {
                push_layer(layer, &format!("aux_encoder.{i}"), &mut out);
            }
        }
        out
    }

    fn tensors_mut(&mut self) -> Vec<TensorMut<'_>> {
        let mut out = Vec::new();
        if let Some(enc) = &mut self.source_encoder {
            enc.collect_mut("source_encoder", &mut out);
        }
        self.target_encoder.collect_mut("target_encoder", &mut out);
        if let Some(dec) = &mut self.source_decoder {
            dec.collect_mut("source_decoder", &mut out);
        }
        self.target_decoder.collect_mut("target_decoder", &mut out);
        if let Some(map) = &mut self.map_layer {
            push_layer_mut(map, "map", &mut out);
        }
        if let Some(layers) = &mut self.aux_encoder {
            for (i, layer) in layers.iter_mut().enumerate() {
                push_layer_mut(layer, &format!("aux_encoder.{i}"), &mut out);
            }
        }
        out
    }
}

/// Gradients for every tensor of a [`ModelParams`], with identical names and
/// shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct GradBundle(pub ModelParams);

impl GradBundle {
    pub fn zeros_for(params: &ModelParams) -> Self {
        GradBundle(params.zeros_like())
    }

    pub fn ensure_finite(&self) -> Result<()> {
        match self.0.first_non_finite() {
            Some(name) => Err(Error::NonFinite {
                what: "gradient".into(),
                context: name,
            }),
            None => Ok(()),
        }
    }
}

impl ParamSet for GradBundle {
    fn tensors(&self) -> Vec<TensorRef<'_>> {
        self.0.tensors()
    }

    fn tensors_mut(&mut self) -> Vec<TensorMut<'_>> {
        self.0.tensors_mut()
    }
}
