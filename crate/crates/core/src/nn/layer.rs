use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::params::{ParamSet, TensorMut, TensorRef};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Sigmoid,
    Identity,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Sigmoid => sigmoid(x),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the activation output `y`.
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Identity => 1.0,
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Uniform Glorot matrix of shape `fan_out × fan_in`.
pub fn glorot_init<R: Rng + ?Sized>(fan_in: usize, fan_out: usize, rng: &mut R) -> Array2<f64> {
    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
    Array2::from_shape_simple_fn((fan_out, fan_in), || rng.random_range(-bound..=bound))
}

/// Fully connected layer `y = act(x Wᵀ + b)` over a batch of row vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    /// `out × in`
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn new<R: Rng + ?Sized>(
        fan_in: usize,
        fan_out: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        DenseLayer {
            weight: glorot_init(fan_in, fan_out, rng),
            bias: Array1::zeros(fan_out),
            activation,
        }
    }

    pub fn zeros(fan_in: usize, fan_out: usize, activation: Activation) -> Self {
        DenseLayer {
            weight: Array2::zeros((fan_out, fan_in)),
            bias: Array1::zeros(fan_out),
            activation,
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.input_dim(), self.output_dim(), self.activation)
    }

    pub fn input_dim(&self) -> usize {
        self.weight.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.weight.nrows()
    }

    pub fn forward(&self, x: &ArrayView2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.input_dim() {
            return Err(Error::shape(format!(
                "layer expects {} inputs, got {}",
                self.input_dim(),
                x.ncols()
            )));
        }
        let mut out = x.dot(&self.weight.t());
        out += &self.bias;
        let act = self.activation;
        out.mapv_inplace(|v| act.apply(v));
        Ok(out)
    }

    /// Converts a gradient w.r.t. this layer's output into one w.r.t. its
    /// pre-activation, given the cached output.
    pub fn preactivation_grad(&self, output: &Array2<f64>, mut grad_out: Array2<f64>) -> Array2<f64> {
        if self.activation != Activation::Identity {
            let act = self.activation;
            ndarray::Zip::from(&mut grad_out)
                .and(output)
                .for_each(|g, &y| *g *= act.derivative_from_output(y));
        }
        grad_out
    }

    /// Accumulates parameter gradients for a pre-activation gradient and
    /// optionally returns the gradient w.r.t. the layer input.
    pub fn backward_preactivation(
        &self,
        input: &ArrayView2<f64>,
        grad_pre: &Array2<f64>,
        grads: &mut DenseLayer,
        need_input_grad: bool,
    ) -> Option<Array2<f64>> {
        grads.weight += &grad_pre.t().dot(input);
        grads.bias += &grad_pre.sum_axis(Axis(0));
        need_input_grad.then(|| grad_pre.dot(&self.weight))
    }
}

impl ParamSet for DenseLayer {
    fn tensors(&self) -> Vec<TensorRef<'_>> {
        vec![
            TensorRef {
                name: "weight".into(),
                shape: self.weight.shape().to_vec(),
                data: self.weight.as_slice().expect("standard layout"),
            },
            TensorRef {
                name: "bias".into(),
                shape: self.bias.shape().to_vec(),
                data: self.bias.as_slice().expect("standard layout"),
            },
        ]
    }

    fn tensors_mut(&mut self) -> Vec<TensorMut<'_>> {
        let wshape = self.weight.shape().to_vec();
        let bshape = self.bias.shape().to_vec();
        vec![
            TensorMut {
                name: "weight".into(),
                shape: wshape,
                data: self.weight.as_slice_mut().expect("standard layout"),
            },
            TensorMut {
                name: "bias".into(),
                shape: bshape,
                data: self.bias.as_slice_mut().expect("standard layout"),
            },
        ]
    }
}

/// Runs `x` through `layers`, returning every activation: `acts[0]` is the
/// input and `acts[k]` the output of layer `k - 1`.
pub fn forward_chain(layers: &[DenseLayer], x: Array2<f64>) -> Result<Vec<Array2<f64>>> {
    let mut acts = Vec::with_capacity(layers.len() + 1);
    acts.push(x);
    for layer in layers {
        let next = layer.forward(&acts.last().unwrap().view())?;
        acts.push(next);
    }
    Ok(acts)
}

/// Backpropagates a gradient w.r.t. the chain's final output through
/// `layers`, accumulating into `grads`. Returns the input gradient when
/// requested.
pub fn backward_chain(
    layers: &[DenseLayer],
    acts: &[Array2<f64>],
    grad_out: Array2<f64>,
    grads: &mut [DenseLayer],
    need_input_grad: bool,
) -> Option<Array2<f64>> {
    debug_assert_eq!(acts.len(), layers.len() + 1);
    let mut grad = Some(grad_out);
    for k in (0..layers.len()).rev() {
        let g = grad.take().expect("gradient present for inner layers");
        let pre = layers[k].preactivation_grad(&acts[k + 1], g);
        let want = k > 0 || need_input_grad;
        grad = layers[k].backward_preactivation(&acts[k].view(), &pre, &mut grads[k], want);
    }
    if layers.is_empty() {
        return if need_input_grad { grad } else { None };
    }
    grad
}
