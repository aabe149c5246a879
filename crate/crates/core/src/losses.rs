//! Scalar objectives.
//!
//! All data terms are averaged over the batch rows and summed over items or
//! latent units; the regulariser is not batch-scaled. Gradient helpers return
//! derivatives of exactly these batch-averaged values.

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use serde::{Deserialize, Serialize};

use crate::model::Variant;
use crate::nn::ParamSet;
use crate::{Error, Result};

/// Predictions are clamped to `[CLAMP, 1 - CLAMP]` before taking logs.
pub const CLAMP: f64 = 1e-7;

fn clamp_prob(p: f64) -> f64 {
    p.clamp(CLAMP, 1.0 - CLAMP)
}

fn same_shape(a: &ArrayView2<f64>, b: &ArrayView2<f64>, what: &str) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::shape(format!(
            "{what}: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    if a.nrows() == 0 {
        return Err(Error::shape(format!("{what}: empty batch")));
    }
    Ok(())
}

/// Binary cross-entropy `-Σ_j [r ln r̂ + (1-r) ln(1-r̂)]`, batch mean.
pub fn bce(r: ArrayView2<f64>, r_hat: ArrayView2<f64>) -> Result<f64> {
    same_shape(&r, &r_hat, "bce")?;
    let mut total = 0.0;
    Zip::from(&r).and(&r_hat).for_each(|&y, &p| {
        let p = clamp_prob(p);
        total -= y * p.ln() + (1.0 - y) * (1.0 - p).ln();
    });
    Ok(total / r.nrows() as f64)
}

/// `H(r, r̂) + β H(r, r̂ ⊙ r)`. The masked term only sees observed entries,
/// where it reduces to `-β ln r̂_j`.
pub fn masked_recon(r: ArrayView2<f64>, r_hat: ArrayView2<f64>, beta: f64) -> Result<f64> {
    if !(beta >= 0.0) {
        return Err(Error::invalid(format!("beta must be >= 0, got {beta}")));
    }
    let base = bce(r, r_hat)?;
    let mut masked = 0.0;
    Zip::from(&r).and(&r_hat).for_each(|&y, &p| {
        if y != 0.0 {
            masked -= y * clamp_prob(p).ln();
        }
    });
    Ok(base + beta * masked / r.nrows() as f64)
}

/// Gradient of [`masked_recon`] w.r.t. the sigmoid pre-activations that
/// produced `r_hat`. Clamped entries get zero gradient.
pub fn masked_recon_logit_grad(r: ArrayView2<f64>, r_hat: ArrayView2<f64>, beta: f64) -> Array2<f64> {
    let scale = 1.0 / r.nrows() as f64;
    let mut grad = Array2::zeros(r.raw_dim());
    Zip::from(&mut grad)
        .and(&r)
        .and(&r_hat)
        .for_each(|g, &y, &p| {
            if p > CLAMP && p < 1.0 - CLAMP {
                *g = scale * ((p - y) - beta * y * (1.0 - p));
            }
        });
    grad
}

/// `0.5 Σ_l (exp(lv) + μ² - 1 - lv)` against N(0, I), batch mean.
pub fn kl_divergence(mu: ArrayView2<f64>, logvar: ArrayView2<f64>) -> Result<f64> {
    same_shape(&mu, &logvar, "kl")?;
    let mut total = 0.0;
    Zip::from(&mu).and(&logvar).for_each(|&m, &lv| {
        total += 0.5 * (lv.exp() + m * m - 1.0 - lv);
    });
    Ok(total / mu.nrows() as f64)
}

/// `(∂KL/∂μ, ∂KL/∂logvar)` for the batch-mean KL.
pub fn kl_grad(mu: ArrayView2<f64>, logvar: ArrayView2<f64>) -> (Array2<f64>, Array2<f64>) {
    let scale = 1.0 / mu.nrows() as f64;
    (
        mu.mapv(|m| m * scale),
        logvar.mapv(|lv| 0.5 * (lv.exp() - 1.0) * scale),
    )
}

/// `λ Σ ‖θ‖²` over every tensor of `params`.
pub fn l2_reg<P: ParamSet + ?Sized>(params: &P, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    lambda * params.sum_squares()
}

/// Adds `2 λ θ` to `grads`.
pub fn l2_reg_grad<P: ParamSet + ?Sized, G: ParamSet + ?Sized>(params: &P, lambda: f64, grads: &mut G) {
    if lambda == 0.0 {
        return;
    }
    for (p, g) in params.tensors().iter().zip(grads.tensors_mut()) {
        for (gi, pi) in g.data.iter_mut().zip(p.data) {
            *gi += 2.0 * lambda * pi;
        }
    }
}

fn column_means(z: &ArrayView2<f64>) -> Array1<f64> {
    z.mean_axis(Axis(0)).expect("non-empty batch")
}

fn check_latents(zs: &ArrayView2<f64>, zt: &ArrayView2<f64>, what: &str) -> Result<()> {
    if zs.ncols() != zt.ncols() {
        return Err(Error::shape(format!(
            "{what}: latent widths {} vs {}",
            zs.ncols(),
            zt.ncols()
        )));
    }
    if zs.nrows() == 0 || zt.nrows() == 0 {
        return Err(Error::shape(format!("{what}: empty batch")));
    }
    Ok(())
}

/// `‖mean(Z_S) - mean(Z_T)‖²` over the batch.
pub fn mmd_linear(zs: ArrayView2<f64>, zt: ArrayView2<f64>) -> Result<f64> {
    check_latents(&zs, &zt, "mmd")?;
    let diff = column_means(&zs) - column_means(&zt);
    Ok(diff.dot(&diff))
}

/// `(∂/∂Z_S, ∂/∂Z_T)` of [`mmd_linear`].
pub fn mmd_grad(zs: ArrayView2<f64>, zt: ArrayView2<f64>) -> (Array2<f64>, Array2<f64>) {
    let diff = column_means(&zs) - column_means(&zt);
    let gs = &diff * (2.0 / zs.nrows() as f64);
    let gt = &diff * (-2.0 / zt.nrows() as f64);
    (
        gs.broadcast(zs.raw_dim()).unwrap().to_owned(),
        gt.broadcast(zt.raw_dim()).unwrap().to_owned(),
    )
}

/// `(1/L) Σ_l (z'_l - z_l)²`, batch mean.
pub fn mapping_loss(z_mapped: ArrayView2<f64>, z_target: ArrayView2<f64>) -> Result<f64> {
    same_shape(&z_mapped, &z_target, "mapping loss")?;
    let l = z_mapped.ncols() as f64;
    let mut total = 0.0;
    Zip::from(&z_mapped).and(&z_target).for_each(|&a, &b| {
        total += (a - b) * (a - b);
    });
    Ok(total / (l * z_mapped.nrows() as f64))
}

/// Gradient of [`mapping_loss`] w.r.t. `z_mapped`; the gradient w.r.t.
/// `z_target` is its negation.
pub fn mapping_grad(z_mapped: ArrayView2<f64>, z_target: ArrayView2<f64>) -> Array2<f64> {
    let scale = 2.0 / (z_mapped.ncols() as f64 * z_mapped.nrows() as f64);
    (&z_mapped - &z_target) * scale
}

/// Raw loss terms from one forward pass. Terms a variant does not produce
/// are `None`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossComponents {
    pub recon_source: Option<f64>,
    pub recon_target: Option<f64>,
    pub kl_source: Option<f64>,
    pub kl_target: Option<f64>,
    pub reg: Option<f64>,
    pub mmd: Option<f64>,
    pub map_loss: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub recon_source: f64,
    pub recon_target: f64,
    pub kl_source: f64,
    pub kl_target: f64,
    pub reg: f64,
    pub mmd: f64,
    pub map_loss: f64,
    pub total: f64,
}

impl LossBreakdown {
    /// `self += other * weight`, used for epoch averages.
    pub fn accumulate(&mut self, other: &LossBreakdown, weight: f64) {
        self.recon_source += weight * other.recon_source;
        self.recon_target += weight * other.recon_target;
        self.kl_source += weight * other.kl_source;
        self.kl_target += weight * other.kl_target;
        self.reg += weight * other.reg;
        self.mmd += weight * other.mmd;
        self.map_loss += weight * other.map_loss;
        self.total += weight * other.total;
    }

    pub fn is_finite(&self) -> bool {
        [
            self.recon_source,
            self.recon_target,
            self.kl_source,
            self.kl_target,
            self.reg,
            self.mmd,
            self.map_loss,
            self.total,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// Sums the terms each variant optimises.
///
/// | variant   | total                                   |
/// |-----------|-----------------------------------------|
/// | Generic   | recon'_S + KL_S + recon'_T + KL_T + reg + mmd |
/// | Aux       | same as Generic                         |
/// | NoMMD     | Generic without mmd (still reported)    |
/// | ColdStart | Generic + map_loss                      |
/// | Single    | recon'_T + KL_T + reg                   |
/// | Merged    | recon'_S + recon'_T + KL + reg, one joint VAE whose KL is reported as `kl_target` |
pub fn compose_total(variant: Variant, c: &LossComponents) -> Result<LossBreakdown> {
    let need = |v: Option<f64>, component: &'static str| {
        v.ok_or(Error::MissingComponent {
            component,
            variant: variant.to_string(),
        })
    };
    let mut out = LossBreakdown {
        recon_source: c.recon_source.unwrap_or(0.0),
        recon_target: c.recon_target.unwrap_or(0.0),
        kl_source: c.kl_source.unwrap_or(0.0),
        kl_target: c.kl_target.unwrap_or(0.0),
        reg: c.reg.unwrap_or(0.0),
        mmd: c.mmd.unwrap_or(0.0),
        map_loss: c.map_loss.unwrap_or(0.0),
        total: 0.0,
    };
    let rt = need(c.recon_target, "recon_target")?;
    let kt = need(c.kl_target, "kl_target")?;
    let reg = need(c.reg, "reg")?;
    out.total = match variant {
        Variant::Single => rt + kt + reg,
        Variant::Merged => need(c.recon_source, "recon_source")? + rt + kt + reg,
        Variant::Generic | Variant::Aux | Variant::NoMmd | Variant::ColdStart => {
            let rs = need(c.recon_source, "recon_source")?;
            let ks = need(c.kl_source, "kl_source")?;
            let mut total = rs + ks + rt + kt + reg;
            if variant != Variant::NoMmd {
                total += need(c.mmd, "mmd")?;
            }
            if variant == Variant::ColdStart {
                total += need(c.map_loss, "map_loss")?;
            }
            total
        }
    };
    Ok(out)
}
