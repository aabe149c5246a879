use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Generic,
    Single,
    Merged,
    NoMmd,
    ColdStart,
    Aux,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Generic,
        Variant::Single,
        Variant::Merged,
        Variant::NoMmd,
        Variant::ColdStart,
        Variant::Aux,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Generic => "generic",
            Variant::Single => "single",
            Variant::Merged => "merged",
            Variant::NoMmd => "no-mmd",
            Variant::ColdStart => "cold-start",
            Variant::Aux => "aux",
        }
    }

    /// Variants with separate source and target VAEs.
    pub fn is_linked(self) -> bool {
        matches!(
            self,
            Variant::Generic | Variant::NoMmd | Variant::ColdStart | Variant::Aux
        )
    }

    /// Whether scoring needs the user's target-domain row.
    pub fn uses_target_input(self) -> bool {
        self != Variant::ColdStart
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Ok(match norm.as_str() {
            "generic" => Variant::Generic,
            "single" => Variant::Single,
            "merged" => Variant::Merged,
            "no-mmd" | "nommd" | "mmd0" => Variant::NoMmd,
            "cold-start" | "coldstart" | "cold" => Variant::ColdStart,
            "aux" => Variant::Aux,
            _ => return Err(Error::invalid(format!("unknown variant `{s}`"))),
        })
    }
}

/// How the latent code is chosen at scoring time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InferenceMode {
    /// `z = μ`
    Mean,
    /// `z = μ + σ ε` with fresh noise.
    Sample,
}

/// Which domain encoders receive the auxiliary sub-encoder output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AuxAttach {
    Both,
    Source,
    Target,
}

impl AuxAttach {
    pub fn source(self) -> bool {
        matches!(self, AuxAttach::Both | AuxAttach::Source)
    }

    pub fn target(self) -> bool {
        matches!(self, AuxAttach::Both | AuxAttach::Target)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EarlyStop {
    pub patience: usize,
    pub min_delta: f64,
}

impl Default for EarlyStop {
    fn default() -> Self {
        EarlyStop {
            patience: 10,
            min_delta: 1e-4,
        }
    }
}

/// Item counts the parameters are shaped for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDims {
    pub n_source: usize,
    pub n_target: usize,
    pub aux_dim: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub variant: Variant,
    /// Extra weight on the reconstruction of observed interactions.
    pub beta: f64,
    pub lambda_reg: f64,
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub latent_dim: usize,
    /// Encoder hidden widths; decoders mirror them.
    pub source_hidden: Vec<usize>,
    pub target_hidden: Vec<usize>,
    /// Auxiliary sub-encoder widths (input width comes from the data).
    pub aux_hidden: Vec<usize>,
    pub aux_attach: AuxAttach,
    /// Treat `z_T` as a constant inside the cold-start mapping loss.
    pub map_stop_gradient: bool,
    pub seed: u64,
    pub inference: InferenceMode,
    pub early_stop: Option<EarlyStop>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self::movielens(Variant::Generic)
    }
}

impl ModelConfig {
    /// `n-256-128` encoders, batch 32, β = 15.
    pub fn movielens(variant: Variant) -> Self {
        ModelConfig {
            variant,
            beta: 15.0,
            lambda_reg: 1e-4,
            lr: 0.001,
            batch_size: 32,
            epochs: 100,
            latent_dim: 128,
            source_hidden: vec![256],
            target_hidden: vec![256],
            aux_hidden: vec![128],
            aux_attach: AuxAttach::Both,
            map_stop_gradient: false,
            seed: 0,
            inference: InferenceMode::Mean,
            early_stop: None,
        }
    }

    /// `n-512-256-128` encoders, batch 128, β = 40.
    pub fn amazon(variant: Variant) -> Self {
        ModelConfig {
            beta: 40.0,
            batch_size: 128,
            source_hidden: vec![512, 256],
            target_hidden: vec![512, 256],
            ..Self::movielens(variant)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(Error::invalid(format!("beta must be >= 0, got {}", self.beta)));
        }
        if !(self.lambda_reg >= 0.0) || !self.lambda_reg.is_finite() {
            return Err(Error::invalid(format!(
                "lambda_reg must be >= 0, got {}",
                self.lambda_reg
            )));
        }
        if !(self.lr > 0.0) || !self.lr.is_finite() {
            return Err(Error::invalid(format!("lr must be > 0, got {}", self.lr)));
        }
        if self.latent_dim == 0 {
            return Err(Error::invalid("latent_dim must be >= 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size must be >= 1"));
        }
        let widths = self
            .source_hidden
            .iter()
            .chain(&self.target_hidden)
            .chain(&self.aux_hidden);
        if widths.into_iter().any(|&w| w == 0) {
            return Err(Error::invalid("hidden widths must be >= 1"));
        }
        if self.variant == Variant::Aux && self.aux_hidden.is_empty() {
            return Err(Error::invalid("aux variant needs at least one sub-encoder layer"));
        }
        Ok(())
    }

    /// Latent width of the target-side encoder (doubled for Merged).
    pub fn target_latent(&self) -> usize {
        if self.variant == Variant::Merged {
            2 * self.latent_dim
        } else {
            self.latent_dim
        }
    }
}
