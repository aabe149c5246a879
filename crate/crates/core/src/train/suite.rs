use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{train, TrainHistory};
use crate::data::DatasetBundle;
use crate::model::{ModelConfig, ModelParams, Variant};
use crate::{Error, Result};

/// Ablation arms. The `…0` arms are their base variant with β = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteVariant {
    Generic,
    Single,
    Single0,
    Merged,
    Merged0,
    NoMmd,
}

impl SuiteVariant {
    pub const ALL: [SuiteVariant; 6] = [
        SuiteVariant::Generic,
        SuiteVariant::Single,
        SuiteVariant::Single0,
        SuiteVariant::Merged,
        SuiteVariant::Merged0,
        SuiteVariant::NoMmd,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteVariant::Generic => "generic",
            SuiteVariant::Single => "single",
            SuiteVariant::Single0 => "single0",
            SuiteVariant::Merged => "merged",
            SuiteVariant::Merged0 => "merged0",
            SuiteVariant::NoMmd => "no-mmd",
        }
    }

    pub fn model_variant(self) -> Variant {
        match self {
            SuiteVariant::Generic => Variant::Generic,
            SuiteVariant::Single | SuiteVariant::Single0 => Variant::Single,
            SuiteVariant::Merged | SuiteVariant::Merged0 => Variant::Merged,
            SuiteVariant::NoMmd => Variant::NoMmd,
        }
    }

    pub fn config(self, base: &ModelConfig) -> ModelConfig {
        let beta = match self {
            SuiteVariant::Single0 | SuiteVariant::Merged0 => 0.0,
            _ => base.beta,
        };
        ModelConfig {
            variant: self.model_variant(),
            beta,
            ..base.clone()
        }
    }
}

impl fmt::Display for SuiteVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SuiteVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase();
        match norm.as_str() {
            "single0" => Ok(SuiteVariant::Single0),
            "merged0" => Ok(SuiteVariant::Merged0),
            other => match other.parse::<Variant>()? {
                Variant::Generic => Ok(SuiteVariant::Generic),
                Variant::Single => Ok(SuiteVariant::Single),
                Variant::Merged => Ok(SuiteVariant::Merged),
                Variant::NoMmd => Ok(SuiteVariant::NoMmd),
                v => Err(Error::invalid(format!("{v} is not an ablation arm"))),
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteRun {
    pub variant: SuiteVariant,
    pub config: ModelConfig,
    pub params: ModelParams,
    pub history: TrainHistory,
}

/// Trains each arm on the same bundle with the same seed, in order.
pub fn run_variant_suite(
    bundle: &DatasetBundle,
    base: &ModelConfig,
    variants: &[SuiteVariant],
) -> Result<Vec<SuiteRun>> {
    variants
        .iter()
        .map(|&variant| {
            let config = variant.config(base);
            let (params, history) = train(bundle, &config)?;
            Ok(SuiteRun {
                variant,
                config,
                params,
                history,
            })
        })
        .collect()
}
