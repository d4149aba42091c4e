//! JSON documents for hidden-variable models.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::HiddenVariableModel;
use super::quadrature::QuadratureSpec;
use super::two_tier::{effective_response, TwoTierModel};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ModelDocument {
    OneTier(HiddenVariableModel),
    TwoTier(TwoTierModel),
}

impl ModelDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model documents always serialize")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    /// The one-tier model whose rates this document predicts.
    pub fn resolve(&self, quad: &QuadratureSpec) -> Result<HiddenVariableModel> {
        match self {
            ModelDocument::OneTier(m) => {
                m.check_admissible(quad)?;
                Ok(m.clone())
            }
            ModelDocument::TwoTier(m) => effective_response(m, quad),
        }
    }
}

impl From<HiddenVariableModel> for ModelDocument {
    fn from(m: HiddenVariableModel) -> Self {
        ModelDocument::OneTier(m)
    }
}

impl From<TwoTierModel> for ModelDocument {
    fn from(m: TwoTierModel) -> Self {
        ModelDocument::TwoTier(m)
    }
}
