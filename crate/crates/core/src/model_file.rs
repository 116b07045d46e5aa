//! On-disk model format shared by every paradigm.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::anfis::AnfisModel;
use crate::cart::TreeNode;
use crate::data::{check_inputs, Normalization, FIELD_RANGES, INPUT_FIELDS};
use crate::error::{Error, Result};
use crate::fuzzy::MamdaniModel;
use crate::mlp::MlpModel;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model", rename_all = "lowercase")]
pub enum TrainedModel {
    Anfis(AnfisModel),
    Mamdani(MamdaniModel),
    Mlp(MlpModel),
    Cart(TreeNode),
}

impl TrainedModel {
    pub fn kind(&self) -> &'static str {
        match self {
            TrainedModel::Anfis(_) => "anfis",
            TrainedModel::Mamdani(_) => "mamdani",
            TrainedModel::Mlp(_) => "mlp",
            TrainedModel::Cart(_) => "cart",
        }
    }

    /// Prediction on the normalised scale.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        match self {
            TrainedModel::Anfis(m) => m.predict(x),
            TrainedModel::Mamdani(m) => Ok(m.predict(x)),
            TrainedModel::Mlp(m) => m.forward(x),
            TrainedModel::Cart(t) => Ok(t.predict(x)),
        }
    }

    fn check_dim(&self) -> Result<()> {
        let d = match self {
            TrainedModel::Anfis(m) => m.input_dim(),
            TrainedModel::Mamdani(m) => m.inputs().len(),
            TrainedModel::Mlp(m) => m.input_dim(),
            TrainedModel::Cart(t) => return t.validate(INPUT_FIELDS),
        };
        if d != INPUT_FIELDS {
            return Err(Error::invalid(format!("model expects {d} inputs, not {INPUT_FIELDS}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub version: u32,
    pub normalization: Normalization,
    pub model: TrainedModel,
}

impl ModelFile {
    pub fn new(model: TrainedModel, normalization: Normalization) -> Self {
        ModelFile {
            version: FORMAT_VERSION,
            normalization,
            model,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: ModelFile = serde_json::from_str(s)?;
        if f.version != FORMAT_VERSION {
            return Err(Error::invalid(format!("unsupported model format version {}", f.version)));
        }
        f.model.check_dim()?;
        Ok(f)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }

    /// Score in points for physical inputs (fuel, intercept time, weapon, danger).
    pub fn predict(&self, x: &[f64; 4]) -> Result<f64> {
        check_inputs(x)?;
        let y = self.model.predict(&self.normalization.normalize_inputs(x))?;
        let (lo, hi) = FIELD_RANGES[4];
        Ok(self.normalization.denormalize_score(y).clamp(lo, hi))
    }
}
