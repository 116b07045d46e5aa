//! Per-paradigm training entry points on TACE datasets.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::anfis::{self, AnfisConfig, AnfisModel, LearningMode};
use crate::cart::{self, CartConfig};
use crate::data::{input_variables, output_variable, Dataset};
use crate::error::{Error, Result};
use crate::fuzzy::MfShape;
use crate::mamdani_learn::{ga_optimize, gd_tune, pipeline_rmse, wang_mendel, GaConfig, GdConfig};
use crate::mlp::{scg_train, MlpModel, ScgConfig};
use crate::model_file::{ModelFile, TrainedModel};
use crate::report::{curve_csv, TrainReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Anfis,
    AnfisBp,
    MamdaniGd,
    MamdaniGa,
    Mlp,
    Cart,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::Anfis,
        ModelKind::AnfisBp,
        ModelKind::MamdaniGd,
        ModelKind::MamdaniGa,
        ModelKind::Mlp,
        ModelKind::Cart,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Anfis => "anfis",
            ModelKind::AnfisBp => "anfis-bp",
            ModelKind::MamdaniGd => "mamdani-gd",
            ModelKind::MamdaniGa => "mamdani-ga",
            ModelKind::Mlp => "mlp",
            ModelKind::Cart => "cart",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::invalid(format!("unknown model kind '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnfisSettings {
    pub shape: MfShape,
    pub mf_count: usize,
    #[serde(flatten)]
    pub train: AnfisConfig,
}

impl Default for AnfisSettings {
    fn default() -> Self {
        AnfisSettings {
            shape: MfShape::Gaussian,
            mf_count: 3,
            train: AnfisConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MamdaniSettings {
    pub shape: MfShape,
    pub mf_count: usize,
    pub output_count: usize,
    pub gd: GdConfig,
    /// The GA seed is replaced by the run seed.
    pub ga: GaConfig,
}

impl Default for MamdaniSettings {
    fn default() -> Self {
        MamdaniSettings {
            shape: MfShape::Triangle,
            mf_count: 3,
            output_count: 3,
            gd: GdConfig::default(),
            ga: GaConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub anfis: AnfisSettings,
    pub mamdani: MamdaniSettings,
    pub mlp: ScgConfig,
    pub cart: CartConfig,
}

/// A trained model with its report and training curve.
#[derive(Debug, Clone)]
pub struct Trained {
    pub file: ModelFile,
    pub report: TrainReport,
    /// CSV with a header row.
    pub curve: String,
}

/// Trains `kind` on normalised `train`, reporting test error on `test` when non-empty.
pub fn train_model(kind: ModelKind, train: &Dataset, test: &Dataset, config: &TrainConfig, seed: u64) -> Result<Trained> {
    if train.is_empty() {
        return Err(Error::invalid("empty training data"));
    }
    let (tr, te) = (train.observations(), test.observations());
    let start = Instant::now();
    let (model, mut report, curve) = match kind {
        ModelKind::Anfis | ModelKind::AnfisBp => {
            let a = &config.anfis;
            let mut cfg = a.train;
            if kind == ModelKind::AnfisBp {
                cfg.mode = LearningMode::BackpropOnly;
            }
            let init = AnfisModel::new(input_variables(a.shape, a.mf_count)?)?;
            let (m, r) = anfis::train(init, &tr, &te, &cfg, seed)?;
            let curve = curve_csv("epoch", "train_rmse", &r.rmse_per_epoch);
            (TrainedModel::Anfis(m), r, curve)
        }
        ModelKind::MamdaniGd | ModelKind::MamdaniGa => {
            let s = &config.mamdani;
            let wm = wang_mendel(&tr, input_variables(s.shape, s.mf_count)?, output_variable(s.shape, s.output_count)?)?;
            if kind == ModelKind::MamdaniGd {
                let (m, r) = gd_tune(wm, &tr, &te, &s.gd, seed)?;
                let curve = curve_csv("epoch", "train_rmse", &r.rmse_per_epoch);
                (TrainedModel::Mamdani(m), r, curve)
            } else {
                let ga = GaConfig { seed, ..s.ga };
                let out = ga_optimize(&wm, &tr, &ga)?;
                let mut r = TrainReport::new(seed);
                r.rmse_per_epoch = out.best_fitness.iter().map(|f| -f).collect();
                r.final_train_rmse = pipeline_rmse(&out.model, &tr);
                r.final_test_rmse = if te.is_empty() { f64::NAN } else { pipeline_rmse(&out.model, &te) };
                r.rule_count = Some(out.model.rules().len());
                let curve = curve_csv("generation", "best_fitness", &out.best_fitness);
                (TrainedModel::Mamdani(out.model), r, curve)
            }
        }
        ModelKind::Mlp => {
            let init = MlpModel::random(tr.dim(), config.mlp.hidden_units, seed)?;
            let (m, r) = scg_train(init, &tr, &te, &config.mlp, seed)?;
            let curve = curve_csv("epoch", "train_rmse", &r.rmse_per_epoch);
            (TrainedModel::Mlp(m), r, curve)
        }
        ModelKind::Cart => {
            let (t, seq, r) = cart::cart_train(&tr, &te, &config.cart, seed)?;
            (TrainedModel::Cart(t), r, cart::relative_error_csv(&seq))
        }
    };
    report.wall_time = start.elapsed().as_secs_f64();
    Ok(Trained {
        file: ModelFile::new(model, train.normalization),
        report,
        curve,
    })
}
