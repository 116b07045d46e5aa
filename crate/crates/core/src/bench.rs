//! Experiment harness: data generation, single training runs and the
//! paradigm × dataset × seed comparison matrix with the ANFIS shape sweep.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{generate, split, Dataset, GenerateOptions};
use crate::error::{Error, Result};
use crate::fuzzy::MfShape;
use crate::model_file::ModelFile;
use crate::pipeline::{train_model, ModelKind, TrainConfig, Trained};
use crate::report::write_text;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub name: String,
    pub train_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub seeds: Vec<u64>,
    /// Seed of the master dataset; run seeds drive splits and model randomness.
    pub data_seed: u64,
    pub samples: usize,
    pub jitter: bool,
    pub datasets: Vec<DatasetSplit>,
    pub paradigms: Vec<ModelKind>,
    pub sweep_shapes: Vec<MfShape>,
    pub train: TrainConfig,
    /// Hidden units per dataset name; falls back to `train.mlp.hidden_units`.
    pub mlp_hidden: BTreeMap<String, usize>,
    /// Dataset whose test-set predictions are written out.
    pub predictions_for: Option<String>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            seeds: vec![1, 2, 3],
            data_seed: 2005,
            samples: 1000,
            jitter: true,
            datasets: vec![
                DatasetSplit {
                    name: "A".into(),
                    train_fraction: 0.9,
                },
                DatasetSplit {
                    name: "B".into(),
                    train_fraction: 0.8,
                },
            ],
            paradigms: vec![ModelKind::Anfis, ModelKind::MamdaniGa, ModelKind::Mlp, ModelKind::Cart],
            sweep_shapes: MfShape::ALL.to_vec(),
            train: TrainConfig::default(),
            mlp_hidden: [("A".to_string(), 30), ("B".to_string(), 32)].into_iter().collect(),
            predictions_for: Some("B".into()),
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() || self.samples == 0 || self.datasets.is_empty() {
            return Err(Error::invalid("bench needs at least one seed, sample and dataset"));
        }
        for d in &self.datasets {
            if !(d.train_fraction > 0.0 && d.train_fraction < 1.0) {
                return Err(Error::invalid(format!("dataset {} fraction {} not in (0,1)", d.name, d.train_fraction)));
            }
            if self.datasets.iter().filter(|e| e.name == d.name).count() > 1 {
                return Err(Error::invalid(format!("duplicate dataset name {}", d.name)));
            }
        }
        let t = &self.train;
        let counts = [
            t.anfis.train.epochs,
            t.anfis.mf_count,
            t.mamdani.mf_count,
            t.mamdani.output_count,
            t.mamdani.ga.generations,
            t.mlp.epochs,
            t.mlp.hidden_units,
            t.cart.min_leaf,
        ];
        if counts.contains(&0) || self.mlp_hidden.values().any(|&h| h == 0) {
            return Err(Error::invalid("all counts must be >= 1"));
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let c: BenchConfig = serde_json::from_str(&s)?;
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// Paradigm name, or `anfis-<shape>` for sweep runs.
    pub label: String,
    pub dataset: String,
    pub seed: u64,
    pub train_rmse: f64,
    pub test_rmse: f64,
    pub wall_time: f64,
    pub terminal_count: Option<usize>,
    pub rule_count: Option<usize>,
    /// `None` on success.
    pub error: Option<String>,
    pub model_path: Option<PathBuf>,
}

impl RunRecord {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub label: String,
    pub dataset: String,
    pub runs: usize,
    pub failures: usize,
    pub mean_train_rmse: f64,
    pub mean_test_rmse: f64,
    pub mean_terminal_count: Option<f64>,
    pub best: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub runs: Vec<RunRecord>,
    pub sweep: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
    pub sweep_summary: Vec<SummaryRow>,
    /// Paradigm with the lowest mean test RMSE per dataset.
    pub best: BTreeMap<String, String>,
    /// Total training seconds per label.
    pub wall_time_totals: BTreeMap<String, f64>,
}

pub fn cmd_generate_data(seed: u64, n: usize, opts: GenerateOptions, out: impl AsRef<Path>) -> Result<Dataset> {
    let d = generate(seed, n, opts)?;
    d.write_csv(out)?;
    Ok(d)
}

/// Path of the curve written next to a model file.
pub fn curve_path(model_out: &Path) -> PathBuf {
    model_out.with_extension("curve.csv")
}

/// Trains on a CSV dataset, optionally holding out `1 − train_fraction` for testing.
pub fn cmd_train(
    kind: ModelKind,
    data: impl AsRef<Path>,
    config: &TrainConfig,
    train_fraction: Option<f64>,
    seed: u64,
    out: impl AsRef<Path>,
) -> Result<Trained> {
    let dataset = Dataset::read_csv(data)?;
    let (train, test) = match train_fraction {
        Some(f) => split(&dataset, f, seed)?,
        None => {
            let empty = Dataset::new(Vec::new(), dataset.seed);
            (dataset, empty)
        }
    };
    let trained = train_model(kind, &train, &test, config, seed)?;
    let out = out.as_ref();
    trained.file.save(out)?;
    write_text(curve_path(out), &trained.curve)?;
    Ok(trained)
}

pub fn cmd_predict(model: impl AsRef<Path>, x: &[f64; 4]) -> Result<f64> {
    ModelFile::load(model)?.predict(x)
}

/// Runs the full comparison matrix and writes every artifact under `out`.
///
/// Sub-run failures are recorded and the remaining runs continue.
pub fn cmd_bench(config: &BenchConfig, out: impl AsRef<Path>) -> Result<BenchReport> {
    config.validate()?;
    let out = out.as_ref();
    for sub in ["models", "curves", "predictions"] {
        let p = out.join(sub);
        fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
    }
    let opts = GenerateOptions {
        jitter: config.jitter,
        grid: false,
    };
    let master = generate(config.data_seed, config.samples, opts)?;
    master.write_csv(out.join("master.csv"))?;

    let mut runs = Vec::new();
    let mut sweep = Vec::new();
    for ds in &config.datasets {
        for &seed in &config.seeds {
            let (train, test) = split(&master, ds.train_fraction, seed)?;
            let mut tc = config.train;
            if let Some(&h) = config.mlp_hidden.get(&ds.name) {
                tc.mlp.hidden_units = h;
            }
            let job = |label: String, kind: ModelKind, tc: &TrainConfig| -> Result<RunRecord> {
                run_one(out, &label, kind, &ds.name, seed, &train, &test, tc, config.predictions_for.as_deref() == Some(&ds.name))
            };
            for &shape in &config.sweep_shapes {
                let mut sc = tc;
                sc.anfis.shape = shape;
                let rec = job(format!("anfis-{shape}"), ModelKind::Anfis, &sc)?;
                if config.paradigms.contains(&ModelKind::Anfis) && shape == tc.anfis.shape {
                    runs.push(RunRecord {
                        label: ModelKind::Anfis.to_string(),
                        ..rec.clone()
                    });
                }
                sweep.push(rec);
            }
            for &kind in &config.paradigms {
                if kind == ModelKind::Anfis && config.sweep_shapes.contains(&tc.anfis.shape) {
                    continue;
                }
                runs.push(job(kind.to_string(), kind, &tc)?);
            }
        }
    }
    // keep the paradigm order of the config regardless of execution order
    let rank = |r: &RunRecord| config.paradigms.iter().position(|k| k.name() == r.label).unwrap_or(usize::MAX);
    runs.sort_by_key(|r| (config.datasets.iter().position(|d| d.name == r.dataset), r.seed, rank(r)));

    let mut summary = summarize(&runs);
    let mut best = BTreeMap::new();
    for ds in &config.datasets {
        let winner = summary
            .iter()
            .filter(|s| s.dataset == ds.name && s.mean_test_rmse.is_finite())
            .min_by(|a, b| a.mean_test_rmse.total_cmp(&b.mean_test_rmse))
            .map(|s| s.label.clone());
        if let Some(w) = winner {
            best.insert(ds.name.clone(), w);
        }
    }
    for s in &mut summary {
        s.best = best.get(&s.dataset) == Some(&s.label);
    }
    let sweep_summary = summarize(&sweep);
    let mut wall_time_totals = BTreeMap::new();
    for r in runs.iter().chain(&sweep) {
        *wall_time_totals.entry(r.label.clone()).or_insert(0.0) += r.wall_time;
    }
    let report = BenchReport {
        config: config.clone(),
        runs,
        sweep,
        summary,
        sweep_summary,
        best,
        wall_time_totals,
    };
    write_text(out.join("summary.csv"), &summary_csv(&report.summary))?;
    write_text(out.join("mf_sweep.csv"), &summary_csv(&report.sweep_summary))?;
    write_text(out.join("summary.json"), &serde_json::to_string_pretty(&(&report.summary, &report.best))?)?;
    write_text(out.join("runs.csv"), &runs_csv(report.runs.iter().chain(&report.sweep)))?;
    write_text(out.join("report.json"), &serde_json::to_string_pretty(&report)?)?;
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn run_one(
    out: &Path,
    label: &str,
    kind: ModelKind,
    dataset: &str,
    seed: u64,
    train: &Dataset,
    test: &Dataset,
    config: &TrainConfig,
    write_predictions: bool,
) -> Result<RunRecord> {
    let stem = format!("{label}_{dataset}_s{seed}");
    let mut rec = RunRecord {
        label: label.to_string(),
        dataset: dataset.to_string(),
        seed,
        train_rmse: f64::NAN,
        test_rmse: f64::NAN,
        wall_time: 0.0,
        terminal_count: None,
        rule_count: None,
        error: None,
        model_path: None,
    };
    let t = match train_model(kind, train, test, config, seed) {
        Ok(t) => t,
        Err(e) => {
            rec.error = Some(e.to_string());
            return Ok(rec);
        }
    };
    rec.train_rmse = t.report.final_train_rmse;
    rec.test_rmse = t.report.final_test_rmse;
    rec.wall_time = t.report.wall_time;
    rec.terminal_count = t.report.terminal_count;
    rec.rule_count = t.report.rule_count;
    let model_path = out.join("models").join(format!("{stem}.json"));
    t.file.save(&model_path)?;
    rec.model_path = Some(PathBuf::from("models").join(format!("{stem}.json")));
    write_text(out.join("curves").join(format!("{stem}.csv")), &t.curve)?;
    if write_predictions {
        let mut s = String::from("fuel,intercept_time,weapon,danger,score,prediction\n");
        for x in &test.samples {
            let p = t.file.predict(&x.inputs())?;
            let r = x.row();
            let _ = writeln!(s, "{},{},{},{},{},{}", r[0], r[1], r[2], r[3], r[4], p);
        }
        write_text(out.join("predictions").join(format!("{stem}.csv")), &s)?;
    }
    Ok(rec)
}

fn summarize(runs: &[RunRecord]) -> Vec<SummaryRow> {
    let mut keys: Vec<(String, String)> = Vec::new();
    for r in runs {
        let k = (r.label.clone(), r.dataset.clone());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(label, dataset)| {
            let group: Vec<&RunRecord> = runs.iter().filter(|r| r.label == label && r.dataset == dataset).collect();
            let ok: Vec<&&RunRecord> = group.iter().filter(|r| r.ok()).collect();
            let mean = |f: &dyn Fn(&RunRecord) -> f64| {
                if ok.is_empty() {
                    f64::NAN
                } else {
                    ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64
                }
            };
            let terminals: Vec<f64> = ok.iter().filter_map(|r| r.terminal_count).map(|t| t as f64).collect();
            SummaryRow {
                label,
                dataset,
                runs: group.len(),
                failures: group.len() - ok.len(),
                mean_train_rmse: mean(&|r| r.train_rmse),
                mean_test_rmse: mean(&|r| r.test_rmse),
                mean_terminal_count: (!terminals.is_empty()).then(|| terminals.iter().sum::<f64>() / terminals.len() as f64),
                best: false,
            }
        })
        .collect()
}

/// Seed-averaged table without timing columns.
pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut s = String::from("paradigm,dataset,runs,failures,mean_train_rmse,mean_test_rmse,mean_terminal_count,best\n");
    for r in rows {
        let tc = r.mean_terminal_count.map(|t| t.to_string()).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.label, r.dataset, r.runs, r.failures, r.mean_train_rmse, r.mean_test_rmse, tc, r.best
        );
    }
    s
}

fn runs_csv<'a>(runs: impl Iterator<Item = &'a RunRecord>) -> String {
    let mut s = String::from("paradigm,dataset,seed,train_rmse,test_rmse,wall_time,status\n");
    for r in runs {
        let status = r.error.as_deref().map_or("ok".to_string(), |e| format!("\"failed: {}\"", e.replace('"', "'")));
        let _ = writeln!(s, "{},{},{},{},{},{},{}", r.label, r.dataset, r.seed, r.train_rmse, r.test_rmse, r.wall_time, status);
    }
    s
}
