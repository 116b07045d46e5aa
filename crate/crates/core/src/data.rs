//! Tactical air combat decision data: expert anchors, a seeded generator,
//! train/test splitting, normalisation and CSV I/O.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuzzy::{LinguisticVariable, MfShape};

pub const FIELDS: [&str; 5] = ["fuel", "intercept_time", "weapon", "danger", "score"];
pub const INPUT_FIELDS: usize = 4;

/// Physical range of each field, in CSV column order.
pub const FIELD_RANGES: [(f64, f64); 5] = [(0.0, 1000.0), (0.0, 60.0), (0.0, 100.0), (0.0, 10.0), (0.0, 10.0)];

/// Expert decision scores: fuel (l), intercept time (min), weapon (%), danger (pts) → score (pts).
pub const ANCHORS: [[f64; 5]; 11] = [
    [0.0, 60.0, 0.0, 10.0, 0.0],
    [100.0, 55.0, 15.0, 8.0, 1.0],
    [200.0, 50.0, 25.0, 7.0, 2.0],
    [300.0, 40.0, 30.0, 5.0, 3.0],
    [400.0, 35.0, 40.0, 4.5, 4.0],
    [500.0, 30.0, 60.0, 4.0, 5.0],
    [600.0, 25.0, 70.0, 3.0, 6.0],
    [700.0, 15.0, 85.0, 2.0, 7.0],
    [800.0, 10.0, 90.0, 1.5, 8.0],
    [900.0, 5.0, 96.0, 1.0, 9.0],
    [1000.0, 1.0, 100.0, 0.0, 10.0],
];

/// Set labels for three-set partitions of each input, ordered low to high value.
pub const INPUT_LABELS: [[&str; 3]; 4] = [
    ["low", "half", "full"],
    ["fast", "normal", "slow"],
    ["insufficient", "enough", "sufficient"],
    ["endanger", "danger", "very_danger"],
];

pub const OUTPUT_LABELS: [&str; 3] = ["bad", "acceptable", "good"];

/// The four inputs as linguistic variables on the normalised [0, 1] scale.
pub fn input_variables(shape: MfShape, count: usize) -> Result<Vec<LinguisticVariable>> {
    (0..INPUT_FIELDS)
        .map(|i| {
            let labels: &[&str] = if count == 3 { &INPUT_LABELS[i] } else { &[] };
            LinguisticVariable::uniform(FIELDS[i], (0.0, 1.0), shape, count, labels)
        })
        .collect()
}

/// The decision score as a linguistic variable on the normalised [0, 1] scale.
pub fn output_variable(shape: MfShape, count: usize) -> Result<LinguisticVariable> {
    let labels: &[&str] = if count == 3 { &OUTPUT_LABELS } else { &[] };
    LinguisticVariable::uniform(FIELDS[4], (0.0, 1.0), shape, count, labels)
}

/// Half-width of the uniform input jitter as a fraction of each field's range.
pub const JITTER_FRACTION: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub fuel: f64,
    pub intercept_time: f64,
    pub weapon: f64,
    pub danger: f64,
    pub score: f64,
}

impl Sample {
    pub fn from_row(r: [f64; 5]) -> Self {
        Sample {
            fuel: r[0],
            intercept_time: r[1],
            weapon: r[2],
            danger: r[3],
            score: r[4],
        }
    }

    pub fn row(&self) -> [f64; 5] {
        [self.fuel, self.intercept_time, self.weapon, self.danger, self.score]
    }

    pub fn inputs(&self) -> [f64; 4] {
        [self.fuel, self.intercept_time, self.weapon, self.danger]
    }

    pub fn validate(&self) -> Result<()> {
        check_inputs(&self.inputs())?;
        check_field(4, self.score)
    }
}

fn check_field(i: usize, v: f64) -> Result<()> {
    let (lo, hi) = FIELD_RANGES[i];
    if v.is_finite() && v >= lo && v <= hi {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            field: FIELDS[i],
            value: v,
            lo,
            hi,
        })
    }
}

/// Checks physical input values (fuel, intercept time, weapon, danger).
pub fn check_inputs(x: &[f64; 4]) -> Result<()> {
    x.iter().enumerate().try_for_each(|(i, &v)| check_field(i, v))
}

pub fn anchor_table() -> Vec<Sample> {
    ANCHORS.iter().copied().map(Sample::from_row).collect()
}

/// Piecewise-linear interpolation of the anchor columns at latent advantage `t ∈ [0, 10]`.
pub fn interpolate(t: f64) -> Sample {
    let t = t.clamp(0.0, 10.0);
    let i = t.floor() as usize;
    if i >= 10 {
        return Sample::from_row(ANCHORS[10]);
    }
    let frac = t - i as f64;
    if frac == 0.0 {
        return Sample::from_row(ANCHORS[i]);
    }
    let (lo, hi) = (ANCHORS[i], ANCHORS[i + 1]);
    let mut row = [0.0; 5];
    for k in 0..5 {
        row[k] = lo[k] + frac * (hi[k] - lo[k]);
    }
    Sample::from_row(row)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerateOptions {
    pub jitter: bool,
    /// Evenly spaced latent values instead of uniform draws; with `n = 11` this
    /// reproduces the anchor table.
    pub grid: bool,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions {
            jitter: true,
            grid: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub bounds: [(f64, f64); 5],
}

impl Default for Normalization {
    fn default() -> Self {
        Normalization { bounds: FIELD_RANGES }
    }
}

impl Normalization {
    pub fn normalize_field(&self, i: usize, v: f64) -> f64 {
        let (lo, hi) = self.bounds[i];
        (v - lo) / (hi - lo)
    }

    pub fn denormalize_field(&self, i: usize, v: f64) -> f64 {
        let (lo, hi) = self.bounds[i];
        lo + v * (hi - lo)
    }

    pub fn normalize(&self, s: &Sample) -> [f64; 5] {
        let r = s.row();
        std::array::from_fn(|i| self.normalize_field(i, r[i]))
    }

    pub fn denormalize(&self, r: &[f64; 5]) -> Sample {
        Sample::from_row(std::array::from_fn(|i| self.denormalize_field(i, r[i])))
    }

    pub fn normalize_inputs(&self, x: &[f64; 4]) -> Vec<f64> {
        x.iter().enumerate().map(|(i, &v)| self.normalize_field(i, v)).collect()
    }

    pub fn denormalize_score(&self, y: f64) -> f64 {
        self.denormalize_field(4, y)
    }
}

/// Model-ready inputs and targets.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Observations {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

impl Observations {
    pub fn new(x: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::invalid(format!("{} inputs vs {} targets", x.len(), y.len())));
        }
        if let Some(d) = x.first().map(Vec::len) {
            if x.iter().any(|r| r.len() != d) {
                return Err(Error::invalid("ragged input rows"));
            }
        }
        Ok(Observations { x, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.x.iter().map(Vec::as_slice).zip(self.y.iter().copied())
    }

    pub fn subset(&self, idx: &[usize]) -> Observations {
        Observations {
            x: idx.iter().map(|&i| self.x[i].clone()).collect(),
            y: idx.iter().map(|&i| self.y[i]).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub seed: u64,
    pub normalization: Normalization,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>, seed: u64) -> Self {
        Dataset {
            samples,
            seed,
            normalization: Normalization::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Every field mapped to [0, 1].
    pub fn normalized_rows(&self) -> Vec<[f64; 5]> {
        self.samples.iter().map(|s| self.normalization.normalize(s)).collect()
    }

    /// Normalised inputs and normalised score.
    pub fn observations(&self) -> Observations {
        let rows = self.normalized_rows();
        Observations {
            x: rows.iter().map(|r| r[..INPUT_FIELDS].to_vec()).collect(),
            y: rows.iter().map(|r| r[4]).collect(),
        }
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_csv_to(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_csv_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "{}", FIELDS.join(","))?;
        for s in &self.samples {
            let r = s.row();
            writeln!(w, "{},{},{},{},{}", r[0], r[1], r[2], r[3], r[4])?;
        }
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv_from(file)
    }

    pub fn read_csv_from<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr.headers().map_err(|e| csv_error(1, e))?.clone();
        let names: Vec<&str> = headers.iter().map(str::trim).collect();
        if names != FIELDS {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header {}, got {}", FIELDS.join(","), names.join(",")),
            });
        }
        let mut samples = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                csv_error(line, e)
            })?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != 5 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 5 columns, got {}", record.len()),
                });
            }
            let mut row = [0.0; 5];
            for (k, field) in record.iter().enumerate() {
                row[k] = field.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line,
                    message: format!("column {}: '{field}': {e}", FIELDS[k]),
                })?;
            }
            let sample = Sample::from_row(row);
            sample.validate().map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            samples.push(sample);
        }
        Ok(Dataset::new(samples, 0))
    }
}

fn csv_error(line: u64, e: csv::Error) -> Error {
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

/// Draws `n` samples along the anchor curve, jittering inputs only.
pub fn generate(seed: u64, n: usize, opts: GenerateOptions) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let t = if opts.grid {
            if n == 1 {
                5.0
            } else {
                10.0 * i as f64 / (n - 1) as f64
            }
        } else {
            rng.gen_range(0.0..=10.0)
        };
        let mut row = interpolate(t).row();
        if opts.jitter {
            for (k, v) in row.iter_mut().take(INPUT_FIELDS).enumerate() {
                let (lo, hi) = FIELD_RANGES[k];
                let half = JITTER_FRACTION * (hi - lo);
                *v = (*v + rng.gen_range(-half..=half)).clamp(lo, hi);
            }
        }
        samples.push(Sample::from_row(row));
    }
    Ok(Dataset::new(samples, seed))
}

/// Seeded shuffle, then the first `round(fraction · n)` samples train.
pub fn split(dataset: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!("train fraction {train_fraction} not in (0,1)")));
    }
    let mut idx: Vec<usize> = (0..dataset.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = (train_fraction * dataset.len() as f64).round() as usize;
    let pick = |ids: &[usize]| Dataset {
        samples: ids.iter().map(|&i| dataset.samples[i]).collect(),
        seed,
        normalization: dataset.normalization,
    };
    Ok((pick(&idx[..n_train]), pick(&idx[n_train..])))
}
