use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parametric fuzzy set.
///
/// Parameter order (also the JSON `params` order and the order of
/// [`MembershipFunction::grad`]):
///
/// | shape       | params            |
/// |-------------|-------------------|
/// | `gaussian`  | `[center, sigma]` |
/// | `gbell`     | `[a, b, center]`  |
/// | `trapezoid` | `[a, b, c, d]`    |
/// | `triangle`  | `[a, b, c]`       |
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MfRecord", into = "MfRecord")]
pub enum MembershipFunction {
    Gaussian { center: f64, sigma: f64 },
    GBell { a: f64, b: f64, center: f64 },
    Trapezoid { a: f64, b: f64, c: f64, d: f64 },
    Triangle { a: f64, b: f64, c: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MfShape {
    Gaussian,
    Gbell,
    Trapezoid,
    Triangle,
}

impl MfShape {
    pub const ALL: [MfShape; 4] = [
        MfShape::Gaussian,
        MfShape::Gbell,
        MfShape::Trapezoid,
        MfShape::Triangle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MfShape::Gaussian => "gaussian",
            MfShape::Gbell => "gbell",
            MfShape::Trapezoid => "trapezoid",
            MfShape::Triangle => "triangle",
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            MfShape::Gaussian => 2,
            MfShape::Gbell | MfShape::Triangle => 3,
            MfShape::Trapezoid => 4,
        }
    }

    /// `count` evenly spaced sets over `[lo, hi]`; neighbours cross at degree 0.5.
    ///
    /// Triangles come out isosceles.
    pub fn partition(self, lo: f64, hi: f64, count: usize) -> Vec<MembershipFunction> {
        assert!(count >= 1 && lo < hi);
        let (spacing, half) = if count == 1 {
            (0.0, (hi - lo) / 2.0)
        } else {
            let s = (hi - lo) / (count - 1) as f64;
            (s, s / 2.0)
        };
        (0..count)
            .map(|i| {
                let c = if count == 1 {
                    (lo + hi) / 2.0
                } else {
                    lo + spacing * i as f64
                };
                match self {
                    MfShape::Gaussian => MembershipFunction::Gaussian {
                        center: c,
                        sigma: half / (2.0 * std::f64::consts::LN_2).sqrt(),
                    },
                    MfShape::Gbell => MembershipFunction::GBell {
                        a: half,
                        b: 2.0,
                        center: c,
                    },
                    MfShape::Triangle => MembershipFunction::Triangle {
                        a: c - 2.0 * half,
                        b: c,
                        c: c + 2.0 * half,
                    },
                    MfShape::Trapezoid => MembershipFunction::Trapezoid {
                        a: c - 1.5 * half,
                        b: c - 0.5 * half,
                        c: c + 0.5 * half,
                        d: c + 1.5 * half,
                    },
                }
            })
            .collect()
    }
}

impl fmt::Display for MfShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MfShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "gauss" => Ok(MfShape::Gaussian),
            "gbell" | "bell" => Ok(MfShape::Gbell),
            "trapezoid" | "trapezoidal" | "trap" => Ok(MfShape::Trapezoid),
            "triangle" | "triangular" | "tri" => Ok(MfShape::Triangle),
            other => Err(Error::invalid(format!("unknown membership shape '{other}'"))),
        }
    }
}

impl MembershipFunction {
    pub fn gaussian(center: f64, sigma: f64) -> Result<Self> {
        Self::from_params(MfShape::Gaussian, &[center, sigma])
    }

    pub fn gbell(a: f64, b: f64, center: f64) -> Result<Self> {
        Self::from_params(MfShape::Gbell, &[a, b, center])
    }

    pub fn trapezoid(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::from_params(MfShape::Trapezoid, &[a, b, c, d])
    }

    pub fn triangle(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::from_params(MfShape::Triangle, &[a, b, c])
    }

    pub fn from_params(shape: MfShape, p: &[f64]) -> Result<Self> {
        if p.len() != shape.param_count() {
            return Err(Error::invalid(format!(
                "{shape} takes {} parameters, got {}",
                shape.param_count(),
                p.len()
            )));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("{shape} parameters must be finite")));
        }
        let mf = match shape {
            MfShape::Gaussian => MembershipFunction::Gaussian {
                center: p[0],
                sigma: p[1],
            },
            MfShape::Gbell => MembershipFunction::GBell {
                a: p[0],
                b: p[1],
                center: p[2],
            },
            MfShape::Trapezoid => MembershipFunction::Trapezoid {
                a: p[0],
                b: p[1],
                c: p[2],
                d: p[3],
            },
            MfShape::Triangle => MembershipFunction::Triangle {
                a: p[0],
                b: p[1],
                c: p[2],
            },
        };
        mf.validate()?;
        Ok(mf)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            MembershipFunction::Gaussian { sigma, .. } => sigma > 0.0,
            MembershipFunction::GBell { a, b, .. } => a > 0.0 && b > 0.0,
            MembershipFunction::Trapezoid { a, b, c, d } => a <= b && b <= c && c <= d,
            MembershipFunction::Triangle { a, b, c } => a <= b && b <= c,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid {} parameters {:?}", self.shape(), self.params())))
        }
    }

    pub fn shape(&self) -> MfShape {
        match self {
            MembershipFunction::Gaussian { .. } => MfShape::Gaussian,
            MembershipFunction::GBell { .. } => MfShape::Gbell,
            MembershipFunction::Trapezoid { .. } => MfShape::Trapezoid,
            MembershipFunction::Triangle { .. } => MfShape::Triangle,
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            MembershipFunction::Gaussian { center, sigma } => vec![center, sigma],
            MembershipFunction::GBell { a, b, center } => vec![a, b, center],
            MembershipFunction::Trapezoid { a, b, c, d } => vec![a, b, c, d],
            MembershipFunction::Triangle { a, b, c } => vec![a, b, c],
        }
    }

    pub fn param_count(&self) -> usize {
        self.shape().param_count()
    }

    /// Overwrites parameters without validation; follow with [`project`](Self::project).
    pub(crate) fn set_params_unchecked(&mut self, p: &[f64]) {
        match self {
            MembershipFunction::Gaussian { center, sigma } => {
                *center = p[0];
                *sigma = p[1];
            }
            MembershipFunction::GBell { a, b, center } => {
                *a = p[0];
                *b = p[1];
                *center = p[2];
            }
            MembershipFunction::Trapezoid { a, b, c, d } => {
                *a = p[0];
                *b = p[1];
                *c = p[2];
                *d = p[3];
            }
            MembershipFunction::Triangle { a, b, c } => {
                *a = p[0];
                *b = p[1];
                *c = p[2];
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            MembershipFunction::Gaussian { center, sigma } => {
                let u = (x - center) / sigma;
                (-0.5 * u * u).exp()
            }
            MembershipFunction::GBell { a, b, center } => {
                let u = ((x - center) / a).abs();
                1.0 / (1.0 + u.powf(2.0 * b))
            }
            MembershipFunction::Trapezoid { a, b, c, d } => {
                if x < a || x > d {
                    0.0
                } else if x < b {
                    (x - a) / (b - a)
                } else if x <= c {
                    1.0
                } else {
                    (d - x) / (d - c)
                }
            }
            MembershipFunction::Triangle { a, b, c } => {
                if x < a || x > c {
                    0.0
                } else if x < b {
                    (x - a) / (b - a)
                } else if x == b {
                    1.0
                } else {
                    (c - x) / (c - b)
                }
            }
        }
    }

    /// Partial derivatives of [`eval`](Self::eval) with respect to each parameter.
    ///
    /// At the knots of the piecewise-linear shapes the derivative of the piece
    /// to the left of `x` is returned.
    pub fn grad(&self, x: f64) -> Vec<f64> {
        match *self {
            MembershipFunction::Gaussian { center, sigma } => {
                let dx = x - center;
                let mu = self.eval(x);
                let s2 = sigma * sigma;
                vec![mu * dx / s2, mu * dx * dx / (s2 * sigma)]
            }
            MembershipFunction::GBell { a, b, center } => {
                let dx = x - center;
                let u = (dx / a).abs();
                if u == 0.0 {
                    return vec![0.0, 0.0, 0.0];
                }
                let t = u.powf(2.0 * b);
                let mu = 1.0 / (1.0 + t);
                let m2t = mu * mu * t;
                vec![m2t * 2.0 * b / a, -m2t * 2.0 * u.ln(), m2t * 2.0 * b / dx]
            }
            MembershipFunction::Trapezoid { a, b, c, d } => {
                if x > a && x <= b {
                    let w = b - a;
                    vec![(x - b) / (w * w), -(x - a) / (w * w), 0.0, 0.0]
                } else if x > c && x <= d {
                    let w = d - c;
                    vec![0.0, 0.0, (d - x) / (w * w), (x - c) / (w * w)]
                } else {
                    vec![0.0; 4]
                }
            }
            MembershipFunction::Triangle { a, b, c } => {
                if x > a && x <= b {
                    let w = b - a;
                    vec![(x - b) / (w * w), -(x - a) / (w * w), 0.0]
                } else if x > b && x <= c {
                    let w = c - b;
                    vec![0.0, (c - x) / (w * w), (x - b) / (w * w)]
                } else {
                    vec![0.0; 3]
                }
            }
        }
    }

    /// Location of the peak (plateau midpoint for trapezoids).
    pub fn center(&self) -> f64 {
        match *self {
            MembershipFunction::Gaussian { center, .. } | MembershipFunction::GBell { center, .. } => center,
            MembershipFunction::Trapezoid { b, c, .. } => 0.5 * (b + c),
            MembershipFunction::Triangle { b, .. } => b,
        }
    }

    /// Translates the set so that its center lands on `target`; widths are kept.
    pub fn set_center(&mut self, target: f64) {
        let delta = target - self.center();
        match self {
            MembershipFunction::Gaussian { center, .. } | MembershipFunction::GBell { center, .. } => {
                *center = target
            }
            MembershipFunction::Trapezoid { a, b, c, d } => {
                *a += delta;
                *b += delta;
                *c += delta;
                *d += delta;
            }
            MembershipFunction::Triangle { a, b, c } => {
                *a += delta;
                *b = target;
                *c += delta;
            }
        }
    }

    /// Derivative of the degree at `x` with respect to a pure translation of the set.
    pub fn center_grad(&self, x: f64) -> f64 {
        let g = self.grad(x);
        match self.shape() {
            MfShape::Gaussian => g[0],
            MfShape::Gbell => g[2],
            MfShape::Trapezoid | MfShape::Triangle => g.iter().sum(),
        }
    }

    /// Restores the shape invariants after an unconstrained parameter step.
    ///
    /// `scale` is the width of the owning variable's range.
    pub(crate) fn project(&mut self, scale: f64) {
        let min_width = 1e-6 * scale;
        match self {
            MembershipFunction::Gaussian { sigma, .. } => *sigma = sigma.max(min_width),
            MembershipFunction::GBell { a, b, .. } => {
                *a = a.max(min_width);
                *b = b.max(1e-3);
            }
            MembershipFunction::Trapezoid { a, b, c, d } => {
                let mut k = [*a, *b, *c, *d];
                k.sort_by(f64::total_cmp);
                [*a, *b, *c, *d] = k;
            }
            MembershipFunction::Triangle { a, b, c } => {
                let mut k = [*a, *b, *c];
                k.sort_by(f64::total_cmp);
                [*a, *b, *c] = k;
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct MfRecord {
    shape: MfShape,
    params: Vec<f64>,
}

impl TryFrom<MfRecord> for MembershipFunction {
    type Error = Error;

    fn try_from(r: MfRecord) -> Result<Self> {
        MembershipFunction::from_params(r.shape, &r.params)
    }
}

impl From<MembershipFunction> for MfRecord {
    fn from(mf: MembershipFunction) -> Self {
        MfRecord {
            shape: mf.shape(),
            params: mf.params(),
        }
    }
}
