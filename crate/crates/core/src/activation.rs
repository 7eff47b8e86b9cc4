//! Pointwise nonlinearities `σ_b(v) = σ(v + b)` and checks of whether they
//! commute with a representation.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::max_abs_diff;
use crate::report::{Report, Tally, Witness};
use crate::rep::Representation;
use crate::rng;

/// Groups at most this large are checked element by element.
pub const EXHAUSTIVE_LIMIT: usize = 5000;

const FIXED_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ActivationSpec {
    Relu,
    Tanh,
    /// `t − θ` for `t ≥ θ`, otherwise `0`.
    Threshold(f64),
    /// `+1` for `t ≥ θ`, otherwise `−1`.
    SignThreshold(f64),
}

impl ActivationSpec {
    pub fn apply_scalar(&self, t: f64) -> f64 {
        match *self {
            Self::Relu => t.max(0.0),
            Self::Tanh => t.tanh(),
            Self::Threshold(theta) => {
                if t >= theta {
                    t - theta
                } else {
                    0.0
                }
            }
            Self::SignThreshold(theta) => {
                if t >= theta {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    /// Derivative used for backpropagation. At kinks the subgradient is `0`
    /// on the relu side (`t = 0`) and `1` for threshold (`t = θ`, matching the
    /// closed branch `t ≥ θ`).
    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            Self::Relu => {
                if t > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Tanh => 1.0 - t.tanh().powi(2),
            Self::Threshold(theta) => {
                if t >= theta {
                    1.0
                } else {
                    0.0
                }
            }
            Self::SignThreshold(_) => 0.0,
        }
    }

    /// [`derivative`](Self::derivative) at `t`, given `h = σ(t)` already.
    pub fn derivative_given_output(&self, t: f64, h: f64) -> f64 {
        match *self {
            Self::Tanh => 1.0 - h * h,
            _ => self.derivative(t),
        }
    }

    /// Which piece of a piecewise map `t` falls on; smooth maps report `0`.
    pub fn region(&self, t: f64) -> u8 {
        match *self {
            Self::Relu => u8::from(t > 0.0),
            Self::Tanh => 0,
            Self::Threshold(theta) | Self::SignThreshold(theta) => u8::from(t >= theta),
        }
    }
}

impl fmt::Display for ActivationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Relu => write!(f, "relu"),
            Self::Tanh => write!(f, "tanh"),
            Self::Threshold(t) => write!(f, "threshold:{t:?}"),
            Self::SignThreshold(t) => write!(f, "sign_threshold:{t:?}"),
        }
    }
}

impl FromStr for ActivationSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let theta = |arg: &str| -> Result<f64> {
            arg.trim()
                .parse::<f64>()
                .ok()
                .filter(|t| t.is_finite())
                .ok_or_else(|| Error::Parse(format!("activation `{s}`: bad threshold `{arg}`")))
        };
        match s.split_once(':') {
            None if s == "relu" => Ok(Self::Relu),
            None if s == "tanh" => Ok(Self::Tanh),
            Some(("threshold", arg)) => Ok(Self::Threshold(theta(arg)?)),
            Some(("sign_threshold", arg)) => Ok(Self::SignThreshold(theta(arg)?)),
            _ => Err(Error::Parse(format!(
                "unknown activation `{s}` (expected relu, tanh, threshold:θ or sign_threshold:θ)"
            ))),
        }
    }
}

/// Coordinatewise `σ(v_i + b_i)`.
pub fn apply_pointwise(spec: &ActivationSpec, b: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    if b.len() != v.len() {
        return Err(Error::Shape(format!(
            "bias has length {} but input has length {}",
            b.len(),
            v.len()
        )));
    }
    Ok(v.iter().zip(b).map(|(x, bi)| spec.apply_scalar(x + bi)).collect())
}

/// Checks `σ_b(ρ(g)v) = ρ(g)σ_b(v)` on explicit inputs, over every group
/// element.
pub fn check_pointwise_equivariance_on(
    spec: &ActivationSpec,
    b: &[f64],
    rep: &Representation,
    inputs: &[Vec<f64>],
    tol: f64,
) -> Result<Report> {
    let elements: Vec<usize> = (0..rep.group().order()).collect();
    check_pairs(spec, b, rep, inputs.iter().flat_map(|v| elements.iter().map(move |&g| (g, v.clone()))), tol)
}

/// Checks `σ_b(ρ(g)v) = ρ(g)σ_b(v)` on seeded random inputs with entries in
/// `[−2, 4]`.
///
/// Groups of at most [`EXHAUSTIVE_LIMIT`] elements are checked at every
/// element for each of `trials` inputs; larger groups at `trials` random
/// (element, input) pairs.
pub fn check_pointwise_equivariance(
    spec: &ActivationSpec,
    b: &[f64],
    rep: &Representation,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<Report> {
    use rand::Rng;

    let mut rng = rng::seeded(seed);
    let order = rep.group().order();
    let n = rep.degree();
    let pairs: Vec<(usize, Vec<f64>)> = if order <= EXHAUSTIVE_LIMIT {
        (0..trials)
            .flat_map(|_| {
                let v = rng::probe_vec(&mut rng, n);
                (0..order).map(move |g| (g, v.clone()))
            })
            .collect()
    } else {
        (0..trials)
            .map(|_| (rng.gen_range(0..order), rng::probe_vec(&mut rng, n)))
            .collect()
    };
    check_pairs(spec, b, rep, pairs.into_iter(), tol)
}

fn check_pairs(
    spec: &ActivationSpec,
    b: &[f64],
    rep: &Representation,
    pairs: impl Iterator<Item = (usize, Vec<f64>)>,
    tol: f64,
) -> Result<Report> {
    if b.len() != rep.degree() {
        return Err(Error::Shape(format!(
            "bias has length {} but the representation has degree {}",
            b.len(),
            rep.degree()
        )));
    }
    let mut tally = Tally::new(tol);
    for (g, v) in pairs {
        let x = rep.image(g);
        let lhs = apply_pointwise(spec, b, &x.matvec(&v))?;
        let rhs = x.matvec(&apply_pointwise(spec, b, &v)?);
        let residual = max_abs_diff(&lhs, &rhs);
        tally.record(residual, || Witness {
            element: g,
            input: v,
            lhs,
            rhs,
            residual,
        });
    }
    Ok(tally.finish())
}

/// The certified-sufficient condition for `σ_b` to commute with `ρ`: `ρ` is a
/// permutation representation and `b` is fixed by every generator.
///
/// Holds for any pointwise `σ`, so `spec` does not enter the decision.
pub fn is_compatible(_spec: &ActivationSpec, b: &[f64], rep: &Representation) -> bool {
    b.len() == rep.degree()
        && rep.is_permutation_rep()
        && rep
            .gen_images()
            .iter()
            .all(|m| max_abs_diff(&m.matvec(b), b) < FIXED_TOL)
}
