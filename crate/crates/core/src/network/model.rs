//! Text serialization of networks.
//!
//! A model file is TOML. It names the group and the layer representations
//! symbolically, so the intertwiner bases are recomputed on load
//! (deterministically), and stores only coefficients. Floats are written with
//! 17 significant digits so they round-trip exactly.
//!
//! ```toml
//! format = 1
//! group = "symmetric(4)"
//! reps = ["tensor_identity(defining, 3)", "tensor_identity(defining, 3)", "trivial(3)"]
//! activation = "relu"
//! bias = "uniform"
//!
//! [[layers]]
//! weights = [1.2345678901234567e-1, ...]
//! bias = [0.0000000000000000e0]
//!
//! [[layers]]
//! weights = [...]
//! ```
//!
//! A layer may carry a `[layers.weight_override]` table (`rows`, `cols`,
//! `data`) replacing its realized weight with a raw matrix.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::Deserialize;

use super::{BiasSpace, BuildOptions, EquivariantNetwork};
use crate::activation::ActivationSpec;
use crate::error::{Error, Result};
use crate::group::{FiniteGroup, NamedGroup};
use crate::numerics::Matrix;
use crate::rep::RepSpec;

pub const FORMAT_VERSION: u32 = 1;

/// Symbolic description of a network's architecture.
#[derive(Clone, Debug, PartialEq)]
pub struct Architecture {
    pub group: NamedGroup,
    pub reps: Vec<RepSpec>,
    pub activation: ActivationSpec,
    pub bias_space: BiasSpace,
}

impl Architecture {
    pub fn build(&self, seed: u64) -> Result<EquivariantNetwork> {
        let group = Arc::new(FiniteGroup::named(&self.group)?);
        let reps = self.reps.iter().map(|r| r.build(&group)).collect::<Result<Vec<_>>>()?;
        let options = BuildOptions {
            bias_space: self.bias_space,
            ..BuildOptions::default()
        };
        EquivariantNetwork::build_with(reps, self.activation, options, seed)
    }
}

/// A network together with the symbolic architecture it was built from.
#[derive(Clone, Debug)]
pub struct Model {
    pub architecture: Architecture,
    pub net: EquivariantNetwork,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    format: u32,
    group: String,
    reps: Vec<String>,
    activation: String,
    #[serde(default)]
    bias: Option<String>,
    #[serde(default)]
    layers: Vec<RawLayer>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLayer {
    weights: Vec<f64>,
    #[serde(default)]
    bias: Option<Vec<f64>>,
    #[serde(default)]
    weight_override: Option<RawMatrix>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

fn field_error(path: &str, e: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{path}: {e}"))
}

fn exact(x: f64) -> String {
    format!("{x:.16e}")
}

fn float_array(values: &[f64]) -> String {
    let items: Vec<String> = values.iter().map(|&x| exact(x)).collect();
    format!("[{}]", items.join(", "))
}

fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

impl Model {
    pub fn new(architecture: Architecture, seed: u64) -> Result<Self> {
        let net = architecture.build(seed)?;
        Ok(Self { architecture, net })
    }

    pub fn to_text(&self) -> String {
        let a = &self.architecture;
        let mut out = String::new();
        let reps: Vec<String> = a.reps.iter().map(|r| quoted(&r.to_string())).collect();
        writeln!(out, "format = {FORMAT_VERSION}").unwrap();
        writeln!(out, "group = {}", quoted(&a.group.to_string())).unwrap();
        writeln!(out, "reps = [{}]", reps.join(", ")).unwrap();
        writeln!(out, "activation = {}", quoted(&a.activation.to_string())).unwrap();
        writeln!(out, "bias = {}", quoted(&a.bias_space.to_string())).unwrap();
        for i in 1..=self.net.depth() {
            writeln!(out, "\n[[layers]]").unwrap();
            writeln!(out, "weights = {}", float_array(self.net.weight_coeffs(i))).unwrap();
            if let Some(b) = self.net.bias_coeffs(i) {
                writeln!(out, "bias = {}", float_array(b)).unwrap();
            }
            if let Some(m) = self.net.weight_override(i) {
                writeln!(out, "\n[layers.weight_override]").unwrap();
                writeln!(out, "rows = {}\ncols = {}", m.rows(), m.cols()).unwrap();
                writeln!(out, "data = {}", float_array(m.data())).unwrap();
            }
        }
        out
    }

    /// Parses a model file. Errors name the offending field, e.g.
    /// `layers[1].weights: expected 9 coefficients, got 8`.
    pub fn from_text(text: &str) -> Result<Self> {
        let raw: RawModel = toml::from_str(text).map_err(|e| Error::Parse(format!("model: {e}")))?;
        if raw.format != FORMAT_VERSION {
            return Err(field_error("format", format!("unsupported version {}", raw.format)));
        }
        let architecture = Architecture {
            group: raw.group.parse().map_err(|e| field_error("group", e))?,
            reps: raw
                .reps
                .iter()
                .enumerate()
                .map(|(i, r)| r.parse().map_err(|e| field_error(&format!("reps[{i}]"), e)))
                .collect::<Result<_>>()?,
            activation: raw.activation.parse().map_err(|e| field_error("activation", e))?,
            bias_space: match &raw.bias {
                Some(b) => b.parse().map_err(|e| field_error("bias", e))?,
                None => BiasSpace::default(),
            },
        };
        let mut net = architecture.build(0).map_err(|e| field_error("reps", e))?;
        if raw.layers.len() != net.depth() {
            return Err(field_error(
                "layers",
                format!("expected {} layers, got {}", net.depth(), raw.layers.len()),
            ));
        }
        for (idx, layer) in raw.layers.into_iter().enumerate() {
            let i = idx + 1;
            let path = |f: &str| format!("layers[{idx}].{f}");
            let want = net.weight_basis(i).dim();
            if layer.weights.len() != want {
                return Err(field_error(
                    &path("weights"),
                    format!("expected {want} coefficients, got {}", layer.weights.len()),
                ));
            }
            if layer.weights.iter().any(|x| !x.is_finite()) {
                return Err(field_error(&path("weights"), "non-finite coefficient"));
            }
            net.set_weight_coeffs(i, layer.weights)?;
            match (layer.bias, net.bias_coeffs(i).map(<[f64]>::len)) {
                (Some(b), Some(want)) if b.len() == want && b.iter().all(|x| x.is_finite()) => {
                    net.set_bias_coeffs(i, b)?
                }
                (Some(b), Some(want)) => {
                    return Err(field_error(
                        &path("bias"),
                        format!("expected {want} finite coefficients, got {}", b.len()),
                    ))
                }
                (Some(_), None) => return Err(field_error(&path("bias"), "the output layer has no bias")),
                (None, Some(_)) => return Err(field_error(&path("bias"), "missing")),
                (None, None) => {}
            }
            if let Some(m) = layer.weight_override {
                let m = Matrix::new(m.rows, m.cols, m.data).map_err(|e| field_error(&path("weight_override"), e))?;
                net.override_weight(i, m).map_err(|e| field_error(&path("weight_override"), e))?;
            }
        }
        Ok(Self { architecture, net })
    }
}
