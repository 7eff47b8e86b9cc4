//! Feed-forward networks `f = A_k σ_{b_{k−1}} A_{k−1} ⋯ σ_{b_1} A_1` whose
//! weights are coordinates over intertwiner bases and whose biases are
//! coordinates over fixed vectors.
//!
//! Because every trainable number is a coefficient over an equivariant
//! subspace, any setting of the parameters yields an equivariant network;
//! training cannot leave that space.

pub mod model;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;

use crate::activation::{ActivationSpec, EXHAUSTIVE_LIMIT};
use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::intertwiner::{solve_basis, IntertwinerBasis};
use crate::numerics::{self, max_abs, max_abs_diff, Matrix, DEFAULT_TOL};
use crate::report::{Report, Tally, Witness};
use crate::rep::Representation;
use crate::rng;

/// Default tolerance for [`check_equivariance`].
pub const DEFAULT_CHECK_TOL: f64 = 1e-8;

/// Mean squared error beyond which training is considered diverged.
const DIVERGENCE_MSE: f64 = 1e12;

/// Admissible hidden-layer biases.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BiasSpace {
    /// One shared threshold: every coordinate of the bias is equal.
    #[default]
    Uniform,
    /// Any bias fixed by the representation, i.e. constant on each orbit.
    Fixed,
}

impl fmt::Display for BiasSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Uniform => "uniform",
            Self::Fixed => "fixed",
        })
    }
}

impl FromStr for BiasSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "uniform" => Ok(Self::Uniform),
            "fixed" => Ok(Self::Fixed),
            other => Err(Error::Parse(format!("unknown bias space `{other}` (expected uniform or fixed)"))),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BuildOptions {
    pub bias_space: BiasSpace,
    /// Rank threshold for the intertwiner and fixed-subspace nullspaces.
    pub tol: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            bias_space: BiasSpace::Uniform,
            tol: DEFAULT_TOL,
        }
    }
}

#[derive(Clone, Debug)]
struct Layer {
    weights: IntertwinerBasis,
    weight_coeffs: Vec<f64>,
    /// `n_i × d` orthonormal basis and coefficients; hidden layers only.
    bias: Option<(Matrix, Vec<f64>)>,
    /// Raw matrix standing in for the basis expansion. Never produced by
    /// [`EquivariantNetwork::build`]; exists so externally edited models can
    /// be verified.
    weight_override: Option<Matrix>,
}

#[derive(Clone, Debug)]
pub struct EquivariantNetwork {
    group: Arc<FiniteGroup>,
    reps: Vec<Representation>,
    activation: ActivationSpec,
    bias_space: BiasSpace,
    layers: Vec<Layer>,
}

/// Paired inputs and targets for regression.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    inputs: Vec<Vec<f64>>,
    targets: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(Error::Shape(format!(
                "{} inputs but {} targets",
                inputs.len(),
                targets.len()
            )));
        }
        let consistent = |rows: &[Vec<f64>]| rows.windows(2).all(|w| w[0].len() == w[1].len());
        if !consistent(&inputs) || !consistent(&targets) {
            return Err(Error::Shape("samples have inconsistent lengths".into()));
        }
        Ok(Self { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn targets(&self) -> &[Vec<f64>] {
        &self.targets
    }
}

/// Parameter burden of a network next to an unconstrained network of the
/// same widths.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParameterCount {
    pub equivariant: usize,
    /// `Σ n_i·n_{i−1} + Σ_{hidden} n_i`.
    pub dense: usize,
}

impl ParameterCount {
    pub fn ratio(&self) -> f64 {
        self.equivariant as f64 / self.dense as f64
    }
}

impl EquivariantNetwork {
    /// Builds a network with layer representations `ρ_0 … ρ_k` and seeded
    /// random weights.
    pub fn build(reps: Vec<Representation>, activation: ActivationSpec, seed: u64) -> Result<Self> {
        Self::build_with(reps, activation, BuildOptions::default(), seed)
    }

    /// Like [`build`](Self::build), with an explicit bias space and rank
    /// tolerance.
    ///
    /// Weight coefficients start uniform in `[−1, 1]` and are rescaled so each
    /// realized `A_i` has root-mean-square entry `√(2/n_{i−1})`; biases start
    /// at zero.
    pub fn build_with(
        reps: Vec<Representation>,
        activation: ActivationSpec,
        options: BuildOptions,
        seed: u64,
    ) -> Result<Self> {
        let mut net = Self::zeroed(reps, activation, options)?;
        let mut rng = rng::seeded(seed);
        for layer in &mut net.layers {
            let (n_out, n_in) = (layer.weights.rep_out().degree(), layer.weights.rep_in().degree());
            let mut c: Vec<f64> = (0..layer.weights.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = numerics::norm(&c);
            if norm > 0.0 {
                // The basis is orthonormal, so ‖A‖_F = ‖c‖.
                let target = (2.0 / n_in as f64).sqrt() * ((n_out * n_in) as f64).sqrt();
                c.iter_mut().for_each(|x| *x *= target / norm);
            }
            layer.weight_coeffs = c;
        }
        Ok(net)
    }

    /// All coefficients zero.
    pub fn zeroed(reps: Vec<Representation>, activation: ActivationSpec, options: BuildOptions) -> Result<Self> {
        if reps.len() < 2 {
            return Err(Error::InvalidArgument(
                "a network needs at least an input and an output representation".into(),
            ));
        }
        if reps.iter().any(|r| !r.same_group(&reps[0])) {
            return Err(Error::GroupMismatch);
        }
        let k = reps.len() - 1;
        for (layer, rep) in reps.iter().enumerate().take(k).skip(1) {
            if !rep.is_permutation_rep() {
                return Err(Error::NotPermutationRep { layer });
            }
        }
        let mut layers = Vec::with_capacity(k);
        for i in 1..=k {
            let weights = solve_basis(&reps[i - 1], &reps[i], options.tol)?;
            if weights.dim() == 0 {
                return Err(Error::EmptyWeightSpace { layer: i });
            }
            let bias = (i < k)
                .then(|| -> Result<_> {
                    let n = reps[i].degree();
                    let basis = match options.bias_space {
                        BiasSpace::Uniform => {
                            Matrix::new(n, 1, vec![1.0 / (n as f64).sqrt(); n])?
                        }
                        BiasSpace::Fixed => reps[i].fixed_subspace(options.tol)?,
                    };
                    let d = basis.cols();
                    Ok((basis, vec![0.0; d]))
                })
                .transpose()?;
            layers.push(Layer {
                weight_coeffs: vec![0.0; weights.dim()],
                weights,
                bias,
                weight_override: None,
            });
        }
        Ok(Self {
            group: reps[0].group().clone(),
            reps,
            activation,
            bias_space: options.bias_space,
            layers,
        })
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn reps(&self) -> &[Representation] {
        &self.reps
    }

    pub fn activation(&self) -> ActivationSpec {
        self.activation
    }

    pub fn bias_space(&self) -> BiasSpace {
        self.bias_space
    }

    /// Number of weight layers `k`.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn input_dim(&self) -> usize {
        self.reps[0].degree()
    }

    pub fn output_dim(&self) -> usize {
        self.reps[self.depth()].degree()
    }

    /// Intertwiner basis of layer `i ∈ 1..=k`.
    pub fn weight_basis(&self, i: usize) -> &IntertwinerBasis {
        &self.layers[i - 1].weights
    }

    pub fn weight_coeffs(&self, i: usize) -> &[f64] {
        &self.layers[i - 1].weight_coeffs
    }

    /// Bias basis of hidden layer `i ∈ 1..k`.
    pub fn bias_basis(&self, i: usize) -> Option<&Matrix> {
        self.layers[i - 1].bias.as_ref().map(|(b, _)| b)
    }

    pub fn bias_coeffs(&self, i: usize) -> Option<&[f64]> {
        self.layers[i - 1].bias.as_ref().map(|(_, c)| c.as_slice())
    }

    pub fn weight_override(&self, i: usize) -> Option<&Matrix> {
        self.layers[i - 1].weight_override.as_ref()
    }

    /// Realized `A_i`.
    pub fn weight(&self, i: usize) -> Matrix {
        let layer = &self.layers[i - 1];
        match &layer.weight_override {
            Some(m) => m.clone(),
            None => layer.weights.realize(&layer.weight_coeffs),
        }
    }

    /// Realized `b_i` for a hidden layer.
    pub fn bias(&self, i: usize) -> Option<Vec<f64>> {
        self.layers[i - 1].bias.as_ref().map(|(basis, c)| basis.matvec(c))
    }

    pub fn set_weight_coeffs(&mut self, i: usize, coeffs: Vec<f64>) -> Result<()> {
        let layer = &mut self.layers[i - 1];
        if coeffs.len() != layer.weights.dim() {
            return Err(Error::Shape(format!(
                "layer {i} has {} weight coefficients, got {}",
                layer.weights.dim(),
                coeffs.len()
            )));
        }
        layer.weight_coeffs = coeffs;
        Ok(())
    }

    pub fn set_bias_coeffs(&mut self, i: usize, coeffs: Vec<f64>) -> Result<()> {
        match &mut self.layers[i - 1].bias {
            Some((basis, c)) if basis.cols() == coeffs.len() => {
                *c = coeffs;
                Ok(())
            }
            Some((basis, _)) => Err(Error::Shape(format!(
                "layer {i} has {} bias coefficients, got {}",
                basis.cols(),
                coeffs.len()
            ))),
            None => Err(Error::InvalidArgument(format!("layer {i} has no bias"))),
        }
    }

    /// Replaces the realized weight of layer `i` with a raw matrix, bypassing
    /// the intertwiner basis. The result is generally not equivariant.
    pub fn override_weight(&mut self, i: usize, m: Matrix) -> Result<()> {
        let want = (self.reps[i].degree(), self.reps[i - 1].degree());
        if (m.rows(), m.cols()) != want {
            return Err(Error::Shape(format!(
                "layer {i} weight must be {}x{}, got {}x{}",
                want.0,
                want.1,
                m.rows(),
                m.cols()
            )));
        }
        self.layers[i - 1].weight_override = Some(m);
        Ok(())
    }

    /// All trainable coefficients: for each layer its weight coefficients,
    /// then its bias coefficients.
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for layer in &self.layers {
            out.extend_from_slice(&layer.weight_coeffs);
            if let Some((_, c)) = &layer.bias {
                out.extend_from_slice(c);
            }
        }
        out
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.parameter_len() {
            return Err(Error::Shape(format!(
                "expected {} parameters, got {}",
                self.parameter_len(),
                params.len()
            )));
        }
        let mut rest = params;
        for layer in &mut self.layers {
            let (w, tail) = rest.split_at(layer.weight_coeffs.len());
            layer.weight_coeffs.copy_from_slice(w);
            rest = tail;
            if let Some((_, c)) = &mut layer.bias {
                let (b, tail) = rest.split_at(c.len());
                c.copy_from_slice(b);
                rest = tail;
            }
        }
        Ok(())
    }

    fn parameter_len(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight_coeffs.len() + l.bias.as_ref().map_or(0, |(_, c)| c.len()))
            .sum()
    }

    pub fn count_parameters(&self) -> ParameterCount {
        let widths: Vec<usize> = self.reps.iter().map(Representation::degree).collect();
        let k = self.depth();
        let dense = widths.windows(2).map(|w| w[0] * w[1]).sum::<usize>() + widths[1..k].iter().sum::<usize>();
        ParameterCount {
            equivariant: self.parameter_len(),
            dense,
        }
    }

    /// Snapshot of the realized weights and biases for repeated evaluation.
    pub fn realize(&self) -> RealizedNetwork<'_> {
        RealizedNetwork {
            net: self,
            weights: (1..=self.depth()).map(|i| self.weight(i)).collect(),
            biases: (1..self.depth()).map(|i| self.bias(i).expect("hidden layers carry a bias")).collect(),
        }
    }

    pub fn forward(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.input_dim() {
            return Err(Error::Shape(format!(
                "input has length {}, expected {}",
                v.len(),
                self.input_dim()
            )));
        }
        Ok(self.realize().apply(v))
    }

    /// Exhaustive (or, for groups above 5000 elements, sampled) check of
    /// `f(ρ_0(g)v) = ρ_k(g)f(v)` with residual
    /// `‖f(ρ_0(g)v) − ρ_k(g)f(v)‖_∞ / (1 + ‖f(v)‖_∞)`.
    pub fn check_equivariance(&self, trials: usize, seed: u64, tol: f64) -> Report {
        check_equivariance(&self.realize(), trials, seed, tol)
    }

    /// Mean squared error over all samples and output coordinates, and its
    /// gradient with respect to [`parameters`](Self::parameters).
    pub fn loss_grad(&self, data: &Dataset) -> Result<(f64, Vec<f64>)> {
        self.validate_dataset(data)?;
        if self.layers.iter().any(|l| l.weight_override.is_some()) {
            return Err(Error::InvalidArgument(
                "cannot differentiate a network with overridden weights".into(),
            ));
        }
        let realized = self.realize();
        let k = self.depth();
        let scale = 2.0 / (data.len() * self.output_dim()) as f64;

        let mut grad_w: Vec<Matrix> = realized.weights.iter().map(|w| Matrix::zeros(w.rows(), w.cols())).collect();
        let mut grad_b: Vec<Vec<f64>> = realized.biases.iter().map(|b| vec![0.0; b.len()]).collect();
        let mut sse = 0.0;

        for (x, t) in data.inputs.iter().zip(&data.targets) {
            let trace = realized.trace(x);
            let y = &trace.outputs[k];
            let mut delta: Vec<f64> = y.iter().zip(t).map(|(yi, ti)| yi - ti).collect();
            sse += delta.iter().map(|d| d * d).sum::<f64>();
            delta.iter_mut().for_each(|d| *d *= scale);
            for i in (1..=k).rev() {
                add_outer(&mut grad_w[i - 1], &delta, &trace.outputs[i - 1]);
                if i > 1 {
                    let back = realized.weights[i - 1].matvec_transpose(&delta);
                    delta = back
                        .iter()
                        .zip(&trace.preactivations[i - 2])
                        .zip(&trace.outputs[i - 1])
                        .map(|((d, &a), &h)| d * self.activation.derivative_given_output(a, h))
                        .collect();
                    numerics::axpy(1.0, &delta, &mut grad_b[i - 2]);
                }
            }
        }

        let mut grad = Vec::with_capacity(self.parameter_len());
        for (i, layer) in self.layers.iter().enumerate() {
            grad.extend(layer.weights.coordinates(&grad_w[i]));
            if let Some((basis, _)) = &layer.bias {
                grad.extend(basis.matvec_transpose(&grad_b[i]));
            }
        }
        Ok((sse / (data.len() * self.output_dim()) as f64, grad))
    }

    pub fn mse(&self, data: &Dataset) -> Result<f64> {
        self.validate_dataset(data)?;
        let realized = self.realize();
        let sse: f64 = data
            .inputs
            .iter()
            .zip(&data.targets)
            .map(|(x, t)| realized.apply(x).iter().zip(t).map(|(y, t)| (y - t).powi(2)).sum::<f64>())
            .sum();
        Ok(sse / (data.len() * self.output_dim()) as f64)
    }

    /// Region of every hidden pre-activation on every sample; a change in
    /// this pattern means a parameter perturbation crossed a kink.
    pub fn activation_pattern(&self, data: &Dataset) -> Vec<u8> {
        let realized = self.realize();
        data.inputs
            .iter()
            .flat_map(|x| {
                realized
                    .trace(x)
                    .preactivations
                    .into_iter()
                    .flatten()
                    .map(|a| self.activation.region(a))
            })
            .collect()
    }

    /// Full-batch gradient descent on the coefficients.
    ///
    /// Returns the trained copy and the mean squared error measured before
    /// each of the `steps` updates.
    pub fn train(&self, data: &Dataset, steps: usize, learning_rate: f64) -> Result<(Self, Vec<f64>)> {
        if steps == 0 {
            return Err(Error::InvalidArgument("steps must be at least 1".into()));
        }
        if !(learning_rate >= 0.0 && learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be a non-negative number, got {learning_rate}"
            )));
        }
        let mut net = self.clone();
        let mut params = net.parameters();
        let mut history = Vec::with_capacity(steps);
        for step in 0..steps {
            let (mse, grad) = net.loss_grad(data)?;
            if mse.is_nan() || mse > DIVERGENCE_MSE {
                return Err(Error::Diverged { step, mse });
            }
            history.push(mse);
            numerics::axpy(-learning_rate, &grad, &mut params);
            net.set_parameters(&params)?;
        }
        Ok((net, history))
    }

    fn validate_dataset(&self, data: &Dataset) -> Result<()> {
        if data.is_empty() {
            return Err(Error::InvalidArgument("dataset is empty".into()));
        }
        if data.inputs[0].len() != self.input_dim() || data.targets[0].len() != self.output_dim() {
            return Err(Error::Shape(format!(
                "dataset maps R^{} to R^{}, network maps R^{} to R^{}",
                data.inputs[0].len(),
                data.targets[0].len(),
                self.input_dim(),
                self.output_dim()
            )));
        }
        Ok(())
    }
}

fn add_outer(m: &mut Matrix, left: &[f64], right: &[f64]) {
    for (i, &l) in left.iter().enumerate() {
        if l != 0.0 {
            for (j, &r) in right.iter().enumerate() {
                m[(i, j)] += l * r;
            }
        }
    }
}

/// A map `R^{n_in} → R^{n_out}` intertwining two representations of one group.
pub trait EquivariantMap {
    fn input_rep(&self) -> &Representation;
    fn output_rep(&self) -> &Representation;
    /// Evaluates the map; `v` must have the input degree.
    fn apply(&self, v: &[f64]) -> Vec<f64>;
}

/// Network with weights and biases materialized once.
pub struct RealizedNetwork<'a> {
    net: &'a EquivariantNetwork,
    weights: Vec<Matrix>,
    biases: Vec<Vec<f64>>,
}

struct Trace {
    /// `h_0 = x, h_1, …, h_{k−1}, y`.
    outputs: Vec<Vec<f64>>,
    /// Hidden pre-activations `A_i h_{i−1} + b_i`.
    preactivations: Vec<Vec<f64>>,
}

impl RealizedNetwork<'_> {
    fn trace(&self, x: &[f64]) -> Trace {
        let k = self.weights.len();
        let mut outputs = Vec::with_capacity(k + 1);
        let mut preactivations = Vec::with_capacity(k - 1);
        outputs.push(x.to_vec());
        for (i, w) in self.weights.iter().enumerate() {
            let mut z = w.matvec(&outputs[i]);
            if i + 1 < k {
                numerics::axpy(1.0, &self.biases[i], &mut z);
                let h = z.iter().map(|&a| self.net.activation.apply_scalar(a)).collect();
                preactivations.push(z);
                outputs.push(h);
            } else {
                outputs.push(z);
            }
        }
        Trace { outputs, preactivations }
    }

    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }
}

impl EquivariantMap for RealizedNetwork<'_> {
    fn input_rep(&self) -> &Representation {
        &self.net.reps[0]
    }

    fn output_rep(&self) -> &Representation {
        &self.net.reps[self.net.depth()]
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.trace(v).outputs.pop().expect("trace ends with the output")
    }
}

/// `second ∘ first`.
pub struct Compose<A, B> {
    first: A,
    second: B,
}

impl<A: EquivariantMap, B: EquivariantMap> Compose<A, B> {
    /// Fails unless the output representation of `first` is the input
    /// representation of `second`.
    pub fn new(first: A, second: B) -> Result<Self> {
        let (out, inp) = (first.output_rep(), second.input_rep());
        let matching = out.same_group(inp)
            && out.degree() == inp.degree()
            && out
                .gen_images()
                .iter()
                .zip(inp.gen_images())
                .all(|(a, b)| a.max_abs_diff(b) <= 1e-12);
        if !matching {
            return Err(Error::InvalidArgument("boundary representations differ".into()));
        }
        Ok(Self { first, second })
    }
}

impl<A: EquivariantMap, B: EquivariantMap> EquivariantMap for Compose<A, B> {
    fn input_rep(&self) -> &Representation {
        self.first.input_rep()
    }

    fn output_rep(&self) -> &Representation {
        self.second.output_rep()
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.second.apply(&self.first.apply(v))
    }
}

/// `α·f + β·g`.
pub struct LinearCombination<A, B> {
    alpha: f64,
    f: A,
    beta: f64,
    g: B,
}

impl<A: EquivariantMap, B: EquivariantMap> LinearCombination<A, B> {
    pub fn new(alpha: f64, f: A, beta: f64, g: B) -> Result<Self> {
        let same = |a: &Representation, b: &Representation| {
            a.same_group(b)
                && a.degree() == b.degree()
                && a.gen_images().iter().zip(b.gen_images()).all(|(x, y)| x.max_abs_diff(y) <= 1e-12)
        };
        if !same(f.input_rep(), g.input_rep()) || !same(f.output_rep(), g.output_rep()) {
            return Err(Error::InvalidArgument("maps act between different representations".into()));
        }
        Ok(Self { alpha, f, beta, g })
    }
}

impl<A: EquivariantMap, B: EquivariantMap> EquivariantMap for LinearCombination<A, B> {
    fn input_rep(&self) -> &Representation {
        self.f.input_rep()
    }

    fn output_rep(&self) -> &Representation {
        self.f.output_rep()
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self.f.apply(v).iter().map(|x| self.alpha * x).collect();
        numerics::axpy(self.beta, &self.g.apply(v), &mut out);
        out
    }
}

/// Checks `f(ρ_in(g)v) = ρ_out(g)f(v)` on seeded inputs with entries in
/// `[−2, 4]`: every element for each of `trials` inputs when the group has
/// at most 5000 elements, otherwise `trials` random (element, input) pairs.
pub fn check_equivariance<M: EquivariantMap + ?Sized>(map: &M, trials: usize, seed: u64, tol: f64) -> Report {
    let mut rng = rng::seeded(seed);
    let rho_in = map.input_rep();
    let rho_out = map.output_rep();
    let order = rho_in.group().order();
    let mut tally = Tally::new(tol);
    for _ in 0..trials {
        let v = rng::probe_vec(&mut rng, rho_in.degree());
        let fv = map.apply(&v);
        let denom = 1.0 + max_abs(&fv);
        let mut visit = |g: usize| {
            let lhs = map.apply(&rho_in.image(g).matvec(&v));
            let rhs = rho_out.image(g).matvec(&fv);
            let residual = max_abs_diff(&lhs, &rhs) / denom;
            tally.record(residual, || Witness {
                element: g,
                input: v.clone(),
                lhs,
                rhs,
                residual,
            });
        };
        if order <= EXHAUSTIVE_LIMIT {
            (0..order).for_each(&mut visit);
        } else {
            visit(rng.gen_range(0..order));
        }
    }
    tally.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::NamedGroup;

    fn group(g: NamedGroup) -> Arc<FiniteGroup> {
        Arc::new(FiniteGroup::named(&g).unwrap())
    }

    fn deep_sets(m: usize, channels: usize) -> Vec<Representation> {
        let g = group(NamedGroup::Symmetric(m));
        let lifted = Representation::defining(g.clone()).tensor_identity(channels).unwrap();
        vec![lifted.clone(), lifted, Representation::trivial(g, channels).unwrap()]
    }

    fn c4_chain() -> Vec<Representation> {
        vec![Representation::defining(group(NamedGroup::Cyclic(4))); 3]
    }

    #[test]
    fn trivial_group_is_a_dense_mlp() {
        let g = group(NamedGroup::Trivial);
        let reps = vec![Representation::trivial(g.clone(), 3).unwrap(), Representation::trivial(g, 2).unwrap()];
        let net = EquivariantNetwork::build(reps, ActivationSpec::Relu, 1).unwrap();
        assert_eq!(net.weight_basis(1).dim(), 6);
        assert_eq!(net.count_parameters(), ParameterCount { equivariant: 6, dense: 6 });
    }

    #[test]
    fn deep_sets_dimensions_and_counts() {
        let net = EquivariantNetwork::build(deep_sets(4, 3), ActivationSpec::Relu, 3).unwrap();
        assert_eq!(net.weight_basis(1).dim(), 18);
        assert_eq!(net.weight_basis(2).dim(), 9);
        assert_eq!(net.bias_basis(1).unwrap().cols(), 1);
        let count = net.count_parameters();
        assert_eq!(count.equivariant, 28);
        assert_eq!(count.dense, 12 * 12 + 12 * 3 + 12);

        let fixed = EquivariantNetwork::build_with(
            deep_sets(4, 3),
            ActivationSpec::Relu,
            BuildOptions {
                bias_space: BiasSpace::Fixed,
                ..BuildOptions::default()
            },
            3,
        )
        .unwrap();
        assert_eq!(fixed.bias_basis(1).unwrap().cols(), 3);
        assert_eq!(fixed.count_parameters().equivariant, 30);
    }

    #[test]
    fn cyclic_chain_counts() {
        let net = EquivariantNetwork::build(c4_chain(), ActivationSpec::Relu, 0).unwrap();
        assert_eq!(net.weight_basis(1).dim(), 4);
        assert_eq!(net.weight_basis(2).dim(), 4);
        assert_eq!(net.count_parameters().equivariant, 9);
    }

    #[test]
    fn initial_weight_scale() {
        let net = EquivariantNetwork::build(deep_sets(4, 3), ActivationSpec::Relu, 11).unwrap();
        let a1 = net.weight(1);
        let rms = a1.frobenius_norm() / ((a1.rows() * a1.cols()) as f64).sqrt();
        assert!((rms - (2.0f64 / 12.0).sqrt()).abs() < 1e-12);
        assert!(net.bias(1).unwrap().iter().all(|&b| b == 0.0));
    }

    #[test]
    fn build_errors() {
        let s3 = group(NamedGroup::Symmetric(3));
        let def = Representation::defining(s3.clone());
        let sign = Representation::sign(s3.clone());
        assert_eq!(
            EquivariantNetwork::build(vec![def.clone(), sign.clone(), def.clone()], ActivationSpec::Relu, 0)
                .unwrap_err(),
            Error::NotPermutationRep { layer: 1 }
        );
        // Hom(defining, sign) = 0 for S3.
        assert_eq!(
            EquivariantNetwork::build(vec![def.clone(), sign], ActivationSpec::Relu, 0).unwrap_err(),
            Error::EmptyWeightSpace { layer: 1 }
        );
        let c3 = Representation::defining(group(NamedGroup::Cyclic(3)));
        assert_eq!(
            EquivariantNetwork::build(vec![def.clone(), c3], ActivationSpec::Relu, 0).unwrap_err(),
            Error::GroupMismatch
        );
        assert!(EquivariantNetwork::build(vec![def], ActivationSpec::Relu, 0).is_err());
    }

    #[test]
    fn forward_examples() {
        let g = group(NamedGroup::Trivial);
        let t3 = Representation::trivial(g, 3).unwrap();
        let mut net = EquivariantNetwork::zeroed(vec![t3.clone(), t3], ActivationSpec::Relu, BuildOptions::default())
            .unwrap();
        let coords = net.weight_basis(1).coordinates(&Matrix::identity(3));
        net.set_weight_coeffs(1, coords).unwrap();
        let v = [0.3, -1.5, 2.0];
        let out = net.forward(&v).unwrap();
        assert!(max_abs_diff(&out, &v) < 1e-15);
        assert!(net.forward(&[1.0]).is_err());

        let zero = EquivariantNetwork::zeroed(deep_sets(3, 2), ActivationSpec::Relu, BuildOptions::default()).unwrap();
        assert_eq!(zero.forward(&[1.0; 6]).unwrap(), vec![0.0; 2]);
    }

    #[test]
    fn deep_sets_ignore_point_order() {
        let net = EquivariantNetwork::build(deep_sets(3, 2), ActivationSpec::Relu, 5).unwrap();
        let a = net.forward(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let b = net.forward(&[5.0, 6.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(max_abs_diff(&a, &b) < 1e-12);
    }

    #[test]
    fn built_nets_are_equivariant_and_tampered_ones_are_not() {
        let net = EquivariantNetwork::build(deep_sets(4, 3), ActivationSpec::Relu, 9).unwrap();
        let report = net.check_equivariance(3, 1, DEFAULT_CHECK_TOL);
        assert!(report.pass, "{report:?}");
        assert_eq!(report.checked, 3 * 24);

        let mut tampered = net.clone();
        let mut rng = rng::seeded(77);
        let dense = Matrix::new(12, 12, rng::uniform_vec(&mut rng, 144, -1.0, 1.0)).unwrap();
        tampered.override_weight(1, dense).unwrap();
        let report = tampered.check_equivariance(3, 1, DEFAULT_CHECK_TOL);
        assert!(!report.pass);
        assert!(report.max_residual > 1e-3);
        assert!(report.witness.is_some());
        assert!(tampered.override_weight(1, Matrix::identity(3)).is_err());
    }

    #[test]
    fn constant_width_weights_commute_with_the_group() {
        // With ρ_i all equal to the defining representation the constraint
        // reads X⁻¹ A X = A.
        let net = EquivariantNetwork::build(c4_chain(), ActivationSpec::Relu, 4).unwrap();
        let g = net.group().clone();
        for i in 1..=net.depth() {
            let a = net.weight(i);
            for e in 0..g.order() {
                let x = g.element(e);
                let x_inv = g.element(g.inverse(e));
                assert!((&(x_inv * &a) * x).max_abs_diff(&a) < 1e-12);
            }
        }
    }

    #[test]
    fn zero_net_has_zero_loss_and_gradient() {
        let net = EquivariantNetwork::zeroed(c4_chain(), ActivationSpec::Relu, BuildOptions::default()).unwrap();
        let data = Dataset::new(vec![vec![1.0, 2.0, 3.0, 4.0]; 3], vec![vec![0.0; 4]; 3]).unwrap();
        let (mse, grad) = net.loss_grad(&data).unwrap();
        assert_eq!(mse, 0.0);
        assert!(grad.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn single_layer_gradient_is_least_squares_gradient() {
        // f(x) = A x with A = Σ c_j B_j; mse = Σ‖Ax − t‖²/(N·n).
        // d mse / d c_j = (2/(N·n)) Σ ⟨(Ax − t) xᵀ, B_j⟩.
        let rho = Representation::defining(group(NamedGroup::Cyclic(4)));
        let net = EquivariantNetwork::build(vec![rho.clone(), rho], ActivationSpec::Relu, 8).unwrap();
        let mut rng = rng::seeded(2);
        let inputs: Vec<_> = (0..5).map(|_| rng::uniform_vec(&mut rng, 4, -1.0, 1.0)).collect();
        let targets: Vec<_> = (0..5).map(|_| rng::uniform_vec(&mut rng, 4, -1.0, 1.0)).collect();
        let data = Dataset::new(inputs.clone(), targets.clone()).unwrap();
        let (_, grad) = net.loss_grad(&data).unwrap();

        let a = net.weight(1);
        let mut expected = vec![0.0; grad.len()];
        for (x, t) in inputs.iter().zip(&targets) {
            let r: Vec<f64> = a.matvec(x).iter().zip(t).map(|(y, t)| y - t).collect();
            let outer = Matrix::from_fn(4, 4, |i, j| r[i] * x[j]);
            for (e, b) in expected.iter_mut().zip(net.weight_basis(1).basis()) {
                *e += 2.0 / 20.0 * outer.frobenius_dot(b);
            }
        }
        assert!(max_abs_diff(&grad, &expected) < 1e-14);
    }

    #[test]
    fn training_validation_and_zero_rate() {
        let net = EquivariantNetwork::build(c4_chain(), ActivationSpec::Relu, 1).unwrap();
        let data = Dataset::new(vec![vec![1.0, 0.0, 0.0, 2.0]], vec![vec![0.5; 4]]).unwrap();
        assert!(net.train(&data, 0, 0.1).is_err());
        assert!(net.train(&data, 1, -0.1).is_err());
        let (same, history) = net.train(&data, 4, 0.0).unwrap();
        assert_eq!(same.parameters(), net.parameters());
        assert!(history.windows(2).all(|w| w[0] == w[1]));
        let rho = Representation::defining(group(NamedGroup::Cyclic(4)));
        let linear = EquivariantNetwork::build(vec![rho.clone(), rho], ActivationSpec::Relu, 1).unwrap();
        assert!(matches!(linear.train(&data, 200, 1e3), Err(Error::Diverged { .. })));
        let empty = Dataset::new(vec![], vec![]).unwrap();
        assert!(net.loss_grad(&empty).is_err());
        let wrong = Dataset::new(vec![vec![1.0]], vec![vec![1.0]]).unwrap();
        assert!(matches!(net.loss_grad(&wrong), Err(Error::Shape(_))));
    }

    #[test]
    fn realizable_linear_target_is_learned() {
        let rho = Representation::defining(group(NamedGroup::Cyclic(4)));
        let teacher = EquivariantNetwork::build(vec![rho.clone(), rho.clone()], ActivationSpec::Relu, 21).unwrap();
        let student = EquivariantNetwork::build(vec![rho.clone(), rho], ActivationSpec::Relu, 22).unwrap();
        let mut rng = rng::seeded(3);
        let inputs: Vec<_> = (0..20).map(|_| rng::uniform_vec(&mut rng, 4, -1.0, 1.0)).collect();
        let targets = inputs.iter().map(|x| teacher.forward(x).unwrap()).collect();
        let data = Dataset::new(inputs, targets).unwrap();
        let (trained, history) = student.train(&data, 2000, 0.5).unwrap();
        assert!(trained.mse(&data).unwrap() < 1e-10, "{:?}", history.last());
    }

    #[test]
    fn dataset_validation() {
        assert!(Dataset::new(vec![vec![1.0]], vec![]).is_err());
        assert!(Dataset::new(vec![vec![1.0], vec![1.0, 2.0]], vec![vec![0.0], vec![0.0]]).is_err());
    }

    #[test]
    fn parameters_round_trip() {
        let mut net = EquivariantNetwork::build(deep_sets(3, 2), ActivationSpec::Tanh, 2).unwrap();
        let mut p = net.parameters();
        assert_eq!(p.len(), net.count_parameters().equivariant);
        p.iter_mut().enumerate().for_each(|(i, x)| *x = i as f64);
        net.set_parameters(&p).unwrap();
        assert_eq!(net.parameters(), p);
        assert!(net.set_parameters(&p[1..]).is_err());
    }
}
