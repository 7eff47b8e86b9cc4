//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::sync::Arc;
use std::time::{Duration, Instant};

use equinet::activation::{apply_pointwise, check_pointwise_equivariance_on};
use equinet::group::NamedGroup;
use equinet::network::{check_equivariance, Compose, LinearCombination};
use equinet::numerics::{orthonormalize, projector, rank};
use equinet::structured::{bttb, circulant, param_count, toeplitz, LayerDims, StructureKind};
use equinet::tasks::{self, FlipAxis, GridImage, MonomialFeatures};
use equinet::{
    hom_dim_oracle, rng, solve_basis, ActivationSpec, Dataset, EquivariantNetwork, FiniteGroup, Matrix, RepSpec,
    Representation,
};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn group(spec: &str) -> Arc<FiniteGroup> {
    Arc::new(FiniteGroup::named(&spec.parse::<NamedGroup>().unwrap()).unwrap())
}

fn reps(group: &Arc<FiniteGroup>, specs: &[&str]) -> Vec<Representation> {
    specs.iter().map(|s| s.parse::<RepSpec>().unwrap().build(group).unwrap()).collect()
}

fn random_dataset(input: usize, output: usize, samples: usize, seed: u64) -> Dataset {
    let mut r = rng::seeded(seed);
    let inputs = (0..samples).map(|_| rng::uniform_vec(&mut r, input, -1.0, 1.0)).collect();
    let targets = (0..samples).map(|_| rng::uniform_vec(&mut r, output, -1.0, 1.0)).collect();
    Dataset::new(inputs, targets).unwrap()
}

fn paper_example() -> Outcome {
    let start = Instant::now();
    let sigma = ActivationSpec::SignThreshold(3.0);
    let x = Matrix::from_rows(&[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]]).unwrap();
    let x_inv = x.transpose();
    let v = [2.1, 3.4, 0.2];
    let zero = [0.0; 3];
    let b = [-1.0, 0.0, 0.0];
    let xv = x.matvec(&v);
    let s_xv = apply_pointwise(&sigma, &zero, &xv).unwrap();
    let back = x_inv.matvec(&s_xv);
    let s_v = apply_pointwise(&sigma, &zero, &v).unwrap();
    let sb_xv = apply_pointwise(&sigma, &b, &xv).unwrap();
    let back_b = x_inv.matvec(&sb_xv);
    let sb_v = apply_pointwise(&sigma, &b, &v).unwrap();

    let c3 = group("cyclic(3)");
    let rep = Representation::defining(c3.clone());
    let shift = c3.index_of(&x).unwrap();
    let report = check_pointwise_equivariance_on(&sigma, &b, &rep, &[v.to_vec()], 0.0).unwrap();
    let elapsed = start.elapsed();

    let pass = xv == [3.4, 0.2, 2.1]
        && s_xv == [1.0, -1.0, -1.0]
        && back == [-1.0, 1.0, -1.0]
        && back == s_v
        && sb_xv == [-1.0, -1.0, -1.0]
        && back_b == [-1.0, -1.0, -1.0]
        && sb_v == [-1.0, 1.0, -1.0]
        && !report.pass
        && report.witness.as_ref().is_some_and(|w| w.element == shift && w.lhs == sb_xv && w.rhs == x.matvec(&sb_v))
        && elapsed < Duration::from_millis(1);
    outcome(pass, format!("sigma(Xv) = {s_xv:?}, X^-1 sigma_b(Xv) = {back_b:?} vs sigma_b(v) = {sb_v:?}, {elapsed:?}"))
}

fn intertwiner_dimensions() -> Outcome {
    let cases: [(&str, &str, &str, usize); 6] = [
        ("trivial", "trivial(4)", "trivial(4)", 16),
        ("symmetric(3)", "defining", "defining", 2),
        ("cyclic(4)", "defining", "defining", 4),
        ("symmetric(4)", "tensor_identity(defining, 3)", "tensor_identity(defining, 3)", 18),
        ("symmetric(4)", "tensor_identity(defining, 3)", "trivial(3)", 9),
        ("torus_translation(3)", "defining", "defining", 9),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (g, a, b, want) in cases {
        let g = group(g);
        let r = reps(&g, &[a, b]);
        let start = Instant::now();
        let solved = solve_basis(&r[0], &r[1], 1e-9).unwrap().dim();
        let elapsed = start.elapsed();
        let oracle = hom_dim_oracle(&r[0], &r[1]).unwrap();
        pass &= solved == want && oracle == want && elapsed < Duration::from_secs(5);
        parts.push(format!("{solved}/{oracle}"));
    }
    outcome(pass, format!("solved/oracle = {}", parts.join(", ")))
}

fn equivariance_by_construction() -> Outcome {
    let start = Instant::now();
    let chains: [(&str, [&str; 3], &str); 4] = [
        ("symmetric(3)", ["defining", "tensor_identity(defining, 2)", "trivial(1)"], "relu"),
        (
            "symmetric(4)",
            ["tensor_identity(defining, 3)", "tensor_identity(defining, 3)", "trivial(3)"],
            "tanh",
        ),
        ("cyclic(4)", ["defining", "direct_sum(defining, defining)", "defining"], "threshold:0.5"),
        ("p4(2)", ["defining", "tensor_identity(defining, 2)", "trivial(2)"], "relu"),
    ];
    let mut worst: f64 = 0.0;
    let mut nets = 0;
    let mut pass = true;
    for (g, specs, act) in chains {
        let g = group(g);
        for seed in 0..5 {
            let net = EquivariantNetwork::build(reps(&g, &specs), act.parse().unwrap(), seed).unwrap();
            let data = random_dataset(net.input_dim(), net.output_dim(), 16, 100 + seed);
            let (trained, _) = net.train(&data, 100, 0.05).unwrap();
            for n in [&net, &trained] {
                let report = n.check_equivariance(3, seed, 1e-8);
                pass &= report.pass;
                worst = worst.max(report.max_residual);
            }
            nets += 1;
        }
    }
    let elapsed = start.elapsed();
    pass &= nets == 20 && elapsed < Duration::from_secs(60);
    outcome(pass, format!("{nets} nets, max residual {worst:.2e}, {elapsed:.2?}"))
}

/// Relative error of an analytic derivative against a central difference,
/// with a floor of 1e-6 on the denominator for near-zero derivatives.
fn rel_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

fn gradient_check() -> Outcome {
    let start = Instant::now();
    let h = 1e-5;
    let setups: [(&str, [&str; 3], &str); 5] = [
        (
            "symmetric(4)",
            ["tensor_identity(defining, 3)", "tensor_identity(defining, 3)", "trivial(3)"],
            "relu",
        ),
        ("symmetric(3)", ["defining", "tensor_identity(defining, 3)", "defining"], "tanh"),
        ("cyclic(4)", ["defining", "direct_sum(defining, defining, defining)", "defining"], "relu"),
        ("p4(2)", ["tensor_identity(defining, 2)", "tensor_identity(defining, 3)", "trivial(2)"], "tanh"),
        ("symmetric(3)", ["tensor_identity(defining, 2)", "tensor_identity(defining, 4)", "trivial(2)"], "relu"),
    ];
    let (mut checked, mut excluded, mut worst) = (0usize, 0usize, 0.0f64);
    for (i, (g, specs, act)) in setups.iter().enumerate() {
        let g = group(g);
        let net = EquivariantNetwork::build(reps(&g, specs), act.parse().unwrap(), 7 + i as u64).unwrap();
        let data = random_dataset(net.input_dim(), net.output_dim(), 12, 50 + i as u64);
        let (_, grad) = net.loss_grad(&data).unwrap();
        let theta = net.parameters();
        let pattern = net.activation_pattern(&data);
        let mut shifted = net.clone();
        let mut eval = |p: usize, delta: f64| {
            let mut t = theta.clone();
            t[p] += delta;
            shifted.set_parameters(&t).unwrap();
            (shifted.mse(&data).unwrap(), shifted.activation_pattern(&data))
        };
        for (p, &analytic) in grad.iter().enumerate() {
            let (plus, pat_plus) = eval(p, h);
            let (minus, pat_minus) = eval(p, -h);
            if pat_plus != pattern || pat_minus != pattern {
                excluded += 1;
                continue;
            }
            worst = worst.max(rel_error(analytic, (plus - minus) / (2.0 * h)));
            checked += 1;
        }
    }
    let total = checked + excluded;
    let elapsed = start.elapsed();
    let pass = worst < 1e-5 && checked >= 100 && (excluded as f64) < 0.05 * total as f64 && elapsed < Duration::from_secs(30);
    outcome(
        pass,
        format!("{checked} coefficients, {excluded} excluded, max rel error {worst:.2e}, {elapsed:.2?}"),
    )
}

fn center_of_mass() -> Outcome {
    let start = Instant::now();
    let train = tasks::com_dataset(5, 2000, 1).unwrap();
    let test = tasks::com_dataset(5, 500, 2).unwrap();
    let net = tasks::com_architecture(5).build(1).unwrap();
    let (trained, _) = net.train(&train, 10_000, 0.5).unwrap();
    let test_mse = trained.mse(&test).unwrap();
    let count = trained.count_parameters();
    let elapsed = start.elapsed();
    let pass = test_mse < 1e-3
        && count.equivariant == 28
        && count.dense == 285
        && count.ratio() < 0.1
        && elapsed < Duration::from_secs(120);
    outcome(
        pass,
        format!(
            "test mse {test_mse:.3e}, parameters {} vs {} (ratio {:.4}), {elapsed:.2?}",
            count.equivariant,
            count.dense,
            count.ratio()
        ),
    )
}

/// Dimension of the span of `draws` stacks sampled with random parameters.
fn counted_dimension(params: usize, build: impl Fn(&[f64]) -> Vec<f64>) -> usize {
    let mut r = rng::seeded(params as u64);
    let rows: Vec<Vec<f64>> = (0..params + 10).map(|_| build(&rng::uniform_vec(&mut r, params, -1.0, 1.0))).collect();
    rank(&Matrix::from_rows(&rows).unwrap(), 1e-9).unwrap()
}

/// Flattens `k` weight matrices and `k − 1` biases read off the front of
/// `params`.
fn stack(k: usize, n: usize, per_weight: usize, weight: impl Fn(&[f64]) -> Matrix, params: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    let mut rest = params;
    for layer in 0..k {
        let (w, tail) = rest.split_at(per_weight);
        out.extend_from_slice(weight(w).data());
        rest = tail;
        if layer + 1 < k {
            let (b, tail) = rest.split_at(n);
            out.extend_from_slice(b);
            rest = tail;
        }
    }
    out
}

fn parameter_counts() -> Outcome {
    let toeplitz_formula = param_count(StructureKind::Toeplitz, 3, LayerDims::Width(4)).unwrap();
    let bttb_formula = param_count(StructureKind::Bttb, 2, LayerDims::Grid { m1: 3, m2: 3 }).unwrap();
    let dense_formula = param_count(StructureKind::Dense, 1, LayerDims::Width(5)).unwrap();
    // Oversupply raw parameters so the count comes from the realized stacks.
    let toeplitz_counted = counted_dimension(3 * 7 + 2 * 4, |p| stack(3, 4, 7, |w| toeplitz(4, w).unwrap(), p));
    let bttb_counted = counted_dimension(2 * 25 + 9, |p| stack(2, 9, 25, |w| bttb(3, 3, w).unwrap(), p));
    let dense_counted = counted_dimension(25, |p| stack(1, 5, 25, |w| Matrix::new(5, 5, w.to_vec()).unwrap(), p));
    let pass = (toeplitz_formula, bttb_formula, dense_formula) == (29, 59, 25)
        && (toeplitz_counted, bttb_counted, dense_counted) == (29, 59, 25);
    outcome(
        pass,
        format!(
            "formula {toeplitz_formula}/{bttb_formula}/{dense_formula}, counted {toeplitz_counted}/{bttb_counted}/{dense_counted}"
        ),
    )
}

fn structured_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 3..=8 {
        let columns: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                circulant(n, &e).unwrap().into_data()
            })
            .collect();
        let circ = projector(&orthonormalize(&Matrix::from_columns(n * n, &columns).unwrap()));
        let rep = Representation::defining(group(&format!("cyclic({n})")));
        let basis = solve_basis(&rep, &rep, 1e-9).unwrap();
        let solved: Vec<Vec<f64>> = basis.basis().iter().map(|m| m.data().to_vec()).collect();
        let solved = projector(&orthonormalize(&Matrix::from_columns(n * n, &solved).unwrap()));
        worst = worst.max(circ.max_abs_diff(&solved));
    }
    let shift = Representation::defining(group("cyclic(4)")).gen_image(0).clone();
    let t = toeplitz(4, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]).unwrap();
    let commutator = (&t * &shift).sub(&(&shift * &t)).max_abs();
    let pass = worst < 1e-9 && commutator > 0.1;
    outcome(pass, format!("projector distance {worst:.2e}, toeplitz commutator {commutator}"))
}

fn commuting_square() -> Outcome {
    let mut pass = true;
    for seed in 0..100 {
        let img = GridImage::random(8, seed);
        for axis in [FlipAxis::TopBottom, FlipAxis::LeftRight] {
            pass &= tasks::decolor(&tasks::flip(&img, axis)) == tasks::flip(&tasks::decolor(&img), axis);
        }
    }
    outcome(pass, "100 images, both flip axes")
}

fn antisymmetry() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut pass = true;
    let mut coincident: f64 = 0.0;
    for seed in 0..5 {
        let features = MonomialFeatures::new(3, 3, seed);
        let report = tasks::check_antisymmetry(|v| features.wavefunction(v), 3, 3, 20, seed, 1e-10).unwrap();
        pass &= report.pass && report.checked == 20 * 6;
        worst = worst.max(report.max_residual);
        let mut r = rng::seeded(seed + 1000);
        let a = rng::uniform_vec(&mut r, 3, -1.0, 1.0);
        let b = rng::uniform_vec(&mut r, 3, -1.0, 1.0);
        coincident = coincident.max(features.wavefunction(&[a.clone(), a, b]).abs());
    }
    pass &= coincident < 1e-10;
    outcome(pass, format!("max residual {worst:.2e}, coincident |det| {coincident:.2e}"))
}

fn closure() -> Outcome {
    let g = group("symmetric(4)");
    let first = EquivariantNetwork::build(
        reps(&g, &["defining", "tensor_identity(defining, 2)", "defining"]),
        ActivationSpec::Relu,
        1,
    )
    .unwrap();
    let second =
        EquivariantNetwork::build(reps(&g, &["defining", "defining", "trivial(2)"]), ActivationSpec::Tanh, 2).unwrap();
    let other = EquivariantNetwork::build(
        reps(&g, &["defining", "direct_sum(trivial(1), defining)", "trivial(2)"]),
        ActivationSpec::Relu,
        3,
    )
    .unwrap();
    let composed = Compose::new(first.realize(), second.realize()).unwrap();
    let composite = check_equivariance(&composed, 5, 0, 1e-8);
    let combo = LinearCombination::new(0.7, second.realize(), -1.3, other.realize()).unwrap();
    let combination = check_equivariance(&combo, 5, 0, 1e-8);
    let pass = composite.pass && combination.pass;
    outcome(
        pass,
        format!(
            "composition {:.2e}, linear combination {:.2e}",
            composite.max_residual, combination.max_residual
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("worked threshold example", paper_example),
        ("intertwiner dimensions", intertwiner_dimensions),
        ("equivariance by construction", equivariance_by_construction),
        ("gradient check", gradient_check),
        ("center-of-mass training", center_of_mass),
        ("parameter counts", parameter_counts),
        ("circulant equivalence", structured_equivalence),
        ("decolor/flip commuting square", commuting_square),
        ("slater antisymmetry", antisymmetry),
        ("closure properties", closure),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let result = run();
        let verdict = if result.pass { "PASS" } else { "FAIL" };
        println!("acceptance {:>2} {verdict}  {name}: {}", i + 1, result.detail);
        failed += usize::from(!result.pass);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
