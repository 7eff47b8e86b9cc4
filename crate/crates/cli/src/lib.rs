//! The `equinet` command-line tool.
//!
//! Exit codes: 0 on success, 1 when an equivariance check fails, 2 on usage,
//! config, model or I/O errors.

mod config;
mod display;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use equinet::activation::{apply_pointwise, check_pointwise_equivariance_on};
use equinet::group::FiniteGroup;
use equinet::network::model::Model;
use equinet::network::{BuildOptions, DEFAULT_CHECK_TOL};
use equinet::structured::{param_count, LayerDims, StructureKind};
use equinet::tasks::{self, FlipAxis, GridImage, MonomialFeatures};
use equinet::{solve_basis, ActivationSpec, EquivariantNetwork, Matrix, Report};

pub use config::{Config, Task, Tolerances};
use display::{signs, Style};

#[derive(Parser, Debug)]
#[command(name = "equinet", version, about = "Build and verify equivariant networks over finite groups")]
struct Cli {
    /// Print numbers with 17 significant digits.
    #[arg(long, global = true)]
    exact: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Intertwiner dimensions at each layer boundary of a config.
    Basis {
        #[arg(long)]
        config: PathBuf,
        /// Only this layer (1-based).
        #[arg(long)]
        layer: Option<usize>,
        /// Also print the orthonormal basis matrices.
        #[arg(long)]
        print: bool,
    },
    /// Equivariance report for a saved model.
    Check {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 3)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_CHECK_TOL)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Train a network on a toy task and save it.
    Train {
        #[arg(long)]
        task: String,
        /// Points per cloud.
        #[arg(long, default_value_t = 5)]
        m: usize,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        #[arg(long, default_value_t = 0.5)]
        lr: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2000)]
        train_samples: usize,
        #[arg(long, default_value_t = 500)]
        test_samples: usize,
    },
    /// Free parameters of a constant-width structured network.
    Count {
        #[arg(long, value_enum)]
        structure: Structure,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m1: Option<usize>,
        #[arg(long)]
        m2: Option<usize>,
    },
    /// Run one of the worked examples.
    Demo {
        #[arg(long, value_enum)]
        example: Example,
        /// Input image for decolor-flip, in `N 3` text format.
        #[arg(long)]
        image: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Structure {
    Dense,
    Toeplitz,
    Bttb,
    Circulant,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Example {
    PermutationThreshold,
    BiasCounterexample,
    DecolorFlip,
    Antisymmetry,
}

enum Failure {
    /// A check ran and failed; the report is already on stdout.
    Check,
    Usage(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Self::Usage(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Runs the tool on `args` (including the program name) and returns the exit
/// code. Normal output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let style = Style { exact: cli.exact };
    let mut text = String::new();
    let result = dispatch(cli.command, style, &mut text);
    let _ = out.write_all(text.as_bytes());
    match result {
        Ok(()) => 0,
        Err(Failure::Check) => 1,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

fn dispatch(command: Command, style: Style, out: &mut String) -> Outcome {
    match command {
        Command::Basis { config, layer, print } => basis(&config, layer, print, style, out),
        Command::Check { model, trials, tol, seed } => check(&model, trials, tol, seed, style, out),
        Command::Train {
            task,
            m,
            steps,
            lr,
            seed,
            out: path,
            train_samples,
            test_samples,
        } => {
            let task: Task = task.parse().map_err(|e: String| Failure::Usage(format!("--task: {e}")))?;
            let samples = (train_samples, test_samples);
            train(task, m, steps, lr, seed, samples, &path, style, out)
        }
        Command::Count { structure, k, n, m1, m2 } => count(structure, k, n, m1, m2, out),
        Command::Demo { example, image } => demo(example, image.as_deref(), style, out),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn line(out: &mut String, s: impl AsRef<str>) {
    out.push_str(s.as_ref());
    out.push('\n');
}

fn basis(path: &Path, only: Option<usize>, print: bool, style: Style, out: &mut String) -> Outcome {
    let config = Config::parse(&read(path)?)?;
    let group = Arc::new(FiniteGroup::named(&config.group).map_err(|e| format!("group: {e}"))?);
    let reps = config
        .reps
        .iter()
        .enumerate()
        .map(|(i, r)| r.build(&group).map_err(|e| format!("reps[{i}]: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    let depth = reps.len() - 1;
    if let Some(i) = only {
        if i == 0 || i > depth {
            return Err(Failure::Usage(format!("--layer: must be in 1..={depth}, got {i}")));
        }
    }
    line(out, format!("group {} (order {})", config.group, group.order()));
    for i in 1..=depth {
        if only.is_some_and(|l| l != i) {
            continue;
        }
        let b = solve_basis(&reps[i - 1], &reps[i], config.tolerances.solve)?;
        let (from, to) = (&config.reps[i - 1], &config.reps[i]);
        line(out, format!("layer {i}: {from} -> {to}: dim {}", b.dim()));
        if print {
            for (j, m) in b.basis().iter().enumerate() {
                line(out, format!("basis {}:", j + 1));
                out.push_str(&style.matrix(m));
            }
        }
    }
    if only.is_none() {
        let options = BuildOptions {
            bias_space: config.bias_space,
            tol: config.tolerances.solve,
        };
        let net = EquivariantNetwork::build_with(reps, config.activation, options, config.seed)?;
        let c = net.count_parameters();
        line(
            out,
            format!("parameters: {} (dense {}, ratio {})", c.equivariant, c.dense, style.num(c.ratio())),
        );
        let report = net.check_equivariance(1, config.seed, config.tolerances.check);
        write_report(&report, &group, style, out);
        if !report.pass {
            return Err(Failure::Check);
        }
    }
    Ok(())
}

fn write_report(report: &Report, group: &FiniteGroup, style: Style, out: &mut String) {
    let verdict = if report.pass { "pass" } else { "fail" };
    line(
        out,
        format!(
            "equivariance: {verdict} (max residual {} over {} checks)",
            style.num(report.max_residual),
            report.checked
        ),
    );
    if let Some(w) = &report.witness {
        line(out, format!("witness: element {} = word {:?}", w.element, group.word(w.element)));
        line(out, format!("  v:       {}", style.tuple(&w.input)));
        line(out, format!("  f(g v):  {}", style.tuple(&w.lhs)));
        line(out, format!("  g f(v):  {}", style.tuple(&w.rhs)));
        line(out, format!("  residual {}", style.num(w.residual)));
    }
}

fn check(path: &Path, trials: usize, tol: f64, seed: u64, style: Style, out: &mut String) -> Outcome {
    if trials == 0 {
        return Err(Failure::Usage("--trials: must be positive".into()));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Failure::Usage(format!("--tol: must be a positive number, got {tol}")));
    }
    let model = Model::from_text(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))?;
    let report = model.net.check_equivariance(trials, seed, tol);
    write_report(&report, model.net.group(), style, out);
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

#[allow(clippy::too_many_arguments)]
fn train(
    task: Task,
    m: usize,
    steps: usize,
    lr: f64,
    seed: u64,
    (n_train, n_test): (usize, usize),
    path: &Path,
    style: Style,
    out: &mut String,
) -> Outcome {
    match task {
        Task::CenterOfMass => {}
    }
    if m == 0 {
        return Err(Failure::Usage("--m: must be positive".into()));
    }
    let train_data = tasks::com_dataset(m, n_train, seed)?;
    let test_data = tasks::com_dataset(m, n_test, seed.wrapping_add(1))?;
    let mut model = Model::new(tasks::com_architecture(m), seed)?;
    let (net, _) = model.net.train(&train_data, steps, lr)?;
    model.net = net;
    let c = model.net.count_parameters();
    line(out, format!("train mse: {}", style.num(model.net.mse(&train_data)?)));
    line(out, format!("test mse: {}", style.num(model.net.mse(&test_data)?)));
    line(
        out,
        format!("parameters: {} (dense {}, ratio {})", c.equivariant, c.dense, style.num(c.ratio())),
    );
    fs::write(path, model.to_text()).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(())
}

fn count(
    structure: Structure,
    k: usize,
    n: Option<usize>,
    m1: Option<usize>,
    m2: Option<usize>,
    out: &mut String,
) -> Outcome {
    let kind = match structure {
        Structure::Dense => StructureKind::Dense,
        Structure::Toeplitz => StructureKind::Toeplitz,
        Structure::Bttb => StructureKind::Bttb,
        Structure::Circulant => StructureKind::Circulant,
    };
    let dims = match (kind, n, m1, m2) {
        (StructureKind::Bttb, n, Some(m1), Some(m2)) => {
            if n.is_some_and(|n| n != m1 * m2) {
                return Err(Failure::Usage(format!("--n: bttb width must equal m1*m2 = {}", m1 * m2)));
            }
            LayerDims::Grid { m1, m2 }
        }
        (StructureKind::Bttb, ..) => return Err(Failure::Usage("bttb needs --m1 and --m2".into())),
        (_, Some(n), None, None) => LayerDims::Width(n),
        (_, None, ..) => return Err(Failure::Usage("--n is required".into())),
        _ => return Err(Failure::Usage("--m1/--m2 apply only to bttb".into())),
    };
    line(out, param_count(kind, k, dims)?.to_string());
    Ok(())
}

fn demo(example: Example, image: Option<&Path>, style: Style, out: &mut String) -> Outcome {
    if image.is_some() && !matches!(example, Example::DecolorFlip) {
        return Err(Failure::Usage("--image applies only to decolor-flip".into()));
    }
    match example {
        Example::PermutationThreshold => threshold_demo(&[0.0; 3], style, out),
        Example::BiasCounterexample => threshold_demo(&[-1.0, 0.0, 0.0], style, out),
        Example::DecolorFlip => {
            let img = match image {
                Some(p) => read(p)?.parse::<GridImage>().map_err(|e| format!("{}: {e}", p.display()))?,
                None => GridImage::random(4, 0),
            };
            decolor_demo(&img, out)
        }
        Example::Antisymmetry => antisymmetry_demo(style, out),
    }
}

/// `v -> Xv -> σ_b(Xv) -> X⁻¹σ_b(Xv)` for the cyclic shift `X` and
/// `sign_threshold:3`, compared against `σ_b(v)`.
fn threshold_demo(b: &[f64], style: Style, out: &mut String) -> Outcome {
    let sigma = ActivationSpec::SignThreshold(3.0);
    let group = Arc::new(FiniteGroup::named(&equinet::group::NamedGroup::Cyclic(3))?);
    let rep = equinet::Representation::defining(group);
    let x = rep.image(1);
    let v = [2.1, 3.4, 0.2];
    let xv = x.matvec(&v);
    let s_xv = apply_pointwise(&sigma, b, &xv)?;
    let back = x.transpose().matvec(&s_xv);
    let s_v = apply_pointwise(&sigma, b, &v)?;
    line(out, format!("sigma = {sigma}, b = {}", style.tuple(b)));
    line(out, format!("X = {}", rows(x)));
    line(
        out,
        format!("{} -> {} -> {} -> {}", style.tuple(&v), style.tuple(&xv), signs(&s_xv), signs(&back)),
    );
    line(out, format!("sigma_b(v) = {}", signs(&s_v)));
    let report = check_pointwise_equivariance_on(&sigma, b, &rep, &[v.to_vec()], 0.0)?;
    let verdict = if report.pass { "equivariant" } else { "not equivariant" };
    line(out, format!("sigma_b over C3: {verdict}"));
    Ok(())
}

fn rows(m: &Matrix) -> String {
    let rs: Vec<String> = (0..m.rows())
        .map(|i| m.row(i).iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(" "))
        .collect();
    format!("[{}]", rs.join("; "))
}

fn decolor_demo(img: &GridImage, out: &mut String) -> Outcome {
    let flipped = tasks::flip(img, FlipAxis::TopBottom);
    let a = tasks::decolor(&flipped);
    let b = tasks::flip(&tasks::decolor(img), FlipAxis::TopBottom);
    line(out, "# image");
    out.push_str(&img.to_string());
    line(out, "# flip (top-bottom)");
    out.push_str(&flipped.to_string());
    line(out, "# decolor after flip");
    out.push_str(&a.to_string());
    line(out, "# flip after decolor");
    out.push_str(&b.to_string());
    line(out, format!("commutes: {}", if a == b { "yes" } else { "no" }));
    Ok(())
}

fn antisymmetry_demo(style: Style, out: &mut String) -> Outcome {
    let (m, dim) = (3, 3);
    let features = MonomialFeatures::new(dim, m, 0);
    let v = vec![vec![0.5, -1.0, 0.25], vec![-0.75, 0.5, 1.0], vec![1.0, 0.25, -0.5]];
    let f = |x: &[Vec<f64>]| features.wavefunction(x);
    line(out, "f(v1, v2, v3) = det[phi_j(v_i)], phi_j(v) = (v.u)^j, j = 0, 1, 2");
    for (i, p) in v.iter().enumerate() {
        line(out, format!("v{} = {}", i + 1, style.tuple(p)));
    }
    let base = f(&v);
    for perm in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
        let permuted: Vec<Vec<f64>> = perm.iter().map(|&i| v[i].clone()).collect();
        let value = f(&permuted);
        let sign = if (value >= 0.0) == (base >= 0.0) { "+" } else { "-" };
        line(
            out,
            format!(
                "f(v{}, v{}, v{}) = {} ({sign}f)",
                perm[0] + 1,
                perm[1] + 1,
                perm[2] + 1,
                style.num(value)
            ),
        );
    }
    let coincident = vec![v[0].clone(), v[0].clone(), v[2].clone()];
    line(out, format!("f(v1, v1, v3) = {}", style.num(f(&coincident))));
    let report = tasks::check_antisymmetry(f, m, dim, 5, 0, 1e-10)?;
    let verdict = if report.pass { "pass" } else { "fail" };
    line(out, format!("antisymmetry over S3: {verdict} ({} checks)", report.checked));
    Ok(())
}
