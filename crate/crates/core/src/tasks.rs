//! Small worked problems with known symmetry: the center of mass of a point
//! cloud, decoloring and flipping images, and antisymmetric Slater
//! determinants.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use itertools::Itertools;

use crate::activation::ActivationSpec;
use crate::error::{Error, Result};
use crate::group::{FiniteGroup, NamedGroup};
use crate::network::model::Architecture;
use crate::network::{BiasSpace, Dataset};
use crate::numerics::{dot, Matrix};
use crate::rep::{RepSpec, Representation};
use crate::report::{Report, Tally, Witness};
use crate::rng;

/// `m` unit masses at positions in `R³`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    points: Vec<[f64; 3]>,
}

impl PointCloud {
    pub fn new(points: Vec<[f64; 3]>) -> Result<Self> {
        if points.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("point coordinates must be finite".into()));
        }
        Ok(Self { points })
    }

    /// Reads `m` consecutive `(x, y, z)` triples.
    pub fn from_flat(coords: &[f64]) -> Result<Self> {
        if !coords.len().is_multiple_of(3) {
            return Err(Error::Shape(format!("{} coordinates do not form triples", coords.len())));
        }
        Self::new(coords.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.points.iter().flatten().copied().collect()
    }
}

/// `(1/m)·Σ y_i`.
pub fn center_of_mass(pc: &PointCloud) -> Result<[f64; 3]> {
    if pc.is_empty() {
        return Err(Error::InvalidArgument("center of mass of zero points".into()));
    }
    let mut sum = [0.0; 3];
    for p in &pc.points {
        for (s, x) in sum.iter_mut().zip(p) {
            *s += x;
        }
    }
    let m = pc.len() as f64;
    Ok(sum.map(|s| s / m))
}

/// Seeded point clouds with coordinates uniform in `[−1, 1]`, flattened,
/// paired with their centers of mass.
pub fn com_dataset(m: usize, samples: usize, seed: u64) -> Result<Dataset> {
    if m == 0 || samples == 0 {
        return Err(Error::InvalidArgument("need at least one point and one sample".into()));
    }
    let mut rng = rng::seeded(seed);
    let mut inputs = Vec::with_capacity(samples);
    let mut targets = Vec::with_capacity(samples);
    for _ in 0..samples {
        let x = rng::uniform_vec(&mut rng, 3 * m, -1.0, 1.0);
        targets.push(center_of_mass(&PointCloud::from_flat(&x)?)?.to_vec());
        inputs.push(x);
    }
    Dataset::new(inputs, targets)
}

/// The deep-sets architecture used for the center-of-mass task:
/// `S_m` acting on `(R³)^m` → the same → `R³` with trivial action.
///
/// The hidden activation is `tanh`; being odd it gives `tanh(εt)/ε ≈ t`
/// without a bias, which the three-channel hidden layer needs to represent
/// an average.
pub fn com_architecture(m: usize) -> Architecture {
    let points = RepSpec::TensorIdentity(Box::new(RepSpec::Defining), 3);
    Architecture {
        group: NamedGroup::Symmetric(m),
        reps: vec![points.clone(), points, RepSpec::Trivial(3)],
        activation: ActivationSpec::Tanh,
        bias_space: BiasSpace::Uniform,
    }
}

/// `N × N` RGB image, pixel `(r, c)` stored at `r·N + c`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridImage {
    n: usize,
    pixels: Vec<[f64; 3]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlipAxis {
    /// Reverse the row order.
    TopBottom,
    /// Reverse the column order.
    LeftRight,
}

impl GridImage {
    pub fn new(n: usize, pixels: Vec<[f64; 3]>) -> Result<Self> {
        if pixels.len() != n * n {
            return Err(Error::Shape(format!("{n}x{n} image needs {} pixels, got {}", n * n, pixels.len())));
        }
        if pixels.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("pixel values must be finite".into()));
        }
        Ok(Self { n, pixels })
    }

    /// Seeded image with integer channel values in `0..=255`; roughly one
    /// pixel in four is pure black.
    pub fn random(n: usize, seed: u64) -> Self {
        use rand::Rng;
        let mut rng = rng::seeded(seed);
        let pixels = (0..n * n)
            .map(|_| {
                if rng.gen_range(0..4) == 0 {
                    [0.0; 3]
                } else {
                    [(); 3].map(|_| f64::from(rng.gen_range(0..=255u8)))
                }
            })
            .collect();
        Self { n, pixels }
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.pixels
    }

    pub fn pixel(&self, r: usize, c: usize) -> [f64; 3] {
        self.pixels[r * self.n + c]
    }

    /// Channel-interleaved values, `3·(r·N + c) + channel`.
    pub fn flatten(&self) -> Vec<f64> {
        self.pixels.iter().flatten().copied().collect()
    }

    pub fn from_flat(n: usize, values: &[f64]) -> Result<Self> {
        if values.len() != 3 * n * n {
            return Err(Error::Shape(format!("{n}x{n} RGB image needs {} values", 3 * n * n)));
        }
        Self::new(n, values.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect())
    }
}

/// Black stays black; every other pixel becomes white.
pub fn decolor(img: &GridImage) -> GridImage {
    let pixels = img
        .pixels
        .iter()
        .map(|&p| if p == [0.0; 3] { [0.0; 3] } else { [255.0; 3] })
        .collect();
    GridImage { n: img.n, pixels }
}

pub fn flip(img: &GridImage, axis: FlipAxis) -> GridImage {
    let n = img.n;
    let pixels = (0..n * n)
        .map(|k| {
            let (r, c) = (k / n, k % n);
            match axis {
                FlipAxis::TopBottom => img.pixel(n - 1 - r, c),
                FlipAxis::LeftRight => img.pixel(r, n - 1 - c),
            }
        })
        .collect();
    GridImage { n, pixels }
}

/// Grid symmetry group acting on RGB images: pixel permutations lifted to
/// three channels.
pub fn image_representation(group: &NamedGroup) -> Result<Representation> {
    let g = Arc::new(FiniteGroup::named(group)?);
    Representation::defining(g).tensor_identity(3)
}

/// Determinant of the feature matrix `M[i][j] = φ_j(v_i)`.
pub fn slater_det(features: &Matrix) -> Result<f64> {
    if !features.is_square() || features.rows() == 0 {
        return Err(Error::Shape(format!(
            "feature matrix must be square and nonempty, got {}x{}",
            features.rows(),
            features.cols()
        )));
    }
    Ok(features.determinant())
}

/// Monomial features `φ_j(v) = (v·u)^j` for `j = 0..m` along a seeded unit
/// direction `u`.
#[derive(Clone, Debug)]
pub struct MonomialFeatures {
    direction: Vec<f64>,
    count: usize,
}

impl MonomialFeatures {
    pub fn new(dim: usize, count: usize, seed: u64) -> Self {
        let mut rng = rng::seeded(seed);
        let mut u = rng::uniform_vec(&mut rng, dim, -1.0, 1.0);
        let norm = crate::numerics::norm(&u);
        u.iter_mut().for_each(|x| *x /= norm);
        Self { direction: u, count }
    }

    pub fn matrix(&self, inputs: &[Vec<f64>]) -> Matrix {
        Matrix::from_fn(inputs.len(), self.count, |i, j| dot(&inputs[i], &self.direction).powi(j as i32))
    }

    /// `det[φ_j(v_i)]` as a function of the `m` particle inputs.
    pub fn wavefunction(&self, inputs: &[Vec<f64>]) -> f64 {
        slater_det(&self.matrix(inputs)).expect("one feature per particle")
    }
}

fn parity(perm: &[usize]) -> f64 {
    let inversions = (0..perm.len())
        .flat_map(|i| (i + 1..perm.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| perm[i] > perm[j])
        .count();
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Checks `f(v_{π(1)}, …, v_{π(m)}) = sign(π)·f(v_1, …, v_m)` for every
/// `π ∈ S_m` (`m ≤ 6`) on `trials` seeded inputs with particles in `[−1, 1]^dim`.
///
/// Residual is `|f(πv) − sign(π)f(v)| / (1 + |f(v)|)`. Witness elements index
/// permutations in lexicographic order.
pub fn check_antisymmetry(
    f: impl Fn(&[Vec<f64>]) -> f64,
    m: usize,
    dim: usize,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<Report> {
    let perms: Vec<Vec<usize>> = (0..m).permutations(m).collect();
    check_antisymmetry_over(f, m, dim, &perms, trials, seed, tol)
}

/// [`check_antisymmetry`] over an explicit list of permutations.
pub fn check_antisymmetry_over(
    f: impl Fn(&[Vec<f64>]) -> f64,
    m: usize,
    dim: usize,
    perms: &[Vec<usize>],
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<Report> {
    if m == 0 || m > 6 {
        return Err(Error::InvalidArgument(format!("particle count must be in 1..=6, got {m}")));
    }
    let mut rng = rng::seeded(seed);
    let mut tally = Tally::new(tol);
    for _ in 0..trials {
        let v: Vec<Vec<f64>> = (0..m).map(|_| rng::uniform_vec(&mut rng, dim, -1.0, 1.0)).collect();
        let fv = f(&v);
        for (index, perm) in perms.iter().enumerate() {
            if perm.len() != m {
                return Err(Error::Shape(format!("permutation {perm:?} does not act on {m} particles")));
            }
            let permuted: Vec<Vec<f64>> = perm.iter().map(|&p| v[p].clone()).collect();
            let lhs = f(&permuted);
            let rhs = parity(perm) * fv;
            let residual = (lhs - rhs).abs() / (1.0 + fv.abs());
            tally.record(residual, || Witness {
                element: index,
                input: v.concat(),
                lhs: vec![lhs],
                rhs: vec![rhs],
                residual,
            });
        }
    }
    Ok(tally.finish())
}

impl fmt::Display for GridImage {
    /// Header `N 3`, then one `r g b` line per pixel in row-major order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} 3", self.n)?;
        for p in &self.pixels {
            writeln!(f, "{} {} {}", p[0], p[1], p[2])?;
        }
        Ok(())
    }
}

impl FromStr for GridImage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::Parse("image: empty input".into()))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        let n = match head.as_slice() {
            [n, "3"] => n.parse::<usize>().map_err(|_| Error::Parse(format!("image line 1: bad size `{n}`")))?,
            _ => return Err(Error::Parse("image line 1: expected header `N 3`".into())),
        };
        let mut pixels = Vec::with_capacity(n * n);
        for (lineno, line) in lines {
            let values: Vec<u8> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse(format!("image line {}: expected integers in 0..=255", lineno + 1)))?;
            match values.as_slice() {
                &[r, g, b] => pixels.push([r, g, b].map(f64::from)),
                _ => return Err(Error::Parse(format!("image line {}: expected three values", lineno + 1))),
            }
        }
        if pixels.len() != n * n {
            return Err(Error::Parse(format!("image: expected {} pixels, got {}", n * n, pixels.len())));
        }
        Self::new(n, pixels)
    }
}
