//! Finite matrix groups obtained by closing a set of generators.
//!
//! Elements are enumerated breadth-first, multiplying each discovered element
//! on the right by the generators in index order. That fixes a canonical
//! element order, gives every element a shortest (then lexicographically
//! smallest) generator word, and fills the right Cayley table as a side
//! effect.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Default cap on the number of elements enumerated by [`FiniteGroup::close`].
pub const DEFAULT_MAX_ORDER: usize = 20_000;

const MATCH_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct FiniteGroup {
    dim: usize,
    generators: Vec<Matrix>,
    elements: Vec<Matrix>,
    words: Vec<Vec<usize>>,
    /// `cayley[e][g]` is the index of `elements[e] · generators[g]`.
    cayley: Vec<Vec<usize>>,
    /// BFS tree: the element and generator this element was discovered from.
    parent: Vec<Option<(usize, usize)>>,
    inverse: Vec<usize>,
}

/// Key for hashing matrices with entries rounded to nine decimals.
fn rounded_key(m: &Matrix) -> Vec<i64> {
    m.data().iter().map(|x| (x * 1e9).round() as i64).collect()
}

impl FiniteGroup {
    /// Enumerates the group generated by `generators`, failing once more than
    /// `max_order` distinct elements have been found.
    pub fn close(generators: Vec<Matrix>, max_order: usize) -> Result<Self> {
        let dim = match generators.first() {
            Some(g) => g.rows(),
            None => return Err(Error::InvalidArgument("at least one generator is required".into())),
        };
        for (index, g) in generators.iter().enumerate() {
            if !g.is_square() || g.rows() != dim {
                return Err(Error::Shape(format!(
                    "generator {index} is {}x{}, expected {dim}x{dim}",
                    g.rows(),
                    g.cols()
                )));
            }
            let det = g.determinant();
            if det.abs() <= 1e-9 {
                return Err(Error::SingularGenerator { index, det: det.abs() });
            }
        }
        if max_order == 0 {
            return Err(Error::OrderCapExceeded { cap: 0 });
        }

        let identity = Matrix::identity(dim);
        let mut lookup: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        lookup.insert(rounded_key(&identity), vec![0]);
        let mut elements = vec![identity];
        let mut words = vec![Vec::new()];
        let mut parent = vec![None];
        let mut cayley: Vec<Vec<usize>> = Vec::new();

        let mut head = 0;
        while head < elements.len() {
            let mut row = Vec::with_capacity(generators.len());
            for (g, gen) in generators.iter().enumerate() {
                let product = &elements[head] * gen;
                let key = rounded_key(&product);
                let found = lookup.get(&key).and_then(|bucket| {
                    bucket
                        .iter()
                        .copied()
                        .find(|&i| elements[i].max_abs_diff(&product) <= MATCH_TOL)
                });
                let index = match found {
                    Some(i) => i,
                    None => {
                        if elements.len() == max_order {
                            return Err(Error::OrderCapExceeded { cap: max_order });
                        }
                        let i = elements.len();
                        let mut word = words[head].clone();
                        word.push(g);
                        lookup.entry(key).or_default().push(i);
                        elements.push(product);
                        words.push(word);
                        parent.push(Some((head, g)));
                        i
                    }
                };
                row.push(index);
            }
            cayley.push(row);
            head += 1;
        }

        let mut group = Self {
            dim,
            generators,
            elements,
            words,
            cayley,
            parent,
            inverse: Vec::new(),
        };
        group.inverse = group.compute_inverses();
        Ok(group)
    }

    /// The group `{I₁}` with a single identity generator.
    pub fn trivial() -> Self {
        Self::close(vec![Matrix::identity(1)], 1).expect("identity closes immediately")
    }

    fn compute_inverses(&self) -> Vec<usize> {
        // g⁻¹ is the last power of g before returning to the identity.
        let gen_inverse: Vec<usize> = (0..self.gen_count())
            .map(|g| {
                let mut prev = 0;
                let mut cur = self.cayley[0][g];
                while cur != 0 {
                    prev = cur;
                    cur = self.cayley[cur][g];
                }
                prev
            })
            .collect();
        self.words
            .iter()
            .map(|word| {
                word.iter()
                    .rev()
                    .fold(0, |acc, &g| self.multiply(acc, gen_inverse[g]))
            })
            .collect()
    }

    /// Size of the matrices in the defining representation.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn gen_count(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[Matrix] {
        &self.generators
    }

    pub fn elements(&self) -> &[Matrix] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Matrix {
        &self.elements[i]
    }

    pub fn word(&self, i: usize) -> &[usize] {
        &self.words[i]
    }

    pub fn words(&self) -> &[Vec<usize>] {
        &self.words
    }

    /// Index of `elements[e] · generators[g]`.
    pub fn cayley(&self, e: usize, g: usize) -> usize {
        self.cayley[e][g]
    }

    pub(crate) fn parent(&self, e: usize) -> Option<(usize, usize)> {
        self.parent[e]
    }

    /// Index of `elements[a] · elements[b]`.
    pub fn multiply(&self, a: usize, b: usize) -> usize {
        self.words[b].iter().fold(a, |acc, &g| self.cayley[acc][g])
    }

    pub fn inverse(&self, e: usize) -> usize {
        self.inverse[e]
    }

    /// Index of the element matching `m` within `1e-6`, if any.
    pub fn index_of(&self, m: &Matrix) -> Option<usize> {
        if m.rows() != self.dim || m.cols() != self.dim {
            return None;
        }
        self.elements.iter().position(|e| e.max_abs_diff(m) <= MATCH_TOL)
    }

    /// Whether both values describe the same group with the same generators
    /// and canonical order.
    pub fn same_as(&self, other: &Self) -> bool {
        std::ptr::eq(self, other)
            || (self.dim == other.dim
                && self.order() == other.order()
                && self.gen_count() == other.gen_count()
                && self
                    .generators
                    .iter()
                    .zip(&other.generators)
                    .all(|(a, b)| a.max_abs_diff(b) <= 1e-9))
    }

    pub fn named(spec: &NamedGroup) -> Result<Self> {
        Self::named_with_cap(spec, DEFAULT_MAX_ORDER)
    }

    pub fn named_with_cap(spec: &NamedGroup, max_order: usize) -> Result<Self> {
        Self::close(spec.generators()?, max_order)
    }
}

/// The built-in groups.
///
/// `Symmetric` and `Cyclic` permute the coordinates of `Rᵐ`/`Rⁿ`. The grid
/// groups permute the pixels of an `N × N` image with periodic boundary
/// (pixel `(r, c)` has index `r·N + c`): unit translations, plus a quarter
/// turn `(r, c) ↦ (c, N−1−r)` for `P4`, plus the mirror `(r, c) ↦ (r, N−1−c)`
/// for `P4m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NamedGroup {
    Trivial,
    Symmetric(usize),
    Cyclic(usize),
    TorusTranslation(usize),
    P4(usize),
    P4m(usize),
}

fn cyclic_shift(n: usize) -> Matrix {
    // (S v)_i = v_{i+1}
    Matrix::from_fn(n, n, |i, j| if j == (i + 1) % n { 1.0 } else { 0.0 })
}

fn transposition(n: usize, a: usize, b: usize) -> Matrix {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.swap(a, b);
    Matrix::permutation(&perm).expect("swap of a permutation")
}

/// Pixel permutation matrix moving the value at pixel `q` to pixel `map(q)`.
fn grid_permutation(n: usize, map: impl Fn(usize, usize) -> (usize, usize)) -> Matrix {
    let perm: Vec<usize> = (0..n * n)
        .map(|q| {
            let (r, c) = map(q / n, q % n);
            r * n + c
        })
        .collect();
    Matrix::permutation(&perm).expect("grid maps are bijections")
}

impl NamedGroup {
    pub fn generators(&self) -> Result<Vec<Matrix>> {
        let positive = |n: usize, what: &str| {
            if n == 0 {
                Err(Error::InvalidArgument(format!("{what} size must be positive")))
            } else {
                Ok(n)
            }
        };
        Ok(match *self {
            Self::Trivial => vec![Matrix::identity(1)],
            Self::Symmetric(m) => {
                let m = positive(m, "symmetric")?;
                if m == 1 {
                    vec![Matrix::identity(1)]
                } else {
                    (0..m - 1).map(|i| transposition(m, i, i + 1)).collect()
                }
            }
            Self::Cyclic(n) => vec![cyclic_shift(positive(n, "cyclic")?)],
            Self::TorusTranslation(n) | Self::P4(n) | Self::P4m(n) => {
                let n = positive(n, "grid")?;
                let mut gens = vec![
                    grid_permutation(n, |r, c| (r, (c + 1) % n)),
                    grid_permutation(n, |r, c| ((r + 1) % n, c)),
                ];
                if matches!(self, Self::P4(_) | Self::P4m(_)) {
                    gens.push(grid_permutation(n, |r, c| (c, n - 1 - r)));
                }
                if matches!(self, Self::P4m(_)) {
                    gens.push(grid_permutation(n, |r, c| (r, n - 1 - c)));
                }
                gens
            }
        })
    }
}

impl fmt::Display for NamedGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Trivial => write!(f, "trivial"),
            Self::Symmetric(m) => write!(f, "symmetric({m})"),
            Self::Cyclic(n) => write!(f, "cyclic({n})"),
            Self::TorusTranslation(n) => write!(f, "torus_translation({n})"),
            Self::P4(n) => write!(f, "p4({n})"),
            Self::P4m(n) => write!(f, "p4m({n})"),
        }
    }
}

impl FromStr for NamedGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "trivial" {
            return Ok(Self::Trivial);
        }
        let bad = || {
            Error::Parse(format!(
                "unknown group `{s}` (expected trivial, symmetric(m), cyclic(n), \
                 torus_translation(N), p4(N) or p4m(N))"
            ))
        };
        let (name, rest) = s.split_once('(').ok_or_else(bad)?;
        let arg = rest.strip_suffix(')').ok_or_else(bad)?;
        let n: usize = arg.trim().parse().map_err(|_| bad())?;
        match name.trim() {
            "symmetric" => Ok(Self::Symmetric(n)),
            "cyclic" => Ok(Self::Cyclic(n)),
            "torus_translation" | "torus" => Ok(Self::TorusTranslation(n)),
            "p4" => Ok(Self::P4(n)),
            "p4m" => Ok(Self::P4m(n)),
            _ => Err(bad()),
        }
    }
}
