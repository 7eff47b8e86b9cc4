//! Real representations of a [`FiniteGroup`], given by generator images and
//! materialized for every element.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::numerics::{self, Matrix};

/// Entrywise tolerance for the homomorphism check.
pub const CONSISTENCY_TOL: f64 = 1e-8;

const PERMUTATION_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct Representation {
    group: Arc<FiniteGroup>,
    degree: usize,
    gen_images: Vec<Matrix>,
    images: Arc<Vec<Matrix>>,
}

impl Representation {
    /// Extends generator images to the whole group by replaying each
    /// element's generator word, then checks that the result is a
    /// homomorphism: `ρ(e)·ρ(g) = ρ(e·g)` for every element `e` and generator `g`.
    pub fn extend(group: Arc<FiniteGroup>, gen_images: Vec<Matrix>) -> Result<Self> {
        if gen_images.len() != group.gen_count() {
            return Err(Error::Shape(format!(
                "expected {} generator images, got {}",
                group.gen_count(),
                gen_images.len()
            )));
        }
        let degree = gen_images[0].rows();
        if degree == 0 {
            return Err(Error::Shape("representation degree must be positive".into()));
        }
        for (index, m) in gen_images.iter().enumerate() {
            if !m.is_square() || m.rows() != degree {
                return Err(Error::Shape(format!(
                    "generator image {index} is {}x{}, expected {degree}x{degree}",
                    m.rows(),
                    m.cols()
                )));
            }
            let det = m.determinant();
            if det.abs() <= 1e-9 {
                return Err(Error::SingularGenerator { index, det: det.abs() });
            }
        }

        let mut images: Vec<Matrix> = Vec::with_capacity(group.order());
        images.push(Matrix::identity(degree));
        for e in 1..group.order() {
            let (p, g) = group.parent(e).expect("non-identity elements have a parent");
            images.push(&images[p] * &gen_images[g]);
        }

        for (element, image) in images.iter().enumerate() {
            for (generator, gi) in gen_images.iter().enumerate() {
                let residual = (image * gi).max_abs_diff(&images[group.cayley(element, generator)]);
                if residual > CONSISTENCY_TOL {
                    return Err(Error::InconsistentRepresentation {
                        element,
                        generator,
                        residual,
                    });
                }
            }
        }

        Ok(Self {
            group,
            degree,
            gen_images,
            images: Arc::new(images),
        })
    }

    /// The group's own matrices.
    pub fn defining(group: Arc<FiniteGroup>) -> Self {
        let gens = group.generators().to_vec();
        Self::extend(group, gens).expect("the defining representation is consistent")
    }

    /// Every element acts as the identity on `Rⁿ`.
    pub fn trivial(group: Arc<FiniteGroup>, degree: usize) -> Result<Self> {
        let gens = vec![Matrix::identity(degree); group.gen_count()];
        Self::extend(group, gens)
    }

    /// One-dimensional representation `g ↦ det(g)`; the sign character for
    /// permutation groups.
    pub fn sign(group: Arc<FiniteGroup>) -> Self {
        let gens = group
            .generators()
            .iter()
            .map(|g| Matrix::new(1, 1, vec![g.determinant()]).expect("finite determinant"))
            .collect();
        Self::extend(group, gens).expect("the determinant is multiplicative")
    }

    /// Permutation representation with generator `g` sending `e_j` to `e_{perms[g][j]}`.
    pub fn permutation(group: Arc<FiniteGroup>, perms: &[Vec<usize>]) -> Result<Self> {
        let gens = perms.iter().map(|p| Matrix::permutation(p)).collect::<Result<Vec<_>>>()?;
        if gens.is_empty() {
            return Err(Error::Shape("no permutations given".into()));
        }
        Self::extend(group, gens)
    }

    /// Block-diagonal sum of representations over one group.
    pub fn direct_sum(reps: &[Representation]) -> Result<Self> {
        let first = reps
            .first()
            .ok_or_else(|| Error::InvalidArgument("direct sum of nothing".into()))?;
        if reps.iter().any(|r| !r.same_group(first)) {
            return Err(Error::GroupMismatch);
        }
        let group = first.group.clone();
        let gens = (0..group.gen_count())
            .map(|g| Matrix::block_diag(&reps.iter().map(|r| &r.gen_images[g]).collect::<Vec<_>>()))
            .collect();
        Self::extend(group, gens)
    }

    /// `ρ ⊗ I_d`: each coordinate of `ρ` becomes a block of `d` channels
    /// that move together.
    pub fn tensor_identity(&self, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("channel count must be positive".into()));
        }
        let eye = Matrix::identity(d);
        let gens = self.gen_images.iter().map(|m| m.kron(&eye)).collect();
        Self::extend(self.group.clone(), gens)
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn gen_images(&self) -> &[Matrix] {
        &self.gen_images
    }

    pub fn gen_image(&self, g: usize) -> &Matrix {
        &self.gen_images[g]
    }

    pub fn images(&self) -> &[Matrix] {
        &self.images
    }

    pub fn image(&self, e: usize) -> &Matrix {
        &self.images[e]
    }

    pub fn same_group(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.group, &other.group) || self.group.same_as(&other.group)
    }

    /// Traces of every element image, in canonical element order.
    pub fn character(&self) -> Vec<f64> {
        self.images
            .iter()
            .map(|m| (0..self.degree).map(|i| m[(i, i)]).sum())
            .collect()
    }

    /// True iff every element image is a 0/1 matrix with exactly one 1 in
    /// each row and column.
    pub fn is_permutation_rep(&self) -> bool {
        self.images.iter().all(is_permutation_matrix)
    }

    /// Orthonormal basis (`degree × d`) of the vectors fixed by every
    /// generator, hence by every element.
    pub fn fixed_subspace(&self, tol: f64) -> Result<Matrix> {
        let n = self.degree;
        let eye = Matrix::identity(n);
        let mut stacked = Vec::with_capacity(self.gen_images.len() * n * n);
        for m in &self.gen_images {
            stacked.extend_from_slice(m.sub(&eye).data());
        }
        numerics::nullspace(&Matrix::new(self.gen_images.len() * n, n, stacked)?, tol)
    }
}

fn is_permutation_matrix(m: &Matrix) -> bool {
    let n = m.rows();
    let mut col_ones = vec![0usize; n];
    for i in 0..n {
        let mut row_ones = 0;
        for (j, &x) in m.row(i).iter().enumerate() {
            if (x - 1.0).abs() <= PERMUTATION_TOL {
                row_ones += 1;
                col_ones[j] += 1;
            } else if x.abs() > PERMUTATION_TOL {
                return false;
            }
        }
        if row_ones != 1 {
            return false;
        }
    }
    col_ones.iter().all(|&c| c == 1)
}

/// Textual description of a representation, as used in config and model
/// files.
///
/// ```text
/// defining | trivial(n) | sign | perm([..], [..], ...)
///          | direct_sum(rep, rep, ...) | tensor_identity(rep, d)
/// ```
///
/// `perm` lists one zero-based permutation per group generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RepSpec {
    Defining,
    Trivial(usize),
    Sign,
    Perm(Vec<Vec<usize>>),
    DirectSum(Vec<RepSpec>),
    TensorIdentity(Box<RepSpec>, usize),
}

impl RepSpec {
    pub fn build(&self, group: &Arc<FiniteGroup>) -> Result<Representation> {
        match self {
            Self::Defining => Ok(Representation::defining(group.clone())),
            Self::Trivial(n) => Representation::trivial(group.clone(), *n),
            Self::Sign => Ok(Representation::sign(group.clone())),
            Self::Perm(perms) => Representation::permutation(group.clone(), perms),
            Self::DirectSum(parts) => Representation::direct_sum(
                &parts.iter().map(|p| p.build(group)).collect::<Result<Vec<_>>>()?,
            ),
            Self::TensorIdentity(inner, d) => inner.build(group)?.tensor_identity(*d),
        }
    }
}

impl fmt::Display for RepSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Defining => write!(f, "defining"),
            Self::Trivial(n) => write!(f, "trivial({n})"),
            Self::Sign => write!(f, "sign"),
            Self::Perm(perms) => {
                let lists: Vec<String> = perms
                    .iter()
                    .map(|p| format!("[{}]", p.iter().map(usize::to_string).collect::<Vec<_>>().join(", ")))
                    .collect();
                write!(f, "perm({})", lists.join(", "))
            }
            Self::DirectSum(parts) => {
                let parts: Vec<String> = parts.iter().map(ToString::to_string).collect();
                write!(f, "direct_sum({})", parts.join(", "))
            }
            Self::TensorIdentity(inner, d) => write!(f, "tensor_identity({inner}, {d})"),
        }
    }
}

impl FromStr for RepSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser { src: s, pos: 0 };
        let spec = p.rep()?;
        p.skip_ws();
        if p.pos != s.len() {
            return Err(p.error("trailing input"));
        }
        Ok(spec)
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Parse(format!("rep `{}`: {msg} at column {}", self.src, self.pos + 1))
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next().filter(|c| c.is_whitespace()) {
            self.pos += c.len_utf8();
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{c}`")))
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &str {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.src[self.pos..].chars().next().filter(|&c| f(c)) {
            self.pos += c.len_utf8();
        }
        &self.src[start..self.pos]
    }

    fn number(&mut self) -> Result<usize> {
        let digits = self.take_while(|c| c.is_ascii_digit());
        digits.parse().map_err(|_| self.error("expected a non-negative integer"))
    }

    fn list(&mut self) -> Result<Vec<usize>> {
        self.expect('[')?;
        let mut out = vec![];
        if self.eat(']') {
            return Ok(out);
        }
        loop {
            out.push(self.number()?);
            if self.eat(']') {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }

    fn rep(&mut self) -> Result<RepSpec> {
        let name = self.take_while(|c| c.is_ascii_alphanumeric() || c == '_').to_string();
        match name.as_str() {
            "defining" => Ok(RepSpec::Defining),
            "sign" => Ok(RepSpec::Sign),
            "trivial" => {
                self.expect('(')?;
                let n = self.number()?;
                self.expect(')')?;
                Ok(RepSpec::Trivial(n))
            }
            "perm" => {
                self.expect('(')?;
                let mut perms = vec![self.list()?];
                while self.eat(',') {
                    perms.push(self.list()?);
                }
                self.expect(')')?;
                Ok(RepSpec::Perm(perms))
            }
            "direct_sum" => {
                self.expect('(')?;
                let mut parts = vec![self.rep()?];
                while self.eat(',') {
                    parts.push(self.rep()?);
                }
                self.expect(')')?;
                Ok(RepSpec::DirectSum(parts))
            }
            "tensor_identity" => {
                self.expect('(')?;
                let inner = self.rep()?;
                self.expect(',')?;
                let d = self.number()?;
                self.expect(')')?;
                Ok(RepSpec::TensorIdentity(Box::new(inner), d))
            }
            "" => Err(self.error("expected a representation name")),
            other => Err(self.error(&format!("unknown representation `{other}`"))),
        }
    }
}
