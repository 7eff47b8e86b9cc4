//! Toeplitz, block-Toeplitz-Toeplitz-block and circulant weight matrices,
//! and parameter counts for networks built from them.
//!
//! Toeplitz and BTTB layers are translation-equivariant only on an infinite
//! (or zero-padded) line or grid. On a finite periodic grid, exact
//! equivariance needs the wraparound of circulants.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::Matrix;

fn expect_len(params: &[f64], expected: usize, what: &str) -> Result<()> {
    if params.len() == expected {
        Ok(())
    } else {
        Err(Error::Shape(format!(
            "{what} needs {expected} parameters, got {}",
            params.len()
        )))
    }
}

/// `n × n` Toeplitz matrix with `A[i][j] = params[i − j + n − 1]`.
pub fn toeplitz(n: usize, params: &[f64]) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("toeplitz size must be positive".into()));
    }
    expect_len(params, 2 * n - 1, "toeplitz")?;
    Matrix::new(n, n, (0..n * n).map(|k| params[k / n + n - 1 - k % n]).collect())
}

/// `m1·m2`-square block-Toeplitz matrix whose `m2 × m2` blocks are Toeplitz.
///
/// `params` holds `2·m1 − 1` consecutive slices of `2·m2 − 1` values; block
/// `(I, J)` is the Toeplitz matrix of slice `I − J + m1 − 1`.
pub fn bttb(m1: usize, m2: usize, params: &[f64]) -> Result<Matrix> {
    if m1 == 0 || m2 == 0 {
        return Err(Error::InvalidArgument("bttb block sizes must be positive".into()));
    }
    let slice = 2 * m2 - 1;
    expect_len(params, (2 * m1 - 1) * slice, "bttb")?;
    let n = m1 * m2;
    Matrix::new(
        n,
        n,
        (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                let block = i / m2 + m1 - 1 - j / m2;
                params[block * slice + i % m2 + m2 - 1 - j % m2]
            })
            .collect(),
    )
}

/// `n × n` circulant matrix with `A[i][j] = params[(i − j) mod n]`.
pub fn circulant(n: usize, params: &[f64]) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("circulant size must be positive".into()));
    }
    expect_len(params, n, "circulant")?;
    Matrix::new(n, n, (0..n * n).map(|k| params[(k / n + n - k % n) % n]).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StructureKind {
    Dense,
    Toeplitz,
    Bttb,
    Circulant,
}

impl fmt::Display for StructureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Dense => "dense",
            Self::Toeplitz => "toeplitz",
            Self::Bttb => "bttb",
            Self::Circulant => "circulant",
        })
    }
}

impl FromStr for StructureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(Self::Dense),
            "toeplitz" => Ok(Self::Toeplitz),
            "bttb" => Ok(Self::Bttb),
            "circulant" => Ok(Self::Circulant),
            _ => Err(Error::Parse(format!("unknown structure `{s}`"))),
        }
    }
}

/// Layer width, either flat or as the `m1 × m2` grid of a BTTB layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayerDims {
    Width(usize),
    Grid { m1: usize, m2: usize },
}

impl LayerDims {
    pub fn width(&self) -> usize {
        match *self {
            Self::Width(n) => n,
            Self::Grid { m1, m2 } => m1 * m2,
        }
    }
}

/// Free parameters in a `k`-layer constant-width network whose weights have
/// the given structure, with a free bias on every layer except the last.
///
/// * dense: `k·n² + (k−1)·n`
/// * toeplitz: `k·(2n−1) + (k−1)·n`
/// * bttb: `k·(2m1−1)(2m2−1) + (k−1)·m1·m2`
/// * circulant: `k·n + (k−1)·n`
pub fn param_count(kind: StructureKind, k: usize, dims: LayerDims) -> Result<usize> {
    if k == 0 {
        return Err(Error::InvalidArgument("a network needs at least one layer".into()));
    }
    let n = dims.width();
    if n == 0 {
        return Err(Error::InvalidArgument("layer width must be positive".into()));
    }
    let per_weight = match (kind, dims) {
        (StructureKind::Dense, _) => n * n,
        (StructureKind::Toeplitz, _) => 2 * n - 1,
        (StructureKind::Circulant, _) => n,
        (StructureKind::Bttb, LayerDims::Grid { m1, m2 }) => (2 * m1 - 1) * (2 * m2 - 1),
        (StructureKind::Bttb, LayerDims::Width(_)) => {
            return Err(Error::InvalidArgument("bttb counts need block sizes m1 and m2".into()))
        }
    };
    Ok(k * per_weight + (k - 1) * n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toeplitz_examples() {
        assert_eq!(toeplitz(1, &[7.0]).unwrap().data(), &[7.0]);
        let (a, b, c) = (1.0, 2.0, 3.0);
        assert_eq!(toeplitz(2, &[a, b, c]).unwrap().data(), &[b, a, c, b]);
        assert_eq!(toeplitz(3, &[1.0; 5]).unwrap(), Matrix::from_fn(3, 3, |_, _| 1.0));
        assert!(toeplitz(3, &[1.0; 4]).is_err());
        assert!(toeplitz(0, &[]).is_err());
    }

    #[test]
    fn toeplitz_is_constant_on_diagonals() {
        let params: Vec<f64> = (0..9).map(f64::from).collect();
        let t = toeplitz(5, &params).unwrap();
        for i in 1..5 {
            for j in 1..5 {
                assert_eq!(t[(i, j)], t[(i - 1, j - 1)]);
            }
        }
    }

    #[test]
    fn bttb_examples() {
        assert_eq!(bttb(1, 1, &[4.0]).unwrap().data(), &[4.0]);
        let p: Vec<f64> = (1..=9).map(f64::from).collect();
        let m = bttb(2, 2, &p).unwrap();
        // slice s = I − J + 1 holds p[3s..3s+3]; toeplitz(2, (a,b,c)) = [[b,a],[c,b]]
        let expected = Matrix::from_rows(&[
            vec![5.0, 4.0, 2.0, 1.0],
            vec![6.0, 5.0, 3.0, 2.0],
            vec![8.0, 7.0, 5.0, 4.0],
            vec![9.0, 8.0, 6.0, 5.0],
        ])
        .unwrap();
        assert_eq!(m, expected);
        assert_eq!(bttb(2, 3, &[2.5; 15]).unwrap(), Matrix::from_fn(6, 6, |_, _| 2.5));
        assert!(bttb(2, 2, &[0.0; 8]).is_err());
    }

    #[test]
    fn circulant_examples() {
        assert_eq!(circulant(3, &[1.0, 0.0, 0.0]).unwrap(), Matrix::identity(3));
        let shift = circulant(3, &[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(shift, Matrix::permutation(&[1, 2, 0]).unwrap());
        assert!(circulant(3, &[1.0]).is_err());
    }

    #[test]
    fn counts() {
        let count = |kind, k, dims| param_count(kind, k, dims).unwrap();
        assert_eq!(count(StructureKind::Toeplitz, 3, LayerDims::Width(4)), 29);
        assert_eq!(count(StructureKind::Bttb, 2, LayerDims::Grid { m1: 3, m2: 3 }), 59);
        assert_eq!(count(StructureKind::Dense, 1, LayerDims::Width(5)), 25);
        assert_eq!(count(StructureKind::Circulant, 2, LayerDims::Width(4)), 12);
        assert!(param_count(StructureKind::Bttb, 2, LayerDims::Width(9)).is_err());
        assert!(param_count(StructureKind::Dense, 0, LayerDims::Width(9)).is_err());
    }
}
