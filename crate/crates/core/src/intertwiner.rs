//! The space of intertwiners `{A : A·ρ_in(g) = ρ_out(g)·A for all g}`.
//!
//! Writing `vec(A)` row-major, each generator contributes the linear system
//! `(I ⊗ ρ_in(g)ᵀ − ρ_out(g) ⊗ I)·vec(A) = 0`. The systems for all generators
//! are stacked and their common nullspace is the intertwiner space; the
//! homomorphism property extends the constraint from generators to the whole
//! group.

use crate::error::{Error, Result};
use crate::numerics::{self, Matrix};
use crate::rep::Representation;

/// Frobenius-orthonormal basis of the intertwiners from `rep_in` to `rep_out`.
#[derive(Clone, Debug)]
pub struct IntertwinerBasis {
    rep_in: Representation,
    rep_out: Representation,
    basis: Vec<Matrix>,
}

/// Computes an orthonormal intertwiner basis at rank threshold `tol`.
pub fn solve_basis(
    rep_in: &Representation,
    rep_out: &Representation,
    tol: f64,
) -> Result<IntertwinerBasis> {
    if !rep_in.same_group(rep_out) {
        return Err(Error::GroupMismatch);
    }
    let constraints = constraint_matrix(rep_in, rep_out, rep_in.gen_images(), rep_out.gen_images());
    let kernel = numerics::nullspace(&constraints, tol)?;
    let (rows, cols) = (rep_out.degree(), rep_in.degree());
    let basis = kernel
        .columns()
        .map(|v| Matrix::new(rows, cols, v).expect("kernel vectors are finite"))
        .collect();
    Ok(IntertwinerBasis {
        rep_in: rep_in.clone(),
        rep_out: rep_out.clone(),
        basis,
    })
}

/// Stacks `A·P_in − P_out·A = 0` for each pair of images into a matrix acting
/// on row-major `vec(A)`.
pub(crate) fn constraint_matrix(
    rep_in: &Representation,
    rep_out: &Representation,
    images_in: &[Matrix],
    images_out: &[Matrix],
) -> Matrix {
    let (n_in, n_out) = (rep_in.degree(), rep_out.degree());
    let unknowns = n_in * n_out;
    let mut m = Matrix::zeros(images_in.len() * unknowns, unknowns);
    for (block, (p_in, p_out)) in images_in.iter().zip(images_out).enumerate() {
        for i in 0..n_out {
            for j in 0..n_in {
                let row = block * unknowns + i * n_in + j;
                for k in 0..n_in {
                    m[(row, i * n_in + k)] += p_in[(k, j)];
                }
                for k in 0..n_out {
                    m[(row, k * n_in + j)] -= p_out[(i, k)];
                }
            }
        }
    }
    m
}

/// `dim Hom_G(ρ_in, ρ_out)` from characters: `(1/|G|)·Σ_g χ_in(g)·χ_out(g)`.
///
/// Both representations are real, so their characters are real and the
/// formula gives the dimension of the real intertwiner space.
pub fn hom_dim_oracle(rep_in: &Representation, rep_out: &Representation) -> Result<usize> {
    if !rep_in.same_group(rep_out) {
        return Err(Error::GroupMismatch);
    }
    let chi_in = rep_in.character();
    let chi_out = rep_out.character();
    let value = chi_in.iter().zip(&chi_out).map(|(a, b)| a * b).sum::<f64>() / chi_in.len() as f64;
    let rounded = value.round();
    if (value - rounded).abs() > 1e-6 || rounded < 0.0 {
        return Err(Error::NonIntegralCharacter { value });
    }
    Ok(rounded as usize)
}

impl IntertwinerBasis {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Matrix] {
        &self.basis
    }

    pub fn rep_in(&self) -> &Representation {
        &self.rep_in
    }

    pub fn rep_out(&self) -> &Representation {
        &self.rep_out
    }

    /// `Σ_j coeffs[j]·B_j`.
    pub fn realize(&self, coeffs: &[f64]) -> Matrix {
        assert_eq!(coeffs.len(), self.dim(), "one coefficient per basis element");
        let mut data = vec![0.0; self.rep_out.degree() * self.rep_in.degree()];
        for (c, b) in coeffs.iter().zip(&self.basis) {
            numerics::axpy(*c, b.data(), &mut data);
        }
        Matrix::new(self.rep_out.degree(), self.rep_in.degree(), data)
            .expect("combination of finite matrices")
    }

    /// Coordinates of the orthogonal projection of `a` onto the span.
    pub fn coordinates(&self, a: &Matrix) -> Vec<f64> {
        self.basis.iter().map(|b| b.frobenius_dot(a)).collect()
    }

    /// Largest `‖B·ρ_in(g) − ρ_out(g)·B‖_max` over every basis element and
    /// every group element (not only generators).
    pub fn max_commutator_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for b in &self.basis {
            for (p_in, p_out) in self.rep_in.images().iter().zip(self.rep_out.images()) {
                worst = worst.max((b * p_in).max_abs_diff(&(p_out * b)));
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::group::{FiniteGroup, NamedGroup};

    fn group(g: NamedGroup) -> Arc<FiniteGroup> {
        Arc::new(FiniteGroup::named(&g).unwrap())
    }

    /// Same system, but imposed for every element instead of generators only.
    fn all_elements_dim(rep_in: &Representation, rep_out: &Representation) -> usize {
        let m = constraint_matrix(rep_in, rep_out, rep_in.images(), rep_out.images());
        numerics::nullspace(&m, 1e-9).unwrap().cols()
    }

    fn check(rep_in: &Representation, rep_out: &Representation, expected: usize) -> IntertwinerBasis {
        let basis = solve_basis(rep_in, rep_out, 1e-9).unwrap();
        assert_eq!(basis.dim(), expected);
        assert_eq!(hom_dim_oracle(rep_in, rep_out).unwrap(), expected);
        assert_eq!(all_elements_dim(rep_in, rep_out), expected);
        assert!(basis.max_commutator_residual() < 1e-8);
        for (i, a) in basis.basis().iter().enumerate() {
            for (j, b) in basis.basis().iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((a.frobenius_dot(b) - expected).abs() < 1e-10);
            }
        }
        basis
    }

    #[test]
    fn trivial_group_gives_all_matrices() {
        let g = group(NamedGroup::Trivial);
        let rho = Representation::trivial(g, 3).unwrap();
        check(&rho, &rho, 9);
    }

    #[test]
    fn s3_defining_commutant_is_identity_and_ones() {
        let rho = Representation::defining(group(NamedGroup::Symmetric(3)));
        let basis = check(&rho, &rho, 2);
        // I and J both lie in the span.
        for target in [Matrix::identity(3), Matrix::from_fn(3, 3, |_, _| 1.0)] {
            let back = basis.realize(&basis.coordinates(&target));
            assert!(back.max_abs_diff(&target) < 1e-12);
        }
    }

    #[test]
    fn cyclic_shift_commutant_is_circulant() {
        let rho = Representation::defining(group(NamedGroup::Cyclic(4)));
        check(&rho, &rho, 4);
    }

    #[test]
    fn deep_sets_block_patterns() {
        let g = group(NamedGroup::Symmetric(4));
        let lifted = Representation::defining(g.clone()).tensor_identity(3).unwrap();
        check(&lifted, &lifted, 18);
        let out = Representation::trivial(g, 3).unwrap();
        check(&lifted, &out, 9);
    }

    #[test]
    fn oracle_examples() {
        let s3 = group(NamedGroup::Symmetric(3));
        let def = Representation::defining(s3.clone());
        let triv = Representation::trivial(s3.clone(), 1).unwrap();
        assert_eq!(hom_dim_oracle(&def, &def).unwrap(), 2);
        assert_eq!(hom_dim_oracle(&def, &triv).unwrap(), 1);
        let sign = Representation::sign(s3);
        check(&def, &sign, 0);
        check(&sign, &sign, 1);
        let t3 = Representation::trivial(group(NamedGroup::Trivial), 3).unwrap();
        assert_eq!(hom_dim_oracle(&t3, &t3).unwrap(), 9);
    }

    #[test]
    fn real_commutant_of_rotation_exceeds_one() {
        let (s, c) = (2.0 * std::f64::consts::PI / 3.0).sin_cos();
        let r = Matrix::from_rows(&[vec![c, -s], vec![s, c]]).unwrap();
        let g = Arc::new(FiniteGroup::close(vec![r], 10).unwrap());
        assert_eq!(g.order(), 3);
        let rho = Representation::defining(g);
        check(&rho, &rho, 2);
    }

    #[test]
    fn commutant_is_a_subalgebra() {
        let g = group(NamedGroup::P4(3));
        let rho = Representation::defining(g);
        let basis = check(&rho, &rho, hom_dim_oracle(&rho, &rho).unwrap());
        for a in basis.basis() {
            for b in basis.basis() {
                let prod = a * b;
                let back = basis.realize(&basis.coordinates(&prod));
                assert!(back.max_abs_diff(&prod) < 1e-8);
            }
        }
    }

    #[test]
    fn mismatched_groups() {
        let a = Representation::defining(group(NamedGroup::Symmetric(3)));
        let b = Representation::defining(group(NamedGroup::Cyclic(3)));
        assert_eq!(solve_basis(&a, &b, 1e-9).unwrap_err(), Error::GroupMismatch);
        assert_eq!(hom_dim_oracle(&a, &b).unwrap_err(), Error::GroupMismatch);
    }
}
