//! Orthonormal bases of single-unit algebras.
//!
//! For a full matrix algebra `M_n` we use the phase/shift matrices
//!
//! ```text
//! (E_{k,l})_{r,s} = n^{-1/2} ( exp(i pi (r+s) k / n) [s = r + l]
//!                            + exp(i pi (r+s-n) k / n) [s = r + l - n] ),   r, s = 1..n
//! ```
//!
//! which are orthonormal under `<a, b> = tr(a b*)` and closed under adjoints
//! up to sign. [`hermitize_basis`] turns them into a self-adjoint basis.
//! Classical units use the normalized identity plus cosine contrasts.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{self, c, hs_inner, hs_norm, CMatrix, I};

/// Adjoint-matching tolerance used by [`hermitize_basis`].
const ADJOINT_TOL: f64 = 1e-10;
const DEGENERATE_TOL: f64 = 1e-12;

/// `E_{k,l}^{(n)}` for `0 <= k, l < n`.
pub fn basis_element(n: usize, k: usize, l: usize) -> CMatrix {
    let nf = n as f64;
    let norm = 1.0 / nf.sqrt();
    let mut m = CMatrix::zeros(n, n);
    for r in 1..=n {
        // first term: s = r + l, second term: s = r + l - n
        let s1 = r + l;
        if s1 <= n {
            let phase = PI * ((r + s1) as f64) * (k as f64) / nf;
            m[(r - 1, s1 - 1)] += c(phase.cos(), phase.sin()) * norm;
        }
        if r + l > n {
            let s2 = r + l - n;
            let phase = PI * ((r + s2) as f64 - nf) * (k as f64) / nf;
            m[(r - 1, s2 - 1)] += c(phase.cos(), phase.sin()) * norm;
        }
    }
    m
}

/// All `n^2` matrices `E_{k,l}^{(n)}`, ordered with index `k * n + l`.
pub fn basis_e(n: usize) -> Vec<CMatrix> {
    (0..n)
        .flat_map(|k| (0..n).map(move |l| basis_element(n, k, l)))
        .collect()
}

/// Maps a basis closed under adjoints (up to sign) to a self-adjoint basis of
/// the same real span: self-adjoint elements are kept, anti-self-adjoint ones
/// become `iE`, and each adjoint pair `{E, E*}` becomes `E + E*`, `i(E - E*)`.
/// Every output is normalized to unit Hilbert-Schmidt norm.
pub fn hermitize_basis(basis: &[CMatrix]) -> Result<Vec<CMatrix>> {
    let mut done = vec![false; basis.len()];
    let mut out = Vec::with_capacity(basis.len());
    for i in 0..basis.len() {
        if done[i] {
            continue;
        }
        let e = &basis[i];
        let adj = e.adjoint();
        let scale = hs_norm(e).max(1.0);
        let partner = (i..basis.len()).find_map(|j| {
            if done[j] {
                return None;
            }
            if hs_norm(&(&adj - &basis[j])) <= ADJOINT_TOL * scale {
                Some((j, 1.0))
            } else if hs_norm(&(&adj + &basis[j])) <= ADJOINT_TOL * scale {
                Some((j, -1.0))
            } else {
                None
            }
        });
        let (j, sign) = partner.ok_or(Error::NotAdjointClosed(i))?;
        done[i] = true;
        done[j] = true;
        let mut produced = Vec::with_capacity(2);
        if j == i {
            produced.push(if sign > 0.0 { e.clone() } else { e.map(|z| z * I) });
        } else {
            produced.push(e + &adj);
            produced.push((e - &adj).map(|z| z * I));
        }
        for m in produced {
            let norm = hs_norm(&m);
            if norm < DEGENERATE_TOL {
                return Err(Error::DegeneratePair(norm));
            }
            out.push(linalg::hermitian_part(&m).unscale(norm));
        }
    }
    Ok(out)
}

/// Orthonormal self-adjoint basis of `M_n`, identity element first.
pub fn quantum_unit_basis(n: usize) -> Vec<CMatrix> {
    hermitize_basis(&basis_e(n)).expect("E basis is closed under adjoints")
}

/// Orthonormal basis of the diagonal `n x n` matrices: `1/sqrt(n)` followed by
/// the cosine contrasts `sqrt(2/n) cos(pi k (r + 1/2) / n)`, `k = 1..n-1`.
pub fn classical_unit_basis(n: usize) -> Vec<CMatrix> {
    let nf = n as f64;
    (0..n)
        .map(|k| {
            let values: Vec<f64> = (0..n)
                .map(|r| {
                    if k == 0 {
                        1.0 / nf.sqrt()
                    } else {
                        (2.0 / nf).sqrt() * (PI * k as f64 * (r as f64 + 0.5) / nf).cos()
                    }
                })
                .collect();
            linalg::diag(&values)
        })
        .collect()
}

/// Gram matrix `G_{ij} = <b_i, b_j>`.
pub fn gram(basis: &[CMatrix]) -> CMatrix {
    let m = basis.len();
    CMatrix::from_fn(m, m, |i, j| hs_inner(&basis[i], &basis[j]))
}

/// Largest entrywise deviation of the Gram matrix from the identity.
pub fn gram_defect(basis: &[CMatrix]) -> f64 {
    let g = gram(basis);
    let m = basis.len();
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - c(target, 0.0)).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_defect;

    #[test]
    fn scalar_case() {
        let b = basis_e(1);
        assert_eq!(b.len(), 1);
        assert!((b[0][(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn identity_element_is_normalized_identity() {
        for n in 1..=6 {
            let e = basis_element(n, 0, 0);
            let expected = linalg::identity(n).unscale((n as f64).sqrt());
            assert!(hs_norm(&(e - expected)) < 1e-14);
        }
    }

    #[test]
    fn displayed_sum_for_n3() {
        let e = basis_element(3, 0, 1);
        let sum = &e + e.adjoint();
        let s = 1.0 / 3f64.sqrt();
        let expected = CMatrix::from_fn(3, 3, |r, col| c(if r == col { 0.0 } else { s }, 0.0));
        assert!(hs_norm(&(sum - expected)) < 1e-14);
    }

    #[test]
    fn self_adjoint_input_is_kept() {
        let e = linalg::diag(&[1.0, 0.0]);
        let out = hermitize_basis(&[e.clone()]).unwrap();
        assert!(hs_norm(&(&out[0] - &e)) < 1e-15);
    }

    #[test]
    fn not_closed_input_is_rejected() {
        let e = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(hermitize_basis(&[e]), Err(Error::NotAdjointClosed(0))));
    }

    #[test]
    fn hermitized_bases_are_orthonormal_and_self_adjoint() {
        for n in 1..=6 {
            let b = quantum_unit_basis(n);
            assert_eq!(b.len(), n * n);
            assert!(gram_defect(&b) < 1e-12, "n = {n}");
            assert!(b.iter().all(|m| hermitian_defect(m) < 1e-14));
            assert!(hs_norm(&(&b[0] - linalg::identity(n).unscale((n as f64).sqrt()))) < 1e-14);
        }
    }

    #[test]
    fn classical_basis_is_orthonormal() {
        for n in 1..=7 {
            let b = classical_unit_basis(n);
            assert_eq!(b.len(), n);
            assert!(gram_defect(&b) < 1e-13);
        }
    }
}
