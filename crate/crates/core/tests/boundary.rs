mod common;

use common::*;
use hiercorr::maxent::{correlation_ck_with, Method, ProjectionOptions};
use hiercorr::{DensityMatrix, SystemShape};
use nalgebra::{DMatrix, SymmetricEigen};

/// Hermitian basis of the k x k matrices.
fn hermitian_basis(k: usize) -> Vec<M> {
    let mut out = Vec::new();
    for a in 0..k {
        for b in a..k {
            let mut h = M::zeros(k, k);
            if a == b {
                h[(a, a)] = cx(1.0, 0.0);
                out.push(h);
                continue;
            }
            h[(a, b)] = cx(1.0, 0.0);
            h[(b, a)] = cx(1.0, 0.0);
            out.push(h);
            let mut h = M::zeros(k, k);
            h[(a, b)] = cx(0.0, 1.0);
            h[(b, a)] = cx(0.0, -1.0);
            out.push(h);
        }
    }
    out
}

// A rank-3 state whose 2-local projection is singular. The face is certified
// by a positive semidefinite element of the model span vanishing on rho.
#[test]
fn singular_projection_sits_on_a_certified_face() {
    let m = mixed_state(8, 3, &mut rng(10508));
    let rho = DensityMatrix::new(SystemShape::qubits(3), m.clone()).unwrap();
    let res = correlation_ck_with(&rho, 2, &ProjectionOptions::with_method(Method::Auto)).unwrap();
    assert!(res.converged);
    assert!(res.constraint_residual < 1e-10);

    let pi = res.pi.matrix().clone();
    let (vals, vecs) = eigh(&pi);
    let kernel: Vec<usize> = (0..8).filter(|&i| vals[i] < 1e-9).collect();
    assert_eq!(kernel.len(), 2, "{vals:?}");
    let k = M::from_fn(8, kernel.len(), |r, c| vecs[(r, kernel[c])]);

    // find A with K A K* in the span of identity and the 2-local Pauli strings
    let mut span = vec![eye(8)];
    span.extend(local_pauli_strings(3, 2));
    let outside = |w: &M| {
        let mut out = w.clone();
        for p in &span {
            out -= p.scale(tr(&(p * w)).re / 8.0);
        }
        out
    };
    let herm = hermitian_basis(kernel.len());
    let cols: Vec<Vec<f64>> = herm
        .iter()
        .map(|h| outside(&(&k * h * k.adjoint())).iter().flat_map(|z| [z.re, z.im]).collect())
        .collect();
    let a = DMatrix::from_fn(cols[0].len(), cols.len(), |i, j| cols[j][i]);
    let eig = SymmetricEigen::new(a.transpose() * &a);
    let j = eig.eigenvalues.imin();
    assert!(eig.eigenvalues[j] < 1e-10, "{:?}", eig.eigenvalues);
    let coeffs = eig.eigenvectors.column(j);
    let w = herm.iter().zip(coeffs.iter()).fold(M::zeros(2, 2), |acc, (h, &c)| acc + h.scale(c));
    let (wv, _) = eigh(&w);
    // definite up to sign: every feasible state is orthogonal to the kernel
    assert!(wv.iter().all(|&x| x > 0.1) || wv.iter().all(|&x| x < -0.1), "{wv:?}");

    // on that face the projection is the entropy maximizer; compare with the value
    // implied by the Pythagorean identity
    let d = entropy(&pi) - entropy(&m);
    assert!((res.divergence - d).abs() < 1e-8, "{} vs {d}", res.divergence);
    let face: Vec<usize> = (0..8).filter(|&i| vals[i] >= 1e-9).collect();
    let q = M::from_fn(8, face.len(), |r, c| vecs[(r, face[c])]);
    let (m_f, pi_f) = (q.adjoint() * &m * &q, q.adjoint() * &pi * &q);
    assert!((tr(&m_f).re - 1.0).abs() < 1e-10);
    // any point of the family bounds the divergence from above
    let dual = correlation_ck_with(&rho, 2, &ProjectionOptions::with_method(Method::Dual)).unwrap();
    assert!(res.divergence <= dual.divergence + 1e-9, "{} > {}", res.divergence, dual.divergence);

    let direct = rel_entropy(&m_f, &pi_f);
    assert!((direct - res.divergence).abs() < 1e-8, "{direct} vs {}", res.divergence);
}
