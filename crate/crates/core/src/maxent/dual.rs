//! Newton method on the convex dual `log Z(theta) - <theta, t>`.

use nalgebra::{DMatrix, DVector};

use crate::linalg::{exp_divided_difference, is_exactly_diagonal, CMatrix, Spectrum};

use super::ProjectionOptions;

pub(crate) struct DualOutcome {
    pub theta: Vec<f64>,
    pub log_z: f64,
    pub sigma: CMatrix,
    pub iterations: usize,
    pub converged: bool,
    /// `|theta|` grew past the configured limit: the projection sits on the boundary.
    pub hit_limit: bool,
    pub stalled: bool,
    /// Dual objective at the final iterate; an upper bound on `H(pi)`.
    pub value: f64,
}

struct Point {
    log_z: f64,
    value: f64,
    sigma: CMatrix,
    grad: DVector<f64>,
    spectrum: Spectrum,
    shift: f64,
    weights_sum: f64,
}

fn hamiltonian(basis: &[CMatrix], theta: &[f64]) -> CMatrix {
    let d = basis[0].nrows();
    let mut a = CMatrix::zeros(d, d);
    for (b, &x) in basis.iter().zip(theta) {
        if x != 0.0 {
            a += b.scale(x);
        }
    }
    a
}

fn evaluate(basis: &[CMatrix], targets: &[f64], theta: &[f64]) -> Point {
    let a = hamiltonian(basis, theta);
    let spectrum = Spectrum::of(&a);
    let shift = spectrum.max();
    let weights: Vec<f64> = spectrum.values.iter().map(|v| (v - shift).exp()).collect();
    let weights_sum: f64 = weights.iter().sum();
    let log_z = shift + weights_sum.ln();
    let sigma = spectrum.apply_selected(|k, _| weights[k] / weights_sum);
    let grad = DVector::from_iterator(
        basis.len(),
        basis
            .iter()
            .zip(targets)
            .map(|(b, &t)| crate::linalg::trace_product_re(&sigma, b) - t),
    );
    let value = log_z - theta.iter().zip(targets).map(|(x, t)| x * t).sum::<f64>();
    Point {
        log_z,
        value,
        sigma,
        grad,
        spectrum,
        shift,
        weights_sum,
    }
}

/// Hessian of `log Z`: the Kubo-Mori covariance of the basis under `sigma`.
fn hessian(basis: &[CMatrix], diagonal_basis: bool, p: &Point) -> DMatrix<f64> {
    let m = basis.len();
    let d = p.spectrum.dim();
    let lam: Vec<f64> = p.spectrum.values.iter().map(|v| v - p.shift).collect();
    let kernel = DMatrix::from_fn(d, d, |a, b| exp_divided_difference(lam[a], lam[b]) / p.weights_sum);
    let rotated: Vec<CMatrix> = basis.iter().map(|b| p.spectrum.to_eigenbasis(b)).collect();
    let expect: Vec<f64> = basis
        .iter()
        .map(|b| crate::linalg::trace_product_re(&p.sigma, b))
        .collect();
    let diagonal = diagonal_basis && p.spectrum.vectors.is_none();
    let mut h = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let (bi, bj) = (&rotated[i], &rotated[j]);
            let mut acc = 0.0;
            if diagonal {
                for a in 0..d {
                    acc += bi[(a, a)].re * bj[(a, a)].re * kernel[(a, a)];
                }
            } else {
                for b in 0..d {
                    for a in 0..d {
                        let x = bi[(a, b)].conj() * bj[(a, b)];
                        acc += x.re * kernel[(a, b)];
                    }
                }
            }
            let v = acc - expect[i] * expect[j];
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    h
}

fn newton_direction(h: &DMatrix<f64>, g: &DVector<f64>) -> DVector<f64> {
    let scale = (0..h.nrows()).map(|i| h[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    let mut damping = 0.0;
    loop {
        let mut reg = h.clone();
        for i in 0..reg.nrows() {
            reg[(i, i)] += damping;
        }
        if let Some(ch) = reg.cholesky() {
            return -ch.solve(g);
        }
        damping = if damping == 0.0 { 1e-14 * scale } else { damping * 10.0 };
        if damping > 1e6 * scale {
            return -g.clone();
        }
    }
}

/// `basis` and `targets` exclude the identity element.
pub(crate) fn solve(basis: &[CMatrix], targets: &[f64], opts: &ProjectionOptions) -> DualOutcome {
    let m = basis.len();
    let diagonal_basis = basis.iter().all(is_exactly_diagonal);
    let mut theta = vec![0.0; m];
    let mut point = evaluate(basis, targets, &theta);
    let mut iterations = 0;
    let mut converged = false;
    let mut hit_limit = false;
    let mut stalled = false;
    if m == 0 {
        converged = true;
    }
    while !converged && iterations < opts.max_iter {
        if point.grad.amax() <= opts.tol {
            converged = true;
            break;
        }
        iterations += 1;
        let h = hessian(basis, diagonal_basis, &point);
        let dir = newton_direction(&h, &point.grad);
        let slope = point.grad.dot(&dir);
        let dir = if slope < 0.0 { dir } else { -point.grad.clone() };
        let slope = point.grad.dot(&dir);
        let mut step = 1.0;
        let mut accepted = None;
        while step > 1e-12 {
            let trial: Vec<f64> = theta.iter().zip(dir.iter()).map(|(t, d)| t + step * d).collect();
            let p = evaluate(basis, targets, &trial);
            if p.value.is_finite() && p.value <= point.value + 1e-4 * step * slope {
                accepted = Some((trial, p));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some((t, p)) => {
                theta = t;
                point = p;
            }
            None => {
                stalled = true;
                break;
            }
        }
        let norm = theta.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > opts.theta_limit {
            hit_limit = true;
            break;
        }
    }
    if !converged && point.grad.amax() <= opts.tol {
        converged = true;
    }
    DualOutcome {
        log_z: point.log_z,
        value: point.value,
        sigma: point.sigma,
        theta,
        iterations,
        converged,
        hit_limit,
        stalled,
    }
}
