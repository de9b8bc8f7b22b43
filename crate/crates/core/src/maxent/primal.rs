//! Direct entropy maximization over the feasible set, robust when the
//! projection is rank deficient.
//!
//! Phase one maximizes `H(tau) + eps log det tau - |P(tau - rho)|^2 / (2 eps)`
//! over the full algebra for a decreasing penalty weight `eps`, which gives a
//! starting point. Facial reduction fixes the face `q A q` holding every
//! feasible state; phase two maximizes `H + mu log det` on that face under the
//! exact linear constraints while `mu` goes to zero, shrinking the face
//! whenever eigenvalues collapse.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hierarchy::{build_model, HierarchicalModelSpec, Hypergraph};
use crate::linalg::{
    c, hermitian_part, hermitian_to_real, is_exactly_diagonal, log_divided_difference, orthonormalize,
    real_to_hermitian, trace_product_re, CMatrix, Spectrum,
};
use crate::state::DensityMatrix;

use super::ProjectionOptions;

const PENALTY_SCHEDULE: [f64; 9] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9];
const BARRIER_SCHEDULE: [f64; 6] = [1e-3, 1e-5, 1e-7, 1e-9, 1e-12, 0.0];
const CERTIFICATE_TOL: f64 = 1e-11;
const REFINE_ITER: usize = 30;
const CERTIFICATE_CUT: f64 = 1e-3;
const DEFINITE_TOL: f64 = 1e-6;
const KERNEL_TOL: f64 = 1e-12;
const OPTIMALITY_TOL: f64 = 1e-7;
const COLLAPSE_TOL: f64 = 1e-10;
const SHRINK_TOL: f64 = 1e-7;
const STAGE_ITER: usize = 100;
const MAX_FACE_ROUNDS: usize = 8;

pub(crate) struct PrimalOutcome {
    pub pi: CMatrix,
    pub iterations: usize,
    pub converged: bool,
    pub face_dim: usize,
}

struct Derivs {
    value: f64,
    grad: DVector<f64>,
    hess: DMatrix<f64>,
}

/// Value of `H(tau) + mu log det tau`; `None` unless `tau` is positive definite.
fn barrier_value(tau: &CMatrix, mu: f64) -> Option<f64> {
    let s = Spectrum::of(tau);
    if s.min() <= 0.0 {
        return None;
    }
    Some(s.values.iter().map(|&l| -l * l.ln() + mu * l.ln()).sum())
}

/// Derivatives of `H(tau) + mu log det tau` along the Hermitian directions `dirs`.
fn barrier_derivs(tau: &CMatrix, dirs: &[CMatrix], diagonal_dirs: bool, mu: f64) -> Option<Derivs> {
    let s = Spectrum::of(tau);
    if s.min() <= 0.0 {
        return None;
    }
    let lam = &s.values;
    let d = lam.len();
    let value = lam.iter().map(|&l| -l * l.ln() + mu * l.ln()).sum();
    let g_mat = s.apply(|l| -l.ln() - 1.0 + mu / l);
    let grad = DVector::from_iterator(dirs.len(), dirs.iter().map(|x| trace_product_re(&g_mat, x)));
    let kernel = DMatrix::from_fn(d, d, |a, b| log_divided_difference(lam[a], lam[b]) + mu / (lam[a] * lam[b]));
    let rotated: Vec<CMatrix> = dirs.iter().map(|x| s.to_eigenbasis(x)).collect();
    let diagonal = diagonal_dirs && s.vectors.is_none();
    let m = dirs.len();
    let mut hess = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let (xi, xj) = (&rotated[i], &rotated[j]);
            let mut acc = 0.0;
            if diagonal {
                for a in 0..d {
                    acc += xi[(a, a)].re * xj[(a, a)].re * kernel[(a, a)];
                }
            } else {
                for b in 0..d {
                    for a in 0..d {
                        acc += (xi[(a, b)].conj() * xj[(a, b)]).re * kernel[(a, b)];
                    }
                }
            }
            hess[(i, j)] = -acc;
            hess[(j, i)] = -acc;
        }
    }
    Some(Derivs { value, grad, hess })
}

/// Ascent direction `-H^{-1} g` for a concave objective, damped if needed.
fn ascent_direction(hess: &DMatrix<f64>, grad: &DVector<f64>) -> DVector<f64> {
    let neg = -hess;
    let scale = (0..neg.nrows()).map(|i| neg[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    let mut damping = 0.0;
    loop {
        let mut reg = neg.clone();
        for i in 0..reg.nrows() {
            reg[(i, i)] += damping;
        }
        if let Some(ch) = reg.cholesky() {
            return ch.solve(grad);
        }
        damping = if damping == 0.0 { 1e-14 * scale } else { damping * 10.0 };
        if damping > 1e6 * scale {
            return grad.clone();
        }
    }
}

/// Damped Newton ascent. `value` returns `None` outside the domain.
/// Returns the final point, the iteration count and whether the Newton
/// decrement fell below `tol`.
fn newton_ascent(
    mut x: DVector<f64>,
    value: impl Fn(&DVector<f64>) -> Option<f64>,
    derivs: impl Fn(&DVector<f64>) -> Option<Derivs>,
    tol: f64,
) -> (DVector<f64>, usize, bool) {
    for it in 0..STAGE_ITER {
        let Some(dv) = derivs(&x) else {
            return (x, it, false);
        };
        let dir = ascent_direction(&dv.hess, &dv.grad);
        let decrement = dv.grad.dot(&dir);
        if decrement <= tol {
            return (x, it, true);
        }
        let mut step = 1.0;
        let mut moved = false;
        while step > 1e-14 {
            let trial = &x + &dir * step;
            if let Some(v) = value(&trial) {
                if v >= dv.value + 1e-4 * step * decrement {
                    x = trial;
                    moved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !moved {
            return (x, it + 1, decrement <= tol.sqrt());
        }
    }
    (x, STAGE_ITER, false)
}

fn combine(base: &CMatrix, dirs: &[CMatrix], coeffs: &DVector<f64>) -> CMatrix {
    let mut out = base.clone();
    for (x, &c) in dirs.iter().zip(coeffs.iter()) {
        if c != 0.0 {
            out += x.scale(c);
        }
    }
    out
}

pub(crate) fn solve(
    rho: &DensityMatrix,
    model: &HierarchicalModelSpec,
    opts: &ProjectionOptions,
) -> Result<PrimalOutcome> {
    let shape = rho.shape();
    let d = shape.dim();
    let algebra = build_model(shape, &Hypergraph::power_set(shape.n_units()))?;
    let elems = algebra.dense();
    let in_model: Vec<bool> = algebra
        .elements()
        .iter()
        .map(|e| model.hypergraph().contains(e.pattern.0))
        .collect();
    let targets: Vec<f64> = elems.iter().map(|e| rho.expectation(e)).collect();

    // Phase one over coordinates of the non-identity algebra elements.
    let dirs: Vec<CMatrix> = elems[1..].to_vec();
    let diagonal_dirs = dirs.iter().all(is_exactly_diagonal);
    let base = CMatrix::identity(d, d).unscale(d as f64);
    let penalized: Vec<usize> = (1..elems.len()).filter(|&k| in_model[k]).collect();
    let mut y = DVector::zeros(dirs.len());
    let mut iterations = 0;
    for &eps in &PENALTY_SCHEDULE {
        let penalty = |y: &DVector<f64>| {
            penalized
                .iter()
                .map(|&k| (y[k - 1] - targets[k]).powi(2))
                .sum::<f64>()
                / (2.0 * eps)
        };
        let value = |y: &DVector<f64>| barrier_value(&combine(&base, &dirs, y), eps).map(|h| h - penalty(y));
        let derivs = |y: &DVector<f64>| {
            let mut dv = barrier_derivs(&combine(&base, &dirs, y), &dirs, diagonal_dirs, eps)?;
            dv.value -= penalty(y);
            for &k in &penalized {
                dv.grad[k - 1] -= (y[k - 1] - targets[k]) / eps;
                dv.hess[(k - 1, k - 1)] -= 1.0 / eps;
            }
            Some(dv)
        };
        let (next, its, _) = newton_ascent(y, value, derivs, 1e-20);
        y = next;
        iterations += its;
    }
    let tau_eps = hermitian_part(&combine(&base, &dirs, &y));

    let model_elems: Vec<&CMatrix> = elems.iter().zip(&in_model).filter(|(_, &m)| m).map(|(e, _)| e).collect();
    let mut faces = vec![CMatrix::identity(d, d)];
    if let Some(q) = facial_reduction(&model_elems, rho.matrix()) {
        faces.insert(0, q);
    }
    let mut last_err = Error::Solver("no feasible face found".into());
    let mut fallback: Option<(f64, PrimalOutcome)> = None;
    for q in faces {
        match face_phase(&q, &tau_eps, rho.matrix(), elems, &in_model, &targets, opts) {
            Ok(face) => {
                let gap = if face.boundary { 0.0 } else { optimality_gap(rho.matrix(), &face.pi) };
                let outcome = PrimalOutcome {
                    pi: face.pi,
                    iterations: iterations + face.iterations,
                    converged: face.converged || gap <= OPTIMALITY_TOL,
                    face_dim: face.dim,
                };
                if gap <= OPTIMALITY_TOL {
                    return Ok(outcome);
                }
                if fallback.as_ref().is_none_or(|(g, _)| gap < *g) {
                    fallback = Some((gap, outcome));
                }
            }
            Err(e) => last_err = e,
        }
    }
    if let Some((_, mut outcome)) = fallback {
        outcome.converged = false;
        return Ok(outcome);
    }
    Err(last_err)
}

/// `|tr (rho - pi) log pi|` on the support of `pi`, infinite when rho leaves it.
/// Zero at the projection, since `log pi` lies in the compressed model span there.
fn optimality_gap(rho: &CMatrix, pi: &CMatrix) -> f64 {
    let s = Spectrum::of(pi);
    let floor = COLLAPSE_TOL * s.max();
    let outside = s.apply(|l| if l > floor { 0.0 } else { 1.0 });
    if trace_product_re(rho, &outside) > 1e-9 {
        return f64::INFINITY;
    }
    let log_pi = s.apply(|l| if l > floor { l.ln() } else { 0.0 });
    (trace_product_re(rho, &log_pi) - trace_product_re(pi, &log_pi)).abs()
}

fn complement(k: &CMatrix) -> CMatrix {
    let n = k.nrows();
    Spectrum::of(&hermitian_part(&(CMatrix::identity(n, n) - k * k.adjoint()))).isometry(|v| v > 0.5)
}

fn unit_hermitians(k: usize) -> Vec<CMatrix> {
    (0..k * k)
        .map(|i| real_to_hermitian(&DVector::from_fn(k * k, |j, _| if i == j { 1.0 } else { 0.0 }), k))
        .collect()
}

/// Gauss-Newton refinement of an orthonormal `k` inside the range of the
/// isometry `allowed` and a unit-norm `a` so that `k a k*` lies in the span
/// removed by `outside`. Returns the final residual.
fn refine_certificate(
    k: &mut CMatrix,
    a: &mut CMatrix,
    allowed: &CMatrix,
    outside: &impl Fn(&DVector<f64>) -> DVector<f64>,
) -> f64 {
    let f = k.nrows();
    let residual = |k: &CMatrix, a: &CMatrix| outside(&hermitian_to_real(&hermitian_part(&(k * a * k.adjoint()))));
    let mut r = residual(k, a);
    for _ in 0..REFINE_ITER {
        if r.norm() < 1e-15 {
            break;
        }
        let kp = allowed * complement(&(allowed.adjoint() * &*k));
        let (m, n) = (kp.ncols(), k.ncols());
        let mut moves: Vec<(CMatrix, bool)> = Vec::new();
        for i in 0..m {
            for j in 0..n {
                for unit in [c(1.0, 0.0), c(0.0, 1.0)] {
                    let mut e = CMatrix::zeros(m, n);
                    e[(i, j)] = unit;
                    moves.push((&kp * e, true));
                }
            }
        }
        // keep the scale of a fixed, otherwise a = 0 solves the problem
        let a_hat = hermitian_to_real(a).normalize();
        let dirs: Vec<DVector<f64>> = unit_hermitians(n)
            .iter()
            .map(|h| {
                let v = hermitian_to_real(h);
                &v - &a_hat * a_hat.dot(&v)
            })
            .collect();
        for v in orthonormalize(&dirs, 1e-8) {
            moves.push((real_to_hermitian(&v, n), false));
        }
        let cols: Vec<DVector<f64>> = moves
            .iter()
            .map(|(x, is_k)| {
                let dm = if *is_k { x * &*a * k.adjoint() + &*k * &*a * x.adjoint() } else { &*k * x * k.adjoint() };
                outside(&hermitian_to_real(&hermitian_part(&dm)))
            })
            .collect();
        let jac = DMatrix::from_fn(r.len(), cols.len(), |i, j| cols[j][i]);
        let Ok(step) = jac.svd(true, true).solve(&(-&r), 1e-12) else {
            break;
        };
        let mut k_new = k.clone();
        let mut a_new = a.clone();
        for ((x, is_k), &s) in moves.iter().zip(step.iter()) {
            if *is_k {
                k_new += x.scale(s);
            } else {
                a_new += x.scale(s);
            }
        }
        let g = Spectrum::of(&hermitian_part(&(k_new.adjoint() * &k_new)));
        let root = g.apply(f64::sqrt);
        let next_k = &k_new * g.apply(|x| 1.0 / x.sqrt());
        let next_a = hermitian_part(&(&root * a_new * &root));
        let next_a = next_a.unscale(next_a.norm());
        let next_r = residual(&next_k, &next_a);
        if next_r.norm() >= r.norm() {
            break;
        }
        (*k, *a, r) = (next_k, next_a, next_r);
    }
    debug_assert_eq!(k.nrows(), f);
    r.norm()
}

/// Minimal face containing every feasible state, found by facial reduction.
///
/// A positive semidefinite `W` in the model span with `tr W rho = 0` vanishes
/// on every feasible state, so the face shrinks to `ker W`. Such `W` satisfy
/// `W rho = 0`, a linear condition; among them the one with the largest
/// smallest eigenvalue on `ker rho` has maximal range. Returns `None` when
/// nothing can be removed.
fn facial_reduction(model: &[&CMatrix], rho: &CMatrix) -> Option<CMatrix> {
    let d = rho.nrows();
    let mut q = CMatrix::identity(d, d);
    while q.ncols() > 1 {
        let f = q.ncols();
        let qa = q.adjoint();
        let rs = Spectrum::of(&hermitian_part(&(&qa * rho * &q)));
        let kernel = rs.isometry(|v| v <= KERNEL_TOL);
        let support = rs.isometry(|v| v > KERNEL_TOL);
        let k = kernel.ncols();
        if k == 0 {
            break;
        }
        let basis: Vec<CMatrix> = orthonormalize(
            &model.iter().map(|e| hermitian_to_real(&hermitian_part(&(&qa * *e * &q)))).collect::<Vec<_>>(),
            1e-10,
        )
        .iter()
        .map(|v| real_to_hermitian(v, f))
        .collect();
        // coefficients y with (sum y_j B_j) rho = 0
        let cols: Vec<DVector<f64>> = basis
            .iter()
            .map(|b| {
                let m = b * &support;
                DVector::from_iterator(2 * m.len(), m.iter().flat_map(|z| [z.re, z.im]))
            })
            .collect();
        let lin = DMatrix::from_fn(cols[0].len().max(1), cols.len(), |i, j| cols[j].get(i).copied().unwrap_or(0.0));
        let gram = (lin.transpose() * &lin).symmetric_eigen();
        let scale = gram.eigenvalues.max().max(1.0);
        let null: Vec<CMatrix> = (0..basis.len())
            .filter(|&j| gram.eigenvalues[j] <= 1e-14 * scale)
            .map(|j| {
                let y = gram.eigenvectors.column(j);
                let w = basis.iter().zip(y.iter()).fold(CMatrix::zeros(f, f), |acc, (b, &c)| acc + b.scale(c));
                hermitian_part(&(kernel.adjoint() * w * &kernel))
            })
            .collect();
        if null.is_empty() {
            break;
        }
        // normalize tr C = 1 and search the traceless directions
        let traces = DVector::from_iterator(null.len(), null.iter().map(|c| c.trace().re));
        if traces.norm() < 1e-12 {
            break;
        }
        let base = null.iter().zip(traces.iter()).fold(CMatrix::zeros(k, k), |acc, (c, &t)| acc + c.scale(t)).unscale(traces.norm_squared());
        let t_hat = traces.normalize();
        let free: Vec<DVector<f64>> = (0..null.len())
            .map(|i| {
                let mut e = DVector::zeros(null.len());
                e[i] = 1.0;
                &e - &t_hat * t_hat[i]
            })
            .collect();
        let dirs: Vec<CMatrix> = orthonormalize(&free, 1e-10)
            .iter()
            .map(|a| null.iter().zip(a.iter()).fold(CMatrix::zeros(k, k), |acc, (c, &x)| acc + c.scale(x)))
            .collect();
        let z = interior_point(&base, &dirs, DVector::zeros(dirs.len())).0;
        let mut a = hermitian_part(&combine(&base, &dirs, &z));
        let s = Spectrum::of(&a);
        if s.max() <= 0.0 || s.min() < -CERTIFICATE_TOL.sqrt() * s.max() {
            break;
        }
        let top = s.max();
        let range = s.isometry(|v| v > CERTIFICATE_CUT * top);
        if range.ncols() == k || s.min() > DEFINITE_TOL * top {
            q = &q * support;
            continue;
        }
        // the interior point only approximates the range; sharpen it
        let mut kf = &kernel * &range;
        a = hermitian_part(&(range.adjoint() * &a * &range));
        a = a.unscale(a.norm());
        let span: Vec<DVector<f64>> = basis.iter().map(hermitian_to_real).collect();
        let outside = |v: &DVector<f64>| {
            let mut w = v.clone();
            for b in &span {
                w.axpy(-b.dot(v), b, 1.0);
            }
            w
        };
        if refine_certificate(&mut kf, &mut a, &kernel, &outside) > CERTIFICATE_TOL {
            break;
        }
        if Spectrum::of(&a).min() < -CERTIFICATE_TOL.sqrt() {
            break;
        }
        q = &q * complement(&kf);
    }
    (q.ncols() < d).then_some(q)
}

/// Maximizes the smallest eigenvalue of `base + sum z_i dirs_i` through
/// `t + mu log det(tau(z) - t)`, stopping once the point is safely interior.
fn interior_point(base: &CMatrix, dirs: &[CMatrix], z0: DVector<f64>) -> (DVector<f64>, usize) {
    let m = dirs.len();
    let f = base.nrows();
    let tau = |x: &DVector<f64>| {
        let mut t = combine(base, dirs, &x.rows(0, m).into_owned());
        for i in 0..f {
            t[(i, i)] -= x[m];
        }
        t
    };
    let s0 = Spectrum::of(&combine(base, dirs, &z0));
    let mut x = DVector::zeros(m + 1);
    x.rows_mut(0, m).copy_from(&z0);
    x[m] = s0.min() - 1e-3 * s0.max().abs().max(1e-12);
    let mut iterations = 0;
    for &mu in &[1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-8] {
        let value = |x: &DVector<f64>| {
            let s = Spectrum::of(&tau(x));
            (s.min() > 0.0).then(|| x[m] + mu * s.values.iter().map(|l| l.ln()).sum::<f64>())
        };
        let derivs = |x: &DVector<f64>| {
            let s = Spectrum::of(&tau(x));
            if s.min() <= 0.0 {
                return None;
            }
            let lam = &s.values;
            let inv = s.apply(|l| 1.0 / l);
            let minus_eye = -CMatrix::identity(f, f);
            let xs: Vec<CMatrix> = dirs.iter().cloned().chain(std::iter::once(minus_eye)).collect();
            let rotated: Vec<CMatrix> = xs.iter().map(|x| s.to_eigenbasis(x)).collect();
            let mut grad = DVector::from_iterator(m + 1, xs.iter().map(|x| mu * trace_product_re(&inv, x)));
            grad[m] += 1.0;
            let mut hess = DMatrix::zeros(m + 1, m + 1);
            for i in 0..=m {
                for j in i..=m {
                    let mut acc = 0.0;
                    for b in 0..f {
                        for a in 0..f {
                            acc += (rotated[i][(a, b)].conj() * rotated[j][(a, b)]).re / (lam[a] * lam[b]);
                        }
                    }
                    hess[(i, j)] = -mu * acc;
                    hess[(j, i)] = -mu * acc;
                }
            }
            let value = x[m] + mu * lam.iter().map(|l| l.ln()).sum::<f64>();
            Some(Derivs { value, grad, hess })
        };
        let (next, its, _) = newton_ascent(x, value, derivs, 1e-14);
        x = next;
        iterations += its;
        let s = Spectrum::of(&combine(base, dirs, &x.rows(0, m).into_owned()));
        if s.min() > 10.0 * SHRINK_TOL * s.max() {
            break;
        }
    }
    (x.rows(0, m).into_owned(), iterations)
}

struct FaceSolution {
    pi: CMatrix,
    iterations: usize,
    converged: bool,
    dim: usize,
    /// The maximizer has eigenvalues below working precision in directions
    /// where `rho` has weight, so it sits on the boundary numerically.
    boundary: bool,
}

/// Phase two on the face spanned by the columns of `q`, shrinking it on collapse.
fn face_phase(
    q: &CMatrix,
    start: &CMatrix,
    rho: &CMatrix,
    elems: &[CMatrix],
    in_model: &[bool],
    targets: &[f64],
    opts: &ProjectionOptions,
) -> Result<FaceSolution> {
    let mut q = q.clone();
    let mut current = start.clone();
    let mut iterations = 0;
    for _ in 0..MAX_FACE_ROUNDS {
        let f = q.ncols();
        if f == 0 {
            return Err(Error::Solver("empty face".into()));
        }
        let qa = q.adjoint();
        let compressed: Vec<CMatrix> = elems.iter().map(|e| hermitian_part(&(&qa * e * &q))).collect();
        let vecs: Vec<DVector<f64>> = compressed.iter().map(hermitian_to_real).collect();
        let g = orthonormalize(&vecs, 1e-10);
        let n = g.len();
        let rows: Vec<usize> = (0..elems.len()).filter(|&k| in_model[k]).collect();
        let cmat = DMatrix::from_fn(rows.len(), n, |r, i| vecs[rows[r]].dot(&g[i]));
        let t = DVector::from_iterator(rows.len(), rows.iter().map(|&k| targets[k]));
        let start_vec = hermitian_to_real(&hermitian_part(&(&qa * &current * &q)));
        let mut x0 = DVector::from_iterator(n, g.iter().map(|gi| gi.dot(&start_vec)));

        let svd = cmat.clone().svd(true, true);
        let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let cut = 1e-10 * smax.max(1e-300);
        let defect = &t - &cmat * &x0;
        let correction = svd
            .clone()
            .pseudo_inverse(cut)
            .map_err(|e| Error::Solver(e.to_string()))?
            * defect;
        x0 += correction;
        let residual = (&cmat * &x0 - &t).amax();
        if residual > 1e-9 {
            return Err(Error::Solver(format!("face infeasible, residual {residual:.3e}")));
        }
        let v_t = svd.v_t.as_ref().expect("v_t requested");
        let rank = svd.singular_values.iter().filter(|&&s| s > cut).count();
        let mut candidates: Vec<DVector<f64>> = Vec::with_capacity(rank + n);
        for (k, s) in svd.singular_values.iter().enumerate() {
            if *s > cut {
                candidates.push(v_t.row(k).transpose());
            }
        }
        for i in 0..n {
            let mut e = DVector::zeros(n);
            e[i] = 1.0;
            candidates.push(e);
        }
        let full = orthonormalize(&candidates, 1e-8);
        let null: Vec<DVector<f64>> = full[rank.min(full.len())..].to_vec();

        let to_matrix = |x: &DVector<f64>| {
            let mut acc = DVector::zeros(f * f);
            for (gi, &c) in g.iter().zip(x.iter()) {
                acc.axpy(c, gi, 1.0);
            }
            real_to_hermitian(&acc, f)
        };
        let mut base = to_matrix(&x0);
        let dirs: Vec<CMatrix> = null.iter().map(to_matrix).collect();
        let diagonal_dirs = dirs.iter().all(is_exactly_diagonal);
        let mut bs = Spectrum::of(&base);
        if bs.min() <= SHRINK_TOL * bs.max() && !dirs.is_empty() {
            // rho restricted to the face is feasible; start from whichever point is more interior
            let rho_vec = hermitian_to_real(&hermitian_part(&(&qa * rho * &q)));
            let x_rho = DVector::from_iterator(n, g.iter().map(|gi| gi.dot(&rho_vec)));
            let z_rho = DVector::from_iterator(null.len(), null.iter().map(|v| v.dot(&(&x_rho - &x0))));
            let from_rho = Spectrum::of(&combine(&base, &dirs, &z_rho)).min();
            let z0 = if from_rho > bs.min() { z_rho } else { DVector::zeros(dirs.len()) };
            let (z, its) = interior_point(&base, &dirs, z0);
            iterations += its;
            base = hermitian_part(&combine(&base, &dirs, &z));
            bs = Spectrum::of(&base);
        }
        if bs.min() <= 0.0 {
            let cut = SHRINK_TOL * bs.max();
            if bs.min() < -cut {
                return Err(Error::Solver("face start is not positive semidefinite".into()));
            }
            let w = bs.isometry(|v| v > cut);
            if w.ncols() == f {
                return Err(Error::Solver("face start is singular".into()));
            }
            current = &q * &base * q.adjoint();
            q = &q * w;
            continue;
        }

        let mut z = DVector::zeros(dirs.len());
        let mut converged = true;
        for &mu in &BARRIER_SCHEDULE {
            let value = |z: &DVector<f64>| barrier_value(&combine(&base, &dirs, z), mu);
            let derivs = |z: &DVector<f64>| barrier_derivs(&combine(&base, &dirs, z), &dirs, diagonal_dirs, mu);
            let (next, its, ok) = newton_ascent(z, value, derivs, opts.tol * opts.tol * 1e-4);
            z = next;
            iterations += its;
            converged = ok;
        }
        let tau = hermitian_part(&combine(&base, &dirs, &z));
        let s = Spectrum::of(&tau);
        let lmax = s.max();
        let pi = hermitian_part(&(&q * &tau * q.adjoint()));
        let mut boundary = false;
        if s.min() < COLLAPSE_TOL * lmax {
            // only a face of all feasible states may be dropped; if rho has weight
            // on the collapsing directions the optimum is just numerically singular
            let collapsing = s.isometry(|v| v < COLLAPSE_TOL * lmax);
            let weight = hermitian_part(&(collapsing.adjoint() * &qa * rho * &q * &collapsing)).trace().re;
            if weight <= 1e-9 {
                let w = s.isometry(|v| v >= COLLAPSE_TOL * lmax);
                current = pi;
                q = &q * w;
                continue;
            }
            boundary = true;
        }
        return Ok(FaceSolution { pi, iterations, converged: converged || boundary, dim: f, boundary });
    }
    Err(Error::Solver("face reduction did not settle".into()))
}
