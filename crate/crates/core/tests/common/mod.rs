//! Test-side reference computations. Built directly on nalgebra so that the
//! library's own linear algebra, entropies and solvers are not reused.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
pub type C = nalgebra::Complex<f64>;

pub type M = DMatrix<C>;

pub fn cx(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn eye(n: usize) -> M {
    M::identity(n, n)
}

pub fn kron(a: &M, b: &M) -> M {
    a.kronecker(b)
}

pub fn kron_all(ms: &[M]) -> M {
    ms.iter().skip(1).fold(ms[0].clone(), |acc, m| kron(&acc, m))
}

pub fn pauli(j: usize) -> M {
    let (o, z, i) = (cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 1.0));
    match j {
        0 => M::from_row_slice(2, 2, &[o, z, z, o]),
        1 => M::from_row_slice(2, 2, &[z, o, o, z]),
        2 => M::from_row_slice(2, 2, &[z, -i, i, z]),
        _ => M::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

/// Pauli string on `n` qubits, `labels[i]` in 0..4.
pub fn pauli_string(labels: &[usize]) -> M {
    kron_all(&labels.iter().map(|&j| pauli(j)).collect::<Vec<_>>())
}

/// All Pauli strings with at most `k` non-identity factors, identity excluded.
pub fn local_pauli_strings(n: usize, k: usize) -> Vec<M> {
    let mut out = Vec::new();
    for code in 1..4usize.pow(n as u32) {
        let labels: Vec<usize> = (0..n).map(|i| code / 4usize.pow(i as u32) % 4).collect();
        if labels.iter().filter(|&&j| j != 0).count() <= k {
            out.push(pauli_string(&labels));
        }
    }
    out
}

pub fn outer(v: &[C]) -> M {
    let n = v.len();
    M::from_fn(n, n, |r, s| v[r] * v[s].conj())
}

pub fn tr(m: &M) -> C {
    m.diagonal().sum()
}

pub fn max_abs(m: &M) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn eigh(m: &M) -> (Vec<f64>, M) {
    let h = (m + m.adjoint()).scale(0.5);
    let e = h.symmetric_eigen();
    (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
}

pub fn fun(m: &M, f: impl Fn(f64) -> f64) -> M {
    let (vals, vecs) = eigh(m);
    let d = DMatrix::from_diagonal(&DVector::from_iterator(vals.len(), vals.iter().map(|&v| cx(f(v), 0.0))));
    &vecs * d * vecs.adjoint()
}

pub fn entropy(m: &M) -> f64 {
    eigh(m).0.iter().filter(|&&v| v > 1e-15).map(|&v| -v * v.ln()).sum()
}

/// `tr rho (log rho - log sigma)`, sigma assumed positive definite.
pub fn rel_entropy(rho: &M, sigma: &M) -> f64 {
    let log_sigma = fun(sigma, f64::ln);
    -entropy(rho) - tr(&(rho * log_sigma)).re
}

pub fn expm_normalized(h: &M) -> M {
    let top = eigh(h).0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e = fun(h, |v| (v - top).exp());
    let z = tr(&e).re;
    e.unscale(z)
}

/// `log tr e^h`.
pub fn log_tr_exp(h: &M) -> f64 {
    let vals = eigh(h).0;
    let top = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    top + vals.iter().map(|v| (v - top).exp()).sum::<f64>().ln()
}

/// Partial trace keeping the units in `keep` (unit 0 most significant).
pub fn ptrace(m: &M, dims: &[usize], keep: &[usize]) -> M {
    let n = dims.len();
    let kd: usize = keep.iter().map(|&i| dims[i]).product();
    let total: usize = dims.iter().product();
    let digits = |mut x: usize| {
        let mut d = vec![0; n];
        for i in (0..n).rev() {
            d[i] = x % dims[i];
            x /= dims[i];
        }
        d
    };
    let sub = |d: &[usize]| keep.iter().fold(0, |acc, &i| acc * dims[i] + d[i]);
    let mut out = M::zeros(kd, kd);
    for r in 0..total {
        let dr = digits(r);
        for s in 0..total {
            let ds = digits(s);
            if (0..n).all(|i| keep.contains(&i) || dr[i] == ds[i]) {
                out[(sub(&dr), sub(&ds))] += m[(r, s)];
            }
        }
    }
    out
}

pub fn multi_info(m: &M, dims: &[usize]) -> f64 {
    (0..dims.len()).map(|i| entropy(&ptrace(m, dims, &[i]))).sum::<f64>() - entropy(m)
}

pub fn rank(m: &M, tol: f64) -> usize {
    eigh(m).0.iter().filter(|&&v| v > tol).count()
}

pub fn diag_state(p: &[f64]) -> M {
    DMatrix::from_diagonal(&DVector::from_iterator(p.len(), p.iter().map(|&x| cx(x, 0.0))))
}

pub fn diag_of(m: &M) -> Vec<f64> {
    m.diagonal().iter().map(|z| z.re).collect()
}

/// `sum p log (p / q)` with the 0 log 0 convention; infinite if q vanishes on supp p.
pub fn kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| if b > 0.0 { a * (a / b).ln() } else { f64::INFINITY })
        .sum()
}

pub fn shannon(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

pub fn bits_of(x: usize, n: usize) -> Vec<usize> {
    (0..n).map(|i| x >> (n - 1 - i) & 1).collect()
}

/// Marginal of `p` on `set` for `n` bits, indexed by the sub-configuration.
pub fn bit_marginal(p: &[f64], n: usize, set: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; 1 << set.len()];
    for (x, &px) in p.iter().enumerate() {
        let b = bits_of(x, n);
        out[set.iter().fold(0, |acc, &i| acc * 2 + b[i])] += px;
    }
    out
}

/// Iterative proportional fitting on `n` bits from the uniform distribution,
/// matching the marginals of `target` on every set in `sets`.
pub fn ipf(target: &[f64], n: usize, sets: &[Vec<usize>], sweeps: usize, tol: f64) -> (Vec<f64>, usize) {
    let dim = 1 << n;
    let mut q = vec![1.0 / dim as f64; dim];
    let goals: Vec<Vec<f64>> = sets.iter().map(|s| bit_marginal(target, n, s)).collect();
    for sweep in 1..=sweeps {
        for (s, goal) in sets.iter().zip(&goals) {
            let cur = bit_marginal(&q, n, s);
            for (x, qx) in q.iter_mut().enumerate() {
                let b = bits_of(x, n);
                let y = s.iter().fold(0, |acc, &i| acc * 2 + b[i]);
                *qx = if cur[y] > 0.0 { *qx * goal[y] / cur[y] } else { 0.0 };
            }
        }
        let err = sets
            .iter()
            .zip(&goals)
            .map(|(s, g)| bit_marginal(&q, n, s).iter().zip(g).map(|(a, b)| (a - b).abs()).sum::<f64>())
            .fold(0.0, f64::max);
        if err <= tol {
            return (q, sweep);
        }
    }
    (q, sweeps)
}

pub fn pairs_of(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            out.push(vec![i, j]);
        }
    }
    out
}

pub fn singletons(n: usize) -> Vec<Vec<usize>> {
    (0..n).map(|i| vec![i]).collect()
}

/// Random complex Gaussian matrix.
pub fn ginibre<R: rand::Rng>(rows: usize, cols: usize, rng: &mut R) -> M {
    use rand_distr::StandardNormal;
    M::from_fn(rows, cols, |_, _| cx(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// `G G* / tr` with `G` of size `d x rank`.
pub fn mixed_state<R: rand::Rng>(d: usize, rank: usize, rng: &mut R) -> M {
    let g = ginibre(d, rank, rng);
    let m = &g * g.adjoint();
    let t = tr(&m).re;
    m.unscale(t)
}

pub fn pure_state<R: rand::Rng>(d: usize, rng: &mut R) -> Vec<C> {
    let g = ginibre(d, 1, rng);
    let norm = g.norm();
    g.iter().map(|z| z / norm).collect()
}

pub fn rng(seed: u64) -> rand_chacha::ChaCha20Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha20Rng::seed_from_u64(seed)
}
