//! Dense complex matrix helpers built on `nalgebra`.
//!
//! Every matrix function in the crate goes through a Hermitian
//! eigendecomposition ([`Spectrum`]). Exactly diagonal inputs, which is what
//! classical states and observables look like, skip the eigensolver and keep
//! their configuration order.

use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Kronecker product; dimensions multiply.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn trace(a: &CMatrix) -> C64 {
    a.trace()
}

/// Hilbert-Schmidt inner product `tr(a b*)`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum()
}

pub fn hs_norm(a: &CMatrix) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `tr(a b)` for Hermitian `b`, real part only. Cheaper than forming the product.
pub fn trace_product_re(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let x = a[(i, j)] * b[(j, i)];
            acc += x.re;
        }
    }
    acc
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

pub fn is_exactly_diagonal(a: &CMatrix) -> bool {
    let n = a.nrows();
    (0..n).all(|i| (0..n).all(|j| i == j || a[(i, j)] == ZERO))
}

pub fn diag(values: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| c(v, 0.0)),
    ))
}

/// Eigendecomposition `a = V diag(values) V*` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    /// `None` means the eigenvectors are the standard basis.
    pub vectors: Option<CMatrix>,
}

impl Spectrum {
    pub fn of(a: &CMatrix) -> Spectrum {
        if is_exactly_diagonal(a) {
            return Spectrum {
                values: (0..a.nrows()).map(|i| a[(i, i)].re).collect(),
                vectors: None,
            };
        }
        let eig = hermitian_part(a).symmetric_eigen();
        Spectrum {
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: Some(eig.eigenvectors),
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Column `k` of the eigenvector matrix.
    pub fn vector(&self, k: usize) -> DVector<C64> {
        match &self.vectors {
            Some(v) => v.column(k).into_owned(),
            None => {
                let mut e = DVector::from_element(self.dim(), ZERO);
                e[k] = ONE;
                e
            }
        }
    }

    /// `f(a) = V diag(f(values)) V*`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        self.apply_selected(|_, v| f(v))
    }

    /// Like [`Spectrum::apply`], the closure also receiving the eigen-index.
    pub fn apply_selected(&self, f: impl Fn(usize, f64) -> f64) -> CMatrix {
        let fv: Vec<f64> = self
            .values
            .iter()
            .enumerate()
            .map(|(k, &v)| f(k, v))
            .collect();
        match &self.vectors {
            None => diag(&fv),
            Some(v) => {
                let mut scaled = v.clone();
                for (k, &w) in fv.iter().enumerate() {
                    scaled.column_mut(k).scale_mut(w);
                }
                &scaled * v.adjoint()
            }
        }
    }

    /// `V* x V`, the matrix `x` written in the eigenbasis.
    pub fn to_eigenbasis(&self, x: &CMatrix) -> CMatrix {
        match &self.vectors {
            None => x.clone(),
            Some(v) => v.adjoint() * x * v,
        }
    }

    /// Quadratic form `<v_k, x v_k>` for every eigenvector.
    pub fn diagonal_in_eigenbasis(&self, x: &CMatrix) -> Vec<f64> {
        match &self.vectors {
            None => (0..self.dim()).map(|i| x[(i, i)].re).collect(),
            Some(v) => (0..self.dim())
                .map(|k| {
                    let col = v.column(k);
                    (col.adjoint() * x * col)[(0, 0)].re
                })
                .collect(),
        }
    }

    /// Projector onto the span of the eigenvectors whose values pass `keep`.
    pub fn projector(&self, keep: impl Fn(f64) -> bool) -> CMatrix {
        self.apply(|v| if keep(v) { 1.0 } else { 0.0 })
    }

    /// Isometry `d x r` whose columns are the eigenvectors selected by `keep`.
    pub fn isometry(&self, keep: impl Fn(f64) -> bool) -> CMatrix {
        let idx: Vec<usize> = (0..self.dim()).filter(|&k| keep(self.values[k])).collect();
        let mut q = CMatrix::zeros(self.dim(), idx.len());
        for (col, &k) in idx.iter().enumerate() {
            q.set_column(col, &self.vector(k));
        }
        q
    }
}

/// `-sum p log p` over a spectrum, with `0 log 0 = 0` and values clipped to `[0, 1]`.
pub fn spectral_entropy(values: &[f64]) -> f64 {
    values
        .iter()
        .map(|&v| v.clamp(0.0, 1.0))
        .filter(|&v| v > 0.0)
        .map(|v| -v * v.ln())
        .sum()
}

/// `log sum exp` of a slice.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Divided difference `(e^a - e^b) / (a - b)` for `a, b <= 0`.
pub fn exp_divided_difference(a: f64, b: f64) -> f64 {
    let d = a - b;
    if d.abs() < 1e-6 {
        let m = 0.5 * (a + b);
        m.exp() * (1.0 + d * d / 24.0)
    } else {
        (a.exp() - b.exp()) / d
    }
}

/// Divided difference `(log a - log b) / (a - b)` for `a, b > 0`.
pub fn log_divided_difference(a: f64, b: f64) -> f64 {
    let d = a - b;
    let m = 0.5 * (a + b);
    if d.abs() < 1e-6 * m {
        let r = d / m;
        (1.0 + r * r / 12.0) / m
    } else {
        (a.ln() - b.ln()) / d
    }
}

/// Real coordinates of a Hermitian `n x n` matrix under an isometry onto `R^{n^2}`.
/// Hilbert-Schmidt inner products are preserved: `<a, b> = vec(a) . vec(b)`.
pub fn hermitian_to_real(a: &CMatrix) -> DVector<f64> {
    let n = a.nrows();
    let mut out = DVector::zeros(n * n);
    let s2 = std::f64::consts::SQRT_2;
    let mut k = 0;
    for i in 0..n {
        out[k] = a[(i, i)].re;
        k += 1;
        for j in (i + 1)..n {
            out[k] = s2 * a[(i, j)].re;
            out[k + 1] = s2 * a[(i, j)].im;
            k += 2;
        }
    }
    out
}

pub fn real_to_hermitian(v: &DVector<f64>, n: usize) -> CMatrix {
    let mut a = CMatrix::zeros(n, n);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut k = 0;
    for i in 0..n {
        a[(i, i)] = c(v[k], 0.0);
        k += 1;
        for j in (i + 1)..n {
            let z = c(s * v[k], s * v[k + 1]);
            a[(i, j)] = z;
            a[(j, i)] = z.conj();
            k += 2;
        }
    }
    a
}

/// Modified Gram-Schmidt over real vectors; drops vectors whose residual norm
/// falls below `tol`. Returns an orthonormal list spanning the input.
pub fn orthonormalize(vectors: &[DVector<f64>], tol: f64) -> Vec<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dot(&w);
                w.axpy(-proj, b, 1.0);
            }
        }
        let norm = w.norm();
        if norm > tol {
            basis.push(w / norm);
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_with_scalar_identity_is_identity_map() {
        let m = CMatrix::from_fn(3, 3, |i, j| c(i as f64, j as f64));
        assert_eq!(kron(&identity(1), &m), m);
    }

    #[test]
    fn spectrum_reconstructs_matrix() {
        let a = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)]);
        let s = Spectrum::of(&a);
        let back = s.apply(|x| x);
        assert!(hs_norm(&(back - &a)) < 1e-12);
        assert!(s.vectors.is_some());
    }

    #[test]
    fn diagonal_fast_path_keeps_order() {
        let a = diag(&[0.1, 0.7, 0.2]);
        let s = Spectrum::of(&a);
        assert!(s.vectors.is_none());
        assert_eq!(s.values, vec![0.1, 0.7, 0.2]);
    }

    #[test]
    fn real_vectorization_is_an_isometry() {
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.3, -0.2), c(0.3, 0.2), c(-0.5, 0.0)]);
        let b = CMatrix::from_row_slice(2, 2, &[c(0.2, 0.0), c(-1.0, 0.4), c(-1.0, -0.4), c(0.7, 0.0)]);
        let lhs = hs_inner(&a, &b).re;
        let rhs = hermitian_to_real(&a).dot(&hermitian_to_real(&b));
        assert!((lhs - rhs).abs() < 1e-14);
        let back = real_to_hermitian(&hermitian_to_real(&a), 2);
        assert!(hs_norm(&(back - a)) < 1e-15);
    }

    #[test]
    fn divided_differences_match_derivatives_at_coincidence() {
        assert!((exp_divided_difference(-0.3, -0.3) - (-0.3f64).exp()).abs() < 1e-15);
        assert!((log_divided_difference(0.25, 0.25) - 4.0).abs() < 1e-12);
        let (a, b) = (-1.0f64, -2.5f64);
        assert!((exp_divided_difference(a, b) - (a.exp() - b.exp()) / (a - b)).abs() < 1e-15);
    }
}
