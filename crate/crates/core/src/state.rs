//! States and observables on a composite system, with the information
//! quantities built from their spectra.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{self, c, hermitian_defect, spectral_entropy, CMatrix, Spectrum, C64, ONE, ZERO};
use crate::shape::{SystemShape, UnitSet};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
/// Relative eigenvalue threshold defining the kernel of the second argument of [`relative_entropy`].
pub const KERNEL_REL_TOL: f64 = 1e-10;
/// Mass of the first argument on that kernel which makes the divergence infinite.
pub const KERNEL_MASS_TOL: f64 = 1e-10;

/// Positive semidefinite, unit-trace matrix in the algebra of `shape`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    shape: SystemShape,
    matrix: CMatrix,
}

/// Self-adjoint element of the algebra of `shape`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianObservable {
    shape: SystemShape,
    matrix: CMatrix,
}

fn check_dims(shape: &SystemShape, m: &CMatrix) -> Result<()> {
    let d = shape.dim();
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: m.nrows().max(m.ncols()),
        });
    }
    Ok(())
}

fn algebra_defect(shape: &SystemShape, m: &CMatrix) -> f64 {
    if shape.is_quantum() {
        return 0.0;
    }
    let d = shape.dim();
    let mut worst: f64 = 0.0;
    for r in 0..d {
        for col in 0..d {
            if !shape.entry_in_algebra(r, col) {
                worst = worst.max(m[(r, col)].norm());
            }
        }
    }
    worst
}

/// Conditional expectation onto the algebra of `shape`: zero every entry that
/// couples different classical configurations.
pub fn pinch(shape: &SystemShape, m: &CMatrix) -> CMatrix {
    if shape.is_quantum() {
        return m.clone();
    }
    let d = shape.dim();
    CMatrix::from_fn(d, d, |r, col| {
        if shape.entry_in_algebra(r, col) {
            m[(r, col)]
        } else {
            ZERO
        }
    })
}

impl DensityMatrix {
    /// Validates Hermiticity, algebra membership, trace and positivity.
    pub fn new(shape: SystemShape, matrix: CMatrix) -> Result<Self> {
        check_dims(&shape, &matrix)?;
        let herm = hermitian_defect(&matrix);
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let off = algebra_defect(&shape, &matrix);
        if off > HERMITIAN_TOL {
            return Err(Error::NotInAlgebra(off));
        }
        let tr = linalg::trace(&matrix).re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::BadTrace(tr));
        }
        let min = Spectrum::of(&matrix).min();
        if min < -PSD_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(DensityMatrix { shape, matrix })
    }

    /// Builds a state from solver output: symmetrizes, pinches into the
    /// algebra, clips negative eigenvalues and renormalizes.
    pub fn from_numerical(shape: SystemShape, matrix: &CMatrix) -> Result<Self> {
        check_dims(&shape, matrix)?;
        let h = pinch(&shape, &linalg::hermitian_part(matrix));
        let s = Spectrum::of(&h);
        let m = if s.min() < 0.0 { s.apply(|v| v.max(0.0)) } else { h };
        let tr = linalg::trace(&m).re;
        if !(tr > 0.0) || !tr.is_finite() {
            return Err(Error::BadTrace(tr));
        }
        Ok(DensityMatrix {
            shape,
            matrix: m.unscale(tr),
        })
    }

    pub fn from_probabilities(shape: SystemShape, p: &[f64]) -> Result<Self> {
        if p.len() != shape.dim() {
            return Err(Error::DimensionMismatch {
                expected: shape.dim(),
                found: p.len(),
            });
        }
        if let Some((i, &v)) = p.iter().enumerate().find(|(_, &v)| v < 0.0 || !v.is_finite()) {
            return Err(Error::NegativeEntry { index: i, value: v });
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > TRACE_TOL {
            return Err(Error::BadTrace(sum));
        }
        Ok(DensityMatrix {
            shape,
            matrix: linalg::diag(p),
        })
    }

    /// `|psi><psi|` for a (not necessarily normalized) vector.
    pub fn from_pure(shape: SystemShape, psi: &[C64]) -> Result<Self> {
        if psi.len() != shape.dim() {
            return Err(Error::DimensionMismatch {
                expected: shape.dim(),
                found: psi.len(),
            });
        }
        let v = DVector::from_column_slice(psi);
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::BadTrace(0.0));
        }
        let v = v.unscale(norm);
        Self::new(shape, &v * v.adjoint())
    }

    pub fn maximally_mixed(shape: SystemShape) -> Self {
        let d = shape.dim();
        DensityMatrix {
            shape,
            matrix: linalg::identity(d).unscale(d as f64),
        }
    }

    /// Tensor product of single-unit (or multi-unit) factors, in order.
    pub fn product(factors: &[DensityMatrix]) -> Result<Self> {
        let mut sizes = Vec::new();
        let mut kinds = Vec::new();
        let mut m = linalg::identity(1);
        for f in factors {
            sizes.extend_from_slice(f.shape.sizes());
            kinds.extend_from_slice(f.shape.kinds());
            m = tensor(&m, &f.matrix);
        }
        Ok(DensityMatrix {
            shape: SystemShape::new(sizes, kinds)?,
            matrix: m,
        })
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    /// Diagonal of the matrix; the probability vector for classical shapes.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum::of(&self.matrix)
    }

    /// Number of eigenvalues above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.spectrum().values.iter().filter(|&&v| v > tol).count()
    }

    /// Expectation `<a, rho> = tr(rho a)` of a Hermitian matrix.
    pub fn expectation(&self, a: &CMatrix) -> f64 {
        linalg::trace_product_re(&self.matrix, a)
    }

    pub fn marginal(&self, nu: UnitSet) -> Result<DensityMatrix> {
        let shape = self.shape.restrict(nu)?;
        Ok(DensityMatrix {
            matrix: partial_trace_keep(&self.shape, &self.matrix, nu),
            shape,
        })
    }

    /// Product of the single-unit marginals.
    pub fn product_of_marginals(&self) -> Result<DensityMatrix> {
        let factors = (0..self.shape.n_units())
            .map(|i| self.marginal(UnitSet::singleton(i)))
            .collect::<Result<Vec<_>>>()?;
        Self::product(&factors)
    }

    pub fn distance(&self, other: &DensityMatrix) -> f64 {
        linalg::hs_norm(&(&self.matrix - &other.matrix))
    }

    /// Half the trace norm of the difference.
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        let s = Spectrum::of(&(&self.matrix - &other.matrix));
        0.5 * s.values.iter().map(|v| v.abs()).sum::<f64>()
    }
}

impl HermitianObservable {
    pub fn new(shape: SystemShape, matrix: CMatrix) -> Result<Self> {
        check_dims(&shape, &matrix)?;
        let herm = hermitian_defect(&matrix);
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let off = algebra_defect(&shape, &matrix);
        if off > HERMITIAN_TOL {
            return Err(Error::NotInAlgebra(off));
        }
        Ok(HermitianObservable { shape, matrix })
    }

    pub fn zero(shape: SystemShape) -> Self {
        let d = shape.dim();
        HermitianObservable {
            shape,
            matrix: CMatrix::zeros(d, d),
        }
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `a + shift * 1`.
    pub fn shifted(&self, shift: f64) -> Self {
        let d = self.shape.dim();
        HermitianObservable {
            shape: self.shape.clone(),
            matrix: &self.matrix + linalg::identity(d).scale(shift),
        }
    }
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    linalg::kron(a, b)
}

/// Partial trace keeping the units in `keep`, for a matrix laid out per `shape`.
pub fn partial_trace_keep(shape: &SystemShape, m: &CMatrix, keep: UnitSet) -> CMatrix {
    let n = shape.n_units();
    let traced = UnitSet::full(n).intersection(UnitSet(!keep.0));
    let dk: usize = keep.iter().map(|i| shape.size(i)).product();
    let dt: usize = traced.iter().map(|i| shape.size(i)).product();
    // full index = f(kept digits, traced digits); precompute offsets
    let kept_units = keep.to_vec();
    let traced_units = traced.to_vec();
    let stride: Vec<usize> = (0..n)
        .map(|i| shape.sizes()[i + 1..].iter().product())
        .collect();
    let offsets = |units: &[usize], count: usize| -> Vec<usize> {
        (0..count)
            .map(|mut idx| {
                let mut off = 0;
                for &u in units.iter().rev() {
                    off += (idx % shape.size(u)) * stride[u];
                    idx /= shape.size(u);
                }
                off
            })
            .collect()
    };
    let kept_off = offsets(&kept_units, dk);
    let traced_off = offsets(&traced_units, dt);
    let mut out = CMatrix::zeros(dk, dk);
    for a in 0..dk {
        for b in 0..dk {
            let mut acc = ZERO;
            for &t in &traced_off {
                acc += m[(kept_off[a] + t, kept_off[b] + t)];
            }
            out[(a, b)] = acc;
        }
    }
    out
}

/// `H(rho) = -tr rho log rho` in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    spectral_entropy(&rho.spectrum().values)
}

/// Umegaki relative entropy `D(rho, sigma)`; `+inf` when the kernel of
/// `sigma` is not contained in the kernel of `rho`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.shape != sigma.shape {
        return Err(Error::ShapeMismatch);
    }
    let ss = sigma.spectrum();
    let cutoff = KERNEL_REL_TOL * ss.max();
    let weights = ss.diagonal_in_eigenbasis(&rho.matrix);
    let mut cross = 0.0;
    for (&lam, &w) in ss.values.iter().zip(&weights) {
        if lam <= cutoff {
            if w > KERNEL_MASS_TOL {
                return Ok(f64::INFINITY);
            }
        } else {
            cross += w * lam.ln();
        }
    }
    let d = -von_neumann_entropy(rho) - cross;
    Ok(if d < 0.0 && d > -1e-10 { 0.0 } else { d })
}

/// `R(a) = e^a / tr e^a`, evaluated on the centered spectrum.
pub fn gibbs_map(a: &HermitianObservable) -> DensityMatrix {
    let s = Spectrum::of(&a.matrix);
    let m = s.max();
    let z: f64 = s.values.iter().map(|v| (v - m).exp()).sum();
    DensityMatrix {
        shape: a.shape.clone(),
        matrix: linalg::hermitian_part(&s.apply(|v| (v - m).exp() / z)),
    }
}

/// `log tr e^a`.
pub fn log_partition(a: &CMatrix) -> f64 {
    linalg::log_sum_exp(&Spectrum::of(a).values)
}

/// Matrix logarithm on the support (eigenvalues above `tol`), zero elsewhere.
pub fn support_log(rho: &DensityMatrix, tol: f64) -> CMatrix {
    rho.spectrum()
        .apply(|v| if v > tol { v.ln() } else { 0.0 })
}

/// Bell state `(|00> + |11>)/sqrt 2` on two qubits.
pub fn bell_state() -> DensityMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DensityMatrix::from_pure(SystemShape::qubits(2), &[c(s, 0.0), ZERO, ZERO, c(s, 0.0)])
        .expect("Bell state")
}

/// `(|0..0> + |1..1>)/sqrt 2` on `n` qubits.
pub fn ghz_state(n: usize) -> DensityMatrix {
    let shape = SystemShape::qubits(n);
    let d = shape.dim();
    let mut psi = vec![ZERO; d];
    psi[0] = ONE;
    psi[d - 1] = ONE;
    DensityMatrix::from_pure(shape, &psi).expect("GHZ state")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hs_norm;

    fn basis_pure(shape: SystemShape, k: usize) -> DensityMatrix {
        let mut psi = vec![ZERO; shape.dim()];
        psi[k] = ONE;
        DensityMatrix::from_pure(shape, &psi).unwrap()
    }

    #[test]
    fn validation_rejects_bad_inputs() {
        let s = SystemShape::qubits(1);
        let not_herm = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), ZERO, c(0.5, 0.0)]);
        assert!(matches!(DensityMatrix::new(s.clone(), not_herm), Err(Error::NotHermitian(_))));
        let bad_trace = linalg::diag(&[0.5, 0.6]);
        assert!(matches!(DensityMatrix::new(s.clone(), bad_trace), Err(Error::BadTrace(_))));
        let negative = linalg::diag(&[1.5, -0.5]);
        assert!(matches!(DensityMatrix::new(s.clone(), negative), Err(Error::NotPositive(_))));
        let cl = SystemShape::bits(1);
        let coherent = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0)]);
        assert!(matches!(DensityMatrix::new(cl, coherent), Err(Error::NotInAlgebra(_))));
    }

    #[test]
    fn marginal_of_bell_state_is_maximally_mixed() {
        let m = bell_state().marginal(UnitSet::singleton(0)).unwrap();
        assert!(hs_norm(&(m.matrix() - linalg::identity(2).scale(0.5))) < 1e-15);
    }

    #[test]
    fn marginal_of_ghz_pair() {
        let m = ghz_state(3).marginal(UnitSet::from_indices([0, 1])).unwrap();
        let expected = linalg::diag(&[0.5, 0.0, 0.0, 0.5]);
        assert!(hs_norm(&(m.matrix() - expected)) < 1e-15);
    }

    #[test]
    fn empty_marginal_is_scalar_one() {
        let m = ghz_state(2).marginal(UnitSet::EMPTY).unwrap();
        assert_eq!(m.dim(), 1);
        assert!((m.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn marginal_rejects_out_of_range_unit() {
        let err = ghz_state(2).marginal(UnitSet::singleton(2)).unwrap_err();
        assert!(matches!(err, Error::InvalidSubsystem { index: 2, .. }));
    }

    #[test]
    fn entropy_examples() {
        assert!(von_neumann_entropy(&bell_state()).abs() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(SystemShape::qubits(3));
        assert!((von_neumann_entropy(&mixed) - 8f64.ln()).abs() < 1e-12);
        let half = DensityMatrix::from_probabilities(SystemShape::bits(2), &[0.5, 0.5, 0.0, 0.0]).unwrap();
        assert!((von_neumann_entropy(&half) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn relative_entropy_examples() {
        let pure = basis_pure(SystemShape::qubits(2), 1);
        let mixed = DensityMatrix::maximally_mixed(SystemShape::qubits(2));
        assert!((relative_entropy(&pure, &mixed).unwrap() - 4f64.ln()).abs() < 1e-12);
        assert_eq!(relative_entropy(&pure, &pure).unwrap(), 0.0);
        let half = DensityMatrix::maximally_mixed(SystemShape::qubits(1));
        let zero = basis_pure(SystemShape::qubits(1), 0);
        assert_eq!(relative_entropy(&half, &zero).unwrap(), f64::INFINITY);
        assert!(matches!(relative_entropy(&half, &pure), Err(Error::ShapeMismatch)));
    }

    #[test]
    fn gibbs_map_examples() {
        let s = SystemShape::qubits(1);
        let zero = HermitianObservable::zero(s.clone());
        let r = gibbs_map(&zero);
        assert!(hs_norm(&(r.matrix() - linalg::identity(2).scale(0.5))) < 1e-15);
        let a = HermitianObservable::new(s, linalg::diag(&[3f64.ln(), 0.0])).unwrap();
        let r = gibbs_map(&a);
        assert!(hs_norm(&(r.matrix() - linalg::diag(&[0.75, 0.25]))) < 1e-15);
    }

    #[test]
    fn tensor_of_maximally_mixed() {
        let h = linalg::identity(2).scale(0.5);
        assert!(hs_norm(&(tensor(&h, &h) - linalg::identity(4).scale(0.25))) < 1e-15);
    }
}
