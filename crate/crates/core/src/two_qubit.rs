//! Bell-diagonal two-qubit states `rho = (1 + sum_i t_i sigma_i (x) sigma_i) / 4`.
//!
//! The Bell basis is `psi_1 = (|00> + |11>)/sqrt 2`, `psi_2 = (|00> - |11>)/sqrt 2`,
//! `psi_3 = (|01> + |10>)/sqrt 2`, `psi_4 = (|01> - |10>)/sqrt 2`. Writing
//! `s_i` for the correlation vector of `psi_i`, the eigenvalues are
//! `lambda_i = (1 + s_i . t) / 4` and `t = sum_i lambda_i s_i`. The sign
//! vectors are computed from the Bell vectors, not tabulated.

use std::f64::consts::{FRAC_1_SQRT_2, LN_2};
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, kron, CMatrix, Spectrum, C64, I, ONE, ZERO};
use crate::random;
use crate::shape::SystemShape;
use crate::state::DensityMatrix;

/// Tolerance on `lambda >= 0`, `sum lambda = 1` and the separability tests.
pub const PHYSICAL_TOL: f64 = 1e-12;
/// `|t_j|` below this counts as zero in the classical-correlation test.
pub const WITNESS_TOL: f64 = 1e-10;

/// Pauli matrix `sigma_j` for `j = 1, 2, 3`.
pub fn pauli(j: usize) -> CMatrix {
    let m = match j {
        1 => [ZERO, ONE, ONE, ZERO],
        2 => [ZERO, -I, I, ZERO],
        3 => [ONE, ZERO, ZERO, -ONE],
        _ => panic!("Pauli index {j} outside 1..=3"),
    };
    CMatrix::from_row_slice(2, 2, &m)
}

/// The Bell vectors `psi_1 .. psi_4` in the order of the module docs.
pub fn bell_vectors() -> [[C64; 4]; 4] {
    let s = c(FRAC_1_SQRT_2, 0.0);
    [
        [s, ZERO, ZERO, s],
        [s, ZERO, ZERO, -s],
        [ZERO, s, s, ZERO],
        [ZERO, s, -s, ZERO],
    ]
}

fn projector(v: &[C64]) -> CMatrix {
    let col = CMatrix::from_column_slice(v.len(), 1, v);
    &col * col.adjoint()
}

fn correlation_operator(j: usize) -> CMatrix {
    let p = pauli(j);
    kron(&p, &p)
}

/// `s[i][j] = <psi_i| sigma_j (x) sigma_j |psi_i>`, each entry `+1` or `-1`.
pub fn sign_vectors() -> [[f64; 3]; 4] {
    let mut out = [[0.0; 3]; 4];
    let ops: Vec<CMatrix> = (1..=3).map(correlation_operator).collect();
    for (i, v) in bell_vectors().iter().enumerate() {
        let p = projector(v);
        for (j, op) in ops.iter().enumerate() {
            out[i][j] = (p.clone() * op).trace().re.round();
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BellDiagonal {
    pub t: [f64; 3],
    pub lambda: [f64; 4],
}

pub fn bell_from_t(t: [f64; 3]) -> Result<BellDiagonal> {
    let s = sign_vectors();
    let mut lambda = [0.0; 4];
    for i in 0..4 {
        let l = 0.25 * (1.0 + (0..3).map(|j| s[i][j] * t[j]).sum::<f64>());
        if l < -PHYSICAL_TOL {
            return Err(Error::NonPhysical(format!("t = {t:?} gives lambda_{} = {l:.3e}", i + 1)));
        }
        lambda[i] = l.max(0.0);
    }
    Ok(BellDiagonal { t, lambda })
}

pub fn bell_from_lambda(lambda: [f64; 4]) -> Result<BellDiagonal> {
    if let Some(i) = lambda.iter().position(|&l| l < -PHYSICAL_TOL || !l.is_finite()) {
        return Err(Error::NegativeEntry {
            index: i,
            value: lambda[i],
        });
    }
    let sum: f64 = lambda.iter().sum();
    if (sum - 1.0).abs() > PHYSICAL_TOL {
        return Err(Error::Unnormalized(sum));
    }
    let s = sign_vectors();
    let mut t = [0.0; 3];
    for (j, tj) in t.iter_mut().enumerate() {
        *tj = (0..4).map(|i| lambda[i] * s[i][j]).sum();
    }
    Ok(BellDiagonal {
        t,
        lambda: lambda.map(|l| l.max(0.0)),
    })
}

impl BellDiagonal {
    /// `(1 + sum_i t_i sigma_i (x) sigma_i) / 4`.
    pub fn matrix(&self) -> CMatrix {
        let mut m = CMatrix::identity(4, 4);
        for j in 0..3 {
            m += correlation_operator(j + 1).scale(self.t[j]);
        }
        m.scale(0.25)
    }

    /// `sum_i lambda_i |psi_i><psi_i|`.
    pub fn matrix_from_lambda(&self) -> CMatrix {
        bell_vectors()
            .iter()
            .zip(&self.lambda)
            .fold(CMatrix::zeros(4, 4), |acc, (v, &l)| acc + projector(v).scale(l))
    }

    pub fn density(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(SystemShape::qubits(2), self.matrix())
    }
}

/// `max lambda_i <= 1/2`.
pub fn is_separable(b: &BellDiagonal) -> bool {
    b.lambda.iter().all(|&l| l <= 0.5 + PHYSICAL_TOL)
}

/// `|t_1| + |t_2| + |t_3| <= 1`, the octahedron form of the same criterion.
pub fn is_separable_by_t(b: &BellDiagonal) -> bool {
    b.t.iter().map(|x| x.abs()).sum::<f64>() <= 1.0 + PHYSICAL_TOL
}

/// `I = 2 log 2 - H(lambda)`: both marginals are maximally mixed.
pub fn mutual_information_bd(b: &BellDiagonal) -> f64 {
    2.0 * LN_2 - crate::linalg::spectral_entropy(&b.lambda)
}

/// Named single-qubit basis vectors used in product forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Ket {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
    #[serde(rename = "0'")]
    ZeroPrime,
    #[serde(rename = "1'")]
    OnePrime,
}

impl Ket {
    pub fn vector(self) -> [C64; 2] {
        let s = FRAC_1_SQRT_2;
        match self {
            Ket::Zero => [ONE, ZERO],
            Ket::One => [ZERO, ONE],
            Ket::Plus => [c(s, 0.0), c(s, 0.0)],
            Ket::Minus => [c(s, 0.0), c(-s, 0.0)],
            Ket::ZeroPrime => [c(s, 0.0), c(0.0, s)],
            Ket::OnePrime => [c(s, 0.0), c(0.0, -s)],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Ket::Zero => "0",
            Ket::One => "1",
            Ket::Plus => "+",
            Ket::Minus => "-",
            Ket::ZeroPrime => "0'",
            Ket::OnePrime => "1'",
        }
    }
}

/// `(|a1><a1| (x) |b1><b1| + |a2><a2| (x) |b2><b2|) / 2` for the Bell pair `(i, j)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ProductForm {
    pub pair: (usize, usize),
    pub terms: [(Ket, Ket); 2],
}

impl ProductForm {
    pub fn matrix(&self) -> CMatrix {
        self.terms.iter().fold(CMatrix::zeros(4, 4), |acc, (a, b)| {
            let v: Vec<C64> = {
                let (a, b) = (a.vector(), b.vector());
                vec![a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
            };
            acc + projector(&v).scale(0.5)
        })
    }

    /// Local unitaries `(U_A, U_B)` mapping `|0>, |1>` to the first and second
    /// term's vectors, so that `(U_A (x) U_B) rho_0 (U_A (x) U_B)*` gives this
    /// form from `rho_0 = (|00><00| + |11><11|) / 2`.
    pub fn local_unitaries(&self) -> (CMatrix, CMatrix) {
        let cols = |x: Ket, y: Ket| {
            let (x, y) = (x.vector(), y.vector());
            CMatrix::from_row_slice(2, 2, &[x[0], y[0], x[1], y[1]])
        };
        let [(a1, b1), (a2, b2)] = self.terms;
        (cols(a1, a2), cols(b1, b2))
    }
}

/// The six product forms of the separable extreme points.
pub fn product_forms() -> [ProductForm; 6] {
    use Ket::*;
    [
        ProductForm { pair: (1, 2), terms: [(Zero, Zero), (One, One)] },
        ProductForm { pair: (1, 3), terms: [(Plus, Plus), (Minus, Minus)] },
        ProductForm { pair: (1, 4), terms: [(ZeroPrime, OnePrime), (OnePrime, ZeroPrime)] },
        ProductForm { pair: (2, 3), terms: [(OnePrime, OnePrime), (ZeroPrime, ZeroPrime)] },
        ProductForm { pair: (2, 4), terms: [(Minus, Plus), (Plus, Minus)] },
        ProductForm { pair: (3, 4), terms: [(Zero, One), (One, Zero)] },
    ]
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExtremePoint {
    /// One-based Bell indices `(i, j)` of `(|psi_i><psi_i| + |psi_j><psi_j|) / 2`.
    pub pair: (usize, usize),
    pub state: BellDiagonal,
}

/// The six states `(|psi_i><psi_i| + |psi_j><psi_j|) / 2`, `i < j`.
pub fn separable_extreme_points() -> Vec<ExtremePoint> {
    let mut out = Vec::with_capacity(6);
    for i in 0..4 {
        for j in (i + 1)..4 {
            let mut lambda = [0.0; 4];
            lambda[i] = 0.5;
            lambda[j] = 0.5;
            out.push(ExtremePoint {
                pair: (i + 1, j + 1),
                state: bell_from_lambda(lambda).expect("valid weights"),
            });
        }
    }
    out
}

/// A local product basis diagonalizing a state.
#[derive(Clone, Debug, Serialize)]
pub struct ProductWitness {
    /// Pauli axis whose eigenbasis is used on both qubits; `None` means the computational basis.
    pub axis: Option<usize>,
    pub basis_a: [Ket; 2],
    pub basis_b: [Ket; 2],
    /// Largest off-diagonal entry of the state in the product basis.
    pub off_diagonal: f64,
}

fn axis_basis(axis: Option<usize>) -> [Ket; 2] {
    match axis {
        Some(1) => [Ket::Plus, Ket::Minus],
        Some(2) => [Ket::ZeroPrime, Ket::OnePrime],
        _ => [Ket::Zero, Ket::One],
    }
}

fn basis_unitary(b: [Ket; 2]) -> CMatrix {
    let (x, y) = (b[0].vector(), b[1].vector());
    CMatrix::from_row_slice(2, 2, &[x[0], y[0], x[1], y[1]])
}

fn witness_for(m: &CMatrix, axis: Option<usize>) -> ProductWitness {
    let basis = axis_basis(axis);
    let u = kron(&basis_unitary(basis), &basis_unitary(basis));
    let r = u.adjoint() * m * &u;
    let mut off: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                off = off.max(r[(i, j)].norm());
            }
        }
    }
    ProductWitness {
        axis,
        basis_a: basis,
        basis_b: basis,
        off_diagonal: off,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassicalCorrelation {
    pub classical: bool,
    pub witness: Option<ProductWitness>,
}

/// At most one `t_j` is nonzero. The witness is the eigenbasis of that
/// `sigma_j` on both qubits, verified to diagonalize the state.
pub fn is_classically_correlated_bd(b: &BellDiagonal) -> ClassicalCorrelation {
    let nonzero: Vec<usize> = (0..3).filter(|&j| b.t[j].abs() > WITNESS_TOL).collect();
    if nonzero.len() > 1 {
        return ClassicalCorrelation {
            classical: false,
            witness: None,
        };
    }
    let axis = nonzero.first().map(|j| j + 1);
    let w = witness_for(&b.matrix(), axis);
    ClassicalCorrelation {
        classical: w.off_diagonal <= WITNESS_TOL,
        witness: Some(w),
    }
}

/// Smallest Schmidt coefficient squared of a two-qubit vector; zero for product vectors.
pub fn entanglement_of(v: &[C64]) -> f64 {
    let m = CMatrix::from_row_slice(2, 2, v);
    let r = &m * m.adjoint();
    Spectrum::of(&r).min().max(0.0)
}

/// Independent check: does the state have an eigenbasis of product vectors?
///
/// Non-degenerate eigenvectors are unique, so any entangled one rules a
/// product eigenbasis out. Otherwise the Pauli eigenbases on both qubits are
/// tried; for Bell-diagonal states a degenerate spectrum leaves no other
/// candidates up to phases.
pub fn product_eigenbasis_search(b: &BellDiagonal) -> Option<ProductWitness> {
    let m = b.matrix();
    let s = Spectrum::of(&m);
    for k in 0..4 {
        let degenerate = (0..4).any(|l| l != k && (s.values[l] - s.values[k]).abs() <= WITNESS_TOL);
        if !degenerate {
            let v: Vec<C64> = s.vector(k).iter().copied().collect();
            if entanglement_of(&v) > WITNESS_TOL {
                return None;
            }
        }
    }
    [None, Some(1), Some(2), Some(3)]
        .into_iter()
        .map(|axis| witness_for(&m, axis))
        .find(|w| w.off_diagonal <= WITNESS_TOL)
}

fn max_entry(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct VertexCheck {
    pub pair: (usize, usize),
    pub t: [f64; 3],
    pub lambda: [f64; 4],
    pub mutual_information: f64,
    pub attains_bound: bool,
    pub classically_correlated: bool,
    pub witness: Option<ProductWitness>,
    /// Largest entry of the difference to the displayed product form.
    pub product_form_defect: f64,
    /// Largest entry of `(U_A (x) U_B) rho_0 (U_A (x) U_B)* - rho`.
    pub local_unitary_defect: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem1Report {
    pub samples: usize,
    pub seed: u64,
    pub bound: f64,
    pub max_sampled: f64,
    pub max_sampled_t: [f64; 3],
    /// Sampled states with `I > log 2 + 1e-9`.
    pub violations: Vec<[f64; 3]>,
    pub vertices: Vec<VertexCheck>,
    pub passed: bool,
}

/// Uniform point of the octahedron `|t|_1 <= 1`, by rejection from the cube.
pub fn sample_separable_t<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let t: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..=1.0));
        if t.iter().map(|x: &f64| x.abs()).sum::<f64>() <= 1.0 {
            return t;
        }
    }
}

pub fn verify_theorem1(samples: usize, seed: u64) -> Result<Theorem1Report> {
    if samples == 0 {
        return Err(Error::OutOfRange("samples must be at least 1".into()));
    }
    let values: Vec<([f64; 3], f64)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let t = sample_separable_t(&mut random::rng(seed, i as u64));
            let b = bell_from_t(t)?;
            Ok((t, mutual_information_bd(&b)))
        })
        .collect::<Result<_>>()?;
    let (max_sampled_t, max_sampled) = values
        .iter()
        .copied()
        .fold(([0.0; 3], f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    let violations: Vec<[f64; 3]> = values
        .iter()
        .filter(|(_, i)| *i > LN_2 + 1e-9)
        .map(|(t, _)| *t)
        .collect();

    let reference = product_forms()[0].matrix();
    let vertices: Vec<VertexCheck> = separable_extreme_points()
        .iter()
        .zip(product_forms())
        .map(|(e, form)| {
            debug_assert_eq!(e.pair, form.pair);
            let m = e.state.matrix();
            let cc = is_classically_correlated_bd(&e.state);
            let (ua, ub) = form.local_unitaries();
            let u = kron(&ua, &ub);
            let mi = mutual_information_bd(&e.state);
            VertexCheck {
                pair: e.pair,
                t: e.state.t,
                lambda: e.state.lambda,
                mutual_information: mi,
                attains_bound: (mi - LN_2).abs() <= 1e-9,
                classically_correlated: cc.classical,
                witness: cc.witness,
                product_form_defect: max_entry(&(form.matrix() - &m)),
                local_unitary_defect: max_entry(&(&u * &reference * u.adjoint() - &m)),
            }
        })
        .collect();
    let passed = violations.is_empty()
        && vertices.iter().all(|v| {
            v.attains_bound && v.classically_correlated && v.product_form_defect <= 1e-12 && v.local_unitary_defect <= 1e-12
        });
    Ok(Theorem1Report {
        samples,
        seed,
        bound: LN_2,
        max_sampled,
        max_sampled_t,
        violations,
        vertices,
        passed,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GridPoint {
    pub t: [f64; 3],
    pub physical: bool,
    pub separable: bool,
    pub entangled: bool,
    pub mutual_information: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Fig1Geometry {
    /// Correlation vectors of the four Bell states.
    pub tetrahedron: Vec<[f64; 3]>,
    /// `+-e_i`, the separable extreme points.
    pub octahedron: Vec<[f64; 3]>,
    /// `t = 0`, the maximally mixed state: the only product state in the tetrahedron.
    pub center: [f64; 3],
    pub grid: Vec<GridPoint>,
}

/// Vertices and a `(grid + 1)^3` classification grid on `[-1, 1]^3`.
pub fn fig1_geometry_export(grid: usize) -> Result<Fig1Geometry> {
    if grid == 0 {
        return Err(Error::OutOfRange("grid must be at least 1".into()));
    }
    let tetrahedron: Vec<[f64; 3]> = (0..4)
        .map(|i| {
            let mut l = [0.0; 4];
            l[i] = 1.0;
            bell_from_lambda(l).expect("pure Bell state").t
        })
        .collect();
    let octahedron: Vec<[f64; 3]> = separable_extreme_points().iter().map(|e| e.state.t).collect();
    let coord = |i: usize| {
        let x = -1.0 + 2.0 * i as f64 / grid as f64;
        (x * 1e12).round() / 1e12
    };
    let mut points = Vec::with_capacity((grid + 1).pow(3));
    for i in 0..=grid {
        for j in 0..=grid {
            for k in 0..=grid {
                let t = [coord(i), coord(j), coord(k)];
                let p = match bell_from_t(t) {
                    Ok(b) => {
                        let sep = is_separable(&b);
                        GridPoint {
                            t,
                            physical: true,
                            separable: sep,
                            entangled: !sep,
                            mutual_information: Some(mutual_information_bd(&b)),
                        }
                    }
                    Err(_) => GridPoint {
                        t,
                        physical: false,
                        separable: false,
                        entangled: false,
                        mutual_information: None,
                    },
                };
                points.push(p);
            }
        }
    }
    Ok(Fig1Geometry {
        tetrahedron,
        octahedron,
        center: [0.0; 3],
        grid: points,
    })
}

impl Fig1Geometry {
    /// One row per vertex and grid point:
    /// `kind,t1,t2,t3,physical,separable,entangled,product,mutual_information`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,t1,t2,t3,physical,separable,entangled,product,mutual_information\n");
        let mut row = |kind: &str, t: [f64; 3], phys: bool, sep: bool, ent: bool, prod: bool, mi: Option<f64>| {
            let mi = mi.map(|v| format!("{v:.12}")).unwrap_or_default();
            let _ = writeln!(out, "{kind},{},{},{},{phys},{sep},{ent},{prod},{mi}", t[0], t[1], t[2]);
        };
        for &t in &self.tetrahedron {
            row("tetrahedron", t, true, false, true, false, Some(2.0 * LN_2));
        }
        for &t in &self.octahedron {
            row("octahedron", t, true, true, false, false, Some(LN_2));
        }
        row("center", self.center, true, true, false, true, Some(0.0));
        for p in &self.grid {
            row("grid", p.t, p.physical, p.separable, p.entangled, false, p.mutual_information);
        }
        out
    }
}
