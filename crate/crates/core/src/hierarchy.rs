//! Hypergraphs on the units and the hierarchical model subspaces they span.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::basis::{classical_unit_basis, quantum_unit_basis};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};
use crate::shape::{SystemShape, UnitKind, UnitSet};
use crate::state::DensityMatrix;

/// Downward-closed family of unit subsets covering all units.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypergraph {
    n_units: usize,
    /// Sorted by size, then by bitmask; always starts with the empty set.
    sets: Vec<UnitSet>,
}

fn sort_sets(sets: impl IntoIterator<Item = UnitSet>) -> Vec<UnitSet> {
    let mut v: Vec<UnitSet> = sets.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
    v.sort_by_key(|s| (s.len(), s.0));
    v
}

impl Hypergraph {
    /// Validates `sets` as a hypergraph on `n_units` units. With
    /// `generators = true` the input is read as maximal sets and closed downward.
    pub fn new(n_units: usize, sets: &[UnitSet], generators: bool) -> Result<Self> {
        if n_units == 0 {
            return Err(Error::InvalidHypergraph("no units".into()));
        }
        let full = UnitSet::full(n_units);
        if let Some(bad) = sets.iter().find(|s| !s.is_subset_of(full)) {
            return Err(Error::InvalidHypergraph(format!(
                "set {bad:?} is out of range for {n_units} units"
            )));
        }
        let family: BTreeSet<UnitSet> = if generators {
            sets.iter().flat_map(|s| s.subsets()).chain([UnitSet::EMPTY]).collect()
        } else {
            sets.iter().copied().collect()
        };
        if !generators {
            for s in &family {
                for w in s.subsets() {
                    if !family.contains(&w) {
                        return Err(Error::InvalidHypergraph(format!(
                            "not downward closed: {s:?} is present but {w:?} is not"
                        )));
                    }
                }
            }
            if !family.contains(&UnitSet::EMPTY) {
                return Err(Error::InvalidHypergraph("missing the empty set".into()));
            }
        }
        let cover = family.iter().fold(UnitSet::EMPTY, |acc, s| acc.union(*s));
        if cover != full {
            let missing: Vec<usize> = (0..n_units).filter(|&i| !cover.contains(i)).map(|i| i + 1).collect();
            return Err(Error::InvalidHypergraph(format!("does not cover units {missing:?}")));
        }
        Ok(Hypergraph {
            n_units,
            sets: sort_sets(family),
        })
    }

    /// Hypergraph generated by the given maximal sets.
    pub fn from_generators(n_units: usize, generators: &[UnitSet]) -> Result<Self> {
        Self::new(n_units, generators, true)
    }

    /// `U_k`: every subset of at most `k` units.
    pub fn k_local(n_units: usize, k: usize) -> Result<Self> {
        if k < 1 || k > n_units {
            return Err(Error::OutOfRange(format!("k = {k} outside 1..={n_units}")));
        }
        let sets = UnitSet::full(n_units).subsets().filter(|s| s.len() <= k);
        Ok(Hypergraph {
            n_units,
            sets: sort_sets(sets),
        })
    }

    pub fn independence(n_units: usize) -> Self {
        Self::k_local(n_units, 1).expect("n_units >= 1")
    }

    /// The full power set; its model is the whole algebra.
    pub fn power_set(n_units: usize) -> Self {
        Self::k_local(n_units, n_units).expect("n_units >= 1")
    }

    pub fn n_units(&self) -> usize {
        self.n_units
    }

    pub fn sets(&self) -> &[UnitSet] {
        &self.sets
    }

    pub fn contains(&self, v: UnitSet) -> bool {
        self.sets.binary_search_by_key(&(v.len(), v.0), |s| (s.len(), s.0)).is_ok()
    }

    /// Sets not strictly contained in another member.
    pub fn maximal_sets(&self) -> Vec<UnitSet> {
        self.sets
            .iter()
            .copied()
            .filter(|s| !self.sets.iter().any(|t| t != s && s.is_subset_of(*t)))
            .collect()
    }

    pub fn is_power_set(&self) -> bool {
        self.sets.len() == 1 << self.n_units
    }

    pub fn is_independence(&self) -> bool {
        self.sets.iter().all(|s| s.len() <= 1)
    }

    pub fn is_subfamily_of(&self, other: &Hypergraph) -> bool {
        self.n_units == other.n_units && self.sets.iter().all(|s| other.contains(*s))
    }

    /// Every hypergraph on `n_units` units (downward closed and covering).
    pub fn enumerate_all(n_units: usize) -> Vec<Hypergraph> {
        let nonempty: Vec<UnitSet> = UnitSet::full(n_units).subsets().filter(|s| !s.is_empty()).collect();
        assert!(nonempty.len() < 32, "enumeration limited to 4 units");
        let mut out = Vec::new();
        for mask in 0u32..(1u32 << nonempty.len()) {
            let chosen: Vec<UnitSet> = (0..nonempty.len())
                .filter(|&b| mask >> b & 1 == 1)
                .map(|b| nonempty[b])
                .collect();
            let mut family = chosen.clone();
            family.push(UnitSet::EMPTY);
            if let Ok(h) = Hypergraph::new(n_units, &family, false) {
                out.push(h);
            }
        }
        out
    }
}

/// Complex dimension `prod_{k in v} (dim A_k - 1)` of the pure factor space of `v`.
pub fn pure_factor_dim(shape: &SystemShape, v: UnitSet) -> usize {
    v.iter().map(|i| shape.algebra_dim(i) - 1).product()
}

/// `(dim_total, dim_model)`: dimension of the model subspace and of the Gibbs family.
pub fn model_dim(shape: &SystemShape, hypergraph: &Hypergraph) -> (usize, usize) {
    let total: usize = hypergraph.sets().iter().map(|&v| pure_factor_dim(shape, v)).sum();
    (total, total - 1)
}

/// Tensor-product basis element: `factors[i]` indexes the basis of unit `i`
/// (index 0 is the normalized identity), non-identity exactly on `pattern`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BasisElement {
    pub pattern: UnitSetLabel,
    pub factors: Vec<usize>,
}

/// One-based unit labels of a pattern, for reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UnitSetLabel(pub UnitSet);

impl Serialize for UnitSetLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<usize> = self.0.iter().map(|i| i + 1).collect();
        v.serialize(s)
    }
}

/// Orthonormal self-adjoint basis of a hierarchical model subspace.
#[derive(Clone, Debug)]
pub struct HierarchicalModelSpec {
    shape: SystemShape,
    hypergraph: Hypergraph,
    unit_bases: Vec<Vec<CMatrix>>,
    elements: Vec<BasisElement>,
    dense: Vec<CMatrix>,
    dim_total: usize,
    dim_model: usize,
}

/// Dense assembly is skipped above this total dimension.
pub const DENSE_DIM_LIMIT: usize = 256;

/// Enumerates basis elements of the pure factor space of `v`.
fn pattern_elements(shape: &SystemShape, v: UnitSet, unit_sizes: &[usize]) -> Vec<BasisElement> {
    let units = v.to_vec();
    let count: usize = units.iter().map(|&i| unit_sizes[i] - 1).product();
    (0..count)
        .map(|mut idx| {
            let mut factors = vec![0; shape.n_units()];
            for &u in units.iter().rev() {
                let m = unit_sizes[u] - 1;
                factors[u] = 1 + idx % m;
                idx /= m;
            }
            BasisElement {
                pattern: UnitSetLabel(v),
                factors,
            }
        })
        .collect()
}

/// Orthonormal self-adjoint basis of the algebra of one unit, identity first.
pub fn unit_basis(kind: UnitKind, n: usize) -> Vec<CMatrix> {
    match kind {
        UnitKind::Classical => classical_unit_basis(n),
        UnitKind::Quantum => quantum_unit_basis(n),
    }
}

/// Builds the model basis of `hypergraph`, ordered by the hypergraph's set order.
/// Dense matrices are assembled when the system dimension is at most [`DENSE_DIM_LIMIT`].
pub fn build_model(shape: &SystemShape, hypergraph: &Hypergraph) -> Result<HierarchicalModelSpec> {
    build_model_with(shape, hypergraph, shape.dim() <= DENSE_DIM_LIMIT)
}

/// Like [`build_model`] with explicit control over dense assembly.
pub fn build_model_with(shape: &SystemShape, hypergraph: &Hypergraph, dense: bool) -> Result<HierarchicalModelSpec> {
    if shape.n_units() != hypergraph.n_units() {
        return Err(Error::InvalidHypergraph(format!(
            "hypergraph on {} units, shape has {}",
            hypergraph.n_units(),
            shape.n_units()
        )));
    }
    let unit_bases: Vec<Vec<CMatrix>> = (0..shape.n_units())
        .map(|i| unit_basis(shape.kind(i), shape.size(i)))
        .collect();
    let unit_sizes: Vec<usize> = unit_bases.iter().map(|b| b.len()).collect();
    let elements: Vec<BasisElement> = hypergraph
        .sets()
        .iter()
        .flat_map(|&v| pattern_elements(shape, v, &unit_sizes))
        .collect();
    let (dim_total, dim_model) = model_dim(shape, hypergraph);
    debug_assert_eq!(elements.len(), dim_total);
    let mut spec = HierarchicalModelSpec {
        shape: shape.clone(),
        hypergraph: hypergraph.clone(),
        unit_bases,
        elements,
        dense: Vec::new(),
        dim_total,
        dim_model,
    };
    if dense {
        spec.dense = (0..spec.elements.len()).map(|j| spec.assemble(j)).collect();
    }
    Ok(spec)
}

impl HierarchicalModelSpec {
    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn hypergraph(&self) -> &Hypergraph {
        &self.hypergraph
    }

    pub fn elements(&self) -> &[BasisElement] {
        &self.elements
    }

    pub fn unit_bases(&self) -> &[Vec<CMatrix>] {
        &self.unit_bases
    }

    pub fn dim_total(&self) -> usize {
        self.dim_total
    }

    pub fn dim_model(&self) -> usize {
        self.dim_model
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Kronecker product of the per-unit factors of element `j`.
    pub fn assemble(&self, j: usize) -> CMatrix {
        let e = &self.elements[j];
        e.factors
            .iter()
            .enumerate()
            .fold(linalg::identity(1), |acc, (i, &f)| linalg::kron(&acc, &self.unit_bases[i][f]))
    }

    /// Dense basis matrices; empty when the system exceeds [`DENSE_DIM_LIMIT`].
    pub fn dense(&self) -> &[CMatrix] {
        &self.dense
    }

    pub fn has_dense(&self) -> bool {
        !self.dense.is_empty()
    }

    /// Inner product of two elements through their tensor factors.
    pub fn factored_inner(&self, a: &BasisElement, b: &BasisElement) -> C64 {
        a.factors
            .iter()
            .zip(&b.factors)
            .enumerate()
            .map(|(i, (&fa, &fb))| linalg::hs_inner(&self.unit_bases[i][fa], &self.unit_bases[i][fb]))
            .product()
    }

    /// `<b_j, rho>` for every basis element.
    pub fn expectations(&self, rho: &DensityMatrix) -> Vec<f64> {
        self.dense.iter().map(|b| rho.expectation(b)).collect()
    }

    /// `sum_j coeffs[j] b_j` over the dense basis.
    pub fn combine(&self, coeffs: &[f64]) -> CMatrix {
        let d = self.shape.dim();
        let mut out = CMatrix::zeros(d, d);
        for (b, &x) in self.dense.iter().zip(coeffs) {
            if x != 0.0 {
                out += b.scale(x);
            }
        }
        out
    }

    /// Orthogonal projection of a Hermitian matrix onto the model subspace.
    pub fn project(&self, a: &CMatrix) -> CMatrix {
        let coeffs: Vec<f64> = self.dense.iter().map(|b| linalg::trace_product_re(a, b)).collect();
        self.combine(&coeffs)
    }
}
