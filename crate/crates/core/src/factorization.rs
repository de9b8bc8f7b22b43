//! Factorization of probability vectors over `k`-party subsystems: the 0/1
//! interaction matrix, its monomial map, `k`-feasibility of support sets and
//! the binomial relations coming from the integer kernel.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::shape::{SystemShape, UnitSet};

/// Relative tolerance for binomial equalities in [`check_toric_membership`].
pub const TORIC_REL_TOL: f64 = 1e-9;
/// Largest number of subsets [`enumerate_feasibility`] will classify.
pub const EXHAUSTION_LIMIT: u128 = 1 << 20;

/// All `k`-subsets of `n` units in cyclic order: by the length of the shortest
/// cyclic arc covering the set, then by the arc's starting unit, then
/// lexicographically. For three units and `k = 2` this gives `{1,2}, {2,3}, {1,3}`.
pub fn k_subsets(n: usize, k: usize) -> Vec<UnitSet> {
    let mut sets: Vec<UnitSet> = UnitSet::full(n).subsets().filter(|s| s.len() == k).collect();
    let arc = |s: UnitSet| -> (usize, usize) {
        if s.is_empty() {
            return (0, 0);
        }
        (0..n)
            .filter_map(|start| {
                (1..=n).find(|&len| s.iter().all(|i| (i + n - start) % n < len)).map(|len| (len, start))
            })
            .min()
            .expect("some arc covers the set")
    };
    sets.sort_by_key(|&s| (arc(s), s.to_vec()));
    sets
}

/// Row label `(nu, y)`: a subsystem and one of its configurations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowLabel {
    pub nu: UnitSet,
    pub y: Vec<usize>,
}

impl RowLabel {
    pub fn label(&self) -> String {
        let units: Vec<String> = self.nu.iter().map(|i| (i + 1).to_string()).collect();
        let ys: Vec<String> = self.y.iter().map(|v| v.to_string()).collect();
        format!("{{{}}},({})", units.join(","), ys.join(","))
    }
}

/// `a_{(nu,y),x} = 1` iff `x_nu = y`.
#[derive(Clone, Debug)]
pub struct InteractionMatrix {
    shape: SystemShape,
    k: usize,
    rows: Vec<RowLabel>,
    entries: Vec<Vec<u8>>,
}

pub fn build_interaction_matrix(shape: &SystemShape, k: usize) -> Result<InteractionMatrix> {
    if !shape.is_classical() {
        return Err(Error::QuantumUnit);
    }
    let n = shape.n_units();
    if k < 1 || k > n {
        return Err(Error::OutOfRange(format!("k = {k} outside 1..={n}")));
    }
    let cols = shape.dim();
    let col_digits: Vec<Vec<usize>> = (0..cols).map(|x| shape.digits(x)).collect();
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    for nu in k_subsets(n, k) {
        let sub = shape.restrict(nu)?;
        for yi in 0..sub.dim() {
            let y = sub.digits(yi);
            let row: Vec<u8> = col_digits
                .iter()
                .map(|xd| nu.iter().zip(&y).all(|(u, &yv)| xd[u] == yv) as u8)
                .collect();
            rows.push(RowLabel { nu, y });
            entries.push(row);
        }
    }
    Ok(InteractionMatrix {
        shape: shape.clone(),
        k,
        rows,
        entries,
    })
}

impl InteractionMatrix {
    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rows(&self) -> &[RowLabel] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.shape.dim()
    }

    pub fn entry(&self, row: usize, col: usize) -> u8 {
        self.entries[row][col]
    }

    pub fn entries(&self) -> &[Vec<u8>] {
        &self.entries
    }

    /// Row indices where column `x` is nonzero.
    pub fn column_support(&self, x: usize) -> Vec<usize> {
        (0..self.n_rows()).filter(|&r| self.entries[r][x] == 1).collect()
    }

    pub fn column_sums(&self) -> Vec<usize> {
        (0..self.n_cols())
            .map(|x| self.entries.iter().map(|r| r[x] as usize).sum())
            .collect()
    }

    /// CSV with a header of configuration labels and one labelled row per `(nu, y)`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row");
        for x in 0..self.n_cols() {
            out.push(',');
            out.push_str(&config_label(&self.shape, x));
        }
        out.push('\n');
        for (label, row) in self.rows.iter().zip(&self.entries) {
            out.push('"');
            out.push_str(&label.label());
            out.push('"');
            for v in row {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Digits of configuration `x`, concatenated (comma-separated when a unit has more than 10 values).
pub fn config_label(shape: &SystemShape, x: usize) -> String {
    let digits = shape.digits(x);
    if shape.sizes().iter().all(|&n| n <= 10) {
        digits.iter().map(|d| d.to_string()).collect()
    } else {
        digits.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
    }
}

/// Parses a label produced by [`config_label`].
pub fn parse_config(shape: &SystemShape, label: &str) -> Result<usize> {
    let digits: Vec<usize> = if label.contains(',') {
        label
            .split(',')
            .map(|s| s.trim().parse::<usize>().map_err(|e| Error::Parse(e.to_string())))
            .collect::<Result<_>>()?
    } else {
        label
            .chars()
            .map(|ch| ch.to_digit(10).map(|d| d as usize).ok_or_else(|| Error::Parse(format!("bad digit {ch:?}"))))
            .collect::<Result<_>>()?
    };
    if digits.len() != shape.n_units() || digits.iter().zip(shape.sizes()).any(|(&d, &n)| d >= n) {
        return Err(Error::Parse(format!("configuration {label:?} does not fit the shape")));
    }
    Ok(shape.index_of(&digits))
}

/// `Phi(t)_x = prod_i t(i)^{a_{i,x}}` with `0^0 = 1`.
pub fn monomial_map(a: &InteractionMatrix, t: &[f64]) -> Result<Vec<f64>> {
    if t.len() != a.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: a.n_rows(),
            found: t.len(),
        });
    }
    if let Some((i, &v)) = t.iter().enumerate().find(|(_, &v)| v < 0.0 || v.is_nan()) {
        return Err(Error::NegativeEntry { index: i, value: v });
    }
    Ok((0..a.n_cols())
        .map(|x| {
            (0..a.n_rows())
                .filter(|&r| a.entries[r][x] == 1)
                .map(|r| t[r])
                .product()
        })
        .collect())
}

/// Non-empty set of configurations.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SupportSet(pub BTreeSet<usize>);

impl SupportSet {
    pub fn new(configs: impl IntoIterator<Item = usize>) -> Self {
        SupportSet(configs.into_iter().collect())
    }

    pub fn from_labels(shape: &SystemShape, labels: &[&str]) -> Result<Self> {
        Ok(SupportSet(
            labels.iter().map(|l| parse_config(shape, l)).collect::<Result<_>>()?,
        ))
    }

    /// Configurations carrying positive mass.
    pub fn of_vector(p: &[f64]) -> Self {
        SupportSet(p.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(i, _)| i).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.0.contains(&x)
    }

    pub fn labels(&self, shape: &SystemShape) -> Vec<String> {
        self.0.iter().map(|&x| config_label(shape, x)).collect()
    }

    /// Uniform probability vector on the set.
    pub fn uniform(&self, dim: usize) -> Vec<f64> {
        let w = 1.0 / self.len() as f64;
        (0..dim).map(|x| if self.contains(x) { w } else { 0.0 }).collect()
    }
}

fn feasible_with(a: &InteractionMatrix, f: &SupportSet) -> bool {
    let mut covered = vec![false; a.n_rows()];
    for &y in &f.0 {
        for r in 0..a.n_rows() {
            if a.entries[r][y] == 1 {
                covered[r] = true;
            }
        }
    }
    (0..a.n_cols())
        .filter(|x| !f.contains(*x))
        .all(|x| (0..a.n_rows()).any(|r| a.entries[r][x] == 1 && !covered[r]))
}

/// Whether no configuration outside `f` has its column support inside the
/// union of the column supports of `f`.
pub fn is_k_feasible(f: &SupportSet, shape: &SystemShape, k: usize) -> Result<bool> {
    if f.is_empty() {
        return Err(Error::EmptySupport);
    }
    if let Some(&x) = f.0.iter().find(|&&x| x >= shape.dim()) {
        return Err(Error::OutOfRange(format!("configuration index {x}")));
    }
    let a = build_interaction_matrix(shape, k)?;
    Ok(feasible_with(&a, f))
}

#[derive(Clone, Debug, Serialize)]
pub struct SizeCount {
    pub size: usize,
    pub total: usize,
    pub feasible: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct FeasibilityReport {
    pub sizes: Vec<usize>,
    pub k: usize,
    pub max_size: usize,
    pub by_size: Vec<SizeCount>,
    /// Every enumerated set of size at most `k` is feasible.
    pub small_sets_feasible: bool,
    pub non_feasible_count: usize,
    /// Non-feasible sets with no non-feasible proper subset.
    pub minimal_non_feasible: Vec<Vec<String>>,
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Classifies every non-empty subset of the configuration space with at most `max_size` elements.
pub fn enumerate_feasibility(shape: &SystemShape, k: usize, max_size: usize) -> Result<FeasibilityReport> {
    let a = build_interaction_matrix(shape, k)?;
    let m = a.n_cols();
    let max_size = max_size.min(m);
    let count: u128 = (1..=max_size as u128).map(|s| binomial(m as u128, s)).sum();
    if count > EXHAUSTION_LIMIT || m > 63 {
        return Err(Error::GuardExceeded {
            count,
            limit: EXHAUSTION_LIMIT,
        });
    }
    let mut by_size = Vec::new();
    let mut non_feasible: Vec<u64> = Vec::new();
    for size in 1..=max_size {
        let mut total = 0;
        let mut feasible = 0;
        // Gosper's hack over m-bit masks with `size` ones
        let mut mask: u64 = (1u64 << size) - 1;
        let limit: u64 = 1u64 << m;
        while mask < limit {
            let set = SupportSet((0..m).filter(|&b| mask >> b & 1 == 1).collect());
            total += 1;
            if feasible_with(&a, &set) {
                feasible += 1;
            } else {
                non_feasible.push(mask);
            }
            let c = mask & mask.wrapping_neg();
            let r = mask + c;
            mask = (((r ^ mask) >> 2) / c) | r;
        }
        by_size.push(SizeCount { size, total, feasible });
    }
    let small_sets_feasible = by_size.iter().filter(|c| c.size <= k).all(|c| c.total == c.feasible);
    let minimal: Vec<Vec<String>> = non_feasible
        .iter()
        .filter(|&&s| !non_feasible.iter().any(|&t| t != s && t & s == t))
        .map(|&s| {
            SupportSet((0..m).filter(|&b| s >> b & 1 == 1).collect()).labels(shape)
        })
        .collect();
    Ok(FeasibilityReport {
        sizes: shape.sizes().to_vec(),
        k,
        max_size,
        by_size,
        small_sets_feasible,
        non_feasible_count: non_feasible.len(),
        minimal_non_feasible: minimal,
    })
}

/// Lattice basis of `{z in Z^cols : A z = 0}` by unimodular row reduction of `A^T`.
pub fn toric_kernel(a: &InteractionMatrix) -> Result<Vec<Vec<i64>>> {
    let cols = a.n_cols();
    let rows = a.n_rows();
    let mut m: Vec<Vec<i64>> = (0..cols)
        .map(|x| (0..rows).map(|r| a.entries[r][x] as i64).collect())
        .collect();
    let mut u: Vec<Vec<i64>> = (0..cols)
        .map(|i| (0..cols).map(|j| (i == j) as i64).collect())
        .collect();
    let sub_row = |target: &mut Vec<i64>, src: &[i64], q: i64| -> Result<()> {
        for (t, &s) in target.iter_mut().zip(src) {
            *t = t
                .checked_sub(q.checked_mul(s).ok_or(Error::IntegerOverflow)?)
                .ok_or(Error::IntegerOverflow)?;
        }
        Ok(())
    };
    let mut pivot = 0;
    for j in 0..rows {
        if pivot == cols {
            break;
        }
        loop {
            let best = (pivot..cols)
                .filter(|&i| m[i][j] != 0)
                .min_by_key(|&i| m[i][j].unsigned_abs());
            let Some(best) = best else { break };
            m.swap(pivot, best);
            u.swap(pivot, best);
            let mut clean = true;
            for i in (pivot + 1)..cols {
                if m[i][j] != 0 {
                    let q = m[i][j].div_euclid(m[pivot][j]);
                    let (mp, up) = (m[pivot].clone(), u[pivot].clone());
                    sub_row(&mut m[i], &mp, q)?;
                    sub_row(&mut u[i], &up, q)?;
                    if m[i][j] != 0 {
                        clean = false;
                    }
                }
            }
            if clean {
                pivot += 1;
                break;
            }
        }
    }
    Ok(u.into_iter()
        .skip(pivot)
        .map(|mut v| {
            if v.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            v
        })
        .collect())
}

/// Positive and negative parts `(u, v)` of a kernel vector `u - v`.
pub fn split_binomial(w: &[i64]) -> (Vec<u64>, Vec<u64>) {
    (
        w.iter().map(|&x| x.max(0) as u64).collect(),
        w.iter().map(|&x| (-x).max(0) as u64).collect(),
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct BinomialCheck {
    pub kernel_vector: Vec<i64>,
    pub lhs: f64,
    pub rhs: f64,
    pub relative_residual: f64,
    /// Both sides vanish because the vector has zeros on both supports.
    pub zero_support: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ToricMembership {
    pub member: bool,
    pub checks: Vec<BinomialCheck>,
    /// Some binomial held only because both monomials vanished.
    pub boundary_case: bool,
}

/// Checks `prod s^u = prod s^v` for every kernel basis vector `u - v`.
pub fn check_toric_membership(s: &[f64], a: &InteractionMatrix) -> Result<ToricMembership> {
    let kernel = toric_kernel(a)?;
    check_toric_membership_with(s, &kernel)
}

pub fn check_toric_membership_with(s: &[f64], kernel: &[Vec<i64>]) -> Result<ToricMembership> {
    if let Some((i, &v)) = s.iter().enumerate().find(|(_, &v)| v < 0.0 || v.is_nan()) {
        return Err(Error::NegativeEntry { index: i, value: v });
    }
    let checks: Vec<BinomialCheck> = kernel
        .iter()
        .map(|w| {
            let (u, v) = split_binomial(w);
            let mono = |e: &[u64]| -> f64 {
                s.iter().zip(e).map(|(&x, &p)| x.powi(p as i32)).product()
            };
            let (lhs, rhs) = (mono(&u), mono(&v));
            let scale = lhs.abs().max(rhs.abs());
            let relative_residual = if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale };
            BinomialCheck {
                kernel_vector: w.clone(),
                lhs,
                rhs,
                relative_residual,
                zero_support: lhs == 0.0 && rhs == 0.0,
            }
        })
        .collect();
    Ok(ToricMembership {
        member: checks.iter().all(|c| c.relative_residual <= TORIC_REL_TOL),
        boundary_case: checks.iter().any(|c| c.zero_support),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_bits() -> SystemShape {
        SystemShape::bits(3)
    }

    const EXAMPLE_ROWS: [[u8; 8]; 12] = [
        [1, 1, 0, 0, 0, 0, 0, 0],
        [0, 0, 1, 1, 0, 0, 0, 0],
        [0, 0, 0, 0, 1, 1, 0, 0],
        [0, 0, 0, 0, 0, 0, 1, 1],
        [1, 0, 0, 0, 1, 0, 0, 0],
        [0, 1, 0, 0, 0, 1, 0, 0],
        [0, 0, 1, 0, 0, 0, 1, 0],
        [0, 0, 0, 1, 0, 0, 0, 1],
        [1, 0, 1, 0, 0, 0, 0, 0],
        [0, 1, 0, 1, 0, 0, 0, 0],
        [0, 0, 0, 0, 1, 0, 1, 0],
        [0, 0, 0, 0, 0, 1, 0, 1],
    ];

    #[test]
    fn three_bit_pair_matrix_matches_layout() {
        let a = build_interaction_matrix(&three_bits(), 2).unwrap();
        assert_eq!(a.n_rows(), 12);
        assert_eq!(a.n_cols(), 8);
        for (r, row) in EXAMPLE_ROWS.iter().enumerate() {
            assert_eq!(a.entries()[r].as_slice(), row.as_slice(), "row {}", a.rows()[r].label());
        }
        assert_eq!(a.rows()[0].label(), "{1,2},(0,0)");
        assert_eq!(a.rows()[4].label(), "{2,3},(0,0)");
        assert_eq!(a.rows()[11].label(), "{1,3},(1,1)");
    }

    #[test]
    fn two_bit_singletons() {
        let a = build_interaction_matrix(&SystemShape::bits(2), 1).unwrap();
        assert_eq!((a.n_rows(), a.n_cols()), (4, 4));
        assert!(a.column_sums().iter().all(|&s| s == 2));
    }

    #[test]
    fn column_sums_are_binomials() {
        let shape = SystemShape::new(vec![2, 3, 2, 2], vec![crate::UnitKind::Classical; 4]).unwrap();
        for k in 1..=4 {
            let a = build_interaction_matrix(&shape, k).unwrap();
            let expected = binomial(4, k as u128) as usize;
            assert!(a.column_sums().iter().all(|&s| s == expected));
        }
    }

    #[test]
    fn rejects_quantum_and_bad_k() {
        assert!(matches!(build_interaction_matrix(&SystemShape::qubits(2), 1), Err(Error::QuantumUnit)));
        assert!(build_interaction_matrix(&three_bits(), 0).is_err());
        assert!(build_interaction_matrix(&three_bits(), 4).is_err());
    }

    #[test]
    fn monomial_map_examples() {
        let a = build_interaction_matrix(&SystemShape::bits(2), 1).unwrap();
        assert_eq!(monomial_map(&a, &[1.0; 4]).unwrap(), vec![1.0; 4]);
        let (p, q) = ([0.3, 0.7], [0.6, 0.4]);
        let out = monomial_map(&a, &[p[0], p[1], q[0], q[1]]).unwrap();
        let expected = [p[0] * q[0], p[0] * q[1], p[1] * q[0], p[1] * q[1]];
        for (o, e) in out.iter().zip(expected) {
            assert!((o - e).abs() < 1e-15);
        }
        let a3 = build_interaction_matrix(&three_bits(), 2).unwrap();
        let mut t = vec![1.0; 12];
        t[5] = 0.0; // {2,3},(0,1)
        let out = monomial_map(&a3, &t).unwrap();
        for x in 0..8 {
            let d = three_bits().digits(x);
            assert_eq!(out[x] == 0.0, d[1] == 0 && d[2] == 1);
        }
        assert!(matches!(monomial_map(&a, &[1.0, -1.0, 1.0, 1.0]), Err(Error::NegativeEntry { index: 1, .. })));
    }

    #[test]
    fn feasibility_examples() {
        let s = three_bits();
        for x in 0..8 {
            for k in 1..=3 {
                assert!(is_k_feasible(&SupportSet::new([x]), &s, k).unwrap());
            }
        }
        let y = SupportSet::from_labels(&s, &["100", "010", "001"]).unwrap();
        assert!(!is_k_feasible(&y, &s, 2).unwrap());
        assert!(is_k_feasible(&SupportSet::new(0..8), &s, 2).unwrap());
        assert!(matches!(is_k_feasible(&SupportSet::new([]), &s, 2), Err(Error::EmptySupport)));
    }

    #[test]
    fn exhaustive_three_bits() {
        let report = enumerate_feasibility(&three_bits(), 2, 3).unwrap();
        assert!(report.small_sets_feasible);
        assert_eq!(report.by_size[0].total, 8);
        assert_eq!(report.by_size[1].total, 28);
        let y: Vec<String> = ["001", "010", "100"].iter().map(|s| s.to_string()).collect();
        assert!(report.minimal_non_feasible.contains(&y));
        let full = enumerate_feasibility(&SystemShape::bits(2), 2, 4).unwrap();
        assert_eq!(full.non_feasible_count, 0);
    }

    #[test]
    fn exhaustion_guard() {
        let big = SystemShape::new(vec![2; 5], vec![crate::UnitKind::Classical; 5]).unwrap();
        assert!(matches!(enumerate_feasibility(&big, 2, 32), Err(Error::GuardExceeded { .. })));
    }

    #[test]
    fn kernel_examples() {
        let a = build_interaction_matrix(&three_bits(), 2).unwrap();
        let kernel = toric_kernel(&a).unwrap();
        assert_eq!(kernel, vec![vec![1, -1, -1, 1, -1, 1, 1, -1]]);
        let a2 = build_interaction_matrix(&SystemShape::bits(2), 2).unwrap();
        assert!(toric_kernel(&a2).unwrap().is_empty());
    }

    #[test]
    fn toric_membership_examples() {
        let a = build_interaction_matrix(&three_bits(), 2).unwrap();
        assert!(check_toric_membership(&[0.125; 8], &a).unwrap().member);
        let ghz_like = [0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5];
        let m = check_toric_membership(&ghz_like, &a).unwrap();
        assert!(m.member && m.boundary_case);
        let p: Vec<f64> = (1..=8).map(|v| v as f64 / 36.0).collect();
        assert!(!check_toric_membership(&p, &a).unwrap().member);
        assert!(check_toric_membership(&[-0.1; 8], &a).is_err());
    }
}
