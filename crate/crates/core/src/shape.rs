//! Composite system layout: unit sizes, unit kinds and subsets of units.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Largest number of units a [`UnitSet`] can address.
pub const MAX_UNITS: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitKind {
    /// Commutative algebra of diagonal `n x n` matrices.
    Classical,
    /// Full matrix algebra `M_n`.
    Quantum,
}

/// Subset of the units `{0, .., N-1}` stored as a bitmask.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnitSet(pub u32);

impl UnitSet {
    pub const EMPTY: UnitSet = UnitSet(0);

    pub fn full(n_units: usize) -> UnitSet {
        if n_units >= 32 {
            UnitSet(u32::MAX)
        } else {
            UnitSet((1u32 << n_units) - 1)
        }
    }

    pub fn singleton(i: usize) -> UnitSet {
        UnitSet(1 << i)
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> UnitSet {
        UnitSet(indices.into_iter().fold(0, |m, i| m | (1 << i)))
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: UnitSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: UnitSet) -> UnitSet {
        UnitSet(self.0 | other.0)
    }

    pub fn intersection(self, other: UnitSet) -> UnitSet {
        UnitSet(self.0 & other.0)
    }

    pub fn without(self, i: usize) -> UnitSet {
        UnitSet(self.0 & !(1 << i))
    }

    /// Members in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..MAX_UNITS).filter(move |&i| self.contains(i))
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// All subsets of `self`, including the empty set and `self`.
    pub fn subsets(self) -> impl Iterator<Item = UnitSet> {
        let mask = self.0;
        let mut sub = Some(0u32);
        std::iter::from_fn(move || {
            let cur = sub?;
            sub = if cur == mask {
                None
            } else {
                Some(((cur | !mask).wrapping_add(1)) & mask)
            };
            Some(UnitSet(cur))
        })
    }
}

impl fmt::Debug for UnitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

/// Number of units, their sizes and their kinds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ShapeRepr")]
pub struct SystemShape {
    sizes: Vec<usize>,
    kinds: Vec<UnitKind>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum KindsRepr {
    One(UnitKind),
    Many(Vec<UnitKind>),
}

#[derive(Deserialize)]
struct ShapeRepr {
    sizes: Vec<usize>,
    kinds: KindsRepr,
}

impl TryFrom<ShapeRepr> for SystemShape {
    type Error = Error;

    fn try_from(r: ShapeRepr) -> Result<Self> {
        let kinds = match r.kinds {
            KindsRepr::One(k) => vec![k; r.sizes.len()],
            KindsRepr::Many(v) => v,
        };
        SystemShape::new(r.sizes, kinds)
    }
}

impl SystemShape {
    pub fn new(sizes: Vec<usize>, kinds: Vec<UnitKind>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidShape("at least one unit is required".into()));
        }
        if sizes.len() != kinds.len() {
            return Err(Error::InvalidShape(format!(
                "{} sizes but {} kinds",
                sizes.len(),
                kinds.len()
            )));
        }
        if sizes.len() > MAX_UNITS {
            return Err(Error::InvalidShape(format!("more than {MAX_UNITS} units")));
        }
        if let Some(i) = sizes.iter().position(|&n| n == 0) {
            return Err(Error::InvalidShape(format!("unit {} has size 0", i + 1)));
        }
        Ok(SystemShape { sizes, kinds })
    }

    pub fn uniform(n_units: usize, size: usize, kind: UnitKind) -> Result<Self> {
        Self::new(vec![size; n_units], vec![kind; n_units])
    }

    pub fn qubits(n_units: usize) -> Self {
        Self::uniform(n_units, 2, UnitKind::Quantum).expect("qubit shape")
    }

    pub fn bits(n_units: usize) -> Self {
        Self::uniform(n_units, 2, UnitKind::Classical).expect("bit shape")
    }

    pub fn n_units(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn kinds(&self) -> &[UnitKind] {
        &self.kinds
    }

    pub fn size(&self, i: usize) -> usize {
        self.sizes[i]
    }

    pub fn kind(&self, i: usize) -> UnitKind {
        self.kinds[i]
    }

    /// Total Hilbert-space dimension `prod n_i`.
    pub fn dim(&self) -> usize {
        self.sizes.iter().product()
    }

    /// Complex dimension of the unit algebra: `n` classical, `n^2` quantum.
    pub fn algebra_dim(&self, i: usize) -> usize {
        match self.kinds[i] {
            UnitKind::Classical => self.sizes[i],
            UnitKind::Quantum => self.sizes[i] * self.sizes[i],
        }
    }

    pub fn is_classical(&self) -> bool {
        self.kinds.iter().all(|&k| k == UnitKind::Classical)
    }

    pub fn is_quantum(&self) -> bool {
        self.kinds.iter().all(|&k| k == UnitKind::Quantum)
    }

    pub fn all_units(&self) -> UnitSet {
        UnitSet::full(self.n_units())
    }

    pub fn check_subset(&self, nu: UnitSet) -> Result<()> {
        if let Some(i) = (0..MAX_UNITS).find(|&i| nu.contains(i) && i >= self.n_units()) {
            return Err(Error::InvalidSubsystem {
                index: i,
                n_units: self.n_units(),
            });
        }
        Ok(())
    }

    /// Shape of the units in `nu`, in increasing unit order.
    pub fn restrict(&self, nu: UnitSet) -> Result<SystemShape> {
        self.check_subset(nu)?;
        Ok(SystemShape {
            sizes: nu.iter().map(|i| self.sizes[i]).collect(),
            kinds: nu.iter().map(|i| self.kinds[i]).collect(),
        })
    }

    /// Per-unit digits of a configuration index; unit 1 is the most significant digit.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.n_units()];
        for i in (0..self.n_units()).rev() {
            out[i] = index % self.sizes[i];
            index /= self.sizes[i];
        }
        out
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.sizes)
            .fold(0, |acc, (&x, &n)| acc * n + x)
    }

    /// Index into the configuration space of `nu` from a full digit vector.
    pub fn sub_index(&self, digits: &[usize], nu: UnitSet) -> usize {
        nu.iter().fold(0, |acc, i| acc * self.sizes[i] + digits[i])
    }

    /// Whether matrix entry `(r, c)` may be nonzero in the algebra, i.e. the
    /// row and column agree on every classical unit.
    pub fn entry_in_algebra(&self, r: usize, c: usize) -> bool {
        if self.is_quantum() {
            return true;
        }
        let (dr, dc) = (self.digits(r), self.digits(c));
        (0..self.n_units())
            .all(|i| self.kinds[i] == UnitKind::Quantum || dr[i] == dc[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_zero_sizes() {
        assert!(SystemShape::new(vec![], vec![]).is_err());
        assert!(SystemShape::new(vec![2, 0], vec![UnitKind::Quantum; 2]).is_err());
        assert!(SystemShape::new(vec![2], vec![UnitKind::Quantum; 2]).is_err());
    }

    #[test]
    fn digits_round_trip_with_first_unit_most_significant() {
        let s = SystemShape::new(vec![2, 3, 2], vec![UnitKind::Classical; 3]).unwrap();
        assert_eq!(s.digits(0), vec![0, 0, 0]);
        assert_eq!(s.digits(1), vec![0, 0, 1]);
        assert_eq!(s.digits(2), vec![0, 1, 0]);
        assert_eq!(s.digits(6), vec![1, 0, 0]);
        for idx in 0..s.dim() {
            assert_eq!(s.index_of(&s.digits(idx)), idx);
        }
    }

    #[test]
    fn subsets_enumerates_power_set() {
        let v = UnitSet::from_indices([0, 2, 3]);
        let subs: Vec<_> = v.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.iter().all(|s| s.is_subset_of(v)));
        assert_eq!(UnitSet::EMPTY.subsets().count(), 1);
    }

    #[test]
    fn algebra_dims() {
        let s = SystemShape::new(vec![2, 3], vec![UnitKind::Classical, UnitKind::Quantum]).unwrap();
        assert_eq!(s.algebra_dim(0), 2);
        assert_eq!(s.algebra_dim(1), 9);
        assert!(s.entry_in_algebra(0, 2));
        assert!(!s.entry_in_algebra(0, 3));
    }
}
