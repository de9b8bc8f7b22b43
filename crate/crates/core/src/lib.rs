//! Many-party correlations of classical and quantum states measured as the
//! divergence from hierarchical Gibbs models.
//!
//! The crate covers the linear algebra of composite systems ([`state`],
//! [`basis`]), hypergraphs and model subspaces ([`hierarchy`]), the
//! maximum-entropy projection and the correlation quantities derived from it
//! ([`maxent`]), factorization of probability vectors ([`factorization`]),
//! local maximizers of the divergence ([`maximizers`]) and Bell-diagonal
//! two-qubit geometry ([`two_qubit`]).

pub mod basis;
pub mod error;
pub mod factorization;
pub mod hierarchy;
pub mod io;
pub mod linalg;
pub mod maxent;
pub mod maximizers;
pub mod random;
pub mod reproduce;
pub mod shape;
pub mod state;
pub mod two_qubit;

pub use error::{Error, Result};
pub use hierarchy::{build_model, HierarchicalModelSpec, Hypergraph};
pub use shape::{SystemShape, UnitKind, UnitSet};
pub use state::{DensityMatrix, HermitianObservable};
