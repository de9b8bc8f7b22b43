//! Random states for experiments and tests. All samplers take an explicit RNG.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::Result;
use crate::hierarchy::HierarchicalModelSpec;
use crate::linalg::{c, CMatrix, C64};
use crate::shape::SystemShape;
use crate::state::{gibbs_map, DensityMatrix, HermitianObservable};

/// Deterministic RNG for stream `stream` of `seed`.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Haar-random unit vector of length `d`.
pub fn haar_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<C64> {
    let mut v: Vec<C64> = (0..d).map(|_| c(gaussian(rng), gaussian(rng))).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    v
}

/// Haar-random pure state of a quantum shape.
pub fn haar_pure<R: Rng + ?Sized>(shape: &SystemShape, rng: &mut R) -> Result<DensityMatrix> {
    DensityMatrix::from_pure(shape.clone(), &haar_vector(shape.dim(), rng))
}

/// Uniform distribution on the probability simplex.
pub fn simplex_point<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = (0..d).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Induced-measure state of rank at most `rank`: `G G* / tr`, `G` Ginibre `d x rank`.
/// For classical or mixed shapes the result is pinched to the algebra.
pub fn ginibre_state<R: Rng + ?Sized>(shape: &SystemShape, rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    let d = shape.dim();
    let g = CMatrix::from_fn(d, rank.max(1), |_, _| c(gaussian(rng), gaussian(rng)));
    let m = &g * g.adjoint();
    DensityMatrix::from_numerical(shape.clone(), &m)
}

/// Full-rank random distribution of a classical shape.
pub fn random_distribution<R: Rng + ?Sized>(shape: &SystemShape, rng: &mut R) -> Result<DensityMatrix> {
    DensityMatrix::from_probabilities(shape.clone(), &simplex_point(shape.dim(), rng))
}

/// Gibbs state of a random model Hamiltonian with standard normal coefficients of scale `scale`.
pub fn random_model_state<R: Rng + ?Sized>(model: &HierarchicalModelSpec, scale: f64, rng: &mut R) -> Result<DensityMatrix> {
    let coeffs: Vec<f64> = (0..model.len())
        .map(|j| if j == 0 { 0.0 } else { scale * gaussian(rng) })
        .collect();
    let h = HermitianObservable::new(model.shape().clone(), model.combine(&coeffs))?;
    Ok(gibbs_map(&h))
}
