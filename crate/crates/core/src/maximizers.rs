//! Local maximizers of the divergence from a hierarchical model.
//!
//! A local maximizer `rho` has small support: the face of the state space it
//! generates cannot be larger than the model. For classical systems the support
//! has at most `D + 1` points and for quantum systems the rank is at most
//! `sqrt(D + 1)`, where `D` is the model dimension. On its support `rho` is
//! itself a Gibbs state: `log rho` restricted to the support lies in the
//! compression of the model space plus scalars.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::hierarchy::HierarchicalModelSpec;
use crate::linalg::{hermitian_part, hermitian_to_real, hs_norm, orthonormalize, CMatrix, Spectrum};
use crate::maxent::{maxent_project, ProjectionOptions};
use crate::random;
use crate::shape::UnitKind;
use crate::state::{pinch, support_log, DensityMatrix};

/// Eigenvalues above this count towards rank and support.
pub const RANK_TOL: f64 = 1e-9;
/// Eigenvalues below this fraction of the largest are set to zero during the search.
pub const SNAP_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Classical,
    Quantum,
    Mixed,
}

#[derive(Clone, Debug, Serialize)]
pub struct SupportBound {
    pub kind: BoundKind,
    /// Model dimension `D`, identity excluded.
    pub model_dim: usize,
    /// `D + 1` (classical), `sqrt(D + 1)` (quantum) or the integer rank bound (mixed).
    pub value: f64,
    /// Largest admissible integer rank or support size.
    pub max_rank: usize,
    /// Set for mixed classical/quantum shapes, where the bound is derived
    /// from the face dimension of a block-diagonal state space.
    pub extension: bool,
}

/// Rank bound for a model on any shape.
///
/// Mixed shapes have block-diagonal states with `b` blocks of size `q`; a
/// state of block ranks `r_j` generates a face of dimension `sum r_j^2 - 1`,
/// which may not exceed `D`. The bound is the largest `sum r_j` under
/// `sum r_j^2 <= D + 1`, `r_j <= q`.
pub fn support_bound(model: &HierarchicalModelSpec) -> SupportBound {
    let shape = model.shape();
    let d_model = model.dim_model();
    let budget = d_model + 1;
    if shape.is_classical() {
        return SupportBound {
            kind: BoundKind::Classical,
            model_dim: d_model,
            value: budget as f64,
            max_rank: budget,
            extension: false,
        };
    }
    if shape.is_quantum() {
        let value = (budget as f64).sqrt();
        let mut r = value.floor() as usize;
        while (r + 1) * (r + 1) <= budget {
            r += 1;
        }
        while r * r > budget {
            r -= 1;
        }
        return SupportBound {
            kind: BoundKind::Quantum,
            model_dim: d_model,
            value,
            max_rank: r,
            extension: false,
        };
    }
    let (mut blocks, mut q) = (1usize, 1usize);
    for i in 0..shape.n_units() {
        match shape.kind(i) {
            UnitKind::Classical => blocks *= shape.size(i),
            UnitKind::Quantum => q *= shape.size(i),
        }
    }
    let mut ranks = vec![0usize; blocks];
    let mut used = 0usize;
    loop {
        // smallest rank increases cost least: (r+1)^2 - r^2 = 2r + 1
        let Some((j, &r)) = ranks.iter().enumerate().filter(|(_, &r)| r < q).min_by_key(|(_, &r)| r) else {
            break;
        };
        let cost = 2 * r + 1;
        if used + cost > budget {
            break;
        }
        used += cost;
        ranks[j] += 1;
    }
    let total: usize = ranks.iter().sum();
    SupportBound {
        kind: BoundKind::Mixed,
        model_dim: d_model,
        value: total as f64,
        max_rank: total,
        extension: true,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpFormCheck {
    /// Hilbert-Schmidt norm of the part of the restricted `log rho` outside
    /// the compressed model space.
    pub residual: f64,
    pub support_rank: usize,
}

/// Tests whether `rho` is a Gibbs state of the model compressed to its own support.
pub fn check_exponential_form(rho: &DensityMatrix, model: &HierarchicalModelSpec) -> Result<ExpFormCheck> {
    if rho.shape() != model.shape() {
        return Err(crate::Error::ShapeMismatch);
    }
    let s = rho.spectrum();
    let q = s.isometry(|v| v > RANK_TOL);
    let qa = q.adjoint();
    let log_rho = hermitian_part(&(&qa * support_log(rho, RANK_TOL) * &q));
    let compressed: Vec<_> = model
        .dense()
        .iter()
        .map(|b| hermitian_to_real(&hermitian_part(&(&qa * b * &q))))
        .collect();
    let basis = orthonormalize(&compressed, 1e-10);
    let mut v = hermitian_to_real(&log_rho);
    for g in &basis {
        let proj = g.dot(&v);
        v.axpy(-proj, g, 1.0);
    }
    Ok(ExpFormCheck {
        residual: v.norm(),
        support_rank: q.ncols(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchOptions {
    pub restarts: usize,
    pub seed: u64,
    pub max_steps: usize,
    /// Stop once `|K rho|` falls below this, `K` the centered gradient.
    pub stationarity_tol: f64,
    pub projection: ProjectionOptions,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            restarts: 32,
            seed: 0,
            max_steps: 3000,
            stationarity_tol: 1e-11,
            projection: ProjectionOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MaximizerReport {
    #[serde(serialize_with = "crate::io::serialize_state")]
    pub state: DensityMatrix,
    pub divergence: f64,
    pub rank: usize,
    /// Number of configurations with positive probability, classical shapes only.
    pub support_size: Option<usize>,
    pub bound: f64,
    pub bound_satisfied: bool,
    pub exp_form_residual: f64,
    /// Restarts that ended at this divergence value.
    pub restarts: usize,
    pub seed: u64,
    /// First restart that reached it.
    pub restart: usize,
    pub steps: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchReport {
    pub bound: SupportBound,
    pub seed: u64,
    pub restarts: usize,
    /// Distinct local maximizers, in order of first discovery.
    pub maximizers: Vec<MaximizerReport>,
    /// Restarts that failed, with the error.
    pub failures: Vec<(usize, String)>,
}

impl SearchReport {
    pub fn best(&self) -> Option<&MaximizerReport> {
        self.maximizers
            .iter()
            .max_by(|a, b| a.divergence.total_cmp(&b.divergence))
    }
}

/// Centered ascent direction `log rho - log pi - <.>` of the divergence.
pub(crate) fn divergence_gradient(rho: &DensityMatrix, pi: &DensityMatrix) -> CMatrix {
    let k = support_log(rho, SNAP_TOL) - support_log(pi, SNAP_TOL);
    let mean = rho.expectation(&k);
    let d = rho.dim();
    let mut k = hermitian_part(&k);
    for i in 0..d {
        k[(i, i)] -= mean;
    }
    let p = rho.spectrum().projector(|v| v > SNAP_TOL);
    // only the support block and its coupling to the rest move the state
    hermitian_part(&(&p * &k + &k * &p - &p * &k * &p))
}

fn snap(shape: &crate::SystemShape, m: &CMatrix) -> Result<DensityMatrix> {
    let s = Spectrum::of(&hermitian_part(m));
    let cut = SNAP_TOL * s.max();
    let snapped = s.apply(|v| if v > cut { v } else { 0.0 });
    DensityMatrix::from_numerical(shape.clone(), &pinch(shape, &snapped))
}

struct Ascent {
    state: DensityMatrix,
    divergence: f64,
    steps: usize,
    converged: bool,
}

fn ascend(model: &HierarchicalModelSpec, start: DensityMatrix, opts: &SearchOptions) -> Result<Ascent> {
    let shape = model.shape().clone();
    let mut rho = start;
    let mut res = maxent_project(&rho, model, &opts.projection)?;
    let mut value = res.divergence;
    let mut eta = 1.0;
    let mut steps = 0;
    let mut converged = false;
    while steps < opts.max_steps {
        let k = divergence_gradient(&rho, &res.pi);
        if hs_norm(&(&k * rho.matrix())) <= opts.stationarity_tol {
            converged = true;
            break;
        }
        steps += 1;
        let ks = Spectrum::of(&k);
        // first-order gain per unit step: tr(rho K^2)
        let slope = rho.expectation(&(&k * &k));
        let mut accepted = false;
        while eta > 1e-12 {
            let e = ks.apply(|v| (0.5 * eta * v).exp());
            let trial = snap(&shape, &(&e * rho.matrix() * &e))?;
            let trial_res = maxent_project(&trial, model, &opts.projection)?;
            if trial_res.divergence >= value + 1e-4 * eta * slope {
                rho = trial;
                value = trial_res.divergence;
                res = trial_res;
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if !accepted {
            converged = true;
            break;
        }
        eta = (eta * 2.0).min(1e3);
    }
    Ok(Ascent {
        state: rho,
        divergence: value,
        steps,
        converged,
    })
}

fn start_state(model: &HierarchicalModelSpec, seed: u64, restart: usize) -> Result<DensityMatrix> {
    let shape = model.shape();
    let mut rng = random::rng(seed, restart as u64);
    if shape.is_classical() {
        random::random_distribution(shape, &mut rng)
    } else {
        random::ginibre_state(shape, shape.dim(), &mut rng)
    }
}

/// Builds the report for one state.
pub fn describe(
    model: &HierarchicalModelSpec,
    state: DensityMatrix,
    divergence: f64,
    bound: &SupportBound,
) -> Result<MaximizerReport> {
    let rank = state.rank(RANK_TOL);
    let support_size = state
        .shape()
        .is_classical()
        .then(|| state.diagonal().iter().filter(|&&p| p > RANK_TOL).count());
    let exp = check_exponential_form(&state, model)?;
    Ok(MaximizerReport {
        divergence,
        rank,
        support_size,
        bound: bound.value,
        bound_satisfied: rank <= bound.max_rank,
        exp_form_residual: exp.residual,
        restarts: 1,
        seed: 0,
        restart: 0,
        steps: 0,
        converged: true,
        state,
    })
}

/// Multi-start ascent of `rho -> d_U(rho)`. Deterministic for a given seed.
pub fn local_max_search(model: &HierarchicalModelSpec, opts: &SearchOptions) -> Result<SearchReport> {
    if !model.has_dense() {
        return Err(crate::Error::OutOfRange("search needs a dense model".into()));
    }
    let bound = support_bound(model);
    let runs: Vec<Result<MaximizerReport>> = (0..opts.restarts)
        .into_par_iter()
        .map(|restart| {
            let start = start_state(model, opts.seed, restart)?;
            let a = ascend(model, start, opts)?;
            let mut rep = describe(model, a.state, a.divergence, &bound)?;
            rep.seed = opts.seed;
            rep.restart = restart;
            rep.steps = a.steps;
            rep.converged = a.converged;
            Ok(rep)
        })
        .collect();
    let mut maximizers: Vec<MaximizerReport> = Vec::new();
    let mut failures = Vec::new();
    for (restart, run) in runs.into_iter().enumerate() {
        match run {
            Ok(rep) => {
                if let Some(m) = maximizers
                    .iter_mut()
                    .find(|m| (m.divergence - rep.divergence).abs() <= 1e-6)
                {
                    m.restarts += 1;
                } else {
                    maximizers.push(rep);
                }
            }
            Err(e) => failures.push((restart, e.to_string())),
        }
    }
    Ok(SearchReport {
        bound,
        seed: opts.seed,
        restarts: opts.restarts,
        maximizers,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::{build_model, Hypergraph};
    use crate::shape::SystemShape;
    use std::f64::consts::LN_2;

    fn model(shape: SystemShape, u: Hypergraph) -> HierarchicalModelSpec {
        build_model(&shape, &u).unwrap()
    }

    #[test]
    fn bounds() {
        let b = support_bound(&model(SystemShape::bits(2), Hypergraph::independence(2)));
        assert_eq!((b.value, b.max_rank), (3.0, 3));
        let q = support_bound(&model(SystemShape::qubits(2), Hypergraph::independence(2)));
        assert!((q.value - 7f64.sqrt()).abs() < 1e-15);
        assert_eq!(q.max_rank, 2);
        let c = support_bound(&model(SystemShape::bits(3), Hypergraph::k_local(3, 2).unwrap()));
        assert_eq!(c.max_rank, 7);
        let mixed = SystemShape::new(vec![2, 2], vec![UnitKind::Classical, UnitKind::Quantum]).unwrap();
        let m = support_bound(&model(mixed, Hypergraph::independence(2)));
        // D = 1 + 3 = 4, budget 5 over two blocks of size 2: ranks (2, 1)
        assert!(m.extension);
        assert_eq!(m.max_rank, 3);
    }

    #[test]
    fn exp_form_of_model_state_and_correlated_pair() {
        let m = model(SystemShape::qubits(2), Hypergraph::independence(2));
        let mut r = random::rng(2, 0);
        let rho = random::random_model_state(&m, 1.0, &mut r).unwrap();
        assert!(check_exponential_form(&rho, &m).unwrap().residual < 1e-10);

        let mc = model(SystemShape::bits(2), Hypergraph::independence(2));
        let pair = DensityMatrix::from_probabilities(SystemShape::bits(2), &[0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!(check_exponential_form(&pair, &mc).unwrap().residual < 1e-8);

        let generic = random::ginibre_state(&SystemShape::qubits(2), 4, &mut r).unwrap();
        assert!(check_exponential_form(&generic, &m).unwrap().residual > 1e-3);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let shape = SystemShape::bits(3);
        let m = model(shape.clone(), Hypergraph::k_local(3, 2).unwrap());
        let mut r = random::rng(9, 0);
        let rho = random::random_distribution(&shape, &mut r).unwrap();
        let opts = ProjectionOptions::default();
        let f = |p: &DensityMatrix| maxent_project(p, &m, &opts).unwrap().divergence;
        let k = divergence_gradient(&rho, &maxent_project(&rho, &m, &opts).unwrap().pi);
        let dir: Vec<f64> = (0..8).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let h = 1e-6;
        let p0 = rho.diagonal();
        let plus: Vec<f64> = p0.iter().zip(&dir).map(|(p, d)| p + h * d).collect();
        let minus: Vec<f64> = p0.iter().zip(&dir).map(|(p, d)| p - h * d).collect();
        let fd = (f(&DensityMatrix::from_probabilities(shape.clone(), &plus).unwrap())
            - f(&DensityMatrix::from_probabilities(shape.clone(), &minus).unwrap()))
            / (2.0 * h);
        let analytic: f64 = (0..8).map(|i| k[(i, i)].re * dir[i]).sum();
        assert!((fd - analytic).abs() < 1e-6, "{fd} vs {analytic}");
    }

    #[test]
    fn two_bits_reach_log_two() {
        let m = model(SystemShape::bits(2), Hypergraph::independence(2));
        let rep = local_max_search(&m, &SearchOptions { restarts: 4, ..Default::default() }).unwrap();
        let best = rep.best().unwrap();
        assert!((best.divergence - LN_2).abs() < 1e-6, "{best:?}");
        assert_eq!(best.support_size, Some(2));
        assert!(best.bound_satisfied);
    }

    #[test]
    fn search_is_deterministic() {
        let m = model(SystemShape::qubits(2), Hypergraph::independence(2));
        let opts = SearchOptions { restarts: 2, max_steps: 50, ..Default::default() };
        let a = local_max_search(&m, &opts).unwrap();
        let b = local_max_search(&m, &opts).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
