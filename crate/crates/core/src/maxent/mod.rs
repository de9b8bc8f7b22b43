//! Maximum-entropy projection onto hierarchical models and the correlation
//! measures built from it.
//!
//! `pi_U(rho)` is the state of maximal von Neumann entropy whose expectations
//! agree with those of `rho` on every element of the model space. The
//! divergence from the model is `H(pi) - H(rho)`, the `k`-party correlation is
//! `c_k = d_{U_k}` and the irreducible part is `C_k = c_{k-1} - c_k`.

mod dual;
mod ipf;
mod primal;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hierarchy::{build_model, HierarchicalModelSpec, Hypergraph};
use crate::linalg::{hermitian_part, CMatrix, Spectrum};
use crate::state::{relative_entropy, von_neumann_entropy, DensityMatrix};

const NEAR_SINGULAR: f64 = 1e-6;

/// Solver selection for [`maxent_project`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Closed forms where they exist, IPF for classical shapes, otherwise the
    /// dual with a primal fallback on the boundary.
    #[default]
    Auto,
    Dual,
    Primal,
    Ipf,
}

/// The route that produced a [`ProjectionResult`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolvedBy {
    ClosedForm,
    Dual,
    Primal,
    Ipf,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProjectionOptions {
    pub method: Method,
    /// Constraint tolerance for interior solutions.
    pub tol: f64,
    /// Constraint tolerance accepted for boundary (primal) solutions.
    pub boundary_tol: f64,
    pub max_iter: usize,
    pub ipf_max_sweeps: usize,
    /// The dual gives up once `|theta|` exceeds this.
    pub theta_limit: f64,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        ProjectionOptions {
            method: Method::Auto,
            tol: 1e-8,
            boundary_tol: 1e-5,
            max_iter: 200,
            ipf_max_sweeps: 100_000,
            theta_limit: 1e3,
        }
    }
}

impl ProjectionOptions {
    pub fn with_method(method: Method) -> Self {
        ProjectionOptions {
            method,
            ..Default::default()
        }
    }

    /// True when every tolerance matches the defaults.
    pub fn is_standard(&self) -> bool {
        let d = ProjectionOptions::default();
        self.tol == d.tol && self.boundary_tol == d.boundary_tol && self.theta_limit == d.theta_limit
    }
}

/// Exponential-family coordinates of an interior projection:
/// `pi = exp(sum theta_i b_i - logZ)` over the non-identity model elements.
#[derive(Clone, Debug, Serialize)]
pub struct GibbsParameters {
    pub theta: Vec<f64>,
    pub log_z: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProjectionResult {
    #[serde(skip)]
    pub pi: DensityMatrix,
    pub divergence: f64,
    pub constraint_residual: f64,
    pub method: SolvedBy,
    pub iterations: usize,
    pub converged: bool,
    pub theta: Option<GibbsParameters>,
    /// Dual objective minus `H(rho)`, an upper bound on the divergence, when the dual ran.
    pub dual_bound: Option<f64>,
    pub notes: Vec<String>,
}

/// Largest deviation of model expectations of `sigma` from those of `rho`.
pub fn constraint_residual(rho: &DensityMatrix, sigma: &CMatrix, model: &HierarchicalModelSpec) -> f64 {
    model
        .dense()
        .iter()
        .map(|b| (crate::linalg::trace_product_re(sigma, b) - rho.expectation(b)).abs())
        .fold(0.0, f64::max)
}

fn finish(
    rho: &DensityMatrix,
    model: &HierarchicalModelSpec,
    pi: &CMatrix,
    method: SolvedBy,
    iterations: usize,
    converged: bool,
    tol: f64,
) -> Result<ProjectionResult> {
    let pi = DensityMatrix::from_numerical(rho.shape().clone(), &hermitian_part(pi))?;
    let residual = constraint_residual(rho, pi.matrix(), model);
    let divergence = (von_neumann_entropy(&pi) - von_neumann_entropy(rho)).max(0.0);
    Ok(ProjectionResult {
        pi,
        divergence,
        constraint_residual: residual,
        method,
        iterations,
        converged: converged && residual <= tol,
        theta: None,
        dual_bound: None,
        notes: Vec::new(),
    })
}

/// Maximum-entropy state with the model expectations of `rho`.
pub fn maxent_project(
    rho: &DensityMatrix,
    model: &HierarchicalModelSpec,
    opts: &ProjectionOptions,
) -> Result<ProjectionResult> {
    if rho.shape() != model.shape() {
        return Err(Error::ShapeMismatch);
    }
    if !model.has_dense() {
        return Err(Error::OutOfRange(format!(
            "dimension {} exceeds the dense limit {}",
            rho.dim(),
            crate::hierarchy::DENSE_DIM_LIMIT
        )));
    }
    let u = model.hypergraph();
    match opts.method {
        Method::Auto => {
            if u.is_power_set() {
                return finish(rho, model, rho.matrix(), SolvedBy::ClosedForm, 0, true, opts.tol);
            }
            if u.is_independence() {
                let pi = rho.product_of_marginals()?;
                return finish(rho, model, pi.matrix(), SolvedBy::ClosedForm, 0, true, opts.tol);
            }
            if rho.shape().is_classical() {
                return project_ipf(rho, model, opts);
            }
            let first = project_dual(rho, model, opts)?;
            if first.converged {
                // a nearly singular Gibbs state means theta is running off to
                // infinity; the primal solver reaches the face exactly
                let s = Spectrum::of(first.pi.matrix());
                if s.min() > NEAR_SINGULAR * s.max() {
                    return Ok(first);
                }
                return Ok(match project_primal(rho, model, opts) {
                    Ok(mut second) if second.converged && second.constraint_residual <= first.constraint_residual => {
                        second.notes.insert(0, "dual solution nearly singular; refined with primal".into());
                        second.dual_bound = first.dual_bound;
                        second.iterations += first.iterations;
                        second
                    }
                    _ => first,
                });
            }
            let mut second = project_primal(rho, model, opts)?;
            second.notes.insert(
                0,
                format!(
                    "dual stopped after {} iterations with residual {:.3e}; switched to primal",
                    first.iterations, first.constraint_residual
                ),
            );
            second.dual_bound = first.dual_bound;
            second.iterations += first.iterations;
            Ok(second)
        }
        Method::Dual => project_dual(rho, model, opts),
        Method::Primal => project_primal(rho, model, opts),
        Method::Ipf => project_ipf(rho, model, opts),
    }
}

fn project_dual(rho: &DensityMatrix, model: &HierarchicalModelSpec, opts: &ProjectionOptions) -> Result<ProjectionResult> {
    let basis = &model.dense()[1..];
    let targets: Vec<f64> = basis.iter().map(|b| rho.expectation(b)).collect();
    let out = dual::solve(basis, &targets, opts);
    let mut res = finish(rho, model, &out.sigma, SolvedBy::Dual, out.iterations, out.converged, opts.tol)?;
    res.dual_bound = Some(out.value - von_neumann_entropy(rho));
    if out.hit_limit {
        res.notes
            .push(format!("|theta| exceeded {:.1e}: projection is on the boundary", opts.theta_limit));
        res.converged = false;
    }
    if out.stalled {
        res.notes.push("line search stalled".into());
    }
    if res.converged {
        res.theta = Some(GibbsParameters {
            theta: out.theta,
            log_z: out.log_z,
        });
    }
    Ok(res)
}

fn project_primal(rho: &DensityMatrix, model: &HierarchicalModelSpec, opts: &ProjectionOptions) -> Result<ProjectionResult> {
    let out = primal::solve(rho, model, opts)?;
    let mut res = finish(
        rho,
        model,
        &out.pi,
        SolvedBy::Primal,
        out.iterations,
        out.converged,
        opts.boundary_tol,
    )?;
    if out.face_dim < rho.dim() {
        res.notes
            .push(format!("solution restricted to a face of dimension {}", out.face_dim));
    }
    Ok(res)
}

fn project_ipf(rho: &DensityMatrix, model: &HierarchicalModelSpec, opts: &ProjectionOptions) -> Result<ProjectionResult> {
    if !rho.shape().is_classical() {
        return Err(Error::QuantumUnit);
    }
    let sets = model.hypergraph().maximal_sets();
    let out = ipf::fit(rho.shape(), &rho.diagonal(), &sets, opts.tol * 1e-2, opts.ipf_max_sweeps);
    let pi = crate::linalg::diag(&out.p);
    let mut res = finish(rho, model, &pi, SolvedBy::Ipf, out.sweeps, out.converged, opts.tol)?;
    if !out.converged {
        res.notes
            .push(format!("IPF stopped after {} sweeps, marginal residual {:.3e}", out.sweeps, out.residual));
    }
    Ok(res)
}

/// `d_U(rho) = H(pi_U(rho)) - H(rho)` with default options.
pub fn divergence_from_model(rho: &DensityMatrix, model: &HierarchicalModelSpec) -> Result<f64> {
    Ok(maxent_project(rho, model, &ProjectionOptions::default())?.divergence)
}

fn check_k(rho: &DensityMatrix, k: usize, min: usize) -> Result<()> {
    let n = rho.shape().n_units();
    if k < min || k > n {
        return Err(Error::OutOfRange(format!("k = {k} outside {min}..={n}")));
    }
    Ok(())
}

/// Projection onto the `k`-local model.
pub fn correlation_ck_with(rho: &DensityMatrix, k: usize, opts: &ProjectionOptions) -> Result<ProjectionResult> {
    check_k(rho, k, 1)?;
    let model = build_model(rho.shape(), &Hypergraph::k_local(rho.shape().n_units(), k)?)?;
    maxent_project(rho, &model, opts)
}

/// `c_k(rho)`: divergence from the `k`-local model.
pub fn correlation_ck(rho: &DensityMatrix, k: usize) -> Result<f64> {
    Ok(correlation_ck_with(rho, k, &ProjectionOptions::default())?.divergence)
}

/// `C_k` computed both as `c_{k-1} - c_k` and as `D(pi_k || pi_{k-1})`.
#[derive(Clone, Debug, Serialize)]
pub struct IrreducibleCorrelation {
    pub k: usize,
    pub from_difference: f64,
    pub from_divergence: f64,
    pub residual: f64,
}

impl IrreducibleCorrelation {
    pub fn value(&self) -> f64 {
        self.from_difference
    }

    pub fn consistent(&self, tol: f64) -> bool {
        (self.from_difference - self.from_divergence).abs() <= tol
    }
}

pub fn irreducible_ck_with(rho: &DensityMatrix, k: usize, opts: &ProjectionOptions) -> Result<IrreducibleCorrelation> {
    check_k(rho, k, 2)?;
    let lower = correlation_ck_with(rho, k - 1, opts)?;
    let upper = correlation_ck_with(rho, k, opts)?;
    let from_divergence = relative_entropy(&upper.pi, &lower.pi)?;
    Ok(IrreducibleCorrelation {
        k,
        from_difference: lower.divergence - upper.divergence,
        from_divergence,
        residual: lower.constraint_residual.max(upper.constraint_residual),
    })
}

pub fn irreducible_ck(rho: &DensityMatrix, k: usize) -> Result<IrreducibleCorrelation> {
    irreducible_ck_with(rho, k, &ProjectionOptions::default())
}

/// `c_1 .. c_N` and `C_2 .. C_N` of one state.
#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    /// `c[k-1] = c_k`.
    pub c: Vec<f64>,
    /// `irreducible[k-2] = C_k`.
    pub irreducible: Vec<f64>,
    /// Constraint residual of each projection.
    pub residuals: Vec<f64>,
    pub converged: Vec<bool>,
    /// `|sum_k C_k - c_1|`.
    pub sum_defect: f64,
}

pub fn decompose(rho: &DensityMatrix, opts: &ProjectionOptions) -> Result<Decomposition> {
    let n = rho.shape().n_units();
    let results: Vec<ProjectionResult> = (1..=n)
        .map(|k| correlation_ck_with(rho, k, opts))
        .collect::<Result<_>>()?;
    let c: Vec<f64> = results.iter().map(|r| r.divergence).collect();
    let irreducible: Vec<f64> = (1..n).map(|i| c[i - 1] - c[i]).collect();
    let sum_defect = (irreducible.iter().sum::<f64>() - c[0]).abs();
    Ok(Decomposition {
        residuals: results.iter().map(|r| r.constraint_residual).collect(),
        converged: results.iter().map(|r| r.converged).collect(),
        c,
        irreducible,
        sum_defect,
    })
}

/// `I(rho) = sum_i H(rho_i) - H(rho)`.
pub fn multi_information(rho: &DensityMatrix) -> Result<f64> {
    let n = rho.shape().n_units();
    if n < 2 {
        return Err(Error::OutOfRange("multi-information needs at least two units".into()));
    }
    let marginals: f64 = (0..n)
        .map(|i| Ok(von_neumann_entropy(&rho.marginal(crate::shape::UnitSet::singleton(i))?)))
        .sum::<Result<f64>>()?;
    Ok(marginals - von_neumann_entropy(rho))
}

/// `|D(rho||sigma) - D(rho||pi) - D(pi||sigma)|`; infinite when any term is.
pub fn pythagorean_residual(rho: &DensityMatrix, pi: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let a = relative_entropy(rho, sigma)?;
    let b = relative_entropy(rho, pi)?;
    let c = relative_entropy(pi, sigma)?;
    if !(a.is_finite() && b.is_finite() && c.is_finite()) {
        return Ok(f64::INFINITY);
    }
    Ok((a - b - c).abs())
}
