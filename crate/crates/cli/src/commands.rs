use std::path::Path;

use hiercorr::basis::{basis_e, gram_defect, hermitize_basis};
use hiercorr::factorization::{
    build_interaction_matrix, check_toric_membership, config_label, enumerate_feasibility, is_k_feasible, toric_kernel,
    SupportSet,
};
use hiercorr::hierarchy::{build_model_with, model_dim, pure_factor_dim, HierarchicalModelSpec};
use hiercorr::io::{read_hypergraph, read_shape, read_state, HypergraphFile, StateFile};
use hiercorr::maxent::{correlation_ck_with, decompose, maxent_project, multi_information, Method, ProjectionOptions};
use hiercorr::maximizers::{local_max_search, SearchOptions};
use hiercorr::reproduce::{adjoint_relation_defect, model_rank, run_criterion, DemoConfig, CRITERIA};
use hiercorr::two_qubit::{
    bell_from_lambda, bell_from_t, fig1_geometry_export, is_classically_correlated_bd, is_separable, is_separable_by_t,
    mutual_information_bd, verify_theorem1,
};
use hiercorr::{Hypergraph, SystemShape, UnitKind};
use serde_json::json;

use crate::report::{Failure, Outcome};
use crate::{Cli, Command, MethodArg, ModelArgs};

const DENSE_ENTRIES: usize = 70_000;

fn projection_options(cli: &Cli, method: MethodArg) -> ProjectionOptions {
    let method = match method {
        MethodArg::Auto => Method::Auto,
        MethodArg::Dual => Method::Dual,
        MethodArg::Primal => Method::Primal,
        MethodArg::Ipf => Method::Ipf,
    };
    let mut opts = ProjectionOptions::with_method(method);
    if let Some(tol) = cli.common.tol {
        opts.tol = tol;
    }
    opts
}

fn tolerances(opts: &ProjectionOptions) -> serde_json::Value {
    json!({
        "constraint": opts.tol,
        "boundary_constraint": opts.boundary_tol,
        "non_standard": !opts.is_standard(),
    })
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, Failure> {
    text.split(',')
        .map(|s| s.trim().parse::<T>().map_err(|_| Failure::validation(format!("bad {what} entry {s:?} in {text:?}"))))
        .collect()
}

fn parse_kinds(text: &str, n: usize) -> Result<Vec<UnitKind>, Failure> {
    let one = |s: &str| match s.trim() {
        "c" | "classical" => Ok(UnitKind::Classical),
        "q" | "quantum" => Ok(UnitKind::Quantum),
        other => Err(Failure::validation(format!("unknown unit kind {other:?}"))),
    };
    if !text.contains(',') {
        return Ok(vec![one(text)?; n]);
    }
    let kinds = text.split(',').map(one).collect::<Result<Vec<_>, _>>()?;
    if kinds.len() != n {
        return Err(Failure::validation(format!("{} kinds for {n} units", kinds.len())));
    }
    Ok(kinds)
}

/// `spec` is either a shape file or comma-separated unit sizes.
fn parse_shape(spec: &str, kinds: Option<&str>, default: UnitKind) -> Result<SystemShape, Failure> {
    if Path::new(spec).is_file() {
        if kinds.is_some() {
            return Err(Failure::validation("--kinds cannot be combined with a shape file"));
        }
        return Ok(read_shape(Path::new(spec))?);
    }
    let sizes: Vec<usize> = parse_list(spec, "size")?;
    let kinds = match kinds {
        Some(k) => parse_kinds(k, sizes.len())?,
        None => vec![default; sizes.len()],
    };
    Ok(SystemShape::new(sizes, kinds)?)
}

fn hypergraph(args: &ModelArgs, n_units: usize) -> Result<Hypergraph, Failure> {
    match (&args.hypergraph, args.k) {
        (Some(path), None) => {
            let u = read_hypergraph(path)?;
            if u.n_units() != n_units {
                return Err(Failure::validation(format!(
                    "hypergraph has N = {} but the shape has {n_units} units",
                    u.n_units()
                )));
            }
            Ok(u)
        }
        (None, Some(k)) => Ok(Hypergraph::k_local(n_units, k)?),
        _ => Err(Failure::validation("give --hypergraph or --k")),
    }
}

fn model_for(shape: &SystemShape, u: &Hypergraph) -> Result<HierarchicalModelSpec, Failure> {
    let (total, _) = model_dim(shape, u);
    let d = shape.dim();
    Ok(build_model_with(shape, u, total.saturating_mul(d * d) <= DENSE_ENTRIES)?)
}

fn one_based(set: hiercorr::UnitSet) -> Vec<usize> {
    set.iter().map(|i| i + 1).collect()
}

pub fn run(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Project { state, model, method } => {
            let rho = read_state(state)?;
            let u = hypergraph(model, rho.shape().n_units())?;
            let spec = hiercorr::build_model(rho.shape(), &u)?;
            let opts = projection_options(cli, *method);
            let res = maxent_project(&rho, &spec, &opts)?;
            let converged = res.converged;
            let mut out = Outcome::new(json!({
                "projection": res,
                "pi": StateFile::from_state(&res.pi),
            }))
            .info(&["projection/divergence", "projection/dual_bound"])
            .diag("tolerances", tolerances(&opts))
            .diag("constraint_residual", res.constraint_residual)
            .diag("iterations", res.iterations);
            out.converged = converged;
            Ok(out)
        }
        Command::Ck { state, k, method } => {
            let rho = read_state(state)?;
            let opts = projection_options(cli, *method);
            let res = correlation_ck_with(&rho, *k, &opts)?;
            let mut out = Outcome::new(json!({
                "k": k,
                "value": res.divergence,
                "projection": res,
            }))
            .info(&["value", "projection/divergence", "projection/dual_bound"])
            .diag("tolerances", tolerances(&opts))
            .diag("constraint_residual", res.constraint_residual)
            .diag("iterations", res.iterations);
            out.converged = res.converged;
            Ok(out)
        }
        Command::Decompose { state } => {
            let rho = read_state(state)?;
            let opts = projection_options(cli, MethodArg::Auto);
            let dec = decompose(&rho, &opts)?;
            let mut out = Outcome::new(&dec)
                .info(&["c", "irreducible", "sum_defect"])
                .diag("tolerances", tolerances(&opts))
                .diag("constraint_residuals", &dec.residuals);
            out.converged = dec.converged.iter().all(|&c| c);
            Ok(out)
        }
        Command::Multiinfo { state } => {
            let rho = read_state(state)?;
            Ok(Outcome::new(json!({ "value": multi_information(&rho)? }))
                .info(&["value"])
                .diag("method", "closed_form"))
        }
        Command::Dims { shape, kinds, model } => {
            let shape = parse_shape(shape, kinds.as_deref(), UnitKind::Quantum)?;
            let u = hypergraph(model, shape.n_units())?;
            let (total, dim) = model_dim(&shape, &u);
            let spec = model_for(&shape, &u)?;
            let (rank, method) = model_rank(&spec);
            let sets: Vec<_> = u
                .sets()
                .iter()
                .map(|&v| json!({ "set": one_based(v), "pure_factor_dim": pure_factor_dim(&shape, v) }))
                .collect();
            Ok(Outcome::new(json!({
                "shape": shape,
                "hypergraph": HypergraphFile::from_hypergraph(&u),
                "sets": sets,
                "dim_total": total,
                "dim_model": dim,
                "numerical_rank": rank,
                "matches_closed_form": rank == total,
            }))
            .diag("rank_method", method))
        }
        Command::Basis { n, hermitian } => {
            if *n == 0 {
                return Err(Failure::validation("n must be at least 1"));
            }
            let e = basis_e(*n);
            let (elements, defect) = if *hermitian {
                let h = hermitize_basis(&e)?;
                let defect = gram_defect(&h);
                (h, defect)
            } else {
                let defect = gram_defect(&e);
                (e, defect)
            };
            let matrices: Vec<_> = elements
                .iter()
                .enumerate()
                .map(|(i, m)| {
                    let rows: Vec<Vec<[f64; 2]>> = (0..*n)
                        .map(|r| (0..*n).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
                        .collect();
                    if *hermitian {
                        json!({ "index": i, "matrix": rows })
                    } else {
                        json!({ "k": i / n, "l": i % n, "matrix": rows })
                    }
                })
                .collect();
            let mut out = Outcome::new(json!({ "n": n, "hermitian": hermitian, "elements": matrices }))
                .diag("gram_defect", defect);
            if !hermitian {
                out = out.diag("adjoint_relation_defect", adjoint_relation_defect(*n));
            }
            Ok(out)
        }
        Command::Feasibility { shape, k, support, exhaustive, max_size } => {
            let shape = parse_shape(shape, None, UnitKind::Classical)?;
            if !shape.is_classical() {
                return Err(Failure::validation("feasibility needs a classical shape"));
            }
            match (support, exhaustive) {
                (Some(list), false) => {
                    let labels: Vec<&str> = list.split(',').map(str::trim).collect();
                    let f = SupportSet::from_labels(&shape, &labels)?;
                    Ok(Outcome::new(json!({
                        "support": f.labels(&shape),
                        "k": k,
                        "feasible": is_k_feasible(&f, &shape, *k)?,
                    })))
                }
                (None, true) => {
                    let rep = enumerate_feasibility(&shape, *k, max_size.unwrap_or(shape.dim()))?;
                    Ok(Outcome::new(rep))
                }
                _ => Err(Failure::validation("give --support or --exhaustive")),
            }
        }
        Command::Toric { shape, k, state, csv } => {
            let shape = parse_shape(shape, None, UnitKind::Classical)?;
            let a = build_interaction_matrix(&shape, *k)?;
            let kernel = toric_kernel(&a)?;
            let columns: Vec<String> = (0..a.n_cols()).map(|x| config_label(&shape, x)).collect();
            let membership = match state {
                Some(path) => {
                    let rho = read_state(path)?;
                    if rho.shape() != &shape {
                        return Err(Failure::validation("state shape differs from --shape"));
                    }
                    Some(check_toric_membership(&rho.diagonal(), &a)?)
                }
                None => None,
            };
            let mut out = Outcome::new(json!({
                "rows": a.rows().iter().map(|r| r.label()).collect::<Vec<_>>(),
                "columns": columns,
                "matrix": a.entries(),
                "kernel": kernel,
                "membership": membership,
            }))
            .diag("kernel_rank", kernel.len());
            if *csv {
                let mut text = a.to_csv();
                text.push_str("\nkernel,");
                text.push_str(&columns.join(","));
                text.push('\n');
                for (i, w) in kernel.iter().enumerate() {
                    text.push_str(&format!("{},", i + 1));
                    text.push_str(&w.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
                    text.push('\n');
                }
                out.raw = Some(text);
            }
            Ok(out)
        }
        Command::Maximize { shape, kinds, model, restarts, max_steps } => {
            let shape = parse_shape(shape, kinds.as_deref(), UnitKind::Quantum)?;
            let u = hypergraph(model, shape.n_units())?;
            let spec = hiercorr::build_model(&shape, &u)?;
            let opts = SearchOptions {
                restarts: *restarts,
                seed: cli.common.seed,
                max_steps: *max_steps,
                projection: projection_options(cli, MethodArg::Auto),
                ..Default::default()
            };
            let rep = local_max_search(&spec, &opts)?;
            let tol = tolerances(&opts.projection);
            let mut out = Outcome::new(&rep)
                .info(&["maximizers/*/divergence"])
                .diag("tolerances", tol)
                .diag("stationarity_tol", opts.stationarity_tol)
                .diag("bound_is_extension", rep.bound.extension);
            out.converged = rep.failures.is_empty() && rep.maximizers.iter().any(|m| m.converged);
            Ok(out)
        }
        Command::Bell { t, lambda } => {
            let b = match (t, lambda) {
                (Some(t), None) => {
                    let v: Vec<f64> = parse_list(t, "t")?;
                    let arr: [f64; 3] = v.try_into().map_err(|_| Failure::validation("--t needs three values"))?;
                    bell_from_t(arr)?
                }
                (None, Some(l)) => {
                    let v: Vec<f64> = parse_list(l, "lambda")?;
                    let arr: [f64; 4] = v.try_into().map_err(|_| Failure::validation("--lambda needs four values"))?;
                    bell_from_lambda(arr)?
                }
                _ => return Err(Failure::validation("give --t or --lambda")),
            };
            Ok(Outcome::new(json!({
                "t": b.t,
                "lambda": b.lambda,
                "separable": is_separable(&b),
                "separable_by_t": is_separable_by_t(&b),
                "mutual_information": mutual_information_bd(&b),
                "classical_correlation": is_classically_correlated_bd(&b),
            }))
            .info(&["mutual_information"])
            .diag("physical_tol", hiercorr::two_qubit::PHYSICAL_TOL))
        }
        Command::Theorem1 { samples } => {
            let rep = verify_theorem1(*samples, cli.common.seed)?;
            let passed = rep.passed;
            let mut out = Outcome::new(&rep)
                .info(&["bound", "max_sampled", "vertices/*/mutual_information"])
                .diag("bound_tol", 1e-9);
            if !passed {
                out.failed.push("mutual-information bound".into());
            }
            Ok(out)
        }
        Command::Fig1 { grid } => {
            let geo = fig1_geometry_export(*grid)?;
            let mut out = Outcome::new(json!({
                "grid": grid,
                "points": geo.grid.len(),
                "tetrahedron": geo.tetrahedron,
                "octahedron": geo.octahedron,
                "center": geo.center,
            }))
            .diag("format", "csv");
            out.raw = Some(geo.to_csv());
            Ok(out)
        }
        Command::Demo { only, samples, restarts } => {
            let cfg = DemoConfig {
                seed: cli.common.seed,
                theorem1_samples: *samples,
                search_restarts: *restarts,
                projection: projection_options(cli, MethodArg::Auto),
            };
            let ids: Vec<usize> = if only.is_empty() { (1..=CRITERIA.len()).collect() } else { only.clone() };
            let mut outcomes = Vec::new();
            for id in ids {
                let o = run_criterion(id, &cfg)
                    .ok_or_else(|| Failure::validation(format!("no check numbered {id}")))?;
                eprintln!("{:>2} {} {}", o.id, if o.passed { "PASS" } else { "FAIL" }, o.name);
                outcomes.push(o);
            }
            let failed: Vec<String> = outcomes
                .iter()
                .filter(|o| !o.passed)
                .map(|o| format!("{} {}: {}", o.id, o.name, o.summary))
                .collect();
            let non_standard = !cfg.is_standard()
                || *samples != DemoConfig::default().theorem1_samples
                || *restarts != DemoConfig::default().search_restarts;
            let mut out = Outcome::new(json!({ "checks": outcomes }))
                .diag("tolerances", tolerances(&cfg.projection))
                .diag("non_standard", non_standard);
            out.failed = failed;
            Ok(out)
        }
    }
}
