//! Iterative proportional fitting for classical systems.

use crate::shape::{SystemShape, UnitSet};

pub(crate) struct IpfOutcome {
    pub p: Vec<f64>,
    pub sweeps: usize,
    pub residual: f64,
    pub converged: bool,
}

struct Margin {
    index: Vec<usize>,
    target: Vec<f64>,
    size: usize,
}

fn margin_of(p: &[f64], index: &[usize], size: usize) -> Vec<f64> {
    let mut out = vec![0.0; size];
    for (x, &k) in p.iter().zip(index) {
        out[k] += x;
    }
    out
}

/// Fits the marginals of `target` on every set of `sets`, starting from uniform.
pub(crate) fn fit(shape: &SystemShape, target: &[f64], sets: &[UnitSet], tol: f64, max_sweeps: usize) -> IpfOutcome {
    let d = shape.dim();
    let margins: Vec<Margin> = sets
        .iter()
        .map(|&v| {
            let index: Vec<usize> = (0..d).map(|x| shape.sub_index(&shape.digits(x), v)).collect();
            let size = v.iter().map(|i| shape.size(i)).product();
            let target = margin_of(target, &index, size);
            Margin { index, target, size }
        })
        .collect();
    let residual_of = |p: &[f64]| {
        margins
            .iter()
            .map(|m| {
                margin_of(p, &m.index, m.size)
                    .iter()
                    .zip(&m.target)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    };
    let mut p = vec![1.0 / d as f64; d];
    let mut residual = residual_of(&p);
    let mut sweeps = 0;
    while residual > tol && sweeps < max_sweeps {
        for m in &margins {
            let current = margin_of(&p, &m.index, m.size);
            for (x, &k) in p.iter_mut().zip(&m.index) {
                *x = if current[k] > 0.0 { *x * m.target[k] / current[k] } else { 0.0 };
            }
        }
        sweeps += 1;
        residual = residual_of(&p);
    }
    IpfOutcome {
        p,
        sweeps,
        residual,
        converged: residual <= tol,
    }
}
