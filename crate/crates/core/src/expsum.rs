//! Evaluation of exponential sums at points, along `x₁` fibers and on grids.

use crate::domain::{Coefficients, FrequencyTable, PhaseSystem};
use crate::error::{domain, Error, Result};
use crate::phase::{e, frac_dot, frac_mul};
use crate::quadrature::{fiber_values, AxisRule};
use crate::sum::NeumaierComplex;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Equispaced grid over the torus, `counts[k]` points on axis `k` starting
/// at `offsets[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub counts: Vec<usize>,
    pub offsets: Vec<f64>,
}

impl GridSpec {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() || counts.contains(&0) {
            return domain("grid counts must be positive");
        }
        let offsets = vec![0.0; counts.len()];
        Ok(Self { counts, offsets })
    }

    pub fn points(&self) -> u128 {
        self.counts.iter().map(|&c| c as u128).product()
    }
}

fn check_point(x: &[f64], dim: usize) -> Result<()> {
    if x.len() != dim {
        return domain(format!("point has {} coordinates, system has {dim}", x.len()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return domain("point coordinates must be finite");
    }
    Ok(())
}

/// `Σ a_n e(φ(n)·x)` from a precomputed frequency table.
pub fn eval_table(table: &FrequencyTable, values: &[Complex64], x: &[f64]) -> Complex64 {
    let mut acc = NeumaierComplex::new();
    for (n, a) in values.iter().enumerate() {
        acc.add(a * e(frac_dot(table.row(n), x)));
    }
    acc.value()
}

/// `S(x) = Σ a_n e(φ(n)·x)`.
pub fn eval_point(a: &Coefficients, sys: &PhaseSystem, x: &[f64]) -> Result<Complex64> {
    let table = a.frequencies(sys)?;
    check_point(x, table.dim)?;
    Ok(eval_table(&table, a.values(), x))
}

/// Lattice sum `Σ a_𝐧 e(𝐧·x)` over a paraboloid or sphere system.
pub fn eval_lattice_sum(a: &Coefficients, sys: &PhaseSystem, x: &[f64]) -> Result<Complex64> {
    if !matches!(sys, PhaseSystem::Paraboloid { .. } | PhaseSystem::Sphere { .. }) {
        return domain("lattice sums need a paraboloid or sphere system");
    }
    eval_point(a, sys, x)
}

/// Values at `x₁ = m/M`, `m = 0..M`, with the other coordinates fixed.
pub fn eval_fiber_x1(a: &Coefficients, sys: &PhaseSystem, x_rest: &[f64], m: usize) -> Result<Vec<Complex64>> {
    if !sys.linear_first_axis() {
        return domain("fiber evaluation needs frequency n on the first axis");
    }
    let table = a.frequencies(sys)?;
    check_point(x_rest, table.dim - 1)?;
    let n_hi = table.max_abs()[0];
    if (m as u128) < n_hi {
        return Err(Error::Resolution {
            what: "x1 fiber length".into(),
            required: vec![n_hi as u64],
            given: vec![m as u64],
        });
    }
    let first: Vec<i128> = (0..table.terms()).map(|n| table.row(n)[0]).collect();
    let b: Vec<Complex64> = a
        .values()
        .iter()
        .enumerate()
        .map(|(n, an)| an * e(frac_dot(&table.row(n)[1..], x_rest)))
        .collect();
    Ok(fiber_values(first, &b, &AxisRule::periodic(0.0, 1.0, m)?))
}

/// Per-axis counts `⌈oversample·(2·l·F_k + 1)⌉` with `F_k` the largest
/// absolute frequency on axis `k`.
pub fn nyquist_counts(table: &FrequencyTable, l: u32, oversample: f64) -> Result<Vec<u64>> {
    if l < 1 {
        return domain("nyquist counts need l >= 1");
    }
    if !(oversample >= 1.0) {
        return domain("oversample factor must be at least 1");
    }
    table
        .max_abs()
        .iter()
        .map(|&f| {
            let c = (oversample * (2.0 * l as f64 * f as f64 + 1.0)).ceil();
            if c > u64::MAX as f64 {
                Err(Error::Domain("grid count overflows".into()))
            } else {
                Ok(c as u64)
            }
        })
        .collect()
}

/// Nyquist counts for the moment curve on `[1, n]`.
pub fn nyquist_counts_moment_curve(d: usize, n: i64, l: u32, oversample: f64) -> Result<Vec<u64>> {
    let a = Coefficients::constant(1, n)?;
    nyquist_counts(&a.frequencies(&PhaseSystem::MomentCurve { d })?, l, oversample)
}

/// Values on a full-torus grid in row-major order (last axis fastest).
/// Fibers along the first axis use an FFT; fibers run in parallel.
pub fn eval_grid(a: &Coefficients, sys: &PhaseSystem, grid: &GridSpec) -> Result<Vec<Complex64>> {
    let table = a.frequencies(sys)?;
    let d = table.dim;
    if grid.counts.len() != d || grid.offsets.len() != d {
        return domain(format!("grid has {} axes, system has {d}", grid.counts.len()));
    }
    let outer_counts = &grid.counts[1..];
    let fibers: usize = outer_counts.iter().product();
    let m0 = grid.counts[0];
    let first: Vec<i128> = (0..table.terms()).map(|n| table.row(n)[0]).collect();
    let axis0 = AxisRule::periodic(grid.offsets[0] / m0 as f64, 1.0, m0)?;
    let per_fiber: Vec<Vec<Complex64>> = (0..fibers)
        .into_par_iter()
        .map(|f| {
            let mut idx = f;
            let mut x = vec![0.0; d - 1];
            for k in (0..d - 1).rev() {
                let c = outer_counts[k];
                x[k] = (idx % c) as f64 / c as f64 + grid.offsets[k + 1] / c as f64;
                idx /= c;
            }
            let b: Vec<Complex64> = a
                .values()
                .iter()
                .enumerate()
                .map(|(n, an)| {
                    let row = &table.row(n)[1..];
                    let t: f64 = row.iter().zip(&x).map(|(&k, &xk)| frac_mul(k, xk)).sum();
                    an * e(t)
                })
                .collect();
            fiber_values(first.clone(), &b, &axis0)
        })
        .collect();
    // Reorder from fiber-major to row-major with the last axis fastest.
    let mut out = vec![Complex64::new(0.0, 0.0); fibers * m0];
    for (f, vals) in per_fiber.iter().enumerate() {
        for (m, v) in vals.iter().enumerate() {
            out[m * fibers + f] = *v;
        }
    }
    Ok(out)
}
