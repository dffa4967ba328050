//! Kernel sums: the paraboloid `L²` kernel, `F_C(a) = √(a(C − a³))` and its
//! clustering sums, and the `L⁴` kernel on the moment curve.

use crate::domain::{Coefficients, Limits, PhaseSystem, Support};
use crate::error::{domain, Result};
use crate::sum::{par_sum, Neumaier};
use serde::Serialize;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct KernelBound {
    pub value: f64,
    /// `value / (‖a‖₂² N^{(d−3)/2} factor(d))`, factor `N^{1/2}`, `log N`, `1`
    /// for `d = 2`, `3`, `≥ 4`; `log N` is replaced by `1` at `N = 1`.
    pub normalized: f64,
}

/// `Σ_{𝐦,𝐧} |a_𝐦 a_𝐧| (1 + |(𝐦−𝐧, |𝐦|²−|𝐧|²)|)^{−β}` over `{1..N}^{d−1}`.
pub fn parab_kernel_bound(d: usize, n: i64, beta: f64, a: &Coefficients, limits: &Limits) -> Result<KernelBound> {
    if !(beta > 0.0) {
        return domain("beta must be positive");
    }
    let sys = PhaseSystem::Paraboloid { d, n };
    let table = a.frequencies(&sys)?;
    let k = a.len();
    limits.check_tuples("paraboloid kernel pairs", (k as u128).pow(2))?;
    let weights: Vec<f64> = a.values().iter().map(|z| z.norm()).collect();
    let pts: Vec<Vec<f64>> = (0..k).map(|i| table.row(i).iter().map(|&v| v as f64).collect()).collect();
    let kernel = |i: usize, j: usize| {
        let dist2: f64 = pts[i].iter().zip(&pts[j]).map(|(x, y)| (x - y) * (x - y)).sum();
        let base = 1.0 + dist2.sqrt();
        if beta == 1.0 {
            1.0 / base
        } else {
            base.powf(-beta)
        }
    };
    // Off-diagonal pairs counted twice.
    let off = par_sum(k, |i| {
        let mut acc = Neumaier::new();
        for j in i + 1..k {
            acc.add(weights[j] * kernel(i, j));
        }
        2.0 * weights[i] * acc.value()
    });
    let diag: f64 = weights.iter().map(|w| w * w).sum();
    let value = off + diag;
    let nf = n as f64;
    let factor = match d {
        2 => nf.sqrt(),
        3 if n > 1 => nf.ln(),
        _ => 1.0,
    };
    let norm2 = a.l2().powi(2);
    let scale = norm2 * nf.powf((d as f64 - 3.0) / 2.0) * factor;
    let normalized = if scale > 0.0 { value / scale } else { 0.0 };
    Ok(KernelBound { value, normalized })
}

/// The constant sequence on the paraboloid index set.
pub fn paraboloid_ones(d: usize, n: i64) -> Result<Coefficients> {
    let points = PhaseSystem::Paraboloid { d, n }.lattice_points()?;
    let len = points.len();
    Coefficients::new(Support::Points { points }, vec![num_complex::Complex64::new(1.0, 0.0); len])
}

/// `F_C(a) = √(a(C − a³))` for `0 < a < C^{1/3}`.
pub fn f_c(c: f64, a: f64) -> Result<f64> {
    if !(c > 0.0) {
        return domain("C must be positive");
    }
    let inner = c - a * a * a;
    if !(a > 0.0) || !(inner > 0.0) {
        return domain(format!("a = {a} lies outside (0, C^(1/3)) for C = {c}"));
    }
    Ok((a * inner).sqrt())
}

/// Maximiser `(C/4)^{1/3}` of `F_C`.
pub fn fc_a_max(c: f64) -> f64 {
    (c / 4.0).cbrt()
}

fn check_c(c: f64) -> Result<()> {
    if !(c > 1000.0) {
        return domain(format!("C must exceed 1000, got {c}"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IncrementBand {
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Both ratios inside `[1/20, 20]`.
    pub within: bool,
}

/// Range of `|F_C(a_max − y) − F_C(a_max)| / y²` over `ys`.
pub fn fc_increment_check(c: f64, ys: &[f64]) -> Result<IncrementBand> {
    check_c(c)?;
    if ys.is_empty() {
        return domain("the y grid is empty");
    }
    let am = fc_a_max(c);
    let top = f_c(c, am)?;
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for &y in ys {
        if !(y > 0.0 && y < am) {
            return domain(format!("y = {y} must lie in (0, a_max)"));
        }
        let r = (f_c(c, am - y)? - top).abs() / (y * y);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok(IncrementBand { min_ratio: lo, max_ratio: hi, within: lo >= 1.0 / 20.0 && hi <= 20.0 })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ClusterSup {
    /// `sup_x Σ_{a=1}^{⌊a_max⌋} 1/(|F_C(a) − x|^β + D^β)`.
    pub sup: f64,
    pub argmax: f64,
    /// `D^β · sup`.
    pub scaled_sup: f64,
    /// `2 + 4 D^β Σ_a 1/((F_C(M) − F_C(a))^β + D^β)`, `M = ⌊a_max⌋`.
    pub convex_bound: f64,
    pub convex_bound_holds: bool,
}

/// Supremum of the `F_C` clustering sum over `x ≥ 0`: a grid of step `step`
/// over `[0, F_C(a_max)]`, every cusp `F_C(a)`, and a golden-section pass
/// around the best grid point.
pub fn cor_cip_sup(c: f64, d: f64, beta: f64, step: f64) -> Result<ClusterSup> {
    check_c(c)?;
    if !(beta > 0.5 && beta < 1.0) {
        return domain("beta must lie in (1/2, 1)");
    }
    if !(d > 0.0) {
        return domain("D must be positive");
    }
    if !(step > 0.0 && step <= d / 4.0) {
        return domain(format!("grid step {step} must lie in (0, D/4]"));
    }
    let am = fc_a_max(c);
    let top_a = am.floor() as usize;
    if top_a < 1 {
        return domain("no integer a in [1, a_max]");
    }
    let f: Vec<f64> = (1..=top_a).map(|a| f_c(c, a as f64)).collect::<Result<_>>()?;
    let db = d.powf(beta);
    let sum_at = |x: f64| {
        let mut acc = Neumaier::new();
        for &fa in &f {
            acc.add(1.0 / ((fa - x).abs().powf(beta) + db));
        }
        acc.value()
    };
    let hi = f_c(c, am)?;
    let steps = (hi / step).ceil() as usize;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for i in 0..=steps {
        let x = (i as f64 * step).min(hi);
        let v = sum_at(x);
        if v > best.0 {
            best = (v, x);
        }
    }
    for &x in &f {
        let v = sum_at(x);
        if v > best.0 {
            best = (v, x);
        }
    }
    let (mut lo_x, mut hi_x) = ((best.1 - step).max(0.0), (best.1 + step).min(hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let x1 = hi_x - g * (hi_x - lo_x);
        let x2 = lo_x + g * (hi_x - lo_x);
        let (v1, v2) = (sum_at(x1), sum_at(x2));
        for (v, x) in [(v1, x1), (v2, x2)] {
            if v > best.0 {
                best = (v, x);
            }
        }
        if v1 >= v2 {
            hi_x = x2;
        } else {
            lo_x = x1;
        }
    }
    let fm = *f.last().expect("nonempty");
    let mut tail = Neumaier::new();
    for &fa in &f {
        tail.add(1.0 / ((fm - fa).abs().powf(beta) + db));
    }
    let convex_bound = 2.0 + 4.0 * db * tail.value();
    let scaled_sup = db * best.0;
    Ok(ClusterSup {
        sup: best.0,
        argmax: best.1,
        scaled_sup,
        convex_bound,
        convex_bound_holds: scaled_sup <= convex_bound + 1e-9,
    })
}

fn l4_check(n: i64, beta: f64, limits: &Limits) -> Result<()> {
    if !(1..=512).contains(&n) {
        return domain(format!("N must lie in [1, 512], got {n}"));
    }
    if !(beta > 0.0) {
        return domain("beta must be positive");
    }
    limits.check_points("L4 kernel terms", (n as u128).pow(4) / 2 + 1)
}

/// `Σ_{n₂≠n₄} (|n₁²+n₂²−n₃²−n₄²|^β + |n₁³+n₂³−n₃³−n₄³|^β + 1)^{−1}`.
pub fn l4_kernel_row(n: i64, beta: f64, n1: i64, n3: i64) -> Result<f64> {
    if !(1..=n).contains(&n1) || !(1..=n).contains(&n3) {
        return domain("n1 and n3 must lie in [1, N]");
    }
    let quad = quad_powers(n, beta);
    Ok(row_sum(n, beta, n1, n3, &quad))
}

fn quad_powers(n: i64, beta: f64) -> Vec<f64> {
    (0..=2 * n * n).map(|k| (k as f64).powf(beta)).collect()
}

fn row_sum(n: i64, beta: f64, n1: i64, n3: i64, quad: &[f64]) -> f64 {
    let s2 = n1 * n1 - n3 * n3;
    let s3 = n1 * n1 * n1 - n3 * n3 * n3;
    let mut acc = Neumaier::new();
    for n2 in 1..=n {
        let (q2, c2) = (s2 + n2 * n2, s3 + n2 * n2 * n2);
        for n4 in 1..=n {
            if n4 == n2 {
                continue;
            }
            let qa = (q2 - n4 * n4).unsigned_abs() as usize;
            let cb = (c2 - n4 * n4 * n4).unsigned_abs() as f64;
            acc.add(1.0 / (quad[qa] + cb.powf(beta) + 1.0));
        }
    }
    acc.value()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct KernelSup {
    pub sup: f64,
    pub n1: i64,
    pub n3: i64,
}

/// `sup_{n₁,n₃ ∈ [1,N]}` of [`l4_kernel_row`]; rows with `n₁ > n₃` are the
/// mirror images of `n₁ < n₃` and are skipped.
pub fn l4_kernel_sup(n: i64, beta: f64, limits: &Limits) -> Result<KernelSup> {
    l4_check(n, beta, limits)?;
    let quad = quad_powers(n, beta);
    use rayon::prelude::*;
    let rows: Vec<(f64, i64, i64)> = (1..=n)
        .into_par_iter()
        .flat_map_iter(|n1| (n1..=n).map(move |n3| (n1, n3)))
        .map(|(n1, n3)| (row_sum(n, beta, n1, n3, &quad), n1, n3))
        .collect();
    limits.check_deadline("L4 kernel sup")?;
    let mut best = KernelSup { sup: 0.0, n1: 1, n3: 1 };
    for (v, n1, n3) in rows {
        if v > best.sup {
            best = KernelSup { sup: v, n1, n3 };
        }
    }
    Ok(best)
}
