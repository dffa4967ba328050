//! Quadrature rules and the fiber integration engine.
//!
//! Integrals of `|S|^p` are organized by fibers along the first axis. On a
//! fiber the remaining coordinates are fixed, so `S` collapses to a
//! one-variable trigonometric sum evaluated either by an FFT (periodic axis)
//! or by a precomputed node table. Outer points come from a tensor rule or a
//! stratified Monte Carlo design.

use crate::domain::{FrequencyTable, Limits};
use crate::error::{domain, Error, Result};
use crate::phase::{e, frac, frac_mul};
use crate::sum::{pairwise_sum, Neumaier};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

/// Nodes per Gauss–Legendre panel.
pub const PANEL_ORDER: usize = 32;
/// Minimum node count on a non-periodic axis.
pub const MIN_NODES: usize = 16;

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            x[0] = 0.0;
            w[0] = 2.0;
            break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    /// One period sampled at `count` equispaced points, weighted by the
    /// number of periods in the interval.
    Periodic { count: usize, periods: u32 },
    GaussLegendre { panels: usize, order: usize },
}

/// One-dimensional rule on `[lo, lo + len]`.
#[derive(Debug, Clone)]
pub struct AxisRule {
    pub lo: f64,
    pub len: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub kind: RuleKind,
}

impl AxisRule {
    /// Equispaced rule for an interval spanning a whole number of periods.
    pub fn periodic(lo: f64, len: f64, count: usize) -> Result<Self> {
        let periods = len.round();
        if count == 0 || periods < 1.0 || (len - periods).abs() > 1e-12 {
            return domain(format!("periodic rule needs an integer length and count >= 1, got {len}, {count}"));
        }
        let nodes = (0..count).map(|m| lo + m as f64 / count as f64).collect();
        let weights = vec![periods / count as f64; count];
        Ok(Self { lo, len, nodes, weights, kind: RuleKind::Periodic { count, periods: periods as u32 } })
    }

    /// Composite Gauss–Legendre with `panels` panels of `order` nodes.
    pub fn gauss(lo: f64, len: f64, panels: usize, order: usize) -> Self {
        let panels = panels.max(1);
        let (x, w) = gauss_legendre(order);
        let h = len / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for k in 0..panels {
            let a = lo + h * k as f64;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(a + 0.5 * h * (1.0 + xi));
                weights.push(0.5 * h * wi);
            }
        }
        Self { lo, len, nodes, weights, kind: RuleKind::GaussLegendre { panels, order } }
    }

    /// Gauss–Legendre rule with at least `min_nodes` nodes.
    pub fn gauss_with_nodes(lo: f64, len: f64, min_nodes: usize) -> Self {
        let target = min_nodes.max(MIN_NODES);
        if target <= PANEL_ORDER {
            Self::gauss(lo, len, 1, target)
        } else {
            Self::gauss(lo, len, target.div_ceil(PANEL_ORDER), PANEL_ORDER)
        }
    }

    pub fn len_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.kind, RuleKind::Periodic { .. })
    }

    /// A rule with roughly three quarters of the nodes, for error estimates.
    pub fn coarsened(&self) -> Self {
        match self.kind {
            RuleKind::Periodic { count, periods } => {
                Self::periodic(self.lo, periods as f64, (count * 3).div_ceil(4).max(1)).expect("valid")
            }
            RuleKind::GaussLegendre { panels, order } => {
                let n = ((panels * order) * 3).div_ceil(4).max(2);
                if n <= PANEL_ORDER {
                    Self::gauss(self.lo, self.len, 1, n)
                } else {
                    Self::gauss(self.lo, self.len, n.div_ceil(PANEL_ORDER), PANEL_ORDER)
                }
            }
        }
    }
}

/// Monte Carlo design over a box.
#[derive(Debug, Clone)]
pub struct McDesign {
    pub lo: Vec<f64>,
    pub len: Vec<f64>,
    pub samples: usize,
    pub batches: usize,
    pub seed: u64,
    /// Latin hypercube batches; plain uniform sampling otherwise.
    pub stratified: bool,
}

impl McDesign {
    pub const DEFAULT_BATCHES: usize = 16;

    pub fn volume(&self) -> f64 {
        self.len.iter().product()
    }

    /// Samples of batch `b`, mapped from the unit cube to the box. Batch `b`
    /// uses ChaCha8 seeded with `seed` on stream `b`.
    pub fn batch_points(&self, b: usize) -> Vec<Vec<f64>> {
        let n = self.batch_len(b);
        let dim = self.lo.len();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(b as u64);
        if !self.stratified {
            return (0..n)
                .map(|_| (0..dim).map(|k| self.lo[k] + self.len[k] * rng.random::<f64>()).collect())
                .collect();
        }
        let mut strata: Vec<Vec<usize>> = Vec::with_capacity(dim);
        for _ in 0..dim {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            strata.push(perm);
        }
        (0..n)
            .map(|i| {
                (0..dim)
                    .map(|k| {
                        let u: f64 = rng.random();
                        self.lo[k] + self.len[k] * (strata[k][i] as f64 + u) / n as f64
                    })
                    .collect()
            })
            .collect()
    }

    fn batch_len(&self, b: usize) -> usize {
        let base = self.samples / self.batches;
        base + usize::from(b < self.samples % self.batches)
    }
}

/// Outer design for the axes after the first (or for all axes, pointwise).
#[derive(Debug, Clone)]
pub enum Outer {
    Tensor(Vec<AxisRule>),
    Mc(McDesign),
}

impl Outer {
    fn points(&self) -> u128 {
        match self {
            Outer::Tensor(rules) => rules.iter().map(|r| r.len_nodes() as u128).product(),
            Outer::Mc(m) => m.samples as u128,
        }
    }
}

/// Integral estimate; `stderr` is zero for deterministic rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub evaluations: u64,
}

/// `|z|^p` with integer fast paths.
#[inline]
pub fn abs_pow(z: Complex64, p: f64) -> f64 {
    let r2 = z.norm_sqr();
    let half = 0.5 * p;
    if half == half.trunc() && half <= 64.0 {
        r2.powi(half as i32)
    } else {
        r2.powf(half)
    }
}

/// Evaluates one-variable sums `Σ b_n e(f_n t)` on a fixed rule.
struct FiberEvaluator {
    axis: AxisRule,
    first: Vec<i128>,
    fft: Option<(Arc<dyn Fft<f64>>, usize)>,
    /// `e(f_n t_i)`, row-major by node, for non-periodic rules.
    table: Vec<Complex64>,
}

impl FiberEvaluator {
    fn new(axis: AxisRule, first: Vec<i128>) -> Self {
        let (fft, table) = match axis.kind {
            RuleKind::Periodic { count, .. } => {
                let plan = FftPlanner::new().plan_fft_inverse(count);
                let scratch = plan.get_inplace_scratch_len();
                (Some((plan, scratch)), Vec::new())
            }
            RuleKind::GaussLegendre { .. } => {
                let mut t = Vec::with_capacity(axis.nodes.len() * first.len());
                for &x in &axis.nodes {
                    t.extend(first.iter().map(|&f| e(frac_mul(f, x))));
                }
                (None, t)
            }
        };
        Self { axis, first, fft, table }
    }

    /// Phase offset on each term contributed by the rule's anchor.
    fn anchor_phase(&self, n: usize) -> f64 {
        if self.fft.is_some() {
            frac_mul(self.first[n], self.axis.lo)
        } else {
            0.0
        }
    }

    /// `Σ_i w_i |S(t_i)|^p` for coefficients `b`.
    fn integrate(&self, b: &[Complex64], p: f64, buf: &mut Vec<Complex64>, scratch: &mut Vec<Complex64>) -> f64 {
        let mut acc = Neumaier::new();
        match &self.fft {
            Some((plan, scratch_len)) => {
                let m = self.axis.nodes.len();
                buf.clear();
                buf.resize(m, Complex64::new(0.0, 0.0));
                for (&f, &bn) in self.first.iter().zip(b) {
                    buf[f.rem_euclid(m as i128) as usize] += bn;
                }
                scratch.resize(*scratch_len, Complex64::new(0.0, 0.0));
                plan.process_with_scratch(buf, scratch);
                let w = self.axis.weights[0];
                for z in buf.iter() {
                    acc.add(abs_pow(*z, p));
                }
                acc.value() * w
            }
            None => {
                let terms = self.first.len();
                for (i, w) in self.axis.weights.iter().enumerate() {
                    let row = &self.table[i * terms..(i + 1) * terms];
                    let mut s = Complex64::new(0.0, 0.0);
                    for (t, bn) in row.iter().zip(b) {
                        s += t * bn;
                    }
                    acc.add(w * abs_pow(s, p));
                }
                acc.value()
            }
        }
    }

    /// Sum values at every node; periodic rules use the FFT.
    fn values(&self, b: &[Complex64]) -> Vec<Complex64> {
        match &self.fft {
            Some((plan, scratch_len)) => {
                let m = self.axis.nodes.len();
                let mut buf = vec![Complex64::new(0.0, 0.0); m];
                for (&f, &bn) in self.first.iter().zip(b) {
                    buf[f.rem_euclid(m as i128) as usize] += bn;
                }
                let mut scratch = vec![Complex64::new(0.0, 0.0); *scratch_len];
                plan.process_with_scratch(&mut buf, &mut scratch);
                buf
            }
            None => {
                let terms = self.first.len();
                (0..self.axis.nodes.len())
                    .map(|i| {
                        self.table[i * terms..(i + 1) * terms].iter().zip(b).map(|(t, bn)| t * bn).sum()
                    })
                    .collect()
            }
        }
    }
}

/// An exponential sum ready for repeated evaluation.
pub struct SumIntegrand<'a> {
    pub table: &'a FrequencyTable,
    pub values: &'a [Complex64],
}

impl SumIntegrand<'_> {
    /// Coefficients `b_n = a_n e(Σ_{k≥1} f_{n,k} x_k + anchor phase)`.
    fn modulate(&self, outer_x: &[f64], fiber: &FiberEvaluator, out: &mut Vec<Complex64>) {
        out.clear();
        let dim = self.table.dim;
        for (n, a) in self.values.iter().enumerate() {
            let row = self.table.row(n);
            let mut t = fiber.anchor_phase(n);
            for k in 1..dim {
                t += frac_mul(row[k], outer_x[k - 1]);
            }
            out.push(a * e(frac(t)));
        }
    }

    fn first_axis(&self) -> Vec<i128> {
        (0..self.table.terms()).map(|n| self.table.row(n)[0]).collect()
    }
}

fn outer_point(rules: &[AxisRule], mut idx: usize, x: &mut [f64]) -> f64 {
    let mut w = 1.0;
    for (k, r) in rules.iter().enumerate().rev() {
        let n = r.len_nodes();
        let i = idx % n;
        idx /= n;
        x[k] = r.nodes[i];
        w *= r.weights[i];
    }
    w
}

const OUTER_CHUNK: usize = 64;

/// `∫ |S|^p` over `axis0 × outer`.
pub fn integrate_abs_pow(
    sum: &SumIntegrand<'_>,
    axis0: &AxisRule,
    outer: &Outer,
    p: f64,
    limits: &Limits,
) -> Result<Estimate> {
    let dim = sum.table.dim;
    let outer_dim = match outer {
        Outer::Tensor(r) => r.len(),
        Outer::Mc(m) => m.lo.len(),
    };
    if outer_dim + 1 != dim {
        return domain(format!("design covers {} axes, sum has {dim}", outer_dim + 1));
    }
    let evaluations = outer.points() * axis0.len_nodes() as u128;
    limits.check_points("quadrature evaluations", evaluations)?;
    let fiber = FiberEvaluator::new(axis0.clone(), sum.first_axis());
    let expired = AtomicBool::new(false);
    let run_fibers = |points: &dyn Fn(usize, &mut [f64]) -> f64, range: std::ops::Range<usize>| -> f64 {
        if expired.load(Ordering::Relaxed) || limits.check_deadline("quadrature").is_err() {
            expired.store(true, Ordering::Relaxed);
            return 0.0;
        }
        let mut x = vec![0.0; outer_dim];
        let mut b = Vec::with_capacity(sum.values.len());
        let mut buf = Vec::new();
        let mut scratch = Vec::new();
        let mut acc = Neumaier::new();
        for i in range {
            let w = points(i, &mut x);
            sum.modulate(&x, &fiber, &mut b);
            acc.add(w * fiber.integrate(&b, p, &mut buf, &mut scratch));
        }
        acc.value()
    };
    let est = match outer {
        Outer::Tensor(rules) => {
            let n = outer.points() as usize;
            let pt = |i: usize, x: &mut [f64]| outer_point(rules, i, x);
            let value = crate::sum::par_sum_chunks(n, OUTER_CHUNK, |r| run_fibers(&pt, r));
            Estimate { value, stderr: 0.0, evaluations: evaluations as u64 }
        }
        Outer::Mc(design) => {
            let batch_means = (0..design.batches)
                .map(|b| {
                    let pts = design.batch_points(b);
                    let pt = |i: usize, x: &mut [f64]| {
                        x.copy_from_slice(&pts[i]);
                        1.0
                    };
                    let total = crate::sum::par_sum_chunks(pts.len(), OUTER_CHUNK, |r| run_fibers(&pt, r));
                    design.volume() * total / pts.len().max(1) as f64
                })
                .collect::<Vec<f64>>();
            let (value, stderr) = batch_stats(&batch_means);
            Estimate { value, stderr, evaluations: evaluations as u64 }
        }
    };
    if expired.load(Ordering::Relaxed) {
        return Err(Error::Deadline("quadrature".into()));
    }
    Ok(est)
}

/// Mean and standard error of batch estimates.
pub fn batch_stats(batches: &[f64]) -> (f64, f64) {
    let b = batches.len() as f64;
    let mean = pairwise_sum(batches) / b;
    if batches.len() < 2 {
        return (mean, f64::NAN);
    }
    let dev: Vec<f64> = batches.iter().map(|x| (x - mean).powi(2)).collect();
    (mean, (pairwise_sum(&dev) / (b - 1.0) / b).sqrt())
}

/// Values of `Σ b_n e(f_n t)` at the nodes of `axis`, with `b` already
/// modulated by the remaining coordinates.
pub fn fiber_values(first: Vec<i128>, b: &[Complex64], axis: &AxisRule) -> Vec<Complex64> {
    let fiber = FiberEvaluator::new(axis.clone(), first);
    if fiber.fft.is_some() {
        let shifted: Vec<Complex64> =
            b.iter().enumerate().map(|(n, bn)| bn * e(fiber.anchor_phase(n))).collect();
        fiber.values(&shifted)
    } else {
        fiber.values(b)
    }
}

/// `∫ f` over a tensor or Monte Carlo design covering every axis.
pub fn integrate_pointwise<F>(f: F, design: &Outer, limits: &Limits) -> Result<Estimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = design.points();
    limits.check_points("quadrature evaluations", n)?;
    let expired = AtomicBool::new(false);
    let dim = match design {
        Outer::Tensor(r) => r.len(),
        Outer::Mc(m) => m.lo.len(),
    };
    let run = |points: &dyn Fn(usize, &mut [f64]) -> f64, range: std::ops::Range<usize>| -> f64 {
        if expired.load(Ordering::Relaxed) || limits.check_deadline("quadrature").is_err() {
            expired.store(true, Ordering::Relaxed);
            return 0.0;
        }
        let mut x = vec![0.0; dim];
        let mut acc = Neumaier::new();
        for i in range {
            let w = points(i, &mut x);
            acc.add(w * f(&x));
        }
        acc.value()
    };
    let est = match design {
        Outer::Tensor(rules) => {
            let pt = |i: usize, x: &mut [f64]| outer_point(rules, i, x);
            let value = crate::sum::par_sum_chunks(n as usize, 1024, |r| run(&pt, r));
            Estimate { value, stderr: 0.0, evaluations: n as u64 }
        }
        Outer::Mc(m) => {
            let means: Vec<f64> = (0..m.batches)
                .map(|b| {
                    let pts = m.batch_points(b);
                    let pt = |i: usize, x: &mut [f64]| {
                        x.copy_from_slice(&pts[i]);
                        1.0
                    };
                    let total = crate::sum::par_sum_chunks(pts.len(), 1024, |r| run(&pt, r));
                    m.volume() * total / pts.len().max(1) as f64
                })
                .collect();
            let (value, stderr) = batch_stats(&means);
            Estimate { value, stderr, evaluations: n as u64 }
        }
    };
    if expired.load(Ordering::Relaxed) {
        return Err(Error::Deadline("quadrature".into()));
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Coefficients;
    use crate::domain::PhaseSystem;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in [1, 2, 5, 16, 32] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14, "n={n}");
            let deg = 2 * n - 1;
            let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((approx - exact).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn composite_gauss_on_oscillation() {
        let r = AxisRule::gauss(0.1, 0.3, 8, PANEL_ORDER);
        let approx: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * (40.0 * x).cos()).sum();
        let exact = ((40.0 * 0.4f64).sin() - (40.0 * 0.1f64).sin()) / 40.0;
        assert!((approx - exact).abs() < 1e-14);
    }

    #[test]
    fn periodic_rule_rejects_fractional_length() {
        assert!(AxisRule::periodic(0.0, 0.5, 8).is_err());
        assert!(AxisRule::periodic(-1.0, 2.0, 8).is_ok());
    }

    #[test]
    fn stratified_points_cover_each_stratum_once() {
        let m = McDesign { lo: vec![0.0, 2.0], len: vec![1.0, 0.5], samples: 64, batches: 2, seed: 5, stratified: true };
        let pts = m.batch_points(1);
        assert_eq!(pts.len(), 32);
        let mut hit = vec![false; 32];
        for p in &pts {
            let s = ((p[1] - 2.0) / 0.5 * 32.0) as usize;
            assert!(!hit[s]);
            hit[s] = true;
        }
        assert_eq!(pts, m.batch_points(1));
        assert_ne!(pts, m.batch_points(0));
    }

    #[test]
    fn parseval_through_fft_fiber() {
        let a = Coefficients::constant(1, 5).unwrap();
        let t = a.frequencies(&PhaseSystem::MomentCurve { d: 2 }).unwrap();
        let sum = SumIntegrand { table: &t, values: a.values() };
        let axis0 = AxisRule::periodic(0.0, 1.0, 11).unwrap();
        let outer = Outer::Tensor(vec![AxisRule::periodic(0.0, 1.0, 51).unwrap()]);
        let est = integrate_abs_pow(&sum, &axis0, &outer, 2.0, &Limits::default()).unwrap();
        assert!((est.value - 5.0).abs() < 1e-12);
    }

    #[test]
    fn pointwise_mc_of_constant_is_exact() {
        let m = McDesign { lo: vec![0.0, 0.0], len: vec![0.5, 2.0], samples: 1000, batches: 10, seed: 1, stratified: true };
        let est = integrate_pointwise(|_| 3.0, &Outer::Mc(m), &Limits::default()).unwrap();
        assert!((est.value - 3.0).abs() < 1e-14);
        assert!(est.stderr < 1e-14);
    }

    #[test]
    fn deadline_is_reported() {
        let lim = Limits { deadline: Some(std::time::Instant::now()), ..Limits::default() };
        std::thread::sleep(std::time::Duration::from_millis(2));
        let r = integrate_pointwise(|_| 1.0, &Outer::Tensor(vec![AxisRule::gauss(0.0, 1.0, 4, 8)]), &lim);
        assert!(matches!(r, Err(Error::Deadline(_))));
    }
}
