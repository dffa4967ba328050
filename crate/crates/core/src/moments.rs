//! `L^p` moments of exponential sums over boxes, against surface measures
//! and against decay kernels, plus the normalized quantities built on them.

use crate::counting::power_sums;
use crate::domain::{Coefficients, FrequencyTable, Limits, Method, MomentResult, PhaseSystem, Support, TorusBox};
use crate::error::{domain, Error, Result};
use crate::expsum::eval_table;
use crate::fit::FitResult;
use crate::measures::{DecayKernel, GraphSurface};
use crate::quadrature::{abs_pow, integrate_abs_pow, integrate_pointwise, AxisRule, Estimate, McDesign, Outer, SumIntegrand};
use crate::recipes::{half_support_lo, realize, SequenceRecipe};
use crate::sum::{par_sum, Neumaier};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const MIN_MC_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "method")]
pub enum QuadratureSpec {
    /// Tensor rule; `None` picks the smallest admissible counts.
    Grid { counts: Option<Vec<usize>> },
    /// Exact rule on the first axis, Monte Carlo on the rest.
    Mc { samples: usize, seed: u64, stratified: bool },
}

impl QuadratureSpec {
    pub fn auto() -> Self {
        QuadratureSpec::Grid { counts: None }
    }

    pub fn mc(samples: usize, seed: u64) -> Self {
        QuadratureSpec::Mc { samples, seed, stratified: true }
    }

    /// `grid`, `grid:auto`, `grid:9,33` or `mc:<samples>`.
    pub fn parse(text: &str, seed: u64) -> Result<Self> {
        let (kind, rest) = text.split_once(':').unwrap_or((text, "auto"));
        let spec = match kind.trim() {
            "grid" if rest.trim() == "auto" => Self::auto(),
            "grid" => {
                let counts = rest
                    .split(',')
                    .map(|t| t.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad grid count {t:?}"))))
                    .collect::<Result<Vec<_>>>()?;
                QuadratureSpec::Grid { counts: Some(counts) }
            }
            "mc" => {
                let samples = rest.trim().parse().map_err(|_| Error::Parse(format!("bad sample count {rest:?}")))?;
                Self::mc(samples, seed)
            }
            other => return Err(Error::Parse(format!("unknown quadrature {other:?}"))),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            QuadratureSpec::Grid { counts: Some(c) } if c.contains(&0) => domain("grid counts must be positive"),
            QuadratureSpec::Mc { samples, .. } if *samples < MIN_MC_SAMPLES => {
                domain(format!("mc needs at least {MIN_MC_SAMPLES} samples"))
            }
            _ => Ok(()),
        }
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0) || !p.is_finite() {
        return domain(format!("p must be positive and finite, got {p}"));
    }
    Ok(())
}

fn even_half(p: f64) -> Option<u32> {
    let h = p / 2.0;
    (h == h.trunc() && h >= 1.0).then_some(h as u32)
}

/// Smallest per-axis node counts for `∫_box |S|^p`: full axes with even `p`
/// need `2·(p/2)·F_k + 1` equispaced nodes (exact); every other axis needs a
/// step at most `1/(4⌈p/2⌉F_k)`.
pub fn required_box_counts(table: &FrequencyTable, bx: &TorusBox, p: f64) -> Vec<usize> {
    let half_up = (p / 2.0).ceil().max(1.0);
    table
        .max_abs()
        .iter()
        .zip(bx.sides())
        .map(|(&f, &side)| {
            let f = f as f64;
            match even_half(p) {
                Some(l) if side == 1.0 => (2.0 * l as f64 * f + 1.0) as usize,
                _ => ((side * 4.0 * half_up * f).ceil() as usize).max(1),
            }
        })
        .collect()
}

fn axis_rule(bx: &TorusBox, k: usize, count: usize) -> Result<AxisRule> {
    let (lo, side) = (bx.anchor()[k], bx.sides()[k]);
    if side == 1.0 {
        AxisRule::periodic(lo, 1.0, count)
    } else {
        Ok(AxisRule::gauss_with_nodes(lo, side, count))
    }
}

fn describe(bx: &TorusBox) -> String {
    if bx.is_full() {
        return "full".into();
    }
    let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    format!("{};{}", join(bx.anchor()), join(bx.sides()))
}

fn resolution(what: &str, required: &[usize], given: &[usize]) -> Error {
    Error::Resolution {
        what: what.into(),
        required: required.iter().map(|&v| v as u64).collect(),
        given: given.iter().map(|&v| v as u64).collect(),
    }
}

/// `∫_box |S|^p dx`.
pub fn box_moment(
    a: &Coefficients,
    sys: &PhaseSystem,
    bx: &TorusBox,
    p: f64,
    quad: &QuadratureSpec,
    limits: &Limits,
) -> Result<MomentResult> {
    check_p(p)?;
    quad.validate()?;
    let table = a.frequencies(sys)?;
    let d = table.dim;
    if bx.dim() != d {
        return domain(format!("box has dimension {}, system has {d}", bx.dim()));
    }
    let need = required_box_counts(&table, bx, p);
    let sum = SumIntegrand { table: &table, values: a.values() };
    let exact_axis = |k: usize| bx.sides()[k] == 1.0 && even_half(p).is_some();
    let base = |value: f64, abs_error: f64, method: Method, seed: Option<u64>, evaluations: u64| MomentResult {
        value,
        abs_error,
        method,
        p,
        d,
        n_terms: a.len(),
        region: describe(bx),
        seed,
        evaluations,
    };
    match quad {
        QuadratureSpec::Grid { counts } => {
            let counts = match counts {
                None => need.clone(),
                Some(c) if c.len() != d => return domain(format!("grid needs {d} counts, got {}", c.len())),
                Some(c) => {
                    if c.iter().zip(&need).any(|(g, r)| g < r) {
                        return Err(resolution("box moment grid", &need, c));
                    }
                    c.clone()
                }
            };
            let rules = (0..d).map(|k| axis_rule(bx, k, counts[k])).collect::<Result<Vec<_>>>()?;
            let est = integrate_abs_pow(&sum, &rules[0], &Outer::Tensor(rules[1..].to_vec()), p, limits)?;
            let abs_error = if (0..d).all(exact_axis) {
                0.0
            } else {
                let coarse: Vec<AxisRule> =
                    rules.iter().enumerate().map(|(k, r)| if exact_axis(k) { r.clone() } else { r.coarsened() }).collect();
                let c = integrate_abs_pow(&sum, &coarse[0], &Outer::Tensor(coarse[1..].to_vec()), p, limits)?;
                (est.value - c.value).abs()
            };
            Ok(base(est.value, abs_error, Method::Grid, None, est.evaluations))
        }
        QuadratureSpec::Mc { samples, seed, stratified } => {
            let axis0 = axis_rule(bx, 0, need[0])?;
            let outer = if d == 1 {
                Outer::Tensor(Vec::new())
            } else {
                Outer::Mc(McDesign {
                    lo: bx.anchor()[1..].to_vec(),
                    len: bx.sides()[1..].to_vec(),
                    samples: *samples,
                    batches: McDesign::DEFAULT_BATCHES,
                    seed: *seed,
                    stratified: *stratified,
                })
            };
            let est = integrate_abs_pow(&sum, &axis0, &outer, p, limits)?;
            let stderr = if d == 1 { 0.0 } else { est.stderr };
            Ok(base(est.value, stderr, Method::Mc, Some(*seed), est.evaluations))
        }
    }
}

/// Node counts per surface parameter: a step at most `1/(4⌈p/2⌉·osc_k)` with
/// `osc_k` the largest phase derivative along the parameter.
pub fn required_surface_counts(table: &FrequencyTable, surface: &GraphSurface, p: f64) -> Vec<usize> {
    let half_up = (p / 2.0).ceil().max(1.0);
    let fmax: Vec<f64> = table.max_abs().iter().map(|&f| f as f64).collect();
    let osc: Vec<f64> = match surface.family {
        crate::measures::SurfaceFamily::Circle { r } => {
            vec![std::f64::consts::TAU * r * fmax.iter().map(|f| f * f).sum::<f64>().sqrt()]
        }
        _ => {
            let g = surface.gradient_bound();
            (0..surface.params()).map(|k| fmax[k] + fmax[surface.d - 1] * g[k]).collect()
        }
    };
    osc.iter().map(|o| ((4.0 * half_up * o).ceil() as usize).max(1)).collect()
}

/// `∫ |S(y)|^p dσ(y)` over the surface.
pub fn surface_moment(
    a: &Coefficients,
    sys: &PhaseSystem,
    surface: &GraphSurface,
    p: f64,
    quad: &QuadratureSpec,
    limits: &Limits,
) -> Result<MomentResult> {
    check_p(p)?;
    quad.validate()?;
    let table = a.frequencies(sys)?;
    if table.dim != surface.d {
        return domain(format!("system has dimension {}, surface lives in R^{}", table.dim, surface.d));
    }
    let values = a.values();
    let integrand = |u: &[f64]| {
        let (y, dens) = surface.embed(u);
        abs_pow(eval_table(&table, values, &y), p) * dens
    };
    let need = required_surface_counts(&table, surface, p);
    let rules_for = |counts: &[usize]| -> Result<Vec<AxisRule>> {
        if surface.is_circle() {
            Ok(vec![AxisRule::periodic(0.0, 1.0, counts[0])?])
        } else {
            Ok(counts.iter().map(|&c| AxisRule::gauss_with_nodes(0.0, 1.0, c)).collect())
        }
    };
    let region = format!("surface:{}", serde_json::to_string(&surface.family).unwrap_or_default());
    let done = |est: Estimate, abs_error: f64, method: Method, seed: Option<u64>| MomentResult {
        value: est.value,
        abs_error,
        method,
        p,
        d: surface.d,
        n_terms: a.len(),
        region: region.clone(),
        seed,
        evaluations: est.evaluations,
    };
    match quad {
        QuadratureSpec::Grid { counts } => {
            let counts = match counts {
                None => need.clone(),
                Some(c) if c.len() != need.len() => {
                    return domain(format!("grid needs {} counts, got {}", need.len(), c.len()))
                }
                Some(c) => {
                    if c.iter().zip(&need).any(|(g, r)| g < r) {
                        return Err(resolution("surface moment grid", &need, c));
                    }
                    c.clone()
                }
            };
            let rules = rules_for(&counts)?;
            let est = integrate_pointwise(integrand, &Outer::Tensor(rules.clone()), limits)?;
            let coarse: Vec<AxisRule> = rules.iter().map(AxisRule::coarsened).collect();
            let c = integrate_pointwise(integrand, &Outer::Tensor(coarse), limits)?;
            let err = (est.value - c.value).abs();
            Ok(done(est, err, Method::Grid, None))
        }
        QuadratureSpec::Mc { samples, seed, stratified } => {
            let k = surface.params();
            let design = McDesign {
                lo: vec![0.0; k],
                len: vec![1.0; k],
                samples: *samples,
                batches: McDesign::DEFAULT_BATCHES,
                seed: *seed,
                stratified: *stratified,
            };
            let est = integrate_pointwise(integrand, &Outer::Mc(design), limits)?;
            Ok(done(est, est.stderr, Method::Mc, Some(*seed)))
        }
    }
}

/// `Σ_{v,w} W(v) conj(W(w)) K(v − w)` where `W` collects the `l`-fold
/// frequency sums; equals the sum over `2l`-tuples of `Π a · Π ā · K`.
pub fn kernel_moment_with<K>(a: &Coefficients, sys: &PhaseSystem, l: u32, kernel: K, limits: &Limits) -> Result<f64>
where
    K: Fn(&[i128]) -> Complex64 + Sync,
{
    let table = a.frequencies(sys)?;
    let tuples = (a.len() as u128).checked_pow(l).unwrap_or(u128::MAX);
    if let Err(Error::Resource { what, required, limit }) = limits.check_tuples("kernel l-tuples", tuples) {
        return Err(Error::Resource {
            what: format!("{what} (even moments of this size go through counting::power_sums)"),
            required,
            limit,
        });
    }
    let w = power_sums(&table, a.values(), l, limits)?;
    let k = w.len();
    limits.check_tuples("kernel pairs", (k as u128).pow(2))?;
    let dim = w.dim;
    Ok(par_sum(k, |i| {
        let mut diff = vec![0i128; dim];
        let vi = w.key(i);
        let mut acc = Neumaier::new();
        for j in 0..k {
            for (ax, dv) in diff.iter_mut().enumerate() {
                *dv = vi[ax] - w.key(j)[ax];
            }
            acc.add((w.weights[i] * w.weights[j].conj() * kernel(&diff)).re);
        }
        acc.value()
    }))
}

pub fn kernel_moment(a: &Coefficients, sys: &PhaseSystem, kernel: &DecayKernel, l: u32, limits: &Limits) -> Result<f64> {
    if l < 1 {
        return domain("l must be at least 1");
    }
    kernel_moment_with(a, sys, l, |xi| Complex64::new(kernel.eval(xi), 0.0), limits)
}

/// Right-hand normalization of the dyadic-box moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// `‖a‖₂^p`.
    L2,
    /// `N^{p(1/2−1/3)} ‖a‖₆^p`.
    L6,
    /// `N^{p(1/2−1/9)} ‖a‖₉^p`.
    L9,
}

impl Normalization {
    pub fn value(&self, a: &Coefficients, n: u64, p: f64) -> f64 {
        let nf = n as f64;
        match self {
            Normalization::L2 => a.l2().powf(p),
            Normalization::L6 => nf.powf(p * (0.5 - 1.0 / 3.0)) * a.norm(6.0).powf(p),
            Normalization::L9 => nf.powf(p * (0.5 - 1.0 / 9.0)) * a.norm(9.0).powf(p),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NormalizedMoment {
    pub value: f64,
    pub stderr: f64,
    pub moment: MomentResult,
}

/// `2^{j(d+1)/2} ∫_{[0,2^{−j}]^d} |S|^p dx` divided by the chosen norm.
pub fn dyadic_box_normalized(
    a: &Coefficients,
    d: usize,
    n: u64,
    j: u32,
    p: f64,
    quad: &QuadratureSpec,
    norm: Normalization,
    limits: &Limits,
) -> Result<NormalizedMoment> {
    let denom = norm.value(a, n, p);
    if !(denom > 0.0) {
        return domain("the normalizing norm vanishes");
    }
    let bx = TorusBox::dyadic(d, crate::domain::DyadicScale::new(j));
    let moment = box_moment(a, &PhaseSystem::MomentCurve { d }, &bx, p, quad, limits)?;
    let scale = (j as f64 * (d as f64 + 1.0) / 2.0).exp2() / denom;
    Ok(NormalizedMoment { value: moment.value * scale, stderr: moment.abs_error * scale, moment })
}

/// Decoupling statements tested as `LHS / RHS` with `ε = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecouplingStatement {
    A10,
    A11,
    A32,
    D32,
    C7,
}

impl DecouplingStatement {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(match text.to_ascii_lowercase().as_str() {
            "a10" => Self::A10,
            "a11" => Self::A11,
            "a32" => Self::A32,
            "d32" => Self::D32,
            "c7" => Self::C7,
            other => return Err(Error::Parse(format!("unknown decoupling statement {other:?}"))),
        })
    }

    pub fn exponents(&self) -> Vec<u32> {
        match self {
            Self::A10 | Self::A11 => vec![1, 2, 3, 4],
            Self::A32 => vec![1, 3, 4, 5],
            Self::D32 => vec![1, 2, 4, 5],
            Self::C7 => vec![1, 2, 3, 4, 5],
        }
    }

    pub fn p(&self) -> f64 {
        match self {
            Self::C7 => 18.0,
            _ => 12.0,
        }
    }

    /// Side lengths of `Ω`, anchored at the origin.
    pub fn sides(&self, n: u64) -> Vec<f64> {
        let inv = |k: i32| (n as f64).powi(-k);
        match self {
            Self::A10 => vec![1.0, 1.0, inv(2), inv(2)],
            Self::A11 => vec![1.0, inv(1), inv(1), inv(2)],
            Self::A32 => vec![1.0, inv(2), inv(2), inv(3)],
            Self::D32 => vec![1.0, 1.0, inv(3), inv(3)],
            Self::C7 => vec![1.0, 1.0, inv(2), inv(1), inv(2)],
        }
    }

    /// `N^k |Ω| ‖a‖_q^p` with `(k, q) = (4, 6)`, or `(7, 9)` for `c7`.
    pub fn rhs(&self, a: &Coefficients, n: u64) -> f64 {
        let vol: f64 = self.sides(n).iter().product();
        let (k, q) = match self {
            Self::C7 => (7, 9.0),
            _ => (4, 6.0),
        };
        (n as f64).powi(k) * vol * a.norm(q).powf(self.p())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DecouplingRatio {
    pub statement: DecouplingStatement,
    pub n: u64,
    pub lhs: MomentResult,
    pub rhs: f64,
    pub ratio: f64,
    pub ratio_stderr: f64,
}

/// `∫_Ω |S|^p / RHS`: exact equispaced rule along `x₁`, Monte Carlo over the
/// other axes. Coefficients must live in `[⌈N/2⌉, N]`.
pub fn decoupling_ratio(
    stmt: DecouplingStatement,
    n: u64,
    a: &Coefficients,
    samples: usize,
    seed: u64,
    limits: &Limits,
) -> Result<DecouplingRatio> {
    let lo = half_support_lo(n as i64);
    let inside = (0..a.len()).all(|i| a.support().scalar(i).is_some_and(|m| m >= lo && m <= n as i64));
    if !inside {
        return domain(format!("decoupling sums need coefficients on [{lo}, {n}]"));
    }
    // Fiber nodes along x₁ times outer samples.
    let cost = |n: u64| samples as u128 * (stmt.p() as u128 * n as u128 + 1);
    if cost(n) > limits.max_points as u128 {
        let feasible = (limits.max_points as u128 / samples.max(1) as u128).saturating_sub(1) / stmt.p() as u128;
        return Err(Error::Resource {
            what: format!("{stmt:?} quadrature at N={n} (max feasible N with {samples} samples is {feasible})"),
            required: cost(n).min(u64::MAX as u128) as u64,
            limit: limits.max_points,
        });
    }
    let bx = TorusBox::new(vec![0.0; stmt.exponents().len()], stmt.sides(n))?;
    let sys = PhaseSystem::Power { exponents: stmt.exponents() };
    let lhs = box_moment(a, &sys, &bx, stmt.p(), &QuadratureSpec::mc(samples, seed), limits)?;
    let rhs = stmt.rhs(a, n);
    Ok(DecouplingRatio { statement: stmt, n, ratio: lhs.value / rhs, ratio_stderr: lhs.abs_error / rhs, lhs, rhs })
}

/// Ratios over an `N` ladder for a recipe realized on `[⌈N/2⌉, N]`, and the
/// log-log slope of the ratio against `N`.
pub fn decoupling_slope(
    stmt: DecouplingStatement,
    ladder: &[u64],
    recipe: &SequenceRecipe,
    samples: usize,
    seed: u64,
    limits: &Limits,
) -> Result<(FitResult, Vec<DecouplingRatio>)> {
    if ladder.len() < 3 {
        return domain("ratio ladders need at least 3 rungs");
    }
    let rows = ladder
        .iter()
        .map(|&n| {
            let a = realize(recipe, &Support::Interval { lo: half_support_lo(n as i64), hi: n as i64 })?;
            decoupling_ratio(stmt, n, &a, samples, seed, limits)
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = ladder.iter().map(|&n| n as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    Ok((FitResult::log_log(&xs, &ys)?, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::{box_moment_exact, even_moment_count};
    use crate::measures::{surface_fourier_estimate, SurfaceFamily};
    use proptest::prelude::*;

    fn lim() -> Limits {
        Limits::default()
    }

    fn mc(d: usize) -> PhaseSystem {
        PhaseSystem::MomentCurve { d }
    }

    fn rand_a(seed: u64, lo: i64, hi: i64) -> Coefficients {
        realize(&SequenceRecipe::UnimodularRandom { seed }, &Support::Interval { lo, hi }).unwrap()
    }

    #[test]
    fn parseval_and_small_count() {
        let ones = Coefficients::constant(1, 32).unwrap();
        let m = box_moment(&ones, &mc(1), &TorusBox::full(1), 2.0, &QuadratureSpec::auto(), &lim()).unwrap();
        assert!((m.value - 32.0).abs() < 1e-10);
        assert_eq!(m.abs_error, 0.0);
        let ones = Coefficients::constant(1, 3).unwrap();
        let m = box_moment(&ones, &mc(2), &TorusBox::full(2), 4.0, &QuadratureSpec::auto(), &lim()).unwrap();
        assert!((m.value - 15.0).abs() < 1e-10);
    }

    #[test]
    fn sub_box_matches_closed_form() {
        let ones = Coefficients::constant(1, 8).unwrap();
        let bx = TorusBox::dyadic(2, crate::domain::DyadicScale::new(2));
        let q = box_moment(&ones, &mc(2), &bx, 4.0, &QuadratureSpec::auto(), &lim()).unwrap();
        let exact = box_moment_exact(&ones, &mc(2), &bx, 2, &lim()).unwrap();
        assert!((q.value - exact).abs() <= 1e-8 * exact, "{} vs {exact}", q.value);
        assert!(q.abs_error <= 1e-8 * exact);
    }

    #[test]
    fn under_resolved_grid_is_refused() {
        let ones = Coefficients::constant(1, 8).unwrap();
        let r = box_moment(&ones, &mc(2), &TorusBox::full(2), 4.0, &QuadratureSpec::Grid { counts: Some(vec![4, 4]) }, &lim());
        match r {
            Err(Error::Resolution { required, .. }) => assert_eq!(required, vec![33, 257]),
            other => panic!("{other:?}"),
        }
        assert!(box_moment(&ones, &mc(2), &TorusBox::full(2), 0.0, &QuadratureSpec::auto(), &lim()).is_err());
        assert!(QuadratureSpec::parse("mc:10", 1).is_err());
        assert_eq!(QuadratureSpec::parse("grid:9,33", 1).unwrap(), QuadratureSpec::Grid { counts: Some(vec![9, 33]) });
    }

    #[test]
    fn mc_on_full_torus_is_close_to_count() {
        let a = rand_a(2, 1, 6);
        let exact = even_moment_count(&a, &mc(2), 2, &lim()).unwrap();
        let m = box_moment(&a, &mc(2), &TorusBox::full(2), 4.0, &QuadratureSpec::mc(4096, 9), &lim()).unwrap();
        assert!((m.value - exact).abs() <= 4.0 * m.abs_error + 1e-9, "{} ± {} vs {exact}", m.value, m.abs_error);
    }

    #[test]
    fn flat_surface_is_parseval() {
        let a = rand_a(5, 1, 10);
        let flat = GraphSurface::flat(2).unwrap();
        let m = surface_moment(&a, &mc(2), &flat, 2.0, &QuadratureSpec::auto(), &lim()).unwrap();
        assert!((m.value - a.l2().powi(2)).abs() < 1e-10);
    }

    #[test]
    fn square_surface_matches_kernel_sum() {
        let a = Coefficients::constant(1, 8).unwrap();
        let sq = GraphSurface::new(SurfaceFamily::Square).unwrap();
        let m = surface_moment(&a, &mc(2), &sq, 2.0, &QuadratureSpec::auto(), &lim()).unwrap();
        let k = kernel_moment_with(
            &a,
            &mc(2),
            1,
            |diff| {
                let xi: Vec<i64> = diff.iter().map(|&v| -(v as i64)).collect();
                surface_fourier_estimate(&sq, &xi).unwrap().0
            },
            &lim(),
        )
        .unwrap();
        assert!((m.value - k).abs() < 1e-6, "{} vs {k}", m.value);
    }

    #[test]
    fn bilinear_surface_mc_reruns_agree() {
        let a = Coefficients::constant(1, 16).unwrap();
        let s = GraphSurface::new(SurfaceFamily::BilinearD3).unwrap();
        let m1 = surface_moment(&a, &mc(3), &s, 4.0, &QuadratureSpec::mc(20_000, 1), &lim()).unwrap();
        let m2 = surface_moment(&a, &mc(3), &s, 4.0, &QuadratureSpec::mc(80_000, 2), &lim()).unwrap();
        let tol = 3.0 * (m1.abs_error.powi(2) + m2.abs_error.powi(2)).sqrt();
        assert!((m1.value - m2.value).abs() <= tol, "{m1:?} {m2:?}");
    }

    #[test]
    fn kernel_examples() {
        let a = rand_a(3, 1, 7);
        let k0 = kernel_moment(&a, &mc(2), &DecayKernel::new(0.0).unwrap(), 1, &lim()).unwrap();
        let s: Complex64 = a.values().iter().sum();
        assert!((k0 - s.norm_sqr()).abs() < 1e-12);
        let spike = Coefficients::spike(1);
        assert_eq!(kernel_moment(&spike, &mc(3), &DecayKernel::new(1.0).unwrap(), 1, &lim()).unwrap(), 1.0);

        // Paraboloid d = 3, N = 4, β = 1 by direct 256-term enumeration.
        let ones = crate::counting::paraboloid_ones(3, 4).unwrap();
        let sys = PhaseSystem::Paraboloid { d: 3, n: 4 };
        let got = kernel_moment(&ones, &sys, &DecayKernel::new(1.0).unwrap(), 1, &lim()).unwrap();
        let mut want = 0.0;
        for m1 in 1..=4i64 {
            for m2 in 1..=4i64 {
                for n1 in 1..=4i64 {
                    for n2 in 1..=4i64 {
                        let q = (m1 * m1 + m2 * m2 - n1 * n1 - n2 * n2) as f64;
                        let dist = (((m1 - n1) * (m1 - n1) + (m2 - n2) * (m2 - n2)) as f64 + q * q).sqrt();
                        want += 1.0 / (1.0 + dist);
                    }
                }
            }
        }
        assert!((got - want).abs() < 1e-12 * want);
    }

    #[test]
    fn dyadic_box_normalized_examples() {
        let a = rand_a(4, 1, 9);
        let v = dyadic_box_normalized(&a, 2, 9, 0, 2.0, &QuadratureSpec::auto(), Normalization::L2, &lim()).unwrap();
        assert!((v.value - 1.0).abs() < 1e-12);
        let ones = Coefficients::constant(1, 8).unwrap();
        assert!((Normalization::L6.value(&ones, 8, 12.0) - 8f64.powf(2.0) * 8f64.powf(2.0)).abs() < 1e-9);
        assert!((Normalization::L9.value(&ones, 8, 18.0) - 8f64.powf(7.0) * 8f64.powf(2.0)).abs() < 1e-6);
    }

    #[test]
    fn translated_full_torus_is_invariant() {
        let a = rand_a(6, 1, 5);
        for p in [3.0, 4.0] {
            let base = box_moment(&a, &mc(2), &TorusBox::full(2), p, &QuadratureSpec::auto(), &lim()).unwrap();
            for shift in [[0.1, 0.7], [0.9, 0.3], [0.5, 0.5], [0.33, 0.01], [0.77, 0.99]] {
                let moved = TorusBox::full(2).translate(&shift).unwrap();
                let m = box_moment(&a, &mc(2), &moved, p, &QuadratureSpec::auto(), &lim()).unwrap();
                let tol = m.abs_error + base.abs_error + 1e-12 * base.value;
                assert!((m.value - base.value).abs() <= tol, "p={p} {shift:?}: {} vs {}", m.value, base.value);
            }
        }
    }

    #[test]
    fn translated_sub_boxes_match_closed_form() {
        let a = rand_a(6, 1, 5);
        let bx = TorusBox::new(vec![0.0, 0.0], vec![0.25, 0.125]).unwrap();
        for shift in [[0.1, 0.7], [0.9, 0.3], [0.5, 0.5], [0.33, 0.01], [0.77, 0.99]] {
            let t = bx.translate(&shift).unwrap();
            let q = box_moment(&a, &mc(2), &t, 4.0, &QuadratureSpec::auto(), &lim()).unwrap().value;
            let exact = box_moment_exact(&a, &mc(2), &t, 2, &lim()).unwrap();
            assert!((q - exact).abs() <= 1e-8 * exact);
        }
    }

    #[test]
    fn decoupling_spike_ratio() {
        for n in [8u64, 10] {
            let spike = Coefficients::spike(half_support_lo(n as i64));
            let r = decoupling_ratio(DecouplingStatement::A11, n, &spike, 2048, 1, &lim()).unwrap();
            let vol: f64 = DecouplingStatement::A11.sides(n).iter().product();
            assert!((r.lhs.value - vol).abs() < 1e-12 * vol);
            assert!((r.ratio - (n as f64).powi(-4)).abs() < 1e-12 * r.ratio);
        }
        let small = Limits { max_points: 100_000, ..lim() };
        let spike = Coefficients::spike(50);
        match decoupling_ratio(DecouplingStatement::A11, 100, &spike, 2048, 1, &small) {
            Err(Error::Resource { what, .. }) => assert!(what.contains("max feasible N with 2048 samples is 3"), "{what}"),
            other => panic!("{other:?}"),
        }
        let wide = Coefficients::constant(1, 8).unwrap();
        assert!(decoupling_ratio(DecouplingStatement::A11, 8, &wide, 2048, 1, &lim()).is_err());
    }

    #[test]
    fn decoupling_reruns_agree() {
        let a = Coefficients::constant(4, 8).unwrap();
        let r1 = decoupling_ratio(DecouplingStatement::A11, 8, &a, 8192, 1, &lim()).unwrap();
        let r2 = decoupling_ratio(DecouplingStatement::A11, 8, &a, 8192, 2, &lim()).unwrap();
        let tol = 3.0 * (r1.ratio_stderr.powi(2) + r2.ratio_stderr.powi(2)).sqrt();
        assert!((r1.ratio - r2.ratio).abs() <= tol, "{} {}", r1.ratio, r2.ratio);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn grid_equals_count(d in 1usize..=3, n in 2i64..=8, l in 1u32..=2, seed in 0u64..100) {
            let a = rand_a(seed, 1, n);
            let exact = even_moment_count(&a, &mc(d), l, &lim()).unwrap();
            let g = box_moment(&a, &mc(d), &TorusBox::full(d), 2.0 * l as f64, &QuadratureSpec::auto(), &lim()).unwrap();
            prop_assert!((g.value - exact).abs() <= 1e-10 * exact);
        }

        #[test]
        fn monotone_in_the_box(s0 in 0.05f64..0.5, s1 in 0.05f64..0.5, grow in 1.0f64..2.0, seed in 0u64..100) {
            let a = rand_a(seed, 1, 5);
            let small = TorusBox::new(vec![0.0, 0.0], vec![s0, s1]).unwrap();
            let big = TorusBox::new(vec![0.0, 0.0], vec![(s0 * grow).min(1.0), (s1 * grow).min(1.0)]).unwrap();
            let q = QuadratureSpec::auto();
            let ms = box_moment(&a, &mc(2), &small, 3.0, &q, &lim()).unwrap();
            let mb = box_moment(&a, &mc(2), &big, 3.0, &q, &lim()).unwrap();
            prop_assert!(ms.value <= mb.value + ms.abs_error + mb.abs_error + 1e-9);
        }

        #[test]
        fn holder_consistency(p in 1.0f64..4.0, gap in 0.5f64..3.0, seed in 0u64..100) {
            let a = rand_a(seed, 1, 6);
            let bx = TorusBox::new(vec![0.1, 0.2], vec![0.5, 0.25]).unwrap();
            let q = p + gap;
            let mp = box_moment(&a, &mc(2), &bx, p, &QuadratureSpec::auto(), &lim()).unwrap();
            let mq = box_moment(&a, &mc(2), &bx, q, &QuadratureSpec::auto(), &lim()).unwrap();
            let vol = bx.volume();
            prop_assert!((mp.value / vol).powf(1.0 / p) <= (mq.value / vol).powf(1.0 / q) * (1.0 + 1e-8));
        }
    }
}
