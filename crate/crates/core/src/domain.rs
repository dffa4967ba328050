//! Coefficient sequences, phase systems, boxes and result records.

use crate::error::{domain, Error, Result};
use crate::phase::checked_power;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::time::{Duration, Instant};

/// Index set of a coefficient sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type")]
pub enum Support {
    /// Integers `lo..=hi`.
    Interval { lo: i64, hi: i64 },
    /// Explicit multi-indices, all of the same dimension.
    Points { points: Vec<Vec<i64>> },
}

impl Support {
    pub fn len(&self) -> usize {
        match self {
            Support::Interval { lo, hi } => (hi - lo + 1) as usize,
            Support::Points { points } => points.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Index dimension: 1 for intervals.
    pub fn dim(&self) -> usize {
        match self {
            Support::Interval { .. } => 1,
            Support::Points { points } => points.first().map_or(0, Vec::len),
        }
    }

    /// The `i`-th index as a vector.
    pub fn index(&self, i: usize) -> Vec<i64> {
        match self {
            Support::Interval { lo, .. } => vec![lo + i as i64],
            Support::Points { points } => points[i].clone(),
        }
    }

    /// Scalar index of the `i`-th element for one-dimensional supports.
    pub fn scalar(&self, i: usize) -> Option<i64> {
        match self {
            Support::Interval { lo, .. } => Some(lo + i as i64),
            Support::Points { points } if points[i].len() == 1 => Some(points[i][0]),
            Support::Points { .. } => None,
        }
    }
}

/// A finite complex sequence indexed by its support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    support: Support,
    values: Vec<Complex64>,
}

impl Coefficients {
    pub fn new(support: Support, values: Vec<Complex64>) -> Result<Self> {
        if support.is_empty() {
            return domain("empty support");
        }
        if let Support::Interval { lo, hi } = support {
            if hi < lo {
                return domain(format!("interval [{lo}, {hi}] is empty"));
            }
        }
        if let Support::Points { points } = &support {
            let dim = points[0].len();
            if dim == 0 || points.iter().any(|p| p.len() != dim) {
                return domain("support points must share a positive dimension");
            }
        }
        if values.len() != support.len() {
            return domain(format!(
                "{} values for a support of size {}",
                values.len(),
                support.len()
            ));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return domain("coefficients must be finite");
        }
        Ok(Self { support, values })
    }

    pub fn interval(lo: i64, values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return domain("empty coefficient list");
        }
        let hi = lo + values.len() as i64 - 1;
        Self::new(Support::Interval { lo, hi }, values)
    }

    pub fn constant(lo: i64, hi: i64) -> Result<Self> {
        if hi < lo {
            return domain(format!("interval [{lo}, {hi}] is empty"));
        }
        Self::interval(lo, vec![Complex64::new(1.0, 0.0); (hi - lo + 1) as usize])
    }

    /// The indicator of the single index `n` on `[n, n]`.
    pub fn spike(n: i64) -> Self {
        Self::interval(n, vec![Complex64::new(1.0, 0.0)]).expect("one value")
    }

    pub fn on_points(points: Vec<Vec<i64>>, values: Vec<Complex64>) -> Result<Self> {
        Self::new(Support::Points { points }, values)
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Coefficientwise modulus, same support.
    pub fn abs(&self) -> Self {
        Self {
            support: self.support.clone(),
            values: self.values.iter().map(|v| Complex64::new(v.norm(), 0.0)).collect(),
        }
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self {
            support: self.support.clone(),
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    /// `self + other` on a shared support.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.support != other.support {
            return domain("coefficient supports differ");
        }
        Ok(Self {
            support: self.support.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    /// `‖a‖_p` for `p > 0`; `p = ∞` gives the maximum modulus.
    pub fn norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        }
        let scale = self.norm(f64::INFINITY);
        if scale == 0.0 {
            return 0.0;
        }
        let terms: Vec<f64> = self.values.iter().map(|v| (v.norm() / scale).powf(p)).collect();
        scale * crate::sum::pairwise_sum(&terms).powf(1.0 / p)
    }

    pub fn l2(&self) -> f64 {
        self.norm(2.0)
    }

    /// `Σ|a_n|`.
    pub fn l1(&self) -> f64 {
        self.norm(1.0)
    }

    /// Frequency vectors of every support element under `sys`.
    pub fn frequencies(&self, sys: &PhaseSystem) -> Result<FrequencyTable> {
        sys.validate()?;
        let dim = sys.dim();
        let mut freqs = Vec::with_capacity(self.len() * dim);
        match sys {
            PhaseSystem::MomentCurve { d } => {
                let exps: Vec<u32> = (1..=*d as u32).collect();
                self.push_powers(&exps, &mut freqs)?;
            }
            PhaseSystem::Power { exponents } => self.push_powers(exponents, &mut freqs)?,
            PhaseSystem::Paraboloid { d, n } => {
                let Support::Points { points } = &self.support else {
                    return domain("paraboloid sums need multi-index coefficients");
                };
                for p in points {
                    if p.len() != d - 1 || p.iter().any(|&c| c < 1 || c > *n) {
                        return domain(format!("{p:?} is not in {{1..{n}}}^{}", d - 1));
                    }
                    freqs.extend(p.iter().map(|&c| c as i128));
                    freqs.push(p.iter().map(|&c| (c as i128) * (c as i128)).sum());
                }
            }
            PhaseSystem::Sphere { d, n } => {
                let Support::Points { points } = &self.support else {
                    return domain("sphere sums need multi-index coefficients");
                };
                for p in points {
                    let r2: i128 = p.iter().map(|&c| (c as i128) * (c as i128)).sum();
                    if p.len() != *d || r2 != *n as i128 {
                        return domain(format!("{p:?} is not on the radius-sqrt({n}) shell in Z^{d}"));
                    }
                    freqs.extend(p.iter().map(|&c| c as i128));
                }
            }
        }
        Ok(FrequencyTable::new(dim, freqs))
    }

    fn push_powers(&self, exps: &[u32], out: &mut Vec<i128>) -> Result<()> {
        for i in 0..self.len() {
            let n = self
                .support
                .scalar(i)
                .ok_or_else(|| Error::Domain("one-variable systems need scalar indices".into()))?;
            for &k in exps {
                out.push(checked_power(n, k)?);
            }
        }
        Ok(())
    }
}

/// The frequency map of an exponential sum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum PhaseSystem {
    /// `n ↦ (n, n², …, n^d)`.
    MomentCurve { d: usize },
    /// `n ↦ (n^{β₁}, …, n^{β_k})` with strictly increasing positive exponents.
    Power { exponents: Vec<u32> },
    /// `𝐧 ↦ (𝐧, |𝐧|²)` for `𝐧 ∈ {1..n}^{d−1}`.
    Paraboloid { d: usize, n: i64 },
    /// Lattice points of radius `√n` in `Z^d`; the upper semicircle for `d = 2`.
    Sphere { d: usize, n: i64 },
}

impl PhaseSystem {
    pub fn validate(&self) -> Result<()> {
        match self {
            PhaseSystem::MomentCurve { d } if *d == 0 => domain("moment curve needs d >= 1"),
            PhaseSystem::Power { exponents } => {
                if exponents.is_empty() || exponents[0] == 0 {
                    return domain("power system needs positive exponents");
                }
                if exponents.windows(2).any(|w| w[0] >= w[1]) {
                    return domain("power system exponents must be strictly increasing");
                }
                Ok(())
            }
            PhaseSystem::Paraboloid { d, n } | PhaseSystem::Sphere { d, n } if *d < 2 || *n < 1 => {
                domain("lattice systems need d >= 2 and N >= 1")
            }
            _ => Ok(()),
        }
    }

    /// Ambient torus dimension.
    pub fn dim(&self) -> usize {
        match self {
            PhaseSystem::MomentCurve { d } => *d,
            PhaseSystem::Power { exponents } => exponents.len(),
            PhaseSystem::Paraboloid { d, .. } | PhaseSystem::Sphere { d, .. } => *d,
        }
    }

    /// True when axis 1 carries the frequency `n` itself.
    pub fn linear_first_axis(&self) -> bool {
        match self {
            PhaseSystem::MomentCurve { .. } => true,
            PhaseSystem::Power { exponents } => exponents.first() == Some(&1),
            _ => false,
        }
    }

    /// Canonical index set of a lattice system.
    pub fn lattice_points(&self) -> Result<Vec<Vec<i64>>> {
        self.validate()?;
        match self {
            PhaseSystem::Paraboloid { d, n } => {
                let dim = d - 1;
                let total = (*n as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
                if total > 100_000_000 {
                    return Err(Error::Resource {
                        what: "paraboloid point set".into(),
                        required: total.min(u64::MAX as u128) as u64,
                        limit: 100_000_000,
                    });
                }
                let mut pts = Vec::with_capacity(total as usize);
                let mut cur = vec![1i64; dim];
                loop {
                    pts.push(cur.clone());
                    let mut k = dim;
                    loop {
                        if k == 0 {
                            return Ok(pts);
                        }
                        k -= 1;
                        if cur[k] < *n {
                            cur[k] += 1;
                            break;
                        }
                        cur[k] = 1;
                    }
                }
            }
            PhaseSystem::Sphere { d: 2, n } => Ok(crate::counting::circle_lattice(*n)?
                .points
                .into_iter()
                .map(|(x, y)| vec![x, y])
                .collect()),
            PhaseSystem::Sphere { d, n } => crate::counting::sphere_lattice(*d, *n),
            _ => domain("not a lattice system"),
        }
    }
}

/// Frequencies of a realized sum, row-major `terms × dim`.
#[derive(Debug, Clone)]
pub struct FrequencyTable {
    pub dim: usize,
    pub freqs: Vec<i128>,
}

impl FrequencyTable {
    pub fn new(dim: usize, freqs: Vec<i128>) -> Self {
        Self { dim, freqs }
    }

    pub fn terms(&self) -> usize {
        self.freqs.len() / self.dim.max(1)
    }

    pub fn row(&self, i: usize) -> &[i128] {
        &self.freqs[i * self.dim..(i + 1) * self.dim]
    }

    /// Largest absolute frequency on each axis.
    pub fn max_abs(&self) -> Vec<u128> {
        let mut m = vec![0u128; self.dim];
        for row in self.freqs.chunks(self.dim) {
            for (k, f) in row.iter().enumerate() {
                m[k] = m[k].max(f.unsigned_abs());
            }
        }
        m
    }

    /// Width `max − min` of the frequencies on each axis.
    pub fn spread(&self) -> Vec<u128> {
        (0..self.dim)
            .map(|k| {
                let col = self.freqs.iter().skip(k).step_by(self.dim);
                let lo = col.clone().min().copied().unwrap_or(0);
                let hi = col.max().copied().unwrap_or(0);
                (hi - lo) as u128
            })
            .collect()
    }
}

/// Axis-aligned box `Π [anchor_k, anchor_k + side_k]` in the unit torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusBox {
    anchor: Vec<f64>,
    sides: Vec<f64>,
}

impl TorusBox {
    pub fn new(anchor: Vec<f64>, sides: Vec<f64>) -> Result<Self> {
        if anchor.len() != sides.len() || anchor.is_empty() {
            return domain("box anchor and sides must have the same positive length");
        }
        if anchor.iter().any(|a| !(0.0..1.0).contains(a)) {
            return domain("box anchors must lie in [0, 1)");
        }
        if sides.iter().any(|s| !(*s > 0.0 && *s <= 1.0)) {
            return domain("box sides must lie in (0, 1]");
        }
        Ok(Self { anchor, sides })
    }

    pub fn full(d: usize) -> Self {
        Self { anchor: vec![0.0; d], sides: vec![1.0; d] }
    }

    /// `[0, side]^d`.
    pub fn cube(d: usize, side: f64) -> Result<Self> {
        Self::new(vec![0.0; d], vec![side; d])
    }

    pub fn dyadic(d: usize, scale: DyadicScale) -> Self {
        Self::cube(d, scale.side()).expect("dyadic sides lie in (0, 1]")
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }

    pub fn sides(&self) -> &[f64] {
        &self.sides
    }

    pub fn volume(&self) -> f64 {
        self.sides.iter().product()
    }

    pub fn is_full(&self) -> bool {
        self.sides.iter().all(|&s| s == 1.0)
    }

    /// Translate by `shift`, wrapping anchors into `[0, 1)`.
    pub fn translate(&self, shift: &[f64]) -> Result<Self> {
        if shift.len() != self.dim() {
            return domain("shift dimension mismatch");
        }
        let anchor = self.anchor.iter().zip(shift).map(|(a, s)| crate::phase::frac(a + s)).collect();
        Self::new(anchor, self.sides.clone())
    }

    /// `self ⊆ other` as subsets of R^d (no wrap-around).
    pub fn contained_in(&self, other: &Self) -> bool {
        self.dim() == other.dim()
            && (0..self.dim()).all(|k| {
                self.anchor[k] >= other.anchor[k]
                    && self.anchor[k] + self.sides[k] <= other.anchor[k] + other.sides[k]
            })
    }

    /// Parses `full`, `dyadic:<j>`, `cube:<side>` or `a1,..,ad;s1,..,sd`.
    pub fn parse(text: &str, d: usize) -> Result<Self> {
        let text = text.trim();
        if text == "full" {
            return Ok(Self::full(d));
        }
        if let Some(j) = text.strip_prefix("dyadic:") {
            let j: u32 = j.parse().map_err(|_| Error::Parse(format!("bad dyadic level {j:?}")))?;
            return Ok(Self::dyadic(d, DyadicScale::new(j)));
        }
        if let Some(s) = text.strip_prefix("cube:") {
            let s: f64 = s.parse().map_err(|_| Error::Parse(format!("bad side {s:?}")))?;
            return Self::cube(d, s);
        }
        let (a, s) = text
            .split_once(';')
            .ok_or_else(|| Error::Parse(format!("unrecognized box {text:?}")))?;
        let nums = |t: &str| -> Result<Vec<f64>> {
            t.split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number {x:?}"))))
                .collect()
        };
        let b = Self::new(nums(a)?, nums(s)?)?;
        if b.dim() != d {
            return domain(format!("box has dimension {}, system has {d}", b.dim()));
        }
        Ok(b)
    }
}

/// Dyadic level `j`, side `2^{-j}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicScale {
    pub j: u32,
}

impl DyadicScale {
    pub fn new(j: u32) -> Self {
        Self { j }
    }

    pub fn side(&self) -> f64 {
        (-(self.j as f64)).exp2()
    }
}

/// Resource guards shared by every enumerating or integrating operation.
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    /// Maximum enumerated tuples or pairs.
    pub max_tuples: u64,
    /// Maximum integrand evaluations for one quadrature.
    pub max_points: u64,
    pub deadline: Option<Instant>,
}

impl Default for Limits {
    fn default() -> Self {
        Self { max_tuples: 100_000_000, max_points: 20_000_000_000, deadline: None }
    }
}

impl Limits {
    pub fn with_budget(mut self, budget: Duration) -> Self {
        self.deadline = Some(Instant::now() + budget);
        self
    }

    pub fn check_tuples(&self, what: &str, required: u128) -> Result<()> {
        if required > self.max_tuples as u128 {
            return Err(Error::Resource {
                what: what.into(),
                required: required.min(u64::MAX as u128) as u64,
                limit: self.max_tuples,
            });
        }
        Ok(())
    }

    pub fn check_points(&self, what: &str, required: u128) -> Result<()> {
        if required > self.max_points as u128 {
            return Err(Error::Resource {
                what: what.into(),
                required: required.min(u64::MAX as u128) as u64,
                limit: self.max_points,
            });
        }
        Ok(())
    }

    pub fn check_deadline(&self, what: &str) -> Result<()> {
        match self.deadline {
            Some(t) if Instant::now() > t => Err(Error::Deadline(what.into())),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Grid,
    Mc,
    ExactCount,
    ExactKernel,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Grid => "grid",
            Method::Mc => "mc",
            Method::ExactCount => "exact-count",
            Method::ExactKernel => "exact-kernel",
        })
    }
}

/// An integral with its error estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentResult {
    pub value: f64,
    pub abs_error: f64,
    pub method: Method,
    pub p: f64,
    pub d: usize,
    pub n_terms: usize,
    pub region: String,
    pub seed: Option<u64>,
    /// Integrand evaluations spent.
    pub evaluations: u64,
}

impl MomentResult {
    pub fn exact(value: f64, p: f64, d: usize, n_terms: usize, region: impl Into<String>) -> Self {
        Self {
            value,
            abs_error: 0.0,
            method: Method::ExactCount,
            p,
            d,
            n_terms,
            region: region.into(),
            seed: None,
            evaluations: 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn norms_of_constant_sequence() {
        let a = Coefficients::constant(1, 9).unwrap();
        assert!((a.l2() - 3.0).abs() < 1e-15);
        assert!((a.norm(6.0) - 9f64.powf(1.0 / 6.0)).abs() < 1e-15);
        assert_eq!(a.norm(f64::INFINITY), 1.0);
    }

    #[test]
    fn empty_or_mismatched_supports_are_refused() {
        assert!(Coefficients::interval(1, vec![]).is_err());
        assert!(Coefficients::new(Support::Interval { lo: 1, hi: 3 }, vec![c(1.0, 0.0)]).is_err());
        assert!(Coefficients::on_points(vec![vec![1], vec![1, 2]], vec![c(1.0, 0.0); 2]).is_err());
    }

    #[test]
    fn moment_curve_frequencies() {
        let a = Coefficients::constant(2, 3).unwrap();
        let t = a.frequencies(&PhaseSystem::MomentCurve { d: 3 }).unwrap();
        assert_eq!(t.freqs, vec![2, 4, 8, 3, 9, 27]);
        assert_eq!(t.max_abs(), vec![3, 9, 27]);
    }

    #[test]
    fn power_system_rejects_unsorted_exponents() {
        let a = Coefficients::constant(1, 3).unwrap();
        assert!(a.frequencies(&PhaseSystem::Power { exponents: vec![2, 1] }).is_err());
        assert!(a.frequencies(&PhaseSystem::Power { exponents: vec![1, 3] }).is_ok());
    }

    #[test]
    fn paraboloid_points_and_frequencies() {
        let sys = PhaseSystem::Paraboloid { d: 3, n: 2 };
        let pts = sys.lattice_points().unwrap();
        assert_eq!(pts, vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]]);
        let a = Coefficients::on_points(pts, vec![c(1.0, 0.0); 4]).unwrap();
        let t = a.frequencies(&sys).unwrap();
        assert_eq!(t.row(3), &[2, 2, 8]);
        let bad = Coefficients::on_points(vec![vec![3, 1]], vec![c(1.0, 0.0)]).unwrap();
        assert!(bad.frequencies(&sys).is_err());
    }

    #[test]
    fn box_parsing_and_volume() {
        let b = TorusBox::parse("dyadic:2", 3).unwrap();
        assert_eq!(b.volume(), 1.0 / 64.0);
        let b = TorusBox::parse("0.5,0;0.25,1", 2).unwrap();
        assert_eq!(b.anchor(), &[0.5, 0.0]);
        assert!(TorusBox::parse("0,0;2,1", 2).is_err());
        assert!(TorusBox::new(vec![1.0], vec![0.5]).is_err());
    }

    #[test]
    fn dyadic_side() {
        assert_eq!(DyadicScale::new(0).side(), 1.0);
        assert_eq!(DyadicScale::new(3).side(), 0.125);
    }

    #[test]
    fn exact_results_carry_zero_error() {
        let r = MomentResult::exact(15.0, 4.0, 2, 3, "full");
        assert_eq!(r.abs_error, 0.0);
        assert_eq!(r.method, Method::ExactCount);
    }

    proptest! {
        #[test]
        fn l2_bounded_by_lp_times_size_factor(
            vals in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..40),
            p in 2.01f64..12.0,
        ) {
            let values: Vec<Complex64> = vals.iter().map(|&(r, i)| c(r, i)).collect();
            let a = Coefficients::interval(1, values).unwrap();
            let n = a.len() as f64;
            let bound = a.norm(p) * n.powf(0.5 - 1.0 / p);
            prop_assert!(a.l2() <= bound * (1.0 + 1e-12) + 1e-300);
        }

        #[test]
        fn translation_keeps_volume(sh in prop::collection::vec(0.0f64..5.0, 3)) {
            let b = TorusBox::new(vec![0.1, 0.2, 0.3], vec![0.5, 0.25, 0.125]).unwrap();
            let t = b.translate(&sh).unwrap();
            prop_assert_eq!(t.volume(), b.volume());
        }
    }
}
