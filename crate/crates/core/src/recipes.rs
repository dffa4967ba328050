//! Test sequences and the sharpness constructions built from them.
//!
//! Random generators are fixed so that golden values stay stable:
//! every recipe seeds `ChaCha8Rng::seed_from_u64(seed)` and walks the support
//! in order. Rademacher signs take the low bit of `next_u64()` (1 ↦ −1);
//! unimodular phases are `e(u)` with `u` the standard `[0, 1)` double drawn
//! from the same stream.

use crate::domain::{Coefficients, Limits, MomentResult, Method, PhaseSystem, Support, TorusBox};
use crate::error::{domain, Error, Result};
use crate::expsum::eval_table;
use crate::phase::e;
use crate::quadrature::{integrate_abs_pow, AxisRule, McDesign, Outer, SumIntegrand};
use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SequenceRecipe {
    Constant,
    Rademacher { seed: u64 },
    UnimodularRandom { seed: u64 },
    /// Indicator of `[lo, hi]`.
    Indicator { lo: i64, hi: i64 },
    /// Indicator of `[⌈N/2⌉, ⌈N/2⌉ + ⌊N^{3/4}⌋]`.
    Smallcap {
        #[serde(rename = "N")]
        n: i64,
    },
    /// Coefficients read from a `n,re,im` CSV file.
    File { path: PathBuf },
}

impl SequenceRecipe {
    /// Parses a JSON recipe or one of the shorthands `const`, `constant`,
    /// `rademacher:<seed>`, `unimodular:<seed>`, `smallcap:<N>`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.starts_with('{') {
            return Ok(serde_json::from_str(t)?);
        }
        let (head, arg) = t.split_once(':').unwrap_or((t, ""));
        let num = |s: &str| s.parse::<i64>().map_err(|_| Error::Parse(format!("bad recipe argument {s:?}")));
        match head {
            "const" | "constant" => Ok(Self::Constant),
            "rademacher" => Ok(Self::Rademacher { seed: num(arg)? as u64 }),
            "unimodular" | "unimodular-random" => Ok(Self::UnimodularRandom { seed: num(arg)? as u64 }),
            "smallcap" => Ok(Self::Smallcap { n: num(arg)? }),
            "file" => Ok(Self::File { path: arg.into() }),
            _ => Err(Error::Parse(format!("unknown sequence recipe {t:?}"))),
        }
    }
}

/// `⌊N^{3/4}⌋` computed exactly.
pub fn smallcap_width(n: i64) -> i64 {
    let mut m = (n as f64).powf(0.75).floor() as i64;
    let n3 = (n as i128).pow(3);
    while (m as i128 + 1).pow(4) <= n3 {
        m += 1;
    }
    while m > 0 && (m as i128).pow(4) > n3 {
        m -= 1;
    }
    m
}

/// Lower end `⌈N/2⌉` of the dyadic support `[N/2, N]`.
pub fn half_support_lo(n: i64) -> i64 {
    (n + 1) / 2
}

/// Realizes `recipe` on `support`.
pub fn realize(recipe: &SequenceRecipe, support: &Support) -> Result<Coefficients> {
    let len = support.len();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let indicator = |lo: i64, hi: i64| -> Result<Vec<Complex64>> {
        if hi < lo {
            return domain(format!("indicator [{lo}, {hi}] is empty"));
        }
        let mut hits = 0;
        let v = (0..len)
            .map(|i| {
                let n = support.scalar(i).ok_or_else(|| Error::Domain("indicators need scalar indices".into()))?;
                let inside = (lo..=hi).contains(&n);
                hits += usize::from(inside);
                Ok(if inside { one } else { zero })
            })
            .collect::<Result<Vec<_>>>()?;
        if hits != (hi - lo + 1) as usize {
            return domain(format!("indicator [{lo}, {hi}] is not contained in the support"));
        }
        Ok(v)
    };
    let values = match recipe {
        SequenceRecipe::Constant => vec![one; len],
        SequenceRecipe::Rademacher { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..len).map(|_| if rng.next_u64() & 1 == 1 { -one } else { one }).collect()
        }
        SequenceRecipe::UnimodularRandom { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..len).map(|_| e(rng.random::<f64>())).collect()
        }
        SequenceRecipe::Indicator { lo, hi } => indicator(*lo, *hi)?,
        SequenceRecipe::Smallcap { n } => {
            if *n < 1 {
                return domain("smallcap needs N >= 1");
            }
            let lo = half_support_lo(*n);
            indicator(lo, lo + smallcap_width(*n))?
        }
        SequenceRecipe::File { path } => {
            let a = crate::io::read_coefficients(path)?;
            if a.support() != support {
                return domain(format!("{} does not match the requested support", path.display()));
            }
            return Ok(a);
        }
    };
    Coefficients::new(support.clone(), values)
}

/// `Q = Π [0, c/N^k]`, `k = 1..d`.
pub fn q_box(d: usize, n: u64, c: f64) -> Result<TorusBox> {
    if !(c > 0.0 && c <= 1.0) {
        return domain("shrink factor must lie in (0, 1]");
    }
    if n < 1 || d < 1 {
        return domain("q_box needs d >= 1 and N >= 1");
    }
    let sides = (1..=d as i32).map(|k| c / (n as f64).powi(k)).collect();
    TorusBox::new(vec![0.0; d], sides)
}

/// Guaranteed lower bound `N cos(2π c d)` for `|S_d(x, N)|` on `q_box(d, N, c)`.
///
/// Every phase `Σ x_k n^k` lies in `[0, c d]`, so for `c ≤ 1/(8d)` each term
/// has real part at least `cos(2π c d) ≥ cos(π/4)`.
pub fn interference_bound(d: usize, n: u64, c: f64) -> Result<f64> {
    if d < 1 || n < 1 {
        return domain("interference bound needs d >= 1 and N >= 1");
    }
    if !(c > 0.0) || c > 1.0 / (8.0 * d as f64) {
        return domain(format!("no guarantee for c = {c} > 1/(8d)"));
    }
    Ok(n as f64 * crate::phase::sincos_turns(c * d as f64).1)
}

/// Minimum of `|S_d|` (constant coefficients on `[1, N]`) over `samples`
/// stratified points of `q_box(d, N, c)`.
pub fn interference_sample_min(d: usize, n: u64, c: f64, samples: usize, seed: u64) -> Result<f64> {
    let bx = q_box(d, n, c)?;
    let a = Coefficients::constant(1, n as i64)?;
    let table = a.frequencies(&PhaseSystem::MomentCurve { d })?;
    let design = McDesign { lo: vec![0.0; d], len: bx.sides().to_vec(), samples, batches: 1, seed, stratified: true };
    Ok(design
        .batch_points(0)
        .iter()
        .map(|x| eval_table(&table, a.values(), x).norm())
        .fold(f64::INFINITY, f64::min))
}

/// Smallcap integral with its ratio to `M²`.
#[derive(Debug, Clone, Serialize)]
pub struct SmallcapMeasurement {
    pub n: i64,
    pub width: i64,
    pub lhs: MomentResult,
    /// `lhs / M²`.
    pub ratio: f64,
}

/// `∫ |Σ_{N/2≤n≤N} a_n e(n x₁ + n² x₂ + n³ x₃ + n⁴ x₄)|¹² dx` over
/// `[−1,1]² × [−1/N, 1/N] × [−1/N³, 1/N³]`. The `x₁` integral is exact;
/// the other axes are sampled.
pub fn smallcap_moment(a: &Coefficients, n: i64, samples: usize, seed: u64, limits: &Limits) -> Result<MomentResult> {
    if n < 2 {
        return domain("smallcap domain needs N >= 2");
    }
    if let Support::Interval { lo, hi } = a.support() {
        if *lo < half_support_lo(n) || *hi > n {
            return domain(format!("coefficients must live on [{}, {n}]", half_support_lo(n)));
        }
    } else {
        return domain("smallcap coefficients need an interval support");
    }
    let table = a.frequencies(&PhaseSystem::MomentCurve { d: 4 })?;
    let p = 12.0;
    let count = 2 * 6 * table.max_abs()[0] as usize + 1;
    let axis0 = AxisRule::periodic(-1.0, 2.0, count)?;
    let nf = n as f64;
    let design = McDesign {
        lo: vec![-1.0, -1.0 / nf, -1.0 / nf.powi(3)],
        len: vec![2.0, 2.0 / nf, 2.0 / nf.powi(3)],
        samples,
        batches: McDesign::DEFAULT_BATCHES,
        seed,
        stratified: true,
    };
    let est = integrate_abs_pow(&SumIntegrand { table: &table, values: a.values() }, &axis0, &Outer::Mc(design), p, limits)?;
    Ok(MomentResult {
        value: est.value,
        abs_error: est.stderr,
        method: Method::Mc,
        p,
        d: 4,
        n_terms: a.len(),
        region: format!("smallcap:{n}"),
        seed: Some(seed),
        evaluations: est.evaluations,
    })
}

/// The smallcap integral for the recipe `smallcap{N}`, with `M = ⌊N^{3/4}⌋`.
pub fn smallcap_lower_bound(n: i64, samples: usize, seed: u64, limits: &Limits) -> Result<SmallcapMeasurement> {
    let a = realize(&SequenceRecipe::Smallcap { n }, &Support::Interval { lo: half_support_lo(n), hi: n })?;
    let width = smallcap_width(n);
    let lhs = smallcap_moment(&a, n, samples, seed, limits)?;
    let ratio = lhs.value / (width * width) as f64;
    Ok(SmallcapMeasurement { n, width, lhs, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval(lo: i64, hi: i64) -> Support {
        Support::Interval { lo, hi }
    }

    #[test]
    fn constant_and_rademacher_norms() {
        let a = realize(&SequenceRecipe::Constant, &interval(1, 30)).unwrap();
        assert!((a.l2().powi(2) - 30.0).abs() < 1e-12);
        let r = realize(&SequenceRecipe::Rademacher { seed: 7 }, &interval(1, 30)).unwrap();
        assert!((r.l2().powi(2) - 30.0).abs() < 1e-12);
        assert!((r.norm(6.0).powi(6) - 30.0).abs() < 1e-9);
        assert!(r.values().iter().all(|v| v.im == 0.0 && v.re.abs() == 1.0));
    }

    #[test]
    fn seeded_recipes_are_reproducible() {
        let s = interval(1, 50);
        let u1 = realize(&SequenceRecipe::UnimodularRandom { seed: 9 }, &s).unwrap();
        let u2 = realize(&SequenceRecipe::UnimodularRandom { seed: 9 }, &s).unwrap();
        let u3 = realize(&SequenceRecipe::UnimodularRandom { seed: 10 }, &s).unwrap();
        assert_eq!(u1, u2);
        assert_ne!(u1, u3);
        assert!(u1.values().iter().all(|v| (v.norm() - 1.0).abs() < 1e-15));
    }

    #[test]
    fn smallcap_sixteen() {
        assert_eq!(smallcap_width(16), 8);
        assert_eq!(smallcap_width(81), 27);
        assert_eq!(smallcap_width(256), 64);
        let a = realize(&SequenceRecipe::Smallcap { n: 16 }, &interval(8, 16)).unwrap();
        assert!(a.values().iter().all(|v| *v == Complex64::new(1.0, 0.0)));
        assert!(realize(&SequenceRecipe::Smallcap { n: 16 }, &interval(8, 12)).is_err());
    }

    #[test]
    fn recipe_json_round_trip() {
        let r: SequenceRecipe = serde_json::from_str(r#"{"kind":"smallcap","N":16}"#).unwrap();
        assert_eq!(r, SequenceRecipe::Smallcap { n: 16 });
        let r2: SequenceRecipe = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(r, r2);
        let u: SequenceRecipe = serde_json::from_str(r#"{"kind":"unimodular-random","seed":3}"#).unwrap();
        assert_eq!(u, SequenceRecipe::UnimodularRandom { seed: 3 });
        assert_eq!(SequenceRecipe::parse("const").unwrap(), SequenceRecipe::Constant);
        assert_eq!(SequenceRecipe::parse("rademacher:4").unwrap(), SequenceRecipe::Rademacher { seed: 4 });
        assert!(SequenceRecipe::parse("bogus").is_err());
    }

    #[test]
    fn q_box_examples() {
        let b = q_box(2, 4, 1.0).unwrap();
        assert_eq!(b.sides(), &[0.25, 1.0 / 16.0]);
        for d in 1..6usize {
            let v = q_box(d, 3, 1.0).unwrap().volume();
            let expect = 3f64.powi(-((d * (d + 1) / 2) as i32));
            assert!((v / expect - 1.0).abs() < 1e-12);
        }
        let b = q_box(5, 2, 0.5).unwrap();
        assert_eq!(b.sides(), &[0.25, 0.125, 0.0625, 0.03125, 0.015625]);
    }

    #[test]
    fn interference_examples() {
        let b = interference_bound(3, 64, 1.0 / 24.0).unwrap();
        assert!(b >= 0.7 * 64.0);
        assert!(interference_sample_min(3, 64, 1.0 / 24.0, 1000, 1).unwrap() >= b);
        let b = interference_bound(2, 16, 1.0 / 16.0).unwrap();
        assert!((b - 16.0 * std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(interference_sample_min(2, 16, 1.0 / 16.0, 1000, 2).unwrap() >= b);
        assert!((interference_bound(2, 16, 1e-12).unwrap() - 16.0).abs() < 1e-9);
        assert!(interference_bound(2, 16, 0.1).is_err());
    }

    #[test]
    fn smallcap_spike_is_domain_volume() {
        let n = 16;
        let a = Coefficients::spike(8);
        let r = smallcap_moment(&a, n, 2000, 3, &Limits::default()).unwrap();
        let vol = 2.0 * 2.0 * (2.0 / 16.0) * (2.0 / 16f64.powi(3));
        assert!((r.value / vol - 1.0).abs() < 1e-12, "{} vs {vol}", r.value);
    }
}
