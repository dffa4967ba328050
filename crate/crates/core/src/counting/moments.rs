//! Even moments as weighted solution counts.
//!
//! `∫_{T^d} |S|^{2l} = Σ_v |W(v)|²` where `W(v)` sums `Π a` over ordered
//! `l`-tuples whose frequency vectors add up to `v`. The maps `W` are built by
//! repeated convolution with exact integer keys, sorted after every step so
//! the accumulation order is fixed.

use crate::domain::{Coefficients, FrequencyTable, Limits, PhaseSystem, TorusBox};
use crate::error::{domain, Result};
use crate::phase::{e, frac, frac_mul, sincos_turns};
use crate::sum::{pairwise_sum, par_sum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::HashMap;
use std::ops::{Add, Mul};

/// Sorted distinct power-sum vectors with their accumulated weights.
#[derive(Debug, Clone)]
pub struct PowerSums<W> {
    pub dim: usize,
    /// Row-major `len × dim`, lexicographically increasing.
    pub keys: Vec<i128>,
    pub weights: Vec<W>,
}

impl<W> PowerSums<W> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn key(&self, i: usize) -> &[i128] {
        &self.keys[i * self.dim..(i + 1) * self.dim]
    }
}

/// `W` for `l`-fold sums of the rows of `table` weighted by `values`.
pub fn power_sums<W>(table: &FrequencyTable, values: &[W], l: u32, limits: &Limits) -> Result<PowerSums<W>>
where
    W: Copy + Add<Output = W> + Mul<Output = W>,
{
    if l < 1 {
        return domain("power sums need l >= 1");
    }
    let dim = table.dim;
    let terms = values.len();
    let mut cur = merge(dim, table.freqs.clone(), values.to_vec());
    for _ in 1..l {
        limits.check_tuples("power-sum convolution", cur.len() as u128 * terms as u128)?;
        limits.check_deadline("power-sum convolution")?;
        let mut keys = Vec::with_capacity(cur.len() * terms * dim);
        let mut weights = Vec::with_capacity(cur.len() * terms);
        for i in 0..cur.len() {
            let k = cur.key(i);
            for (n, &a) in values.iter().enumerate() {
                keys.extend(k.iter().zip(table.row(n)).map(|(x, y)| x + y));
                weights.push(cur.weights[i] * a);
            }
        }
        cur = merge(dim, keys, weights);
    }
    Ok(cur)
}

fn merge<W: Copy + Add<Output = W>>(dim: usize, keys: Vec<i128>, weights: Vec<W>) -> PowerSums<W> {
    let row = |i: usize| &keys[i * dim..(i + 1) * dim];
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&i, &j| row(i).cmp(row(j)));
    let mut out_keys = Vec::with_capacity(keys.len());
    let mut out_w: Vec<W> = Vec::with_capacity(weights.len());
    let mut last: Option<usize> = None;
    for i in order {
        match last {
            Some(j) if row(j) == row(i) => {
                let w = out_w.last_mut().expect("nonempty");
                *w = *w + weights[i];
            }
            _ => {
                out_keys.extend_from_slice(row(i));
                out_w.push(weights[i]);
                last = Some(i);
            }
        }
    }
    PowerSums { dim, keys: out_keys, weights: out_w }
}

fn tuple_guard(terms: usize, l: u32, limits: &Limits) -> Result<()> {
    let tuples = (terms as u128).checked_pow(l).unwrap_or(u128::MAX);
    limits.check_tuples("l-tuple enumeration", tuples)
}

/// Exact `∫_{T^d} |S|^{2l} dx`.
pub fn even_moment_count(a: &Coefficients, sys: &PhaseSystem, l: u32, limits: &Limits) -> Result<f64> {
    let table = a.frequencies(sys)?;
    tuple_guard(a.len(), l, limits)?;
    let w = power_sums(&table, a.values(), l, limits)?;
    let sq: Vec<f64> = w.weights.iter().map(|z| z.norm_sqr()).collect();
    Ok(pairwise_sum(&sq))
}

/// Number of solutions of the Vinogradov system
/// `n₁^k+…+n_l^k = n_{l+1}^k+…+n_{2l}^k`, `k = 1..d`, `1 ≤ n_i ≤ N`.
pub fn vinogradov_count(d: usize, l: u32, n: i64, limits: &Limits) -> Result<u128> {
    let a = Coefficients::constant(1, n)?;
    let table = a.frequencies(&PhaseSystem::MomentCurve { d })?;
    tuple_guard(a.len(), l, limits)?;
    let ones = vec![1u128; a.len()];
    let w = power_sums(&table, &ones, l, limits)?;
    Ok(w.weights.iter().map(|c| c * c).sum())
}

/// `∫_α^{α+δ} e(m t) dt = e(m(α+δ/2)) sin(π m δ)/(π m)`, exact at `m = 0`.
pub fn interval_transform(m: i128, anchor: f64, side: f64) -> Complex64 {
    if m == 0 {
        return Complex64::new(side, 0.0);
    }
    let half = frac_mul(m, 0.5 * side);
    let s = sincos_turns(half).0;
    if s == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    e(frac(frac_mul(m, anchor) + half)) * (s / (std::f64::consts::PI * m as f64))
}

/// Exact `∫_box |S|^{2l} dx` from the `2l`-linear expansion.
pub fn box_moment_exact(a: &Coefficients, sys: &PhaseSystem, bx: &TorusBox, l: u32, limits: &Limits) -> Result<f64> {
    let table = a.frequencies(sys)?;
    if bx.dim() != table.dim {
        return domain(format!("box has dimension {}, system has {}", bx.dim(), table.dim));
    }
    tuple_guard(a.len(), l, limits)?;
    let w = power_sums(&table, a.values(), l, limits)?;
    let k = w.len();
    limits.check_tuples("power-sum pairs", k as u128 * k as u128)?;
    let vol = bx.volume();
    let (anchor, sides) = (bx.anchor(), bx.sides());
    // Σ_v |W_v|² vol + 2 Re Σ_{v<u} W_v conj(W_u) Π I(v − u).
    let diag: Vec<f64> = w.weights.iter().map(|z| z.norm_sqr() * vol).collect();
    let off = par_sum(k, |i| {
        let vi = w.key(i);
        let mut acc = crate::sum::Neumaier::new();
        for j in i + 1..k {
            let vj = w.key(j);
            let mut prod = w.weights[i] * w.weights[j].conj();
            for ax in 0..w.dim {
                prod *= interval_transform(vi[ax] - vj[ax], anchor[ax], sides[ax]);
                if prod == Complex64::new(0.0, 0.0) {
                    break;
                }
            }
            acc.add(prod.re);
        }
        acc.value()
    });
    Ok((pairwise_sum(&diag) + 2.0 * off).max(0.0))
}

/// `lS − lS` as a sorted set.
pub fn sumset(set: &[i64], l: u32, limits: &Limits) -> Result<Vec<i64>> {
    if set.is_empty() {
        return domain("sumset of an empty set");
    }
    if l < 1 {
        return domain("sumset needs l >= 1");
    }
    tuple_guard(set.len(), l, limits)?;
    let mut base: Vec<i64> = set.to_vec();
    base.sort_unstable();
    base.dedup();
    let mut sums = base.clone();
    for _ in 1..l {
        let mut next: Vec<i64> = sums.iter().flat_map(|s| base.iter().map(move |b| s + b)).collect();
        next.sort_unstable();
        next.dedup();
        sums = next;
    }
    limits.check_tuples("sumset differences", (sums.len() as u128).pow(2))?;
    let mut diff: Vec<i64> = sums.iter().flat_map(|x| sums.iter().map(move |y| x - y)).collect();
    diff.sort_unstable();
    diff.dedup();
    Ok(diff)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SumsetRatio {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`; at most `1 + 1e−10` when the inequality holds.
    pub ratio: f64,
    pub holds: bool,
}

/// Exact sides of `∫_I |Σ_{n∈S} a_n e(nt)|^{2l} ≤ |I||lS−lS| ∫_0^1 |…|^{2l}`.
pub fn sumset_ratio_check(set: &[i64], a: &[Complex64], interval: (f64, f64), l: u32, limits: &Limits) -> Result<SumsetRatio> {
    let (lo, hi) = interval;
    if !(0.0 <= lo && lo < hi && hi <= 1.0) {
        return domain("I must be a nondegenerate subinterval of [0, 1]");
    }
    let coeffs = Coefficients::on_points(set.iter().map(|&n| vec![n]).collect(), a.to_vec())?;
    let sys = PhaseSystem::MomentCurve { d: 1 };
    let bx = TorusBox::new(vec![lo.min(1.0 - f64::EPSILON)], vec![hi - lo])?;
    let lhs = box_moment_exact(&coeffs, &sys, &bx, l, limits)?;
    let full = even_moment_count(&coeffs, &sys, l, limits)?;
    let size = sumset(set, l, limits)?.len() as f64;
    let rhs = (hi - lo) * size * full;
    let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    Ok(SumsetRatio { lhs, rhs, ratio, holds: ratio <= 1.0 + 1e-10 })
}

/// Fourier coefficients of a trigonometric density, keyed by frequency.
pub type FourierTable = Vec<(Vec<i64>, Complex64)>;

#[derive(Debug, Clone, Serialize)]
pub struct MajorizationCheck {
    /// `|∫ |S_a|^{2l} dμ|`.
    pub lhs: f64,
    /// `∫ |S_{|a|}|^{2l} dν`.
    pub rhs: f64,
    pub holds: bool,
}

fn density_moment(w: &PowerSums<Complex64>, coeffs: &FourierTable) -> Complex64 {
    let index: HashMap<&[i128], usize> = (0..w.len()).map(|i| (w.key(i), i)).collect();
    let mut acc = crate::sum::NeumaierComplex::new();
    let mut key = vec![0i128; w.dim];
    for i in 0..w.len() {
        let v = w.key(i);
        for (m, c) in coeffs {
            for ax in 0..w.dim {
                key[ax] = v[ax] + m[ax] as i128;
            }
            if let Some(&j) = index.get(key.as_slice()) {
                acc.add(w.weights[i] * w.weights[j].conj() * c);
            }
        }
    }
    acc.value()
}

/// Both sides of `|∫|S_a|^{2l} dμ| ≤ ∫|S_{|a|}|^{2l} dν` for densities
/// `dμ = Σ μ̂(m) e(m·x) dx` and `dν = Σ ν̂(m) e(m·x) dx`, requiring
/// `|μ̂| ≤ ν̂` entrywise.
pub fn majorization_check(
    a: &Coefficients,
    sys: &PhaseSystem,
    l: u32,
    mu_hat: &FourierTable,
    nu_hat: &FourierTable,
    limits: &Limits,
) -> Result<MajorizationCheck> {
    let table = a.frequencies(sys)?;
    let dim = table.dim;
    if mu_hat.iter().chain(nu_hat).any(|(m, _)| m.len() != dim) {
        return domain("density frequencies must match the system dimension");
    }
    let nu: HashMap<&[i64], Complex64> = nu_hat.iter().map(|(m, c)| (m.as_slice(), *c)).collect();
    if nu.values().any(|c| c.im != 0.0 || c.re < 0.0) {
        return domain("nu must have nonnegative real Fourier coefficients");
    }
    for (m, c) in mu_hat {
        let bound = nu.get(m.as_slice()).map_or(0.0, |c| c.re);
        if c.norm() > bound {
            return domain(format!("|mu_hat({m:?})| exceeds nu_hat"));
        }
    }
    tuple_guard(a.len(), l, limits)?;
    let w = power_sums(&table, a.values(), l, limits)?;
    let wabs = power_sums(&table, a.abs().values(), l, limits)?;
    let lhs = density_moment(&w, mu_hat).norm();
    let rhs = density_moment(&wabs, nu_hat).re;
    Ok(MajorizationCheck { lhs, rhs, holds: lhs <= rhs * (1.0 + 1e-8) + 1e-8 })
}

/// A random majorized pair: `μ̂` complex on `[−k, k]^d`, `ν̂ = |μ̂| + slack`.
pub fn random_majorized_pair(d: usize, k: i64, seed: u64) -> (FourierTable, FourierTable) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = (2 * k + 1) as usize;
    let total = side.pow(d as u32);
    let mut mu = Vec::with_capacity(total);
    let mut nu = Vec::with_capacity(total);
    for idx in 0..total {
        let mut m = vec![0i64; d];
        let mut r = idx;
        for c in m.iter_mut() {
            *c = (r % side) as i64 - k;
            r /= side;
        }
        let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let slack: f64 = rng.random_range(0.0..0.5);
        nu.push((m.clone(), Complex64::new(c.norm() + slack, 0.0)));
        mu.push((m, c));
    }
    (mu, nu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Support;
    use crate::recipes::{realize, SequenceRecipe};

    fn lim() -> Limits {
        Limits::default()
    }

    /// Brute-force count over all `2l`-tuples, independent of the power-sum maps.
    fn brute_vinogradov(d: u32, l: usize, n: i64) -> u64 {
        let total = (n as u64).pow(2 * l as u32);
        let mut count = 0;
        for mut idx in 0..total {
            let mut t = Vec::with_capacity(2 * l);
            for _ in 0..2 * l {
                t.push((idx % n as u64) as i64 + 1);
                idx /= n as u64;
            }
            let ok = (1..=d).all(|k| {
                let lhs: i64 = t[..l].iter().map(|x| x.pow(k)).sum();
                let rhs: i64 = t[l..].iter().map(|x| x.pow(k)).sum();
                lhs == rhs
            });
            count += u64::from(ok);
        }
        count
    }

    #[test]
    fn vinogradov_small_cases() {
        assert_eq!(vinogradov_count(1, 1, 9, &lim()).unwrap(), 9);
        for n in [1i64, 2, 3, 10] {
            assert_eq!(vinogradov_count(2, 2, n, &lim()).unwrap(), (2 * n * n - n) as u128);
        }
        assert_eq!(vinogradov_count(2, 2, 2, &lim()).unwrap(), 6);
        assert_eq!(vinogradov_count(3, 3, 4, &lim()).unwrap(), brute_vinogradov(3, 3, 4) as u128);
    }

    #[test]
    fn even_moment_matches_integer_count() {
        let a = Coefficients::constant(1, 4).unwrap();
        let m = even_moment_count(&a, &PhaseSystem::MomentCurve { d: 3 }, 3, &lim()).unwrap();
        assert_eq!(m, brute_vinogradov(3, 3, 4) as f64);
    }

    #[test]
    fn tuple_guard_refuses() {
        let a = Coefficients::constant(1, 1000).unwrap();
        let small = Limits { max_tuples: 1000, ..lim() };
        assert!(matches!(
            even_moment_count(&a, &PhaseSystem::MomentCurve { d: 2 }, 2, &small),
            Err(crate::error::Error::Resource { .. })
        ));
    }

    #[test]
    fn interval_transform_full_period_vanishes() {
        for m in [-5i128, -1, 1, 2, 1 << 80] {
            assert_eq!(interval_transform(m, 0.0, 1.0), Complex64::new(0.0, 0.0));
        }
        let t = interval_transform(3, 0.1, 0.2);
        let direct = (e(3.0 * 0.3) - e(3.0 * 0.1)) / Complex64::new(0.0, 2.0 * std::f64::consts::PI * 3.0);
        assert!((t - direct).norm() < 1e-15);
    }

    #[test]
    fn full_box_equals_torus_moment() {
        let a = realize(&SequenceRecipe::UnimodularRandom { seed: 4 }, &Support::Interval { lo: 1, hi: 7 }).unwrap();
        let sys = PhaseSystem::MomentCurve { d: 2 };
        let full = even_moment_count(&a, &sys, 2, &lim()).unwrap();
        let bx = box_moment_exact(&a, &sys, &TorusBox::full(2), 2, &lim()).unwrap();
        assert!((full - bx).abs() <= 1e-12 * full);
    }

    #[test]
    fn spike_box_moment_is_volume() {
        let bx = TorusBox::new(vec![0.1, 0.3], vec![0.25, 0.5]).unwrap();
        let m = box_moment_exact(&Coefficients::spike(5), &PhaseSystem::MomentCurve { d: 2 }, &bx, 2, &lim()).unwrap();
        assert!((m - 0.125).abs() < 1e-15);
    }

    #[test]
    fn half_interval_against_fine_quadrature() {
        let a = Coefficients::constant(1, 2).unwrap();
        let sys = PhaseSystem::MomentCurve { d: 1 };
        let bx = TorusBox::new(vec![0.0], vec![0.5]).unwrap();
        let exact = box_moment_exact(&a, &sys, &bx, 1, &lim()).unwrap();
        let n = 1_000_000;
        let h = 0.5 / n as f64;
        let mid: f64 = (0..n)
            .map(|i| {
                let t = (i as f64 + 0.5) * h;
                (e(t) + e(2.0 * t)).norm_sqr()
            })
            .sum::<f64>()
            * h;
        assert!((exact - mid).abs() < 1e-9, "{exact} vs {mid}");
    }

    #[test]
    fn sumset_examples() {
        for n in [1i64, 4, 9] {
            let s: Vec<i64> = (1..=n).collect();
            assert_eq!(sumset(&s, 1, &lim()).unwrap().len() as i64, 2 * n - 1);
            assert_eq!(sumset(&s, 2, &lim()).unwrap().len() as i64, 4 * n - 3);
        }
        assert_eq!(sumset(&[1, 2, 4], 1, &lim()).unwrap(), vec![-3, -2, -1, 0, 1, 2, 3]);
        assert!(sumset(&[], 1, &lim()).is_err());
    }

    #[test]
    fn lemma_a35_examples() {
        let s: Vec<i64> = (1..=8).collect();
        let ones = vec![Complex64::new(1.0, 0.0); 8];
        let r = sumset_ratio_check(&s, &ones, (0.0, 1.0), 1, &lim()).unwrap();
        assert!((r.ratio - 1.0 / 15.0).abs() < 1e-12);

        let a = realize(&SequenceRecipe::UnimodularRandom { seed: 3 }, &Support::Interval { lo: 1, hi: 8 }).unwrap();
        let r = sumset_ratio_check(&s, a.values(), (0.0, 0.25), 1, &lim()).unwrap();
        assert!(r.holds && r.ratio <= 1.0);

        let s: Vec<i64> = (4..=8).collect();
        let r = sumset_ratio_check(&s, &vec![Complex64::new(1.0, 0.0); 5], (0.0, 1.0 / 64.0), 2, &lim()).unwrap();
        assert!(r.holds, "{r:?}");
    }

    #[test]
    fn lemma_a28_with_lebesgue_pair_is_equality() {
        let a = realize(&SequenceRecipe::UnimodularRandom { seed: 8 }, &Support::Interval { lo: 1, hi: 6 }).unwrap();
        let lebesgue: FourierTable = vec![(vec![0, 0], Complex64::new(1.0, 0.0))];
        let sys = PhaseSystem::MomentCurve { d: 2 };
        let r = majorization_check(&a, &sys, 2, &lebesgue, &lebesgue, &lim()).unwrap();
        let direct = even_moment_count(&a, &sys, 2, &lim()).unwrap();
        assert!((r.lhs - direct).abs() < 1e-10 * direct);
        assert!((r.lhs - r.rhs).abs() < 1e-9 * direct);
    }

    #[test]
    fn lemma_a28_rejects_unmajorized_pair() {
        let a = Coefficients::constant(1, 3).unwrap();
        let mu: FourierTable = vec![(vec![1], Complex64::new(0.0, 2.0))];
        let nu: FourierTable = vec![(vec![1], Complex64::new(1.0, 0.0))];
        assert!(majorization_check(&a, &PhaseSystem::MomentCurve { d: 1 }, 1, &mu, &nu, &lim()).is_err());
    }

    #[test]
    fn lemma_a28_random_pairs() {
        for seed in 0..5 {
            let (mu, nu) = random_majorized_pair(2, 3, seed);
            let a = realize(&SequenceRecipe::UnimodularRandom { seed }, &Support::Interval { lo: 1, hi: 5 }).unwrap();
            let r = majorization_check(&a, &PhaseSystem::MomentCurve { d: 2 }, 2, &mu, &nu, &lim()).unwrap();
            assert!(r.holds, "{r:?}");
        }
    }
}
