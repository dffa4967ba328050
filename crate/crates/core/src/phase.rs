//! Phase arithmetic in turns.
//!
//! Phases are products of large integer frequencies with real points. They are
//! reduced modulo 1 before any trigonometric call, so `e(k x)` stays accurate
//! for `|k|` up to 2^120.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::TAU;

/// Frequencies larger than this in magnitude are refused.
pub const MAX_FREQUENCY_BITS: u32 = 120;

const LIMB_BITS: u32 = 50;
const LIMB_MASK: u128 = (1u128 << LIMB_BITS) - 1;
const LIMB_SCALE: f64 = (1u64 << LIMB_BITS) as f64;

/// `t - floor(t)`, in `[0, 1)`.
#[inline]
pub fn frac(t: f64) -> f64 {
    let f = t - t.floor();
    // t slightly below an integer can round up to exactly 1.
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// `(sin 2πt, cos 2πt)`, exact at multiples of a quarter turn.
#[inline]
pub fn sincos_turns(t: f64) -> (f64, f64) {
    let r = t - t.round();
    let q = (4.0 * r).round();
    let s = r - 0.25 * q;
    let (sn, cs) = if s == 0.0 { (0.0, 1.0) } else { (TAU * s).sin_cos() };
    match q as i64 {
        0 => (sn, cs),
        1 => (cs, -sn),
        -1 => (-cs, sn),
        _ => (-sn, -cs),
    }
}

/// `e(t) = exp(2πit)`.
#[inline]
pub fn e(t: f64) -> Complex64 {
    let (s, c) = sincos_turns(t);
    Complex64::new(c, s)
}

/// Fractional part of `k·x`, computed without forming the rounded product.
///
/// `k` is split into 50-bit limbs; each limb product is split into its rounded
/// value and exact FMA residual, and only their fractional parts are summed.
pub fn frac_mul(k: i128, x: f64) -> f64 {
    if k == 0 || x == 0.0 {
        return 0.0;
    }
    let mut m = k.unsigned_abs();
    let mut scale = x;
    let mut parts = [0.0f64; 6];
    let mut used = 0;
    while m != 0 {
        let limb = (m & LIMB_MASK) as f64;
        let p = limb * scale;
        let r = limb.mul_add(scale, -p);
        parts[used] = frac(p);
        parts[used + 1] = frac(r);
        used += 2;
        m >>= LIMB_BITS;
        scale *= LIMB_SCALE;
    }
    let f = frac(crate::sum::neumaier_sum(&parts[..used]));
    if k < 0 {
        frac(-f)
    } else {
        f
    }
}

/// `e(k·x)` with exact reduction of the phase.
#[inline]
pub fn e_mul(k: i128, x: f64) -> Complex64 {
    e(frac_mul(k, x))
}

/// Fractional part of `Σ_k freqs[k]·x[k]`.
#[inline]
pub fn frac_dot(freqs: &[i128], x: &[f64]) -> f64 {
    let mut t = 0.0;
    for (&k, &xk) in freqs.iter().zip(x) {
        t += frac_mul(k, xk);
    }
    frac(t)
}

/// `n^k` in 128-bit arithmetic, refusing magnitudes beyond 2^120.
pub fn checked_power(n: i64, k: u32) -> Result<i128> {
    let v = (n as i128).checked_pow(k).filter(|v| v.unsigned_abs() <= 1u128 << MAX_FREQUENCY_BITS);
    v.ok_or_else(|| Error::Domain(format!("{n}^{k} exceeds 2^{MAX_FREQUENCY_BITS}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quarter_turns_are_exact() {
        assert_eq!(sincos_turns(0.5), (0.0, -1.0));
        assert_eq!(sincos_turns(0.25), (1.0, 0.0));
        assert_eq!(sincos_turns(-0.25), (-1.0, 0.0));
        assert_eq!(sincos_turns(3.0), (0.0, 1.0));
    }

    #[test]
    fn frac_mul_handles_huge_frequencies() {
        // 3^75 · 2^-10: the product has an exact fractional part.
        let k = 3i128.pow(75);
        let expect = (k % 1024) as f64 / 1024.0;
        assert_eq!(frac_mul(k, 1.0 / 1024.0), expect);
        assert_eq!(frac_mul(-k, 1.0 / 1024.0), frac(-expect));
    }

    #[test]
    fn frac_mul_beats_naive_product() {
        let k: i128 = 7_132i128.pow(5);
        let x = 0.1;
        // Reference via exact rational: x is m·2^-56 with m = round(0.1·2^56).
        let m = (0.1f64 * 2f64.powi(56)) as i128;
        let num = (k * m) % (1i128 << 56);
        let exact = num as f64 / 2f64.powi(56);
        assert!((frac_mul(k, x) - exact).abs() < 1e-15);
    }

    #[test]
    fn checked_power_refuses_overflow() {
        assert_eq!(checked_power(10, 3).unwrap(), 1000);
        assert!(checked_power(1 << 30, 5).is_err());
    }

    proptest! {
        #[test]
        fn e_is_unimodular_and_periodic(t in -1e6f64..1e6) {
            let z = e(t);
            prop_assert!((z.norm() - 1.0).abs() < 1e-15);
            let w = e(t + 1.0);
            prop_assert!((z - w).norm() < 1e-9);
        }

        #[test]
        fn frac_mul_agrees_with_f64_for_small_inputs(k in -1000i128..1000, x in -10.0f64..10.0) {
            let naive = frac(k as f64 * x);
            let d = (frac_mul(k, x) - naive).abs();
            prop_assert!(d < 1e-11 || (1.0 - d) < 1e-11);
        }
    }
}
