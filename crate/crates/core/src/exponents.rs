//! Critical exponents and normalization envelopes.

use crate::error::{domain, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CriticalExponents {
    /// Surface-restricted critical exponent `d(d−1)`.
    pub surface: u64,
    /// Box/decay-restricted critical exponent.
    pub decay: u64,
    /// Vinogradov critical exponent `d(d+1)`.
    pub vinogradov: u64,
}

/// Exponents `(d(d−1), ρ_d, d(d+1))` with `ρ_d = (3d²−4)/4` for even `d` and
/// `(3d²−3)/4` for odd `d`.
pub fn critical_exponents(d: u64) -> Result<CriticalExponents> {
    if d < 2 {
        return domain(format!("critical exponents need d >= 2, got {d}"));
    }
    let decay = if d % 2 == 0 { (3 * d * d - 4) / 4 } else { (3 * d * d - 3) / 4 };
    Ok(CriticalExponents { surface: d * (d - 1), decay, vinogradov: d * (d + 1) })
}

/// `N^{max(0, (p − ρ_d)/2)}`.
pub fn conjecture_envelope(d: u64, p: f64, n: u64, _j: u32) -> Result<f64> {
    if !(p > 0.0) {
        return domain(format!("p must be positive, got {p}"));
    }
    if n < 1 {
        return domain("N must be at least 1");
    }
    let rho = critical_exponents(d)?.decay as f64;
    Ok((n as f64).powf(((p - rho) / 2.0).max(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_values() {
        let t = |d| {
            let e = critical_exponents(d).unwrap();
            (e.surface, e.decay, e.vinogradov)
        };
        assert_eq!(t(2), (2, 2, 6));
        assert_eq!(t(3), (6, 6, 12));
        assert_eq!(t(4), (12, 11, 20));
        assert_eq!(t(5), (20, 18, 30));
        assert!(critical_exponents(1).is_err());
    }

    #[test]
    fn decay_exponent_strictly_below_surface_from_four() {
        for d in 2..=64u64 {
            let e = critical_exponents(d).unwrap();
            if d <= 3 {
                assert_eq!(e.decay, e.surface);
            } else {
                assert!(e.decay < e.surface, "d={d}");
            }
        }
    }

    #[test]
    fn hoelder_range_inside_decay_range() {
        for d in 2..=64u64 {
            let e = critical_exponents(d).unwrap();
            assert!(((d * d - 1) as f64) / 2.0 <= e.decay as f64, "d={d}");
        }
    }

    #[test]
    fn envelope_examples() {
        assert_eq!(conjecture_envelope(3, 6.0, 1000, 0).unwrap(), 1.0);
        assert!((conjecture_envelope(2, 4.0, 100, 0).unwrap() - 100.0).abs() < 1e-12);
        assert!((conjecture_envelope(4, 12.0, 16, 0).unwrap() - 4.0).abs() < 1e-12);
        assert!(conjecture_envelope(2, 0.0, 10, 0).is_err());
        assert!(conjecture_envelope(2, 2.0, 0, 0).is_err());
    }
}
