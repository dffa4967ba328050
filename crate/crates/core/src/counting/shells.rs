//! Lattice points on circles and spheres, arc clustering, and pair counts.

use crate::domain::Limits;
use crate::error::{domain, Result};
use serde::Serialize;

/// Largest `r` with `r² ≤ n`.
pub fn isqrt(n: i64) -> i64 {
    if n < 0 {
        return -1;
    }
    let mut r = (n as f64).sqrt() as i64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

const MAX_SHELL_RADIUS_SQ: i64 = 1 << 52;

/// Points of `{x² + y² = N, y ≥ 0}`, ordered by decreasing `x` (increasing angle).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LatticeShell {
    pub n: i64,
    pub points: Vec<(i64, i64)>,
}

impl LatticeShell {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Polar angles in `[0, π]`, increasing.
    pub fn angles(&self) -> Vec<f64> {
        self.points.iter().map(|&(x, y)| (y as f64).atan2(x as f64)).collect()
    }
}

pub fn circle_lattice(n: i64) -> Result<LatticeShell> {
    circle_lattice_with(n, true)
}

/// [`circle_lattice`] with the endpoints `(±√N, 0)` kept or dropped.
pub fn circle_lattice_with(n: i64, closed: bool) -> Result<LatticeShell> {
    if !(1..=MAX_SHELL_RADIUS_SQ).contains(&n) {
        return domain(format!("shell radius squared must be in [1, 2^52], got {n}"));
    }
    let r = isqrt(n);
    let mut points = Vec::new();
    for x in (-r..=r).rev() {
        let rest = n - x * x;
        let y = isqrt(rest);
        if y * y == rest && (closed || y > 0) {
            points.push((x, y));
        }
    }
    Ok(LatticeShell { n, points })
}

/// All of `{x ∈ Z^d : |x|² = N}` in lexicographic order, `d ≥ 3`.
pub fn sphere_lattice(d: usize, n: i64) -> Result<Vec<Vec<i64>>> {
    if d < 3 {
        return domain("sphere_lattice needs d >= 3; use circle_lattice for d = 2");
    }
    if n < 1 {
        return domain(format!("shell radius squared must be positive, got {n}"));
    }
    let r = isqrt(n);
    let cells = ((2 * r + 1) as u128).saturating_pow(d as u32 - 1);
    Limits::default().check_tuples("sphere shell enumeration", cells)?;
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(d);
    fill(d, n, &mut cur, &mut out);
    Ok(out)
}

fn fill(left: usize, rest: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
    if left == 1 {
        let y = isqrt(rest);
        if y * y == rest {
            for v in if y == 0 { vec![0] } else { vec![-y, y] } {
                cur.push(v);
                out.push(cur.clone());
                cur.pop();
            }
        }
        return;
    }
    let r = isqrt(rest);
    for x in -r..=r {
        cur.push(x);
        fill(left - 1, rest - x * x, cur, out);
        cur.pop();
    }
}

fn nonempty(shell: &LatticeShell) -> Result<()> {
    if shell.is_empty() {
        return domain(format!("no lattice points on the circle of radius sqrt({})", shell.n));
    }
    Ok(())
}

/// Largest number of shell points on a closed arc of length `N^{γ/2}`.
pub fn arc_max_count(n: i64, gamma: f64) -> Result<usize> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return domain("gamma must lie in (0, 1)");
    }
    let shell = circle_lattice(n)?;
    nonempty(&shell)?;
    let radius = (n as f64).sqrt();
    let span = (n as f64).powf(gamma / 2.0) / radius;
    let th = shell.angles();
    let tol = 1e-12 * (1.0 + span);
    let mut best = 0;
    let mut hi = 0;
    for lo in 0..th.len() {
        hi = hi.max(lo);
        while hi + 1 < th.len() && th[hi + 1] - th[lo] <= span + tol {
            hi += 1;
        }
        best = best.max(hi - lo + 1);
    }
    Ok(best)
}

/// `max_{n₁,n₂} #{(n₃,n₄) : |n₁+n₂−n₃−n₄| ∈ I_j}` over the upper semicircle,
/// with `I_j = [2^j, 2^{j+1})` and `j = None` meaning the single value `0`.
pub fn pair_count_ij(n: i64, j: Option<u32>, limits: &Limits) -> Result<usize> {
    let shell = circle_lattice(n)?;
    nonempty(&shell)?;
    let k = shell.len() as u128;
    limits.check_tuples("shell quadruples", k.pow(4))?;
    let (lo, hi) = match j {
        None => (0i128, 1i128),
        Some(j) if j < 60 => (1i128 << (2 * j), 1i128 << (2 * j + 2)),
        Some(_) => return domain("j must be below 60"),
    };
    let pts = &shell.points;
    let mut best = 0;
    for &(x1, y1) in pts {
        for &(x2, y2) in pts {
            let (sx, sy) = ((x1 + x2) as i128, (y1 + y2) as i128);
            let mut count = 0;
            for &(x3, y3) in pts {
                for &(x4, y4) in pts {
                    let dx = sx - (x3 + x4) as i128;
                    let dy = sy - (y3 + y4) as i128;
                    let r2 = dx * dx + dy * dy;
                    if lo <= r2 && r2 < hi {
                        count += 1;
                    }
                }
            }
            best = best.max(count);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn isqrt_edges() {
        for n in [0i64, 1, 3, 4, 15, 16, 17, (1 << 52) - 1, 1 << 52] {
            let r = isqrt(n);
            assert!(r * r <= n && (r + 1) * (r + 1) > n);
        }
    }

    #[test]
    fn circle_examples() {
        let s = circle_lattice(25).unwrap();
        assert_eq!(s.points, vec![(5, 0), (4, 3), (3, 4), (0, 5), (-3, 4), (-4, 3), (-5, 0)]);
        assert!(circle_lattice(3).unwrap().is_empty());
        assert_eq!(circle_lattice(1).unwrap().points, vec![(1, 0), (0, 1), (-1, 0)]);
        assert!(circle_lattice(0).is_err());
        assert_eq!(circle_lattice_with(25, false).unwrap().len(), 5);
    }

    #[test]
    fn sphere_examples() {
        assert_eq!(sphere_lattice(3, 1).unwrap().len(), 6);
        assert_eq!(sphere_lattice(3, 2).unwrap().len(), 12);
        assert_eq!(sphere_lattice(3, 3).unwrap().len(), 8);
        assert_eq!(sphere_lattice(3, 7).unwrap().len(), 0);
        assert_eq!(sphere_lattice(4, 1).unwrap().len(), 8);
        // r_4(n) = 8σ(n) for odd n.
        assert_eq!(sphere_lattice(4, 5).unwrap().len(), 48);
        assert!(sphere_lattice(2, 5).is_err());
    }

    #[test]
    fn arc_examples() {
        assert_eq!(arc_max_count(25, 0.5).unwrap(), 2);
        assert!(arc_max_count(3, 0.5).is_err());
        assert!(arc_max_count(25, 1.0).is_err());
    }

    #[test]
    fn pair_count_examples() {
        let lim = Limits::default();
        assert_eq!(pair_count_ij(25, None, &lim).unwrap(), 2);
        assert_eq!(pair_count_ij(1, None, &lim).unwrap(), 2);
        assert!(pair_count_ij(3, None, &lim).is_err());
    }

    proptest! {
        #[test]
        fn shell_points_are_on_the_circle(n in 1i64..200_000) {
            let s = circle_lattice(n).unwrap();
            for &(x, y) in &s.points {
                prop_assert_eq!(x * x + y * y, n);
                prop_assert!(y >= 0);
            }
            let th = s.angles();
            prop_assert!(th.windows(2).all(|w| w[0] < w[1]));
        }

        #[test]
        fn arc_count_monotone_in_gamma(n in 1i64..50_000, g in 0.05f64..0.9) {
            if !circle_lattice(n).unwrap().is_empty() {
                let a = arc_max_count(n, g).unwrap();
                let b = arc_max_count(n, (g + 0.05).min(0.95)).unwrap();
                prop_assert!(a >= 1 && a <= b);
            }
        }
    }
}
