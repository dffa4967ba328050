//! Surface measures on graph hypersurfaces `{(u, F(u)) : u ∈ [0,1]^{d−1}}`
//! and on circles, with their Fourier coefficients
//! `σ̂(ξ) = ∫ e(−ξ·y) dσ(y)`.
//!
//! The measure is the unnormalized surface measure: weight `√(1+|∇F|²)` on
//! graphs, arclength on circles.

use crate::bessel::j0_turns;
use crate::error::{domain, Error, Result};
use crate::fit::FitResult;
use crate::phase::{e, frac, sincos_turns};
use crate::quadrature::AxisRule;
use crate::sum::{pairwise_sum_complex, NeumaierComplex};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Gauss–Legendre nodes per panel in surface quadrature.
pub const SURFACE_PANEL_ORDER: usize = 8;

/// `coef · Π u_k^{powers[k]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    pub powers: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "family")]
pub enum SurfaceFamily {
    /// `F(u₁) = u₁²` in the plane.
    Square,
    /// `F = u₁u₂` in `R³`.
    BilinearD3,
    /// `F = (u₂² + u₁u₃)/2` in `R⁴`.
    D4,
    /// `F = (u₁u₄ + u₂u₃)/2` in `R⁵`.
    D5,
    /// `F = (2/d) Σ_{1≤i≤d/2} u_i u_{d−i}` in `R^d`.
    General { d: usize },
    /// Circle of radius `r` about the origin in the plane.
    Circle { r: f64 },
    /// Graph of a monomial table over `[0,1]^{d−1}`.
    Custom { d: usize, terms: Vec<Monomial> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSurface {
    pub family: SurfaceFamily,
    /// Ambient dimension.
    pub d: usize,
    /// Graph polynomial; empty for the circle.
    terms: Vec<Monomial>,
}

fn mono(coef: f64, powers: &[u32]) -> Monomial {
    Monomial { coef, powers: powers.to_vec() }
}

fn unit(d: usize, i: usize, j: usize) -> Vec<u32> {
    let mut p = vec![0; d - 1];
    p[i - 1] += 1;
    p[j - 1] += 1;
    p
}

impl SurfaceFamily {
    /// JSON, or one of `square`, `bilinear-d3`, `d4`, `d5`, `general:<d>`,
    /// `circle:<r>`, `flat:<d>`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.starts_with('{') {
            return Ok(serde_json::from_str(t)?);
        }
        let (head, arg) = t.split_once(':').unwrap_or((t, ""));
        let bad = || Error::Parse(format!("bad surface argument {arg:?}"));
        Ok(match head {
            "square" => Self::Square,
            "bilinear-d3" => Self::BilinearD3,
            "d4" => Self::D4,
            "d5" => Self::D5,
            "general" => Self::General { d: arg.parse().map_err(|_| bad())? },
            "circle" => Self::Circle { r: arg.parse().map_err(|_| bad())? },
            "flat" => Self::Custom { d: arg.parse().map_err(|_| bad())?, terms: Vec::new() },
            _ => return Err(Error::Parse(format!("unknown surface {t:?}"))),
        })
    }
}

impl GraphSurface {
    pub fn new(family: SurfaceFamily) -> Result<Self> {
        let (d, terms) = match &family {
            SurfaceFamily::Square => (2, vec![mono(1.0, &[2])]),
            SurfaceFamily::BilinearD3 => (3, vec![mono(1.0, &[1, 1])]),
            SurfaceFamily::D4 => (4, vec![mono(0.5, &[0, 2, 0]), mono(0.5, &[1, 0, 1])]),
            SurfaceFamily::D5 => (5, vec![mono(0.5, &[1, 0, 0, 1]), mono(0.5, &[0, 1, 1, 0])]),
            SurfaceFamily::General { d } => {
                if *d < 2 {
                    return domain("general family needs d >= 2");
                }
                let c = 2.0 / *d as f64;
                (*d, (1..=*d / 2).map(|i| Monomial { coef: c, powers: unit(*d, i, *d - i) }).collect())
            }
            SurfaceFamily::Circle { r } => {
                if !(*r > 0.0) {
                    return domain("circle radius must be positive");
                }
                (2, Vec::new())
            }
            SurfaceFamily::Custom { d, terms } => {
                if *d < 2 {
                    return domain("custom surfaces need d >= 2");
                }
                if terms.iter().any(|t| t.powers.len() != d - 1 || !t.coef.is_finite()) {
                    return domain(format!("custom monomials need {} finite exponents", d - 1));
                }
                (*d, terms.clone())
            }
        };
        Ok(Self { family, d, terms })
    }

    /// The flat graph `F ≡ 0`.
    pub fn flat(d: usize) -> Result<Self> {
        Self::new(SurfaceFamily::Custom { d, terms: Vec::new() })
    }

    pub fn is_circle(&self) -> bool {
        matches!(self.family, SurfaceFamily::Circle { .. })
    }

    /// Parameter dimension.
    pub fn params(&self) -> usize {
        self.d - 1
    }

    pub fn height(&self, u: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coef * t.powers.iter().zip(u).map(|(&k, &x)| x.powi(k as i32)).product::<f64>())
            .sum()
    }

    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; u.len()];
        for t in &self.terms {
            for (k, gk) in g.iter_mut().enumerate() {
                let pk = t.powers[k];
                if pk == 0 {
                    continue;
                }
                let mut v = t.coef * pk as f64 * u[k].powi(pk as i32 - 1);
                for (i, (&pi, &x)) in t.powers.iter().zip(u).enumerate() {
                    if i != k {
                        v *= x.powi(pi as i32);
                    }
                }
                *gk += v;
            }
        }
        g
    }

    /// Point on the surface and its density against `du`. Circle parameter is
    /// the angle in turns.
    pub fn embed(&self, u: &[f64]) -> (Vec<f64>, f64) {
        match self.family {
            SurfaceFamily::Circle { r } => {
                let (s, c) = sincos_turns(u[0]);
                (vec![r * c, r * s], std::f64::consts::TAU * r)
            }
            _ => {
                let mut y = u.to_vec();
                y.push(self.height(u));
                let g2: f64 = self.gradient(u).iter().map(|g| g * g).sum();
                (y, (1.0 + g2).sqrt())
            }
        }
    }

    pub fn weight(&self, u: &[f64]) -> f64 {
        self.embed(u).1
    }

    /// `sup |∂_k F|` over `[0,1]^{d−1}`, bounded termwise.
    pub fn gradient_bound(&self) -> Vec<f64> {
        let mut b = vec![0.0; self.params()];
        for t in &self.terms {
            for (k, bk) in b.iter_mut().enumerate() {
                *bk += t.coef.abs() * t.powers[k] as f64;
            }
        }
        b
    }

    /// `Σ |c| N^{−Σ_k k·p_k}`, an upper bound for `|F|` on
    /// `[0,1/N] × … × [0,1/N^{d−1}]`.
    pub fn q_box_height_bound(&self, n: u64) -> f64 {
        let nf = n as f64;
        self.terms
            .iter()
            .map(|t| {
                let w: u32 = t.powers.iter().enumerate().map(|(k, &p)| (k as u32 + 1) * p).sum();
                t.coef.abs() * nf.powi(-(w as i32))
            })
            .sum()
    }

    /// Whether `F` maps `[0,1/N] × … × [0,1/N^{d−1}]` into `[−N^{−d}, N^{−d}]`.
    pub fn fits_q_box(&self, n: u64) -> Result<bool> {
        if self.is_circle() {
            return domain("the circle is not a graph");
        }
        if n == 0 {
            return domain("N must be positive");
        }
        Ok(self.q_box_height_bound(n) <= (n as f64).powi(-(self.d as i32)) * (1.0 + 1e-12))
    }
}

/// `K(ξ) = (1 + |ξ|)^{−β}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayKernel {
    pub beta: f64,
}

impl DecayKernel {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return domain("beta must be finite and nonnegative");
        }
        Ok(Self { beta })
    }

    pub fn eval(&self, xi: &[i128]) -> f64 {
        if self.beta == 0.0 {
            return 1.0;
        }
        let r = xi.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>().sqrt();
        (1.0 + r).powf(-self.beta)
    }
}

fn norm2(xi: &[i64]) -> f64 {
    xi.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>().sqrt()
}

/// Panels per parameter axis needed to resolve `e(−ξ·y)`: two per
/// oscillation plus two.
pub fn required_panels(surface: &GraphSurface, xi: &[i64]) -> Result<Vec<usize>> {
    if xi.len() != surface.d {
        return domain(format!("xi has {} components, surface lives in R^{}", xi.len(), surface.d));
    }
    match surface.family {
        SurfaceFamily::Circle { r } => Ok(vec![2 * (1 + (4.0 * r * norm2(xi)).ceil() as usize)]),
        _ => {
            let g = surface.gradient_bound();
            let normal = xi[surface.d - 1].unsigned_abs() as f64;
            Ok((0..surface.params())
                .map(|k| {
                    let osc = xi[k].unsigned_abs() as f64 + normal * g[k];
                    2 * (1 + osc.ceil() as usize)
                })
                .collect())
        }
    }
}

fn surface_rules(surface: &GraphSurface, panels: &[usize]) -> Vec<AxisRule> {
    if surface.is_circle() {
        vec![AxisRule::periodic(0.0, 1.0, panels[0] * SURFACE_PANEL_ORDER).expect("unit period")]
    } else {
        panels.iter().map(|&p| AxisRule::gauss(0.0, 1.0, p, SURFACE_PANEL_ORDER)).collect()
    }
}

/// Tensor quadrature of `∫ g(y(u)) dσ` with the given rules.
fn integrate_surface<G>(surface: &GraphSurface, rules: &[AxisRule], g: G) -> Complex64
where
    G: Fn(&[f64]) -> Complex64 + Sync,
{
    let sizes: Vec<usize> = rules.iter().map(|r| r.len_nodes()).collect();
    let total: usize = sizes.iter().product();
    let chunk = 4096;
    let parts: Vec<Complex64> = (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut acc = NeumaierComplex::new();
            let mut u = vec![0.0; rules.len()];
            for mut idx in c * chunk..((c + 1) * chunk).min(total) {
                let mut w = 1.0;
                for k in (0..rules.len()).rev() {
                    let i = idx % sizes[k];
                    idx /= sizes[k];
                    u[k] = rules[k].nodes[i];
                    w *= rules[k].weights[i];
                }
                let (y, dens) = surface.embed(&u);
                acc.add(g(&y) * (w * dens));
            }
            acc.value()
        })
        .collect();
    pairwise_sum_complex(&parts)
}

fn check_panels(surface: &GraphSurface, xi: &[i64], panels: &[usize]) -> Result<()> {
    let need = required_panels(surface, xi)?;
    if panels.len() != need.len() || panels.iter().zip(&need).any(|(g, r)| g < r) {
        return Err(Error::Resolution {
            what: format!("surface coefficient at xi = {xi:?}"),
            required: need.iter().map(|&v| v as u64).collect(),
            given: panels.iter().map(|&v| v as u64).collect(),
        });
    }
    Ok(())
}

fn phase_at(xi: &[i64], y: &[f64]) -> Complex64 {
    let t: f64 = xi.iter().zip(y).map(|(&k, &v)| frac(k as f64 * v)).sum();
    e(-frac(t))
}

/// `σ̂(ξ)` with explicit panel counts per parameter axis.
pub fn surface_fourier_coefficient(surface: &GraphSurface, xi: &[i64], panels: &[usize]) -> Result<Complex64> {
    check_panels(surface, xi, panels)?;
    Ok(integrate_surface(surface, &surface_rules(surface, panels), |y| phase_at(xi, y)))
}

/// `σ̂(ξ)` at the required resolution, with the change under panel doubling
/// as the error estimate.
pub fn surface_fourier_estimate(surface: &GraphSurface, xi: &[i64]) -> Result<(Complex64, f64)> {
    let need = required_panels(surface, xi)?;
    let coarse = surface_fourier_coefficient(surface, xi, &need)?;
    let doubled: Vec<usize> = need.iter().map(|p| 2 * p).collect();
    let fine = surface_fourier_coefficient(surface, xi, &doubled)?;
    Ok((fine, (fine - coarse).norm()))
}

/// Total mass `σ̂(0)`.
pub fn surface_mass(surface: &GraphSurface) -> Result<f64> {
    Ok(surface_fourier_estimate(surface, &vec![0; surface.d])?.0.re)
}

/// `2πr J₀(2πr|ξ|)`, the Fourier coefficient of arclength on the radius-`r` circle.
pub fn bessel_oracle(r: f64, xi: &[f64]) -> Result<f64> {
    if !(r > 0.0) {
        return domain("radius must be positive");
    }
    let rho = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(std::f64::consts::TAU * r * j0_turns(r * rho))
}

/// Least-squares `C₀` in `σ̂(ξ) ≈ C₀ |ξ|^{−1/2} cos(2π(r|ξ| − 1/8))`, fitted on
/// `|ξ| ∈ [10⁵, 10⁵ + 1)`.
pub fn herz_amplitude(r: f64) -> Result<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..64 {
        let rho = 1e5 + i as f64 / 64.0;
        let y = bessel_oracle(r, &[rho])? * rho.sqrt();
        let g = sincos_turns(r * rho - 0.125).1;
        num += y * g;
        den += g * g;
    }
    Ok(num / den)
}

/// `|σ̂(ξ) − C₀|ξ|^{−1/2} cos(2π(r|ξ| − 1/8))| · |ξ|^{3/2}` on the circle of
/// radius `r`, with `σ̂` from quadrature.
pub fn herz_residual(r: f64, xi: &[i64]) -> Result<f64> {
    let rho = norm2(xi);
    if rho < 5.0 {
        return domain(format!("|xi| = {rho} is below 5"));
    }
    let surface = GraphSurface::new(SurfaceFamily::Circle { r })?;
    let (s, _) = surface_fourier_estimate(&surface, xi)?;
    let c0 = herz_amplitude(r)?;
    let main = c0 / rho.sqrt() * sincos_turns(r * rho - 0.125).1;
    Ok((s - Complex64::new(main, 0.0)).norm() * rho.powf(1.5))
}

/// Slope of `log|σ̂|` against `log|ξ|` over `ξ = R·dir`, taking the largest
/// `|σ̂|` over directions at each radius `R`.
pub fn decay_fit(surface: &GraphSurface, directions: &[Vec<i64>], radii: &[u64]) -> Result<FitResult> {
    if directions.len() < 3 {
        return domain("decay fits need at least 3 directions");
    }
    if radii.len() < 4 {
        return domain("decay fits need at least 4 radii");
    }
    if directions.iter().any(|d| d.len() != surface.d || d.iter().all(|&v| v == 0)) {
        return domain("directions must be nonzero vectors in the ambient dimension");
    }
    let mut xs = Vec::with_capacity(radii.len());
    let mut ys = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut best = 0.0f64;
        for dir in directions {
            let xi: Vec<i64> = dir.iter().map(|&v| v * r as i64).collect();
            best = best.max(surface_fourier_estimate(surface, &xi)?.0.norm());
        }
        xs.push(r as f64);
        ys.push(best);
    }
    if ys.iter().all(|&y| y < 1e-14) {
        return Err(Error::DegenerateFit("every coefficient is below 1e-14".into()));
    }
    FitResult::log_log(&xs, &ys)
}

/// `(ξ, σ̂(ξ))` rows for CSV export.
pub fn coefficient_table(surface: &GraphSurface, xis: &[Vec<i64>]) -> Result<Vec<(Vec<f64>, Complex64)>> {
    xis.iter()
        .map(|xi| Ok((xi.iter().map(|&v| v as f64).collect(), surface_fourier_estimate(surface, xi)?.0)))
        .collect()
}
