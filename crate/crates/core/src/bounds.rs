//! Two-sided estimates for ellipsoids in terms of their semi-axes.
//!
//! The circumscribed box `P` with sides `2a_j` contains `E`, and `P/√n` is
//! inscribed in `E`: its corners `(±a_j/√n)` satisfy `Σ (a_j/√n)²/a_j² = 1`.
//! Since `M_i` is monotone under inclusion of convex bodies, the box formula gives
//!
//! `ω_i s_{n-1-i}(2a) / (binom(n-1,i) (√n)^{n-1-i}) <= M_i(E) <= ω_i s_{n-1-i}(2a) / binom(n-1,i)`.
//!
//! Feeding these term by term into the Steiner polynomial bounds the area and
//! volume of outer parallel bodies by the tube polynomial
//! `f(ρ) = Σ_{j<=n-2} ρ^j s_{n-1-j}(2a)`.

use crate::constants::{binomial, gamma_half, omega};
use crate::error::{GeometryError, Result};
use crate::geometry::{Cuboid, Ellipsoid};
use crate::measures::{box_mean_curvatures, MeanCurvatures};
use crate::symmetric::sym_elem_all;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundQuantity {
    MeanCurvature { index: usize },
    TubeArea { rho: f64 },
    TubeVolume { rho: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    /// Lower multiplier `c`.
    pub c: f64,
    /// Upper multiplier `C`.
    #[serde(rename = "C")]
    pub big_c: f64,
    /// `C / c`.
    pub ratio_bound: f64,
    /// For tube bounds: `(√n)^{n-1} Γ((n+1)/2) / (2π^{(n+1)/2})`, reported for
    /// comparison only (it is below 1 for `n <= 5`, so it cannot serve as
    /// `C/c`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_factor: Option<f64>,
    /// The upper bound is proved only for `ρ` up to this radius.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper_valid_up_to: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundInterval {
    pub quantity: BoundQuantity,
    pub lower: f64,
    pub upper: f64,
    pub constants_used: BoundConstants,
}

impl BoundInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Push an interval outward by a few ulps so rounding never shrinks it.
fn widen(lower: f64, upper: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (lower, upper);
    for _ in 0..4 {
        lo = lo.next_down();
        hi = hi.next_up();
    }
    (lo, hi)
}

fn check_index(e: &Ellipsoid, i: usize) -> Result<()> {
    if i >= e.dim() {
        return Err(GeometryError::domain(format!(
            "index i = {i} must satisfy 0 <= i <= n-1 = {}",
            e.dim() - 1
        )));
    }
    Ok(())
}

fn check_rho(rho: f64, allow_zero: bool) -> Result<()> {
    let ok = rho.is_finite() && (rho > 0.0 || (allow_zero && rho == 0.0));
    if !ok {
        let need = if allow_zero { "rho >= 0" } else { "rho > 0" };
        return Err(GeometryError::domain(format!("{need} required, got {rho}")));
    }
    Ok(())
}

/// `(√n)^{n-1-i}`, the ratio between the pinch bounds.
pub fn pinch_ratio(n: usize, i: usize) -> f64 {
    (n as f64).sqrt().powi((n - 1 - i) as i32)
}

/// `M_i(P/√n) <= M_i(E) <= M_i(P)` with `P` the circumscribed box.
pub fn pinch_bounds(e: &Ellipsoid, i: usize) -> Result<BoundInterval> {
    check_index(e, i)?;
    let n = e.dim();
    let upper = box_mean_curvatures(&Cuboid::circumscribing(e)).values[i];
    let ratio = pinch_ratio(n, i);
    let (lower, upper) = widen(upper / ratio, upper);
    let big_c = omega(i) * 2f64.powi((n - 1 - i) as i32) / binomial(n - 1, i);
    Ok(BoundInterval {
        quantity: BoundQuantity::MeanCurvature { index: i },
        lower,
        upper,
        constants_used: BoundConstants {
            c: big_c / ratio,
            big_c,
            ratio_bound: ratio,
            gamma_factor: None,
            upper_valid_up_to: None,
        },
    })
}

/// Pinch bounds for every index.
pub fn pinch_bounds_all(e: &Ellipsoid) -> Vec<BoundInterval> {
    (0..e.dim())
        .map(|i| pinch_bounds(e, i).expect("index in range"))
        .collect()
}

/// Area of `∂(K + ρB)`: `Σ_k binom(n-1,k) M_k ρ^k`.
pub fn parallel_area(m: &MeanCurvatures, rho: f64) -> Result<f64> {
    check_rho(rho, true)?;
    let n = m.dim;
    Ok((0..n)
        .rev()
        .fold(0.0, |acc, k| acc * rho + binomial(n - 1, k) * m.values[k]))
}

/// `vol(K + ρB) = vol K + Σ_k binom(n-1,k) M_k ρ^{k+1}/(k+1)`.
pub fn parallel_volume(vol0: f64, m: &MeanCurvatures, rho: f64) -> Result<f64> {
    check_rho(rho, true)?;
    let n = m.dim;
    let poly = (0..n).rev().fold(0.0, |acc, k| {
        acc * rho + binomial(n - 1, k) * m.values[k] / (k + 1) as f64
    });
    Ok(vol0 + rho * poly)
}

/// `∏(ρ + 2a_i)` and the tube polynomial `f` it determines through
/// `ρ f(ρ) + ρ^n + ∏ 2a_i = ∏(ρ + 2a_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubePolynomial {
    pub dim: usize,
    /// Coefficients of `∏(ρ + 2a_i)` in increasing powers of `ρ`.
    pub coefficients: Vec<f64>,
}

pub fn tube_polynomial(e: &Ellipsoid) -> TubePolynomial {
    let n = e.dim();
    let doubled: Vec<f64> = e.semi_axes().iter().map(|a| 2.0 * a).collect();
    let s = sym_elem_all(&doubled);
    TubePolynomial {
        dim: n,
        coefficients: (0..=n).map(|j| s[n - j]).collect(),
    }
}

impl TubePolynomial {
    /// Coefficients of `f` itself, increasing powers: `s_{n-1-j}(2a)`.
    pub fn f_coefficients(&self) -> &[f64] {
        &self.coefficients[1..self.dim]
    }

    pub fn eval(&self, rho: f64) -> f64 {
        self.f_coefficients().iter().rev().fold(0.0, |acc, c| acc * rho + c)
    }

    /// `∫_0^ρ f`.
    pub fn integral(&self, rho: f64) -> f64 {
        let poly = self
            .f_coefficients()
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (j, c)| acc * rho + c / (j + 1) as f64);
        rho * poly
    }
}

/// Multipliers `(c_n, C_n)` with `c_n f(ρ) <= area(∂E_ρ) <= C_n f(ρ)`.
///
/// Terms `k <= n-2` of the Steiner polynomial are pinched by `ω_k` and
/// `ω_k/(√n)^{n-1-k}` against the matching term of `f`. The top term
/// `ω_{n-1} ρ^{n-1}` has no partner in `f`; it is dropped from the lower
/// bound and, for `ρ <= s_1(a)`, absorbed into the upper bound through
/// `ρ^{n-1} <= ρ^{n-2} s_1(2a)/2`.
pub fn tube_constants(n: usize) -> (f64, f64) {
    let lower = (0..=n - 2)
        .map(|k| omega(k) / pinch_ratio(n, k))
        .fold(f64::INFINITY, f64::min);
    let upper = (0..=n - 2).map(omega).fold(0.0, f64::max) + 0.5 * omega(n - 1);
    (lower, upper)
}

/// `(√n)^{n-1} Γ((n+1)/2) / (2π^{(n+1)/2})`.
pub fn gamma_tube_ratio(n: usize) -> f64 {
    pinch_ratio(n, 0) * gamma_half(n as u32 + 1) / (2.0 * PI.powf((n + 1) as f64 / 2.0))
}

fn tube_bound_constants(e: &Ellipsoid) -> BoundConstants {
    let n = e.dim();
    let (c, big_c) = tube_constants(n);
    BoundConstants {
        c,
        big_c,
        ratio_bound: big_c / c,
        gamma_factor: Some(gamma_tube_ratio(n)),
        upper_valid_up_to: Some(e.semi_axes().iter().sum()),
    }
}

fn check_tube_dim(e: &Ellipsoid) -> Result<()> {
    if e.dim() < 2 {
        return Err(GeometryError::domain("tube bounds need dim >= 2"));
    }
    Ok(())
}

/// `[c_n f(ρ), C_n f(ρ)]` for the area of the outer parallel surface. The
/// upper end is guaranteed for `ρ <= s_1(a)`.
pub fn tube_area_bounds(e: &Ellipsoid, rho: f64) -> Result<BoundInterval> {
    check_rho(rho, false)?;
    check_tube_dim(e)?;
    let constants = tube_bound_constants(e);
    let f = tube_polynomial(e).eval(rho);
    let (lower, upper) = widen(constants.c * f, constants.big_c * f);
    Ok(BoundInterval {
        quantity: BoundQuantity::TubeArea { rho },
        lower,
        upper,
        constants_used: constants,
    })
}

/// `vol E + [c_n, C_n]·∫_0^ρ f` for the volume of the outer parallel body.
pub fn tube_volume_bounds(e: &Ellipsoid, rho: f64) -> Result<BoundInterval> {
    check_rho(rho, false)?;
    check_tube_dim(e)?;
    let constants = tube_bound_constants(e);
    let integral = tube_polynomial(e).integral(rho);
    let vol = e.volume();
    let (lower, upper) = widen(vol + constants.c * integral, vol + constants.big_c * integral);
    Ok(BoundInterval {
        quantity: BoundQuantity::TubeVolume { rho },
        lower,
        upper,
        constants_used: constants,
    })
}

/// Smallest `ρ` at which the true parallel area (from `m`) exceeds
/// `C_n f(ρ)`. It always exists: the area has degree `n-1` in `ρ`, `f`
/// only `n-2`.
pub fn tube_breakdown_radius(e: &Ellipsoid, m: &MeanCurvatures) -> Result<f64> {
    check_tube_dim(e)?;
    if m.dim != e.dim() {
        return Err(GeometryError::domain("mean curvature vector has the wrong dimension"));
    }
    let (_, big_c) = tube_constants(e.dim());
    let tube = tube_polynomial(e);
    let slack = |rho: f64| -> Result<f64> { Ok(big_c * tube.eval(rho) - parallel_area(m, rho)?) };
    let mut lo = 0.0;
    let mut hi = e.semi_axes().iter().sum::<f64>();
    if slack(lo)? < 0.0 {
        return Ok(0.0);
    }
    while slack(hi)? >= 0.0 {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(GeometryError::Numerical("tube breakdown search diverged".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slack(mid)? >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}
