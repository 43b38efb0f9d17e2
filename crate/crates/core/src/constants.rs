//! Unit-ball volumes `κ_k` and unit-sphere areas `ω_k`.
//!
//! `ω_k` is the area of the unit sphere in `k + 1` dimensions, so `ω_0 = 2`,
//! `ω_1 = 2π`, `ω_2 = 4π`. Every other module uses this convention.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `Γ(m/2)` for a positive integer `m`, by the exact half-integer recurrence
/// from `Γ(1) = 1` and `Γ(1/2) = √π`.
pub fn gamma_half(m: u32) -> f64 {
    assert!(m > 0, "gamma_half needs a positive argument");
    let (mut x, mut value) = if m % 2 == 0 { (2u32, 1.0) } else { (1u32, PI.sqrt()) };
    while x < m {
        value *= x as f64 / 2.0;
        x += 2;
    }
    value
}

/// Volume of the unit ball in `k` dimensions (`κ_0 = 1`).
pub fn kappa(k: usize) -> f64 {
    // κ_k = 2π/k · κ_{k-2}
    let mut value = if k % 2 == 0 { 1.0 } else { 2.0 };
    let mut j = if k % 2 == 0 { 2 } else { 3 };
    while j <= k {
        value *= 2.0 * PI / j as f64;
        j += 2;
    }
    value
}

/// Area of the unit sphere in `k + 1` dimensions.
pub fn omega(k: usize) -> f64 {
    (k + 1) as f64 * kappa(k + 1)
}

/// Binomial coefficient as a float; exact for the small arguments used here.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// The constants a dimension-`n` computation needs, tabulated once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionalConstants {
    pub dim: usize,
    /// `κ_1 ..= κ_n`
    pub kappa: Vec<f64>,
    /// `ω_0 ..= ω_{n-1}`
    pub omega: Vec<f64>,
}

impl DimensionalConstants {
    pub fn new(dim: usize) -> Self {
        DimensionalConstants {
            dim,
            kappa: (1..=dim).map(kappa).collect(),
            omega: (0..dim).map(omega).collect(),
        }
    }

    /// `κ_k` for `1 <= k <= dim`.
    pub fn kappa(&self, k: usize) -> f64 {
        self.kappa[k - 1]
    }

    pub fn omega(&self, k: usize) -> f64 {
        self.omega[k]
    }
}
