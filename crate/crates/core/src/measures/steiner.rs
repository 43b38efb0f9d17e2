//! Monte Carlo fit of the Steiner polynomial.
//!
//! `vol(K + ρB) = vol(K) + Σ_{k<n} binom(n-1,k)/(k+1) · M_k · ρ^{k+1}`, so
//! estimating the parallel-body volume at `n + 1` radii and solving the
//! Vandermonde system recovers every `M_k`. One shared sample set is used:
//! a point counts for every radius at least its distance to `K`, which makes
//! the estimates nested and their covariance multinomial.

use super::{MeanCurvatures, Method};
use crate::constants::{binomial, kappa};
use crate::error::{GeometryError, Result};
use crate::geometry::{Cuboid, Ellipsoid};
use crate::rng::map_batches;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub const MIN_STEINER_SAMPLES: usize = 100_000;
const MAX_CONDITION: f64 = 1e8;
/// Entries whose standard error exceeds this fraction of the value are
/// flagged as wide.
const WIDE_FRACTION: f64 = 0.1;

/// What the Steiner fit needs to know about a convex body.
pub trait ConvexBodyProbe: Sync {
    fn dim(&self) -> usize;
    /// Euclidean distance from `x` to the body; zero inside.
    fn distance(&self, x: &[f64]) -> f64;
    fn contains(&self, x: &[f64]) -> bool {
        self.distance(x) == 0.0
    }
    /// Center of a ball of radius [`bounding_radius`](Self::bounding_radius)
    /// that contains the body.
    fn center(&self) -> Vec<f64>;
    fn bounding_radius(&self) -> f64;
    fn volume_hint(&self) -> Option<f64> {
        None
    }
}

impl ConvexBodyProbe for Ellipsoid {
    fn dim(&self) -> usize {
        Ellipsoid::dim(self)
    }

    fn distance(&self, x: &[f64]) -> f64 {
        ellipsoid_distance(self, x)
    }

    fn contains(&self, x: &[f64]) -> bool {
        Ellipsoid::contains(self, x)
    }

    fn center(&self) -> Vec<f64> {
        Ellipsoid::center(self).iter().copied().collect()
    }

    fn bounding_radius(&self) -> f64 {
        self.semi_axes()[0]
    }

    fn volume_hint(&self) -> Option<f64> {
        Some(self.volume())
    }
}

impl ConvexBodyProbe for Cuboid {
    fn dim(&self) -> usize {
        Cuboid::dim(self)
    }

    fn distance(&self, x: &[f64]) -> f64 {
        Cuboid::distance(self, x)
    }

    fn center(&self) -> Vec<f64> {
        Cuboid::center(self).to_vec()
    }

    fn bounding_radius(&self) -> f64 {
        0.5 * self.side_lengths().iter().map(|l| l * l).sum::<f64>().sqrt()
    }

    fn volume_hint(&self) -> Option<f64> {
        Some(self.volume())
    }
}

/// Distance from `x` to the solid ellipsoid.
///
/// Outside, the nearest point is `p_k = a_k² z_k/(a_k² + t)` in principal
/// coordinates, where `t > 0` is the root of
/// `Σ (a_k z_k/(a_k² + t))² = 1`. The left side is convex and decreasing in
/// `t`, so Newton started below the root climbs to it monotonically.
pub fn ellipsoid_distance(e: &Ellipsoid, x: &[f64]) -> f64 {
    let z = e.to_principal(x);
    let a = e.semi_axes();
    if z.iter().zip(a).map(|(z, a)| (z / a).powi(2)).sum::<f64>() <= 1.0 {
        return 0.0;
    }
    let g = |t: f64| -> (f64, f64) {
        let mut value = -1.0;
        let mut slope = 0.0;
        for (zk, ak) in z.iter().zip(a) {
            let q = ak * zk / (ak * ak + t);
            value += q * q;
            slope -= 2.0 * q * q / (ak * ak + t);
        }
        (value, slope)
    };
    let mut lo = z
        .iter()
        .zip(a)
        .map(|(zk, ak)| ak * zk.abs() - ak * ak)
        .fold(0.0, f64::max);
    let mut hi = z.norm() * a[0];
    let mut t = lo;
    for _ in 0..200 {
        let (value, slope) = g(t);
        if value > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let mut next = t - value / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 1e-15 * next.max(f64::MIN_POSITIVE) || hi - lo <= 1e-15 * hi {
            t = next;
            break;
        }
        t = next;
    }
    z.iter()
        .zip(a)
        .map(|(zk, ak)| (zk * t / (ak * ak + t)).powi(2))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteinerFit {
    pub dim: usize,
    pub samples: usize,
    pub seed: u64,
    /// `ρ_0 = 0 < ρ_1 < … < ρ_n = ρ_max`
    pub radii: Vec<f64>,
    pub parallel_volumes: Vec<f64>,
    pub volume: f64,
    pub volume_error: f64,
    pub mean_curvatures: MeanCurvatures,
    /// Per-entry flag: the standard error exceeds a tenth of the value.
    pub wide: Vec<bool>,
    pub condition_number: f64,
}

/// `M_0 ..= M_{n-1}` by the Steiner fit with default radii.
pub fn steiner_fit_mean_curvatures<P: ConvexBodyProbe + ?Sized>(
    body: &P,
    samples: usize,
    seed: u64,
) -> Result<MeanCurvatures> {
    Ok(steiner_fit(body, samples, seed, None)?.mean_curvatures)
}

/// Fit the Steiner polynomial from `samples` uniform points.
///
/// `rho_max` defaults to the bounding radius. The error estimates are one
/// standard error.
pub fn steiner_fit<P: ConvexBodyProbe + ?Sized>(
    body: &P,
    samples: usize,
    seed: u64,
    rho_max: Option<f64>,
) -> Result<SteinerFit> {
    let n = body.dim();
    if n < 2 {
        return Err(GeometryError::domain(format!("Steiner fit needs dim >= 2, got {n}")));
    }
    if samples < MIN_STEINER_SAMPLES {
        return Err(GeometryError::domain(format!(
            "Steiner fit needs at least {MIN_STEINER_SAMPLES} samples, got {samples}"
        )));
    }
    let rho_max = rho_max.unwrap_or_else(|| body.bounding_radius());
    if !(rho_max.is_finite() && rho_max > 0.0) {
        return Err(GeometryError::domain(format!(
            "rho_max must be positive, got {rho_max}"
        )));
    }
    let radii: Vec<f64> = (0..=n).map(|j| j as f64 * rho_max / n as f64).collect();
    let center = body.center();
    let outer = body.bounding_radius() + rho_max;
    let ball_volume = kappa(n) * outer.powi(n as i32);

    let per_batch = map_batches(seed, samples, |rng, len| {
        let mut counts = vec![0u64; n + 1];
        let mut x = vec![0.0; n];
        for _ in 0..len {
            let mut norm = 0.0f64;
            for v in x.iter_mut() {
                *v = rng.sample::<f64, _>(StandardNormal);
                norm += *v * *v;
            }
            let r = outer * rng.random::<f64>().powf(1.0 / n as f64) / norm.sqrt();
            for (v, c) in x.iter_mut().zip(&center) {
                *v = c + *v * r;
            }
            let d = if body.contains(&x) { 0.0 } else { body.distance(&x) };
            // radii are increasing: first index whose radius reaches d
            if let Some(j) = radii.iter().position(|rho| d <= *rho) {
                counts[j] += 1;
            }
        }
        counts
    });
    let mut cumulative = vec![0u64; n + 1];
    for counts in per_batch {
        for (c, v) in cumulative.iter_mut().zip(counts) {
            *c += v;
        }
    }
    for j in 1..=n {
        cumulative[j] += cumulative[j - 1];
    }
    let total = samples as f64;
    let p: Vec<f64> = cumulative.iter().map(|c| *c as f64 / total).collect();
    let parallel_volumes: Vec<f64> = p.iter().map(|p| p * ball_volume).collect();
    let cov = DMatrix::from_fn(n + 1, n + 1, |j, l| {
        ball_volume * ball_volume * (p[j.min(l)] - p[j] * p[l]) / total
    });

    // unknowns: V and y_k = binom(n-1,k)/(k+1) · ρ_max^{k+1} · M_k, in t = ρ/ρ_max
    let vander = DMatrix::from_fn(n + 1, n + 1, |j, k| (j as f64 / n as f64).powi(k as i32));
    let sv = vander.clone().singular_values();
    let condition_number = sv.max() / sv.min();
    if !(condition_number <= MAX_CONDITION) {
        return Err(GeometryError::Numerical(format!(
            "Steiner system condition number {condition_number:.3e} exceeds {MAX_CONDITION:e}"
        )));
    }
    let inverse = vander
        .try_inverse()
        .ok_or_else(|| GeometryError::Numerical("Steiner system is singular".into()))?;
    let coeffs = &inverse * DVector::from_vec(parallel_volumes.clone());
    let coeff_cov = &inverse * cov * inverse.transpose();

    let unit = |k: usize| binomial(n - 1, k) / (k + 1) as f64 * rho_max.powi(k as i32 + 1);
    let values: Vec<f64> = (0..n).map(|k| coeffs[k + 1] / unit(k)).collect();
    let errors: Vec<f64> = (0..n)
        .map(|k| coeff_cov[(k + 1, k + 1)].max(0.0).sqrt() / unit(k))
        .collect();
    let wide: Vec<bool> = values
        .iter()
        .zip(&errors)
        .map(|(v, e)| *e > WIDE_FRACTION * v.abs())
        .collect();
    for (k, flagged) in wide.iter().enumerate() {
        if *flagged {
            log::warn!(
                "Steiner fit: M_{k} = {:.4e} has standard error {:.2e}; increase samples",
                values[k],
                errors[k]
            );
        }
    }
    Ok(SteinerFit {
        dim: n,
        samples,
        seed,
        radii,
        parallel_volumes,
        volume: coeffs[0],
        volume_error: coeff_cov[(0, 0)].max(0.0).sqrt(),
        mean_curvatures: MeanCurvatures {
            dim: n,
            values,
            method: Method::SteinerMonteCarlo,
            error_estimate: Some(errors),
        },
        wide,
        condition_number,
    })
}
