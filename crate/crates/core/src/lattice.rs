//! Integer points in ellipsoids.
//!
//! Counting is a Fincke–Pohst enumeration: with `Q = RᵀR` the form reads
//! `Σ_i d_i (y_i + Σ_{j>i} μ_ij y_j)²`, `y = x - c`, so once the trailing
//! coordinates are fixed the admissible range of the next one is an explicit
//! interval. Empty slabs are never visited, whatever the frame. Points whose
//! form value lies within a rounding band of 1 are decided again from the
//! principal coordinates, in double-double arithmetic when needed.

use crate::bounds::{parallel_volume, tube_polynomial};
use crate::error::{GeometryError, Result};
use crate::geometry::Ellipsoid;
use crate::measures::ellipsoid_mean_curvatures_quadrature;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Refuse bounding boxes holding more integer points than this.
pub const MAX_CANDIDATES: f64 = 1e9;
const BOUNDARY_BAND: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeReport {
    pub count: u64,
    pub volume: f64,
    pub discrepancy: f64,
    /// `f(√n)`
    pub tube_value: f64,
    /// `∫_0^{√n} f`
    pub tube_integral: f64,
    /// `Δ / f(√n)`
    pub ratio: f64,
    /// `f(√n/2)`
    pub tube_value_half: f64,
    /// `Δ / f(√n/2)`
    pub ratio_half: f64,
}

/// Number of candidate points in the axis-aligned bounding box.
pub fn candidate_estimate(e: &Ellipsoid) -> f64 {
    e.bounding_half_widths()
        .iter()
        .zip(e.center().iter())
        .map(|(h, c)| ((c + h).floor() - (c - h).ceil() + 1.0).max(0.0))
        .product()
}

struct Enumerator<'a> {
    n: usize,
    e: &'a Ellipsoid,
    center: Vec<f64>,
    d: Vec<f64>,
    /// `μ_ij` for `j > i`, row-major
    mu: Vec<f64>,
    /// form values within this of 1 are decided from principal coordinates
    band: f64,
}

impl<'a> Enumerator<'a> {
    fn new(e: &'a Ellipsoid) -> Result<Self> {
        let n = e.dim();
        let q = e.quadratic_form();
        let chol = q
            .clone()
            .cholesky()
            .ok_or_else(|| GeometryError::Numerical("quadratic form is not numerically positive definite".into()))?;
        let r: DMatrix<f64> = chol.l().transpose();
        let mut d = vec![0.0; n];
        let mut mu = vec![0.0; n * n];
        for i in 0..n {
            d[i] = r[(i, i)] * r[(i, i)];
            for j in i + 1..n {
                mu[i * n + j] = r[(i, j)] / r[(i, i)];
            }
        }
        let axes = e.semi_axes();
        let cond = (axes[0] / axes[n - 1]).powi(2);
        Ok(Enumerator {
            n,
            e,
            center: e.center().iter().copied().collect(),
            d,
            mu,
            band: BOUNDARY_BAND + 64.0 * n as f64 * f64::EPSILON * cond,
        })
    }

    /// Integer range for coordinate `i` given the partial form `partial` and
    /// the trailing offsets `y`.
    fn range(&self, i: usize, partial: f64, y: &[f64]) -> Option<(i64, i64, f64)> {
        let n = self.n;
        let shift: f64 = (i + 1..n).map(|j| self.mu[i * n + j] * y[j]).sum();
        let slack = 1.0 + self.band - partial;
        if slack < 0.0 {
            return None;
        }
        let w = (slack / self.d[i]).sqrt();
        let mid = self.center[i] - shift;
        let lo = (mid - w).ceil();
        let hi = (mid + w).floor();
        (lo <= hi).then_some((lo as i64, hi as i64, shift))
    }

    fn count_from(&self, i: usize, partial: f64, x: &mut [i64], y: &mut [f64]) -> u64 {
        let Some((lo, hi, shift)) = self.range(i, partial, y) else {
            return 0;
        };
        let mut total = 0;
        for xi in lo..=hi {
            x[i] = xi;
            y[i] = xi as f64 - self.center[i];
            let t = y[i] + shift;
            let value = partial + self.d[i] * t * t;
            if i > 0 {
                total += self.count_from(i - 1, value, x, y);
            } else if value < 1.0 - self.band {
                total += 1;
            } else if value <= 1.0 + self.band {
                total += inside_exact(self.e, x) as u64;
            }
        }
        total
    }

    fn count(&self) -> u64 {
        let n = self.n;
        let top = n - 1;
        let y0 = vec![0.0; n];
        let Some((lo, hi, _)) = self.range(top, 0.0, &y0) else {
            return 0;
        };
        (lo..=hi)
            .into_par_iter()
            .map(|xt| {
                let mut x = vec![0i64; n];
                let mut y = vec![0.0; n];
                x[top] = xt;
                y[top] = xt as f64 - self.center[top];
                let value = self.d[top] * y[top] * y[top];
                if top == 0 {
                    if value < 1.0 - self.band {
                        1
                    } else if value <= 1.0 + self.band {
                        inside_exact(self.e, &x) as u64
                    } else {
                        0
                    }
                } else {
                    self.count_from(top - 1, value, &mut x, &mut y)
                }
            })
            .sum()
    }
}

/// Double-double value `hi + lo`.
#[derive(Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd {
        hi: s,
        lo: (a - (s - bb)) + (b - bb),
    }
}

fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd {
        hi: p,
        lo: a.mul_add(b, -p),
    }
}

impl Dd {
    fn add(self, o: Dd) -> Dd {
        let s = two_sum(self.hi, o.hi);
        let lo = s.lo + self.lo + o.lo;
        two_sum(s.hi, lo)
    }

    fn mul(self, o: Dd) -> Dd {
        let p = two_prod(self.hi, o.hi);
        let lo = p.lo + self.hi * o.lo + self.lo * o.hi;
        two_sum(p.hi, lo)
    }

    fn scale(self, b: f64) -> Dd {
        let p = two_prod(self.hi, b);
        two_sum(p.hi, p.lo + self.lo * b)
    }

    fn div(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let r = self.add(Dd {
            hi: -q1 * b,
            lo: -q1.mul_add(b, -(q1 * b)),
        });
        let q2 = r.hi / b;
        two_sum(q1, q2)
    }
}

/// Membership of an integer point decided from `Σ (f_k·(x-c))²/a_k²` in
/// double-double arithmetic.
fn inside_exact(e: &Ellipsoid, x: &[i64]) -> bool {
    let n = e.dim();
    let frame = e.frame();
    let y: Vec<Dd> = (0..n).map(|j| two_sum(x[j] as f64, -e.center()[j])).collect();
    let mut total = Dd { hi: 0.0, lo: 0.0 };
    for (k, a) in e.semi_axes().iter().enumerate() {
        let mut z = Dd { hi: 0.0, lo: 0.0 };
        for (j, yj) in y.iter().enumerate() {
            z = z.add(yj.scale(frame[(j, k)]));
        }
        let w = z.div(*a);
        total = total.add(w.mul(w));
    }
    total.hi + total.lo <= 1.0
}

/// `N(E)`: integer points of the solid ellipsoid.
pub fn lattice_count(e: &Ellipsoid) -> Result<u64> {
    let estimate = candidate_estimate(e);
    if estimate > MAX_CANDIDATES {
        return Err(GeometryError::Resource {
            message: format!("bounding box holds more than {MAX_CANDIDATES:e} integer points"),
            estimate,
        });
    }
    Ok(Enumerator::new(e)?.count())
}

pub fn lattice_discrepancy(e: &Ellipsoid) -> Result<LatticeReport> {
    let count = lattice_count(e)?;
    let volume = e.volume();
    let discrepancy = (count as f64 - volume).abs();
    let tube = tube_polynomial(e);
    let root_n = (e.dim() as f64).sqrt();
    let tube_value = tube.eval(root_n);
    let tube_value_half = tube.eval(0.5 * root_n);
    Ok(LatticeReport {
        count,
        volume,
        discrepancy,
        tube_value,
        tube_integral: tube.integral(root_n),
        ratio: discrepancy / tube_value,
        tube_value_half,
        ratio_half: discrepancy / tube_value_half,
    })
}

/// Upper bound on the volume of `{x : d(x, ∂E) <= ρ}`: the outer shell
/// `vol(E_ρ) - vol E` from the Steiner polynomial plus the inner shell,
/// which is at most `min(vol E, ρ·M_0)` because inner parallel surfaces are
/// no larger than `∂E`.
pub fn two_sided_tube_volume(e: &Ellipsoid, rho: f64, rel_tol: f64) -> Result<f64> {
    let m = ellipsoid_mean_curvatures_quadrature(e, rel_tol)?;
    let vol = e.volume();
    let outer = parallel_volume(vol, &m, rho)? - vol;
    let inner = vol.min(rho * m.values[0]);
    Ok((outer + inner) * (1.0 + rel_tol))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilationRow {
    pub lambda: f64,
    pub count: u64,
    pub volume: f64,
    pub discrepancy: f64,
    pub f_sqrt_n: f64,
    pub ratio: f64,
    pub f_half_sqrt_n: f64,
    pub ratio_half: f64,
}

/// `lattice_discrepancy(λE)` for each `λ`, dilating about the center.
pub fn dilation_sweep(e: &Ellipsoid, lambdas: &[f64]) -> Result<Vec<DilationRow>> {
    lambdas
        .iter()
        .map(|&lambda| {
            let r = lattice_discrepancy(&e.scaled(lambda)?)?;
            Ok(DilationRow {
                lambda,
                count: r.count,
                volume: r.volume,
                discrepancy: r.discrepancy,
                f_sqrt_n: r.tube_value,
                ratio: r.ratio,
                f_half_sqrt_n: r.tube_value_half,
                ratio_half: r.ratio_half,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearTrend {
    pub slope: f64,
    pub intercept: f64,
    pub slope_std_error: f64,
    pub dof: usize,
}

/// Ordinary least squares `y ≈ intercept + slope·x`.
pub fn linear_trend(x: &[f64], y: &[f64]) -> Result<LinearTrend> {
    let m = x.len();
    if m != y.len() || m < 3 {
        return Err(GeometryError::domain("trend fit needs at least 3 paired samples"));
    }
    let mf = m as f64;
    let mx = x.iter().sum::<f64>() / mf;
    let my = y.iter().sum::<f64>() / mf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(GeometryError::degenerate("trend fit needs distinct x values"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    Ok(LinearTrend {
        slope,
        intercept,
        slope_std_error: (rss / (mf - 2.0) / sxx).sqrt(),
        dof: m - 2,
    })
}
