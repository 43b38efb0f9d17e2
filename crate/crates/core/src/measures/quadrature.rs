//! Deterministic quadrature of `M_i` for ellipsoids.
//!
//! Two schemes share nothing but the symmetric-function helper, so they can
//! be checked against each other.
//!
//! * [`QuadratureScheme::GaussMap`] parameterizes `∂E` by its outer unit
//!   normal `u`. There `m_i dA = s_{n-1-i}(R)/binom(n-1,i) dS(u)` with `R` the
//!   principal radii of curvature, which for `E` are the eigenvalues of the
//!   compression of `diag(a²)` onto `w^⊥`, `w ∝ diag(a)·u`, divided by the
//!   support function `h(u) = |diag(a)·u|`. Writing `h^{-2m}` as a Laplace
//!   integral and integrating the Gaussian extension over `R^n` turns the
//!   sphere integral into a single integral over `t ∈ (0, ∞)`:
//!
//!   `∫_S u_j² h^{-2m} dS = π^{n/2} / (Γ(m) Γ(n/2 + 1 - m))
//!        · ∫_0^∞ t^{m-1} ∏_l (1 + t a_l²)^{-1/2} (1 + t a_j²)^{-1} dt`.
//!
//!   After `t = e^s` the integrand is analytic in a strip of half-width `π`
//!   around the real axis, so the trapezoidal rule converges geometrically at
//!   any aspect ratio. Steps are halved until two levels agree.
//!
//! * [`QuadratureScheme::Surface`] parameterizes `∂E` by `x = diag(a)·y`,
//!   `y` on the unit sphere in hyperspherical angles, and integrates
//!   `m_i dA` directly: the principal curvatures come from the shape operator
//!   `P H P / |∇F|` of `F(x) = Σ x_k²/a_k²`, and `dA = (∏a) |y/a| dS(y)`.
//!   Angles are integrated one at a time by adaptive Gauss–Legendre with
//!   dyadic panel bisection, over one orthant (the rest follows by symmetry).
//!   Cost grows like (panels per angle)^(n-1), so this scheme is capped at
//!   [`MAX_SURFACE_DIM`].

use super::gauss::GaussLegendre;
use super::{MeanCurvatures, Method};
use crate::constants::{binomial, gamma_half};
use crate::error::{GeometryError, Result};
use crate::geometry::Ellipsoid;
use crate::symmetric::sym_elem_all_without;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

/// Ellipsoids with `a_1/a_n` above this are refused.
pub const MAX_ASPECT_RATIO: f64 = 1e6;
pub const MAX_SURFACE_DIM: usize = 6;

const MIN_REL_TOL: f64 = 1e-12;
const MAX_REL_TOL: f64 = 1e-2;
const MAX_HALVINGS: usize = 10;
const GL_ORDER: usize = 10;
const MAX_PANELS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureScheme {
    #[default]
    GaussMap,
    Surface,
}

/// `M_0 ..= M_{n-1}` of `∂E` to relative accuracy `rel_tol`, with the
/// achieved error recorded per entry.
pub fn ellipsoid_mean_curvatures_quadrature(e: &Ellipsoid, rel_tol: f64) -> Result<MeanCurvatures> {
    ellipsoid_mean_curvatures_with(e, rel_tol, QuadratureScheme::GaussMap)
}

/// Same quantity by direct surface quadrature (`n <= 6`).
pub fn ellipsoid_mean_curvatures_surface(e: &Ellipsoid, rel_tol: f64) -> Result<MeanCurvatures> {
    ellipsoid_mean_curvatures_with(e, rel_tol, QuadratureScheme::Surface)
}

pub fn ellipsoid_mean_curvatures_with(e: &Ellipsoid, rel_tol: f64, scheme: QuadratureScheme) -> Result<MeanCurvatures> {
    let n = e.dim();
    if n < 2 {
        return Err(GeometryError::domain(format!("quadrature needs dim >= 2, got {n}")));
    }
    if !(MIN_REL_TOL..=MAX_REL_TOL).contains(&rel_tol) {
        return Err(GeometryError::domain(format!(
            "rel_tol must lie in [{MIN_REL_TOL:e}, {MAX_REL_TOL:e}], got {rel_tol:e}"
        )));
    }
    let axes = e.semi_axes();
    let aspect = axes[0] / axes[n - 1];
    if aspect > MAX_ASPECT_RATIO {
        return Err(GeometryError::domain(format!(
            "aspect ratio a_1/a_n = {aspect:.3e} exceeds the supported {MAX_ASPECT_RATIO:e}"
        )));
    }
    // work with a_1 = 1; M_i scales like length^(n-1-i)
    let scale = axes[0];
    let unit: Vec<f64> = axes.iter().map(|a| a / scale).collect();
    let (values, errors) = match scheme {
        QuadratureScheme::GaussMap => gauss_map(&unit, rel_tol)?,
        QuadratureScheme::Surface => {
            if n > MAX_SURFACE_DIM {
                return Err(GeometryError::domain(format!(
                    "surface quadrature supports dim <= {MAX_SURFACE_DIM}, got {n}"
                )));
            }
            SurfaceIntegrand::new(&unit, rel_tol).integrate()?
        }
    };
    let rescale = |i: usize| scale.powi((n - 1 - i) as i32);
    Ok(MeanCurvatures {
        dim: n,
        values: values.iter().enumerate().map(|(i, v)| v * rescale(i)).collect(),
        method: Method::Quadrature,
        error_estimate: Some(errors.iter().enumerate().map(|(i, v)| v * rescale(i)).collect()),
    })
}

/// Integrand tables for the Gauss-map scheme.
struct GaussMapTerms {
    n: usize,
    d: Vec<f64>,
    /// `2m` for entry `i`: `n + 1 - i`
    twice_m: Vec<u32>,
    /// `C_i · a_j² · s_{n-1-i}(a²_{≠j})`, flattened `[i][j]`
    weights: Vec<f64>,
}

impl GaussMapTerms {
    fn new(unit_axes: &[f64]) -> Self {
        let n = unit_axes.len();
        let d: Vec<f64> = unit_axes.iter().map(|a| a * a).collect();
        let without: Vec<Vec<f64>> = (0..n).map(|j| sym_elem_all_without(&d, j)).collect();
        let twice_m: Vec<u32> = (0..n).map(|i| (n + 1 - i) as u32).collect();
        let mut weights = vec![0.0; n * n];
        for i in 0..n {
            let c = PI.powf(n as f64 / 2.0) / (gamma_half(twice_m[i]) * gamma_half(i as u32 + 1)) / binomial(n - 1, i);
            for j in 0..n {
                weights[i * n + j] = c * d[j] * without[j][n - 1 - i];
            }
        }
        GaussMapTerms { n, d, twice_m, weights }
    }

    /// Integrand in `s = ln t`, accumulated into `out` with factor `w`.
    fn accumulate(&self, s: f64, w: f64, out: &mut [f64]) {
        let n = self.n;
        let t = s.exp();
        let mut log_p = 0.0;
        for dl in &self.d {
            log_p -= 0.5 * (t * dl).ln_1p();
        }
        let p = log_p.exp();
        for (i, o) in out.iter_mut().enumerate() {
            let tm = (0.5 * self.twice_m[i] as f64 * s).exp();
            let row = &self.weights[i * n..(i + 1) * n];
            let sum: f64 = row.iter().zip(&self.d).map(|(wij, dj)| wij / (1.0 + t * dj)).sum();
            *o += w * tm * p * sum;
        }
    }

    /// Bounds on the parts of the line integral outside `[lo, hi]`.
    fn tail_bounds(&self, lo: f64, hi: f64) -> Vec<f64> {
        let n = self.n;
        let sqrt_prod: f64 = self.d.iter().product::<f64>().sqrt();
        (0..n)
            .map(|i| {
                let m = 0.5 * self.twice_m[i] as f64;
                let row = &self.weights[i * n..(i + 1) * n];
                // below: integrand <= e^{m s} Σ_j W_ij
                let below = row.iter().sum::<f64>() * (m * lo).exp() / m;
                // above: integrand <= e^{-(i+1)s/2} Σ_j W_ij / (√∏d · d_j)
                let rate = 0.5 * (i + 1) as f64;
                let above = row.iter().zip(&self.d).map(|(w, dj)| w / (sqrt_prod * dj)).sum::<f64>()
                    * (-rate * hi).exp()
                    / rate;
                below + above
            })
            .collect()
    }
}

fn gauss_map(unit_axes: &[f64], rel_tol: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = unit_axes.len();
    let terms = GaussMapTerms::new(unit_axes);
    let d_min = terms.d[n - 1];
    let mut lo = -40.0;
    let mut hi = 40.0 + 2.0 * (1.0 / d_min).ln() + terms.d.iter().map(|d| -0.5 * d.ln()).sum::<f64>();

    for _ in 0..8 {
        let (values, disc) = trapezoid(&terms, lo, hi, rel_tol)?;
        let tails = terms.tail_bounds(lo, hi);
        let widen = tails.iter().zip(&values).any(|(t, v)| *t > 1e-3 * rel_tol * v.abs());
        if !widen {
            let errors = disc.iter().zip(&tails).map(|(a, b)| a + b).collect();
            return Ok((values, errors));
        }
        lo -= 20.0;
        hi += 40.0;
    }
    Err(GeometryError::Convergence {
        message: "integration window did not capture the tails".into(),
        best: vec![],
    })
}

/// Trapezoidal sums on `[lo, hi]` with dyadically halved steps.
fn trapezoid(terms: &GaussMapTerms, lo: f64, hi: f64, rel_tol: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = terms.n;
    let mut h = 1.0;
    let steps = ((hi - lo) / h).ceil() as usize;
    let mut sum = vec![0.0; n];
    for k in 0..=steps {
        terms.accumulate(lo + k as f64 * h, h, &mut sum);
    }
    let mut points = steps;
    for level in 1..=MAX_HALVINGS {
        let mut mids = vec![0.0; n];
        for k in 0..points {
            terms.accumulate(lo + (k as f64 + 0.5) * h, 0.5 * h, &mut mids);
        }
        let refined: Vec<f64> = sum.iter().zip(&mids).map(|(s, m)| 0.5 * s + m).collect();
        let diff: Vec<f64> = refined.iter().zip(&sum).map(|(a, b)| (a - b).abs()).collect();
        h *= 0.5;
        points *= 2;
        sum = refined;
        let converged = diff.iter().zip(&sum).all(|(d, v)| *d <= rel_tol * v.abs());
        if converged && level >= 1 {
            return Ok((sum, diff));
        }
    }
    Err(GeometryError::Convergence {
        message: format!("trapezoidal refinement did not reach rel_tol {rel_tol:e}"),
        best: sum,
    })
}

type Acc = [f64; 2 * MAX_SURFACE_DIM];

struct SurfaceIntegrand {
    n: usize,
    axes: Vec<f64>,
    prod_axes: f64,
    /// `s_i(d_{≠j})` for the Hessian diagonal `d = 2/a²`, `[j][i]`
    hessian_sym: Vec<Vec<f64>>,
    inv_binom: Vec<f64>,
    level_tol: f64,
    rule: GaussLegendre,
}

impl SurfaceIntegrand {
    fn new(axes: &[f64], rel_tol: f64) -> Self {
        let n = axes.len();
        let hessian: Vec<f64> = axes.iter().map(|a| 2.0 / (a * a)).collect();
        SurfaceIntegrand {
            n,
            axes: axes.to_vec(),
            prod_axes: axes.iter().product(),
            hessian_sym: (0..n).map(|j| sym_elem_all_without(&hessian, j)).collect(),
            inv_binom: (0..n).map(|i| 1.0 / binomial(n - 1, i)).collect(),
            level_tol: rel_tol / (n - 1) as f64,
            rule: GaussLegendre::new(GL_ORDER),
        }
    }

    /// `m_i dA / dS(y)` at the surface point `x = diag(a)·y`.
    fn point(&self, y: &[f64]) -> Acc {
        let n = self.n;
        let mut grad = [0.0; MAX_SURFACE_DIM];
        for j in 0..n {
            grad[j] = 2.0 * y[j] / self.axes[j];
        }
        let norm = grad[..n].iter().map(|g| g * g).sum::<f64>().sqrt();
        let area = self.prod_axes * 0.5 * norm;
        let mut out = [0.0; 2 * MAX_SURFACE_DIM];
        let mut inv_pow = 1.0;
        for i in 0..n {
            // s_i of the principal curvatures: the compression of diag(d) to
            // ν^⊥ has characteristic polynomial Σ_j ν_j² ∏_{l≠j}(t - d_l)
            let s: f64 = (0..n).map(|j| (grad[j] / norm).powi(2) * self.hessian_sym[j][i]).sum();
            out[i] = area * s * inv_pow * self.inv_binom[i];
            inv_pow /= norm;
        }
        out
    }

    fn integrate(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.n;
        let y = [0.0; MAX_SURFACE_DIM];
        let total = self.level(0, y, 1.0, 1.0)?;
        let orthants = 2f64.powi(n as i32);
        Ok((
            total[..n].iter().map(|v| v * orthants).collect(),
            total[MAX_SURFACE_DIM..MAX_SURFACE_DIM + n]
                .iter()
                .map(|v| v * orthants)
                .collect(),
        ))
    }

    /// Integral over angles `θ_k, …, θ_{n-2}` given the earlier ones, which
    /// fixed `y_0 .. y_{k-1}`, the running sine product and the Jacobian.
    fn level(&self, k: usize, y: [f64; MAX_SURFACE_DIM], sines: f64, jac: f64) -> Result<Acc> {
        let n = self.n;
        let last = k == n - 2;
        let f = |theta: f64| -> Result<Acc> {
            let (sin, cos) = theta.sin_cos();
            let mut y = y;
            y[k] = sines * cos;
            if last {
                y[k + 1] = sines * sin;
                let mut v = self.point(&y[..n]);
                for x in v.iter_mut() {
                    *x *= jac;
                }
                Ok(v)
            } else {
                let jac = jac * sin.powi((n - 2 - k) as i32);
                self.level(k + 1, y, sines * sin, jac)
            }
        };
        self.adaptive(&f, k == 0)
    }

    fn rule_sum<F>(&self, f: &F, lo: f64, hi: f64, parallel: bool) -> Result<Acc>
    where
        F: Fn(f64) -> Result<Acc> + Sync,
    {
        let nodes: Vec<(f64, f64)> = self.rule.mapped(lo, hi).collect();
        let evaluated: Vec<Result<Acc>> = if parallel {
            nodes.par_iter().map(|(x, _)| f(*x)).collect()
        } else {
            nodes.iter().map(|(x, _)| f(*x)).collect()
        };
        let mut acc = [0.0; 2 * MAX_SURFACE_DIM];
        for ((_, w), v) in nodes.iter().zip(evaluated) {
            let v = v?;
            for (a, b) in acc.iter_mut().zip(v.iter()) {
                *a += w * b;
            }
        }
        Ok(acc)
    }

    /// Adaptive Gauss–Legendre over `[0, π/2]`: every panel carries its own
    /// rule and the rule on its two halves; the panel whose disagreement is
    /// largest relative to the running total is bisected until the summed
    /// disagreement meets the level tolerance.
    fn adaptive<F>(&self, f: &F, parallel: bool) -> Result<Acc>
    where
        F: Fn(f64) -> Result<Acc> + Sync,
    {
        struct Panel {
            lo: f64,
            hi: f64,
            coarse: Acc,
            halves: [Acc; 2],
        }
        let n = self.n;
        let make = |lo: f64, hi: f64, coarse: Acc| -> Result<Panel> {
            let mid = 0.5 * (lo + hi);
            Ok(Panel {
                lo,
                hi,
                coarse,
                halves: [
                    self.rule_sum(f, lo, mid, parallel)?,
                    self.rule_sum(f, mid, hi, parallel)?,
                ],
            })
        };
        let whole = self.rule_sum(f, 0.0, FRAC_PI_2, parallel)?;
        let mut panels = vec![make(0.0, FRAC_PI_2, whole)?];
        loop {
            let mut total = [0.0; 2 * MAX_SURFACE_DIM];
            let mut disc = [0.0; MAX_SURFACE_DIM];
            for p in &panels {
                for c in 0..2 * MAX_SURFACE_DIM {
                    total[c] += p.halves[0][c] + p.halves[1][c];
                }
                for i in 0..n {
                    disc[i] += (p.coarse[i] - p.halves[0][i] - p.halves[1][i]).abs();
                }
            }
            if (0..n).all(|i| disc[i] <= self.level_tol * total[i].abs()) {
                for i in 0..n {
                    total[MAX_SURFACE_DIM + i] += disc[i];
                }
                return Ok(total);
            }
            if panels.len() >= MAX_PANELS {
                return Err(GeometryError::Convergence {
                    message: format!("surface quadrature exceeded {MAX_PANELS} panels on one angle"),
                    best: total[..n].to_vec(),
                });
            }
            let score = |p: &Panel| {
                (0..n)
                    .map(|i| (p.coarse[i] - p.halves[0][i] - p.halves[1][i]).abs() / total[i].abs())
                    .fold(0.0, f64::max)
            };
            let worst = (0..panels.len())
                .max_by(|&a, &b| score(&panels[a]).total_cmp(&score(&panels[b])))
                .expect("at least one panel");
            let p = panels.swap_remove(worst);
            let mid = 0.5 * (p.lo + p.hi);
            panels.push(make(p.lo, mid, p.halves[0])?);
            panels.push(make(mid, p.hi, p.halves[1])?);
        }
    }
}
