//! Minimum-volume enclosing ellipsoids and the John sandwich.
//!
//! The solver is Khachiyan's coordinate ascent on `log det` over weights of
//! the lifted points `(p, 1)`, with Todd–Yildirim away steps that shrink the
//! weight of the least critical support point. For centrally symmetric sets
//! the center is pinned at the centroid and no lifting is needed.
//!
//! If `E_K` is the enclosing ellipsoid of a convex body `K`, then
//! `E_K/n ⊆ K ⊆ E_K`, improved to `E_K/√n` for symmetric `K` (scaling about
//! the center of `E_K`). Monotonicity of `M_i` turns that into intervals for
//! `M_i(K)`, and the pinch bounds turn measured `M_i(K)` back into intervals
//! for symmetric functions of the semi-axes of `E_K`.

use crate::bounds::pinch_bounds;
use crate::constants::{binomial, omega};
use crate::error::{GeometryError, Result};
use crate::geometry::Ellipsoid;
use crate::measures::ellipsoid_mean_curvatures_quadrature;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub const MIN_EPSILON: f64 = 1e-10;
pub const MAX_EPSILON: f64 = 1e-2;
pub const DEFAULT_MAX_ITERATIONS: usize = 100_000;
/// Tolerance for the reflection check of symmetric input.
const SYMMETRY_TOL: f64 = 1e-9;
const RANK_TOL: f64 = 1e-12;
/// Quadrature accuracy for the sharp sandwich endpoints.
const SANDWICH_REL_TOL: f64 = 1e-10;
const REFRESH_EVERY: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MveeResult {
    pub ellipsoid: Ellipsoid,
    pub weights: Vec<f64>,
    pub iterations: usize,
    /// `max_i M_i / d - 1` at termination, before the containment rescale.
    pub gap: f64,
    pub centrally_symmetric: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanCurvatureSandwich {
    pub index: usize,
    /// `[M_i(t E_K), M_i(E_K)]` by quadrature, each end widened by its error.
    pub sharp: Interval,
    /// Pinch lower bound of `t E_K` to pinch upper bound of `E_K`.
    pub conservative: Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricFunctionInterval {
    /// Interval for `s_k` of the semi-axes of `E_K`.
    pub k: usize,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JohnSandwich {
    pub mvee: MveeResult,
    /// `t` with `t E_K ⊆ K ⊆ E_K`.
    pub shrink: f64,
    pub mean_curvatures: Vec<MeanCurvatureSandwich>,
    /// Present when `M_i(K)` values were supplied.
    pub symmetric_functions: Option<Vec<SymmetricFunctionInterval>>,
}

fn check_points(points: &[Vec<f64>]) -> Result<usize> {
    let n = points.first().map(Vec::len).unwrap_or(0);
    if n == 0 {
        return Err(GeometryError::domain("point set is empty"));
    }
    if points.iter().any(|p| p.len() != n) {
        return Err(GeometryError::domain("points have inconsistent dimensions"));
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(GeometryError::domain("points must have finite coordinates"));
    }
    if points.len() < n + 1 {
        return Err(GeometryError::degenerate(format!(
            "{} points cannot affinely span dimension {n}",
            points.len()
        )));
    }
    Ok(n)
}

fn centroid(points: &[Vec<f64>]) -> DVector<f64> {
    let n = points[0].len();
    let mut c = DVector::zeros(n);
    for p in points {
        c += DVector::from_column_slice(p);
    }
    c / points.len() as f64
}

fn check_span(points: &[Vec<f64>], c: &DVector<f64>) -> Result<()> {
    let n = c.len();
    let mut scatter = DMatrix::zeros(n, n);
    for p in points {
        let y = DVector::from_column_slice(p) - c;
        scatter += &y * y.transpose();
    }
    let ev = SymmetricEigen::new(scatter).eigenvalues;
    let (lo, hi) = (ev.min(), ev.max());
    if !(hi > 0.0 && lo > RANK_TOL * hi) {
        return Err(GeometryError::degenerate(
            "points do not affinely span the ambient space (rank deficient)",
        ));
    }
    Ok(())
}

/// Check that the set is closed under reflection through its centroid.
fn check_symmetry(points: &[Vec<f64>], c: &DVector<f64>) -> Result<()> {
    let scale = points
        .iter()
        .map(|p| (DVector::from_column_slice(p) - c).amax())
        .fold(1.0, f64::max);
    for p in points {
        let mirror: Vec<f64> = p.iter().zip(c.iter()).map(|(x, ci)| 2.0 * ci - x).collect();
        let found = points.iter().any(|q| {
            q.iter()
                .zip(&mirror)
                .all(|(a, b)| (a - b).abs() <= SYMMETRY_TOL * scale)
        });
        if !found {
            return Err(GeometryError::Symmetry(format!(
                "reflection of {p:?} through the centroid is not in the point set"
            )));
        }
    }
    Ok(())
}

/// Weighted second-moment matrix `Σ u_i q_i q_iᵀ` and its inverse.
fn moment_inverse(q: &[DVector<f64>], u: &[f64]) -> Result<DMatrix<f64>> {
    let d = q[0].len();
    let mut x = DMatrix::zeros(d, d);
    for (qi, ui) in q.iter().zip(u) {
        if *ui > 0.0 {
            x += *ui * qi * qi.transpose();
        }
    }
    x.try_inverse()
        .ok_or_else(|| GeometryError::Numerical("weighted moment matrix became singular".into()))
}

fn mahalanobis(q: &[DVector<f64>], xinv: &DMatrix<f64>) -> Vec<f64> {
    q.iter().map(|qi| qi.dot(&(xinv * qi))).collect()
}

/// `(1 + ε)`-approximate minimum-volume enclosing ellipsoid.
///
/// With `centrally_symmetric` the set must be closed under reflection through
/// its centroid, which then is the center.
pub fn mvee(points: &[Vec<f64>], centrally_symmetric: bool, epsilon: f64, max_iterations: usize) -> Result<MveeResult> {
    let n = check_points(points)?;
    if !(MIN_EPSILON..=MAX_EPSILON).contains(&epsilon) {
        return Err(GeometryError::domain(format!(
            "epsilon must lie in [{MIN_EPSILON:e}, {MAX_EPSILON:e}], got {epsilon:e}"
        )));
    }
    let c0 = centroid(points);
    check_span(points, &c0)?;
    if centrally_symmetric {
        check_symmetry(points, &c0)?;
    }
    // lifted (general) or centered (symmetric) vectors
    let q: Vec<DVector<f64>> = points
        .iter()
        .map(|p| {
            if centrally_symmetric {
                DVector::from_column_slice(p) - &c0
            } else {
                DVector::from_iterator(n + 1, p.iter().copied().chain(std::iter::once(1.0)))
            }
        })
        .collect();
    let d = q[0].len() as f64;
    let m = q.len();
    let mut u = vec![1.0 / m as f64; m];
    let mut xinv = moment_inverse(&q, &u)?;
    let mut mah = mahalanobis(&q, &xinv);
    let mut iterations = 0;
    let gap = loop {
        let (j, mj) = argmax(&mah);
        let (k, mk) = support_argmin(&mah, &u);
        let up = mj / d - 1.0;
        let down = 1.0 - mk / d;
        if up <= epsilon && down <= epsilon {
            break up;
        }
        if iterations >= max_iterations {
            return Err(GeometryError::Convergence {
                message: format!(
                    "MVEE did not reach epsilon {epsilon:e} in {max_iterations} iterations (gap {up:.3e})"
                ),
                best: u,
            });
        }
        iterations += 1;
        // toward-step on the most violated point, away-step on the least
        // critical support point, whichever promises more
        let (index, a, b) = if up >= down {
            let beta = (mj - d) / (d * (mj - 1.0));
            u.iter_mut().for_each(|w| *w *= 1.0 - beta);
            u[j] += beta;
            (j, 1.0 - beta, beta)
        } else {
            let full = u[k] / (1.0 - u[k]);
            let beta = if mk > 1.0 {
                ((d - mk) / (d * (mk - 1.0))).min(full)
            } else {
                full
            };
            u.iter_mut().for_each(|w| *w *= 1.0 + beta);
            u[k] -= beta;
            if beta == full {
                u[k] = 0.0;
            }
            (k, 1.0 + beta, -beta)
        };
        if iterations % REFRESH_EVERY == 0 {
            xinv = moment_inverse(&q, &u)?;
            mah = mahalanobis(&q, &xinv);
        } else {
            // Sherman–Morrison for X' = a X + b q qᵀ
            let g = &xinv * &q[index];
            let mq = q[index].dot(&g);
            let r = b / a;
            let denom = 1.0 + r * mq;
            if !(denom > 0.0) {
                return Err(GeometryError::Numerical(
                    "rank-one update lost positive definiteness".into(),
                ));
            }
            xinv = (&xinv - (r / denom) * &g * g.transpose()) / a;
            for (mi, qi) in mah.iter_mut().zip(&q) {
                let t = qi.dot(&g);
                *mi = (*mi - r * t * t / denom) / a;
            }
        }
    };

    let (center, mut shape) = if centrally_symmetric {
        let x = moment_inverse(&q, &u)?;
        (c0.clone(), x / n as f64)
    } else {
        let mut c = DVector::zeros(n);
        for (p, w) in points.iter().zip(&u) {
            c += *w * DVector::from_column_slice(p);
        }
        let mut s = DMatrix::zeros(n, n);
        for (p, w) in points.iter().zip(&u) {
            let y = DVector::from_column_slice(p);
            s += *w * &y * y.transpose();
        }
        s -= &c * c.transpose();
        let sinv = s
            .try_inverse()
            .ok_or_else(|| GeometryError::Numerical("MVEE shape matrix is singular".into()))?;
        (c, sinv / n as f64)
    };
    // rescale so that every input point is inside
    let worst = points
        .iter()
        .map(|p| {
            let y = DVector::from_column_slice(p) - &center;
            y.dot(&(&shape * &y))
        })
        .fold(0.0, f64::max);
    if worst > 1.0 {
        shape /= worst;
    }
    let shape = 0.5 * (&shape + shape.transpose());
    let eig = SymmetricEigen::new(shape);
    if eig.eigenvalues.iter().any(|l| !(*l > 0.0)) {
        return Err(GeometryError::Numerical("MVEE shape is not positive definite".into()));
    }
    let axes: Vec<f64> = eig.eigenvalues.iter().map(|l| 1.0 / l.sqrt()).collect();
    let qr = eig.eigenvectors.qr();
    let signs = DMatrix::from_diagonal(&qr.r().diagonal().map(|v| if v < 0.0 { -1.0 } else { 1.0 }));
    let frame = qr.q() * signs;
    let ellipsoid = Ellipsoid::new(center.iter().copied().collect(), frame, axes)?;
    Ok(MveeResult {
        ellipsoid,
        weights: u,
        iterations,
        gap,
        centrally_symmetric,
    })
}

fn argmax(v: &[f64]) -> (usize, f64) {
    v.iter().copied().enumerate().fold(
        (0, f64::NEG_INFINITY),
        |best, (i, x)| if x > best.1 { (i, x) } else { best },
    )
}

fn support_argmin(v: &[f64], u: &[f64]) -> (usize, f64) {
    v.iter()
        .copied()
        .enumerate()
        .filter(|(i, _)| u[*i] > 0.0)
        .fold(
            (0, f64::INFINITY),
            |best, (i, x)| if x < best.1 { (i, x) } else { best },
        )
}

/// `1/n`, or `1/√n` for centrally symmetric bodies.
pub fn john_shrink(n: usize, centrally_symmetric: bool) -> f64 {
    if centrally_symmetric {
        1.0 / (n as f64).sqrt()
    } else {
        1.0 / n as f64
    }
}

/// Intervals for `s_k(a)`, `a` the semi-axes of `E_K`, from measured
/// `M_i(K)`: `M_i(K) <= M_i(E_K) <= C s_k(a)` and
/// `M_i(K) >= M_i(t E_K) >= c t^k s_k(a)` with `k = n-1-i` and the pinch
/// constants `C = ω_i 2^k / binom(n-1,i)`, `c = C/(√n)^k`.
pub fn symmetric_function_intervals(n: usize, shrink: f64, m_values: &[f64]) -> Result<Vec<SymmetricFunctionInterval>> {
    if m_values.len() != n {
        return Err(GeometryError::domain(format!(
            "expected {n} mean curvature values, got {}",
            m_values.len()
        )));
    }
    if m_values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(GeometryError::domain("mean curvature values must be positive"));
    }
    Ok((0..n)
        .map(|i| {
            let k = n - 1 - i;
            let big_c = omega(i) * 2f64.powi(k as i32) / binomial(n - 1, i);
            let c = big_c / (n as f64).sqrt().powi(k as i32);
            SymmetricFunctionInterval {
                k,
                lower: (m_values[i] / big_c).next_down(),
                upper: (m_values[i] / (c * shrink.powi(k as i32))).next_up(),
            }
        })
        .collect())
}

pub fn john_sandwich(
    points: &[Vec<f64>],
    centrally_symmetric: bool,
    epsilon: f64,
    supplied: Option<&[f64]>,
) -> Result<JohnSandwich> {
    let fit = mvee(points, centrally_symmetric, epsilon, DEFAULT_MAX_ITERATIONS)?;
    let outer = &fit.ellipsoid;
    let n = outer.dim();
    let shrink = john_shrink(n, centrally_symmetric);
    let inner = outer.scaled(shrink)?;
    let mut mean_curvatures = Vec::with_capacity(n);
    if n >= 2 {
        let m_out = ellipsoid_mean_curvatures_quadrature(outer, SANDWICH_REL_TOL)?;
        let m_in = ellipsoid_mean_curvatures_quadrature(&inner, SANDWICH_REL_TOL)?;
        for i in 0..n {
            let err = |m: &crate::measures::MeanCurvatures| m.error_estimate.as_ref().map_or(0.0, |e| e[i]);
            mean_curvatures.push(MeanCurvatureSandwich {
                index: i,
                sharp: Interval {
                    lower: m_in.values[i] - err(&m_in),
                    upper: m_out.values[i] + err(&m_out),
                },
                conservative: Interval {
                    lower: pinch_bounds(&inner, i)?.lower,
                    upper: pinch_bounds(outer, i)?.upper,
                },
            });
        }
    }
    let symmetric_functions = supplied
        .map(|m| symmetric_function_intervals(n, shrink, m))
        .transpose()?;
    Ok(JohnSandwich {
        mvee: fit,
        shrink,
        mean_curvatures,
        symmetric_functions,
    })
}

/// Uniformly spread points on `∂E` (Gaussian directions pushed through the
/// semi-axes), for containment spot checks.
pub fn boundary_samples<R: Rng + ?Sized>(e: &Ellipsoid, count: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = e.dim();
    (0..count)
        .map(|_| {
            let mut u: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
            u.iter_mut().zip(e.semi_axes()).for_each(|(v, a)| *v *= a / norm);
            let x = e.center() + e.frame() * DVector::from_vec(u);
            x.iter().copied().collect()
        })
        .collect()
}
