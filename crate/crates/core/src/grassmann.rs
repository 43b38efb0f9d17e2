//! Monte Carlo over affine flats.
//!
//! The invariant measure of the `r`-flats meeting a convex body `K` is a
//! dimensional constant times `M_{r-1}(∂K)`. Flats are drawn from that
//! measure conditioned on meeting a reference ball, so the ratio of hit
//! fractions of two bodies inside the ball estimates `M_{r-1}(∂E_1)/M_{r-1}(∂E_2)`
//! with the constant cancelling.

use crate::error::{GeometryError, Result};
use crate::geometry::Ellipsoid;
use crate::rng::map_batches;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub const MIN_RATIO_TRIALS: usize = 10_000;
/// Relative tolerance on the restricted quadratic form at the boundary.
const HIT_SLACK: f64 = 1e-12;

/// `{basepoint + Σ t_k d_k}` with orthonormal `d_k` and the basepoint
/// orthogonal to their span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineFlat {
    pub dim_ambient: usize,
    pub dim_flat: usize,
    pub basepoint: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitEstimate {
    pub hits: u64,
    pub trials: u64,
    pub reference_radius: f64,
    pub estimate: f64,
    pub std_error: f64,
}

impl HitEstimate {
    fn new(hits: u64, trials: u64, reference_radius: f64) -> Self {
        let p = hits as f64 / trials as f64;
        HitEstimate {
            hits,
            trials,
            reference_radius,
            estimate: p,
            std_error: (p * (1.0 - p) / trials as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitRatio {
    pub ratio: f64,
    pub std_error: f64,
    pub first: HitEstimate,
    pub second: HitEstimate,
    /// Flats meeting both bodies; enters the covariance.
    pub joint_hits: u64,
    pub reference_center: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Remove the components of `v` along the orthonormal `basis`, twice for
/// numerical safety.
fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(v, q);
            for (x, y) in v.iter_mut().zip(q) {
                *x -= c * y;
            }
        }
    }
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn check_dims(n: usize, r: usize) -> Result<()> {
    if n < 2 || r == 0 || r >= n {
        return Err(GeometryError::domain(format!(
            "flat dimension r = {r} must satisfy 1 <= r <= n-1 with n = {n}"
        )));
    }
    Ok(())
}

/// Draw an `r`-flat in `R^n` from the invariant measure conditioned on
/// meeting the ball of radius `reference_radius` about `center`.
pub fn sample_flat<R: Rng + ?Sized>(
    n: usize,
    r: usize,
    center: &[f64],
    reference_radius: f64,
    rng: &mut R,
) -> Result<AffineFlat> {
    check_reference(n, r, center, reference_radius)?;
    Ok(draw_flat(n, r, center, reference_radius, rng))
}

fn check_reference(n: usize, r: usize, center: &[f64], radius: f64) -> Result<()> {
    check_dims(n, r)?;
    if !(radius.is_finite() && radius > 0.0) {
        return Err(GeometryError::domain(format!(
            "reference radius must be positive, got {radius}"
        )));
    }
    if center.len() != n {
        return Err(GeometryError::domain("reference center has the wrong dimension"));
    }
    Ok(())
}

fn draw_flat<R: Rng + ?Sized>(n: usize, r: usize, center: &[f64], radius: f64, rng: &mut R) -> AffineFlat {
    let mut directions: Vec<Vec<f64>> = Vec::with_capacity(r);
    while directions.len() < r {
        let mut v = gaussian(rng, n);
        project_out(&mut v, &directions);
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= norm);
            directions.push(v);
        }
    }
    // uniform point of the (n-r)-ball in the orthogonal complement
    let offset = loop {
        let mut v = gaussian(rng, n);
        project_out(&mut v, &directions);
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-8 {
            let scale = radius * rng.random::<f64>().powf(1.0 / (n - r) as f64) / norm;
            v.iter_mut().for_each(|x| *x *= scale);
            break v;
        }
    };
    let mut basepoint: Vec<f64> = center.iter().zip(&offset).map(|(c, o)| c + o).collect();
    project_out(&mut basepoint, &directions);
    AffineFlat {
        dim_ambient: n,
        dim_flat: r,
        basepoint,
        directions,
    }
}

impl AffineFlat {
    /// Euclidean distance from `x` to the flat.
    pub fn distance_to(&self, x: &[f64]) -> f64 {
        let mut v: Vec<f64> = x.iter().zip(&self.basepoint).map(|(a, b)| a - b).collect();
        project_out(&mut v, &self.directions);
        dot(&v, &v).sqrt()
    }

    /// Image of the flat under the orthogonal matrix `q`.
    pub fn transformed(&self, q: &nalgebra::DMatrix<f64>) -> AffineFlat {
        let apply = |v: &[f64]| -> Vec<f64> { (q * nalgebra::DVector::from_column_slice(v)).iter().copied().collect() };
        AffineFlat {
            dim_ambient: self.dim_ambient,
            dim_flat: self.dim_flat,
            basepoint: apply(&self.basepoint),
            directions: self.directions.iter().map(|d| apply(d)).collect(),
        }
    }
}

/// Minimum of the ellipsoid's quadratic form over the flat.
///
/// In coordinates where `E` is the unit ball the flat is `u + B t`; the
/// minimum is the squared residual of `u` against the column space of `B`.
pub fn flat_form_minimum(flat: &AffineFlat, e: &Ellipsoid) -> Result<f64> {
    if flat.dim_ambient != e.dim() {
        return Err(GeometryError::domain(format!(
            "flat lives in dimension {} but the ellipsoid in {}",
            flat.dim_ambient,
            e.dim()
        )));
    }
    let inv_axes: Vec<f64> = e.semi_axes().iter().map(|a| 1.0 / a).collect();
    let to_unit = |v: nalgebra::DVector<f64>| -> Vec<f64> { v.iter().zip(&inv_axes).map(|(x, s)| x * s).collect() };
    let mut u = to_unit(e.to_principal(&flat.basepoint));
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(flat.dim_flat);
    for d in &flat.directions {
        let mut b = to_unit(e.frame().transpose() * nalgebra::DVector::from_column_slice(d));
        project_out(&mut b, &basis);
        let norm = dot(&b, &b).sqrt();
        b.iter_mut().for_each(|x| *x /= norm);
        basis.push(b);
    }
    project_out(&mut u, &basis);
    Ok(dot(&u, &u))
}

/// Whether the flat meets the solid ellipsoid; tangency counts.
pub fn flat_hits_ellipsoid(flat: &AffineFlat, e: &Ellipsoid) -> Result<bool> {
    Ok(flat_form_minimum(flat, e)? <= 1.0 + HIT_SLACK)
}

/// Smallest ball about `e1`'s center that holds both bodies, enlarged by
/// `1e-9` relatively.
pub fn reference_ball(e1: &Ellipsoid, e2: &Ellipsoid) -> (Vec<f64>, f64) {
    let center: Vec<f64> = e1.center().iter().copied().collect();
    let reach = |e: &Ellipsoid| {
        let offset = (e.center() - e1.center()).norm();
        offset + e.semi_axes()[0]
    };
    (center, reach(e1).max(reach(e2)) * (1.0 + 1e-9))
}

/// Fraction of flats from the conditioned invariant measure that meet `e`.
pub fn hit_fraction(
    e: &Ellipsoid,
    r: usize,
    center: &[f64],
    reference_radius: f64,
    trials: usize,
    seed: u64,
) -> Result<HitEstimate> {
    let n = e.dim();
    check_reference(n, r, center, reference_radius)?;
    if trials == 0 {
        return Err(GeometryError::domain("trials must be positive"));
    }
    let hits: Vec<Result<u64>> = map_batches(seed, trials, |rng, len| {
        let mut hits = 0;
        for _ in 0..len {
            let flat = draw_flat(n, r, center, reference_radius, rng);
            hits += flat_hits_ellipsoid(&flat, e)? as u64;
        }
        Ok(hits)
    });
    let hits = hits.into_iter().sum::<Result<u64>>()?;
    Ok(HitEstimate::new(hits, trials as u64, reference_radius))
}

/// `M_{r-1}(∂E_1)/M_{r-1}(∂E_2)` from shared flats, with a delta-method
/// standard error that accounts for the correlation between the two counts.
pub fn hit_measure_ratio(e1: &Ellipsoid, e2: &Ellipsoid, r: usize, trials: usize, seed: u64) -> Result<HitRatio> {
    let n = e1.dim();
    if e2.dim() != n {
        return Err(GeometryError::domain("ellipsoids have different dimensions"));
    }
    check_dims(n, r)?;
    if trials < MIN_RATIO_TRIALS {
        return Err(GeometryError::domain(format!(
            "hit_measure_ratio needs at least {MIN_RATIO_TRIALS} trials, got {trials}"
        )));
    }
    let (center, radius) = reference_ball(e1, e2);
    let counts: Vec<Result<[u64; 3]>> = map_batches(seed, trials, |rng, len| {
        let mut c = [0u64; 3];
        for _ in 0..len {
            let flat = draw_flat(n, r, &center, radius, rng);
            let h1 = flat_hits_ellipsoid(&flat, e1)?;
            let h2 = flat_hits_ellipsoid(&flat, e2)?;
            c[0] += h1 as u64;
            c[1] += h2 as u64;
            c[2] += (h1 && h2) as u64;
        }
        Ok(c)
    });
    let mut total = [0u64; 3];
    for c in counts {
        let c = c?;
        for k in 0..3 {
            total[k] += c[k];
        }
    }
    if total[1] == 0 {
        return Err(GeometryError::UndefinedRatio(format!(
            "no flat out of {trials} met the second ellipsoid"
        )));
    }
    let nf = trials as f64;
    let (p1, p2, p12) = (total[0] as f64 / nf, total[1] as f64 / nf, total[2] as f64 / nf);
    let ratio = p1 / p2;
    let var =
        ratio * ratio * ((1.0 - p1) / (p1 * nf) + (1.0 - p2) / (p2 * nf) - 2.0 * (p12 - p1 * p2) / (p1 * p2 * nf));
    let std_error = if p1 > 0.0 { var.max(0.0).sqrt() } else { 0.0 };
    Ok(HitRatio {
        ratio,
        std_error,
        first: HitEstimate::new(total[0], trials as u64, radius),
        second: HitEstimate::new(total[1], trials as u64, radius),
        joint_hits: total[2],
        reference_center: center,
    })
}

/// Count flats meeting `inner` but missing `outer`. For `inner ⊆ outer`
/// this must be zero; returns `(violations, inner hits)`.
pub fn inclusion_violations(
    inner: &Ellipsoid,
    outer: &Ellipsoid,
    r: usize,
    trials: usize,
    seed: u64,
) -> Result<(u64, u64)> {
    let n = inner.dim();
    check_dims(n, r)?;
    let (center, radius) = reference_ball(outer, inner);
    let counts: Vec<Result<(u64, u64)>> = map_batches(seed, trials, |rng, len| {
        let mut bad = 0;
        let mut hits = 0;
        for _ in 0..len {
            let flat = draw_flat(n, r, &center, radius, rng);
            if flat_hits_ellipsoid(&flat, inner)? {
                hits += 1;
                if !flat_hits_ellipsoid(&flat, outer)? {
                    bad += 1;
                }
            }
        }
        Ok((bad, hits))
    });
    counts.into_iter().try_fold((0, 0), |acc, c| {
        let c = c?;
        Ok((acc.0 + c.0, acc.1 + c.1))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::ellipsoid_mean_curvatures_quadrature;
    use crate::rng::stream;
    use nalgebra::DMatrix;
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    use std::f64::consts::PI;

    #[test]
    fn flats_are_canonical_and_meet_the_ball() {
        let mut rng = stream(3, 0);
        for (n, r) in [(2, 1), (3, 1), (3, 2), (5, 2), (6, 4)] {
            for _ in 0..200 {
                let flat = sample_flat(n, r, &vec![0.0; n], 1.7, &mut rng).unwrap();
                for (i, a) in flat.directions.iter().enumerate() {
                    for (j, b) in flat.directions.iter().enumerate() {
                        let expected = if i == j { 1.0 } else { 0.0 };
                        assert!((dot(a, b) - expected).abs() < 1e-12);
                    }
                    assert!(dot(a, &flat.basepoint).abs() < 1e-10);
                }
                assert!(flat.distance_to(&vec![0.0; n]) <= 1.7);
            }
        }
        assert!(sample_flat(3, 3, &[0.0; 3], 1.0, &mut rng).is_err());
        assert!(sample_flat(3, 1, &[0.0; 3], 0.0, &mut rng).is_err());
    }

    #[test]
    fn hit_test_examples() {
        let ball = Ellipsoid::ball(3, 1.0).unwrap();
        let line = |p: [f64; 3], d: [f64; 3]| AffineFlat {
            dim_ambient: 3,
            dim_flat: 1,
            basepoint: p.to_vec(),
            directions: vec![d.to_vec()],
        };
        assert!(flat_hits_ellipsoid(&line([0.0; 3], [0.6, 0.0, 0.8]), &ball).unwrap());
        assert!(!flat_hits_ellipsoid(&line([2.0, 0.0, 0.0], [0.0, 1.0, 0.0]), &ball).unwrap());
        let e = Ellipsoid::axis_aligned(vec![3.0, 2.0, 1.0]).unwrap();
        let tangent = AffineFlat {
            dim_ambient: 3,
            dim_flat: 2,
            basepoint: vec![3.0, 0.0, 0.0],
            directions: vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
        };
        assert!(flat_hits_ellipsoid(&tangent, &e).unwrap());
        let mut past = tangent.clone();
        past.basepoint[0] = 3.0 + 1e-6;
        assert!(!flat_hits_ellipsoid(&past, &e).unwrap());
    }

    #[test]
    fn line_directions_uniform_on_sphere() {
        // z is uniform on [-1, 1] and the azimuth on [0, 2π) for uniform directions
        let mut rng = stream(17, 0);
        let bins = 10;
        let mut z_counts = vec![0f64; bins];
        let mut phi_counts = vec![0f64; bins];
        let samples = 100_000;
        for _ in 0..samples {
            let f = sample_flat(3, 1, &[0.0; 3], 1.0, &mut rng).unwrap();
            let d = &f.directions[0];
            let zi = (((d[2] + 1.0) / 2.0) * bins as f64).min(bins as f64 - 1.0) as usize;
            z_counts[zi] += 1.0;
            let phi = d[1].atan2(d[0]) + PI;
            let pi = ((phi / (2.0 * PI)) * bins as f64).min(bins as f64 - 1.0) as usize;
            phi_counts[pi] += 1.0;
        }
        let expected = samples as f64 / bins as f64;
        let critical = ChiSquared::new((bins - 1) as f64).unwrap().inverse_cdf(0.99);
        for counts in [z_counts, phi_counts] {
            let chi2: f64 = counts.iter().map(|c| (c - expected).powi(2) / expected).sum();
            assert!(chi2 < critical, "chi2 = {chi2}, critical = {critical}");
        }
    }

    #[test]
    fn ball_hit_fraction_matches_power_law() {
        for (n, r) in [(3, 1), (4, 2)] {
            let small = Ellipsoid::ball(n, 0.6).unwrap();
            let est = hit_fraction(&small, r, &vec![0.0; n], 1.0, 200_000, 5).unwrap();
            let expected = 0.6f64.powi((n - r) as i32);
            assert!((est.estimate - expected).abs() <= 4.0 * est.std_error);
        }
    }

    #[test]
    fn ratio_examples() {
        let unit = Ellipsoid::ball(3, 1.0).unwrap();
        let two = Ellipsoid::ball(3, 2.0).unwrap();
        let res = hit_measure_ratio(&two, &unit, 1, 200_000, 1).unwrap();
        assert!((res.ratio - 4.0).abs() <= 3.0 * res.std_error, "{res:?}");

        let same = hit_measure_ratio(&unit, &unit, 1, 20_000, 2).unwrap();
        assert_eq!(same.ratio, 1.0);

        let prolate = Ellipsoid::axis_aligned(vec![1.0, 1.0, 2.0]).unwrap();
        let m = ellipsoid_mean_curvatures_quadrature(&prolate, 1e-10).unwrap();
        let res = hit_measure_ratio(&prolate, &unit, 1, 200_000, 3).unwrap();
        let expected = m.values[0] / (4.0 * PI);
        assert!(
            (res.ratio - expected).abs() <= 3.0 * res.std_error,
            "{res:?} vs {expected}"
        );
        assert!(hit_measure_ratio(&prolate, &unit, 1, 100, 3).is_err());
    }

    #[test]
    fn zero_hits_is_undefined() {
        let big = Ellipsoid::ball(3, 1.0).unwrap();
        let far = Ellipsoid::ball(3, 1e-9)
            .unwrap()
            .translated(&[0.0, 0.0, 1.0 - 1e-9])
            .unwrap();
        let err = hit_measure_ratio(&big, &far, 2, 10_000, 0).unwrap_err();
        assert!(matches!(err, GeometryError::UndefinedRatio(_)));
    }

    #[test]
    fn inclusion_is_respected_per_flat() {
        let inner = Ellipsoid::axis_aligned(vec![1.0, 0.8, 0.3]).unwrap();
        let outer = Ellipsoid::axis_aligned(vec![1.0, 0.9, 0.3]).unwrap();
        for r in 1..3 {
            let (bad, hits) = inclusion_violations(&inner, &outer, r, 50_000, 7).unwrap();
            assert_eq!(bad, 0);
            assert!(hits > 0);
        }
    }

    #[test]
    fn rotation_leaves_ball_statistics_unchanged() {
        let q = DMatrix::from_row_slice(3, 3, &[0.0, -1.0, 0.0, 0.6, 0.0, 0.8, -0.8, 0.0, 0.6]);
        let ball = Ellipsoid::ball(3, 0.7).unwrap();
        let mut rng = stream(4, 0);
        let (mut plain, mut rotated) = (0, 0);
        for _ in 0..20_000 {
            let f = sample_flat(3, 1, &[0.0; 3], 1.0, &mut rng).unwrap();
            plain += flat_hits_ellipsoid(&f, &ball).unwrap() as i64;
            rotated += flat_hits_ellipsoid(&f.transformed(&q), &ball).unwrap() as i64;
        }
        assert!((plain - rotated).abs() <= 2);
    }

    #[test]
    fn counts_do_not_depend_on_thread_count() {
        let e = Ellipsoid::axis_aligned(vec![1.0, 0.5, 0.2]).unwrap();
        let run = || hit_fraction(&e, 1, &[0.0; 3], 1.0, 50_000, 99).unwrap();
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(run);
        assert_eq!(run(), one);
    }
}
