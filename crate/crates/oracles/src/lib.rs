//! Reference computations kept deliberately separate from `ellmeasure-core`.
//!
//! Everything here takes a different route from the library (closed forms,
//! elliptic integrals, brute-force enumeration, naive sampling) so the test
//! suites can compare two independent answers. Nothing in this crate is
//! tuned for speed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// Volume of the unit ball in `k` dimensions from the Lanczos gamma function.
pub fn unit_ball_volume(k: usize) -> f64 {
    PI.powf(k as f64 / 2.0) / gamma(k as f64 / 2.0 + 1.0)
}

/// Surface area of the unit sphere sitting in `k + 1` dimensions.
pub fn unit_sphere_area(k: usize) -> f64 {
    2.0 * PI.powf((k as f64 + 1.0) / 2.0) / gamma((k as f64 + 1.0) / 2.0)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Elementary symmetric function by summing over every `k`-subset.
pub fn subset_sym(values: &[f64], k: usize) -> f64 {
    let n = values.len();
    assert!(n <= 24, "subset enumeration is exponential");
    if k == 0 {
        return 1.0;
    }
    let mut total = 0.0;
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize == k {
            let mut prod = 1.0;
            for (j, v) in values.iter().enumerate() {
                if mask & (1 << j) != 0 {
                    prod *= v;
                }
            }
            total += prod;
        }
    }
    total
}

/// Complete elliptic integral of the second kind `E(m)`, parameter `m = k^2`,
/// by the arithmetic-geometric mean.
pub fn complete_elliptic_e(m: f64) -> f64 {
    assert!((0.0..1.0).contains(&m));
    let mut a = 1.0f64;
    let mut b = (1.0 - m).sqrt();
    let mut c = m.sqrt();
    let mut sum = 0.5 * c * c;
    let mut pow2 = 0.5;
    for _ in 0..64 {
        if c.abs() <= 1e-14 * a {
            break;
        }
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        c = 0.5 * (a - b);
        pow2 *= 2.0;
        sum += pow2 * c * c;
        a = an;
        b = bn;
    }
    PI / (2.0 * a) * (1.0 - sum)
}

/// Perimeter of the ellipse with semi-axes `a >= b`.
pub fn ellipse_perimeter(a: f64, b: f64) -> f64 {
    let (a, b) = if a >= b { (a, b) } else { (b, a) };
    let m = 1.0 - (b * b) / (a * a);
    4.0 * a * complete_elliptic_e(m)
}

/// Surface area of the prolate spheroid with equatorial radius `a` and polar
/// semi-axis `c > a`.
pub fn prolate_spheroid_area(a: f64, c: f64) -> f64 {
    assert!(c > a);
    let e = (1.0 - a * a / (c * c)).sqrt();
    2.0 * PI * a * a * (1.0 + c / (a * e) * e.asin())
}

/// Surface area of the oblate spheroid with equatorial radius `a` and polar
/// semi-axis `c < a`.
pub fn oblate_spheroid_area(a: f64, c: f64) -> f64 {
    assert!(c < a);
    let e = (1.0 - c * c / (a * a)).sqrt();
    2.0 * PI * a * a + PI * c * c / e * ((1.0 + e) / (1.0 - e)).ln()
}

/// Integral mean curvatures of a box by walking its faces.
///
/// A face of dimension `n - 1 - i` is fixed by choosing which `i + 1`
/// coordinates sit at an endpoint (and which endpoint); its outer normals fill
/// one of the `2^(i+1)` orthants of a great `i`-sphere.
pub fn box_mean_curvatures_by_faces(sides: &[f64]) -> Vec<f64> {
    let n = sides.len();
    (0..n)
        .map(|i| {
            let fixed = i + 1;
            let exterior_angle = unit_sphere_area(i) / 2f64.powi(fixed as i32);
            let mut weighted = 0.0;
            for mask in 0u32..(1u32 << n) {
                if mask.count_ones() as usize != fixed {
                    continue;
                }
                let face_volume: f64 = (0..n).filter(|j| mask & (1 << j) == 0).map(|j| sides[j]).product();
                // every fixed coordinate has two endpoint choices
                let copies = 2f64.powi(fixed as i32);
                weighted += copies * face_volume * exterior_angle;
            }
            weighted / binomial(n - 1, i)
        })
        .collect()
}

/// Surface area of the outer parallel body of a 3-box, assembled from faces,
/// quarter cylinders along edges and sphere octants at vertices.
pub fn rounded_box_area_3d(l: [f64; 3], rho: f64) -> f64 {
    let faces = 2.0 * (l[0] * l[1] + l[1] * l[2] + l[0] * l[2]);
    let edges = 4.0 * (l[0] + l[1] + l[2]) * (0.5 * PI * rho);
    let corners = 4.0 * PI * rho * rho;
    faces + edges + corners
}

/// Volume of the outer parallel body of a 3-box by the same decomposition.
pub fn rounded_box_volume_3d(l: [f64; 3], rho: f64) -> f64 {
    let core = l[0] * l[1] * l[2];
    let slabs = 2.0 * (l[0] * l[1] + l[1] * l[2] + l[0] * l[2]) * rho;
    let edges = 4.0 * (l[0] + l[1] + l[2]) * (0.25 * PI * rho * rho);
    let corners = 4.0 / 3.0 * PI * rho.powi(3);
    core + slabs + edges + corners
}

/// Lattice points in the disk of integer radius `r` via Jacobi's two-square
/// count: `1 + 4 * sum_j (floor(r^2/(4j+1)) - floor(r^2/(4j+3)))`.
pub fn gauss_circle_count(r: u64) -> u64 {
    let r2 = (r * r) as i64;
    let mut total: i64 = 0;
    let mut j = 0i64;
    while 4 * j + 1 <= r2 {
        total += r2 / (4 * j + 1) - r2 / (4 * j + 3);
        j += 1;
    }
    (1 + 4 * total) as u64
}

/// Exhaustive lattice count over the full bounding box, no pruning.
///
/// `frame` is row-major with columns the principal directions.
pub fn brute_lattice_count(center: &[f64], frame: &[f64], axes: &[f64]) -> u64 {
    let n = axes.len();
    let half: Vec<f64> = (0..n)
        .map(|i| {
            (0..n)
                .map(|k| frame[i * n + k].powi(2) * axes[k].powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let lo: Vec<i64> = (0..n).map(|i| (center[i] - half[i]).floor() as i64 - 1).collect();
    let hi: Vec<i64> = (0..n).map(|i| (center[i] + half[i]).ceil() as i64 + 1).collect();
    let mut point = lo.clone();
    let mut count = 0u64;
    loop {
        let mut q = 0.0;
        for k in 0..n {
            let y: f64 = (0..n).map(|i| frame[i * n + k] * (point[i] as f64 - center[i])).sum();
            q += (y / axes[k]).powi(2);
        }
        if q <= 1.0 {
            count += 1;
        }
        let mut d = 0;
        loop {
            if d == n {
                return count;
            }
            point[d] += 1;
            if point[d] <= hi[d] {
                break;
            }
            point[d] = lo[d];
            d += 1;
        }
    }
}

/// Steiner circumellipse of a triangle, returned as `(center, Q)` with
/// `Q` row-major 2x2 such that the ellipse is `(x-c)^T Q (x-c) <= 1`.
///
/// Built as the affine image of the circumcircle of the equilateral triangle
/// with vertices on the unit circle.
pub fn steiner_circumellipse(v: [[f64; 2]; 3]) -> ([f64; 2], [f64; 4]) {
    let s3 = 3f64.sqrt() / 2.0;
    let e = [[1.0, 0.0], [-0.5, s3], [-0.5, -s3]];
    // L e_k + t = v_k; the e_k sum to zero so t is the centroid
    let t = [(v[0][0] + v[1][0] + v[2][0]) / 3.0, (v[0][1] + v[1][1] + v[2][1]) / 3.0];
    // solve L from e_0, e_1 (linearly independent)
    let det = e[0][0] * e[1][1] - e[0][1] * e[1][0];
    let inv = [[e[1][1] / det, -e[1][0] / det], [-e[0][1] / det, e[0][0] / det]];
    let rhs = [[v[0][0] - t[0], v[1][0] - t[0]], [v[0][1] - t[1], v[1][1] - t[1]]];
    // L = rhs * inv where columns of the E matrix are e_0, e_1
    let l = [
        [
            rhs[0][0] * inv[0][0] + rhs[0][1] * inv[1][0],
            rhs[0][0] * inv[0][1] + rhs[0][1] * inv[1][1],
        ],
        [
            rhs[1][0] * inv[0][0] + rhs[1][1] * inv[1][0],
            rhs[1][0] * inv[0][1] + rhs[1][1] * inv[1][1],
        ],
    ];
    // Q = (L L^T)^{-1}
    let m = [
        l[0][0] * l[0][0] + l[0][1] * l[0][1],
        l[0][0] * l[1][0] + l[0][1] * l[1][1],
        l[1][0] * l[1][0] + l[1][1] * l[1][1],
    ];
    let dm = m[0] * m[2] - m[1] * m[1];
    (t, [m[2] / dm, -m[1] / dm, -m[1] / dm, m[0] / dm])
}

/// Distance from `p` to the ellipse `x^2/a^2 + y^2/b^2 <= 1`, by dense
/// sampling of the boundary followed by golden-section refinement.
pub fn ellipse_distance(a: f64, b: f64, p: [f64; 2]) -> f64 {
    if (p[0] / a).powi(2) + (p[1] / b).powi(2) <= 1.0 {
        return 0.0;
    }
    let d2 = |t: f64| (a * t.cos() - p[0]).powi(2) + (b * t.sin() - p[1]).powi(2);
    let samples = 720;
    let step = 2.0 * PI / samples as f64;
    let best = (0..samples)
        .map(|k| k as f64 * step)
        .min_by(|x, y| d2(*x).partial_cmp(&d2(*y)).unwrap())
        .unwrap();
    let (mut lo, mut hi) = (best - step, best + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let m1 = hi - g * (hi - lo);
        let m2 = lo + g * (hi - lo);
        if d2(m1) < d2(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    d2(0.5 * (lo + hi)).sqrt()
}

/// Hit-or-miss area of the outer parallel body of an ellipse.
/// Returns `(estimate, standard error)`.
pub fn ellipse_parallel_area_mc(a: f64, b: f64, rho: f64, samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let (w, h) = (a + rho, b + rho);
    let mut hits = 0usize;
    for _ in 0..samples {
        let p = [rng.random_range(-w..w), rng.random_range(-h..h)];
        if ellipse_distance(a, b, p) <= rho {
            hits += 1;
        }
    }
    let frac = hits as f64 / samples as f64;
    let area = 4.0 * w * h;
    (area * frac, area * (frac * (1.0 - frac) / samples as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elliptic_e_endpoints() {
        assert!((complete_elliptic_e(0.0) - PI / 2.0).abs() < 1e-15);
        // E(1/2) = 1.3506438810476755...
        assert!((complete_elliptic_e(0.5) - 1.350_643_881_047_675_5).abs() < 1e-14);
    }

    #[test]
    fn known_reference_values() {
        assert!((ellipse_perimeter(2.0, 1.0) - 9.688_448_220_547_675).abs() < 1e-12);
        assert!((prolate_spheroid_area(1.0, 2.0) - 21.478_435_327_883_737).abs() < 1e-10);
        assert_eq!(gauss_circle_count(2), 13);
        assert_eq!(gauss_circle_count(1), 5);
        let (c, q) = steiner_circumellipse([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        assert!((c[0] - 1.0 / 3.0).abs() < 1e-15);
        let area = PI / (q[0] * q[3] - q[1] * q[2]).sqrt();
        assert!((area - 4.0 * PI / (3.0 * 3f64.sqrt()) * 0.5).abs() < 1e-12);
    }

    #[test]
    fn face_walk_small_boxes() {
        let m = box_mean_curvatures_by_faces(&[2.0, 4.0, 6.0]);
        assert!((m[0] - 88.0).abs() < 1e-12);
        assert!((m[1] - 12.0 * PI).abs() < 1e-12);
        assert!((m[2] - 4.0 * PI).abs() < 1e-12);
    }
}
