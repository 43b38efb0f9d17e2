//! Acceptance suite: one line per criterion, non-zero exit on any failure.
//!
//! Run with `cargo test -p ellmeasure-cli --test acceptance`.

use ellmeasure_core::bounds::{pinch_bounds_all, pinch_ratio, tube_breakdown_radius};
use ellmeasure_core::geometry::Cuboid;
use ellmeasure_core::grassmann::{hit_measure_ratio, inclusion_violations};
use ellmeasure_core::john::{boundary_samples, DEFAULT_MAX_ITERATIONS};
use ellmeasure_core::lattice::{dilation_sweep, linear_trend};
use ellmeasure_core::measures::ellipsoid_mean_curvatures_quadrature;
use ellmeasure_core::rng::{log_uniform, random_rotation, stream};
use ellmeasure_core::{
    binomial, box_mean_curvatures, john_sandwich, lattice_count, mvee, parallel_area, tube_area_bounds, Ellipsoid,
};
use ellmeasure_oracles as oracle;
use nalgebra::DMatrix;
use rand::Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};
use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn random_ellipsoid<R: Rng>(n: usize, rng: &mut R) -> Ellipsoid {
    let axes = (0..n).map(|_| log_uniform(0.1, 10.0, rng)).collect();
    Ellipsoid::new(vec![0.0; n], random_rotation(n, rng), axes).unwrap()
}

fn sphere_closed_form() -> Outcome {
    let mut worst = 0.0f64;
    for n in 2..=5 {
        for r in [0.5, 1.0, 3.0] {
            let m = ellipsoid_mean_curvatures_quadrature(&Ellipsoid::ball(n, r).unwrap(), 1e-10)
                .map_err(|e| e.to_string())?;
            for i in 0..n {
                let exact = oracle::unit_sphere_area(n - 1) * r.powi((n - 1 - i) as i32);
                worst = worst.max(rel(m.values[i], exact));
            }
        }
    }
    check(worst <= 1e-8, format!("max relative error {worst:.2e} (tol 1e-8)"))
}

fn spheroid_and_ellipse() -> Outcome {
    let prolate = Ellipsoid::axis_aligned(vec![1.0, 1.0, 2.0]).unwrap();
    let m3 = ellipsoid_mean_curvatures_quadrature(&prolate, 1e-10).map_err(|e| e.to_string())?;
    let e3 = rel(m3.values[0], oracle::prolate_spheroid_area(1.0, 2.0));
    let ellipse = Ellipsoid::axis_aligned(vec![2.0, 1.0]).unwrap();
    let m2 = ellipsoid_mean_curvatures_quadrature(&ellipse, 1e-10).map_err(|e| e.to_string())?;
    let e2 = rel(m2.values[0], oracle::ellipse_perimeter(2.0, 1.0));
    check(
        e3 <= 1e-6 && e2 <= 1e-8,
        format!(
            "M_0(1,1,2) = {:.6} rel err {e3:.1e} (tol 1e-6); M_0(2,1) = {:.6} rel err {e2:.1e} (tol 1e-8)",
            m3.values[0], m2.values[0]
        ),
    )
}

fn box_polynomial_identity() -> Outcome {
    let mut rng = stream(0xB0C5, 0);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(2..=6);
        let sides: Vec<f64> = (0..n).map(|_| log_uniform(0.1, 10.0, &mut rng)).collect();
        let m = box_mean_curvatures(&Cuboid::centered(sides.clone()).unwrap());
        // coefficient of ρ^k in vol(P + ρB)
        for k in 0..=n {
            let lhs = oracle::subset_sym(&sides, n - k) * oracle::unit_ball_volume(k);
            let rhs = if k == 0 {
                sides.iter().product()
            } else {
                binomial(n - 1, k - 1) * m.values[k - 1] / k as f64
            };
            worst = worst.max(rel(rhs, lhs));
        }
    }
    check(
        worst <= 1e-12,
        format!("50 boxes, max coefficient relative error {worst:.2e} (tol 1e-12)"),
    )
}

fn pinch_sandwich() -> Outcome {
    let mut rng = stream(0x91C4, 0);
    let (mut outside, mut ratio_err, mut over) = (0, 0.0f64, 0);
    for _ in 0..200 {
        let n = rng.random_range(2..=5);
        let e = random_ellipsoid(n, &mut rng);
        let m = ellipsoid_mean_curvatures_quadrature(&e, 1e-8).map_err(|e| e.to_string())?;
        for (i, b) in pinch_bounds_all(&e).iter().enumerate() {
            outside += !b.contains(m.values[i]) as usize;
            let ratio = b.upper / b.lower;
            ratio_err = ratio_err.max(rel(ratio, pinch_ratio(n, i)));
            ratio_err = ratio_err.max(rel(ratio, (n as f64).sqrt().powi((n - 1 - i) as i32)));
            over += (ratio > (n as f64).powf((n - i) as f64 / 2.0)) as usize;
        }
    }
    // The bounds are widened outward by 4 ulps at each end.
    check(
        outside == 0 && ratio_err <= 1e-14 && over == 0,
        format!("200 ellipsoids: {outside} values outside, ratio deviation {ratio_err:.1e}, {over} ratios above n^((n-i)/2)"),
    )
}

/// Inner body inside `outer`: either a shrunken shifted copy in the same
/// frame, or a differently rotated body inside the inscribed ball.
fn nested_pair<R: Rng>(n: usize, rng: &mut R) -> (Ellipsoid, Ellipsoid) {
    let outer = random_ellipsoid(n, rng);
    let a = outer.semi_axes().to_vec();
    if rng.random_bool(0.5) {
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(0.3..1.0)).collect();
        let slack = 1.0 - u.iter().cloned().fold(0.0, f64::max);
        let dir: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
        let t = rng.random_range(0.0..0.99) * slack / norm;
        // shift in principal coordinates, scaled by the semi-axes
        let local = DMatrix::from_fn(n, 1, |k, _| dir[k] * t * a[k]);
        let shift = outer.frame() * local;
        let inner = Ellipsoid::new(
            shift.iter().copied().collect(),
            outer.frame().clone(),
            a.iter().zip(&u).map(|(x, y)| x * y).collect(),
        )
        .unwrap();
        (inner, outer)
    } else {
        let r = a[n - 1];
        let b: Vec<f64> = (0..n).map(|_| r * rng.random_range(0.2..0.6)).collect();
        let c: Vec<f64> = (0..n).map(|_| r * rng.random_range(-0.2..0.2)).collect();
        let inner = Ellipsoid::new(c, random_rotation(n, rng), b).unwrap();
        (inner, outer)
    }
}

fn monotonicity() -> Outcome {
    let rel_tol = 1e-8;
    let mut rng = stream(0x303, 0);
    let (mut decreases, mut violations, mut hits) = (0, 0u64, 0u64);
    for pair in 0..100u64 {
        let n = rng.random_range(2..=4);
        let (inner, outer) = nested_pair(n, &mut rng);
        for p in boundary_samples(&inner, 200, &mut rng) {
            if outer.form_value(&p) > 1.0 + 1e-12 {
                return Err(format!("pair {pair}: generator produced a non-nested pair"));
            }
        }
        let mi = ellipsoid_mean_curvatures_quadrature(&inner, rel_tol).map_err(|e| e.to_string())?;
        let mo = ellipsoid_mean_curvatures_quadrature(&outer, rel_tol).map_err(|e| e.to_string())?;
        for i in 0..n {
            decreases += (mi.values[i] > mo.values[i] * (1.0 + 2.0 * rel_tol)) as usize;
        }
        let r = rng.random_range(1..n);
        let (bad, h) = inclusion_violations(&inner, &outer, r, 100_000, pair).map_err(|e| e.to_string())?;
        violations += bad;
        hits += h;
    }
    check(
        decreases == 0 && violations == 0 && hits > 0,
        format!(
            "100 pairs: {decreases} M_i decreases, {violations} hit violations over 10^7 flats ({hits} inner hits)"
        ),
    )
}

fn grassmann_ratios() -> Outcome {
    let prolate = Ellipsoid::axis_aligned(vec![1.0, 1.0, 2.0]).unwrap();
    let ball = Ellipsoid::ball(3, 1.0).unwrap();
    let big = Ellipsoid::ball(3, 2.0).unwrap();
    let est = hit_measure_ratio(&prolate, &ball, 1, 1_000_000, 6).map_err(|e| e.to_string())?;
    let exact = ellipsoid_mean_curvatures_quadrature(&prolate, 1e-10)
        .map_err(|e| e.to_string())?
        .values[0]
        / (4.0 * PI);
    let z1 = (est.ratio - exact) / est.std_error;
    let balls = hit_measure_ratio(&big, &ball, 1, 1_000_000, 7).map_err(|e| e.to_string())?;
    let z2 = (balls.ratio - 4.0) / balls.std_error;
    check(
        z1.abs() <= 3.0 && z2.abs() <= 3.0,
        format!(
            "(1,1,2)/ball {:.4} ± {:.4} vs {exact:.4} (z = {z1:.2}); R=2/R=1 {:.4} ± {:.4} vs 4 (z = {z2:.2})",
            est.ratio, est.std_error, balls.ratio, balls.std_error
        ),
    )
}

fn tube_bounds() -> Outcome {
    let mut rng = stream(0x7B, 0);
    let (mut outside, mut cases) = (0, 0);
    let mut breakdown = Vec::new();
    for _ in 0..100 {
        let n = rng.random_range(2..=4);
        let e = random_ellipsoid(n, &mut rng);
        let m = ellipsoid_mean_curvatures_quadrature(&e, 1e-10).map_err(|e| e.to_string())?;
        let s1: f64 = e.semi_axes().iter().sum();
        for scale in [0.1, 0.5, 1.0] {
            let rho = scale * s1 / n as f64;
            let b = tube_area_bounds(&e, rho).map_err(|e| e.to_string())?;
            outside += !b.contains(parallel_area(&m, rho).map_err(|e| e.to_string())?) as usize;
            cases += 1;
        }
        breakdown.push(tube_breakdown_radius(&e, &m).map_err(|e| e.to_string())? / s1);
    }
    let lo = breakdown.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = breakdown.iter().cloned().fold(0.0, f64::max);
    check(
        outside == 0,
        format!("{cases} cases, {outside} outside; empirical breakdown radius / s_1 in [{lo:.3}, {hi:.3}]"),
    )
}

fn lattice_discrepancy() -> Outcome {
    let count = |axes: &[f64]| lattice_count(&Ellipsoid::axis_aligned(axes.to_vec()).unwrap()).unwrap();
    let hand = [count(&[2.0, 2.0]), count(&[2.0, 1.0]), count(&[1.0, 1.0, 1.0])];
    if hand != [13, 7, 7] {
        return Err(format!("hand oracles: got {hand:?}, expected [13, 7, 7]"));
    }
    for r in 1..=50u64 {
        let got = count(&[r as f64, r as f64]);
        if got != oracle::gauss_circle_count(r) {
            return Err(format!("disk radius {r}: {got} vs {}", oracle::gauss_circle_count(r)));
        }
    }
    let mut rng = stream(0x1A77, 0);
    let lambdas: Vec<f64> = (1..=50).map(f64::from).collect();
    let mut failures = Vec::new();
    let mut max_ratio = 0.0f64;
    let mut slopes = Vec::new();
    for k in 0..10 {
        let n = 2 + k % 2;
        let axes: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
        let center: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let e = Ellipsoid::new(center, random_rotation(n, &mut rng), axes).unwrap();
        let rows = dilation_sweep(&e, &lambdas).map_err(|e| e.to_string())?;
        let y: Vec<f64> = rows.iter().map(|r| r.ratio.abs()).collect();
        max_ratio = max_ratio.max(y.iter().cloned().fold(0.0, f64::max));
        let fit = linear_trend(&lambdas, &y).map_err(|e| e.to_string())?;
        // one-sided 95% upper confidence bound on the slope
        let t = StudentsT::new(0.0, 1.0, fit.dof as f64).unwrap().inverse_cdf(0.95);
        let upper = fit.slope + t * fit.slope_std_error;
        slopes.push(upper);
        if upper > 0.0 {
            failures.push(format!(
                "ellipsoid {k} (n={n}) slope {:.2e} ± {:.2e}",
                fit.slope, fit.slope_std_error
            ));
        }
    }
    let worst = slopes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    check(
        failures.is_empty() && max_ratio.is_finite(),
        format!(
            "hand oracles ok, 50 disk counts ok; 10 sweeps: max |Δ|/f(√n) = {max_ratio:.3}, largest slope upper bound {worst:.2e}{}",
            if failures.is_empty() { String::new() } else { format!("; increasing: {}", failures.join(", ")) }
        ),
    )
}

fn form_error(e: &Ellipsoid, q: &DMatrix<f64>, c: &[f64]) -> f64 {
    let dq = (e.quadratic_form() - q).amax() / q.amax();
    let dc = e.center().iter().zip(c).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    dq.max(dc)
}

fn john_oracles() -> Outcome {
    let eps = 1e-8;
    let pts = |p: &[[f64; 2]]| p.iter().map(|x| x.to_vec()).collect::<Vec<_>>();
    let fit = |p: &[[f64; 2]]| mvee(&pts(p), false, eps, DEFAULT_MAX_ITERATIONS).map_err(|e| e.to_string());
    let square = fit(&[[1.0, 1.0], [-1.0, 1.0], [1.0, -1.0], [-1.0, -1.0]])?;
    let d_square = form_error(&square.ellipsoid, &(DMatrix::identity(2, 2) * 0.5), &[0.0, 0.0]);
    let cross = fit(&[[2.0, 0.0], [-2.0, 0.0], [0.0, 1.0], [0.0, -1.0]])?;
    let d_cross = form_error(
        &cross.ellipsoid,
        &DMatrix::from_row_slice(2, 2, &[0.25, 0.0, 0.0, 1.0]),
        &[0.0, 0.0],
    );
    let tri = [[0.0, 0.0], [3.0, 1.0], [1.0, 2.0]];
    let (c, q) = oracle::steiner_circumellipse(tri);
    let d_tri = form_error(&fit(&tri)?.ellipsoid, &DMatrix::from_row_slice(2, 2, &q), &c);

    let cube: Vec<Vec<f64>> = (0..8u32)
        .map(|b| (0..3).map(|k| if b >> k & 1 == 1 { 1.0 } else { -1.0 }).collect())
        .collect();
    let s = john_sandwich(&cube, true, eps, None).map_err(|e| e.to_string())?;
    let m0 = &s.mean_curvatures[0].sharp;
    let bracket = m0.contains(24.0) && rel(m0.lower, 4.0 * PI) < 1e-6 && rel(m0.upper, 12.0 * PI) < 1e-6;

    // t E_K ⊆ cube ⊆ E_K
    let outer = &s.mvee.ellipsoid;
    let inner = outer.scaled(s.shrink).unwrap();
    let mut rng = stream(0x10C, 0);
    let mut chain_bad = 0;
    for p in boundary_samples(&inner, 10_000, &mut rng) {
        chain_bad += p.iter().any(|v| v.abs() > 1.0 + 1e-9) as usize;
    }
    for _ in 0..10_000 {
        let p: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..=1.0)).collect();
        chain_bad += (outer.form_value(&p) > 1.0 + 1e-9) as usize;
    }
    for v in &cube {
        chain_bad += (outer.form_value(v) > 1.0 + 1e-9) as usize;
    }
    check(
        d_square <= eps && d_cross <= eps && d_tri <= eps && bracket && chain_bad == 0,
        format!(
            "form errors square {d_square:.1e}, cross {d_cross:.1e}, triangle {d_tri:.1e} (tol {eps:.0e}); \
             cube M_0 in [{:.6}, {:.6}] contains 24: {bracket}; {chain_bad} containment failures",
            m0.lower, m0.upper
        ),
    )
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("ellmeasure-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let points = dir.join("points.csv");
    std::fs::write(&points, "0,0\n3,1\n1,2\n2,-1\n").map_err(|e| e.to_string())?;
    let points = points.to_str().unwrap().to_string();
    let runs: Vec<Vec<&str>> = vec![
        vec!["measures", "--axes", "1,1,2", "--rel-tol", "1e-8"],
        vec![
            "measures", "--axes", "3,2,1", "--method", "steiner", "--trials", "200000", "--seed", "1",
        ],
        vec!["measures", "--axes", "2,1,1", "--method", "surface"],
        vec!["bounds", "--axes", "3,2,1,0.5"],
        vec!["tube", "--axes", "2,1,0.5", "--rho", "0.7"],
        vec![
            "grassmann",
            "--axes",
            "1,1,2",
            "--r-flat",
            "2",
            "--trials",
            "200000",
            "--seed",
            "4",
        ],
        vec!["lattice", "--axes", "7.3,2.1,4.4", "--center", "0.1,0.2,0.3"],
        vec!["john", "--points", &points],
        vec![
            "sweep",
            "--kind",
            "dilation",
            "--axes",
            "1.7,0.9",
            "--lambda-max",
            "50",
            "--format",
            "csv",
        ],
        vec!["sweep", "--kind", "pinch", "--trials", "40", "--seed", "2"],
        vec![
            "sweep", "--kind", "tube", "--trials", "40", "--seed", "3", "--dims", "2,4", "--format", "csv",
        ],
    ];
    let exe = env!("CARGO_BIN_EXE_ellmeasure");
    let mut differ = Vec::new();
    for args in &runs {
        let a = Command::new(exe).args(args).output().map_err(|e| e.to_string())?;
        let b = Command::new(exe).args(args).output().map_err(|e| e.to_string())?;
        if !a.status.success() {
            return Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&a.stderr)));
        }
        if a.stdout != b.stdout {
            differ.push(args[0]);
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    check(
        differ.is_empty(),
        format!(
            "{} seeded commands run twice, {} differ {differ:?}",
            runs.len(),
            differ.len()
        ),
    )
}

fn main() {
    type Criterion = (&'static str, u64, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("sphere closed form", 10, sphere_closed_form),
        ("spheroid and ellipse oracles", 10, spheroid_and_ellipse),
        ("box polynomial identity", 1, box_polynomial_identity),
        ("pinch sandwich", 120, pinch_sandwich),
        ("monotonicity", 120, monotonicity),
        ("grassmann ratios", 60, grassmann_ratios),
        ("tube bounds", 120, tube_bounds),
        ("lattice discrepancy", 300, lattice_discrepancy),
        ("mvee and john sandwich", 30, john_oracles),
        ("determinism", 900, determinism),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (k, (name, budget, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = run();
        let elapsed = t.elapsed();
        let in_time = elapsed <= Duration::from_secs(*budget);
        let (ok, detail) = match outcome {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        failed += !ok as usize;
        let timing = if in_time {
            String::new()
        } else {
            format!(" over the {budget} s budget")
        };
        println!(
            "[{}] {:>2} {name}: {detail} ({:.2} s{timing})",
            if ok { "PASS" } else { "FAIL" },
            k + 1,
            elapsed.as_secs_f64()
        );
    }
    let total = start.elapsed();
    println!(
        "{} of {} criteria passed in {:.1} s",
        criteria.len() - failed,
        criteria.len(),
        total.as_secs_f64()
    );
    if failed > 0 || total > Duration::from_secs(900) {
        std::process::exit(1);
    }
}
