//! Command-line front end: argument parsing, dispatch and report assembly.
//!
//! `run` never prints; `main` writes the report and maps errors to exit codes.

pub mod args;
pub mod json;

pub use args::{Command, OutputFormat, RunConfig};

use args::*;
use ellmeasure_core::bounds::{pinch_bounds_all, tube_breakdown_radius, tube_constants};
use ellmeasure_core::geometry::Cuboid;
use ellmeasure_core::grassmann::{hit_measure_ratio, reference_ball};
use ellmeasure_core::lattice::{candidate_estimate, dilation_sweep, lattice_discrepancy, linear_trend};
use ellmeasure_core::measures::{
    box_mean_curvatures, ellipsoid_mean_curvatures_with, sphere_mean_curvatures, steiner_fit, QuadratureScheme,
};
use ellmeasure_core::rng::{log_uniform, random_rotation, stream};
use ellmeasure_core::{
    john_sandwich, parallel_area, parallel_volume, pinch_bounds, tube_area_bounds, tube_polynomial, tube_volume_bounds,
    Ellipsoid, GeometryError,
};
use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};
use std::path::Path;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("{0}")]
    Geometry(#[from] GeometryError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 validation, 3 numerical or convergence, 4 resource guard.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io(_) => 2,
            CliError::Geometry(e) => match e {
                GeometryError::Domain(_) | GeometryError::Degenerate(_) | GeometryError::Symmetry(_) => 2,
                GeometryError::Convergence { .. } | GeometryError::Numerical(_) | GeometryError::UndefinedRatio(_) => 3,
                GeometryError::Resource { .. } => 4,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn input_err(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

/// A finished report: JSON document or CSV table.
#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    Json(Value),
    Csv(String),
}

impl Report {
    pub fn render(&self) -> String {
        match self {
            Report::Json(v) => json::to_string_pretty(v),
            Report::Csv(s) => s.clone(),
        }
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

pub fn run(config: &RunConfig) -> CliResult<Report> {
    let command = &config.command;
    let format = command.output().format;
    let result = match command {
        Command::Measures(a) => measures(a)?,
        Command::Bounds(a) => bounds(a)?,
        Command::Tube(a) => tube(a)?,
        Command::Grassmann(a) => grassmann(a)?,
        Command::Lattice(a) => lattice(a)?,
        Command::John(a) => john(a)?,
        Command::Sweep(a) => return sweep(a, command),
    };
    match format {
        OutputFormat::Json => Ok(Report::Json(envelope(command, result))),
        OutputFormat::Csv => Ok(Report::Csv(flat_csv(&result)?)),
    }
}

fn envelope(command: &Command, result: Value) -> Value {
    let mut echo = to_value(command);
    // `{"measures": {...}}` -> `{...}`; the name is already in `command`.
    if let Value::Object(map) = &mut echo {
        if let Some(inner) = map.remove(command.name()) {
            echo = inner;
        }
    }
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": command.name(),
        "config_echo": echo,
        "result": result,
    })
}

/// Two-column `key,value` table of every scalar leaf, keys joined by dots.
fn flat_csv(v: &Value) -> CliResult<String> {
    fn walk(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
        let key = |k: &str| {
            if prefix.is_empty() {
                k.to_string()
            } else {
                format!("{prefix}.{k}")
            }
        };
        match v {
            Value::Object(m) => m.iter().for_each(|(k, x)| walk(&key(k), x, rows)),
            Value::Array(a) => a
                .iter()
                .enumerate()
                .for_each(|(k, x)| walk(&key(&k.to_string()), x, rows)),
            Value::Number(n) if n.is_f64() => rows.push((prefix.into(), json::format_float(n.as_f64().unwrap()))),
            Value::String(s) => rows.push((prefix.into(), s.clone())),
            other => rows.push((prefix.into(), other.to_string())),
        }
    }
    let mut rows = Vec::new();
    walk("", v, &mut rows);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["key", "value"]).map_err(csv_err)?;
    for (k, x) in rows {
        w.write_record([k, x]).map_err(csv_err)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| input_err(e.to_string()))?).expect("csv is utf-8"))
}

fn csv_err(e: csv::Error) -> CliError {
    input_err(format!("csv: {e}"))
}

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| input_err(format!("cannot read {}: {e}", path.display())))
}

fn check_finite(name: &str, xs: &[f64]) -> CliResult<()> {
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(input_err(format!("--{name} entries must be finite")));
    }
    Ok(())
}

/// Semi-axes (or side lengths), expanded from a single value when `--dim` is given.
fn axes_of(b: &BodyArgs) -> CliResult<Vec<f64>> {
    let axes = b.axes.clone().ok_or_else(|| input_err("--axes is required"))?;
    check_finite("axes", &axes)?;
    match (b.dim, axes.len()) {
        (Some(d), 1) => Ok(vec![axes[0]; d]),
        (Some(d), k) if k != d => Err(input_err(format!("--axes has {k} entries but --dim is {d}"))),
        _ => Ok(axes),
    }
}

fn center_of(center: &Option<Vec<f64>>, n: usize) -> CliResult<Vec<f64>> {
    match center {
        None => Ok(vec![0.0; n]),
        Some(c) if c.len() == n => {
            check_finite("center", c)?;
            Ok(c.clone())
        }
        Some(c) => Err(input_err(format!("--center has {} entries, expected {n}", c.len()))),
    }
}

fn frame_of(frame: &Option<Vec<f64>>, n: usize) -> CliResult<DMatrix<f64>> {
    match frame {
        None => Ok(DMatrix::identity(n, n)),
        Some(f) if f.len() == n * n => {
            check_finite("frame", f)?;
            Ok(DMatrix::from_row_slice(n, n, f))
        }
        Some(f) => Err(input_err(format!(
            "--frame has {} entries, expected n*n = {}",
            f.len(),
            n * n
        ))),
    }
}

fn ellipsoid_of(b: &BodyArgs) -> CliResult<Ellipsoid> {
    if let Some(path) = &b.input {
        return serde_json::from_str(&read_file(path)?)
            .map_err(|e| input_err(format!("{}: not a valid ellipsoid: {e}", path.display())));
    }
    let axes = axes_of(b)?;
    let n = axes.len();
    Ok(Ellipsoid::new(center_of(&b.center, n)?, frame_of(&b.frame, n)?, axes)?)
}

fn measures(a: &MeasuresArgs) -> CliResult<Value> {
    match a.shape {
        Shape::Box => {
            if a.body.frame.is_some() {
                return Err(input_err("--frame is not supported with --shape box"));
            }
            let sides = axes_of(&a.body)?;
            let n = sides.len();
            let b = Cuboid::new(sides, center_of(&a.body.center, n)?)?;
            match a.method {
                MeasureMethod::Steiner => Ok(to_value(&steiner_fit(&b, a.trials, a.seed, None)?)),
                _ => Ok(json!({ "body": b, "mean_curvatures": box_mean_curvatures(&b) })),
            }
        }
        Shape::Sphere => {
            let axes = axes_of(&a.body)?;
            if axes.iter().any(|&x| x != axes[0]) {
                return Err(input_err("--shape sphere needs equal axes"));
            }
            Ok(json!({ "radius": axes[0], "mean_curvatures": sphere_mean_curvatures(axes[0], axes.len())? }))
        }
        Shape::Ellipsoid => {
            let e = ellipsoid_of(&a.body)?;
            match a.method {
                MeasureMethod::Steiner => Ok(to_value(&steiner_fit(&e, a.trials, a.seed, None)?)),
                MeasureMethod::Quadrature | MeasureMethod::Surface => {
                    let scheme = if a.method == MeasureMethod::Surface {
                        QuadratureScheme::Surface
                    } else {
                        QuadratureScheme::GaussMap
                    };
                    let m = ellipsoid_mean_curvatures_with(&e, a.rel_tol, scheme)?;
                    Ok(json!({
                        "body": e,
                        "scheme": scheme,
                        "volume": e.volume(),
                        "values": m.values,
                        "mean_curvatures": m,
                    }))
                }
            }
        }
    }
}

fn bounds(a: &BoundsArgs) -> CliResult<Value> {
    let e = ellipsoid_of(&a.body)?;
    let intervals = match a.index {
        Some(i) => vec![pinch_bounds(&e, i)?],
        None => pinch_bounds_all(&e),
    };
    let m = ellipsoid_mean_curvatures_with(&e, a.rel_tol, QuadratureScheme::GaussMap)?;
    let rows: Vec<Value> = intervals
        .iter()
        .map(|b| {
            let i = match b.quantity {
                ellmeasure_core::BoundQuantity::MeanCurvature { index } => index,
                _ => unreachable!("pinch bounds are per index"),
            };
            json!({ "bound": b, "quadrature": m.values[i], "inside": b.contains(m.values[i]) })
        })
        .collect();
    Ok(json!({ "body": e, "bounds": rows }))
}

fn tube(a: &TubeArgs) -> CliResult<Value> {
    let e = ellipsoid_of(&a.body)?;
    let m = ellipsoid_mean_curvatures_with(&e, a.rel_tol, QuadratureScheme::GaussMap)?;
    let area = tube_area_bounds(&e, a.rho)?;
    let volume = tube_volume_bounds(&e, a.rho)?;
    let poly = tube_polynomial(&e);
    let true_area = parallel_area(&m, a.rho)?;
    let true_volume = parallel_volume(e.volume(), &m, a.rho)?;
    Ok(json!({
        "body": e,
        "rho": a.rho,
        "f_coefficients": poly.f_coefficients(),
        "f_rho": poly.eval(a.rho),
        "area_bounds": area,
        "volume_bounds": volume,
        "parallel_area": true_area,
        "parallel_volume": true_volume,
        "area_inside": area.contains(true_area),
        "volume_inside": volume.contains(true_volume),
        "breakdown_radius": tube_breakdown_radius(&e, &m)?,
    }))
}

fn grassmann(a: &GrassmannArgs) -> CliResult<Value> {
    let e1 = ellipsoid_of(&a.body)?;
    let n = e1.dim();
    let reference = a.reference_axes.clone().unwrap_or_else(|| vec![1.0; n]);
    if reference.len() != n {
        return Err(input_err(format!(
            "--reference-axes has {} entries, expected {n}",
            reference.len()
        )));
    }
    check_finite("reference-axes", &reference)?;
    let e2 = Ellipsoid::axis_aligned(reference)?;
    if a.r_flat == 0 || a.r_flat >= n {
        return Err(input_err(format!("--r-flat must satisfy 1 <= r <= n-1 = {}", n - 1)));
    }
    let est = hit_measure_ratio(&e1, &e2, a.r_flat, a.trials, a.seed)?;
    let index = a.r_flat - 1;
    let m1 = ellipsoid_mean_curvatures_with(&e1, a.rel_tol, QuadratureScheme::GaussMap)?;
    let m2 = ellipsoid_mean_curvatures_with(&e2, a.rel_tol, QuadratureScheme::GaussMap)?;
    let exact = m1.values[index] / m2.values[index];
    Ok(json!({
        "body": e1,
        "reference": e2,
        "reference_radius": reference_ball(&e1, &e2).1,
        "r_flat": a.r_flat,
        "mean_curvature_index": index,
        "estimate": est,
        "quadrature_ratio": exact,
        "z_score": if est.std_error > 0.0 { (est.ratio - exact) / est.std_error } else { 0.0 },
    }))
}

fn lattice(a: &LatticeArgs) -> CliResult<Value> {
    let e = ellipsoid_of(&a.body)?;
    let report = lattice_discrepancy(&e)?;
    Ok(json!({
        "body": e,
        "candidates": candidate_estimate(&e),
        "count": report.count,
        "report": report,
    }))
}

/// Points from a JSON array of arrays, or CSV rows without a header.
pub fn read_points(path: &Path) -> CliResult<Vec<Vec<f64>>> {
    let text = read_file(path)?;
    let trimmed = text.trim_start();
    let points: Vec<Vec<f64>> = if trimmed.starts_with('[') {
        serde_json::from_str(trimmed).map_err(|e| input_err(format!("{}: {e}", path.display())))?
    } else {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut pts = Vec::new();
        for (row, rec) in r.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let p = rec
                .iter()
                .map(|f| f.parse::<f64>())
                .collect::<Result<Vec<f64>, _>>()
                .map_err(|e| input_err(format!("{} row {}: {e}", path.display(), row + 1)))?;
            pts.push(p);
        }
        pts
    };
    for p in &points {
        check_finite("points", p)?;
    }
    Ok(points)
}

fn john(a: &JohnArgs) -> CliResult<Value> {
    if !(a.epsilon > 0.0) {
        return Err(input_err("--epsilon must be positive"));
    }
    let points = read_points(&a.points)?;
    let s = john_sandwich(&points, a.symmetric, a.epsilon, a.mean_curvatures.as_deref())?;
    Ok(json!({ "points": points.len(), "sandwich": s }))
}

fn random_ellipsoid<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CliResult<Ellipsoid> {
    let axes: Vec<f64> = (0..n).map(|_| log_uniform(0.1, 10.0, rng)).collect();
    let frame = random_rotation(n, rng);
    Ok(Ellipsoid::new(vec![0.0; n], frame, axes)?)
}

fn sweep(a: &SweepArgs, command: &Command) -> CliResult<Report> {
    if a.dims.len() != 2 || a.dims[0] < 2 || a.dims[0] > a.dims[1] {
        return Err(input_err("--dims must be `lo,hi` with 2 <= lo <= hi"));
    }
    let rows: Vec<Value> = match a.kind {
        SweepKind::Dilation => {
            let axes = a
                .axes
                .clone()
                .ok_or_else(|| input_err("--kind dilation needs --axes"))?;
            check_finite("axes", &axes)?;
            let n = axes.len();
            let e = Ellipsoid::new(center_of(&a.center, n)?, frame_of(&a.frame, n)?, axes)?;
            if a.lambda_max == 0 {
                return Err(input_err("--lambda-max must be at least 1"));
            }
            let lambdas: Vec<f64> = (1..=a.lambda_max).map(f64::from).collect();
            let rows = dilation_sweep(&e, &lambdas)?;
            if a.output.format == OutputFormat::Csv {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record([
                    "lambda",
                    "count",
                    "volume",
                    "discrepancy",
                    "f_sqrt_n",
                    "ratio",
                    "f_half_sqrt_n",
                    "ratio_half",
                ])
                .map_err(csv_err)?;
                for r in &rows {
                    let f = json::format_float;
                    w.write_record([
                        f(r.lambda),
                        r.count.to_string(),
                        f(r.volume),
                        f(r.discrepancy),
                        f(r.f_sqrt_n),
                        f(r.ratio),
                        f(r.f_half_sqrt_n),
                        f(r.ratio_half),
                    ])
                    .map_err(csv_err)?;
                }
                let bytes = w.into_inner().map_err(|e| input_err(e.to_string()))?;
                return Ok(Report::Csv(String::from_utf8(bytes).expect("csv is utf-8")));
            }
            let x: Vec<f64> = rows.iter().map(|r| r.lambda).collect();
            let y: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
            let trend = if rows.len() >= 3 {
                Some(linear_trend(&x, &y)?)
            } else {
                None
            };
            let max_ratio = y.iter().fold(0.0f64, |m, r| m.max(r.abs()));
            return Ok(Report::Json(envelope(
                command,
                json!({ "body": e, "rows": rows, "trend": trend, "max_abs_ratio": max_ratio }),
            )));
        }
        SweepKind::Pinch | SweepKind::Tube => {
            let mut rng = stream(a.seed, 0);
            let mut out = Vec::with_capacity(a.trials);
            for trial in 0..a.trials {
                let n = rng.random_range(a.dims[0]..=a.dims[1]);
                let e = random_ellipsoid(n, &mut rng)?;
                let m = ellipsoid_mean_curvatures_with(&e, a.rel_tol, QuadratureScheme::GaussMap)?;
                let s1: f64 = e.semi_axes().iter().sum();
                if a.kind == SweepKind::Pinch {
                    for (i, b) in pinch_bounds_all(&e).iter().enumerate() {
                        out.push(json!({
                            "trial": trial, "dim": n, "index": i,
                            "lower": b.lower, "value": m.values[i], "upper": b.upper,
                            "ratio": b.upper / b.lower, "inside": b.contains(m.values[i]),
                        }));
                    }
                } else {
                    let (c, big_c) = tube_constants(n);
                    let breakdown = tube_breakdown_radius(&e, &m)?;
                    for scale in [0.1, 0.5, 1.0] {
                        let rho = scale * s1 / n as f64;
                        let b = tube_area_bounds(&e, rho)?;
                        let area = parallel_area(&m, rho)?;
                        out.push(json!({
                            "trial": trial, "dim": n, "rho": rho,
                            "lower": b.lower, "value": area, "upper": b.upper,
                            "c": c, "C": big_c, "inside": b.contains(area),
                            "breakdown_radius": breakdown, "breakdown_over_s1": breakdown / s1,
                        }));
                    }
                }
            }
            out
        }
    };
    match a.output.format {
        OutputFormat::Json => {
            let inside = rows.iter().filter(|r| r["inside"] == Value::Bool(true)).count();
            Ok(Report::Json(envelope(
                command,
                json!({ "rows": rows.len(), "inside": inside, "all_inside": inside == rows.len(), "data": rows }),
            )))
        }
        OutputFormat::Csv => Ok(Report::Csv(rows_csv(&rows)?)),
    }
}

/// Rows of flat objects sharing the first row's keys.
fn rows_csv(rows: &[Value]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if let Some(Value::Object(first)) = rows.first() {
        let keys: Vec<&String> = first.keys().collect();
        w.write_record(keys.iter().map(|k| k.as_str())).map_err(csv_err)?;
        for r in rows {
            let cells = keys.iter().map(|k| match &r[k.as_str()] {
                Value::Number(x) if x.is_f64() => json::format_float(x.as_f64().unwrap()),
                Value::Null => String::new(),
                v => v.to_string(),
            });
            w.write_record(cells).map_err(csv_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| input_err(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}
