//! Integral mean curvatures `M_0, …, M_{n-1}` of convex surfaces.
//!
//! `M_i = ∫ m_i dA` where `binom(n-1, i)·m_i` is the `i`-th elementary
//! symmetric function of the principal curvatures. `M_0` is the surface area
//! and `M_{n-1} = ω_{n-1}` for every convex body.
//!
//! Four independent routes are provided: the sphere closed form, the box
//! formula, deterministic quadrature for ellipsoids, and a Monte Carlo fit of
//! the Steiner polynomial for any body that can report its distance function.

mod gauss;
mod quadrature;
mod steiner;

pub use quadrature::{
    ellipsoid_mean_curvatures_quadrature, ellipsoid_mean_curvatures_surface, ellipsoid_mean_curvatures_with,
    QuadratureScheme, MAX_ASPECT_RATIO, MAX_SURFACE_DIM,
};
pub use steiner::{
    ellipsoid_distance, steiner_fit, steiner_fit_mean_curvatures, ConvexBodyProbe, SteinerFit, MIN_STEINER_SAMPLES,
};

use crate::constants::{binomial, omega};
use crate::error::{GeometryError, Result};
use crate::geometry::Cuboid;
use crate::symmetric::sym_elem_all;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    ClosedFormSphere,
    BoxFormula,
    Quadrature,
    SteinerMonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanCurvatures {
    pub dim: usize,
    /// `M_0 ..= M_{n-1}`; `M_i` carries units of length^(n-1-i).
    pub values: Vec<f64>,
    pub method: Method,
    /// Absolute error per entry: a bound for the deterministic routes, one
    /// standard error for the Monte Carlo route.
    pub error_estimate: Option<Vec<f64>>,
}

impl MeanCurvatures {
    pub fn surface_area(&self) -> f64 {
        self.values[0]
    }

    /// Relative error of entry `i`, zero when no estimate is attached.
    pub fn relative_error(&self, i: usize) -> f64 {
        self.error_estimate
            .as_ref()
            .map_or(0.0, |e| e[i] / self.values[i].abs())
    }
}

/// `M_i = ω_{n-1} r^{n-1-i}`: every principal curvature of the sphere is `1/r`.
pub fn sphere_mean_curvatures(radius: f64, dim: usize) -> Result<MeanCurvatures> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(GeometryError::domain(format!("radius must be positive, got {radius}")));
    }
    if dim < 2 {
        return Err(GeometryError::domain(format!("sphere needs dim >= 2, got {dim}")));
    }
    let area = omega(dim - 1);
    Ok(MeanCurvatures {
        dim,
        values: (0..dim).map(|i| area * radius.powi((dim - 1 - i) as i32)).collect(),
        method: Method::ClosedFormSphere,
        error_estimate: None,
    })
}

/// `binom(n-1, i)·M_i = ω_i · s_{n-1-i}(l_1, …, l_n)`.
///
/// Faces of dimension `n-1-i` carry normal cones covering `ω_i / 2^{i+1}` of a
/// great `i`-sphere, and there are `2^{i+1}` translates of each.
pub fn box_mean_curvatures(b: &Cuboid) -> MeanCurvatures {
    let n = b.dim();
    let s = sym_elem_all(b.side_lengths());
    MeanCurvatures {
        dim: n,
        values: (0..n).map(|i| omega(i) * s[n - 1 - i] / binomial(n - 1, i)).collect(),
        method: Method::BoxFormula,
        error_estimate: None,
    }
}
