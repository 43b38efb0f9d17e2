//! Integral mean curvatures, parallel bodies and lattice counts of ellipsoids.
//!
//! Every quantity comes with an independent way of checking it: closed forms
//! for balls and boxes, two quadrature schemes, a Steiner-polynomial Monte
//! Carlo fit, random affine flats, exhaustive lattice enumeration and an
//! enclosing-ellipsoid solver.

pub mod bounds;
pub mod constants;
pub mod error;
pub mod geometry;
pub mod grassmann;
pub mod john;
pub mod lattice;
pub mod measures;
pub mod rng;
pub mod symmetric;

pub use bounds::{
    parallel_area, parallel_volume, pinch_bounds, tube_area_bounds, tube_polynomial, tube_volume_bounds, BoundInterval,
    BoundQuantity, TubePolynomial,
};
pub use constants::{binomial, kappa, omega, DimensionalConstants};
pub use error::{GeometryError, Result};
pub use geometry::{ellipsoid_from_matrix, ellipsoid_volume, Cuboid, Ellipsoid};
pub use grassmann::{flat_hits_ellipsoid, hit_measure_ratio, sample_flat, AffineFlat, HitEstimate, HitRatio};
pub use john::{john_sandwich, mvee, JohnSandwich, MveeResult};
pub use lattice::{lattice_count, lattice_discrepancy, LatticeReport};
pub use measures::{
    box_mean_curvatures, ellipsoid_mean_curvatures_quadrature, sphere_mean_curvatures, steiner_fit_mean_curvatures,
    MeanCurvatures, Method,
};
pub use symmetric::{sym_elem, sym_elem_all};
