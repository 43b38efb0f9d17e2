//! Ellipsoids and rectangular boxes.

use crate::constants::kappa;
use crate::error::{GeometryError, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

const FRAME_TOLERANCE: f64 = 1e-12;
const SINGULAR_RATIO: f64 = 1e-12;

/// A solid ellipsoid `{x : Σ_k (f_k·(x - c))² / a_k² <= 1}`.
///
/// The columns `f_k` of `frame` are the principal directions; `semi_axes` are
/// kept sorted non-increasing, with the frame columns permuted to match.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EllipsoidRepr", into = "EllipsoidRepr")]
pub struct Ellipsoid {
    center: DVector<f64>,
    frame: DMatrix<f64>,
    semi_axes: Vec<f64>,
}

impl Ellipsoid {
    pub fn new(center: Vec<f64>, frame: DMatrix<f64>, semi_axes: Vec<f64>) -> Result<Self> {
        let n = semi_axes.len();
        if n == 0 {
            return Err(GeometryError::domain("ellipsoid needs at least one semi-axis"));
        }
        if center.len() != n || frame.nrows() != n || frame.ncols() != n {
            return Err(GeometryError::domain(format!(
                "dimension mismatch: {n} semi-axes, center of length {}, frame {}x{}",
                center.len(),
                frame.nrows(),
                frame.ncols()
            )));
        }
        if let Some(bad) = semi_axes.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(GeometryError::domain(format!(
                "semi-axes must be strictly positive and finite, got {bad}"
            )));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(GeometryError::domain("center coordinates must be finite"));
        }
        let gram = frame.transpose() * &frame;
        let defect = (gram - DMatrix::identity(n, n)).amax();
        if !(defect <= FRAME_TOLERANCE) {
            return Err(GeometryError::domain(format!(
                "frame is not orthonormal: max |FᵀF - I| = {defect:.3e} exceeds {FRAME_TOLERANCE:e}"
            )));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| semi_axes[j].total_cmp(&semi_axes[i]));
        let sorted_axes = order.iter().map(|&i| semi_axes[i]).collect();
        let sorted_frame = DMatrix::from_fn(n, n, |r, c| frame[(r, order[c])]);
        Ok(Ellipsoid {
            center: DVector::from_vec(center),
            frame: sorted_frame,
            semi_axes: sorted_axes,
        })
    }

    /// Origin-centered, principal directions along the coordinate axes.
    pub fn axis_aligned(semi_axes: Vec<f64>) -> Result<Self> {
        let n = semi_axes.len();
        Self::new(vec![0.0; n], DMatrix::identity(n, n), semi_axes)
    }

    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        Self::axis_aligned(vec![radius; dim])
    }

    pub fn dim(&self) -> usize {
        self.semi_axes.len()
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    pub fn semi_axes(&self) -> &[f64] {
        &self.semi_axes
    }

    /// Singular values `σ_i = 1/a_i` of a defining matrix.
    pub fn sigma(&self) -> Vec<f64> {
        self.semi_axes.iter().map(|a| 1.0 / a).collect()
    }

    /// Eigenvalues `λ_i = σ_i²` of the quadratic form.
    pub fn lambda(&self) -> Vec<f64> {
        self.semi_axes.iter().map(|a| 1.0 / (a * a)).collect()
    }

    pub fn is_axis_aligned(&self) -> bool {
        let n = self.dim();
        (0..n).all(|c| {
            let col = self.frame.column(c);
            col.iter().filter(|v| **v != 0.0).count() == 1
        })
    }

    pub fn volume(&self) -> f64 {
        ellipsoid_volume(self)
    }

    /// The symmetric matrix `Q` with `E = {x : (x-c)ᵀ Q (x-c) <= 1}`.
    pub fn quadratic_form(&self) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&DVector::from_iterator(self.dim(), self.lambda()));
        &self.frame * d * self.frame.transpose()
    }

    /// Coordinates of `x - c` in the principal frame.
    pub fn to_principal(&self, x: &[f64]) -> DVector<f64> {
        let diff = DVector::from_column_slice(x) - &self.center;
        self.frame.transpose() * diff
    }

    /// `Σ (f_k·(x-c))² / a_k²`; at most 1 exactly on the solid ellipsoid.
    pub fn form_value(&self, x: &[f64]) -> f64 {
        self.to_principal(x)
            .iter()
            .zip(&self.semi_axes)
            .map(|(y, a)| (y / a).powi(2))
            .sum()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.form_value(x) <= 1.0
    }

    /// `λ·E` about its own center.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(GeometryError::domain(format!(
                "scale factor must be positive, got {lambda}"
            )));
        }
        Ok(Ellipsoid {
            center: self.center.clone(),
            frame: self.frame.clone(),
            semi_axes: self.semi_axes.iter().map(|a| a * lambda).collect(),
        })
    }

    /// `R·E` for an orthogonal `R` (center rotated too).
    pub fn rotated(&self, rotation: &DMatrix<f64>) -> Result<Self> {
        Self::new(
            (rotation * &self.center).iter().copied().collect(),
            rotation * &self.frame,
            self.semi_axes.clone(),
        )
    }

    pub fn translated(&self, shift: &[f64]) -> Result<Self> {
        if shift.len() != self.dim() {
            return Err(GeometryError::domain("shift has the wrong dimension"));
        }
        let mut e = self.clone();
        e.center += DVector::from_column_slice(shift);
        Ok(e)
    }

    /// Half-widths of the axis-aligned bounding box: `√(Σ_k F_ik² a_k²)`.
    pub fn bounding_half_widths(&self) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|k| (self.frame[(i, k)] * self.semi_axes[k]).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect()
    }
}

/// The ellipsoid `{x : ‖Ax‖ <= 1}` of a non-singular matrix.
///
/// Semi-axes are the reciprocal singular values of `A`; the principal frame is
/// made of its right singular vectors.
pub fn ellipsoid_from_matrix(a: &DMatrix<f64>) -> Result<Ellipsoid> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(GeometryError::domain(format!(
            "defining matrix must be square and non-empty, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(GeometryError::domain("defining matrix has non-finite entries"));
    }
    let svd = a.clone().svd(false, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    if !(smin > SINGULAR_RATIO * smax) {
        return Err(GeometryError::degenerate(format!(
            "defining matrix is singular or near-singular (σ_min/σ_max = {:.3e})",
            smin / smax
        )));
    }
    let v_t = svd.v_t.expect("requested right singular vectors");
    let frame = v_t.transpose();
    let axes = sv.iter().map(|s| 1.0 / s).collect();
    // re-orthonormalize to absorb SVD round-off before the frame check
    let frame = frame.qr();
    let (q, r) = (frame.q(), frame.r());
    let signs = DMatrix::from_diagonal(&r.diagonal().map(|d| d.signum()));
    Ellipsoid::new(vec![0.0; n], q * signs, axes)
}

/// `κ_n · ∏ a_i`.
pub fn ellipsoid_volume(e: &Ellipsoid) -> f64 {
    kappa(e.dim()) * e.semi_axes.iter().product::<f64>()
}

#[derive(Serialize, Deserialize)]
struct EllipsoidRepr {
    dim: usize,
    center: Vec<f64>,
    /// row-major
    frame: Vec<f64>,
    semi_axes: Vec<f64>,
}

impl TryFrom<EllipsoidRepr> for Ellipsoid {
    type Error = GeometryError;

    fn try_from(r: EllipsoidRepr) -> Result<Self> {
        let n = r.dim;
        if r.frame.len() != n * n || r.semi_axes.len() != n {
            return Err(GeometryError::domain(format!(
                "ellipsoid of dim {n} needs {n} semi-axes and {} frame entries",
                n * n
            )));
        }
        Ellipsoid::new(r.center, DMatrix::from_row_slice(n, n, &r.frame), r.semi_axes)
    }
}

impl From<Ellipsoid> for EllipsoidRepr {
    fn from(e: Ellipsoid) -> Self {
        let n = e.dim();
        let frame = (0..n)
            .flat_map(|r| (0..n).map(move |c| (r, c)))
            .map(|(r, c)| e.frame[(r, c)])
            .collect();
        EllipsoidRepr {
            dim: n,
            center: e.center.iter().copied().collect(),
            frame,
            semi_axes: e.semi_axes,
        }
    }
}

/// A rectangular box `c + [-l_1/2, l_1/2] × … × [-l_n/2, l_n/2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CuboidRepr", into = "CuboidRepr")]
pub struct Cuboid {
    side_lengths: Vec<f64>,
    center: Vec<f64>,
}

impl Cuboid {
    pub fn new(side_lengths: Vec<f64>, center: Vec<f64>) -> Result<Self> {
        if side_lengths.is_empty() {
            return Err(GeometryError::domain("box needs at least one side"));
        }
        if center.len() != side_lengths.len() {
            return Err(GeometryError::domain("box center has the wrong dimension"));
        }
        if let Some(bad) = side_lengths.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(GeometryError::domain(format!(
                "side lengths must be strictly positive and finite, got {bad}"
            )));
        }
        Ok(Cuboid { side_lengths, center })
    }

    pub fn centered(side_lengths: Vec<f64>) -> Result<Self> {
        let n = side_lengths.len();
        Self::new(side_lengths, vec![0.0; n])
    }

    /// Box `[-a_1, a_1] × … × [-a_n, a_n]` circumscribing an axis-aligned
    /// ellipsoid with the same semi-axes.
    pub fn circumscribing(e: &Ellipsoid) -> Self {
        Cuboid {
            side_lengths: e.semi_axes().iter().map(|a| 2.0 * a).collect(),
            center: vec![0.0; e.dim()],
        }
    }

    pub fn dim(&self) -> usize {
        self.side_lengths.len()
    }

    pub fn side_lengths(&self) -> &[f64] {
        &self.side_lengths
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn volume(&self) -> f64 {
        self.side_lengths.iter().product()
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.center)
            .zip(&self.side_lengths)
            .map(|((x, c), l)| ((x - c).abs() - 0.5 * l).max(0.0).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Serialize, Deserialize)]
struct CuboidRepr {
    dim: usize,
    center: Vec<f64>,
    side_lengths: Vec<f64>,
}

impl TryFrom<CuboidRepr> for Cuboid {
    type Error = GeometryError;

    fn try_from(r: CuboidRepr) -> Result<Self> {
        if r.side_lengths.len() != r.dim {
            return Err(GeometryError::domain("box dim does not match its side lengths"));
        }
        Cuboid::new(r.side_lengths, r.center)
    }
}

impl From<Cuboid> for CuboidRepr {
    fn from(b: Cuboid) -> Self {
        CuboidRepr {
            dim: b.dim(),
            center: b.center,
            side_lengths: b.side_lengths,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn rotation2(t: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()])
    }

    #[test]
    fn semi_axes_from_singular_values() {
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 1.0 / 3.0]);
        let e = ellipsoid_from_matrix(&a).unwrap();
        assert_relative_eq!(e.semi_axes()[0], 3.0, epsilon = 1e-12);
        assert_relative_eq!(e.semi_axes()[1], 2.0, epsilon = 1e-12);

        let rotated = rotation2(0.7) * &a;
        let e = ellipsoid_from_matrix(&rotated).unwrap();
        assert_relative_eq!(e.semi_axes()[0], 3.0, epsilon = 1e-12);
        assert_relative_eq!(e.semi_axes()[1], 2.0, epsilon = 1e-12);

        let ball = ellipsoid_from_matrix(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(ball.semi_axes(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn frame_reproduces_defining_matrix() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 0.3, -0.2, 0.1, 2.0, 0.5, 0.0, -0.4, 0.7]);
        let e = ellipsoid_from_matrix(&a).unwrap();
        let q = a.transpose() * &a;
        assert!((e.quadratic_form() - q).amax() < 1e-12);
    }

    #[test]
    fn singular_matrix_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(ellipsoid_from_matrix(&a), Err(GeometryError::Degenerate(_))));
    }

    #[test]
    fn volumes() {
        let e = Ellipsoid::axis_aligned(vec![1.0, 2.0, 3.0]).unwrap();
        assert_relative_eq!(ellipsoid_volume(&e), 8.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(Ellipsoid::ball(2, 1.0).unwrap().volume(), PI);
        assert_relative_eq!(Ellipsoid::ball(2, 2.0).unwrap().volume(), 4.0 * PI);
    }

    #[test]
    fn axes_sorted_with_frame_permuted() {
        let e = Ellipsoid::axis_aligned(vec![1.0, 2.0]).unwrap();
        assert_eq!(e.semi_axes(), &[2.0, 1.0]);
        assert!(e.contains(&[0.0, 2.0]));
        assert!(!e.contains(&[1.5, 0.0]));
        assert!(e.contains(&[1.0, 0.0]));
    }

    #[test]
    fn invalid_inputs() {
        assert!(Ellipsoid::axis_aligned(vec![1.0, 0.0]).is_err());
        assert!(Ellipsoid::axis_aligned(vec![1.0, -2.0]).is_err());
        let skew = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(Ellipsoid::new(vec![0.0, 0.0], skew, vec![1.0, 1.0]).is_err());
        assert!(Cuboid::centered(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let e = Ellipsoid::new(vec![0.5, -1.0], rotation2(0.3), vec![1.0, 2.0]).unwrap();
        let text = serde_json::to_string(&e).unwrap();
        let back: Ellipsoid = serde_json::from_str(&text).unwrap();
        assert_eq!(e, back);
        let bad = r#"{"dim":2,"center":[0,0],"frame":[1,0,0,1],"semi_axes":[1,0]}"#;
        assert!(serde_json::from_str::<Ellipsoid>(bad).is_err());
        let b = Cuboid::centered(vec![2.0, 3.0]).unwrap();
        let back: Cuboid = serde_json::from_str(&serde_json::to_string(&b).unwrap()).unwrap();
        assert_eq!(b, back);
    }

    #[test]
    fn volume_frame_invariant() {
        let e = Ellipsoid::axis_aligned(vec![3.0, 0.5]).unwrap();
        for t in [0.1, 1.0, 2.5] {
            let r = e.rotated(&rotation2(t)).unwrap();
            assert_relative_eq!(r.volume(), e.volume(), max_relative = 1e-15);
        }
    }
}
