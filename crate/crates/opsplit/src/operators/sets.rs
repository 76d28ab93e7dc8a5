//! Closed convex sets with exact projection formulas.

use super::AveragedMap;
use crate::constants::Alpha;
use crate::error::{Error, Result};
use crate::{ensure_finite, Point};
use nalgebra::DMatrix;
use std::sync::Arc;

/// A closed convex set whose metric projection has a closed form.
#[derive(Clone, Debug)]
pub enum SetDescriptor {
    /// Axis-aligned box `{ x : lower <= x <= upper }` (componentwise).
    Box {
        /// Lower corner.
        lower: Point,
        /// Upper corner.
        upper: Point,
    },
    /// Euclidean ball of the given center and radius.
    Ball {
        /// Center point.
        center: Point,
        /// Radius (positive).
        radius: f64,
    },
    /// Halfspace `{ x : <normal, x> <= offset }`.
    Halfspace {
        /// Outward normal (nonzero).
        normal: Point,
        /// Right-hand side.
        offset: f64,
    },
    /// Affine subspace `{ point + span(basis) }`, stored with an
    /// orthonormal basis.
    Affine {
        /// Orthonormal basis of the direction space, one column per vector.
        basis: DMatrix<f64>,
        /// A point on the subspace.
        point: Point,
    },
}

impl SetDescriptor {
    /// Builds a box, rejecting corners that are non-finite or out of order.
    pub fn box_set(lower: Point, upper: Point) -> Result<Self> {
        ensure_finite(&lower, "box lower corner")?;
        ensure_finite(&upper, "box upper corner")?;
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch { expected: lower.len(), got: upper.len() });
        }
        if lower.iter().zip(upper.iter()).any(|(l, u)| l > u) {
            return Err(Error::InvalidSpec("box has lower > upper in some coordinate".into()));
        }
        Ok(SetDescriptor::Box { lower, upper })
    }

    /// Builds a ball, rejecting nonpositive radii.
    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        ensure_finite(&center, "ball center")?;
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidSpec(format!("ball radius must be positive, got {radius}")));
        }
        Ok(SetDescriptor::Ball { center, radius })
    }

    /// Builds a halfspace `<normal, x> <= offset`, rejecting zero normals.
    pub fn halfspace(normal: Point, offset: f64) -> Result<Self> {
        ensure_finite(&normal, "halfspace normal")?;
        if !offset.is_finite() {
            return Err(Error::NonFinite("halfspace offset"));
        }
        if normal.norm() == 0.0 {
            return Err(Error::InvalidSpec("halfspace normal must be nonzero".into()));
        }
        Ok(SetDescriptor::Halfspace { normal, offset })
    }

    /// Builds an affine subspace from a point and spanning columns.
    ///
    /// The columns are orthonormalized once here (modified Gram-Schmidt with
    /// a second re-orthogonalization pass); columns that are linearly
    /// dependent beyond a 1e-12 relative tolerance are rejected.
    pub fn affine(basis: DMatrix<f64>, point: Point) -> Result<Self> {
        ensure_finite(&point, "affine base point")?;
        if basis.nrows() != point.len() {
            return Err(Error::DimensionMismatch { expected: point.len(), got: basis.nrows() });
        }
        if basis.ncols() == 0 || basis.ncols() > basis.nrows() {
            return Err(Error::InvalidSpec(format!(
                "affine basis must have between 1 and {} columns, got {}",
                basis.nrows(),
                basis.ncols()
            )));
        }
        if basis.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("affine basis"));
        }
        let mut q = basis.clone();
        for j in 0..q.ncols() {
            let original_norm = basis.column(j).norm();
            for _pass in 0..2 {
                for i in 0..j {
                    let proj = q.column(i).dot(&q.column(j));
                    let qi = q.column(i).clone_owned();
                    let mut col_j = q.column_mut(j);
                    col_j.axpy(-proj, &qi, 1.0);
                }
            }
            let norm = q.column(j).norm();
            if norm <= 1e-12 * original_norm.max(1.0) {
                return Err(Error::InvalidSpec(format!(
                    "affine basis column {j} is linearly dependent on the previous columns"
                )));
            }
            q.column_mut(j).scale_mut(1.0 / norm);
        }
        Ok(SetDescriptor::Affine { basis: q, point })
    }

    /// Ambient dimension.
    pub fn dimension(&self) -> usize {
        match self {
            SetDescriptor::Box { lower, .. } => lower.len(),
            SetDescriptor::Ball { center, .. } => center.len(),
            SetDescriptor::Halfspace { normal, .. } => normal.len(),
            SetDescriptor::Affine { point, .. } => point.len(),
        }
    }

    /// Metric projection of `x` onto the set.
    pub fn project(&self, x: &Point) -> Result<Point> {
        if x.len() != self.dimension() {
            return Err(Error::DimensionMismatch { expected: self.dimension(), got: x.len() });
        }
        Ok(match self {
            SetDescriptor::Box { lower, upper } => Point::from_iterator(
                x.len(),
                x.iter()
                    .zip(lower.iter().zip(upper.iter()))
                    .map(|(v, (l, u))| v.max(*l).min(*u)),
            ),
            SetDescriptor::Ball { center, radius } => {
                let d = x - center;
                let dist = d.norm();
                if dist <= *radius {
                    x.clone()
                } else {
                    center + d * (*radius / dist)
                }
            }
            SetDescriptor::Halfspace { normal, offset } => {
                let slack = normal.dot(x) - offset;
                if slack <= 0.0 {
                    x.clone()
                } else {
                    x - normal * (slack / normal.norm_squared())
                }
            }
            SetDescriptor::Affine { basis, point } => {
                let shifted = x - point;
                point + basis * (basis.transpose() * shifted)
            }
        })
    }

    /// Euclidean distance from `x` to the set.
    pub fn distance(&self, x: &Point) -> Result<f64> {
        Ok((self.project(x)? - x).norm())
    }

    /// Whether `x` lies within `tol` of the set.
    pub fn contains(&self, x: &Point, tol: f64) -> Result<bool> {
        Ok(self.distance(x)? <= tol)
    }

    /// The projection as an averaged map. Projections onto closed convex
    /// sets are firmly nonexpansive, so the constant is 1/2.
    pub fn projector(&self) -> AveragedMap {
        let set = Arc::new(self.clone());
        AveragedMap::from_fn(self.dimension(), Alpha::half(), move |x| {
            set.project(x).expect("projector dimension is validated by AveragedMap::evaluate")
        })
    }
}

/// Distances from `x` to each of the given sets.
pub fn distance_to_sets(sets: &[SetDescriptor], x: &Point) -> Result<Vec<f64>> {
    sets.iter().map(|s| s.distance(x)).collect()
}
