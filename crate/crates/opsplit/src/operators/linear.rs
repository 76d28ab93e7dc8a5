//! Monotone linear maps and their resolvents.

use super::AveragedMap;
use crate::constants::Alpha;
use crate::error::{Error, Result};
use crate::Point;
use nalgebra::{DMatrix, LU};
use std::sync::Arc;

/// Tolerance on the smallest eigenvalue of the symmetric part: matrices
/// whose symmetric part dips below `-MONOTONE_EIG_TOL` are rejected.
const MONOTONE_EIG_TOL: f64 = 1e-10;

/// A linear map `x -> M x` whose symmetric part is positive semidefinite,
/// i.e. a (maximally) monotone linear operator. Skew parts are allowed.
#[derive(Clone, Debug)]
pub struct MonotoneLinear {
    matrix: DMatrix<f64>,
}

impl MonotoneLinear {
    /// Validates monotonicity: the matrix must be square with finite
    /// entries, and the smallest eigenvalue of `(M + M^T)/2` must be at
    /// least `-1e-10`.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        if matrix.nrows() == 0 {
            return Err(Error::EmptyInput("monotone linear map needs a nonempty matrix"));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("monotone linear map"));
        }
        let sym = (&matrix + matrix.transpose()) * 0.5;
        let eigs = sym.symmetric_eigenvalues();
        let min_eig = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -MONOTONE_EIG_TOL {
            return Err(Error::NotMonotone(min_eig));
        }
        Ok(MonotoneLinear { matrix })
    }

    /// Ambient dimension.
    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    /// The underlying matrix.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Applies the map.
    pub fn apply(&self, x: &Point) -> Point {
        &self.matrix * x
    }

    /// Resolvent `(Id + gamma M)^{-1} y`, by a dense LU solve.
    ///
    /// Monotonicity makes `Id + gamma M` nonsingular for every positive
    /// `gamma`, so a failed or untrustworthy solve indicates scaling so
    /// extreme that the factorization lost the problem; it is reported
    /// rather than silently returned.
    pub fn resolvent(&self, gamma: f64, y: &Point) -> Result<Point> {
        let lu = self.resolvent_factorization(gamma)?;
        Self::solve_checked(&lu, gamma, y)
    }

    /// The resolvent as an averaged map, with the system matrix factorized
    /// once up front. Resolvents of monotone operators are firmly
    /// nonexpansive, so the constant is 1/2.
    pub fn resolvent_map(&self, gamma: f64) -> Result<AveragedMap> {
        let lu = Arc::new(self.resolvent_factorization(gamma)?);
        // Probe the factorization so that evaluation cannot fail later.
        Self::solve_checked(&lu, gamma, &Point::zeros(self.dimension()))?;
        Ok(AveragedMap::from_fn(self.dimension(), Alpha::half(), move |y| {
            lu.solve(y).expect("factorization was validated at construction")
        }))
    }

    fn resolvent_factorization(&self, gamma: f64) -> Result<LU<f64, nalgebra::Dyn, nalgebra::Dyn>> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "resolvent step must be positive, got {gamma}"
            )));
        }
        let n = self.dimension();
        let system = DMatrix::identity(n, n) + &self.matrix * gamma;
        let lu = system.lu();
        // Conditioning guard: a vanishing pivot relative to the largest one
        // means the solve would amplify rounding beyond ~1e12.
        let u_diag: Vec<f64> = (0..n).map(|i| lu.u()[(i, i)].abs()).collect();
        let max_pivot = u_diag.iter().cloned().fold(0.0, f64::max);
        let min_pivot = u_diag.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_pivot <= 1e-12 * max_pivot || max_pivot == 0.0 {
            return Err(Error::SolverFailure(format!(
                "resolvent system at gamma = {gamma} is numerically singular (pivot ratio {:e})",
                min_pivot / max_pivot
            )));
        }
        Ok(lu)
    }

    fn solve_checked(
        lu: &LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
        gamma: f64,
        y: &Point,
    ) -> Result<Point> {
        lu.solve(y).ok_or_else(|| {
            Error::SolverFailure(format!("resolvent solve failed at gamma = {gamma}"))
        })
    }
}
