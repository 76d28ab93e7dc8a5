//! Averaged operators and the combinators that preserve averagedness.
//!
//! An [`AveragedMap`] bundles an evaluation function with its averagedness
//! constant and remembers how it was built. The combinators [`relax`],
//! [`compose`], and [`combine`] propagate constants through the scalar
//! calculus in [`crate::constants`], so the constant stored on a composite
//! map is always the sharp one.

mod linear;
mod prox;
mod sets;
mod smooth;
mod verify;

pub use linear::MonotoneLinear;
pub use prox::{l1_prox_map, soft_threshold};
pub use sets::{distance_to_sets, SetDescriptor};
pub use smooth::{gradient_step, SmoothFunction};
pub use verify::{verify_averaged, VerifyReport, VERIFY_TOLERANCE};

use crate::constants::{combination_constant, compose_constant, relaxed_constant, Alpha, Weights};
use crate::error::{Error, Result};
use crate::Point;
use std::fmt;
use std::sync::Arc;

/// How an [`AveragedMap`] was built.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// A leaf operator (projection, proximity operator, resolvent, ...).
    Atomic,
    /// A product of averaged maps.
    Composed,
    /// A convex combination of averaged maps.
    Combined,
    /// A relaxation `x + lambda (T x - x)` of another averaged map.
    Relaxed,
}

#[derive(Clone)]
enum MapKind {
    Atomic(Arc<dyn Fn(&Point) -> Point + Send + Sync>),
    /// Factors in application order from the outside in: the *last* factor
    /// is applied to the input first.
    Composed(Arc<[AveragedMap]>),
    Combined { weights: Arc<[f64]>, maps: Arc<[AveragedMap]> },
    Relaxed { lambda: f64, inner: Arc<AveragedMap> },
}

/// A nonexpansive operator together with its averagedness constant.
///
/// Cloning is cheap: evaluation state is shared behind `Arc`s.
#[derive(Clone)]
pub struct AveragedMap {
    dim: usize,
    alpha: Alpha,
    kind: MapKind,
}

impl AveragedMap {
    /// Wraps a raw evaluation function, trusting the caller's constant.
    ///
    /// The constant is *declared*, not proven; [`verify_averaged`] can
    /// falsify a wrong declaration by sampling.
    pub fn from_fn<F>(dim: usize, alpha: Alpha, eval: F) -> Self
    where
        F: Fn(&Point) -> Point + Send + Sync + 'static,
    {
        AveragedMap { dim, alpha, kind: MapKind::Atomic(Arc::new(eval)) }
    }

    /// The identity map. It satisfies the averagedness inequalities for
    /// every constant; we store 1/2.
    pub fn identity(dim: usize) -> Self {
        AveragedMap::from_fn(dim, Alpha::half(), |x| x.clone())
    }

    /// Ambient dimension of the operator's domain.
    pub fn dimension(&self) -> usize {
        self.dim
    }

    /// The stored averagedness constant.
    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    /// How this map was built.
    pub fn provenance(&self) -> Provenance {
        match &self.kind {
            MapKind::Atomic(_) => Provenance::Atomic,
            MapKind::Composed(_) => Provenance::Composed,
            MapKind::Combined { .. } => Provenance::Combined,
            MapKind::Relaxed { .. } => Provenance::Relaxed,
        }
    }

    /// The factor list of a composed map (outermost first), when this map
    /// is a composition. Iteration engines use this to inject per-factor
    /// errors.
    pub fn factors(&self) -> Option<&[AveragedMap]> {
        match &self.kind {
            MapKind::Composed(factors) => Some(factors),
            _ => None,
        }
    }

    /// Applies the operator.
    ///
    /// # Panics
    ///
    /// Panics if `x` does not match the operator's dimension; dimensions are
    /// validated when operators and iterations are assembled, so a mismatch
    /// here is a programming error.
    pub fn evaluate(&self, x: &Point) -> Point {
        assert_eq!(x.len(), self.dim, "operator of dimension {} applied to point of dimension {}", self.dim, x.len());
        match &self.kind {
            MapKind::Atomic(eval) => eval(x),
            MapKind::Composed(factors) => {
                let mut value = factors.last().expect("compositions are nonempty").evaluate(x);
                for factor in factors[..factors.len() - 1].iter().rev() {
                    value = factor.evaluate(&value);
                }
                value
            }
            MapKind::Combined { weights, maps } => {
                let mut acc = Point::zeros(self.dim);
                for (w, map) in weights.iter().zip(maps.iter()) {
                    acc.axpy(*w, &map.evaluate(x), 1.0);
                }
                acc
            }
            MapKind::Relaxed { lambda, inner } => {
                let tx = inner.evaluate(x);
                x + *lambda * (tx - x)
            }
        }
    }

    /// Norm of the displacement `T x - x`; zero exactly at fixed points.
    pub fn residual(&self, x: &Point) -> f64 {
        (self.evaluate(x) - x).norm()
    }
}

impl fmt::Debug for AveragedMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AveragedMap")
            .field("dim", &self.dim)
            .field("alpha", &self.alpha.get())
            .field("provenance", &self.provenance())
            .finish()
    }
}

/// Relaxation `x -> x + lambda (T x - x)`.
///
/// Admissible for `lambda` in the open interval `]0, 1/alpha[`;
/// overrelaxation (`lambda > 1`) is allowed as long as the product
/// `lambda * alpha` stays below one, and that product is the new constant.
/// `lambda = 1` returns the operator unchanged.
pub fn relax(t: &AveragedMap, lambda: f64) -> Result<AveragedMap> {
    if lambda == 1.0 {
        return Ok(t.clone());
    }
    let alpha = relaxed_constant(t.alpha, lambda)?;
    Ok(AveragedMap {
        dim: t.dim,
        alpha,
        kind: MapKind::Relaxed { lambda, inner: Arc::new(t.clone()) },
    })
}

/// Composition `t[0] . t[1] . ... . t[m-1]` (the last factor is applied
/// first). The stored constant is the sharp product constant from
/// [`compose_constant`]. A single factor is returned unchanged.
pub fn compose(factors: &[AveragedMap]) -> Result<AveragedMap> {
    match factors {
        [] => Err(Error::EmptyInput("composition needs at least one factor")),
        [only] => Ok(only.clone()),
        _ => {
            let dim = factors[0].dim;
            for f in factors {
                if f.dim != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: f.dim });
                }
            }
            let alphas: Vec<Alpha> = factors.iter().map(|f| f.alpha).collect();
            let alpha = compose_constant(&alphas)?;
            Ok(AveragedMap { dim, alpha, kind: MapKind::Composed(factors.to_vec().into()) })
        }
    }
}

/// Convex combination `sum_i w_i t_i`. The stored constant is the weighted
/// average of the factor constants.
pub fn combine(weights: &Weights, maps: &[AveragedMap]) -> Result<AveragedMap> {
    if weights.len() != maps.len() {
        return Err(Error::LengthMismatch {
            context: "convex combination",
            left: weights.len(),
            right: maps.len(),
        });
    }
    let dim = maps[0].dim;
    for m in maps {
        if m.dim != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: m.dim });
        }
    }
    let alphas: Vec<Alpha> = maps.iter().map(|m| m.alpha).collect();
    let alpha = combination_constant(weights, &alphas)?;
    Ok(AveragedMap {
        dim,
        alpha,
        kind: MapKind::Combined {
            weights: weights.as_slice().to_vec().into(),
            maps: maps.to_vec().into(),
        },
    })
}
