//! Smooth convex functions with Lipschitz gradients, and gradient steps.

use super::AveragedMap;
use crate::constants::Alpha;
use crate::error::{Error, Result};
use crate::Point;
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

type GradientFn = Arc<dyn Fn(&Point) -> Point + Send + Sync>;
type ValueFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

/// A differentiable convex function whose gradient is Lipschitz continuous
/// with the given constant. Equivalently (Baillon–Haddad), the gradient is
/// `1/L`-cocoercive; `beta()` exposes that cocoercivity constant.
#[derive(Clone)]
pub struct SmoothFunction {
    dim: usize,
    gradient: GradientFn,
    lipschitz: f64,
    value: Option<ValueFn>,
}

impl SmoothFunction {
    pub fn new(
        dim: usize,
        gradient: impl Fn(&Point) -> Point + Send + Sync + 'static,
        lipschitz: f64,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyInput("smooth function needs a positive dimension"));
        }
        if !(lipschitz.is_finite() && lipschitz > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "Lipschitz constant must be positive and finite, got {lipschitz}"
            )));
        }
        Ok(SmoothFunction {
            dim,
            gradient: Arc::new(gradient),
            lipschitz,
            value: None,
        })
    }

    /// Attaches an objective-value callback (used by traces to log the
    /// objective along an iteration).
    pub fn with_value(mut self, value: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        self.value = Some(Arc::new(value));
        self
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    /// Cocoercivity constant of the gradient: `beta = 1 / L`.
    pub fn beta(&self) -> f64 {
        1.0 / self.lipschitz
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn gradient(&self, x: &Point) -> Point {
        assert_eq!(x.len(), self.dim, "gradient argument has the wrong dimension");
        (self.gradient)(x)
    }

    pub fn value(&self, x: &Point) -> Option<f64> {
        self.value.as_ref().map(|f| f(x))
    }

    /// The quadratic `x -> 0.5 ||A x - b||^2` with gradient `A^T (A x - b)`.
    ///
    /// The Lipschitz constant is `||A^T A||_2`, computed by a deterministic
    /// power iteration on the Gram matrix (fixed starting vector, so repeated
    /// constructions agree bit for bit).
    pub fn quadratic(a: DMatrix<f64>, b: Point) -> Result<Self> {
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(Error::EmptyInput("quadratic needs a nonempty matrix"));
        }
        if a.nrows() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                got: b.len(),
            });
        }
        if a.iter().any(|v| !v.is_finite()) || b.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("quadratic data"));
        }
        let gram = a.transpose() * &a;
        let lipschitz = power_iteration_symmetric(&gram);
        if !(lipschitz.is_finite() && lipschitz > 0.0) {
            return Err(Error::SolverFailure(
                "quadratic has a zero matrix; its gradient is constant".into(),
            ));
        }
        let dim = a.ncols();
        let a_grad = a.clone();
        let b_grad = b.clone();
        let value_a = a;
        let value_b = b;
        Ok(SmoothFunction {
            dim,
            gradient: Arc::new(move |x: &Point| a_grad.transpose() * (&a_grad * x - &b_grad)),
            lipschitz,
            value: Some(Arc::new(move |x: &Point| {
                let r = &value_a * x - &value_b;
                0.5 * r.norm_squared()
            })),
        })
    }

    /// The function `x -> 0.5 ||x - c||^2`, whose gradient `x - c` has
    /// Lipschitz constant 1.
    pub fn half_sq_distance(center: Point) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::EmptyInput("half squared distance needs a center"));
        }
        let c_grad = center.clone();
        let c_val = center.clone();
        Ok(SmoothFunction {
            dim: center.len(),
            gradient: Arc::new(move |x: &Point| x - &c_grad),
            lipschitz: 1.0,
            value: Some(Arc::new(move |x: &Point| 0.5 * (x - &c_val).norm_squared())),
        })
    }

    /// Samples point pairs in `[-radius, radius]^dim` and returns the largest
    /// observed ratio `||grad x - grad y|| / ||x - y||`. A ratio above the
    /// declared constant flags a mis-stated Lipschitz bound (up to sampling).
    pub fn verify_lipschitz(&self, pair_count: usize, seed: u64, radius: f64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..pair_count {
            let x = Point::from_fn(self.dim, |_, _| rng.gen_range(-radius..=radius));
            let y = Point::from_fn(self.dim, |_, _| rng.gen_range(-radius..=radius));
            let gap = (&x - &y).norm();
            if gap < 1e-12 {
                continue;
            }
            let ratio = (self.gradient(&x) - self.gradient(&y)).norm() / gap;
            worst = worst.max(ratio);
        }
        worst
    }
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power
/// iteration. Deterministic: starts from the all-ones direction plus a tiny
/// index-dependent tilt so it cannot sit in an eigenvector's null direction.
fn power_iteration_symmetric(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut v = Point::from_fn(n, |i, _| 1.0 + (i as f64) * 1e-3);
    v /= v.norm();
    let mut lambda = 0.0;
    for _ in 0..10_000 {
        let w = m * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = w / norm;
        let next_lambda = (m * &next).dot(&next);
        if (next_lambda - lambda).abs() <= 1e-10 * next_lambda.max(1.0) {
            return next_lambda;
        }
        lambda = next_lambda;
        v = next;
    }
    lambda
}

/// The gradient-descent map `x -> x - gamma grad f(x)`.
///
/// For a `beta`-cocoercive gradient and `0 < gamma < 2 beta` this map is
/// averaged with constant `gamma / (2 beta)`; larger steps lose the
/// averagedness structure entirely, so they are rejected.
pub fn gradient_step(f: &SmoothFunction, gamma: f64) -> Result<AveragedMap> {
    let beta = f.beta();
    if !(gamma.is_finite() && gamma > 0.0 && gamma < 2.0 * beta) {
        return Err(Error::GradientStepTooLarge {
            gamma,
            limit: 2.0 * beta,
        });
    }
    let alpha = Alpha::new(gamma / (2.0 * beta))?;
    let g = f.clone();
    Ok(AveragedMap::from_fn(f.dimension(), alpha, move |x| {
        x - g.gradient(x) * gamma
    }))
}
