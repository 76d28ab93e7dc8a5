//! Deterministic error injection for inexact iterations.

use crate::error::{Error, Result};
use crate::Point;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::sync::Arc;

type BoundFn = Arc<dyn Fn(usize, usize) -> f64 + Send + Sync>;
type MagnitudeFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;
type GenerateFn = Arc<dyn Fn(usize, usize) -> Point + Send + Sync>;

enum InjectorKind {
    None,
    /// Random unit direction scaled to `magnitude(n)`, generated from a
    /// stream derived from (seed, n, slot) alone — sampling is stateless,
    /// so the error at an index never depends on what was sampled before.
    Seeded { seed: u64, magnitude: MagnitudeFn },
    Custom { generate: GenerateFn },
}

/// Produces the error vector injected after each factor application, one
/// slot per factor (slot `i` pairs with the `i`-th factor of the list,
/// counting from the outermost). The injector also carries a declared
/// per-(iteration, slot) norm bound; every sampled error is checked
/// against it.
/// Whether the bounds are summable is the caller's concern — the runner
/// only records the weighted partial sums.
pub struct ErrorInjector {
    dimension: usize,
    slots: usize,
    bound: BoundFn,
    kind: InjectorKind,
}

impl ErrorInjector {
    /// No errors: the exact iteration.
    pub fn none(dimension: usize, slots: usize) -> Self {
        ErrorInjector {
            dimension,
            slots,
            bound: Arc::new(|_, _| 0.0),
            kind: InjectorKind::None,
        }
    }

    /// Errors with `‖e_{i,n}‖ = scale / (n + 1)²` in seeded random
    /// directions — the canonical summable perturbation.
    pub fn seeded_inverse_square(
        dimension: usize,
        slots: usize,
        scale: f64,
        seed: u64,
    ) -> Result<Self> {
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "error scale must be nonnegative and finite, got {scale}"
            )));
        }
        let magnitude: MagnitudeFn = Arc::new(move |n| scale / ((n + 1) as f64).powi(2));
        let shared = magnitude.clone();
        Ok(ErrorInjector {
            dimension,
            slots,
            bound: Arc::new(move |n, _| shared(n)),
            kind: InjectorKind::Seeded {
                seed,
                magnitude,
            },
        })
    }

    /// Arbitrary generator with a declared bound. The generator must be a
    /// pure function of (iteration, slot) for runs to stay reproducible.
    pub fn custom(
        dimension: usize,
        slots: usize,
        bound: impl Fn(usize, usize) -> f64 + Send + Sync + 'static,
        generate: impl Fn(usize, usize) -> Point + Send + Sync + 'static,
    ) -> Self {
        ErrorInjector {
            dimension,
            slots,
            bound: Arc::new(bound),
            kind: InjectorKind::Custom {
                generate: Arc::new(generate),
            },
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    /// True when the injector can never produce a nonzero error, letting
    /// runners skip the perturbed pipeline entirely.
    pub fn is_zero(&self) -> bool {
        matches!(self.kind, InjectorKind::None)
    }

    /// The declared bound on `‖e_{i,n}‖` for slot `i` at iteration `n`.
    pub fn declared_bound(&self, n: usize, slot: usize) -> f64 {
        (self.bound)(n, slot)
    }

    /// Samples the error for (iteration, slot), enforcing the declared
    /// bound with a hair of slack for the normalization arithmetic.
    pub(crate) fn sample(&self, n: usize, slot: usize) -> Result<Point> {
        debug_assert!(slot < self.slots);
        let e = match &self.kind {
            InjectorKind::None => return Ok(Point::zeros(self.dimension)),
            InjectorKind::Seeded { seed, magnitude } => {
                let m = magnitude(n);
                if m == 0.0 {
                    return Ok(Point::zeros(self.dimension));
                }
                random_direction(mix(*seed, n as u64, slot as u64), self.dimension) * m
            }
            InjectorKind::Custom { generate } => generate(n, slot),
        };
        if e.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: e.len(),
            });
        }
        let norm = e.norm();
        let bound = (self.bound)(n, slot);
        if !norm.is_finite() || norm > bound + 1e-12 * bound.max(1.0) {
            return Err(Error::ErrorBoundExceeded {
                index: n,
                slot,
                norm,
                bound,
            });
        }
        Ok(e)
    }
}

/// A seeded vector of the given magnitude in a direction determined by
/// (seed, iteration, slot) alone — the building block other modules use to
/// synthesize their own deterministic error sequences.
pub(crate) fn seeded_vector(
    seed: u64,
    n: usize,
    slot: usize,
    dimension: usize,
    magnitude: f64,
) -> Point {
    if magnitude == 0.0 {
        return Point::zeros(dimension);
    }
    random_direction(mix(seed, n as u64, slot as u64), dimension) * magnitude
}

/// A unit vector drawn from the rotation-invariant (Gaussian) distribution.
fn random_direction(stream: u64, dimension: usize) -> Point {
    let mut rng = ChaCha8Rng::seed_from_u64(stream);
    loop {
        let v = Point::from_fn(dimension, |_, _| StandardNormal.sample(&mut rng));
        let norm = v.norm();
        if norm > 1e-6 {
            return v / norm;
        }
        // Astronomically unlikely; draw again rather than divide by ~0.
    }
}

/// SplitMix64-style mixing of (seed, iteration, slot) into one stream id.
fn mix(seed: u64, n: u64, slot: u64) -> u64 {
    let mut z = seed
        ^ n.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ slot.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
