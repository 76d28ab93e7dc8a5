//! Splitting algorithms for monotone inclusions and convex minimization.
//!
//! The target problem is `0 ∈ Ax + Bx` with `A` maximally monotone (reached
//! only through its resolvent `J_{γA}`) and `B` β-cocoercive. The solver is
//! the relaxed forward-backward recursion
//!
//! ```text
//! x_{n+1} = x_n + λ_n ( J_{γ_n A}(x_n − γ_n(Bx_n + b_n)) + a_n − x_n ),
//! ```
//!
//! a two-factor averaged composition: `J_{γA}` is firmly nonexpansive (1/2)
//! and `Id − γB` is `γ/(2β)`-averaged, so the composite is
//! `φ = 2β/(4β−γ)`-averaged and the relaxations may sweep the extended
//! range — up to `(1−ε)(2+ε−γ_n/(2β))`, past the classical cap of 1/φ·(…)
//! that a cruder constant would allow. Minimization of `f + g` is the
//! specialization `A = ∂f` (resolvent = `prox_{γf}`), `B = ∇g`.

mod fb;

pub use fb::{
    forward_backward_run, proximal_gradient_run, validate_fb_schedule, ErrorTerm, FbSchedule,
    FbScheduleReport, FbViolation,
};

use crate::constants::Alpha;
use crate::error::{Error, Result};
use crate::operators::{verify_averaged, AveragedMap, VerifyReport};
use crate::{ensure_finite, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::sync::Arc;

type ResolventFn = Arc<dyn Fn(f64, &Point) -> Result<Point> + Send + Sync>;
type MapFn = Arc<dyn Fn(&Point) -> Point + Send + Sync>;
type ObjectiveFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

/// Classifies why a fixture's convergence is strong rather than merely
/// weak (demiregularity of `A` or `B` at the solution). Purely
/// documentation: in finite dimension the two notions coincide, so the
/// runners never branch on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Demiregularity {
    /// The operator is strongly monotone (e.g. a gradient of a strongly
    /// convex function).
    StronglyMonotone,
    /// The function behind the operator is uniformly convex.
    UniformlyConvex,
    /// No strength hypothesis claimed.
    None,
}

/// The monotone inclusion `0 ∈ Ax + Bx`, described operationally: a
/// resolvent provider for `A` and the cocoercive map `B` with its modulus.
///
/// β comes from the problem definition (for a quadratic, `1/‖AᵀA‖` via
/// power iteration at construction) — it is never estimated from samples;
/// [`InclusionProblem::verify_cocoercivity`] samples only to falsify.
#[derive(Clone)]
pub struct InclusionProblem {
    dimension: usize,
    resolvent: ResolventFn,
    cocoercive: MapFn,
    beta: f64,
}

impl InclusionProblem {
    pub fn new(
        dimension: usize,
        resolvent: impl Fn(f64, &Point) -> Result<Point> + Send + Sync + 'static,
        cocoercive: impl Fn(&Point) -> Point + Send + Sync + 'static,
        beta: f64,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::EmptyInput("an inclusion problem needs a positive dimension"));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "cocoercivity modulus beta must be positive and finite, got {beta}"
            )));
        }
        Ok(InclusionProblem {
            dimension,
            resolvent: Arc::new(resolvent),
            cocoercive: Arc::new(cocoercive),
            beta,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Evaluates `J_{γA}(y)`.
    pub fn resolvent(&self, gamma: f64, y: &Point) -> Result<Point> {
        (self.resolvent)(gamma, y)
    }

    /// Evaluates `B(x)`.
    pub fn forward_map(&self, x: &Point) -> Point {
        (self.cocoercive)(x)
    }

    pub(crate) fn resolvent_fn(&self) -> &ResolventFn {
        &self.resolvent
    }

    pub(crate) fn forward_fn(&self) -> &MapFn {
        &self.cocoercive
    }

    /// Samples pairs in `[-box_radius, box_radius]^n` and tests the
    /// cocoercivity inequality `⟨x−y, Bx−By⟩ ≥ β‖Bx−By‖²` with a 1e−9
    /// absolute allowance. A failure falsifies the declared β; passing is
    /// evidence, not proof.
    pub fn verify_cocoercivity(
        &self,
        pair_count: usize,
        seed: u64,
        box_radius: f64,
    ) -> CocoercivityReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = self.dimension;
        let draw = |rng: &mut ChaCha8Rng| {
            Point::from_fn(dim, |_, _| rng.gen_range(-box_radius..=box_radius))
        };
        let mut violations = 0;
        let mut min_margin = f64::INFINITY;
        for _ in 0..pair_count {
            let x = draw(&mut rng);
            let y = draw(&mut rng);
            let bd = (self.cocoercive)(&x) - (self.cocoercive)(&y);
            let margin = (&x - &y).dot(&bd) - self.beta * bd.norm_squared();
            min_margin = min_margin.min(margin);
            if margin < -COCOERCIVITY_TOLERANCE {
                violations += 1;
            }
        }
        CocoercivityReport {
            beta: self.beta,
            pair_count,
            seed,
            box_radius,
            violations,
            min_margin,
        }
    }
}

/// Absolute slack in the sampled cocoercivity inequality.
pub const COCOERCIVITY_TOLERANCE: f64 = 1e-9;

/// Outcome of a sampled cocoercivity probe.
#[derive(Clone, Debug, Serialize)]
pub struct CocoercivityReport {
    pub beta: f64,
    pub pair_count: usize,
    pub seed: u64,
    pub box_radius: f64,
    /// Pairs whose margin fell below `-COCOERCIVITY_TOLERANCE`.
    pub violations: usize,
    /// Smallest observed `⟨x−y, Bx−By⟩ − β‖Bx−By‖²`.
    pub min_margin: f64,
}

impl CocoercivityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// The minimization problem `min f(x) + g(x)` with `f` proper lower
/// semicontinuous convex (reached through `prox_{γf}`) and `g` smooth.
#[derive(Clone)]
pub struct MinimizationProblem {
    dimension: usize,
    prox: ResolventFn,
    smooth: crate::operators::SmoothFunction,
    objective: ObjectiveFn,
}

impl MinimizationProblem {
    /// `objective` should evaluate `f + g`; it is recorded in traces for
    /// reporting and never steers the iteration.
    pub fn new(
        dimension: usize,
        prox: impl Fn(f64, &Point) -> Result<Point> + Send + Sync + 'static,
        smooth: crate::operators::SmoothFunction,
        objective: impl Fn(&Point) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if smooth.dimension() != dimension {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                got: smooth.dimension(),
            });
        }
        Ok(MinimizationProblem {
            dimension,
            prox: Arc::new(prox),
            smooth,
            objective: Arc::new(objective),
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn smooth(&self) -> &crate::operators::SmoothFunction {
        &self.smooth
    }

    pub fn objective_value(&self, x: &Point) -> f64 {
        (self.objective)(x)
    }

    pub(crate) fn objective_fn(&self) -> &ObjectiveFn {
        &self.objective
    }

    /// The monotone-inclusion view `A = ∂f`, `B = ∇g`, `β = 1/L`. The
    /// resolvent closure is shared with this problem, which is what makes
    /// the two runners' iterates bit-identical.
    pub fn to_inclusion(&self) -> InclusionProblem {
        let smooth = self.smooth.clone();
        InclusionProblem {
            dimension: self.dimension,
            resolvent: self.prox.clone(),
            cocoercive: Arc::new(move |x| smooth.gradient(x)),
            beta: self.smooth.beta(),
        }
    }

    /// Samples the firm nonexpansiveness (1/2-averagedness) of
    /// `prox_{γf}` at a fixed `γ` — a falsification probe for a
    /// hand-written prox.
    pub fn verify_prox_firm(
        &self,
        gamma: f64,
        pair_count: usize,
        seed: u64,
        box_radius: f64,
    ) -> Result<VerifyReport> {
        let map = prox_map(&self.prox, self.dimension, gamma)?;
        Ok(verify_averaged(&map, Alpha::half(), pair_count, seed, box_radius))
    }
}

/// Wraps one evaluation of a resolvent/prox provider at a fixed `γ` as an
/// averaged map, probing the provider once so γ-level failures (e.g. a
/// factorization that does not exist) surface as errors instead of panics.
pub(crate) fn prox_map(provider: &ResolventFn, dimension: usize, gamma: f64) -> Result<AveragedMap> {
    let probe = provider(gamma, &Point::zeros(dimension))?;
    if probe.len() != dimension {
        return Err(Error::DimensionMismatch {
            expected: dimension,
            got: probe.len(),
        });
    }
    ensure_finite(&probe, "resolvent probe")?;
    let provider = provider.clone();
    Ok(AveragedMap::from_fn(dimension, Alpha::half(), move |y| {
        provider(gamma, y)
            .expect("resolvent provider failed after a successful probe at this step size")
    }))
}

/// Outcome of evaluating `‖J_{γA}(x − γBx) − x‖` at a candidate point.
#[derive(Clone, Debug, Serialize)]
pub struct FixedPointReport {
    pub gamma: f64,
    /// `‖J_{γA}(candidate − γ B candidate) − candidate‖`.
    pub residual: f64,
    /// The mapped point `J_{γA}(candidate − γ B candidate)`.
    #[serde(skip)]
    pub mapped: Point,
}

impl FixedPointReport {
    /// Whether the residual certifies (within `tolerance`) that the
    /// candidate is a fixed point — equivalently, a zero of `A + B`.
    pub fn certifies(&self, tolerance: f64) -> bool {
        self.residual <= tolerance
    }
}

/// Evaluates the fixed-point identity `zer(A+B) = Fix(J_{γA}∘(Id−γB))` at a
/// candidate: a residual below tolerance certifies membership in the fixed
/// point set, hence in the solution set, for any legal `γ ∈ ]0, 2β[` — the
/// fixed-point set does not depend on `γ`.
pub fn fixed_point_identity_check(
    p: &InclusionProblem,
    gamma: f64,
    candidate: &Point,
) -> Result<FixedPointReport> {
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::InvalidSpec(format!(
            "fixed-point check needs a positive finite gamma, got {gamma}"
        )));
    }
    if gamma >= 2.0 * p.beta {
        return Err(Error::GradientStepTooLarge {
            gamma,
            limit: 2.0 * p.beta,
        });
    }
    if candidate.len() != p.dimension {
        return Err(Error::DimensionMismatch {
            expected: p.dimension,
            got: candidate.len(),
        });
    }
    let forward = candidate - (p.cocoercive)(candidate) * gamma;
    let mapped = (p.resolvent)(gamma, &forward)?;
    let residual = (&mapped - candidate).norm();
    Ok(FixedPointReport {
        gamma,
        residual,
        mapped,
    })
}
