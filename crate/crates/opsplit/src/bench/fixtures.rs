//! Deterministic problem builders behind the spec-file kinds.
//!
//! Every fixture is reproducible from its parameters (seeds included) and
//! carries whatever reference data exists for it: an analytic solution for
//! the scalar and monotone-linear instances, the averagedness constants for
//! the feasibility instance, and the demiregularity tag that says which
//! kind of convergence the theory promises.

use crate::constants::{string_constant, string_constant_legacy, Alpha, Weights};
use crate::error::{Error, Result};
use crate::operators::{soft_threshold, AveragedMap, MonotoneLinear, SetDescriptor, SmoothFunction};
use crate::splitting::{Demiregularity, InclusionProblem, MinimizationProblem};
use crate::Point;
use nalgebra::DMatrix;
use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::sync::Arc;

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn unit_vector(rng: &mut ChaCha8Rng, dimension: usize) -> Point {
    loop {
        let v = Point::from_fn(dimension, |_, _| gaussian(rng));
        let norm = v.norm();
        if norm > 1e-6 {
            return v / norm;
        }
    }
}

/// A seeded LASSO instance `min τ‖x‖₁ + ½‖Ax − b‖²`.
pub struct LassoFixture {
    pub problem: MinimizationProblem,
    pub design: DMatrix<f64>,
    pub observations: Point,
    pub ground_truth: Point,
    pub tau: f64,
    pub beta: f64,
    pub seed: u64,
    pub demiregularity: Demiregularity,
}

/// Build the LASSO fixture: Gaussian design scaled to unit spectral norm
/// (so the gradient of the smooth part is 1-cocoercive up to the power
/// iteration's accuracy), observations from a sparse ground truth plus
/// small seeded noise, and the soft-threshold resolvent.
pub fn lasso(rows: usize, cols: usize, seed: u64, tau: f64) -> Result<LassoFixture> {
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyInput("lasso needs positive rows and cols"));
    }
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "lasso regularization tau must be positive, got {tau}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = DMatrix::from_fn(rows, cols, |_, _| gaussian(&mut rng));
    // Scale the design so that ‖AᵀA‖ = 1; the throwaway quadratic exists
    // only to reuse the power iteration that estimates that norm.
    let lipschitz = SmoothFunction::quadratic(raw.clone(), Point::zeros(rows))?.lipschitz();
    let design = raw / lipschitz.sqrt();

    let support = (cols / 10).max(1);
    let mut ground_truth = Point::zeros(cols);
    for _ in 0..support {
        let index = (rng.next_u64() % cols as u64) as usize;
        ground_truth[index] = 2.0 * gaussian(&mut rng);
    }
    let noise = Point::from_fn(rows, |_, _| 0.01 * gaussian(&mut rng));
    let observations = &design * &ground_truth + noise;

    let smooth = SmoothFunction::quadratic(design.clone(), observations.clone())?;
    let beta = smooth.beta();
    let value = smooth.clone();
    let objective = move |x: &Point| {
        tau * x.iter().map(|v| v.abs()).sum::<f64>()
            + value.value(x).expect("quadratic smooth parts have values")
    };
    let prox = move |gamma: f64, y: &Point| Ok(soft_threshold(y, tau * gamma));
    let problem = MinimizationProblem::new(cols, prox, smooth, objective)?;
    Ok(LassoFixture {
        problem,
        design,
        observations,
        ground_truth,
        tau,
        beta,
        seed,
        demiregularity: Demiregularity::None,
    })
}

/// A string-averaging feasibility instance: sets, strings of projector
/// indices, weights, and both averagedness constants (sharp and legacy).
pub struct FeasibilityFixture {
    pub sets: Vec<SetDescriptor>,
    pub strings: Vec<Vec<usize>>,
    pub weights: Weights,
    /// Sharp constant of the weighted string average.
    pub alpha: Alpha,
    /// The older max-based constant; its relaxation cap is tighter.
    pub alpha_legacy: Alpha,
    /// Starting point chosen outside the intersection (seeded builder only).
    pub x0: Option<Point>,
    pub seed: u64,
    pub demiregularity: Demiregularity,
}

impl FeasibilityFixture {
    /// The projector pipelines, one per string, in the listed order.
    pub fn string_maps(&self) -> Result<Vec<Vec<AveragedMap>>> {
        self.strings
            .iter()
            .map(|string| {
                string
                    .iter()
                    .map(|&i| {
                        self.sets
                            .get(i)
                            .ok_or_else(|| {
                                Error::InvalidSpec(format!("string references missing set {i}"))
                            })
                            .map(|set| set.projector())
                    })
                    .collect()
            })
            .collect()
    }
}

fn feasibility_constants(
    strings: &[Vec<usize>],
    weights: &Weights,
) -> Result<(Alpha, Alpha)> {
    let alphas: Vec<Vec<Alpha>> = strings
        .iter()
        .map(|s| vec![Alpha::half(); s.len()])
        .collect();
    Ok((
        string_constant(&alphas, weights)?,
        string_constant_legacy(&alphas, weights)?,
    ))
}

/// Assemble a feasibility fixture from explicit parts. Missing strings
/// default to one singleton string per set; missing weights to uniform.
pub fn feasibility_from_parts(
    sets: Vec<SetDescriptor>,
    strings: Option<Vec<Vec<usize>>>,
    weights: Option<Vec<f64>>,
    seed: u64,
) -> Result<FeasibilityFixture> {
    if sets.is_empty() {
        return Err(Error::EmptyInput("feasibility needs at least one set"));
    }
    let strings =
        strings.unwrap_or_else(|| (0..sets.len()).map(|i| vec![i]).collect::<Vec<_>>());
    if strings.is_empty() || strings.iter().any(|s| s.is_empty()) {
        return Err(Error::EmptyInput("feasibility strings must be nonempty"));
    }
    if let Some(bad) = strings.iter().flatten().find(|i| **i >= sets.len()) {
        return Err(Error::InvalidSpec(format!(
            "string references set {bad} but only {} sets exist",
            sets.len()
        )));
    }
    let weights = match weights {
        Some(w) => Weights::new(w)?,
        None => Weights::uniform(strings.len())?,
    };
    if weights.len() != strings.len() {
        return Err(Error::LengthMismatch {
            context: "string weights",
            left: strings.len(),
            right: weights.len(),
        });
    }
    let (alpha, alpha_legacy) = feasibility_constants(&strings, &weights)?;
    Ok(FeasibilityFixture {
        sets,
        strings,
        weights,
        alpha,
        alpha_legacy,
        x0: None,
        seed,
        demiregularity: Demiregularity::None,
    })
}

/// The seeded feasibility instance: two halfspaces through the origin with
/// random unit normals `u`, `v`, plus a unit ball centered at
/// `−(u+v)/‖u+v‖`, whose center lies in both halfspaces — so the
/// intersection of all three sets is nonempty by construction. Strings are
/// `[[0, 1], [2]]` with uniform weights; the sharp constant is 7/12
/// against the legacy 2/3.
pub fn feasibility(dimension: usize, seed: u64) -> Result<FeasibilityFixture> {
    if dimension == 0 {
        return Err(Error::EmptyInput("feasibility needs a positive dimension"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = unit_vector(&mut rng, dimension);
    let v = loop {
        let v = unit_vector(&mut rng, dimension);
        if (&u + &v).norm() > 1e-3 {
            break v;
        }
    };
    let sum = &u + &v;
    let center = -&sum / sum.norm();
    let jitter = unit_vector(&mut rng, dimension);
    // Start well outside both halfspaces, with a seeded tangential nudge.
    let x0 = &sum * 1.5 + jitter * 0.3;

    let sets = vec![
        SetDescriptor::halfspace(u, 0.0)?,
        SetDescriptor::halfspace(v, 0.0)?,
        SetDescriptor::ball(center, 1.0)?,
    ];
    let strings = vec![vec![0, 1], vec![2]];
    let weights = Weights::uniform(2)?;
    let (alpha, alpha_legacy) = feasibility_constants(&strings, &weights)?;
    Ok(FeasibilityFixture {
        sets,
        strings,
        weights,
        alpha,
        alpha_legacy,
        x0: Some(x0),
        seed,
        demiregularity: Demiregularity::None,
    })
}

/// `0 ∈ Mx + (x − c)` with a monotone matrix `M`: the resolvent of `M`
/// meets the 1-cocoercive forward map `x ↦ x − c`.
pub struct MonotoneLinearFixture {
    pub problem: InclusionProblem,
    /// Analytic solution `(I + M)⁻¹ c`.
    pub solution: Point,
    pub demiregularity: Demiregularity,
}

/// Build the monotone-linear fixture from row-major matrix data.
pub fn monotone_linear(rows: &[Vec<f64>], center: &[f64]) -> Result<MonotoneLinearFixture> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidSpec(
            "monotone_linear matrix must be square and nonempty".into(),
        ));
    }
    if center.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: center.len(),
        });
    }
    let matrix = DMatrix::from_row_iterator(n, n, rows.iter().flatten().copied());
    let linear = Arc::new(MonotoneLinear::new(matrix)?);
    let c = Point::from_vec(center.to_vec());
    let solution = linear.resolvent(1.0, &c)?;
    let resolvent_source = Arc::clone(&linear);
    let shift = c.clone();
    let problem = InclusionProblem::new(
        n,
        move |gamma, y| resolvent_source.resolvent(gamma, y),
        move |x| x - &shift,
        1.0,
    )?;
    Ok(MonotoneLinearFixture {
        problem,
        solution,
        // The forward map x ↦ x − c is strongly monotone, which upgrades
        // the weak convergence guarantee to a strong one.
        demiregularity: Demiregularity::StronglyMonotone,
    })
}

/// `min |x| + ½(x − shift)²` on the line.
pub struct ScalarFixture {
    pub problem: MinimizationProblem,
    /// The unique minimizer: the shift soft-thresholded by 1.
    pub solution: Point,
    pub shift: f64,
    pub demiregularity: Demiregularity,
}

/// Build the scalar fixture.
pub fn scalar_l1(shift: f64) -> Result<ScalarFixture> {
    if !shift.is_finite() {
        return Err(Error::NonFinite("scalar fixture shift"));
    }
    let center = Point::from_vec(vec![shift]);
    let smooth = SmoothFunction::half_sq_distance(center.clone())?;
    let value = smooth.clone();
    let objective =
        move |x: &Point| x[0].abs() + value.value(x).expect("distance smooth parts have values");
    let prox = move |gamma: f64, y: &Point| Ok(soft_threshold(y, gamma));
    let problem = MinimizationProblem::new(1, prox, smooth, objective)?;
    let solution = soft_threshold(&center, 1.0);
    Ok(ScalarFixture {
        problem,
        solution,
        shift,
        // The smooth part is 1-strongly convex, hence uniformly convex.
        demiregularity: Demiregularity::UniformlyConvex,
    })
}
