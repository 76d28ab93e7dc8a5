//! Fixed-point iteration engines.
//!
//! Three runners share one core recursion
//!
//! ```text
//! x_{n+1} = x_n + λ_n (T_{1,n}(T_{2,n}(⋯(T_{m,n} x_n + e_{m,n})⋯) + e_{2,n}) + e_{1,n} − x_n)
//! ```
//!
//! - [`km_run`]: the inexact Krasnosel'skii–Mann iteration (m = 1, operators
//!   possibly varying per iteration);
//! - [`composed_run`]: m ≥ 1 factors with one error slot per factor and a
//!   relaxation range validated against the composite constant φ_n in
//!   extended mode;
//! - [`string_run`]: string averaging — weighted combination of factor
//!   strings, relaxed in the classical range of the string constant.
//!
//! Every run produces an [`IterationTrace`] holding the per-iteration ledger
//! (residuals, relaxations, error norms, distance to a reference) and the
//! running sums whose boundedness the convergence analysis promises.

mod errors;
mod schedule;
mod trace;

pub use errors::ErrorInjector;
pub(crate) use errors::seeded_vector;
pub use schedule::{Schedule, ScheduleMode, ScheduleRule, StopRule, Target};
pub use trace::{IterationTrace, StopReason, TraceRow};

use crate::constants::{compose_constant, string_constant, Alpha, Weights};
use crate::error::{Error, Result};
use crate::operators::{combine, compose, distance_to_sets, AveragedMap, SetDescriptor};
use crate::{ensure_finite, Point};
use serde::Serialize;
use std::borrow::Cow;
use std::collections::HashMap;
use std::sync::Arc;

/// The factor lists `(T_{1,n}, …, T_{m,n})`, one list per iteration. All
/// lists share one length and one ambient dimension.
pub struct FactorSequence {
    rule: FactorRule,
    dimension: usize,
    factor_count: usize,
}

enum FactorRule {
    Constant(Vec<AveragedMap>),
    Cyclic(Vec<Vec<AveragedMap>>),
    Generated(Arc<dyn Fn(usize) -> Result<Vec<AveragedMap>> + Send + Sync>),
}

fn validate_factor_list(factors: &[AveragedMap]) -> Result<(usize, usize)> {
    let first = factors
        .first()
        .ok_or(Error::EmptyInput("a factor list needs at least one operator"))?;
    let dim = first.dimension();
    for f in factors {
        if f.dimension() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: f.dimension(),
            });
        }
    }
    Ok((dim, factors.len()))
}

impl FactorSequence {
    /// The same factor list at every iteration.
    pub fn constant(factors: Vec<AveragedMap>) -> Result<Self> {
        let (dimension, factor_count) = validate_factor_list(&factors)?;
        Ok(FactorSequence {
            rule: FactorRule::Constant(factors),
            dimension,
            factor_count,
        })
    }

    /// Cycles through the given lists: iteration `n` uses `lists[n % p]`.
    pub fn cyclic(lists: Vec<Vec<AveragedMap>>) -> Result<Self> {
        let first = lists
            .first()
            .ok_or(Error::EmptyInput("a cyclic factor sequence needs at least one list"))?;
        let (dimension, factor_count) = validate_factor_list(first)?;
        for list in &lists {
            let (d, m) = validate_factor_list(list)?;
            if d != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    got: d,
                });
            }
            if m != factor_count {
                return Err(Error::LengthMismatch {
                    context: "factor lists in a cyclic sequence",
                    left: factor_count,
                    right: m,
                });
            }
        }
        Ok(FactorSequence {
            rule: FactorRule::Cyclic(lists),
            dimension,
            factor_count,
        })
    }

    /// Materializes the factor list per iteration; each produced list is
    /// checked against the declared dimension and factor count, and a
    /// failure to build one (say, a resolvent that cannot be factorized at
    /// the step size of some iteration) aborts the run that asked for it.
    pub fn generated(
        dimension: usize,
        factor_count: usize,
        make: impl Fn(usize) -> Result<Vec<AveragedMap>> + Send + Sync + 'static,
    ) -> Result<Self> {
        if dimension == 0 || factor_count == 0 {
            return Err(Error::EmptyInput(
                "a generated factor sequence needs a positive dimension and factor count",
            ));
        }
        Ok(FactorSequence {
            rule: FactorRule::Generated(Arc::new(make)),
            dimension,
            factor_count,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn factor_count(&self) -> usize {
        self.factor_count
    }

    fn at(&self, n: usize) -> Result<Cow<'_, [AveragedMap]>> {
        match &self.rule {
            FactorRule::Constant(list) => Ok(Cow::Borrowed(list)),
            FactorRule::Cyclic(lists) => Ok(Cow::Borrowed(&lists[n % lists.len()])),
            FactorRule::Generated(make) => {
                let list = make(n)?;
                let (d, m) = validate_factor_list(&list)?;
                if d != self.dimension {
                    return Err(Error::DimensionMismatch {
                        expected: self.dimension,
                        got: d,
                    });
                }
                if m != self.factor_count {
                    return Err(Error::LengthMismatch {
                        context: "generated factor list",
                        left: self.factor_count,
                        right: m,
                    });
                }
                Ok(Cow::Owned(list))
            }
        }
    }

    /// Key under which the reference pipeline for iteration `n` may be
    /// cached; `None` when the factors must be treated as fresh every time.
    fn cache_key(&self, n: usize) -> Option<usize> {
        match &self.rule {
            FactorRule::Constant(_) => Some(0),
            FactorRule::Cyclic(lists) => Some(n % lists.len()),
            FactorRule::Generated(_) => None,
        }
    }
}

/// The operators `(T_n)` of a plain KM iteration — a factor sequence whose
/// lists all have length one.
pub struct OperatorSequence {
    inner: FactorSequence,
}

impl OperatorSequence {
    pub fn constant(op: AveragedMap) -> Self {
        OperatorSequence {
            inner: FactorSequence::constant(vec![op]).expect("a single operator is a valid list"),
        }
    }

    /// `T_n = ops[n % p]` — e.g. cyclic projections.
    pub fn cyclic(ops: Vec<AveragedMap>) -> Result<Self> {
        Ok(OperatorSequence {
            inner: FactorSequence::cyclic(ops.into_iter().map(|o| vec![o]).collect())?,
        })
    }

    pub fn dimension(&self) -> usize {
        self.inner.dimension()
    }
}

/// Optional per-run extensions used by the splitting layer: objective
/// recording and the Σ‖G(x_n) − G(x̄)‖² accumulator.
pub(crate) struct RunHooks<'a> {
    pub objective: Option<&'a (dyn Fn(&Point) -> f64 + 'a)>,
    pub map_gap: Option<(&'a (dyn Fn(&Point) -> Point + 'a), Point)>,
}

impl RunHooks<'_> {
    pub(crate) fn none() -> Self {
        RunHooks {
            objective: None,
            map_gap: None,
        }
    }
}

/// Reference-point pipeline stages, cached when the factors repeat.
#[derive(Default)]
struct RefStageCache {
    keyed: HashMap<usize, Vec<Point>>,
    scratch: Vec<Point>,
}

impl RefStageCache {
    fn stages(&mut self, key: Option<usize>, list: &[AveragedMap], x: &Point) -> &[Point] {
        match key {
            Some(k) => self.keyed.entry(k).or_insert_with(|| pipeline(list, x)),
            None => {
                self.scratch = pipeline(list, x);
                &self.scratch
            }
        }
    }
}

/// Applies the factors innermost-first; `stages[j]` is the point after `j`
/// applications, so `stages[m]` is the full composite value.
fn pipeline(list: &[AveragedMap], x: &Point) -> Vec<Point> {
    let mut stages = Vec::with_capacity(list.len() + 1);
    stages.push(x.clone());
    for factor in list.iter().rev() {
        let next = factor.evaluate(stages.last().expect("stages start nonempty"));
        stages.push(next);
    }
    stages
}

/// Relative slack for the per-iteration Fejér ledger
/// `‖x_{n+1} − x̄‖ ≤ ‖x_n − x̄‖ + λ_n‖e_n‖`.
const FEJER_SLACK: f64 = 1e-9;

pub(crate) fn run_core(
    algorithm: &str,
    factors: &FactorSequence,
    schedule: &Schedule,
    errors: &ErrorInjector,
    x0: &Point,
    stop: &StopRule,
    hooks: RunHooks<'_>,
) -> Result<IterationTrace> {
    let dim = factors.dimension();
    let m = factors.factor_count();
    if x0.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: x0.len(),
        });
    }
    ensure_finite(x0, "initial point")?;
    if errors.slots() != m {
        return Err(Error::LengthMismatch {
            context: "error slots per factor",
            left: m,
            right: errors.slots(),
        });
    }
    if errors.dimension() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: errors.dimension(),
        });
    }
    let reference = stop.target();
    if let Some(t) = reference {
        if t.point.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: t.point.len(),
            });
        }
    }

    let mut tr = IterationTrace::new(algorithm, dim, stop.max(), m, reference.is_some());
    if hooks.map_gap.is_some() {
        tr.map_gap_sum = Some(0.0);
    }
    let mut x = x0.clone();
    tr.snapshot(0, &x);
    if let Some(t) = reference {
        tr.distances.push((&x - &t.point).norm());
    }
    let mut ref_cache = RefStageCache::default();
    let repeat_boundary = schedule.rule().repeat_boundary();
    let mut reason = StopReason::MaxIterations;

    for n in 0..stop.max() {
        if repeat_boundary == Some(n) {
            tr.annotations.push(format!(
                "relaxation table exhausted at iteration {n}; repeating its final value"
            ));
        }
        let list = factors.at(n)?;
        let alphas: Vec<Alpha> = list.iter().map(|f| f.alpha()).collect();
        let phi = compose_constant(&alphas)?;
        let lambda = schedule.lambda(n);
        schedule.validate(n, lambda, phi)?;

        let stages = pipeline(&list, &x);
        let residual = (&stages[m] - &x).norm();

        // The residual is checked before the step, so an already-converged
        // iterate is never nudged away again by an injected error.
        if stop.residual_tolerance() > 0.0 && residual <= stop.residual_tolerance() {
            if let Some(obj) = hooks.objective {
                tr.objectives.push(obj(&x));
            }
            tr.rows.push(TraceRow {
                index: n,
                residual,
                lambda,
                alpha: phi.get(),
                error_norm: 0.0,
                dist_to_ref: tr.distances.last().copied(),
                running_sum: tr.running_sum,
            });
            reason = StopReason::ResidualTolerance;
            break;
        }

        // Perturbed pipeline; the exact one is reused when the injector can
        // never produce a nonzero error, keeping such runs bit-identical to
        // truly error-free ones.
        let mut per_factor_norms = vec![0.0; m];
        let (value, error_norm) = if errors.is_zero() {
            (stages[m].clone(), 0.0)
        } else {
            let mut u = x.clone();
            for i in (0..m).rev() {
                u = list[i].evaluate(&u);
                let e = errors.sample(n, i)?;
                let norm = e.norm();
                per_factor_norms[i] = norm;
                if norm > 0.0 {
                    u += &e;
                }
            }
            let aggregate = (&u - &stages[m]).norm();
            debug_assert!(
                aggregate <= per_factor_norms.iter().sum::<f64>() + 1e-12,
                "aggregate error exceeds the telescoping bound at iteration {n}"
            );
            (u, aggregate)
        };

        if let Some(obj) = hooks.objective {
            tr.objectives.push(obj(&x));
        }
        if let Some((g, g_at_ref)) = &hooks.map_gap {
            let gap = (g(&x) - g_at_ref).norm_squared();
            *tr.map_gap_sum.as_mut().expect("initialized above") += gap;
        }

        let x_next = &x + (&value - &x) * lambda;
        ensure_finite(&x_next, "iterate")?;

        tr.running_sum += lambda * (1.0 / phi.get() - lambda) * residual * residual;
        tr.error_weighted_sum += lambda * error_norm;
        for i in 0..m {
            tr.per_factor_error_sums[i] += lambda * per_factor_norms[i];
        }

        if let Some(t) = reference {
            let ref_stages = ref_cache.stages(factors.cache_key(n), &list, &t.point);
            for i in 0..m {
                let a = alphas[i].get();
                let gap = ((&stages[m - 1 - i] - &stages[m - i])
                    - (&ref_stages[m - 1 - i] - &ref_stages[m - i]))
                    .norm_squared();
                tr.displacement_sums[i] += lambda * (1.0 - a) / a * gap;
            }
            let dist_prev = *tr.distances.last().expect("seeded with the initial distance");
            let dist_next = (&x_next - &t.point).norm();
            let budget = dist_prev + lambda * error_norm;
            if dist_next > budget + FEJER_SLACK * dist_prev.max(1.0) {
                tr.fejer_violations += 1;
                tr.max_fejer_violation = tr.max_fejer_violation.max(dist_next - budget);
            }
            tr.distances.push(dist_next);
        }

        tr.rows.push(TraceRow {
            index: n,
            residual,
            lambda,
            alpha: phi.get(),
            error_norm,
            dist_to_ref: reference.map(|_| tr.distances[n]),
            running_sum: tr.running_sum,
        });
        tr.count_step();
        x = x_next;
        tr.snapshot(n + 1, &x);

        if let Some(t) = reference {
            if t.tolerance > 0.0 && tr.distances[n + 1] <= t.tolerance {
                reason = StopReason::TargetReached;
                break;
            }
        }
    }

    let final_index = tr.steps();
    tr.finish(final_index, x, reason);
    Ok(tr)
}

/// The inexact KM iteration `x_{n+1} = x_n + λ_n(T_n x_n + e_n − x_n)`.
///
/// The schedule may be classical (`λ_n ∈ ]0, 1/α_n[`) or extended — the
/// extended range is a subset of the classical one. The injector must have
/// exactly one slot. A reference fixed point supplied via the stop rule
/// activates the distance ledger and the per-iteration Fejér check.
pub fn km_run(
    operators: &OperatorSequence,
    schedule: &Schedule,
    errors: &ErrorInjector,
    x0: &Point,
    stop: &StopRule,
) -> Result<IterationTrace> {
    run_core("km", &operators.inner, schedule, errors, x0, stop, RunHooks::none())
}

/// The composed iteration with per-factor errors, applied innermost-first:
/// factor `i` of each list is followed by error slot `i`. The relaxation is
/// validated in extended mode against the per-iteration composite constant
/// `φ_n = φ(α_{1,n}, …, α_{m,n})`.
///
/// With a single factor this is exactly [`km_run`] — same core, bit for bit.
pub fn composed_run(
    factors: &FactorSequence,
    schedule: &Schedule,
    errors: &ErrorInjector,
    x0: &Point,
    stop: &StopRule,
) -> Result<IterationTrace> {
    if !schedule.is_extended() {
        return Err(Error::InvalidSpec(
            "the composed iteration takes an extended-mode schedule; use Schedule::extended".into(),
        ));
    }
    run_core("composed", factors, schedule, errors, x0, stop, RunHooks::none())
}

/// String averaging: `T = Σ_k w_k T_{k,1}⋯T_{k,m_k}`, iterated with
/// classical relaxations validated against the string constant
/// `α = Σ_k w_k φ(string_k)`. Strings may have different lengths.
///
/// `sets` may list the feasibility sets behind the projectors; per-set
/// distances are then recorded at every iterate snapshot.
pub fn string_run(
    strings: &[Vec<AveragedMap>],
    weights: &Weights,
    schedule: &Schedule,
    x0: &Point,
    stop: &StopRule,
    sets: &[SetDescriptor],
) -> Result<IterationTrace> {
    if schedule.is_extended() {
        return Err(Error::InvalidSpec(
            "string averaging uses the classical relaxation range; use Schedule::classical".into(),
        ));
    }
    let composed: Vec<AveragedMap> = strings.iter().map(|s| compose(s)).collect::<Result<_>>()?;
    let t = combine(weights, &composed)?;
    // The combined map stores Σ w_k φ(string_k) — the same arithmetic as the
    // calculus' string constant, so the two agree exactly.
    let alpha_lists: Vec<Vec<Alpha>> = strings
        .iter()
        .map(|s| s.iter().map(|f| f.alpha()).collect())
        .collect();
    let alpha = string_constant(&alpha_lists, weights)?;
    debug_assert_eq!(alpha.get(), t.alpha().get());

    let dim = t.dimension();
    let mut tr = run_core(
        "string",
        &FactorSequence::constant(vec![t])?,
        schedule,
        &ErrorInjector::none(dim, 1),
        x0,
        stop,
        RunHooks::none(),
    )?;
    // For eventually constant relaxations inside the open range, the
    // divergence condition Σ λ_n(1/α − λ_n) = ∞ holds automatically; other
    // rules leave it to the caller, which the trace notes.
    if schedule.rule().eventually_constant().is_none() {
        tr.annotations.push(
            "relaxations do not settle to a constant; the divergence condition \
             on sum lambda_n (1/alpha - lambda_n) was not verified"
                .into(),
        );
    }
    if !sets.is_empty() {
        let mut recorded = Vec::with_capacity(tr.iterates.len());
        for (idx, point) in &tr.iterates {
            recorded.push((*idx, distance_to_sets(sets, point)?));
        }
        tr.set_distances = recorded;
    }
    Ok(tr)
}

/// Outcome of checking the quasi-Fejér inequality
/// `values[n+1] ≤ values[n] − decrements[n] + perturbations[n]`.
#[derive(Clone, Debug, Serialize)]
pub struct QuasiFejerReport {
    pub checked: usize,
    pub violations: usize,
    pub first_violation: Option<usize>,
    pub max_violation: f64,
    pub decrement_sum: f64,
    pub perturbation_sum: f64,
    pub limit_estimate: f64,
    pub tail_oscillation: f64,
    pub convergent: bool,
}

/// Verifies the inequality index by index within a 1e−12 relative slack and
/// reports whether the value sequence has numerically settled (oscillation
/// over the trailing tenth below 1e−8, relative to the final value).
///
/// A report full of violations is an ordinary return — callers decide what
/// to make of it. Lengths must line up: one decrement and one perturbation
/// per consecutive pair of values.
pub fn quasi_fejer_check(
    values: &[f64],
    decrements: &[f64],
    perturbations: &[f64],
) -> QuasiFejerReport {
    assert!(!values.is_empty(), "a quasi-Fejér check needs at least one value");
    assert_eq!(
        decrements.len(),
        values.len() - 1,
        "one decrement per consecutive value pair"
    );
    assert_eq!(
        perturbations.len(),
        decrements.len(),
        "one perturbation per decrement"
    );

    let mut violations = 0;
    let mut first_violation = None;
    let mut max_violation = 0.0_f64;
    for n in 0..decrements.len() {
        let allowed = values[n] - decrements[n] + perturbations[n];
        let excess = values[n + 1] - allowed;
        if excess > 1e-12 * values[n].abs().max(1.0) {
            violations += 1;
            first_violation.get_or_insert(n);
            max_violation = max_violation.max(excess);
        }
    }

    let last = *values.last().expect("nonempty");
    let tail_len = (values.len() / 10).max(10).min(values.len());
    let tail = &values[values.len() - tail_len..];
    let tail_min = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let tail_max = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tail_oscillation = tail_max - tail_min;

    QuasiFejerReport {
        checked: decrements.len(),
        violations,
        first_violation,
        max_violation,
        decrement_sum: decrements.iter().sum(),
        perturbation_sum: perturbations.iter().sum(),
        limit_estimate: last,
        tail_oscillation,
        convergent: tail_oscillation <= 1e-8 * last.abs().max(1.0),
    }
}
