//! The extended forward-backward recursion and its schedule validation.

use super::{prox_map, InclusionProblem, MinimizationProblem};
use crate::constants::{Alpha, Epsilon, BOUNDARY_SLACK};
use crate::error::{Error, Result};
use crate::iteration::{
    run_core, seeded_vector, ErrorInjector, FactorSequence, IterationTrace, RunHooks, Schedule,
    ScheduleRule, StopRule,
};
use crate::operators::AveragedMap;
use crate::Point;
use serde::Serialize;

/// One of the two perturbation sequences of the recursion: `a_n` (added
/// after the resolvent) or `b_n` (added to `Bx_n` before the step). The
/// declared norm bound doubles as the exact magnitude of the samples, so a
/// run's error budget is known in advance.
#[derive(Clone, Debug)]
pub enum ErrorTerm {
    /// No perturbation.
    None,
    /// `‖e_n‖ = scale/(n+1)²` in a seeded random direction — summable.
    InverseSquare { scale: f64, seed: u64 },
}

impl ErrorTerm {
    fn validated(self) -> Result<Self> {
        if let ErrorTerm::InverseSquare { scale, .. } = &self {
            if !(scale.is_finite() && *scale >= 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "error scale must be nonnegative and finite, got {scale}"
                )));
            }
        }
        Ok(self)
    }

    /// Declared bound on the term's norm at iteration `n`.
    pub fn bound(&self, n: usize) -> f64 {
        match self {
            ErrorTerm::None => 0.0,
            ErrorTerm::InverseSquare { scale, .. } => scale / ((n + 1) as f64).powi(2),
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, ErrorTerm::None)
    }

    /// The sample itself; `stream` separates the `a` and `b` sequences so
    /// they never share directions even under equal seeds.
    fn vector(&self, dimension: usize, n: usize, stream: usize) -> Point {
        match self {
            ErrorTerm::None => Point::zeros(dimension),
            ErrorTerm::InverseSquare { scale, seed } => {
                seeded_vector(*seed, n, stream, dimension, scale / ((n + 1) as f64).powi(2))
            }
        }
    }
}

/// Step sizes, relaxations, slack, and error terms for a forward-backward
/// run: `γ_n ∈ [ε, 2β/(1+ε)]` and `λ_n ∈ [ε, (1−ε)(2+ε−γ_n/(2β))]`, both
/// intervals closed. β is not part of the schedule — it belongs to the
/// problem — so the range check happens in [`validate_fb_schedule`].
#[derive(Clone)]
pub struct FbSchedule {
    eps: Epsilon,
    gammas: ScheduleRule,
    lambdas: ScheduleRule,
    a: ErrorTerm,
    b: ErrorTerm,
}

impl FbSchedule {
    pub fn new(eps: Epsilon, gammas: ScheduleRule, lambdas: ScheduleRule) -> Result<Self> {
        gammas.check_positive("step-size")?;
        lambdas.check_positive("relaxation")?;
        Ok(FbSchedule {
            eps,
            gammas,
            lambdas,
            a: ErrorTerm::None,
            b: ErrorTerm::None,
        })
    }

    /// Sets the `a_n` sequence (resolvent-output errors).
    pub fn with_resolvent_errors(mut self, a: ErrorTerm) -> Result<Self> {
        self.a = a.validated()?;
        Ok(self)
    }

    /// Sets the `b_n` sequence (forward-evaluation errors); the iteration
    /// sees them scaled by `γ_n`.
    pub fn with_forward_errors(mut self, b: ErrorTerm) -> Result<Self> {
        self.b = b.validated()?;
        Ok(self)
    }

    pub fn eps(&self) -> Epsilon {
        self.eps
    }

    pub fn gammas(&self) -> &ScheduleRule {
        &self.gammas
    }

    pub fn lambdas(&self) -> &ScheduleRule {
        &self.lambdas
    }

    pub fn resolvent_errors(&self) -> &ErrorTerm {
        &self.a
    }

    pub fn forward_errors(&self) -> &ErrorTerm {
        &self.b
    }

    pub fn gamma(&self, n: usize) -> f64 {
        self.gammas.value_at(n)
    }

    pub fn lambda(&self, n: usize) -> f64 {
        self.lambdas.value_at(n)
    }
}

/// First index at which a schedule leaves its admissible intervals.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FbViolation {
    pub index: usize,
    pub gamma: f64,
    pub lambda: f64,
    /// The λ cap `(1−ε)(2+ε−γ_n/(2β))` at this index.
    pub lambda_upper: f64,
    /// Which bound broke: `"gamma_lower"`, `"gamma_upper"`,
    /// `"lambda_lower"`, or `"lambda_upper"`.
    pub broken: &'static str,
}

/// Everything [`validate_fb_schedule`] measured over the horizon.
#[derive(Clone, Debug, Serialize)]
pub struct FbScheduleReport {
    pub beta: f64,
    pub eps: f64,
    pub horizon: usize,
    /// `min(1/2, β)`, the exclusive cap on ε.
    pub eps_limit: f64,
    pub eps_ok: bool,
    /// The closed admissible γ interval `[ε, 2β/(1+ε)]`.
    pub gamma_lower: f64,
    pub gamma_upper: f64,
    pub first_violation: Option<FbViolation>,
    /// Per-index composite constants `φ_n = 2β/(4β−γ_n)` (for in-range γ).
    pub phis: Vec<f64>,
    /// Largest observed gap between the two equivalent λ-cap formulas
    /// `(1−ε)(2+ε−γ/(2β))` and `(1−ε)(1+εφ)/φ`.
    pub max_formula_gap: f64,
    /// Whether that gap stayed within 1e−12.
    pub formula_confirmed: bool,
}

impl FbScheduleReport {
    pub fn valid(&self) -> bool {
        self.eps_ok && self.first_violation.is_none() && self.formula_confirmed
    }

    /// Renders the first problem as the error a runner should abort with.
    pub(crate) fn to_error(&self) -> Option<Error> {
        if !self.eps_ok {
            return Some(Error::InvalidSpec(format!(
                "forward-backward slack eps = {} must stay strictly below min(1/2, beta) = {}",
                self.eps, self.eps_limit
            )));
        }
        if let Some(v) = self.first_violation {
            return Some(match v.broken {
                "gamma_lower" | "gamma_upper" => Error::StepSizeOutOfRange {
                    index: v.index,
                    gamma: v.gamma,
                    lower: self.gamma_lower,
                    upper: self.gamma_upper,
                    side: if v.broken == "gamma_lower" { "lower" } else { "upper" },
                },
                _ => Error::RelaxationOutOfRange {
                    index: v.index,
                    lambda: v.lambda,
                    lower: self.eps,
                    upper: v.lambda_upper,
                    inclusive: true,
                },
            });
        }
        if !self.formula_confirmed {
            return Some(Error::InvalidSpec(format!(
                "the two lambda-cap formulas disagree by {} (> 1e-12)",
                self.max_formula_gap
            )));
        }
        None
    }
}

/// Checks every index below `horizon` against the closed intervals
/// `γ_n ∈ [ε, 2β/(1+ε)]` and `λ_n ∈ [ε, (1−ε)(2+ε−γ_n/(2β))]`
/// (boundary comparisons get the usual `BOUNDARY_SLACK` relative
/// allowance), records the composite constants `φ_n = 2β/(4β−γ_n)`, and
/// confirms that the λ cap equals `(1−ε)(1+εφ_n)/φ_n` within 1e−12 — the
/// generic extended range, instantiated at the composite constant, and the
/// forward-backward range are one and the same.
///
/// Report-style: never errors. Runners convert a failing report into the
/// matching error before touching the iterate.
pub fn validate_fb_schedule(beta: f64, s: &FbSchedule, horizon: usize) -> FbScheduleReport {
    assert!(beta.is_finite() && beta > 0.0, "beta must be positive");
    let eps = s.eps.get();
    let eps_limit = 0.5_f64.min(beta);
    let eps_ok = eps < eps_limit;
    let gamma_lower = eps;
    let gamma_upper = 2.0 * beta / (1.0 + eps);
    let slack = |bound: f64| BOUNDARY_SLACK * bound.abs().max(1.0);

    let mut phis = Vec::with_capacity(horizon);
    let mut first_violation = None;
    let mut max_formula_gap = 0.0_f64;

    for n in 0..horizon {
        let gamma = s.gamma(n);
        let lambda = s.lambda(n);
        let lambda_upper = (1.0 - eps) * (2.0 + eps - gamma / (2.0 * beta));
        let gamma_ok =
            gamma >= gamma_lower - slack(gamma_lower) && gamma <= gamma_upper + slack(gamma_upper);
        if gamma_ok {
            let phi = 2.0 * beta / (4.0 * beta - gamma);
            phis.push(phi);
            let alternate = (1.0 - eps) * (1.0 + eps * phi) / phi;
            max_formula_gap = max_formula_gap.max((lambda_upper - alternate).abs());
        }
        if first_violation.is_some() {
            continue;
        }
        let broken = if gamma < gamma_lower - slack(gamma_lower) {
            Some("gamma_lower")
        } else if gamma > gamma_upper + slack(gamma_upper) {
            Some("gamma_upper")
        } else if lambda < eps - slack(eps) {
            Some("lambda_lower")
        } else if lambda > lambda_upper + slack(lambda_upper) {
            Some("lambda_upper")
        } else {
            None
        };
        if let Some(broken) = broken {
            first_violation = Some(FbViolation {
                index: n,
                gamma,
                lambda,
                lambda_upper,
                broken,
            });
        }
    }

    FbScheduleReport {
        beta,
        eps,
        horizon,
        eps_limit,
        eps_ok,
        gamma_lower,
        gamma_upper,
        first_violation,
        phis,
        max_formula_gap,
        formula_confirmed: max_formula_gap <= 1e-12,
    }
}

/// `Id − γB` as a `γ/(2β)`-averaged map.
fn forward_factor(
    problem: &InclusionProblem,
    gamma: f64,
) -> Result<AveragedMap> {
    let alpha = Alpha::new(gamma / (2.0 * problem.beta()))?;
    let b = problem.forward_fn().clone();
    Ok(AveragedMap::from_fn(problem.dimension(), alpha, move |x| {
        x - b(x) * gamma
    }))
}

fn fb_factors(problem: &InclusionProblem, s: &FbSchedule) -> Result<FactorSequence> {
    let dim = problem.dimension();
    match s.gammas() {
        // One γ: prefactorize/probe the resolvent once.
        ScheduleRule::Constant(gamma) => FactorSequence::constant(vec![
            prox_map(problem.resolvent_fn(), dim, *gamma)?,
            forward_factor(problem, *gamma)?,
        ]),
        rule => {
            let rule = rule.clone();
            let problem = problem.clone();
            FactorSequence::generated(dim, 2, move |n| {
                let gamma = rule.value_at(n);
                Ok(vec![
                    prox_map(problem.resolvent_fn(), dim, gamma)?,
                    forward_factor(&problem, gamma)?,
                ])
            })
        }
    }
}

fn fb_injector(dim: usize, s: &FbSchedule) -> ErrorInjector {
    if s.resolvent_errors().is_none() && s.forward_errors().is_none() {
        return ErrorInjector::none(dim, 2);
    }
    let (a_bound, b_bound) = (s.resolvent_errors().clone(), s.forward_errors().clone());
    let gammas_bound = s.gammas().clone();
    let (a_gen, b_gen) = (a_bound.clone(), b_bound.clone());
    let gammas_gen = gammas_bound.clone();
    ErrorInjector::custom(
        dim,
        2,
        move |n, slot| match slot {
            0 => a_bound.bound(n),
            _ => gammas_bound.value_at(n) * b_bound.bound(n),
        },
        move |n, slot| match slot {
            0 => a_gen.vector(dim, n, 0),
            _ => b_gen.vector(dim, n, 1) * (-gammas_gen.value_at(n)),
        },
    )
}

fn fb_core(
    algorithm: &'static str,
    problem: &InclusionProblem,
    s: &FbSchedule,
    x0: &Point,
    stop: &StopRule,
    objective: Option<&dyn Fn(&Point) -> f64>,
) -> Result<IterationTrace> {
    let report = validate_fb_schedule(problem.beta(), s, stop.max());
    if let Some(err) = report.to_error() {
        return Err(err);
    }
    let factors = fb_factors(problem, s)?;
    let injector = fb_injector(problem.dimension(), s);
    // The composite of factor constants 1/2 and γ_n/(2β) is φ_n, and the
    // generic extended range at φ_n is exactly the interval validated above,
    // so the core's per-iteration λ check enforces the right bounds.
    let lambda_schedule = Schedule::extended(s.lambdas().clone(), s.eps())?;

    let mut hooks = RunHooks {
        objective,
        map_gap: None,
    };
    let gap_fn;
    if let Some(target) = stop.target() {
        let b_at_ref = problem.forward_map(&target.point);
        gap_fn = |x: &Point| problem.forward_map(x);
        hooks.map_gap = Some((&gap_fn, b_at_ref));
    }
    run_core(algorithm, &factors, &lambda_schedule, &injector, x0, stop, hooks)
}

/// The inexact forward-backward iteration
/// `x_{n+1} = x_n + λ_n(J_{γ_n A}(x_n − γ_n(Bx_n + b_n)) + a_n − x_n)`.
///
/// The trace's residual column holds the error-free fixed-point residual
/// `‖J_{γ_nA}(x_n − γ_nBx_n) − x_n‖`; when the stop rule carries a
/// reference solution, `map_gap_sum` accumulates `Σ‖Bx_n − Bx̄‖²`.
pub fn forward_backward_run(
    p: &InclusionProblem,
    s: &FbSchedule,
    x0: &Point,
    stop: &StopRule,
) -> Result<IterationTrace> {
    fb_core("forward_backward", p, s, x0, stop, None)
}

/// Forward-backward specialized to minimization: `prox_{γ_nf}` in place of
/// the resolvent and `∇g` as the forward map, with `β = 1/L`. Objective
/// values are recorded per iteration (they may be nonmonotone; they never
/// steer the run). Same core as [`forward_backward_run`], so the iterates
/// agree bit for bit with a run on [`MinimizationProblem::to_inclusion`].
pub fn proximal_gradient_run(
    p: &MinimizationProblem,
    s: &FbSchedule,
    x0: &Point,
    stop: &StopRule,
) -> Result<IterationTrace> {
    let inclusion = p.to_inclusion();
    let objective = p.objective_fn().clone();
    let hook = move |x: &Point| objective(x);
    fb_core("proximal_gradient", &inclusion, s, x0, stop, Some(&hook))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{soft_threshold, SmoothFunction};
    use nalgebra::dvector;

    fn eps01() -> Epsilon {
        Epsilon::new(0.1).unwrap()
    }

    fn constant_schedule(gamma: f64, lambda: f64) -> FbSchedule {
        FbSchedule::new(
            eps01(),
            ScheduleRule::Constant(gamma),
            ScheduleRule::Constant(lambda),
        )
        .unwrap()
    }

    fn box_inclusion() -> InclusionProblem {
        InclusionProblem::new(
            1,
            |_gamma, y| Ok(y.map(|v| v.max(0.0))),
            |x| x.add_scalar(-2.0),
            1.0,
        )
        .unwrap()
    }

    fn scalar_l1() -> MinimizationProblem {
        let smooth = SmoothFunction::half_sq_distance(dvector![3.0]).unwrap();
        MinimizationProblem::new(
            1,
            |gamma, y| Ok(soft_threshold(y, gamma)),
            smooth,
            |x| x[0].abs() + 0.5 * (x[0] - 3.0).powi(2),
        )
        .unwrap()
    }

    #[test]
    fn boundary_lambda_validates_at_beta_one() {
        // β = 1, ε = 0.1, γ ≡ 1: cap = 0.9·(2.1 − 0.5) = 1.44, inclusive.
        let report = validate_fb_schedule(1.0, &constant_schedule(1.0, 1.44), 100);
        assert!(report.valid(), "{report:?}");
        assert!(report.first_violation.is_none());
        assert!(report.formula_confirmed, "gap {}", report.max_formula_gap);
        assert!((report.phis[0] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn oversized_gamma_is_rejected_with_its_bounds() {
        let report = validate_fb_schedule(1.0, &constant_schedule(1.9, 1.0), 10);
        assert!(!report.valid());
        let v = report.first_violation.unwrap();
        assert_eq!(v.index, 0);
        assert_eq!(v.broken, "gamma_upper");
        assert!((report.gamma_upper - 20.0 / 11.0).abs() < 1e-15);
        match report.to_error().unwrap() {
            Error::StepSizeOutOfRange { index, gamma, upper, side, .. } => {
                assert_eq!(index, 0);
                assert_eq!(gamma, 1.9);
                assert_eq!(side, "upper");
                assert!((upper - 20.0 / 11.0).abs() < 1e-15);
            }
            other => panic!("wrong error: {other:?}"),
        }
    }

    #[test]
    fn lambda_at_eps_is_always_admissible() {
        // The lower endpoint stays legal across the whole γ range.
        let schedule = FbSchedule::new(
            eps01(),
            ScheduleRule::Cyclic(vec![0.1, 0.5, 1.0, 1.5, 20.0 / 11.0]),
            ScheduleRule::Constant(0.1),
        )
        .unwrap();
        let report = validate_fb_schedule(1.0, &schedule, 50);
        assert!(report.valid(), "{report:?}");
    }

    #[test]
    fn eps_must_stay_below_beta() {
        let schedule = FbSchedule::new(
            Epsilon::new(0.4).unwrap(),
            ScheduleRule::Constant(0.4),
            ScheduleRule::Constant(0.5),
        )
        .unwrap();
        let report = validate_fb_schedule(0.3, &schedule, 5);
        assert!(!report.eps_ok);
        assert_eq!(report.eps_limit, 0.3);
        assert!(matches!(report.to_error(), Some(Error::InvalidSpec(_))));
    }

    #[test]
    fn zero_operator_minimizes_half_norm_squared_in_one_step() {
        // A = 0, B = ∇½‖x‖² = Id, γ ≡ 1, λ ≡ 1: x₁ = x₀ − x₀ = 0.
        let p = InclusionProblem::new(1, |_g, y| Ok(y.clone()), |x| x.clone(), 1.0).unwrap();
        let stop = StopRule::max_iterations(5)
            .unwrap()
            .with_residual_tolerance(1e-14)
            .unwrap();
        let tr = forward_backward_run(&p, &constant_schedule(1.0, 1.0), &dvector![5.0], &stop)
            .unwrap();
        assert_eq!(tr.final_point[0], 0.0);
        assert_eq!(tr.steps(), 1);
    }

    #[test]
    fn box_inclusion_reaches_its_solution() {
        let p = box_inclusion();
        let stop = StopRule::max_iterations(200)
            .unwrap()
            .with_residual_tolerance(1e-12)
            .unwrap();
        let tr = forward_backward_run(&p, &constant_schedule(1.0, 1.0), &dvector![-7.0], &stop)
            .unwrap();
        assert!((tr.final_point[0] - 2.0).abs() < 1e-10);
        assert!(tr.steps() <= 200);
    }

    #[test]
    fn alternating_step_sizes_reach_the_same_solution() {
        let p = box_inclusion();
        let schedule = FbSchedule::new(
            eps01(),
            ScheduleRule::Cyclic(vec![0.6, 1.2]),
            ScheduleRule::Constant(1.0),
        )
        .unwrap();
        let stop = StopRule::max_iterations(200)
            .unwrap()
            .with_residual_tolerance(1e-12)
            .unwrap();
        let tr = forward_backward_run(&p, &schedule, &dvector![-7.0], &stop).unwrap();
        assert!((tr.final_point[0] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn scalar_l1_first_step_is_the_soft_threshold() {
        let p = scalar_l1();
        let stop = StopRule::max_iterations(1).unwrap();
        let tr = proximal_gradient_run(&p, &constant_schedule(1.0, 1.0), &dvector![0.0], &stop)
            .unwrap();
        assert_eq!(tr.final_point[0], 2.0, "prox_{{|·|}}(3) = 2 exactly");
        assert_eq!(tr.objectives.len(), 1);
        assert_eq!(tr.objectives[0], 0.0 + 4.5, "objective at x₀ = 0");
    }

    #[test]
    fn scalar_l1_converges_to_two() {
        let p = scalar_l1();
        let stop = StopRule::max_iterations(200)
            .unwrap()
            .with_residual_tolerance(0.0)
            .unwrap();
        let tr = proximal_gradient_run(&p, &constant_schedule(0.5, 1.2), &dvector![-4.0], &stop)
            .unwrap();
        assert!((tr.final_point[0] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn specialization_matches_forward_backward_bit_for_bit() {
        let p = scalar_l1();
        let schedule = constant_schedule(0.5, 1.2)
            .with_forward_errors(ErrorTerm::InverseSquare { scale: 0.01, seed: 3 })
            .unwrap();
        let stop = StopRule::max_iterations(200).unwrap();
        let x0 = dvector![-4.0];
        let a = proximal_gradient_run(&p, &schedule, &x0, &stop).unwrap();
        let b = forward_backward_run(&p.to_inclusion(), &schedule, &x0, &stop).unwrap();
        assert_eq!(a.final_point, b.final_point);
        assert_eq!(a.csv_string(1), b.csv_string(1));
        assert!(!a.objectives.is_empty());
        assert!(b.objectives.is_empty(), "objective recording is the only difference");
    }

    #[test]
    fn forward_errors_barely_move_the_limit() {
        let p = scalar_l1();
        let stop = StopRule::max_iterations(1_000).unwrap();
        let x0 = dvector![0.0];
        let clean = proximal_gradient_run(&p, &constant_schedule(0.5, 1.0), &x0, &stop).unwrap();
        let noisy_schedule = constant_schedule(0.5, 1.0)
            .with_forward_errors(ErrorTerm::InverseSquare { scale: 0.01, seed: 8 })
            .unwrap();
        let noisy = proximal_gradient_run(&p, &noisy_schedule, &x0, &stop).unwrap();
        assert!((clean.final_point[0] - 2.0).abs() < 1e-12);
        assert!((noisy.final_point[0] - clean.final_point[0]).abs() < 1e-4);
        // The trace keeps the two slots' budgets separate: a ≡ 0, b scaled by γ.
        assert_eq!(noisy.per_factor_error_sums[0], 0.0);
        assert!(noisy.per_factor_error_sums[1] > 0.0);
    }

    #[test]
    fn reference_solution_activates_the_map_gap_ledger() {
        let p = box_inclusion();
        let stop = StopRule::max_iterations(300)
            .unwrap()
            .with_target(dvector![2.0], 0.0)
            .unwrap();
        let tr = forward_backward_run(&p, &constant_schedule(0.8, 1.1), &dvector![-3.0], &stop)
            .unwrap();
        let gap = tr.map_gap_sum.expect("reference supplied");
        assert!(gap.is_finite() && gap > 0.0);
        assert_eq!(tr.fejer_violations, 0);
    }

    #[test]
    fn runner_rejects_a_bad_schedule_before_iterating() {
        let p = box_inclusion();
        let stop = StopRule::max_iterations(10).unwrap();
        match forward_backward_run(&p, &constant_schedule(1.0, 1.45), &dvector![0.0], &stop) {
            Err(Error::RelaxationOutOfRange { index, lambda, upper, inclusive, .. }) => {
                assert_eq!(index, 0);
                assert_eq!(lambda, 1.45);
                assert!((upper - 1.44).abs() < 1e-12);
                assert!(inclusive);
            }
            other => panic!("expected a relaxation rejection, got {other:?}"),
        }
    }

    #[test]
    fn resolvent_errors_fill_the_first_slot() {
        let p = box_inclusion();
        let schedule = constant_schedule(1.0, 1.0)
            .with_resolvent_errors(ErrorTerm::InverseSquare { scale: 0.05, seed: 4 })
            .unwrap();
        let stop = StopRule::max_iterations(50).unwrap();
        let tr = forward_backward_run(&p, &schedule, &dvector![0.0], &stop).unwrap();
        assert!(tr.per_factor_error_sums[0] > 0.0);
        assert_eq!(tr.per_factor_error_sums[1], 0.0);
        // Σ λ‖a_n‖ ≤ λ·scale·π²/6.
        assert!(tr.per_factor_error_sums[0] <= 0.05 * std::f64::consts::PI.powi(2) / 6.0 + 1e-9);
    }
}
