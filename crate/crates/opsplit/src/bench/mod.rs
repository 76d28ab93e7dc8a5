//! Benchmark orchestration: spec ingestion, the fixture library, run and
//! comparison harnesses, batch execution, and the JSON shapes the CLI
//! prints.
//!
//! The exit-code contract lives here too, so the binary stays thin:
//! 0 success, 2 validation failure, 3 requested convergence not reached,
//! 4 numerical failure.

mod fixtures;
mod spec;

pub use fixtures::{
    feasibility, feasibility_from_parts, lasso, monotone_linear, scalar_l1, FeasibilityFixture,
    LassoFixture, MonotoneLinearFixture, ScalarFixture,
};
pub use spec::{
    ErrorTermSpec, ErrorsSpec, KindSpec, ModeSpec, OutputSpec, ProblemSpec, RuleSpec,
    ScheduleSpec, SetSpec, StopSpec,
};

use crate::constants::{
    compose_constant, fb_parameters, max_based_bound, relaxation_ranges, Alpha, Epsilon,
    BOUNDARY_SLACK,
};
use crate::error::{Error, Result};
use crate::iteration::{
    string_run, IterationTrace, Schedule, ScheduleRule, StopReason, StopRule,
};
use crate::splitting::{
    forward_backward_run, proximal_gradient_run, ErrorTerm, FbSchedule, InclusionProblem,
    MinimizationProblem,
};
use crate::Point;
use serde::Serialize;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

/// Environment variable that redirects every trace file (by base name)
/// into one directory.
pub const TRACE_DIR_ENV: &str = "OPSPLIT_TRACE_DIR";

fn stop_reason_label(reason: StopReason) -> &'static str {
    match reason {
        StopReason::MaxIterations => "max_iterations",
        StopReason::ResidualTolerance => "residual_tolerance",
        StopReason::TargetReached => "target_reached",
    }
}

/// Everything a single run reports. Serialized as the `run` command's
/// JSON output; seeds are always echoed.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub name: String,
    pub kind: &'static str,
    pub algorithm: String,
    pub seed: u64,
    pub mode: ModeSpec,
    /// Update steps executed (a terminal residual check is not a step).
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub final_residual: f64,
    /// `Some` iff the spec requested a residual tolerance.
    pub reached_residual_target: Option<bool>,
    /// Σ λ_n(1/α_n − λ_n)·residual_n² — bounded for admissible schedules.
    pub running_sum: f64,
    /// Σ λ_n‖e_n‖ over the aggregate injected error.
    pub error_weighted_sum: f64,
    /// Σ λ_n‖e_{i,n}‖ per factor slot.
    pub per_factor_error_sums: Vec<f64>,
    /// Iterations that broke the error-compensated Fejér inequality
    /// (expected: 0).
    pub fejer_violations: usize,
    pub final_distance_to_reference: Option<f64>,
    /// Σ ‖B x_n − B x̄‖² when the run tracked a reference (splitting only).
    pub map_gap_sum: Option<f64>,
    pub final_objective: Option<f64>,
    pub final_set_distances: Option<Vec<f64>>,
    pub annotations: Vec<String>,
    pub wall_time_ms: f64,
    pub trace_csv: Option<String>,
    pub trace_json: Option<String>,
}

impl RunReport {
    fn from_trace(spec: &ProblemSpec, trace: &IterationTrace, wall_time_ms: f64) -> Self {
        let reached = spec
            .stop
            .residual_tolerance
            .map(|tol| trace.final_residual() <= tol);
        RunReport {
            name: spec.display_name().to_owned(),
            kind: spec.kind.label(),
            algorithm: trace.algorithm.clone(),
            seed: spec.kind.seed(),
            mode: spec.schedule.mode,
            iterations: trace.steps(),
            stop_reason: trace.stop_reason,
            final_residual: trace.final_residual(),
            reached_residual_target: reached,
            running_sum: trace.running_sum,
            error_weighted_sum: trace.error_weighted_sum,
            per_factor_error_sums: trace.per_factor_error_sums.clone(),
            fejer_violations: trace.fejer_violations,
            final_distance_to_reference: trace.final_distance(),
            map_gap_sum: trace.map_gap_sum,
            final_objective: trace.objectives.last().copied(),
            final_set_distances: trace.set_distances.last().map(|(_, d)| d.clone()),
            annotations: trace.annotations.clone(),
            wall_time_ms,
            trace_csv: None,
            trace_json: None,
        }
    }

    /// One human-readable line for logs.
    pub fn summary(&self) -> String {
        let mut line = format!(
            "{} [{}]: {} iterations, stop={}, residual={:.6e}, fejer_violations={}",
            self.name,
            self.algorithm,
            self.iterations,
            stop_reason_label(self.stop_reason),
            self.final_residual,
            self.fejer_violations,
        );
        if let Some(d) = self.final_distance_to_reference {
            line.push_str(&format!(", dist_to_ref={d:.6e}"));
        }
        if let Some(obj) = self.final_objective {
            line.push_str(&format!(", objective={obj:.9}"));
        }
        if let Some(ds) = &self.final_set_distances {
            let worst = ds.iter().copied().fold(0.0, f64::max);
            line.push_str(&format!(", max_set_distance={worst:.6e}"));
        }
        if let Some(path) = &self.trace_csv {
            line.push_str(&format!(", trace={path}"));
        }
        line
    }

    /// Exit code of a completed run: 3 when a requested residual tolerance
    /// was not met, 0 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.reached_residual_target == Some(false) {
            3
        } else {
            0
        }
    }

    /// All numeric fields are finite (report invariant).
    pub fn numbers_are_finite(&self) -> bool {
        let scalars = [
            self.final_residual,
            self.running_sum,
            self.error_weighted_sum,
            self.wall_time_ms,
        ];
        scalars.iter().all(|v| v.is_finite())
            && self.per_factor_error_sums.iter().all(|v| v.is_finite())
            && self.final_distance_to_reference.map_or(true, f64::is_finite)
            && self.map_gap_sum.map_or(true, f64::is_finite)
            && self.final_objective.map_or(true, f64::is_finite)
            && self
                .final_set_distances
                .as_ref()
                .map_or(true, |d| d.iter().all(|v| v.is_finite()))
    }
}

/// A finished run: the report plus the full trace it summarizes.
#[derive(Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub trace: IterationTrace,
}

/// Exit code for an error: 2 if validation caught it, 4 if it is
/// numerical.
pub fn error_exit_code(e: &Error) -> i32 {
    if e.is_validation() {
        2
    } else {
        4
    }
}

/// The JSON shape errors are printed in.
pub fn error_json(e: &Error) -> Value {
    json!({
        "error": e.to_string(),
        "bound": e.bound_name(),
        "kind": if e.is_validation() { "validation" } else { "numerical" },
    })
}

fn resolve_trace_path(requested: &str) -> Result<PathBuf> {
    let requested = Path::new(requested);
    match std::env::var_os(TRACE_DIR_ENV) {
        Some(dir) if !dir.is_empty() => {
            let name = requested.file_name().ok_or_else(|| {
                Error::InvalidSpec(format!(
                    "trace path {} has no file name",
                    requested.display()
                ))
            })?;
            let dir = PathBuf::from(dir);
            std::fs::create_dir_all(&dir)?;
            Ok(dir.join(name))
        }
        _ => {
            if let Some(parent) = requested.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            Ok(requested.to_path_buf())
        }
    }
}

fn resolve_x0(
    requested: &Option<Vec<f64>>,
    dimension: usize,
    fallback: Option<&Point>,
) -> Result<Point> {
    match requested {
        Some(values) => {
            if values.len() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    got: values.len(),
                });
            }
            Ok(Point::from_vec(values.clone()))
        }
        None => Ok(fallback
            .cloned()
            .unwrap_or_else(|| Point::zeros(dimension))),
    }
}

/// In classical mode the relaxation convention is λ_n ≤ 1; reject anything
/// above it before running.
fn check_classical_cap(lambdas: &ScheduleRule, horizon: usize) -> Result<()> {
    for n in 0..horizon {
        let lambda = lambdas.value_at(n);
        if lambda > 1.0 + BOUNDARY_SLACK {
            return Err(Error::RelaxationOutOfRange {
                index: n,
                lambda,
                lower: 0.0,
                upper: 1.0,
                inclusive: true,
            });
        }
    }
    Ok(())
}

fn error_term_from_spec(term: &Option<ErrorTermSpec>) -> ErrorTerm {
    match term {
        // The schedule builders re-validate the scale on attachment.
        Some(t) => ErrorTerm::InverseSquare {
            scale: t.scale,
            seed: t.seed,
        },
        None => ErrorTerm::None,
    }
}

fn fb_schedule_from_spec(spec: &ProblemSpec, beta: f64) -> Result<FbSchedule> {
    let eps = Epsilon::new(spec.schedule.eps_or_default())?;
    let gammas = spec
        .schedule
        .gamma
        .as_ref()
        .map(RuleSpec::to_rule)
        .unwrap_or(ScheduleRule::Constant(beta));
    let lambdas = spec.schedule.lambda.to_rule();
    if spec.schedule.mode == ModeSpec::Classical {
        check_classical_cap(&lambdas, spec.stop.max_iterations)?;
    }
    let mut schedule = FbSchedule::new(eps, gammas, lambdas)?;
    if let Some(errors) = &spec.schedule.errors {
        schedule = schedule
            .with_resolvent_errors(error_term_from_spec(&errors.resolvent))?
            .with_forward_errors(error_term_from_spec(&errors.forward))?;
    }
    Ok(schedule)
}

/// A splitting-kind instance: the problem in whichever form it came, plus
/// its analytic reference when one exists.
enum SplitInstance {
    Inclusion {
        problem: InclusionProblem,
        reference: Option<Point>,
    },
    Minimization {
        problem: MinimizationProblem,
        reference: Option<Point>,
    },
}

impl SplitInstance {
    fn dimension(&self) -> usize {
        match self {
            SplitInstance::Inclusion { problem, .. } => problem.dimension(),
            SplitInstance::Minimization { problem, .. } => problem.dimension(),
        }
    }

    fn beta(&self) -> f64 {
        match self {
            SplitInstance::Inclusion { problem, .. } => problem.beta(),
            SplitInstance::Minimization { problem, .. } => problem.smooth().beta(),
        }
    }

    fn reference(&self) -> Option<&Point> {
        match self {
            SplitInstance::Inclusion { reference, .. }
            | SplitInstance::Minimization { reference, .. } => reference.as_ref(),
        }
    }

    fn run(&self, schedule: &FbSchedule, x0: &Point, stop: &StopRule) -> Result<IterationTrace> {
        match self {
            SplitInstance::Inclusion { problem, .. } => {
                forward_backward_run(problem, schedule, x0, stop)
            }
            SplitInstance::Minimization { problem, .. } => {
                proximal_gradient_run(problem, schedule, x0, stop)
            }
        }
    }
}

fn splitting_instance(kind: &KindSpec) -> Result<SplitInstance> {
    match kind {
        KindSpec::Lasso { rows, cols, seed, tau } => {
            let fixture = lasso(*rows, *cols, *seed, *tau)?;
            Ok(SplitInstance::Minimization {
                problem: fixture.problem,
                reference: None,
            })
        }
        KindSpec::MonotoneLinear { matrix, center } => {
            let fixture = monotone_linear(matrix, center)?;
            Ok(SplitInstance::Inclusion {
                problem: fixture.problem,
                reference: Some(fixture.solution),
            })
        }
        KindSpec::ScalarFixture { shift } => {
            let fixture = scalar_l1(*shift)?;
            Ok(SplitInstance::Minimization {
                problem: fixture.problem,
                reference: Some(fixture.solution),
            })
        }
        KindSpec::Feasibility { .. } => Err(Error::InvalidSpec(
            "feasibility runs use string averaging, not splitting".into(),
        )),
    }
}

fn feasibility_fixture(kind: &KindSpec) -> Result<FeasibilityFixture> {
    let KindSpec::Feasibility { dimension, seed, sets, strings, weights } = kind else {
        return Err(Error::InvalidSpec("not a feasibility kind".into()));
    };
    match sets {
        Some(specs) => {
            let sets = specs
                .iter()
                .map(SetSpec::to_descriptor)
                .collect::<Result<Vec<_>>>()?;
            if let Some(first) = sets.first() {
                let dim = first.dimension();
                if let Some(odd) = sets.iter().find(|s| s.dimension() != dim) {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: odd.dimension(),
                    });
                }
            }
            feasibility_from_parts(sets, strings.clone(), weights.clone(), *seed)
        }
        None => {
            if strings.is_some() || weights.is_some() {
                return Err(Error::InvalidSpec(
                    "custom strings/weights need an explicit set list".into(),
                ));
            }
            feasibility(*dimension, *seed)
        }
    }
}

fn run_feasibility(spec: &ProblemSpec) -> Result<IterationTrace> {
    if spec.schedule.mode == ModeSpec::Extended {
        return Err(Error::InvalidSpec(
            "feasibility runs use the classical KM range; the sharp string \
             constant already sets the cap 1/alpha"
                .into(),
        ));
    }
    if spec.schedule.gamma.is_some() {
        return Err(Error::InvalidSpec(
            "feasibility runs have no step size; remove schedule.gamma".into(),
        ));
    }
    if spec.schedule.errors.is_some() {
        return Err(Error::InvalidSpec(
            "feasibility runs are exact; remove schedule.errors".into(),
        ));
    }
    let fixture = feasibility_fixture(&spec.kind)?;
    let dimension = fixture.sets[0].dimension();
    let x0 = resolve_x0(&spec.x0, dimension, fixture.x0.as_ref())?;
    let schedule = Schedule::classical(spec.schedule.lambda.to_rule())?;
    let mut stop = StopRule::max_iterations(spec.stop.max_iterations)?;
    if let Some(tol) = spec.stop.residual_tolerance {
        stop = stop.with_residual_tolerance(tol)?;
    }
    let maps = fixture.string_maps()?;
    string_run(&maps, &fixture.weights, &schedule, &x0, &stop, &fixture.sets)
}

/// Execute one spec end to end: build the fixture, run the iteration,
/// write any requested trace files, and assemble the report.
pub fn run_spec(spec: &ProblemSpec) -> Result<RunOutcome> {
    spec.validate()?;
    let started = Instant::now();
    let trace = match &spec.kind {
        KindSpec::Feasibility { .. } => run_feasibility(spec)?,
        _ => {
            let instance = splitting_instance(&spec.kind)?;
            let schedule = fb_schedule_from_spec(spec, instance.beta())?;
            let x0 = resolve_x0(&spec.x0, instance.dimension(), None)?;
            let mut stop = StopRule::max_iterations(spec.stop.max_iterations)?;
            if let Some(tol) = spec.stop.residual_tolerance {
                stop = stop.with_residual_tolerance(tol)?;
            }
            if let Some(reference) = instance.reference() {
                stop = stop.with_target(reference.clone(), 0.0)?;
            }
            instance.run(&schedule, &x0, &stop)?
        }
    };
    let wall_time_ms = started.elapsed().as_secs_f64() * 1e3;
    let mut report = RunReport::from_trace(spec, &trace, wall_time_ms);
    if let Some(output) = &spec.output {
        if let Some(csv) = &output.csv {
            let path = resolve_trace_path(csv)?;
            trace.write_csv(&path, output.thin)?;
            report.trace_csv = Some(path.display().to_string());
        }
        if let Some(json_path) = &output.json {
            let path = resolve_trace_path(json_path)?;
            trace.write_json(&path)?;
            report.trace_json = Some(path.display().to_string());
        }
    }
    Ok(RunOutcome { report, trace })
}

/// One side of a relaxation comparison.
#[derive(Clone, Debug, Serialize)]
pub struct ComparisonArm {
    pub label: &'static str,
    pub lambda: f64,
    /// Iterations needed to reach the tolerance (= the horizon when it was
    /// never reached).
    pub iterations: usize,
    pub reached: bool,
    /// Final value of the comparison metric.
    pub final_value: f64,
}

/// Output of the `compare` command: the same problem run under the
/// conservative relaxation cap and under the sharp one.
#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub name: String,
    pub kind: &'static str,
    pub seed: u64,
    /// What the arms are measured by: `residual` or `set_distance`.
    pub metric: &'static str,
    pub tolerance: f64,
    pub baseline: ComparisonArm,
    pub extended: ComparisonArm,
    /// baseline iterations / extended iterations, when defined.
    pub speedup: Option<f64>,
}

impl ComparisonReport {
    pub fn summary(&self) -> String {
        let ratio = self
            .speedup
            .map_or_else(|| "n/a".to_owned(), |r| format!("{r:.2}"));
        format!(
            "{}: {} (lambda={:.4}) {} its vs {} (lambda={:.4}) {} its to {}<={:.1e}; speedup {}",
            self.name,
            self.baseline.label,
            self.baseline.lambda,
            self.baseline.iterations,
            self.extended.label,
            self.extended.lambda,
            self.extended.iterations,
            self.metric,
            self.tolerance,
            ratio,
        )
    }
}

fn speedup(baseline: &ComparisonArm, extended: &ComparisonArm) -> Option<f64> {
    (extended.iterations > 0).then(|| baseline.iterations as f64 / extended.iterations as f64)
}

fn compare_splitting(spec: &ProblemSpec, tolerance: f64) -> Result<ComparisonReport> {
    let instance = splitting_instance(&spec.kind)?;
    let beta = instance.beta();
    let eps = Epsilon::new(spec.schedule.eps_or_default())?;
    let e = eps.get();
    let gammas = spec
        .schedule
        .gamma
        .as_ref()
        .map(RuleSpec::to_rule)
        .unwrap_or(ScheduleRule::Constant(beta));
    let horizon = spec.stop.max_iterations;
    // The largest relaxation admissible at every step of the horizon.
    let mut cap = f64::INFINITY;
    for n in 0..horizon {
        cap = cap.min((1.0 - e) * (2.0 + e - gammas.value_at(n) / (2.0 * beta)));
    }
    if !(cap.is_finite() && cap > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "the step-size rule admits no relaxation (cap = {cap})"
        )));
    }
    let x0 = resolve_x0(&spec.x0, instance.dimension(), None)?;
    let arm = |label: &'static str, lambda: f64| -> Result<ComparisonArm> {
        let schedule = FbSchedule::new(eps, gammas.clone(), ScheduleRule::Constant(lambda))?;
        let stop = StopRule::max_iterations(horizon)?.with_residual_tolerance(tolerance)?;
        let trace = instance.run(&schedule, &x0, &stop)?;
        Ok(ComparisonArm {
            label,
            lambda,
            iterations: trace.steps(),
            reached: trace.final_residual() <= tolerance,
            final_value: trace.final_residual(),
        })
    };
    let baseline = arm("classical", cap.min(1.0))?;
    let extended = arm("extended", cap)?;
    let speedup = speedup(&baseline, &extended);
    Ok(ComparisonReport {
        name: spec.display_name().to_owned(),
        kind: spec.kind.label(),
        seed: spec.kind.seed(),
        metric: "residual",
        tolerance,
        baseline,
        extended,
        speedup,
    })
}

fn compare_feasibility(spec: &ProblemSpec, tolerance: f64) -> Result<ComparisonReport> {
    let fixture = feasibility_fixture(&spec.kind)?;
    let dimension = fixture.sets[0].dimension();
    let x0 = resolve_x0(&spec.x0, dimension, fixture.x0.as_ref())?;
    let maps = fixture.string_maps()?;
    let horizon = spec.stop.max_iterations;
    let fill = 0.95;
    let arm = |label: &'static str, lambda: f64| -> Result<ComparisonArm> {
        let schedule = Schedule::classical(ScheduleRule::Constant(lambda))?;
        let stop = StopRule::max_iterations(horizon)?;
        let trace = string_run(&maps, &fixture.weights, &schedule, &x0, &stop, &fixture.sets)?;
        let hit = trace
            .set_distances
            .iter()
            .find(|(_, d)| d.iter().copied().fold(0.0, f64::max) <= tolerance);
        let final_value = trace
            .set_distances
            .last()
            .map_or(f64::INFINITY, |(_, d)| d.iter().copied().fold(0.0, f64::max));
        Ok(match hit {
            Some((index, _)) => ComparisonArm {
                label,
                lambda,
                iterations: *index,
                reached: true,
                final_value,
            },
            None => ComparisonArm {
                label,
                lambda,
                iterations: trace.steps(),
                reached: false,
                final_value,
            },
        })
    };
    // Caps from the two constants: the legacy (max-based) one versus the
    // sharp string constant; both run in the same classical KM range.
    let baseline = arm("legacy_cap", fill / fixture.alpha_legacy.get())?;
    let extended = arm("sharp_cap", fill / fixture.alpha.get())?;
    let speedup = speedup(&baseline, &extended);
    Ok(ComparisonReport {
        name: spec.display_name().to_owned(),
        kind: spec.kind.label(),
        seed: spec.kind.seed(),
        metric: "set_distance",
        tolerance,
        baseline,
        extended,
        speedup,
    })
}

/// Run the spec's problem twice — under the conservative relaxation cap
/// and under the sharp one — and count iterations to a common tolerance
/// (the spec's residual tolerance, default 1e-8). The spec's `mode` and
/// `lambda` are ignored; the arms choose their own relaxations.
pub fn compare_relaxation(spec: &ProblemSpec) -> Result<ComparisonReport> {
    spec.validate()?;
    let tolerance = spec.stop.residual_tolerance.unwrap_or(1e-8);
    match &spec.kind {
        KindSpec::Feasibility { .. } => compare_feasibility(spec, tolerance),
        _ => compare_splitting(spec, tolerance),
    }
}

/// One spec file's fate inside a batch.
#[derive(Debug, Serialize)]
pub struct BatchEntry {
    pub path: String,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<RunReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<Value>,
}

/// Output of the `batch` command.
#[derive(Debug, Serialize)]
pub struct BatchReport {
    pub total: usize,
    pub failed: usize,
    pub entries: Vec<BatchEntry>,
}

impl BatchReport {
    /// The worst entry's exit code (0 for an empty batch).
    pub fn exit_code(&self) -> i32 {
        self.entries.iter().map(|e| e.exit_code).max().unwrap_or(0)
    }
}

/// Run every `*.json` spec in `dir` (sorted by file name) on up to `jobs`
/// worker threads. Runs are independent; one failure never stops the rest.
pub fn run_batch(dir: &Path, jobs: usize) -> Result<BatchReport> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|entry| entry.path())
        .filter(|p| p.extension().map_or(false, |ext| ext == "json") && p.is_file())
        .collect();
    paths.sort();
    let total = paths.len();
    let jobs = jobs.max(1).min(total.max(1));
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<BatchEntry>>> = (0..total).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= total {
                    break;
                }
                let path = &paths[i];
                let entry = match ProblemSpec::from_file(path).and_then(|s| run_spec(&s)) {
                    Ok(outcome) => BatchEntry {
                        path: path.display().to_string(),
                        exit_code: outcome.report.exit_code(),
                        report: Some(outcome.report),
                        error: None,
                    },
                    Err(e) => BatchEntry {
                        path: path.display().to_string(),
                        exit_code: error_exit_code(&e),
                        report: None,
                        error: Some(error_json(&e)),
                    },
                };
                *slots[i].lock().expect("batch slot poisoned") = Some(entry);
            });
        }
    });
    let entries: Vec<BatchEntry> = slots
        .into_iter()
        .map(|slot| {
            slot.into_inner()
                .expect("batch slot poisoned")
                .expect("every index was claimed by a worker")
        })
        .collect();
    let failed = entries.iter().filter(|e| e.exit_code != 0).count();
    Ok(BatchReport { total, failed, entries })
}

fn parse_alphas(raw: &[f64]) -> Result<Vec<Alpha>> {
    raw.iter().copied().map(Alpha::new).collect()
}

/// JSON for `constants compose`: the sharp constant of the composition
/// and its relaxation caps (the extended one when a slack is given).
pub fn constants_compose_json(raw: &[f64], eps: Option<f64>) -> Result<Value> {
    let alphas = parse_alphas(raw)?;
    let phi = compose_constant(&alphas)?;
    let mut out = json!({
        "alphas": raw,
        "phi": phi.get(),
    });
    match eps {
        Some(e) => {
            let ranges = relaxation_ranges(phi, Epsilon::new(e)?);
            out["eps"] = json!(e);
            out["km_sup"] = serde_json::to_value(ranges.km_sup)?;
            out["extended_sup"] = serde_json::to_value(ranges.extended_sup)?;
        }
        None => {
            out["km_sup"] = json!({ "value": 1.0 / phi.get(), "inclusive": false });
        }
    }
    Ok(out)
}

/// JSON for `constants compare`: the sharp constant next to the older
/// bounds it improves on (the additive bound exists for two factors).
pub fn constants_compare_json(raw: &[f64]) -> Result<Value> {
    let alphas = parse_alphas(raw)?;
    let phi = compose_constant(&alphas)?;
    let phi_tilde = max_based_bound(&alphas)?;
    let mut out = json!({
        "alphas": raw,
        "phi": phi.get(),
        "phi_tilde": phi_tilde.get(),
    });
    if let [a1, a2] = alphas[..] {
        out["phi_hat"] = json!(crate::constants::additive_bound(a1, a2).get());
        out["additive_gap"] = json!(crate::constants::additive_gap(a1, a2));
    }
    Ok(out)
}

/// JSON for `constants fb`: the averagedness constant of the
/// forward-backward step and the top of its relaxation range.
pub fn constants_fb_json(beta: f64, gamma: f64, eps: f64) -> Result<Value> {
    let params = fb_parameters(beta, gamma, Epsilon::new(eps)?)?;
    Ok(json!({
        "beta": beta,
        "gamma": gamma,
        "eps": eps,
        "phi": params.phi.get(),
        "lambda_sup": params.lambda_sup,
    }))
}
