//! The JSON problem-spec format consumed by `run`, `compare`, and `batch`.
//!
//! One format, one parser: specs are plain JSON documents. A spec that
//! parses has also passed structural validation — range checks that need
//! the horizon (per-index λ/γ admissibility) happen in the runners, before
//! any iterate is produced.

use crate::error::{Error, Result};
use crate::iteration::ScheduleRule;
use crate::operators::SetDescriptor;
use crate::Point;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Schedule rule as written in spec files, e.g.
/// `{"rule": "constant", "value": 1.44}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum RuleSpec {
    Constant { value: f64 },
    Table { values: Vec<f64> },
    Cyclic { values: Vec<f64> },
    Harmonic { scale: f64 },
}

impl RuleSpec {
    pub fn to_rule(&self) -> ScheduleRule {
        match self {
            RuleSpec::Constant { value } => ScheduleRule::Constant(*value),
            RuleSpec::Table { values } => ScheduleRule::Table(values.clone()),
            RuleSpec::Cyclic { values } => ScheduleRule::Cyclic(values.clone()),
            RuleSpec::Harmonic { scale } => ScheduleRule::Harmonic { scale: *scale },
        }
    }

    pub fn from_rule(rule: &ScheduleRule) -> Self {
        match rule {
            ScheduleRule::Constant(value) => RuleSpec::Constant { value: *value },
            ScheduleRule::Table(values) => RuleSpec::Table { values: values.clone() },
            ScheduleRule::Cyclic(values) => RuleSpec::Cyclic { values: values.clone() },
            ScheduleRule::Harmonic { scale } => RuleSpec::Harmonic { scale: *scale },
        }
    }
}

/// Which relaxation convention the run uses: `classical` keeps λ_n ≤ 1
/// (the pre-sharp-constant convention), `extended` admits the full range
/// the averagedness constants permit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSpec {
    Classical,
    Extended,
}

/// One summable error sequence: `‖e_n‖ = scale/(n+1)²`, seeded direction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorTermSpec {
    pub scale: f64,
    #[serde(default)]
    pub seed: u64,
}

/// Error injection for splitting runs: `resolvent` is the `a_n` sequence,
/// `forward` the `b_n` sequence.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorsSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolvent: Option<ErrorTermSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forward: Option<ErrorTermSpec>,
}

/// The schedule block: mode, slack, step-size rule (splitting kinds only;
/// defaults to the fixture's β), relaxation rule, and error terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub mode: ModeSpec,
    /// Slack ε; defaults to 0.1 where one is needed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<RuleSpec>,
    pub lambda: RuleSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub errors: Option<ErrorsSpec>,
}

impl ScheduleSpec {
    pub fn eps_or_default(&self) -> f64 {
        self.eps.unwrap_or(0.1)
    }
}

/// The stop block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopSpec {
    pub max_iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_tolerance: Option<f64>,
}

fn default_thin() -> usize {
    1
}

/// Where traces go. Relative paths resolve against the working directory,
/// unless `OPSPLIT_TRACE_DIR` is set — then every file lands in that
/// directory (by base name).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<String>,
    /// Keep every `thin`-th CSV row (the final row always survives).
    #[serde(default = "default_thin")]
    pub thin: usize,
}

/// A convex set, spec-file flavored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    Halfspace { normal: Vec<f64>, offset: f64 },
    Ball { center: Vec<f64>, radius: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

impl SetSpec {
    pub fn to_descriptor(&self) -> Result<SetDescriptor> {
        match self {
            SetSpec::Halfspace { normal, offset } => {
                SetDescriptor::halfspace(Point::from_vec(normal.clone()), *offset)
            }
            SetSpec::Ball { center, radius } => {
                SetDescriptor::ball(Point::from_vec(center.clone()), *radius)
            }
            SetSpec::Box { lower, upper } => {
                SetDescriptor::box_set(Point::from_vec(lower.clone()), Point::from_vec(upper.clone()))
            }
        }
    }
}

fn default_lasso_rows() -> usize {
    20
}
fn default_lasso_cols() -> usize {
    50
}
fn default_tau() -> f64 {
    0.1
}
fn default_dimension() -> usize {
    2
}
fn default_shift() -> f64 {
    3.0
}

/// What to solve. Each kind has a deterministic seeded builder behind it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KindSpec {
    /// `min τ‖x‖₁ + ½‖Ax − b‖²` with a seeded Gaussian design, scaled to
    /// unit spectral norm, and observations from a sparse ground truth.
    Lasso {
        #[serde(default = "default_lasso_rows")]
        rows: usize,
        #[serde(default = "default_lasso_cols")]
        cols: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_tau")]
        tau: f64,
    },
    /// Find a point in the intersection of convex sets by string
    /// averaging. Omitted sets produce the seeded two-halfspace-plus-ball
    /// instance; omitted strings make each set its own string.
    Feasibility {
        #[serde(default = "default_dimension")]
        dimension: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sets: Option<Vec<SetSpec>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        strings: Option<Vec<Vec<usize>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    /// `0 ∈ Mx + (x − c)` for a monotone matrix `M`: resolvent of `M` plus
    /// the 1-cocoercive shift; analytic solution `(I + M)⁻¹ c`.
    MonotoneLinear { matrix: Vec<Vec<f64>>, center: Vec<f64> },
    /// `min |x| + ½(x − shift)²` on the line; solution is the
    /// soft-threshold of the shift by 1.
    ScalarFixture {
        #[serde(default = "default_shift")]
        shift: f64,
    },
}

impl KindSpec {
    pub fn label(&self) -> &'static str {
        match self {
            KindSpec::Lasso { .. } => "lasso",
            KindSpec::Feasibility { .. } => "feasibility",
            KindSpec::MonotoneLinear { .. } => "monotone_linear",
            KindSpec::ScalarFixture { .. } => "scalar_fixture",
        }
    }

    /// The seed the kind was built from (0 when the kind has none).
    pub fn seed(&self) -> u64 {
        match self {
            KindSpec::Lasso { seed, .. } | KindSpec::Feasibility { seed, .. } => *seed,
            _ => 0,
        }
    }
}

/// A full benchmark problem description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(default)]
    pub name: String,
    pub kind: KindSpec,
    pub schedule: ScheduleSpec,
    pub stop: StopSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ProblemSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec types serialize infallibly")
    }

    /// Display name: the explicit one, or the kind label.
    pub fn display_name(&self) -> &str {
        if self.name.is_empty() {
            self.kind.label()
        } else {
            &self.name
        }
    }

    /// Structural validation: everything checkable without a horizon.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidSpec(msg));

        self.schedule.lambda.to_rule().check_positive("relaxation")?;
        if let Some(gamma) = &self.schedule.gamma {
            gamma.to_rule().check_positive("step-size")?;
        }
        if let Some(eps) = self.schedule.eps {
            crate::constants::Epsilon::new(eps)?;
        }
        if let Some(errors) = &self.schedule.errors {
            for term in [&errors.resolvent, &errors.forward].into_iter().flatten() {
                if !(term.scale.is_finite() && term.scale >= 0.0) {
                    return fail(format!(
                        "error scale must be nonnegative and finite, got {}",
                        term.scale
                    ));
                }
            }
        }
        if self.stop.max_iterations == 0 {
            return fail("stop.max_iterations must be at least 1".into());
        }
        if let Some(tol) = self.stop.residual_tolerance {
            if !(tol.is_finite() && tol >= 0.0) {
                return fail(format!(
                    "stop.residual_tolerance must be nonnegative and finite, got {tol}"
                ));
            }
        }
        if let Some(output) = &self.output {
            if output.thin == 0 {
                return fail("output.thin must be at least 1".into());
            }
        }
        if let Some(x0) = &self.x0 {
            if x0.is_empty() || x0.iter().any(|v| !v.is_finite()) {
                return fail("x0 must be a nonempty finite vector".into());
            }
        }

        match &self.kind {
            KindSpec::Lasso { rows, cols, tau, .. } => {
                if *rows == 0 || *cols == 0 {
                    return fail("lasso needs positive rows and cols".into());
                }
                if !(tau.is_finite() && *tau > 0.0) {
                    return fail(format!("lasso regularization tau must be positive, got {tau}"));
                }
            }
            KindSpec::Feasibility { dimension, sets, strings, weights, .. } => {
                if *dimension == 0 {
                    return fail("feasibility needs a positive dimension".into());
                }
                let set_count = match sets {
                    Some(list) => {
                        if list.is_empty() {
                            return fail("feasibility set list must be nonempty".into());
                        }
                        for s in list {
                            s.to_descriptor()?; // dimension/shape checks
                        }
                        list.len()
                    }
                    None => 3, // the seeded builder's two halfspaces + ball
                };
                if let Some(strings) = strings {
                    if strings.is_empty() || strings.iter().any(|s| s.is_empty()) {
                        return fail("feasibility strings must be nonempty".into());
                    }
                    if let Some(bad) = strings.iter().flatten().find(|i| **i >= set_count) {
                        return fail(format!(
                            "string references set {bad} but only {set_count} sets exist"
                        ));
                    }
                    if let Some(weights) = weights {
                        if weights.len() != strings.len() {
                            return Err(Error::LengthMismatch {
                                context: "string weights",
                                left: strings.len(),
                                right: weights.len(),
                            });
                        }
                    }
                } else if weights.is_some() {
                    return fail("weights without strings are ambiguous; list the strings".into());
                }
            }
            KindSpec::MonotoneLinear { matrix, center } => {
                let n = matrix.len();
                if n == 0 || matrix.iter().any(|row| row.len() != n) {
                    return fail("monotone_linear matrix must be square and nonempty".into());
                }
                if center.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: center.len(),
                    });
                }
            }
            KindSpec::ScalarFixture { shift } => {
                if !shift.is_finite() {
                    return fail(format!("scalar fixture shift must be finite, got {shift}"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lasso_spec_text() -> &'static str {
        r#"{
            "name": "lasso-extended",
            "kind": {"type": "lasso", "rows": 20, "cols": 50, "seed": 0, "tau": 0.1},
            "schedule": {
                "mode": "extended",
                "eps": 0.1,
                "lambda": {"rule": "constant", "value": 1.44}
            },
            "stop": {"max_iterations": 5000, "residual_tolerance": 1e-8},
            "output": {"csv": "lasso.csv", "thin": 10}
        }"#
    }

    #[test]
    fn parses_the_lasso_example() {
        let spec = ProblemSpec::from_json(lasso_spec_text()).unwrap();
        assert_eq!(spec.display_name(), "lasso-extended");
        assert_eq!(spec.kind.label(), "lasso");
        assert_eq!(spec.kind.seed(), 0);
        assert_eq!(
            spec.schedule.lambda,
            RuleSpec::Constant { value: 1.44 }
        );
        assert_eq!(spec.output.as_ref().unwrap().thin, 10);
    }

    #[test]
    fn exported_specs_reparse_identically() {
        let samples = vec![
            ProblemSpec::from_json(lasso_spec_text()).unwrap(),
            ProblemSpec::from_json(
                r#"{
                    "kind": {"type": "feasibility", "dimension": 2, "seed": 7,
                             "sets": [
                                {"type": "halfspace", "normal": [1, 0], "offset": 0},
                                {"type": "halfspace", "normal": [0, 1], "offset": 0},
                                {"type": "ball", "center": [-1, -1], "radius": 2}
                             ],
                             "strings": [[0, 1], [2]],
                             "weights": [0.5, 0.5]},
                    "schedule": {"mode": "classical", "lambda": {"rule": "constant", "value": 1.6}},
                    "stop": {"max_iterations": 3000}
                }"#,
            )
            .unwrap(),
            ProblemSpec::from_json(
                r#"{
                    "kind": {"type": "monotone_linear", "matrix": [[0, 1], [-1, 0]], "center": [1, 2]},
                    "schedule": {"mode": "extended",
                                 "gamma": {"rule": "cyclic", "values": [0.5, 1.0]},
                                 "lambda": {"rule": "table", "values": [1.0, 1.2]},
                                 "errors": {"forward": {"scale": 0.01, "seed": 3}}},
                    "stop": {"max_iterations": 100, "residual_tolerance": 1e-10}
                }"#,
            )
            .unwrap(),
            ProblemSpec::from_json(
                r#"{
                    "kind": {"type": "scalar_fixture"},
                    "schedule": {"mode": "extended", "lambda": {"rule": "harmonic", "scale": 1.0}},
                    "stop": {"max_iterations": 10},
                    "x0": [4.0]
                }"#,
            )
            .unwrap(),
        ];
        for spec in samples {
            let reparsed = ProblemSpec::from_json(&spec.to_json_pretty()).unwrap();
            assert_eq!(spec, reparsed);
        }
    }

    #[test]
    fn defaults_fill_in() {
        let spec = ProblemSpec::from_json(
            r#"{
                "kind": {"type": "lasso"},
                "schedule": {"mode": "classical", "lambda": {"rule": "constant", "value": 1.0}},
                "stop": {"max_iterations": 10}
            }"#,
        )
        .unwrap();
        match spec.kind {
            KindSpec::Lasso { rows, cols, seed, tau } => {
                assert_eq!((rows, cols, seed), (20, 50, 0));
                assert_eq!(tau, 0.1);
            }
            _ => unreachable!(),
        }
        assert_eq!(spec.schedule.eps_or_default(), 0.1);
    }

    #[test]
    fn bad_specs_are_rejected_with_reasons() {
        // Unknown field.
        assert!(ProblemSpec::from_json(
            r#"{"kind": {"type": "scalar_fixture"}, "schedule": {"mode": "extended",
                "lambda": {"rule": "constant", "value": 1.0}}, "stop": {"max_iterations": 5},
                "extra": true}"#
        )
        .is_err());
        // Nonpositive relaxation.
        assert!(ProblemSpec::from_json(
            r#"{"kind": {"type": "scalar_fixture"}, "schedule": {"mode": "extended",
                "lambda": {"rule": "constant", "value": 0.0}}, "stop": {"max_iterations": 5}}"#
        )
        .is_err());
        // String index out of range.
        assert!(ProblemSpec::from_json(
            r#"{"kind": {"type": "feasibility", "strings": [[0, 3]]},
                "schedule": {"mode": "classical", "lambda": {"rule": "constant", "value": 1.0}},
                "stop": {"max_iterations": 5}}"#
        )
        .is_err());
        // Ragged matrix.
        assert!(ProblemSpec::from_json(
            r#"{"kind": {"type": "monotone_linear", "matrix": [[1, 0], [0]], "center": [0, 0]},
                "schedule": {"mode": "extended", "lambda": {"rule": "constant", "value": 1.0}},
                "stop": {"max_iterations": 5}}"#
        )
        .is_err());
        // Zero iterations.
        assert!(ProblemSpec::from_json(
            r#"{"kind": {"type": "scalar_fixture"}, "schedule": {"mode": "extended",
                "lambda": {"rule": "constant", "value": 1.0}}, "stop": {"max_iterations": 0}}"#
        )
        .is_err());
    }

    proptest! {
        #[test]
        fn rule_specs_round_trip(rule in rule_strategy()) {
            let json = serde_json::to_string(&rule).unwrap();
            let back: RuleSpec = serde_json::from_str(&json).unwrap();
            prop_assert_eq!(rule, back);
        }
    }

    fn rule_strategy() -> impl Strategy<Value = RuleSpec> {
        let value = 0.01f64..10.0;
        prop_oneof![
            (0.01f64..10.0).prop_map(|value| RuleSpec::Constant { value }),
            proptest::collection::vec(value.clone(), 1..6)
                .prop_map(|values| RuleSpec::Table { values }),
            proptest::collection::vec(value, 1..6).prop_map(|values| RuleSpec::Cyclic { values }),
            (0.01f64..10.0).prop_map(|scale| RuleSpec::Harmonic { scale }),
        ]
    }
}
