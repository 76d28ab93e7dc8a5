//! Relaxation schedules and stopping rules.

use crate::constants::{relaxation_ranges, Alpha, Epsilon, BOUNDARY_SLACK};
use crate::error::{Error, Result};
use crate::Point;

/// Closed-form rule generating a relaxation (or step-size) sequence.
#[derive(Clone, Debug, PartialEq)]
pub enum ScheduleRule {
    /// The same value at every index.
    Constant(f64),
    /// Explicit leading values; indices past the end repeat the final value
    /// (runs annotate their trace when that happens).
    Table(Vec<f64>),
    /// `values[n % len]` — e.g. a step size alternating between two values.
    Cyclic(Vec<f64>),
    /// `scale / (n + 1)`.
    Harmonic { scale: f64 },
}

impl ScheduleRule {
    pub fn value_at(&self, n: usize) -> f64 {
        match self {
            ScheduleRule::Constant(v) => *v,
            ScheduleRule::Table(values) => values[n.min(values.len() - 1)],
            ScheduleRule::Cyclic(values) => values[n % values.len()],
            ScheduleRule::Harmonic { scale } => scale / (n as f64 + 1.0),
        }
    }

    /// First index at which a table starts repeating its final value.
    pub(crate) fn repeat_boundary(&self) -> Option<usize> {
        match self {
            ScheduleRule::Table(values) if values.len() > 1 => Some(values.len()),
            _ => None,
        }
    }

    /// The value the rule settles on, when it settles at all.
    pub fn eventually_constant(&self) -> Option<f64> {
        match self {
            ScheduleRule::Constant(v) => Some(*v),
            ScheduleRule::Table(values) => values.last().copied(),
            ScheduleRule::Cyclic(values) if values.len() == 1 => Some(values[0]),
            ScheduleRule::Cyclic(_) => None,
            ScheduleRule::Harmonic { .. } => None,
        }
    }

    pub(crate) fn check_positive(&self, what: &'static str) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        let fine = match self {
            ScheduleRule::Constant(v) => ok(*v),
            ScheduleRule::Table(values) | ScheduleRule::Cyclic(values) => {
                !values.is_empty() && values.iter().all(|v| ok(*v))
            }
            ScheduleRule::Harmonic { scale } => ok(*scale),
        };
        if fine {
            Ok(())
        } else {
            Err(Error::InvalidSpec(format!(
                "{what} rule must produce positive finite values (and a table must be nonempty)"
            )))
        }
    }
}

/// Which relaxation range the schedule is validated against.
#[derive(Clone, Copy, Debug)]
pub enum ScheduleMode {
    /// `λ_n ∈ ]0, 1/α_n[` — both endpoints excluded.
    Classical,
    /// `λ_n ∈ [ε, (1−ε)(1+ε·α_n)/α_n]` — both endpoints included.
    Extended(Epsilon),
}

/// A relaxation sequence plus the range it promises to stay in. The range
/// depends on the averagedness constant the value is used against, so the
/// actual check happens at run time, index by index.
#[derive(Clone, Debug)]
pub struct Schedule {
    rule: ScheduleRule,
    mode: ScheduleMode,
}

impl Schedule {
    pub fn classical(rule: ScheduleRule) -> Result<Self> {
        rule.check_positive("relaxation")?;
        Ok(Schedule {
            rule,
            mode: ScheduleMode::Classical,
        })
    }

    pub fn extended(rule: ScheduleRule, eps: Epsilon) -> Result<Self> {
        rule.check_positive("relaxation")?;
        Ok(Schedule {
            rule,
            mode: ScheduleMode::Extended(eps),
        })
    }

    pub fn lambda(&self, n: usize) -> f64 {
        self.rule.value_at(n)
    }

    pub fn rule(&self) -> &ScheduleRule {
        &self.rule
    }

    pub fn mode(&self) -> ScheduleMode {
        self.mode
    }

    pub fn is_extended(&self) -> bool {
        matches!(self.mode, ScheduleMode::Extended(_))
    }

    /// Checks `lambda` against the mode's range for the constant `alpha`.
    /// Open endpoints are compared exactly; closed endpoints receive a
    /// `BOUNDARY_SLACK`-relative allowance so that a bound and a lambda
    /// computed through different but equivalent formulas still match.
    pub fn validate(&self, n: usize, lambda: f64, alpha: Alpha) -> Result<()> {
        match self.mode {
            ScheduleMode::Classical => {
                let upper = 1.0 / alpha.get();
                if lambda > 0.0 && lambda < upper {
                    Ok(())
                } else {
                    Err(Error::RelaxationOutOfRange {
                        index: n,
                        lambda,
                        lower: 0.0,
                        upper,
                        inclusive: false,
                    })
                }
            }
            ScheduleMode::Extended(eps) => {
                let upper = relaxation_ranges(alpha, eps).extended_sup.value;
                let lower = eps.get();
                let upper_ok = lambda <= upper + BOUNDARY_SLACK * upper.max(1.0);
                let lower_ok = lambda >= lower - BOUNDARY_SLACK;
                if lower_ok && upper_ok {
                    Ok(())
                } else {
                    Err(Error::RelaxationOutOfRange {
                        index: n,
                        lambda,
                        lower,
                        upper,
                        inclusive: true,
                    })
                }
            }
        }
    }
}

/// A reference point a run measures its distance against, stopping early
/// when the distance drops to `tolerance` (a zero tolerance never stops the
/// run; the point then serves diagnostics only).
#[derive(Clone, Debug)]
pub struct Target {
    pub point: Point,
    pub tolerance: f64,
}

/// When a run ends: always after `max_iterations` steps, earlier when the
/// residual or the distance to a target undercuts its tolerance.
#[derive(Clone, Debug)]
pub struct StopRule {
    max_iterations: usize,
    residual_tolerance: f64,
    target: Option<Target>,
}

impl StopRule {
    /// A rule that only counts iterations. `max_iterations` must be at
    /// least 1 so that some bound is always binding.
    pub fn max_iterations(max_iterations: usize) -> Result<Self> {
        if max_iterations == 0 {
            return Err(Error::InvalidSpec(
                "a stop rule needs at least one iteration".into(),
            ));
        }
        Ok(StopRule {
            max_iterations,
            residual_tolerance: 0.0,
            target: None,
        })
    }

    /// Also stop once the residual `‖T_n x_n − x_n‖` reaches `tolerance`
    /// (checked before the step, so a fixed initial point stops at
    /// iteration 0). Zero disables the check.
    pub fn with_residual_tolerance(mut self, tolerance: f64) -> Result<Self> {
        if !(tolerance.is_finite() && tolerance >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "residual tolerance must be a nonnegative finite value, got {tolerance}"
            )));
        }
        self.residual_tolerance = tolerance;
        Ok(self)
    }

    /// Supplies a reference point. The run records distances to it and
    /// checks the Fejér ledger against it; with a positive tolerance it
    /// also stops once the iterate gets that close.
    pub fn with_target(mut self, point: Point, tolerance: f64) -> Result<Self> {
        if !(tolerance.is_finite() && tolerance >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "target tolerance must be a nonnegative finite value, got {tolerance}"
            )));
        }
        crate::ensure_finite(&point, "target point")?;
        self.target = Some(Target { point, tolerance });
        Ok(self)
    }

    pub fn max(&self) -> usize {
        self.max_iterations
    }

    pub fn residual_tolerance(&self) -> f64 {
        self.residual_tolerance
    }

    pub fn target(&self) -> Option<&Target> {
        self.target.as_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn rules_generate_their_sequences() {
        assert_eq!(ScheduleRule::Constant(1.3).value_at(0), 1.3);
        assert_eq!(ScheduleRule::Constant(1.3).value_at(999), 1.3);
        let table = ScheduleRule::Table(vec![0.5, 1.0]);
        assert_eq!(table.value_at(0), 0.5);
        assert_eq!(table.value_at(1), 1.0);
        assert_eq!(table.value_at(7), 1.0, "tables repeat their final value");
        assert_eq!(table.repeat_boundary(), Some(2));
        let harmonic = ScheduleRule::Harmonic { scale: 2.0 };
        assert_eq!(harmonic.value_at(0), 2.0);
        assert_eq!(harmonic.value_at(3), 0.5);
        assert_eq!(harmonic.eventually_constant(), None);
    }

    #[test]
    fn construction_rejects_degenerate_rules() {
        assert!(Schedule::classical(ScheduleRule::Constant(0.0)).is_err());
        assert!(Schedule::classical(ScheduleRule::Constant(f64::NAN)).is_err());
        assert!(Schedule::classical(ScheduleRule::Table(vec![])).is_err());
        assert!(Schedule::classical(ScheduleRule::Table(vec![1.0, -0.5])).is_err());
        assert!(Schedule::classical(ScheduleRule::Harmonic { scale: 0.0 }).is_err());
    }

    #[test]
    fn classical_range_is_open() {
        let s = Schedule::classical(ScheduleRule::Constant(1.0)).unwrap();
        let half = Alpha::half();
        assert!(s.validate(0, 1.9999, half).is_ok());
        match s.validate(3, 2.0, half) {
            Err(Error::RelaxationOutOfRange {
                index,
                lambda,
                lower,
                upper,
                inclusive,
            }) => {
                assert_eq!(index, 3);
                assert_eq!(lambda, 2.0);
                assert_eq!(lower, 0.0);
                assert_eq!(upper, 2.0);
                assert!(!inclusive);
            }
            other => panic!("expected a range rejection, got {other:?}"),
        }
        assert!(s.validate(0, 0.0, half).is_err());
    }

    #[test]
    fn extended_range_is_closed_with_slack() {
        let eps = Epsilon::new(0.1).unwrap();
        let s = Schedule::extended(ScheduleRule::Constant(1.44), eps).unwrap();
        let phi = Alpha::new(2.0 / 3.0).unwrap();
        // Upper bound (1-eps)(1+eps*phi)/phi = 1.44; the endpoint itself and
        // the lower endpoint eps are both admissible.
        assert!(s.validate(0, 1.44, phi).is_ok());
        assert!(s.validate(0, 0.1, phi).is_ok());
        assert!(s.validate(0, 1.4401, phi).is_err());
        assert!(s.validate(0, 0.09, phi).is_err());
    }

    #[test]
    fn stop_rules_validate_their_pieces() {
        assert!(StopRule::max_iterations(0).is_err());
        let rule = StopRule::max_iterations(50)
            .unwrap()
            .with_residual_tolerance(1e-8)
            .unwrap()
            .with_target(dvector![1.0, 2.0], 0.0)
            .unwrap();
        assert_eq!(rule.max(), 50);
        assert_eq!(rule.residual_tolerance(), 1e-8);
        assert_eq!(rule.target().unwrap().tolerance, 0.0);
        assert!(StopRule::max_iterations(5)
            .unwrap()
            .with_residual_tolerance(-1.0)
            .is_err());
        assert!(StopRule::max_iterations(5)
            .unwrap()
            .with_target(dvector![f64::NAN], 0.1)
            .is_err());
    }
}
