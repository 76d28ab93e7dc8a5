//! Scalar calculus of averagedness constants.
//!
//! An operator `T` is *alpha-averaged* when it can be written as
//! `T = (1 - alpha) Id + alpha R` with `R` nonexpansive and
//! `alpha` in `]0, 1[`. This module computes the constants that drive
//! everything else in the crate: the sharp constant of a composition of
//! averaged operators, the constant of a convex combination, the coarser
//! classical bounds those sharpen, and the relaxation ranges the constants
//! buy you in a Krasnosel'skii-Mann iteration.
//!
//! Every formula has exactly one home here; operator combinators and
//! iteration engines call in rather than re-deriving constants locally.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Relative slack used when testing membership in a *closed* parameter
/// interval, so that values sitting exactly on an analytic bound (for example
/// a relaxation equal to the stated supremum) are not rejected for a 1-ulp
/// rounding difference. Open endpoints are always compared exactly.
pub const BOUNDARY_SLACK: f64 = 1e-12;

/// An averagedness constant: a real number strictly between 0 and 1.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Alpha(f64);

impl Alpha {
    /// Validates and wraps a constant. Values outside `]0, 1[` (including
    /// NaN and infinities) are rejected.
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 && value < 1.0 {
            Ok(Alpha(value))
        } else {
            Err(Error::InvalidAlpha(value))
        }
    }

    /// The constant of a firmly nonexpansive operator (projections,
    /// resolvents, proximity operators).
    pub fn half() -> Self {
        Alpha(0.5)
    }

    /// The underlying value.
    pub fn get(self) -> f64 {
        self.0
    }

    /// Wraps a value produced by one of the constant formulas in this
    /// module. Those formulas map valid inputs into `]0, 1[` exactly, but at
    /// the extreme edge of the parameter space the final rounding step can
    /// land on 1.0. Averagedness constants are upward closed (an
    /// alpha-averaged operator is also alpha'-averaged for alpha' >= alpha),
    /// so saturating to the largest double below 1 keeps the result a valid,
    /// conservative constant.
    fn from_formula(value: f64) -> Self {
        debug_assert!(value.is_finite() && value > 0.0, "constant formula produced {value}");
        if value >= 1.0 {
            Alpha(1.0 - f64::EPSILON / 2.0)
        } else {
            Alpha(value)
        }
    }
}

impl TryFrom<f64> for Alpha {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        Alpha::new(value)
    }
}

impl From<Alpha> for f64 {
    fn from(a: Alpha) -> f64 {
        a.0
    }
}

/// Convex-combination weights: finitely many entries in `]0, 1]` summing to
/// one (within 1e-12).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Weights(Vec<f64>);

impl Weights {
    /// Validates and wraps a weight vector.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidWeights("weight list is empty".into()));
        }
        for (i, &w) in entries.iter().enumerate() {
            if !(w.is_finite() && w > 0.0 && w <= 1.0) {
                return Err(Error::InvalidWeights(format!(
                    "entry {i} is {w}, expected a value in ]0, 1]"
                )));
            }
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidWeights(format!("entries sum to {sum}, expected 1")));
        }
        Ok(Weights(entries))
    }

    /// Equal weights `1/m` repeated `m` times.
    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidWeights("cannot build uniform weights of length 0".into()));
        }
        Ok(Weights(vec![1.0 / m as f64; m]))
    }

    /// The weight entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Number of weights.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Whether the list is empty (never true for a validated value).
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for Weights {
    type Error = Error;
    fn try_from(value: Vec<f64>) -> Result<Self> {
        Weights::new(value)
    }
}

impl From<Weights> for Vec<f64> {
    fn from(w: Weights) -> Vec<f64> {
        w.0
    }
}

/// A slack parameter strictly between 0 and 1/2, used by the enlarged
/// relaxation ranges.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Epsilon(f64);

impl Epsilon {
    /// Validates and wraps a slack value.
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 && value < 0.5 {
            Ok(Epsilon(value))
        } else {
            Err(Error::InvalidEpsilon(value))
        }
    }

    /// The underlying value.
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Epsilon {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        Epsilon::new(value)
    }
}

impl From<Epsilon> for f64 {
    fn from(e: Epsilon) -> f64 {
        e.0
    }
}

/// Sharp constant of the composition of two averaged operators:
/// `(a1 + a2 - 2 a1 a2) / (1 - a1 a2)`.
pub fn compose_pair(a1: Alpha, a2: Alpha) -> Alpha {
    let (a1, a2) = (a1.get(), a2.get());
    Alpha::from_formula((a1 + a2 - 2.0 * a1 * a2) / (1.0 - a1 * a2))
}

/// Sharp constant of an m-fold composition, in closed form:
/// with `s = sum_i a_i / (1 - a_i)`, the constant is `1 / (1 + 1/s)`.
///
/// A single-element list returns its constant unchanged; an empty list is
/// rejected.
pub fn compose_constant(alphas: &[Alpha]) -> Result<Alpha> {
    match alphas {
        [] => Err(Error::EmptyInput("composition constant needs at least one factor")),
        [only] => Ok(*only),
        _ => {
            let s: f64 = alphas.iter().map(|a| a.get() / (1.0 - a.get())).sum();
            Ok(Alpha::from_formula(1.0 / (1.0 + 1.0 / s)))
        }
    }
}

/// The same constant computed by folding the two-factor formula from the
/// left: `b_1 = a_1`, `b_{k+1} = (a_{k+1} + b_k - 2 a_{k+1} b_k) / (1 - a_{k+1} b_k)`.
///
/// Useful as an independent cross-check of [`compose_constant`]; the two
/// agree to roughly machine precision.
pub fn compose_constant_recursive(alphas: &[Alpha]) -> Result<Alpha> {
    let (first, rest) = alphas
        .split_first()
        .ok_or(Error::EmptyInput("composition constant needs at least one factor"))?;
    let mut acc = *first;
    for a in rest {
        acc = compose_pair(*a, acc);
    }
    Ok(acc)
}

/// Elementary symmetric polynomials `sigma_1, ..., sigma_m` of the
/// constants, by the standard one-variable-at-a-time recursion
/// `s_j(k+1) = s_j(k) + a_{k+1} s_{j-1}(k)`.
pub fn elementary_symmetric(alphas: &[Alpha]) -> Result<Vec<f64>> {
    if alphas.is_empty() {
        return Err(Error::EmptyInput("elementary symmetric polynomials need at least one value"));
    }
    let m = alphas.len();
    let mut s = vec![0.0; m + 1];
    s[0] = 1.0;
    for (k, a) in alphas.iter().enumerate() {
        let a = a.get();
        for j in (1..=k + 1).rev() {
            s[j] += a * s[j - 1];
        }
    }
    Ok(s[1..].to_vec())
}

/// Sharp composition constant expressed through elementary symmetric
/// polynomials:
///
/// `phi = [sum_j (-1)^{j-1} j sigma_j] / [1 + sum_{j>=2} (-1)^{j-1} (j-1) sigma_j]`.
///
/// Requires at least two factors (the symmetric rearrangement is specific to
/// genuine products).
pub fn compose_constant_symmetric(alphas: &[Alpha]) -> Result<Alpha> {
    if alphas.len() < 2 {
        return Err(Error::EmptyInput("symmetric form needs at least two factors"));
    }
    let sigma = elementary_symmetric(alphas)?;
    let mut numerator = 0.0;
    let mut denominator = 1.0;
    for (idx, &s) in sigma.iter().enumerate() {
        let j = (idx + 1) as f64;
        let sign = if idx % 2 == 0 { 1.0 } else { -1.0 };
        numerator += sign * j * s;
        if idx >= 1 {
            denominator += sign * (j - 1.0) * s;
        }
    }
    Ok(Alpha::from_formula(numerator / denominator))
}

/// Result of the series form of the composition constant: the truncated
/// value and a rigorous bound on how far below the exact constant it sits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesEstimate {
    /// Truncated value `S_d / (1 + S_d)` with `S_d = sum_{l<=d} sum_i a_i^l`.
    pub value: f64,
    /// Upper bound on `phi - value`, obtained by pushing the geometric tail
    /// bound `m a_max^{d+1} / (1 - a_max)` through the increasing map
    /// `s -> s / (1 + s)`.
    pub tail_bound: f64,
}

/// Series form of the sharp composition constant, truncated at `depth`
/// terms: `phi = S / (1 + S)` where `S` is the double sum of all positive
/// powers of the constants. The truncation converges monotonically upward.
pub fn compose_constant_series(alphas: &[Alpha], depth: usize) -> Result<SeriesEstimate> {
    if alphas.is_empty() {
        return Err(Error::EmptyInput("composition constant needs at least one factor"));
    }
    if depth == 0 {
        return Err(Error::EmptyInput("series truncation depth must be at least 1"));
    }
    let mut s_d = 0.0;
    for a in alphas {
        let a = a.get();
        let mut power = a;
        for _ in 0..depth {
            s_d += power;
            power *= a;
        }
    }
    let a_max = alphas.iter().map(|a| a.get()).fold(0.0, f64::max);
    let m = alphas.len() as f64;
    let tail = m * a_max.powi(depth as i32 + 1) / (1.0 - a_max);
    let f = |s: f64| s / (1.0 + s);
    Ok(SeriesEstimate { value: f(s_d), tail_bound: f(s_d + tail) - f(s_d) })
}

/// Constant of a convex combination of averaged operators: the weighted
/// average `sum_i w_i a_i`.
pub fn combination_constant(weights: &Weights, alphas: &[Alpha]) -> Result<Alpha> {
    if weights.len() != alphas.len() {
        return Err(Error::LengthMismatch {
            context: "combination constant",
            left: weights.len(),
            right: alphas.len(),
        });
    }
    let value: f64 =
        weights.as_slice().iter().zip(alphas).map(|(w, a)| w * a.get()).sum();
    Ok(Alpha::from_formula(value))
}

/// Classical composition bound built from the largest constant alone:
/// `m a_max / ((m - 1) a_max + 1)`. Always at least the sharp constant,
/// with equality exactly when all constants coincide.
pub fn max_based_bound(alphas: &[Alpha]) -> Result<Alpha> {
    if alphas.is_empty() {
        return Err(Error::EmptyInput("max-based bound needs at least one factor"));
    }
    let m = alphas.len() as f64;
    let a_max = alphas.iter().map(|a| a.get()).fold(0.0, f64::max);
    Ok(Alpha::from_formula(m * a_max / ((m - 1.0) * a_max + 1.0)))
}

/// Classical two-factor composition bound `a1 + a2 - a1 a2`. Strictly
/// larger than the sharp two-factor constant; see [`additive_gap`] for the
/// exact amount.
pub fn additive_bound(a1: Alpha, a2: Alpha) -> Alpha {
    let (a1, a2) = (a1.get(), a2.get());
    Alpha::from_formula(a1 + a2 - a1 * a2)
}

/// Exact gap between [`additive_bound`] and the sharp two-factor constant:
/// `a1 a2 (1 - a1)(1 - a2) / (1 - a1 a2)`.
pub fn additive_gap(a1: Alpha, a2: Alpha) -> f64 {
    let (a1, a2) = (a1.get(), a2.get());
    a1 * a2 * (1.0 - a1) * (1.0 - a2) / (1.0 - a1 * a2)
}

/// Constant of a string-averaged operator: strings of averaged operators
/// are composed (sharp constant per string), then convexly combined.
pub fn string_constant(strings: &[Vec<Alpha>], weights: &Weights) -> Result<Alpha> {
    if strings.len() != weights.len() {
        return Err(Error::LengthMismatch {
            context: "string constant",
            left: strings.len(),
            right: weights.len(),
        });
    }
    let mut value = 0.0;
    for (string, w) in strings.iter().zip(weights.as_slice()) {
        value += w * compose_constant(string)?.get();
    }
    Ok(Alpha::from_formula(value))
}

/// The older string-averaging constant `max_k m_k / (m_k - 1 + 1/a_max(k))`,
/// which rates every string by its worst factor. Never smaller than
/// [`string_constant`], and strictly larger as soon as some string mixes
/// unequal constants or strings differ in length.
pub fn string_constant_legacy(strings: &[Vec<Alpha>], weights: &Weights) -> Result<Alpha> {
    if strings.len() != weights.len() {
        return Err(Error::LengthMismatch {
            context: "string constant",
            left: strings.len(),
            right: weights.len(),
        });
    }
    let mut worst: f64 = 0.0;
    for string in strings {
        worst = worst.max(max_based_bound(string)?.get());
    }
    Ok(Alpha::from_formula(worst))
}

/// One endpoint of a relaxation interval, together with whether the
/// endpoint itself is admissible. Schedule validators honor this
/// distinction: open endpoints are excluded exactly, closed endpoints admit
/// a [`BOUNDARY_SLACK`]-sized rounding allowance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RangeBound {
    /// The endpoint value.
    pub value: f64,
    /// True when the endpoint belongs to the admissible interval.
    pub inclusive: bool,
}

/// The two relaxation upper bounds available for an alpha-averaged
/// operator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RelaxationRanges {
    /// Classical Krasnosel'skii-Mann supremum `1/alpha`; the interval
    /// `]0, 1/alpha[` is open at the top.
    pub km_sup: RangeBound,
    /// Enlarged supremum `(1 - eps)(1 + eps alpha)/alpha`; the interval
    /// `[eps, ...]` is closed at the top. Always strictly below `km_sup`.
    pub extended_sup: RangeBound,
}

/// Computes both relaxation upper bounds for a given constant and slack.
pub fn relaxation_ranges(alpha: Alpha, eps: Epsilon) -> RelaxationRanges {
    let a = alpha.get();
    let e = eps.get();
    RelaxationRanges {
        km_sup: RangeBound { value: 1.0 / a, inclusive: false },
        extended_sup: RangeBound { value: (1.0 - e) * (1.0 + e * a) / a, inclusive: true },
    }
}

/// Derived parameters of a forward-backward step: the averagedness
/// constant of the composed step and the largest admissible relaxation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FbParameters {
    /// Constant of `J_{gamma A} (Id - gamma B)`: `2 beta / (4 beta - gamma)`.
    pub phi: Alpha,
    /// Largest admissible relaxation `(1 - eps)(2 + eps - gamma/(2 beta))`,
    /// an inclusive endpoint. Algebraically equal to
    /// `(1 - eps)(1 + eps phi)/phi`.
    pub lambda_sup: f64,
}

/// Computes the forward-backward step parameters for cocoercivity modulus
/// `beta`, step size `gamma`, and slack `eps`.
///
/// Requires `eps < beta` and `gamma` in `[eps, 2 beta / (1 + eps)]`; a step
/// outside that interval is rejected with the violated endpoint named.
pub fn fb_parameters(beta: f64, gamma: f64, eps: Epsilon) -> Result<FbParameters> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidSpec(format!("cocoercivity modulus must be positive, got {beta}")));
    }
    let e = eps.get();
    if e >= beta {
        return Err(Error::InvalidEpsilon(e));
    }
    let lower = e;
    let upper = 2.0 * beta / (1.0 + e);
    let slack = BOUNDARY_SLACK * upper.max(1.0);
    if !gamma.is_finite() || gamma < lower - slack {
        return Err(Error::StepSizeOutOfRange {
            index: 0,
            gamma,
            lower,
            upper,
            side: "lower",
        });
    }
    if gamma > upper + slack {
        return Err(Error::StepSizeOutOfRange {
            index: 0,
            gamma,
            lower,
            upper,
            side: "upper",
        });
    }
    let phi = Alpha::from_formula(2.0 * beta / (4.0 * beta - gamma));
    let lambda_sup = (1.0 - e) * (2.0 + e - gamma / (2.0 * beta));
    Ok(FbParameters { phi, lambda_sup })
}

/// Constant of the relaxed operator `x -> x + lambda (T x - x)` built from
/// an alpha-averaged `T`: the product `lambda * alpha`, admissible for any
/// `lambda` in the open interval `]0, 1/alpha[` (overrelaxation `lambda > 1`
/// included).
pub fn relaxed_constant(alpha: Alpha, lambda: f64) -> Result<Alpha> {
    if !(lambda.is_finite() && lambda > 0.0) || lambda * alpha.get() >= 1.0 {
        return Err(Error::RelaxationOutOfRange {
            index: 0,
            lambda,
            lower: 0.0,
            upper: 1.0 / alpha.get(),
            inclusive: false,
        });
    }
    Ok(Alpha::from_formula(lambda * alpha.get()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn a(v: f64) -> Alpha {
        Alpha::new(v).unwrap()
    }

    #[test]
    fn alpha_rejects_out_of_range_values() {
        assert!(Alpha::new(0.0).is_err());
        assert!(Alpha::new(1.0).is_err());
        assert!(Alpha::new(-0.3).is_err());
        assert!(Alpha::new(f64::NAN).is_err());
        assert!(Alpha::new(f64::INFINITY).is_err());
        assert!(Alpha::new(0.5).is_ok());
    }

    #[test]
    fn weights_validate_positivity_and_sum() {
        assert!(Weights::new(vec![]).is_err());
        assert!(Weights::new(vec![0.5, 0.6]).is_err());
        assert!(Weights::new(vec![1.1, -0.1]).is_err());
        assert!(Weights::new(vec![0.25, 0.75]).is_ok());
        assert!(Weights::new(vec![1.0]).is_ok());
        assert!(Weights::uniform(3).is_ok());
        assert!(Weights::uniform(0).is_err());
    }

    #[test]
    fn epsilon_is_strictly_between_zero_and_half() {
        assert!(Epsilon::new(0.0).is_err());
        assert!(Epsilon::new(0.5).is_err());
        assert!(Epsilon::new(0.499).is_ok());
        assert!(Epsilon::new(1e-9).is_ok());
    }

    #[test]
    fn pair_composition_matches_hand_values() {
        // (3/4, 1/8): numerator 11/16, denominator 29/32.
        assert!((compose_pair(a(0.75), a(0.125)).get() - 22.0 / 29.0).abs() < 1e-15);
        // Two firmly nonexpansive factors compose to 2/3.
        assert!((compose_pair(a(0.5), a(0.5)).get() - 2.0 / 3.0).abs() < 1e-15);
        // Equal constants reduce to 2a/(1+a).
        assert!((compose_pair(a(0.3), a(0.3)).get() - 6.0 / 13.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_handles_short_lists() {
        assert!(compose_constant(&[]).is_err());
        assert_eq!(compose_constant(&[a(0.5)]).unwrap(), a(0.5));
        let three = compose_constant(&[a(0.5), a(0.5), a(0.5)]).unwrap();
        assert!((three.get() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn closed_form_is_permutation_invariant() {
        let forward = compose_constant(&[a(0.9), a(0.2), a(0.55)]).unwrap().get();
        let backward = compose_constant(&[a(0.55), a(0.9), a(0.2)]).unwrap().get();
        assert!((forward - backward).abs() < 1e-15);
    }

    #[test]
    fn recursion_agrees_with_closed_form() {
        let alphas = [a(0.75), a(0.125), a(0.6), a(0.33)];
        let closed = compose_constant(&alphas).unwrap().get();
        let recursive = compose_constant_recursive(&alphas).unwrap().get();
        assert!((closed - recursive).abs() < 1e-12);
        // Two factors reduce to the pair formula exactly.
        assert_eq!(
            compose_constant_recursive(&[a(0.75), a(0.125)]).unwrap(),
            compose_pair(a(0.125), a(0.75))
        );
    }

    #[test]
    fn elementary_symmetric_matches_hand_values() {
        let sigma = elementary_symmetric(&[a(0.5), a(0.5), a(0.5)]).unwrap();
        assert_eq!(sigma.len(), 3);
        assert!((sigma[0] - 1.5).abs() < 1e-15);
        assert!((sigma[1] - 0.75).abs() < 1e-15);
        assert!((sigma[2] - 0.125).abs() < 1e-15);

        let sigma = elementary_symmetric(&[a(0.75), a(0.125)]).unwrap();
        assert!((sigma[0] - 0.875).abs() < 1e-15);
        assert!((sigma[1] - 0.09375).abs() < 1e-15);
    }

    #[test]
    fn symmetric_form_matches_hand_values() {
        // (0.875 - 2*0.09375) / (1 - 0.09375) = 22/29.
        let two = compose_constant_symmetric(&[a(0.75), a(0.125)]).unwrap();
        assert!((two.get() - 22.0 / 29.0).abs() < 1e-15);
        // Equal pair: 2a/(1+a) at a = 0.9 gives 18/19.
        let pair = compose_constant_symmetric(&[a(0.9), a(0.9)]).unwrap();
        assert!((pair.get() - 18.0 / 19.0).abs() < 1e-15);
        // Three halves: numerator 0.375, denominator 0.5.
        let three = compose_constant_symmetric(&[a(0.5), a(0.5), a(0.5)]).unwrap();
        assert!((three.get() - 0.75).abs() < 1e-15);
        assert!(compose_constant_symmetric(&[a(0.5)]).is_err());
    }

    #[test]
    fn series_truncations_bracket_the_constant() {
        // Depth 1 keeps only sum a_i: S = 1 for two halves.
        let shallow = compose_constant_series(&[a(0.5), a(0.5)], 1).unwrap();
        assert!((shallow.value - 0.5).abs() < 1e-15);
        // Depth 30 is within 1e-8 of the exact 2/3.
        let deep = compose_constant_series(&[a(0.5), a(0.5)], 30).unwrap();
        assert!((deep.value - 2.0 / 3.0).abs() < 1e-8);
        // The truncation sits below the exact value, within its own bound.
        let exact = compose_constant(&[a(0.5), a(0.5)]).unwrap().get();
        assert!(deep.value <= exact + 1e-15);
        assert!(exact - deep.value <= deep.tail_bound);
        assert!(compose_constant_series(&[a(0.5)], 0).is_err());
    }

    #[test]
    fn series_converges_monotonically_upward() {
        let alphas = [a(0.8), a(0.35), a(0.6)];
        let exact = compose_constant(&alphas).unwrap().get();
        let mut previous = 0.0;
        for depth in 1..=120 {
            let est = compose_constant_series(&alphas, depth).unwrap();
            assert!(est.value >= previous);
            assert!(est.value <= exact + 1e-15);
            assert!(exact - est.value <= est.tail_bound + 1e-15);
            previous = est.value;
        }
        assert!((previous - exact).abs() < 1e-10);
    }

    #[test]
    fn combination_constant_is_the_weighted_average() {
        let w = Weights::new(vec![0.25, 0.75]).unwrap();
        let c = combination_constant(&w, &[a(0.5), a(0.25)]).unwrap();
        assert!((c.get() - 0.3125).abs() < 1e-15);
        assert!(combination_constant(&w, &[a(0.5)]).is_err());
    }

    #[test]
    fn max_based_bound_matches_hand_values() {
        assert!((max_based_bound(&[a(0.75), a(0.125)]).unwrap().get() - 6.0 / 7.0).abs() < 1e-15);
        assert!((max_based_bound(&[a(0.5), a(0.5)]).unwrap().get() - 2.0 / 3.0).abs() < 1e-15);
        // Single factor: the bound collapses to the constant itself.
        assert_eq!(max_based_bound(&[a(0.37)]).unwrap().get(), 0.37);
    }

    #[test]
    fn additive_bound_and_gap_match_hand_values() {
        let b = additive_bound(a(0.75), a(0.125));
        assert_eq!(b.get(), 25.0 / 32.0); // all dyadic, exact
        assert_eq!(additive_bound(a(0.5), a(0.5)).get(), 0.75);
        // For small equal constants the bound approaches 2a.
        let tiny = 1e-6;
        assert!((additive_bound(a(tiny), a(tiny)).get() - 2.0 * tiny).abs() < 1e-11);

        let gap = additive_gap(a(0.75), a(0.125));
        let sharp = compose_pair(a(0.75), a(0.125)).get();
        assert!((b.get() - sharp - gap).abs() < 1e-15);
    }

    #[test]
    fn classical_bounds_are_incomparable_across_regimes() {
        // At (3/4, 1/8) the additive bound wins...
        let phi_hat = additive_bound(a(0.75), a(0.125)).get();
        let phi_tilde = max_based_bound(&[a(0.75), a(0.125)]).unwrap().get();
        assert!(phi_hat < phi_tilde);
        // ...but at an equal pair the max-based bound wins.
        let phi_hat_eq = additive_bound(a(0.5), a(0.5)).get();
        let phi_tilde_eq = max_based_bound(&[a(0.5), a(0.5)]).unwrap().get();
        assert!(phi_tilde_eq < phi_hat_eq);
    }

    #[test]
    fn string_constants_match_hand_values() {
        let strings = vec![vec![a(0.5), a(0.5)], vec![a(0.5)]];
        let w = Weights::new(vec![0.5, 0.5]).unwrap();
        let sharp = string_constant(&strings, &w).unwrap();
        assert!((sharp.get() - 7.0 / 12.0).abs() < 1e-15);
        let legacy = string_constant_legacy(&strings, &w).unwrap();
        assert!((legacy.get() - 2.0 / 3.0).abs() < 1e-15);
        assert!(sharp.get() < legacy.get());

        // One string of two unequal factors: legacy rates it by the worst factor.
        let strings = vec![vec![a(0.75), a(0.125)]];
        let w = Weights::new(vec![1.0]).unwrap();
        let legacy = string_constant_legacy(&strings, &w).unwrap();
        assert!((legacy.get() - 6.0 / 7.0).abs() < 1e-15);
        let sharp = string_constant(&strings, &w).unwrap();
        assert!((sharp.get() - 22.0 / 29.0).abs() < 1e-15);
    }

    #[test]
    fn relaxation_ranges_match_hand_values() {
        let r = relaxation_ranges(a(2.0 / 3.0), Epsilon::new(0.1).unwrap());
        assert!((r.km_sup.value - 1.5).abs() < 1e-12);
        assert!(!r.km_sup.inclusive);
        assert!((r.extended_sup.value - 1.44).abs() < 1e-12);
        assert!(r.extended_sup.inclusive);

        let r = relaxation_ranges(a(0.5), Epsilon::new(0.25).unwrap());
        assert!((r.km_sup.value - 2.0).abs() < 1e-15);
        assert!((r.extended_sup.value - 0.75 * 1.125 / 0.5).abs() < 1e-15);

        // As eps -> 0+, the enlarged bound approaches 1/alpha from below.
        let r = relaxation_ranges(a(2.0 / 3.0), Epsilon::new(1e-9).unwrap());
        assert!(r.extended_sup.value < r.km_sup.value);
        assert!(r.km_sup.value - r.extended_sup.value < 1e-8);
    }

    #[test]
    fn extended_range_is_always_a_strict_subrange() {
        for &alpha in &[0.05, 0.3, 0.5, 0.75, 0.99] {
            for &eps in &[1e-6, 0.05, 0.2, 0.49] {
                let r = relaxation_ranges(a(alpha), Epsilon::new(eps).unwrap());
                assert!(r.extended_sup.value < r.km_sup.value);
                assert!(r.extended_sup.value > 0.0);
            }
        }
    }

    #[test]
    fn fb_parameters_match_hand_values() {
        let eps = Epsilon::new(0.1).unwrap();
        let p = fb_parameters(1.0, 1.0, eps).unwrap();
        assert!((p.phi.get() - 2.0 / 3.0).abs() < 1e-15);
        assert!((p.lambda_sup - 1.44).abs() < 1e-12);

        // Largest admissible step: gamma = 2 beta / (1 + eps).
        let gamma = 2.0 / 1.1;
        let p = fb_parameters(1.0, gamma, eps).unwrap();
        assert!((p.phi.get() - 11.0 / 12.0).abs() < 1e-12);
        assert!((p.lambda_sup - 0.9 * (2.1 - gamma / 2.0)).abs() < 1e-15);
        assert!(p.lambda_sup > 1.0); // the enlarged range always clears 1

        // The two expressions for the supremum agree.
        for &gamma in &[0.15, 0.5, 1.0, 1.5, 1.8] {
            let p = fb_parameters(1.0, gamma, eps).unwrap();
            let via_phi = (1.0 - 0.1) * (1.0 + 0.1 * p.phi.get()) / p.phi.get();
            assert!((p.lambda_sup - via_phi).abs() < 1e-12);
        }
    }

    #[test]
    fn fb_parameters_reject_bad_steps() {
        let eps = Epsilon::new(0.1).unwrap();
        match fb_parameters(1.0, 1.9, eps) {
            Err(Error::StepSizeOutOfRange { side: "upper", .. }) => {}
            other => panic!("expected an upper-bound violation, got {other:?}"),
        }
        match fb_parameters(1.0, 0.05, eps) {
            Err(Error::StepSizeOutOfRange { side: "lower", .. }) => {}
            other => panic!("expected a lower-bound violation, got {other:?}"),
        }
        // eps must stay below beta.
        assert!(fb_parameters(0.05, 0.04, eps).is_err());
        // Boundary steps are admissible (closed interval).
        assert!(fb_parameters(1.0, 2.0 / 1.1, eps).is_ok());
        assert!(fb_parameters(1.0, 0.1, eps).is_ok());
    }

    #[test]
    fn relaxed_constant_is_the_product_up_to_the_open_cap() {
        let c = relaxed_constant(a(0.5), 1.6).unwrap();
        assert!((c.get() - 0.8).abs() < 1e-15);
        assert!(relaxed_constant(a(0.5), 2.0).is_err()); // boundary excluded
        assert!(relaxed_constant(a(0.5), -1.0).is_err());
        assert!(relaxed_constant(a(0.5), 1.9999999).is_ok());
    }

    proptest! {
        #[test]
        fn all_three_product_forms_agree(
            alphas in proptest::collection::vec(0.01f64..0.99, 2..8)
        ) {
            let alphas: Vec<Alpha> = alphas.into_iter().map(|v| Alpha::new(v).unwrap()).collect();
            let closed = compose_constant(&alphas).unwrap().get();
            let recursive = compose_constant_recursive(&alphas).unwrap().get();
            let symmetric = compose_constant_symmetric(&alphas).unwrap().get();
            prop_assert!((closed - recursive).abs() < 1e-12);
            prop_assert!((closed - symmetric).abs() < 1e-10);
        }

        #[test]
        fn sharp_constant_dominates_factors_and_respects_bounds(
            alphas in proptest::collection::vec(0.01f64..0.99, 2..8)
        ) {
            let alphas: Vec<Alpha> = alphas.into_iter().map(|v| Alpha::new(v).unwrap()).collect();
            let phi = compose_constant(&alphas).unwrap().get();
            let a_max = alphas.iter().map(|a| a.get()).fold(0.0, f64::max);
            prop_assert!(phi > a_max);
            prop_assert!(phi < 1.0);
            let coarse = max_based_bound(&alphas).unwrap().get();
            prop_assert!(phi <= coarse + 1e-12);
        }

        #[test]
        fn two_factor_gap_formula_is_exact(a1 in 0.01f64..0.99, a2 in 0.01f64..0.99) {
            let (a1, a2) = (Alpha::new(a1).unwrap(), Alpha::new(a2).unwrap());
            let sharp = compose_pair(a1, a2).get();
            let coarse = additive_bound(a1, a2).get();
            prop_assert!(sharp < coarse);
            prop_assert!((coarse - sharp - additive_gap(a1, a2)).abs() < 1e-12);
        }

        #[test]
        fn sharp_constant_is_monotone_in_each_factor(
            a1 in 0.01f64..0.95, a2 in 0.01f64..0.99, bump in 0.001f64..0.04
        ) {
            let base = compose_pair(Alpha::new(a1).unwrap(), Alpha::new(a2).unwrap()).get();
            let bumped = compose_pair(Alpha::new(a1 + bump).unwrap(), Alpha::new(a2).unwrap()).get();
            prop_assert!(bumped > base);
        }

        #[test]
        fn string_constant_never_exceeds_legacy(
            lens in proptest::collection::vec(1usize..4, 1..4),
            raw in proptest::collection::vec(0.01f64..0.99, 12)
        ) {
            let mut it = raw.into_iter();
            let strings: Vec<Vec<Alpha>> = lens
                .iter()
                .map(|&l| (0..l).map(|_| Alpha::new(it.next().unwrap()).unwrap()).collect())
                .collect();
            let w = Weights::uniform(strings.len()).unwrap();
            let sharp = string_constant(&strings, &w).unwrap().get();
            let legacy = string_constant_legacy(&strings, &w).unwrap().get();
            prop_assert!(sharp <= legacy + 1e-15);
        }
    }
}
