//! Proximity operator of the scaled l1 norm.

use super::AveragedMap;
use crate::constants::Alpha;
use crate::Point;

/// Componentwise soft threshold: the unique minimizer of
/// `t * |u| + (1/2)(u - x_i)^2` in each coordinate, i.e. the proximity
/// operator of `t * ||.||_1`. A zero threshold is the identity.
pub fn soft_threshold(x: &Point, threshold: f64) -> Point {
    debug_assert!(threshold >= 0.0, "soft threshold must be nonnegative");
    Point::from_iterator(
        x.len(),
        x.iter().map(|&v| v.signum() * (v.abs() - threshold).max(0.0)),
    )
}

/// The soft threshold as an averaged map. Proximity operators of convex
/// functions are firmly nonexpansive, so the constant is 1/2.
pub fn l1_prox_map(dim: usize, threshold: f64) -> AveragedMap {
    AveragedMap::from_fn(dim, Alpha::half(), move |x| soft_threshold(x, threshold))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;
    use proptest::prelude::*;

    /// Brute-force scalar prox: minimize t|u| + (v-u)^2/2 over a fine grid.
    fn grid_prox(v: f64, t: f64) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        let span = v.abs() + 1.0;
        let steps = 400_000;
        for k in 0..=steps {
            let u = -span + 2.0 * span * k as f64 / steps as f64;
            let obj = t * u.abs() + 0.5 * (v - u).powi(2);
            if obj < best.0 {
                best = (obj, u);
            }
        }
        best.1
    }

    #[test]
    fn matches_hand_values() {
        let out = soft_threshold(&dvector![3.0, -0.2, 0.0], 1.0);
        assert_eq!(out, dvector![2.0, 0.0, 0.0]);
    }

    #[test]
    fn matches_the_grid_search_oracle() {
        for &(v, t) in &[(3.0, 1.0), (-0.2, 1.0), (0.0, 1.0), (1.7, 0.3), (-5.0, 2.5)] {
            let fast = soft_threshold(&dvector![v], t)[0];
            let slow = grid_prox(v, t);
            assert!(
                (fast - slow).abs() < 1e-4,
                "prox({v}, {t}): closed form {fast} vs grid {slow}"
            );
        }
    }

    #[test]
    fn zero_threshold_is_the_identity() {
        let x = dvector![1.5, -2.5, 0.0];
        assert_eq!(soft_threshold(&x, 0.0), x);
    }

    #[test]
    fn map_wrapper_is_firmly_nonexpansive_by_construction() {
        let m = l1_prox_map(3, 0.75);
        assert_eq!(m.alpha(), Alpha::half());
        assert_eq!(m.evaluate(&dvector![1.0, -1.0, 0.5]), dvector![0.25, -0.25, 0.0]);
    }

    proptest! {
        #[test]
        fn output_satisfies_the_subgradient_optimality_condition(
            v in -10.0f64..10.0, t in 0.0f64..5.0
        ) {
            // u = prox(v) iff v - u is a subgradient of t|.| at u.
            let u = soft_threshold(&dvector![v], t)[0];
            let g = v - u;
            if u != 0.0 {
                prop_assert!((g - t * u.signum()).abs() < 1e-12);
            } else {
                prop_assert!(g.abs() <= t + 1e-12);
            }
        }
    }
}
