//! A tour of the averagedness calculus: the sharp constants of operator
//! compositions and combinations, the classical bounds they improve on,
//! and the relaxation room they buy.
//!
//! Run with: `cargo run --example constants_tour`

use opsplit::constants::{
    additive_bound, additive_gap, combination_constant, compose_constant,
    compose_constant_recursive, compose_constant_series, compose_constant_symmetric,
    fb_parameters, max_based_bound, relaxation_ranges, string_constant, string_constant_legacy,
    Alpha, Epsilon, Weights,
};

fn main() -> opsplit::Result<()> {
    // --- Two firmly nonexpansive factors --------------------------------
    // Projections, proximity operators, and resolvents are all
    // 1/2-averaged. Their composite is 2/3-averaged — noticeably better
    // than the 3/4 the additive rule alpha1 + alpha2 - alpha1*alpha2
    // would give.
    let half = Alpha::half();
    let two_projections = compose_constant(&[half, half])?;
    println!("two projections compose to   alpha = {:.6}", two_projections.get());
    println!("additive bound claims        alpha = {:.6}", additive_bound(half, half).get());
    assert!((two_projections.get() - 2.0 / 3.0).abs() < 1e-15);

    // --- An uneven pair --------------------------------------------------
    let a = Alpha::new(0.75)?;
    let b = Alpha::new(0.125)?;
    let sharp = compose_constant(&[a, b])?;
    let hat = additive_bound(a, b);
    let tilde = max_based_bound(&[a, b])?;
    println!("\ncompose(0.75, 0.125):");
    println!("  sharp constant     {:.12}  (= 22/29)", sharp.get());
    println!("  additive bound     {:.12}  (= 25/32)", hat.get());
    println!("  max-based bound    {:.12}  (= 6/7)", tilde.get());
    // The gap to the additive bound is known in closed form.
    let gap = additive_gap(a, b);
    assert!((hat.get() - sharp.get() - gap).abs() < 1e-15);
    println!("  closed-form gap    {:.12}", gap);

    // --- Four routes to the same number ----------------------------------
    // The closed form, the pairwise recursion, the symmetric-polynomial
    // form, and the truncated power series all agree.
    let factors = vec![Alpha::new(0.3)?, Alpha::new(0.55)?, Alpha::new(0.8)?, Alpha::new(0.45)?];
    let closed = compose_constant(&factors)?.get();
    let recursive = compose_constant_recursive(&factors)?.get();
    let symmetric = compose_constant_symmetric(&factors)?.get();
    let series = compose_constant_series(&factors, 200)?;
    println!("\nfour factors, four routes:");
    println!("  closed form        {closed:.15}");
    println!("  pairwise recursion {recursive:.15}");
    println!("  symmetric form     {symmetric:.15}");
    println!("  series (depth 200) {:.15}  (tail bound {:.3e})", series.value, series.tail_bound);
    assert!((closed - recursive).abs() < 1e-12);
    assert!((closed - symmetric).abs() < 1e-12);
    assert!(closed >= series.value && closed - series.value <= series.tail_bound);

    // --- Convex combinations and strings ---------------------------------
    // A weighted average of averaged maps just averages the constants; a
    // string average composes within each string first. The sharp string
    // constant sits below the older max-based one, which is what lets
    // string methods relax harder.
    let weights = Weights::uniform(2)?;
    let flat = combination_constant(&weights, &[half, half])?;
    println!("\nuniform average of two projections: alpha = {:.6}", flat.get());
    let strings = vec![vec![half, half], vec![half]];
    let alpha = string_constant(&strings, &weights)?;
    let alpha_legacy = string_constant_legacy(&strings, &weights)?;
    println!("strings [[P0, P1], [P2]]:");
    println!("  sharp string constant  {:.6}  (= 7/12)", alpha.get());
    println!("  legacy string constant {:.6}  (= 2/3)", alpha_legacy.get());
    assert!(alpha.get() < alpha_legacy.get());

    // --- What the constants buy ------------------------------------------
    // Every alpha-averaged map admits relaxations up to 1/alpha; under
    // summable errors and a slack eps the usable range is a closed
    // interval whose top sits just below that.
    let eps = Epsilon::new(0.1)?;
    let ranges = relaxation_ranges(sharp, eps);
    println!("\nrelaxation ranges at alpha = 22/29, eps = 0.1:");
    println!(
        "  exact iterations:   lambda in ]0, {:.6}[  (open)",
        ranges.km_sup.value
    );
    println!(
        "  summable errors:    lambda in [0.1, {:.6}]  (closed)",
        ranges.extended_sup.value
    );
    assert!(ranges.extended_sup.value < ranges.km_sup.value);

    // --- Forward-backward steps -------------------------------------------
    // For J_{gamma A}(Id - gamma B) with B beta-cocoercive the same
    // calculus gives the step constant 2*beta/(4*beta - gamma) and with it
    // relaxations well beyond 1 — here up to 1.44 at gamma = beta = 1.
    let fb = fb_parameters(1.0, 1.0, eps)?;
    println!("\nforward-backward step at beta = 1, gamma = 1, eps = 0.1:");
    println!("  step constant  {:.6}  (= 2/3)", fb.phi.get());
    println!("  lambda_sup     {:.6}", fb.lambda_sup);
    assert!((fb.lambda_sup - 1.44).abs() < 1e-12);

    println!("\nall identities checked.");
    Ok(())
}
